//! Toy tri-modal alignment model over SMILES, captions and binned
//! descriptor values: three transformer encoders, two decoders, the six
//! training objectives, gradient checks and triplet synthesis.
//!
//! All arithmetic is f64 on a small reverse-mode tape ([`tape::Tape`]).

pub mod batch;
pub mod checkpoint;
pub mod generate;
pub mod gradcheck;
pub mod loss;
pub mod model;
pub mod optim;
pub mod tape;
pub mod tensor;
pub mod train;
pub mod vocab;

use thiserror::Error;

pub use batch::{derangement, Batch, Example};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use generate::{synthesize_triplets, CaptionSource, Synthesis};
pub use gradcheck::{grad_check, GradCheckReport};
pub use loss::{batch_losses, clm_loss, contrastive_loss, match_loss, total_loss, LossBreakdown, LossTerm};
pub use model::{AlignModel, ModelConfig, ParamStore, Seqs};
pub use optim::AdamWConfig;
pub use tensor::Tensor;
pub use train::{retrieval_accuracy, train, Direction, TrainConfig, TrainOutput};
pub use vocab::{build_vocabularies, Modality, PropertyBinner, Vocabs, Vocabulary};

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("token id {id} outside vocabulary of {vocab}")]
    TokenIdOutOfRange { id: usize, vocab: usize },
    #[error("matching label {0} is not 0 or 1")]
    LabelOutOfRange(usize),
    #[error("batch of {size} rows, at least {needed} needed")]
    BatchTooSmall { size: usize, needed: usize },
    #[error("decoder target has no position to predict")]
    TargetTooShort,
    #[error("loss weights must be non-negative (alpha {alpha}, beta {beta})")]
    NegativeWeight { alpha: f64, beta: f64 },
    #[error("non-finite gradient in {0}")]
    NonFiniteGradient(String),
    #[error("training diverged in epoch {epoch}: total loss {value}")]
    DivergedLoss { epoch: usize, value: f64 },
    #[error("invalid SMILES '{smiles}': {reason}")]
    InvalidSmiles { smiles: String, reason: String },
    #[error("caption file {0} not found")]
    MissingCaptionFile(String),
    #[error("{smiles} SMILES but {captions} caption lines")]
    CaptionCountMismatch { smiles: usize, captions: usize },
    #[error("triplet properties {found:?} do not match the binner's {expected:?}")]
    PropertyNamesMismatch { expected: Vec<String>, found: Vec<String> },
    #[error("checkpoint: {0}")]
    BadCheckpoint(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
