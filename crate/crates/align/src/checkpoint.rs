//! Portable JSON checkpoints. Floats are written with shortest round-trip
//! formatting, so a reloaded model reproduces forward outputs bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{build_layout, AlignModel, ModelConfig, ParamStore};
use crate::vocab::Vocabs;
use crate::AlignError;

pub const FORMAT: &str = "molsynth-align-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    config: ModelConfig,
    vocabs: Vocabs,
    params: ParamStore,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> AlignError + '_ {
    move |source| AlignError::Io { path: path.display().to_string(), source }
}

pub fn save_checkpoint(model: &AlignModel, path: &Path) -> Result<(), AlignError> {
    let ck = Checkpoint {
        format: FORMAT.to_string(),
        version: VERSION,
        config: model.config.clone(),
        vocabs: model.vocabs.clone(),
        params: model.params.clone(),
    };
    let w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    serde_json::to_writer(w, &ck)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<AlignModel, AlignError> {
    let r = BufReader::new(File::open(path).map_err(io_err(path))?);
    let ck: Checkpoint = serde_json::from_reader(r)?;
    if ck.format != FORMAT || ck.version != VERSION {
        return Err(AlignError::BadCheckpoint(format!("format {} v{} (expected {FORMAT} v{VERSION})", ck.format, ck.version)));
    }
    let (layout, template) = build_layout(&ck.config, &ck.vocabs, None);
    if template.names != ck.params.names {
        return Err(AlignError::BadCheckpoint("parameter names do not match the configured layout".into()));
    }
    for (i, (a, b)) in template.tensors.iter().zip(&ck.params.tensors).enumerate() {
        if !a.same_shape(b) || b.data.len() != b.rows * b.cols {
            return Err(AlignError::BadCheckpoint(format!("tensor {} has shape {}x{}", template.names[i], b.rows, b.cols)));
        }
    }
    Ok(AlignModel { config: ck.config, vocabs: ck.vocabs, params: ck.params, layout })
}
