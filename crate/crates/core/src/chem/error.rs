use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChemError {
    #[error("empty SMILES string")]
    Empty,
    #[error("illegal character {ch:?} at position {position}")]
    IllegalCharacter { position: usize, ch: char },
    #[error("bracket atom opened at position {position} is never closed")]
    UnterminatedBracket { position: usize },
    #[error("invalid bracket atom at position {position}: {reason}")]
    InvalidBracketAtom { position: usize, reason: String },
    #[error("unexpected {found} at position {position}")]
    UnexpectedToken { position: usize, found: String },
    #[error("ring bond {label} opened at position {position} is never closed")]
    UnclosedRing { label: u32, position: usize },
    #[error("unmatched parenthesis at position {position}")]
    UnmatchedParenthesis { position: usize },
    #[error("invalid ring bond {label} at position {position}: {reason}")]
    InvalidRingBond { label: u32, position: usize, reason: String },
    #[error("atom {atom} ({symbol}) has valence {valence}, above what the element permits")]
    ValenceError { atom: usize, symbol: String, valence: u32 },
    #[error("aromaticity error at atom {atom}: {reason}")]
    AromaticPerceptionError { atom: usize, reason: String },
}
