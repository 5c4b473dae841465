use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode count mismatch: {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },

    #[error("mode index {mode} out of range for a {mode_count}-mode state")]
    ModeOutOfRange { mode: usize, mode_count: usize },

    #[error("occupation {occupation} exceeds cutoff {cutoff} in mode {mode}")]
    OccupationOutOfRange {
        mode: usize,
        occupation: usize,
        cutoff: usize,
    },

    #[error("truncation tail weight {tail:e} exceeds {limit:e} at cutoff {cutoff}")]
    TailWeight { tail: f64, limit: f64, cutoff: usize },

    #[error("cutoff {cutoff} leaves less than {margin} photons of margin above occupied support {support} in mode {mode}")]
    InsufficientCutoff {
        mode: usize,
        cutoff: usize,
        support: usize,
        margin: usize,
    },

    #[error("unknown projector '{0}'")]
    UnknownProjector(String),

    #[error("unknown measurement model '{0}'")]
    UnknownModel(String),

    #[error("probability {0} lies outside [0, 1] beyond rounding tolerance")]
    InvalidProbability(f64),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("keep set must name at least one mode")]
    EmptyKeepSet,

    #[error("expected a {expected} qubit, got {found}")]
    WrongBasis {
        expected: &'static str,
        found: &'static str,
    },

    #[error("state has support outside the single-photon subspace of modes ({0}, {1})")]
    NotDualRail(usize, usize),

    #[error("modulation factor undefined at alpha = 0")]
    ZeroAlpha,

    #[error("modulation factor A_{n} vanishes at alpha = {alpha}")]
    VanishingModulation { n: usize, alpha: f64 },

    #[error("no root of the demodulation condition with |gamma| <= 1 (alpha = {alpha})")]
    NoRoot { alpha: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("qubits are not orthogonal: |<a|b>| = {0:e}")]
    NotOrthogonal(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
