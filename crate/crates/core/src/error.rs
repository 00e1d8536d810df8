use alloc::string::String;

/// Errors surfaced by grid construction, generator assembly and the solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid axis `{name}`: {reason}")]
    InvalidAxis { name: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite coefficient on axis {axis} at grid index {index}")]
    NonFiniteCoefficient { axis: usize, index: usize },

    #[error("diffusion must be positive: axis {axis}, grid index {index}, value {value}")]
    NonPositiveDiffusion { axis: usize, index: usize, value: f64 },

    #[error("transition-rate exponential overflow at site {site} (exponent {exponent})")]
    RateOverflow { site: usize, exponent: f64 },

    #[error("probability vector entry {index} is negative beyond tolerance: {value}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("probability vector has vanishing or non-finite L1 norm: {l1}")]
    BadNorm { l1: f64 },

    #[error("dimension {dim} exceeds dense-solver limit {limit}")]
    DenseLimit { dim: usize, limit: usize },

    #[error("step size {dt} exceeds the block-encoding bound {bound}")]
    StepSizeAboveBound { dt: f64, bound: f64 },

    #[error("matrix square root: eigenvalue {value} below clamping tolerance")]
    IndefiniteBlock { value: f64 },

    #[error("unitarity residual {residual} above tolerance")]
    UnitarityViolation { residual: f64 },

    #[error("-R - R^T has eigenvalue {value} below -1e-8; generator is not dissipative")]
    NotDissipative { value: f64 },

    #[error("post-selection probability {prob} below cutoff; state annihilated")]
    StateAnnihilated { prob: f64 },

    #[error("spectral abscissa {value} is positive beyond tolerance")]
    PositiveAbscissa { value: f64 },

    #[error("Fourier register too coarse: only {points} positive w points (need at least 8)")]
    RegisterTooCoarse { points: usize },

    #[error("imaginary residue {value} above tolerance in recovered state")]
    ImaginaryResidue { value: f64 },

    #[error("Monte Carlo sample {sample} escaped the domain at step {step}; reduce the time step")]
    SampleEscaped { sample: usize, step: usize },

    #[error("solver state contains a negative entry {value} at index {index}; stability bound violated")]
    PositivityLost { index: usize, value: f64 },

    #[error("{0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
