use thiserror::Error;

use crate::realization::Flavor;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Operand shapes do not conform.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("flavor mismatch: expected {expected:?}, found {found:?}")]
    FlavorMismatch { expected: Flavor, found: Flavor },

    #[error("transfer function evaluated at a pole (resolvent condition {condition:e})")]
    EvaluationAtPole { condition: f64 },

    /// Spectra overlap so the Sylvester/Stein operator is (nearly) singular.
    #[error("matrix equation is not uniquely solvable: separation {separation:e}, condition estimate {condition:e}")]
    Unsolvable { separation: f64, condition: f64 },

    #[error("matrix equation solved inaccurately: residual {residual:e} exceeds bound {bound:e}")]
    Inaccurate { residual: f64, bound: f64 },

    #[error("singular matrix in {context} (condition {condition:e})")]
    Singular { context: &'static str, condition: f64 },

    #[error("not a positive contraction: eigenvalue {eigenvalue} outside [-tol, 1 + tol]")]
    ContractionViolation { eigenvalue: f64 },

    #[error("matrix is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("invalid Blaschke product: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A pipeline input failed stable-dissipative / stable-unitary validation.
    #[error("{factor} realization failed validation: {detail}")]
    InvalidRealization { factor: &'static str, detail: String },

    #[error("kernel dimensions did not reach 0 within {cap} steps: {kernel_dims:?}")]
    NonTermination { cap: usize, kernel_dims: Vec<usize> },

    #[error("kernel dimensions increased: {kernel_dims:?}")]
    KernelIncrease { kernel_dims: Vec<usize> },

    #[error("inconsistent profile: {negative} negative + {positive} positive indices exceed size {size}")]
    InconsistentProfile { negative: usize, positive: usize, size: usize },

    #[error("cross-check failed: {0}")]
    CrossCheck(String),

    #[error("denominator vanishes at the evaluation point")]
    ZeroDenominator,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("winding number not resolved with {samples} samples")]
    Resolution { samples: usize },
}
