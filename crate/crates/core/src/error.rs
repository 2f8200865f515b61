use thiserror::Error;

/// Errors raised by form algebra and the operators built on it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("quaternionic dimension {0} is outside 1..=16")]
    BadDimension(usize),
    #[error("unknown generator name `{0}`")]
    BadGenerator(String),
    #[error("forms live on different spaces (n = {0} and n = {1})")]
    SpaceMismatch(usize, usize),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("form is not of pure bidegree ({0},{1})")]
    WrongBidegree(usize, usize),
    #[error("real structure is only an involution in even degree, got degree {0}")]
    OddDegree(usize),
    #[error("form is not real")]
    NotReal,
    #[error("degree {degree} exceeds the middle degree {middle}; the top-weight projection is not defined there")]
    AboveMiddle { degree: usize, middle: usize },
    #[error("input is not in the top-weight subspace")]
    NotTopWeight,
    #[error("repeated generator in a term")]
    RepeatedGenerator,
    #[error("n = {n} exceeds the supported bound {bound} for this computation")]
    TooLarge { n: usize, bound: usize },
    #[error("{0}")]
    Invalid(String),
}

/// Errors from the metric side of the bridge and from positivity tests.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BridgeError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("metric is not invariant under {op}: entry ({row},{col}) differs")]
    NotInvariant { op: char, row: usize, col: usize },
    #[error("metric is not symmetric at ({0},{1})")]
    NotSymmetric(usize, usize),
    #[error("background metric is not positive definite")]
    NotPositiveDefinite,
    #[error("form is not strictly positive")]
    NotStrictlyPositive,
    #[error("input vectors are dependent over the quaternions")]
    DependentInputs,
    #[error("eigenvalues are not rational; use float mode")]
    IrrationalSpectrum,
    #[error("matrix size {got} does not match 4n = {want}")]
    BadSize { got: usize, want: usize },
    #[error("{0} out of range")]
    OutOfRange(String),
    #[error("exact strategy is only available for p = 1 or p = n (got p = {0})")]
    ExactUnavailable(usize),
}

/// Errors from the numerical experiments.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error("form is not positive at |x| = {radius:.3e}: smallest quaternionic eigenvalue {value:.3e}")]
    NotPositive { radius: f64, value: f64 },
    #[error("form is not real at |x| = {radius:.3e}")]
    NotReal { radius: f64 },
    #[error("finite-difference ∂η residual {residual:.3e} exceeds {tolerance:.1e}")]
    NotClosed { residual: f64, tolerance: f64 },
    #[error("{got} samples per shell is below the minimum {need}")]
    TooFewSamples { got: u64, need: u64 },
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("invalid family: {0}")]
    BadFamily(String),
    #[error("shell integrals do not converge; the extension test needs an integrable family")]
    NotConvergent,
}
