use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("density rho must be positive; first offending node x = {x}")]
    NonPositiveDensity { x: f64 },
    #[error("stiffness sigma must be positive; first offending node x = {x}")]
    NonPositiveStiffness { x: f64 },
    #[error("potential q must be non-negative; first offending node x = {x}")]
    NegativePotential { x: f64 },
    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("grid too coarse: m = {m}, need at least {min}")]
    GridTooCoarse { m: usize, min: usize },
    #[error("too many modes requested: {requested} > m/8 = {max}")]
    TooManyModes { requested: usize, max: usize },
    #[error("eigen solve failed: {0}")]
    EigenSolveFailure(String),
    #[error("degenerate eigenvalues at modes {n} and {}: relative gap {rel_gap:e}", n + 1)]
    DegenerateEigenvalue { n: usize, rel_gap: f64 },
    #[error("sign condition violated at mode {n}: product = {product:e}")]
    SignViolation { n: usize, product: f64 },
    #[error("asymptotic mismatch at mode {n}: {quantity}")]
    AsymptoticMismatch { n: usize, quantity: String },
    #[error("boundary trace mismatch: {0}")]
    TraceMismatch(String),
    #[error("transform solution lost positivity at x = {x}")]
    NonPositiveH { x: f64 },
    #[error("truncation mismatch: state has {state} modes, spectrum has {spectrum}")]
    TruncationMismatch { state: usize, spectrum: usize },
    #[error("time quadrature under-resolved: omega*dt = {omega_dt} > 0.5")]
    QuadratureUnderResolved { omega_dt: f64 },
    #[error("time integration unstable at step {step}: relative energy drift {drift:e}")]
    UnstableStep { step: usize, drift: f64 },
    #[error("blow-up detected at t = {t}: sup norm {sup:e}")]
    BlowupDetected { t: f64, sup: f64 },
    #[error("observation under-sampled: {samples} samples, need at least {required}")]
    UnderSampled { samples: usize, required: usize },
    #[error("gap violation: {0}")]
    GapViolation(String),
    #[error("boundary trace of mode {n} vanishes")]
    ZeroTrace { n: usize },
    #[error("Gram system ill-conditioned: condition estimate {cond:e}")]
    IllConditioned { cond: f64 },
    #[error("fixed-point map is not contracting (ratios {ratios:?})")]
    NoContraction { ratios: Vec<f64> },
    #[error("fixed-point iteration did not converge in {max_iter} iterations")]
    MaxIterExceeded { max_iter: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NonPositiveDensity { .. }
                | Error::NonPositiveStiffness { .. }
                | Error::NegativePotential { .. }
                | Error::InvalidCoefficient(_)
                | Error::LengthMismatch { .. }
                | Error::GridTooCoarse { .. }
                | Error::TooManyModes { .. }
                | Error::TruncationMismatch { .. }
                | Error::InvalidArgument(_)
                | Error::Parse(_)
        )
    }
}
