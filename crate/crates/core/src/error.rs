use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("consecutive loop samples {index}->{next} differ by {angle:.3} rad (limit pi/4)", next = index + 1)]
    SamplingTooCoarse { index: usize, angle: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("lambda is not resolved: Nyquist coefficient {0:.3e} exceeds 1e-10")]
    NonSmoothLambda(f64),
    #[error("step {dt} exceeds 1e-2 * min(Lx, Ly) = {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("orthogonality drift {0:.3e} exceeds 1e-6")]
    NonOrthogonalDrift(f64),
    #[error("geodesic does not close: endpoint distance {0:.3e}")]
    NotClosed(f64),
    #[error("section is not unit: max |g^3 + g| = {0:.3e}")]
    NotUnit(f64),
    #[error("section is not resolved: spectral tail {0:.3e}")]
    NotSmooth(f64),
    #[error("section is not holomorphic: residual {0:.3e} above tolerance")]
    GNotHolomorphic(f64),
    #[error("input pair is not certified: transport residual {0:.3e}")]
    InputNotCertified(f64),
    #[error("input Higgs field is not zero (norm {0:.3e})")]
    PhiNotZero(f64),
    #[error("factory output failed validation: residual {0:.3e}")]
    FactoryValidationFailed(f64),
    #[error("top mode vanishes on {fraction:.2}% of the grid")]
    RankDeficient { fraction: f64 },
    #[error("degree reduction failed: {0}")]
    ReductionFailed(String),
    #[error("fields live on different grids")]
    MetricMismatch,
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
