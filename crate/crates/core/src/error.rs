use thiserror::Error;

/// Errors raised by the numerical and symbolic routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite field")]
    NonFinite,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between fields")]
    GridMismatch,

    #[error("time out of range: t = {t} not in [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("density floor violated: min(R) = {min} < {floor}")]
    DensityFloor { min: f64, floor: f64 },

    #[error("caustic detected at t = {last_good_time} (max |d2 theta| = {max_curv:.3e})")]
    Caustic { last_good_time: f64, max_curv: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point at infinity: projective coordinate a = {0:.3e}")]
    PointAtInfinity(f64),

    #[error("invalid rotation block: not in o(2,1)")]
    InvalidRotationBlock,

    #[error("not conformal: component ({row}, {col}) of L_X g is {component}")]
    NotConformal { row: usize, col: usize, component: String },

    #[error("closure failure: [{0}, {1}] is not in the span of the generators")]
    ClosureFailure(usize, usize),

    #[error("no uniform sign reconciles the bracket tables")]
    NoUniformSign,

    #[error("section solve failed at x = {x}: worst residual {residual:.3e}")]
    SectionSolveFailed { x: f64, residual: f64 },

    #[error("degenerate section (caustic of the transformation) at x = {x}")]
    DegenerateSection { x: f64 },

    #[error("image out of range: ({x}, {t})")]
    ImageOutOfRange { x: f64, t: f64 },

    #[error("transformation singular at this point: x = {x}, t = {t}")]
    SingularTransform { x: f64, t: f64 },

    #[error("interchange undefined: phase not invertible in time")]
    PhaseNotInvertible,

    #[error("insufficient trajectory resolution: {0}")]
    InsufficientResolution(String),

    #[error("phase singularity: Madelung map undefined (|psi| = {amplitude:.3e} at x = {x})")]
    PhaseSingularity { x: f64, amplitude: f64 },

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
