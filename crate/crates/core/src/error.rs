use thiserror::Error;

/// Errors raised by grid, map, and study operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("node {node} has no valid finite-difference stencil along {axis}")]
    MaskTooThin { node: usize, axis: &'static str },
    #[error("quadrature over an empty mask")]
    EmptyMask,
    #[error("circle (center {center:?}, radius {radius}) leaves the masked domain")]
    CircleOutsideDomain { center: [f64; 2], radius: f64 },

    #[error("invalid circle map: {0}")]
    InvalidCircleMap(String),
    #[error("adjacent samples {index} and {next} differ by {gap:.6} rad (>= pi)")]
    AngularGapTooLarge { index: usize, next: usize, gap: f64 },
    #[error("degree is ambiguous: raw winding {raw:.6}, residual {residual:.3e} > {tolerance}")]
    DegreeAmbiguous {
        raw: f64,
        residual: f64,
        tolerance: f64,
    },
    #[error("{n} samples cannot resolve degree {degree} (need n > 4|d|)")]
    SamplingTooCoarse { n: usize, degree: i64 },
    #[error("homotopy endpoints have different degrees ({start} vs {end})")]
    DegreeMismatch { start: i64, end: i64 },

    #[error("invalid map spec: {0}")]
    InvalidMap(String),
    #[error("map value undefined at singular point {0:?}")]
    SingularPoint([f64; 2]),
    #[error("map value undefined on the jump set at {0:?}")]
    OnJumpSet([f64; 2]),
    #[error("operation not supported for map kind `{0}`")]
    UnsupportedKind(&'static str),

    #[error("test-function support (center {center:?}, radius {radius}) escapes the domain")]
    SupportEscapesDomain { center: [f64; 2], radius: f64 },
    #[error("aliased winding near plaquette {plaquette:?}: edge increment {increment:.4} rad")]
    AliasedWinding {
        plaquette: [usize; 2],
        increment: f64,
    },
    #[error("{0:?} is not a regular value of the interpolant")]
    NonRegularValue([f64; 2]),

    #[error("recovery discs overlap or leave the domain: {0}")]
    DiscsOverlap(String),
    #[error("epsilon {epsilon} must lie in (0, radius/4 = {limit})")]
    EpsilonTooLarge { epsilon: f64, limit: f64 },
    #[error("invalid recovery index: {0}")]
    InvalidIndex(String),
    #[error("domains do not match: {0}")]
    DomainMismatch(String),
    #[error("radius {radius} sits on region breakpoint {breakpoint}")]
    RadiusAtBreakpoint { radius: f64, breakpoint: f64 },
    #[error("no relaxed target for map kind `{0}`")]
    TargetUnsupported(&'static str),
    #[error("invalid study parameters: {0}")]
    InvalidParams(String),

    #[error("{quantity} = {value:.6e} exceeds tolerance {tolerance:.3e}")]
    ToleranceExceeded {
        quantity: &'static str,
        value: f64,
        tolerance: f64,
    },

    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of numerical quality (as opposed to bad input).
    pub fn is_numeric_quality(&self) -> bool {
        matches!(
            self,
            Error::DegreeAmbiguous { .. }
                | Error::AliasedWinding { .. }
                | Error::NonRegularValue(_)
                | Error::MaskTooThin { .. }
                | Error::ToleranceExceeded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
