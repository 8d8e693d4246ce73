use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("stereographic projection is singular at the north pole (1 - x_n = {gap:e})")]
    NorthPoleSingular { gap: f64 },

    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("unsupported dimension n = {0}")]
    UnsupportedDimension(usize),

    #[error("invalid harmonic index (m = {m}, l = {l}) for n = {n}")]
    InvalidIndex { n: usize, m: usize, l: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),

    #[error("harmonic degree {degree} exceeds the grid design order {order}")]
    DegreeTooHigh { degree: usize, order: usize },

    #[error("line abscissa {0} lies outside the strip 0 < Re s < 1")]
    Strip(f64),

    #[error("contour step {step} exceeds the resolvable limit {limit} for this grid")]
    Nyquist { step: f64, limit: f64 },

    #[error("contour half-width {half_width} exceeds the grid's resolvable frequency {limit}")]
    ContourAliasing { half_width: f64, limit: f64 },

    #[error("radius {r} outside the reconstruction grid [{min}, {max}]")]
    InterpolationRange { r: f64, min: f64, max: f64 },
}

/// Non-fatal numerical diagnostics raised by the Mellin stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    /// `|y^ρ F(y)|` at a grid end is not negligible against its peak;
    /// the ratios at the left and right ends are reported.
    TruncationRisk { left: f64, right: f64 },
    /// The inverse contour sum left an imaginary part above `1e-6`.
    ImaginaryResidual { r: f64, residual: f64 },
}

impl Warning {
    /// Warnings that make a result untrustworthy rather than merely biased.
    pub fn is_severe(&self) -> bool {
        matches!(self, Warning::ImaginaryResidual { .. })
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::TruncationRisk { left, right } => write!(
                f,
                "truncation risk: end-point ratios {left:.3e} (left), {right:.3e} (right)"
            ),
            Warning::ImaginaryResidual { r, residual } => {
                write!(f, "imaginary residual {residual:.3e} at r = {r}")
            }
        }
    }
}
