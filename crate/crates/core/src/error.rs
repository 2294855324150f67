use thiserror::Error;

/// Failures reported by the numerical routines.
///
/// Parameter problems (`InvalidParameter`) are distinguished from numerical
/// breakdowns so that front ends can map them onto different exit codes.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("overflow evaluating {0}")]
    Overflow(&'static str),

    #[error("quadrature did not converge: estimated error {err:.3e} exceeds {tol:.3e}")]
    QuadratureNonConvergence { err: f64, tol: f64 },

    #[error("tabulated phase queried outside its grid at omega = {0}")]
    OutOfGrid(f64),

    #[error("kernel evaluated too close to a singularity at s = {re} + {im}i")]
    NearSingularity { re: f64, im: f64 },

    #[error("first moment does not converge for this modulation")]
    NonConvergentMoment,

    #[error("evaluation at a pole of the Laplace-domain solution (|D| = {0:.3e})")]
    AtPole(f64),

    #[error("time step {h} exceeds the admissible maximum {max}")]
    StepTooLarge { h: f64, max: f64 },

    #[error("Bromwich contour truncation did not converge (tail bound {0:.3e})")]
    ContourTruncation(f64),

    #[error("spectrum has no half-maximum crossing on the grid")]
    NoCrossing,

    #[error("cannot normalize an all-zero spectrum")]
    ZeroSpectrum,

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by the caller's parameters rather than by numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::NonFinite(_) | Error::OutOfGrid(_) | Error::StepTooLarge { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
