use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes do not fit the operation.
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    /// An operation that requires a symmetric matrix got a non-symmetric one.
    NotSymmetric { asymmetry: f64 },
    /// An argument is outside the operation's domain.
    Domain(String),
    /// State parameters do not satisfy the normalization condition.
    Normalization { deficit: f64 },
    /// The partial-transpose constraints have no solution for these inputs.
    Infeasible(String),
    /// Strategy enumeration would exceed the configured cap.
    StrategyCap { count: u128, cap: u128 },
    /// Every optimizer restart hit a non-finite objective.
    NonFinite,
    /// The interior-point iteration diverged.
    SdpInfeasible { iterations: usize },
    /// The interior-point iteration ran out of iterations.
    SdpNotConverged { iterations: usize, gap: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension {
                context,
                expected,
                found,
            } => write!(f, "{context}: expected dimension {expected}, found {found}"),
            Error::NotSymmetric { asymmetry } => {
                write!(f, "matrix is not symmetric (max asymmetry {asymmetry:e})")
            }
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Normalization { deficit } => {
                write!(f, "state is not normalized (1 - trace = {deficit:e})")
            }
            Error::Infeasible(msg) => write!(f, "infeasible constraints: {msg}"),
            Error::StrategyCap { count, cap } => write!(
                f,
                "{count} deterministic strategies exceed the enumeration cap of {cap}"
            ),
            Error::NonFinite => write!(f, "objective was non-finite in every restart"),
            Error::SdpInfeasible { iterations } => {
                write!(f, "SDP diverged after {iterations} iterations")
            }
            Error::SdpNotConverged { iterations, gap } => {
                write!(f, "SDP did not converge in {iterations} iterations (gap {gap:e})")
            }
        }
    }
}

impl core::error::Error for Error {}
