use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument is outside its admissible domain.
    Domain { what: &'static str, value: f64 },
    /// A covariance matrix violates the uncertainty principle
    /// (not symmetric, not positive definite, or `det σ < 1`).
    Uncertainty(String),
    /// Channel parameters violate complete positivity.
    NotCptp { det_x: f64, det_y: f64 },
    /// A game configuration breaks one or more constraints.
    Config(Vec<String>),
    /// Horse index outside `0..J`.
    HorseIndex { index: usize, horses: usize },
    /// Ratio `μ̄_t` requested for an input with zero ergotropy.
    UndefinedMu,
    /// A bound that must hold on every trajectory was broken.
    Invariant(String),
    /// Exhaustive enumeration would exceed the trajectory budget.
    EnumerationBudget { horses: usize, steps: usize, limit: u64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of domain (got {value})"),
            Error::Uncertainty(msg) => write!(f, "uncertainty relation violated: {msg}"),
            Error::NotCptp { det_x, det_y } => write!(
                f,
                "channel is not CPTP: 4 det Y = {} < (det X - 1)^2 = {}",
                4.0 * det_y,
                (det_x - 1.0) * (det_x - 1.0)
            ),
            Error::Config(items) => {
                write!(f, "invalid game configuration")?;
                for item in items {
                    write!(f, "\n  - {item}")?;
                }
                Ok(())
            }
            Error::HorseIndex { index, horses } => {
                write!(f, "horse index {index} out of range for {horses} horses")
            }
            Error::UndefinedMu => {
                write!(f, "mu is undefined for an input state with zero ergotropy")
            }
            Error::Invariant(msg) => write!(f, "invariant violated: {msg}"),
            Error::EnumerationBudget { horses, steps, limit } => {
                write!(f, "enumerating {horses}^{steps} trajectories exceeds the budget of {limit}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
