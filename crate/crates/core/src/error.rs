//! Crate-wide error type. Every rejection carries the measured quantity
//! that triggered it so callers can report exact residuals.

use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input was not Hermitian within tolerance; carries the relative residual.
    NotHermitian { residual: f64 },
    /// Jacobi sweeps exhausted before the off-diagonal mass went under threshold.
    EigNoConvergence { off_diagonal: f64 },
    /// A scalar function was evaluated outside its domain during functional calculus.
    FunctionUndefinedAt { eigenvalue: f64 },
    /// Matrix power / modular flow on a state with an eigenvalue at or below the cutoff.
    SingularState { min_eigenvalue: f64 },
    /// Complex power would overflow the double exponent range.
    OverflowGuard { exponent: f64 },
    /// Schatten / Kosaki index below 1 (quasi-norms are out of scope).
    InvalidExponent { p: f64 },
    /// Operand dimensions disagree.
    DimMismatch { left: usize, right: usize },
    /// State trace or positivity violated; carries the offending value.
    InvalidState { value: f64 },
    /// Generator is not detailed-balanced w.r.t. the requested inner product.
    NotDetailedBalanced { residual: f64 },
    /// Kernel of the symmetrized generator is numerically ill-separated.
    KernelIllSeparated { zero_band: f64, first_nonzero: f64 },
    /// Conditional-expectation range is not invariant under the modular flow.
    NonInvariantRange { residual: f64 },
    /// Rademacher (or similar) model exceeds its size budget.
    BudgetExceeded { requested: usize, budget: usize },
    /// Generic parameter rejection with a static reason.
    InvalidParam(&'static str),
}

impl core::error::Error for Error {}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotHermitian { residual } => {
                write!(f, "matrix is not Hermitian (relative residual {residual:.3e})")
            }
            Error::EigNoConvergence { off_diagonal } => {
                write!(f, "Jacobi eigensolver did not converge (off-diagonal {off_diagonal:.3e})")
            }
            Error::FunctionUndefinedAt { eigenvalue } => {
                write!(f, "functional calculus: map undefined at eigenvalue {eigenvalue:.17e}")
            }
            Error::SingularState { min_eigenvalue } => {
                write!(f, "state not strictly positive (min eigenvalue {min_eigenvalue:.3e})")
            }
            Error::OverflowGuard { exponent } => {
                write!(f, "complex power exceeds exponent range (|exponent| {exponent:.3e} > 700)")
            }
            Error::InvalidExponent { p } => write!(f, "invalid L^p exponent p = {p}"),
            Error::DimMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            Error::InvalidState { value } => write!(f, "invalid density state (value {value:.3e})"),
            Error::NotDetailedBalanced { residual } => {
                write!(f, "generator not detailed-balanced (residual {residual:.3e})")
            }
            Error::KernelIllSeparated { zero_band, first_nonzero } => write!(
                f,
                "kernel ill-separated: zero band {zero_band:.3e} vs first nonzero {first_nonzero:.3e}"
            ),
            Error::NonInvariantRange { residual } => {
                write!(f, "range not modular-invariant (residual {residual:.3e})")
            }
            Error::BudgetExceeded { requested, budget } => {
                write!(f, "model size {requested} exceeds budget {budget}")
            }
            Error::InvalidParam(msg) => write!(f, "{msg}"),
        }
    }
}
