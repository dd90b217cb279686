use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gap parameter must be > 0, got {0}")]
    NonPositiveGap(f64),

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("initial state is not a density matrix: {0}")]
    NotDensity(String),

    #[error("Hamiltonian is degenerate (e+ = e- = {0})")]
    DegenerateHamiltonian(f64),

    #[error("Lindbladian is not minimally degenerate: Im(lambda) = 0")]
    NotMinimallyDegenerate,

    #[error("operator is not in the range of the Lindbladian (diagonal part has trace norm {diag_norm:.3e})")]
    NotInRange { diag_norm: f64 },

    #[error("step size underflow at s = {s}: h = {step:.3e} below minimum {min_step:.3e}")]
    StepSizeUnderflow { s: f64, step: f64, min_step: f64 },

    #[error("propagated density lost positivity: min eigenvalue {0:.3e}")]
    PositivityViolation(f64),

    #[error("quadrature did not converge on [{lo}, {hi}]: error estimate {error:.3e} > tolerance {tol:.3e}")]
    QuadratureNonConvergence { lo: f64, hi: f64, error: f64, tol: f64 },

    #[error("invalid gamma profile descriptor {descriptor:?}: {reason}")]
    InvalidProfile { descriptor: String, reason: String },

    #[error("order fit needs at least 3 points above the noise floor, got {0}")]
    InsufficientFitPoints(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
