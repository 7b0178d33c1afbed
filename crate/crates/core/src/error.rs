use thiserror::Error;

/// Errors raised by the dynamics, observable and self-discharge routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A physical parameter violates its admissible range.
    #[error("{field} {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// Initial amplitudes are not normalized.
    #[error("initial amplitudes not normalized: |mu0|^2 + |nu0|^2 = {norm}")]
    UnnormalizedInit { norm: f64 },

    /// A time (or time grid) outside the domain of the operation.
    #[error("invalid time: {0}")]
    InvalidTime(String),

    /// The Laplace variable sits on the pole of the kernel image.
    #[error("kernel Laplace transform evaluated at its pole s = {re} + {im}i")]
    KernelPole { re: f64, im: f64 },

    /// Residues too large relative to the amplitudes they reconstruct.
    #[error("ill-conditioned residues (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    /// A pole of the transfer function lies in the right half plane.
    #[error("growing mode: pole with real part {re:.3e}")]
    GrowingMode { re: f64 },

    /// The fixed RK4 step violates the stability guard.
    #[error("step {step:.3e} too large: step * max rate must not exceed 0.1, use step <= {max_step:.3e}")]
    StepTooLarge { step: f64, max_step: f64 },

    /// A matrix or amplitude input failed validation.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
