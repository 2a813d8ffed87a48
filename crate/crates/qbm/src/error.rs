//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`QbmError`]. The variants
//! are deliberately coarse: callers dispatch on the *kind* of failure (bad
//! input, numerical breakdown, budget exhaustion), not on which internal
//! routine produced it. The payloads carry enough context to reconstruct what
//! went wrong without a debugger.

use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QbmError {
    /// An argument landed within `pole_tolerance` of a pole of the function
    /// being evaluated. Returning a huge finite value instead would corrupt
    /// downstream sums undetectably, so this is always an error.
    #[error("argument within {tolerance:e} of a pole at {location}")]
    Pole {
        /// The pole the argument collided with, as a point in the complex plane.
        location: num_complex::Complex64,
        /// Distance threshold that was violated.
        tolerance: f64,
    },

    /// An argument lies outside the mathematical domain of the operation
    /// (e.g. `|z| >= 1` for the Lerch series, `t <= 0` for a log-divergent
    /// formula).
    #[error("domain violation: {0}")]
    Domain(String),

    /// A precondition on a value type was violated (non-positive mass,
    /// negative temperature, and so on).
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// The adaptive integrator exhausted its subdivision budget before
    /// reaching the requested tolerance.
    #[error("quadrature failed to converge: achieved {achieved:e}, required {required:e}")]
    Convergence {
        /// Relative error estimate at the point the budget ran out.
        achieved: f64,
        /// Relative tolerance that was requested.
        required: f64,
    },

    /// A bath (Matsubara) pole coincides with a cyclotron pole, so the
    /// simple-pole residue formulas do not apply. Occurs when
    /// `(gamma ± i*omega_c)/(pi*omega_th)` is within `coincidence_tol` of a
    /// positive integer.
    #[error("pole coincidence: (gamma {sign} i*omega_c)/(pi*omega_th) = {ratio} is within {tolerance:e} of integer {nearest}")]
    PoleCoincidence {
        /// `'+'` or `'-'`, identifying which of the conjugate pair collided.
        sign: char,
        /// The offending ratio.
        ratio: num_complex::Complex64,
        /// The positive integer it collided with.
        nearest: u32,
        /// Relative distance threshold that was violated.
        tolerance: f64,
    },

    /// The rational denominator of the spectral integrand vanished at a real
    /// frequency. Cannot happen for `gamma > 0`; signals an invariant breach
    /// upstream rather than a recoverable condition.
    #[error("spectral denominator vanished at omega = {omega}")]
    DenominatorZero {
        /// Real frequency at which the denominator dropped below tolerance.
        omega: f64,
    },

    /// A series was too short for the requested analysis.
    #[error("insufficient data: {got} samples, need at least {need}")]
    InsufficientData {
        /// Number of samples supplied.
        got: usize,
        /// Minimum number of samples required.
        need: usize,
    },

    /// A parameter sweep expected a single monotonic-to-oscillatory
    /// transition but the verdict flipped back after the first change.
    #[error("classification flipped back to monotonic at omega_c = {omega_c} after a transition at omega_c = {transition}")]
    NonMonotoneFlip {
        /// Sweep value where the verdict reverted.
        omega_c: f64,
        /// Sweep value where the first transition was seen.
        transition: f64,
    },

    /// A run configuration failed validation before any computation started.
    #[error("configuration error: {0}")]
    Config(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, QbmError>;
