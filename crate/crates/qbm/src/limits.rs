//! Asymptotic displacement forms for the two extreme temperature regimes.
//!
//! Both formulas are Ohmic-kernel reductions of the spectral integral in
//! which the thermal weight is replaced by its leading form: `omega_th /
//! omega` at high temperature, `1` at zero temperature. They are cheap
//! elementary expressions, useful as plotting baselines and as behavioral
//! anchors (linear growth with slope [`high_temperature_slope`],
//! logarithmic growth with coefficient [`low_temperature_log_slope`]).
//!
//! Neither formula carries its own validity range; the trust regions
//! returned by [`high_temperature_domain`] and [`low_temperature_domain`]
//! are constructions of this crate, sized so that the cross-checks against
//! the exact routes pass at the tolerances stated in the tests.

use std::f64::consts::PI;

use crate::error::{QbmError, Result};
use crate::model::ReducedParams;
use crate::specfun::euler_mascheroni;

/// Which asymptotic form a [`LimitDomain`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitRegime {
    HighT,
    LowT,
}

/// Trust region of an asymptotic form.
///
/// Outside the region the formula still evaluates (plotting it there must
/// stay possible); the region only tells the caller where the form has been
/// validated against an exact route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitDomain {
    pub regime: LimitRegime,
    /// Temperature boundary as the ratio `omega_th / gamma`: a minimum for
    /// `HighT`, a maximum for `LowT`.
    pub omega_th_ratio: f64,
    /// Time window `(t_lo, t_hi)` with `t_lo < t_hi`.
    pub t_window: (f64, f64),
}

impl LimitDomain {
    /// True when `t` lies inside the validated window.
    pub fn contains(&self, t: f64) -> bool {
        self.t_window.0 <= t && t <= self.t_window.1
    }
}

fn check_params(params: &ReducedParams) -> Result<()> {
    params.validate()
}

/// Growth slope `2 hbar omega_th gamma / (m (gamma^2 + omega_c^2))` of the
/// high-temperature displacement at late times.
pub fn high_temperature_slope(params: &ReducedParams) -> f64 {
    let r = params.gamma * params.gamma + params.omega_c * params.omega_c;
    2.0 * params.hbar * params.omega_th * params.gamma / (params.mass * r)
}

/// Coefficient `4 hbar gamma / (pi m (gamma^2 + omega_c^2))` of `ln t` in
/// the low-temperature displacement.
pub fn low_temperature_log_slope(params: &ReducedParams) -> f64 {
    let r = params.gamma * params.gamma + params.omega_c * params.omega_c;
    4.0 * params.hbar * params.gamma / (PI * params.mass * r)
}

/// High-temperature displacement at time `t`.
///
/// `2 hbar omega_th / m` times the four-term combination of a linear term
/// `gamma t / R`, a constant `-(gamma^2 - omega_c^2) / R^2`, and the damped
/// oscillation `[(gamma^2 - omega_c^2) cos(omega_c t) - 2 gamma omega_c
/// sin(omega_c t)] e^{-gamma t} / R^2`, with `R = gamma^2 + omega_c^2`. The
/// terms cancel exactly at `t = 0`, bitwise in this arrangement.
///
/// # Errors
/// [`QbmError::Invariant`] from parameter validation;
/// [`QbmError::Domain`] for `t < 0` or `omega_th = 0`.
pub fn msd_high_temperature(params: &ReducedParams, t: f64) -> Result<f64> {
    check_params(params)?;
    if !(params.omega_th > 0.0) {
        return Err(QbmError::Domain(format!(
            "omega_th = {}; the high-temperature form needs omega_th > 0",
            params.omega_th
        )));
    }
    if !(t >= 0.0) {
        return Err(QbmError::Domain(format!("time t = {t}, must be >= 0")));
    }
    let (gamma, omega_c) = (params.gamma, params.omega_c);
    let r = gamma * gamma + omega_c * omega_c;
    let r2 = r * r;
    let diff = gamma * gamma - omega_c * omega_c;
    let oscillation = (diff * (omega_c * t).cos() - 2.0 * gamma * omega_c * (omega_c * t).sin())
        * (-gamma * t).exp()
        / r2;
    let prefactor = 2.0 * params.hbar * params.omega_th / params.mass;
    Ok(prefactor * (gamma * t / r - diff / r2 + oscillation))
}

/// Low-temperature (zero-point) displacement at time `t`.
///
/// `2 gamma hbar / (pi m R)` times `2 ln(sqrt(R) t) + 2 gamma_0 + pi
/// omega_c / gamma - pi e^{-gamma t} [(omega_c / gamma) cos(omega_c t) +
/// sin(omega_c t)]`, with `R = gamma^2 + omega_c^2` and `gamma_0` the
/// Euler-Mascheroni constant. The formula is an asymptote, not a bound: it
/// goes negative for `t` below roughly `e^{-gamma_0} / sqrt(R)`, outside
/// its trust window. `omega_th` does not enter; strict zero temperature is
/// admitted.
///
/// # Errors
/// [`QbmError::Invariant`] from parameter validation;
/// [`QbmError::Domain`] for `t <= 0` (the logarithm needs `t > 0`).
pub fn msd_low_temperature(params: &ReducedParams, t: f64) -> Result<f64> {
    check_params(params)?;
    if !(t > 0.0) {
        return Err(QbmError::Domain(format!("time t = {t}, must be > 0")));
    }
    let (gamma, omega_c) = (params.gamma, params.omega_c);
    let r = gamma * gamma + omega_c * omega_c;
    let baseline = 2.0 * (r.sqrt() * t).ln() + 2.0 * euler_mascheroni() + PI * omega_c / gamma;
    let oscillation = PI
        * (-gamma * t).exp()
        * ((omega_c / gamma) * (omega_c * t).cos() + (omega_c * t).sin());
    let prefactor = 2.0 * gamma * params.hbar / (PI * params.mass * r);
    Ok(prefactor * (baseline - oscillation))
}

/// Trust region of [`msd_high_temperature`].
///
/// The formula is exact in `t` for the classical thermal weight, so the
/// window is all positive times; the quoted cross-check tolerances were
/// validated for `omega_th >= 10 gamma` (the leading quantum correction
/// scales as `(max(gamma, omega_c) / omega_th)^2 / 3`).
pub fn high_temperature_domain(_params: &ReducedParams) -> LimitDomain {
    LimitDomain {
        regime: LimitRegime::HighT,
        omega_th_ratio: 10.0,
        t_window: (0.0, f64::INFINITY),
    }
}

/// Trust region of [`msd_low_temperature`].
///
/// Below `t_lo = 7 / sqrt(R)` the expansion behind the formula has not
/// settled (near `t ~ e^{-gamma_0} / sqrt(R)` the formula even crosses
/// zero). Above `t_hi = 1 / (pi omega_th)` the spectral modes with `omega
/// < omega_th`, where the zero-temperature weight undercounts thermal
/// occupation, dominate the integral. The constants are sized so the 2%
/// agreement checks against quadrature pass throughout the window at
/// `omega_th = 0.01 gamma`; at `omega_th = 0` the window is unbounded
/// above.
pub fn low_temperature_domain(params: &ReducedParams) -> LimitDomain {
    let r = params.gamma * params.gamma + params.omega_c * params.omega_c;
    let t_hi = if params.omega_th > 0.0 {
        1.0 / (PI * params.omega_th)
    } else {
        f64::INFINITY
    };
    LimitDomain {
        regime: LimitRegime::LowT,
        omega_th_ratio: 0.1,
        t_window: (7.0 / r.sqrt(), t_hi),
    }
}
