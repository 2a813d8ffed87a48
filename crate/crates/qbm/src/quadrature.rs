//! Direct numerical evaluation of the displacement integral.
//!
//! The mean-square displacement is a one-dimensional spectral integral over
//! positive frequencies. Its integrand combines a thermal weight, the kernel
//! spectrum, a magnetic resonance denominator, and the oscillatory factor
//! `1 - cos(omega t)`. This module folds the two-sided integral onto
//! `(0, inf)` analytically and splits the evaluation into
//!
//! * a head region covering every spectral scale, panelized at the natural
//!   breakpoints and at half-periods of the oscillation,
//! * a smooth tail integrated in the inverted coordinate `x = omega_s /
//!   omega`, and
//! * an oscillatory tail summed over half-period panels and accelerated by
//!   repeated averaging.
//!
//! All three pieces share one worst-panel-first refinement budget.

use std::cell::RefCell;

use crate::error::{QbmError, Result};
use crate::integrate::{alternating_sum, gk15, refine_panels, BasePanel, PanelEstimate};
use crate::model::{kernel_fourier, KernelModel, ReducedParams};
use crate::specfun::coth_real;

/// Thermal weighting applied to the spectral integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemperatureMode {
    /// The full `coth(omega / omega_th)` weight; valid at every temperature.
    /// With `omega_th = 0` this degenerates exactly to [`TemperatureMode::LowT`].
    FullQuantum,
    /// Classical weight `omega_th / omega` (the leading high-temperature
    /// form); requires `omega_th > 0`.
    HighT,
    /// Zero-temperature weight `sign(omega)`, i.e. 1 on the folded half axis.
    LowT,
}

/// Tolerances and budget for [`msd_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Relative tolerance on the final integral, in `(0, 1e-3]`.
    pub rel_tol: f64,
    /// Absolute tolerance floor in units of length squared; rules near `t = 0`
    /// where the integral itself vanishes.
    pub abs_tol: f64,
    /// Refinement budget: number of panel bisections, at least 100.
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 5000,
        }
    }
}

impl QuadratureSettings {
    /// Checks the documented invariants.
    ///
    /// # Errors
    /// [`QbmError::Invariant`] naming the offending field.
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-3) {
            return Err(QbmError::Invariant(format!(
                "rel_tol = {}, must lie in (0, 1e-3]",
                self.rel_tol
            )));
        }
        if !(self.abs_tol.is_finite() && self.abs_tol >= 0.0) {
            return Err(QbmError::Invariant(format!(
                "abs_tol = {}, must be finite and >= 0",
                self.abs_tol
            )));
        }
        if self.max_subdivisions < 100 {
            return Err(QbmError::Invariant(format!(
                "max_subdivisions = {}, must be >= 100",
                self.max_subdivisions
            )));
        }
        Ok(())
    }
}

/// Resolved thermal weight; `FullQuantum` at zero temperature degenerates to
/// the `LowT` branch exactly, with no tolerance involved.
#[derive(Debug, Clone, Copy)]
enum Weight {
    Coth { omega_th: f64 },
    Classical { omega_th: f64 },
    Unit,
}

impl Weight {
    fn resolve(mode: TemperatureMode, params: &ReducedParams) -> Result<Self> {
        match mode {
            TemperatureMode::FullQuantum => {
                if params.omega_th > 0.0 {
                    Ok(Weight::Coth {
                        omega_th: params.omega_th,
                    })
                } else {
                    Ok(Weight::Unit)
                }
            }
            TemperatureMode::HighT => {
                if params.omega_th > 0.0 {
                    Ok(Weight::Classical {
                        omega_th: params.omega_th,
                    })
                } else {
                    Err(QbmError::Invariant(
                        "HighT weighting requires omega_th > 0".into(),
                    ))
                }
            }
            TemperatureMode::LowT => Ok(Weight::Unit),
        }
    }

    /// Weight at `omega > 0`.
    fn at(self, omega: f64) -> f64 {
        match self {
            Weight::Coth { omega_th } => coth_real(omega / omega_th),
            Weight::Classical { omega_th } => omega_th / omega,
            Weight::Unit => 1.0,
        }
    }

    /// Spectral scale beyond which the weight carries no more structure
    /// (the coth knee); zero for the structureless weights.
    fn knee(self) -> f64 {
        match self {
            Weight::Coth { omega_th } => omega_th,
            _ => 0.0,
        }
    }

    /// `lim_{omega -> 0} weight * (1 - cos omega t) / omega`, the factor that
    /// decides the integrand's value at the origin.
    fn origin_factor(self, t: f64) -> f64 {
        match self {
            Weight::Coth { omega_th } | Weight::Classical { omega_th } => 0.5 * omega_th * t * t,
            Weight::Unit => 0.0,
        }
    }
}

/// The kernel-and-resonance part of the integrand at `omega > 0`:
/// `A * N / (omega * D)` with `A = Re K`, `N = (omega + Im K)^2 + omega_c^2 +
/// A^2` and `D` the resonance denominator in its factored, cancellation-free
/// form `((w - omega_c)^2 + A^2)((w + omega_c)^2 + A^2)`, `w = omega + Im K`.
fn spectral_core(params: &ReducedParams, kernel: &KernelModel, omega: f64) -> Result<f64> {
    let k = kernel_fourier(kernel, omega);
    let w = omega + k.im;
    let du = (w - params.omega_c).powi(2) + k.re * k.re;
    let dv = (w + params.omega_c).powi(2) + k.re * k.re;
    let d = du * dv;
    if d == 0.0 {
        return Err(QbmError::DenominatorZero { omega });
    }
    let n = w * w + params.omega_c * params.omega_c + k.re * k.re;
    Ok(k.re * n / (omega * d))
}

/// Evaluates the folded integrand of the displacement integral at a single
/// frequency.
///
/// The two-sided integrand is even once its vanishing odd part is dropped;
/// folding doubles it, and the full prefactor `4 hbar / (pi m)` is included
/// so that the mean-square displacement is exactly the integral of this
/// function over `(0, inf)`. At `omega = 0` the finite analytic limit is
/// returned: `(2 hbar / (pi m)) * A(0) * omega_th * t^2 / (omega_c^2 +
/// A(0)^2)` for the thermally weighted modes and zero for the
/// zero-temperature weight.
///
/// # Errors
/// [`QbmError::Domain`] for `t < 0` or `omega < 0`; [`QbmError::Invariant`]
/// for invalid parameters or an incompatible mode;
/// [`QbmError::DenominatorZero`] if the resonance denominator vanishes at a
/// real frequency (impossible for `gamma > 0`).
pub fn msd_integrand(
    params: &ReducedParams,
    kernel: &KernelModel,
    omega: f64,
    t: f64,
    mode: TemperatureMode,
) -> Result<f64> {
    params.validate()?;
    kernel.validate()?;
    let weight = Weight::resolve(mode, params)?;
    if !(t >= 0.0) {
        return Err(QbmError::Domain(format!("time t = {t}, must be >= 0")));
    }
    if !(omega >= 0.0) {
        return Err(QbmError::Domain(format!(
            "folded integrand needs omega >= 0, got {omega}"
        )));
    }
    let pref = 4.0 * params.hbar / (std::f64::consts::PI * params.mass);
    if omega == 0.0 {
        let a0 = kernel_fourier(kernel, 0.0).re;
        let n0 = params.omega_c * params.omega_c + a0 * a0;
        return Ok(pref * a0 * weight.origin_factor(t) / n0);
    }
    let core = spectral_core(params, kernel, omega)?;
    // 1 - cos as 2 sin^2 keeps relative accuracy when omega * t is tiny.
    let osc = 2.0 * (0.5 * omega * t).sin().powi(2);
    Ok(pref * weight.at(omega) * core * osc)
}

/// Upper bound on half-period base panels; beyond this the oscillatory tail
/// machinery absorbs the remaining structure (its envelope is then smooth on
/// the panel scale by construction).
const MAX_HALF_PERIOD_PANELS: f64 = 20_000.0;

/// Resource guard on the base grid. The resonances must sit inside the
/// half-period region, so its panel count grows like
/// `t * (gamma + omega_c + 1/tau)` and cannot be shrunk without losing
/// them; past this cap the evaluation is refused instead of exhausting
/// memory.
const MAX_BASE_PANELS: f64 = 2.0e7;

/// Number of half-period panels fed to the series accelerator.
const OSCILLATORY_TAIL_PANELS: usize = 48;

/// Computes the mean-square displacement by adaptive quadrature of the
/// spectral integral.
///
/// Works for both kernels and every temperature mode; this is the route the
/// closed form is checked against, and the only route for the
/// single-relaxation-time kernel. `t = 0` returns exactly zero.
///
/// # Errors
/// Validation failures as in [`msd_integrand`]; [`QbmError::Convergence`]
/// when the subdivision budget is exhausted before the requested tolerance;
/// [`QbmError::Domain`] when `t` times the largest frequency scale is so
/// large that the base grid would blow past [`MAX_BASE_PANELS`].
pub fn msd_quadrature(
    params: &ReducedParams,
    kernel: &KernelModel,
    t: f64,
    mode: TemperatureMode,
    settings: &QuadratureSettings,
) -> Result<f64> {
    params.validate()?;
    kernel.validate()?;
    settings.validate()?;
    let weight = Weight::resolve(mode, params)?;
    if !(t >= 0.0) {
        return Err(QbmError::Domain(format!("time t = {t}, must be >= 0")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }

    let pref = 4.0 * params.hbar / (std::f64::consts::PI * params.mass);
    let tau_inv = match *kernel {
        KernelModel::Ohmic { .. } => 0.0,
        KernelModel::SingleRelaxation { tau, .. } => 1.0 / tau,
    };
    let core_scale = params.gamma + params.omega_c + tau_inv;
    let half_period = std::f64::consts::PI / t;

    // Structure boundary: all spectral knees, capped so the half-period grid
    // stays bounded. When the coth knee is cut off here it reappears as an
    // explicit breakpoint of the smooth tail below.
    let span_raw = 4.0 * (core_scale + weight.knee());
    let span = span_raw.min((4.0 * core_scale).max(MAX_HALF_PERIOD_PANELS * half_period));
    let omega_split = half_period * (span / half_period).ceil().max(1.0);
    let base_count = omega_split / half_period;
    if base_count > MAX_BASE_PANELS {
        return Err(QbmError::Domain(format!(
            "covering the resonances at t = {t} needs about {base_count:.1e} \
             half-period panels; the cap is {MAX_BASE_PANELS:.0e}. Reduce t or \
             the frequency scales"
        )));
    }

    let mut cuts: Vec<f64> = Vec::new();
    for s in [
        params.gamma,
        params.omega_c,
        tau_inv,
        weight.knee(),
    ] {
        if s > 0.0 && s < omega_split {
            cuts.push(s);
        }
    }
    let mut j = half_period;
    while j < omega_split * (1.0 - 1e-12) {
        cuts.push(j);
        j += half_period;
    }
    // Geometric fillers for the gap between the spectral scales and a distant
    // first half-period (tiny t).
    let mut d = 2.0 * core_scale;
    while d < omega_split {
        cuts.push(d);
        d *= 2.0;
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * omega_split);

    let mut panels = Vec::with_capacity(cuts.len() + 8);
    let mut lo = 0.0;
    for &hi in cuts.iter().chain(std::iter::once(&omega_split)) {
        if hi > lo * (1.0 + 1e-14) && hi - lo > 1e-300 {
            panels.push(BasePanel { kind: 0, a: lo, b: hi });
            lo = hi;
        }
    }

    // Smooth tail in the inverted coordinate x = omega_split / omega over
    // (0, 1]; a capped coth knee shows up at x = omega_split / omega_th.
    let mut xcuts = vec![0.25, 0.5];
    let knee = weight.knee();
    if knee > omega_split {
        let xk = omega_split / knee;
        xcuts.push(xk);
        xcuts.push(0.25 * xk);
    }
    xcuts.sort_by(f64::total_cmp);
    xcuts.dedup();
    let mut xlo = 0.0;
    for &xhi in xcuts.iter().chain(std::iter::once(&1.0)) {
        if xhi > xlo {
            panels.push(BasePanel {
                kind: 1,
                a: xlo,
                b: xhi,
            });
            xlo = xhi;
        }
    }

    let failure: RefCell<Option<QbmError>> = RefCell::new(None);
    let record = |e: QbmError| {
        let mut slot = failure.borrow_mut();
        if slot.is_none() {
            *slot = Some(e);
        }
        0.0
    };

    // Envelope of the oscillatory factor: weight * A * N / (omega * D).
    let envelope = |omega: f64| -> f64 {
        match spectral_core(params, kernel, omega) {
            Ok(core) => {
                let v = pref * weight.at(omega) * core;
                if v.is_finite() {
                    v
                } else {
                    record(QbmError::Invariant(format!(
                        "non-finite integrand at omega = {omega}"
                    )))
                }
            }
            Err(e) => record(e),
        }
    };

    // Oscillatory tail: half-period panel integrals of envelope * cos,
    // accelerated by repeated averaging. Subtracted because the tail splits
    // as envelope * (1 - cos) = envelope - envelope * cos.
    let mut osc_terms = [0.0; OSCILLATORY_TAIL_PANELS];
    let mut osc_panel_err = 0.0;
    for (k, term) in osc_terms.iter_mut().enumerate() {
        let a = omega_split + k as f64 * half_period;
        let est = gk15(&mut |omega: f64| envelope(omega) * (omega * t).cos(), a, a + half_period);
        *term = est.value;
        osc_panel_err += est.error;
    }
    let (osc_value, osc_extrap_err) = alternating_sum(&osc_terms);
    let fixed = PanelEstimate {
        value: -osc_value,
        error: osc_extrap_err + osc_panel_err,
    };

    let mut f = |kind: usize, x: f64| -> f64 {
        match kind {
            0 => {
                if x == 0.0 {
                    let a0 = kernel_fourier(kernel, 0.0).re;
                    let n0 = params.omega_c * params.omega_c + a0 * a0;
                    pref * a0 * weight.origin_factor(t) / n0
                } else {
                    envelope(x) * 2.0 * (0.5 * x * t).sin().powi(2)
                }
            }
            _ => {
                if x == 0.0 {
                    0.0
                } else {
                    let omega = omega_split / x;
                    envelope(omega) * omega_split / (x * x)
                }
            }
        }
    };

    let out = refine_panels(
        &mut f,
        &panels,
        settings.rel_tol,
        settings.abs_tol,
        settings.max_subdivisions,
        fixed,
    )?;
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }

    let value = out.value;
    if value < 0.0 {
        // A variance can round below zero only within the noise floor.
        if -value <= 10.0 * out.abs_error + settings.abs_tol {
            return Ok(0.0);
        }
        return Err(QbmError::Invariant(format!(
            "negative displacement {value} exceeds the error estimate {}",
            out.abs_error
        )));
    }
    Ok(value)
}
