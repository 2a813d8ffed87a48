//! Exact displacement for the Ohmic kernel via contour residues.
//!
//! With a flat damping spectrum the displacement integral closes in the
//! lower half plane, where the poles split into two families: the thermal
//! (Matsubara) ladder at `omega = -i n pi omega_th` and the two magnetic
//! poles at `omega = +/- omega_c - i gamma`. Summing the ladder produces
//! harmonic numbers and Hurwitz-Lerch transcendents of
//! `z = exp(-pi t omega_th)`; each magnetic pole contributes a hyperbolic
//! cotangent boundary term. The sum splits naturally into four contour
//! integrals, exposed as [`residue_i1`] .. [`residue_i4`] so a test can pin
//! every piece against a brute-force pole sum; [`residue_breakdown`] and
//! [`msd_exact_ohmic`] assemble them.
//!
//! The assembly degrades in two spots, both handed to the quadrature route:
//!
//! * `t < t_min`, where the Lerch terms (`z -> 1`) cancel catastrophically
//!   against the logarithm, and
//! * a ladder index within [`COINCIDENCE_TOL`] of a positive integer, where
//!   a thermal pole collides with a magnetic pole and the simple-pole
//!   residue breaks down.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{QbmError, Result};
use crate::model::{KernelModel, ReducedParams};
use crate::quadrature::{msd_quadrature, QuadratureSettings, TemperatureMode};
use crate::specfun::{coth_c, coth_real, harmonic_number, lerch_phi};

/// Largest tolerated `|Im| / |Re|` of the assembled sum before the result is
/// rejected as non-real; see [`residue_breakdown`].
pub const IMAG_TOL: f64 = 1e-9;

/// Relative distance of a ladder index `(gamma +/- i omega_c) / (pi
/// omega_th)` to the nearest positive integer below which the pole families
/// are treated as colliding.
pub const COINCIDENCE_TOL: f64 = 1e-6;

/// The four contour integrals and their assembled displacement.
///
/// `assembled = i1 - i2 + i3 - i4` is purely imaginary up to round-off, so
/// that `i hbar / (pi m) * assembled` is the (real, nonnegative) `msd`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueBreakdown {
    pub i1: Complex64,
    pub i2: Complex64,
    pub i3: Complex64,
    pub i4: Complex64,
    pub assembled: Complex64,
    /// Mean-square displacement, length squared.
    pub msd: f64,
}

/// Displacement value with the provenance of its evaluation route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormValue {
    /// Mean-square displacement, length squared.
    pub value: f64,
    /// True when quadrature supplied the number because the residue assembly
    /// was unreliable at this point (small time or pole coincidence).
    pub fallback: bool,
}

/// Smallest time [`msd_exact_ohmic`] evaluates through the residue sum;
/// below it the value is delegated to quadrature.
pub fn t_min(params: &ReducedParams) -> f64 {
    1e-3 / params
        .gamma
        .max(params.omega_c.abs())
        .max(PI * params.omega_th)
}

/// Domain guard shared by the residue operations.
///
/// Unlike [`ReducedParams::validate`] this requires `omega_th > 0` (the
/// thermal ladder collapses onto the origin at zero temperature) and admits
/// `omega_c` of either sign, because the displacement is even in it and the
/// evenness is itself a tested property.
fn check_domain(params: &ReducedParams, t: f64) -> Result<()> {
    for (name, value) in [
        ("gamma", params.gamma),
        ("mass", params.mass),
        ("hbar", params.hbar),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(QbmError::Invariant(format!(
                "{name} = {value}, must be finite and > 0"
            )));
        }
    }
    if !params.omega_c.is_finite() {
        return Err(QbmError::Invariant(format!(
            "omega_c = {} is not finite",
            params.omega_c
        )));
    }
    if !(params.omega_th > 0.0 && params.omega_th.is_finite()) {
        return Err(QbmError::Domain(format!(
            "omega_th = {}; the residue route needs omega_th > 0 (use the \
             low-temperature limit or quadrature at zero temperature)",
            params.omega_th
        )));
    }
    if !(t > 0.0) {
        return Err(QbmError::Domain(format!(
            "time t = {t}; the residue route needs t > 0"
        )));
    }
    Ok(())
}

/// Rejects parameter sets where a thermal pole sits on a magnetic pole.
fn check_coincidence(params: &ReducedParams) -> Result<()> {
    let denom = PI * params.omega_th;
    for sign in ['+', '-'] {
        let im = if sign == '+' {
            params.omega_c
        } else {
            -params.omega_c
        };
        let ratio = Complex64::new(params.gamma, im) / denom;
        let nearest = ratio.re.round();
        if nearest >= 1.0 && (ratio - nearest).norm() <= COINCIDENCE_TOL * nearest {
            return Err(QbmError::PoleCoincidence {
                sign,
                ratio,
                nearest: nearest as u32,
                tolerance: COINCIDENCE_TOL,
            });
        }
    }
    Ok(())
}

/// Quantities shared by the four integrals.
struct Pieces {
    /// Ladder index `(gamma - i omega_c) / (pi omega_th)`.
    a: Complex64,
    /// Conjugate index.
    b: Complex64,
    /// `exp(-pi t omega_th)`, real but kept complex for the Lerch calls.
    z: Complex64,
    /// `ln(1 - z)`.
    log1mz: f64,
    /// `pi t omega_th`, the secular drift term.
    drift: f64,
}

impl Pieces {
    fn new(params: &ReducedParams, t: f64) -> Result<Self> {
        check_domain(params, t)?;
        check_coincidence(params)?;
        let pi_omega = PI * params.omega_th;
        let a = Complex64::new(params.gamma, -params.omega_c) / pi_omega;
        let z = (-t * pi_omega).exp();
        Ok(Self {
            a,
            b: a.conj(),
            z: Complex64::new(z, 0.0),
            log1mz: (-z).ln_1p(),
            drift: t * pi_omega,
        })
    }

    /// Thermal-ladder sum `[H(idx) + z Phi(z, 1, 1 + idx) + drift + ln(1 -
    /// z)] / (2 pi^2 omega_th * divisor)`; `drift` is zero for the two
    /// integrals without the secular term.
    fn ladder(
        &self,
        idx: Complex64,
        divisor: Complex64,
        omega_th: f64,
        drift: f64,
    ) -> Result<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        let bracket =
            harmonic_number(idx)? + self.z * lerch_phi(self.z, one + idx)? + drift + self.log1mz;
        Ok(bracket / (2.0 * PI * PI * omega_th * divisor))
    }
}

/// Contour integral over the pole set `{-i n pi omega_th} + {omega_c + i
/// gamma pushed to the lower sheet}`: thermal ladder at index `-a` plus the
/// boundary term of the magnetic pole `omega_c + i gamma`.
pub fn residue_i1(params: &ReducedParams, t: f64) -> Result<Complex64> {
    let p = Pieces::new(params, t)?;
    let (gamma, omega_c, omega_th) = (params.gamma, params.omega_c, params.omega_th);
    let ladder = p.ladder(-p.a, p.a, omega_th, p.drift)?;
    let pole = Complex64::new(omega_c, gamma);
    let decay = Complex64::new(-t * gamma, t * omega_c).exp();
    let boundary = (Complex64::new(1.0, 0.0) - decay) * coth_c(pole / omega_th)? / (2.0 * pole);
    Ok(Complex64::new(0.0, -2.0 * PI) * (ladder + boundary))
}

/// Contour integral with thermal-ladder poles only, at index `b`.
pub fn residue_i2(params: &ReducedParams, t: f64) -> Result<Complex64> {
    let p = Pieces::new(params, t)?;
    let ladder = p.ladder(p.b, p.b, params.omega_th, 0.0)?;
    Ok(Complex64::new(0.0, 2.0 * PI) * ladder)
}

/// Mirror of [`residue_i1`]: thermal ladder at index `-b` plus the boundary
/// term of the magnetic pole `omega_c - i gamma`.
pub fn residue_i3(params: &ReducedParams, t: f64) -> Result<Complex64> {
    let p = Pieces::new(params, t)?;
    let (gamma, omega_c, omega_th) = (params.gamma, params.omega_c, params.omega_th);
    let ladder = p.ladder(-p.b, p.b, omega_th, p.drift)?;
    let pole = Complex64::new(omega_c, -gamma);
    let decay = Complex64::new(-t * gamma, -t * omega_c).exp();
    let boundary = (Complex64::new(1.0, 0.0) - decay) * coth_c(pole / omega_th)? / (2.0 * pole);
    Ok(Complex64::new(0.0, -2.0 * PI) * (ladder + boundary))
}

/// Mirror of [`residue_i2`]: thermal-ladder poles only, at index `a`.
pub fn residue_i4(params: &ReducedParams, t: f64) -> Result<Complex64> {
    let p = Pieces::new(params, t)?;
    let ladder = p.ladder(p.a, p.a, params.omega_th, 0.0)?;
    Ok(Complex64::new(0.0, 2.0 * PI) * ladder)
}

/// Evaluates all four integrals and assembles the displacement.
///
/// The combination is `msd = Re[i hbar / (pi m) * (i1 - i2 + i3 - i4)]`.
/// Exact arithmetic pairs `i3 = -conj(i1)` and `i4 = -conj(i2)`, so the
/// assembled sum is purely imaginary; a residual real part beyond
/// [`IMAG_TOL`] (plus a round-off floor scaled to the term magnitudes)
/// signals a transcription or special-function defect and is rejected.
///
/// # Errors
/// [`QbmError::Domain`] for `t <= 0` or `omega_th <= 0`;
/// [`QbmError::PoleCoincidence`] when a thermal pole sits on a magnetic
/// pole; [`QbmError::Invariant`] if the assembled sum fails the reality or
/// positivity check.
pub fn residue_breakdown(params: &ReducedParams, t: f64) -> Result<ResidueBreakdown> {
    let i1 = residue_i1(params, t)?;
    let i2 = residue_i2(params, t)?;
    let i3 = residue_i3(params, t)?;
    let i4 = residue_i4(params, t)?;
    let assembled = i1 - i2 + i3 - i4;
    let prefactor = params.hbar / (PI * params.mass);
    let scaled = Complex64::new(0.0, prefactor) * assembled;
    // Round-off from the four integrals leaves a spurious component of order
    // eps times the largest cancelling magnitude.
    let floor = 64.0 * f64::EPSILON * prefactor * (i1.norm() + i2.norm() + i3.norm() + i4.norm());
    if scaled.im.abs() > IMAG_TOL * scaled.re.abs() + floor {
        return Err(QbmError::Invariant(format!(
            "assembled residue sum is not real: {scaled} (floor {floor:.3e})"
        )));
    }
    let msd = if scaled.re >= 0.0 {
        scaled.re
    } else if -scaled.re <= floor {
        0.0
    } else {
        return Err(QbmError::Invariant(format!(
            "residue assembly produced a negative displacement {}",
            scaled.re
        )));
    };
    Ok(ResidueBreakdown {
        i1,
        i2,
        i3,
        i4,
        assembled,
        msd,
    })
}

/// Exact Ohmic-kernel mean-square displacement at time `t`.
///
/// Assembles the prefactor `hbar / (pi m (gamma^2 + omega_c^2))` times a
/// braced sum of four harmonic-number terms, four Lerch terms weighted by
/// `exp(-pi t omega_th)` and `gamma -/+ i omega_c`, the secular term `2
/// gamma [pi t omega_th + 2 ln(1 - exp(-pi t omega_th))]`, and two coth
/// boundary terms carrying `(+/- i gamma + omega_c)(1 - e^{-(gamma -/+ i
/// omega_c) t})`; equivalently, the combination of [`residue_breakdown`].
///
/// Two parameter regions bypass the residue sum and return the quadrature
/// value with `fallback` set: `t < t_min` and pole coincidence. The
/// displacement is even in `omega_c`, and either sign is accepted.
///
/// # Errors
/// [`QbmError::Domain`] for `t <= 0` or `omega_th <= 0`; quadrature errors
/// propagate from the fallback region; [`QbmError::Invariant`] as in
/// [`residue_breakdown`].
pub fn msd_exact_ohmic(params: &ReducedParams, t: f64) -> Result<ClosedFormValue> {
    check_domain(params, t)?;
    if t < t_min(params) || check_coincidence(params).is_err() {
        // The quadrature route depends on omega_c only through its square
        // but rejects negative input, so fold the sign first.
        let folded = ReducedParams {
            omega_c: params.omega_c.abs(),
            ..*params
        };
        let value = msd_quadrature(
            &folded,
            &KernelModel::Ohmic {
                gamma: params.gamma,
            },
            t,
            TemperatureMode::FullQuantum,
            &QuadratureSettings::default(),
        )?;
        return Ok(ClosedFormValue {
            value,
            fallback: true,
        });
    }
    let breakdown = residue_breakdown(params, t)?;
    Ok(ClosedFormValue {
        value: breakdown.msd,
        fallback: false,
    })
}

/// The four simple poles of the velocity response, ordered to match
/// [`residue_i1`] .. [`residue_i4`]:
/// `-omega_c - i gamma`, `-omega_c + i gamma`, `omega_c - i gamma`,
/// `omega_c + i gamma`.
pub fn response_poles(params: &ReducedParams) -> [Complex64; 4] {
    let g = params.gamma;
    let wc = params.omega_c;
    [
        Complex64::new(-wc, -g),
        Complex64::new(-wc, g),
        Complex64::new(wc, -g),
        Complex64::new(wc, g),
    ]
}

/// One term of the partial-fraction split of the displacement integrand.
///
/// With a flat damping spectrum the integrand denominator factors over the
/// [`response_poles`]; `index` (1-based, matching `residue_i*`) selects
///
/// `T_k(omega) = coth(omega / omega_th) (1 - exp(-i omega t))
///               / (2 omega (omega - p_k))`.
///
/// The alternating combination rebuilds the folded integrand at any real
/// `omega != 0`:
///
/// `2 Re[ i hbar / (pi m) (T_1 - T_2 + T_3 - T_4) ]
///   = msd_integrand(|omega|)`
///
/// with the full quantum weight. Closing each term over the thermal ladder
/// yields [`residue_i1`] .. [`residue_i4`], so this function is the bridge
/// between the pointwise integrand and the contour sum.
///
/// # Errors
/// [`QbmError::Domain`] for `omega = 0` (the weight has a double pole at the
/// origin), a non-finite `omega`, an `index` outside `1..=4`, or the
/// parameter and time conditions of [`msd_exact_ohmic`].
pub fn partial_fraction_term(
    params: &ReducedParams,
    t: f64,
    omega: f64,
    index: usize,
) -> Result<Complex64> {
    check_domain(params, t)?;
    if !(1..=4).contains(&index) {
        return Err(QbmError::Domain(format!(
            "partial-fraction index {index}, must be in 1..=4"
        )));
    }
    if omega == 0.0 || !omega.is_finite() {
        return Err(QbmError::Domain(format!(
            "omega = {omega}; the term needs a finite nonzero frequency"
        )));
    }
    let pole = response_poles(params)[index - 1];
    let weight = coth_real(omega / params.omega_th);
    let oscillation = 1.0 - Complex64::new(0.0, -omega * t).exp();
    Ok(weight * oscillation / (2.0 * omega * (omega - pole)))
}
