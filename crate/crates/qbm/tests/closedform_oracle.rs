//! Brute-force oracle for the residue route: each contour integral is
//! rebuilt by summing two hundred thousand thermal poles directly, with the
//! truncated tail corrected through its 1/n^2 and 1/n^3 coefficients. No
//! harmonic number or Lerch transcendent is involved, so agreement pins the
//! special-function assembly independently.

use std::f64::consts::PI;

use num_complex::Complex64;
use qbm::closedform::{
    msd_exact_ohmic, residue_breakdown, residue_i1, residue_i2, residue_i3, residue_i4,
    response_poles,
};
use qbm::model::ReducedParams;
use qbm::specfun::coth_c;

const ZETA_3: f64 = 1.202_056_903_159_594_2;

/// Contour integral over pole family `k` (1-based), by direct summation.
///
/// The integrand `coth(omega / omega_th) (1 - e^{-i omega t}) / (2 omega
/// (omega - p_k))` is closed in the lower half plane: thermal poles at
/// `omega_n = -i n pi omega_th` carry residue `omega_th (1 - z^n) /
/// (2 omega_n (omega_n - p_k))` with `z = e^{-pi t omega_th}`; families 1
/// and 3 additionally pick up the origin (residue `-i omega_th t / (2 p_k)`)
/// and their own response pole.
fn brute_contour(params: &ReducedParams, t: f64, k: usize) -> Complex64 {
    const N: u32 = 200_000;
    let omega_th = params.omega_th;
    let z = (-PI * t * omega_th).exp();
    let pole = response_poles(params)[k - 1];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut zeta2_partial = 0.0;
    let mut zeta3_partial = 0.0;
    let mut zn = 1.0;
    for n in 1..=N {
        let nf = f64::from(n);
        zn *= z;
        let omega_n = Complex64::new(0.0, -nf * PI * omega_th);
        sum += omega_th * (1.0 - zn) / (2.0 * omega_n * (omega_n - pole));
        zeta2_partial += 1.0 / (nf * nf);
        zeta3_partial += 1.0 / (nf * nf * nf);
    }
    // Beyond N the residues expand as -1/(2 pi^2 omega_th n^2)
    // - i p / (2 pi^3 omega_th^2 n^3) + O(n^-4); summing those coefficients
    // against the zeta tails leaves an O(N^-3) truncation error.
    let zeta2 = PI * PI / 6.0;
    sum -= (zeta2 - zeta2_partial) / (2.0 * PI * PI * omega_th);
    sum -= Complex64::i() * pole * (ZETA_3 - zeta3_partial)
        / (2.0 * PI.powi(3) * omega_th * omega_th);
    if k == 1 || k == 3 {
        sum -= Complex64::i() * omega_th * t / (2.0 * pole);
        let decay = (-Complex64::i() * pole * t).exp();
        sum += coth_c(pole / omega_th).unwrap() * (1.0 - decay) / (2.0 * pole);
    }
    -2.0 * PI * Complex64::i() * sum
}

fn assemble(params: &ReducedParams, t: f64) -> f64 {
    let alternating = brute_contour(params, t, 1) - brute_contour(params, t, 2)
        + brute_contour(params, t, 3)
        - brute_contour(params, t, 4);
    (Complex64::i() * params.hbar / (PI * params.mass) * alternating).re
}

#[test]
fn every_contour_piece_matches_the_brute_sum_and_frozen_literals() {
    let params = ReducedParams::unit_scales(1.0, 0.5, 10.0).unwrap();
    let t = 2.0;
    // Independently computed to twenty digits by arbitrary-precision pole
    // summation; the remaining two follow from i3 = -conj(i1), i4 = -conj(i2).
    let frozen = [
        Complex64::new(8.202_682_377_803_507, -34.042_282_107_038_014),
        Complex64::new(5.754_777_091_247_47e-4, 5.116_783_973_177_105_2e-2),
    ];
    let closed = [
        residue_i1(&params, t).unwrap(),
        residue_i2(&params, t).unwrap(),
        residue_i3(&params, t).unwrap(),
        residue_i4(&params, t).unwrap(),
    ];
    for k in 1..=4 {
        let reference = match k {
            1 => frozen[0],
            2 => frozen[1],
            3 => -frozen[0].conj(),
            _ => -frozen[1].conj(),
        };
        let brute = brute_contour(&params, t, k);
        assert!(
            (brute - reference).norm() <= 1e-10 * reference.norm(),
            "family {k}: brute {brute} vs frozen {reference}"
        );
        assert!(
            (closed[k - 1] - reference).norm() <= 1e-12 * reference.norm(),
            "family {k}: closed {} vs frozen {reference}",
            closed[k - 1]
        );
    }
}

#[test]
fn assembled_displacement_matches_brute_sum_across_regimes() {
    // Hot, intermediate, and cold baths; weak and strong fields.
    for (omega_c, omega_th, t, tol) in [
        (0.5, 10.0, 2.0, 1e-10),
        (10.0, 100.0, 3.0, 1e-10),
        (0.2, 1.0, 7.0, 1e-10),
        (20.0, 0.05, 5.0, 1e-8),
    ] {
        let params = ReducedParams::unit_scales(1.0, omega_c, omega_th).unwrap();
        let brute = assemble(&params, t);
        let closed = msd_exact_ohmic(&params, t).unwrap();
        assert!(!closed.fallback);
        assert!(
            (closed.value - brute).abs() <= tol * brute.abs(),
            "omega_c={omega_c}, omega_th={omega_th}, t={t}: \
             closed {} vs brute {brute}",
            closed.value
        );
    }
    // Regression pin for the strong-field hot-bath corner.
    let params = ReducedParams::unit_scales(1.0, 10.0, 100.0).unwrap();
    let value = msd_exact_ohmic(&params, 3.0).unwrap().value;
    assert!((value - 7.892_558_450_225_021_4).abs() <= 1e-10 * value);
}

#[test]
fn late_time_growth_is_linear_with_the_classical_slope() {
    let params = ReducedParams::unit_scales(1.0, 0.5, 10.0).unwrap();
    let a = msd_exact_ohmic(&params, 30.0).unwrap().value;
    let b = msd_exact_ohmic(&params, 40.0).unwrap().value;
    let secant = (b - a) / 10.0;
    // Every transient has decayed by t = 30, so the secant equals the
    // diffusive slope 2 hbar omega_th gamma / (m (gamma^2 + omega_c^2)).
    let slope = 2.0 * params.hbar * params.omega_th * params.gamma
        / (params.mass * (params.gamma * params.gamma + params.omega_c * params.omega_c));
    assert!(
        (secant - slope).abs() <= 1e-9 * slope,
        "secant {secant} vs diffusive slope {slope}"
    );
    let breakdown = residue_breakdown(&params, 35.0).unwrap();
    assert!(breakdown.msd > 0.0);
}
