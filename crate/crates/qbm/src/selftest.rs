//! Built-in consistency suite behind the `selftest` CLI subcommand.
//!
//! Three groups, each reduced to a [`GroupReport`]:
//!
//! * `oracle-equivalence`: residue sum against quadrature over a fixed grid
//!   spanning weak to strong fields, cold to hot baths, short to long times.
//! * `specfun-identities`: the special-function layer checked against its
//!   defining recurrences and asymptotic forms.
//! * `partial-fraction`: the pointwise split of the displacement integrand
//!   over the four response poles, at randomized frequencies and parameters.
//!
//! All randomness is seeded, so two runs of [`run`] produce identical
//! reports. [`run_with_lerch`] exposes the Hurwitz-Lerch evaluation as an
//! injection point: wiring in a corrupted implementation must flip the
//! `specfun-identities` group to failed, which is how the suite's own
//! sensitivity is tested.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::closedform::{msd_exact_ohmic, partial_fraction_term};
use crate::error::Result;
use crate::model::{KernelModel, ReducedParams};
use crate::quadrature::{msd_integrand, msd_quadrature, QuadratureSettings, TemperatureMode};
use crate::specfun::{digamma, euler_mascheroni, harmonic_number, lerch_phi};

/// Signature of the Hurwitz-Lerch evaluation injected into
/// [`run_with_lerch`].
pub type LerchFn = fn(Complex64, Complex64) -> Result<Complex64>;

/// Outcome of one named check group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupReport {
    pub name: &'static str,
    pub passed: bool,
    /// Worst residual relative to tolerance when passing; the first failing
    /// case otherwise.
    pub detail: String,
}

/// Outcome of the whole suite, in fixed group order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelfTestReport {
    pub groups: Vec<GroupReport>,
}

impl SelfTestReport {
    pub fn all_passed(&self) -> bool {
        self.groups.iter().all(|g| g.passed)
    }
}

/// Runs the full suite with the production special-function layer.
pub fn run() -> SelfTestReport {
    run_with_lerch(lerch_phi)
}

/// Runs the full suite with `lerch` substituted for the Hurwitz-Lerch
/// transcendent inside the shift-identity checks.
pub fn run_with_lerch(lerch: LerchFn) -> SelfTestReport {
    SelfTestReport {
        groups: vec![
            oracle_equivalence_group(),
            specfun_identity_group(lerch),
            partial_fraction_group(),
        ],
    }
}

/// Accumulates residuals normalized by their tolerance; a ratio above one is
/// a failure, and only the first failure is kept for the report.
struct Tally {
    worst: f64,
    cases: usize,
    first_failure: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            worst: 0.0,
            cases: 0,
            first_failure: None,
        }
    }

    fn check(&mut self, ratio: f64, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if ratio > self.worst {
            self.worst = ratio;
        }
        // Written with a negated comparison so a NaN residual also fails.
        if !(ratio <= 1.0) && self.first_failure.is_none() {
            self.first_failure = Some(describe());
        }
    }

    fn fail(&mut self, message: String) {
        self.cases += 1;
        self.worst = f64::INFINITY;
        if self.first_failure.is_none() {
            self.first_failure = Some(message);
        }
    }

    fn into_report(self, name: &'static str) -> GroupReport {
        match self.first_failure {
            None => GroupReport {
                name,
                passed: true,
                detail: format!(
                    "{} cases, worst residual at {:.1e} of tolerance",
                    self.cases, self.worst
                ),
            },
            Some(detail) => GroupReport {
                name,
                passed: false,
                detail,
            },
        }
    }
}

/// Residue sum vs. quadrature on the 5 x 3 x 4 field/temperature/time grid,
/// relative tolerance 1e-6.
fn oracle_equivalence_group() -> GroupReport {
    const REL_TOL: f64 = 1e-6;
    let settings = QuadratureSettings::default();
    let mut tally = Tally::new();
    for omega_c in [0.0, 0.2, 1.0, 5.0, 20.0] {
        for omega_th in [0.05, 1.0, 100.0] {
            for t in [0.1, 1.0, 5.0, 20.0] {
                let case = || format!("omega_c={omega_c}, omega_th={omega_th}, t={t}");
                let params = match ReducedParams::unit_scales(1.0, omega_c, omega_th) {
                    Ok(p) => p,
                    Err(e) => {
                        tally.fail(format!("params at {}: {e}", case()));
                        continue;
                    }
                };
                let kernel = KernelModel::Ohmic { gamma: 1.0 };
                let exact = msd_exact_ohmic(&params, t);
                let quad = msd_quadrature(&params, &kernel, t, TemperatureMode::FullQuantum, &settings);
                match (exact, quad) {
                    (Ok(e), Ok(q)) => {
                        let ratio = (e.value - q).abs() / (REL_TOL * q.abs());
                        tally.check(ratio, || {
                            format!(
                                "oracle gap at {}: residue {} vs quadrature {q}",
                                case(),
                                e.value
                            )
                        });
                    }
                    (Err(e), _) => tally.fail(format!("residue route at {}: {e}", case())),
                    (_, Err(e)) => tally.fail(format!("quadrature at {}: {e}", case())),
                }
            }
        }
    }
    tally.into_report("oracle-equivalence")
}

/// Digamma recurrence, integer harmonic agreement, the Lerch shift identity,
/// and the harmonic-number asymptotic forms, each at its stated tolerance.
fn specfun_identity_group(lerch: LerchFn) -> GroupReport {
    let mut tally = Tally::new();
    digamma_recurrence_checks(&mut tally);
    harmonic_integer_checks(&mut tally);
    lerch_shift_checks(lerch, &mut tally);
    harmonic_asymptotic_checks(&mut tally);
    tally.into_report("specfun-identities")
}

/// `psi(z+1) - psi(z) = 1/z` within 1e-12 relative, 10^4 random points with
/// `|z|` log-uniform in [0.1, 100] and `Re z > 0`.
fn digamma_recurrence_checks(tally: &mut Tally) {
    const REL_TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_0001);
    for _ in 0..10_000 {
        let modulus = 10f64.powf(rng.gen_range(-1.0..=2.0));
        let phase = rng.gen_range(-1.55..=1.55);
        let z = Complex64::from_polar(modulus, phase);
        let step = match (digamma(z + 1.0), digamma(z)) {
            (Ok(up), Ok(down)) => up - down,
            (Err(e), _) | (_, Err(e)) => {
                tally.fail(format!("digamma at z={z}: {e}"));
                continue;
            }
        };
        let target = z.finv();
        let ratio = (step - target).norm() / (REL_TOL * target.norm());
        tally.check(ratio, || {
            format!("digamma recurrence at z={z}: psi(z+1)-psi(z)={step}, 1/z={target}")
        });
    }
}

/// `H_n` against a compensated direct sum for n = 1..=1000, within 1e-14
/// relative.
fn harmonic_integer_checks(tally: &mut Tally) {
    const REL_TOL: f64 = 1e-14;
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for n in 1..=1000u32 {
        // Kahan update keeps the reference sum below one ulp of error.
        let term = 1.0 / f64::from(n) - compensation;
        let next = sum + term;
        compensation = (next - sum) - term;
        sum = next;
        let value = match harmonic_number(Complex64::new(f64::from(n), 0.0)) {
            Ok(v) => v,
            Err(e) => {
                tally.fail(format!("harmonic_number at n={n}: {e}"));
                continue;
            }
        };
        let ratio = (value - sum).norm() / (REL_TOL * sum);
        tally.check(ratio, || {
            format!("harmonic number at n={n}: got {value}, direct sum {sum}")
        });
    }
}

/// `Phi(z,1,alpha) - z Phi(z,1,alpha+1) = 1/alpha` within 1e-11 absolute,
/// 200 random points with `|z| <= 0.95`, `Re alpha` in [0.2, 10],
/// `|Im alpha| <= 10`; crosses the series/integral switchover.
fn lerch_shift_checks(lerch: LerchFn, tally: &mut Tally) {
    const ABS_TOL: f64 = 1e-11;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_0002);
    for _ in 0..200 {
        let z = Complex64::from_polar(rng.gen_range(0.0..=0.95), rng.gen_range(-PI..PI));
        let alpha = Complex64::new(rng.gen_range(0.2..=10.0), rng.gen_range(-10.0..=10.0));
        let pair = match (lerch(z, alpha), lerch(z, alpha + 1.0)) {
            (Ok(base), Ok(shifted)) => (base, shifted),
            (Err(e), _) | (_, Err(e)) => {
                tally.fail(format!("lerch_phi at z={z}, alpha={alpha}: {e}"));
                continue;
            }
        };
        let residual = (pair.0 - z * pair.1 - alpha.finv()).norm();
        let ratio = residual / ABS_TOL;
        tally.check(ratio, || {
            format!("lerch shift at z={z}, alpha={alpha}: residual {residual:.3e}")
        });
    }
}

/// Large-argument form `H_x ~ ln x + gamma_0` within `1/(2|x|) + 1e-10` at
/// `|x| = 1e4` on rays with `Re x > 0`, and small-argument form
/// `H_x ~ (pi^2/6) x` within `2|x|^2` at `|x| = 1e-4` on a full circle of
/// rays.
fn harmonic_asymptotic_checks(tally: &mut Tally) {
    let gamma0 = euler_mascheroni();
    for phase in [-0.45 * PI, -0.25 * PI, 0.0, 0.25 * PI, 0.45 * PI] {
        let x = Complex64::from_polar(1e4, phase);
        let value = match harmonic_number(x) {
            Ok(v) => v,
            Err(e) => {
                tally.fail(format!("harmonic_number at x={x}: {e}"));
                continue;
            }
        };
        let deviation = (value - x.ln() - gamma0).norm();
        let bound = 1.0 / (2.0 * x.norm()) + 1e-10;
        tally.check(deviation / bound, || {
            format!("large-x harmonic asymptotic at x={x}: deviation {deviation:.3e}")
        });
    }
    let zeta2 = PI * PI / 6.0;
    for k in 0..8 {
        let x = Complex64::from_polar(1e-4, f64::from(k) * PI / 4.0);
        let value = match harmonic_number(x) {
            Ok(v) => v,
            Err(e) => {
                tally.fail(format!("harmonic_number at x={x}: {e}"));
                continue;
            }
        };
        let deviation = (value - zeta2 * x).norm();
        let bound = 2.0 * x.norm_sqr();
        tally.check(deviation / bound, || {
            format!("small-x harmonic asymptotic at x={x}: deviation {deviation:.3e}")
        });
    }
}

/// The alternating four-pole split against the folded integrand at 100
/// random frequency/parameter draws, relative tolerance 1e-12.
fn partial_fraction_group() -> GroupReport {
    const REL_TOL: f64 = 1e-12;
    let mut tally = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_0003);
    for _ in 0..100 {
        let gamma = 10f64.powf(rng.gen_range(-0.7..=0.7));
        let omega_c = rng.gen_range(0.0..=10.0);
        let omega_th = 10f64.powf(rng.gen_range(-1.3..=2.0));
        let t = rng.gen_range(0.1..=10.0);
        let magnitude = 10f64.powf(rng.gen_range(-1.3..=1.48));
        let omega = if rng.gen::<bool>() { magnitude } else { -magnitude };
        let case =
            || format!("omega={omega}, gamma={gamma}, omega_c={omega_c}, omega_th={omega_th}, t={t}");
        let params = match ReducedParams::unit_scales(gamma, omega_c, omega_th) {
            Ok(p) => p,
            Err(e) => {
                tally.fail(format!("params at {}: {e}", case()));
                continue;
            }
        };
        let kernel = KernelModel::Ohmic { gamma };
        let mut alternating = Complex64::new(0.0, 0.0);
        let mut failed = false;
        for index in 1..=4 {
            match partial_fraction_term(&params, t, omega, index) {
                Ok(term) => alternating += if index % 2 == 1 { term } else { -term },
                Err(e) => {
                    tally.fail(format!("term {index} at {}: {e}", case()));
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            continue;
        }
        let prefactor = Complex64::i() * params.hbar / (PI * params.mass);
        let combined = 2.0 * (prefactor * alternating).re;
        let direct = match msd_integrand(
            &params,
            &kernel,
            omega.abs(),
            t,
            TemperatureMode::FullQuantum,
        ) {
            Ok(v) => v,
            Err(e) => {
                tally.fail(format!("integrand at {}: {e}", case()));
                continue;
            }
        };
        let scale = direct.abs().max(combined.abs());
        let ratio = (combined - direct).abs() / (REL_TOL * scale);
        tally.check(ratio, || {
            format!("split {combined} vs integrand {direct} at {}", case())
        });
    }
    tally.into_report("partial-fraction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_passes_every_group() {
        let report = run();
        let names: Vec<_> = report.groups.iter().map(|g| g.name).collect();
        assert_eq!(
            names,
            ["oracle-equivalence", "specfun-identities", "partial-fraction"]
        );
        for group in &report.groups {
            assert!(group.passed, "{}: {}", group.name, group.detail);
        }
        assert!(report.all_passed());
    }

    #[test]
    fn reports_are_deterministic() {
        assert_eq!(run(), run());
    }

    #[test]
    fn corrupted_lerch_is_caught_by_the_shift_identity() {
        fn skewed(z: Complex64, alpha: Complex64) -> Result<Complex64> {
            lerch_phi(z, alpha).map(|v| v * 1.000_001)
        }
        let report = run_with_lerch(skewed);
        assert!(!report.all_passed());
        let by_name = |name: &str| {
            report
                .groups
                .iter()
                .find(|g| g.name == name)
                .expect("group present")
        };
        assert!(by_name("oracle-equivalence").passed);
        assert!(by_name("partial-fraction").passed);
        let specfun = by_name("specfun-identities");
        assert!(!specfun.passed);
        assert!(
            specfun.detail.contains("lerch shift"),
            "detail should name the failing identity: {}",
            specfun.detail
        );
    }
}
