//! Regime classification of displacement curves.
//!
//! The qualitative observable is whether the displacement grows
//! monotonically or rings: a strong enough field turns damped growth into a
//! damped oscillation. Detection runs on the curve itself, not its
//! derivative (differencing amplifies quadrature noise), and a local
//! maximum only counts when its topographic prominence clears a fraction of
//! the series range, so tolerance-level wiggles from the numerical routes
//! never register as oscillation.
//!
//! "Oscillatory" here means at least one qualifying local maximum. A curve
//! with an inflection but no extremum is monotonic under this definition;
//! that boundary choice is this crate's, made operational so it can be
//! tested.

use crate::error::{QbmError, Result};
use crate::model::{KernelModel, ReducedParams};
use crate::quadrature::QuadratureSettings;
use crate::series::{compute_series, GridSpacing, MsdSeries, Route, TimeGrid};

/// Fraction of the series range a maximum's prominence must clear; admits
/// the physical oscillations (prominence of order the oscillation
/// amplitude) while rejecting noise at the quadrature tolerance, several
/// orders below.
pub const PROMINENCE_REL_DEFAULT: f64 = 1e-3;

/// Fewest samples [`classify_msd`] accepts.
pub const MIN_SAMPLES: usize = 16;

/// Classification verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Monotonic,
    DampedOscillatory,
}

impl Verdict {
    /// Stable label used in emitted files.
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Monotonic => "monotonic",
            Verdict::DampedOscillatory => "damped_oscillatory",
        }
    }
}

/// Outcome of [`classify_msd`].
///
/// `verdict` is [`Verdict::DampedOscillatory`] iff `n_local_maxima >= 1`;
/// `first_max_time` is present iff a maximum qualified, `period_estimate`
/// iff at least two did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeClassification {
    pub verdict: Verdict,
    pub n_local_maxima: usize,
    pub first_max_time: Option<f64>,
    /// Mean spacing of the qualifying maxima.
    pub period_estimate: Option<f64>,
}

/// Indices of strict interior local maxima with their topographic
/// prominence: the drop from the peak to the higher of the two bases, each
/// base being the lowest point between the peak and the nearest strictly
/// higher sample (or the series end) on that side.
fn prominent_maxima(values: &[f64], threshold: f64) -> Vec<usize> {
    let mut peaks = Vec::new();
    for i in 1..values.len() - 1 {
        if !(values[i] > values[i - 1] && values[i] > values[i + 1]) {
            continue;
        }
        let mut left_base = values[i];
        for j in (0..i).rev() {
            if values[j] > values[i] {
                break;
            }
            left_base = left_base.min(values[j]);
        }
        let mut right_base = values[i];
        for &v in &values[i + 1..] {
            if v > values[i] {
                break;
            }
            right_base = right_base.min(v);
        }
        if values[i] - left_base.max(right_base) >= threshold {
            peaks.push(i);
        }
    }
    peaks
}

/// Classifies a displacement series as monotonic or damped-oscillatory.
///
/// # Errors
/// [`QbmError::InsufficientData`] below [`MIN_SAMPLES`] samples;
/// [`QbmError::Invariant`] from the series invariants or a non-positive
/// `prominence_rel`.
pub fn classify_msd(series: &MsdSeries, prominence_rel: f64) -> Result<RegimeClassification> {
    series.validate()?;
    if series.times.len() < MIN_SAMPLES {
        return Err(QbmError::InsufficientData {
            got: series.times.len(),
            need: MIN_SAMPLES,
        });
    }
    if !(prominence_rel > 0.0 && prominence_rel.is_finite()) {
        return Err(QbmError::Invariant(format!(
            "prominence_rel = {prominence_rel}, must be finite and > 0"
        )));
    }
    let max = series.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let min = series.values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let peaks = prominent_maxima(&series.values, prominence_rel * (max - min));
    let first_max_time = peaks.first().map(|&i| series.times[i]);
    let period_estimate = if peaks.len() >= 2 {
        let span = series.times[*peaks.last().unwrap()] - series.times[peaks[0]];
        Some(span / (peaks.len() - 1) as f64)
    } else {
        None
    };
    Ok(RegimeClassification {
        verdict: if peaks.is_empty() {
            Verdict::Monotonic
        } else {
            Verdict::DampedOscillatory
        },
        n_local_maxima: peaks.len(),
        first_max_time,
        period_estimate,
    })
}

/// Least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 for a degenerate (constant-`y`)
    /// input that the line reproduces exactly.
    pub r_squared: f64,
}

/// Fits `y = slope * x + intercept` by least squares.
///
/// # Errors
/// [`QbmError::InsufficientData`] below 2 points or on mismatched lengths;
/// [`QbmError::Invariant`] when all `x` coincide.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(QbmError::InsufficientData {
            got: x.len().min(y.len()),
            need: 2,
        });
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(QbmError::Invariant(
            "linear fit needs at least two distinct x values".to_string(),
        ));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept: mean_y - slope * mean_x,
        r_squared,
    })
}

/// Smallest grid rate whose series classifies as damped-oscillatory.
///
/// Sweeps `omega_c_grid` (ascending) with the remaining parameters fixed,
/// evaluating `samples` points of `route` over `t_window` and classifying
/// at [`PROMINENCE_REL_DEFAULT`]. Returns `None` when every grid point
/// stays monotonic. The verdict must be monotone along the grid: once a
/// point classifies oscillatory, a later monotonic point means the sampling
/// cannot resolve the oscillation and the sweep is rejected rather than
/// reported.
///
/// # Errors
/// [`QbmError::Config`] for a non-ascending grid;
/// [`QbmError::NonMonotoneFlip`] on an oscillatory-to-monotonic reversal;
/// route errors propagate.
pub fn find_transition(
    params_base: &ReducedParams,
    kernel: &KernelModel,
    route: Route,
    omega_c_grid: &[f64],
    t_window: (f64, f64),
    samples: usize,
) -> Result<Option<f64>> {
    for pair in omega_c_grid.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(QbmError::Config(format!(
                "omega_c grid not ascending at {} -> {}",
                pair[0], pair[1]
            )));
        }
    }
    let grid = TimeGrid {
        t_start: t_window.0,
        t_end: t_window.1,
        n_points: samples,
        spacing: GridSpacing::Linear,
    };
    let mut transition = None;
    for &omega_c in omega_c_grid {
        let params = ReducedParams {
            omega_c,
            ..*params_base
        };
        let series = compute_series(
            &params,
            kernel,
            route,
            &grid,
            &QuadratureSettings::default(),
        )?;
        let class = classify_msd(&series, PROMINENCE_REL_DEFAULT)?;
        match (class.verdict, transition) {
            (Verdict::DampedOscillatory, None) => transition = Some(omega_c),
            (Verdict::Monotonic, Some(first)) => {
                return Err(QbmError::NonMonotoneFlip {
                    omega_c,
                    transition: first,
                });
            }
            _ => {}
        }
    }
    Ok(transition)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn series_of(values: Vec<f64>) -> MsdSeries {
        let times = (0..values.len()).map(|k| k as f64).collect();
        let flags = vec![false; values.len()];
        let params = ReducedParams::unit_scales(1.0, 0.0, 1.0).unwrap();
        MsdSeries::from_parts(times, values, Route::HighT, params, flags).unwrap()
    }

    fn high_t_series(omega_c: f64, n: usize) -> MsdSeries {
        let params = ReducedParams::unit_scales(1.0, omega_c, 100.0).unwrap();
        compute_series(
            &params,
            &KernelModel::Ohmic { gamma: 1.0 },
            Route::HighT,
            &TimeGrid {
                t_start: 0.0,
                t_end: 10.0,
                n_points: n,
                spacing: GridSpacing::Linear,
            },
            &QuadratureSettings::default(),
        )
        .unwrap()
    }

    #[test]
    fn linear_ramp_is_monotonic() {
        let class = classify_msd(&series_of((0..32).map(f64::from).collect()), 1e-3).unwrap();
        assert_eq!(class.verdict, Verdict::Monotonic);
        assert_eq!(class.n_local_maxima, 0);
        assert!(class.first_max_time.is_none() && class.period_estimate.is_none());
    }

    #[test]
    fn weak_field_high_t_curve_is_monotonic() {
        let class = classify_msd(&high_t_series(0.0, 512), 1e-3).unwrap();
        assert_eq!(class.verdict, Verdict::Monotonic);
    }

    #[test]
    fn strong_field_high_t_curve_rings_at_the_cyclotron_period() {
        let class = classify_msd(&high_t_series(10.0, 2048), 1e-3).unwrap();
        assert_eq!(class.verdict, Verdict::DampedOscillatory);
        assert!(class.n_local_maxima >= 2);
        let period = class.period_estimate.unwrap();
        let expected = 2.0 * PI / 10.0;
        assert!(
            (period - expected).abs() <= 0.05 * expected,
            "period {period} vs {expected}"
        );
        assert!(class.first_max_time.unwrap() < 1.0);
    }

    #[test]
    fn small_series_rejected() {
        let class = classify_msd(&series_of((0..15).map(f64::from).collect()), 1e-3);
        assert!(matches!(
            class,
            Err(QbmError::InsufficientData { got: 15, need: 16 })
        ));
    }

    #[test]
    fn scale_invariance() {
        let series = high_t_series(10.0, 1024);
        let mut scaled = series.clone();
        for v in &mut scaled.values {
            *v *= 7.3e5;
        }
        let a = classify_msd(&series, 1e-3).unwrap();
        let b = classify_msd(&scaled, 1e-3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tolerance_level_noise_is_rejected() {
        // Wiggles at the quadrature tolerance, orders below the prominence
        // threshold, must not flip the verdict.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let values: Vec<f64> = (0..256)
            .map(|k| f64::from(k) * (1.0 + 1e-8 * rng.gen_range(-1.0..1.0)))
            .collect();
        let class = classify_msd(&series_of(values), 1e-3).unwrap();
        assert_eq!(class.verdict, Verdict::Monotonic);
    }

    #[test]
    fn constant_series_is_monotonic() {
        let class = classify_msd(&series_of(vec![2.0; 64]), 1e-3).unwrap();
        assert_eq!(class.verdict, Verdict::Monotonic);
    }

    #[test]
    fn synthetic_period_recovery() {
        let t0 = 1.7;
        let values: Vec<f64> = (0..4096)
            .map(|k| {
                let t = k as f64 * 20.0 / 4095.0;
                5.0 + t + 2.0 * (2.0 * PI * t / t0).sin() * (-0.1 * t).exp()
            })
            .collect();
        let class = classify_msd(&series_of(values), 1e-3).unwrap();
        let period = class.period_estimate.unwrap();
        // Times in series_of are sample indices; convert to the t scale.
        let period_t = period * 20.0 / 4095.0;
        assert!((period_t - t0).abs() <= 0.02 * t0, "period {period_t}");
    }

    #[test]
    fn grid_refinement_keeps_verdicts() {
        for (omega_c, expect) in [(0.1, Verdict::Monotonic), (10.0, Verdict::DampedOscillatory)] {
            let coarse = classify_msd(&high_t_series(omega_c, 1024), 1e-3).unwrap();
            let fine = classify_msd(&high_t_series(omega_c, 2048), 1e-3).unwrap();
            assert_eq!(coarse.verdict, expect);
            assert_eq!(fine.verdict, expect);
        }
    }

    #[test]
    fn linear_fit_recovers_exact_line_and_flags_bad_input() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 2.0).collect();
        let fit = linear_fit(&x, &y).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-13);
        assert!((fit.intercept + 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-13);
        assert!(matches!(
            linear_fit(&[1.0], &[2.0]),
            Err(QbmError::InsufficientData { .. })
        ));
        assert!(matches!(
            linear_fit(&[1.0, 1.0], &[2.0, 3.0]),
            Err(QbmError::Invariant(_))
        ));
    }

    #[test]
    fn transition_found_on_two_point_grid() {
        let params = ReducedParams::unit_scales(1.0, 0.0, 100.0).unwrap();
        let kernel = KernelModel::Ohmic { gamma: 1.0 };
        let flip = find_transition(&params, &kernel, Route::HighT, &[0.1, 10.0], (0.0, 10.0), 1024)
            .unwrap();
        assert_eq!(flip, Some(10.0));
    }

    #[test]
    fn transition_absent_below_threshold() {
        let params = ReducedParams::unit_scales(1.0, 0.0, 100.0).unwrap();
        let kernel = KernelModel::Ohmic { gamma: 1.0 };
        let flip = find_transition(
            &params,
            &kernel,
            Route::HighT,
            &[0.01, 0.02, 0.05],
            (0.0, 10.0),
            512,
        )
        .unwrap();
        assert_eq!(flip, None);
    }

    #[test]
    fn transition_in_low_temperature_route_too() {
        let params = ReducedParams::unit_scales(1.0, 0.0, 0.0).unwrap();
        let kernel = KernelModel::Ohmic { gamma: 1.0 };
        let flip = find_transition(
            &params,
            &kernel,
            Route::LowT,
            &[0.1, 10.0],
            (0.05, 10.0),
            1024,
        )
        .unwrap();
        assert_eq!(flip, Some(10.0));
    }

    #[test]
    fn unsorted_grid_rejected() {
        let params = ReducedParams::unit_scales(1.0, 0.0, 100.0).unwrap();
        let kernel = KernelModel::Ohmic { gamma: 1.0 };
        assert!(matches!(
            find_transition(&params, &kernel, Route::HighT, &[1.0, 0.5], (0.0, 10.0), 64),
            Err(QbmError::Config(_))
        ));
    }
}
