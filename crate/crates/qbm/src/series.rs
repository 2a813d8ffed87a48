//! Displacement-versus-time series and the evaluation routes producing them.
//!
//! A [`MsdSeries`] couples a time grid with values, the route that produced
//! them, a full parameter echo, and per-point fallback provenance, so an
//! emitted file can always be traced back to the exact computation. The
//! deterministic routes are dispatched by [`compute_series`]; the
//! stochastic route builds its series through the ensemble simulator and
//! [`MsdSeries::from_parts`].

use rayon::prelude::*;

use crate::closedform::msd_exact_ohmic;
use crate::error::{QbmError, Result};
use crate::limits::{msd_high_temperature, msd_low_temperature};
use crate::model::{KernelModel, ReducedParams};
use crate::quadrature::{msd_quadrature, QuadratureSettings, TemperatureMode};

/// Evaluation route of one series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Residue-sum closed form (Ohmic kernel only).
    Exact,
    /// Direct quadrature of the spectral integral in the given thermal mode.
    Quadrature(TemperatureMode),
    /// High-temperature asymptotic form (Ohmic kernel only).
    HighT,
    /// Low-temperature asymptotic form (Ohmic kernel only).
    LowT,
    /// Stochastic ensemble; series built by the simulator, not by
    /// [`compute_series`].
    Simulate,
}

impl Route {
    /// Stable label used in emitted files.
    pub fn label(&self) -> &'static str {
        match self {
            Route::Exact => "exact",
            Route::Quadrature(_) => "quadrature",
            Route::HighT => "high_t",
            Route::LowT => "low_t",
            Route::Simulate => "simulate",
        }
    }
}

/// Sample spacing of a [`TimeGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpacing {
    Linear,
    Log,
}

/// Uniform (or geometric) time grid specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
    pub spacing: GridSpacing,
}

impl TimeGrid {
    /// Checks the grid invariants.
    ///
    /// # Errors
    /// [`QbmError::Config`] for a degenerate window, fewer than 2 points, or
    /// logarithmic spacing starting at zero.
    pub fn validate(&self) -> Result<()> {
        if !(self.t_start >= 0.0 && self.t_start.is_finite()) {
            return Err(QbmError::Config(format!(
                "t_start = {}, must be finite and >= 0",
                self.t_start
            )));
        }
        if !(self.t_end > self.t_start && self.t_end.is_finite()) {
            return Err(QbmError::Config(format!(
                "t_end = {} with t_start = {}, must satisfy t_end > t_start",
                self.t_end, self.t_start
            )));
        }
        if self.n_points < 2 {
            return Err(QbmError::Config(format!(
                "n_points = {}, must be >= 2",
                self.n_points
            )));
        }
        if self.spacing == GridSpacing::Log && self.t_start == 0.0 {
            return Err(QbmError::Config(
                "log spacing needs t_start > 0".to_string(),
            ));
        }
        Ok(())
    }

    /// Materializes the grid; both endpoints are hit exactly.
    ///
    /// # Errors
    /// See [`TimeGrid::validate`].
    pub fn times(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.n_points;
        let mut times = Vec::with_capacity(n);
        match self.spacing {
            GridSpacing::Linear => {
                let step = (self.t_end - self.t_start) / (n - 1) as f64;
                for k in 0..n {
                    times.push(self.t_start + step * k as f64);
                }
            }
            GridSpacing::Log => {
                let ratio = (self.t_end / self.t_start).ln() / (n - 1) as f64;
                for k in 0..n {
                    times.push(self.t_start * (ratio * k as f64).exp());
                }
            }
        }
        times[n - 1] = self.t_end;
        Ok(times)
    }
}

/// Displacement series with full provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct MsdSeries {
    /// Strictly ascending times.
    pub times: Vec<f64>,
    /// Mean-square displacement per time, length squared.
    pub values: Vec<f64>,
    pub route: Route,
    /// Parameters the values were computed from.
    pub params_echo: ReducedParams,
    /// Per-point provenance; true where the route delegated the value (the
    /// closed form below its small-time cutoff or at a pole coincidence).
    pub fallback_flags: Vec<bool>,
}

impl MsdSeries {
    /// Assembles a series and checks its invariants.
    ///
    /// # Errors
    /// [`QbmError::Invariant`] for length mismatches, non-ascending times,
    /// non-finite values, or a negative value on any route but [`Route::LowT`]
    /// (that asymptote is not a bound and undershoots zero at small times).
    pub fn from_parts(
        times: Vec<f64>,
        values: Vec<f64>,
        route: Route,
        params_echo: ReducedParams,
        fallback_flags: Vec<bool>,
    ) -> Result<Self> {
        let series = Self {
            times,
            values,
            route,
            params_echo,
            fallback_flags,
        };
        series.validate()?;
        Ok(series)
    }

    /// Checks the series invariants; see [`MsdSeries::from_parts`].
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.times.len() || self.fallback_flags.len() != self.times.len() {
            return Err(QbmError::Invariant(format!(
                "series lengths disagree: {} times, {} values, {} flags",
                self.times.len(),
                self.values.len(),
                self.fallback_flags.len()
            )));
        }
        for pair in self.times.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(QbmError::Invariant(format!(
                    "times not strictly ascending at {} -> {}",
                    pair[0], pair[1]
                )));
            }
        }
        for (&t, &v) in self.times.iter().zip(&self.values) {
            if !t.is_finite() || !v.is_finite() {
                return Err(QbmError::Invariant(format!(
                    "non-finite sample ({t}, {v})"
                )));
            }
            if v < 0.0 && self.route != Route::LowT {
                return Err(QbmError::Invariant(format!(
                    "negative displacement {v} at t = {t} on route {}",
                    self.route.label()
                )));
            }
        }
        Ok(())
    }
}

/// Rejects route/kernel combinations with no defined evaluation.
fn check_route(route: Route, params: &ReducedParams, kernel: &KernelModel) -> Result<()> {
    if kernel.gamma() != params.gamma {
        return Err(QbmError::Config(format!(
            "kernel damping {} disagrees with params.gamma = {}",
            kernel.gamma(),
            params.gamma
        )));
    }
    let ohmic = matches!(kernel, KernelModel::Ohmic { .. });
    match route {
        Route::Exact | Route::HighT | Route::LowT if !ohmic => Err(QbmError::Config(format!(
            "route {} is an Ohmic-kernel form; the relaxation kernel goes \
             through the quadrature route",
            route.label()
        ))),
        Route::Simulate => Err(QbmError::Config(
            "the stochastic route needs an ensemble configuration; drive it \
             through the simulator"
                .to_string(),
        )),
        _ => Ok(()),
    }
}

/// Evaluates one deterministic route over a time grid.
///
/// Grid points are computed concurrently; ordering is by grid index. The
/// closed form's own domain starts at positive times, so at `t = 0` the
/// [`Route::Exact`] series carries the definitional zero. [`Route::LowT`]
/// rejects a grid containing `t = 0` (the logarithm diverges there).
///
/// # Errors
/// [`QbmError::Config`] for invalid grids and route/kernel mismatches (see
/// [`check_route`]); evaluation errors propagate from the routes.
pub fn compute_series(
    params: &ReducedParams,
    kernel: &KernelModel,
    route: Route,
    grid: &TimeGrid,
    settings: &QuadratureSettings,
) -> Result<MsdSeries> {
    params.validate()?;
    kernel.validate()?;
    settings.validate()?;
    check_route(route, params, kernel)?;
    let times = grid.times()?;
    if route == Route::LowT && times[0] == 0.0 {
        return Err(QbmError::Config(
            "the low-temperature form diverges at t = 0; use t_start > 0".to_string(),
        ));
    }
    let points: Vec<(f64, bool)> = times
        .par_iter()
        .map(|&t| -> Result<(f64, bool)> {
            match route {
                Route::Exact => {
                    if t == 0.0 {
                        return Ok((0.0, false));
                    }
                    let eval = msd_exact_ohmic(params, t)?;
                    Ok((eval.value, eval.fallback))
                }
                Route::Quadrature(mode) => {
                    Ok((msd_quadrature(params, kernel, t, mode, settings)?, false))
                }
                Route::HighT => Ok((msd_high_temperature(params, t)?, false)),
                Route::LowT => Ok((msd_low_temperature(params, t)?, false)),
                Route::Simulate => unreachable!("rejected by check_route"),
            }
        })
        .collect::<Result<_>>()?;
    let (values, fallback_flags) = points.into_iter().unzip();
    MsdSeries::from_parts(times, values, route, *params, fallback_flags)
}
