//! Subcommand implementations.
//!
//! Each command resolves to a pure library call followed by a single file
//! write; nothing is written before the computation has fully succeeded,
//! so a nonzero exit never leaves a partial output behind.

use std::io::Write;
use std::path::Path;

use qbm::analysis::{classify_msd, find_transition, PROMINENCE_REL_DEFAULT};
use qbm::model::{KernelModel, ReducedParams};
use qbm::quadrature::{QuadratureSettings, TemperatureMode};
use qbm::series::{compute_series, GridSpacing, MsdSeries, Route, TimeGrid};
use qbm::simulate::{run_ensemble, SimConfig};
use qbm::{QbmError, Result};

use crate::config::{FormatName, ResolvedRun, SpacingName};
use crate::output::{
    render_series_csv, render_series_json, render_sweep_csv, write_text, Header, HeaderValue,
    SweepRow,
};

fn text(value: &str) -> HeaderValue {
    HeaderValue::Text(value.to_string())
}

fn mode_label(mode: TemperatureMode) -> &'static str {
    match mode {
        TemperatureMode::FullQuantum => "full_quantum",
        TemperatureMode::HighT => "high_t",
        TemperatureMode::LowT => "low_t",
    }
}

fn spacing_label(spacing: GridSpacing) -> &'static str {
    match spacing {
        GridSpacing::Linear => "linear",
        GridSpacing::Log => "log",
    }
}

/// Header entries shared by every command: provenance, kernel, and the
/// resolved reduced parameters.
fn base_header(
    command: &'static str,
    params: &ReducedParams,
    kernel: &KernelModel,
    route: Route,
) -> Header {
    let mut header: Header = vec![("command", text(command)), ("route", text(route.label()))];
    if let Route::Quadrature(mode) = route {
        header.push(("mode", text(mode_label(mode))));
    }
    match *kernel {
        KernelModel::Ohmic { .. } => header.push(("kernel", text("ohmic"))),
        KernelModel::SingleRelaxation { tau, .. } => {
            header.push(("kernel", text("srt")));
            header.push(("tau", HeaderValue::Float(tau)));
        }
    }
    header.push(("gamma", HeaderValue::Float(params.gamma)));
    header.push(("omega_c", HeaderValue::Float(params.omega_c)));
    header.push(("omega_th", HeaderValue::Float(params.omega_th)));
    header.push(("mass", HeaderValue::Float(params.mass)));
    header.push(("hbar", HeaderValue::Float(params.hbar)));
    header
}

fn push_grid(header: &mut Header, grid: &TimeGrid) {
    header.push(("t_start", HeaderValue::Float(grid.t_start)));
    header.push(("t_end", HeaderValue::Float(grid.t_end)));
    header.push(("n_points", HeaderValue::Int(grid.n_points as u64)));
    header.push(("spacing", text(spacing_label(grid.spacing))));
}

fn emit_series(
    path: &Path,
    format: FormatName,
    header: &Header,
    series: &MsdSeries,
) -> Result<()> {
    let rendered = match format {
        FormatName::Csv => render_series_csv(header, series),
        FormatName::Json => render_series_json(header, series),
    };
    write_text(path, &rendered)
}

fn reject_memory_kernel(kernel: &KernelModel) -> Result<()> {
    match kernel {
        KernelModel::Ohmic { .. } => Ok(()),
        KernelModel::SingleRelaxation { .. } => Err(QbmError::Config(
            "the ensemble simulator integrates the memoryless kernel only".to_string(),
        )),
    }
}

/// Runs the stochastic route over a time grid by choosing a commensurate
/// step: each grid interval is split into equal substeps no longer than
/// 0.01 / max(gamma, omega_c), so every grid time is hit exactly.
fn simulate_on_grid(run: &ResolvedRun, grid: &TimeGrid) -> Result<(MsdSeries, f64, usize)> {
    reject_memory_kernel(&run.kernel)?;
    if grid.spacing != GridSpacing::Linear {
        return Err(QbmError::Config(
            "the stochastic route advances with a uniform step; use linear spacing".to_string(),
        ));
    }
    if grid.t_start != 0.0 {
        return Err(QbmError::Config(
            "the stochastic route starts from rest at t = 0; set t_start = 0".to_string(),
        ));
    }
    let interval = grid.t_end / (grid.n_points - 1) as f64;
    let dt_target = 0.01 / run.params.gamma.max(run.params.omega_c);
    let per_sample = (interval / dt_target).ceil().max(1.0) as usize;
    let dt = interval / per_sample as f64;
    let n_steps = per_sample * (grid.n_points - 1);
    let config = SimConfig {
        dt,
        n_steps,
        n_particles: run.n_particles,
        seed: run.seed,
        params: run.params,
    };
    let stats = run_ensemble(&config)?;
    let times: Vec<f64> = stats.times.iter().copied().step_by(per_sample).collect();
    let values: Vec<f64> = stats.msd_mean.iter().copied().step_by(per_sample).collect();
    let flags = vec![false; times.len()];
    let series = MsdSeries::from_parts(times, values, Route::Simulate, run.params, flags)?;
    Ok((series, dt, n_steps))
}

/// `compute`: one series by the configured route, written to the output.
pub fn run_compute(run: &ResolvedRun) -> Result<()> {
    let grid = run.grid.as_ref().expect("compute always resolves a grid");
    let mut stochastic: Header = Vec::new();
    let series = match run.route {
        Route::Simulate => {
            let (series, dt, n_steps) = simulate_on_grid(run, grid)?;
            stochastic.push(("dt", HeaderValue::Float(dt)));
            stochastic.push(("n_steps", HeaderValue::Int(n_steps as u64)));
            stochastic.push(("n_particles", HeaderValue::Int(run.n_particles as u64)));
            stochastic.push(("seed", HeaderValue::Int(run.seed)));
            series
        }
        route => compute_series(
            &run.params,
            &run.kernel,
            route,
            grid,
            &QuadratureSettings::default(),
        )?,
    };
    let mut header = base_header("compute", &run.params, &run.kernel, run.route);
    push_grid(&mut header, grid);
    header.extend(stochastic);
    header.push(("format", text(run.format.label())));
    emit_series(&run.output, run.format, &header, &series)
}

/// Parameters of one reference figure.
struct FigureSetup {
    params: ReducedParams,
    kernel: KernelModel,
    route: Route,
    grid: TimeGrid,
}

/// The eight reference curves: damping-dominated vs field-dominated, hot
/// vs cold bath, flat vs single-relaxation-time kernel, all at
/// gamma = m = hbar = 1 over ten relaxation times.
///
/// The cold-bath grid starts one sample late because the cold asymptote
/// diverges logarithmically at t = 0.
fn figure_setup(id: u8) -> Result<FigureSetup> {
    const N_POINTS: usize = 1024;
    let hot_grid = TimeGrid {
        t_start: 0.0,
        t_end: 10.0,
        n_points: N_POINTS,
        spacing: GridSpacing::Linear,
    };
    let cold_grid = TimeGrid {
        t_start: 10.0 / N_POINTS as f64,
        ..hot_grid
    };
    // Odd figures sit in the damping-dominated regime, even ones in the
    // field-dominated regime, two orders of magnitude out either way.
    let omega_c = if id % 2 == 1 { 0.1 } else { 10.0 };
    let hot = matches!(id, 1 | 2 | 5 | 6);
    let omega_th = if hot { 100.0 } else { 0.01 };
    let params = ReducedParams::new(1.0, omega_c, omega_th, 1.0, 1.0)?;
    let (kernel, route) = match (id, hot) {
        (1..=4, true) => (KernelModel::Ohmic { gamma: 1.0 }, Route::HighT),
        (1..=4, false) => (KernelModel::Ohmic { gamma: 1.0 }, Route::LowT),
        (5..=8, true) => (
            KernelModel::SingleRelaxation {
                gamma: 1.0,
                tau: 0.1,
            },
            Route::Quadrature(TemperatureMode::HighT),
        ),
        (5..=8, false) => (
            KernelModel::SingleRelaxation {
                gamma: 1.0,
                tau: 0.1,
            },
            Route::Quadrature(TemperatureMode::LowT),
        ),
        _ => {
            return Err(QbmError::Config(format!(
                "figure id {id}, must be 1 through 8"
            )))
        }
    };
    Ok(FigureSetup {
        params,
        kernel,
        route,
        grid: if hot { hot_grid } else { cold_grid },
    })
}

/// `figure`: emits the data file of reference figure `id`.
pub fn run_figure(id: u8, output: &Path, format: FormatName) -> Result<()> {
    let setup = figure_setup(id)?;
    let series = compute_series(
        &setup.params,
        &setup.kernel,
        setup.route,
        &setup.grid,
        &QuadratureSettings::default(),
    )?;
    let mut header = base_header("figure", &setup.params, &setup.kernel, setup.route);
    header.insert(1, ("figure_id", HeaderValue::Int(id as u64)));
    push_grid(&mut header, &setup.grid);
    header.push(("format", text(format.label())));
    emit_series(output, format, &header, &series)
}

/// Cyclotron-rate ladder of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct LadderSpec {
    pub start: f64,
    pub end: f64,
    pub points: usize,
    pub spacing: SpacingName,
}

impl LadderSpec {
    /// Materializes the ladder, ascending.
    ///
    /// # Errors
    /// [`QbmError::Config`] for a non-ascending window, zero points, or
    /// log spacing from zero.
    pub fn build(&self) -> Result<Vec<f64>> {
        if !(self.start.is_finite() && self.start >= 0.0) {
            return Err(QbmError::Config(format!(
                "wc_start = {}, must be finite and >= 0",
                self.start
            )));
        }
        if self.points == 0 {
            return Err(QbmError::Config("wc_points = 0, must be >= 1".to_string()));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        if !(self.end > self.start && self.end.is_finite()) {
            return Err(QbmError::Config(format!(
                "wc_end = {} with wc_start = {}, must satisfy wc_end > wc_start",
                self.end, self.start
            )));
        }
        if self.spacing == SpacingName::Log && self.start == 0.0 {
            return Err(QbmError::Config(
                "log ladder spacing needs wc_start > 0".to_string(),
            ));
        }
        let n = self.points;
        let mut ladder = Vec::with_capacity(n);
        match self.spacing {
            SpacingName::Linear => {
                let step = (self.end - self.start) / (n - 1) as f64;
                for k in 0..n {
                    ladder.push(self.start + step * k as f64);
                }
            }
            SpacingName::Log => {
                let ratio = (self.end / self.start).ln() / (n - 1) as f64;
                for k in 0..n {
                    ladder.push(self.start * (ratio * k as f64).exp());
                }
            }
        }
        ladder[n - 1] = self.end;
        Ok(ladder)
    }
}

/// `sweep`: classifies every ladder point and reports the first rate
/// whose curve turns damped-oscillatory.
///
/// The transition search runs first; an oscillatory-to-monotonic reversal
/// aborts before anything is written.
pub fn run_sweep(run: &ResolvedRun, ladder_spec: &LadderSpec) -> Result<()> {
    let grid = run.grid.as_ref().expect("sweep always resolves a grid");
    if run.format != FormatName::Csv {
        return Err(QbmError::Config(
            "sweep reports are csv only".to_string(),
        ));
    }
    if grid.spacing != GridSpacing::Linear {
        return Err(QbmError::Config(
            "sweep classifies on a linearly sampled time window".to_string(),
        ));
    }
    let ladder = ladder_spec.build()?;
    let flip = find_transition(
        &run.params,
        &run.kernel,
        run.route,
        &ladder,
        (grid.t_start, grid.t_end),
        grid.n_points,
    )?;
    let mut rows = Vec::with_capacity(ladder.len());
    for &omega_c in &ladder {
        let params = ReducedParams {
            omega_c,
            ..run.params
        };
        let series = compute_series(
            &params,
            &run.kernel,
            run.route,
            grid,
            &QuadratureSettings::default(),
        )?;
        let class = classify_msd(&series, PROMINENCE_REL_DEFAULT)?;
        rows.push(SweepRow {
            omega_c,
            verdict: class.verdict.label(),
            n_maxima: class.n_local_maxima,
            first_max_time: class.first_max_time,
        });
    }
    let mut header = base_header("sweep", &run.params, &run.kernel, run.route);
    // The ladder supplies omega_c; drop the placeholder echo.
    header.retain(|(key, _)| *key != "omega_c");
    push_grid(&mut header, grid);
    header.push(("wc_start", HeaderValue::Float(ladder_spec.start)));
    header.push(("wc_end", HeaderValue::Float(ladder_spec.end)));
    header.push(("wc_points", HeaderValue::Int(ladder_spec.points as u64)));
    header.push(("wc_spacing", text(ladder_spec.spacing.label())));
    header.push(("format", text(run.format.label())));
    write_text(&run.output, &render_sweep_csv(&header, flip, &rows))
}

/// `simulate`: advances the ensemble with explicit step controls and
/// writes every stride-th sample.
pub fn run_simulate(run: &ResolvedRun) -> Result<()> {
    reject_memory_kernel(&run.kernel)?;
    let dt = run.dt.ok_or_else(|| {
        QbmError::Config("missing required parameter `dt` (set it by flag or config file)".to_string())
    })?;
    let n_steps = run.n_steps.ok_or_else(|| {
        QbmError::Config(
            "missing required parameter `n_steps` (set it by flag or config file)".to_string(),
        )
    })?;
    let config = SimConfig {
        dt,
        n_steps,
        n_particles: run.n_particles,
        seed: run.seed,
        params: run.params,
    };
    let stats = run_ensemble(&config)?;
    let times: Vec<f64> = stats.times.iter().copied().step_by(run.stride).collect();
    let values: Vec<f64> = stats.msd_mean.iter().copied().step_by(run.stride).collect();
    let flags = vec![false; times.len()];
    let series = MsdSeries::from_parts(times, values, Route::Simulate, run.params, flags)?;
    let mut header = base_header("simulate", &run.params, &run.kernel, run.route);
    header.push(("dt", HeaderValue::Float(dt)));
    header.push(("n_steps", HeaderValue::Int(n_steps as u64)));
    header.push(("n_particles", HeaderValue::Int(run.n_particles as u64)));
    header.push(("seed", HeaderValue::Int(run.seed)));
    header.push(("stride", HeaderValue::Int(run.stride as u64)));
    header.push(("format", text(run.format.label())));
    emit_series(&run.output, run.format, &header, &series)
}

/// `selftest`: runs the consistency suite, printing one line per group
/// and a summary line. Returns whether every group passed.
///
/// # Errors
/// Only write failures on `out`; the suite itself cannot error.
pub fn run_selftest(out: &mut dyn Write) -> std::io::Result<bool> {
    let report = qbm::selftest::run();
    for group in &report.groups {
        let status = if group.passed { "pass" } else { "FAIL" };
        writeln!(out, "group {}: {status} ({})", group.name, group.detail)?;
    }
    match report.groups.iter().find(|group| !group.passed) {
        None => writeln!(out, "selftest: pass")?,
        Some(group) => writeln!(out, "selftest: FAIL ({})", group.name)?,
    }
    Ok(report.all_passed())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_endpoints_are_exact_in_both_spacings() {
        for spacing in [SpacingName::Linear, SpacingName::Log] {
            let ladder = LadderSpec {
                start: 0.05,
                end: 20.0,
                points: 16,
                spacing,
            }
            .build()
            .unwrap();
            assert_eq!(ladder.len(), 16);
            assert_eq!(ladder[0], 0.05);
            assert_eq!(ladder[15], 20.0);
            assert!(ladder.windows(2).all(|p| p[1] > p[0]));
        }
    }

    #[test]
    fn one_point_ladder_ignores_the_end() {
        let ladder = LadderSpec {
            start: 3.0,
            end: 3.0,
            points: 1,
            spacing: SpacingName::Log,
        }
        .build()
        .unwrap();
        assert_eq!(ladder, vec![3.0]);
    }

    #[test]
    fn degenerate_ladders_are_rejected() {
        let base = LadderSpec {
            start: 1.0,
            end: 2.0,
            points: 4,
            spacing: SpacingName::Linear,
        };
        assert!(LadderSpec { points: 0, ..base }.build().is_err());
        assert!(LadderSpec { end: 0.5, ..base }.build().is_err());
        assert!(LadderSpec {
            start: 0.0,
            spacing: SpacingName::Log,
            ..base
        }
        .build()
        .is_err());
    }

    #[test]
    fn every_figure_id_resolves_and_out_of_range_does_not() {
        for id in 1..=8u8 {
            let setup = figure_setup(id).unwrap();
            assert_eq!(setup.params.gamma, 1.0);
            let hot = matches!(id, 1 | 2 | 5 | 6);
            assert_eq!(setup.params.omega_th, if hot { 100.0 } else { 0.01 });
            assert_eq!(setup.params.omega_c, if id % 2 == 1 { 0.1 } else { 10.0 });
            if hot {
                assert_eq!(setup.grid.t_start, 0.0);
            } else {
                assert!(setup.grid.t_start > 0.0);
            }
        }
        assert!(figure_setup(0).is_err());
        assert!(figure_setup(9).is_err());
    }

    #[test]
    fn selftest_report_lists_every_group_then_a_summary() {
        let mut sink = Vec::new();
        assert!(run_selftest(&mut sink).unwrap());
        let report = String::from_utf8(sink).unwrap();
        for name in ["oracle-equivalence", "specfun-identities", "partial-fraction"] {
            assert!(report.contains(&format!("group {name}: pass")), "{report}");
        }
        assert!(report.ends_with("selftest: pass\n"), "{report}");
    }
}
