//! Run configuration: JSON file schema, flag overrides, and resolution
//! into validated library types.
//!
//! A run is described twice over: optionally in a JSON file and directly
//! through command-line flags, with flags winning field by field. Nothing
//! here computes; [`resolve`] only merges, fills documented defaults, and
//! hands validation to the library constructors so the same invariants
//! guard both entry points.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use qbm::model::{derive_reduced, KernelModel, PhysicalInputs, ReducedParams};
use qbm::quadrature::TemperatureMode;
use qbm::series::{GridSpacing, Route, TimeGrid};
use qbm::{QbmError, Result};

/// Evaluation route names as spelled on the command line and in files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RouteName {
    Exact,
    Quadrature,
    #[value(name = "high_t")]
    HighT,
    #[value(name = "low_t")]
    LowT,
    Simulate,
}

/// Thermal weight selector for the quadrature route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[value(name = "full_quantum")]
    FullQuantum,
    #[value(name = "high_t")]
    HighT,
    #[value(name = "low_t")]
    LowT,
}

impl ModeName {
    pub fn to_mode(self) -> TemperatureMode {
        match self {
            ModeName::FullQuantum => TemperatureMode::FullQuantum,
            ModeName::HighT => TemperatureMode::HighT,
            ModeName::LowT => TemperatureMode::LowT,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModeName::FullQuantum => "full_quantum",
            ModeName::HighT => "high_t",
            ModeName::LowT => "low_t",
        }
    }
}

/// Memory kernel shapes selectable by name; `srt` takes its memory time
/// from `--tau` or the file's kernel object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    Ohmic,
    Srt,
}

/// Grid spacing names shared by the time grid and sweep ladder flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SpacingName {
    Linear,
    Log,
}

impl SpacingName {
    pub fn to_spacing(self) -> GridSpacing {
        match self {
            SpacingName::Linear => GridSpacing::Linear,
            SpacingName::Log => GridSpacing::Log,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SpacingName::Linear => "linear",
            SpacingName::Log => "log",
        }
    }
}

/// Output file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FormatName {
    Csv,
    Json,
}

impl FormatName {
    pub fn label(self) -> &'static str {
        match self {
            FormatName::Csv => "csv",
            FormatName::Json => "json",
        }
    }
}

/// Kernel description in a config file. The flat kernel carries no
/// parameters beyond the shared friction rate; the single-relaxation-time
/// kernel needs its memory time.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Ohmic,
    Srt { tau: f64 },
}

/// Time grid block of a config file; all fields optional so flags can
/// fill the gaps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub n_points: Option<usize>,
    pub spacing: Option<SpacingName>,
}

/// Laboratory inputs in Gaussian units; mutually exclusive with the
/// reduced frequencies. All fields are required because partial physical
/// input cannot be checked for consistency.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSpec {
    pub charge: f64,
    pub field_b: f64,
    pub mass: f64,
    pub light_speed: f64,
    pub temperature: f64,
    pub gamma: f64,
    pub hbar: f64,
    pub k_boltzmann: f64,
}

/// Full JSON config file schema. Every field is optional at parse time;
/// [`resolve`] decides what the invoked subcommand actually requires.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub route: Option<RouteName>,
    pub mode: Option<ModeName>,
    pub kernel: Option<KernelSpec>,
    pub gamma: Option<f64>,
    pub omega_c: Option<f64>,
    pub omega_th: Option<f64>,
    pub mass: Option<f64>,
    pub hbar: Option<f64>,
    pub physical: Option<PhysicalSpec>,
    pub t_grid: Option<GridSpec>,
    pub output: Option<PathBuf>,
    pub format: Option<FormatName>,
    pub seed: Option<u64>,
    pub n_particles: Option<usize>,
    pub dt: Option<f64>,
    pub n_steps: Option<usize>,
    pub stride: Option<usize>,
}

/// Reads and parses a JSON config file.
///
/// # Errors
/// [`QbmError::Config`] for an unreadable path or a schema violation.
pub fn load_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| QbmError::Config(format!("config file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| QbmError::Config(format!("config file {}: {e}", path.display())))
}

/// Command-line overrides; any field given here beats its config-file
/// counterpart.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ConfigFlags {
    /// Evaluation route.
    #[arg(long, value_enum)]
    pub route: Option<RouteName>,

    /// Thermal weight of the quadrature route (defaults to full_quantum).
    #[arg(long, value_enum)]
    pub mode: Option<ModeName>,

    /// Memory kernel shape (defaults to ohmic).
    #[arg(long, value_enum)]
    pub kernel: Option<KernelName>,

    /// Memory time of the srt kernel.
    #[arg(long)]
    pub tau: Option<f64>,

    /// Friction rate, > 0.
    #[arg(long)]
    pub gamma: Option<f64>,

    /// Cyclotron frequency, >= 0.
    #[arg(long)]
    pub omega_c: Option<f64>,

    /// Thermal frequency 2 k_B T / hbar, >= 0.
    #[arg(long)]
    pub omega_th: Option<f64>,

    /// Particle mass (defaults to 1).
    #[arg(long)]
    pub mass: Option<f64>,

    /// Reduced Planck constant (defaults to 1).
    #[arg(long)]
    pub hbar: Option<f64>,

    /// First grid time.
    #[arg(long)]
    pub t_start: Option<f64>,

    /// Last grid time.
    #[arg(long)]
    pub t_end: Option<f64>,

    /// Number of grid points, >= 2.
    #[arg(long)]
    pub n_points: Option<usize>,

    /// Time grid spacing rule (defaults to linear).
    #[arg(long, value_enum)]
    pub spacing: Option<SpacingName>,

    /// Output file path.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Output file format (defaults to csv).
    #[arg(long, value_enum)]
    pub format: Option<FormatName>,

    /// Random seed of the stochastic route (defaults to 0).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Ensemble size of the stochastic route (defaults to 10000).
    #[arg(long)]
    pub n_particles: Option<usize>,

    /// Integration step of the simulate subcommand.
    #[arg(long)]
    pub dt: Option<f64>,

    /// Step count of the simulate subcommand.
    #[arg(long)]
    pub n_steps: Option<usize>,

    /// Keep every stride-th sample of the simulate subcommand
    /// (defaults to 1).
    #[arg(long)]
    pub stride: Option<usize>,
}

/// Which subcommand is being resolved; each has a different set of
/// required and forbidden fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandProfile {
    /// Needs a route and a time grid; step controls are forbidden (the
    /// stochastic route derives its step from the grid).
    Compute,
    /// Needs explicit step controls; the route is fixed to the stochastic
    /// one and a time grid is forbidden.
    Simulate,
    /// Needs a route and a time window; the cyclotron rate comes from the
    /// ladder, so a base value is optional.
    Sweep,
}

/// A fully resolved, validated run.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub params: ReducedParams,
    pub kernel: KernelModel,
    pub route: Route,
    /// Present for grid-driven commands, absent for the step-driven
    /// simulate subcommand.
    pub grid: Option<TimeGrid>,
    pub output: PathBuf,
    pub format: FormatName,
    pub seed: u64,
    pub n_particles: usize,
    pub dt: Option<f64>,
    pub n_steps: Option<usize>,
    pub stride: usize,
}

fn require<T>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| {
        QbmError::Config(format!(
            "missing required parameter `{name}` (set it by flag or config file)"
        ))
    })
}

fn resolve_params(file: &FileConfig, flags: &ConfigFlags) -> Result<ReducedParams> {
    let reduced_given = flags.gamma.or(file.gamma).is_some()
        || flags.omega_c.or(file.omega_c).is_some()
        || flags.omega_th.or(file.omega_th).is_some()
        || flags.mass.or(file.mass).is_some()
        || flags.hbar.or(file.hbar).is_some();
    if let Some(phys) = file.physical {
        if reduced_given {
            return Err(QbmError::Config(
                "give either the physical block or the reduced frequencies, not both"
                    .to_string(),
            ));
        }
        return derive_reduced(&PhysicalInputs {
            charge: phys.charge,
            field_b: phys.field_b,
            mass: phys.mass,
            light_speed: phys.light_speed,
            temperature: phys.temperature,
            gamma: phys.gamma,
            hbar: phys.hbar,
            k_boltzmann: phys.k_boltzmann,
        });
    }
    ReducedParams::new(
        require(flags.gamma.or(file.gamma), "gamma")?,
        require(flags.omega_c.or(file.omega_c), "omega_c")?,
        require(flags.omega_th.or(file.omega_th), "omega_th")?,
        flags.mass.or(file.mass).unwrap_or(1.0),
        flags.hbar.or(file.hbar).unwrap_or(1.0),
    )
}

fn resolve_kernel(
    file: &FileConfig,
    flags: &ConfigFlags,
    gamma: f64,
) -> Result<KernelModel> {
    let file_name = file.kernel.map(|spec| match spec {
        KernelSpec::Ohmic => KernelName::Ohmic,
        KernelSpec::Srt { .. } => KernelName::Srt,
    });
    let file_tau = match file.kernel {
        Some(KernelSpec::Srt { tau }) => Some(tau),
        _ => None,
    };
    let name = flags.kernel.or(file_name).unwrap_or(KernelName::Ohmic);
    let kernel = match name {
        KernelName::Ohmic => {
            if flags.tau.is_some() {
                return Err(QbmError::Config(
                    "tau given but the kernel is ohmic; pass --kernel srt".to_string(),
                ));
            }
            KernelModel::Ohmic { gamma }
        }
        KernelName::Srt => KernelModel::SingleRelaxation {
            gamma,
            tau: require(flags.tau.or(file_tau), "tau")?,
        },
    };
    kernel.validate()?;
    Ok(kernel)
}

fn resolve_grid(file: &FileConfig, flags: &ConfigFlags) -> Result<TimeGrid> {
    let spec = file.t_grid.unwrap_or_default();
    let grid = TimeGrid {
        t_start: require(flags.t_start.or(spec.t_start), "t_start")?,
        t_end: require(flags.t_end.or(spec.t_end), "t_end")?,
        n_points: require(flags.n_points.or(spec.n_points), "n_points")?,
        spacing: flags
            .spacing
            .or(spec.spacing)
            .unwrap_or(SpacingName::Linear)
            .to_spacing(),
    };
    grid.validate()?;
    Ok(grid)
}

/// Merges flags over the file config and resolves them for `profile`.
///
/// # Errors
/// [`QbmError::Config`] for missing required fields, contradictory input
/// (both parameter styles, grid fields on the step-driven command, step
/// fields on a grid-driven command), or any library invariant violation.
pub fn resolve(
    file: &FileConfig,
    flags: &ConfigFlags,
    profile: CommandProfile,
) -> Result<ResolvedRun> {
    let params = if profile == CommandProfile::Sweep {
        // The ladder supplies omega_c per point; a base value only seeds
        // the parameter echo.
        let defaulted = ConfigFlags {
            omega_c: Some(flags.omega_c.or(file.omega_c).unwrap_or(0.0)),
            ..flags.clone()
        };
        resolve_params(file, &defaulted)?
    } else {
        resolve_params(file, flags)?
    };
    let kernel = resolve_kernel(file, flags, params.gamma)?;

    let route_name = match profile {
        CommandProfile::Simulate => {
            let name = flags.route.or(file.route).unwrap_or(RouteName::Simulate);
            if name != RouteName::Simulate {
                return Err(QbmError::Config(
                    "the simulate subcommand always runs the stochastic route".to_string(),
                ));
            }
            name
        }
        _ => require(flags.route.or(file.route), "route")?,
    };
    let mode = flags.mode.or(file.mode);
    if mode.is_some() && route_name != RouteName::Quadrature {
        return Err(QbmError::Config(
            "mode selects the quadrature thermal weight; pass --route quadrature"
                .to_string(),
        ));
    }
    let route = match route_name {
        RouteName::Exact => Route::Exact,
        RouteName::Quadrature => {
            Route::Quadrature(mode.unwrap_or(ModeName::FullQuantum).to_mode())
        }
        RouteName::HighT => Route::HighT,
        RouteName::LowT => Route::LowT,
        RouteName::Simulate => Route::Simulate,
    };

    let dt = flags.dt.or(file.dt);
    let n_steps = flags.n_steps.or(file.n_steps);
    let grid = match profile {
        CommandProfile::Simulate => {
            let grid_given = flags.t_start.or_else(|| file.t_grid.and_then(|g| g.t_start)).is_some()
                || flags.t_end.or_else(|| file.t_grid.and_then(|g| g.t_end)).is_some()
                || flags.n_points.or_else(|| file.t_grid.and_then(|g| g.n_points)).is_some();
            if grid_given {
                return Err(QbmError::Config(
                    "the simulate subcommand is driven by dt and n_steps, not a time grid"
                        .to_string(),
                ));
            }
            None
        }
        _ => {
            if dt.is_some() || n_steps.is_some() {
                return Err(QbmError::Config(
                    "dt and n_steps belong to the simulate subcommand; grid-driven \
                     commands derive the step from the time grid"
                        .to_string(),
                ));
            }
            Some(resolve_grid(file, flags)?)
        }
    };

    let stride = flags.stride.or(file.stride).unwrap_or(1);
    if stride == 0 {
        return Err(QbmError::Config("stride = 0, must be >= 1".to_string()));
    }
    let n_particles = flags.n_particles.or(file.n_particles).unwrap_or(10_000);
    if n_particles == 0 {
        return Err(QbmError::Config(
            "n_particles = 0, must be >= 1".to_string(),
        ));
    }

    Ok(ResolvedRun {
        params,
        kernel,
        route,
        grid,
        output: require(flags.output.clone().or_else(|| file.output.clone()), "output")?,
        format: flags.format.or(file.format).unwrap_or(FormatName::Csv),
        seed: flags.seed.or(file.seed).unwrap_or(0),
        n_particles,
        dt,
        n_steps,
        stride,
    })
}
