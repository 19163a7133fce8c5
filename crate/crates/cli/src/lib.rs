//! Command-line front end: one subcommand per experiment.
//!
//! Settings come from an optional JSON file (`--config`) and are then
//! overridden by flags. Exit codes: 0 success, 1 runtime failure, 2 bad
//! configuration (unknown flag, invalid value or combination, unwritable
//! output).

mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tcsim::analytic::{
    effective_coupling_j, max_p2, max_step_for_error, rabi_frequency,
    transfer_time_dispersive_unequal, transfer_time_nonrwa, transfer_time_resonant,
    trotter_error_bound,
};
use tcsim::simulator::{evolve_damped, evolve_with, init_state, transfer_target, EvolveOptions};
use tcsim::sweeps::{
    asymmetry_scan, coupling_ratio_sweep, damping_trajectories, detuning_heatmap, metadata_path,
    rwa_comparison, timestep_benchmark, write_json_file, write_table, AxisRange, DampingConfig,
    DampingOptions, Horizon, OutputFormat, RatioConfig, SweepGrid, SweepOptions, ENERGY_DTS,
};
use tcsim::{
    build, DensityMatrix, Frame, HamiltonianKind, StateSpec, SystemParams, TrotterConfig, C64,
};

pub use config::FileConfig;
use config::TargetArg;

/// Output directory variable; relative output paths are resolved against it.
pub const OUTPUT_DIR_ENV: &str = "TCSIM_OUTPUT_DIR";

const UNITS: &str = "Units: frequencies, detunings, couplings and rates are in units of g; \
times and steps are in units of 1/g.";

#[derive(Parser, Debug)]
#[command(name = "tcsim", version, about = "Cavity-mediated qubit state transfer simulator", after_help = UNITS)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON run configuration; flags take precedence over its fields
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output file (a directory for `damped`)
    #[arg(short, long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Directory against which relative output paths are resolved
    #[arg(long, global = true, env = OUTPUT_DIR_ENV, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    /// Output format [default: from the file extension, else csv]
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads for sweeps [default: available parallelism]
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Cavity frequency ω_c (g)
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "G")]
    omega_c: Option<f64>,
    /// Detuning Δ₁ = ω₁ − ω_c of qubit 1 (g)
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "G")]
    delta1: Option<f64>,
    /// Detuning Δ₂ = ω₂ − ω_c of qubit 2 (g)
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "G")]
    delta2: Option<f64>,
    /// Coupling of qubit 1 to the cavity (g)
    #[arg(long, global = true, value_name = "G")]
    g1: Option<f64>,
    /// Coupling of qubit 2 to the cavity (g)
    #[arg(long, global = true, value_name = "G")]
    g2: Option<f64>,
    /// Cavity damping rate κ (g)
    #[arg(long, global = true, value_name = "G")]
    kappa: Option<f64>,
    /// Trotter step (1/g) [default: 0.01]
    #[arg(long, global = true, value_name = "1/G")]
    dt: Option<f64>,

    /// Use the rotating-wave Hamiltonian
    #[arg(long, global = true)]
    rwa: bool,
    /// Cavity levels kept: 2 (one photon) or 4 (up to three photons)
    #[arg(long, global = true, value_name = "2|4")]
    cavity_levels: Option<usize>,
    /// Frame of the recorded phases and coherences
    #[arg(long, global = true, value_enum)]
    phase_frame: Option<PhaseFrameArg>,
    /// Transfer target: `corrected` flips the sign of the excited weight
    #[arg(long, global = true, value_enum)]
    target: Option<TargetArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseFrameArg {
    Lab,
    Cavity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StateArg {
    Polarized,
    Superposition,
}

#[derive(Args, Debug, Clone, Default)]
struct StateFlags {
    /// Initial state of qubit 1
    #[arg(long, value_enum)]
    state: Option<StateArg>,
    /// Ground-state amplitude of a superposition [default: 1/√2]
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Excited-state amplitude of a superposition [default: 1/√2]
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single run; writes the trajectory CSV
    Evolve {
        /// Run length (1/g) [default: two resonant transfer times]
        #[arg(long, value_name = "1/G")]
        t_max: Option<f64>,
        /// Record every N-th step
        #[arg(long, value_name = "N")]
        stride: Option<usize>,
        /// Append coherence magnitudes and photon-number occupations
        #[arg(long)]
        extended: bool,
        #[command(flatten)]
        state: StateFlags,
    },
    /// Max fidelity and time-to-max over a (Δ₁, Δ₂) lattice
    Heatmap {
        /// Detuning range applied to both axes (g)
        #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["MIN", "MAX"])]
        range: Option<Vec<f64>>,
        /// Lattice points per axis
        #[arg(long, value_name = "N")]
        points: Option<usize>,
        /// Longest evolution per cell (1/g) or `auto`
        #[arg(long, value_name = "auto|1/G")]
        horizon: Option<Horizon>,
        #[command(flatten)]
        state: StateFlags,
    },
    /// Max fidelity versus g₂/g₁
    RatioSweep {
        /// Coupling ratios g₂/g₁
        #[arg(long, value_delimiter = ',', value_name = "R,..")]
        ratios: Option<Vec<f64>>,
        /// Equal detunings Δ₁ = Δ₂ (g); 0 is the resonant configuration
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            value_name = "G,.."
        )]
        deltas: Option<Vec<f64>>,
        /// Longest evolution per row (1/g) or `auto`
        #[arg(long, value_name = "auto|1/G")]
        horizon: Option<Horizon>,
    },
    /// Density-matrix runs with a lossy cavity; writes one trajectory per run
    Damped {
        /// Damping rates κ (g)
        #[arg(long, value_delimiter = ',', value_name = "G,..")]
        kappas: Option<Vec<f64>>,
        /// Equal detunings Δ₁ = Δ₂ (g); 0 is the resonant configuration
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            value_name = "G,.."
        )]
        deltas: Option<Vec<f64>>,
        /// Run length in transfer times
        #[arg(long, value_name = "X")]
        duration_factor: Option<f64>,
        /// Record every N-th step
        #[arg(long, value_name = "N")]
        stride: Option<usize>,
    },
    /// Rotating-wave versus full Hamiltonians at resonance, versus g/ω_c
    CompareRwa {
        /// Coupling strengths g/ω_c (dimensionless)
        #[arg(long, value_delimiter = ',', value_name = "X,..")]
        g_over_omega: Option<Vec<f64>>,
        /// Longest evolution per row (1/g) or `auto`
        #[arg(long, value_name = "auto|1/G")]
        horizon: Option<Horizon>,
    },
    /// Rotating-wave versus full dynamics for signed equal detunings
    Asymmetry {
        /// Signed detunings Δ₁ = Δ₂ (g)
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            value_name = "G,.."
        )]
        deltas: Option<Vec<f64>>,
        /// Longest evolution per row (1/g) or `auto`
        #[arg(long, value_name = "auto|1/G")]
        horizon: Option<Horizon>,
    },
    /// Trotter error versus step size, plus energy drift series
    BenchmarkDt {
        /// Step sizes (1/g)
        #[arg(long, value_delimiter = ',', value_name = "1/G,..")]
        dt_list: Option<Vec<f64>>,
        /// Step sizes of the energy series (1/g)
        #[arg(long, value_delimiter = ',', value_name = "1/G,..")]
        energy_dts: Option<Vec<f64>>,
    },
    /// Evaluate a closed-form expression and print it
    Oracle {
        #[arg(long, value_enum)]
        which: OracleKind,
        /// Duration for `error-bound` and `max-step` (1/g)
        #[arg(long, value_name = "1/G")]
        t_max: Option<f64>,
        /// Error budget for `max-step`
        #[arg(long)]
        epsilon: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    /// Resonant transfer ceiling (2g₁g₂/(g₁²+g₂²))²
    MaxP2,
    /// Resonant transfer time π/√(g₁²+g₂²) (1/g)
    TransferTime,
    /// Dispersive transfer time π|Δ|/(g₁²+g₂²) at Δ = delta1 (1/g)
    DispersiveTime,
    /// Dispersive transfer time with counter-rotating correction (1/g)
    NonrwaTime,
    /// Effective qubit-qubit coupling J (g)
    EffectiveCoupling,
    /// Generalized Rabi frequency √(g₁² + Δ₁²) (g)
    Rabi,
    /// Accumulated Trotter error estimate over t-max
    ErrorBound,
    /// Largest step meeting epsilon over t-max (1/g)
    MaxStep,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

/// Flags merged over the config file.
struct Settings {
    file: FileConfig,
    common: Common,
    params: SystemParams,
    dt: f64,
    target: tcsim::simulator::TargetConvention,
    phase_frame: Frame,
}

impl Settings {
    fn new(common: Common) -> Result<Self, CliError> {
        let file = match &common.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let d = SystemParams::default();
        let params = SystemParams {
            omega_c: common.omega_c.or(file.omega_c).unwrap_or(d.omega_c),
            delta_1: common.delta1.or(file.delta_1).unwrap_or(d.delta_1),
            delta_2: common.delta2.or(file.delta_2).unwrap_or(d.delta_2),
            g_1: common.g1.or(file.g_1).unwrap_or(d.g_1),
            g_2: common.g2.or(file.g_2).unwrap_or(d.g_2),
            kappa: common.kappa.or(file.kappa).unwrap_or(d.kappa),
        };
        params.validate().map_err(config_err)?;
        let dt = common.dt.or(file.dt).unwrap_or(0.01);
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CliError::Config(format!("--dt must be > 0, got {dt}")));
        }
        let target = common
            .target
            .map(TargetArg::convention)
            .or(file.target)
            .unwrap_or_default();
        let phase_frame = match common.phase_frame.or(file.phase_frame) {
            Some(PhaseFrameArg::Cavity) => Frame::Cavity {
                omega_c: params.omega_c,
            },
            _ => Frame::Lab,
        };
        if let Some(0) = common.jobs.or(file.jobs) {
            return Err(CliError::Config("--jobs must be >= 1".into()));
        }
        Ok(Settings {
            file,
            common,
            params,
            dt,
            target,
            phase_frame,
        })
    }

    fn cavity_levels(&self) -> Result<Option<usize>, CliError> {
        match self.common.cavity_levels.or(self.file.cavity_levels) {
            None => Ok(None),
            Some(l @ (2 | 4)) => Ok(Some(l)),
            Some(l) => Err(CliError::Config(format!(
                "--cavity-levels must be 2 or 4, got {l}"
            ))),
        }
    }

    fn kind(&self, default: HamiltonianKind) -> Result<HamiltonianKind, CliError> {
        let rwa = if self.common.rwa {
            Some(true)
        } else {
            self.file.rwa
        };
        let file_kind = self.file.hamiltonian_kind;
        Ok(match (rwa, self.cavity_levels()?) {
            (Some(true), Some(4)) => {
                return Err(CliError::Config(
                    "--rwa cannot be combined with --cavity-levels 4".into(),
                ))
            }
            (Some(true), _) => HamiltonianKind::Rwa,
            (_, Some(4)) => HamiltonianKind::Fourlevel,
            (Some(false), _) => HamiltonianKind::Full,
            (None, Some(2)) => match file_kind {
                Some(HamiltonianKind::Fourlevel) | None => {
                    if default == HamiltonianKind::Fourlevel {
                        HamiltonianKind::Full
                    } else {
                        default
                    }
                }
                Some(k) => k,
            },
            (None, _) => file_kind.unwrap_or(default),
        })
    }

    fn reject_kappa(&self, cmd: &str) -> Result<(), CliError> {
        if self.params.kappa > 0.0 {
            return Err(CliError::Config(format!(
                "{cmd} runs are lossless; use `evolve` or `damped` with --kappa"
            )));
        }
        Ok(())
    }

    fn state(&self, flags: &StateFlags) -> Result<StateSpec, CliError> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let spec = match flags.state {
            Some(StateArg::Polarized) => StateSpec::Polarized,
            Some(StateArg::Superposition) => StateSpec::Superposition {
                alpha: C64::new(flags.alpha.unwrap_or(r), 0.0),
                beta: C64::new(flags.beta.unwrap_or(r), 0.0),
            },
            None if flags.alpha.is_some() || flags.beta.is_some() => {
                return Err(CliError::Config(
                    "--alpha/--beta need --state superposition".into(),
                ))
            }
            None => self.file.state_spec.clone().unwrap_or_default(),
        };
        if let StateSpec::Superposition { alpha, beta } = &spec {
            let n = alpha.norm_sqr() + beta.norm_sqr();
            if (n - 1.0).abs() > 1e-10 {
                return Err(CliError::Config(format!(
                    "|alpha|^2 + |beta|^2 must be 1, got {n}"
                )));
            }
        }
        Ok(spec)
    }

    fn horizon(&self, flag: Option<Horizon>) -> Horizon {
        flag.or(self.file.horizon).unwrap_or_default()
    }

    fn list(&self, flag: &Option<Vec<f64>>, file: &Option<Vec<f64>>, default: &[f64]) -> Vec<f64> {
        flag.clone()
            .or_else(|| file.clone())
            .unwrap_or_else(|| default.to_vec())
    }

    fn jobs(&self) -> usize {
        self.common.jobs.or(self.file.jobs).unwrap_or(0)
    }

    /// Output path resolved against the output directory, with its parent
    /// created and the file opened once to prove it is writable.
    fn output_file(&self, default: &str) -> Result<(PathBuf, OutputFormat), CliError> {
        let path = self.resolve_output(default);
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::Config(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
        fs::OpenOptions::new()
            .write(true)
            .create(true)
            .truncate(false)
            .open(&path)
            .map_err(|e| {
                CliError::Config(format!("cannot write output {}: {e}", path.display()))
            })?;
        let format = match self.common.format.or(self.file.format) {
            Some(FormatArg::Csv) => OutputFormat::Csv,
            Some(FormatArg::Json) => OutputFormat::Json,
            None => OutputFormat::from_path(&path),
        };
        Ok((path, format))
    }

    fn output_dir(&self, default: &str) -> Result<PathBuf, CliError> {
        let path = self.resolve_output(default);
        fs::create_dir_all(&path).map_err(|e| {
            CliError::Config(format!(
                "cannot create output directory {}: {e}",
                path.display()
            ))
        })?;
        Ok(path)
    }

    fn resolve_output(&self, default: &str) -> PathBuf {
        let path = self
            .common
            .output
            .clone()
            .or_else(|| self.file.output.clone())
            .unwrap_or_else(|| PathBuf::from(default));
        match &self.common.output_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path,
        }
    }
}

fn execute(cli: Cli) -> Result<String, CliError> {
    let settings = Settings::new(cli.common)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs())
        .build()
        .map_err(runtime_err)?;
    pool.install(|| dispatch(&settings, cli.command))
}

fn dispatch(s: &Settings, command: Command) -> Result<String, CliError> {
    match command {
        Command::Evolve {
            t_max,
            stride,
            extended,
            state,
        } => cmd_evolve(s, t_max, stride, extended, &state),
        Command::Heatmap {
            range,
            points,
            horizon,
            state,
        } => cmd_heatmap(s, range, points, horizon, &state),
        Command::RatioSweep {
            ratios,
            deltas,
            horizon,
        } => cmd_ratio(s, &ratios, &deltas, horizon),
        Command::Damped {
            kappas,
            deltas,
            duration_factor,
            stride,
        } => cmd_damped(s, &kappas, &deltas, duration_factor, stride),
        Command::CompareRwa {
            g_over_omega,
            horizon,
        } => cmd_compare_rwa(s, &g_over_omega, horizon),
        Command::Asymmetry { deltas, horizon } => cmd_asymmetry(s, &deltas, horizon),
        Command::BenchmarkDt {
            dt_list,
            energy_dts,
        } => cmd_benchmark(s, &dt_list, &energy_dts),
        Command::Oracle {
            which,
            t_max,
            epsilon,
        } => cmd_oracle(s, which, t_max, epsilon),
    }
}

fn written(paths: &[PathBuf]) -> String {
    paths
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn cmd_evolve(
    s: &Settings,
    t_max: Option<f64>,
    stride: Option<usize>,
    extended: bool,
    state: &StateFlags,
) -> Result<String, CliError> {
    let p = s.params;
    let kind = s.kind(HamiltonianKind::Full)?;
    if kind == HamiltonianKind::Fourlevel && p.kappa > 0.0 {
        return Err(CliError::Config(
            "--kappa > 0 needs the single-photon cavity (--cavity-levels 2)".into(),
        ));
    }
    let spec = s.state(state)?;
    let duration = match t_max.or(s.file.t_max) {
        Some(t) => t,
        None => match s.file.n_steps {
            Some(n) => n as f64 * s.dt,
            None => 2.0 * transfer_time_resonant(p.g_1, p.g_2).map_err(config_err)?,
        },
    };
    if !(duration.is_finite() && duration > 0.0) {
        return Err(CliError::Config(format!(
            "--t-max must be > 0, got {duration}"
        )));
    }
    let config = TrotterConfig::for_duration(s.dt, duration)
        .with_stride(stride.or(s.file.record_stride).unwrap_or(1));
    config.validate().map_err(config_err)?;
    let h = build(kind, &p).map_err(config_err)?;
    let psi0 = init_state(&spec, &h.layout).map_err(config_err)?;
    let target = transfer_target(&spec, &h.layout, s.target).map_err(config_err)?;
    let (path, format) = s.output_file("trajectory.csv")?;

    let opts = EvolveOptions::rotating(p.omega_c, s.phase_frame);
    let traj = if p.kappa > 0.0 {
        evolve_damped(
            &DensityMatrix::from_pure(&psi0),
            &h,
            p.kappa,
            &config,
            &target,
            &opts,
        )
    } else {
        evolve_with(&psi0, &h, &config, &target, &opts)
    }
    .map_err(runtime_err)?;
    match (format, extended) {
        (OutputFormat::Json, _) => write_json_file(&traj, &path),
        (OutputFormat::Csv, true) => traj.write_csv_extended(&path),
        (OutputFormat::Csv, false) => traj.write_csv(&path),
    }
    .map_err(runtime_err)?;
    let (f, t) = traj.max_fidelity().unwrap_or((0.0, 0.0));
    Ok(format!(
        "f_max={f:.6} t_max={t:.4} samples={} -> {}",
        traj.len(),
        path.display()
    ))
}

fn cmd_heatmap(
    s: &Settings,
    range: Option<Vec<f64>>,
    points: Option<usize>,
    horizon: Option<Horizon>,
    state: &StateFlags,
) -> Result<String, CliError> {
    s.reject_kappa("heatmap")?;
    let default = SweepGrid::default();
    let axis = |file: Option<AxisRange>| -> AxisRange {
        let mut a = file.unwrap_or(default.delta1_range);
        if let Some(r) = &range {
            a.min = r[0];
            a.max = r[1];
        }
        if let Some(n) = points {
            a.n_points = n;
        }
        a
    };
    let grid = SweepGrid {
        delta1_range: axis(s.file.delta1_range),
        delta2_range: axis(s.file.delta2_range),
        horizon: s.horizon(horizon),
        dt: s.dt,
        state_spec: s.state(state)?,
        hamiltonian_kind: s.kind(HamiltonianKind::Full)?,
        target: s.target,
    };
    grid.validate().map_err(config_err)?;
    let (path, format) = s.output_file("heatmap.csv")?;
    let res = detuning_heatmap(&s.params, &grid).map_err(runtime_err)?;
    let files = res.write_results(&path, format).map_err(runtime_err)?;
    let (n1, n2) = res.shape();
    Ok(format!(
        "cells={} horizon={:.4} flagged={} -> {}",
        n1 * n2,
        res.metadata.horizon,
        res.metadata.flagged_cells.len(),
        written(&files)
    ))
}

fn sweep_options(s: &Settings, horizon: Option<Horizon>, kind: HamiltonianKind) -> SweepOptions {
    SweepOptions {
        dt: s.dt,
        hamiltonian_kind: kind,
        horizon: s.horizon(horizon),
    }
}

fn cmd_ratio(
    s: &Settings,
    ratios: &Option<Vec<f64>>,
    deltas: &Option<Vec<f64>>,
    horizon: Option<Horizon>,
) -> Result<String, CliError> {
    s.reject_kappa("ratio-sweep")?;
    let ratios = s.list(ratios, &s.file.ratios, &[0.25, 0.5, 1.0, 2.0, 3.0, 4.0]);
    if let Some(r) = ratios.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(CliError::Config(format!("ratios must be > 0, got {r}")));
    }
    let configs: Vec<RatioConfig> = s
        .list(deltas, &s.file.deltas, &[0.0, 10.0])
        .into_iter()
        .map(|d| {
            if d == 0.0 {
                RatioConfig::Resonant
            } else {
                RatioConfig::EqualDetuning { delta: d }
            }
        })
        .collect();
    let opts = sweep_options(s, horizon, s.kind(HamiltonianKind::Full)?);
    let (path, format) = s.output_file("ratio_sweep.csv")?;
    let rows = coupling_ratio_sweep(&s.params, &ratios, &configs, &opts).map_err(runtime_err)?;
    write_table(&rows, &path, format).map_err(runtime_err)?;
    let best = rows.iter().map(|r| r.f_max).fold(0.0, f64::max);
    Ok(format!(
        "rows={} best_f_max={best:.6} -> {}",
        rows.len(),
        path.display()
    ))
}

#[derive(Serialize)]
struct DampedSummaryRow {
    kappa: f64,
    configuration: String,
    delta: f64,
    transfer_time: f64,
    excitation_at_transfer: f64,
    file: String,
}

fn cmd_damped(
    s: &Settings,
    kappas: &Option<Vec<f64>>,
    deltas: &Option<Vec<f64>>,
    duration_factor: Option<f64>,
    stride: Option<usize>,
) -> Result<String, CliError> {
    let default_kappas = if s.params.kappa > 0.0 {
        vec![s.params.kappa]
    } else {
        vec![0.01, 0.1]
    };
    let kappas = s.list(kappas, &s.file.kappas, &default_kappas);
    if let Some(k) = kappas.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
        return Err(CliError::Config(format!("kappa must be >= 0, got {k}")));
    }
    let kind = s.kind(HamiltonianKind::Rwa)?;
    if kind == HamiltonianKind::Fourlevel && kappas.iter().any(|&k| k > 0.0) {
        return Err(CliError::Config(
            "cavity damping needs the single-photon cavity (--cavity-levels 2)".into(),
        ));
    }
    let configs: Vec<DampingConfig> = s
        .list(deltas, &s.file.deltas, &[0.0, 10.0])
        .into_iter()
        .map(|d| {
            if d == 0.0 {
                DampingConfig::Resonant
            } else {
                DampingConfig::Dispersive { delta: d }
            }
        })
        .collect();
    let factor = duration_factor.unwrap_or(2.0);
    if !(factor.is_finite() && factor > 0.0) {
        return Err(CliError::Config(format!(
            "--duration-factor must be > 0, got {factor}"
        )));
    }
    let opts = DampingOptions {
        dt: s.dt,
        hamiltonian_kind: kind,
        duration_factor: factor,
        record_stride: stride.or(s.file.record_stride).unwrap_or(1).max(1),
        phase_frame: s.phase_frame,
    };
    let dir = s.output_dir("damped")?;
    let runs = damping_trajectories(&s.params, &kappas, &configs, &opts).map_err(runtime_err)?;
    let mut summary = Vec::with_capacity(runs.len());
    for run in &runs {
        let name = format!(
            "kappa{}_{}.csv",
            run.kappa,
            run.configuration.replace(['(', ')'], "")
        );
        run.trajectory
            .write_csv_extended(&dir.join(&name))
            .map_err(runtime_err)?;
        summary.push(DampedSummaryRow {
            kappa: run.kappa,
            configuration: run.configuration.clone(),
            delta: run.delta,
            transfer_time: run.transfer_time,
            excitation_at_transfer: run.excitation_at_transfer,
            file: name,
        });
    }
    let summary_path = dir.join("summary.csv");
    write_table(&summary, &summary_path, OutputFormat::Csv).map_err(runtime_err)?;
    Ok(format!("runs={} -> {}", runs.len(), summary_path.display()))
}

fn cmd_compare_rwa(
    s: &Settings,
    g_over_omega: &Option<Vec<f64>>,
    horizon: Option<Horizon>,
) -> Result<String, CliError> {
    s.reject_kappa("compare-rwa")?;
    let xs = s.list(
        g_over_omega,
        &s.file.g_over_omega,
        &[0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1],
    );
    if s.common.rwa {
        return Err(CliError::Config(
            "compare-rwa always runs both Hamiltonians; drop --rwa".into(),
        ));
    }
    let levels = s.cavity_levels()?.unwrap_or(4);
    let opts = sweep_options(s, horizon, HamiltonianKind::Full);
    let (path, format) = s.output_file("compare_rwa.csv")?;
    let rows = rwa_comparison(&s.params, &xs, levels, &opts).map_err(|e| match e {
        tcsim::Error::InvalidParams(m) => CliError::Config(m),
        e => runtime_err(e),
    })?;
    write_table(&rows, &path, format).map_err(runtime_err)?;
    Ok(format!("rows={} -> {}", rows.len(), path.display()))
}

fn cmd_asymmetry(
    s: &Settings,
    deltas: &Option<Vec<f64>>,
    horizon: Option<Horizon>,
) -> Result<String, CliError> {
    s.reject_kappa("asymmetry")?;
    let deltas = s.list(
        deltas,
        &s.file.deltas,
        &[-10.0, -5.0, -3.0, -2.0, -1.0, 1.0, 2.0, 3.0, 5.0, 10.0],
    );
    let opts = sweep_options(s, horizon, HamiltonianKind::Full);
    let (path, format) = s.output_file("asymmetry.csv")?;
    let rows = asymmetry_scan(&s.params, &deltas, &opts).map_err(runtime_err)?;
    write_table(&rows, &path, format).map_err(runtime_err)?;
    Ok(format!("rows={} -> {}", rows.len(), path.display()))
}

#[derive(Serialize)]
struct EnergyRow {
    dt: f64,
    t: f64,
    deviation: f64,
}

#[derive(Serialize)]
struct BenchmarkMeta {
    slope: f64,
    intercept: f64,
    fidelity_kind: HamiltonianKind,
    energy_kind: HamiltonianKind,
    transfer_time: f64,
    params: SystemParams,
    code_version: &'static str,
}

fn cmd_benchmark(
    s: &Settings,
    dt_list: &Option<Vec<f64>>,
    energy_dts: &Option<Vec<f64>>,
) -> Result<String, CliError> {
    s.reject_kappa("benchmark-dt")?;
    let dts = s.list(
        dt_list,
        &s.file.dt_list,
        &[0.005, 0.01, 0.015, 0.02, 0.04, 0.08],
    );
    let edts = s.list(energy_dts, &s.file.energy_dts, &ENERGY_DTS);
    if let Some(d) = dts
        .iter()
        .chain(&edts)
        .find(|d| !(d.is_finite() && **d > 0.0))
    {
        return Err(CliError::Config(format!("step sizes must be > 0, got {d}")));
    }
    let fidelity_kind = s.kind(HamiltonianKind::Rwa)?;
    let energy_kind = if fidelity_kind == HamiltonianKind::Fourlevel {
        HamiltonianKind::Fourlevel
    } else {
        HamiltonianKind::Full
    };
    let (path, format) = s.output_file("benchmark_dt.csv")?;
    let res = timestep_benchmark(&s.params, &dts, fidelity_kind, energy_kind, &edts)
        .map_err(runtime_err)?;
    write_table(&res.rows, &path, format).map_err(runtime_err)?;
    let energy_path = sibling(&path, "energy");
    let energy: Vec<EnergyRow> = res
        .energy
        .iter()
        .flat_map(|e| {
            e.times
                .iter()
                .zip(&e.deviation)
                .map(|(&t, &deviation)| EnergyRow {
                    dt: e.dt,
                    t,
                    deviation,
                })
        })
        .collect();
    write_table(&energy, &energy_path, format).map_err(runtime_err)?;
    let meta_path = metadata_path(&path);
    write_json_file(
        &BenchmarkMeta {
            slope: res.slope,
            intercept: res.intercept,
            fidelity_kind,
            energy_kind,
            transfer_time: res.transfer_time,
            params: s.params,
            code_version: tcsim::sweeps::CODE_VERSION,
        },
        &meta_path,
    )
    .map_err(runtime_err)?;
    Ok(format!(
        "slope={:.4} rows={} -> {}",
        res.slope,
        res.rows.len(),
        written(&[path, energy_path, meta_path])
    ))
}

/// `<stem>.<tag>.<ext>` next to `path`.
fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}.{tag}.{ext}"))
}

fn cmd_oracle(
    s: &Settings,
    which: OracleKind,
    t_max: Option<f64>,
    epsilon: Option<f64>,
) -> Result<String, CliError> {
    let p = s.params;
    let need_t =
        || t_max.ok_or_else(|| CliError::Config("--t-max is required for this oracle".into()));
    let value = match which {
        OracleKind::MaxP2 => max_p2(p.g_1, p.g_2).map_err(config_err)?,
        OracleKind::TransferTime => transfer_time_resonant(p.g_1, p.g_2).map_err(config_err)?,
        OracleKind::DispersiveTime => {
            transfer_time_dispersive_unequal(p.g_1, p.g_2, p.delta_1).map_err(config_err)?
        }
        OracleKind::NonrwaTime => {
            transfer_time_nonrwa((p.g_1 * p.g_2).sqrt(), p.delta_1, p.omega_1())
                .map_err(config_err)?
                .magnitude
        }
        OracleKind::EffectiveCoupling => {
            effective_coupling_j(p.g_1, p.g_2, p.delta_1, p.delta_2, p.omega_1(), p.omega_2())
                .map_err(config_err)?
        }
        OracleKind::Rabi => rabi_frequency(p.g_1, p.delta_1),
        OracleKind::ErrorBound => {
            trotter_error_bound(p.g_1, p.g_2, p.delta_1, p.delta_2, need_t()?, s.dt)
        }
        OracleKind::MaxStep => {
            let eps = epsilon
                .ok_or_else(|| CliError::Config("--epsilon is required for max-step".into()))?;
            max_step_for_error(p.g_1, p.g_2, p.delta_1, p.delta_2, need_t()?, eps)
        }
    };
    Ok(value.to_string())
}
