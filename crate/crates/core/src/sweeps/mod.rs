//! Parameter sweeps that map fidelity landscapes and reproduce each
//! experiment class, plus CSV/JSON persistence.
//!
//! Every cell is an independent evolution. Cells run in parallel on the
//! global rayon pool and are gathered in grid order, so results do not
//! depend on scheduling.

mod grid;
mod io;

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    max_p2, transfer_time_dispersive_unequal, transfer_time_nonrwa, transfer_time_resonant,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{build, HamiltonianKind, SystemParams};
use crate::simulator::{
    evolve_damped, fidelity_series, first_max, init_state, scan_fidelity, transfer_target,
    DensityMatrix, EvolveOptions, FidelityScan, Frame, StateSpec, TargetConvention, Trajectory,
    TrotterConfig, TrotterStepper,
};

pub use grid::{AxisRange, Horizon, SweepGrid};
pub use io::{metadata_path, read_table, write_json_file, write_table, OutputFormat};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fraction of the horizon at the end within which a maximum is flagged as
/// possibly not yet reached.
pub const LATE_MAX_FRACTION: f64 = 0.05;

/// Settings shared by the table-producing sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepOptions {
    pub dt: f64,
    pub hamiltonian_kind: HamiltonianKind,
    /// Overrides each sweep's own horizon rule.
    pub horizon: Horizon,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            dt: 0.01,
            hamiltonian_kind: HamiltonianKind::Full,
            horizon: Horizon::Auto,
        }
    }
}

impl SweepOptions {
    fn resolve(&self, auto: f64) -> f64 {
        match self.horizon {
            Horizon::Fixed(t) => t,
            Horizon::Auto => auto,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!("dt must be > 0, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Best transfer fidelity of one parameter point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub f_max: f64,
    pub t_max: f64,
}

/// Runs one configuration and scans the fidelity to the transfer target,
/// read out in the cavity frame.
pub fn run_cell(
    params: &SystemParams,
    kind: HamiltonianKind,
    spec: &StateSpec,
    target: TargetConvention,
    dt: f64,
    horizon: f64,
) -> Result<FidelityScan> {
    let h = build(kind, params)?;
    let stepper = TrotterStepper::new(&h, dt)?;
    let psi0 = init_state(spec, &h.layout)?;
    let tgt = transfer_target(spec, &h.layout, target)?;
    let n = TrotterConfig::for_duration(dt, horizon).n_steps;
    scan_fidelity(
        &psi0,
        &stepper,
        n,
        &tgt,
        &Frame::Cavity {
            omega_c: params.omega_c,
        },
    )
}

/// Default horizon for a detuning lattice.
///
/// Three dispersive transfer times at the largest grid detuning (at least
/// `5g`), never below three resonant transfer times. For Hamiltonians with
/// counter-rotating terms the horizon also covers one period
/// `2π ω_c/(g₁g₂)` of the slow beat those terms induce, since weakly
/// detuned diagonal cells only complete their transfer on that scale.
pub fn auto_horizon(params: &SystemParams, grid: &SweepGrid) -> Result<(f64, String)> {
    let (g1, g2) = (params.g_1, params.g_2);
    let d = grid
        .delta1_range
        .max_abs()
        .max(grid.delta2_range.max_abs())
        .max(5.0 * g1.max(g2));
    let disp = 3.0 * transfer_time_dispersive_unequal(g1, g2, d)?;
    let res = 3.0 * transfer_time_resonant(g1, g2)?;
    let mut t = disp.max(res);
    let mut rule =
        format!("auto: max(3*t_dispersive(|delta|={d}) = {disp:.6}, 3*t_resonant = {res:.6}");
    if grid.hamiltonian_kind != HamiltonianKind::Rwa && g1 * g2 > 0.0 {
        let beat = 2.0 * PI * params.omega_c / (g1 * g2);
        t = t.max(beat);
        rule.push_str(&format!(", 2*pi*omega_c/(g1*g2) = {beat:.6}"));
    }
    rule.push(')');
    Ok((t, rule))
}

/// Outcome of one grid cell in the metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellStatus {
    pub i: usize,
    pub j: usize,
    pub delta1: f64,
    pub delta2: f64,
    /// `ok`, `late_max` (maximum in the last 5% of the horizon) or an error message.
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub params: SystemParams,
    pub dt: f64,
    pub horizon: f64,
    pub horizon_rule: String,
    pub hamiltonian_kind: HamiltonianKind,
    pub target_convention: TargetConvention,
    pub state_spec: StateSpec,
    pub fidelity_frame: String,
    pub code_version: String,
    pub wall_time_s: f64,
    /// Cells that are not plain `ok`.
    pub flagged_cells: Vec<CellStatus>,
}

/// Max fidelity and time-to-max over a `(Δ₁, Δ₂)` lattice. Row `i` of each
/// matrix belongs to `delta1[i]`, column `j` to `delta2[j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub delta1: Vec<f64>,
    pub delta2: Vec<f64>,
    pub f_max: Vec<Vec<f64>>,
    pub t_max: Vec<Vec<f64>>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn shape(&self) -> (usize, usize) {
        (self.delta1.len(), self.delta2.len())
    }

    /// Largest `|f[i][j] − f[j][i]|` on a square grid.
    pub fn transpose_asymmetry(&self) -> f64 {
        let n = self.delta1.len().min(self.delta2.len());
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.f_max[i][j] - self.f_max[j][i]).abs());
            }
        }
        worst
    }
}

/// Fidelity landscape over the detuning lattice of `grid`.
pub fn detuning_heatmap(params: &SystemParams, grid: &SweepGrid) -> Result<SweepResult> {
    params.validate()?;
    grid.validate()?;
    let start = Instant::now();
    let (horizon, horizon_rule) = match grid.horizon {
        Horizon::Fixed(t) => (t, "fixed".to_string()),
        Horizon::Auto => auto_horizon(params, grid)?,
    };
    let d1 = grid.delta1_range.values();
    let d2 = grid.delta2_range.values();
    let cells: Vec<(usize, usize)> = (0..d1.len())
        .flat_map(|i| (0..d2.len()).map(move |j| (i, j)))
        .collect();
    let outcomes: Vec<Result<FidelityScan>> = cells
        .par_iter()
        .map(|&(i, j)| {
            run_cell(
                &params.with_detunings(d1[i], d2[j]),
                grid.hamiltonian_kind,
                &grid.state_spec,
                grid.target,
                grid.dt,
                horizon,
            )
        })
        .collect();

    let mut f_max = vec![vec![f64::NAN; d2.len()]; d1.len()];
    let mut t_max = vec![vec![f64::NAN; d2.len()]; d1.len()];
    let mut flagged = Vec::new();
    for (&(i, j), out) in cells.iter().zip(outcomes) {
        let status = match out {
            Ok(scan) => {
                f_max[i][j] = scan.f_max;
                t_max[i][j] = scan.t_max;
                let t_end = scan.n_steps as f64 * grid.dt;
                if scan.t_max >= t_end * (1.0 - LATE_MAX_FRACTION) {
                    Some("late_max".to_string())
                } else {
                    None
                }
            }
            Err(e) => Some(format!("error: {e}")),
        };
        if let Some(status) = status {
            flagged.push(CellStatus {
                i,
                j,
                delta1: d1[i],
                delta2: d2[j],
                status,
            });
        }
    }
    if flagged.iter().any(|c| c.status.starts_with("error")) && flagged.len() == cells.len() {
        return Err(Error::invalid(format!(
            "every cell failed: {}",
            flagged[0].status
        )));
    }
    Ok(SweepResult {
        delta1: d1,
        delta2: d2,
        f_max,
        t_max,
        metadata: SweepMetadata {
            params: *params,
            dt: grid.dt,
            horizon,
            horizon_rule,
            hamiltonian_kind: grid.hamiltonian_kind,
            target_convention: grid.target,
            state_spec: grid.state_spec.clone(),
            fidelity_frame: "cavity".to_string(),
            code_version: CODE_VERSION.to_string(),
            wall_time_s: start.elapsed().as_secs_f64(),
            flagged_cells: flagged,
        },
    })
}

/// Same landscape with unequal couplings taken from `params`.
pub fn coupling_ratio_detuning_heatmap(
    params: &SystemParams,
    grid: &SweepGrid,
) -> Result<SweepResult> {
    if params.g_1 <= 0.0 || params.g_2 <= 0.0 {
        return Err(Error::invalid("both couplings must be positive"));
    }
    detuning_heatmap(params, grid)
}

/// Detuning configuration of a coupling-ratio sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RatioConfig {
    Resonant,
    /// `Δ₁ = Δ₂ = delta`.
    EqualDetuning {
        delta: f64,
    },
}

impl RatioConfig {
    pub fn delta(&self) -> f64 {
        match self {
            RatioConfig::Resonant => 0.0,
            RatioConfig::EqualDetuning { delta } => *delta,
        }
    }

    pub fn label(&self) -> String {
        match self {
            RatioConfig::Resonant => "resonant".to_string(),
            RatioConfig::EqualDetuning { delta } => format!("dispersive({delta})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub configuration: String,
    pub delta: f64,
    pub ratio: f64,
    pub g1: f64,
    pub g2: f64,
    pub horizon: f64,
    pub f_max: f64,
    pub t_max: f64,
    /// Closed-form ceiling `(2g₁g₂/(g₁²+g₂²))²`.
    pub predicted_max: f64,
}

/// Best transfer for `g₂ = ratio·g₁` with `g₁` from `params`.
///
/// Horizon: three resonant periods `3π/√(g₁²+g₂²)` or three dispersive
/// transfer times `3π|Δ|/(g₁²+g₂²)`.
pub fn coupling_ratio_sweep(
    params: &SystemParams,
    ratios: &[f64],
    configurations: &[RatioConfig],
    opts: &SweepOptions,
) -> Result<Vec<RatioRow>> {
    params.validate()?;
    opts.validate()?;
    if let Some(r) = ratios.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::invalid(format!("ratios must be > 0, got {r}")));
    }
    let g1 = params.g_1;
    if g1 <= 0.0 {
        return Err(Error::invalid("g_1 must be > 0 for a ratio sweep"));
    }
    let jobs: Vec<(RatioConfig, f64)> = configurations
        .iter()
        .flat_map(|c| ratios.iter().map(move |r| (*c, *r)))
        .collect();
    jobs.par_iter()
        .map(|&(cfg, ratio)| {
            let g2 = ratio * g1;
            let delta = cfg.delta();
            let p = params.with_couplings(g1, g2).with_detunings(delta, delta);
            let auto = if delta == 0.0 {
                3.0 * transfer_time_resonant(g1, g2)?
            } else {
                3.0 * transfer_time_dispersive_unequal(g1, g2, delta)?
            };
            let horizon = opts.resolve(auto);
            let scan = run_cell(
                &p,
                opts.hamiltonian_kind,
                &StateSpec::Polarized,
                TargetConvention::Corrected,
                opts.dt,
                horizon,
            )?;
            Ok(RatioRow {
                configuration: cfg.label(),
                delta,
                ratio,
                g1,
                g2,
                horizon,
                f_max: scan.f_max,
                t_max: scan.t_max,
                predicted_max: max_p2(g1, g2)?,
            })
        })
        .collect()
}

/// Detuning configuration of a damping run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DampingConfig {
    Resonant,
    Dispersive { delta: f64 },
}

impl DampingConfig {
    pub fn delta(&self) -> f64 {
        match self {
            DampingConfig::Resonant => 0.0,
            DampingConfig::Dispersive { delta } => *delta,
        }
    }

    pub fn label(&self) -> String {
        match self {
            DampingConfig::Resonant => "resonant".to_string(),
            DampingConfig::Dispersive { delta } => format!("dispersive({delta})"),
        }
    }

    /// Closed-form first transfer time.
    pub fn transfer_time(&self, params: &SystemParams) -> Result<f64> {
        match self {
            DampingConfig::Resonant => transfer_time_resonant(params.g_1, params.g_2),
            DampingConfig::Dispersive { delta } => {
                transfer_time_dispersive_unequal(params.g_1, params.g_2, *delta)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampingRun {
    pub kappa: f64,
    pub configuration: String,
    pub delta: f64,
    pub transfer_time: f64,
    /// Total excitation at the sample closest to `transfer_time`.
    pub excitation_at_transfer: f64,
    pub trajectory: Trajectory,
}

/// Settings of [`damping_trajectories`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DampingOptions {
    pub dt: f64,
    /// Rotating-wave by default: with counter-rotating terms the total
    /// excitation is not conserved even without loss, which masks the decay.
    pub hamiltonian_kind: HamiltonianKind,
    /// Run length in units of each configuration's transfer time.
    pub duration_factor: f64,
    pub record_stride: usize,
    pub phase_frame: Frame,
}

impl Default for DampingOptions {
    fn default() -> Self {
        DampingOptions {
            dt: 0.01,
            hamiltonian_kind: HamiltonianKind::Rwa,
            duration_factor: 2.0,
            record_stride: 1,
            phase_frame: Frame::Lab,
        }
    }
}

/// Density-matrix runs for every `(κ, configuration)` pair, Qubit 1 excited.
pub fn damping_trajectories(
    params: &SystemParams,
    kappas: &[f64],
    configurations: &[DampingConfig],
    opts: &DampingOptions,
) -> Result<Vec<DampingRun>> {
    params.validate()?;
    if opts.hamiltonian_kind == HamiltonianKind::Fourlevel && kappas.iter().any(|&k| k > 0.0) {
        return Err(Error::UnsupportedLayout(
            "cavity damping is only defined for the single-photon cavity",
        ));
    }
    if let Some(k) = kappas.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
        return Err(Error::invalid(format!("kappa must be >= 0, got {k}")));
    }
    let jobs: Vec<(f64, DampingConfig)> = kappas
        .iter()
        .flat_map(|&k| configurations.iter().map(move |c| (k, *c)))
        .collect();
    jobs.par_iter()
        .map(|&(kappa, cfg)| {
            let delta = cfg.delta();
            let p = params.with_detunings(delta, delta).with_kappa(kappa);
            let h = build(opts.hamiltonian_kind, &p)?;
            let psi0 = init_state(&StateSpec::Polarized, &h.layout)?;
            let target = transfer_target(
                &StateSpec::Polarized,
                &h.layout,
                TargetConvention::Corrected,
            )?;
            let tt = cfg.transfer_time(&p)?;
            let config = TrotterConfig::for_duration(opts.dt, opts.duration_factor * tt)
                .with_stride(opts.record_stride);
            let eo = EvolveOptions::rotating(p.omega_c, opts.phase_frame);
            let trajectory = evolve_damped(
                &DensityMatrix::from_pure(&psi0),
                &h,
                kappa,
                &config,
                &target,
                &eo,
            )?;
            let excitation_at_transfer = trajectory
                .sample_at(tt)
                .map(|s| s.total_excitation())
                .unwrap_or(f64::NAN);
            Ok(DampingRun {
                kappa,
                configuration: cfg.label(),
                delta,
                transfer_time: tt,
                excitation_at_transfer,
                trajectory,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RwaRow {
    pub g_over_omega: f64,
    pub omega_c: f64,
    pub horizon: f64,
    pub f_rwa: f64,
    pub f_full2: f64,
    /// Empty unless the 4-level cavity was requested.
    pub f_full4: Option<f64>,
    /// Largest two- and three-photon occupations along the 4-level run.
    pub p2_max: Option<f64>,
    pub p3_max: Option<f64>,
}

/// Resonant best transfer versus `g/ω_c` for the rotating-wave, full
/// single-photon and (optionally) full three-photon Hamiltonians. Each run
/// lasts 1.5 resonant transfer times.
pub fn rwa_comparison(
    params: &SystemParams,
    g_over_omega: &[f64],
    cavity_levels: usize,
    opts: &SweepOptions,
) -> Result<Vec<RwaRow>> {
    params.validate()?;
    opts.validate()?;
    if cavity_levels != 2 && cavity_levels != 4 {
        return Err(Error::invalid(format!(
            "cavity levels must be 2 or 4, got {cavity_levels}"
        )));
    }
    if let Some(x) = g_over_omega.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::invalid(format!("g/omega_c must be > 0, got {x}")));
    }
    let g = params.g_1.max(params.g_2);
    g_over_omega
        .par_iter()
        .map(|&x| {
            let p = params.with_detunings(0.0, 0.0).with_omega_c(g / x);
            let horizon = opts.resolve(1.5 * transfer_time_resonant(p.g_1, p.g_2)?);
            let spec = StateSpec::Polarized;
            let tc = TargetConvention::Corrected;
            let f_rwa = run_cell(&p, HamiltonianKind::Rwa, &spec, tc, opts.dt, horizon)?.f_max;
            let f_full2 = run_cell(&p, HamiltonianKind::Full, &spec, tc, opts.dt, horizon)?.f_max;
            let (f_full4, p2_max, p3_max) = if cavity_levels == 4 {
                let (f, p2, p3) = fourlevel_scan(&p, opts.dt, horizon)?;
                (Some(f), Some(p2), Some(p3))
            } else {
                (None, None, None)
            };
            Ok(RwaRow {
                g_over_omega: x,
                omega_c: p.omega_c,
                horizon,
                f_rwa,
                f_full2,
                f_full4,
                p2_max,
                p3_max,
            })
        })
        .collect()
}

/// Best fidelity and peak two- and three-photon occupations of a 4-level run.
fn fourlevel_scan(p: &SystemParams, dt: f64, horizon: f64) -> Result<(f64, f64, f64)> {
    let h = build(HamiltonianKind::Fourlevel, p)?;
    let l = &h.layout;
    let stepper = TrotterStepper::new(&h, dt)?;
    let psi0 = init_state(&StateSpec::Polarized, l)?;
    let target = transfer_target(&StateSpec::Polarized, l, TargetConvention::Corrected)?;
    let t_idx = target
        .amplitudes
        .iter()
        .position(|a| a.norm_sqr() > 0.0)
        .expect("nonzero target");
    let n_of: Vec<usize> = (0..l.dim()).map(|b| l.photon_number(b)).collect();
    let mut psi = psi0.amplitudes;
    let (mut f, mut p2, mut p3) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..TrotterConfig::for_duration(dt, horizon).n_steps {
        stepper.step(&mut psi);
        f = f.max(psi[t_idx].norm_sqr());
        let mut occ = [0.0; 4];
        for (a, &n) in psi.iter().zip(&n_of) {
            occ[n] += a.norm_sqr();
        }
        p2 = p2.max(occ[2]);
        p3 = p3.max(occ[3]);
    }
    Ok((f, p2, p3))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryRow {
    pub delta: f64,
    pub horizon: f64,
    pub f_rwa: f64,
    pub f_full: f64,
    /// `f_rwa − f_full`.
    pub gap: f64,
    pub t_max_rwa: f64,
    pub t_max_full: f64,
    /// Closed-form transfer time with the counter-rotating correction.
    pub t_nonrwa: f64,
    /// Raw (possibly negative) value of that formula.
    pub t_nonrwa_signed: f64,
    /// Rotating-wave dispersive transfer time.
    pub t_dispersive: f64,
    /// `(t_max_full − t_nonrwa)/t_nonrwa`.
    pub rel_dev_full: f64,
}

/// Rotating-wave versus full dynamics at `Δ₁ = Δ₂ = Δ` for each signed Δ.
///
/// Horizon: `max(1.5·|t''|, 3·t_f)`, with `t''` the corrected transfer time
/// (plain `3·t_f` at `Δ = 0`).
pub fn asymmetry_scan(
    params: &SystemParams,
    deltas: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<AsymmetryRow>> {
    params.validate()?;
    opts.validate()?;
    let (g1, g2) = (params.g_1, params.g_2);
    let g = (g1 * g2).sqrt();
    let tf = transfer_time_resonant(g1, g2)?;
    deltas
        .par_iter()
        .map(|&delta| {
            let p = params.with_detunings(delta, delta);
            p.validate()?;
            let (t_nonrwa, t_signed, t_disp) = if delta == 0.0 {
                (tf, tf, tf)
            } else {
                let nr = transfer_time_nonrwa(g, delta, p.omega_1())?;
                (
                    nr.magnitude,
                    nr.signed,
                    transfer_time_dispersive_unequal(g1, g2, delta)?,
                )
            };
            let horizon = opts.resolve((1.5 * t_nonrwa).max(3.0 * tf));
            let spec = StateSpec::Polarized;
            let tc = TargetConvention::Corrected;
            let rwa = run_cell(&p, HamiltonianKind::Rwa, &spec, tc, opts.dt, horizon)?;
            let full = run_cell(&p, HamiltonianKind::Full, &spec, tc, opts.dt, horizon)?;
            Ok(AsymmetryRow {
                delta,
                horizon,
                f_rwa: rwa.f_max,
                f_full: full.f_max,
                gap: rwa.f_max - full.f_max,
                t_max_rwa: rwa.t_max,
                t_max_full: full.t_max,
                t_nonrwa,
                t_nonrwa_signed: t_signed,
                t_dispersive: t_disp,
                rel_dev_full: (full.t_max - t_nonrwa) / t_nonrwa,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    /// Requested step.
    pub dt: f64,
    /// Step actually used so that an integer number of steps lands on `t_f`.
    pub dt_effective: f64,
    pub n_steps: usize,
    pub f_max: f64,
    pub one_minus_f_max: f64,
    pub t_max: f64,
}

/// Energy deviation `⟨H⟩(t) − ⟨H⟩(0)` along a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergySeries {
    pub dt: f64,
    pub times: Vec<f64>,
    pub deviation: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub rows: Vec<BenchmarkRow>,
    /// Least-squares slope of `ln(1 − f_max)` against `ln dt`.
    pub slope: f64,
    pub intercept: f64,
    pub fidelity_kind: HamiltonianKind,
    pub energy_kind: HamiltonianKind,
    pub transfer_time: f64,
    pub energy: Vec<EnergySeries>,
}

/// Step sizes for the energy-deviation series.
pub const ENERGY_DTS: [f64; 3] = [0.01, 0.05, 0.08];

/// Trotter error versus step size for the resonant polarized transfer.
///
/// Fidelity runs snap each step to `t_f/round(t_f/dt)` so every run samples
/// the exact transfer time; otherwise the lattice offset from `t_f` adds
/// its own, non-monotone error. They use `fidelity_kind` (rotating-wave by
/// default, which has no counter-rotating error floor), scanning
/// `1.5·t_f`. Energy series use `energy_kind` over `[0, t_f]`.
pub fn timestep_benchmark(
    params: &SystemParams,
    dt_list: &[f64],
    fidelity_kind: HamiltonianKind,
    energy_kind: HamiltonianKind,
    energy_dts: &[f64],
) -> Result<BenchmarkResult> {
    let p = params.with_detunings(0.0, 0.0);
    p.validate()?;
    if let Some(dt) = dt_list
        .iter()
        .chain(energy_dts)
        .find(|d| !(d.is_finite() && **d > 0.0))
    {
        return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
    }
    let tf = transfer_time_resonant(p.g_1, p.g_2)?;
    let h = build(fidelity_kind, &p)?;
    let psi0 = init_state(&StateSpec::Polarized, &h.layout)?;
    let target = transfer_target(
        &StateSpec::Polarized,
        &h.layout,
        TargetConvention::Corrected,
    )?;
    let frame = Frame::Cavity { omega_c: p.omega_c };
    let rows: Vec<BenchmarkRow> = dt_list
        .par_iter()
        .map(|&dt| {
            let n = (tf / dt).round().max(1.0) as usize;
            let dt_eff = tf / n as f64;
            let stepper = TrotterStepper::new(&h, dt_eff)?;
            let f = fidelity_series(&psi0, &stepper, n + n / 2, &target, &frame)?;
            let i = first_max(&f).unwrap_or(0);
            let f_max = f.iter().copied().fold(0.0, f64::max);
            Ok(BenchmarkRow {
                dt,
                dt_effective: dt_eff,
                n_steps: n,
                f_max,
                one_minus_f_max: 1.0 - f_max,
                t_max: i as f64 * dt_eff,
            })
        })
        .collect::<Result<_>>()?;
    let (slope, intercept) = loglog_fit(&rows);

    let he = build(energy_kind, &p)?;
    let he_psi0 = init_state(&StateSpec::Polarized, &he.layout)?;
    let e0 = he.expectation(&he_psi0.amplitudes)?;
    let energy = energy_dts
        .iter()
        .map(|&dt| {
            let stepper = TrotterStepper::new(&he, dt)?;
            let mut psi = he_psi0.amplitudes.clone();
            let n = TrotterConfig::for_duration(dt, tf).n_steps;
            let mut times = vec![0.0];
            let mut deviation = vec![0.0];
            for k in 1..=n {
                stepper.step(&mut psi);
                times.push(k as f64 * dt);
                deviation.push(he.expectation(&psi)? - e0);
            }
            Ok(EnergySeries {
                dt,
                times,
                deviation,
            })
        })
        .collect::<Result<_>>()?;

    Ok(BenchmarkResult {
        rows,
        slope,
        intercept,
        fidelity_kind,
        energy_kind,
        transfer_time: tf,
        energy,
    })
}

/// Least-squares line through `(ln dt, ln(1 − f_max))`, skipping exact hits.
fn loglog_fit(rows: &[BenchmarkRow]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.one_minus_f_max > 0.0)
        .map(|r| (r.dt_effective.ln(), r.one_minus_f_max.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
