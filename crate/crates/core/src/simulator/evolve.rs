use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{
    split_trotter, BasisMasks, Layout, PauliHamiltonian, QubitRole, TrotterSplit,
};
use crate::simulator::density::{apply_kraus, DensityMatrix, KrausChannel};
use crate::simulator::observables::{trace_product, Observables};
use crate::simulator::state::{Frame, StateVector};
use crate::simulator::trajectory::{first_max, Sample, Trajectory};
use crate::C64;

/// Step size and run length of a first-order Trotter evolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrotterConfig {
    /// Step size in `1/g`.
    pub dt: f64,
    pub n_steps: usize,
    /// Steps between recorded samples.
    pub record_stride: usize,
}

impl Default for TrotterConfig {
    fn default() -> Self {
        TrotterConfig {
            dt: 0.01,
            n_steps: 1,
            record_stride: 1,
        }
    }
}

impl TrotterConfig {
    pub fn new(dt: f64, n_steps: usize) -> Self {
        TrotterConfig {
            dt,
            n_steps,
            record_stride: 1,
        }
    }

    /// Enough steps of size `dt` to reach `duration`.
    pub fn for_duration(dt: f64, duration: f64) -> Self {
        let n = (duration / dt - 1e-9).ceil().max(1.0);
        Self::new(dt, if n.is_finite() { n as usize } else { 1 })
    }

    pub fn with_stride(mut self, record_stride: usize) -> Self {
        self.record_stride = record_stride;
        self
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps must be >= 1"));
        }
        if self.record_stride == 0 {
            return Err(Error::invalid("record_stride must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct Factor {
    masks: BasisMasks,
    cos: f64,
    sin: f64,
}

/// Precomputed propagator for one step `e^{-iH_0 dt}` followed by every
/// coupling block's exponential, each built from exact Pauli rotations
/// `e^{-iθP} = cos θ − i sin θ P`.
#[derive(Clone, Debug)]
pub struct TrotterStepper {
    layout: Layout,
    dt: f64,
    diag_phase: Vec<C64>,
    factors: Vec<Factor>,
}

impl TrotterStepper {
    pub fn new(h: &PauliHamiltonian, dt: f64) -> Result<Self> {
        Self::from_split(&split_trotter(h)?, dt)
    }

    pub fn from_split(split: &TrotterSplit, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::invalid(format!(
                "dt must be finite and >= 0, got {dt}"
            )));
        }
        let layout = split.h0.layout.clone();
        if let Some(b) = split.blocks.iter().find(|b| b.layout != layout) {
            return Err(Error::LayoutMismatch(format!("{} vs {}", b.layout, layout)));
        }
        let n = layout.n_qubits();
        let mut energy = vec![0.0; layout.dim()];
        for t in &split.h0.terms {
            if !t.is_diagonal() {
                return Err(Error::UnrecognizedTerm(t.label(n)));
            }
            let m = t.string().basis_masks(n);
            for (b, e) in energy.iter_mut().enumerate() {
                *e += t.coefficient * m.diagonal_sign(b);
            }
        }
        let diag_phase = energy
            .iter()
            .map(|e| C64::from_polar(1.0, -e * dt))
            .collect();
        let factors = split
            .blocks
            .iter()
            .flat_map(|b| b.terms.iter())
            .map(|t| {
                let (sin, cos) = (t.coefficient * dt).sin_cos();
                Factor {
                    masks: t.string().basis_masks(n),
                    cos,
                    sin,
                }
            })
            .collect();
        Ok(TrotterStepper {
            layout,
            dt,
            diag_phase,
            factors,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Advances `psi` by one step in place.
    pub fn step(&self, psi: &mut [C64]) {
        for (a, p) in psi.iter_mut().zip(&self.diag_phase) {
            *a *= p;
        }
        let mi = C64::new(0.0, -1.0);
        for f in &self.factors {
            let m = &f.masks;
            if m.flip == 0 {
                for (b, a) in psi.iter_mut().enumerate() {
                    let (_, ph) = m.apply(b);
                    *a *= f.cos + mi * f.sin * ph;
                }
                continue;
            }
            for b in 0..psi.len() {
                let b2 = b ^ m.flip;
                if b2 < b {
                    continue;
                }
                // P|b⟩ = ph_b |b2⟩ and P|b2⟩ = ph_b2 |b⟩
                let (_, ph_b) = m.apply(b);
                let (_, ph_b2) = m.apply(b2);
                let (x, y) = (psi[b], psi[b2]);
                psi[b] = x * f.cos + mi * f.sin * ph_b2 * y;
                psi[b2] = y * f.cos + mi * f.sin * ph_b * x;
            }
        }
    }

    /// Dense matrix of one step.
    pub fn unitary(&self) -> DMatrix<C64> {
        let d = self.layout.dim();
        let mut u = DMatrix::<C64>::zeros(d, d);
        let mut col = vec![C64::new(0.0, 0.0); d];
        for j in 0..d {
            col.iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
            col[j] = C64::new(1.0, 0.0);
            self.step(&mut col);
            for i in 0..d {
                u[(i, j)] = col[i];
            }
        }
        u
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        if state.layout != self.layout {
            return Err(Error::LayoutMismatch(format!(
                "state {} vs Hamiltonian {}",
                state.layout, self.layout
            )));
        }
        Ok(())
    }
}

/// One Trotter step of `state` under the split Hamiltonian.
pub fn trotter_step(
    state: &StateVector,
    h0: &PauliHamiltonian,
    blocks: &[PauliHamiltonian],
    dt: f64,
) -> Result<StateVector> {
    let split = TrotterSplit {
        h0: h0.clone(),
        blocks: blocks.to_vec(),
    };
    let stepper = TrotterStepper::from_split(&split, dt)?;
    stepper.check(state)?;
    let mut out = state.clone();
    stepper.step(&mut out.amplitudes);
    Ok(out)
}

/// Frames used when reading out a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Frame of the recorded phases and coherences.
    pub phase_frame: Frame,
    /// Frame in which the state is compared with the target.
    pub fidelity_frame: Frame,
}

impl EvolveOptions {
    /// Phases in `phase_frame`, fidelity in the cavity frame.
    pub fn rotating(omega_c: f64, phase_frame: Frame) -> Self {
        EvolveOptions {
            phase_frame,
            fidelity_frame: Frame::Cavity { omega_c },
        }
    }
}

fn frame_rho(rho: &DensityMatrix, layout: &Layout, frame: &Frame, t: f64) -> DensityMatrix {
    if frame.is_lab() {
        return rho.clone();
    }
    let ph: Vec<C64> = (0..rho.dim())
        .map(|b| frame.phase(layout.excitation_number(b), t))
        .collect();
    let m = DMatrix::from_fn(rho.dim(), rho.dim(), |i, j| {
        rho.matrix[(i, j)] * ph[i] * ph[j].conj()
    });
    DensityMatrix {
        matrix: m,
        n_qubits: rho.n_qubits,
    }
}

/// Target amplitudes conjugated into the lab frame at time `t`, so that
/// `|⟨target_lab|ψ⟩|²` equals the overlap in `frame`.
fn lab_target(target: &[C64], layout: &Layout, frame: &Frame, t: f64) -> Vec<C64> {
    target
        .iter()
        .enumerate()
        .map(|(b, a)| a * frame.phase(layout.excitation_number(b), t).conj())
        .collect()
}

struct Recorder<'a> {
    layout: &'a Layout,
    h: DMatrix<C64>,
    target: &'a StateVector,
    opts: EvolveOptions,
    out: Trajectory,
}

impl Recorder<'_> {
    fn record(&mut self, rho: &DensityMatrix, t: f64) -> Result<()> {
        let obs = Observables::measure(
            &frame_rho(rho, self.layout, &self.opts.phase_frame, t),
            self.layout,
        )?;
        let tgt = lab_target(
            &self.target.amplitudes,
            self.layout,
            &self.opts.fidelity_frame,
            t,
        );
        let fidelity = rho.expectation_in(&tgt)?;
        self.out.samples.push(Sample {
            t,
            obs,
            energy: trace_product(&rho.matrix, &self.h),
            fidelity,
        });
        Ok(())
    }
}

fn check_target(state_layout: &Layout, target: &StateVector) -> Result<()> {
    if &target.layout != state_layout {
        return Err(Error::LayoutMismatch(format!(
            "target {} vs state {}",
            target.layout, state_layout
        )));
    }
    Ok(())
}

/// Unitary run in the lab frame.
pub fn evolve(
    state0: &StateVector,
    h: &PauliHamiltonian,
    config: &TrotterConfig,
    target: &StateVector,
) -> Result<Trajectory> {
    evolve_with(state0, h, config, target, &EvolveOptions::default())
}

pub fn evolve_with(
    state0: &StateVector,
    h: &PauliHamiltonian,
    config: &TrotterConfig,
    target: &StateVector,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    config.validate()?;
    let stepper = TrotterStepper::new(h, config.dt)?;
    stepper.check(state0)?;
    check_target(&state0.layout, target)?;
    let mut rec = Recorder {
        layout: &h.layout,
        h: h.to_matrix()?,
        target,
        opts: *opts,
        out: Trajectory::default(),
    };
    let mut psi = state0.amplitudes.clone();
    let scratch = |psi: &[C64]| {
        DensityMatrix::from_pure(&StateVector {
            amplitudes: psi.to_vec(),
            layout: h.layout.clone(),
        })
    };
    rec.record(&scratch(&psi), 0.0)?;
    for k in 1..=config.n_steps {
        stepper.step(&mut psi);
        if k % config.record_stride == 0 || k == config.n_steps {
            rec.record(&scratch(&psi), k as f64 * config.dt)?;
        }
    }
    Ok(rec.out)
}

/// State after `n_steps` steps.
pub fn propagate(
    state0: &StateVector,
    stepper: &TrotterStepper,
    n_steps: usize,
) -> Result<StateVector> {
    stepper.check(state0)?;
    let mut out = state0.clone();
    for _ in 0..n_steps {
        stepper.step(&mut out.amplitudes);
    }
    Ok(out)
}

/// Mixed-state run: each step conjugates by the Trotter propagator and
/// then applies cavity damping with `γ = √(1 − e^{−κ dt})`.
pub fn evolve_damped(
    rho0: &DensityMatrix,
    h: &PauliHamiltonian,
    kappa: f64,
    config: &TrotterConfig,
    target: &StateVector,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    config.validate()?;
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(Error::invalid(format!("kappa must be >= 0, got {kappa}")));
    }
    let layout = &h.layout;
    if rho0.n_qubits != layout.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: layout.dim(),
            got: rho0.dim(),
        });
    }
    check_target(layout, target)?;
    let channel = if kappa > 0.0 {
        let cavity = layout
            .index_of(QubitRole::Cavity)
            .ok_or(Error::UnsupportedLayout(
                "cavity damping is only defined for the single-photon cavity",
            ))?;
        Some(KrausChannel::from_rate(kappa, config.dt, cavity)?)
    } else {
        None
    };
    let u = TrotterStepper::new(h, config.dt)?.unitary();
    let mut rec = Recorder {
        layout,
        h: h.to_matrix()?,
        target,
        opts: *opts,
        out: Trajectory::default(),
    };
    let mut rho = rho0.clone();
    rec.record(&rho, 0.0)?;
    for k in 1..=config.n_steps {
        rho = rho.conjugate_by(&u);
        if let Some(ch) = &channel {
            rho = apply_kraus(&rho, ch, layout)?;
        }
        if k % config.record_stride == 0 || k == config.n_steps {
            rec.record(&rho, k as f64 * config.dt)?;
        }
    }
    Ok(rec.out)
}

/// Best overlap with a target along a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityScan {
    pub f_max: f64,
    /// First sample time within `1e-9` of `f_max`.
    pub t_max: f64,
    pub step_of_max: usize,
    pub f_final: f64,
    pub n_steps: usize,
}

/// Fidelity at every step (including `t = 0`) without recording other observables.
pub fn fidelity_series(
    state0: &StateVector,
    stepper: &TrotterStepper,
    n_steps: usize,
    target: &StateVector,
    frame: &Frame,
) -> Result<Vec<f64>> {
    stepper.check(state0)?;
    check_target(&state0.layout, target)?;
    let layout = &state0.layout;
    let support: Vec<(usize, C64, usize)> = target
        .amplitudes
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(b, a)| (b, a.conj(), layout.excitation_number(b)))
        .collect();
    let overlap = |psi: &[C64], t: f64| -> f64 {
        support
            .iter()
            .map(|&(b, tc, n)| tc * frame.phase(n, t) * psi[b])
            .sum::<C64>()
            .norm_sqr()
    };
    let mut psi = state0.amplitudes.clone();
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(overlap(&psi, 0.0));
    for k in 1..=n_steps {
        stepper.step(&mut psi);
        out.push(overlap(&psi, k as f64 * stepper.dt));
    }
    Ok(out)
}

pub fn scan_fidelity(
    state0: &StateVector,
    stepper: &TrotterStepper,
    n_steps: usize,
    target: &StateVector,
    frame: &Frame,
) -> Result<FidelityScan> {
    let f = fidelity_series(state0, stepper, n_steps, target, frame)?;
    let step_of_max = first_max(&f).unwrap_or(0);
    Ok(FidelityScan {
        f_max: f.iter().copied().fold(0.0, f64::max),
        t_max: step_of_max as f64 * stepper.dt,
        step_of_max,
        f_final: *f.last().unwrap_or(&0.0),
        n_steps,
    })
}
