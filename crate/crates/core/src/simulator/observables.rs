use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{Layout, PauliHamiltonian};
use crate::simulator::density::{partial_trace, DensityMatrix};
use crate::simulator::state::StateVector;
use crate::C64;

/// Off-diagonal magnitudes below this leave the phase undefined.
pub const PHASE_EPS: f64 = 1e-12;

/// Excited population and relative phase `arg(c_e c_g*)` of one subsystem.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PopulationPhase {
    pub p_excited: f64,
    /// Zero when undefined.
    pub phase: f64,
    pub defined: bool,
}

/// Phase and magnitude of a two-body single-excitation coherence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Coherence {
    /// Zero when undefined.
    pub phase: f64,
    pub magnitude: f64,
    pub defined: bool,
}

impl Coherence {
    fn from_element(z: C64) -> Self {
        let magnitude = z.norm();
        let defined = magnitude >= PHASE_EPS;
        Coherence {
            phase: if defined { z.arg() } else { 0.0 },
            magnitude,
            defined,
        }
    }
}

/// Which pair a reduced 4×4 matrix describes. Reduced matrices keep the
/// register order, so Qubit 1 precedes the cavity and the cavity precedes
/// Qubit 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherencePair {
    /// `⟨e0|ρ|g1⟩` on (Qubit 1, cavity).
    Qubit1Cavity,
    /// `⟨0e|ρ|1g⟩` on (cavity, Qubit 2).
    Qubit2Cavity,
    /// `⟨eg|ρ|ge⟩` on (Qubit 1, Qubit 2).
    Qubit1Qubit2,
}

pub fn populations_and_phase(rho_single: &DensityMatrix) -> Result<PopulationPhase> {
    if rho_single.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho_single.dim(),
        });
    }
    let c = Coherence::from_element(rho_single.matrix[(1, 0)]);
    Ok(PopulationPhase {
        p_excited: rho_single.matrix[(1, 1)].re,
        phase: c.phase,
        defined: c.defined,
    })
}

pub fn coherence(rho_pair: &DensityMatrix, pair: CoherencePair) -> Result<Coherence> {
    if rho_pair.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho_pair.dim(),
        });
    }
    let (r, c) = match pair {
        CoherencePair::Qubit1Cavity | CoherencePair::Qubit1Qubit2 => (2, 1),
        CoherencePair::Qubit2Cavity => (1, 2),
    };
    Ok(Coherence::from_element(rho_pair.matrix[(r, c)]))
}

/// Overlap with a pure target state.
pub trait Fidelity {
    fn fidelity(&self, target: &StateVector) -> Result<f64>;
}

impl Fidelity for StateVector {
    fn fidelity(&self, target: &StateVector) -> Result<f64> {
        Ok(target.inner(self)?.norm_sqr())
    }
}

impl Fidelity for DensityMatrix {
    fn fidelity(&self, target: &StateVector) -> Result<f64> {
        self.expectation_in(&target.amplitudes)
    }
}

pub fn fidelity<S: Fidelity + ?Sized>(state: &S, target: &StateVector) -> Result<f64> {
    state.fidelity(target)
}

/// Energy of a pure or mixed state.
pub trait Energy {
    fn energy(&self, h: &PauliHamiltonian) -> Result<f64>;
}

impl Energy for StateVector {
    fn energy(&self, h: &PauliHamiltonian) -> Result<f64> {
        if self.layout != h.layout {
            return Err(Error::LayoutMismatch(format!(
                "state {} vs Hamiltonian {}",
                self.layout, h.layout
            )));
        }
        h.expectation(&self.amplitudes)
    }
}

impl Energy for DensityMatrix {
    fn energy(&self, h: &PauliHamiltonian) -> Result<f64> {
        if self.n_qubits != h.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                got: self.dim(),
            });
        }
        Ok(trace_product(&self.matrix, &h.to_matrix()?))
    }
}

pub fn total_energy<S: Energy + ?Sized>(state: &S, h: &PauliHamiltonian) -> Result<f64> {
    state.energy(h)
}

/// `Re Tr(ρ H)`.
pub(crate) fn trace_product(rho: &DMatrix<C64>, h: &DMatrix<C64>) -> f64 {
    let d = rho.nrows();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += (rho[(i, j)] * h[(j, i)]).re;
        }
    }
    acc
}

/// Photon-number distribution `(P0, P1, P2, P3)` of the 4-level cavity.
pub fn cavity_occupations(state: &StateVector) -> Result<[f64; 4]> {
    occupations_from_probabilities(&state.probabilities(), &state.layout)
}

pub(crate) fn occupations_from_probabilities(probs: &[f64], layout: &Layout) -> Result<[f64; 4]> {
    if !layout.is_four_level() {
        return Err(Error::UnsupportedLayout(
            "cavity occupations need the 4-level cavity layout",
        ));
    }
    let mut p = [0.0; 4];
    for (b, &w) in probs.iter().enumerate() {
        p[layout.photon_number(b)] += w;
    }
    Ok(p)
}

/// Every per-sample quantity recorded along a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub qubit1: PopulationPhase,
    /// For the 4-level cavity `p_excited` is the mean photon number and the
    /// phase is that of the one-photon/vacuum coherence.
    pub cavity: PopulationPhase,
    pub qubit2: PopulationPhase,
    pub coh_1c: Coherence,
    pub coh_2c: Coherence,
    pub coh_12: Coherence,
    pub total_excitation: f64,
    /// Present for the 4-level cavity only.
    pub occupations: Option<[f64; 4]>,
}

impl Observables {
    pub fn measure(rho: &DensityMatrix, layout: &Layout) -> Result<Self> {
        if rho.n_qubits != layout.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                got: rho.dim(),
            });
        }
        let (q1, q2) = (layout.qubit1(), layout.qubit2());
        let cav = layout.cavity_indices();
        let qubit1 = populations_and_phase(&partial_trace(rho, &[q1])?)?;
        let qubit2 = populations_and_phase(&partial_trace(rho, &[q2])?)?;
        let coh_12 = coherence(&partial_trace(rho, &[q1, q2])?, CoherencePair::Qubit1Qubit2)?;
        let probs = rho.probabilities();
        let total_excitation = probs
            .iter()
            .enumerate()
            .map(|(b, p)| p * layout.excitation_number(b) as f64)
            .sum();

        if !layout.is_four_level() {
            let c = cav[0];
            return Ok(Observables {
                qubit1,
                cavity: populations_and_phase(&partial_trace(rho, &[c])?)?,
                qubit2,
                coh_1c: coherence(&partial_trace(rho, &[q1, c])?, CoherencePair::Qubit1Cavity)?,
                coh_2c: coherence(&partial_trace(rho, &[c, q2])?, CoherencePair::Qubit2Cavity)?,
                coh_12,
                total_excitation,
                occupations: None,
            });
        }

        // Photon number n is the two cavity bits read as a binary number.
        let rc = partial_trace(rho, &cav)?;
        let mean_n = (0..4).map(|n| n as f64 * rc.matrix[(n, n)].re).sum();
        let c10 = Coherence::from_element(rc.matrix[(1, 0)]);
        let keep1: Vec<usize> = std::iter::once(q1).chain(cav.iter().copied()).collect();
        let keep2: Vec<usize> = cav.iter().copied().chain(std::iter::once(q2)).collect();
        // (q1, n): |e,0⟩ = 4, |g,1⟩ = 1. (n, q2): |0,e⟩ = 1, |1,g⟩ = 2.
        let r1 = partial_trace(rho, &keep1)?;
        let r2 = partial_trace(rho, &keep2)?;
        Ok(Observables {
            qubit1,
            cavity: PopulationPhase {
                p_excited: mean_n,
                phase: c10.phase,
                defined: c10.defined,
            },
            qubit2,
            coh_1c: Coherence::from_element(r1.matrix[(4, 1)]),
            coh_2c: Coherence::from_element(r2.matrix[(1, 2)]),
            coh_12,
            total_excitation,
            occupations: Some(occupations_from_probabilities(&probs, layout)?),
        })
    }
}
