use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::Layout;
use crate::C64;

const NORM_TOL: f64 = 1e-10;

/// Pure state of the register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<C64>,
    pub layout: Layout,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>, layout: Layout) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                got: amplitudes.len(),
            });
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::NonFinite("state amplitudes"));
        }
        let s = StateVector { amplitudes, layout };
        let n = s.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(s)
    }

    pub fn basis(layout: Layout, index: usize) -> Result<Self> {
        let dim = layout.dim();
        if index >= dim {
            return Err(Error::IndexOutOfRange {
                index,
                n_qubits: layout.n_qubits(),
            });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(StateVector { amplitudes, layout })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Probability of every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Amplitude of `|e₁? n e₂?⟩`, zero when outside the truncation.
    pub fn amplitude(&self, qubit1_excited: bool, photons: usize, qubit2_excited: bool) -> C64 {
        self.layout
            .basis_index(qubit1_excited, photons, qubit2_excited)
            .map(|b| self.amplitudes[b])
            .unwrap_or_default()
    }
}

/// Initial state of Qubit 1; the cavity and Qubit 2 start in their ground states.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    /// Qubit 1 excited.
    #[default]
    Polarized,
    /// `alpha|g⟩ + beta|e⟩` on Qubit 1.
    Superposition { alpha: C64, beta: C64 },
    /// Explicit amplitudes over the whole register.
    Custom { amplitudes: Vec<C64> },
}

impl StateSpec {
    pub fn superposition(alpha: C64, beta: C64) -> Self {
        StateSpec::Superposition { alpha, beta }
    }

    /// Ground and excited weights of Qubit 1, for the non-custom variants.
    pub fn weights(&self) -> Option<(C64, C64)> {
        match self {
            StateSpec::Polarized => Some((C64::new(0.0, 0.0), C64::new(1.0, 0.0))),
            StateSpec::Superposition { alpha, beta } => Some((*alpha, *beta)),
            StateSpec::Custom { .. } => None,
        }
    }
}

pub fn init_state(spec: &StateSpec, layout: &Layout) -> Result<StateVector> {
    match spec {
        StateSpec::Custom { amplitudes } => StateVector::new(amplitudes.clone(), layout.clone()),
        _ => {
            let (alpha, beta) = spec.weights().expect("non-custom spec");
            let n = alpha.norm_sqr() + beta.norm_sqr();
            if !n.is_finite() {
                return Err(Error::NonFinite("superposition weights"));
            }
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized(n));
            }
            let mut amplitudes = vec![C64::new(0.0, 0.0); layout.dim()];
            amplitudes[layout.basis_index(false, 0, false).expect("ground")] = alpha;
            amplitudes[layout.basis_index(true, 0, false).expect("excited")] = beta;
            StateVector::new(amplitudes, layout.clone())
        }
    }
}

/// Which transferred state counts as success.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetConvention {
    /// `alpha|g0g⟩ − beta|g0e⟩`: the transfer flips the sign of the excited
    /// weight, undone by a Z on Qubit 2.
    #[default]
    Corrected,
    /// `alpha|g0g⟩ + beta|g0e⟩`.
    Raw,
}

impl std::str::FromStr for TargetConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "corrected" => Ok(TargetConvention::Corrected),
            "raw" => Ok(TargetConvention::Raw),
            other => Err(Error::invalid(format!(
                "unknown target convention '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for TargetConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TargetConvention::Corrected => "corrected",
            TargetConvention::Raw => "raw",
        })
    }
}

/// Qubit 1's initial state moved onto Qubit 2.
///
/// A custom initial state has no canonical transfer target, so it is
/// rejected.
pub fn transfer_target(
    spec: &StateSpec,
    layout: &Layout,
    convention: TargetConvention,
) -> Result<StateVector> {
    let (alpha, beta) = spec
        .weights()
        .ok_or_else(|| Error::invalid("custom initial states need an explicit target"))?;
    let sign = match convention {
        TargetConvention::Corrected => -1.0,
        TargetConvention::Raw => 1.0,
    };
    let mut amplitudes = vec![C64::new(0.0, 0.0); layout.dim()];
    amplitudes[layout.basis_index(false, 0, false).expect("ground")] = alpha;
    amplitudes[layout.basis_index(false, 0, true).expect("target")] = beta * sign;
    StateVector::new(amplitudes, layout.clone())
}

/// Reference frame in which phases and overlaps are read out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "frame", rename_all = "lowercase")]
pub enum Frame {
    #[default]
    Lab,
    /// Rotating at `omega_c` per excitation quantum.
    Cavity { omega_c: f64 },
}

impl Frame {
    /// Phase `e^{iω_c n t}` applied to a basis state with `n` excitations.
    pub fn phase(&self, excitations: usize, t: f64) -> C64 {
        match self {
            Frame::Lab => C64::new(1.0, 0.0),
            Frame::Cavity { omega_c } => C64::from_polar(1.0, omega_c * excitations as f64 * t),
        }
    }

    pub fn is_lab(&self) -> bool {
        matches!(self, Frame::Lab)
    }

    /// Lab-frame amplitudes transformed into this frame at time `t`.
    pub fn transform(&self, amplitudes: &[C64], layout: &Layout, t: f64) -> Vec<C64> {
        match self {
            Frame::Lab => amplitudes.to_vec(),
            _ => amplitudes
                .iter()
                .enumerate()
                .map(|(b, a)| a * self.phase(layout.excitation_number(b), t))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polarized_start() {
        let s = init_state(&StateSpec::Polarized, &Layout::two_level()).unwrap();
        assert_eq!(s.amplitudes[0b100], C64::new(1.0, 0.0));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equal_superposition_start() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let spec = StateSpec::superposition(C64::new(r, 0.0), C64::new(r, 0.0));
        let s = init_state(&spec, &Layout::four_level()).unwrap();
        assert_eq!(s.amplitudes[0], C64::new(r, 0.0));
        assert_eq!(s.amplitudes[0b1000], C64::new(r, 0.0));
    }

    #[test]
    fn rejects_unnormalized() {
        let spec = StateSpec::superposition(C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        assert!(matches!(
            init_state(&spec, &Layout::two_level()),
            Err(Error::NotNormalized(_))
        ));
        let custom = StateSpec::Custom {
            amplitudes: vec![C64::new(0.5, 0.0); 8],
        };
        assert!(init_state(&custom, &Layout::two_level()).is_err());
    }

    #[test]
    fn targets_differ_by_sign() {
        let spec = StateSpec::superposition(C64::new(0.6, 0.0), C64::new(0.0, 0.8));
        let l = Layout::two_level();
        let c = transfer_target(&spec, &l, TargetConvention::Corrected).unwrap();
        let r = transfer_target(&spec, &l, TargetConvention::Raw).unwrap();
        assert_eq!(c.amplitudes[1], -r.amplitudes[1]);
        assert_eq!(c.amplitudes[0], r.amplitudes[0]);
    }
}
