use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn is_diagonal(self) -> bool {
        matches!(self, Pauli::I | Pauli::Z)
    }

    pub fn matrix(self) -> [[C64; 2]; 2] {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

/// A real-weighted tensor product of single-qubit Pauli operators.
///
/// Qubits absent from `factors` carry the identity. An empty factor map is
/// a pure energy offset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    #[serde(rename = "coeff")]
    pub coefficient: f64,
    pub factors: BTreeMap<usize, Pauli>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, factors: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        let factors = factors
            .into_iter()
            .filter(|&(_, p)| p != Pauli::I)
            .collect();
        PauliTerm {
            coefficient,
            factors,
        }
    }

    pub fn identity(coefficient: f64) -> Self {
        PauliTerm {
            coefficient,
            factors: BTreeMap::new(),
        }
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        self.factors.get(&qubit).copied().unwrap_or(Pauli::I)
    }

    pub fn is_diagonal(&self) -> bool {
        self.factors.values().all(|p| p.is_diagonal())
    }

    pub fn max_index(&self) -> Option<usize> {
        self.factors.keys().next_back().copied()
    }

    pub fn string(&self) -> PauliString {
        PauliString::from_factors(&self.factors)
    }

    pub fn label(&self, n_qubits: usize) -> String {
        (0..n_qubits).map(|q| self.get(q).to_string()).collect()
    }
}

/// Symplectic form of a Pauli string: bit `q` of `x`/`z` marks an X/Z
/// component on qubit `q` (Y sets both).
///
/// Basis states are indexed big-endian with respect to the layout: qubit 0
/// is the most significant bit of the basis index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub fn from_factors(factors: &BTreeMap<usize, Pauli>) -> Self {
        let mut s = PauliString { x: 0, z: 0 };
        for (&q, &p) in factors {
            let bit = 1u64 << q;
            match p {
                Pauli::I => {}
                Pauli::X => s.x |= bit,
                Pauli::Y => {
                    s.x |= bit;
                    s.z |= bit;
                }
                Pauli::Z => s.z |= bit,
            }
        }
        s
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones().is_multiple_of(2)
    }

    /// Converts qubit-indexed masks to basis-index masks for an `n`-qubit
    /// register, together with the number of Y factors.
    pub fn basis_masks(&self, n_qubits: usize) -> BasisMasks {
        let mut flip = 0usize;
        let mut sign = 0usize;
        for q in 0..n_qubits {
            let bit = 1usize << (n_qubits - 1 - q);
            if self.x >> q & 1 == 1 {
                flip |= bit;
            }
            if self.z >> q & 1 == 1 {
                sign |= bit;
            }
        }
        let n_y = (self.x & self.z).count_ones();
        BasisMasks { flip, sign, n_y }
    }
}

/// Action of a Pauli string on computational basis states:
/// `P|b⟩ = i^{n_y} (-1)^{popcount(b & sign)} |b ^ flip⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisMasks {
    pub flip: usize,
    pub sign: usize,
    pub n_y: u32,
}

impl BasisMasks {
    pub fn global_phase(&self) -> C64 {
        match self.n_y % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    #[inline]
    pub fn apply(&self, basis: usize) -> (usize, C64) {
        let mut phase = self.global_phase();
        if (basis & self.sign).count_ones() % 2 == 1 {
            phase = -phase;
        }
        (basis ^ self.flip, phase)
    }

    /// Real sign `(-1)^{popcount(b & sign)}`, valid for diagonal strings.
    #[inline]
    pub fn diagonal_sign(&self, basis: usize) -> f64 {
        if (basis & self.sign).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }
}
