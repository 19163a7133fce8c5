//! Qubitized Hamiltonians as real-weighted Pauli-string sums.
//!
//! Register convention: `|0⟩` is the emitter ground state (or cavity vacuum)
//! and `|1⟩` the excited state (or one photon), so an emitter's `σ^z` maps
//! to `-Z`. Index 0 is Qubit 1, the cavity follows, and the last index is
//! Qubit 2. Basis states are numbered big-endian, i.e. qubit 0 is the most
//! significant bit of the basis index.

mod params;
mod pauli;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

pub use params::SystemParams;
pub use pauli::{BasisMasks, Pauli, PauliString, PauliTerm};

/// Largest register for which a dense matrix may be built.
pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitRole {
    Qubit1,
    Cavity,
    /// Most significant bit of a binary-encoded 4-level cavity.
    CavityBit0,
    /// Least significant bit of a binary-encoded 4-level cavity.
    CavityBit1,
    Qubit2,
}

impl QubitRole {
    pub fn is_cavity(self) -> bool {
        matches!(
            self,
            QubitRole::Cavity | QubitRole::CavityBit0 | QubitRole::CavityBit1
        )
    }

    pub fn is_emitter(self) -> bool {
        matches!(self, QubitRole::Qubit1 | QubitRole::Qubit2)
    }
}

/// Role of every register index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Layout {
    roles: Vec<QubitRole>,
}

impl Layout {
    /// Qubit 1, a single-photon cavity, Qubit 2.
    pub fn two_level() -> Self {
        Layout {
            roles: vec![QubitRole::Qubit1, QubitRole::Cavity, QubitRole::Qubit2],
        }
    }

    /// Qubit 1, a two-bit cavity holding up to three photons, Qubit 2.
    pub fn four_level() -> Self {
        Layout {
            roles: vec![
                QubitRole::Qubit1,
                QubitRole::CavityBit0,
                QubitRole::CavityBit1,
                QubitRole::Qubit2,
            ],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.roles.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.roles.len()
    }

    pub fn roles(&self) -> &[QubitRole] {
        &self.roles
    }

    pub fn role(&self, index: usize) -> Option<QubitRole> {
        self.roles.get(index).copied()
    }

    pub fn index_of(&self, role: QubitRole) -> Option<usize> {
        self.roles.iter().position(|&r| r == role)
    }

    pub fn is_four_level(&self) -> bool {
        self.index_of(QubitRole::CavityBit0).is_some()
    }

    pub fn qubit1(&self) -> usize {
        self.index_of(QubitRole::Qubit1).unwrap_or(0)
    }

    pub fn qubit2(&self) -> usize {
        self.index_of(QubitRole::Qubit2)
            .unwrap_or(self.roles.len() - 1)
    }

    pub fn cavity_indices(&self) -> Vec<usize> {
        (0..self.roles.len())
            .filter(|&i| self.roles[i].is_cavity())
            .collect()
    }

    /// Bit mask selecting `index` within a basis-state number.
    pub fn bit(&self, index: usize) -> usize {
        1 << (self.roles.len() - 1 - index)
    }

    /// Photon number stored in basis state `basis`.
    pub fn photon_number(&self, basis: usize) -> usize {
        if self.is_four_level() {
            let b0 = basis & self.bit(1) != 0;
            let b1 = basis & self.bit(2) != 0;
            2 * b0 as usize + b1 as usize
        } else {
            match self.index_of(QubitRole::Cavity) {
                Some(c) => (basis & self.bit(c) != 0) as usize,
                None => 0,
            }
        }
    }

    /// Basis index of `|e₁? n_c e₂?⟩`, or `None` when `photons` exceeds the
    /// cavity truncation.
    pub fn basis_index(
        &self,
        qubit1_excited: bool,
        photons: usize,
        qubit2_excited: bool,
    ) -> Option<usize> {
        let mut b = 0;
        if qubit1_excited {
            b |= self.bit(self.qubit1());
        }
        if qubit2_excited {
            b |= self.bit(self.qubit2());
        }
        if self.is_four_level() {
            if photons > 3 {
                return None;
            }
            if photons & 2 != 0 {
                b |= self.bit(1);
            }
            if photons & 1 != 0 {
                b |= self.bit(2);
            }
        } else if photons > 0 {
            let c = self.index_of(QubitRole::Cavity)?;
            if photons > 1 {
                return None;
            }
            b |= self.bit(c);
        }
        Some(b)
    }

    /// Total excitation number (emitters plus photons) of basis state `basis`.
    pub fn excitation_number(&self, basis: usize) -> usize {
        let emitters = [self.qubit1(), self.qubit2()]
            .iter()
            .filter(|&&q| basis & self.bit(q) != 0)
            .count();
        emitters + self.photon_number(basis)
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self
            .roles
            .iter()
            .map(|r| {
                serde_json::to_string(r)
                    .unwrap_or_default()
                    .replace('"', "")
            })
            .collect();
        write!(f, "[{}]", names.join(", "))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HamiltonianKind {
    #[default]
    Full,
    Rwa,
    Fourlevel,
}

impl HamiltonianKind {
    pub fn layout(self) -> Layout {
        match self {
            HamiltonianKind::Fourlevel => Layout::four_level(),
            _ => Layout::two_level(),
        }
    }
}

impl fmt::Display for HamiltonianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HamiltonianKind::Full => "full",
            HamiltonianKind::Rwa => "rwa",
            HamiltonianKind::Fourlevel => "fourlevel",
        })
    }
}

impl FromStr for HamiltonianKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(HamiltonianKind::Full),
            "rwa" => Ok(HamiltonianKind::Rwa),
            "fourlevel" | "four-level" | "4level" => Ok(HamiltonianKind::Fourlevel),
            other => Err(Error::invalid(format!(
                "unknown hamiltonian kind '{other}'"
            ))),
        }
    }
}

/// A Hermitian operator `Σ c_k P_k` on a register with a fixed layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliHamiltonian {
    pub n_qubits: usize,
    pub layout: Layout,
    pub terms: Vec<PauliTerm>,
}

impl PauliHamiltonian {
    pub fn new(layout: Layout, terms: Vec<PauliTerm>) -> Result<Self> {
        let n_qubits = layout.n_qubits();
        for t in &terms {
            if !t.coefficient.is_finite() {
                return Err(Error::NonFinite("Pauli term coefficient"));
            }
            if let Some(index) = t.max_index().filter(|&i| i >= n_qubits) {
                return Err(Error::IndexOutOfRange { index, n_qubits });
            }
        }
        Ok(PauliHamiltonian {
            n_qubits,
            layout,
            terms,
        })
    }

    pub fn empty(layout: Layout) -> Self {
        PauliHamiltonian {
            n_qubits: layout.n_qubits(),
            layout,
            terms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(PauliTerm::is_diagonal)
    }

    /// Dense matrix in the computational basis.
    pub fn to_matrix(&self) -> Result<DMatrix<C64>> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::DimensionGuard(self.n_qubits));
        }
        let dim = self.dim();
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for t in &self.terms {
            let masks = t.string().basis_masks(self.n_qubits);
            for col in 0..dim {
                let (row, phase) = masks.apply(col);
                m[(row, col)] += phase * t.coefficient;
            }
        }
        Ok(m)
    }

    /// `H|ψ⟩` without forming the matrix.
    pub fn apply(&self, psi: &[C64]) -> Result<Vec<C64>> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: psi.len(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for t in &self.terms {
            let masks = t.string().basis_masks(self.n_qubits);
            for (b, &a) in psi.iter().enumerate() {
                let (b2, phase) = masks.apply(b);
                out[b2] += phase * a * t.coefficient;
            }
        }
        Ok(out)
    }

    /// `⟨ψ|H|ψ⟩` (real for Hermitian `H`).
    pub fn expectation(&self, psi: &[C64]) -> Result<f64> {
        let h_psi = self.apply(psi)?;
        Ok(psi.iter().zip(&h_psi).map(|(a, b)| (a.conj() * b).re).sum())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("Hamiltonian serialization is infallible")
    }
}

fn zz(coefficient: f64, q: usize) -> PauliTerm {
    PauliTerm::new(coefficient, [(q, Pauli::Z)])
}

fn pair(coefficient: f64, a: (usize, Pauli), b: (usize, Pauli)) -> PauliTerm {
    PauliTerm::new(coefficient, [a, b])
}

fn emitter_diagonal(p: &SystemParams, layout: &Layout) -> Vec<PauliTerm> {
    vec![
        zz(-p.omega_1() / 2.0, layout.qubit1()),
        zz(-p.omega_2() / 2.0, layout.qubit2()),
    ]
}

/// Single-photon Hamiltonian with counter-rotating terms.
///
/// `-(ω₁/2)Z₁ - (ω₂/2)Z₂ + (ω_c/2)(I - Z_c) + g₁X_cX₁ + g₂X_cX₂`. Coupling
/// terms with a zero coefficient are omitted.
pub fn build_full_qubitized(params: &SystemParams) -> Result<PauliHamiltonian> {
    params.validate()?;
    let layout = Layout::two_level();
    let (q1, c, q2) = (0, 1, 2);
    let mut terms = emitter_diagonal(params, &layout);
    terms.push(PauliTerm::identity(params.omega_c / 2.0));
    terms.push(zz(-params.omega_c / 2.0, c));
    for (g, q) in [(params.g_1, q1), (params.g_2, q2)] {
        if g != 0.0 {
            terms.push(pair(g, (c, Pauli::X), (q, Pauli::X)));
        }
    }
    PauliHamiltonian::new(layout, terms)
}

/// Rotating-wave Hamiltonian: couplings become `(g_i/2)(X_cX_i + Y_cY_i)`.
pub fn build_rwa_qubitized(params: &SystemParams) -> Result<PauliHamiltonian> {
    params.validate()?;
    let layout = Layout::two_level();
    let (q1, c, q2) = (0, 1, 2);
    let mut terms = emitter_diagonal(params, &layout);
    terms.push(PauliTerm::identity(params.omega_c / 2.0));
    terms.push(zz(-params.omega_c / 2.0, c));
    for (g, q) in [(params.g_1, q1), (params.g_2, q2)] {
        if g != 0.0 {
            terms.push(pair(g / 2.0, (c, Pauli::X), (q, Pauli::X)));
            terms.push(pair(g / 2.0, (c, Pauli::Y), (q, Pauli::Y)));
        }
    }
    PauliHamiltonian::new(layout, terms)
}

/// Full Hamiltonian in the frame rotating at the cavity frequency, at time `t`.
///
/// With `G = ω_c(N_1 + N_c + N_2)` the frame generator, this is
/// `e^{iGt} H e^{-iGt} - G`. The counter-rotating part oscillates at `2ω_c`:
/// `(g_i/2)cos(2ω_c t)(X_cX_i - Y_cY_i) + (g_i/2)sin(2ω_c t)(X_cY_i + Y_cX_i)`.
pub fn build_cavity_frame(params: &SystemParams, t: f64) -> Result<PauliHamiltonian> {
    params.validate()?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    let layout = Layout::two_level();
    let (q1, c, q2) = (0, 1, 2);
    let (s, co) = (2.0 * params.omega_c * t).sin_cos();
    let mut terms = vec![zz(-params.delta_1 / 2.0, q1), zz(-params.delta_2 / 2.0, q2)];
    for (g, q) in [(params.g_1, q1), (params.g_2, q2)] {
        if g == 0.0 {
            continue;
        }
        let h = g / 2.0;
        terms.push(pair(h * (1.0 + co), (c, Pauli::X), (q, Pauli::X)));
        terms.push(pair(h * (1.0 - co), (c, Pauli::Y), (q, Pauli::Y)));
        terms.push(pair(h * s, (c, Pauli::X), (q, Pauli::Y)));
        terms.push(pair(h * s, (c, Pauli::Y), (q, Pauli::X)));
    }
    PauliHamiltonian::new(layout, terms)
}

/// Full Hamiltonian with the cavity truncated at three photons.
///
/// The photon number is binary encoded on two qubits, `n = 2b₀ + b₁`, so
/// `ω_c a†a = ω_c(3/2 - Z_{c0} - Z_{c1}/2)`. The field operator `a + a†`
/// becomes `(1+√3)/2 X_{c1} + (1-√3)/2 Z_{c0}X_{c1} + (X_{c0}X_{c1} + Y_{c0}Y_{c1})/√2`.
pub fn build_fourlevel_qubitized(params: &SystemParams) -> Result<PauliHamiltonian> {
    params.validate()?;
    let layout = Layout::four_level();
    let (q1, c0, c1, q2) = (0, 1, 2, 3);
    let mut terms = emitter_diagonal(params, &layout);
    terms.push(PauliTerm::identity(1.5 * params.omega_c));
    terms.push(zz(-params.omega_c, c0));
    terms.push(zz(-params.omega_c / 2.0, c1));

    let s3 = 3f64.sqrt();
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    for (g, q) in [(params.g_1, q1), (params.g_2, q2)] {
        if g == 0.0 {
            continue;
        }
        use Pauli::*;
        terms.push(PauliTerm::new(g * (1.0 + s3) / 2.0, [(q, X), (c1, X)]));
        terms.push(PauliTerm::new(
            g * (1.0 - s3) / 2.0,
            [(q, X), (c0, Z), (c1, X)],
        ));
        terms.push(PauliTerm::new(g * r2, [(q, X), (c0, X), (c1, X)]));
        terms.push(PauliTerm::new(g * r2, [(q, X), (c0, Y), (c1, Y)]));
    }
    PauliHamiltonian::new(layout, terms)
}

pub fn build(kind: HamiltonianKind, params: &SystemParams) -> Result<PauliHamiltonian> {
    match kind {
        HamiltonianKind::Full => build_full_qubitized(params),
        HamiltonianKind::Rwa => build_rwa_qubitized(params),
        HamiltonianKind::Fourlevel => build_fourlevel_qubitized(params),
    }
}

/// Diagonal part plus ordered groups of mutually commuting coupling terms.
#[derive(Clone, Debug, PartialEq)]
pub struct TrotterSplit {
    pub h0: PauliHamiltonian,
    pub blocks: Vec<PauliHamiltonian>,
}

fn emitter_of(term: &PauliTerm, layout: &Layout) -> Result<usize> {
    let mut emitter = None;
    for (&q, &p) in &term.factors {
        match layout.role(q) {
            Some(r) if r.is_emitter() => {
                if emitter.is_some() || !p.flips() {
                    return Err(Error::UnrecognizedTerm(term.label(layout.n_qubits())));
                }
                emitter = Some(q);
            }
            Some(r) if r.is_cavity() => {}
            _ => return Err(Error::UnrecognizedTerm(term.label(layout.n_qubits()))),
        }
    }
    emitter.ok_or_else(|| Error::UnrecognizedTerm(term.label(layout.n_qubits())))
}

/// Splits `h` into its diagonal part and exactly exponentiable coupling blocks.
///
/// Every off-diagonal term must flip exactly one emitter and otherwise act on
/// cavity qubits only. Terms are grouped per emitter (Qubit 1 first) into
/// greedily built commuting blocks. If all coupling terms commute with one
/// another they form a single block. Zero-weight terms are dropped.
pub fn split_trotter(h: &PauliHamiltonian) -> Result<TrotterSplit> {
    let layout = &h.layout;
    let mut diag = Vec::new();
    let mut per_emitter: Vec<(usize, Vec<Vec<PauliTerm>>)> = Vec::new();
    for t in &h.terms {
        if t.coefficient == 0.0 {
            continue;
        }
        if t.is_diagonal() {
            diag.push(t.clone());
            continue;
        }
        let e = emitter_of(t, layout)?;
        let slot = match per_emitter.iter().position(|(q, _)| *q == e) {
            Some(i) => i,
            None => {
                per_emitter.push((e, Vec::new()));
                per_emitter.len() - 1
            }
        };
        let groups = &mut per_emitter[slot].1;
        let s = t.string();
        match groups
            .iter_mut()
            .find(|g| g.iter().all(|u| u.string().commutes_with(&s)))
        {
            Some(g) => g.push(t.clone()),
            None => groups.push(vec![t.clone()]),
        }
    }
    per_emitter.sort_by_key(|(q, _)| *q);

    let coupling: Vec<&PauliTerm> = per_emitter
        .iter()
        .flat_map(|(_, gs)| gs.iter().flatten())
        .collect();
    let all_commute = coupling.iter().enumerate().all(|(i, a)| {
        coupling[i + 1..]
            .iter()
            .all(|b| a.string().commutes_with(&b.string()))
    });

    let to_h = |terms: Vec<PauliTerm>| PauliHamiltonian {
        n_qubits: h.n_qubits,
        layout: layout.clone(),
        terms,
    };
    let blocks = if all_commute && !coupling.is_empty() {
        vec![to_h(coupling.into_iter().cloned().collect())]
    } else {
        per_emitter
            .into_iter()
            .flat_map(|(_, gs)| gs)
            .map(to_h)
            .collect()
    };
    Ok(TrotterSplit {
        h0: to_h(diag),
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_z_matrix() {
        let layout = Layout {
            roles: vec![QubitRole::Qubit1],
        };
        let h = PauliHamiltonian::new(layout, vec![zz(1.0, 0)]).unwrap();
        let m = h.to_matrix().unwrap();
        assert_eq!(m[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(m[(1, 1)], C64::new(-1.0, 0.0));
        assert_eq!(m[(0, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn full_builder_term_list() {
        let h = build_full_qubitized(&SystemParams::default()).unwrap();
        assert_eq!(h.len(), 6);
        let xx: Vec<f64> = h
            .terms
            .iter()
            .filter(|t| t.factors.len() == 2)
            .map(|t| t.coefficient)
            .collect();
        assert_eq!(xx, vec![1.0, 1.0]);
    }

    #[test]
    fn rwa_couplings_are_halved() {
        let h = build_rwa_qubitized(&SystemParams::default()).unwrap();
        let c: Vec<f64> = h
            .terms
            .iter()
            .filter(|t| !t.is_diagonal())
            .map(|t| t.coefficient)
            .collect();
        assert_eq!(c, vec![0.5; 4]);
    }

    #[test]
    fn decoupled_builders_are_diagonal() {
        let p = SystemParams::default().with_couplings(0.0, 0.0);
        assert!(build_full_qubitized(&p).unwrap().is_diagonal());
        assert!(build_rwa_qubitized(&p).unwrap().is_diagonal());
        assert!(build_fourlevel_qubitized(&p).unwrap().is_diagonal());
    }

    #[test]
    fn split_block_counts() {
        let p = SystemParams::default();
        let full = split_trotter(&build_full_qubitized(&p).unwrap()).unwrap();
        assert_eq!(full.blocks.len(), 1);
        assert_eq!(full.blocks[0].len(), 2);
        let rwa = split_trotter(&build_rwa_qubitized(&p).unwrap()).unwrap();
        assert_eq!(rwa.blocks.len(), 2);
        let four = split_trotter(&build_fourlevel_qubitized(&p).unwrap()).unwrap();
        assert_eq!(four.blocks.len(), 4);
        assert!(four.blocks.iter().all(|b| b.len() == 2));

        let one =
            split_trotter(&build_rwa_qubitized(&p.with_couplings(1.0, 0.0)).unwrap()).unwrap();
        assert_eq!(one.blocks.len(), 1);
    }

    #[test]
    fn split_rejects_foreign_terms() {
        let layout = Layout::two_level();
        for bad in [
            PauliTerm::new(1.0, [(0, Pauli::X), (2, Pauli::X)]),
            PauliTerm::new(1.0, [(1, Pauli::X)]),
            PauliTerm::new(1.0, [(0, Pauli::X), (1, Pauli::X), (2, Pauli::Z)]),
        ] {
            let h = PauliHamiltonian::new(layout.clone(), vec![bad]).unwrap();
            assert!(matches!(split_trotter(&h), Err(Error::UnrecognizedTerm(_))));
        }
    }

    #[test]
    fn rejects_out_of_range_index() {
        let t = PauliTerm::new(1.0, [(3, Pauli::X)]);
        assert!(matches!(
            PauliHamiltonian::new(Layout::two_level(), vec![t]),
            Err(Error::IndexOutOfRange { index: 3, .. })
        ));
    }

    #[test]
    fn json_dump_shape() {
        let h = build_full_qubitized(&SystemParams::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&h.to_json()).unwrap();
        assert_eq!(v["n_qubits"], 3);
        assert_eq!(v["layout"][1], "cavity");
        assert_eq!(v["terms"][4]["coeff"], 1.0);
        assert_eq!(v["terms"][4]["factors"]["1"], "X");
        let back: PauliHamiltonian = serde_json::from_value(v).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn photon_numbers() {
        let l = Layout::four_level();
        assert_eq!(l.photon_number(0b0110), 3);
        assert_eq!(l.photon_number(0b0100), 2);
        assert_eq!(l.excitation_number(0b1011), 3);
        let l2 = Layout::two_level();
        assert_eq!(l2.excitation_number(0b111), 3);
    }
}
