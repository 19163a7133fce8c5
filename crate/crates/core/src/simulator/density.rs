use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hamiltonian::{Layout, QubitRole};
use crate::simulator::state::StateVector;
use crate::C64;

/// Mixed state over `n_qubits`, indexed like [`StateVector`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub matrix: DMatrix<C64>,
    pub n_qubits: usize,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let d = matrix.nrows();
        if d != matrix.ncols() || !d.is_power_of_two() {
            return Err(Error::invalid(format!(
                "density matrix must be square with power-of-two size, got {}x{}",
                d,
                matrix.ncols()
            )));
        }
        let rho = DensityMatrix {
            n_qubits: d.trailing_zeros() as usize,
            matrix,
        };
        let dev = rho.hermiticity_error();
        if dev > 1e-10 {
            return Err(Error::NonHermitian(dev));
        }
        Ok(rho)
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(&psi.amplitudes);
        DensityMatrix {
            matrix: &v * v.adjoint(),
            n_qubits: psi.layout.n_qubits(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Diagonal of the matrix, i.e. basis-state probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation_in(&self, psi: &[C64]) -> Result<f64> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: psi.len(),
            });
        }
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..psi.len() {
            for j in 0..psi.len() {
                acc += psi[i].conj() * self.matrix[(i, j)] * psi[j];
            }
        }
        Ok(acc.re)
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &DMatrix<C64>) -> Self {
        DensityMatrix {
            matrix: u * &self.matrix * u.adjoint(),
            n_qubits: self.n_qubits,
        }
    }
}

/// Reduced state on `keep`, which is sorted so that the reduced matrix keeps
/// the register's index order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::invalid(
            "partial trace needs at least one kept index",
        ));
    }
    let n = rho.n_qubits;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&index) = keep.iter().find(|&&q| q >= n) {
        return Err(Error::IndexOutOfRange { index, n_qubits: n });
    }
    let keep_mask: usize = keep.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    let compress = |b: usize| {
        keep.iter()
            .fold(0usize, |acc, &q| (acc << 1) | ((b >> (n - 1 - q)) & 1))
    };
    let k = keep.len();
    let mut out = DMatrix::<C64>::zeros(1 << k, 1 << k);
    let d = rho.dim();
    for i in 0..d {
        for j in 0..d {
            if (i & !keep_mask) == (j & !keep_mask) {
                out[(compress(i), compress(j))] += rho.matrix[(i, j)];
            }
        }
    }
    Ok(DensityMatrix {
        matrix: out,
        n_qubits: k,
    })
}

/// Single-photon amplitude damping on the cavity qubit.
///
/// `Ω₀ = |0⟩⟨0| + √(1−γ²)|1⟩⟨1|`, `Ω₁ = γ|0⟩⟨1|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrausChannel {
    pub gamma: f64,
    pub theta_d: f64,
    pub target: usize,
}

impl KrausChannel {
    pub fn new(gamma: f64, target: usize) -> Result<Self> {
        if !gamma.is_finite() || !(0.0..=1.0).contains(&gamma) {
            return Err(Error::invalid(format!(
                "damping amplitude must lie in [0, 1], got {gamma}"
            )));
        }
        Ok(KrausChannel {
            gamma,
            theta_d: 2.0 * gamma.asin(),
            target,
        })
    }

    /// Channel for one step of length `dt` at cavity decay rate `kappa`:
    /// `γ = √(1 − e^{−κ dt})`.
    pub fn from_rate(kappa: f64, dt: f64, target: usize) -> Result<Self> {
        if !(kappa >= 0.0 && dt >= 0.0) {
            return Err(Error::invalid("kappa and dt must be non-negative"));
        }
        Self::new((1.0 - (-kappa * dt).exp()).sqrt(), target)
    }

    /// The two Kraus operators as 2×2 matrices.
    pub fn operators(&self) -> [DMatrix<C64>; 2] {
        let z = C64::new(0.0, 0.0);
        let keep = C64::new((1.0 - self.gamma * self.gamma).sqrt(), 0.0);
        [
            DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), z, z, keep]),
            DMatrix::from_row_slice(2, 2, &[z, C64::new(self.gamma, 0.0), z, z]),
        ]
    }
}

/// Applies the channel to the cavity qubit of `layout`, identity elsewhere.
pub fn apply_kraus(
    rho: &DensityMatrix,
    ch: &KrausChannel,
    layout: &Layout,
) -> Result<DensityMatrix> {
    if layout.is_four_level() {
        return Err(Error::UnsupportedLayout(
            "cavity damping is only defined for the single-photon cavity",
        ));
    }
    if layout.role(ch.target) != Some(QubitRole::Cavity) {
        return Err(Error::LayoutMismatch(format!(
            "damping target {} is not the cavity qubit",
            ch.target
        )));
    }
    if rho.n_qubits != layout.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: layout.dim(),
            got: rho.dim(),
        });
    }
    let bit = layout.bit(ch.target);
    let g2 = ch.gamma * ch.gamma;
    let keep = (1.0 - g2).sqrt();
    let f = |i: usize| if i & bit != 0 { keep } else { 1.0 };
    let d = rho.dim();
    let m = &rho.matrix;
    let out = DMatrix::from_fn(d, d, |i, j| {
        let mut v = m[(i, j)] * (f(i) * f(j));
        if i & bit == 0 && j & bit == 0 {
            v += m[(i | bit, j | bit)] * g2;
        }
        v
    });
    Ok(DensityMatrix {
        matrix: out,
        n_qubits: rho.n_qubits,
    })
}
