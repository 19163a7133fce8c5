//! Closed-form solutions and an exact-diagonalization oracle.
//!
//! Closed-form amplitudes live on the single-excitation subspace plus the
//! ground state, and are written in the frame rotating with the emitters.
//! In that frame the ground state is static and the detuning only enters
//! through the couplings.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::Layout;
use crate::simulator::StateVector;
use crate::C64;

/// Amplitudes on `|e0g⟩`, `|g1g⟩`, `|g0e⟩` and the ground state `|g0g⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleExcitationAmplitudes {
    pub a_e0g: C64,
    pub a_g1g: C64,
    pub a_g0e: C64,
    pub a_g0g: C64,
}

impl SingleExcitationAmplitudes {
    pub fn norm_sqr(&self) -> f64 {
        [self.a_e0g, self.a_g1g, self.a_g0e, self.a_g0g]
            .iter()
            .map(|a| a.norm_sqr())
            .sum()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        ((self.a_e0g - other.a_e0g).norm_sqr()
            + (self.a_g1g - other.a_g1g).norm_sqr()
            + (self.a_g0e - other.a_g0e).norm_sqr()
            + (self.a_g0g - other.a_g0g).norm_sqr())
        .sqrt()
    }

    /// Embeds the amplitudes into a register with the given layout.
    pub fn to_state(&self, layout: &Layout) -> Result<StateVector> {
        let mut amps = vec![C64::new(0.0, 0.0); layout.dim()];
        let idx = |e1, n, e2| layout.basis_index(e1, n, e2).expect("single excitation");
        amps[idx(true, 0, false)] = self.a_e0g;
        amps[idx(false, 1, false)] = self.a_g1g;
        amps[idx(false, 0, true)] = self.a_g0e;
        amps[idx(false, 0, false)] = self.a_g0g;
        StateVector::new(amps, layout.clone())
    }
}

fn check_weights(alpha: C64, beta: C64) -> Result<()> {
    let n = alpha.norm_sqr() + beta.norm_sqr();
    if !n.is_finite() {
        return Err(Error::NonFinite("state weights"));
    }
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

fn check_couplings(g1: f64, g2: f64) -> Result<f64> {
    if !(g1.is_finite() && g2.is_finite()) {
        return Err(Error::NonFinite("couplings"));
    }
    if g1 < 0.0 || g2 < 0.0 {
        return Err(Error::invalid("couplings must be >= 0"));
    }
    Ok(g1 * g1 + g2 * g2)
}

/// Resonant rotating-wave solution starting from `alpha|g0g⟩ + beta|e0g⟩`.
///
/// With `Ω = √(g₁² + g₂²)`:
/// `a_e0g = β(g₁² cos Ωt + g₂²)/Ω²`, `a_g1g = −iβ g₁ sin Ωt / Ω`,
/// `a_g0e = β g₁g₂(cos Ωt − 1)/Ω²`.
pub fn rwa_resonant_state(
    t: f64,
    g1: f64,
    g2: f64,
    alpha: C64,
    beta: C64,
) -> Result<SingleExcitationAmplitudes> {
    check_weights(alpha, beta)?;
    let w2 = check_couplings(g1, g2)?;
    if w2 == 0.0 {
        return Ok(SingleExcitationAmplitudes {
            a_e0g: beta,
            a_g1g: C64::new(0.0, 0.0),
            a_g0e: C64::new(0.0, 0.0),
            a_g0g: alpha,
        });
    }
    let w = w2.sqrt();
    let (s, c) = (w * t).sin_cos();
    Ok(SingleExcitationAmplitudes {
        a_e0g: beta * ((g1 * g1 * c + g2 * g2) / w2),
        a_g1g: beta * C64::new(0.0, -g1 * s / w),
        a_g0e: beta * (g1 * g2 * (c - 1.0) / w2),
        a_g0g: alpha,
    })
}

/// Dispersive solution with the cavity adiabatically eliminated.
///
/// The bright combination `g₁|e0g⟩ + g₂|g0e⟩` picks up `e^{−it(g₁²+g₂²)/Δ}`
/// while the dark combination is static, so
/// `a_e0g = β(1 + g₁²(e − 1)/(g₁²+g₂²))` and `a_g0e = β g₁g₂(e − 1)/(g₁²+g₂²)`.
pub fn dispersive_state(
    t: f64,
    g1: f64,
    g2: f64,
    delta: f64,
    alpha: C64,
    beta: C64,
) -> Result<SingleExcitationAmplitudes> {
    check_weights(alpha, beta)?;
    let w2 = check_couplings(g1, g2)?;
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::Pole(
            "dispersive closed form needs a finite nonzero detuning",
        ));
    }
    let zero = C64::new(0.0, 0.0);
    if w2 == 0.0 {
        return Ok(SingleExcitationAmplitudes {
            a_e0g: beta,
            a_g1g: zero,
            a_g0e: zero,
            a_g0g: alpha,
        });
    }
    let em1 = C64::from_polar(1.0, -t * w2 / delta) - 1.0;
    Ok(SingleExcitationAmplitudes {
        a_e0g: beta * (1.0 + em1 * (g1 * g1 / w2)),
        a_g1g: zero,
        a_g0e: beta * em1 * (g1 * g2 / w2),
        a_g0g: alpha,
    })
}

/// `π/√(g₁² + g₂²)`.
pub fn transfer_time_resonant(g1: f64, g2: f64) -> Result<f64> {
    let w2 = check_couplings(g1, g2)?;
    if w2 == 0.0 {
        return Err(Error::Pole("both couplings are zero"));
    }
    Ok(std::f64::consts::PI / w2.sqrt())
}

/// A transfer time whose closed form can come out negative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedTime {
    /// Physical first-transfer time.
    pub magnitude: f64,
    /// Raw value of the formula.
    pub signed: f64,
}

impl SignedTime {
    fn from_signed(signed: f64) -> Self {
        SignedTime {
            magnitude: signed.abs(),
            signed,
        }
    }
}

/// `πΔ/(2g²)` for equal couplings.
pub fn transfer_time_dispersive(g: f64, delta: f64) -> Result<SignedTime> {
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::Pole("dispersive transfer needs g > 0"));
    }
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::Pole("dispersive transfer needs a nonzero detuning"));
    }
    Ok(SignedTime::from_signed(
        std::f64::consts::PI * delta / (2.0 * g * g),
    ))
}

/// First time the bright-state phase reaches π for unequal couplings,
/// `π|Δ|/(g₁² + g₂²)`. Equals [`transfer_time_dispersive`] when `g₁ = g₂`.
pub fn transfer_time_dispersive_unequal(g1: f64, g2: f64, delta: f64) -> Result<f64> {
    let w2 = check_couplings(g1, g2)?;
    if w2 == 0.0 || delta == 0.0 || !delta.is_finite() {
        return Err(Error::Pole(
            "dispersive transfer needs coupling and detuning",
        ));
    }
    Ok(std::f64::consts::PI * delta.abs() / w2)
}

/// Transfer time including the counter-rotating correction,
/// `π / (g²(2/Δ − 2/(2ω₁ − Δ)))`.
pub fn transfer_time_nonrwa(g: f64, delta: f64, omega1: f64) -> Result<SignedTime> {
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::Pole("transfer needs g > 0"));
    }
    if delta == 0.0 {
        return Err(Error::Pole("zero detuning"));
    }
    let far = 2.0 * omega1 - delta;
    if far == 0.0 {
        return Err(Error::Pole("2·omega1 equals delta"));
    }
    let rate = g * g * (2.0 / delta - 2.0 / far);
    if rate == 0.0 || !rate.is_finite() {
        return Err(Error::Pole("effective coupling vanishes"));
    }
    Ok(SignedTime::from_signed(std::f64::consts::PI / rate))
}

/// Cavity-mediated exchange coupling with the counter-rotating correction,
/// `g₁g₂(1/Δ₁ + 1/Δ₂ − 1/(2ω₁ − Δ₁) − 1/(2ω₂ − Δ₂))`.
pub fn effective_coupling_j(
    g1: f64,
    g2: f64,
    delta1: f64,
    delta2: f64,
    omega1: f64,
    omega2: f64,
) -> Result<f64> {
    let far1 = 2.0 * omega1 - delta1;
    let far2 = 2.0 * omega2 - delta2;
    if delta1 == 0.0 || delta2 == 0.0 || far1 == 0.0 || far2 == 0.0 {
        return Err(Error::Pole("effective coupling denominator vanishes"));
    }
    Ok(g1 * g2 * (1.0 / delta1 + 1.0 / delta2 - 1.0 / far1 - 1.0 / far2))
}

/// Largest Qubit-2 population reachable from a polarized start,
/// `(2g₁g₂/(g₁² + g₂²))²`.
pub fn max_p2(g1: f64, g2: f64) -> Result<f64> {
    let w2 = check_couplings(g1, g2)?;
    if w2 == 0.0 {
        return Err(Error::Pole("both couplings are zero"));
    }
    Ok((2.0 * g1 * g2 / w2).powi(2))
}

/// Generalized Rabi frequency `√(g² + Δ²)`.
pub fn rabi_frequency(g: f64, delta: f64) -> f64 {
    g.hypot(delta)
}

/// Order-of-magnitude accumulated Trotter error
/// `(g₁|Δ₁| + g₂|Δ₂| + g₁g₂)·T·dt`.
pub fn trotter_error_bound(g1: f64, g2: f64, delta1: f64, delta2: f64, t: f64, dt: f64) -> f64 {
    (g1 * delta1.abs() + g2 * delta2.abs() + g1 * g2) * t * dt
}

/// Largest step meeting an accumulated error budget over duration `t`.
pub fn max_step_for_error(g1: f64, g2: f64, delta1: f64, delta2: f64, t: f64, epsilon: f64) -> f64 {
    epsilon / ((g1 * delta1.abs() + g2 * delta2.abs() + g1 * g2) * t)
}

/// Eigendecomposition `H = VΛV†` of a Hermitian matrix, reusable for many times.
#[derive(Clone, Debug)]
pub struct ExactPropagator {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<C64>,
}

impl ExactPropagator {
    pub fn new(h: &DMatrix<C64>) -> Result<Self> {
        let d = h.nrows();
        if d != h.ncols() {
            return Err(Error::invalid("Hamiltonian matrix must be square"));
        }
        if d > 1 << crate::hamiltonian::MAX_DENSE_QUBITS {
            return Err(Error::DimensionGuard(d.trailing_zeros() as usize));
        }
        let dev = (h - h.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if dev > 1e-10 * scale {
            return Err(Error::NonHermitian(dev));
        }
        let eig = SymmetricEigen::new(h.clone());
        Ok(ExactPropagator {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// `V e^{−iΛt} V† ψ₀`.
    pub fn evolve(&self, psi0: &[C64], t: f64) -> Result<Vec<C64>> {
        let d = self.eigenvalues.len();
        if psi0.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: psi0.len(),
            });
        }
        let v = &self.eigenvectors;
        let mut coeffs = v.adjoint() * DVector::from_column_slice(psi0);
        for (c, e) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= C64::from_polar(1.0, -e * t);
        }
        Ok((v * coeffs).iter().copied().collect())
    }

    /// Dense `e^{−iHt}`.
    pub fn unitary(&self, t: f64) -> DMatrix<C64> {
        let v = &self.eigenvectors;
        let phases = DMatrix::from_diagonal(&DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues
                .iter()
                .map(|e| C64::from_polar(1.0, -e * t)),
        ));
        v * phases * v.adjoint()
    }
}

/// `e^{−iHt} ψ₀` by exact diagonalization.
pub fn exact_evolve(h: &DMatrix<C64>, psi0: &[C64], t: f64) -> Result<Vec<C64>> {
    let n: f64 = psi0.iter().map(|a| a.norm_sqr()).sum();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(n));
    }
    ExactPropagator::new(h)?.evolve(psi0, t)
}
