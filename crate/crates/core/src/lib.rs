//! Simulation of cavity-mediated state transfer between two qubits.
//!
//! Two emitters couple to a single cavity mode (the Tavis-Cummings model).
//! The model is mapped onto a register of qubits ("qubitized"). It is then
//! evolved with a first-order Suzuki-Trotter product in which every factor
//! is an exact Pauli-string exponential. Energies are in units of the
//! coupling `g` and times in units of `1/g`.
//!
//! The crate is split into four layers:
//!
//! * [`hamiltonian`]: Pauli-string Hamiltonians (full, RWA, cavity frame,
//!   4-level cavity), Trotter splitting and dense export.
//! * [`simulator`]: pure-state and density-matrix evolution, the cavity
//!   amplitude-damping channel and every observable extracted along a run.
//! * [`analytic`]: closed-form solutions, transfer times, effective
//!   couplings, the Trotter error estimate and an exact-diagonalization
//!   oracle.
//! * [`sweeps`]: parameter sweeps over detunings, coupling ratios, damping
//!   rates, RWA validity and step size, with CSV/JSON persistence.

pub mod analytic;
pub mod error;
pub mod hamiltonian;
pub mod simulator;
pub mod sweeps;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use hamiltonian::{
    build, build_cavity_frame, build_fourlevel_qubitized, build_full_qubitized,
    build_rwa_qubitized, split_trotter, HamiltonianKind, Layout, Pauli, PauliHamiltonian,
    PauliTerm, QubitRole, SystemParams, TrotterSplit,
};
pub use simulator::{
    DensityMatrix, Frame, KrausChannel, StateSpec, StateVector, Trajectory, TrotterConfig,
};
