//! State-vector and density-matrix evolution plus observable extraction.

mod density;
mod evolve;
mod observables;
mod state;
mod trajectory;

pub use density::{apply_kraus, partial_trace, DensityMatrix, KrausChannel};
pub use evolve::{
    evolve, evolve_damped, evolve_with, fidelity_series, propagate, scan_fidelity, trotter_step,
    EvolveOptions, FidelityScan, TrotterConfig, TrotterStepper,
};
pub use observables::{
    cavity_occupations, coherence, fidelity, populations_and_phase, total_energy, Coherence,
    CoherencePair, Energy, Fidelity, Observables, PopulationPhase, PHASE_EPS,
};
pub use state::{init_state, transfer_target, Frame, StateSpec, StateVector, TargetConvention};
pub use trajectory::{first_max, Sample, Trajectory, EXTENDED_COLUMNS, TRAJECTORY_HEADER};
