use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use tcsim::simulator::TargetConvention;
use tcsim::sweeps::{AxisRange, Horizon};
use tcsim::{HamiltonianKind, StateSpec};

use crate::{CliError, FormatArg, PhaseFrameArg};

/// JSON run configuration. Field names follow the library types
/// (`SystemParams`, `TrotterConfig`, `SweepGrid`); every field is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub omega_c: Option<f64>,
    pub delta_1: Option<f64>,
    pub delta_2: Option<f64>,
    pub g_1: Option<f64>,
    pub g_2: Option<f64>,
    pub kappa: Option<f64>,

    pub dt: Option<f64>,
    pub n_steps: Option<usize>,
    pub record_stride: Option<usize>,
    pub t_max: Option<f64>,

    pub delta1_range: Option<AxisRange>,
    pub delta2_range: Option<AxisRange>,
    pub horizon: Option<Horizon>,
    pub state_spec: Option<StateSpec>,
    pub hamiltonian_kind: Option<HamiltonianKind>,
    pub target: Option<TargetConvention>,

    pub rwa: Option<bool>,
    pub cavity_levels: Option<usize>,
    pub phase_frame: Option<PhaseFrameArg>,
    pub output: Option<PathBuf>,
    pub format: Option<FormatArg>,
    pub jobs: Option<usize>,

    pub ratios: Option<Vec<f64>>,
    pub kappas: Option<Vec<f64>>,
    pub deltas: Option<Vec<f64>>,
    pub g_over_omega: Option<Vec<f64>>,
    pub dt_list: Option<Vec<f64>>,
    pub energy_dts: Option<Vec<f64>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Corrected,
    Raw,
}

impl TargetArg {
    pub fn convention(self) -> TargetConvention {
        match self {
            TargetArg::Corrected => TargetConvention::Corrected,
            TargetArg::Raw => TargetConvention::Raw,
        }
    }
}
