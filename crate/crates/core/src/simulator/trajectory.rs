use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::observables::Observables;

/// Column order of the trajectory CSV.
pub const TRAJECTORY_HEADER: [&str; 13] = [
    "t",
    "p1",
    "pc",
    "p2",
    "phase1",
    "phasec",
    "phase2",
    "coh_1c",
    "coh_2c",
    "coh_12",
    "energy",
    "fidelity",
    "total_excitation",
];

/// Extra columns written by [`Trajectory::write_csv_extended`].
pub const EXTENDED_COLUMNS: [&str; 7] = [
    "mag_1c", "mag_2c", "mag_12", "occ_0", "occ_1", "occ_2", "occ_3",
];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub obs: Observables,
    pub energy: f64,
    pub fidelity: f64,
}

impl Sample {
    pub fn p1(&self) -> f64 {
        self.obs.qubit1.p_excited
    }

    pub fn pc(&self) -> f64 {
        self.obs.cavity.p_excited
    }

    pub fn p2(&self) -> f64 {
        self.obs.qubit2.p_excited
    }

    pub fn total_excitation(&self) -> f64 {
        self.obs.total_excitation
    }

    fn row(&self) -> [f64; 13] {
        let o = &self.obs;
        [
            self.t,
            o.qubit1.p_excited,
            o.cavity.p_excited,
            o.qubit2.p_excited,
            o.qubit1.phase,
            o.cavity.phase,
            o.qubit2.phase,
            o.coh_1c.phase,
            o.coh_2c.phase,
            o.coh_12.phase,
            self.energy,
            self.fidelity,
            o.total_excitation,
        ]
    }
}

/// Time-ordered record of a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn column(&self, f: impl Fn(&Sample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// Largest fidelity and the first sample time within `1e-9` of it.
    pub fn max_fidelity(&self) -> Option<(f64, f64)> {
        let f = self.column(|s| s.fidelity);
        let t = self.times();
        first_max(&f).map(|i| (f.iter().copied().fold(f64::MIN, f64::max), t[i]))
    }

    /// Sample closest in time to `t`.
    pub fn sample_at(&self, t: f64) -> Option<&Sample> {
        self.samples
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.write(path, false)
    }

    /// Standard columns followed by coherence magnitudes and, for the
    /// 4-level cavity, photon-number occupations (zero otherwise).
    pub fn write_csv_extended(&self, path: &Path) -> Result<()> {
        self.write(path, true)
    }

    fn write(&self, path: &Path, extended: bool) -> Result<()> {
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        let mut header: Vec<&str> = TRAJECTORY_HEADER.to_vec();
        if extended {
            header.extend(EXTENDED_COLUMNS);
        }
        w.write_record(&header).map_err(csv_err)?;
        for s in &self.samples {
            let mut row: Vec<String> = s.row().iter().map(f64::to_string).collect();
            if extended {
                let o = &s.obs;
                let occ = o.occupations.unwrap_or_default();
                row.extend(
                    [o.coh_1c.magnitude, o.coh_2c.magnitude, o.coh_12.magnitude]
                        .iter()
                        .chain(occ.iter())
                        .map(f64::to_string),
                );
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Reads the standard columns back. Phase flags and coherence magnitudes
    /// are not stored in the file and come back as defaults.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let header = r.headers().map_err(csv_err)?.clone();
        if header.iter().take(13).ne(TRAJECTORY_HEADER.iter().copied()) {
            return Err(Error::invalid(format!(
                "{}: unexpected trajectory header",
                path.display()
            )));
        }
        let mut samples = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            let v: Vec<f64> = rec
                .iter()
                .take(13)
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
                })
                .collect::<Result<_>>()?;
            let mut s = Sample {
                t: v[0],
                energy: v[10],
                fidelity: v[11],
                ..Default::default()
            };
            s.obs.qubit1.p_excited = v[1];
            s.obs.cavity.p_excited = v[2];
            s.obs.qubit2.p_excited = v[3];
            s.obs.qubit1.phase = v[4];
            s.obs.cavity.phase = v[5];
            s.obs.qubit2.phase = v[6];
            s.obs.coh_1c.phase = v[7];
            s.obs.coh_2c.phase = v[8];
            s.obs.coh_12.phase = v[9];
            s.obs.total_excitation = v[12];
            samples.push(s);
        }
        Ok(Trajectory { samples })
    }
}

/// Index of the first entry within `1e-9` of the maximum.
pub fn first_max(values: &[f64]) -> Option<usize> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|&v| v >= max - 1e-9)
}
