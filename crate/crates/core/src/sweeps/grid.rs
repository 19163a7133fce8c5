use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianKind;
use crate::simulator::{StateSpec, TargetConvention};

/// Evenly spaced values from `min` to `max` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, n_points: usize) -> Self {
        AxisRange { min, max, n_points }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.n_points {
            0 => Vec::new(),
            1 => vec![self.min],
            n => {
                let step = (self.max - self.min) / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        if i + 1 == n {
                            self.max
                        } else {
                            self.min + step * i as f64
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.min.abs().max(self.max.abs())
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if self.n_points == 0 {
            return Err(Error::invalid(format!("{name}: n_points must be >= 1")));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::NonFinite("axis range"));
        }
        if self.max < self.min {
            return Err(Error::invalid(format!("{name}: max < min")));
        }
        Ok(())
    }
}

/// Maximum evolution time of a sweep cell.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Horizon {
    /// Resolved from the grid and couplings, see [`super::auto_horizon`].
    #[default]
    Auto,
    Fixed(f64),
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Auto => f.write_str("auto"),
            Horizon::Fixed(t) => write!(f, "{t}"),
        }
    }
}

impl std::str::FromStr for Horizon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Horizon::Auto);
        }
        let t: f64 = s
            .parse()
            .map_err(|_| Error::invalid(format!("horizon must be 'auto' or a time, got '{s}'")))?;
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::invalid(format!("horizon must be > 0, got {t}")));
        }
        Ok(Horizon::Fixed(t))
    }
}

impl Serialize for Horizon {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Horizon::Auto => s.serialize_str("auto"),
            Horizon::Fixed(t) => s.serialize_f64(*t),
        }
    }
}

impl<'de> Deserialize<'de> for Horizon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Time(f64),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Time(t) => Ok(Horizon::Fixed(t)),
            Repr::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Lattice of detunings plus the evolution settings shared by every cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepGrid {
    pub delta1_range: AxisRange,
    pub delta2_range: AxisRange,
    pub horizon: Horizon,
    pub dt: f64,
    pub state_spec: StateSpec,
    pub hamiltonian_kind: HamiltonianKind,
    pub target: TargetConvention,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            delta1_range: AxisRange::new(-5.0, 5.0, 11),
            delta2_range: AxisRange::new(-5.0, 5.0, 11),
            horizon: Horizon::Auto,
            dt: 0.01,
            state_spec: StateSpec::Polarized,
            hamiltonian_kind: HamiltonianKind::Full,
            target: TargetConvention::Corrected,
        }
    }
}

impl SweepGrid {
    /// Square lattice with `n` points per axis on `[min, max]`.
    pub fn square(min: f64, max: f64, n: usize) -> Self {
        SweepGrid {
            delta1_range: AxisRange::new(min, max, n),
            delta2_range: AxisRange::new(min, max, n),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.delta1_range.validate("delta1_range")?;
        self.delta2_range.validate("delta2_range")?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!("dt must be > 0, got {}", self.dt)));
        }
        if let Horizon::Fixed(t) = self.horizon {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::invalid(format!("horizon must be > 0, got {t}")));
            }
        }
        if matches!(self.state_spec, StateSpec::Custom { .. }) {
            return Err(Error::invalid(
                "sweeps need a polarized or superposition initial state",
            ));
        }
        Ok(())
    }
}
