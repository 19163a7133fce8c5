use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical configuration of the two emitters and the cavity.
///
/// All quantities are in units of the coupling scale `g` (so a run with
/// `g_1 = g_2 = 1` measures time in `1/g`). Emitter frequencies are derived
/// as `omega_i = omega_c + delta_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemParams {
    pub omega_c: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub g_1: f64,
    pub g_2: f64,
    pub kappa: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            omega_c: 100.0,
            delta_1: 0.0,
            delta_2: 0.0,
            g_1: 1.0,
            g_2: 1.0,
            kappa: 0.0,
        }
    }
}

impl SystemParams {
    pub fn resonant() -> Self {
        Self::default()
    }

    pub fn with_detunings(mut self, delta_1: f64, delta_2: f64) -> Self {
        self.delta_1 = delta_1;
        self.delta_2 = delta_2;
        self
    }

    pub fn with_couplings(mut self, g_1: f64, g_2: f64) -> Self {
        self.g_1 = g_1;
        self.g_2 = g_2;
        self
    }

    pub fn with_omega_c(mut self, omega_c: f64) -> Self {
        self.omega_c = omega_c;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn omega_1(&self) -> f64 {
        self.omega_c + self.delta_1
    }

    pub fn omega_2(&self) -> f64 {
        self.omega_c + self.delta_2
    }

    /// Same physics with the two emitters exchanged.
    pub fn swapped(&self) -> Self {
        SystemParams {
            delta_1: self.delta_2,
            delta_2: self.delta_1,
            g_1: self.g_2,
            g_2: self.g_1,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.omega_c,
            self.delta_1,
            self.delta_2,
            self.g_1,
            self.g_2,
            self.kappa,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("SystemParams"));
        }
        if self.omega_c <= 0.0 {
            return Err(Error::invalid(format!(
                "omega_c must be > 0, got {}",
                self.omega_c
            )));
        }
        if self.g_1 < 0.0 || self.g_2 < 0.0 {
            return Err(Error::invalid("couplings must be >= 0"));
        }
        if self.kappa < 0.0 {
            return Err(Error::invalid("kappa must be >= 0"));
        }
        if self.omega_1() <= 0.0 || self.omega_2() <= 0.0 {
            return Err(Error::invalid(format!(
                "qubit frequencies must be positive (omega_1 = {}, omega_2 = {})",
                self.omega_1(),
                self.omega_2()
            )));
        }
        Ok(())
    }
}
