use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LossTable;
use crate::error::{Error, Result};
use crate::signal::SPEED_OF_LIGHT;
use crate::transmitter::CUT_WAVELENGTH_NM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberKind {
    Smf,
    Hcf,
    BufferingSmf,
}

impl FiberKind {
    pub const ALL: [FiberKind; 3] = [FiberKind::Smf, FiberKind::Hcf, FiberKind::BufferingSmf];

    pub fn name(self) -> &'static str {
        match self {
            FiberKind::Smf => "smf",
            FiberKind::Hcf => "hcf",
            FiberKind::BufferingSmf => "buffering_smf",
        }
    }
}

impl fmt::Display for FiberKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FiberKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FiberKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    pub length_km: f64,
    pub attenuation_db_per_km: f64,
    /// Connector/splice loss applied once at the span end.
    pub lumped_loss_db: f64,
    pub dispersion_ps_per_nm_km: f64,
    pub gamma_per_w_km: f64,
    pub group_index: f64,
    pub reference_wavelength_nm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_table: Option<LossTable>,
}

impl FiberSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("fiber: {m}")));
        if !(self.length_km >= 0.0) {
            return bad("length must be >= 0");
        }
        if !(self.attenuation_db_per_km >= 0.0) {
            return bad("attenuation must be >= 0");
        }
        if !(self.lumped_loss_db >= 0.0) {
            return bad("lumped loss must be >= 0");
        }
        if !(self.gamma_per_w_km >= 0.0) {
            return bad("gamma must be >= 0");
        }
        if !(self.group_index >= 1.0) {
            return bad("group index must be >= 1");
        }
        if !self.dispersion_ps_per_nm_km.is_finite() || !(self.reference_wavelength_nm > 0.0) {
            return bad("dispersion and reference wavelength must be finite");
        }
        Ok(())
    }

    /// Power attenuation coefficient in 1/km.
    pub fn alpha_per_km(&self) -> f64 {
        self.attenuation_db_per_km * std::f64::consts::LN_10 / 10.0
    }

    /// GVD parameter β₂ in s²/km, from `β₂ = -D λ² / (2π c)`.
    pub fn beta2_s2_per_km(&self) -> f64 {
        beta2_from_dispersion(self.dispersion_ps_per_nm_km, self.reference_wavelength_nm)
    }

    /// `(1 - e^{-αL}) / α` in km.
    pub fn effective_length_km(&self) -> f64 {
        let a = self.alpha_per_km();
        if a == 0.0 {
            self.length_km
        } else {
            (1.0 - (-a * self.length_km).exp()) / a
        }
    }

    /// Distributed plus lumped loss in dB.
    pub fn total_loss_db(&self) -> f64 {
        self.attenuation_db_per_km * self.length_km + self.lumped_loss_db
    }

    /// Accumulated dispersion D·L in ps/nm.
    pub fn accumulated_dispersion_ps_per_nm(&self) -> f64 {
        self.dispersion_ps_per_nm_km * self.length_km
    }

    pub fn with_length(mut self, km: f64) -> Self {
        self.length_km = km;
        self
    }
}

/// β₂ in s²/km for dispersion `D` (ps/nm/km) at `wavelength_nm`.
pub fn beta2_from_dispersion(d_ps_per_nm_km: f64, wavelength_nm: f64) -> f64 {
    // ps/(nm km) -> s/m^2 per km of length: 1e-12 / 1e-9 = 1e-3 s/m/km
    let d = d_ps_per_nm_km * 1e-3;
    let lambda = wavelength_nm * 1e-9;
    -d * lambda * lambda / (2.0 * PI * SPEED_OF_LIGHT)
}

pub fn make_preset(kind: FiberKind) -> FiberSpec {
    let smf = FiberSpec {
        length_km: 1.1,
        attenuation_db_per_km: 0.20,
        lumped_loss_db: 0.0,
        dispersion_ps_per_nm_km: 17.0,
        gamma_per_w_km: 1.3,
        group_index: 1.4682,
        reference_wavelength_nm: CUT_WAVELENGTH_NM,
        loss_table: None,
    };
    match kind {
        FiberKind::Smf => smf,
        FiberKind::Hcf => FiberSpec {
            length_km: 1.085,
            attenuation_db_per_km: 1.5,
            lumped_loss_db: 4.07,
            dispersion_ps_per_nm_km: 3.0,
            gamma_per_w_km: 1.3e-4,
            group_index: 1.0003,
            reference_wavelength_nm: CUT_WAVELENGTH_NM,
            loss_table: None,
        },
        FiberKind::BufferingSmf => smf.with_length(45.6),
    }
}

/// Common group delay `L n_g / c` in seconds.
pub fn group_delay(fiber: &FiberSpec) -> f64 {
    fiber.length_km * 1e3 * fiber.group_index / SPEED_OF_LIGHT
}

/// Group delay per km in microseconds.
pub fn latency_us_per_km(fiber: &FiberSpec) -> f64 {
    1e3 * fiber.group_index / SPEED_OF_LIGHT * 1e6
}
