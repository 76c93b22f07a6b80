//! Step-size policies for the split-step solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Manakov-averaged Kerr factor for randomly varying birefringence.
pub const MANAKOV_FACTOR: f64 = 8.0 / 9.0;

/// Nonlinear path length of a step of length `h` when the nonlinear
/// operator is applied at the step midpoint: `2 sinh(αh/2) / α`.
pub(crate) fn nonlinear_length_km(alpha_per_km: f64, h_km: f64) -> f64 {
    if alpha_per_km == 0.0 {
        h_km
    } else {
        2.0 * (0.5 * alpha_per_km * h_km).sinh() / alpha_per_km
    }
}

pub trait StepPolicy: Send + Sync {
    fn name(&self) -> &'static str;

    /// Length of the next step given the remaining span and the current peak power.
    fn next_step_km(&self, remaining_km: f64, peak_power_w: f64, gamma: f64, alpha: f64) -> f64;
}

/// Uniform steps no longer than `max_step_km`.
#[derive(Debug, Clone, Copy)]
pub struct FixedStep {
    pub max_step_km: f64,
}

impl StepPolicy for FixedStep {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn next_step_km(&self, remaining_km: f64, _: f64, _: f64, _: f64) -> f64 {
        let n = (remaining_km / self.max_step_km * (1.0 - 1e-12)).ceil().max(1.0);
        remaining_km / n
    }
}

/// Bounds the per-step nonlinear phase `(8/9) γ P_peak h_nl`.
#[derive(Debug, Clone, Copy)]
pub struct NonlinearPhaseStep {
    pub max_step_km: f64,
    pub max_nonlinear_phase_rad: f64,
}

impl StepPolicy for NonlinearPhaseStep {
    fn name(&self) -> &'static str {
        "adaptive"
    }

    fn next_step_km(&self, remaining_km: f64, peak_power_w: f64, gamma: f64, alpha: f64) -> f64 {
        let rate = MANAKOV_FACTOR * gamma * peak_power_w;
        let mut h = self.max_step_km;
        if rate > 0.0 {
            let l_nl = self.max_nonlinear_phase_rad / rate;
            let h_phase = if alpha == 0.0 {
                l_nl
            } else {
                2.0 / alpha * (0.5 * alpha * l_nl).asinh()
            };
            h = h.min(h_phase);
        }
        // avoid leaving a sliver at the span end
        if remaining_km <= h * (1.0 + 1e-9) {
            remaining_km
        } else {
            h
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub max_step_km: f64,
    pub max_nonlinear_phase_rad: f64,
    pub mode: StepMode,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            max_step_km: 0.1,
            max_nonlinear_phase_rad: 3e-3,
            mode: StepMode::Adaptive,
        }
    }
}

impl StepControl {
    pub fn fixed(step_km: f64) -> Self {
        Self {
            max_step_km: step_km,
            max_nonlinear_phase_rad: f64::INFINITY,
            mode: StepMode::Fixed,
        }
    }

    pub fn adaptive(max_step_km: f64, max_nonlinear_phase_rad: f64) -> Self {
        Self {
            max_step_km,
            max_nonlinear_phase_rad,
            mode: StepMode::Adaptive,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_step_km > 0.0) || !(self.max_nonlinear_phase_rad > 0.0) {
            return Err(Error::InvalidParameter(
                "step control: max step and max nonlinear phase must be > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn policy(&self) -> Box<dyn StepPolicy> {
        match self.mode {
            StepMode::Fixed => Box::new(FixedStep {
                max_step_km: self.max_step_km,
            }),
            StepMode::Adaptive => Box::new(NonlinearPhaseStep {
                max_step_km: self.max_step_km,
                max_nonlinear_phase_rad: self.max_nonlinear_phase_rad,
            }),
        }
    }
}
