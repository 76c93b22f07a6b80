//! Symmetric split-step Fourier solver for the Manakov equation
//!
//! ```text
//! ∂A/∂z = -(α/2) A - i (β₂/2) ∂²A/∂t² + i (8/9) γ (|Ax|² + |Ay|²) A
//! ```
//!
//! Each step is half linear / nonlinear / half linear. Consecutive linear
//! halves are fused into one frequency-domain multiply, so a step costs one
//! forward and one inverse FFT per polarization. The nonlinear operator uses
//! the exact midpoint path length `2 sinh(αh/2)/α`, which makes CW
//! self-phase modulation exact for any step size.

use std::f64::consts::LN_10;

use num_complex::Complex64;
use serde::Serialize;

use super::step::{nonlinear_length_km, MANAKOV_FACTOR};
use super::{FiberSpec, LossTableKind, StepControl};
use crate::error::{Error, Result};
use crate::signal::{SignalBlock, SPEED_OF_LIGHT};
use crate::spectral;

/// Headroom on the predicted peak when sizing adaptive steps; the peak at
/// the next nonlinear point is only known after the fused linear step.
const PEAK_HEADROOM: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub z_km: f64,
    pub step_km: f64,
    /// Peak of `|Ax|² + |Ay|²` where the nonlinear operator was applied.
    pub peak_power_w: f64,
    /// `(8/9) γ P_peak h_nl` actually applied on this step.
    pub nonlinear_phase_rad: f64,
}

struct LinearOperator {
    /// `i β₂ ω² / 2` per bin (1/km).
    dispersion: Vec<f64>,
    /// field attenuation `α/2` per bin (1/km).
    half_alpha: Vec<f64>,
    cached_h: f64,
    cached: Vec<Complex64>,
}

impl LinearOperator {
    fn new(signal: &SignalBlock, fiber: &FiberSpec) -> Self {
        let n = signal.len();
        let fs = signal.sample_rate();
        let beta2 = fiber.beta2_s2_per_km();
        let omega = spectral::angular_frequencies(n, fs);
        let dispersion = omega.iter().map(|w| 0.5 * beta2 * w * w).collect();
        let half_alpha = match &fiber.loss_table {
            Some(t) if t.kind == LossTableKind::PerKm => spectral::frequencies(n, fs)
                .iter()
                .map(|f| {
                    let nm = SPEED_OF_LIGHT / (signal.center_frequency() + f) * 1e9;
                    0.5 * t.value_at(nm) * LN_10 / 10.0
                })
                .collect(),
            _ => vec![0.5 * fiber.alpha_per_km(); n],
        };
        Self {
            dispersion,
            half_alpha,
            cached_h: f64::NAN,
            cached: Vec::new(),
        }
    }

    fn apply(&mut self, spectrum: &mut [Complex64], h_km: f64) {
        if h_km != self.cached_h {
            self.cached = self
                .dispersion
                .iter()
                .zip(&self.half_alpha)
                .map(|(&d, &a)| Complex64::from_polar((-a * h_km).exp(), d * h_km))
                .collect();
            self.cached_h = h_km;
        }
        for (v, k) in spectrum.iter_mut().zip(&self.cached) {
            *v *= k;
        }
    }
}

fn peak_power(x: &[Complex64], y: &[Complex64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .fold(0.0, |m, p| if p > m || p.is_nan() { p } else { m })
}

/// Applies the Kerr rotation; returns the peak power seen.
fn nonlinear_step(x: &mut [Complex64], y: &mut [Complex64], coeff: f64) -> f64 {
    let mut peak = 0.0f64;
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let p = a.norm_sqr() + b.norm_sqr();
        if p > peak || p.is_nan() {
            peak = p;
        }
        let rot = Complex64::from_polar(1.0, coeff * p);
        *a *= rot;
        *b *= rot;
    }
    peak
}

fn to_freq(x: &mut [Complex64], y: &mut [Complex64]) {
    spectral::forward(x);
    spectral::forward(y);
}

fn to_time(x: &mut [Complex64], y: &mut [Complex64]) {
    spectral::inverse(x);
    spectral::inverse(y);
}

fn apply_lumped(signal: &SignalBlock, x: &mut [Complex64], y: &mut [Complex64], fiber: &FiberSpec) {
    match &fiber.loss_table {
        Some(t) if t.kind == LossTableKind::Lumped => {
            to_freq(x, y);
            let n = x.len();
            for k in 0..n {
                let f = spectral::bin_frequency(k, n, signal.sample_rate());
                let nm = SPEED_OF_LIGHT / (signal.center_frequency() + f) * 1e9;
                let g = 10f64.powf(-t.value_at(nm) / 20.0);
                x[k] *= g;
                y[k] *= g;
            }
            to_time(x, y);
        }
        _ if fiber.lumped_loss_db > 0.0 => {
            let g = 10f64.powf(-fiber.lumped_loss_db / 20.0);
            x.iter_mut().chain(y.iter_mut()).for_each(|v| *v *= g);
        }
        _ => {}
    }
}

pub fn propagate(signal: &SignalBlock, fiber: &FiberSpec, ctl: &StepControl) -> Result<SignalBlock> {
    propagate_logged(signal, fiber, ctl).map(|(s, _)| s)
}

/// Propagates through one span and returns the per-step log.
///
/// The common group delay is not applied; see [`super::group_delay`].
pub fn propagate_logged(
    signal: &SignalBlock,
    fiber: &FiberSpec,
    ctl: &StepControl,
) -> Result<(SignalBlock, Vec<StepRecord>)> {
    fiber.validate()?;
    ctl.validate()?;
    let (mut x, mut y) = signal.clone().into_parts();
    let length = fiber.length_km;
    let mut log = Vec::new();

    if length > 0.0 {
        let mut lin = LinearOperator::new(signal, fiber);
        let gamma = fiber.gamma_per_w_km;
        let alpha = fiber.alpha_per_km();

        if gamma == 0.0 {
            to_freq(&mut x, &mut y);
            lin.apply(&mut x, length);
            lin.apply(&mut y, length);
            to_time(&mut x, &mut y);
            log.push(StepRecord {
                z_km: 0.0,
                step_km: length,
                peak_power_w: peak_power(&x, &y),
                nonlinear_phase_rad: 0.0,
            });
        } else {
            let policy = ctl.policy();
            let mut z = 0.0;
            let mut h = policy.next_step_km(length, PEAK_HEADROOM * peak_power(&x, &y), gamma, alpha);
            to_freq(&mut x, &mut y);
            lin.apply(&mut x, 0.5 * h);
            lin.apply(&mut y, 0.5 * h);
            to_time(&mut x, &mut y);
            loop {
                let h_nl = nonlinear_length_km(alpha, h);
                let coeff = MANAKOV_FACTOR * gamma * h_nl;
                let peak = nonlinear_step(&mut x, &mut y, coeff);
                if !peak.is_finite() {
                    return Err(Error::NumericalBlowup {
                        z_km: z,
                        step: log.len(),
                        step_km: h,
                    });
                }
                log.push(StepRecord {
                    z_km: z,
                    step_km: h,
                    peak_power_w: peak,
                    nonlinear_phase_rad: coeff * peak,
                });
                z += h;
                let remaining = length - z;
                to_freq(&mut x, &mut y);
                if remaining <= 1e-12 * length {
                    lin.apply(&mut x, 0.5 * h);
                    lin.apply(&mut y, 0.5 * h);
                    to_time(&mut x, &mut y);
                    break;
                }
                let next = policy.next_step_km(remaining, PEAK_HEADROOM * peak, gamma, alpha);
                lin.apply(&mut x, 0.5 * (h + next));
                lin.apply(&mut y, 0.5 * (h + next));
                to_time(&mut x, &mut y);
                h = next;
            }
        }
    }
    apply_lumped(signal, &mut x, &mut y, fiber);

    if x.iter().chain(&y).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NumericalBlowup {
            z_km: length,
            step: log.len(),
            step_km: 0.0,
        });
    }
    Ok((SignalBlock::from_parts_unchecked(x, y, signal), log))
}
