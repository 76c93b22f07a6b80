//! EDFA model with additive ASE, attenuators and noise loading.

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::signal::{db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm, SignalBlock, PLANCK};

/// OSNR reference bandwidth (0.1 nm at 1550 nm).
pub const OSNR_REFERENCE_BANDWIDTH_HZ: f64 = 12.5e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AmpMode {
    FixedGain { gain_db: f64 },
    FixedOutputPower { target_output_dbm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplifierSpec {
    #[serde(flatten)]
    pub mode: AmpMode,
    pub noise_figure_db: f64,
    pub max_output_dbm: f64,
    /// Disables ASE generation (gain only).
    #[serde(default = "default_true")]
    pub ase: bool,
}

fn default_true() -> bool {
    true
}

impl AmplifierSpec {
    pub fn fixed_gain(gain_db: f64, noise_figure_db: f64) -> Self {
        Self {
            mode: AmpMode::FixedGain { gain_db },
            noise_figure_db,
            max_output_dbm: 30.0,
            ase: true,
        }
    }

    pub fn fixed_output(target_output_dbm: f64, noise_figure_db: f64) -> Self {
        Self {
            mode: AmpMode::FixedOutputPower { target_output_dbm },
            noise_figure_db,
            max_output_dbm: 30.0,
            ase: true,
        }
    }

    pub fn with_max_output(mut self, dbm: f64) -> Self {
        self.max_output_dbm = dbm;
        self
    }

    pub fn noiseless(mut self) -> Self {
        self.ase = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_figure_db >= 0.0) {
            return Err(Error::InvalidParameter("noise figure must be >= 0 dB".into()));
        }
        if let AmpMode::FixedOutputPower { target_output_dbm } = self.mode {
            if self.max_output_dbm < target_output_dbm {
                return Err(Error::InvalidParameter(format!(
                    "amplifier target {target_output_dbm} dBm above its maximum {} dBm",
                    self.max_output_dbm
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmpReport {
    pub gain_db: f64,
    /// ASE power spectral density per polarization at the output (W/Hz).
    pub ase_psd_per_pol: f64,
}

/// `n_sp h ν` scaled by the noise figure: `S_ASE = (G - 1) NF h ν / 2` per polarization.
pub fn ase_psd_per_pol(gain_lin: f64, noise_figure_db: f64, frequency_hz: f64) -> f64 {
    (gain_lin - 1.0).max(0.0) * db_to_linear(noise_figure_db) * PLANCK * frequency_hz / 2.0
}

/// Adds circular white Gaussian noise of PSD `psd_per_pol` (W/Hz) to each polarization.
pub fn add_white_noise(signal: &SignalBlock, psd_per_pol: f64, seed: u64) -> SignalBlock {
    if psd_per_pol <= 0.0 {
        return signal.clone();
    }
    let sigma = (psd_per_pol * signal.sample_rate() / 2.0).sqrt();
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let mut rng = seed::rng(seed);
    let mut noisy = |p: &[Complex64]| -> Vec<Complex64> {
        p.iter()
            .map(|v| v + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect()
    };
    let x = noisy(signal.x());
    let y = noisy(signal.y());
    SignalBlock::from_parts_unchecked(x, y, signal)
}

/// Scales the field by `sqrt(G)` and adds ASE over the simulation bandwidth.
pub fn amplify(signal: &SignalBlock, amp: &AmplifierSpec, seed: u64) -> Result<(SignalBlock, AmpReport)> {
    amp.validate()?;
    let p_in = signal.power_w();
    let nf_lin = if amp.ase { db_to_linear(amp.noise_figure_db) } else { 0.0 };
    // total ASE per unit (G - 1), both polarizations, whole simulated band
    let n0 = nf_lin * PLANCK * signal.center_frequency() * signal.sample_rate();
    let gain = match amp.mode {
        AmpMode::FixedGain { gain_db } => db_to_linear(gain_db),
        AmpMode::FixedOutputPower { target_output_dbm } => {
            if p_in <= 0.0 {
                return Err(Error::ZeroPower);
            }
            (dbm_to_watts(target_output_dbm) + n0) / (p_in + n0)
        }
    };
    if gain < 1.0 - 1e-12 {
        return Err(Error::AmplifierAttenuation {
            gain_db: linear_to_db(gain),
        });
    }
    let gain = gain.max(1.0);
    let expected_out = gain * p_in + (gain - 1.0) * n0;
    let out_dbm = watts_to_dbm(expected_out);
    if out_dbm > amp.max_output_dbm + 1e-9 {
        return Err(Error::AmplifierSaturation {
            output_dbm: out_dbm,
            max_dbm: amp.max_output_dbm,
        });
    }
    let psd = if amp.ase {
        ase_psd_per_pol(gain, amp.noise_figure_db, signal.center_frequency())
    } else {
        0.0
    };
    let out = add_white_noise(&signal.scaled(gain.sqrt()), psd, seed);
    Ok((
        out,
        AmpReport {
            gain_db: linear_to_db(gain),
            ase_psd_per_pol: psd,
        },
    ))
}

pub fn attenuate(signal: &SignalBlock, loss_db: f64) -> Result<SignalBlock> {
    if !(loss_db >= 0.0) {
        return Err(Error::InvalidParameter(format!("attenuation {loss_db} dB must be >= 0")));
    }
    Ok(signal.scaled(10f64.powf(-loss_db / 20.0)))
}

/// Sets the output to `target_dbm` by attenuation only. Returns the applied loss.
pub fn voa_auto(signal: &SignalBlock, target_dbm: f64) -> Result<(SignalBlock, f64)> {
    let p_in = signal.measure_power_dbm()?;
    let loss = p_in - target_dbm;
    if loss < -1e-9 {
        return Err(Error::VoaCannotAmplify {
            input_dbm: p_in,
            target_dbm,
        });
    }
    let out = signal.set_power_dbm(target_dbm)?;
    Ok((out, loss.max(0.0)))
}

/// VOA2: fixes the power launched into the buffering fibre.
pub fn voa2_auto(signal: &SignalBlock, target_dbm: f64) -> Result<(SignalBlock, f64)> {
    voa_auto(signal, target_dbm)
}

/// Loads white noise so that a channel of power `channel_power_w` sees `osnr_db`
/// in the 12.5-GHz reference bandwidth (noise counted in both polarizations).
pub fn load_osnr(signal: &SignalBlock, channel_power_w: f64, osnr_db: f64, seed: u64) -> SignalBlock {
    let psd_total = channel_power_w / (db_to_linear(osnr_db) * OSNR_REFERENCE_BANDWIDTH_HZ);
    add_white_noise(signal, psd_total / 2.0, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cw(power_dbm: f64, n: usize) -> SignalBlock {
        let a = dbm_to_watts(power_dbm).sqrt();
        SignalBlock::new(
            vec![Complex64::new(a, 0.0); n],
            vec![Complex64::new(0.0, 0.0); n],
            64e9,
            193e12,
            0,
        )
        .unwrap()
    }

    #[test]
    fn unity_gain_is_identity() {
        let s = cw(-3.0, 256);
        let (out, rep) = amplify(&s, &AmplifierSpec::fixed_gain(0.0, 0.0), 1).unwrap();
        assert_eq!(rep.ase_psd_per_pol, 0.0);
        for (a, b) in out.x().iter().zip(s.x()) {
            assert!((a - b).norm() < 1e-12 * b.norm());
        }
    }

    #[test]
    fn power_mode_hits_target() {
        for p_in in [-20.0, -5.0, 10.0] {
            let s = cw(p_in, 1 << 14);
            let amp = AmplifierSpec::fixed_output(23.0, 5.0);
            let (out, _) = amplify(&s, &amp, 7).unwrap();
            assert!((out.measure_power_dbm().unwrap() - 23.0).abs() < 0.05);
        }
    }

    #[test]
    fn errors() {
        let s = cw(10.0, 64);
        assert!(matches!(
            amplify(&s, &AmplifierSpec::fixed_output(5.0, 5.0), 0),
            Err(Error::AmplifierAttenuation { .. })
        ));
        assert!(matches!(
            amplify(&s, &AmplifierSpec::fixed_gain(25.0, 5.0), 0),
            Err(Error::AmplifierSaturation { .. })
        ));
        assert!(matches!(
            voa2_auto(&cw(5.0, 8), 10.2),
            Err(Error::VoaCannotAmplify { .. })
        ));
        assert!(attenuate(&s, -1.0).is_err());
    }

    #[test]
    fn attenuation_arithmetic() {
        let s = cw(0.0, 8);
        assert_eq!(attenuate(&s, 0.0).unwrap(), s);
        let half = attenuate(&s, 10.0 * 2f64.log10()).unwrap();
        assert!((half.power_w() / s.power_w() - 0.5).abs() < 1e-12);
        let (out, loss) = voa2_auto(&cw(17.3, 8), 10.2).unwrap();
        assert!((loss - 7.1).abs() < 1e-9);
        assert!((out.measure_power_dbm().unwrap() - 10.2).abs() < 1e-9);
    }

    #[test]
    fn noise_is_seeded() {
        let s = cw(0.0, 128);
        let amp = AmplifierSpec::fixed_gain(20.0, 5.0);
        assert_eq!(amplify(&s, &amp, 3).unwrap().0, amplify(&s, &amp, 3).unwrap().0);
        assert_ne!(amplify(&s, &amp, 3).unwrap().0, amplify(&s, &amp, 4).unwrap().0);
    }
}
