use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{wavelength_nm_to_hz, SignalBlock};
use crate::spectral;

pub const CUT_WAVELENGTH_NM: f64 = 1559.39;

/// Transmitter parameters for one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TxChain {
    pub symbol_rate: f64,
    pub rrc_rolloff: f64,
    pub rrc_span_symbols: usize,
    pub samples_per_symbol: usize,
    /// 3-dB bandwidth of the transmitter low-pass response.
    pub tx_bandwidth_hz: f64,
    pub preemphasis_enabled: bool,
    pub laser_linewidth_hz: f64,
    pub carrier_frequency_hz: f64,
}

impl TxChain {
    /// Defaults for a given symbol rate: rolloff 0.1, span 32, bandwidth 0.62·R_s.
    pub fn with_symbol_rate(symbol_rate: f64, samples_per_symbol: usize) -> Self {
        Self {
            symbol_rate,
            rrc_rolloff: 0.1,
            rrc_span_symbols: 32,
            samples_per_symbol,
            tx_bandwidth_hz: 0.62 * symbol_rate,
            preemphasis_enabled: true,
            laser_linewidth_hz: 100e3,
            carrier_frequency_hz: wavelength_nm_to_hz(CUT_WAVELENGTH_NM),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.symbol_rate > 0.0) {
            return bad("symbol rate must be > 0");
        }
        if !(self.rrc_rolloff > 0.0 && self.rrc_rolloff <= 1.0) {
            return bad("rolloff must be in (0, 1]");
        }
        if self.rrc_span_symbols < 8 {
            return bad("RRC span must be >= 8 symbols");
        }
        if self.samples_per_symbol < 2 {
            return bad("samples per symbol must be >= 2");
        }
        if !(self.tx_bandwidth_hz > 0.0) {
            return bad("transmitter bandwidth must be > 0");
        }
        if self.laser_linewidth_hz < 0.0 {
            return bad("laser linewidth must be >= 0");
        }
        Ok(())
    }

    pub fn sample_rate(&self) -> f64 {
        self.symbol_rate * self.samples_per_symbol as f64
    }

    pub fn occupied_bandwidth_hz(&self) -> f64 {
        self.symbol_rate * (1.0 + self.rrc_rolloff)
    }
}

/// Unit-energy root-raised-cosine taps, `span * sps + 1` long, centered.
pub fn rrc_taps(rolloff: f64, span_symbols: usize, sps: usize) -> Vec<f64> {
    let half = (span_symbols * sps) / 2;
    let b = rolloff;
    let taps: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let t = (i as f64 - half as f64) / sps as f64;
            if t.abs() < 1e-12 {
                1.0 - b + 4.0 * b / PI
            } else if (4.0 * b * t.abs() - 1.0).abs() < 1e-9 {
                b / 2f64.sqrt()
                    * ((1.0 + 2.0 / PI) * (PI / (4.0 * b)).sin()
                        + (1.0 - 2.0 / PI) * (PI / (4.0 * b)).cos())
            } else {
                let num = (PI * t * (1.0 - b)).sin() + 4.0 * b * t * (PI * t * (1.0 + b)).cos();
                let den = PI * t * (1.0 - (4.0 * b * t).powi(2));
                num / den
            }
        })
        .collect();
    let norm = taps.iter().map(|v| v * v).sum::<f64>().sqrt();
    taps.into_iter().map(|v| v / norm).collect()
}

/// Circular convolution with a centered real FIR, evaluated in the frequency domain.
pub(crate) fn circular_filter(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let half = taps.len() / 2;
    let mut kernel = vec![Complex64::new(0.0, 0.0); n];
    for (j, &h) in taps.iter().enumerate() {
        let idx = (j as isize - half as isize).rem_euclid(n as isize) as usize;
        kernel[idx] += h;
    }
    spectral::forward(&mut kernel);
    let mut buf = x.to_vec();
    spectral::forward(&mut buf);
    for (v, k) in buf.iter_mut().zip(&kernel) {
        *v *= k;
    }
    spectral::inverse(&mut buf);
    buf
}

fn shape_stream(symbols: &[Complex64], taps: &[f64], sps: usize) -> Vec<Complex64> {
    let n = symbols.len() * sps;
    let half = taps.len() / 2;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (k, &a) in symbols.iter().enumerate() {
        let base = (k * sps) as isize - half as isize;
        for (j, &h) in taps.iter().enumerate() {
            let idx = (base + j as isize).rem_euclid(n as isize) as usize;
            out[idx] += a * h;
        }
    }
    out
}

/// Shapes two symbol streams (x, y) with a unit-energy RRC pulse.
///
/// The waveform is periodic: symbol `k` peaks at sample `k * sps` and the
/// pulse tails wrap around the block.
pub fn pulse_shape_rrc(
    symbols_x: &[Complex64],
    symbols_y: &[Complex64],
    chain: &TxChain,
) -> Result<SignalBlock> {
    chain.validate()?;
    if symbols_x.len() != symbols_y.len() {
        return Err(Error::LengthMismatch(symbols_x.len(), symbols_y.len()));
    }
    let taps = rrc_taps(chain.rrc_rolloff, chain.rrc_span_symbols, chain.samples_per_symbol);
    let sps = chain.samples_per_symbol;
    SignalBlock::new(
        shape_stream(symbols_x, &taps, sps),
        shape_stream(symbols_y, &taps, sps),
        chain.sample_rate(),
        chain.carrier_frequency_hz,
        0,
    )
}
