//! Linear, data-aided coherent receiver.
//!
//! ```text
//! select_channel → cd_compensate → matched_filter_downsample
//!     → equalize_2x2 → carrier_phase_recover
//! ```
//!
//! Nothing in the chain depends nonlinearly on the received power: the
//! equalizer input is normalized to unit power before adaptation.

mod cpe;
mod equalizer;
mod sync;

pub use cpe::carrier_phase_recover;
pub use equalizer::{equalize_2x2, train_equalizer, EqualizerTaps};
pub use sync::{matched_filter_downsample, Downsampled, SYNC_THRESHOLD};

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::beta2_from_dispersion;
use crate::signal::{write_header, ChannelGrid, SignalBlock};
use crate::spectral;
use crate::transmitter::{TxChain, CUT_WAVELENGTH_NM};

pub const TRAINING_SYMBOLS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DspConfig {
    pub eq_taps: usize,
    pub eq_step_size: f64,
    pub eq_training_passes: usize,
    pub cpe_block_symbols: usize,
    /// Accumulated `D·L` to undo, over every fibre the signal crossed.
    pub total_dispersion_ps_per_nm: f64,
    pub reference_wavelength_nm: f64,
    pub training_symbols: usize,
}

impl Default for DspConfig {
    fn default() -> Self {
        Self {
            eq_taps: 31,
            eq_step_size: 1e-3,
            eq_training_passes: 2,
            cpe_block_symbols: 64,
            total_dispersion_ps_per_nm: 0.0,
            reference_wavelength_nm: CUT_WAVELENGTH_NM,
            training_symbols: TRAINING_SYMBOLS,
        }
    }
}

impl DspConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("dsp: {m}")));
        if self.eq_taps < 3 || self.eq_taps % 2 == 0 {
            return bad("eq_taps must be odd and >= 3");
        }
        if !(self.eq_step_size > 0.0 && self.eq_step_size <= 0.1) {
            return bad("eq_step_size must be in (0, 0.1]");
        }
        if self.eq_training_passes < 1 {
            return bad("eq_training_passes must be >= 1");
        }
        if self.cpe_block_symbols < 8 {
            return bad("cpe_block_symbols must be >= 8");
        }
        if !self.total_dispersion_ps_per_nm.is_finite() {
            return bad("total dispersion must be finite");
        }
        if self.training_symbols < 1 {
            return bad("training_symbols must be >= 1");
        }
        Ok(())
    }
}

/// Brick-wall filter of one grid spacing around channel `index`, then shift to baseband.
pub fn select_channel(signal: &SignalBlock, grid: &ChannelGrid, index: usize) -> Result<SignalBlock> {
    grid.check_index(index)?;
    let offset = grid.offset_hz(index);
    let half = 0.5 * grid.spacing_hz();
    let fs = signal.sample_rate();
    let filtered = signal.map_polarizations(|p| {
        let mut buf = p.to_vec();
        spectral::filter_in_place(&mut buf, fs, |f| {
            let d = f - offset;
            if d >= -half && d < half {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        buf
    });
    Ok(filtered
        .frequency_shift(-offset)
        .with_center_frequency(grid.reference_frequency_hz() + offset))
}

/// Inverse of the fibre dispersion operator for the accumulated `D·L`.
pub fn cd_compensate(signal: &SignalBlock, dsp: &DspConfig) -> SignalBlock {
    if dsp.total_dispersion_ps_per_nm == 0.0 {
        return signal.clone();
    }
    // β₂ per km for D·L spread over 1 km is the accumulated β₂ L
    let beta2_acc = beta2_from_dispersion(dsp.total_dispersion_ps_per_nm, dsp.reference_wavelength_nm);
    let fs = signal.sample_rate();
    signal.map_polarizations(|p| {
        let mut buf = p.to_vec();
        spectral::filter_in_place(&mut buf, fs, |f| {
            let w = 2.0 * std::f64::consts::PI * f;
            Complex64::from_polar(1.0, -0.5 * beta2_acc * w * w)
        });
        buf
    })
}

/// Symbol-rate output of the full receiver chain.
#[derive(Debug, Clone)]
pub struct Recovered {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub symbol_rate: f64,
    pub center_frequency: f64,
    /// Integer-sample timing offset found by the training correlation.
    pub timing_offset: usize,
    pub phases_x: Vec<f64>,
    pub phases_y: Vec<f64>,
}

impl Recovered {
    /// Same header as the signal dump, one sample per symbol.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        write_header(&mut w, self.x.len(), self.symbol_rate, self.center_frequency)?;
        for (a, b) in self.x.iter().zip(&self.y) {
            for v in [a.re, a.im, b.re, b.im] {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Runs the whole chain on channel `index` of `signal`.
///
/// `known_x`/`known_y` are the transmitted symbols of that channel; the first
/// `dsp.training_symbols` of them drive timing and equalizer training.
pub fn receive(
    signal: &SignalBlock,
    grid: &ChannelGrid,
    index: usize,
    chain: &TxChain,
    dsp: &DspConfig,
    known_x: &[Complex64],
    known_y: &[Complex64],
) -> Result<Recovered> {
    dsp.validate()?;
    let ch = select_channel(signal, grid, index)?;
    let ch = cd_compensate(&ch, dsp);
    let t = dsp.training_symbols.min(known_x.len());
    let ds = matched_filter_downsample(&ch, chain, &known_x[..t], &known_y[..t])?;
    let (ex, ey) = equalize_2x2(&ds.x, &ds.y, known_x, known_y, dsp)?;
    let (x, phases_x) = carrier_phase_recover(&ex, known_x, dsp);
    let (y, phases_y) = carrier_phase_recover(&ey, known_y, dsp);
    Ok(Recovered {
        x,
        y,
        symbol_rate: chain.symbol_rate,
        center_frequency: ch.center_frequency(),
        timing_offset: ds.offset,
        phases_x,
        phases_y,
    })
}
