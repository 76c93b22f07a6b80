use crate::error::{Error, Result};
use crate::recirc::OSNR_REFERENCE_BANDWIDTH_HZ;
use crate::signal::{ChannelGrid, SignalBlock};
use crate::spectral;

/// Reported when no noise is found in the guard bands.
pub const OSNR_CAP_DB: f64 = 60.0;

/// Fraction of each guard band trimmed at both ends, away from signal
/// skirts and filter edges.
const GUARD_MARGIN: f64 = 0.15;

/// Spectral OSNR per channel in the 12.5-GHz reference bandwidth.
///
/// Noise PSD is the mean PSD of the guard bands on both sides of a channel
/// (those inside the simulated band); signal power is the in-band power
/// minus that noise level over the occupied bandwidth.
pub fn measure_osnr(signal: &SignalBlock, grid: &ChannelGrid) -> Result<Vec<f64>> {
    let occ = grid.occupied_bandwidth_hz();
    let spacing = grid.spacing_hz();
    let gap = 0.5 * (spacing - occ);
    if !(gap > 0.0) || !(occ > 0.0) {
        return Err(Error::OsnrNotMeasurable);
    }
    let guard_lo = 0.5 * occ + GUARD_MARGIN * gap;
    let guard_hi = 0.5 * spacing - GUARD_MARGIN * gap;

    let n = signal.len();
    let fs = signal.sample_rate();
    let df = fs / n as f64;
    let mut fx = signal.x().to_vec();
    let mut fy = signal.y().to_vec();
    spectral::forward(&mut fx);
    spectral::forward(&mut fy);
    // power per bin, so that the bins sum to the mean power
    let norm = 1.0 / (n as f64 * n as f64);
    let psd: Vec<f64> = fx
        .iter()
        .zip(&fy)
        .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()) * norm)
        .collect();
    let freqs = spectral::frequencies(n, fs);

    (0..grid.channel_count())
        .map(|k| {
            let fc = grid.offset_hz(k);
            let mut in_band = 0.0;
            let mut in_bins = 0usize;
            let mut guard = 0.0;
            let mut guard_bins = 0usize;
            for (p, &f) in psd.iter().zip(&freqs) {
                let d = (f - fc).abs();
                if d < 0.5 * occ {
                    in_band += p;
                    in_bins += 1;
                } else if d >= guard_lo && d <= guard_hi {
                    guard += p;
                    guard_bins += 1;
                }
            }
            if guard_bins == 0 {
                return Err(Error::OsnrNotMeasurable);
            }
            // noise power per Hz, both polarizations
            let noise_psd = guard / guard_bins as f64 / df;
            let noise_in_band = noise_psd * in_bins as f64 * df;
            let sig = in_band - noise_in_band;
            if noise_psd <= 0.0 {
                return Ok(OSNR_CAP_DB);
            }
            let ratio = sig.max(0.0) / (noise_psd * OSNR_REFERENCE_BANDWIDTH_HZ);
            Ok((10.0 * ratio.max(1e-6).log10()).min(OSNR_CAP_DB))
        })
        .collect()
}
