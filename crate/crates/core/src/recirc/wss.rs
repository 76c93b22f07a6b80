use crate::signal::{ChannelGrid, SignalBlock};
use crate::spectral;

/// Which grid channel owns baseband frequency `f` within a window of `width`.
fn channel_at(grid: &ChannelGrid, f: f64, width: f64) -> Option<usize> {
    let s = grid.spacing_hz();
    let cut = grid.cut_index() as f64;
    let k = (f / s + cut).round();
    if k < 0.0 || k >= grid.channel_count() as f64 {
        return None;
    }
    let k = k as usize;
    let d = f - grid.offset_hz(k);
    (d >= -0.5 * width && d < 0.5 * width).then_some(k)
}

/// Per-channel power in spacing-wide windows, from a spectrum pair.
pub(crate) fn channel_powers(grid: &ChannelGrid, fx: &[num_complex::Complex64], fy: &[num_complex::Complex64], fs: f64) -> Vec<f64> {
    let n = fx.len();
    let mut p = vec![0.0; grid.channel_count()];
    for k in 0..n {
        let f = spectral::bin_frequency(k, n, fs);
        if let Some(c) = channel_at(grid, f, grid.spacing_hz()) {
            p[c] += fx[k].norm_sqr() + fy[k].norm_sqr();
        }
    }
    let norm = 1.0 / (n as f64 * n as f64);
    p.into_iter().map(|v| v * norm).collect()
}

/// Ideal filter-bank equalizer.
///
/// Measures each channel in a spacing-wide window, attenuates every channel
/// to the weakest one and zeroes everything outside the grid passbands.
/// Returns the per-channel attenuation in dB.
pub fn wss_equalize(signal: &SignalBlock, grid: &ChannelGrid) -> (SignalBlock, Vec<f64>) {
    let fs = signal.sample_rate();
    let (mut x, mut y) = signal.clone().into_parts();
    spectral::forward(&mut x);
    spectral::forward(&mut y);
    let powers = channel_powers(grid, &x, &y, fs);
    let target = powers
        .iter()
        .cloned()
        .filter(|p| *p > 0.0)
        .fold(f64::INFINITY, f64::min);
    let gains: Vec<f64> = powers
        .iter()
        .map(|&p| if p > 0.0 { (target / p).sqrt() } else { 1.0 })
        .collect();
    let n = x.len();
    for k in 0..n {
        let f = spectral::bin_frequency(k, n, fs);
        let g = channel_at(grid, f, grid.passband_hz()).map_or(0.0, |c| gains[c]);
        x[k] *= g;
        y[k] *= g;
    }
    spectral::inverse(&mut x);
    spectral::inverse(&mut y);
    let atten = gains.iter().map(|g| -20.0 * g.log10()).collect();
    (SignalBlock::from_parts_unchecked(x, y, signal), atten)
}
