//! FFT plumbing shared by every frequency-domain stage.
//!
//! Transforms are unnormalized forward / normalized inverse, so that
//! `inverse(forward(x)) == x`. Bin `k` of an `n`-point transform maps to
//! frequency `k * fs / n` for `k < n/2` and `(k - n) * fs / n` otherwise.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward DFT (no scaling).
pub fn forward(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(buf);
}

/// In-place inverse DFT, scaled by `1/n`.
pub fn inverse(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    fft.process(buf);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Frequency in Hz of bin `k` for an `n`-point transform at `sample_rate`.
#[inline]
pub fn bin_frequency(k: usize, n: usize, sample_rate: f64) -> f64 {
    let df = sample_rate / n as f64;
    if k < n.div_ceil(2) {
        k as f64 * df
    } else {
        (k as f64 - n as f64) * df
    }
}

/// Baseband frequencies (Hz) of all bins, in FFT order.
pub fn frequencies(n: usize, sample_rate: f64) -> Vec<f64> {
    (0..n).map(|k| bin_frequency(k, n, sample_rate)).collect()
}

/// Angular frequencies (rad/s) of all bins, in FFT order.
pub fn angular_frequencies(n: usize, sample_rate: f64) -> Vec<f64> {
    frequencies(n, sample_rate)
        .into_iter()
        .map(|f| 2.0 * PI * f)
        .collect()
}

/// Multiplies the spectrum of `buf` by `response(f)` and returns to time domain.
pub fn filter_in_place<F>(buf: &mut [Complex64], sample_rate: f64, mut response: F)
where
    F: FnMut(f64) -> Complex64,
{
    let n = buf.len();
    forward(buf);
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= response(bin_frequency(k, n, sample_rate));
    }
    inverse(buf);
}

/// Pairwise summation; result does not depend on the caller's grouping beyond rounding.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 16 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

pub fn energy(samples: &[Complex64]) -> f64 {
    let sq: Vec<f64> = samples.iter().map(|v| v.norm_sqr()).collect();
    pairwise_sum(&sq)
}
