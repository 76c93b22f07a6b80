use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::SignalBlock;
use crate::spectral;
use crate::transmitter::{circular_filter, rrc_taps, TxChain};

/// Minimum normalized training correlation accepted as a lock. Noise alone
/// peaks near 0.05 with 4096 training symbols; a clean signal gives 1.
pub const SYNC_THRESHOLD: f64 = 0.15;

/// Two-samples-per-symbol sequence aligned to the training prefix.
#[derive(Debug, Clone)]
pub struct Downsampled {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    /// Input-rate sample offset of symbol 0.
    pub offset: usize,
    /// Normalized correlation at the chosen offset.
    pub correlation: f64,
}

/// Circular cross-correlation `c[d] = Σ_m s[m + d] r*[m]`, for all `d`.
fn xcorr(s_spec: &[Complex64], r_spec: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = s_spec.iter().zip(r_spec).map(|(a, b)| a * b.conj()).collect();
    spectral::inverse(&mut c);
    c
}

fn training_comb(training: &[Complex64], n: usize, sps: usize) -> Vec<Complex64> {
    let mut r = vec![Complex64::new(0.0, 0.0); n];
    for (k, &a) in training.iter().enumerate() {
        r[(k * sps) % n] = a;
    }
    spectral::forward(&mut r);
    r
}

/// Keeps the `m` lowest-frequency bins of an `n`-point spectrum and returns to time domain.
fn resample(spec: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = spec.len();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let keep = m.min(n);
    let pos = keep.div_ceil(2);
    let neg = keep - pos;
    out[..pos].copy_from_slice(&spec[..pos]);
    // the bin at exactly -m/2 is ambiguous for even m; leave it empty
    let neg = if m % 2 == 0 && neg > 0 && pos + neg == m { neg - 1 } else { neg };
    for j in 1..=neg {
        out[m - j] = spec[n - j];
    }
    spectral::inverse(&mut out);
    let scale = m as f64 / n as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

/// RRC matched filter, training-correlation timing, resampling to 2 samples/symbol.
///
/// The correlation searches every integer sample delay, combining the four
/// (received, transmitted) polarization pairs so that a polarization rotation
/// does not hide the lock.
pub fn matched_filter_downsample(
    signal: &SignalBlock,
    chain: &TxChain,
    training_x: &[Complex64],
    training_y: &[Complex64],
) -> Result<Downsampled> {
    chain.validate()?;
    let sps = chain.samples_per_symbol;
    let n = signal.len();
    if n % sps != 0 {
        return Err(Error::InvalidParameter(format!(
            "signal length {n} is not a multiple of {sps} samples/symbol"
        )));
    }
    if training_x.is_empty() || training_x.len() != training_y.len() {
        return Err(Error::LengthMismatch(training_x.len(), training_y.len()));
    }
    let taps = rrc_taps(chain.rrc_rolloff, chain.rrc_span_symbols, sps);
    let mut fx = circular_filter(signal.x(), &taps);
    let mut fy = circular_filter(signal.y(), &taps);
    spectral::forward(&mut fx);
    spectral::forward(&mut fy);

    let rx = training_comb(training_x, n, sps);
    let ry = training_comb(training_y, n, sps);
    let t = training_x.len() as f64;
    let e_rx = spectral::energy(training_x);
    let e_ry = spectral::energy(training_y);
    // per-sample power of each received polarization (Parseval on the spectra)
    let p_x = spectral::energy(&fx) / (n as f64 * n as f64);
    let p_y = spectral::energy(&fy) / (n as f64 * n as f64);

    let mut score = vec![0.0; n];
    for (s_spec, p) in [(&fx, p_x), (&fy, p_y)] {
        if p <= 0.0 {
            continue;
        }
        for (r_spec, e) in [(&rx, e_rx), (&ry, e_ry)] {
            if e <= 0.0 {
                continue;
            }
            let c = xcorr(s_spec, r_spec);
            for (acc, v) in score.iter_mut().zip(&c) {
                *acc += v.norm_sqr() / (t * p * e);
            }
        }
    }
    let (offset, best) = score
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let correlation = (best.max(0.0) / 2.0).sqrt();
    if !(correlation >= SYNC_THRESHOLD) {
        return Err(Error::SyncFailed(if correlation.is_finite() { correlation } else { 0.0 }));
    }

    // advance by `offset` samples: multiply spectrum by exp(+i 2π k offset / n)
    let shift = |spec: &mut [Complex64]| {
        for (k, v) in spec.iter_mut().enumerate() {
            let turns = ((k * offset) % n) as f64 / n as f64;
            *v *= Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * turns);
        }
    };
    shift(&mut fx);
    shift(&mut fy);
    let m = 2 * (n / sps);
    Ok(Downsampled {
        x: resample(&fx, m),
        y: resample(&fy, m),
        offset,
        correlation,
    })
}
