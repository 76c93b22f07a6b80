use num_complex::Complex64;

use super::snr::{descaled, SNR_CAP_DB};
use crate::error::{Error, Result};
use crate::transmitter::ShapedConstellation;

/// Smallest pooled symbol count accepted by [`estimate_gmi`].
pub const MIN_GMI_SYMBOLS: usize = 4096;

/// Per-symbol bit-metric loss `Σ_k log2(Σ_c p q / Σ_{c: b_k(c) = b_k(tx)} p q)`
/// for a circular Gaussian `q` of variance `sigma2`.
pub(crate) fn bit_metric_loss(
    c: &ShapedConstellation,
    r: Complex64,
    tx_label: u32,
    sigma2: f64,
    metric: &mut Vec<f64>,
) -> f64 {
    let bits = c.bits_per_symbol();
    metric.clear();
    metric.extend(
        c.points()
            .iter()
            .zip(c.probabilities())
            .map(|(p, &w)| w.ln() - (r - p).norm_sqr() / sigma2),
    );
    let top = metric.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut matched = vec![0.0; bits];
    for (m, &label) in metric.iter().zip(c.labels()) {
        let v = (m - top).exp();
        total += v;
        let agree = !(label ^ tx_label);
        for (k, acc) in matched.iter_mut().enumerate() {
            if agree >> k & 1 == 1 {
                *acc += v;
            }
        }
    }
    matched.iter().map(|m| (total / m).log2()).sum()
}

/// GMI per polarization (bits/symbol) with a shaped prior and circular
/// Gaussian auxiliary channel; noise variance from LS-fit residuals.
pub fn estimate_gmi(rx: &[&[Complex64]], tx: &[&[Complex64]], constellation: &ShapedConstellation) -> Result<f64> {
    let fitted = descaled(rx, tx)?;
    let n: usize = tx.iter().map(|a| a.len()).sum();
    if n < MIN_GMI_SYMBOLS {
        return Err(Error::InsufficientSampleSize {
            got: n,
            need: MIN_GMI_SYMBOLS,
        });
    }
    let mut err = 0.0;
    let mut sig = 0.0;
    for (r, a) in fitted.iter().zip(tx) {
        err += r.iter().zip(a.iter()).map(|(r, a)| (r - a).norm_sqr()).sum::<f64>();
        sig += a.iter().map(|v| v.norm_sqr()).sum::<f64>();
    }
    let floor = sig / n as f64 * 10f64.powf(-SNR_CAP_DB / 10.0);
    let sigma2 = (err / n as f64).max(floor);

    let mut metric = Vec::with_capacity(constellation.points().len());
    let mut loss = 0.0;
    for (r, a) in fitted.iter().zip(tx) {
        for (&rv, &av) in r.iter().zip(a.iter()) {
            let label = constellation.labels()[constellation.nearest_index(av)];
            loss += bit_metric_loss(constellation, rv, label, sigma2, &mut metric);
        }
    }
    let h = constellation.entropy_bits();
    Ok((h - loss / n as f64).clamp(0.0, h))
}

/// Dual-polarization AIR in Gb/s: `2 R_s GMI`.
pub fn compute_air(gmi_per_pol: f64, symbol_rate_baud: f64) -> f64 {
    2.0 * symbol_rate_baud * gmi_per_pol.max(0.0) / 1e9
}

/// `1 - (H - GMI) / log2(M)`.
pub fn ngmi(gmi: f64, entropy_bits: f64, base_order: usize) -> f64 {
    (1.0 - (entropy_bits - gmi) / (base_order as f64).log2()).clamp(0.0, 1.0)
}
