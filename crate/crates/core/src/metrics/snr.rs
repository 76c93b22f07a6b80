use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reported in place of +∞ when the residual vanishes.
pub const SNR_CAP_DB: f64 = 60.0;

/// Least-squares complex gain `h` with `rx ≈ h tx`.
pub(crate) fn ls_gain(rx: &[Complex64], tx: &[Complex64]) -> Complex64 {
    let num: Complex64 = rx.iter().zip(tx).map(|(r, a)| r * a.conj()).sum();
    let den: f64 = tx.iter().map(|a| a.norm_sqr()).sum();
    num / den
}

fn check(rx: &[&[Complex64]], tx: &[&[Complex64]]) -> Result<()> {
    if rx.len() != tx.len() || rx.is_empty() {
        return Err(Error::LengthMismatch(rx.len(), tx.len()));
    }
    for (r, a) in rx.iter().zip(tx) {
        if r.len() != a.len() {
            return Err(Error::LengthMismatch(r.len(), a.len()));
        }
        if r.is_empty() {
            return Err(Error::EmptySignal);
        }
    }
    Ok(())
}

/// Received symbols rescaled by the per-polarization LS gain.
pub(crate) fn descaled(rx: &[&[Complex64]], tx: &[&[Complex64]]) -> Result<Vec<Vec<Complex64>>> {
    check(rx, tx)?;
    rx.iter()
        .zip(tx)
        .map(|(r, a)| {
            let h = ls_gain(r, a);
            if !(h.norm() > 0.0) || !h.is_finite() {
                return Err(Error::ZeroPower);
            }
            Ok(r.iter().map(|v| v / h).collect())
        })
        .collect()
}

/// Post-DSP SNR: per-polarization LS scalar fit, signal and error energy
/// pooled over polarizations. Capped at [`SNR_CAP_DB`].
pub fn estimate_snr(rx: &[&[Complex64]], tx: &[&[Complex64]]) -> Result<f64> {
    let fitted = descaled(rx, tx)?;
    let mut sig = 0.0;
    let mut err = 0.0;
    for (r, a) in fitted.iter().zip(tx) {
        sig += a.iter().map(|v| v.norm_sqr()).sum::<f64>();
        err += r.iter().zip(a.iter()).map(|(r, a)| (r - a).norm_sqr()).sum::<f64>();
    }
    if sig <= 0.0 {
        return Err(Error::ZeroPower);
    }
    if err <= 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (sig / err).log10()).min(SNR_CAP_DB))
}
