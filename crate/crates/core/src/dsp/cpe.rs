use num_complex::Complex64;

use super::DspConfig;

/// Data-aided block phase estimate `arg Σ r a*` per block of
/// `dsp.cpe_block_symbols`, removed from every symbol of the block.
/// Returns the corrected symbols and one phase per block.
pub fn carrier_phase_recover(
    symbols: &[Complex64],
    known: &[Complex64],
    dsp: &DspConfig,
) -> (Vec<Complex64>, Vec<f64>) {
    let block = dsp.cpe_block_symbols.max(1);
    let mut out = Vec::with_capacity(symbols.len());
    let mut phases = Vec::with_capacity(symbols.len().div_ceil(block));
    for (r, a) in symbols.chunks(block).zip(known.chunks(block).chain(std::iter::repeat(&[][..]))) {
        let corr: Complex64 = r.iter().zip(a).map(|(r, a)| r * a.conj()).sum();
        let phi = if corr.norm() > 0.0 { corr.arg() } else { 0.0 };
        let rot = Complex64::from_polar(1.0, -phi);
        out.extend(r.iter().map(|v| v * rot));
        phases.push(phi);
    }
    (out, phases)
}
