//! Reference computations shared by the integration tests. Nothing here
//! calls into the code paths it is used to check.

#![allow(dead_code)]

use std::f64::consts::PI;

use hcf_core::transmitter::ShapedConstellation;
use hcf_core::SignalBlock;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

pub const C: f64 = 299_792_458.0;
pub const H_PLANCK: f64 = 6.626_070_15e-34;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Circular complex Gaussian samples of total variance `var`.
pub fn gaussian(n: usize, var: f64, seed: u64) -> Vec<Complex64> {
    let mut r = rng(seed);
    let s = (var / 2.0).sqrt();
    (0..n)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut r);
            let b: f64 = StandardNormal.sample(&mut r);
            Complex64::new(s * a, s * b)
        })
        .collect()
}

pub fn uniform_phases(n: usize, seed: u64) -> Vec<Complex64> {
    let mut r = rng(seed);
    (0..n).map(|_| Complex64::from_polar(1.0, r.random::<f64>() * 2.0 * PI)).collect()
}

/// Unnormalized forward DFT via rustfft directly.
pub fn dft(v: &[Complex64]) -> Vec<Complex64> {
    let mut buf = v.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

pub fn idft(v: &[Complex64]) -> Vec<Complex64> {
    let mut buf = v.to_vec();
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    let n = buf.len() as f64;
    buf.iter().map(|x| x / n).collect()
}

pub fn bin_hz(k: usize, n: usize, fs: f64) -> f64 {
    let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
    k * fs / n as f64
}

/// Frequency of the strongest DFT bin.
pub fn peak_frequency(v: &[Complex64], fs: f64) -> f64 {
    let spec = dft(v);
    let k = (0..spec.len())
        .max_by(|&a, &b| spec[a].norm_sqr().total_cmp(&spec[b].norm_sqr()))
        .unwrap();
    bin_hz(k, v.len(), fs)
}

/// Frequencies of local spectral maxima that stand out from a smoothed
/// spectrum, strongest first.
pub fn spectral_peaks(v: &[Complex64], fs: f64, count: usize, smooth_bins: usize) -> Vec<f64> {
    let n = v.len();
    let spec: Vec<f64> = dft(v).iter().map(|c| c.norm_sqr()).collect();
    // circular moving average
    let smooth: Vec<f64> = (0..n)
        .map(|k| {
            (0..=2 * smooth_bins)
                .map(|j| spec[(k + n + j - smooth_bins) % n])
                .sum::<f64>()
                / (2 * smooth_bins + 1) as f64
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| smooth[b].total_cmp(&smooth[a]));
    let min_sep = 4 * smooth_bins;
    let mut picked: Vec<usize> = Vec::new();
    for k in order {
        if picked.iter().all(|&p| {
            let d = (k as isize - p as isize).unsigned_abs();
            d.min(n - d) > min_sep
        }) {
            picked.push(k);
            if picked.len() == count {
                break;
            }
        }
    }
    picked.into_iter().map(|k| bin_hz(k, n, fs)).collect()
}

/// Width of the narrowest band centred on 0 Hz holding `fraction` of the energy.
pub fn centered_bandwidth(v: &[Complex64], fs: f64, fraction: f64) -> f64 {
    let n = v.len();
    let spec: Vec<f64> = dft(v).iter().map(|c| c.norm_sqr()).collect();
    let total: f64 = spec.iter().sum();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| bin_hz(a, n, fs).abs().total_cmp(&bin_hz(b, n, fs).abs()));
    let mut acc = 0.0;
    for k in order {
        acc += spec[k];
        if acc >= fraction * total {
            return 2.0 * bin_hz(k, n, fs).abs();
        }
    }
    fs
}

/// Energy-weighted RMS width of `|a|²` on a uniform time grid.
pub fn rms_width(a: &[Complex64], dt: f64) -> f64 {
    let w: Vec<f64> = a.iter().map(|v| v.norm_sqr()).collect();
    let e: f64 = w.iter().sum();
    let t = |i: usize| i as f64 * dt;
    let mean = w.iter().enumerate().map(|(i, p)| t(i) * p).sum::<f64>() / e;
    let var = w.iter().enumerate().map(|(i, p)| (t(i) - mean).powi(2) * p).sum::<f64>() / e;
    var.sqrt()
}

pub fn rel_rms_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn signal_rel_error(a: &SignalBlock, b: &SignalBlock) -> f64 {
    let mut pa = a.x().to_vec();
    pa.extend_from_slice(a.y());
    let mut pb = b.x().to_vec();
    pb.extend_from_slice(b.y());
    rel_rms_error(&pa, &pb)
}

/// Best SNR of `a` against `b` after a complex LS scalar, in dB.
pub fn waveform_snr_db(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    let h = num / den;
    let err: f64 = a.iter().zip(b).map(|(x, y)| (x - h * y).norm_sqr()).sum();
    10.0 * (h.norm_sqr() * den / err).log10()
}

/// Plain ASE OSNR of one amplifier in 0.1 nm: `P_ch / (G-1)/G NF hν B_ref`,
/// referred to the output.
pub fn single_amp_osnr_db(p_in_ch_dbm: f64, gain_db: f64, nf_db: f64, freq_hz: f64) -> f64 {
    let g = 10f64.powf(gain_db / 10.0);
    let nf = 10f64.powf(nf_db / 10.0);
    let p_out = 1e-3 * 10f64.powf(p_in_ch_dbm / 10.0) * g;
    let ase = (g - 1.0) * nf * H_PLANCK * freq_hz * 12.5e9;
    10.0 * (p_out / ase).log10()
}

/// `1/OSNR = Σ 1/OSNR_i`.
pub fn cascade_osnr_db(stages_db: &[f64]) -> f64 {
    let inv: f64 = stages_db.iter().map(|o| 10f64.powf(-o / 10.0)).sum();
    -10.0 * inv.log10()
}

/// Gauss–Hermite nodes and weights for `∫ e^{-x²} f(x) dx` (Newton on the
/// orthonormal recurrence).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pim4 = PI.powf(-0.25);
    let m = n.div_ceil(2);
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-14 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Bit-metric GMI of a labelled constellation on AWGN of total noise
/// variance `sigma2`, by 2-D Gauss–Hermite quadrature over the noise.
pub fn gmi_quadrature(c: &ShapedConstellation, sigma2: f64, nodes: usize) -> f64 {
    let (u, w) = gauss_hermite(nodes);
    let pts = c.points();
    let probs = c.probabilities();
    let labels = c.labels();
    let bits = c.bits_per_symbol();
    let s = sigma2.sqrt();
    let mut loss = 0.0;
    for (i, &xi) in pts.iter().enumerate() {
        let mut inner = 0.0;
        for (a, wa) in u.iter().zip(&w) {
            for (b, wb) in u.iter().zip(&w) {
                let y = xi + Complex64::new(s * a, s * b);
                let logq: Vec<f64> = pts
                    .iter()
                    .zip(probs)
                    .map(|(p, pr)| pr.ln() - (y - p).norm_sqr() / sigma2)
                    .collect();
                let top = logq.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lin: Vec<f64> = logq.iter().map(|l| (l - top).exp()).collect();
                let total: f64 = lin.iter().sum();
                let mut l = 0.0;
                for k in 0..bits {
                    let bit = labels[i] >> k & 1;
                    let same: f64 = lin
                        .iter()
                        .zip(labels)
                        .filter(|(_, &lab)| lab >> k & 1 == bit)
                        .map(|(v, _)| v)
                        .sum();
                    l += (total / same).log2();
                }
                inner += wa * wb * l;
            }
        }
        loss += probs[i] * inner / PI;
    }
    c.entropy_bits() - loss
}

/// Noisy copies of i.i.d. draws from `c` at `snr_db` (signal energy 1).
pub fn awgn_symbols(c: &ShapedConstellation, n: usize, snr_db: f64, seed: u64) -> (Vec<Complex64>, Vec<Complex64>) {
    let idx = hcf_core::transmitter::draw_shaped_symbols(c, n, seed);
    let tx = c.map(&idx);
    let noise = gaussian(n, 10f64.powf(-snr_db / 10.0), seed ^ 0x5eed);
    let rx = tx.iter().zip(&noise).map(|(a, z)| a + z).collect();
    (tx, rx)
}

/// Plug-in entropy of an index sequence, in bits.
pub fn empirical_entropy(indices: &[usize], alphabet: usize) -> f64 {
    let mut counts = vec![0usize; alphabet];
    for &i in indices {
        counts[i] += 1;
    }
    let n = indices.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}
