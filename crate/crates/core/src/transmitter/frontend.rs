//! Transmitter electrical bandwidth, digital pre-emphasis and laser phase noise.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};

use super::TxChain;
use crate::signal::SignalBlock;
use crate::{seed, spectral};

/// Maximum boost of the pre-emphasis filter.
pub const PREEMPHASIS_CLIP_DB: f64 = 10.0;

const BESSEL5: [f64; 6] = [945.0, 945.0, 420.0, 105.0, 15.0, 1.0];

fn bessel5_normalized(w: f64) -> Complex64 {
    let s = Complex64::new(0.0, w);
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in BESSEL5.iter().rev() {
        acc = acc * s + c;
    }
    BESSEL5[0] / acc
}

/// 3-dB frequency (rad/s) of the unit-delay 5th-order Bessel prototype.
fn bessel5_w3db() -> f64 {
    static W3: OnceLock<f64> = OnceLock::new();
    *W3.get_or_init(|| {
        let (mut lo, mut hi) = (0.5, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if bessel5_normalized(mid).norm_sqr() > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

/// 5th-order Bessel low-pass with 3-dB point at `bandwidth_hz`, bulk delay removed.
pub fn bessel_response(f_hz: f64, bandwidth_hz: f64) -> Complex64 {
    let w3 = bessel5_w3db();
    let w = f_hz / bandwidth_hz * w3;
    // prototype group delay at DC is 1, i.e. w3/ω_c seconds after scaling
    bessel5_normalized(w) * Complex64::from_polar(1.0, w)
}

/// Inverse of the Bessel response with its magnitude clipped at +10 dB.
pub fn preemphasis_response(f_hz: f64, bandwidth_hz: f64) -> Complex64 {
    let inv = 1.0 / bessel_response(f_hz, bandwidth_hz);
    let clip = 10f64.powf(PREEMPHASIS_CLIP_DB / 20.0);
    if inv.norm() > clip {
        inv / inv.norm() * clip
    } else {
        inv
    }
}

/// Combined electrical response of the transmitter at baseband frequency `f_hz`.
pub fn frontend_response(f_hz: f64, chain: &TxChain) -> Complex64 {
    let h = bessel_response(f_hz, chain.tx_bandwidth_hz);
    if chain.preemphasis_enabled {
        h * preemphasis_response(f_hz, chain.tx_bandwidth_hz)
    } else {
        h
    }
}

/// Wiener phase walk with per-sample increment variance `2π Δν / fs`.
pub fn laser_phase_walk(len: usize, linewidth_hz: f64, sample_rate: f64, seed: u64) -> Vec<f64> {
    let sigma = (2.0 * PI * linewidth_hz / sample_rate).sqrt();
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let mut rng = seed::rng(seed);
    let mut phi = 0.0;
    (0..len)
        .map(|_| {
            let cur = phi;
            phi += normal.sample(&mut rng);
            cur
        })
        .collect()
}

/// Applies pre-emphasis (optional), the Bessel low-pass and laser phase noise.
///
/// Phase noise is seeded from the signal's `seed_tag` and common to both
/// polarizations.
pub fn apply_tx_frontend(signal: &SignalBlock, chain: &TxChain) -> SignalBlock {
    let fs = signal.sample_rate();
    let mut out = signal.map_polarizations(|p| {
        let mut buf = p.to_vec();
        spectral::filter_in_place(&mut buf, fs, |f| frontend_response(f, chain));
        buf
    });
    if chain.laser_linewidth_hz > 0.0 {
        let phases = laser_phase_walk(
            signal.len(),
            chain.laser_linewidth_hz,
            fs,
            seed::derive(signal.seed_tag(), &[0x1A5E]),
        );
        out = out.map_polarizations(|p| {
            p.iter()
                .zip(&phases)
                .map(|(v, &ph)| v * Complex64::from_polar(1.0, ph))
                .collect()
        });
    }
    out
}
