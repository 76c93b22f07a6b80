mod common;

use std::f64::consts::PI;

use hcf_core::transmitter::*;
use hcf_core::{ChannelGrid, Error, SignalBlock};
use num_complex::Complex64;

use common::*;

const F0: f64 = 192.25e12;

#[test]
fn full_entropy_gives_uniform_qam() {
    let c = mb_shape_constellation(6.0, 64).unwrap();
    assert_eq!(c.nu(), 0.0);
    let u = ShapedConstellation::uniform(64).unwrap();
    assert_eq!(c.points(), u.points());
    assert!((c.entropy_bits() - 6.0).abs() < 1e-12);
}

#[test]
fn shaped_entropy_and_energy() {
    let c = mb_shape_constellation(5.7, 64).unwrap();
    let h: f64 = c.probabilities().iter().map(|p| -p * p.log2()).sum();
    assert!((h - 5.7).abs() < 1e-6, "{h}");
    let e: f64 = c.points().iter().zip(c.probabilities()).map(|(x, p)| p * x.norm_sqr()).sum();
    assert!((e - 1.0).abs() < 1e-9);
    assert!(c.nu() > 0.0);
    let corner = c.nearest_index(Complex64::new(10.0, 10.0));
    let inner = c.nearest_index(Complex64::new(0.01, 0.01));
    assert!(c.probabilities()[corner] < c.probabilities()[inner]);
}

#[test]
fn entropy_above_log2m_is_rejected() {
    assert!(matches!(mb_shape_constellation(6.01, 64), Err(Error::EntropyExceedsLog2M { .. })));
    assert!(mb_shape_constellation(4.0, 32).is_err());
}

#[test]
fn gray_labels_differ_in_one_bit_between_neighbours() {
    let c = ShapedConstellation::uniform(64).unwrap();
    let pts = c.points();
    let step = pts.iter().map(|p| p.re).fold(f64::INFINITY, |m, v| m.min(v.abs())) * 2.0;
    for (i, a) in pts.iter().enumerate() {
        for (j, b) in pts.iter().enumerate() {
            if ((a - b).norm() - step).abs() < 1e-9 {
                assert_eq!((c.labels()[i] ^ c.labels()[j]).count_ones(), 1);
            }
        }
    }
}

#[test]
fn drawn_symbols_follow_the_distribution() {
    let n = 1_000_000;
    let u = ShapedConstellation::uniform(64).unwrap();
    let hu = empirical_entropy(&draw_shaped_symbols(&u, n, 11), 64);
    assert!((hu - 6.0).abs() < 0.01, "{hu}");

    let c = mb_shape_constellation(5.7, 64).unwrap();
    let idx = draw_shaped_symbols(&c, n, 12);
    let hs = empirical_entropy(&idx, 64);
    assert!((hs - 5.7).abs() < 0.01, "{hs}");
    let e = c.map(&idx).iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
    assert!((e - 1.0).abs() < 0.01, "{e}");
}

fn chain(sps: usize) -> TxChain {
    TxChain::with_symbol_rate(16e9, sps)
}

#[test]
fn single_symbol_reproduces_the_pulse() {
    let ch = chain(4);
    let n = 128;
    let mut sx = vec![Complex64::new(0.0, 0.0); n];
    sx[n / 2] = Complex64::new(1.0, 0.0);
    let s = pulse_shape_rrc(&sx, &sx, &ch).unwrap();
    let taps = rrc_taps(0.1, 32, 4);
    let half = taps.len() / 2;
    for (j, h) in taps.iter().enumerate() {
        let idx = (n / 2 * 4 + j - half) % (n * 4);
        assert!((s.x()[idx].re - h).abs() < 1e-12);
    }
    let e: f64 = taps.iter().map(|v| v * v).sum();
    assert!((e - 1.0).abs() < 1e-12);
}

#[test]
fn matched_filter_output_has_low_isi() {
    let ch = chain(4);
    let n = 4096;
    let c = ShapedConstellation::uniform(64).unwrap();
    let sx = c.map(&draw_shaped_symbols(&c, n, 3));
    let s = pulse_shape_rrc(&sx, &sx, &ch).unwrap();
    // matched filter by direct circular convolution with the time-reversed pulse
    let taps = rrc_taps(0.1, 32, 4);
    let half = taps.len() as isize / 2;
    let len = s.len() as isize;
    let sampled: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = (k * 4) as isize;
            taps.iter()
                .enumerate()
                .map(|(j, h)| s.x()[(t + j as isize - half).rem_euclid(len) as usize] * h)
                .sum()
        })
        .collect();
    let snr = waveform_snr_db(&sampled, &sx);
    assert!(snr >= 35.0, "ISI at {snr} dB");
}

/// 99% energy bandwidth of a raised-cosine power spectrum.
fn raised_cosine_99(rs: f64, rolloff: f64) -> f64 {
    let psd = |f: f64| {
        let a = f.abs() / rs;
        let (lo, hi) = ((1.0 - rolloff) / 2.0, (1.0 + rolloff) / 2.0);
        if a <= lo {
            1.0
        } else if a <= hi {
            0.5 * (1.0 + (PI / rolloff * (a - lo)).cos())
        } else {
            0.0
        }
    };
    let steps = 200_000;
    let edge = rs * (1.0 + rolloff) / 2.0;
    let df = edge / steps as f64;
    let total: f64 = (0..steps).map(|i| psd((i as f64 + 0.5) * df)).sum();
    let mut acc = 0.0;
    for i in 0..steps {
        acc += psd((i as f64 + 0.5) * df);
        if acc >= 0.99 * total {
            return 2.0 * (i as f64 + 1.0) * df;
        }
    }
    2.0 * edge
}

#[test]
fn occupied_bandwidth_matches_raised_cosine() {
    let ch = chain(4);
    let c = ShapedConstellation::uniform(64).unwrap();
    let sx = c.map(&draw_shaped_symbols(&c, 1 << 14, 5));
    let s = pulse_shape_rrc(&sx, &sx, &ch).unwrap();
    let measured = centered_bandwidth(s.x(), s.sample_rate(), 0.99);
    let oracle = raised_cosine_99(16e9, 0.1);
    assert!(((measured - oracle) / oracle).abs() < 0.02, "{measured} vs {oracle}");
    assert!(measured <= ch.occupied_bandwidth_hz());
}

#[test]
fn transparent_frontend_is_identity() {
    let mut ch = chain(4);
    ch.tx_bandwidth_hz = 1e18;
    ch.preemphasis_enabled = false;
    ch.laser_linewidth_hz = 0.0;
    let s = SignalBlock::new(gaussian(2048, 1.0, 1), gaussian(2048, 1.0, 2), ch.sample_rate(), F0, 0).unwrap();
    let out = apply_tx_frontend(&s, &ch);
    assert!(signal_rel_error(&out, &s) < 1e-6);
}

#[test]
fn preemphasis_flattens_the_bessel_response() {
    let mut ch = chain(4);
    ch.laser_linewidth_hz = 0.0;
    let n = 4096;
    let fs = ch.sample_rate();
    let input = gaussian(n, 1.0, 4);
    let s = SignalBlock::new(input.clone(), input.clone(), fs, F0, 0).unwrap();
    let out = apply_tx_frontend(&s, &ch);
    let (a, b) = (dft(&input), dft(out.x()));
    for k in 0..n {
        let f = bin_hz(k, n, fs);
        if f.abs() <= 0.8 * ch.tx_bandwidth_hz {
            let db = 10.0 * (b[k].norm_sqr() / a[k].norm_sqr()).log10();
            assert!(db.abs() < 0.1, "{db} dB at {f}");
        }
    }
    // without pre-emphasis the 3-dB point is where it is declared
    ch.preemphasis_enabled = false;
    let h = frontend_response(ch.tx_bandwidth_hz, &ch);
    assert!((h.norm_sqr() - 0.5).abs() < 1e-9);
}

#[test]
fn laser_phase_increments_have_the_wiener_variance() {
    let mut ch = chain(4);
    ch.tx_bandwidth_hz = 1e18;
    ch.preemphasis_enabled = false;
    let n = 1_000_000;
    let fs = ch.sample_rate();
    let cw = vec![Complex64::new(1.0, 0.0); n];
    let s = SignalBlock::new(cw.clone(), cw, fs, F0, 77).unwrap();
    let out = apply_tx_frontend(&s, &ch);
    let inc: Vec<f64> = out.x().windows(2).map(|w| (w[1] * w[0].conj()).arg()).collect();
    let mean = inc.iter().sum::<f64>() / inc.len() as f64;
    let var = inc.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / inc.len() as f64;
    let expected = 2.0 * PI * 100e3 / fs;
    assert!(((var - expected) / expected).abs() < 0.05, "{var} vs {expected}");
    // common to both polarizations
    for (a, b) in out.x().iter().zip(out.y()).take(1000) {
        assert!((a - b).norm() < 1e-15);
    }
}

fn shaped_channel(seed: u64, sps: usize, n: usize) -> SignalBlock {
    let ch = chain(sps);
    let c = mb_shape_constellation(5.7, 64).unwrap();
    let sx = c.map(&draw_shaped_symbols(&c, n, seed));
    let sy = c.map(&draw_shaped_symbols(&c, n, seed + 100));
    pulse_shape_rrc(&sx, &sy, &ch).unwrap()
}

#[test]
fn single_channel_multiplex_is_identity() {
    let s = shaped_channel(1, 4, 512);
    let grid = ChannelGrid::uniform(1, 25e9, 1559.39).unwrap();
    let out = wdm_multiplex(std::slice::from_ref(&s), &grid).unwrap();
    assert!(signal_rel_error(&out, &s) < 1e-12);
}

#[test]
fn disjoint_channels_add_energy() {
    let grid = ChannelGrid::uniform(3, 20e9, 1559.39).unwrap();
    // strictly band-limited, so the shifted spectra cannot overlap
    let (n, fs) = (6144, 96e9);
    let band = |seed: u64| {
        let mut spec = dft(&gaussian(n, 1.0 + seed as f64, seed));
        for (k, v) in spec.iter_mut().enumerate() {
            if bin_hz(k, n, fs).abs() > 8.8e9 {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        idft(&spec)
    };
    let chans: Vec<SignalBlock> = (0..3)
        .map(|k| SignalBlock::new(band(10 + k), band(20 + k), fs, F0, 0).unwrap())
        .collect();
    let out = wdm_multiplex(&chans, &grid).unwrap();
    let sum: f64 = chans.iter().map(|c| c.energy()).sum();
    assert!((out.energy() / sum - 1.0).abs() < 1e-9, "{}", out.energy() / sum - 1.0);
}

#[test]
fn channels_land_on_the_grid() {
    let grid = ChannelGrid::uniform(3, 25e9, 1559.39).unwrap();
    // pure tones at baseband, so each channel is a single spectral line
    let n = 4096;
    let fs = 96e9;
    let tones: Vec<SignalBlock> = (0..3)
        .map(|_| {
            let v = vec![Complex64::new(1.0, 0.0); n];
            SignalBlock::new(v.clone(), v, fs, F0, 0).unwrap()
        })
        .collect();
    let out = wdm_multiplex(&tones, &grid).unwrap();
    let mut peaks = spectral_peaks(out.x(), fs, 3, 1);
    peaks.sort_by(f64::total_cmp);
    let bin = fs / n as f64;
    for (p, want) in peaks.iter().zip(grid.offsets_hz()) {
        assert!((p - want).abs() <= bin, "{p} vs {want}");
    }
}

#[test]
fn too_narrow_simulation_band_is_rejected() {
    let grid = ChannelGrid::uniform(9, 25e9, 1559.39).unwrap();
    let chans: Vec<SignalBlock> = (0..9).map(|k| shaped_channel(k, 4, 64)).collect();
    assert!(matches!(wdm_multiplex(&chans, &grid), Err(Error::InsufficientBandwidth { .. })));
}

#[test]
fn seed_does_not_move_the_spectrum() {
    let a = shaped_channel(1, 4, 1 << 13);
    let b = shaped_channel(2, 4, 1 << 13);
    let (wa, wb) = (centered_bandwidth(a.x(), a.sample_rate(), 0.99), centered_bandwidth(b.x(), b.sample_rate(), 0.99));
    assert!(((wa - wb) / wa).abs() < 0.02);
    assert!(signal_rel_error(&a, &b) > 0.5);
}
