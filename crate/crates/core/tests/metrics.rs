mod common;

use hcf_core::metrics::*;
use hcf_core::recirc::{add_white_noise, PowerTrace};
use hcf_core::fiber::{make_preset, FiberKind};
use hcf_core::transmitter::{mb_shape_constellation, ShapedConstellation};
use hcf_core::{ChannelGrid, Error, SignalBlock};
use num_complex::Complex64;

use common::*;

#[test]
fn snr_of_exact_copy_is_capped() {
    let tx = gaussian(20_000, 1.0, 1);
    assert_eq!(estimate_snr(&[&tx], &[&tx]).unwrap(), SNR_CAP_DB);
}

#[test]
fn snr_of_constructed_noise() {
    let tx = gaussian(100_000, 1.0, 2);
    let noise = gaussian(100_000, 0.01, 3);
    let rx: Vec<Complex64> = tx.iter().zip(&noise).map(|(a, z)| a + z).collect();
    let snr = estimate_snr(&[&rx], &[&tx]).unwrap();
    assert!((snr - 20.0).abs() < 0.1, "{snr}");
}

#[test]
fn snr_is_invariant_to_complex_scaling() {
    let tx = gaussian(20_000, 1.0, 4);
    let rx: Vec<Complex64> = tx.iter().zip(gaussian(20_000, 0.05, 5)).map(|(a, z)| a + z).collect();
    let base = estimate_snr(&[&rx], &[&tx]).unwrap();
    for k in [Complex64::new(3.0, 0.0), Complex64::from_polar(0.01, 1.2)] {
        let scaled: Vec<Complex64> = rx.iter().map(|v| v * k).collect();
        assert!((estimate_snr(&[&scaled], &[&tx]).unwrap() - base).abs() < 0.01);
    }
}

#[test]
fn snr_length_mismatch() {
    let a = gaussian(100, 1.0, 1);
    assert!(matches!(estimate_snr(&[&a[..99]], &[&a]), Err(Error::LengthMismatch(..))));
}

fn shaped() -> ShapedConstellation {
    mb_shape_constellation(5.7, 64).unwrap()
}

#[test]
fn quadrature_oracle_is_converged() {
    let c = shaped();
    let s2 = 10f64.powf(-1.32);
    let a = gmi_quadrature(&c, s2, 24);
    let b = gmi_quadrature(&c, s2, 32);
    assert!((a - b).abs() < 1e-3, "{a} {b}");
}

#[test]
fn gmi_matches_quadrature_at_paper_snr() {
    let c = shaped();
    let (tx, rx) = awgn_symbols(&c, 100_000, 13.2, 7);
    let mc = estimate_gmi(&[&rx], &[&tx], &c).unwrap();
    let oracle = gmi_quadrature(&c, 10f64.powf(-1.32), 32);
    assert!((mc - oracle).abs() < 0.02, "mc {mc} oracle {oracle}");
}

#[test]
fn gmi_noiseless_and_monotone() {
    let c = shaped();
    let (tx, _) = awgn_symbols(&c, 20_000, 60.0, 8);
    let g = estimate_gmi(&[&tx], &[&tx], &c).unwrap();
    assert!((g - 5.7).abs() < 1e-3, "{g}");
    let at = |snr: f64| {
        let (tx, rx) = awgn_symbols(&c, 50_000, snr, 9);
        estimate_gmi(&[&rx], &[&tx], &c).unwrap()
    };
    let (g0, g10, g20) = (at(0.0), at(10.0), at(20.0));
    assert!(g0 < 1.5 && g0 < g10 && g10 < g20, "{g0} {g10} {g20}");
}

#[test]
fn gmi_needs_enough_symbols() {
    let c = shaped();
    let (tx, rx) = awgn_symbols(&c, 1000, 10.0, 1);
    assert!(matches!(
        estimate_gmi(&[&rx], &[&tx], &c),
        Err(Error::InsufficientSampleSize { .. })
    ));
}

#[test]
fn air_examples() {
    assert!((compute_air(5.7, 130e9) - 1482.0).abs() < 1e-9);
    assert!((compute_air(4.154, 130e9) - 1080.04).abs() < 1e-9);
    assert!((compute_air(3.538, 130e9) - 919.88).abs() < 1e-9);
    let ratio = compute_air(4.154, 130e9) / compute_air(3.538, 130e9);
    assert!((ratio - 1.174).abs() < 0.001, "{ratio}");
}

#[test]
fn ngmi_range() {
    assert_eq!(ngmi(5.7, 5.7, 64), 1.0);
    assert!((ngmi(4.7, 5.7, 64) - (1.0 - 1.0 / 6.0)).abs() < 1e-12);
    assert!((ngmi(0.0, 5.7, 64) - 0.05).abs() < 1e-12);
    assert_eq!(ngmi(-3.0, 5.7, 64), 0.0);
}

#[test]
fn latency_from_constructed_trace() {
    let d = vec![233.76e-6; 25];
    let t = PowerTrace::synthesize(&d, &[-1.0; 25], 1e-6).unwrap();
    let r = extract_latency(&t, 1.1, 228.0).unwrap();
    assert!((r.per_loop_delay_us - 233.76).abs() <= 1.0);
    assert_eq!(r.spike_count, 25);
    assert!(r.warning.is_none());
    assert!((r.per_km_latency_us - (r.per_loop_delay_us - 228.0) / 1.1).abs() < 1e-12);
}

#[test]
fn latency_errors_and_warnings() {
    let flat = PowerTrace {
        start_time_s: 0.0,
        sample_interval_s: 1e-6,
        power_dbm: vec![0.0; 500],
        boundary_markers: vec![],
    };
    assert!(matches!(extract_latency(&flat, 1.0, 0.0), Err(Error::InsufficientMarkers(0))));
    let irregular = PowerTrace::synthesize(&[100e-6, 100e-6, 150e-6, 100e-6], &[0.0; 4], 1e-6).unwrap();
    let r = extract_latency(&irregular, 1.0, 0.0).unwrap();
    assert!(r.spacing_cv > SPACING_CV_WARNING);
    assert!(r.warning.is_some());
}

#[test]
fn field_trial_numbers() {
    let smf = make_preset(FiberKind::Smf);
    let hcf = make_preset(FiberKind::Hcf);
    let predicted = predicted_round_trip_reduction_us(&smf, &hcf, 1.4);
    // 2.8 km at (n_smf - n_hcf)/c
    let oracle = 2.8e3 * (1.4682 - 1.0003) / C * 1e6;
    assert!((predicted - oracle).abs() < 1e-9);
    assert!(((predicted - 4.287) / 4.287).abs() < 0.03, "{predicted}");
    assert!((field_trial_us_per_km(4.287, 1.4) - 1.531).abs() < 1e-3);
}

fn band_limited_comb(grid: &ChannelGrid, fs: f64, n: usize, seed: u64) -> SignalBlock {
    let occ = grid.occupied_bandwidth_hz();
    let polar = |s: u64| {
        let g = gaussian(n, 1.0, s);
        let mut spec = dft(&g);
        for (k, v) in spec.iter_mut().enumerate() {
            let f = bin_hz(k, n, fs);
            let inside = (0..grid.channel_count()).any(|c| (f - grid.offset_hz(c)).abs() < 0.5 * occ);
            if !inside {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        idft(&spec)
    };
    let x = polar(seed);
    let y = polar(seed + 1);
    SignalBlock::new(x, y, fs, 192e12, 0).unwrap()
}

#[test]
fn osnr_noise_free_is_capped() {
    let grid = ChannelGrid::uniform(3, 25e9, 1559.39).unwrap().with_occupied_bandwidth(17.6e9).unwrap();
    let s = band_limited_comb(&grid, 96e9, 1 << 14, 1);
    for o in measure_osnr(&s, &grid).unwrap() {
        assert_eq!(o, OSNR_CAP_DB);
    }
}

#[test]
fn osnr_of_constructed_noise() {
    let grid = ChannelGrid::uniform(3, 25e9, 1559.39).unwrap().with_occupied_bandwidth(17.6e9).unwrap();
    let s = band_limited_comb(&grid, 96e9, 1 << 16, 2).set_power_dbm(0.0).unwrap();
    let p_ch = s.power_w() / 3.0;
    // total noise PSD (both polarizations) for 25 dB OSNR
    let psd = p_ch / (10f64.powf(2.5) * 12.5e9);
    let noisy = add_white_noise(&s, psd / 2.0, 9);
    for o in measure_osnr(&noisy, &grid).unwrap() {
        assert!((o - 25.0).abs() < 0.2, "{o}");
    }
}

#[test]
fn osnr_needs_guard_bands() {
    let grid = ChannelGrid::uniform(3, 25e9, 1559.39).unwrap();
    let s = band_limited_comb(&grid.clone().with_occupied_bandwidth(17.6e9).unwrap(), 96e9, 1024, 3);
    let abutting = grid.with_occupied_bandwidth(25e9).unwrap();
    assert!(matches!(measure_osnr(&s, &abutting), Err(Error::OsnrNotMeasurable)));
}

#[test]
fn csv_schema() {
    let ok = MetricsRecord {
        fut_kind: "hcf".into(),
        launch_power_dbm: 23.0,
        n_loops: 25,
        snr_db: 13.2,
        osnr_db: 20.0,
        gmi: 4.154,
        ngmi: ngmi(4.154, 5.7, 64),
        air_gbps: compute_air(4.154, 130e9),
        error: None,
    };
    let bad = MetricsRecord::failed("smf", 23.0, 25, "sync failed".into());
    let csv = records_to_csv(&[ok, bad]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert!(lines[1].starts_with("hcf,23.000000,25,13.200000"));
    assert!(lines[1].ends_with(','));
    assert!(lines[2].starts_with("smf,23.000000,25,,"), "{}", lines[2]);
    assert!(lines[2].ends_with("sync failed"));
}
