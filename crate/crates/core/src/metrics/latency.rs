use serde::Serialize;

use crate::error::{Error, Result};
use crate::fiber::{latency_us_per_km, FiberSpec};
use crate::recirc::PowerTrace;

/// A spike must exceed the local median by this much.
pub const SPIKE_THRESHOLD_DB: f64 = 2.0;
/// Coefficient of variation of spike spacing above which the report warns.
pub const SPACING_CV_WARNING: f64 = 0.01;
/// Half-width of the sliding median window, in samples.
const MEDIAN_HALF_WINDOW: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyReport {
    pub per_loop_delay_us: f64,
    pub per_km_latency_us: f64,
    /// `other.per_km - self.per_km`, set by [`LatencyReport::compare`].
    pub differential_us_per_km: Option<f64>,
    pub total_duration_us: f64,
    pub spike_count: usize,
    pub spacing_cv: f64,
    pub warning: Option<String>,
}

impl LatencyReport {
    /// Fills the differential of `self` against a slower reference.
    pub fn compare(mut self, slower: &LatencyReport) -> Self {
        self.differential_us_per_km = Some(slower.per_km_latency_us - self.per_km_latency_us);
        self
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Rising edges of samples at least [`SPIKE_THRESHOLD_DB`] above the local median.
pub fn detect_spikes(power_dbm: &[f64]) -> Vec<usize> {
    let n = power_dbm.len();
    let mut spikes = Vec::new();
    let mut inside = false;
    let mut buf = Vec::with_capacity(2 * MEDIAN_HALF_WINDOW + 1);
    for i in 0..n {
        let lo = i.saturating_sub(MEDIAN_HALF_WINDOW);
        let hi = (i + MEDIAN_HALF_WINDOW + 1).min(n);
        buf.clear();
        buf.extend_from_slice(&power_dbm[lo..hi]);
        let above = power_dbm[i] >= median(&mut buf) + SPIKE_THRESHOLD_DB;
        if above && !inside {
            spikes.push(i);
        }
        inside = above;
    }
    spikes
}

/// Per-loop and per-km latency from the spike positions of a monitor trace.
///
/// `common_delay_us` is the part of each circulation outside the fibre
/// under test (buffering fibre plus overhead).
pub fn extract_latency(trace: &PowerTrace, fut_length_km: f64, common_delay_us: f64) -> Result<LatencyReport> {
    if !(fut_length_km > 0.0) {
        return Err(Error::InvalidParameter("FUT length must be > 0".into()));
    }
    let spikes = detect_spikes(&trace.power_dbm);
    if spikes.len() < 2 {
        return Err(Error::InsufficientMarkers(spikes.len()));
    }
    let dt_us = trace.sample_interval_s * 1e6;
    let gaps: Vec<f64> = spikes.windows(2).map(|w| (w[1] - w[0]) as f64 * dt_us).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / gaps.len() as f64;
    let cv = if mean > 0.0 { var.sqrt() / mean } else { 0.0 };
    let span = (spikes[spikes.len() - 1] - spikes[0]) as f64 * dt_us;
    let warning = (cv > SPACING_CV_WARNING).then(|| format!("irregular spike spacing: CV {:.2}%", 100.0 * cv));
    Ok(LatencyReport {
        per_loop_delay_us: mean,
        per_km_latency_us: ((mean - common_delay_us) / fut_length_km).max(0.0),
        differential_us_per_km: None,
        total_duration_us: span + mean,
        spike_count: spikes.len(),
        spacing_cv: cv,
        warning,
    })
}

/// Round-trip delay saved by `fast` over `slow` on a cable of `cable_km`
/// (out and back), in μs.
pub fn predicted_round_trip_reduction_us(slow: &FiberSpec, fast: &FiberSpec, cable_km: f64) -> f64 {
    2.0 * cable_km * (latency_us_per_km(slow) - latency_us_per_km(fast))
}

/// Per-km latency advantage implied by a measured round-trip reduction.
pub fn field_trial_us_per_km(round_trip_reduction_us: f64, cable_km: f64) -> f64 {
    round_trip_reduction_us / (2.0 * cable_km)
}
