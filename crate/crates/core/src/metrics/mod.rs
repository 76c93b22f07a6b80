//! Figures of merit: SNR, GMI/NGMI, AIR, OSNR and loop latency.

mod gmi;
mod latency;
mod osnr;
mod snr;

pub use gmi::{compute_air, estimate_gmi, ngmi, MIN_GMI_SYMBOLS};
pub use latency::{
    detect_spikes, extract_latency, field_trial_us_per_km, predicted_round_trip_reduction_us,
    LatencyReport, SPACING_CV_WARNING, SPIKE_THRESHOLD_DB,
};
pub use osnr::{measure_osnr, OSNR_CAP_DB};
pub use snr::{estimate_snr, SNR_CAP_DB};

use std::fmt::Write as _;

use serde::Serialize;

/// One experimental point. Failed points keep their key and carry `error`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub fut_kind: String,
    pub launch_power_dbm: f64,
    pub n_loops: usize,
    pub snr_db: f64,
    pub osnr_db: f64,
    pub gmi: f64,
    pub ngmi: f64,
    pub air_gbps: f64,
    pub error: Option<String>,
}

impl MetricsRecord {
    pub fn failed(fut_kind: &str, launch_power_dbm: f64, n_loops: usize, error: String) -> Self {
        Self {
            fut_kind: fut_kind.to_string(),
            launch_power_dbm,
            n_loops,
            snr_db: f64::NAN,
            osnr_db: f64::NAN,
            gmi: f64::NAN,
            ngmi: f64::NAN,
            air_gbps: f64::NAN,
            error: Some(error),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

pub const CSV_HEADER: &str = "fut_kind,launch_power_dbm,n_loops,snr_db,osnr_db,gmi,ngmi,air_gbps,error";

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        String::new()
    }
}

/// Stable CSV rendering with fixed six-decimal numbers.
pub fn records_to_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            csv_escape(&r.fut_kind),
            num(r.launch_power_dbm),
            r.n_loops,
            num(r.snr_db),
            num(r.osnr_db),
            num(r.gmi),
            num(r.ngmi),
            num(r.air_gbps),
            r.error.as_deref().map(csv_escape).unwrap_or_default()
        );
    }
    out
}
