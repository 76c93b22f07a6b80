//! Config-driven sweeps over FUT kind, launch power, loop count and seed.

mod config;
mod point;

pub use config::{
    parse_config, parse_config_str, preset, ChannelPlan, ExperimentConfig, LoopSettings, Preset,
    Scale, TransceiverConfig, MAX_BAND_FILL, PRESETS, SCALED_MAX_NONLINEAR_PHASE_RAD, SCALED_MAX_STEP_KM,
};
pub use point::{build_transmitter, fut_spec, loop_config, run_point, PointKey, PointResult, Transmitted};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::{records_to_csv, MetricsRecord};
use crate::seed;

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    /// Sorted by (fut kind, launch power, loops, master seed).
    pub points: Vec<PointResult>,
    pub constellation_table: String,
}

impl SweepResult {
    pub fn records(&self) -> Vec<MetricsRecord> {
        self.points.iter().map(|p| p.record.clone()).collect()
    }
}

/// All sweep points in canonical order; the point seed derives from the
/// master seed and the point's position in that order.
pub fn sweep_points(cfg: &ExperimentConfig) -> Vec<PointKey> {
    let mut keys = Vec::new();
    for &master_seed in &cfg.seeds {
        let mut index = 0u64;
        for &fut_kind in &cfg.fut_kind {
            for &launch_power_dbm in &cfg.launch_power_dbm {
                for &n_loops in &cfg.n_loops {
                    keys.push(PointKey {
                        fut_kind,
                        launch_power_dbm,
                        n_loops,
                        master_seed,
                        point_seed: seed::derive(master_seed, &[index]),
                    });
                    index += 1;
                }
            }
        }
    }
    keys
}

/// Runs every point on a pool of `cfg.workers` threads. Results do not
/// depend on the worker count.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let keys = sweep_points(cfg);
    let mut points = pool.install(|| -> Result<Vec<PointResult>> {
        let mut txs = BTreeMap::new();
        for &s in &cfg.seeds {
            if !txs.contains_key(&s) {
                txs.insert(s, build_transmitter(cfg, s)?);
            }
        }
        Ok(keys
            .par_iter()
            .map(|k| run_point(cfg, &txs[&k.master_seed], *k))
            .collect())
    })?;
    points.sort_by(|a, b| {
        let (a, b) = (&a.key, &b.key);
        a.fut_kind
            .cmp(&b.fut_kind)
            .then(a.launch_power_dbm.total_cmp(&b.launch_power_dbm))
            .then(a.n_loops.cmp(&b.n_loops))
            .then(a.master_seed.cmp(&b.master_seed))
    });
    let constellation_table = crate::transmitter::mb_shape_constellation(cfg.entropy_bits, cfg.base_order)?.to_table();
    Ok(SweepResult {
        config: cfg.clone(),
        points,
        constellation_table,
    })
}

/// SHA-256 over a git-style blob header and the content.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn plot_file(rows: &[(f64, f64)], x: &str, y: &str) -> String {
    let mut out = format!("# {x} {y}\n");
    for (a, b) in rows {
        let _ = writeln!(out, "{a:.6} {b:.6}");
    }
    out
}

/// Plot-ready two-column files, one per figure panel and curve.
fn plot_data(points: &[PointResult]) -> BTreeMap<String, String> {
    let ok: Vec<&PointResult> = points.iter().filter(|p| p.record.is_ok()).collect();
    let mut files = BTreeMap::new();
    let mut by_loops: BTreeMap<(String, usize), Vec<&PointResult>> = BTreeMap::new();
    let mut by_power: BTreeMap<(String, String), Vec<&PointResult>> = BTreeMap::new();
    for p in &ok {
        by_loops.entry((p.record.fut_kind.clone(), p.record.n_loops)).or_default().push(p);
        by_power
            .entry((p.record.fut_kind.clone(), format!("{:.2}", p.record.launch_power_dbm)))
            .or_default()
            .push(p);
    }
    for ((fut, loops), v) in &by_loops {
        let snr: Vec<_> = v.iter().map(|p| (p.record.launch_power_dbm, p.record.snr_db)).collect();
        let air: Vec<_> = v.iter().map(|p| (p.record.launch_power_dbm, p.record.air_gbps)).collect();
        files.insert(format!("snr_vs_power_{fut}_n{loops}.dat"), plot_file(&snr, "launch_power_dbm", "snr_db"));
        files.insert(format!("air_vs_power_{fut}_n{loops}.dat"), plot_file(&air, "launch_power_dbm", "air_gbps"));
    }
    for ((fut, power), v) in &by_power {
        let mut v = v.clone();
        v.sort_by_key(|p| p.record.n_loops);
        let snr: Vec<_> = v.iter().map(|p| (p.record.n_loops as f64, p.record.snr_db)).collect();
        let air: Vec<_> = v.iter().map(|p| (p.record.n_loops as f64, p.record.air_gbps)).collect();
        files.insert(format!("snr_vs_loops_{fut}_p{power}.dat"), plot_file(&snr, "n_loops", "snr_db"));
        files.insert(format!("air_vs_loops_{fut}_p{power}.dat"), plot_file(&air, "n_loops", "air_gbps"));
    }
    files
}

/// Writes `results.csv`, `traces/`, `plots/`, `constellation.txt`,
/// optional `symbols/` dumps and `manifest.json` into `dir`.
pub fn write_results(result: &SweepResult, dir: &Path) -> Result<()> {
    if result.points.is_empty() {
        return Err(Error::Config("no results to write".into()));
    }
    std::fs::create_dir_all(dir)?;
    let csv = records_to_csv(&result.records());
    std::fs::write(dir.join("results.csv"), &csv)?;
    std::fs::write(dir.join("constellation.txt"), &result.constellation_table)?;

    let traces = dir.join("traces");
    for p in &result.points {
        if let Some(t) = &p.trace {
            t.write(&traces, &p.key.stem())?;
        }
        if let Some(r) = &p.recovered {
            let sym = dir.join("symbols");
            std::fs::create_dir_all(&sym)?;
            let f = std::fs::File::create(sym.join(format!("{}.hlsb", p.key.stem())))?;
            r.write_dump(std::io::BufWriter::new(f))?;
        }
    }
    let plots = dir.join("plots");
    std::fs::create_dir_all(&plots)?;
    for (name, body) in plot_data(&result.points) {
        std::fs::write(plots.join(name), body)?;
    }

    let points: Vec<_> = result
        .points
        .iter()
        .map(|p| {
            json!({
                "fut_kind": p.key.fut_kind,
                "launch_power_dbm": p.key.launch_power_dbm,
                "n_loops": p.key.n_loops,
                "master_seed": p.key.master_seed,
                "point_seed": p.key.point_seed,
                "trace": p.trace.as_ref().map(|_| format!("traces/{}.txt", p.key.stem())),
            })
        })
        .collect();
    let manifest = json!({
        "generator": concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")),
        "config": result.config,
        "results_csv_sha256": content_hash(csv.as_bytes()),
        "seeds": result.config.seeds,
        "points": points,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}
