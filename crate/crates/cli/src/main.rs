use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use hcf_core::experiment::{self, ExperimentConfig, PRESETS};
use hcf_core::fiber::{group_delay, make_preset, FiberKind};
use hcf_core::metrics::{extract_latency, LatencyReport};
use hcf_core::recirc::{calibrated_overhead_delay_us, PowerTrace};

#[derive(Parser)]
#[command(name = "hcfsim", version, about = "Recirculating-loop simulator for hollow-core and standard fibre")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep from a TOML config file or a preset name.
    Run {
        config: String,
        /// Worker threads; overrides the config.
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory; overrides the config (default `results`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Preset configurations.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
    /// Per-km latency of two monitor traces and their difference.
    LatencyReport {
        trace_a: PathBuf,
        trace_b: PathBuf,
        /// Length of the fibre under test in both traces.
        #[arg(long)]
        fut_km: f64,
        /// Length of the fibre under test in trace B, if different.
        #[arg(long)]
        fut_km_b: Option<f64>,
        /// Per-loop delay outside the fibre under test, in μs. Defaults to
        /// the buffering fibre plus the calibrated overhead.
        #[arg(long)]
        common_us: Option<f64>,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    /// Print a preset as a TOML config.
    Show { name: String },
}

fn load_config(arg: &str) -> Result<ExperimentConfig> {
    let path = Path::new(arg);
    if path.exists() {
        return experiment::parse_config(path).with_context(|| format!("reading {arg}"));
    }
    if let Ok(cfg) = experiment::preset(arg) {
        return Ok(cfg);
    }
    bail!("{arg}: no such config file or preset");
}

fn run(config: &str, workers: Option<usize>, out: Option<PathBuf>) -> Result<bool> {
    let mut cfg = load_config(config)?;
    if let Some(w) = workers {
        cfg.workers = w;
    }
    let dir = out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    cfg.output_dir = Some(dir.clone());
    cfg.validate()?;
    let n = experiment::sweep_points(&cfg).len();
    eprintln!("running {n} point(s) on {} worker(s)", cfg.workers);
    let result = experiment::run_sweep(&cfg)?;
    experiment::write_results(&result, &dir).with_context(|| format!("writing {}", dir.display()))?;
    println!(
        "{:<4} {:>7} {:>5} {:>8} {:>8} {:>6} {:>8}  error",
        "fut", "P[dBm]", "loops", "SNR[dB]", "OSNR", "GMI", "AIR[G]"
    );
    let mut failed = 0;
    for p in &result.points {
        let r = &p.record;
        println!(
            "{:<4} {:>7.2} {:>5} {:>8.3} {:>8.3} {:>6.3} {:>8.2}  {}",
            r.fut_kind,
            r.launch_power_dbm,
            r.n_loops,
            r.snr_db,
            r.osnr_db,
            r.gmi,
            r.air_gbps,
            r.error.as_deref().unwrap_or("")
        );
        failed += usize::from(!r.is_ok());
    }
    eprintln!("wrote {}", dir.display());
    if failed > 0 {
        eprintln!("{failed} point(s) failed; see the error column");
    }
    Ok(failed == 0)
}

fn print_report(label: &str, r: &LatencyReport) {
    println!("{label}: {} spikes, per-loop {:.3} us, total {:.1} us, {:.3} us/km", r.spike_count, r.per_loop_delay_us, r.total_duration_us, r.per_km_latency_us);
    if let Some(w) = &r.warning {
        println!("{label}: warning: {w}");
    }
}

fn latency_report(a: &Path, b: &Path, fut_km: f64, fut_km_b: Option<f64>, common_us: Option<f64>) -> Result<()> {
    let common = common_us.unwrap_or_else(|| group_delay(&make_preset(FiberKind::BufferingSmf)) * 1e6 + calibrated_overhead_delay_us());
    let ta = PowerTrace::read(a).with_context(|| format!("reading {}", a.display()))?;
    let tb = PowerTrace::read(b).with_context(|| format!("reading {}", b.display()))?;
    let ra = extract_latency(&ta, fut_km, common)?;
    let rb = extract_latency(&tb, fut_km_b.unwrap_or(fut_km), common)?;
    print_report("A", &ra);
    print_report("B", &rb);
    let (fast, slow, names) = if ra.per_km_latency_us <= rb.per_km_latency_us {
        (ra, &rb, ("A", "B"))
    } else {
        (rb, &ra, ("B", "A"))
    };
    let d = fast.compare(slow).differential_us_per_km.unwrap_or_default();
    println!("{} is faster than {} by {d:.3} us/km", names.0, names.1);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, workers, out } => run(&config, workers, out),
        Command::Presets { action: PresetAction::List } => {
            for p in PRESETS {
                println!("{:<12} {}", p.name, p.description);
            }
            Ok(true)
        }
        Command::Presets {
            action: PresetAction::Show { name },
        } => experiment::preset(&name)
            .map_err(anyhow::Error::from)
            .and_then(|c| Ok(c.to_toml()?))
            .map(|t| {
                print!("{t}");
                true
            }),
        Command::LatencyReport {
            trace_a,
            trace_b,
            fut_km,
            fut_km_b,
            common_us,
        } => latency_report(&trace_a, &trace_b, fut_km, fut_km_b, common_us).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
