//! Recirculating-loop emulation.
//!
//! One circulation runs the configured stage chain, by default
//!
//! ```text
//! coupler_aom → booster → voa1 → fut → voa2 → buffering
//!     → pair_amp_1 → wss → pair_amp_2 → monitor
//! ```
//!
//! `pair_amp_2` restores the loop input level, so the net loop gain at the
//! monitor is 0 dB. With the default levels the loop input must be at least
//! about -1 dBm, otherwise `pair_amp_2` would have to attenuate. Each stage
//! draws noise from a seed derived from `(seed, loop, stage)`.

mod amplifier;
mod stages;
mod trace;
mod wss;

pub use amplifier::{
    add_white_noise, amplify, ase_psd_per_pol, attenuate, load_osnr, voa2_auto, voa_auto, AmpMode,
    AmpReport, AmplifierSpec, OSNR_REFERENCE_BANDWIDTH_HZ,
};
pub use stages::{LoopStage, StageContext, StageFactory, StageRecord, StageRegistry};
pub use trace::{PowerTrace, SPIKE_HEIGHT_DB, SPIKE_SAMPLES};
pub use wss::wss_equalize;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fiber::{group_delay, make_preset, FiberKind, FiberSpec, StepControl};
use crate::seed;
use crate::signal::{ChannelGrid, SignalBlock};

/// Loop count of the latency measurement and its SMF-loop total duration.
pub const CALIBRATION_LOOPS: usize = 25;
pub const CALIBRATION_SMF_TOTAL_US: f64 = 5844.0;

/// Per-loop overhead (amplifiers, WSS, patch cords) that makes the 25-loop
/// SMF-loop duration equal 5,844 μs with the fibre presets.
pub fn calibrated_overhead_delay_us() -> f64 {
    let fibres = group_delay(&make_preset(FiberKind::Smf)) + group_delay(&make_preset(FiberKind::BufferingSmf));
    CALIBRATION_SMF_TOTAL_US / CALIBRATION_LOOPS as f64 - fibres * 1e6
}

pub fn default_stage_chain() -> Vec<String> {
    [
        "coupler_aom",
        "booster",
        "voa1",
        "fut",
        "voa2",
        "buffering",
        "pair_amp_1",
        "wss",
        "pair_amp_2",
        "monitor",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

#[derive(Debug, Clone)]
pub struct LoopConfig {
    pub fut: FiberSpec,
    pub buffering: FiberSpec,
    pub booster: AmplifierSpec,
    /// Fixed-gain amplifier before the WSS, and the level-restoring one after it.
    pub pair_amps: [AmplifierSpec; 2],
    /// Total launch power into the FUT.
    pub launch_power_dbm: f64,
    /// VOA2 target: total power into the buffering fibre.
    pub buffering_input_dbm: f64,
    /// Booster overshoot that VOA1 trims back to the launch power.
    pub voa1_trim_db: f64,
    pub coupler_loss_db: f64,
    pub aom_loss_db: f64,
    pub wss_insertion_loss_db: f64,
    pub overhead_delay_us: f64,
    pub n_loops: usize,
    pub monitor_sample_interval_us: f64,
    pub grid: ChannelGrid,
    pub step_control: StepControl,
    pub stages: Vec<String>,
}

impl LoopConfig {
    pub fn new(fut: FiberSpec, grid: ChannelGrid) -> Self {
        Self {
            fut,
            buffering: make_preset(FiberKind::BufferingSmf),
            booster: AmplifierSpec::fixed_output(23.0, 5.0).with_max_output(27.0),
            pair_amps: [
                AmplifierSpec::fixed_gain(5.0, 5.0).with_max_output(20.0),
                AmplifierSpec::fixed_output(0.0, 5.0).with_max_output(20.0),
            ],
            launch_power_dbm: 23.0,
            buffering_input_dbm: 10.2,
            voa1_trim_db: 0.5,
            coupler_loss_db: 3.0,
            aom_loss_db: 3.0,
            wss_insertion_loss_db: 7.0,
            overhead_delay_us: calibrated_overhead_delay_us(),
            n_loops: 1,
            monitor_sample_interval_us: 1.0,
            grid,
            step_control: StepControl::default(),
            stages: default_stage_chain(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(format!("loop: {m}")));
        if self.n_loops < 1 {
            return bad("n_loops must be >= 1".into());
        }
        for (name, v) in [
            ("coupler loss", self.coupler_loss_db),
            ("AOM loss", self.aom_loss_db),
            ("WSS loss", self.wss_insertion_loss_db),
            ("VOA1 trim", self.voa1_trim_db),
            ("overhead delay", self.overhead_delay_us),
        ] {
            if !(v >= 0.0) {
                return bad(format!("{name} must be >= 0"));
            }
        }
        if !(self.monitor_sample_interval_us > 0.0) {
            return bad("monitor sample interval must be > 0".into());
        }
        self.fut.validate()?;
        self.buffering.validate()?;
        self.booster.validate()?;
        self.step_control.validate()?;
        Ok(())
    }

    /// Round-trip delay of one circulation: FUT + buffering + overhead.
    pub fn round_trip_delay_s(&self) -> f64 {
        group_delay(&self.fut) + group_delay(&self.buffering) + self.overhead_delay_us * 1e-6
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LoopRecord {
    pub loop_index: usize,
    pub stages: Vec<StageRecord>,
    pub round_trip_delay_s: f64,
    pub monitor_dbm: f64,
    /// Monitor power minus loop input power.
    pub net_gain_db: f64,
}

#[derive(Debug, Clone)]
pub struct LoopRun {
    pub rx: SignalBlock,
    pub trace: PowerTrace,
    pub log: Vec<LoopRecord>,
}

pub fn run_loop(tx: &SignalBlock, cfg: &LoopConfig, seed: u64) -> Result<LoopRun> {
    run_loop_with(&StageRegistry::builtin(), tx, cfg, seed)
}

pub fn run_loop_with(
    registry: &StageRegistry,
    tx: &SignalBlock,
    cfg: &LoopConfig,
    seed: u64,
) -> Result<LoopRun> {
    cfg.validate()?;
    let chain = registry.build_chain(cfg)?;
    let reference_dbm = tx.measure_power_dbm()?;
    let overhead_s = cfg.overhead_delay_us * 1e-6;

    let mut signal = tx.clone();
    let mut log = Vec::with_capacity(cfg.n_loops);
    for loop_index in 0..cfg.n_loops {
        let mut records = Vec::with_capacity(chain.len());
        let mut delay = overhead_s;
        for (stage_index, stage) in chain.iter().enumerate() {
            let ctx = StageContext {
                loop_index,
                stage_index,
                seed: seed::derive(seed, &[loop_index as u64, stage_index as u64]),
                reference_dbm,
            };
            let input_dbm = signal.measure_power_dbm().map_err(|e| e.at_stage(loop_index, stage.name()))?;
            signal = stage
                .process(&signal, &ctx)
                .map_err(|e| e.at_stage(loop_index, stage.name()))?;
            let output_dbm = signal.measure_power_dbm().map_err(|e| e.at_stage(loop_index, stage.name()))?;
            delay += stage.delay_s();
            records.push(StageRecord {
                stage: stage.name().to_string(),
                input_dbm,
                output_dbm,
                gain_db: output_dbm - input_dbm,
            });
        }
        let monitor_dbm = signal.measure_power_dbm()?;
        log.push(LoopRecord {
            loop_index,
            stages: records,
            round_trip_delay_s: delay,
            monitor_dbm,
            net_gain_db: monitor_dbm - reference_dbm,
        });
    }

    let delays: Vec<f64> = log.iter().map(|r| r.round_trip_delay_s).collect();
    let monitor: Vec<f64> = log.iter().map(|r| r.monitor_dbm).collect();
    let trace = PowerTrace::synthesize(&delays, &monitor, cfg.monitor_sample_interval_us * 1e-6)?;
    Ok(LoopRun {
        rx: signal,
        trace,
        log,
    })
}
