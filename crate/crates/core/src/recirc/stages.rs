//! Loop components behind a common trait, built by name from a [`LoopConfig`].

use std::collections::BTreeMap;

use serde::Serialize;

use super::amplifier::{amplify, attenuate, voa_auto, AmpMode, AmplifierSpec};
use super::wss::wss_equalize;
use super::LoopConfig;
use crate::error::{Error, Result};
use crate::fiber::{group_delay, propagate, FiberSpec, StepControl};
use crate::signal::{ChannelGrid, SignalBlock};

pub struct StageContext {
    pub loop_index: usize,
    pub stage_index: usize,
    /// Seed for this (loop, stage) pair.
    pub seed: u64,
    /// Power at the loop input, which the monitor point is held to.
    pub reference_dbm: f64,
}

pub trait LoopStage: Send + Sync {
    fn name(&self) -> &str;

    fn process(&self, signal: &SignalBlock, ctx: &StageContext) -> Result<SignalBlock>;

    /// Propagation delay contributed per pass, in seconds.
    fn delay_s(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub input_dbm: f64,
    pub output_dbm: f64,
    /// `output - input`; negative for attenuating stages.
    pub gain_db: f64,
}

struct Attenuator {
    name: &'static str,
    loss_db: f64,
}

impl LoopStage for Attenuator {
    fn name(&self) -> &str {
        self.name
    }

    fn process(&self, signal: &SignalBlock, _: &StageContext) -> Result<SignalBlock> {
        attenuate(signal, self.loss_db)
    }
}

struct Amplifier {
    name: &'static str,
    spec: AmplifierSpec,
}

impl LoopStage for Amplifier {
    fn name(&self) -> &str {
        self.name
    }

    fn process(&self, signal: &SignalBlock, ctx: &StageContext) -> Result<SignalBlock> {
        amplify(signal, &self.spec, ctx.seed).map(|(s, _)| s)
    }
}

/// Power-controlled amplifier whose target is the loop input level.
struct LevelRestore {
    name: &'static str,
    spec: AmplifierSpec,
}

impl LoopStage for LevelRestore {
    fn name(&self) -> &str {
        self.name
    }

    fn process(&self, signal: &SignalBlock, ctx: &StageContext) -> Result<SignalBlock> {
        let mut spec = self.spec;
        spec.mode = AmpMode::FixedOutputPower {
            target_output_dbm: ctx.reference_dbm,
        };
        spec.max_output_dbm = spec.max_output_dbm.max(ctx.reference_dbm);
        amplify(signal, &spec, ctx.seed).map(|(s, _)| s)
    }
}

struct AutoVoa {
    name: &'static str,
    target_dbm: f64,
}

impl LoopStage for AutoVoa {
    fn name(&self) -> &str {
        self.name
    }

    fn process(&self, signal: &SignalBlock, _: &StageContext) -> Result<SignalBlock> {
        voa_auto(signal, self.target_dbm).map(|(s, _)| s)
    }
}

/// VOA2: holds the buffering-fibre input at its target. When the FUT output
/// is already below the target, an in-line amplifier makes up the deficit.
struct BufferingLevel {
    target_dbm: f64,
    makeup: AmplifierSpec,
}

impl LoopStage for BufferingLevel {
    fn name(&self) -> &str {
        "voa2"
    }

    fn process(&self, signal: &SignalBlock, ctx: &StageContext) -> Result<SignalBlock> {
        if signal.measure_power_dbm()? >= self.target_dbm {
            return voa_auto(signal, self.target_dbm).map(|(s, _)| s);
        }
        let mut spec = self.makeup;
        spec.mode = AmpMode::FixedOutputPower {
            target_output_dbm: self.target_dbm,
        };
        spec.max_output_dbm = spec.max_output_dbm.max(self.target_dbm);
        let out = amplify(signal, &spec, ctx.seed)?.0;
        out.set_power_dbm(self.target_dbm)
    }
}

struct Span {
    name: &'static str,
    fiber: FiberSpec,
    control: StepControl,
}

impl LoopStage for Span {
    fn name(&self) -> &str {
        self.name
    }

    fn process(&self, signal: &SignalBlock, _: &StageContext) -> Result<SignalBlock> {
        propagate(signal, &self.fiber, &self.control)
    }

    fn delay_s(&self) -> f64 {
        group_delay(&self.fiber)
    }
}

struct Wss {
    grid: ChannelGrid,
    insertion_loss_db: f64,
}

impl LoopStage for Wss {
    fn name(&self) -> &str {
        "wss"
    }

    fn process(&self, signal: &SignalBlock, _: &StageContext) -> Result<SignalBlock> {
        let (out, _) = wss_equalize(signal, &self.grid);
        attenuate(&out, self.insertion_loss_db)
    }
}

struct Monitor;

impl LoopStage for Monitor {
    fn name(&self) -> &str {
        "monitor"
    }

    fn process(&self, signal: &SignalBlock, _: &StageContext) -> Result<SignalBlock> {
        Ok(signal.clone())
    }
}

pub type StageFactory = fn(&LoopConfig) -> Result<Box<dyn LoopStage>>;

/// Name → constructor table for loop stages.
pub struct StageRegistry {
    factories: BTreeMap<String, StageFactory>,
}

impl Default for StageRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl StageRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("coupler_aom", |c| {
            Ok(Box::new(Attenuator {
                name: "coupler_aom",
                loss_db: c.coupler_loss_db + c.aom_loss_db,
            }))
        });
        r.register("booster", |c| {
            let mut spec = c.booster;
            spec.mode = AmpMode::FixedOutputPower {
                target_output_dbm: c.launch_power_dbm + c.voa1_trim_db,
            };
            Ok(Box::new(Amplifier { name: "booster", spec }))
        });
        r.register("voa1", |c| {
            Ok(Box::new(AutoVoa {
                name: "voa1",
                target_dbm: c.launch_power_dbm,
            }))
        });
        r.register("fut", |c| {
            Ok(Box::new(Span {
                name: "fut",
                fiber: c.fut.clone(),
                control: c.step_control,
            }))
        });
        r.register("voa2", |c| {
            Ok(Box::new(BufferingLevel {
                target_dbm: c.buffering_input_dbm,
                makeup: c.pair_amps[0],
            }))
        });
        r.register("buffering", |c| {
            Ok(Box::new(Span {
                name: "buffering",
                fiber: c.buffering.clone(),
                control: c.step_control,
            }))
        });
        r.register("pair_amp_1", |c| {
            Ok(Box::new(Amplifier {
                name: "pair_amp_1",
                spec: c.pair_amps[0],
            }))
        });
        r.register("wss", |c| {
            Ok(Box::new(Wss {
                grid: c.grid.clone(),
                insertion_loss_db: c.wss_insertion_loss_db,
            }))
        });
        r.register("pair_amp_2", |c| {
            Ok(Box::new(LevelRestore {
                name: "pair_amp_2",
                spec: c.pair_amps[1],
            }))
        });
        r.register("monitor", |_| Ok(Box::new(Monitor)));
        r
    }

    pub fn register(&mut self, name: &str, factory: StageFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, name: &str, cfg: &LoopConfig) -> Result<Box<dyn LoopStage>> {
        let f = self
            .factories
            .get(name)
            .ok_or_else(|| Error::UnknownStage(name.to_string()))?;
        f(cfg)
    }

    pub fn build_chain(&self, cfg: &LoopConfig) -> Result<Vec<Box<dyn LoopStage>>> {
        cfg.stages.iter().map(|n| self.build(n, cfg)).collect()
    }
}
