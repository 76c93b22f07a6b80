use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dsp::DspConfig;
use crate::error::{Error, Result};
use crate::fiber::{FiberKind, LossTableKind, StepControl, StepMode};
use crate::recirc::calibrated_overhead_delay_us;
use crate::signal::ChannelGrid;
use crate::transmitter::{TxChain, CUT_WAVELENGTH_NM};

/// Largest fraction of the simulation bandwidth the WDM comb may occupy
/// when samples/symbol is chosen automatically.
pub const MAX_BAND_FILL: f64 = 0.8;

/// Step limits of the scaled plan. Metrics agree with 0.1 km / 3 mrad
/// steps to within 0.01 dB.
pub const SCALED_MAX_STEP_KM: f64 = 10.0;
pub const SCALED_MAX_NONLINEAR_PHASE_RAD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Full,
    Scaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelPlan {
    pub count: usize,
    pub symbol_rate_baud: f64,
    pub spacing_hz: f64,
    pub rolloff: f64,
    /// Chosen from the band-fill rule when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_symbol: Option<usize>,
    pub payload_symbols: usize,
    pub cut_wavelength_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransceiverConfig {
    /// OSNR of white noise loaded at the receiver input; absent means none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub osnr_db: Option<f64>,
    pub laser_linewidth_hz: f64,
    pub preemphasis: bool,
    /// Transmitter 3-dB bandwidth as a fraction of the symbol rate.
    pub tx_bandwidth_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSettings {
    /// Total power entering the loop, also the monitor reference level.
    pub loop_input_dbm: f64,
    pub buffering_input_dbm: f64,
    pub booster_nf_db: f64,
    pub booster_max_output_dbm: f64,
    pub pair_amp_nf_db: f64,
    pub pair_amp_1_gain_db: f64,
    pub coupler_loss_db: f64,
    pub aom_loss_db: f64,
    pub voa1_trim_db: f64,
    pub wss_insertion_loss_db: f64,
    pub overhead_delay_us: f64,
    pub monitor_sample_interval_us: f64,
    pub step_mode: StepMode,
    pub max_step_km: f64,
    pub max_nonlinear_phase_rad: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fut_loss_table: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fut_loss_table_kind: Option<LossTableKind>,
}

impl LoopSettings {
    pub fn step_control(&self) -> StepControl {
        StepControl {
            max_step_km: self.max_step_km,
            max_nonlinear_phase_rad: self.max_nonlinear_phase_rad,
            mode: self.step_mode,
        }
    }
}

impl Default for LoopSettings {
    fn default() -> Self {
        let step = StepControl::default();
        Self {
            loop_input_dbm: 0.0,
            buffering_input_dbm: 10.2,
            booster_nf_db: 5.0,
            booster_max_output_dbm: 27.0,
            pair_amp_nf_db: 5.0,
            pair_amp_1_gain_db: 5.0,
            coupler_loss_db: 3.0,
            aom_loss_db: 3.0,
            voa1_trim_db: 0.5,
            wss_insertion_loss_db: 7.0,
            overhead_delay_us: calibrated_overhead_delay_us(),
            monitor_sample_interval_us: 1.0,
            step_mode: step.mode,
            max_step_km: step.max_step_km,
            max_nonlinear_phase_rad: step.max_nonlinear_phase_rad,
            fut_loss_table: None,
            fut_loss_table_kind: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scale: Scale,
    pub channels: ChannelPlan,
    pub entropy_bits: f64,
    pub base_order: usize,
    pub fut_kind: Vec<FiberKind>,
    pub launch_power_dbm: Vec<f64>,
    pub n_loops: Vec<usize>,
    /// Master seeds; every seed repeats the whole sweep.
    pub seeds: Vec<u64>,
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Also write the recovered CUT symbols of every point.
    pub dump_symbols: bool,
    pub transceiver: TransceiverConfig,
    #[serde(rename = "loop")]
    pub loop_settings: LoopSettings,
    pub dsp: DspConfig,
}

impl ExperimentConfig {
    /// 3 channels × 16 GBaud on a 25-GHz grid, 2^15 payload symbols.
    pub fn scaled() -> Self {
        Self {
            scale: Scale::Scaled,
            channels: ChannelPlan {
                count: 3,
                symbol_rate_baud: 16e9,
                spacing_hz: 25e9,
                rolloff: 0.1,
                samples_per_symbol: None,
                payload_symbols: 1 << 15,
                cut_wavelength_nm: CUT_WAVELENGTH_NM,
            },
            entropy_bits: 5.7,
            base_order: 64,
            fut_kind: vec![FiberKind::Hcf],
            launch_power_dbm: vec![23.0],
            n_loops: vec![1],
            seeds: vec![1],
            workers: 1,
            output_dir: None,
            dump_symbols: false,
            transceiver: TransceiverConfig {
                osnr_db: None,
                laser_linewidth_hz: 100e3,
                preemphasis: true,
                tx_bandwidth_ratio: 0.62,
            },
            loop_settings: LoopSettings {
                max_step_km: SCALED_MAX_STEP_KM,
                max_nonlinear_phase_rad: SCALED_MAX_NONLINEAR_PHASE_RAD,
                ..LoopSettings::default()
            },
            dsp: DspConfig::default(),
        }
    }

    /// 9 channels × 130 GBaud on a 150-GHz grid.
    pub fn full() -> Self {
        let mut c = Self::scaled();
        c.scale = Scale::Full;
        c.channels.count = 9;
        c.channels.symbol_rate_baud = 130e9;
        c.channels.spacing_hz = 150e9;
        let step = StepControl::default();
        c.loop_settings.max_step_km = step.max_step_km;
        c.loop_settings.max_nonlinear_phase_rad = step.max_nonlinear_phase_rad;
        c
    }

    pub fn for_scale(scale: Scale) -> Self {
        match scale {
            Scale::Full => Self::full(),
            Scale::Scaled => Self::scaled(),
        }
    }

    pub fn samples_per_symbol(&self) -> usize {
        if let Some(s) = self.channels.samples_per_symbol {
            return s;
        }
        let band = self.channels.count as f64 * self.channels.spacing_hz;
        (2..)
            .find(|&s| band <= MAX_BAND_FILL * s as f64 * self.channels.symbol_rate_baud)
            .expect("some sps fits")
    }

    pub fn tx_chain(&self) -> TxChain {
        let mut chain = TxChain::with_symbol_rate(self.channels.symbol_rate_baud, self.samples_per_symbol());
        chain.rrc_rolloff = self.channels.rolloff;
        chain.tx_bandwidth_hz = self.transceiver.tx_bandwidth_ratio * self.channels.symbol_rate_baud;
        chain.preemphasis_enabled = self.transceiver.preemphasis;
        chain.laser_linewidth_hz = self.transceiver.laser_linewidth_hz;
        chain
    }

    pub fn grid(&self) -> Result<ChannelGrid> {
        let occupied = self.channels.symbol_rate_baud * (1.0 + self.channels.rolloff);
        ChannelGrid::uniform(self.channels.count, self.channels.spacing_hz, self.channels.cut_wavelength_nm)?
            .with_occupied_bandwidth(occupied)
    }

    /// The config as TOML text that [`parse_config_str`] reads back unchanged.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn total_symbols(&self) -> usize {
        self.dsp.training_symbols + self.channels.payload_symbols
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.fut_kind.is_empty() || self.launch_power_dbm.is_empty() || self.n_loops.is_empty() || self.seeds.is_empty() {
            return bad("fut_kind, launch_power_dbm, n_loops and seeds must be nonempty");
        }
        if self.n_loops.contains(&0) {
            return bad("n_loops entries must be >= 1");
        }
        if self.launch_power_dbm.iter().any(|p| !p.is_finite()) {
            return bad("launch powers must be finite");
        }
        if self.channels.count == 0 || self.channels.payload_symbols == 0 {
            return bad("channel count and payload_symbols must be >= 1");
        }
        if self.workers == 0 {
            return bad("workers must be >= 1");
        }
        if self.dsp.total_dispersion_ps_per_nm != 0.0 {
            return bad("dsp.total_dispersion_ps_per_nm is computed per point and cannot be set");
        }
        if self.loop_settings.fut_loss_table.is_some() != self.loop_settings.fut_loss_table_kind.is_some() {
            return bad("loop.fut_loss_table and loop.fut_loss_table_kind go together");
        }
        self.dsp.validate()?;
        let chain = self.tx_chain();
        chain.validate()?;
        let grid = self.grid()?;
        let fs = chain.sample_rate();
        if grid.composite_bandwidth_hz() > fs {
            return Err(Error::InsufficientBandwidth {
                needed_hz: grid.composite_bandwidth_hz(),
                sample_rate_hz: fs,
            });
        }
        crate::transmitter::mb_shape_constellation(self.entropy_bits, self.base_order)?;
        self.loop_settings.step_control().validate()?;
        Ok(())
    }
}

/// Named starting points for a config file (`preset = "..."`).
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub build: fn() -> ExperimentConfig,
}

const FIG2_POWERS: [f64; 6] = [13.0, 15.0, 17.0, 19.0, 21.0, 23.0];
const FIG2_LOOPS: [usize; 6] = [1, 5, 10, 15, 20, 25];

fn fig2_grid(mut c: ExperimentConfig) -> ExperimentConfig {
    c.fut_kind = vec![FiberKind::Hcf, FiberKind::Smf];
    c.launch_power_dbm = FIG2_POWERS.to_vec();
    c.n_loops = FIG2_LOOPS.to_vec();
    c
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "scaled",
        description: "3 x 16 GBaud, 25 GHz grid, one HCF point at 23 dBm (default)",
        build: ExperimentConfig::scaled,
    },
    Preset {
        name: "full",
        description: "9 x 130 GBaud, 150 GHz grid, one HCF point at 23 dBm",
        build: ExperimentConfig::full,
    },
    Preset {
        name: "fig2",
        description: "full scale, HCF and SMF, powers 13..23 dBm, loops 1..25 (compute heavy)",
        build: || fig2_grid(ExperimentConfig::full()),
    },
    Preset {
        name: "fig2-scaled",
        description: "scaled plan on the fig2 power and loop grid",
        build: || fig2_grid(ExperimentConfig::scaled()),
    },
    Preset {
        name: "latency",
        description: "HCF and SMF, 25 loops at 23 dBm, for the monitor-trace comparison",
        build: || {
            let mut c = ExperimentConfig::scaled();
            c.fut_kind = vec![FiberKind::Hcf, FiberKind::Smf];
            c.n_loops = vec![25];
            c
        },
    },
];

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .map(|p| (p.build)())
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

/// Recursively overlays `top` on `base`.
fn merge(base: &mut toml::Value, top: toml::Value) {
    match (base, top) {
        (toml::Value::Table(b), toml::Value::Table(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parses TOML config text. `preset` and `scale` pick the base; every
/// other key overrides it. Unknown keys are rejected.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let preset_name = match table.remove("preset") {
        Some(toml::Value::String(s)) => Some(s),
        Some(_) => return Err(Error::Config("preset must be a string".into())),
        None => None,
    };
    let base = match (preset_name, table.get("scale")) {
        (Some(p), _) => preset(&p)?,
        (None, Some(s)) => {
            let scale: Scale = s
                .clone()
                .try_into()
                .map_err(|e: toml::de::Error| Error::Config(format!("scale: {e}")))?;
            ExperimentConfig::for_scale(scale)
        }
        (None, None) => ExperimentConfig::scaled(),
    };
    let mut value = toml::Value::try_from(&base).map_err(|e| Error::Config(e.to_string()))?;
    merge(&mut value, toml::Value::Table(table));
    let cfg: ExperimentConfig = value.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a TOML config, or the config echoed in a `manifest.json`.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        let cfg: ExperimentConfig = serde_json::from_value(v.get("config").cloned().unwrap_or(v))
            .map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        return Ok(cfg);
    }
    parse_config_str(&text)
}
