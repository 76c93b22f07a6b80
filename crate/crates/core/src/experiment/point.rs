use num_complex::Complex64;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::dsp::{receive, Recovered};
use crate::error::Result;
use crate::fiber::{make_preset, FiberKind, FiberSpec, LossTable};
use crate::metrics::{compute_air, estimate_gmi, estimate_snr, measure_osnr, ngmi, MetricsRecord};
use crate::recirc::{load_osnr, run_loop, AmplifierSpec, LoopConfig, PowerTrace};
use crate::seed;
use crate::signal::{ChannelGrid, SignalBlock};
use crate::transmitter::{
    apply_tx_frontend, draw_shaped_symbols, mb_shape_constellation, pulse_shape_rrc, wdm_multiplex,
    ShapedConstellation, TxChain,
};

const TAG_TRAINING: u64 = 0x7EA1;
const TAG_PAYLOAD: u64 = 0xDA7A;
const TAG_LASER: u64 = 0x1A5E;
const TAG_RX_NOISE: u64 = 0x0C0A;

/// The WDM waveform at the loop input and the symbols behind each channel.
#[derive(Debug, Clone)]
pub struct Transmitted {
    pub signal: SignalBlock,
    /// `(x, y)` symbols per channel, training prefix first.
    pub symbols: Vec<(Vec<Complex64>, Vec<Complex64>)>,
    pub constellation: ShapedConstellation,
    pub chain: TxChain,
    pub grid: ChannelGrid,
}

/// Builds the transmitter output for master seed `seed`. Every sweep point
/// of that seed reuses the same waveform.
pub fn build_transmitter(cfg: &ExperimentConfig, seed: u64) -> Result<Transmitted> {
    let constellation = mb_shape_constellation(cfg.entropy_bits, cfg.base_order)?;
    let chain = cfg.tx_chain();
    let grid = cfg.grid()?;
    let train = cfg.dsp.training_symbols;
    let payload = cfg.channels.payload_symbols;
    let mut symbols = Vec::with_capacity(grid.channel_count());
    let mut channels = Vec::with_capacity(grid.channel_count());
    for c in 0..grid.channel_count() as u64 {
        let stream = |pol: u64| {
            let mut idx = draw_shaped_symbols(&constellation, train, seed::derive(seed, &[TAG_TRAINING, c, pol]));
            idx.extend(draw_shaped_symbols(&constellation, payload, seed::derive(seed, &[TAG_PAYLOAD, c, pol])));
            constellation.map(&idx)
        };
        let (sx, sy) = (stream(0), stream(1));
        let shaped = pulse_shape_rrc(&sx, &sy, &chain)?.with_seed_tag(seed::derive(seed, &[TAG_LASER, c]));
        channels.push(apply_tx_frontend(&shaped, &chain));
        symbols.push((sx, sy));
    }
    let signal = wdm_multiplex(&channels, &grid)?.set_power_dbm(cfg.loop_settings.loop_input_dbm)?;
    Ok(Transmitted {
        signal,
        symbols,
        constellation,
        chain,
        grid,
    })
}

pub fn fut_spec(cfg: &ExperimentConfig, kind: FiberKind) -> Result<FiberSpec> {
    let mut fut = make_preset(kind);
    if let (Some(path), Some(kind)) = (&cfg.loop_settings.fut_loss_table, cfg.loop_settings.fut_loss_table_kind) {
        fut.loss_table = Some(LossTable::load(path, kind)?);
    }
    Ok(fut)
}

pub fn loop_config(cfg: &ExperimentConfig, grid: &ChannelGrid, fut: FiberSpec, launch_power_dbm: f64, n_loops: usize) -> LoopConfig {
    let s = &cfg.loop_settings;
    let mut lc = LoopConfig::new(fut, grid.clone());
    lc.booster = AmplifierSpec::fixed_output(launch_power_dbm + s.voa1_trim_db, s.booster_nf_db)
        .with_max_output(s.booster_max_output_dbm);
    lc.pair_amps = [
        AmplifierSpec::fixed_gain(s.pair_amp_1_gain_db, s.pair_amp_nf_db).with_max_output(s.booster_max_output_dbm),
        AmplifierSpec::fixed_output(s.loop_input_dbm, s.pair_amp_nf_db).with_max_output(s.booster_max_output_dbm),
    ];
    lc.launch_power_dbm = launch_power_dbm;
    lc.buffering_input_dbm = s.buffering_input_dbm;
    lc.voa1_trim_db = s.voa1_trim_db;
    lc.coupler_loss_db = s.coupler_loss_db;
    lc.aom_loss_db = s.aom_loss_db;
    lc.wss_insertion_loss_db = s.wss_insertion_loss_db;
    lc.overhead_delay_us = s.overhead_delay_us;
    lc.n_loops = n_loops;
    lc.monitor_sample_interval_us = s.monitor_sample_interval_us;
    lc.step_control = s.step_control();
    lc
}

/// Key of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointKey {
    pub fut_kind: FiberKind,
    pub launch_power_dbm: f64,
    pub n_loops: usize,
    pub master_seed: u64,
    /// Seed driving all noise of this point.
    pub point_seed: u64,
}

impl PointKey {
    pub fn stem(&self) -> String {
        format!(
            "{}_p{:.2}_n{}_s{}",
            self.fut_kind, self.launch_power_dbm, self.n_loops, self.master_seed
        )
    }
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub key: PointKey,
    pub record: MetricsRecord,
    pub trace: Option<PowerTrace>,
    pub recovered: Option<Recovered>,
}

struct PointOutput {
    record: MetricsRecord,
    trace: PowerTrace,
    recovered: Recovered,
}

fn evaluate(cfg: &ExperimentConfig, tx: &Transmitted, key: &PointKey) -> Result<PointOutput> {
    let fut = fut_spec(cfg, key.fut_kind)?;
    let lc = loop_config(cfg, &tx.grid, fut.clone(), key.launch_power_dbm, key.n_loops);
    let run = run_loop(&tx.signal, &lc, key.point_seed)?;
    let mut rx = run.rx;
    if let Some(osnr) = cfg.transceiver.osnr_db {
        let per_channel = rx.power_w() / tx.grid.channel_count() as f64;
        rx = load_osnr(&rx, per_channel, osnr, seed::derive(key.point_seed, &[TAG_RX_NOISE]));
    }
    let cut = tx.grid.cut_index();
    let osnr_db = measure_osnr(&rx, &tx.grid)?[cut];

    let mut dsp = cfg.dsp.clone();
    dsp.total_dispersion_ps_per_nm = key.n_loops as f64
        * (fut.accumulated_dispersion_ps_per_nm() + lc.buffering.accumulated_dispersion_ps_per_nm());
    dsp.reference_wavelength_nm = cfg.channels.cut_wavelength_nm;
    let (kx, ky) = &tx.symbols[cut];
    let recovered = receive(&rx, &tx.grid, cut, &tx.chain, &dsp, kx, ky)?;

    let t = dsp.training_symbols;
    let rx_p = [&recovered.x[t..], &recovered.y[t..]];
    let tx_p = [&kx[t..], &ky[t..]];
    let snr_db = estimate_snr(&rx_p, &tx_p)?;
    let gmi = estimate_gmi(&rx_p, &tx_p, &tx.constellation)?;
    let record = MetricsRecord {
        fut_kind: key.fut_kind.to_string(),
        launch_power_dbm: key.launch_power_dbm,
        n_loops: key.n_loops,
        snr_db,
        osnr_db,
        gmi,
        ngmi: ngmi(gmi, tx.constellation.entropy_bits(), tx.constellation.base_order()),
        air_gbps: compute_air(gmi, cfg.channels.symbol_rate_baud),
        error: None,
    };
    Ok(PointOutput {
        record,
        trace: run.trace,
        recovered,
    })
}

/// TX → loop → DSP → metrics for one point. Failures become an error row.
pub fn run_point(cfg: &ExperimentConfig, tx: &Transmitted, key: PointKey) -> PointResult {
    match evaluate(cfg, tx, &key) {
        Ok(out) => PointResult {
            key,
            record: out.record,
            trace: Some(out.trace),
            recovered: cfg.dump_symbols.then_some(out.recovered),
        },
        Err(e) => PointResult {
            key,
            record: MetricsRecord::failed(key.fut_kind.name(), key.launch_power_dbm, key.n_loops, e.to_string()),
            trace: None,
            recovered: None,
        },
    }
}
