use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::{ChannelGrid, SignalBlock};

fn tree_sum(blocks: &[Vec<Complex64>]) -> Vec<Complex64> {
    match blocks.len() {
        1 => blocks[0].clone(),
        n => {
            let (a, b) = blocks.split_at(n / 2);
            let (a, b) = (tree_sum(a), tree_sum(b));
            a.iter().zip(&b).map(|(u, v)| u + v).collect()
        }
    }
}

/// Places each channel at its grid offset with equal per-channel power and sums.
///
/// Per-channel power is set to the mean of the input channel powers, so the
/// composite carries the summed input power.
pub fn wdm_multiplex(channels: &[SignalBlock], grid: &ChannelGrid) -> Result<SignalBlock> {
    if channels.is_empty() {
        return Err(Error::EmptySignal);
    }
    if channels.len() != grid.channel_count() {
        return Err(Error::InvalidParameter(format!(
            "{} channels supplied for a {}-channel grid",
            channels.len(),
            grid.channel_count()
        )));
    }
    let first = &channels[0];
    if channels
        .iter()
        .any(|c| c.len() != first.len() || c.sample_rate() != first.sample_rate())
    {
        return Err(Error::InvalidParameter(
            "channels must share length and sample rate".into(),
        ));
    }
    let needed = grid.composite_bandwidth_hz();
    if needed > first.sample_rate() * (1.0 + 1e-12) {
        return Err(Error::InsufficientBandwidth {
            needed_hz: needed,
            sample_rate_hz: first.sample_rate(),
        });
    }

    let powers: Vec<f64> = channels.iter().map(|c| c.power_w()).collect();
    if powers.iter().any(|&p| p <= 0.0) {
        return Err(Error::ZeroPower);
    }
    let target = powers.iter().sum::<f64>() / powers.len() as f64;

    let mut xs = Vec::with_capacity(channels.len());
    let mut ys = Vec::with_capacity(channels.len());
    for (k, (ch, p)) in channels.iter().zip(&powers).enumerate() {
        let shifted = ch.scaled((target / p).sqrt()).frequency_shift(grid.offset_hz(k));
        let (x, y) = shifted.into_parts();
        xs.push(x);
        ys.push(y);
    }
    SignalBlock::new(
        tree_sum(&xs),
        tree_sum(&ys),
        first.sample_rate(),
        grid.reference_frequency_hz(),
        first.seed_tag(),
    )
}
