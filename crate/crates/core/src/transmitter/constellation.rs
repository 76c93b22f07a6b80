//! Maxwell–Boltzmann shaped square QAM.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::error::{Error, Result};
use crate::seed;

/// Square QAM alphabet with a probability mass over its points.
///
/// Points are normalized to unit mean energy *under the shaping
/// distribution*. Bit labels are binary-reflected Gray per quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapedConstellation {
    points: Vec<Complex64>,
    probabilities: Vec<f64>,
    labels: Vec<u32>,
    entropy_bits: f64,
    base_order: usize,
    side: usize,
    scale: f64,
    nu: f64,
}

fn side_of(order: usize) -> Result<usize> {
    let side = (order as f64).sqrt().round() as usize;
    if order < 4 || side * side != order || !side.is_power_of_two() {
        return Err(Error::NonSquareOrder(order));
    }
    Ok(side)
}

/// Unnormalized grid: levels ±1, ±3, … per quadrature.
fn raw_grid(side: usize) -> (Vec<Complex64>, Vec<u32>) {
    let half_bits = side.trailing_zeros();
    let level = |i: usize| 2.0 * i as f64 - (side as f64 - 1.0);
    let gray = |i: usize| (i ^ (i >> 1)) as u32;
    let mut points = Vec::with_capacity(side * side);
    let mut labels = Vec::with_capacity(side * side);
    for i in 0..side {
        for q in 0..side {
            points.push(Complex64::new(level(i), level(q)));
            labels.push((gray(i) << half_bits) | gray(q));
        }
    }
    (points, labels)
}

fn mb_probabilities(energies: &[f64], nu: f64) -> Vec<f64> {
    let emin = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|e| (-nu * (e - emin)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

pub fn entropy_bits(probabilities: &[f64]) -> f64 {
    -probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| p * p.log2())
        .sum::<f64>()
}

/// Entropy of the MB distribution at parameter `nu` over a raw grid of the given order.
pub fn mb_entropy(order: usize, nu: f64) -> Result<f64> {
    let side = side_of(order)?;
    let (pts, _) = raw_grid(side);
    let e: Vec<f64> = pts.iter().map(|c| c.norm_sqr()).collect();
    Ok(entropy_bits(&mb_probabilities(&e, nu)))
}

impl ShapedConstellation {
    pub fn uniform(base_order: usize) -> Result<Self> {
        Self::build(base_order, 0.0)
    }

    fn build(base_order: usize, nu: f64) -> Result<Self> {
        let side = side_of(base_order)?;
        let (raw, labels) = raw_grid(side);
        let energies: Vec<f64> = raw.iter().map(|c| c.norm_sqr()).collect();
        let probabilities = mb_probabilities(&energies, nu);
        let mean_e: f64 = probabilities.iter().zip(&energies).map(|(p, e)| p * e).sum();
        let scale = 1.0 / mean_e.sqrt();
        Ok(Self {
            points: raw.into_iter().map(|c| c * scale).collect(),
            entropy_bits: entropy_bits(&probabilities),
            probabilities,
            labels,
            base_order,
            side,
            scale,
            nu,
        })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn entropy_bits(&self) -> f64 {
        self.entropy_bits
    }

    pub fn base_order(&self) -> usize {
        self.base_order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.base_order.trailing_zeros() as usize
    }

    /// Shaping parameter in units of the raw (odd-integer) grid energy.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn mean_energy(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.probabilities)
            .map(|(c, p)| p * c.norm_sqr())
            .sum()
    }

    /// Index of the closest alphabet point.
    pub fn nearest_index(&self, c: Complex64) -> usize {
        let idx = |v: f64| {
            let i = ((v / self.scale + (self.side as f64 - 1.0)) / 2.0).round();
            i.clamp(0.0, self.side as f64 - 1.0) as usize
        };
        idx(c.re) * self.side + idx(c.im)
    }

    pub fn map(&self, indices: &[usize]) -> Vec<Complex64> {
        indices.iter().map(|&i| self.points[i]).collect()
    }

    /// Text table: `index I Q probability`, one point per line.
    pub fn to_table(&self) -> String {
        let mut out = String::from("# index I Q probability\n");
        for (i, (c, p)) in self.points.iter().zip(&self.probabilities).enumerate() {
            let _ = writeln!(out, "{i} {:.17e} {:.17e} {:.17e}", c.re, c.im, p);
        }
        out
    }
}

/// Maxwell–Boltzmann shaping `p ∝ exp(-ν|c|²)` with entropy `target_entropy_bits`.
///
/// `ν` is found by bisection on the strictly decreasing map `ν → H(ν)`.
pub fn mb_shape_constellation(
    target_entropy_bits: f64,
    base_order: usize,
) -> Result<ShapedConstellation> {
    let side = side_of(base_order)?;
    let max_h = (base_order as f64).log2();
    if target_entropy_bits > max_h + 1e-12 {
        return Err(Error::EntropyExceedsLog2M {
            target: target_entropy_bits,
            order: base_order,
        });
    }
    if !(target_entropy_bits > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target entropy {target_entropy_bits} must be > 0"
        )));
    }
    if target_entropy_bits >= max_h - 1e-13 {
        return ShapedConstellation::build(base_order, 0.0);
    }

    let (raw, _) = raw_grid(side);
    let energies: Vec<f64> = raw.iter().map(|c| c.norm_sqr()).collect();
    let h = |nu: f64| entropy_bits(&mb_probabilities(&energies, nu));

    let mut lo = 0.0;
    let mut hi = 1e-3;
    while h(hi) > target_entropy_bits {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::InvalidParameter(format!(
                "entropy {target_entropy_bits} not reachable"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > target_entropy_bits {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    ShapedConstellation::build(base_order, 0.5 * (lo + hi))
}

/// Draws i.i.d. alphabet indices from the shaping distribution.
pub fn draw_shaped_symbols(
    constellation: &ShapedConstellation,
    count: usize,
    seed: u64,
) -> Vec<usize> {
    let dist = WeightedIndex::new(constellation.probabilities())
        .expect("shaping distribution has positive mass");
    let mut rng = seed::rng(seed);
    (0..count).map(|_| dist.sample(&mut rng)).collect()
}
