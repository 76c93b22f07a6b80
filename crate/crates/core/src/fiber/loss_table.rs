//! Wavelength-dependent loss loaded from a two-column text table.
//!
//! ```text
//! # wavelength_nm  loss
//! 1540.0  1.9
//! 1560.0  1.5
//! ```
//!
//! Blank lines and `#` comments are ignored. Values are interpolated
//! linearly and held constant beyond the table ends.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossTableKind {
    /// Values are dB/km and replace the flat attenuation.
    PerKm,
    /// Values are dB and replace the flat lumped loss.
    Lumped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossTable {
    pub kind: LossTableKind,
    pub points: Vec<(f64, f64)>,
}

impl LossTable {
    pub fn parse(text: &str, kind: LossTableKind) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty());
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Format(format!("loss table line {}: missing column", lineno + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("loss table line {}: {e}", lineno + 1)))
            };
            let wl = parse(cols.next())?;
            let v = parse(cols.next())?;
            if v < 0.0 {
                return Err(Error::Format(format!(
                    "loss table line {}: negative loss",
                    lineno + 1
                )));
            }
            points.push((wl, v));
        }
        if points.is_empty() {
            return Err(Error::Format("loss table has no rows".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Format("duplicate wavelength in loss table".into()));
        }
        Ok(Self { kind, points })
    }

    pub fn load(path: &Path, kind: LossTableKind) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, kind)
    }

    pub fn value_at(&self, wavelength_nm: f64) -> f64 {
        let p = &self.points;
        if wavelength_nm <= p[0].0 {
            return p[0].1;
        }
        if wavelength_nm >= p[p.len() - 1].0 {
            return p[p.len() - 1].1;
        }
        let i = p.partition_point(|q| q.0 <= wavelength_nm);
        let (a, b) = (p[i - 1], p[i]);
        a.1 + (b.1 - a.1) * (wavelength_nm - a.0) / (b.0 - a.0)
    }
}
