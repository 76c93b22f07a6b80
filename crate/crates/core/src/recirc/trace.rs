//! Receiver-side power monitor trace with loop-boundary spikes.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub const SPIKE_HEIGHT_DB: f64 = 3.0;
pub const SPIKE_SAMPLES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerTrace {
    pub start_time_s: f64,
    pub sample_interval_s: f64,
    pub power_dbm: Vec<f64>,
    /// Sample index of the first spike sample at the end of each loop.
    pub boundary_markers: Vec<usize>,
}

impl PowerTrace {
    /// Piecewise-constant trace: loop `k` lasts `loop_delays_s[k]` at `monitor_dbm[k]`,
    /// and ends with a +3 dB, 2-sample spike.
    pub fn synthesize(loop_delays_s: &[f64], monitor_dbm: &[f64], sample_interval_s: f64) -> Result<Self> {
        if loop_delays_s.len() != monitor_dbm.len() {
            return Err(Error::LengthMismatch(loop_delays_s.len(), monitor_dbm.len()));
        }
        if loop_delays_s.is_empty() || !(sample_interval_s > 0.0) {
            return Err(Error::InvalidParameter("trace needs >= 1 loop and interval > 0".into()));
        }
        let mut ends = Vec::with_capacity(loop_delays_s.len());
        let mut t = 0.0;
        for &d in loop_delays_s {
            t += d;
            ends.push(t);
        }
        let markers: Vec<usize> = ends
            .iter()
            .map(|&e| (e / sample_interval_s + 1e-9).floor() as usize)
            .collect();
        if markers.windows(2).any(|w| w[1] < w[0] + SPIKE_SAMPLES) {
            return Err(Error::InvalidParameter(
                "monitor sample interval too coarse for loop delay".into(),
            ));
        }
        let len = markers.last().unwrap() + SPIKE_SAMPLES;
        let mut power = Vec::with_capacity(len);
        let mut seg = 0;
        for i in 0..len {
            let ti = i as f64 * sample_interval_s;
            while seg + 1 < ends.len() && ti >= ends[seg] {
                seg += 1;
            }
            power.push(monitor_dbm[seg]);
        }
        for &m in &markers {
            for p in power.iter_mut().skip(m).take(SPIKE_SAMPLES) {
                *p += SPIKE_HEIGHT_DB;
            }
        }
        Ok(Self {
            start_time_s: 0.0,
            sample_interval_s,
            power_dbm: power,
            boundary_markers: markers,
        })
    }

    pub fn duration_s(&self) -> f64 {
        self.power_dbm.len() as f64 * self.sample_interval_s
    }

    /// Two-column `time_us power_dbm` text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# start_time_s {:.17e}", self.start_time_s);
        let _ = writeln!(out, "# sample_interval_s {:.17e}", self.sample_interval_s);
        let _ = writeln!(out, "# time_us power_dbm");
        for (i, p) in self.power_dbm.iter().enumerate() {
            let t = (self.start_time_s + i as f64 * self.sample_interval_s) * 1e6;
            let _ = writeln!(out, "{t:.6} {p:.6}");
        }
        out
    }

    pub fn markers_to_text(&self) -> String {
        let mut out = String::from("# marker_sample_index\n");
        for m in &self.boundary_markers {
            let _ = writeln!(out, "{m}");
        }
        out
    }

    /// Writes `<stem>.txt` and `<stem>.markers.txt` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.txt")), self.to_text())?;
        std::fs::write(dir.join(format!("{stem}.markers.txt")), self.markers_to_text())?;
        Ok(())
    }

    /// Parses the two-column export. Markers are left empty.
    pub fn parse(text: &str) -> Result<Self> {
        let mut start = None;
        let mut interval = None;
        let mut times = Vec::new();
        let mut power = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                match (it.next(), it.next()) {
                    (Some("start_time_s"), Some(v)) => start = v.parse().ok(),
                    (Some("sample_interval_s"), Some(v)) => interval = v.parse().ok(),
                    _ => {}
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let t: f64 = parse_col(cols.next())?;
            let p: f64 = parse_col(cols.next())?;
            times.push(t);
            power.push(p);
        }
        if power.is_empty() {
            return Err(Error::Format("trace has no samples".into()));
        }
        let interval = match interval {
            Some(v) => v,
            None if times.len() >= 2 => (times[1] - times[0]) * 1e-6,
            None => return Err(Error::Format("cannot infer sample interval".into())),
        };
        Ok(Self {
            start_time_s: start.unwrap_or(times[0] * 1e-6),
            sample_interval_s: interval,
            power_dbm: power,
            boundary_markers: Vec::new(),
        })
    }

    /// Reads a trace and, if present, its sibling `.markers.txt` file.
    pub fn read(path: &Path) -> Result<Self> {
        let mut trace = Self::parse(&std::fs::read_to_string(path)?)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let markers = path.with_file_name(format!("{stem}.markers.txt"));
        if markers.exists() {
            trace.boundary_markers = std::fs::read_to_string(markers)?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| l.parse::<usize>().map_err(|e| Error::Format(e.to_string())))
                .collect::<Result<_>>()?;
        }
        Ok(trace)
    }
}

fn parse_col(s: Option<&str>) -> Result<f64> {
    s.ok_or_else(|| Error::Format("missing trace column".into()))?
        .parse()
        .map_err(|e| Error::Format(format!("trace value: {e}")))
}
