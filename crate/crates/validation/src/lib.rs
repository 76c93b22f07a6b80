//! Pass/fail bookkeeping for the acceptance suite in `tests/acceptance.rs`.

use std::fmt;

/// Outcome of one numbered acceptance criterion.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: String,
    pub checks: Vec<Check>,
}

/// One measured quantity against its tolerance.
#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(id: impl Into<String>) -> Self {
        Self { id: id.into(), checks: Vec::new() }
    }

    /// `|value - target| <= tol`.
    pub fn within(&mut self, label: &str, value: f64, target: f64, tol: f64) -> &mut Self {
        let pass = (value - target).abs() <= tol;
        self.push(label, pass, format!("{value:.6} vs {target:.6} ± {tol}"))
    }

    /// `|value / target - 1| <= rel`.
    pub fn within_rel(&mut self, label: &str, value: f64, target: f64, rel: f64) -> &mut Self {
        let pass = ((value - target) / target).abs() <= rel;
        self.push(label, pass, format!("{value:.6} vs {target:.6} ± {rel:e} relative"))
    }

    pub fn at_least(&mut self, label: &str, value: f64, bound: f64) -> &mut Self {
        self.push(label, value >= bound, format!("{value:.6} >= {bound}"))
    }

    pub fn at_most(&mut self, label: &str, value: f64, bound: f64) -> &mut Self {
        self.push(label, value <= bound, format!("{value:.6} <= {bound}"))
    }

    pub fn push(&mut self, label: &str, pass: bool, detail: String) -> &mut Self {
        self.checks.push(Check { label: label.into(), pass, detail });
        self
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.pass).map(|c| c.label.as_str()).collect();
        write!(f, "{tag} criterion {}", self.id)?;
        if !failed.is_empty() {
            write!(f, " (failed: {})", failed.join(", "))?;
        }
        for c in &self.checks {
            write!(f, "\n    [{}] {}: {}", if c.pass { "ok" } else { "x" }, c.label, c.detail)?;
        }
        Ok(())
    }
}
