//! Run reports: resolved parameters, checks, flags and diagnostics of one scenario run.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bounds::{SeriesGap, SolverTally};
use crate::dynamics::IntegrationDiagnostics;

/// One pass/fail check `value <= threshold` (or `>=`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub relation: &'static str,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.to_string(), passed: value <= threshold, value, threshold, relation: "<=" }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.to_string(), passed: value >= threshold, value, threshold, relation: ">=" }
    }

    pub fn flag(name: &str, passed: bool) -> Self {
        Self { name: name.to_string(), passed, value: passed as u8 as f64, threshold: 1.0, relation: "==" }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub version: String,
    pub params: serde_json::Value,
    pub grid: Option<crate::dynamics::TimeGrid>,
    /// Series columns, in file order.
    pub columns: Vec<String>,
    pub summary: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    /// Numerical policies that fired during the run.
    pub flags: Vec<String>,
    pub notes: Vec<String>,
    pub diagnostics: Option<IntegrationDiagnostics>,
    pub solver: Option<SolverTally>,
    pub gaps: Vec<SeriesGap>,
    pub artifacts: Vec<String>,
    pub passed: bool,
}

impl RunReport {
    pub fn new(scenario: &str, params: serde_json::Value) -> Self {
        Self {
            scenario: scenario.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            params,
            ..Default::default()
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn flag(&mut self, f: &str) {
        if !self.flags.iter().any(|x| x == f) {
            self.flags.push(f.to_string());
        }
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.summary.insert(key.to_string(), value);
    }

    /// Sets `passed` to the conjunction of all checks.
    pub fn finish(&mut self) {
        self.passed = self.checks.iter().all(|c| c.passed);
    }

    /// Records the integrator policies that fired.
    pub fn absorb_diagnostics(&mut self, d: &IntegrationDiagnostics) {
        if d.total_renormalization > 0.0 {
            self.flag("trace_renormalization");
        }
        if d.positivity_clamps > 0 {
            self.flag("positivity_clamp");
        }
        if d.positivity_warnings > 0 {
            self.flag("positivity_warning");
        }
        if d.refinements > 0 {
            self.flag("substep_refinement");
        }
        self.diagnostics = Some(d.clone());
    }

    pub fn absorb_gaps(&mut self, gaps: &[SeriesGap]) {
        if gaps.iter().any(|g| g.clamped) {
            self.flag("lambda_clamp");
        }
        if !gaps.is_empty() {
            self.flag("series_gaps");
        }
        self.gaps.extend_from_slice(gaps);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
