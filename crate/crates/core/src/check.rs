//! Pass/fail rows shared by the suites and the report writer.

use serde::Serialize;

/// One verdict: an observed quantity against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    /// Stable identifier of the property checked, e.g. `g-expectation/monotonicity`.
    pub id: String,
    pub label: String,
    pub observed: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `observed ≤ tolerance`.
    pub fn at_most(id: &str, label: impl Into<String>, observed: f64, tolerance: f64) -> Self {
        Check {
            id: id.to_string(),
            label: label.into(),
            observed,
            tolerance,
            pass: observed <= tolerance,
            detail: String::new(),
        }
    }

    pub fn flag(id: &str, label: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            id: id.to_string(),
            label: label.into(),
            observed: if pass { 1.0 } else { 0.0 },
            tolerance: 1.0,
            pass,
            detail: detail.into(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Numerical tolerances of the suites; `scaled` multiplies all of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Multiple of the standard error allowed for noise.
    pub se_multiple: f64,
    /// Path-wise RMS tolerance for regression-based identities.
    pub regression: f64,
    /// Absolute tolerance for scalar identities between two solves.
    pub scalar: f64,
    /// Tolerance for identities the scheme reproduces up to round-off.
    pub exact: f64,
    /// Smallest standard error used, so exact estimators do not yield a zero band.
    pub se_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            se_multiple: 3.0,
            regression: 0.03,
            scalar: 0.02,
            exact: 1e-8,
            se_floor: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn scaled(&self, factor: f64) -> Self {
        Tolerances {
            se_multiple: self.se_multiple * factor,
            regression: self.regression * factor,
            scalar: self.scalar * factor,
            exact: self.exact * factor,
            se_floor: self.se_floor * factor,
        }
    }

    /// `se_multiple · max(se, se_floor)`
    pub fn noise(&self, se: f64) -> f64 {
        self.se_multiple * se.max(self.se_floor)
    }
}
