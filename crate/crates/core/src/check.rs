//! Pass/fail records carrying the measured value and its tolerance.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    AtMost,
    Above,
    Boolean,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip)]
    pub comparison: Comparison,
}

impl Check {
    /// Passes when `measured ≤ tolerance` (NaN fails).
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            pass: measured <= tolerance,
            comparison: Comparison::AtMost,
        }
    }

    /// Passes when `measured > threshold`.
    pub fn above(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance: threshold,
            pass: measured > threshold,
            comparison: Comparison::Above,
        }
    }

    /// Boolean outcome; measured is 1 for true and must equal the tolerance 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            measured: if ok { 1.0 } else { 0.0 },
            tolerance: 1.0,
            pass: ok,
            comparison: Comparison::Boolean,
        }
    }

    /// Re-evaluates an upper-bound check against another tolerance; other
    /// kinds are returned unchanged.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        if self.comparison == Comparison::AtMost {
            self.tolerance = tolerance;
            self.pass = self.measured <= tolerance;
        }
        self
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_never_passes() {
        assert!(!Check::at_most("x", f64::NAN, 1.0).pass);
        assert!(!Check::above("x", f64::NAN, 0.0).pass);
    }

    #[test]
    fn retolerance_only_touches_bounds() {
        let c = Check::at_most("x", 1e-7, 1e-8).with_tolerance(1e-6);
        assert!(c.pass);
        let b = Check::holds("y", false).with_tolerance(10.0);
        assert!(!b.pass);
    }
}
