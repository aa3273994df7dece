//! Bound-verification reports: evaluated a priori constants next to observed
//! trajectory quantities.

use alloc::string::String;
use alloc::vec::Vec;

/// One inequality checked along a sampled trajectory.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub name: String,
    /// True when the bound held at every sample (up to the stated margin).
    pub satisfied: bool,
    /// True when the worst margin is within ten integrator tolerances, i.e.
    /// the check passed but without numerically meaningful slack.
    pub marginal: bool,
    /// Smallest value of `bound - observed` over the samples (log-space for
    /// checks marked as such in the name).
    pub worst_margin: f64,
    pub worst_t: f64,
    pub samples: usize,
    /// `(t, observed, bound)` triples for reporting.
    pub series: Vec<(f64, f64, f64)>,
}

/// Evaluated bound constants plus the checks run against a trajectory.
#[derive(Debug, Clone, Default)]
pub struct BoundReport {
    pub constants: Vec<(String, f64)>,
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }

    pub fn push_constant(&mut self, name: &str, value: f64) {
        self.constants.push((String::from(name), value));
    }
}

/// Helper that accumulates a pointwise inequality `observed <= bound` along
/// samples and summarizes it as a [`BoundCheck`].
pub struct CheckAccumulator {
    name: String,
    margin_allowance: f64,
    worst_margin: f64,
    worst_t: f64,
    samples: usize,
    series: Vec<(f64, f64, f64)>,
    keep_series: bool,
}

impl CheckAccumulator {
    pub fn new(name: &str, margin_allowance: f64, keep_series: bool) -> Self {
        CheckAccumulator {
            name: String::from(name),
            margin_allowance,
            worst_margin: f64::INFINITY,
            worst_t: f64::NAN,
            samples: 0,
            series: Vec::new(),
            keep_series,
        }
    }

    pub fn observe(&mut self, t: f64, observed: f64, bound: f64) {
        let margin = bound - observed;
        if margin < self.worst_margin {
            self.worst_margin = margin;
            self.worst_t = t;
        }
        self.samples += 1;
        if self.keep_series {
            self.series.push((t, observed, bound));
        }
    }

    pub fn finish(self) -> BoundCheck {
        let satisfied = self.worst_margin >= -self.margin_allowance;
        let marginal = satisfied && self.worst_margin < self.margin_allowance;
        BoundCheck {
            name: self.name,
            satisfied,
            marginal,
            worst_margin: self.worst_margin,
            worst_t: self.worst_t,
            samples: self.samples,
            series: self.series,
        }
    }
}
