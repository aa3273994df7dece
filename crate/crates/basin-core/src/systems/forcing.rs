//! Finite sums of sinusoids: the scalar forcing format shared by the
//! benchmark families and the non-autonomous Lorenz system.

use alloc::vec::Vec;

use crate::fp;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinusoid {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

/// `g(t) = offset + sum_i a_i sin(w_i t + phi_i)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SinusoidSum {
    pub offset: f64,
    pub terms: Vec<Sinusoid>,
}

impl SinusoidSum {
    pub fn constant(value: f64) -> Self {
        SinusoidSum {
            offset: value,
            terms: Vec::new(),
        }
    }

    pub fn single(amplitude: f64, frequency: f64, phase: f64) -> Self {
        SinusoidSum {
            offset: 0.0,
            terms: alloc::vec![Sinusoid {
                amplitude,
                frequency,
                phase,
            }],
        }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut v = self.offset;
        for s in &self.terms {
            v += s.amplitude * fp::sin(s.frequency * t + s.phase);
        }
        v
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let mut v = 0.0;
        for s in &self.terms {
            v += s.amplitude * s.frequency * fp::cos(s.frequency * t + s.phase);
        }
        v
    }

    /// `|offset| + sum |a_i|`, an upper bound for `|g|`.
    pub fn sup_bound(&self) -> f64 {
        let mut v = self.offset.abs();
        for s in &self.terms {
            v += s.amplitude.abs();
        }
        v
    }

    /// `sum |a_i w_i|`, an upper bound for `|g'|`.
    pub fn deriv_sup_bound(&self) -> f64 {
        let mut v = 0.0;
        for s in &self.terms {
            v += (s.amplitude * s.frequency).abs();
        }
        v
    }

    /// `|offset| + sum |a_i| max(1, |w_i|)`: bounds both `|g|` and `|g'|`.
    pub fn combined_bound(&self) -> f64 {
        let mut v = self.offset.abs();
        for s in &self.terms {
            v += s.amplitude.abs() * s.frequency.abs().max(1.0);
        }
        v
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|s| s.amplitude == 0.0)
    }

    /// Distinct nonzero frequencies with nonzero amplitude.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for s in &self.terms {
            if s.amplitude != 0.0 && s.frequency != 0.0 {
                let w = s.frequency.abs();
                if !out.iter().any(|&v| v == w) {
                    out.push(w);
                }
            }
        }
        out
    }
}
