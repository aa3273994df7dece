//! Closed-form scalar benchmark families.
//!
//! The forced linear family `x' = -lambda x + g(t)` has an explicit pullback
//! attractor (the particular solution), which makes it the oracle system for
//! every attractor construction in this crate. The pitchfork normal form
//! `x' = lambda x - x^3` supplies a family whose attractor jumps in size at
//! `lambda = 0`, exercising the semicontinuity diagnostics.

use crate::fp;
use crate::process::{ParameterPoint, VectorField};
use crate::systems::forcing::SinusoidSum;

/// `x' = -lambda x + g(t)` with `lambda > 0` read from the parameter point.
pub fn linear_benchmark_field(lambda: f64, g: &SinusoidSum, t: f64, x: f64) -> f64 {
    -lambda * x + g.eval(t)
}

/// Scalar linear decay with sinusoidal forcing.
#[derive(Debug, Clone)]
pub struct LinearField {
    pub g: SinusoidSum,
}

impl LinearField {
    /// The canonical benchmark `x' = -lambda x + sin t`.
    pub fn sin_forced() -> Self {
        LinearField {
            g: SinusoidSum::single(1.0, 1.0, 0.0),
        }
    }

    pub fn unforced() -> Self {
        LinearField {
            g: SinusoidSum::constant(0.0),
        }
    }
}

impl VectorField for LinearField {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, t: f64, x: &[f64], lambda: &ParameterPoint, dxdt: &mut [f64]) {
        dxdt[0] = linear_benchmark_field(lambda.value(0), &self.g, t, x[0]);
    }
}

/// Bounded particular solution of `x' = -lambda x + sin t`:
/// `x_p(t) = (lambda sin t - cos t) / (1 + lambda^2)`.
pub fn sin_particular_solution(lambda: f64, t: f64) -> f64 {
    (lambda * fp::sin(t) - fp::cos(t)) / (1.0 + lambda * lambda)
}

/// Amplitude of the particular solution; its range is `[-a, a]`.
pub fn sin_particular_amplitude(lambda: f64) -> f64 {
    1.0 / fp::sqrt(1.0 + lambda * lambda)
}

/// `x' = lambda x - x^3`.
pub fn pitchfork_field(lambda: f64, x: f64) -> f64 {
    lambda * x - x * x * x
}

/// Pitchfork normal form; the global attractor is `{0}` for `lambda <= 0`
/// and `[-sqrt(lambda), sqrt(lambda)]` for `lambda > 0`.
#[derive(Debug, Clone, Default)]
pub struct PitchforkField;

impl VectorField for PitchforkField {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, _t: f64, x: &[f64], lambda: &ParameterPoint, dxdt: &mut [f64]) {
        dxdt[0] = pitchfork_field(lambda.value(0), x[0]);
    }
}

/// Half-width of the pitchfork attractor.
pub fn pitchfork_spread(lambda: f64) -> f64 {
    fp::sqrt(lambda.max(0.0))
}
