//! Adaptive embedded Runge-Kutta integration (Fehlberg 4(5) pair).
//!
//! The stepper controls the local error estimate from the embedded pair and
//! advances with the fifth-order solution. Long pullback windows (up to 10^3
//! time units) make error control mandatory; fixed-step integration is not
//! offered.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fp;

/// Embedded Runge-Kutta methods available to [`IntegratorConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RkMethod {
    /// Fehlberg 4(5), six stages, advanced at order five.
    #[default]
    Fehlberg45,
}

/// Tolerances and step limits for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: RkMethod,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: RkMethod::Fehlberg45,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: 1.0,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tols(rel_tol: f64, abs_tol: f64) -> Self {
        IntegratorConfig {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        if !in_unit(self.rel_tol) {
            return Err(OdeError::BadConfig("rel_tol must lie in (0, 1)"));
        }
        if !in_unit(self.abs_tol) {
            return Err(OdeError::BadConfig("abs_tol must lie in (0, 1)"));
        }
        if !(self.max_step > 0.0) || !self.max_step.is_finite() {
            return Err(OdeError::BadConfig("max_step must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeError {
    /// State norm crossed the guard radius; carries the exit time.
    Blowup { t: f64, norm: f64 },
    /// Step size control collapsed below the resolvable scale.
    StepUnderflow { t: f64 },
    /// Right-hand side produced a non-finite derivative or state.
    NonFinite { t: f64 },
    /// Backward spans are not supported.
    InvalidSpan { s: f64, t: f64 },
    BadConfig(&'static str),
}

impl fmt::Display for OdeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OdeError::Blowup { t, norm } => {
                write!(f, "trajectory blew up at t = {t} (|x| = {norm:.3e})")
            }
            OdeError::StepUnderflow { t } => write!(f, "step size underflow at t = {t}"),
            OdeError::NonFinite { t } => write!(f, "non-finite state at t = {t}"),
            OdeError::InvalidSpan { s, t } => write!(f, "invalid span: s = {s} > t = {t}"),
            OdeError::BadConfig(msg) => write!(f, "bad integrator config: {msg}"),
        }
    }
}

impl core::error::Error for OdeError {}

/// Sampled trajectory: `states` is row-major with one row per entry of
/// `times`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    pub states: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }
}

// Fehlberg 4(5) tableau.
const A21: f64 = 1.0 / 4.0;
const A31: f64 = 3.0 / 32.0;
const A32: f64 = 9.0 / 32.0;
const A41: f64 = 1932.0 / 2197.0;
const A42: f64 = -7200.0 / 2197.0;
const A43: f64 = 7296.0 / 2197.0;
const A51: f64 = 439.0 / 216.0;
const A52: f64 = -8.0;
const A53: f64 = 3680.0 / 513.0;
const A54: f64 = -845.0 / 4104.0;
const A61: f64 = -8.0 / 27.0;
const A62: f64 = 2.0;
const A63: f64 = -3544.0 / 2565.0;
const A64: f64 = 1859.0 / 4104.0;
const A65: f64 = -11.0 / 40.0;
const C2: f64 = 1.0 / 4.0;
const C3: f64 = 3.0 / 8.0;
const C4: f64 = 12.0 / 13.0;
const C5: f64 = 1.0;
const C6: f64 = 1.0 / 2.0;
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];
const B4: [f64; 6] = [
    25.0 / 216.0,
    0.0,
    1408.0 / 2565.0,
    2197.0 / 4104.0,
    -1.0 / 5.0,
    0.0,
];

const SAFETY: f64 = 0.9;
const SHRINK_LIMIT: f64 = 0.2;
const GROW_LIMIT: f64 = 5.0;

struct Stepper<'a, F> {
    f: F,
    dim: usize,
    cfg: &'a IntegratorConfig,
    guard_sq: f64,
    k: [Vec<f64>; 6],
    stage: Vec<f64>,
    y_new: Vec<f64>,
}

impl<'a, F: FnMut(f64, &[f64], &mut [f64])> Stepper<'a, F> {
    fn new(f: F, dim: usize, cfg: &'a IntegratorConfig, guard_radius: f64) -> Self {
        Stepper {
            f,
            dim,
            cfg,
            guard_sq: guard_radius * guard_radius,
            k: [
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
            ],
            stage: vec![0.0; dim],
            y_new: vec![0.0; dim],
        }
    }

    fn check_state(&self, t: f64, y: &[f64]) -> Result<(), OdeError> {
        let mut n = 0.0;
        for v in y {
            if !v.is_finite() {
                return Err(OdeError::NonFinite { t });
            }
            n += v * v;
        }
        if n > self.guard_sq {
            return Err(OdeError::Blowup { t, norm: fp::sqrt(n) });
        }
        Ok(())
    }

    /// One trial step; on success `y_new` holds the fifth-order solution and
    /// the return value is the weighted RMS error estimate.
    fn trial(&mut self, t: f64, y: &[f64], h: f64) -> f64 {
        let d = self.dim;
        (self.f)(t, y, &mut self.k[0]);
        for i in 0..d {
            self.stage[i] = y[i] + h * A21 * self.k[0][i];
        }
        (self.f)(t + C2 * h, &self.stage, &mut self.k[1]);
        for i in 0..d {
            self.stage[i] = y[i] + h * (A31 * self.k[0][i] + A32 * self.k[1][i]);
        }
        (self.f)(t + C3 * h, &self.stage, &mut self.k[2]);
        for i in 0..d {
            self.stage[i] =
                y[i] + h * (A41 * self.k[0][i] + A42 * self.k[1][i] + A43 * self.k[2][i]);
        }
        (self.f)(t + C4 * h, &self.stage, &mut self.k[3]);
        for i in 0..d {
            self.stage[i] = y[i]
                + h * (A51 * self.k[0][i]
                    + A52 * self.k[1][i]
                    + A53 * self.k[2][i]
                    + A54 * self.k[3][i]);
        }
        (self.f)(t + C5 * h, &self.stage, &mut self.k[4]);
        for i in 0..d {
            self.stage[i] = y[i]
                + h * (A61 * self.k[0][i]
                    + A62 * self.k[1][i]
                    + A63 * self.k[2][i]
                    + A64 * self.k[3][i]
                    + A65 * self.k[4][i]);
        }
        (self.f)(t + C6 * h, &self.stage, &mut self.k[5]);

        let mut err_sq = 0.0;
        for i in 0..d {
            let mut hi = 0.0;
            let mut lo = 0.0;
            for s in 0..6 {
                hi += B5[s] * self.k[s][i];
                lo += B4[s] * self.k[s][i];
            }
            let ynew = y[i] + h * hi;
            self.y_new[i] = ynew;
            let e = h * (hi - lo);
            let scale = self.cfg.abs_tol + self.cfg.rel_tol * y[i].abs().max(ynew.abs());
            let w = e / scale;
            err_sq += w * w;
        }
        fp::sqrt(err_sq / d as f64)
    }

    fn initial_step(&mut self, t0: f64, y0: &[f64], span: f64) -> f64 {
        (self.f)(t0, y0, &mut self.k[0]);
        let mut ny = 0.0;
        let mut nf = 0.0;
        for i in 0..self.dim {
            let s = self.cfg.abs_tol + self.cfg.rel_tol * y0[i].abs();
            let wy = y0[i] / s;
            let wf = self.k[0][i] / s;
            ny += wy * wy;
            nf += wf * wf;
        }
        let (ny, nf) = (fp::sqrt(ny), fp::sqrt(nf));
        let h = if nf > 1e-12 && ny > 1e-12 {
            0.01 * ny / nf
        } else {
            1e-3 * span
        };
        h.min(self.cfg.max_step).min(span).max(1e-12 * span)
    }
}

/// Integrates `y' = f(t, y)` from `(s, y0)` to time `t`, returning the final
/// state. `t == s` returns `y0` exactly. The trajectory is rejected with
/// [`OdeError::Blowup`] as soon as its norm exceeds `guard_radius`.
pub fn integrate<F>(
    f: F,
    s: f64,
    t: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
    guard_radius: f64,
) -> Result<Vec<f64>, OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    integrate_path(f, s, t, y0, cfg, guard_radius, None, |_, _| {})
}

/// Like [`integrate`], invoking `on_sample` at `s`, `s + stride`,
/// `s + 2 stride`, ... and at the final time `t` (each hit exactly by step
/// clamping).
pub fn integrate_sampled<F>(
    f: F,
    s: f64,
    t: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
    guard_radius: f64,
    stride: f64,
) -> Result<Trajectory, OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut traj = Trajectory {
        dim: y0.len(),
        times: Vec::new(),
        states: Vec::new(),
    };
    integrate_path(f, s, t, y0, cfg, guard_radius, Some(stride), |tt, y| {
        traj.times.push(tt);
        traj.states.extend_from_slice(y);
    })?;
    Ok(traj)
}

fn integrate_path<F, S>(
    f: F,
    s: f64,
    t: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
    guard_radius: f64,
    stride: Option<f64>,
    mut on_sample: S,
) -> Result<Vec<f64>, OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    S: FnMut(f64, &[f64]),
{
    cfg.validate()?;
    if let Some(st) = stride {
        if !(st > 0.0) {
            return Err(OdeError::BadConfig("sample stride must be positive"));
        }
    }
    if t < s {
        return Err(OdeError::InvalidSpan { s, t });
    }
    let dim = y0.len();
    let mut stepper = Stepper::new(f, dim, cfg, guard_radius);
    stepper.check_state(s, y0)?;
    if stride.is_some() {
        on_sample(s, y0);
    }
    if t == s {
        return Ok(y0.to_vec());
    }

    let span = t - s;
    let mut y = y0.to_vec();
    let mut tc = s;
    let mut h = stepper.initial_step(s, y0, span);
    let mut sample_idx: u64 = 1;
    let mut next_sample = stride.map(|st| s + st);

    loop {
        let remaining = t - tc;
        if remaining <= 1e-14 * t.abs().max(1.0) {
            // Within rounding of the end point.
            if stride.is_some() {
                on_sample(t, &y);
            }
            return Ok(y);
        }
        // Clamp to the next sample time so samples are hit exactly.
        let mut h_try = h.min(remaining).min(cfg.max_step);
        let mut hits_sample = false;
        if let Some(target) = next_sample {
            if target < t && target - tc <= h_try {
                h_try = target - tc;
                hits_sample = true;
            }
        }
        let at_end = !hits_sample && h_try >= remaining;

        if h_try < 1e-14 * tc.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t: tc });
        }

        let err = stepper.trial(tc, &y, h_try);
        if !err.is_finite() {
            // A non-finite error estimate means a stage escaped; shrink hard.
            h = h_try * SHRINK_LIMIT;
            if h < 1e-14 * tc.abs().max(1.0) {
                return Err(OdeError::NonFinite { t: tc });
            }
            continue;
        }
        if err <= 1.0 {
            // Accept.
            core::mem::swap(&mut y, &mut stepper.y_new);
            tc = if at_end {
                t
            } else if hits_sample {
                next_sample.unwrap()
            } else {
                tc + h_try
            };
            stepper.check_state(tc, &y)?;
            if at_end || tc >= t {
                if stride.is_some() {
                    on_sample(t, &y);
                }
                return Ok(y);
            }
            if hits_sample {
                if stride.is_some() {
                    on_sample(tc, &y);
                }
                sample_idx += 1;
                next_sample = stride.map(|st| s + st * sample_idx as f64);
            }
            let factor = if err == 0.0 {
                GROW_LIMIT
            } else {
                (SAFETY * fp::powf(err, -0.2)).clamp(SHRINK_LIMIT, GROW_LIMIT)
            };
            h = (h_try * factor).min(cfg.max_step);
        } else {
            let factor = (SAFETY * fp::powf(err, -0.2)).clamp(SHRINK_LIMIT, 1.0);
            h = h_try * factor;
        }
    }
}
