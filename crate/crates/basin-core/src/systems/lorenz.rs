//! The Lorenz family: autonomous and non-autonomous forms, the shifted
//! coordinate change, and the explicit a priori bounds used to certify
//! absorbing sets and parameter continuity.
//!
//! For bounded C^1 forcing `r(t)` with `|r|, |r'| <= R0`, the shifted
//! variable `w = z - sigma - r(t)` turns the system into a damped form with
//! bounded forcing `F(t) = -b(sigma + r(t)) - r'(t)`, `|F| <= F0` where
//! `F0 = b(sigma + R0) + R0`. Energy estimates then give the absorbing bound
//! `|u(t)| <= |u(0)| e^(-sigma0 t) + F0 / sqrt(2 sigma0 b)` with
//! `sigma0 = min(1, sigma, b/2)`, and a Gronwall bound on the difference of
//! two solutions at nearby parameter points.

use alloc::string::ToString;

use crate::fp;
use crate::ode::IntegratorConfig;
use crate::process::{evolve_sampled, ParameterPoint, ProcessDef, ProcessError, VectorField};
use crate::report::{BoundReport, CheckAccumulator};
use crate::systems::forcing::SinusoidSum;

/// Sampling stride for trajectory bound checks; the inequalities are
/// continuous-time, dense sampling approximates the sup.
pub const BOUND_SAMPLE_STRIDE: f64 = 0.01;

/// Parameters of the autonomous system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzParams {
    pub sigma: f64,
    pub b: f64,
    pub r: f64,
}

impl LorenzParams {
    /// The standard choice (10, 8/3, 28).
    pub fn standard() -> Self {
        LorenzParams {
            sigma: 10.0,
            b: 8.0 / 3.0,
            r: 28.0,
        }
    }

    pub fn validate(&self) -> Result<(), ProcessError> {
        for (name, v) in [("sigma", self.sigma), ("b", self.b), ("r", self.r)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ProcessError::BadParameter {
                    name: name.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Right-hand side of the autonomous system.
pub fn lorenz_field(sigma: f64, b: f64, r: f64, x: &[f64; 3]) -> [f64; 3] {
    [
        -sigma * x[0] + sigma * x[1],
        r * x[0] - x[1] - x[0] * x[2],
        -b * x[2] + x[0] * x[1],
    ]
}

/// Right-hand side with time-dependent `r(t)`.
pub fn lorenz_nonauto_field(sigma: f64, b: f64, r: &ForcingR, t: f64, x: &[f64; 3]) -> [f64; 3] {
    [
        -sigma * x[0] + sigma * x[1],
        r.r(t) * x[0] - x[1] - x[0] * x[2],
        -b * x[2] + x[0] * x[1],
    ]
}

/// Bounded C^1 forcing `r(t)` with certified bound `|r|, |r'| <= r0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingR {
    pub sum: SinusoidSum,
    r0: f64,
}

impl ForcingR {
    /// Builds from a finite sum of sinusoids. The automatic bound is
    /// `|offset| + sum |a_i| max(1, |w_i|)`, a safe overestimate for both
    /// `|r|` and `|r'|`; an explicit override replaces it.
    pub fn from_sinusoids(sum: SinusoidSum, r0_override: Option<f64>) -> Self {
        let auto = sum.combined_bound();
        ForcingR {
            sum,
            r0: r0_override.unwrap_or(auto),
        }
    }

    /// Constant forcing `r(t) = r`, for reducing to the autonomous system.
    pub fn constant(r: f64) -> Self {
        ForcingR {
            sum: SinusoidSum::constant(r),
            r0: r.abs(),
        }
    }

    pub fn r(&self, t: f64) -> f64 {
        self.sum.eval(t)
    }

    pub fn r_prime(&self, t: f64) -> f64 {
        self.sum.deriv(t)
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// Checks `|r|, |r'| <= r0` on a dense grid over `[t0, t1]`.
    pub fn validate_on_grid(&self, t0: f64, t1: f64, n: usize) -> Result<(), ProcessError> {
        let step = (t1 - t0) / n.max(1) as f64;
        for i in 0..=n {
            let t = t0 + step * i as f64;
            if self.r(t).abs() > self.r0 || self.r_prime(t).abs() > self.r0 {
                return Err(ProcessError::BadParameter {
                    name: "forcing r0".to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Shifted coordinates `u = (x, y, w)` with `w = z - sigma - r(t)`.
pub fn to_w_coords(sigma: f64, r: &ForcingR, t: f64, v: &[f64; 3]) -> [f64; 3] {
    [v[0], v[1], v[2] - sigma - r.r(t)]
}

/// Inverse of [`to_w_coords`].
pub fn from_w_coords(sigma: f64, r: &ForcingR, t: f64, u: &[f64; 3]) -> [f64; 3] {
    [u[0], u[1], u[2] + sigma + r.r(t)]
}

/// Autonomous family; `lambda = (sigma, b, r)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LorenzAuto;

impl VectorField for LorenzAuto {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, _t: f64, x: &[f64], lambda: &ParameterPoint, dxdt: &mut [f64]) {
        let out = lorenz_field(
            lambda.value(0),
            lambda.value(1),
            lambda.value(2),
            &[x[0], x[1], x[2]],
        );
        dxdt.copy_from_slice(&out);
    }
}

/// Non-autonomous family; `lambda = (sigma, b)`, forcing fixed in the field.
#[derive(Debug, Clone)]
pub struct LorenzNonAuto {
    pub forcing: ForcingR,
}

impl VectorField for LorenzNonAuto {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, t: f64, x: &[f64], lambda: &ParameterPoint, dxdt: &mut [f64]) {
        let out = lorenz_nonauto_field(
            lambda.value(0),
            lambda.value(1),
            &self.forcing,
            t,
            &[x[0], x[1], x[2]],
        );
        dxdt.copy_from_slice(&out);
    }
}

/// The same dynamics in shifted coordinates `(x, y, w)`:
/// `x' = -sigma x + sigma y`, `y' = -y - sigma x - x w`,
/// `w' = -b w + x y + F(t)` with `F(t) = -b(sigma + r(t)) - r'(t)`.
#[derive(Debug, Clone)]
pub struct LorenzShifted {
    pub forcing: ForcingR,
}

impl VectorField for LorenzShifted {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, t: f64, x: &[f64], lambda: &ParameterPoint, dxdt: &mut [f64]) {
        let sigma = lambda.value(0);
        let b = lambda.value(1);
        let big_f = -b * (sigma + self.forcing.r(t)) - self.forcing.r_prime(t);
        dxdt[0] = -sigma * x[0] + sigma * x[1];
        dxdt[1] = -x[1] - sigma * x[0] - x[0] * x[2];
        dxdt[2] = -b * x[2] + x[0] * x[1] + big_f;
    }
}

pub fn lambda_auto(p: &LorenzParams) -> ParameterPoint {
    ParameterPoint::new(&[("sigma", p.sigma), ("b", p.b), ("r", p.r)]).expect("finite params")
}

pub fn lambda_nonauto(sigma: f64, b: f64) -> ParameterPoint {
    ParameterPoint::new(&[("sigma", sigma), ("b", b)]).expect("finite params")
}

/// The explicit bound constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzBounds {
    /// `F0 = b(sigma + R0) + R0`, bound for the shifted forcing.
    pub f0: f64,
    /// `sigma0 = min(1, sigma, b/2)`, uniform decay rate.
    pub sigma0: f64,
    /// `R1 = |v(0)| + 2(sigma + R0) + F0 / sqrt(2 sigma0 b)`, trajectory bound.
    pub r1: f64,
    /// `R2 = R1 + 1/8`, Gronwall exponent rate.
    pub r2: f64,
    /// `R3 = R0 + 4 R1 + |lambda1| + |lambda2|`, parameter sensitivity factor.
    pub r3: f64,
}

/// Evaluates the bound constants for the pair of parameter points
/// `p1 = (sigma1, b1)`, `p2 = (sigma2, b2)`. `F0`, `sigma0` and `R1` use
/// `p1`, matching the estimate on the first solution.
pub fn compute_bounds(p1: (f64, f64), p2: (f64, f64), r0: f64, v0_norm: f64) -> LorenzBounds {
    let (sigma, b) = p1;
    let f0 = b * (sigma + r0) + r0;
    let sigma0 = 1.0f64.min(sigma).min(b / 2.0);
    let r1 = v0_norm + 2.0 * (sigma + r0) + f0 / fp::sqrt(2.0 * sigma0 * b);
    let r2 = r1 + 0.125;
    let lam1 = fp::sqrt(p1.0 * p1.0 + p1.1 * p1.1);
    let lam2 = fp::sqrt(p2.0 * p2.0 + p2.1 * p2.1);
    let r3 = r0 + 4.0 * r1 + lam1 + lam2;
    LorenzBounds {
        f0,
        sigma0,
        r1,
        r2,
        r3,
    }
}

/// Certified absorbing ball for the non-autonomous family, in original
/// coordinates: centered at `(0, 0, sigma)` with radius
/// `F0 / sqrt(2 sigma0 b) + 1 + R0`. Any state with `|u| <= F0/sqrt(2
/// sigma0 b) + 1` lies inside it for every `t`, and trajectories enter that
/// shifted ball by the absorbing estimate.
pub fn absorbing_ball(sigma: f64, b: f64, r0: f64) -> ([f64; 3], f64) {
    let f0 = b * (sigma + r0) + r0;
    let sigma0 = 1.0f64.min(sigma).min(b / 2.0);
    let radius = f0 / fp::sqrt(2.0 * sigma0 * b) + 1.0 + r0;
    ([0.0, 0.0, sigma], radius)
}

fn norm3(v: &[f64]) -> f64 {
    fp::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
}

/// Integrates from `t = 0` to `horizon` and checks the absorbing estimates:
/// `|u(t)|, |v(t)| <= R1` at every sample, and the decay envelope
/// `|u(t)| <= |u(0)| e^(-sigma0 t) + F0 / sqrt(2 sigma0 b)`.
pub fn verify_absorbing_bound(
    p: (f64, f64),
    forcing: &ForcingR,
    v0: &[f64; 3],
    horizon: f64,
    integrator: &IntegratorConfig,
    keep_series: bool,
) -> Result<BoundReport, ProcessError> {
    let (sigma, b) = p;
    let r0 = forcing.r0();
    let bounds = compute_bounds(p, p, r0, norm3(v0));
    let proc = ProcessDef::with_integrator(
        LorenzNonAuto {
            forcing: forcing.clone(),
        },
        *integrator,
    );
    let lambda = lambda_nonauto(sigma, b);
    let traj = evolve_sampled(&proc, &lambda, 0.0, horizon, v0, BOUND_SAMPLE_STRIDE)?;

    let tail = f0_over_root(bounds.f0, bounds.sigma0, b);
    let allowance = 10.0 * (integrator.rel_tol * bounds.r1 + integrator.abs_tol);
    let mut c_u = CheckAccumulator::new("u-absorbing (uv)", allowance, keep_series);
    let mut c_v = CheckAccumulator::new("v-absorbing (uv)", allowance, keep_series);
    let mut c_env = CheckAccumulator::new("u-decay-envelope (ut)", allowance, keep_series);
    let u0 = to_w_coords(sigma, forcing, 0.0, v0);
    let u0_norm = norm3(&u0);
    for i in 0..traj.len() {
        let t = traj.times[i];
        let v = traj.state(i);
        let u = to_w_coords(sigma, forcing, t, &[v[0], v[1], v[2]]);
        let un = norm3(&u);
        c_u.observe(t, un, bounds.r1);
        c_v.observe(t, norm3(v), bounds.r1);
        c_env.observe(t, un, u0_norm * fp::exp(-bounds.sigma0 * t) + tail);
    }

    let mut report = BoundReport::default();
    report.push_constant("sigma", sigma);
    report.push_constant("b", b);
    report.push_constant("R0", r0);
    report.push_constant("F0", bounds.f0);
    report.push_constant("sigma0", bounds.sigma0);
    report.push_constant("R1", bounds.r1);
    report.push_constant("v0_norm", norm3(v0));
    report.checks.push(c_u.finish());
    report.checks.push(c_v.finish());
    report.checks.push(c_env.finish());
    Ok(report)
}

fn f0_over_root(f0: f64, sigma0: f64, b: f64) -> f64 {
    f0 / fp::sqrt(2.0 * sigma0 * b)
}

/// Integrates two solutions from a common start and checks the difference
/// bound `|v1(t) - v2(t)| <= e^(R2 t) (|vbar(0)| + (2 + R3 sqrt t)
/// |lambda1 - lambda2|)`. The comparison runs in log space because the
/// right-hand side overflows for long horizons.
pub fn verify_difference_bound(
    p1: (f64, f64),
    p2: (f64, f64),
    forcing: &ForcingR,
    v0: &[f64; 3],
    horizon: f64,
    integrator: &IntegratorConfig,
    keep_series: bool,
) -> Result<BoundReport, ProcessError> {
    let r0 = forcing.r0();
    let bounds = compute_bounds(p1, p2, r0, norm3(v0));
    let proc = ProcessDef::with_integrator(
        LorenzNonAuto {
            forcing: forcing.clone(),
        },
        *integrator,
    );
    let la = lambda_nonauto(p1.0, p1.1);
    let lb = lambda_nonauto(p2.0, p2.1);
    let t1 = evolve_sampled(&proc, &la, 0.0, horizon, v0, BOUND_SAMPLE_STRIDE)?;
    let t2 = evolve_sampled(&proc, &lb, 0.0, horizon, v0, BOUND_SAMPLE_STRIDE)?;
    debug_assert_eq!(t1.len(), t2.len());

    let dbar = la.distance(&lb);
    // Log-space allowance: relative integration error translates into an
    // additive log-margin.
    let allowance = 10.0 * (integrator.rel_tol + integrator.abs_tol);
    let mut check = CheckAccumulator::new("difference-gronwall log (vbar)", allowance, keep_series);
    for i in 0..t1.len() {
        let t = t1.times[i];
        let a = t1.state(i);
        let c = t2.state(i);
        let diff = [a[0] - c[0], a[1] - c[1], a[2] - c[2]];
        let dn = norm3(&diff);
        let base = (2.0 + bounds.r3 * fp::sqrt(t)) * dbar;
        let log_bound = bounds.r2 * t + fp::ln(base);
        if dn == 0.0 {
            // Identical trajectories satisfy any bound; margin is pinned so
            // the accumulator sees a satisfied sample even when the bound's
            // log is -inf (lambda1 == lambda2).
            check.observe(t, 0.0, allowance.max(f64::MIN_POSITIVE));
        } else {
            check.observe(t, fp::ln(dn), log_bound);
        }
    }

    let mut report = BoundReport::default();
    report.push_constant("R0", r0);
    report.push_constant("F0", bounds.f0);
    report.push_constant("sigma0", bounds.sigma0);
    report.push_constant("R1", bounds.r1);
    report.push_constant("R2", bounds.r2);
    report.push_constant("R3", bounds.r3);
    report.push_constant("lambda_gap", dbar);
    report.checks.push(check.finish());
    Ok(report)
}
