//! The two-parameter solution operator `S_lambda(t, s)` of a non-autonomous
//! system, realized by numerical integration of a vector field family.
//!
//! `evolve` satisfies the process laws: identity at `t == s` exactly, the
//! cocycle law within integrator tolerance, and continuity in the initial
//! state. All functions here are pure and deterministic; cloud evolution maps
//! points sequentially and re-sorts, so results never depend on evaluation
//! order.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::fp;
use crate::geometry::{merge_dedup, GeometryError, PointCloud};
use crate::ode::{self, IntegratorConfig, OdeError, Trajectory};

/// A time-dependent vector field family `f(t, x; lambda)`.
pub trait VectorField {
    fn dim(&self) -> usize;

    /// Writes `f(t, x; lambda)` into `dxdt`.
    fn eval(&self, t: f64, x: &[f64], lambda: &ParameterPoint, dxdt: &mut [f64]);
}

/// A point `lambda` in parameter space: named real coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPoint {
    coords: Vec<(String, f64)>,
}

impl ParameterPoint {
    pub fn new(pairs: &[(&str, f64)]) -> Result<Self, ProcessError> {
        let mut coords = Vec::with_capacity(pairs.len());
        for (name, value) in pairs {
            if !value.is_finite() {
                return Err(ProcessError::BadParameter {
                    name: String::from(*name),
                });
            }
            if coords.iter().any(|(n, _): &(String, f64)| n == name) {
                return Err(ProcessError::BadParameter {
                    name: String::from(*name),
                });
            }
            coords.push((String::from(*name), *value));
        }
        Ok(ParameterPoint { coords })
    }

    /// Single unnamed-style coordinate, for scalar families.
    pub fn scalar(name: &str, value: f64) -> Self {
        Self::new(&[(name, value)]).expect("finite scalar parameter")
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Coordinate by position.
    pub fn value(&self, i: usize) -> f64 {
        self.coords[i].1
    }

    pub fn name(&self, i: usize) -> &str {
        &self.coords[i].0
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.coords
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.coords.iter().map(|(n, _)| n.as_str())
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.coords.iter().map(|(_, v)| *v)
    }

    /// Euclidean norm of the coordinate vector.
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for (_, v) in &self.coords {
            s += v * v;
        }
        fp::sqrt(s)
    }

    /// Euclidean distance in parameter space. Panics if the axes differ;
    /// grids guarantee matching axes by construction.
    pub fn distance(&self, other: &ParameterPoint) -> f64 {
        assert_eq!(self.len(), other.len(), "parameter axes differ");
        let mut s = 0.0;
        for (a, b) in self.coords.iter().zip(other.coords.iter()) {
            debug_assert_eq!(a.0, b.0, "parameter axes differ");
            let d = a.1 - b.1;
            s += d * d;
        }
        fp::sqrt(s)
    }
}

impl fmt::Display for ParameterPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, v)) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n} = {v}")?;
        }
        Ok(())
    }
}

/// A vector field family together with the settings that realize its
/// process: blow-up guard and integrator tolerances.
#[derive(Debug, Clone)]
pub struct ProcessDef<F> {
    pub field: F,
    /// Trajectories whose norm exceeds this radius are rejected as blown up.
    pub guard_radius: f64,
    pub integrator: IntegratorConfig,
}

impl<F: VectorField> ProcessDef<F> {
    pub fn new(field: F) -> Self {
        ProcessDef {
            field,
            guard_radius: 1e6,
            integrator: IntegratorConfig::default(),
        }
    }

    pub fn with_integrator(field: F, integrator: IntegratorConfig) -> Self {
        ProcessDef {
            field,
            guard_radius: 1e6,
            integrator,
        }
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProcessError {
    Ode(OdeError),
    Geometry(GeometryError),
    DimMismatch { expected: usize, got: usize },
    BadParameter { name: String },
    /// Every point of an evolved cloud blew up under the drop policy.
    AllPointsBlewUp,
}

impl fmt::Display for ProcessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcessError::Ode(e) => write!(f, "{e}"),
            ProcessError::Geometry(e) => write!(f, "{e}"),
            ProcessError::DimMismatch { expected, got } => {
                write!(f, "state dimension mismatch: expected {expected}, got {got}")
            }
            ProcessError::BadParameter { name } => {
                write!(f, "parameter '{name}' is duplicated or non-finite")
            }
            ProcessError::AllPointsBlewUp => write!(f, "every point of the cloud blew up"),
        }
    }
}

impl core::error::Error for ProcessError {}

impl From<OdeError> for ProcessError {
    fn from(e: OdeError) -> Self {
        ProcessError::Ode(e)
    }
}

impl From<GeometryError> for ProcessError {
    fn from(e: GeometryError) -> Self {
        ProcessError::Geometry(e)
    }
}

/// What to do when individual points of a cloud blow up during evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlowupPolicy {
    /// Abort the whole cloud evolution on the first failing point.
    #[default]
    Abort,
    /// Drop failing points and report how many were lost.
    DropBlown,
}

/// Result of evolving a cloud: the merged image and the number of points
/// dropped under [`BlowupPolicy::DropBlown`].
#[derive(Debug, Clone)]
pub struct CloudEvolution {
    pub cloud: PointCloud,
    pub dropped: usize,
}

/// `S_lambda(t, s) x0`: the state at time `t` of the solution through
/// `(s, x0)`. Returns `x0` exactly when `t == s`.
pub fn evolve<F: VectorField>(
    proc: &ProcessDef<F>,
    lambda: &ParameterPoint,
    s: f64,
    t: f64,
    x0: &[f64],
) -> Result<Vec<f64>, ProcessError> {
    check_dim(proc, x0)?;
    let field = &proc.field;
    ode::integrate(
        |tt, x, dx| field.eval(tt, x, lambda, dx),
        s,
        t,
        x0,
        &proc.integrator,
        proc.guard_radius,
    )
    .map_err(ProcessError::from)
}

/// Like [`evolve`] but records the state at `s, s + stride, ...` and `t`.
pub fn evolve_sampled<F: VectorField>(
    proc: &ProcessDef<F>,
    lambda: &ParameterPoint,
    s: f64,
    t: f64,
    x0: &[f64],
    stride: f64,
) -> Result<Trajectory, ProcessError> {
    check_dim(proc, x0)?;
    let field = &proc.field;
    ode::integrate_sampled(
        |tt, x, dx| field.eval(tt, x, lambda, dx),
        s,
        t,
        x0,
        &proc.integrator,
        proc.guard_radius,
        stride,
    )
    .map_err(ProcessError::from)
}

fn check_dim<F: VectorField>(proc: &ProcessDef<F>, x0: &[f64]) -> Result<(), ProcessError> {
    if x0.len() != proc.dim() {
        return Err(ProcessError::DimMismatch {
            expected: proc.dim(),
            got: x0.len(),
        });
    }
    Ok(())
}

/// Image of a cloud under the process, merged at `merge_radius`. The image
/// has at most as many points as the input.
pub fn evolve_cloud<F: VectorField>(
    proc: &ProcessDef<F>,
    lambda: &ParameterPoint,
    s: f64,
    t: f64,
    a: &PointCloud,
    merge_radius: f64,
    policy: BlowupPolicy,
) -> Result<CloudEvolution, ProcessError> {
    if a.dim() != proc.dim() {
        return Err(ProcessError::DimMismatch {
            expected: proc.dim(),
            got: a.dim(),
        });
    }
    let mut images: Vec<f64> = Vec::with_capacity(a.len() * a.dim());
    let mut dropped = 0usize;
    for p in a.iter() {
        match evolve(proc, lambda, s, t, p) {
            Ok(y) => images.extend_from_slice(&y),
            Err(e @ ProcessError::Ode(OdeError::Blowup { .. })) => match policy {
                BlowupPolicy::Abort => return Err(e),
                BlowupPolicy::DropBlown => dropped += 1,
            },
            Err(e) => return Err(e),
        }
    }
    if images.is_empty() {
        return Err(ProcessError::AllPointsBlewUp);
    }
    let cloud = merge_dedup(&PointCloud::from_flat(a.dim(), images)?, merge_radius);
    Ok(CloudEvolution { cloud, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::semi_distance;
    use crate::sampling;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// x' = -x componentwise, any dimension.
    struct Contraction {
        dim: usize,
    }

    impl VectorField for Contraction {
        fn dim(&self) -> usize {
            self.dim
        }
        fn eval(&self, _t: f64, x: &[f64], _l: &ParameterPoint, dxdt: &mut [f64]) {
            for i in 0..x.len() {
                dxdt[i] = -x[i];
            }
        }
    }

    fn lam() -> ParameterPoint {
        ParameterPoint::scalar("lambda", 1.0)
    }

    #[test]
    fn identity_law_is_exact() {
        let proc = ProcessDef::new(Contraction { dim: 3 });
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x0: Vec<f64> = (0..3).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let s = rng.gen_range(-5.0..5.0);
            let y = evolve(&proc, &lam(), s, s, &x0).unwrap();
            assert_eq!(y, x0);
        }
    }

    #[test]
    fn scalar_decay() {
        let proc = ProcessDef::new(Contraction { dim: 1 });
        let y = evolve(&proc, &lam(), 0.0, 1.0, &[1.0]).unwrap();
        assert_relative_eq!(y[0], (-1.0f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn cocycle_law_within_tolerance() {
        let proc = ProcessDef::new(Contraction { dim: 2 });
        let rel = proc.integrator.rel_tol;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let x0 = alloc::vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let s = rng.gen_range(-2.0..0.0);
            let tau = s + rng.gen_range(0.1..3.0);
            let t = tau + rng.gen_range(0.1..3.0);
            let direct = evolve(&proc, &lam(), s, t, &x0).unwrap();
            let mid = evolve(&proc, &lam(), s, tau, &x0).unwrap();
            let composed = evolve(&proc, &lam(), tau, t, &mid).unwrap();
            let norm: f64 = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
            for i in 0..2 {
                assert!((direct[i] - composed[i]).abs() <= 10.0 * rel * (1.0 + norm));
            }
        }
    }

    #[test]
    fn initial_state_outside_guard_is_rejected() {
        let mut proc = ProcessDef::new(Contraction { dim: 1 });
        proc.guard_radius = 10.0;
        assert!(matches!(
            evolve(&proc, &lam(), 0.0, 1.0, &[11.0]),
            Err(ProcessError::Ode(OdeError::Blowup { .. }))
        ));
    }

    #[test]
    fn cloud_contracts_to_origin() {
        let proc = ProcessDef::new(Contraction { dim: 1 });
        let a = sampling::interval_lattice(-2.0, 2.0, 401).unwrap();
        let ev = evolve_cloud(&proc, &lam(), 0.0, 20.0, &a, 0.0, BlowupPolicy::Abort).unwrap();
        let origin = PointCloud::singleton(&[0.0]).unwrap();
        assert!(semi_distance(&ev.cloud, &origin).unwrap() <= 1e-6);
        assert!(ev.cloud.len() <= a.len());
    }

    #[test]
    fn equal_times_leaves_cloud_unchanged_up_to_dedup() {
        let proc = ProcessDef::new(Contraction { dim: 2 });
        let a = PointCloud::from_rows(2, &[alloc::vec![0.0, 1.0], alloc::vec![1.0, 0.0]]).unwrap();
        let ev = evolve_cloud(&proc, &lam(), 3.0, 3.0, &a, 0.0, BlowupPolicy::Abort).unwrap();
        assert_eq!(ev.cloud, merge_dedup(&a, 0.0));
    }

    #[test]
    fn singleton_image_is_singleton() {
        let proc = ProcessDef::new(Contraction { dim: 2 });
        let a = PointCloud::singleton(&[1.0, -1.0]).unwrap();
        let ev = evolve_cloud(&proc, &lam(), 0.0, 1.0, &a, 0.0, BlowupPolicy::Abort).unwrap();
        assert_eq!(ev.cloud.len(), 1);
    }

    /// x' = x^2 blows up in finite time for x0 > 0.
    struct Quadratic;

    impl VectorField for Quadratic {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, _t: f64, x: &[f64], _l: &ParameterPoint, dxdt: &mut [f64]) {
            dxdt[0] = x[0] * x[0];
        }
    }

    #[test]
    fn drop_policy_counts_lost_points() {
        let proc = ProcessDef::new(Quadratic);
        let a = PointCloud::from_rows(
            1,
            &[alloc::vec![-1.0], alloc::vec![-0.5], alloc::vec![1.0]],
        )
        .unwrap();
        let ev = evolve_cloud(&proc, &lam(), 0.0, 3.0, &a, 0.0, BlowupPolicy::DropBlown).unwrap();
        assert_eq!(ev.dropped, 1);
        assert_eq!(ev.cloud.len(), 2);
        let err = evolve_cloud(&proc, &lam(), 0.0, 3.0, &a, 0.0, BlowupPolicy::Abort);
        assert!(matches!(err, Err(ProcessError::Ode(OdeError::Blowup { .. }))));
    }

    #[test]
    fn parameter_point_accessors() {
        let p = ParameterPoint::new(&[("sigma", 10.0), ("b", 8.0 / 3.0)]).unwrap();
        assert_eq!(p.get("sigma"), Some(10.0));
        assert_eq!(p.value(1), 8.0 / 3.0);
        assert!(ParameterPoint::new(&[("a", 1.0), ("a", 2.0)]).is_err());
        assert!(ParameterPoint::new(&[("a", f64::NAN)]).is_err());
        let q = ParameterPoint::new(&[("sigma", 10.0), ("b", 8.0 / 3.0 + 0.3)]).unwrap();
        assert_relative_eq!(p.distance(&q), 0.3, epsilon = 1e-12);
    }
}
