//! Pullback attractor sections via the deep-start limit, and uniform
//! attractor approximations via windowed unions of shifted images.
//!
//! A pullback section at time `t` is approximated by evolving an absorbing
//! set `D` from ever earlier start times `s` and watching the Hausdorff
//! distance between consecutive images settle below tolerance. A uniform
//! attractor is approximated by the union over a grid of start times `s` of
//! the window images `S(s + T, s) K`, with the window `T` doubled until the
//! approximation stops moving.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{hausdorff, merge_dedup, semi_distance, GeometryError, PointCloud};
use crate::process::{
    evolve_cloud, BlowupPolicy, ParameterPoint, ProcessDef, ProcessError, VectorField,
};

#[derive(Debug, Clone, PartialEq)]
pub enum AttractorError {
    /// Evolution failed; carries the parameter point and start time.
    Evolution {
        lambda: String,
        s: f64,
        source: ProcessError,
    },
    Geometry(GeometryError),
    BadSchedule(&'static str),
    Precondition(&'static str),
}

impl fmt::Display for AttractorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttractorError::Evolution { lambda, s, source } => {
                write!(f, "evolution failed at lambda = ({lambda}), s = {s}: {source}")
            }
            AttractorError::Geometry(e) => write!(f, "{e}"),
            AttractorError::BadSchedule(msg) => write!(f, "bad schedule: {msg}"),
            AttractorError::Precondition(msg) => write!(f, "precondition violated: {msg}"),
        }
    }
}

impl core::error::Error for AttractorError {}

impl From<GeometryError> for AttractorError {
    fn from(e: GeometryError) -> Self {
        AttractorError::Geometry(e)
    }
}

/// Start times for the pullback limit plus the convergence rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PullbackSchedule {
    /// Strictly decreasing start times, all at or before the target time.
    pub s_list: Vec<f64>,
    /// Hausdorff distance between consecutive iterates that counts as
    /// settled.
    pub tol: f64,
    /// How many consecutive sub-tolerance steps are required; two guards
    /// against a single accidentally small step.
    pub consecutive_required: usize,
}

impl PullbackSchedule {
    /// Geometric deepening `s_k = t - t0 * 2^k`: exponential attraction
    /// makes doubling depths efficient.
    pub fn geometric(t: f64, t0: f64, levels: usize) -> Self {
        let mut s_list = Vec::with_capacity(levels);
        let mut depth = t0;
        for _ in 0..levels {
            s_list.push(t - depth);
            depth *= 2.0;
        }
        PullbackSchedule {
            s_list,
            tol: 1e-6,
            consecutive_required: 2,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self, t: f64) -> Result<(), AttractorError> {
        if self.s_list.is_empty() {
            return Err(AttractorError::BadSchedule("empty start-time list"));
        }
        if self.s_list.iter().any(|s| !s.is_finite() || *s > t) {
            return Err(AttractorError::BadSchedule(
                "start times must be finite and at or before the target time",
            ));
        }
        if self.s_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(AttractorError::BadSchedule(
                "start times must be strictly decreasing",
            ));
        }
        if !(self.tol > 0.0) {
            return Err(AttractorError::BadSchedule("tolerance must be positive"));
        }
        if self.consecutive_required == 0 {
            return Err(AttractorError::BadSchedule(
                "consecutive_required must be at least 1",
            ));
        }
        Ok(())
    }

    /// Default merge radius `tol / 4`, small enough that merging never masks
    /// convergence decisions.
    pub fn default_merge_radius(&self) -> f64 {
        self.tol / 4.0
    }
}

/// A pullback attractor section: the settled image cloud plus convergence
/// metadata.
#[derive(Debug, Clone)]
pub struct AttractorSection {
    pub t: f64,
    pub lambda: ParameterPoint,
    pub cloud: PointCloud,
    /// Deepest start time actually used.
    pub s_converged: f64,
    /// `(s, Hausdorff distance to the previous iterate)` per deepening step.
    pub history: Vec<(f64, f64)>,
    pub converged: bool,
}

fn evo_err(lambda: &ParameterPoint, s: f64) -> impl FnOnce(ProcessError) -> AttractorError + '_ {
    move |source| AttractorError::Evolution {
        lambda: format!("{lambda}"),
        s,
        source,
    }
}

/// Approximates the pullback attractor section `A_lambda(t)` as the limit of
/// the images `S_lambda(t, s) D` for `s` running down the schedule.
///
/// `d` must contain (and absorb) the attractor section; callers supply a
/// certified absorbing set such as the ball from the Lorenz bounds.
/// Convergence is declared after `consecutive_required` consecutive
/// sub-tolerance steps; exhausting the schedule is not an error but is
/// flagged in the result.
pub fn pullback_section<F: VectorField>(
    proc: &ProcessDef<F>,
    lambda: &ParameterPoint,
    t: f64,
    d: &PointCloud,
    sched: &PullbackSchedule,
    merge_radius: f64,
) -> Result<AttractorSection, AttractorError> {
    sched.validate(t)?;
    let mut history = Vec::new();
    let mut consecutive = 0usize;
    let mut prev: Option<PointCloud> = None;
    let mut s_used = sched.s_list[0];
    let mut converged = false;
    for &s in &sched.s_list {
        let ev = evolve_cloud(proc, lambda, s, t, d, merge_radius, BlowupPolicy::Abort)
            .map_err(evo_err(lambda, s))?;
        let cloud = ev.cloud;
        if let Some(p) = &prev {
            let delta = hausdorff(&cloud, p)?.symmetric;
            history.push((s, delta));
            if delta <= sched.tol {
                consecutive += 1;
            } else {
                consecutive = 0;
            }
        }
        prev = Some(cloud);
        s_used = s;
        if consecutive >= sched.consecutive_required {
            converged = true;
            break;
        }
    }
    Ok(AttractorSection {
        t,
        lambda: lambda.clone(),
        cloud: prev.expect("schedule validated non-empty"),
        s_converged: s_used,
        history,
        converged,
    })
}

/// Distances from each pullback iterate to the deepest one, for monotone
/// (Dini-style) convergence diagnostics: returns `(s_k, Delta(iterate_k,
/// iterate_last))` for every schedule entry.
pub fn attraction_history<F: VectorField>(
    proc: &ProcessDef<F>,
    lambda: &ParameterPoint,
    t: f64,
    d: &PointCloud,
    sched: &PullbackSchedule,
    merge_radius: f64,
) -> Result<Vec<(f64, f64)>, AttractorError> {
    sched.validate(t)?;
    let mut iterates: Vec<(f64, PointCloud)> = Vec::with_capacity(sched.s_list.len());
    for &s in &sched.s_list {
        let ev = evolve_cloud(proc, lambda, s, t, d, merge_radius, BlowupPolicy::Abort)
            .map_err(evo_err(lambda, s))?;
        iterates.push((s, ev.cloud));
    }
    let last = &iterates[iterates.len() - 1].1;
    let mut out = Vec::with_capacity(iterates.len());
    for (s, cloud) in &iterates {
        out.push((*s, hausdorff(cloud, last)?.symmetric));
    }
    Ok(out)
}

/// Carries a section at time `n` to time `t` through the process, using the
/// invariance `A(t) = S(t, n) A(n)`.
pub fn interpolate_section<F: VectorField>(
    proc: &ProcessDef<F>,
    section: &AttractorSection,
    t: f64,
) -> Result<AttractorSection, AttractorError> {
    if t < section.t {
        return Err(AttractorError::Precondition(
            "interpolation target must not precede the section time",
        ));
    }
    let ev = evolve_cloud(
        proc,
        &section.lambda,
        section.t,
        t,
        &section.cloud,
        section.cloud.resolution(),
        BlowupPolicy::Abort,
    )
    .map_err(evo_err(&section.lambda, section.t))?;
    Ok(AttractorSection {
        t,
        lambda: section.lambda.clone(),
        cloud: ev.cloud,
        s_converged: section.s_converged,
        history: section.history.clone(),
        converged: section.converged,
    })
}

/// Invariance defect `Delta(S(t1 -> t2) A(t1), A(t2))`: a quality metric for
/// the approximation (zero for the exact attractor).
pub fn invariance_residual<F: VectorField>(
    proc: &ProcessDef<F>,
    first: &AttractorSection,
    second: &AttractorSection,
) -> Result<f64, AttractorError> {
    if second.t < first.t {
        return Err(AttractorError::Precondition(
            "sections must be ordered in time",
        ));
    }
    let ev = evolve_cloud(
        proc,
        &first.lambda,
        first.t,
        second.t,
        &first.cloud,
        first.cloud.resolution(),
        BlowupPolicy::Abort,
    )
    .map_err(evo_err(&first.lambda, first.t))?;
    Ok(hausdorff(&ev.cloud, &second.cloud)?.symmetric)
}

/// Settings for the uniform attractor construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformConfig {
    /// Initial window length; doubled until the approximation settles. For
    /// periodically forced systems choose a multiple of the period so
    /// successive windows sample the same forcing phases.
    pub t_window: f64,
    /// Start times covering at least one period of the forcing (a singleton
    /// for autonomous systems).
    pub s_grid: Vec<f64>,
    pub merge_radius: f64,
    pub tol: f64,
    /// Window doublings to attempt before giving up.
    pub max_doublings: usize,
}

impl UniformConfig {
    pub fn validate(&self) -> Result<(), AttractorError> {
        if !(self.t_window > 0.0) {
            return Err(AttractorError::BadSchedule("window must be positive"));
        }
        if self.s_grid.is_empty() {
            return Err(AttractorError::BadSchedule("start-time grid is empty"));
        }
        if !(self.tol > 0.0) {
            return Err(AttractorError::BadSchedule("tolerance must be positive"));
        }
        Ok(())
    }
}

/// Approximation of the uniform attractor: the union cloud plus the window
/// history.
#[derive(Debug, Clone)]
pub struct UniformAttractorApprox {
    pub lambda: ParameterPoint,
    pub cloud: PointCloud,
    /// Final window length.
    pub t_window: f64,
    pub s_grid: Vec<f64>,
    /// `(window, Hausdorff distance to the previous approximation)`.
    pub history: Vec<(f64, f64)>,
    pub converged: bool,
}

/// Approximates the uniform attractor by the closed union over the start
/// grid of `S_lambda(s + T, s) K`, doubling the window `T` until successive
/// approximations differ by at most `tol`.
///
/// `k` must absorb bounded sets uniformly in the start time. The true object
/// takes a supremum over all real start times; the finite grid used is
/// recorded in the result.
pub fn uniform_attractor<F: VectorField>(
    proc: &ProcessDef<F>,
    lambda: &ParameterPoint,
    k: &PointCloud,
    cfg: &UniformConfig,
) -> Result<UniformAttractorApprox, AttractorError> {
    cfg.validate()?;
    let dim = k.dim();
    let mut window = cfg.t_window;
    let mut prev: Option<(f64, PointCloud)> = None;
    let mut history = Vec::new();
    let mut converged = false;
    for attempt in 0..=cfg.max_doublings {
        let mut rows: Vec<f64> = Vec::new();
        for &s in &cfg.s_grid {
            let ev = evolve_cloud(
                proc,
                lambda,
                s,
                s + window,
                k,
                cfg.merge_radius,
                BlowupPolicy::Abort,
            )
            .map_err(evo_err(lambda, s))?;
            rows.extend_from_slice(ev.cloud.flat());
        }
        let union = merge_dedup(&PointCloud::from_flat(dim, rows)?, cfg.merge_radius);
        if let Some((_, p)) = &prev {
            let delta = hausdorff(&union, p)?.symmetric;
            history.push((window, delta));
            if delta <= cfg.tol {
                prev = Some((window, union));
                converged = true;
                break;
            }
        }
        prev = Some((window, union));
        if attempt < cfg.max_doublings {
            window *= 2.0;
        }
    }
    let (final_window, cloud) = prev.expect("at least one window evaluated");
    Ok(UniformAttractorApprox {
        lambda: lambda.clone(),
        cloud,
        t_window: final_window,
        s_grid: cfg.s_grid.clone(),
        history,
        converged,
    })
}

/// Semi-distances `rho(section, uniform)` for each section: pullback
/// sections lie inside the uniform attractor, so these should be at the
/// combined-tolerance scale.
pub fn containment_check(
    uniform: &UniformAttractorApprox,
    sections: &[AttractorSection],
) -> Result<Vec<(f64, f64)>, AttractorError> {
    let mut out = Vec::with_capacity(sections.len());
    for sec in sections {
        out.push((sec.t, semi_distance(&sec.cloud, &uniform.cloud)?));
    }
    Ok(out)
}
