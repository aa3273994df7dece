//! Run configuration: a TOML file validated against the schema below, with
//! a few uniform command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use basin_core::ode::IntegratorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    LorenzAuto,
    LorenzNonauto,
    LinearBenchmark,
    PitchforkBenchmark,
    NseGalerkin,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SinusoidSpec {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Scalar forcing `offset + sum of sinusoids`; drives `r(t)` for the
/// non-autonomous Lorenz system and `g(t)` for the linear benchmark.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub terms: Vec<SinusoidSpec>,
    /// Explicit bound for `|r|, |r'|`, replacing the automatic estimate.
    #[serde(default)]
    pub r0_override: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSpec {
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

/// One forcing mode of the Galerkin system.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NseForcingSpec {
    pub k: [i32; 2],
    /// Real parts of the two velocity components.
    pub amplitude_re: [f64; 2],
    #[serde(default)]
    pub amplitude_im: [f64; 2],
    #[serde(default)]
    pub modulation: Option<ModulationSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_max_step")]
    pub max_step: f64,
}

fn default_rel_tol() -> f64 {
    1e-9
}
fn default_abs_tol() -> f64 {
    1e-12
}
fn default_max_step() -> f64 {
    1.0
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec {
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            max_step: default_max_step(),
        }
    }
}

impl IntegratorSpec {
    pub fn build(&self) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            ..IntegratorConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedKind {
    Lattice,
    Random,
}

/// The seed set `D` (or `K`): a sampled ball, or interval in one dimension.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSetSpec {
    #[serde(default = "default_seed_kind")]
    pub kind: SeedKind,
    /// Point count; defaults per system dimension when absent.
    #[serde(default)]
    pub count: Option<usize>,
    /// Ball radius; defaults to the system's certified absorbing radius.
    #[serde(default)]
    pub radius: Option<f64>,
    /// Ball center; defaults to the system's certified center.
    #[serde(default)]
    pub center: Option<Vec<f64>>,
}

fn default_seed_kind() -> SeedKind {
    SeedKind::Lattice
}

impl Default for SeedSetSpec {
    fn default() -> Self {
        SeedSetSpec {
            kind: SeedKind::Lattice,
            count: None,
            radius: None,
            center: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PullbackSpec {
    #[serde(default)]
    pub t: f64,
    /// Base depth of the geometric schedule `s_k = t - t0 * 2^k`.
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Explicit start times; overrides the geometric schedule when present.
    #[serde(default)]
    pub s_list: Option<Vec<f64>>,
    #[serde(default = "default_pullback_tol")]
    pub tol: f64,
    #[serde(default = "default_consecutive")]
    pub consecutive_required: usize,
    /// Defaults to `tol / 4` so merging never masks convergence decisions.
    #[serde(default)]
    pub merge_radius: Option<f64>,
}

fn default_t0() -> f64 {
    5.0
}
fn default_levels() -> usize {
    5
}
fn default_pullback_tol() -> f64 {
    1e-6
}
fn default_consecutive() -> usize {
    2
}

impl Default for PullbackSpec {
    fn default() -> Self {
        PullbackSpec {
            t: 0.0,
            t0: default_t0(),
            levels: default_levels(),
            s_list: None,
            tol: default_pullback_tol(),
            consecutive_required: default_consecutive(),
            merge_radius: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct UniformSpec {
    pub t_window: f64,
    #[serde(default)]
    pub s_start: f64,
    #[serde(default = "default_s_count")]
    pub s_count: usize,
    /// Span covered by the start-time grid; one forcing period typically.
    pub s_span: f64,
    #[serde(default = "default_uniform_tol")]
    pub tol: f64,
    #[serde(default = "default_doublings")]
    pub max_doublings: usize,
    #[serde(default)]
    pub merge_radius: Option<f64>,
}

fn default_s_count() -> usize {
    32
}
fn default_uniform_tol() -> f64 {
    1e-3
}
fn default_doublings() -> usize {
    8
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub axes: Vec<AxisSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EquiSpec {
    pub s_values: Vec<f64>,
    /// Directory (relative to the output directory unless absolute) holding
    /// the sections written by a previous `sweep` run.
    pub sections: PathBuf,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_v0_max")]
    pub v0_max: f64,
    #[serde(default = "default_sigma_min")]
    pub sigma_min: f64,
    #[serde(default = "default_sigma_max")]
    pub sigma_max: f64,
    #[serde(default = "default_b_min")]
    pub b_min: f64,
    #[serde(default = "default_b_max")]
    pub b_max: f64,
    /// Horizon for the two-trajectory difference bound.
    #[serde(default = "default_diff_horizon")]
    pub difference_horizon: f64,
}

fn default_trials() -> usize {
    100
}
fn default_horizon() -> f64 {
    30.0
}
fn default_v0_max() -> f64 {
    50.0
}
fn default_sigma_min() -> f64 {
    0.25
}
fn default_sigma_max() -> f64 {
    4.0
}
fn default_b_min() -> f64 {
    1.0
}
fn default_b_max() -> f64 {
    4.0
}
fn default_diff_horizon() -> f64 {
    2.0
}

impl Default for BoundsSpec {
    fn default() -> Self {
        BoundsSpec {
            trials: default_trials(),
            horizon: default_horizon(),
            v0_max: default_v0_max(),
            sigma_min: default_sigma_min(),
            sigma_max: default_sigma_max(),
            b_min: default_b_min(),
            b_max: default_b_max(),
            difference_horizon: default_diff_horizon(),
        }
    }
}

/// The whole run configuration.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// System parameters by name (sigma, b, r, lambda, nu, kmax ...).
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub forcing: Option<ForcingSpec>,
    #[serde(default)]
    pub nse_forcing: Vec<NseForcingSpec>,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub seed_set: SeedSetSpec,
    #[serde(default)]
    pub pullback: Option<PullbackSpec>,
    #[serde(default)]
    pub uniform: Option<UniformSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub equi: Option<EquiSpec>,
    #[serde(default)]
    pub bounds: Option<BoundsSpec>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn require_param(&self, name: &str) -> Result<f64> {
        self.param(name)
            .with_context(|| format!("params.{name} is required for this system"))
    }

    fn require_positive(&self, name: &str) -> Result<f64> {
        let v = self.require_param(name)?;
        if !(v > 0.0) || !v.is_finite() {
            bail!("params.{name} must be positive and finite, got {v}");
        }
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        match self.system {
            SystemKind::LorenzAuto => {
                self.require_positive("sigma")?;
                self.require_positive("b")?;
                self.require_positive("r")?;
            }
            SystemKind::LorenzNonauto => {
                self.require_positive("sigma")?;
                self.require_positive("b")?;
            }
            SystemKind::LinearBenchmark => {
                self.require_positive("lambda")?;
            }
            SystemKind::PitchforkBenchmark => {
                self.require_param("lambda")?;
            }
            SystemKind::NseGalerkin => {
                self.require_positive("nu")?;
                let kmax = self.param("kmax").unwrap_or(8.0);
                if kmax < 1.0 || kmax != kmax.trunc() {
                    bail!("params.kmax must be a positive integer, got {kmax}");
                }
            }
        }
        let it = &self.integrator;
        for (name, v) in [("rel_tol", it.rel_tol), ("abs_tol", it.abs_tol)] {
            if !(v > 0.0 && v < 1.0) {
                bail!("integrator.{name} must lie in (0, 1), got {v}");
            }
        }
        if !(it.max_step > 0.0) {
            bail!("integrator.max_step must be positive, got {}", it.max_step);
        }
        if let Some(p) = &self.pullback {
            if !(p.tol > 0.0) {
                bail!("pullback.tol must be positive, got {}", p.tol);
            }
            if p.consecutive_required == 0 {
                bail!("pullback.consecutive_required must be at least 1");
            }
            if p.s_list.is_none() && (p.levels == 0 || !(p.t0 > 0.0)) {
                bail!("pullback.levels and pullback.t0 must be positive");
            }
        }
        if let Some(u) = &self.uniform {
            if !(u.t_window > 0.0) {
                bail!("uniform.t_window must be positive, got {}", u.t_window);
            }
            if u.s_count == 0 {
                bail!("uniform.s_count must be at least 1");
            }
            if !(u.tol > 0.0) {
                bail!("uniform.tol must be positive, got {}", u.tol);
            }
        }
        if let Some(g) = &self.grid {
            if g.axes.is_empty() {
                bail!("grid.axes must not be empty");
            }
            for ax in &g.axes {
                if ax.values.is_empty() {
                    bail!("grid axis '{}' has no values", ax.name);
                }
                if ax.values.windows(2).any(|w| w[1] <= w[0]) {
                    bail!("grid axis '{}' values must be strictly increasing", ax.name);
                }
            }
        }
        if let Some(b) = &self.bounds {
            if b.trials == 0 {
                bail!("bounds.trials must be at least 1");
            }
            if !(b.sigma_min > 0.0 && b.sigma_max >= b.sigma_min) {
                bail!("bounds sigma range invalid");
            }
            if !(b.b_min > 0.0 && b.b_max >= b.b_min) {
                bail!("bounds b range invalid");
            }
        }
        Ok(())
    }

    /// Geometric or explicit pullback schedule for target time `t`.
    pub fn schedule(&self) -> Result<(f64, basin_core::attractors::PullbackSchedule, f64)> {
        let p = self.pullback.clone().unwrap_or_default();
        let mut sched = match &p.s_list {
            Some(list) => basin_core::attractors::PullbackSchedule {
                s_list: list.clone(),
                tol: p.tol,
                consecutive_required: p.consecutive_required,
            },
            None => {
                let mut s = basin_core::attractors::PullbackSchedule::geometric(p.t, p.t0, p.levels);
                s.tol = p.tol;
                s.consecutive_required = p.consecutive_required;
                s
            }
        };
        sched.tol = p.tol;
        let merge = p.merge_radius.unwrap_or(p.tol / 4.0);
        Ok((p.t, sched, merge))
    }
}
