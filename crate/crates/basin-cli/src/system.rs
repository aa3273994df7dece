//! Builds concrete systems from a run configuration: the vector field, its
//! parameter point, and a certified seed set.

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use basin_core::geometry::PointCloud;
use basin_core::process::{ParameterPoint, ProcessDef, VectorField};
use basin_core::sampling;
use basin_core::systems::forcing::{Sinusoid, SinusoidSum};
use basin_core::systems::linear::{LinearField, PitchforkField};
use basin_core::systems::lorenz::{absorbing_ball, ForcingR, LorenzAuto, LorenzNonAuto};
use basin_core::systems::nse::{
    state_dim, ForcingMode, Modulation, NseField, NseForcing,
};

use crate::config::{RunConfig, SeedKind, SystemKind};

/// Closed enumeration of the built-in families, so command drivers work
/// with one concrete `ProcessDef` type.
#[derive(Debug, Clone)]
pub enum AnyField {
    Linear(LinearField),
    Pitchfork(PitchforkField),
    LorenzAuto(LorenzAuto),
    LorenzNonAuto(LorenzNonAuto),
    Nse(NseField),
}

impl VectorField for AnyField {
    fn dim(&self) -> usize {
        match self {
            AnyField::Linear(f) => f.dim(),
            AnyField::Pitchfork(f) => f.dim(),
            AnyField::LorenzAuto(f) => f.dim(),
            AnyField::LorenzNonAuto(f) => f.dim(),
            AnyField::Nse(f) => f.dim(),
        }
    }

    fn eval(&self, t: f64, x: &[f64], lambda: &ParameterPoint, dxdt: &mut [f64]) {
        match self {
            AnyField::Linear(f) => f.eval(t, x, lambda, dxdt),
            AnyField::Pitchfork(f) => f.eval(t, x, lambda, dxdt),
            AnyField::LorenzAuto(f) => f.eval(t, x, lambda, dxdt),
            AnyField::LorenzNonAuto(f) => f.eval(t, x, lambda, dxdt),
            AnyField::Nse(f) => f.eval(t, x, lambda, dxdt),
        }
    }
}

/// A configured system: process, parameter point, and the seed-set geometry
/// it certifies.
pub struct BuiltSystem {
    pub proc: ProcessDef<AnyField>,
    pub lambda: ParameterPoint,
    /// Names of the parameter axes, in field order.
    pub param_names: Vec<String>,
    pub seed_center: Vec<f64>,
    pub seed_radius: f64,
    pub default_count: usize,
}

pub fn scalar_forcing(cfg: &RunConfig) -> SinusoidSum {
    let spec = cfg.forcing.clone().unwrap_or_default();
    SinusoidSum {
        offset: spec.offset,
        terms: spec
            .terms
            .iter()
            .map(|t| Sinusoid {
                amplitude: t.amplitude,
                frequency: t.frequency,
                phase: t.phase,
            })
            .collect(),
    }
}

pub fn lorenz_forcing(cfg: &RunConfig) -> ForcingR {
    let r0 = cfg.forcing.as_ref().and_then(|f| f.r0_override);
    ForcingR::from_sinusoids(scalar_forcing(cfg), r0)
}

pub fn nse_forcing(cfg: &RunConfig) -> NseForcing {
    NseForcing {
        entries: cfg
            .nse_forcing
            .iter()
            .map(|e| ForcingMode {
                k: (e.k[0], e.k[1]),
                amplitude: [
                    Complex64::new(e.amplitude_re[0], e.amplitude_im[0]),
                    Complex64::new(e.amplitude_re[1], e.amplitude_im[1]),
                ],
                modulation: e.modulation.as_ref().map(|m| Modulation {
                    offset: m.offset,
                    amplitude: m.amplitude,
                    frequency: m.frequency,
                    phase: m.phase,
                }),
            })
            .collect(),
    }
}

pub fn build_system(cfg: &RunConfig) -> Result<BuiltSystem> {
    let integrator = cfg.integrator.build();
    match cfg.system {
        SystemKind::LinearBenchmark => {
            let lambda_v = cfg.require_param("lambda")?;
            let field = AnyField::Linear(LinearField {
                g: scalar_forcing(cfg),
            });
            Ok(BuiltSystem {
                proc: ProcessDef::with_integrator(field, integrator),
                lambda: ParameterPoint::scalar("lambda", lambda_v),
                param_names: vec!["lambda".into()],
                seed_center: vec![0.0],
                seed_radius: 2.0,
                default_count: 1024,
            })
        }
        SystemKind::PitchforkBenchmark => {
            let lambda_v = cfg.require_param("lambda")?;
            Ok(BuiltSystem {
                proc: ProcessDef::with_integrator(AnyField::Pitchfork(PitchforkField), integrator),
                lambda: ParameterPoint::scalar("lambda", lambda_v),
                param_names: vec!["lambda".into()],
                seed_center: vec![0.0],
                seed_radius: 2.0,
                default_count: 1024,
            })
        }
        SystemKind::LorenzAuto => {
            let sigma = cfg.require_param("sigma")?;
            let b = cfg.require_param("b")?;
            let r = cfg.require_param("r")?;
            let (center, radius) = absorbing_ball(sigma, b, r);
            Ok(BuiltSystem {
                proc: ProcessDef::with_integrator(AnyField::LorenzAuto(LorenzAuto), integrator),
                lambda: ParameterPoint::new(&[("sigma", sigma), ("b", b), ("r", r)])
                    .expect("validated params"),
                param_names: vec!["sigma".into(), "b".into(), "r".into()],
                seed_center: center.to_vec(),
                seed_radius: radius,
                default_count: 4096,
            })
        }
        SystemKind::LorenzNonauto => {
            let sigma = cfg.require_param("sigma")?;
            let b = cfg.require_param("b")?;
            let forcing = lorenz_forcing(cfg);
            forcing
                .validate_on_grid(-1000.0, 1000.0, 100_000)
                .context("forcing bound r0 fails on a dense grid")?;
            let (center, radius) = absorbing_ball(sigma, b, forcing.r0());
            Ok(BuiltSystem {
                proc: ProcessDef::with_integrator(
                    AnyField::LorenzNonAuto(LorenzNonAuto { forcing }),
                    integrator,
                ),
                lambda: ParameterPoint::new(&[("sigma", sigma), ("b", b)])
                    .expect("validated params"),
                param_names: vec!["sigma".into(), "b".into()],
                seed_center: center.to_vec(),
                seed_radius: radius,
                default_count: 4096,
            })
        }
        SystemKind::NseGalerkin => {
            let nu = cfg.require_param("nu")?;
            let kmax = cfg.param("kmax").unwrap_or(8.0) as i32;
            let field = NseField::new(kmax, &nse_forcing(cfg))
                .map_err(|e| anyhow::anyhow!("nse_forcing: {e}"))?;
            let params = field.params(nu);
            // Absorbing ball of radius sqrt(2) rho0, padded.
            let radius = (2.0f64).sqrt() * params.rho0() + 0.5;
            Ok(BuiltSystem {
                proc: ProcessDef::with_integrator(AnyField::Nse(field), integrator),
                lambda: ParameterPoint::scalar("nu", nu),
                param_names: vec!["nu".into()],
                seed_center: vec![0.0; state_dim(kmax)],
                seed_radius: radius,
                default_count: 32,
            })
        }
    }
}

impl BuiltSystem {
    /// Builds the seed cloud from the config, falling back to the system's
    /// certified ball.
    pub fn seed_cloud(&self, cfg: &RunConfig) -> Result<PointCloud> {
        let spec = &cfg.seed_set;
        let center = match &spec.center {
            Some(c) => {
                if c.len() != self.proc.dim() {
                    bail!(
                        "seed_set.center has dimension {}, system expects {}",
                        c.len(),
                        self.proc.dim()
                    );
                }
                c.clone()
            }
            None => self.seed_center.clone(),
        };
        let radius = spec.radius.unwrap_or(self.seed_radius);
        if !(radius > 0.0) {
            bail!("seed_set.radius must be positive, got {radius}");
        }
        let count = spec.count.unwrap_or(self.default_count).max(1);
        let cloud = match spec.kind {
            SeedKind::Lattice => {
                if center.len() == 1 {
                    sampling::interval_lattice(center[0] - radius, center[0] + radius, count)?
                } else {
                    sampling::ball_lattice(&center, radius, count)?
                }
            }
            SeedKind::Random => random_ball(&center, radius, count, cfg.seed)?,
        };
        // Galerkin states live on the divergence-free subspace; a raw
        // coefficient-space sample has to be projected onto it.
        if let AnyField::Nse(f) = &self.proc.field {
            return Ok(basin_core::systems::nse::project_cloud(f.kmax(), &cloud));
        }
        Ok(cloud)
    }
}

/// Seeded uniform sample of the ball (rejection in low dimension, radial
/// scaling in high dimension).
fn random_ball(center: &[f64], radius: f64, count: usize, seed: u64) -> Result<PointCloud> {
    let dim = center.len();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(count);
    while rows.len() < count {
        let mut p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm_sq: f64 = p.iter().map(|v| v * v).sum();
        if dim <= 6 {
            if norm_sq > 1.0 {
                continue;
            }
        } else if norm_sq > 1.0 {
            let inv = 1.0 / norm_sq.sqrt();
            for v in p.iter_mut() {
                *v *= inv;
            }
        }
        rows.push(
            p.iter()
                .zip(center.iter())
                .map(|(u, c)| c + radius * u)
                .collect(),
        );
    }
    Ok(PointCloud::from_rows(dim, &rows)?)
}
