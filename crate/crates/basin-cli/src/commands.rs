//! The CLI verbs: pullback, uniform, sweep, equi, verify-bounds, oracle.
//!
//! All commands are deterministic for a fixed config and seed: work items
//! are independent, results are collected in index order, and every file is
//! written once from sorted in-memory data.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use basin_core::attractors::{pullback_section, uniform_attractor, UniformConfig};
use basin_core::continuity::{equi_attraction_rate, ParameterGrid, SweepResult};
use basin_core::geometry::{hausdorff, semi_distance, PointCloud};
use basin_core::process::{ParameterPoint, ProcessDef};
use basin_core::sampling;
use basin_core::systems::forcing::SinusoidSum;
use basin_core::systems::linear::{
    sin_particular_amplitude, sin_particular_solution, LinearField, PitchforkField,
};
use basin_core::systems::lorenz::{
    compute_bounds, verify_absorbing_bound, verify_difference_bound, ForcingR,
};
use basin_core::systems::nse::{
    nonlinear_energy_flux, verify_energy_estimates, viscosity_rescale_check, GalerkinState,
    NseField, NseForcing,
};

use crate::config::{RunConfig, SystemKind};
use crate::io;
use crate::system::{build_system, lorenz_forcing, nse_forcing, scalar_forcing, BuiltSystem};
use crate::Outcome;

pub fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        if n > 0 {
            // A second initialization in the same process keeps the first
            // pool; that is fine for determinism since work items are
            // order-independent.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn outcome_flag(converged: bool) -> Outcome {
    if converged {
        Outcome::Success
    } else {
        Outcome::NotConverged
    }
}

/// `pullback`: one attractor section at the configured time.
pub fn cmd_pullback(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let sys = build_system(cfg)?;
    let d = sys.seed_cloud(cfg)?;
    let (t, sched, merge) = cfg.schedule()?;
    let section = pullback_section(&sys.proc, &sys.lambda, t, &d, &sched, merge)?;
    io::write_section(
        out,
        "section",
        &section,
        sys.proc.integrator.rel_tol,
        sys.proc.integrator.abs_tol,
        Some(&sched),
    )?;
    eprintln!(
        "pullback: t = {t}, {} points, converged = {}, deepest s = {}",
        section.cloud.len(),
        section.converged,
        section.s_converged
    );
    Ok(outcome_flag(section.converged))
}

/// `uniform`: windowed-union approximation of the uniform attractor.
pub fn cmd_uniform(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let sys = build_system(cfg)?;
    let k = sys.seed_cloud(cfg)?;
    let spec = cfg
        .uniform
        .clone()
        .context("[uniform] section is required for this command")?;
    let s_grid: Vec<f64> = (0..spec.s_count)
        .map(|i| spec.s_start + spec.s_span * i as f64 / spec.s_count as f64)
        .collect();
    warn_if_incommensurate(cfg);
    let ucfg = UniformConfig {
        t_window: spec.t_window,
        s_grid,
        merge_radius: spec.merge_radius.unwrap_or(spec.tol / 4.0),
        tol: spec.tol,
        max_doublings: spec.max_doublings,
    };
    let u = uniform_attractor(&sys.proc, &sys.lambda, &k, &ucfg)?;
    io::write_uniform(out, "uniform", &u)?;
    eprintln!(
        "uniform: {} points, converged = {}, final window = {}",
        u.cloud.len(),
        u.converged,
        u.t_window
    );
    Ok(outcome_flag(u.converged))
}

/// Multiple distinct forcing frequencies make the true sup over start times
/// unreachable by any finite grid; the grid used is recorded in the
/// artifacts either way.
fn warn_if_incommensurate(cfg: &RunConfig) {
    let freqs = match cfg.system {
        SystemKind::LorenzNonauto | SystemKind::LinearBenchmark => {
            scalar_forcing(cfg).frequencies()
        }
        SystemKind::NseGalerkin => {
            let mut f: Vec<f64> = cfg
                .nse_forcing
                .iter()
                .filter_map(|e| e.modulation.as_ref())
                .filter(|m| m.amplitude != 0.0 && m.frequency != 0.0)
                .map(|m| m.frequency.abs())
                .collect();
            f.dedup();
            f
        }
        _ => Vec::new(),
    };
    for pair in freqs.windows(2) {
        let ratio = pair[1] / pair[0];
        // Close to a small rational is fine; anything else cannot be covered
        // by one periodic start grid.
        let near_rational = (1..=16).any(|q| {
            let p = (ratio * q as f64).round();
            (ratio - p / q as f64).abs() < 1e-9
        });
        if !near_rational {
            eprintln!(
                "warning: forcing frequencies {} and {} look incommensurate; \
                 the start-time grid cannot cover every phase",
                pair[0], pair[1]
            );
        }
    }
}

/// Builds the sweep grid over the system's full parameter axes: swept axes
/// take their configured values, the rest are singletons at the base value.
fn sweep_grid(cfg: &RunConfig, sys: &BuiltSystem) -> Result<ParameterGrid> {
    let spec = cfg
        .grid
        .clone()
        .context("[grid] section is required for this command")?;
    for ax in &spec.axes {
        if !sys.param_names.iter().any(|n| *n == ax.name) {
            bail!(
                "grid axis '{}' is not a parameter of this system (expected one of {:?})",
                ax.name,
                sys.param_names
            );
        }
    }
    let axes: Vec<(String, Vec<f64>)> = sys
        .param_names
        .iter()
        .map(|name| {
            let values = spec
                .axes
                .iter()
                .find(|ax| ax.name == *name)
                .map(|ax| ax.values.clone())
                .unwrap_or_else(|| vec![sys.lambda.get(name).expect("base param present")]);
            (name.clone(), values)
        })
        .collect();
    Ok(ParameterGrid::new(axes).map_err(|e| anyhow::anyhow!("{e}"))?)
}

fn section_stem(i: usize) -> String {
    format!("section_{i:04}")
}

/// `sweep`: sections over a parameter grid plus the adjacent-pair distance
/// summary.
pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let sys = build_system(cfg)?;
    let d = sys.seed_cloud(cfg)?;
    let grid = sweep_grid(cfg, &sys)?;
    let (t, sched, merge) = cfg.schedule()?;
    let results: Vec<Result<_, String>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let lambda = grid.point(i);
            pullback_section(&sys.proc, &lambda, t, &d, &sched, merge)
                .map_err(|e| format!("{e}"))
        })
        .collect();
    let sweep = SweepResult::from_sections(grid, t, results)?;

    let sections_dir = out.join("sections");
    fs::create_dir_all(&sections_dir)?;
    for (i, sec) in sweep.sections.iter().enumerate() {
        if let Some(sec) = sec {
            io::write_section(
                &sections_dir,
                &section_stem(i),
                sec,
                sys.proc.integrator.rel_tol,
                sys.proc.integrator.abs_tol,
                Some(&sched),
            )?;
        }
    }

    // Summary: one row per adjacent pair, coordinates of both endpoints.
    let names: Vec<&str> = sys.param_names.iter().map(|s| s.as_str()).collect();
    let mut header: Vec<String> = Vec::new();
    for n in &names {
        header.push(format!("{n}_a"));
    }
    for n in &names {
        header.push(format!("{n}_b"));
    }
    header.extend(["forward", "backward", "symmetric"].map(String::from));
    let mut rows = Vec::new();
    for pair in &sweep.pairwise {
        let a = sweep.grid.point(pair.i);
        let b = sweep.grid.point(pair.j);
        let mut row: Vec<String> = a.values().map(io::fmt_f64).collect();
        row.extend(b.values().map(io::fmt_f64));
        row.push(io::fmt_f64(pair.distances.forward));
        row.push(io::fmt_f64(pair.distances.backward));
        row.push(io::fmt_f64(pair.distances.symmetric));
        rows.push(row);
    }
    io::write_table(&out.join("summary.csv"), &header, &rows)?;

    #[derive(serde::Serialize)]
    struct SweepMeta {
        t: f64,
        axes: Vec<(String, Vec<f64>)>,
        converged: Vec<bool>,
        failures: Vec<(usize, String)>,
    }
    io::write_json(
        &out.join("sweep.meta.json"),
        &SweepMeta {
            t,
            axes: sweep.grid.axes().to_vec(),
            converged: sweep
                .sections
                .iter()
                .map(|s| s.as_ref().map(|x| x.converged).unwrap_or(false))
                .collect(),
            failures: sweep.failures.clone(),
        },
    )?;

    let all_ok = sweep.failures.is_empty()
        && sweep
            .sections
            .iter()
            .all(|s| s.as_ref().map(|x| x.converged).unwrap_or(false));
    eprintln!(
        "sweep: {} grid points, {} failures, {} adjacent pairs",
        sweep.grid.len(),
        sweep.failures.len(),
        sweep.pairwise.len()
    );
    Ok(outcome_flag(all_ok))
}

/// `equi`: pullback equi-attraction rates against precomputed sections.
pub fn cmd_equi(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let sys = build_system(cfg)?;
    let d = sys.seed_cloud(cfg)?;
    let grid = sweep_grid(cfg, &sys)?;
    let (t, _, merge) = cfg.schedule()?;
    let spec = cfg
        .equi
        .clone()
        .context("[equi] section is required for this command")?;
    let sections_dir = if spec.sections.is_absolute() {
        spec.sections.clone()
    } else {
        out.join(&spec.sections)
    };

    let mut sections = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let stem = section_stem(i);
        let sec = io::read_section(&sections_dir, &stem).with_context(|| {
            format!(
                "missing or unreadable section artifact {}",
                sections_dir.join(format!("{stem}.csv")).display()
            )
        })?;
        let expected = grid.point(i);
        if sec.lambda != expected {
            bail!(
                "section artifact {} was computed at ({}) but the grid expects ({})",
                sections_dir.join(format!("{stem}.csv")).display(),
                sec.lambda,
                expected
            );
        }
        sections.push(sec);
    }

    let report = equi_attraction_rate(&sys.proc, &grid, t, &d, &spec.s_values, &sections, merge)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    let mut header = vec!["s".to_string(), "sup_rate".to_string()];
    for n in &sys.param_names {
        header.push(format!("argmax_{n}"));
    }
    let mut rows = Vec::new();
    for (i, &s) in report.s_values.iter().enumerate() {
        let mut row = vec![io::fmt_f64(s), io::fmt_f64(report.rates[i])];
        row.extend(grid.point(report.argmax[i]).values().map(io::fmt_f64));
        rows.push(row);
    }
    io::write_table(&out.join("equi.csv"), &header, &rows)?;

    #[derive(serde::Serialize)]
    struct EquiMeta {
        t: f64,
        s_values: Vec<f64>,
        axes: Vec<(String, Vec<f64>)>,
        per_lambda: Vec<Vec<f64>>,
    }
    io::write_json(
        &out.join("equi.meta.json"),
        &EquiMeta {
            t,
            s_values: report.s_values.clone(),
            axes: grid.axes().to_vec(),
            per_lambda: report.per_lambda.clone(),
        },
    )?;
    eprintln!("equi: {} start times over {} grid points", report.s_values.len(), grid.len());
    Ok(Outcome::Success)
}

/// `verify-bounds`: randomized a priori bound battery; exit 0 only if every
/// inequality held at every sample.
pub fn cmd_verify_bounds(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    fs::create_dir_all(out)?;
    match cfg.system {
        SystemKind::LorenzNonauto | SystemKind::LorenzAuto => verify_bounds_lorenz(cfg, out),
        SystemKind::NseGalerkin => verify_bounds_nse(cfg, out),
        _ => bail!("verify-bounds supports the Lorenz and NSE systems"),
    }
}

fn verify_bounds_lorenz(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let spec = cfg.bounds.clone().unwrap_or_default();
    let forcing = match cfg.system {
        SystemKind::LorenzAuto => ForcingR::constant(cfg.require_param("r")?),
        _ => lorenz_forcing(cfg),
    };
    let integrator = cfg.integrator.build();
    let seed = cfg.seed;

    let trial_results: Vec<Result<(Vec<Vec<String>>, bool)>> = (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64 + 1);
            let sigma = rng.gen_range(spec.sigma_min..=spec.sigma_max);
            let b = rng.gen_range(spec.b_min..=spec.b_max);
            let v0 = random_in_ball3(&mut rng, spec.v0_max);
            let horizon = rng.gen_range((spec.horizon * 0.2).max(1.0)..=spec.horizon);
            let absorbing = verify_absorbing_bound(
                (sigma, b),
                &forcing,
                &v0,
                horizon,
                &integrator,
                false,
            )
            .map_err(|e| anyhow::anyhow!("absorbing trial {trial}: {e}"))?;
            let sigma2 = rng.gen_range(spec.sigma_min..=spec.sigma_max);
            let b2 = rng.gen_range(spec.b_min..=spec.b_max);
            let difference = verify_difference_bound(
                (sigma, b),
                (sigma2, b2),
                &forcing,
                &v0,
                spec.difference_horizon,
                &integrator,
                false,
            )
            .map_err(|e| anyhow::anyhow!("difference trial {trial}: {e}"))?;
            let mut rows = io::bound_report_rows(trial, "lorenz-absorbing", &absorbing);
            rows.extend(io::bound_report_rows(trial, "lorenz-difference", &difference));
            let ok = absorbing.all_satisfied() && difference.all_satisfied();
            Ok((rows, ok))
        })
        .collect();

    let mut rows = Vec::new();
    let mut all_ok = true;
    for r in trial_results {
        let (mut rr, ok) = r?;
        rows.append(&mut rr);
        all_ok &= ok;
    }
    io::write_table(&out.join("bounds.csv"), &io::bound_report_header(), &rows)?;
    // Reference constants at the standard point, for the report.
    let consts = compute_bounds((10.0, 8.0 / 3.0), (10.0, 8.0 / 3.0), forcing.r0(), 0.0);
    #[derive(serde::Serialize)]
    struct BoundsMeta {
        trials: usize,
        all_satisfied: bool,
        r0: f64,
        f0_at_standard: f64,
        sigma0_at_standard: f64,
    }
    io::write_json(
        &out.join("bounds.meta.json"),
        &BoundsMeta {
            trials: spec.trials,
            all_satisfied: all_ok,
            r0: forcing.r0(),
            f0_at_standard: consts.f0,
            sigma0_at_standard: consts.sigma0,
        },
    )?;
    eprintln!(
        "verify-bounds: {} trials, all satisfied = {all_ok}",
        spec.trials
    );
    Ok(outcome_flag(all_ok))
}

fn random_in_ball3(rng: &mut ChaCha12Rng, radius: f64) -> [f64; 3] {
    loop {
        let p = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n: f64 = p.iter().map(|v| v * v).sum();
        if n <= 1.0 {
            return [p[0] * radius, p[1] * radius, p[2] * radius];
        }
    }
}

fn random_nse_state(kmax: i32, band: i32, scale: f64, rng: &mut ChaCha12Rng) -> GalerkinState {
    let mut entries = Vec::new();
    for kx in -band..=band {
        for ky in -band..=band {
            if (kx == 0 && ky == 0) || kx.abs().max(ky.abs()) > kmax {
                continue;
            }
            entries.push((
                (kx, ky),
                [
                    Complex64::new(
                        rng.gen_range(-scale..scale),
                        rng.gen_range(-scale..scale),
                    ),
                    Complex64::new(
                        rng.gen_range(-scale..scale),
                        rng.gen_range(-scale..scale),
                    ),
                ],
            ));
        }
    }
    GalerkinState::from_mode_list(kmax, &entries).expect("entries within range")
}

fn verify_bounds_nse(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let spec = cfg.bounds.clone().unwrap_or_default();
    let nu = cfg.require_param("nu")?;
    let kmax = cfg.param("kmax").unwrap_or(8.0) as i32;
    let forcing = nse_forcing(cfg);
    let field = NseField::new(kmax, &forcing).map_err(|e| anyhow::anyhow!("{e}"))?;
    let integrator = cfg.integrator.build();
    let mut all_ok = true;
    let mut rows: Vec<Vec<String>> = Vec::new();

    // Orthogonality of the nonlinear term on random states.
    {
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        rng.set_stream(0);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let u = random_nse_state(kmax, kmax.min(4), 1.0, &mut rng);
            let rel = nonlinear_energy_flux(&field, &u).abs() / u.norm_h_sq().max(1e-300);
            worst = worst.max(rel);
        }
        let ok = worst <= 1e-12;
        all_ok &= ok;
        rows.push(vec![
            "0".into(),
            "nse".into(),
            "nonlinear-orthogonality (ortho)".into(),
            (ok as u8).to_string(),
            "0".into(),
            io::fmt_f64(1e-12 - worst),
            io::fmt_f64(0.0),
            "100".into(),
        ]);
    }

    // Energy estimates along randomized trajectories.
    let energy_results: Vec<Result<(Vec<Vec<String>>, bool, Option<GalerkinState>)>> = (0..spec
        .trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
            rng.set_stream(1000 + trial as u64);
            let u0 = random_nse_state(kmax, kmax.min(3), 0.5, &mut rng);
            let report = verify_energy_estimates(&field, nu, &u0, spec.horizon, &integrator, false)
                .map_err(|e| anyhow::anyhow!("energy trial {trial}: {e}"))?;
            let rows = io::bound_report_rows(trial, "nse-energy", &report);
            let keep_u0 = if trial == 0 { Some(u0) } else { None };
            Ok((rows, report.all_satisfied(), keep_u0))
        })
        .collect();
    for r in energy_results {
        let (mut rr, ok, u0) = r?;
        rows.append(&mut rr);
        all_ok &= ok;
        if let Some(u0) = u0 {
            io::write_nse_snapshot(&out.join("u0_snapshot.csv"), &u0)?;
        }
    }

    // Viscosity rescaling identity.
    for (i, nu_check) in [0.25, 0.5, 1.0, 2.0].into_iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        rng.set_stream(2000 + i as u64);
        let u0 = random_nse_state(kmax, kmax.min(3), 0.3, &mut rng);
        let report = viscosity_rescale_check(
            &field,
            &forcing,
            nu_check,
            &u0,
            4.0,
            &integrator,
            false,
        )
        .map_err(|e| anyhow::anyhow!("rescale nu = {nu_check}: {e}"))?;
        all_ok &= report.all_satisfied();
        rows.extend(io::bound_report_rows(i, "nse-rescale", &report));
    }

    io::write_table(&out.join("bounds.csv"), &io::bound_report_header(), &rows)?;
    #[derive(serde::Serialize)]
    struct NseMeta {
        trials: usize,
        all_satisfied: bool,
        nu: f64,
        kmax: i32,
        grashof: f64,
    }
    io::write_json(
        &out.join("bounds.meta.json"),
        &NseMeta {
            trials: spec.trials,
            all_satisfied: all_ok,
            nu,
            kmax,
            grashof: field.params(nu).g,
        },
    )?;
    eprintln!("verify-bounds: nse battery, all satisfied = {all_ok}");
    Ok(outcome_flag(all_ok))
}

/// `oracle`: closed-form benchmark battery with a printed pass/fail table.
pub fn cmd_oracle(out: &Path, seed: u64, tol: Option<f64>, rel_tol: Option<f64>) -> Result<Outcome> {
    fs::create_dir_all(out)?;
    let mut integrator = basin_core::ode::IntegratorConfig::default();
    if let Some(r) = rel_tol {
        integrator.rel_tol = r;
    }
    let uniform_tol = tol.unwrap_or(1e-3);
    let mut results: Vec<(String, bool, String)> = Vec::new();
    let mut push = |name: &str, ok: bool, detail: String| {
        results.push((name.to_string(), ok, detail));
    };

    // Pullback limit of the forced linear benchmark.
    {
        let proc = ProcessDef::with_integrator(LinearField::sin_forced(), integrator);
        let d = sampling::interval_lattice(-2.0, 2.0, 1024)?;
        let sched =
            basin_core::attractors::PullbackSchedule::geometric(0.0, 5.0, 5).with_tol(1e-7);
        for lam_v in [1.0, 2.0] {
            let lam = ParameterPoint::scalar("lambda", lam_v);
            let sec = pullback_section(&proc, &lam, 0.0, &d, &sched, sched.tol / 4.0)?;
            let expect = -1.0 / (1.0 + lam_v * lam_v);
            let target = PointCloud::singleton(&[expect])?;
            let err = hausdorff(&sec.cloud, &target)?.symmetric;
            push(
                &format!("pullback-linear lambda={lam_v}"),
                sec.converged && err <= 1e-6,
                format!("distance to {{{expect}}} = {err:.2e}"),
            );
        }
    }

    // Uniform attractor of the same system: the closed interval of the
    // particular solution's range.
    {
        let proc = ProcessDef::with_integrator(LinearField::sin_forced(), integrator);
        let k = sampling::interval_lattice(-2.0, 2.0, 257)?;
        let n = 32usize;
        let period = std::f64::consts::TAU;
        let spacing = period / n as f64;
        let ucfg = UniformConfig {
            t_window: period,
            s_grid: (0..n).map(|i| spacing * i as f64).collect(),
            merge_radius: uniform_tol / 4.0,
            tol: uniform_tol,
            max_doublings: 6,
        };
        let u = uniform_attractor(&proc, &ParameterPoint::scalar("lambda", 1.0), &k, &ucfg)?;
        let amp = sin_particular_amplitude(1.0);
        let target = sampling::interval_lattice(-amp, amp, 4001)?;
        let err = hausdorff(&u.cloud, &target)?.symmetric;
        push(
            "uniform-linear interval",
            u.converged && err <= 2.0 * spacing,
            format!("distance to [-{amp:.5}, {amp:.5}] = {err:.2e}"),
        );
    }

    // Explicit Lorenz bound constants.
    {
        let b = compute_bounds((10.0, 8.0 / 3.0), (10.0, 8.0 / 3.0), 1.0, 0.0);
        let ok = (b.f0 - 91.0 / 3.0).abs() < 1e-12
            && b.sigma0 == 1.0
            && (b.r2 - b.r1 - 0.125).abs() < 1e-12
            && (b.r1 - 35.134).abs() < 1e-3;
        push(
            "lorenz-bound constants",
            ok,
            format!("F0 = {:.6}, sigma0 = {}, R1 = {:.6}", b.f0, b.sigma0, b.r1),
        );
    }

    // Absorbing estimate from the origin.
    {
        let forcing = ForcingR::from_sinusoids(SinusoidSum::single(1.0, 1.0, 0.0), None);
        let rep = verify_absorbing_bound(
            (10.0, 8.0 / 3.0),
            &forcing,
            &[0.0, 0.0, 0.0],
            10.0,
            &integrator,
            false,
        )?;
        push(
            "lorenz-absorbing from origin",
            rep.all_satisfied(),
            format!(
                "worst margin {:.3e}",
                rep.checks
                    .iter()
                    .map(|c| c.worst_margin)
                    .fold(f64::INFINITY, f64::min)
            ),
        );
    }

    // Pitchfork semicontinuity scale.
    {
        let proc = ProcessDef::with_integrator(PitchforkField, integrator);
        let d = sampling::interval_lattice(-2.0, 2.0, 257)?;
        let sched =
            basin_core::attractors::PullbackSchedule::geometric(0.0, 5.0, 6).with_tol(1e-4);
        let sup = pullback_section(
            &proc,
            &ParameterPoint::scalar("lambda", 0.25),
            0.0,
            &d,
            &sched,
            sched.tol / 4.0,
        )?;
        let sub = pullback_section(
            &proc,
            &ParameterPoint::scalar("lambda", -0.25),
            0.0,
            &d,
            &sched,
            sched.tol / 4.0,
        )?;
        let upper = semi_distance(&sub.cloud, &sup.cloud)?;
        let lower = semi_distance(&sup.cloud, &sub.cloud)?;
        push(
            "pitchfork semicontinuity split",
            upper <= 1e-3 && (lower - 0.5).abs() <= 1e-2,
            format!("upper = {upper:.2e}, lower = {lower:.4}"),
        );
    }

    // NSE nonlinear-term orthogonality.
    {
        let field = NseField::new(4, &NseForcing::none()).map_err(|e| anyhow::anyhow!("{e}"))?;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let u = random_nse_state(4, 4, 1.0, &mut rng);
            worst = worst.max(nonlinear_energy_flux(&field, &u).abs() / u.norm_h_sq());
        }
        push(
            "nse orthogonality",
            worst <= 1e-12,
            format!("worst relative flux {worst:.2e}"),
        );
    }

    // Hausdorff acceleration agreement.
    {
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x9e3779b9);
        let mut ok = true;
        for _ in 0..10 {
            let mk = |rng: &mut ChaCha12Rng| {
                let rows: Vec<Vec<f64>> = (0..200)
                    .map(|_| vec![rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)])
                    .collect();
                PointCloud::from_rows(2, &rows).unwrap()
            };
            let a = mk(&mut rng);
            let c = mk(&mut rng);
            ok &= basin_core::geometry::semi_distance_brute(&a, &c)?.to_bits()
                == basin_core::geometry::semi_distance_indexed(&a, &c)?.to_bits();
        }
        push("hausdorff index vs brute", ok, "bitwise equality".to_string());
    }

    // Closed-form check of the particular solution itself.
    {
        let x = sin_particular_solution(1.0, 0.0);
        push(
            "linear particular solution",
            (x + 0.5).abs() < 1e-15,
            format!("x_p(0) = {x}"),
        );
    }

    let mut rows = Vec::new();
    let mut all_ok = true;
    println!("{:<36} {:<6} detail", "check", "status");
    for (name, ok, detail) in &results {
        all_ok &= ok;
        println!("{name:<36} {:<6} {detail}", if *ok { "PASS" } else { "FAIL" });
        rows.push(vec![
            name.clone(),
            if *ok { "pass" } else { "fail" }.to_string(),
            detail.clone(),
        ]);
    }
    io::write_table(
        &out.join("oracle.csv"),
        &["check".to_string(), "status".to_string(), "detail".to_string()],
        &rows,
    )?;
    if all_ok {
        Ok(Outcome::Success)
    } else {
        bail!("oracle checks failed")
    }
}

/// Applies uniform command-line overrides onto a loaded config.
pub fn apply_overrides(
    cfg: &mut RunConfig,
    seed: Option<u64>,
    tol: Option<f64>,
    rel_tol: Option<f64>,
) {
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = tol {
        if let Some(p) = cfg.pullback.as_mut() {
            p.tol = t;
            p.merge_radius = None;
        } else {
            let mut p = crate::config::PullbackSpec::default();
            p.tol = t;
            cfg.pullback = Some(p);
        }
        if let Some(u) = cfg.uniform.as_mut() {
            u.tol = t;
            u.merge_radius = None;
        }
    }
    if let Some(r) = rel_tol {
        cfg.integrator.rel_tol = r;
    }
}

/// Resolves the output directory: CLI flag, then config, then default.
pub fn resolve_out(cli_out: Option<PathBuf>, cfg_out: Option<&PathBuf>) -> PathBuf {
    cli_out
        .or_else(|| cfg_out.cloned())
        .unwrap_or_else(|| PathBuf::from("basin-out"))
}
