//! Deterministic file formats: point-cloud CSV, structured JSON sidecars,
//! summary tables. Floats are printed with 17 significant digits so every
//! artifact re-parses to the exact in-memory value.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use basin_core::attractors::{AttractorSection, UniformAttractorApprox};
use basin_core::geometry::PointCloud;
use basin_core::process::ParameterPoint;
use basin_core::report::BoundReport;
use basin_core::systems::nse::GalerkinState;

/// 17 significant digits: enough for exact f64 round trips.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .with_context(|| format!("cannot parse float '{s}'"))
}

/// Writes a cloud as CSV: header `x0,...,x{d-1}`, one lexicographically
/// sorted point per row.
pub fn write_cloud_csv(path: &Path, cloud: &PointCloud) -> Result<()> {
    let file = fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    let header: Vec<String> = (0..cloud.dim()).map(|d| format!("x{d}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for p in cloud.iter() {
        let row: Vec<String> = p.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cloud_csv(path: &Path) -> Result<PointCloud> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().context("empty cloud file")?;
    let dim = header.split(',').count();
    let mut flat = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != dim {
            bail!(
                "{}: row {} has {} columns, expected {dim}",
                path.display(),
                i + 2,
                cols.len()
            );
        }
        for c in cols {
            flat.push(parse_f64(c)?);
        }
    }
    Ok(PointCloud::from_flat(dim, flat)?)
}

/// The schedule a section was computed with, echoed into its sidecar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleMeta {
    pub s_list: Vec<f64>,
    pub tol: f64,
    pub consecutive_required: usize,
}

/// JSON sidecar for a pullback section.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionMeta {
    pub t: f64,
    pub lambda: Vec<(String, f64)>,
    pub s_converged: f64,
    pub history: Vec<(f64, f64)>,
    pub converged: bool,
    pub resolution: f64,
    pub points: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(default)]
    pub schedule: Option<ScheduleMeta>,
}

impl SectionMeta {
    pub fn of(section: &AttractorSection, rel_tol: f64, abs_tol: f64) -> Self {
        SectionMeta {
            t: section.t,
            lambda: section
                .lambda
                .names()
                .zip(section.lambda.values())
                .map(|(n, v)| (n.to_string(), v))
                .collect(),
            s_converged: section.s_converged,
            history: section.history.clone(),
            converged: section.converged,
            resolution: section.cloud.resolution(),
            points: section.cloud.len(),
            rel_tol,
            abs_tol,
            schedule: None,
        }
    }

    pub fn with_schedule(mut self, sched: &basin_core::attractors::PullbackSchedule) -> Self {
        self.schedule = Some(ScheduleMeta {
            s_list: sched.s_list.clone(),
            tol: sched.tol,
            consecutive_required: sched.consecutive_required,
        });
        self
    }

    pub fn lambda_point(&self) -> Result<ParameterPoint> {
        let pairs: Vec<(&str, f64)> = self
            .lambda
            .iter()
            .map(|(n, v)| (n.as_str(), *v))
            .collect();
        ParameterPoint::new(&pairs).map_err(|e| anyhow::anyhow!("bad lambda in sidecar: {e}"))
    }
}

pub fn write_section(
    dir: &Path,
    stem: &str,
    section: &AttractorSection,
    rel_tol: f64,
    abs_tol: f64,
    schedule: Option<&basin_core::attractors::PullbackSchedule>,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_cloud_csv(&dir.join(format!("{stem}.csv")), &section.cloud)?;
    let mut meta = SectionMeta::of(section, rel_tol, abs_tol);
    if let Some(s) = schedule {
        meta = meta.with_schedule(s);
    }
    write_json(&dir.join(format!("{stem}.meta.json")), &meta)
}

pub fn read_section(dir: &Path, stem: &str) -> Result<AttractorSection> {
    let meta_path = dir.join(format!("{stem}.meta.json"));
    let csv_path = dir.join(format!("{stem}.csv"));
    let meta: SectionMeta = read_json(&meta_path)?;
    let cloud = read_cloud_csv(&csv_path)?;
    if cloud.len() != meta.points {
        bail!(
            "{}: point count {} does not match sidecar ({})",
            csv_path.display(),
            cloud.len(),
            meta.points
        );
    }
    Ok(AttractorSection {
        t: meta.t,
        lambda: meta.lambda_point()?,
        cloud,
        s_converged: meta.s_converged,
        history: meta.history.clone(),
        converged: meta.converged,
    })
}

/// JSON sidecar for a uniform attractor approximation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformMeta {
    pub lambda: Vec<(String, f64)>,
    pub t_window: f64,
    pub s_grid: Vec<f64>,
    pub history: Vec<(f64, f64)>,
    pub converged: bool,
    pub resolution: f64,
    pub points: usize,
}

pub fn write_uniform(dir: &Path, stem: &str, u: &UniformAttractorApprox) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_cloud_csv(&dir.join(format!("{stem}.csv")), &u.cloud)?;
    let meta = UniformMeta {
        lambda: u
            .lambda
            .names()
            .zip(u.lambda.values())
            .map(|(n, v)| (n.to_string(), v))
            .collect(),
        t_window: u.t_window,
        s_grid: u.s_grid.clone(),
        history: u.history.clone(),
        converged: u.converged,
        resolution: u.cloud.resolution(),
        points: u.cloud.len(),
    };
    write_json(&dir.join(format!("{stem}.meta.json")), &meta)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

/// Writes a generic CSV with a header row; all cells preformatted.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let file = fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Bound-report rows: one line per check.
pub fn bound_report_rows(trial: usize, label: &str, report: &BoundReport) -> Vec<Vec<String>> {
    report
        .checks
        .iter()
        .map(|c| {
            vec![
                trial.to_string(),
                label.to_string(),
                c.name.clone(),
                (c.satisfied as u8).to_string(),
                (c.marginal as u8).to_string(),
                fmt_f64(c.worst_margin),
                fmt_f64(c.worst_t),
                c.samples.to_string(),
            ]
        })
        .collect()
}

pub fn bound_report_header() -> Vec<String> {
    ["trial", "system", "check", "satisfied", "marginal", "worst_margin", "worst_t", "samples"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// Galerkin state snapshot: `kx,ky,re_u1,im_u1,re_u2,im_u2` per stored mode.
pub fn write_nse_snapshot(path: &Path, state: &GalerkinState) -> Result<()> {
    let file = fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "kx,ky,re_u1,im_u1,re_u2,im_u2")?;
    for (i, (kx, ky)) in state.modes().into_iter().enumerate() {
        let c = state.coeff(i);
        writeln!(
            w,
            "{kx},{ky},{},{},{},{}",
            fmt_f64(c[0].re),
            fmt_f64(c[0].im),
            fmt_f64(c[1].re),
            fmt_f64(c[1].im)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_nse_snapshot(path: &Path, kmax: i32) -> Result<GalerkinState> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            bail!("{}: row {} malformed", path.display(), i + 1);
        }
        let kx: i32 = cols[0].trim().parse()?;
        let ky: i32 = cols[1].trim().parse()?;
        entries.push((
            (kx, ky),
            [
                Complex64::new(parse_f64(cols[2])?, parse_f64(cols[3])?),
                Complex64::new(parse_f64(cols[4])?, parse_f64(cols[5])?),
            ],
        ));
    }
    let state = GalerkinState::from_mode_list_raw(kmax, &entries)
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    if state.divergence_defect_h() > 1e-6 {
        bail!(
            "{}: snapshot is not divergence-free (defect {:.2e})",
            path.display(),
            state.divergence_defect_h()
        );
    }
    Ok(state)
}
