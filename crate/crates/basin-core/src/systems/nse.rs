//! Spectral Galerkin truncation of the 2D incompressible Navier-Stokes
//! equations on the 2pi-periodic torus.
//!
//! The periodic torus replaces a Dirichlet domain: the Stokes eigenbasis is
//! the Fourier basis, the first eigenvalue is `lambda1 = 1`, and the energy
//! estimates carry over verbatim because they use only the nonlinear-term
//! orthogonality and the Poincare inequality, both of which hold exactly in
//! the truncation. Retained modes are the wavevectors `0 < |k|_inf <= kmax`;
//! conjugate symmetry is enforced by storing only the half space
//! `ky > 0 or (ky == 0 and kx > 0)`.
//!
//! The nonlinear term is evaluated by direct convolution over the retained
//! modes in a fixed wavevector order, so field evaluations are exact (no
//! aliasing) and bit-deterministic.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::attractors::{AttractorError, AttractorSection};
use crate::fp;
use crate::geometry::hausdorff;
use crate::ode::{self, IntegratorConfig};
use crate::process::{ParameterPoint, ProcessError, VectorField};
use crate::report::{BoundReport, CheckAccumulator};

/// Default truncation: about 224 real degrees of freedom, enough for
/// nontrivial nonlinearity while keeping pullback iterations fast.
pub const DEFAULT_KMAX: i32 = 8;

/// Sampling stride for energy-estimate checks.
pub const ENERGY_SAMPLE_STRIDE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NseError {
    ModeOutOfRange { kx: i32, ky: i32, kmax: i32 },
    ZeroMode,
    BadStateLength { expected: usize, got: usize },
    BadKmax(i32),
}

impl fmt::Display for NseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NseError::ModeOutOfRange { kx, ky, kmax } => {
                write!(f, "mode ({kx}, {ky}) outside 0 < |k|_inf <= {kmax}")
            }
            NseError::ZeroMode => write!(f, "the zero mode is excluded (zero-mean fields)"),
            NseError::BadStateLength { expected, got } => {
                write!(f, "state length {got}, expected {expected}")
            }
            NseError::BadKmax(k) => write!(f, "kmax must be positive, got {k}"),
        }
    }
}

impl core::error::Error for NseError {}

/// Canonical representative: exactly one of `k`, `-k` is stored.
fn is_canonical(kx: i32, ky: i32) -> bool {
    ky > 0 || (ky == 0 && kx > 0)
}

fn in_range(kx: i32, ky: i32, kmax: i32) -> bool {
    let a = kx.abs().max(ky.abs());
    a > 0 && a <= kmax
}

/// Stored wavevectors in lexicographic `(kx, ky)` order.
pub fn half_modes(kmax: i32) -> Vec<(i32, i32)> {
    let mut out = Vec::with_capacity((kmax as usize) * 2 * (kmax as usize + 1));
    for kx in -kmax..=kmax {
        for ky in -kmax..=kmax {
            if in_range(kx, ky, kmax) && is_canonical(kx, ky) {
                out.push((kx, ky));
            }
        }
    }
    out
}

/// Real state dimension of the truncation (4 reals per stored mode).
pub fn state_dim(kmax: i32) -> usize {
    half_modes(kmax).len() * 4
}

/// Divergence-free velocity field in Fourier coefficients over the half
/// space; `coeffs[i]` holds the two velocity components at `half_modes[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinState {
    kmax: i32,
    coeffs: Vec<[Complex64; 2]>,
}

impl GalerkinState {
    pub fn zero(kmax: i32) -> Result<Self, NseError> {
        if kmax <= 0 {
            return Err(NseError::BadKmax(kmax));
        }
        let n = half_modes(kmax).len();
        Ok(GalerkinState {
            kmax,
            coeffs: vec![[Complex64::ZERO; 2]; n],
        })
    }

    /// Builds a state from `(wavevector, coefficient)` pairs. Entries at
    /// non-canonical wavevectors are folded onto their conjugates, repeated
    /// entries accumulate, and the result is Leray-projected so the state is
    /// divergence-free by construction.
    pub fn from_mode_list(
        kmax: i32,
        entries: &[((i32, i32), [Complex64; 2])],
    ) -> Result<Self, NseError> {
        let mut state = Self::from_mode_list_raw(kmax, entries)?;
        state.project();
        Ok(state)
    }

    /// Like [`Self::from_mode_list`] but without the projection, for loading
    /// coefficients that are already divergence-free (re-projecting would
    /// perturb them at roundoff level and break exact round trips).
    pub fn from_mode_list_raw(
        kmax: i32,
        entries: &[((i32, i32), [Complex64; 2])],
    ) -> Result<Self, NseError> {
        let mut state = Self::zero(kmax)?;
        let modes = half_modes(kmax);
        for &((kx, ky), amp) in entries {
            if kx == 0 && ky == 0 {
                return Err(NseError::ZeroMode);
            }
            if !in_range(kx, ky, kmax) {
                return Err(NseError::ModeOutOfRange { kx, ky, kmax });
            }
            let (key, add) = if is_canonical(kx, ky) {
                ((kx, ky), amp)
            } else {
                ((-kx, -ky), [amp[0].conj(), amp[1].conj()])
            };
            let idx = modes.binary_search(&key).expect("canonical mode present");
            state.coeffs[idx][0] += add[0];
            state.coeffs[idx][1] += add[1];
        }
        Ok(state)
    }

    pub fn kmax(&self) -> i32 {
        self.kmax
    }

    pub fn modes(&self) -> Vec<(i32, i32)> {
        half_modes(self.kmax)
    }

    pub fn coeff(&self, i: usize) -> [Complex64; 2] {
        self.coeffs[i]
    }

    /// Leray projection `u - k (k . u) / |k|^2` mode by mode.
    pub fn project(&mut self) {
        for ((kx, ky), c) in half_modes(self.kmax).into_iter().zip(self.coeffs.iter_mut()) {
            project_mode(kx, ky, c);
        }
    }

    /// Max over modes of `|k . u(k)| / |u(k)|`.
    pub fn divergence_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for ((kx, ky), c) in half_modes(self.kmax).into_iter().zip(self.coeffs.iter()) {
            let dot = c[0] * kx as f64 + c[1] * ky as f64;
            let mag = fp::sqrt(c[0].norm_sqr() + c[1].norm_sqr());
            if mag > 0.0 {
                worst = worst.max(fp::sqrt(dot.norm_sqr()) / mag);
            }
        }
        worst
    }

    /// Max over modes of `|k . u(k)|` relative to the overall H norm: the
    /// divergence defect a trajectory can actually maintain. The per-mode
    /// ratio in [`Self::divergence_residual`] is roundoff-dominated once a
    /// mode has decayed far below the state scale.
    pub fn divergence_defect_h(&self) -> f64 {
        let scale = fp::sqrt(self.norm_h_sq());
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for ((kx, ky), c) in half_modes(self.kmax).into_iter().zip(self.coeffs.iter()) {
            let dot = c[0] * kx as f64 + c[1] * ky as f64;
            worst = worst.max(fp::sqrt(dot.norm_sqr()));
        }
        worst / scale
    }

    /// `||u||^2` in H (full mode set; conjugate pairs contribute twice).
    pub fn norm_h_sq(&self) -> f64 {
        let mut s = 0.0;
        for c in &self.coeffs {
            s += c[0].norm_sqr() + c[1].norm_sqr();
        }
        2.0 * s
    }

    /// `||grad u||^2` (the V norm squared).
    pub fn norm_v_sq(&self) -> f64 {
        let mut s = 0.0;
        for ((kx, ky), c) in half_modes(self.kmax).into_iter().zip(self.coeffs.iter()) {
            let k2 = (kx * kx + ky * ky) as f64;
            s += k2 * (c[0].norm_sqr() + c[1].norm_sqr());
        }
        2.0 * s
    }

    /// Real H inner product with another state.
    pub fn inner_h(&self, other: &GalerkinState) -> f64 {
        debug_assert_eq!(self.kmax, other.kmax);
        let mut s = 0.0;
        for (a, b) in self.coeffs.iter().zip(other.coeffs.iter()) {
            s += (a[0] * b[0].conj()).re + (a[1] * b[1].conj()).re;
        }
        2.0 * s
    }

    /// Flat real vector `[re u1, im u1, re u2, im u2]` per mode, the layout
    /// used for integration and point clouds.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.coeffs.len() * 4);
        for c in &self.coeffs {
            out.push(c[0].re);
            out.push(c[0].im);
            out.push(c[1].re);
            out.push(c[1].im);
        }
        out
    }

    pub fn from_flat(kmax: i32, flat: &[f64]) -> Result<Self, NseError> {
        if kmax <= 0 {
            return Err(NseError::BadKmax(kmax));
        }
        let expected = state_dim(kmax);
        if flat.len() != expected {
            return Err(NseError::BadStateLength {
                expected,
                got: flat.len(),
            });
        }
        let coeffs = flat
            .chunks_exact(4)
            .map(|c| {
                [
                    Complex64::new(c[0], c[1]),
                    Complex64::new(c[2], c[3]),
                ]
            })
            .collect();
        Ok(GalerkinState { kmax, coeffs })
    }

    pub fn scaled(&self, factor: f64) -> GalerkinState {
        GalerkinState {
            kmax: self.kmax,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| [c[0] * factor, c[1] * factor])
                .collect(),
        }
    }
}

fn project_mode(kx: i32, ky: i32, c: &mut [Complex64; 2]) {
    let k2 = (kx * kx + ky * ky) as f64;
    let dot = (c[0] * kx as f64 + c[1] * ky as f64) / k2;
    c[0] -= dot * kx as f64;
    c[1] -= dot * ky as f64;
}

/// `||u||^2` in H from a flat state vector (the layout squares to the sum of
/// all real parts, doubled for conjugate pairs).
pub fn flat_norm_h_sq(flat: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in flat {
        s += v * v;
    }
    2.0 * s
}

/// Leray projection applied in place to a flat state vector. Seed clouds
/// sampled in coefficient space must pass through this before evolution: a
/// non-solenoidal component has zero time derivative under the projected
/// field and would ride along as a frozen distortion.
pub fn project_flat_state(kmax: i32, flat: &mut [f64]) {
    let modes = half_modes(kmax);
    assert_eq!(flat.len(), modes.len() * 4, "flat state length mismatch");
    for (i, (kx, ky)) in modes.into_iter().enumerate() {
        let mut c = [
            Complex64::new(flat[4 * i], flat[4 * i + 1]),
            Complex64::new(flat[4 * i + 2], flat[4 * i + 3]),
        ];
        project_mode(kx, ky, &mut c);
        flat[4 * i] = c[0].re;
        flat[4 * i + 1] = c[0].im;
        flat[4 * i + 2] = c[1].re;
        flat[4 * i + 3] = c[1].im;
    }
}

/// Projects every point of a coefficient-space cloud onto the
/// divergence-free subspace.
pub fn project_cloud(kmax: i32, cloud: &crate::geometry::PointCloud) -> crate::geometry::PointCloud {
    let mut flat = cloud.flat().to_vec();
    for chunk in flat.chunks_exact_mut(state_dim(kmax)) {
        project_flat_state(kmax, chunk);
    }
    crate::geometry::PointCloud::from_flat(cloud.dim(), flat)
        .expect("projection preserves finiteness")
}

/// Grashof number `G = f_sup / (lambda1 nu^2)`.
pub fn grashof(nu: f64, lambda1: f64, f_sup: f64) -> f64 {
    f_sup / (lambda1 * nu * nu)
}

/// Physical parameters of the truncated system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NseParams {
    pub nu: f64,
    /// First Stokes eigenvalue; 1 on the 2pi torus.
    pub lambda1: f64,
    /// Essential sup of the forcing H norm (a certified upper bound for
    /// modulated forcing).
    pub f_sup: f64,
    pub g: f64,
}

impl NseParams {
    pub fn new(nu: f64, lambda1: f64, f_sup: f64) -> Self {
        NseParams {
            nu,
            lambda1,
            f_sup,
            g: grashof(nu, lambda1, f_sup),
        }
    }

    /// Radius `rho0 = nu G` of the H absorbing ball.
    pub fn rho0(&self) -> f64 {
        self.nu * self.g
    }
}

/// Sinusoidal time modulation `m(t) = offset + amplitude sin(freq t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulation {
    pub offset: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl Modulation {
    pub fn eval(&self, t: f64) -> f64 {
        self.offset + self.amplitude * fp::sin(self.frequency * t + self.phase)
    }

    pub fn sup(&self) -> f64 {
        self.offset.abs() + self.amplitude.abs()
    }
}

/// One forcing mode: a wavevector, a complex amplitude pair, and an optional
/// time modulation (constant 1 when absent).
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingMode {
    pub k: (i32, i32),
    pub amplitude: [Complex64; 2],
    pub modulation: Option<Modulation>,
}

/// Body force supported on the retained modes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NseForcing {
    pub entries: Vec<ForcingMode>,
}

impl NseForcing {
    pub fn none() -> Self {
        NseForcing {
            entries: Vec::new(),
        }
    }

    pub fn single(k: (i32, i32), amplitude: [Complex64; 2]) -> Self {
        NseForcing {
            entries: vec![ForcingMode {
                k,
                amplitude,
                modulation: None,
            }],
        }
    }

    pub fn with_modulation(mut self, m: Modulation) -> Self {
        for e in &mut self.entries {
            e.modulation = Some(m);
        }
        self
    }

    /// The forcing of the rescaled system `v = u / nu`, `tau = nu t`:
    /// amplitudes divide by `nu^2` and modulation frequencies by `nu`.
    pub fn rescaled(&self, nu: f64) -> NseForcing {
        let inv2 = 1.0 / (nu * nu);
        NseForcing {
            entries: self
                .entries
                .iter()
                .map(|e| ForcingMode {
                    k: e.k,
                    amplitude: [e.amplitude[0] * inv2, e.amplitude[1] * inv2],
                    modulation: e.modulation.map(|m| Modulation {
                        frequency: m.frequency / nu,
                        ..m
                    }),
                })
                .collect(),
        }
    }
}

/// Prepared forcing entry: canonical mode slot, Leray-projected amplitude.
#[derive(Debug, Clone)]
struct PreparedForcing {
    slot: usize,
    amplitude: [Complex64; 2],
    modulation: Option<Modulation>,
}

/// The truncated vector field `du/dt = -nu A u - P B(u, u) + P f(t)`;
/// `lambda = (nu)`.
#[derive(Debug, Clone)]
pub struct NseField {
    kmax: i32,
    modes: Vec<(i32, i32)>,
    grid_w: usize,
    forcing: Vec<PreparedForcing>,
}

impl NseField {
    pub fn new(kmax: i32, forcing: &NseForcing) -> Result<Self, NseError> {
        if kmax <= 0 {
            return Err(NseError::BadKmax(kmax));
        }
        let modes = half_modes(kmax);
        let mut prepared = Vec::with_capacity(forcing.entries.len());
        for e in &forcing.entries {
            let (kx, ky) = e.k;
            if kx == 0 && ky == 0 {
                return Err(NseError::ZeroMode);
            }
            if !in_range(kx, ky, kmax) {
                return Err(NseError::ModeOutOfRange { kx, ky, kmax });
            }
            let (key, mut amp) = if is_canonical(kx, ky) {
                ((kx, ky), e.amplitude)
            } else {
                ((-kx, -ky), [e.amplitude[0].conj(), e.amplitude[1].conj()])
            };
            project_mode(key.0, key.1, &mut amp);
            prepared.push(PreparedForcing {
                slot: modes.binary_search(&key).expect("canonical mode present"),
                amplitude: amp,
                modulation: e.modulation,
            });
        }
        Ok(NseField {
            kmax,
            modes,
            grid_w: (2 * kmax + 1) as usize,
            forcing: prepared,
        })
    }

    pub fn kmax(&self) -> i32 {
        self.kmax
    }

    pub fn mode_list(&self) -> &[(i32, i32)] {
        &self.modes
    }

    /// Certified upper bound for `sup_t ||f(t)||_H` (triangle inequality
    /// over entries; exact for a single modulated mode).
    pub fn forcing_sup_norm(&self) -> f64 {
        let mut sup = 0.0;
        for e in &self.forcing {
            let base =
                fp::sqrt(2.0 * (e.amplitude[0].norm_sqr() + e.amplitude[1].norm_sqr()));
            let m = e.modulation.map(|m| m.sup()).unwrap_or(1.0);
            sup += m * base;
        }
        sup
    }

    pub fn params(&self, nu: f64) -> NseParams {
        NseParams::new(nu, 1.0, self.forcing_sup_norm())
    }

    /// Forcing coefficients at time `t` as a zero-state overlay.
    pub fn forcing_state(&self, t: f64) -> GalerkinState {
        let mut st = GalerkinState::zero(self.kmax).expect("kmax validated");
        for e in &self.forcing {
            let m = e.modulation.map(|mm| mm.eval(t)).unwrap_or(1.0);
            st.coeffs[e.slot][0] += e.amplitude[0] * m;
            st.coeffs[e.slot][1] += e.amplitude[1] * m;
        }
        st
    }

    #[inline]
    fn grid_idx(&self, kx: i32, ky: i32) -> usize {
        ((kx + self.kmax) as usize) * self.grid_w + (ky + self.kmax) as usize
    }

    /// Projected convolution `P B(u, u)` for every stored mode.
    ///
    /// `B(u, u)^(k) = sum_(p + q = k) i (u(p) . q) u(q)` over the retained
    /// modes; summation runs in fixed lexicographic `p` order.
    fn nonlinear(&self, coeffs: &[[Complex64; 2]], out: &mut [[Complex64; 2]]) {
        let m = self.kmax;
        let mut grid = vec![[Complex64::ZERO; 2]; self.grid_w * self.grid_w];
        for (i, &(kx, ky)) in self.modes.iter().enumerate() {
            grid[self.grid_idx(kx, ky)] = coeffs[i];
            grid[self.grid_idx(-kx, -ky)] = [coeffs[i][0].conj(), coeffs[i][1].conj()];
        }
        for (i, &(kx, ky)) in self.modes.iter().enumerate() {
            let mut acc = [Complex64::ZERO; 2];
            for px in -m..=m {
                for py in -m..=m {
                    if px == 0 && py == 0 {
                        continue;
                    }
                    let qx = kx - px;
                    let qy = ky - py;
                    if (qx == 0 && qy == 0) || !in_range(qx, qy, m) {
                        continue;
                    }
                    let up = &grid[self.grid_idx(px, py)];
                    let uq = &grid[self.grid_idx(qx, qy)];
                    // i (u(p) . q)
                    let dot = (up[0] * qx as f64 + up[1] * qy as f64) * Complex64::i();
                    acc[0] += dot * uq[0];
                    acc[1] += dot * uq[1];
                }
            }
            project_mode(kx, ky, &mut acc);
            out[i] = acc;
        }
    }
}

impl VectorField for NseField {
    fn dim(&self) -> usize {
        self.modes.len() * 4
    }

    fn eval(&self, t: f64, x: &[f64], lambda: &ParameterPoint, dxdt: &mut [f64]) {
        let nu = lambda.value(0);
        let n = self.modes.len();
        let mut coeffs = vec![[Complex64::ZERO; 2]; n];
        for (i, c) in x.chunks_exact(4).enumerate() {
            coeffs[i] = [Complex64::new(c[0], c[1]), Complex64::new(c[2], c[3])];
        }
        let mut nl = vec![[Complex64::ZERO; 2]; n];
        self.nonlinear(&coeffs, &mut nl);
        let mut deriv = vec![[Complex64::ZERO; 2]; n];
        for (i, &(kx, ky)) in self.modes.iter().enumerate() {
            let k2 = (kx * kx + ky * ky) as f64;
            deriv[i][0] = -nu * k2 * coeffs[i][0] - nl[i][0];
            deriv[i][1] = -nu * k2 * coeffs[i][1] - nl[i][1];
        }
        for e in &self.forcing {
            let m = e.modulation.map(|mm| mm.eval(t)).unwrap_or(1.0);
            deriv[e.slot][0] += e.amplitude[0] * m;
            deriv[e.slot][1] += e.amplitude[1] * m;
        }
        for (i, &(kx, ky)) in self.modes.iter().enumerate() {
            // The derivative of a divergence-free state is divergence-free
            // already; projecting once more only sheds roundoff.
            project_mode(kx, ky, &mut deriv[i]);
            dxdt[4 * i] = deriv[i][0].re;
            dxdt[4 * i + 1] = deriv[i][0].im;
            dxdt[4 * i + 2] = deriv[i][1].re;
            dxdt[4 * i + 3] = deriv[i][1].im;
        }
    }
}

/// `<B(u, u), u>` in H; zero up to roundoff for any truncated state.
pub fn nonlinear_energy_flux(field: &NseField, u: &GalerkinState) -> f64 {
    let n = field.modes.len();
    let mut nl = vec![[Complex64::ZERO; 2]; n];
    field.nonlinear(&u.coeffs, &mut nl);
    let mut s = 0.0;
    for (a, b) in nl.iter().zip(u.coeffs.iter()) {
        s += (a[0] * b[0].conj()).re + (a[1] * b[1].conj()).re;
    }
    2.0 * s
}

/// Integrates from `u0` and checks the H-norm energy estimates at sampled
/// times: the Gronwall envelope, the per-interval energy inequality, and the
/// enstrophy integral bound (accumulated as an extra quadrature state). Also
/// records the first entry time into the ball of radius `sqrt(2) rho0`.
pub fn verify_energy_estimates(
    field: &NseField,
    nu: f64,
    u0: &GalerkinState,
    horizon: f64,
    integrator: &IntegratorConfig,
    keep_series: bool,
) -> Result<BoundReport, ProcessError> {
    let params = field.params(nu);
    let lambda1 = params.lambda1;
    let rho0 = params.rho0();
    let rho0_sq = rho0 * rho0;
    let dim = field.dim();
    // |k|^2 weight for each flat slot, for the enstrophy quadrature state.
    let mut weights = Vec::with_capacity(dim);
    for &(kx, ky) in field.mode_list() {
        let k2 = (kx * kx + ky * ky) as f64;
        for _ in 0..4 {
            weights.push(k2);
        }
    }
    let lambda = ParameterPoint::scalar("nu", nu);
    let mut y0 = u0.flatten();
    y0.push(0.0); // running nu * integral of ||grad u||^2
    let aug = |t: f64, y: &[f64], dy: &mut [f64]| {
        field.eval(t, &y[..dim], &lambda, &mut dy[..dim]);
        let mut v_sq = 0.0;
        for i in 0..dim {
            v_sq += weights[i] * y[i] * y[i];
        }
        dy[dim] = nu * 2.0 * v_sq;
    };
    let traj = ode::integrate_sampled(
        aug,
        0.0,
        horizon,
        &y0,
        integrator,
        1e6,
        ENERGY_SAMPLE_STRIDE,
    )
    .map_err(ProcessError::from)?;

    let u0_sq = u0.norm_h_sq();
    let scale = u0_sq + rho0_sq + 1.0;
    let allowance = 10.0 * (integrator.rel_tol * scale + integrator.abs_tol);
    let mut c_gronwall = CheckAccumulator::new("energy-gronwall (fromG)", allowance, keep_series);
    let mut c_diq = CheckAccumulator::new("energy-dissipation (diq1)", allowance, keep_series);
    let mut c_intv = CheckAccumulator::new("enstrophy-integral (intV)", allowance, keep_series);
    let mut entry_time = f64::NAN;
    let f_sq_rate = params.f_sup * params.f_sup / (nu * lambda1);
    let mut prev: Option<(f64, f64, f64)> = None;
    for i in 0..traj.len() {
        let t = traj.times[i];
        let y = traj.state(i);
        let h_sq = flat_norm_h_sq(&y[..dim]);
        let quad = y[dim];
        let decay = fp::exp(-nu * lambda1 * t);
        c_gronwall.observe(t, h_sq, u0_sq * decay + rho0_sq * (1.0 - decay));
        c_intv.observe(t, quad, u0_sq + t * nu * nu * nu * lambda1 * params.g * params.g);
        if let Some((tp, hp, qp)) = prev {
            // Integrated form of the differential inequality over the
            // sample interval.
            c_diq.observe(t, (h_sq - hp) + (quad - qp), (t - tp) * f_sq_rate);
        }
        if entry_time.is_nan() && h_sq <= 2.0 * rho0_sq {
            entry_time = t;
        }
        prev = Some((t, h_sq, quad));
    }

    let mut report = BoundReport::default();
    report.push_constant("nu", nu);
    report.push_constant("lambda1", lambda1);
    report.push_constant("f_sup", params.f_sup);
    report.push_constant("G", params.g);
    report.push_constant("rho0", rho0);
    report.push_constant("u0_norm_sq", u0_sq);
    report.push_constant("absorbing_entry_time", entry_time);
    report.checks.push(c_gronwall.finish());
    report.checks.push(c_diq.finish());
    report.checks.push(c_intv.finish());
    Ok(report)
}

/// Checks the viscosity rescaling identity at trajectory level: integrating
/// `u` under viscosity `nu` and `v` under viscosity 1 with forcing
/// `nu^-2 f(tau / nu)` from `v0 = u0 / nu` must satisfy
/// `u(t) = nu v(nu t)` up to integrator tolerance.
pub fn viscosity_rescale_check(
    field: &NseField,
    forcing: &NseForcing,
    nu: f64,
    u0: &GalerkinState,
    horizon: f64,
    integrator: &IntegratorConfig,
    keep_series: bool,
) -> Result<BoundReport, ProcessError> {
    let rescaled_field = NseField::new(field.kmax, &forcing.rescaled(nu)).expect("same modes");
    let lam_u = ParameterPoint::scalar("nu", nu);
    let lam_v = ParameterPoint::scalar("nu", 1.0);
    let dim = field.dim();
    let stride = ENERGY_SAMPLE_STRIDE.min(horizon / 8.0);
    let u_traj = ode::integrate_sampled(
        |t, y, dy| field.eval(t, y, &lam_u, dy),
        0.0,
        horizon,
        &u0.flatten(),
        integrator,
        1e6,
        stride,
    )
    .map_err(ProcessError::from)?;
    let v_traj = ode::integrate_sampled(
        |t, y, dy| rescaled_field.eval(t, y, &lam_v, dy),
        0.0,
        nu * horizon,
        &u0.scaled(1.0 / nu).flatten(),
        integrator,
        1e6,
        nu * stride,
    )
    .map_err(ProcessError::from)?;
    debug_assert_eq!(u_traj.len(), v_traj.len());

    let mut check = CheckAccumulator::new("rescale-identity (ABconvert)", 0.0, keep_series);
    let n = u_traj.len().min(v_traj.len());
    for i in 0..n {
        let t = u_traj.times[i];
        let u = u_traj.state(i);
        let v = v_traj.state(i);
        let mut diff_sq = 0.0;
        for j in 0..dim {
            let d = u[j] - nu * v[j];
            diff_sq += d * d;
        }
        let residual = fp::sqrt(2.0 * diff_sq);
        let u_norm = fp::sqrt(flat_norm_h_sq(u));
        let bound = 10.0 * (integrator.rel_tol * u_norm + integrator.abs_tol);
        check.observe(t, residual, bound);
    }

    let mut report = BoundReport::default();
    report.push_constant("nu", nu);
    report.push_constant("horizon", horizon);
    report.checks.push(check.finish());
    Ok(report)
}

/// Empirical Hoelder-1/2 ratio `Delta_H(A(t2), A(t1)) / sqrt(t2 - t1)` for
/// two attractor sections of the same family at nearby times.
pub fn section_time_holder(
    first: &AttractorSection,
    second: &AttractorSection,
) -> Result<f64, AttractorError> {
    if first.lambda != second.lambda {
        return Err(AttractorError::Precondition(
            "sections must share the parameter point",
        ));
    }
    let dt = second.t - first.t;
    if !(dt > 0.0) {
        return Err(AttractorError::Precondition(
            "time pair must be strictly increasing",
        ));
    }
    if dt >= 1.0 {
        return Err(AttractorError::Precondition(
            "time gap must be below one (local ratio)",
        ));
    }
    let d = hausdorff(&second.cloud, &first.cloud)?.symmetric;
    Ok(d / fp::sqrt(dt))
}

/// V-norm absorbing-ball radius formula `rho(G) = (m1 + m2) e^(m3)` with the
/// unspecified constant `c0` supplied by the caller. The underlying theory
/// fixes no numeric value for `c0`, so this is a formula evaluator, not a
/// verified bound.
pub fn rho_v(g: f64, nu: f64, lambda1: f64, c0: f64) -> f64 {
    let rho0 = nu * g;
    let rho0p = rho0 + 1.0;
    let m1 = lambda1 * rho0 * rho0 + rho0p * rho0p / nu;
    let m2 = 2.0 * nu * lambda1 * lambda1 * rho0 * rho0;
    let m3 = 2.0 * c0 / (nu * nu * nu) * rho0p * rho0p * m1;
    (m1 + m2) * fp::exp(m3)
}

#[cfg(test)]
pub(super) mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(super) fn random_state(kmax: i32, rng: &mut ChaCha8Rng, max_band: i32) -> GalerkinState {
        let mut entries = Vec::new();
        for kx in -max_band..=max_band {
            for ky in -max_band..=max_band {
                if kx == 0 && ky == 0 {
                    continue;
                }
                if kx.abs().max(ky.abs()) > kmax {
                    continue;
                }
                entries.push((
                    (kx, ky),
                    [
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    ],
                ));
            }
        }
        GalerkinState::from_mode_list(kmax, &entries).unwrap()
    }

    #[test]
    fn mode_set_shape() {
        let m = half_modes(8);
        assert_eq!(m.len(), 144); // (17^2 - 1) / 2
        assert!(m.windows(2).all(|w| w[0] < w[1]));
        for &(kx, ky) in &m {
            assert!(is_canonical(kx, ky));
            assert!(in_range(kx, ky, 8));
        }
        assert_eq!(state_dim(8), 576);
    }

    #[test]
    fn non_canonical_entries_fold() {
        let a = Complex64::new(0.3, -0.7);
        let s1 = GalerkinState::from_mode_list(4, &[((1, 2), [a, Complex64::ZERO])]).unwrap();
        let s2 = GalerkinState::from_mode_list(
            4,
            &[((-1, -2), [a.conj(), Complex64::ZERO])],
        )
        .unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn projection_makes_states_divergence_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let s = random_state(4, &mut rng, 4);
            assert!(s.divergence_residual() <= 1e-12);
        }
    }

    #[test]
    fn zero_field_zero_derivative() {
        let field = NseField::new(4, &NseForcing::none()).unwrap();
        let lam = ParameterPoint::scalar("nu", 1.0);
        let u = GalerkinState::zero(4).unwrap();
        let mut out = vec![0.0; field.dim()];
        field.eval(0.0, &u.flatten(), &lam, &mut out);
        assert!(out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_shear_mode_decays_linearly() {
        // u = a cos(k . x) e with e . k = 0: the nonlinearity vanishes and
        // the mode decays at rate nu |k|^2.
        let field = NseField::new(4, &NseForcing::none()).unwrap();
        let nu = 0.7;
        let lam = ParameterPoint::scalar("nu", nu);
        let e = [Complex64::ZERO, Complex64::new(0.5, 0.0)];
        let u = GalerkinState::from_mode_list(4, &[((1, 0), e)]).unwrap();
        let flat = u.flatten();
        let mut out = vec![0.0; field.dim()];
        field.eval(0.0, &flat, &lam, &mut out);
        for (i, v) in out.iter().enumerate() {
            assert_relative_eq!(*v, -nu * flat[i], epsilon = 1e-14);
        }
        // And the integrated trajectory matches the exponential.
        let cfg = IntegratorConfig::default();
        let y = ode::integrate(
            |t, y, dy| field.eval(t, y, &lam, dy),
            0.0,
            2.0,
            &flat,
            &cfg,
            1e6,
        )
        .unwrap();
        let expect = (-nu * 2.0f64).exp();
        for (a, b) in y.iter().zip(flat.iter()) {
            assert_relative_eq!(*a, b * expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn nonlinear_term_is_energy_neutral() {
        let field = NseField::new(4, &NseForcing::none()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let u = random_state(4, &mut rng, 4);
            let flux = nonlinear_energy_flux(&field, &u);
            let scale = u.norm_h_sq();
            assert!(
                flux.abs() <= 1e-12 * scale.max(1e-30),
                "flux {flux} at scale {scale}"
            );
        }
    }

    #[test]
    fn grashof_examples() {
        assert_eq!(grashof(0.5, 1.0, 0.0), 0.0);
        assert_relative_eq!(grashof(0.1, 1.0, 2.0), 200.0);
        let g1 = grashof(0.2, 1.0, 3.0);
        let g2 = grashof(0.4, 1.0, 3.0);
        assert_relative_eq!(g1 / g2, 4.0);
    }

    #[test]
    fn unforced_energy_decays_inside_envelope() {
        let field = NseField::new(3, &NseForcing::none()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u0 = random_state(3, &mut rng, 2);
        let cfg = IntegratorConfig::with_tols(1e-9, 1e-12);
        let report = verify_energy_estimates(&field, 1.0, &u0, 3.0, &cfg, false).unwrap();
        assert!(report.all_satisfied(), "{report:?}");
        assert_eq!(report.constant("G"), Some(0.0));
    }

    #[test]
    fn forced_energy_estimates_hold() {
        let forcing = NseForcing::single(
            (1, 0),
            [Complex64::ZERO, Complex64::new(0.4, 0.1)],
        );
        let field = NseField::new(3, &forcing).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let u0 = random_state(3, &mut rng, 2);
        let cfg = IntegratorConfig::with_tols(1e-8, 1e-11);
        let report = verify_energy_estimates(&field, 0.8, &u0, 6.0, &cfg, false).unwrap();
        assert!(report.all_satisfied(), "{report:?}");
        // Starting from rest keeps the norm inside rho0 for all time.
        let zero = GalerkinState::zero(3).unwrap();
        let rep0 = verify_energy_estimates(&field, 0.8, &zero, 6.0, &cfg, false).unwrap();
        assert!(rep0.all_satisfied());
        assert_eq!(rep0.constant("absorbing_entry_time"), Some(0.0));
    }

    #[test]
    fn divergence_free_preserved_along_trajectory() {
        let forcing = NseForcing::single(
            (2, 1),
            [Complex64::new(0.2, 0.0), Complex64::new(-0.1, 0.3)],
        );
        let field = NseField::new(4, &forcing).unwrap();
        let lam = ParameterPoint::scalar("nu", 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let u0 = random_state(4, &mut rng, 3);
        let cfg = IntegratorConfig::default();
        let y = ode::integrate(
            |t, y, dy| field.eval(t, y, &lam, dy),
            0.0,
            4.0,
            &u0.flatten(),
            &cfg,
            1e6,
        )
        .unwrap();
        let end = GalerkinState::from_flat(4, &y).unwrap();
        assert!(end.divergence_defect_h() <= 1e-12);
    }

    #[test]
    fn rescale_identity_trivial_and_nontrivial() {
        let forcing = NseForcing::single(
            (0, 1),
            [Complex64::new(0.3, 0.0), Complex64::ZERO],
        );
        let field = NseField::new(3, &forcing).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let u0 = random_state(3, &mut rng, 2);
        let cfg = IntegratorConfig::with_tols(1e-8, 1e-12);
        for nu in [1.0, 0.5] {
            let rep =
                viscosity_rescale_check(&field, &forcing, nu, &u0, 3.0, &cfg, false).unwrap();
            assert!(rep.all_satisfied(), "nu = {nu}: {rep:?}");
        }
        // u0 = 0, f = 0: both trajectories identically zero.
        let nf = NseForcing::none();
        let zf = NseField::new(3, &nf).unwrap();
        let zero = GalerkinState::zero(3).unwrap();
        let rep = viscosity_rescale_check(&zf, &nf, 0.25, &zero, 2.0, &cfg, false).unwrap();
        assert!(rep.all_satisfied());
        assert_eq!(rep.checks[0].worst_margin, 0.0 + 10.0 * cfg.abs_tol);
    }

    #[test]
    fn rho_v_increases_with_grashof() {
        let a = rho_v(1.0, 1.0, 1.0, 0.1);
        let b = rho_v(2.0, 1.0, 1.0, 0.1);
        assert!(b > a && a > 0.0);
    }

    #[test]
    fn holder_ratio_preconditions_and_autonomous_case() {
        use crate::attractors::{pullback_section, PullbackSchedule};
        use crate::process::ProcessDef;
        use crate::sampling;

        // Constant forcing: the pullback section is a time-independent
        // equilibrium, so sections at nearby times coincide and the ratio
        // vanishes.
        let forcing = NseForcing::single((0, 1), [Complex64::new(0.3, 0.0), Complex64::ZERO]);
        let field = NseField::new(2, &forcing).unwrap();
        let dim = field.dim();
        let rho0 = field.params(1.0).rho0();
        let proc = ProcessDef::with_integrator(field, IntegratorConfig::with_tols(1e-9, 1e-12));
        let lam = ParameterPoint::scalar("nu", 1.0);
        let seed = project_cloud(
            2,
            &crate::sampling::ball_lattice(&alloc::vec![0.0; dim], 2.0 * rho0 + 0.5, 4).unwrap(),
        );
        let mut secs = Vec::new();
        for t in [0.0, 0.25] {
            let sched = PullbackSchedule::geometric(t, 3.0, 5).with_tol(1e-5);
            let sec = pullback_section(&proc, &lam, t, &seed, &sched, sched.tol / 4.0).unwrap();
            assert!(sec.converged);
            secs.push(sec);
        }
        let ratio = section_time_holder(&secs[0], &secs[1]).unwrap();
        assert!(ratio <= 1e-6, "autonomous ratio {ratio}");

        // Degenerate and mismatched pairs are rejected.
        assert!(section_time_holder(&secs[0], &secs[0]).is_err());
        assert!(section_time_holder(&secs[1], &secs[0]).is_err());
        let mut other = secs[1].clone();
        other.lambda = ParameterPoint::scalar("nu", 2.0);
        assert!(section_time_holder(&secs[0], &other).is_err());
        let _ = sampling::interval_lattice(0.0, 1.0, 2); // keep import used
    }

    #[test]
    fn forcing_sup_norm_bounds_the_time_slices() {
        let forcing = NseForcing::single((1, 2), [Complex64::new(0.2, 0.1), Complex64::new(-0.3, 0.0)])
            .with_modulation(Modulation {
                offset: 0.7,
                amplitude: 0.6,
                frequency: 2.0,
                phase: 0.4,
            });
        let field = NseField::new(3, &forcing).unwrap();
        let sup = field.forcing_sup_norm();
        let mut seen = 0.0f64;
        for i in 0..2000 {
            let t = i as f64 * 0.01;
            let norm = fp::sqrt(field.forcing_state(t).norm_h_sq());
            assert!(norm <= sup * (1.0 + 1e-12), "t = {t}: {norm} > {sup}");
            seen = seen.max(norm);
        }
        // Single modulated entry: the bound is attained up to grid spacing.
        assert!(seen >= 0.95 * sup, "sup {sup} never approached ({seen})");
    }

    #[test]
    fn mode_validation_errors() {
        assert!(matches!(
            GalerkinState::from_mode_list(2, &[((0, 0), [Complex64::ZERO; 2])]),
            Err(NseError::ZeroMode)
        ));
        assert!(matches!(
            GalerkinState::from_mode_list(2, &[((3, 0), [Complex64::ZERO; 2])]),
            Err(NseError::ModeOutOfRange { .. })
        ));
        assert!(matches!(
            GalerkinState::from_flat(2, &[0.0; 3]),
            Err(NseError::BadStateLength { .. })
        ));
    }
}

