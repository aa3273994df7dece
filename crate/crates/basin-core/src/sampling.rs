//! Deterministic seed sets for attractor construction.
//!
//! Pullback and uniform constructions need an absorbing set sampled finely
//! enough to shadow the attractor. The samplers here are low-discrepancy
//! (Kronecker lattice driven by the generalized golden ratio), so seeds are
//! reproducible without any RNG.

use alloc::vec;
use alloc::vec::Vec;

use crate::fp;
use crate::geometry::{GeometryError, PointCloud};

/// Evenly spaced 1-D sample of `[a, b]`, endpoints included.
pub fn interval_lattice(a: f64, b: f64, count: usize) -> Result<PointCloud, GeometryError> {
    assert!(b >= a, "interval must be ordered");
    assert!(count >= 1);
    if count == 1 {
        return PointCloud::singleton(&[(a + b) / 2.0]);
    }
    let step = (b - a) / (count - 1) as f64;
    let vals: Vec<f64> = (0..count).map(|i| a + step * i as f64).collect();
    PointCloud::from_flat(1, vals)
}

/// Kronecker (R_d) low-discrepancy sequence in the unit cube.
struct Kronecker {
    alpha: Vec<f64>,
    i: u64,
}

impl Kronecker {
    fn new(dim: usize) -> Self {
        // Generalized golden ratio: unique positive root of x^(d+1) = x + 1.
        let mut phi = 1.5f64;
        for _ in 0..64 {
            phi = fp::powf(1.0 + phi, 1.0 / (dim as f64 + 1.0));
        }
        let mut alpha = Vec::with_capacity(dim);
        let mut a = 1.0;
        for _ in 0..dim {
            a /= phi;
            alpha.push(a);
        }
        Kronecker { alpha, i: 0 }
    }

    fn next_point(&mut self, out: &mut [f64]) {
        self.i += 1;
        for (d, a) in self.alpha.iter().enumerate() {
            let v = 0.5 + a * self.i as f64;
            out[d] = v - fp::floor(v);
        }
    }
}

/// Low-discrepancy sample of the closed ball of `radius` around `center`,
/// with exactly `count` points.
///
/// In dimension <= 6 cube points outside the ball are rejected; in higher
/// dimension rejection is hopeless and cube points are radially pulled onto
/// the ball instead (coverage concentrates near the boundary there, which is
/// fine for seeding contracting dynamics).
pub fn ball_lattice(center: &[f64], radius: f64, count: usize) -> Result<PointCloud, GeometryError> {
    let dim = center.len();
    if dim == 0 {
        return Err(GeometryError::ZeroDimension);
    }
    assert!(radius >= 0.0 && radius.is_finite());
    assert!(count >= 1);
    let mut seq = Kronecker::new(dim);
    let mut unit = vec![0.0; dim];
    let mut flat = Vec::with_capacity(count * dim);
    let mut accepted = 0usize;
    // Keep the exact center as the first point so the seed always contains it.
    flat.extend_from_slice(center);
    accepted += 1;
    let reject = dim <= 6;
    let mut guard = 0u64;
    while accepted < count {
        guard += 1;
        assert!(
            guard < 10_000_000,
            "ball rejection sampling failed to fill the request"
        );
        seq.next_point(&mut unit);
        let mut norm_sq = 0.0;
        for u in unit.iter_mut() {
            *u = 2.0 * *u - 1.0;
            norm_sq += *u * *u;
        }
        if reject {
            if norm_sq > 1.0 {
                continue;
            }
            for (d, u) in unit.iter().enumerate() {
                flat.push(center[d] + radius * u);
            }
        } else {
            let scale = if norm_sq > 1.0 {
                radius / fp::sqrt(norm_sq)
            } else {
                radius
            };
            for (d, u) in unit.iter().enumerate() {
                flat.push(center[d] + scale * u);
            }
        }
        accepted += 1;
    }
    PointCloud::from_flat(dim, flat)
}
