//! Finite point clouds as stand-ins for non-empty compact subsets of
//! Euclidean space, with exact Hausdorff (semi-)distance computation.
//!
//! Distances are exact for the finite clouds: the accelerated (kd-tree) path
//! and the brute-force path return bit-identical values because min/max
//! reductions over the same set of squared distances do not depend on
//! evaluation order.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::fp;

/// Errors from cloud construction and distance queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeometryError {
    /// A cloud must contain at least one point.
    EmptyCloud,
    /// Operands live in different dimensions.
    DimensionMismatch { left: usize, right: usize },
    /// Point `index` has the wrong length or a non-finite coordinate.
    BadPoint { index: usize },
    /// Zero-dimensional clouds are not meaningful.
    ZeroDimension,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::EmptyCloud => write!(f, "point cloud is empty"),
            GeometryError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            GeometryError::BadPoint { index } => {
                write!(f, "point {index} has wrong length or non-finite coordinate")
            }
            GeometryError::ZeroDimension => write!(f, "dimension must be positive"),
        }
    }
}

impl core::error::Error for GeometryError {}

/// Finite sampled approximation of a non-empty compact subset of `R^dim`.
///
/// Points are stored flat in row-major order, lexicographically sorted, with
/// exact duplicates removed. `resolution` is the merge radius used during
/// construction (`0` when only exact duplicates were removed); it is carried
/// along so every distance derived from the cloud can be reported together
/// with the sampling scale it was computed at.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    points: Vec<f64>,
    resolution: f64,
}

impl PointCloud {
    /// Builds a cloud from row vectors: sorts lexicographically and drops
    /// exact duplicates.
    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim || r.iter().any(|v| !v.is_finite()) {
                return Err(GeometryError::BadPoint { index: i });
            }
        }
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            flat.extend_from_slice(r);
        }
        Self::from_flat(dim, flat)
    }

    /// Builds a cloud from a flat row-major buffer.
    pub fn from_flat(dim: usize, flat: Vec<f64>) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        if flat.is_empty() {
            return Err(GeometryError::EmptyCloud);
        }
        if flat.len() % dim != 0 {
            return Err(GeometryError::BadPoint {
                index: flat.len() / dim,
            });
        }
        if let Some(bad) = flat.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::BadPoint { index: bad / dim });
        }
        let n = flat.len() / dim;
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by(|&a, &b| lex_cmp(row(&flat, dim, a as usize), row(&flat, dim, b as usize)));
        let mut points = Vec::with_capacity(flat.len());
        for &i in &order {
            let p = row(&flat, dim, i as usize);
            let dup = points.len() >= dim
                && lex_cmp(&points[points.len() - dim..], p) == core::cmp::Ordering::Equal;
            if !dup {
                points.extend_from_slice(p);
            }
        }
        Ok(PointCloud {
            dim,
            points,
            resolution: 0.0,
        })
    }

    /// Cloud containing a single point.
    pub fn singleton(point: &[f64]) -> Result<Self, GeometryError> {
        Self::from_flat(point.len(), point.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn point(&self, i: usize) -> &[f64] {
        row(&self.points, self.dim, i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    /// Flat row-major coordinate buffer (sorted order).
    pub fn flat(&self) -> &[f64] {
        &self.points
    }

    /// Max Euclidean norm over points, useful for guard-radius checks.
    pub fn max_norm(&self) -> f64 {
        let mut m = 0.0f64;
        for p in self.iter() {
            m = m.max(norm(p));
        }
        m
    }

    /// Euclidean diameter upper bound via coordinate bounding box.
    pub fn bbox_diameter(&self) -> f64 {
        let mut s = 0.0;
        for d in 0..self.dim {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for p in self.iter() {
                lo = lo.min(p[d]);
                hi = hi.max(p[d]);
            }
            s += (hi - lo) * (hi - lo);
        }
        fp::sqrt(s)
    }
}

fn row(flat: &[f64], dim: usize, i: usize) -> &[f64] {
    &flat[i * dim..(i + 1) * dim]
}

fn lex_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            core::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    core::cmp::Ordering::Equal
}

/// Squared Euclidean distance; the one summation both distance paths share,
/// so results stay bit-identical.
#[inline]
fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        s += d * d;
    }
    s
}

fn norm(a: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in a {
        s += v * v;
    }
    fp::sqrt(s)
}

/// Directed and symmetric Hausdorff distances between two clouds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistancePair {
    /// rho(A, C): sup over a of dist(a, C).
    pub forward: f64,
    /// rho(C, A).
    pub backward: f64,
    /// max(forward, backward), the Hausdorff metric.
    pub symmetric: f64,
}

impl DistancePair {
    pub fn new(forward: f64, backward: f64) -> Self {
        DistancePair {
            forward,
            backward,
            symmetric: forward.max(backward),
        }
    }
}

/// Hausdorff semi-distance `rho(A, C) = sup_{a in A} inf_{c in C} |a - c|`.
///
/// Exact for the finite clouds; dispatches to a kd-tree for large inputs in
/// low dimension, brute force otherwise. Both paths agree bitwise.
pub fn semi_distance(a: &PointCloud, c: &PointCloud) -> Result<f64, GeometryError> {
    check_pair(a, c)?;
    if use_index(a, c) {
        Ok(semi_distance_indexed(a, c)?)
    } else {
        Ok(semi_distance_brute(a, c)?)
    }
}

fn check_pair(a: &PointCloud, c: &PointCloud) -> Result<(), GeometryError> {
    if a.dim != c.dim {
        return Err(GeometryError::DimensionMismatch {
            left: a.dim,
            right: c.dim,
        });
    }
    if a.is_empty() || c.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    Ok(())
}

fn use_index(a: &PointCloud, c: &PointCloud) -> bool {
    a.dim <= 8 && a.len() * c.len() > 8_192
}

/// O(|A| * |C|) reference path; also the oracle the accelerated path is
/// checked against.
pub fn semi_distance_brute(a: &PointCloud, c: &PointCloud) -> Result<f64, GeometryError> {
    check_pair(a, c)?;
    let mut max_min = 0.0f64;
    for p in a.iter() {
        let mut min_sq = f64::INFINITY;
        for q in c.iter() {
            let d = dist_sq(p, q);
            if d < min_sq {
                min_sq = d;
            }
        }
        if min_sq > max_min {
            max_min = min_sq;
        }
    }
    Ok(fp::sqrt(max_min))
}

/// kd-tree accelerated path; bit-identical to [`semi_distance_brute`].
pub fn semi_distance_indexed(a: &PointCloud, c: &PointCloud) -> Result<f64, GeometryError> {
    check_pair(a, c)?;
    let tree = KdTree::build(c);
    let mut max_min = 0.0f64;
    for p in a.iter() {
        let d = tree.nearest_sq(p);
        if d > max_min {
            max_min = d;
        }
    }
    Ok(fp::sqrt(max_min))
}

/// Both directed semi-distances plus their max.
pub fn hausdorff(a: &PointCloud, c: &PointCloud) -> Result<DistancePair, GeometryError> {
    let forward = semi_distance(a, c)?;
    let backward = semi_distance(c, a)?;
    Ok(DistancePair::new(forward, backward))
}

/// Greedy first-wins thinning in stored (sorted) order: a point is retained
/// only if no previously retained point lies within `radius`. The output is
/// a subset of the input with `rho(input, output) <= radius` and resolution
/// set to `radius`.
pub fn merge_dedup(cloud: &PointCloud, radius: f64) -> PointCloud {
    assert!(radius >= 0.0 && radius.is_finite(), "merge radius must be >= 0");
    if radius == 0.0 {
        // Exact duplicates are already removed at construction.
        let mut out = cloud.clone();
        out.resolution = 0.0;
        return out;
    }
    let dim = cloud.dim;
    let r_sq = radius * radius;
    let mut kept: Vec<f64> = Vec::with_capacity(cloud.points.len());
    if dim <= 3 {
        // Grid hash: any point within Euclidean radius is within one cell
        // in every coordinate when the cell width equals the radius.
        let mut cells: BTreeMap<[i64; 3], Vec<u32>> = BTreeMap::new();
        let key = |p: &[f64]| -> [i64; 3] {
            let mut k = [0i64; 3];
            for d in 0..dim {
                k[d] = fp::floor(p[d] / radius) as i64;
            }
            k
        };
        // Unused axes collapse to the single offset 0.
        let span = |axis: usize| if axis < dim { -1..=1i64 } else { 0..=0i64 };
        let mut n_kept = 0u32;
        for p in cloud.iter() {
            let kc = key(p);
            let mut ok = true;
            'scan: for dx in span(0) {
                for dy in span(1) {
                    for dz in span(2) {
                        let kk = [kc[0] + dx, kc[1] + dy, kc[2] + dz];
                        if let Some(ids) = cells.get(&kk) {
                            for &i in ids {
                                if dist_sq(p, row(&kept, dim, i as usize)) <= r_sq {
                                    ok = false;
                                    break 'scan;
                                }
                            }
                        }
                    }
                }
            }
            if ok {
                kept.extend_from_slice(p);
                cells.entry(kc).or_default().push(n_kept);
                n_kept += 1;
            }
        }
    } else {
        for p in cloud.iter() {
            let ok = kept
                .chunks_exact(dim)
                .all(|q| dist_sq(p, q) > r_sq);
            if ok {
                kept.extend_from_slice(p);
            }
        }
    }
    PointCloud {
        dim,
        points: kept,
        resolution: radius,
    }
}

// ---------------------------------------------------------------------------
// kd-tree
// ---------------------------------------------------------------------------

/// Median-split kd-tree over a cloud, used for exact nearest-neighbor
/// queries. The tree is an index permutation: for any slice the median
/// element is the node, halves are subtrees.
struct KdTree<'a> {
    dim: usize,
    pts: &'a [f64],
    idx: Vec<u32>,
}

impl<'a> KdTree<'a> {
    fn build(cloud: &'a PointCloud) -> Self {
        let n = cloud.len();
        let mut idx: Vec<u32> = (0..n as u32).collect();
        let mut tree = KdTree {
            dim: cloud.dim,
            pts: &cloud.points,
            idx: Vec::new(),
        };
        tree.split(&mut idx, 0);
        tree.idx = idx;
        tree
    }

    fn coord(&self, i: u32, axis: usize) -> f64 {
        self.pts[i as usize * self.dim + axis]
    }

    fn split(&self, idx: &mut [u32], depth: usize) {
        if idx.len() <= 1 {
            return;
        }
        let axis = depth % self.dim;
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| {
            self.coord(a, axis).total_cmp(&self.coord(b, axis))
        });
        let (lo, rest) = idx.split_at_mut(mid);
        self.split(lo, depth + 1);
        self.split(&mut rest[1..], depth + 1);
    }

    fn nearest_sq(&self, q: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        self.search(&self.idx, 0, q, &mut best);
        best
    }

    fn search(&self, idx: &[u32], depth: usize, q: &[f64], best: &mut f64) {
        if idx.is_empty() {
            return;
        }
        let axis = depth % self.dim;
        let mid = idx.len() / 2;
        let node = idx[mid] as usize;
        let d = dist_sq(q, row(self.pts, self.dim, node));
        if d < *best {
            *best = d;
        }
        let delta = q[axis] - self.coord(idx[mid], axis);
        let (near, far) = if delta < 0.0 {
            (&idx[..mid], &idx[mid + 1..])
        } else {
            (&idx[mid + 1..], &idx[..mid])
        };
        self.search(near, depth + 1, q, best);
        if delta * delta <= *best {
            self.search(far, depth + 1, q, best);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud1(vals: &[f64]) -> PointCloud {
        PointCloud::from_flat(1, vals.to_vec()).unwrap()
    }

    #[test]
    fn single_pair_distance() {
        let a = PointCloud::singleton(&[0.0, 0.0]).unwrap();
        let c = PointCloud::singleton(&[3.0, 4.0]).unwrap();
        assert_eq!(semi_distance(&a, &c).unwrap(), 5.0);
    }

    #[test]
    fn subset_has_zero_semi_distance() {
        let a = PointCloud::from_rows(2, &[vec![1.0, 2.0], vec![0.5, -1.0]]).unwrap();
        let c =
            PointCloud::from_rows(2, &[vec![1.0, 2.0], vec![0.5, -1.0], vec![9.0, 9.0]]).unwrap();
        assert_eq!(semi_distance(&a, &c).unwrap(), 0.0);
        assert!(semi_distance(&c, &a).unwrap() > 0.0);
    }

    #[test]
    fn one_dimensional_sup() {
        let a = cloud1(&[0.0, 10.0]);
        let c = cloud1(&[1.0]);
        assert_eq!(semi_distance(&a, &c).unwrap(), 9.0);
    }

    #[test]
    fn hausdorff_pair_fields() {
        let a = cloud1(&[0.0]);
        let c = cloud1(&[1.0, 2.0]);
        let p = hausdorff(&a, &c).unwrap();
        assert_eq!(p.forward, 1.0);
        assert_eq!(p.backward, 2.0);
        assert_eq!(p.symmetric, 2.0);
    }

    #[test]
    fn identity_case() {
        let a = PointCloud::from_rows(3, &[vec![1.0, 2.0, 3.0], vec![-1.0, 0.0, 4.0]]).unwrap();
        let p = hausdorff(&a, &a).unwrap();
        assert_eq!((p.forward, p.backward, p.symmetric), (0.0, 0.0, 0.0));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = cloud1(&[0.0]);
        let c = PointCloud::singleton(&[0.0, 0.0]).unwrap();
        assert_eq!(
            semi_distance(&a, &c),
            Err(GeometryError::DimensionMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn empty_and_bad_points_rejected() {
        assert_eq!(
            PointCloud::from_flat(2, vec![]),
            Err(GeometryError::EmptyCloud)
        );
        assert_eq!(
            PointCloud::from_rows(2, &[vec![0.0]]),
            Err(GeometryError::BadPoint { index: 0 })
        );
        assert_eq!(
            PointCloud::from_rows(1, &[vec![f64::NAN]]),
            Err(GeometryError::BadPoint { index: 0 })
        );
    }

    #[test]
    fn construction_sorts_and_dedups() {
        let c = PointCloud::from_rows(
            2,
            &[
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![0.0, -1.0],
            ],
        )
        .unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.point(0), &[0.0, -1.0]);
        assert_eq!(c.point(1), &[0.0, 1.0]);
        assert_eq!(c.point(2), &[1.0, 0.0]);
    }

    #[test]
    fn merge_zero_radius_removes_only_exact_duplicates() {
        let c = cloud1(&[0.0, 0.4, 0.4, 0.9]);
        let m = merge_dedup(&c, 0.0);
        assert_eq!(m.len(), 3);
        assert_eq!(m.resolution(), 0.0);
    }

    #[test]
    fn merge_greedy_walk() {
        let c = cloud1(&[0.0, 0.4, 0.9]);
        let m = merge_dedup(&c, 0.5);
        assert_eq!(m.flat(), &[0.0, 0.9]);
        assert_eq!(m.resolution(), 0.5);
    }

    #[test]
    fn merge_output_within_radius_of_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 1..=3usize {
            let rows: Vec<Vec<f64>> = (0..300)
                .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let c = PointCloud::from_rows(dim, &rows).unwrap();
            for radius in [0.01, 0.1, 0.5] {
                let m = merge_dedup(&c, radius);
                let rho = semi_distance(&c, &m).unwrap();
                assert!(rho <= radius, "rho {rho} > radius {radius}");
                // Retained points are pairwise farther apart than the radius.
                for i in 0..m.len() {
                    for j in 0..i {
                        assert!(dist_sq(m.point(i), m.point(j)) > radius * radius);
                    }
                }
            }
        }
    }

    #[test]
    fn merge_high_dimensional_path() {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|i| (0..6).map(|d| ((i * 7 + d) % 13) as f64 * 0.01).collect())
            .collect();
        let c = PointCloud::from_rows(6, &rows).unwrap();
        let m = merge_dedup(&c, 0.05);
        assert!(semi_distance(&c, &m).unwrap() <= 0.05);
    }

    #[test]
    fn indexed_equals_brute_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for dim in 1..=3usize {
            for n in [3usize, 40, 200] {
                let mk = |rng: &mut ChaCha8Rng| {
                    let rows: Vec<Vec<f64>> = (0..n)
                        .map(|_| (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect())
                        .collect();
                    PointCloud::from_rows(dim, &rows).unwrap()
                };
                let a = mk(&mut rng);
                let c = mk(&mut rng);
                let brute = semi_distance_brute(&a, &c).unwrap();
                let fast = semi_distance_indexed(&a, &c).unwrap();
                assert_eq!(brute.to_bits(), fast.to_bits());
            }
        }
    }

    #[test]
    fn monotone_in_target_cloud() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..80)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let a = PointCloud::from_rows(2, &rows[..40].to_vec()).unwrap();
        let small = PointCloud::from_rows(2, &rows[40..60].to_vec()).unwrap();
        let big = PointCloud::from_rows(2, &rows[40..].to_vec()).unwrap();
        // small's points are a subset of big's, so the inf can only shrink.
        assert!(semi_distance(&a, &big).unwrap() <= semi_distance(&a, &small).unwrap());
    }
}
