//! Property tests for the metric structure and the process laws.

use basin_core::geometry::{
    hausdorff, merge_dedup, semi_distance, semi_distance_brute, semi_distance_indexed, PointCloud,
};
use basin_core::process::{evolve, ParameterPoint, ProcessDef};
use basin_core::systems::linear::LinearField;
use proptest::prelude::*;

fn cloud_strategy(dim: usize, max_len: usize) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec(
        prop::collection::vec(-100.0f64..100.0, dim..=dim),
        1..=max_len,
    )
    .prop_map(move |rows| PointCloud::from_rows(dim, &rows).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semi_distance_zero_iff_subset(a in cloud_strategy(2, 30), c in cloud_strategy(2, 30)) {
        let rho = semi_distance(&a, &c).unwrap();
        let subset = a.iter().all(|p| c.iter().any(|q| p == q));
        prop_assert_eq!(rho == 0.0, subset);
    }

    #[test]
    fn monotone_in_target(a in cloud_strategy(2, 30), c in cloud_strategy(2, 30), extra in cloud_strategy(2, 10)) {
        // c' = c union extra contains c, so the inf over it can only shrink.
        let mut rows: Vec<Vec<f64>> = c.iter().map(|p| p.to_vec()).collect();
        rows.extend(extra.iter().map(|p| p.to_vec()));
        let bigger = PointCloud::from_rows(2, &rows).unwrap();
        prop_assert!(semi_distance(&a, &bigger).unwrap() <= semi_distance(&a, &c).unwrap());
    }

    #[test]
    fn hausdorff_is_a_metric(a in cloud_strategy(3, 20), b in cloud_strategy(3, 20), c in cloud_strategy(3, 20)) {
        let dab = hausdorff(&a, &b).unwrap().symmetric;
        let dba = hausdorff(&b, &a).unwrap().symmetric;
        prop_assert_eq!(dab, dba);
        // Identity of indiscernibles on deduplicated clouds.
        prop_assert_eq!(dab == 0.0, a == b);
        // Triangle inequality, with an epsilon for the square-root roundoff.
        let dac = hausdorff(&a, &c).unwrap().symmetric;
        let dcb = hausdorff(&c, &b).unwrap().symmetric;
        prop_assert!(dab <= dac + dcb + 1e-9 * (1.0 + dab));
    }

    #[test]
    fn symmetric_is_max_of_directed(a in cloud_strategy(1, 25), c in cloud_strategy(1, 25)) {
        let pair = hausdorff(&a, &c).unwrap();
        prop_assert_eq!(pair.forward, semi_distance(&a, &c).unwrap());
        prop_assert_eq!(pair.backward, semi_distance(&c, &a).unwrap());
        prop_assert_eq!(pair.symmetric, pair.forward.max(pair.backward));
    }

    #[test]
    fn indexed_equals_brute(a in cloud_strategy(3, 60), c in cloud_strategy(3, 60)) {
        let x = semi_distance_brute(&a, &c).unwrap();
        let y = semi_distance_indexed(&a, &c).unwrap();
        prop_assert_eq!(x.to_bits(), y.to_bits());
    }

    #[test]
    fn merge_stays_within_radius(a in cloud_strategy(2, 80), radius in 0.0f64..10.0) {
        let m = merge_dedup(&a, radius);
        prop_assert!(m.len() >= 1 && m.len() <= a.len());
        prop_assert!(semi_distance(&a, &m).unwrap() <= radius);
        prop_assert_eq!(m.resolution(), radius);
    }

    #[test]
    fn identity_law(x0 in -50.0f64..50.0, s in -10.0f64..10.0) {
        let proc = ProcessDef::new(LinearField::sin_forced());
        let lam = ParameterPoint::scalar("lambda", 1.0);
        let y = evolve(&proc, &lam, s, s, &[x0]).unwrap();
        prop_assert_eq!(y[0].to_bits(), x0.to_bits());
    }

    #[test]
    fn continuity_in_initial_state(x0 in -3.0f64..3.0, delta in 1e-8f64..1e-4, span in 0.1f64..5.0) {
        // Contraction: perturbations shrink, so L = 1 works as the fitted
        // constant for this family.
        let proc = ProcessDef::new(LinearField::sin_forced());
        let lam = ParameterPoint::scalar("lambda", 1.0);
        let y0 = evolve(&proc, &lam, 0.0, span, &[x0]).unwrap();
        let y1 = evolve(&proc, &lam, 0.0, span, &[x0 + delta]).unwrap();
        prop_assert!((y1[0] - y0[0]).abs() <= 1.0 * delta * (1.0 + 1e-6) + 1e-12);
    }
}

/// Empirically fitted state-continuity constant for the Lorenz family over
/// short windows: the observed ratio must stabilize as the perturbation
/// shrinks (no blow-up of the local Lipschitz estimate).
#[test]
fn lorenz_state_continuity_has_stable_ratio() {
    use basin_core::systems::lorenz::{lambda_auto, LorenzAuto, LorenzParams};
    let proc = ProcessDef::new(LorenzAuto);
    let lam = lambda_auto(&LorenzParams::standard());
    let x0 = [1.0, 2.0, 3.0];
    let span = 0.5;
    let base = evolve(&proc, &lam, 0.0, span, &x0).unwrap();
    let mut ratios = Vec::new();
    for delta in [1e-5, 1e-6, 1e-7] {
        let mut x = x0;
        x[0] += delta;
        let y = evolve(&proc, &lam, 0.0, span, &x).unwrap();
        let diff: f64 = y
            .iter()
            .zip(base.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        ratios.push(diff / delta);
    }
    for w in ratios.windows(2) {
        assert!((w[0] / w[1] - 1.0).abs() < 0.05, "ratios {ratios:?}");
    }
    // The fitted constant is moderate over this window.
    assert!(ratios[0] < 100.0, "L = {}", ratios[0]);
}

/// The dispatching front door agrees with both strategies.
#[test]
fn dispatch_matches_both_paths() {
    let rows_a: Vec<Vec<f64>> = (0..500)
        .map(|i| vec![(i as f64 * 0.37).sin() * 50.0, (i as f64 * 0.11).cos() * 50.0])
        .collect();
    let rows_c: Vec<Vec<f64>> = (0..400)
        .map(|i| vec![(i as f64 * 0.23).cos() * 50.0, (i as f64 * 0.41).sin() * 50.0])
        .collect();
    let a = PointCloud::from_rows(2, &rows_a).unwrap();
    let c = PointCloud::from_rows(2, &rows_c).unwrap();
    let auto = semi_distance(&a, &c).unwrap();
    assert_eq!(auto.to_bits(), semi_distance_brute(&a, &c).unwrap().to_bits());
    assert_eq!(
        auto.to_bits(),
        semi_distance_indexed(&a, &c).unwrap().to_bits()
    );
}
