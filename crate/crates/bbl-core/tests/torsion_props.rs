//! Property suite for the FEM torsion solver and its checks.

mod common;

use bbl_core::geom::Vec2;
use bbl_core::torsion::{solve_poisson, tau, verify_bm_tau};
use common::{sample_pair, sample_polygon};

#[test]
fn domain_monotonicity_on_nested_pairs() {
    for seed in 0..5u64 {
        let k = sample_polygon(91_000 + seed, 8, 1.8);
        let c = k.centroid();
        // Dilation about the centroid keeps K strictly inside L.
        let l = k.transform(1.3, c - c * 1.3).unwrap();
        let tk = tau(&k, 0.06).unwrap();
        let tl = tau(&l, 0.06).unwrap();
        assert!(
            tk.richardson <= tl.richardson + 3.0 * tk.err_est.max(tl.err_est),
            "seed {seed}: τ(K) {} vs τ(L) {}",
            tk.richardson,
            tl.richardson
        );
    }
}

#[test]
fn scaling_law_on_random_polygons() {
    for seed in 0..3u64 {
        let k = sample_polygon(93_000 + seed, 9, 1.5);
        let doubled = k.transform(2.0, Vec2::ZERO).unwrap();
        let base = tau(&k, 0.05).unwrap();
        let scaled = tau(&doubled, 0.1).unwrap();
        let ratio = scaled.richardson / base.richardson;
        assert!(
            (ratio - 16.0).abs() <= 0.16,
            "seed {seed}: τ(2K)/τ(K) = {ratio}"
        );
    }
}

#[test]
fn maximum_principle_on_random_polygons() {
    for seed in 0..3u64 {
        let k = sample_polygon(95_000 + seed, 8, 2.0);
        let field = solve_poisson(&k, &|_| 2.0, 0.06).unwrap();
        let boundary: std::collections::HashSet<usize> =
            field.mesh.boundary_nodes.iter().copied().collect();
        for (i, &val) in field.values.iter().enumerate() {
            if boundary.contains(&i) {
                assert_eq!(val, 0.0, "seed {seed} node {i}");
            } else {
                assert!(val > 0.0, "seed {seed} node {i}: {val}");
            }
        }
    }
}

#[test]
fn bm_tau_plain_flag_on_twenty_pairs() {
    for seed in 0..20u64 {
        let (k0, k1) = sample_pair(97_000 + seed);
        let report = verify_bm_tau(&k0, &k1, 0.5, 0.08).unwrap();
        assert!(
            report.plain.flag.ok(),
            "seed {seed}: margin {} slack {}",
            report.plain.margin,
            report.fem_slack
        );
    }
}
