//! Property suite for the distance and asymmetry functionals.

mod common;

use bbl_core::distance::{h0, hausdorff, rel_asymmetry, sym_diff_area, NormalizedPair};
use bbl_core::geom::{v, Vec2};
use bbl_core::polygon::{intersect, ConvexPolygon};
use common::{sample_pair, sample_polygon};

#[test]
fn hausdorff_metric_axioms() {
    for seed in 0..50u64 {
        let (a, b) = sample_pair(9000 + seed);
        let c = sample_polygon(9500 + seed, 8, 1.5);
        assert_eq!(hausdorff(&a, &a), 0.0);
        assert_eq!(hausdorff(&a, &b), hausdorff(&b, &a));
        assert!(hausdorff(&a, &b) >= 0.0);
        assert!(
            hausdorff(&a, &c) <= hausdorff(&a, &b) + hausdorff(&b, &c) + 1e-9,
            "seed {seed}"
        );
    }
}

#[test]
fn h0_equals_hausdorff_of_the_constructed_homotheties() {
    for seed in 0..50u64 {
        let (k0, k1) = sample_pair(11_000 + seed);
        let pair = NormalizedPair::new(&k0, &k1);
        let m0 = k0
            .transform(pair.scale0, Vec2::ZERO)
            .unwrap()
            .translate(pair.shift0);
        let m1 = k1
            .transform(pair.scale1, Vec2::ZERO)
            .unwrap()
            .translate(pair.shift1);
        let direct = hausdorff(&m0, &m1);
        assert!(
            (h0(&k0, &k1) - direct).abs() <= 1e-12 * (1.0 + direct),
            "seed {seed}"
        );
    }
}

#[test]
fn asymmetry_stays_in_range() {
    for seed in 0..30u64 {
        let (k0, k1) = sample_pair(13_000 + seed);
        let a = rel_asymmetry(&k0, &k1).a;
        assert!((0.0..=2.0).contains(&a), "seed {seed}: A = {a}");
    }
}

/// The translation objective after volume matching, for the oracle.
fn objective(k: &ConvexPolygon, l_scaled: &ConvexPolygon, shift: Vec2) -> f64 {
    sym_diff_area(k, &l_scaled.translate(shift)) / k.area()
}

#[test]
fn descent_matches_fine_grid_oracle() {
    for seed in 0..20u64 {
        let (k, l) = sample_pair(15_000 + seed);
        let found = rel_asymmetry(&k, &l);
        let scale = (k.area() / l.area()).sqrt();
        let l_scaled = l.transform(scale, Vec2::ZERO).unwrap();

        // Coarse global sweep, then a fine window around its best cell;
        // the objective is unimodal (the overlap is log-concave in the
        // shift), so this brackets the true minimum from above.
        let center = k.centroid() - l_scaled.centroid();
        let span = k.diameter();
        let mut best = f64::INFINITY;
        let mut best_shift = center;
        for i in 0..41 {
            for j in 0..41 {
                let s = center
                    + v(
                        (i as f64 / 40.0 - 0.5) * 2.0 * span,
                        (j as f64 / 40.0 - 0.5) * 2.0 * span,
                    );
                let f = objective(&k, &l_scaled, s);
                if f < best {
                    best = f;
                    best_shift = s;
                }
            }
        }
        let fine_step = span / 800.0;
        let coarse_cell = span / 10.0;
        let mut oracle = best;
        let steps = (2.0 * coarse_cell / fine_step).ceil() as i32;
        for i in -steps..=steps {
            for j in -steps..=steps {
                let s = best_shift + v(f64::from(i) * fine_step, f64::from(j) * fine_step);
                oracle = oracle.min(objective(&k, &l_scaled, s));
            }
        }
        assert!(
            found.a <= oracle + 1e-6,
            "seed {seed}: descent {} vs grid oracle {oracle}",
            found.a
        );
    }
}

#[test]
fn overlap_is_positive_at_the_reported_optimum() {
    for seed in 0..20u64 {
        let (k, l) = sample_pair(17_000 + seed);
        let found = rel_asymmetry(&k, &l);
        let scale = (k.area() / l.area()).sqrt();
        let moved = l
            .transform(scale, Vec2::ZERO)
            .unwrap()
            .translate(found.argmin_shift);
        assert!(intersect(&k, &moved).is_some(), "seed {seed}");
    }
}
