//! Property suite for power-concave functions and the supremal
//! convolution.

mod common;

use bbl_core::geom::{v, Vec2};
use bbl_core::means::{p_mean, MeanOrder};
use bbl_core::pconcave::{conv_eval, verify_bbl, AffinePiece, PConcaveFn};
use bbl_core::polygon::{minkowski_comb, ConvexPolygon};
use common::sample_polygon;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random truncated cap: min of a few affine pieces, positive at the
/// centroid, over a random polygon.
fn random_cap(seed: u64, p: f64) -> PConcaveFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = sample_polygon(seed ^ 0xabcd, rng.random_range(4..10), rng.random_range(1.0..2.0));
    let c = domain.centroid();
    let pieces: Vec<AffinePiece> = (0..rng.random_range(1..4))
        .map(|_| {
            let a = v(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let target = rng.random_range(0.5..2.0);
            AffinePiece {
                a,
                b: target - a.dot(c),
            }
        })
        .collect();
    PConcaveFn::make(domain, p, pieces).unwrap()
}

fn grid_points(k: &ConvexPolygon, per_side: usize) -> Vec<Vec2> {
    let (lo, hi) = k.bbox();
    let c = k.centroid();
    let mut out = Vec::new();
    for i in 0..per_side {
        for j in 0..per_side {
            let p = v(
                lo.x + (hi.x - lo.x) * i as f64 / (per_side - 1) as f64,
                lo.y + (hi.y - lo.y) * j as f64 / (per_side - 1) as f64,
            );
            // Nudge toward the centroid so boundary roundoff cannot
            // push a sample outside.
            let p = c + (p - c) * 0.999;
            if k.contains(p) {
                out.push(p);
            }
        }
    }
    out
}

#[test]
fn level_set_inclusion_under_convolution() {
    for (pi, &p) in [0.5, 1.0, 2.0].iter().enumerate() {
        for seed in 0..3u64 {
            let u0 = random_cap(21_000 + 10 * seed + pi as u64, p);
            let u1 = random_cap(22_000 + 10 * seed + pi as u64, p);
            let lambda = 0.4;
            let t0 = 0.55 * u0.sup_norm().unwrap();
            let t1 = 0.35 * u1.sup_norm().unwrap();
            let l0 = u0.level_set(t0).unwrap();
            let l1 = u1.level_set(t1).unwrap();
            let comb = minkowski_comb(&l0, &l1, lambda).unwrap();
            let tmix = p_mean(t0, t1, lambda, MeanOrder::Finite(p)).unwrap();
            for x in grid_points(&comb, 7) {
                let val = conv_eval(&u0, &u1, p, lambda, x).unwrap();
                assert!(
                    val >= tmix - 1e-7 * (1.0 + tmix),
                    "p {p} seed {seed} at {x:?}: {val} < {tmix}"
                );
            }
        }
    }
}

#[test]
fn distribution_in_power_scale_is_midpoint_concave() {
    for &p in &[0.5, 1.0, 2.0] {
        for seed in 0..4u64 {
            let u = random_cap(31_000 + seed, p);
            let area = u.domain().area();
            let sup = u.sup_norm().unwrap();
            // Strictly positive grid: at t = 0 the superlevel set jumps
            // to the whole domain when the cap truncates, and the
            // concavity statement lives on the positive range.
            let top = (0.999 * sup).powf(p);
            let phi: Vec<f64> = (1..=64)
                .map(|k| {
                    let t = top * k as f64 / 64.0;
                    u.distribution(t.powf(1.0 / p)).sqrt()
                })
                .collect();
            for k in 1..63 {
                assert!(
                    phi[k] >= 0.5 * (phi[k - 1] + phi[k + 1]) - 1e-8 * area,
                    "p {p} seed {seed} grid {k}"
                );
            }
        }
    }
}

#[test]
fn convolution_monotone_in_exponent_on_constants() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x70c0);
    for seed in 0..5u64 {
        let k0 = sample_polygon(41_000 + seed, 7, 1.5);
        let k1 = sample_polygon(42_000 + seed, 7, 1.5);
        let c0: f64 = rng.random_range(0.5..2.0);
        let c1: f64 = rng.random_range(0.5..2.0);
        let lambda = 0.5;
        // The same constant functions are exactly representable at
        // every exponent: pieces b = c^p.
        let at = |p: f64| {
            (
                PConcaveFn::make(
                    k0.clone(),
                    p,
                    vec![AffinePiece {
                        a: Vec2::ZERO,
                        b: c0.powf(p),
                    }],
                )
                .unwrap(),
                PConcaveFn::make(
                    k1.clone(),
                    p,
                    vec![AffinePiece {
                        a: Vec2::ZERO,
                        b: c1.powf(p),
                    }],
                )
                .unwrap(),
            )
        };
        let comb = minkowski_comb(&k0, &k1, lambda).unwrap();
        let orders = [0.5, 1.0, 2.0];
        for w in orders.windows(2) {
            let (lo0, lo1) = at(w[0]);
            let (hi0, hi1) = at(w[1]);
            for x in grid_points(&comb, 6) {
                let lo = conv_eval(&lo0, &lo1, w[0], lambda, x).unwrap();
                let hi = conv_eval(&hi0, &hi1, w[1], lambda, x).unwrap();
                assert!(lo <= hi + 1e-9, "seed {seed} x {x:?}: {lo} > {hi}");
            }
        }
    }
}

#[test]
fn convolution_respects_exponent_rescaling_on_pyramids() {
    // With identical pieces read at exponent k instead of 1, the
    // function is u^(1/k) and the convolution obeys
    // conv_k(u0^(1/k), u1^(1/k)) = conv_1(u0, u1)^(1/k) exactly.
    for seed in 0..4u64 {
        let base0 = random_cap(51_000 + seed, 1.0);
        let base1 = random_cap(52_000 + seed, 1.0);
        let k = 2.0;
        let re0 =
            PConcaveFn::make(base0.domain().clone(), k, base0.pieces().to_vec()).unwrap();
        let re1 =
            PConcaveFn::make(base1.domain().clone(), k, base1.pieces().to_vec()).unwrap();
        let lambda = 0.3;
        let comb = minkowski_comb(base0.domain(), base1.domain(), lambda).unwrap();
        for x in grid_points(&comb, 6) {
            let plain = conv_eval(&base0, &base1, 1.0, lambda, x).unwrap();
            let scaled = conv_eval(&re0, &re1, k, lambda, x).unwrap();
            assert!(
                (scaled - plain.powf(1.0 / k)).abs() <= 1e-8 * (1.0 + plain),
                "seed {seed} x {x:?}"
            );
        }
    }
}

/// Solves a 3x3 linear system by Gaussian elimination with partial
/// pivoting; `None` when the matrix is near singular.
fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let mut a = [[0.0f64; 4]; 3];
    for r in 0..3 {
        a[r][..3].copy_from_slice(&m[r]);
        a[r][3] = rhs[r];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for k in col..4 {
                    a[r][k] -= f * a[col][k];
                }
            }
        }
    }
    Some([a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]])
}

/// Argmax of the unexponentiated cap: brute-force vertex enumeration
/// of `max t` over `t <= a_i.x + b_i`, `x` in the domain.
fn cap_argmax(u: &PConcaveFn) -> Vec2 {
    let mut rows: Vec<([f64; 3], f64)> = u
        .pieces()
        .iter()
        .map(|pc| ([-pc.a.x, -pc.a.y, 1.0], pc.b))
        .collect();
    for (n, c) in u.domain().halfplanes() {
        rows.push(([n.x, n.y, 0.0], c));
    }
    let mut best: Option<(f64, Vec2)> = None;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            for k in j + 1..rows.len() {
                let m = [rows[i].0, rows[j].0, rows[k].0];
                let rhs = [rows[i].1, rows[j].1, rows[k].1];
                let Some(sol) = solve3(m, rhs) else { continue };
                let feasible = rows.iter().all(|(r, c)| {
                    r[0] * sol[0] + r[1] * sol[1] + r[2] * sol[2] <= c + 1e-7 * (1.0 + c.abs())
                });
                if feasible && best.is_none_or(|(t, _)| sol[2] > t) {
                    best = Some((sol[2], v(sol[0], sol[1])));
                }
            }
        }
    }
    best.expect("cap has a feasible maximum").1
}

#[test]
fn convolution_sup_is_the_mean_of_sups() {
    for &p in &[1.0, 2.0] {
        for seed in 0..2u64 {
            let u0 = random_cap(61_000 + seed, p);
            let u1 = random_cap(62_000 + seed, p);
            let lambda = 0.5;
            let expected = p_mean(
                u0.sup_norm().unwrap(),
                u1.sup_norm().unwrap(),
                lambda,
                MeanOrder::Finite(p),
            )
            .unwrap();
            // The supremum is attained at the mix of the two argmax
            // points, so no search is needed: evaluate right there.
            let x = cap_argmax(&u0) * (1.0 - lambda) + cap_argmax(&u1) * lambda;
            let got = conv_eval(&u0, &u1, p, lambda, x).unwrap();
            assert!(
                (got - expected).abs() <= 1e-6 * expected.max(1.0),
                "p {p} seed {seed}: sup {got} vs mean {expected}"
            );
            // No point of the combination may exceed the mean of sups.
            let comb = minkowski_comb(u0.domain(), u1.domain(), lambda).unwrap();
            for x in grid_points(&comb, 9) {
                let val = conv_eval(&u0, &u1, p, lambda, x).unwrap();
                assert!(
                    val <= expected + 1e-7 * (1.0 + expected),
                    "p {p} seed {seed} at {x:?}: {val} > {expected}"
                );
            }
        }
    }
}

#[test]
fn layer_cake_parametrization_reintegrates() {
    let pyramid = {
        let domain = ConvexPolygon::from_points(&[
            v(-1.0, -1.0),
            v(1.0, -1.0),
            v(1.0, 1.0),
            v(-1.0, 1.0),
        ])
        .unwrap();
        let pieces = vec![
            AffinePiece { a: v(1.0, 0.0), b: 1.0 },
            AffinePiece { a: v(-1.0, 0.0), b: 1.0 },
            AffinePiece { a: v(0.0, 1.0), b: 1.0 },
            AffinePiece { a: v(0.0, -1.0), b: 1.0 },
        ];
        PConcaveFn::make(domain, 1.0, pieces).unwrap()
    };
    for (name, u) in [("pyramid", pyramid), ("random cap", random_cap(71_007, 1.0))] {
        let integral = u.integral(1e-8).unwrap();
        // The parametrization is non-Lipschitz where μ vanishes (the
        // last panel spans (1/m)^(1/3) of the range), so the panel
        // count has to be large; the cached cake keeps that cheap.
        let cake = u.layer_cake(4096).unwrap();
        let m = 20_000;
        let s: Vec<f64> = (0..=m)
            .map(|i| cake.equal_area_param(i as f64 / m as f64))
            .collect();
        let mut quad = 0.0;
        for i in 0..m {
            quad += u.distribution(0.5 * (s[i] + s[i + 1])) * (s[i + 1] - s[i]);
        }
        assert!(
            (quad - integral).abs() <= 1e-4 * integral,
            "{name}: {quad} vs {integral}"
        );
    }
}

#[test]
fn bbl_deficit_is_nonnegative_on_random_instances() {
    for &p in &[0.5, 1.0, 2.0] {
        for seed in 0..2u64 {
            let u0 = random_cap(81_000 + seed, p);
            let u1 = random_cap(82_000 + seed, p);
            let report = verify_bbl(&u0, &u1, p, 0.5, 1e-6).unwrap();
            assert!(
                report.epsilon >= -1e-5,
                "p {p} seed {seed}: ε = {}",
                report.epsilon
            );
            assert!(report.checks.base.flag.ok(), "p {p} seed {seed}");
        }
    }
}
