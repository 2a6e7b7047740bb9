//! Hausdorff distance, its homothety-normalized variant H₀, symmetric
//! difference, and the relative asymmetry A (translation infimum, plus
//! the rotation-maximized variant).

use crate::error::{Error, Result};
use crate::geom::{segment_dist, v, Vec2};
use crate::polygon::{intersect, ConvexPolygon};

/// Seed for the simplex-descent restarts; fixed so every run of the
/// minimizer is reproducible.

/// Distance from a point to a convex polygon (0 inside).
fn point_to_polygon(p: Vec2, k: &ConvexPolygon) -> f64 {
    if k.contains(p) {
        return 0.0;
    }
    let verts = k.vertices();
    let n = verts.len();
    (0..n)
        .map(|i| segment_dist(p, verts[i], verts[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Hausdorff distance: max of the two directed distances, each the
/// farthest source vertex from the other body. Exact for convex
/// polygons since point-to-set distance is convex.
pub fn hausdorff(k: &ConvexPolygon, l: &ConvexPolygon) -> f64 {
    let directed = |from: &ConvexPolygon, to: &ConvexPolygon| {
        from.vertices()
            .iter()
            .map(|&p| point_to_polygon(p, to))
            .fold(0.0f64, f64::max)
    };
    directed(k, l).max(directed(l, k))
}

/// Homotheties of a pair to unit area with coinciding centroids.
#[derive(Debug, Clone)]
pub struct NormalizedPair {
    pub k0n: ConvexPolygon,
    pub k1n: ConvexPolygon,
    pub scale0: f64,
    pub scale1: f64,
    pub shift0: Vec2,
    pub shift1: Vec2,
}

impl NormalizedPair {
    pub fn new(k0: &ConvexPolygon, k1: &ConvexPolygon) -> NormalizedPair {
        let normalize = |k: &ConvexPolygon| {
            let scale = 1.0 / k.area().sqrt();
            let scaled = k.transform(scale, Vec2::ZERO).expect("positive scale");
            // Recompute the centroid after scaling rather than mapping
            // it analytically; keeps the coincidence check honest.
            let shift = -scaled.centroid();
            (scaled.translate(shift), scale, shift)
        };
        let (k0n, scale0, shift0) = normalize(k0);
        let (k1n, scale1, shift1) = normalize(k1);
        debug_assert!((k0n.area() - 1.0).abs() <= 1e-10);
        debug_assert!((k1n.area() - 1.0).abs() <= 1e-10);
        debug_assert!(k0n.centroid().dist(k1n.centroid()) <= 1e-10);
        NormalizedPair {
            k0n,
            k1n,
            scale0,
            scale1,
            shift0,
            shift1,
        }
    }
}

/// H₀(K, L): Hausdorff distance after scaling both bodies to unit area
/// and translating centroids to the origin.
pub fn h0(k: &ConvexPolygon, l: &ConvexPolygon) -> f64 {
    let pair = NormalizedPair::new(k, l);
    hausdorff(&pair.k0n, &pair.k1n)
}

/// |K △ L| = |K| + |L| − 2|K ∩ L|.
pub fn sym_diff_area(k: &ConvexPolygon, l: &ConvexPolygon) -> f64 {
    let cap = intersect(k, l).map_or(0.0, |c| c.area());
    k.area() + l.area() - 2.0 * cap
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymmetry {
    pub a: f64,
    pub argmin_shift: Vec2,
}

/// Relative asymmetry A(K, L): L is scaled by (|K|/|L|)^(1/2), then
/// |K △ (x+L)|/|K| is minimized over translations x. The map
/// x ↦ |K ∩ (x+L)|^(1/2) is concave (Brunn-Minkowski applied to the
/// intersections), so the objective is quasi-convex and a local
/// minimum is the global one: a descent from centroid alignment plus
/// one tighter polish from its endpoint suffice.
pub fn rel_asymmetry(k: &ConvexPolygon, l: &ConvexPolygon) -> Asymmetry {
    let s = (k.area() / l.area()).sqrt();
    let scaled = l.transform(s, Vec2::ZERO).expect("positive scale");
    let inv_area = 1.0 / k.area();
    let objective = |x: Vec2| sym_diff_area(k, &scaled.translate(x)) * inv_area;

    let start = k.centroid() - scaled.centroid();
    let step = 0.05 * k.diameter();
    let (mut best_x, mut best_f) = nelder_mead(&objective, start, step);
    let (x, f) = nelder_mead(&objective, best_x, 0.02 * step);
    if f.is_finite() && f < best_f {
        best_f = f;
        best_x = x;
    }
    Asymmetry {
        a: best_f,
        argmin_shift: best_x,
    }
}

/// Max over `angle_count` uniformly spaced rotation angles in [0, π)
/// (about the centroid) of A(K, ρK). At least 8 angles required.
pub fn rel_asymmetry_rotmax(k: &ConvexPolygon, angle_count: usize) -> Result<f64> {
    if angle_count < 8 {
        return Err(Error::TooFewAngles(angle_count));
    }
    let center = k.centroid();
    let mut best = 0.0f64;
    for i in 0..angle_count {
        let theta = i as f64 * std::f64::consts::PI / angle_count as f64;
        let rotated = k.rotate_about(theta, center);
        best = best.max(rel_asymmetry(k, &rotated).a);
    }
    Ok(best)
}

/// Derivative-free simplex descent in the plane (Nelder–Mead with the
/// standard reflection/expansion/contraction/shrink coefficients).
fn nelder_mead(f: &dyn Fn(Vec2) -> f64, start: Vec2, step: f64) -> (Vec2, f64) {
    let mut simplex = [
        start,
        start + v(step, 0.0),
        start + v(0.0, step),
    ]
    .map(|x| (x, f(x)));

    for _ in 0..200 {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let [(best, fb), (good, fg), (worst, fw)] = simplex;
        let size = best.dist(good).max(best.dist(worst));
        if size <= 1e-10 * step.max(1e-30) || (fw - fb).abs() <= 1e-14 * fb.abs().max(1e-12) {
            break;
        }
        let mid = (best + good) * 0.5;
        let refl = mid + (mid - worst);
        let fr = f(refl);
        if fr < fb {
            let exp = mid + (mid - worst) * 2.0;
            let fe = f(exp);
            simplex[2] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < fg {
            simplex[2] = (refl, fr);
        } else {
            let contr = mid + (worst - mid) * 0.5;
            let fc = f(contr);
            if fc < fw {
                simplex[2] = (contr, fc);
            } else {
                // Shrink toward the best vertex.
                simplex[1] = ((best + good) * 0.5, f((best + good) * 0.5));
                simplex[2] = ((best + worst) * 0.5, f((best + worst) * 0.5));
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    simplex[0]
}
