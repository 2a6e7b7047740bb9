//! Seeded geometry samplers shared by the property suites. Each suite
//! compiles this file separately and uses a subset of it.
#![allow(dead_code)]

use bbl_core::geom::{v, Vec2};
use bbl_core::polygon::ConvexPolygon;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Hull of `budget` points in a stretched box, deterministic per seed.
/// Retries until the hull is nondegenerate, which a continuous draw
/// makes immediate in practice.
pub fn sample_polygon(seed: u64, budget: usize, stretch: f64) -> ConvexPolygon {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let pts: Vec<Vec2> = (0..budget)
            .map(|_| {
                v(
                    rng.random_range(-1.0..1.0) * stretch,
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        if let Ok(k) = ConvexPolygon::from_points(&pts) {
            return k;
        }
    }
}

pub fn sample_pair(seed: u64) -> (ConvexPolygon, ConvexPolygon) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b0 = rng.random_range(4..12);
    let b1 = rng.random_range(4..12);
    let s0 = rng.random_range(1.0..2.5);
    let s1 = rng.random_range(1.0..2.5);
    (
        sample_polygon(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15), b0, s0),
        sample_polygon(seed.wrapping_mul(0xD1B5_4A32_D192_ED03), b1, s1),
    )
}

