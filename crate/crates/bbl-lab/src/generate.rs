//! Seeded instance generation. Every draw is a pure function of the
//! seed, so suites regenerate bit-for-bit.

use crate::error::Result;
use crate::scenario::{
    BetaExpLit, FunctionLit, Kind, PieceLit, PolygonLit, Scenario, SuiteFile, SCHEMA_VERSION,
};
use bbl_core::geom::{v, Vec2};
use bbl_core::pconcave::PConcaveFn;
use bbl_core::polygon::ConvexPolygon;
use bbl_core::torsion::BetaExp;
use bbl_core::Error as CoreError;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MAX_RETRIES: usize = 16;

/// Seed spacing for derived draws; consecutive indices land far apart
/// in the seed space.
pub const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn spaced_seed(base: u64, index: u64) -> u64 {
    base.wrapping_add(index.wrapping_mul(SEED_STRIDE))
}

fn draw_points(rng: &mut ChaCha8Rng, budget: usize, elongation: f64) -> Vec<Vec2> {
    (0..budget)
        .map(|_| loop {
            let x = rng.random_range(-1.0..1.0);
            let y = rng.random_range(-1.0..1.0);
            if x * x + y * y <= 1.0 {
                break v(x * elongation, y);
            }
        })
        .collect()
}

/// Hull of `vertex_budget` uniform points in the ellipse with axis
/// ratio 1:elongation; deterministic per seed. Degenerate draws are
/// retried up to 16 times. Also returns the accepted point cloud so
/// callers can audit the hull.
pub fn random_polygon_with_points(
    seed: u64,
    vertex_budget: usize,
    elongation: f64,
) -> Result<(Vec<Vec2>, ConvexPolygon)> {
    if vertex_budget < 4 {
        return Err(CoreError::TooFewPoints {
            need: 4,
            got: vertex_budget,
        }
        .into());
    }
    if !(elongation.is_finite() && elongation >= 1.0) {
        return Err(CoreError::Invariant(format!(
            "elongation must be >= 1, got {elongation}"
        ))
        .into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RETRIES {
        let points = draw_points(&mut rng, vertex_budget, elongation);
        if let Ok(k) = ConvexPolygon::from_points(&points) {
            return Ok((points, k));
        }
    }
    Err(CoreError::DegenerateDraw(MAX_RETRIES).into())
}

pub fn random_polygon(seed: u64, vertex_budget: usize, elongation: f64) -> Result<ConvexPolygon> {
    random_polygon_with_points(seed, vertex_budget, elongation).map(|(_, k)| k)
}

pub fn polygon_to_lit(k: &ConvexPolygon) -> PolygonLit {
    k.vertices().iter().map(|p| [p.x, p.y]).collect()
}

/// Random body rescaled to diameter 2 and centered at the origin, the
/// standard size for the mesh-based scenarios.
pub fn random_body_for_mesh(seed: u64) -> Result<ConvexPolygon> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d65_7368);
    let budget = rng.random_range(5..10);
    let elongation = rng.random_range(1.0..1.6);
    let k = random_polygon(seed, budget, elongation)?;
    let k = k.transform(2.0 / k.diameter(), Vec2::ZERO)?;
    Ok(k.translate(-k.centroid()))
}

/// Random cap literal calibrated for quadrature-bound runs: domain
/// within radius 0.8 of the origin and slopes at most 0.4, so the
/// adaptive splitter converges in about a second at tolerance 1e-6.
pub fn random_cap_lit(seed: u64, p: f64) -> Result<FunctionLit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6361_70);
    let budget = rng.random_range(4..10);
    let elongation = rng.random_range(1.0..1.4);
    let k = random_polygon(seed, budget, elongation)?;
    let k = k.translate(-k.centroid());
    let r = k
        .vertices()
        .iter()
        .map(|p| p.norm())
        .fold(0.0f64, f64::max);
    let k = k.transform(0.8 / r, Vec2::ZERO)?;
    let pieces: Vec<PieceLit> = (0..rng.random_range(1..4))
        .map(|_| {
            let a1 = rng.random_range(-0.4..0.4);
            let a2 = rng.random_range(-0.4..0.4);
            let b = rng.random_range(0.6..1.4);
            [a1, a2, b]
        })
        .collect();
    Ok(FunctionLit {
        domain: polygon_to_lit(&k),
        p,
        pieces,
    })
}

pub fn random_cap(seed: u64, p: f64) -> Result<PConcaveFn> {
    crate::scenario::function_from_lit(&random_cap_lit(seed, p)?).map_err(Into::into)
}

/// Pyramid-style forcing term of apex value 1 around the origin; with
/// slope 0.2 it stays positive on bodies within radius 5.
fn cone_pieces(slope: f64) -> Vec<PieceLit> {
    vec![
        [-slope, 0.0, 1.0],
        [slope, 0.0, 1.0],
        [0.0, -slope, 1.0],
        [0.0, slope, 1.0],
    ]
}

pub struct SuiteParams {
    pub p: f64,
    pub lambda: f64,
    pub mesh_h: f64,
    pub quad_tol: f64,
    pub angle_count: usize,
}

impl Default for SuiteParams {
    fn default() -> SuiteParams {
        SuiteParams {
            p: 1.0,
            lambda: 0.5,
            mesh_h: 0.08,
            quad_tol: 1e-6,
            angle_count: 120,
        }
    }
}

fn scenario_for(kind: Kind, name: String, seed: u64, params: &SuiteParams) -> Result<Scenario> {
    let mut sc = Scenario {
        name,
        kind,
        bodies: None,
        functions: None,
        f_pieces: None,
        beta_exp: None,
        p: None,
        lambda: None,
        mesh_h: None,
        quad_tol: None,
        seed,
        angle_count: None,
    };
    match kind {
        Kind::Bm => {
            let k0 = random_polygon_with_points(spaced_seed(seed, 1), 8, 1.5)?.1;
            let k1 = random_polygon_with_points(spaced_seed(seed, 2), 6, 2.0)?.1;
            sc.bodies = Some(vec![polygon_to_lit(&k0), polygon_to_lit(&k1)]);
            sc.lambda = Some(params.lambda);
        }
        Kind::Bbl => {
            sc.functions = Some(vec![
                random_cap_lit(spaced_seed(seed, 1), params.p)?,
                random_cap_lit(spaced_seed(seed, 2), params.p)?,
            ]);
            sc.p = Some(params.p);
            sc.lambda = Some(params.lambda);
            sc.quad_tol = Some(params.quad_tol);
        }
        Kind::Stability => {
            // Near-equality pair: the same cap and a small translate of
            // it, for which the convolution reproduces the cap exactly.
            let u0 = random_cap_lit(spaced_seed(seed, 1), params.p)?;
            let mut rng = ChaCha8Rng::seed_from_u64(spaced_seed(seed, 2));
            let shift = v(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
            let domain: PolygonLit = u0
                .domain
                .iter()
                .map(|&[x, y]| [x + shift.x, y + shift.y])
                .collect();
            let pieces: Vec<PieceLit> = u0
                .pieces
                .iter()
                .map(|&[a1, a2, b]| [a1, a2, b - a1 * shift.x - a2 * shift.y])
                .collect();
            let u1 = FunctionLit {
                domain,
                p: params.p,
                pieces,
            };
            sc.functions = Some(vec![u0, u1]);
            sc.p = Some(params.p);
            sc.lambda = Some(params.lambda);
            sc.quad_tol = Some(params.quad_tol);
        }
        Kind::BmTau => {
            let k0 = random_body_for_mesh(spaced_seed(seed, 1))?;
            let k1 = random_body_for_mesh(spaced_seed(seed, 2))?;
            sc.bodies = Some(vec![polygon_to_lit(&k0), polygon_to_lit(&k1)]);
            sc.lambda = Some(params.lambda);
            sc.mesh_h = Some(params.mesh_h);
        }
        Kind::Urysohn => {
            let k = random_body_for_mesh(spaced_seed(seed, 1))?;
            sc.bodies = Some(vec![polygon_to_lit(&k)]);
            sc.mesh_h = Some(params.mesh_h);
            sc.angle_count = Some(params.angle_count);
        }
        Kind::PoissonBbl => {
            let k0 = random_body_for_mesh(spaced_seed(seed, 1))?;
            let k1 = random_body_for_mesh(spaced_seed(seed, 2))?;
            sc.bodies = Some(vec![polygon_to_lit(&k0), polygon_to_lit(&k1)]);
            sc.lambda = Some(params.lambda);
            sc.mesh_h = Some(params.mesh_h);
            let cycle = [
                BetaExp::Finite(1.0),
                BetaExp::Finite(2.0),
                BetaExp::Infinite,
            ];
            let beta = cycle[(seed % 3) as usize];
            sc.beta_exp = Some(BetaExpLit(beta));
            sc.f_pieces = Some(match beta {
                BetaExp::Infinite => vec![[0.0, 0.0, 1.0]],
                BetaExp::Finite(_) => cone_pieces(0.2),
            });
        }
    }
    Ok(sc)
}

/// A suite of `count` seeded scenarios of one kind.
pub fn random_suite(
    kind: Kind,
    count: usize,
    seed: u64,
    params: &SuiteParams,
) -> Result<SuiteFile> {
    let scenarios = (0..count)
        .map(|i| {
            scenario_for(
                kind,
                format!("{kind}-{i:03}"),
                spaced_seed(seed, i as u64),
                params,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteFile {
        schema: SCHEMA_VERSION,
        scenarios,
    })
}

/// The committed default suite: one or two scenarios of every kind,
/// mixing hand-written literals with seeded draws, sized to finish in
/// seconds.
pub fn default_suite() -> SuiteFile {
    let square = |half: f64| -> PolygonLit {
        vec![
            [-half, -half],
            [half, -half],
            [half, half],
            [-half, half],
        ]
    };
    let params = SuiteParams::default();
    let mut scenarios = vec![Scenario {
        name: "bm-squares".to_string(),
        kind: Kind::Bm,
        bodies: Some(vec![square(1.0), square(0.5)]),
        functions: None,
        f_pieces: None,
        beta_exp: None,
        p: None,
        lambda: Some(0.5),
        mesh_h: None,
        quad_tol: None,
        seed: 0,
        angle_count: None,
    }];
    let mut push = |kind: Kind, tag: &str, seed: u64, params: &SuiteParams| {
        let sc = scenario_for(kind, format!("{kind}-{tag}"), seed, params)
            .expect("default suite seeds are known good");
        scenarios.push(sc);
    };
    push(Kind::Bm, "random", 11, &params);
    push(
        Kind::Bbl,
        "p1",
        21,
        &SuiteParams {
            p: 1.0,
            ..SuiteParams::default()
        },
    );
    push(
        Kind::Bbl,
        "p-half",
        22,
        &SuiteParams {
            p: 0.5,
            ..SuiteParams::default()
        },
    );
    push(Kind::Stability, "translate", 31, &params);
    push(Kind::BmTau, "random", 41, &params);
    push(Kind::Urysohn, "random", 51, &params);
    push(Kind::PoissonBbl, "beta-one", 60, &params);
    push(Kind::PoissonBbl, "const-f", 62, &params);
    SuiteFile {
        schema: SCHEMA_VERSION,
        scenarios,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_reproduces_the_polygon() {
        let a = random_polygon(99, 8, 1.5).unwrap();
        let b = random_polygon(99, 8, 1.5).unwrap();
        assert_eq!(a.vertices(), b.vertices());
        assert!(a.area() > 0.0);
    }

    #[test]
    fn vertex_budget_below_four_is_rejected() {
        assert!(random_polygon(1, 3, 1.0).is_err());
        assert!(random_polygon(1, 4, 0.5).is_err());
    }

    #[test]
    fn default_suite_validates() {
        let suite = default_suite();
        assert_eq!(suite.schema, SCHEMA_VERSION);
        for (i, sc) in suite.scenarios.iter().enumerate() {
            sc.validate(i).unwrap();
        }
        let kinds: Vec<Kind> = suite.scenarios.iter().map(|s| s.kind).collect();
        for kind in Kind::ALL {
            assert!(kinds.contains(&kind), "default suite misses {kind}");
        }
    }

    #[test]
    fn random_suites_validate_for_every_kind() {
        for kind in Kind::ALL {
            let suite = random_suite(kind, 3, 7, &SuiteParams::default()).unwrap();
            assert_eq!(suite.scenarios.len(), 3);
            for (i, sc) in suite.scenarios.iter().enumerate() {
                sc.validate(i).unwrap();
                assert_eq!(sc.kind, kind);
            }
        }
    }
}
