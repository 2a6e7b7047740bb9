//! Power-concave functions u = max(g, 0)^(1/p) with g a min of affine
//! pieces, their level-set and layer-cake machinery, the (p,λ)-supremal
//! convolution, and the quantitative inequality checks built on them.

use crate::distance::{h0, rel_asymmetry};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::lp::lp_maximize;
use crate::means::{bbl_constants, p_mean, ConstantsBundle, MeanOrder};
use crate::polygon::{clip_halfplane, minkowski_comb, ConvexPolygon};
use crate::quad::{adaptive_simpson, adaptive_triangles};
use serde::{Deserialize, Serialize};
use std::cell::Cell;

const INTEGRAL_EVAL_BUDGET: usize = 2_000_000;
// The split indicator follows the one-point rule's error, which for
// curved convolution surfaces is far above the reported three-point
// value's true error, so tight tolerances burn many splits.
const CONV_SPLIT_BUDGET: usize = 2_000_000;
const CAKE_PANELS: usize = 4096;

/// One affine piece a·x + b of the concave envelope g = min over pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct AffinePiece {
    pub a: Vec2,
    pub b: f64,
}

impl From<[f64; 3]> for AffinePiece {
    fn from(v: [f64; 3]) -> AffinePiece {
        AffinePiece {
            a: Vec2 { x: v[0], y: v[1] },
            b: v[2],
        }
    }
}

impl From<AffinePiece> for [f64; 3] {
    fn from(p: AffinePiece) -> [f64; 3] {
        [p.a.x, p.a.y, p.b]
    }
}

impl AffinePiece {
    fn at(&self, x: Vec2) -> f64 {
        self.a.dot(x) + self.b
    }
}

/// A p-concave function on a convex polygonal support: u = max(g, 0)^(1/p)
/// inside the domain and 0 outside, where g is a min of affine pieces
/// (concave by construction) and p > 0. g must be positive at the
/// domain centroid, which keeps the function nontrivial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FnLiteral", into = "FnLiteral")]
pub struct PConcaveFn {
    domain: ConvexPolygon,
    p: f64,
    pieces: Vec<AffinePiece>,
}

/// Wire format shared with the CLI: { domain, p, pieces: [[a1,a2,b],..] }.
#[derive(Serialize, Deserialize)]
struct FnLiteral {
    domain: ConvexPolygon,
    p: f64,
    pieces: Vec<AffinePiece>,
}

impl TryFrom<FnLiteral> for PConcaveFn {
    type Error = Error;
    fn try_from(l: FnLiteral) -> Result<PConcaveFn> {
        PConcaveFn::make(l.domain, l.p, l.pieces)
    }
}

impl From<PConcaveFn> for FnLiteral {
    fn from(u: PConcaveFn) -> FnLiteral {
        FnLiteral {
            domain: u.domain,
            p: u.p,
            pieces: u.pieces,
        }
    }
}

impl PConcaveFn {
    pub fn make(domain: ConvexPolygon, p: f64, pieces: Vec<AffinePiece>) -> Result<PConcaveFn> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::NonPositive {
                what: "p",
                value: p,
            });
        }
        if pieces.is_empty() {
            return Err(Error::EmptyPieces);
        }
        for piece in &pieces {
            if !(piece.a.is_finite() && piece.b.is_finite()) {
                return Err(Error::BadScalar {
                    what: "piece coefficient",
                    value: if piece.b.is_finite() { f64::NAN } else { piece.b },
                });
            }
        }
        let u = PConcaveFn { domain, p, pieces };
        let at_centroid = u.g(u.domain.centroid());
        if at_centroid <= 0.0 {
            return Err(Error::NotPositiveAtCentroid(at_centroid));
        }
        Ok(u)
    }

    pub fn domain(&self) -> &ConvexPolygon {
        &self.domain
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    /// The unclipped concave envelope min_j (a_j·x + b_j).
    pub fn g(&self, x: Vec2) -> f64 {
        self.pieces
            .iter()
            .map(|piece| piece.at(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// 0 outside the domain, max(g, 0)^(1/p) inside.
    pub fn eval(&self, x: Vec2) -> f64 {
        if !self.domain.contains(x) {
            return 0.0;
        }
        self.g(x).max(0.0).powf(1.0 / self.p)
    }

    /// Sup of u over the domain: max of g by a small LP, then ^(1/p).
    /// Positive because g is positive at the centroid.
    pub fn sup_norm(&self) -> Result<f64> {
        let (lo, _) = self.domain.bbox();
        // Variables (y1, y2, t) with x = y + lo, maximize t subject to
        // t ≤ g-pieces and x in the domain halfplanes. t ≥ 0 is
        // harmless: the max is at least g(centroid) > 0.
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for piece in &self.pieces {
            rows.push(vec![-piece.a.x, -piece.a.y, 1.0]);
            rhs.push(piece.b + piece.a.dot(lo));
        }
        for (n, c) in self.domain.halfplanes() {
            rows.push(vec![n.x, n.y, 0.0]);
            rhs.push(c - n.dot(lo));
        }
        let sol = lp_maximize(&[0.0, 0.0, 1.0], &rows, &rhs)?;
        Ok(sol.value.max(0.0).powf(1.0 / self.p))
    }

    /// Superlevel set {u ≥ t}: the domain clipped by a_j·x + b_j ≥ t^p.
    /// t = 0 returns the whole domain (closure convention); None when
    /// the set is empty or has collapsed below positive area.
    pub fn level_set(&self, t: f64) -> Option<ConvexPolygon> {
        debug_assert!(t >= 0.0);
        if t <= 0.0 {
            return Some(self.domain.clone());
        }
        let tp = t.powf(self.p);
        let mut verts = self.domain.vertices().to_vec();
        for piece in &self.pieces {
            verts = clip_halfplane(&verts, -piece.a, piece.b - tp);
            if verts.len() < 3 {
                return None;
            }
        }
        ConvexPolygon::from_points(&verts).ok()
    }

    /// Distribution function μ(t) = |{u ≥ t}|.
    pub fn distribution(&self, t: f64) -> f64 {
        self.level_set(t).map_or(0.0, |k| k.area())
    }

    /// Layer-cake integral I = ∫₀^L μ(s) ds by adaptive Simpson with
    /// error below tol·max(1, I).
    pub fn integral(&self, tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::NonPositive {
                what: "tol",
                value: tol,
            });
        }
        let sup = self.sup_norm()?;
        let mu = |s: f64| self.distribution(s);
        // First pass against a crude scale bound, second against the
        // estimate itself so the final error is relative to I.
        let crude = sup * self.domain.area();
        let rough = adaptive_simpson(&mu, 0.0, sup, tol * crude.max(1.0), INTEGRAL_EVAL_BUDGET)?;
        adaptive_simpson(
            &mu,
            0.0,
            sup,
            tol * rough.abs().max(1.0),
            INTEGRAL_EVAL_BUDGET,
        )
    }

    /// Tabulated layer cake on a uniform level grid (2·panels + 1
    /// samples), the backing store for the equal-area parametrization.
    pub fn layer_cake(&self, panels: usize) -> Result<LayerCake> {
        let sup = self.sup_norm()?;
        let count = 2 * panels.max(1) + 1;
        let step = sup / (count - 1) as f64;
        let levels: Vec<f64> = (0..count).map(|i| i as f64 * step).collect();
        let mut areas: Vec<f64> = levels.iter().map(|&t| self.distribution(t)).collect();
        // Level sets nest exactly; clamp the shoelace jitter so the
        // recorded table is monotone as the type promises.
        for i in 1..areas.len() {
            areas[i] = areas[i].min(areas[i - 1]);
        }
        let mut integral = 0.0;
        for k in 0..(count - 1) / 2 {
            integral +=
                step / 3.0 * (areas[2 * k] + 4.0 * areas[2 * k + 1] + areas[2 * k + 2]);
        }
        Ok(LayerCake {
            levels,
            areas,
            integral,
            sup,
        })
    }

    /// The level s(t) at which the cumulative layer cake reaches the
    /// fraction t of the integral; bisection to 10⁻¹⁰·L.
    pub fn equal_area_param(&self, t: f64) -> Result<f64> {
        Ok(self.layer_cake(CAKE_PANELS)?.equal_area_param(t))
    }
}

/// Sampled distribution function: increasing levels in [0, L], their μ
/// values (nonincreasing), the composite-Simpson integral, and the sup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerCake {
    pub levels: Vec<f64>,
    pub areas: Vec<f64>,
    pub integral: f64,
    pub sup: f64,
}

impl LayerCake {
    /// Cumulative ∫₀^s μ: per-panel closed-form integral of the
    /// quadratic through the three panel samples, so it agrees with the
    /// composite-Simpson total at panel ends.
    pub fn cumulative(&self, s: f64) -> f64 {
        let count = self.levels.len();
        let panels = (count - 1) / 2;
        if panels == 0 || self.sup <= 0.0 {
            return 0.0;
        }
        let width = self.sup / panels as f64;
        let s = s.clamp(0.0, self.sup);
        let k = ((s / width) as usize).min(panels - 1);
        let mut acc = 0.0;
        for j in 0..k {
            acc += width / 6.0
                * (self.areas[2 * j] + 4.0 * self.areas[2 * j + 1] + self.areas[2 * j + 2]);
        }
        let (fa, fm, fb) = (
            self.areas[2 * k],
            self.areas[2 * k + 1],
            self.areas[2 * k + 2],
        );
        let xi = (s - self.levels[2 * k]) / width;
        let ia = (2.0 / 3.0 * xi - 1.5) * xi * xi + xi;
        let im = (-4.0 / 3.0 * xi + 2.0) * xi * xi;
        let ib = (2.0 / 3.0 * xi - 0.5) * xi * xi;
        acc + width * (fa * ia + fm * im + fb * ib)
    }

    /// Inverse of the normalized cumulative: the s with F(s)/I = t.
    pub fn equal_area_param(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        if t == 0.0 {
            return 0.0;
        }
        if t == 1.0 {
            return self.sup;
        }
        let target = t * self.integral;
        let (mut lo, mut hi) = (0.0f64, self.sup);
        while hi - lo > 1e-10 * self.sup {
            let mid = 0.5 * (lo + hi);
            if self.cumulative(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn check_conv_inputs(u0: &PConcaveFn, u1: &PConcaveFn, p: f64, lambda: f64) -> Result<()> {
    if u0.p != p {
        return Err(Error::ExponentMismatch(p, u0.p));
    }
    if u1.p != p {
        return Err(Error::ExponentMismatch(p, u1.p));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    Ok(())
}

/// The (p,λ)-supremal convolution at x:
///   u_{p,λ}(x) = sup { M_p(u0(x0), u1(x1); λ) : x = (1−λ)x0 + λx1 }.
/// Computed as an LP in (x0, t0, t1): maximize (1−λ)t0 + λt1 with
/// t_i ≤ g_i-pieces, x_i in the support halfplanes, t_i ≥ 0, and
/// x1 = (x − (1−λ)x0)/λ substituted; the optimum is u^p. Returns 0 when
/// no decomposition exists (x outside the Minkowski combination).
pub fn conv_eval(
    u0: &PConcaveFn,
    u1: &PConcaveFn,
    p: f64,
    lambda: f64,
    x: Vec2,
) -> Result<f64> {
    check_conv_inputs(u0, u1, p, lambda)?;
    let (lo, _) = u0.domain.bbox();
    let ratio = (1.0 - lambda) / lambda;

    // Variables (y1, y2, t0, t1) with x0 = y + lo ≥ lo componentwise.
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for piece in &u0.pieces {
        rows.push(vec![-piece.a.x, -piece.a.y, 1.0, 0.0]);
        rhs.push(piece.b + piece.a.dot(lo));
    }
    for piece in &u1.pieces {
        rows.push(vec![ratio * piece.a.x, ratio * piece.a.y, 0.0, 1.0]);
        rhs.push(piece.b + piece.a.dot(x) / lambda - ratio * piece.a.dot(lo));
    }
    for (n, c) in u0.domain.halfplanes() {
        rows.push(vec![n.x, n.y, 0.0, 0.0]);
        rhs.push(c - n.dot(lo));
    }
    for (n, c) in u1.domain.halfplanes() {
        rows.push(vec![
            -(1.0 - lambda) * n.x,
            -(1.0 - lambda) * n.y,
            0.0,
            0.0,
        ]);
        rhs.push(lambda * c - n.dot(x) + (1.0 - lambda) * n.dot(lo));
    }
    match lp_maximize(&[0.0, 0.0, 1.0 - lambda, lambda], &rows, &rhs) {
        Ok(sol) => Ok(sol.value.max(0.0).powf(1.0 / p)),
        Err(Error::LpInfeasible) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// I_λ = ∫ u_{p,λ} over Ω_λ = (1−λ)Ω0 + λΩ1 by adaptive triangle
/// quadrature of the LP-evaluated convolution on a centroid fan.
pub fn conv_integral(
    u0: &PConcaveFn,
    u1: &PConcaveFn,
    p: f64,
    lambda: f64,
    tol: f64,
) -> Result<f64> {
    check_conv_inputs(u0, u1, p, lambda)?;
    if !(tol > 0.0) {
        return Err(Error::NonPositive {
            what: "tol",
            value: tol,
        });
    }
    let omega = minkowski_comb(&u0.domain, &u1.domain, lambda)?;
    let center = omega.centroid();
    let verts = omega.vertices();
    let fan: Vec<[Vec2; 3]> = (0..verts.len())
        .map(|i| [verts[i], verts[(i + 1) % verts.len()], center])
        .collect();
    // Pre-split the fan twice so the first indicator pass already sees
    // the convolution's creases at sub-edge scale instead of trusting
    // a handful of huge panels.
    let tris = subdivide(subdivide(fan));

    // The quadrature callback is infallible; stash the first LP error
    // and surface it after the sweep.
    let failure: Cell<Option<Error>> = Cell::new(None);
    let f = |x: Vec2| match conv_eval(u0, u1, p, lambda, x) {
        Ok(v) => v,
        Err(e) => {
            if failure.take().is_none() {
                failure.set(Some(e));
            }
            0.0
        }
    };
    let integral = adaptive_triangles(&f, &tris, tol, CONV_SPLIT_BUDGET)?;
    match failure.take() {
        Some(e) => Err(e),
        None => Ok(integral),
    }
}

fn subdivide(tris: Vec<[Vec2; 3]>) -> Vec<[Vec2; 3]> {
    let mut out = Vec::with_capacity(tris.len() * 4);
    for [a, b, c] in tris {
        let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
        out.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Pass,
    Fail,
    NotApplicable,
}

impl Flag {
    pub fn ok(self) -> bool {
        self != Flag::Fail
    }

    fn from_margin(margin: f64, slack: f64) -> Flag {
        if margin >= -slack {
            Flag::Pass
        } else {
            Flag::Fail
        }
    }
}

/// One verified inequality: its pass/fail/not-applicable flag and the
/// margin (lhs − rhs, nonnegative when the inequality holds exactly).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub flag: Flag,
    pub margin: f64,
}

impl Check {
    fn not_applicable() -> Check {
        Check {
            flag: Flag::NotApplicable,
            margin: 0.0,
        }
    }
}

/// The checks attached to one convolution instance. `base` is the plain
/// integral inequality; `hausdorff`/`asymmetry` add the distance-powered
/// improvement terms (evaluated only below their smallness thresholds);
/// the `_capped` variants use min(B, term) and need no threshold;
/// `stability` is the reverse volume bound driven by the deficit ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBLChecks {
    pub base: Check,
    pub hausdorff: Check,
    pub asymmetry: Check,
    pub hausdorff_capped: Check,
    pub asymmetry_capped: Check,
    pub stability: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BBLReport {
    pub i0: f64,
    pub i1: f64,
    pub i_lambda: f64,
    /// M_{p/(np+1)}(I0, I1; λ).
    pub mean_rhs: f64,
    /// Deficit ε = I_λ − mean_rhs.
    pub epsilon: f64,
    pub h0: f64,
    pub asym: f64,
    pub constants: ConstantsBundle,
    pub checks: BBLChecks,
}

/// Runs the full quantitative-inequality pipeline on one pair, with h
/// instantiated as the supremal convolution itself (the smallest
/// admissible choice, hence the sharpest check).
pub fn verify_bbl(
    u0: &PConcaveFn,
    u1: &PConcaveFn,
    p: f64,
    lambda: f64,
    tol: f64,
) -> Result<BBLReport> {
    check_conv_inputs(u0, u1, p, lambda)?;
    let i0 = u0.integral(tol)?;
    let i1 = u1.integral(tol)?;
    let i_lambda = conv_integral(u0, u1, p, lambda, tol)?;
    let n = 2.0;
    let mean_rhs = p_mean(i0, i1, lambda, MeanOrder::Finite(p / (n * p + 1.0)))?;
    let epsilon = i_lambda - mean_rhs;

    let dom0 = &u0.domain;
    let dom1 = &u1.domain;
    let h0v = h0(dom0, dom1);
    let asym = rel_asymmetry(dom0, dom1).a;
    let constants = bbl_constants(
        2,
        p,
        lambda,
        dom0.area(),
        dom1.area(),
        dom0.diameter(),
        dom1.diameter(),
        i0,
        i1,
    )?;

    let slack = tol * i_lambda.abs().max(1.0);
    let term_h = constants.beta * h0v.powf((n + 1.0) * (p + 1.0) / p);
    let term_a = constants.delta * asym.powf(2.0 * (p + 1.0) / p);
    let b = constants.b_threshold;

    let gated = |term: f64, value: f64, max: f64| {
        if value < max {
            Check {
                flag: Flag::from_margin(epsilon - term, slack),
                margin: epsilon - term,
            }
        } else {
            Check::not_applicable()
        }
    };

    let vol_lambda = minkowski_comb(dom0, dom1, lambda)?.area();
    let mean_vol = p_mean(dom0.area(), dom1.area(), lambda, MeanOrder::Finite(1.0 / n))?;
    let eps_plus = epsilon.max(0.0);
    let stability = if eps_plus <= b {
        let bound = mean_vol * (1.0 + constants.eta * eps_plus.powf(p / (p + 1.0)));
        Check {
            flag: Flag::from_margin(bound - vol_lambda, 1e-9),
            margin: bound - vol_lambda,
        }
    } else {
        Check::not_applicable()
    };

    let checks = BBLChecks {
        base: Check {
            flag: Flag::from_margin(epsilon, slack),
            margin: epsilon,
        },
        hausdorff: gated(term_h, h0v, constants.h0_max),
        asymmetry: gated(term_a, asym, constants.a_max),
        hausdorff_capped: Check {
            flag: Flag::from_margin(epsilon - term_h.min(b), slack),
            margin: epsilon - term_h.min(b),
        },
        asymmetry_capped: Check {
            flag: Flag::from_margin(epsilon - term_a.min(b), slack),
            margin: epsilon - term_a.min(b),
        },
        stability,
    };

    Ok(BBLReport {
        i0,
        i1,
        i_lambda,
        mean_rhs,
        epsilon,
        h0: h0v,
        asym,
        constants,
        checks,
    })
}

/// The reverse volume bound on its own: assuming the integral
/// inequality holds with slack ε ≤ B, the combination's volume cannot
/// exceed M_{1/n}(|Ω0|, |Ω1|; λ)·(1 + η·ε^(p/(p+1))).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub epsilon: f64,
    pub bound_rhs: f64,
    pub holds: Flag,
}

pub fn verify_stability(
    u0: &PConcaveFn,
    u1: &PConcaveFn,
    p: f64,
    lambda: f64,
    tol: f64,
) -> Result<StabilityReport> {
    let report = verify_bbl(u0, u1, p, lambda, tol)?;
    let constants = &report.constants;
    let mean_vol = p_mean(
        u0.domain.area(),
        u1.domain.area(),
        lambda,
        MeanOrder::Finite(0.5),
    )?;
    let eps_plus = report.epsilon.max(0.0);
    let bound_rhs = mean_vol * (1.0 + constants.eta * eps_plus.powf(p / (p + 1.0)));
    let holds = if eps_plus > constants.b_threshold {
        Flag::NotApplicable
    } else {
        let vol_lambda = minkowski_comb(&u0.domain, &u1.domain, lambda)?.area();
        Flag::from_margin(bound_rhs - vol_lambda, 1e-9)
    };
    Ok(StabilityReport {
        epsilon: eps_plus,
        bound_rhs,
        holds,
    })
}
