//! P1 finite elements for the torsion problem Δu = −2 (u = 0 on the
//! boundary), torsional rigidity τ = ∫u, and the checks built on it:
//! the Brunn-Minkowski inequality for τ, the quantitative Urysohn
//! inequality against the equal-mean-width disk, concavity of √u, and
//! the Poisson-problem variant with a power-concave right-hand side.

use crate::distance::{hausdorff, rel_asymmetry, rel_asymmetry_rotmax};
use crate::error::{Error, Result};
use crate::geom::{segment_dist, v, Vec2};
use crate::means::{bbl_constants, p_mean, urysohn_constants, ConstantsBundle, MeanOrder};
use crate::pconcave::{AffinePiece, Check, Flag};
use crate::polygon::{minkowski_comb, ConvexPolygon};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const CG_TOL: f64 = 1e-10;
const SAMPLE_SEED: u64 = 0x5eed_0f_5a_17;

/// Structured triangulation of a convex polygon: concentric scaled
/// copies of the boundary sewn ring by ring. Nodes on the outermost
/// ring lie exactly on the polygon boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub nodes: Vec<Vec2>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_nodes: Vec<usize>,
    /// Target edge length; radial and tangential spacings stay at or
    /// below it, sew diagonals below h·√2.
    pub h: f64,
}

impl TriMesh {
    pub fn tri_area(&self, t: [usize; 3]) -> f64 {
        let [a, b, c] = t.map(|i| self.nodes[i]);
        0.5 * (b - a).cross(c - a)
    }

    fn total_area(&self) -> f64 {
        self.triangles.iter().map(|&t| self.tri_area(t)).sum()
    }
}

/// Simplify a convex loop by dropping corners whose removal deviates
/// from the chord by at most `tol` (sagitta test). Keeps the loop
/// convex and within `tol` of the original, so consecutive rings stay
/// strictly nested as long as `tol` is below the ring gap.
fn simplify_loop(corners: &[Vec2], tol: f64) -> Vec<Vec2> {
    let n = corners.len();
    if n <= 3 {
        return corners.to_vec();
    }
    let mut kept = vec![corners[0]];
    let mut i = 0usize;
    while i < n {
        // Longest admissible chord from corner i.
        let mut j = i + 1;
        let mut best = i + 1;
        while j < n + 1 {
            let end = corners[j % n];
            let ok = (i + 1..j).all(|k| segment_dist(corners[k], corners[i], end) <= tol);
            if ok {
                best = j;
                j += 1;
            } else {
                break;
            }
        }
        if best >= n {
            break;
        }
        kept.push(corners[best]);
        i = best;
    }
    kept
}

/// Chord subdivision: every returned segment has length ≤ h.
fn subdivide_loop(corners: &[Vec2], h: f64) -> Vec<Vec2> {
    let mut out = Vec::new();
    let n = corners.len();
    for i in 0..n {
        let (a, b) = (corners[i], corners[(i + 1) % n]);
        let pieces = ((b - a).norm() / h).ceil().max(1.0) as usize;
        for k in 0..pieces {
            out.push(a + (b - a) * (k as f64 / pieces as f64));
        }
    }
    out
}

/// Rotate a loop so its points start at the smallest polar angle about
/// `center`, and return the angles alongside.
fn by_angle(loop_pts: Vec<Vec2>, center: Vec2) -> (Vec<Vec2>, Vec<f64>) {
    let angle = |p: Vec2| {
        let d = p - center;
        let a = d.y.atan2(d.x);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    };
    let start = (0..loop_pts.len())
        .min_by(|&i, &j| angle(loop_pts[i]).total_cmp(&angle(loop_pts[j])))
        .unwrap();
    let rotated: Vec<Vec2> = loop_pts[start..]
        .iter()
        .chain(&loop_pts[..start])
        .copied()
        .collect();
    let angles = rotated.iter().map(|&p| angle(p)).collect();
    (rotated, angles)
}

pub fn triangulate(k: &ConvexPolygon, h: f64) -> Result<TriMesh> {
    if !(h > 0.0) {
        return Err(Error::NonPositive { what: "h", value: h });
    }
    let diam = k.diameter();
    if h >= diam / 4.0 {
        return Err(Error::MeshTooCoarse {
            h,
            max_h: diam / 4.0,
        });
    }
    let center = k.centroid();
    let corners: Vec<Vec2> = k.vertices().to_vec();
    let rho_min = {
        let n = corners.len();
        (0..n)
            .map(|i| segment_dist(center, corners[i], corners[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    };
    let r_max = corners
        .iter()
        .map(|&p| p.dist(center))
        .fold(0.0f64, f64::max);
    let rings = (r_max / h).ceil() as usize;
    let sag_tol = 0.2 * rho_min / rings as f64;

    let mut nodes = vec![center];
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    // (start index, angles) of the previous ring; the center counts as
    // a degenerate ring of one node.
    let mut prev_start = 0usize;
    let mut prev_angles: Vec<f64> = vec![0.0];

    for j in 1..=rings {
        let f = j as f64 / rings as f64;
        let scaled: Vec<Vec2> = corners.iter().map(|&p| center + (p - center) * f).collect();
        // The outermost ring keeps every corner so boundary nodes sit
        // exactly on the polygon.
        let ring = if j < rings {
            simplify_loop(&scaled, sag_tol)
        } else {
            scaled
        };
        let (pts, angles) = by_angle(subdivide_loop(&ring, h), center);
        let start = nodes.len();
        nodes.extend(&pts);

        if j == 1 {
            let n = pts.len();
            for t in 0..n {
                triangles.push([prev_start, start + t, start + (t + 1) % n]);
            }
        } else {
            sew_rings(
                prev_start,
                &prev_angles,
                start,
                &angles,
                &mut triangles,
            );
        }
        prev_start = start;
        prev_angles = angles;
    }

    let boundary_nodes: Vec<usize> = (prev_start..nodes.len()).collect();
    let mesh = TriMesh {
        nodes,
        triangles,
        boundary_nodes,
        h,
    };
    validate_mesh(&mesh, k)?;
    Ok(mesh)
}

/// Merge two angularly sorted rings into a triangle strip covering the
/// annulus between them. Each step consumes one edge of either ring.
fn sew_rings(
    inner_start: usize,
    inner_angles: &[f64],
    outer_start: usize,
    outer_angles: &[f64],
    triangles: &mut Vec<[usize; 3]>,
) {
    let (ni, no) = (inner_angles.len(), outer_angles.len());
    let next = |angles: &[f64], i: usize| {
        if i + 1 < angles.len() {
            angles[i + 1]
        } else {
            angles[0] + std::f64::consts::TAU
        }
    };
    let (mut ii, mut io) = (0usize, 0usize);
    while ii < ni || io < no {
        let advance_inner = if io == no {
            true
        } else if ii == ni {
            false
        } else {
            next(inner_angles, ii) <= next(outer_angles, io)
        };
        if advance_inner {
            // Inner edge walked backward keeps the triangle CCW.
            triangles.push([
                inner_start + (ii + 1) % ni,
                inner_start + ii,
                outer_start + io % no,
            ]);
            ii += 1;
        } else {
            triangles.push([
                outer_start + io,
                outer_start + (io + 1) % no,
                inner_start + ii % ni,
            ]);
            io += 1;
        }
    }
}

fn validate_mesh(mesh: &TriMesh, k: &ConvexPolygon) -> Result<()> {
    let min_area = 1e-14 * mesh.h * mesh.h;
    for &t in &mesh.triangles {
        let a = mesh.tri_area(t);
        if a <= min_area {
            return Err(Error::Invariant(format!(
                "triangle {t:?} has area {a:.3e}, not positive"
            )));
        }
    }
    let defect = (mesh.total_area() - k.area()).abs();
    if defect > 1e-8 {
        return Err(Error::Invariant(format!(
            "mesh area misses the polygon by {defect:.3e}"
        )));
    }
    let verts = k.vertices();
    let n = verts.len();
    for &b in &mesh.boundary_nodes {
        let p = mesh.nodes[b];
        let d = (0..n)
            .map(|i| segment_dist(p, verts[i], verts[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min);
        if d > 1e-10 {
            return Err(Error::Invariant(format!(
                "boundary node {b} is {d:.3e} away from the polygon boundary"
            )));
        }
    }
    Ok(())
}

/// A piecewise-linear nodal field on a mesh, zero on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub mesh: TriMesh,
    pub values: Vec<f64>,
}

impl ScalarField {
    /// ∫ of the linear interpolant: exact per-triangle average rule.
    pub fn integral(&self) -> f64 {
        self.mesh
            .triangles
            .iter()
            .map(|&t| {
                self.mesh.tri_area(t) / 3.0
                    * (self.values[t[0]] + self.values[t[1]] + self.values[t[2]])
            })
            .sum()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Value of the interpolant at x: barycentric evaluation in the
    /// containing triangle (the one fitting best, tolerating roundoff
    /// on shared edges); 0 outside the mesh.
    pub fn eval(&self, x: Vec2) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let mut val = 0.0;
        for &t in &self.mesh.triangles {
            let [a, b, c] = t.map(|i| self.mesh.nodes[i]);
            let area2 = (b - a).cross(c - a);
            let la = (b - x).cross(c - x) / area2;
            let lb = (c - x).cross(a - x) / area2;
            let lc = 1.0 - la - lb;
            let fit = la.min(lb).min(lc);
            if fit > best {
                best = fit;
                val = la * self.values[t[0]] + lb * self.values[t[1]] + lc * self.values[t[2]];
            }
        }
        if best >= -1e-9 {
            val
        } else {
            0.0
        }
    }

    /// Line dump for external viewers: node count, node coordinates,
    /// triangle count, index triples, then one value per node.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{}\n", self.mesh.nodes.len()));
        for p in &self.mesh.nodes {
            out.push_str(&format!("{:.17e} {:.17e}\n", p.x, p.y));
        }
        out.push_str(&format!("{}\n", self.mesh.triangles.len()));
        for t in &self.mesh.triangles {
            out.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
        }
        for v in &self.values {
            out.push_str(&format!("{v:.17e}\n"));
        }
        out
    }
}

/// Parsed form of `ScalarField::dump`, for consumers that only need
/// geometry and values.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub nodes: Vec<Vec2>,
    pub triangles: Vec<[usize; 3]>,
    pub values: Vec<f64>,
}

impl FieldDump {
    pub fn parse(text: &str) -> Result<FieldDump> {
        let bad = |what: &str| Error::DumpFormat(what.to_string());
        let mut tokens = text.split_whitespace();
        let mut take = |what: &'static str| tokens.next().ok_or_else(|| bad(what));
        let nn: usize = take("node count")?.parse().map_err(|_| bad("node count"))?;
        let mut nodes = Vec::with_capacity(nn);
        for _ in 0..nn {
            let x: f64 = take("node x")?.parse().map_err(|_| bad("node x"))?;
            let y: f64 = take("node y")?.parse().map_err(|_| bad("node y"))?;
            nodes.push(v(x, y));
        }
        let nt: usize = take("triangle count")?
            .parse()
            .map_err(|_| bad("triangle count"))?;
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let mut tri = [0usize; 3];
            for slot in &mut tri {
                *slot = take("triangle index")?
                    .parse()
                    .map_err(|_| bad("triangle index"))?;
                if *slot >= nn {
                    return Err(bad("triangle index out of range"));
                }
            }
            triangles.push(tri);
        }
        let mut values = Vec::with_capacity(nn);
        for _ in 0..nn {
            values.push(take("value")?.parse().map_err(|_| bad("value"))?);
        }
        if tokens.next().is_some() {
            return Err(bad("trailing tokens"));
        }
        Ok(FieldDump {
            nodes,
            triangles,
            values,
        })
    }
}

/// Compressed sparse rows, symmetric positive definite by assembly.
struct Csr {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Csr {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_counts = vec![0usize; n];
        let mut cols = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut last = (usize::MAX, usize::MAX);
        for (r, c, x) in triplets {
            if (r, c) == last {
                *vals.last_mut().unwrap() += x;
            } else {
                cols.push(c);
                vals.push(x);
                row_counts[r] += 1;
                last = (r, c);
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for r in 0..n {
            offsets[r + 1] = offsets[r] + row_counts[r];
        }
        Csr {
            offsets,
            cols,
            vals,
        }
    }

    fn mul(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..x.len() {
            let mut acc = 0.0;
            for k in self.offsets[r]..self.offsets[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[r] = acc;
        }
    }

    fn diagonal(&self, n: usize) -> Vec<f64> {
        let mut d = vec![0.0; n];
        for r in 0..n {
            for k in self.offsets[r]..self.offsets[r + 1] {
                if self.cols[k] == r {
                    d[r] = self.vals[k];
                }
            }
        }
        d
    }
}

/// Galerkin P1 solution of −Δu = f with zero boundary values, by
/// Jacobi-preconditioned conjugate gradients to relative residual
/// 10⁻¹⁰ within 10·(node count) iterations.
pub fn solve_poisson(k: &ConvexPolygon, f: &dyn Fn(Vec2) -> f64, h: f64) -> Result<ScalarField> {
    let mesh = triangulate(k, h)?;
    let field = solve_on_mesh(&mesh, f)?;
    Ok(ScalarField { mesh, values: field })
}

fn solve_on_mesh(mesh: &TriMesh, f: &dyn Fn(Vec2) -> f64) -> Result<Vec<f64>> {
    let nn = mesh.nodes.len();
    let mut interior = vec![usize::MAX; nn];
    let mut count = 0usize;
    let boundary: std::collections::HashSet<usize> =
        mesh.boundary_nodes.iter().copied().collect();
    for i in 0..nn {
        if !boundary.contains(&i) {
            interior[i] = count;
            count += 1;
        }
    }

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(9 * mesh.triangles.len());
    let mut rhs = vec![0.0f64; count];
    for &t in &mesh.triangles {
        let p = t.map(|i| mesh.nodes[i]);
        let area = mesh.tri_area(t);
        // Gradients of the barycentric basis: rotated opposite edges.
        let grads = [
            (p[2] - p[1]).rotated(std::f64::consts::FRAC_PI_2) * (1.0 / (2.0 * area)),
            (p[0] - p[2]).rotated(std::f64::consts::FRAC_PI_2) * (1.0 / (2.0 * area)),
            (p[1] - p[0]).rotated(std::f64::consts::FRAC_PI_2) * (1.0 / (2.0 * area)),
        ];
        let fm = [
            f((p[0] + p[1]) * 0.5),
            f((p[1] + p[2]) * 0.5),
            f((p[2] + p[0]) * 0.5),
        ];
        for a in 0..3 {
            let Some(&ra) = interior.get(t[a]).filter(|&&i| i != usize::MAX) else {
                continue;
            };
            // Edge-midpoint load: φ_a is 1/2 on its two adjacent
            // midpoints and 0 on the opposite one.
            let opposite = (a + 1) % 3;
            let load = area / 3.0 * 0.5 * (fm[0] + fm[1] + fm[2] - fm[opposite]);
            rhs[ra] += load;
            for b in 0..3 {
                if interior[t[b]] != usize::MAX {
                    triplets.push((ra, interior[t[b]], area * grads[a].dot(grads[b])));
                }
            }
        }
    }
    let matrix = Csr::from_triplets(count, triplets);

    let x = conjugate_gradient(&matrix, &rhs, count, 10 * nn)?;
    let mut values = vec![0.0f64; nn];
    for i in 0..nn {
        if interior[i] != usize::MAX {
            values[i] = x[interior[i]];
        }
    }
    Ok(values)
}

fn conjugate_gradient(a: &Csr, b: &[f64], n: usize, max_iters: usize) -> Result<Vec<f64>> {
    let norm_b = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm_b == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let diag = a.diagonal(n);
    let inv_diag: Vec<f64> = diag
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = vec![0.0f64; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0f64; n];

    for _ in 0..max_iters {
        a.mul(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let norm_r = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm_r <= CG_TOL * norm_b {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::CgDiverged(max_iters))
}

/// Torsional rigidity with a two-mesh error estimate: `value` comes
/// from mesh size h, `richardson` extrapolates it with the h/2 value
/// assuming second-order convergence, `err_est` is their gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauEstimate {
    pub value: f64,
    pub richardson: f64,
    pub err_est: f64,
}

/// ∫ of the Poisson solution for a general right-hand side, with the
/// same two-mesh treatment as `tau`.
pub fn poisson_integral(k: &ConvexPolygon, f: &dyn Fn(Vec2) -> f64, h: f64) -> Result<TauEstimate> {
    let coarse = solve_poisson(k, f, h)?.integral();
    let fine = solve_poisson(k, f, h / 2.0)?.integral();
    Ok(TauEstimate {
        value: coarse,
        richardson: fine + (fine - coarse) / 3.0,
        err_est: (coarse - fine).abs(),
    })
}

/// τ(K) = ∫ u with Δu = −2, u = 0 on ∂K.
pub fn tau(k: &ConvexPolygon, h: f64) -> Result<TauEstimate> {
    poisson_integral(k, &|_| 2.0, h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqrtConcavity {
    pub min_gap: f64,
    pub holds: bool,
}

/// Midpoint-concavity probe of √u on seeded random interior triples,
/// with the field read through its linear interpolant. The tolerance
/// −10⁻³·√(sup u) absorbs interpolation error near the boundary.
pub fn sqrt_concavity_check(field: &ScalarField, sample_count: usize) -> SqrtConcavity {
    let mesh = &field.mesh;
    let areas: Vec<f64> = mesh.triangles.iter().map(|&t| mesh.tri_area(t)).collect();
    let total: f64 = areas.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    // Area-weighted triangle, uniform barycentric point. The value
    // comes straight from the barycentric weights, no relocation.
    let pick_point = |rng: &mut ChaCha8Rng| -> (Vec2, f64) {
        let mut target = rng.random_range(0.0..total);
        let mut idx = areas.len() - 1;
        for (i, &a) in areas.iter().enumerate() {
            if target < a {
                idx = i;
                break;
            }
            target -= a;
        }
        let t = mesh.triangles[idx];
        let (mut r1, mut r2) = (rng.random::<f64>(), rng.random::<f64>());
        if r1 + r2 > 1.0 {
            r1 = 1.0 - r1;
            r2 = 1.0 - r2;
        }
        let x = mesh.nodes[t[0]]
            + (mesh.nodes[t[1]] - mesh.nodes[t[0]]) * r1
            + (mesh.nodes[t[2]] - mesh.nodes[t[0]]) * r2;
        let u = (1.0 - r1 - r2) * field.values[t[0]]
            + r1 * field.values[t[1]]
            + r2 * field.values[t[2]];
        (x, u)
    };

    let mut min_gap = f64::INFINITY;
    for _ in 0..sample_count {
        let (x, ux) = pick_point(&mut rng);
        let (y, uy) = pick_point(&mut rng);
        let mid = (x + y) * 0.5;
        let umid = field.eval(mid).max(0.0);
        let gap = umid.sqrt() - 0.5 * (ux.max(0.0).sqrt() + uy.max(0.0).sqrt());
        min_gap = min_gap.min(gap);
    }
    if !min_gap.is_finite() {
        min_gap = 0.0;
    }
    SqrtConcavity {
        min_gap,
        holds: min_gap >= -1e-3 * field.sup().max(0.0).sqrt(),
    }
}

/// Brunn-Minkowski for torsional rigidity on one pair: the plain
/// M_{1/(n+2)} inequality and its two quantitative strengthenings,
/// driven by the constants evaluated at p = 1/2, I_i = τ(Ω_i).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmTauReport {
    pub tau0: TauEstimate,
    pub tau1: TauEstimate,
    pub tau_lambda: TauEstimate,
    pub mean_rhs: f64,
    pub h0: f64,
    pub asym: f64,
    pub fem_slack: f64,
    pub constants: ConstantsBundle,
    pub plain: Check,
    pub hausdorff: Check,
    pub asymmetry: Check,
}

pub fn verify_bm_tau(
    k0: &ConvexPolygon,
    k1: &ConvexPolygon,
    lambda: f64,
    h: f64,
) -> Result<BmTauReport> {
    let omega = minkowski_comb(k0, k1, lambda)?;
    let tau0 = tau(k0, h)?;
    let tau1 = tau(k1, h)?;
    let tau_lambda = tau(&omega, h)?;
    let mean_rhs = p_mean(
        tau0.richardson,
        tau1.richardson,
        lambda,
        MeanOrder::Finite(0.25),
    )?;
    let fem_slack = 3.0 * tau0.err_est.max(tau1.err_est).max(tau_lambda.err_est);

    let h0v = crate::distance::h0(k0, k1);
    let asym = rel_asymmetry(k0, k1).a;
    let p = 0.5;
    let constants = bbl_constants(
        2,
        p,
        lambda,
        k0.area(),
        k1.area(),
        k0.diameter(),
        k1.diameter(),
        tau0.richardson,
        tau1.richardson,
    )?;

    let deficit = tau_lambda.richardson - mean_rhs;
    let gate = |term: f64, value: f64, max: f64| {
        if value < max {
            Check {
                flag: if deficit - term >= -fem_slack {
                    Flag::Pass
                } else {
                    Flag::Fail
                },
                margin: deficit - term,
            }
        } else {
            Check {
                flag: Flag::NotApplicable,
                margin: 0.0,
            }
        }
    };
    // Exponents (n+1)(p+1)/p = 9 and 2(p+1)/p = 6 at n = 2, p = 1/2.
    let term_h = constants.beta * h0v.powi(9);
    let term_a = constants.delta * asym.powi(6);

    Ok(BmTauReport {
        tau0,
        tau1,
        tau_lambda,
        mean_rhs,
        h0: h0v,
        asym,
        fem_slack,
        constants,
        plain: Check {
            flag: if deficit >= -fem_slack {
                Flag::Pass
            } else {
                Flag::Fail
            },
            margin: deficit,
        },
        hausdorff: gate(term_h, h0v, constants.h0_max),
        asymmetry: gate(term_a, asym, constants.a_max),
    })
}

/// The disk proxy with the same mean width: a regular 512-gon of
/// radius mean_width(K)/2 about the centroid.
pub fn omega_sharp(k: &ConvexPolygon) -> ConvexPolygon {
    let c = k.centroid();
    let r = k.mean_width() / 2.0;
    let pts: Vec<Vec2> = (0..512)
        .map(|i| {
            let t = i as f64 * std::f64::consts::TAU / 512.0;
            c + v(r * t.cos(), r * t.sin())
        })
        .collect();
    ConvexPolygon::from_points(&pts).expect("regular polygon is nondegenerate")
}

/// Quantitative Urysohn: τ against the equal-mean-width disk, with the
/// Hausdorff-power and asymmetry-power improvements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrysohnReport {
    pub tau_omega: TauEstimate,
    pub tau_sharp: TauEstimate,
    pub h_dist: f64,
    pub asym: f64,
    pub mu: f64,
    pub nu: f64,
    pub fem_slack: f64,
    pub plain: Check,
    pub hausdorff: Check,
    pub asymmetry: Check,
}

pub fn verify_urysohn(k: &ConvexPolygon, h: f64, angle_count: usize) -> Result<UrysohnReport> {
    // Centered copy: the theorem measures H with the centroid at the
    // origin, and the disk proxy shares that center.
    let centered = k.translate(-k.centroid());
    let sharp = omega_sharp(&centered);
    let tau_omega = tau(&centered, h)?;
    let tau_sharp = tau(&sharp, h)?;
    let h_dist = hausdorff(&centered, &sharp);
    let asym = rel_asymmetry_rotmax(&centered, angle_count)?;
    let uc = urysohn_constants(2, tau_omega.richardson, centered.diameter())?;
    let fem_slack = 3.0 * tau_omega.err_est.max(tau_sharp.err_est);

    let check = |lhs_gap: f64| Check {
        flag: if lhs_gap >= -fem_slack {
            Flag::Pass
        } else {
            Flag::Fail
        },
        margin: lhs_gap,
    };
    Ok(UrysohnReport {
        tau_omega,
        tau_sharp,
        h_dist,
        asym,
        mu: uc.mu,
        nu: uc.nu,
        fem_slack,
        plain: check(tau_sharp.richardson - tau_omega.richardson),
        hausdorff: check(
            tau_sharp.richardson - tau_omega.richardson * (1.0 + uc.mu * h_dist.powi(9)),
        ),
        asymmetry: check(
            tau_sharp.richardson - tau_omega.richardson * (1.0 + uc.nu * asym.powi(6)),
        ),
    })
}

/// Concavity exponent of the Poisson right-hand side: f^(1/β) form, or
/// the constant-f limit, which turns the conclusion into the p = 1/2
/// (torsion) case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaExp {
    Finite(f64),
    Infinite,
}

/// BBL-type conclusion for solutions of Δu + f = 0: the integrals of
/// the three solutions obey the M_{p/(np+1)} inequality with
/// p = β/(1+2β), plus the Hausdorff-improved form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonBblReport {
    pub i0: TauEstimate,
    pub i1: TauEstimate,
    pub i_lambda: TauEstimate,
    pub p_used: f64,
    pub mean_rhs: f64,
    pub h0: f64,
    pub fem_slack: f64,
    pub constants: ConstantsBundle,
    pub plain: Check,
    pub hausdorff: Check,
}

pub fn verify_poisson_bbl(
    k0: &ConvexPolygon,
    k1: &ConvexPolygon,
    lambda: f64,
    f_pieces: &[AffinePiece],
    beta_exp: BetaExp,
    h: f64,
) -> Result<PoissonBblReport> {
    if f_pieces.is_empty() {
        return Err(Error::EmptyPieces);
    }
    let p_used = match beta_exp {
        BetaExp::Finite(beta) => {
            if !(beta >= 1.0 && beta.is_finite()) {
                return Err(Error::BadScalar {
                    what: "beta_exp",
                    value: beta,
                });
            }
            beta / (1.0 + 2.0 * beta)
        }
        BetaExp::Infinite => {
            // The constant-f limit: require genuinely constant pieces,
            // since only those are ∞-concave.
            if f_pieces.iter().any(|piece| piece.a != Vec2::ZERO) {
                return Err(Error::Invariant(
                    "infinite concavity exponent needs constant pieces".to_string(),
                ));
            }
            0.5
        }
    };
    let min_affine = |x: Vec2| {
        f_pieces
            .iter()
            .map(|piece| piece.a.dot(x) + piece.b)
            .fold(f64::INFINITY, f64::min)
    };
    let f = |x: Vec2| match beta_exp {
        BetaExp::Finite(beta) => min_affine(x).max(0.0).powf(1.0 / beta),
        BetaExp::Infinite => min_affine(x).max(0.0),
    };

    let omega = minkowski_comb(k0, k1, lambda)?;
    let i0 = poisson_integral(k0, &f, h)?;
    let i1 = poisson_integral(k1, &f, h)?;
    let i_lambda = poisson_integral(&omega, &f, h)?;
    let n = 2.0;
    let mean_rhs = p_mean(
        i0.richardson,
        i1.richardson,
        lambda,
        MeanOrder::Finite(p_used / (n * p_used + 1.0)),
    )?;
    let fem_slack = 3.0 * i0.err_est.max(i1.err_est).max(i_lambda.err_est);
    let h0v = crate::distance::h0(k0, k1);
    let constants = bbl_constants(
        2,
        p_used,
        lambda,
        k0.area(),
        k1.area(),
        k0.diameter(),
        k1.diameter(),
        i0.richardson,
        i1.richardson,
    )?;

    let deficit = i_lambda.richardson - mean_rhs;
    let term_h = constants.beta * h0v.powf((n + 1.0) * (p_used + 1.0) / p_used);
    let hausdorff = if h0v < constants.h0_max {
        Check {
            flag: if deficit - term_h >= -fem_slack {
                Flag::Pass
            } else {
                Flag::Fail
            },
            margin: deficit - term_h,
        }
    } else {
        Check {
            flag: Flag::NotApplicable,
            margin: 0.0,
        }
    };

    Ok(PoissonBblReport {
        i0,
        i1,
        i_lambda,
        p_used,
        mean_rhs,
        h0: h0v,
        fem_slack,
        constants,
        plain: Check {
            flag: if deficit >= -fem_slack {
                Flag::Pass
            } else {
                Flag::Fail
            },
            margin: deficit,
        },
        hausdorff,
    })
}
