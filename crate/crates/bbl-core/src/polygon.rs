//! Planar convex-body kernel: hulls, measures, support data, Minkowski
//! combinations, halfplane clipping.

use crate::error::{Error, Result};
use crate::geom::{v, Vec2};
use serde::{Deserialize, Serialize};

/// Strictly convex polygon: counterclockwise vertices, no three
/// collinear after normalization, positive area. The canonical
/// representative starts at the lexicographically smallest vertex.
///
/// Serialized as a list of `[x, y]` pairs, normalized on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct ConvexPolygon {
    verts: Vec<Vec2>,
}

impl TryFrom<Vec<[f64; 2]>> for ConvexPolygon {
    type Error = Error;
    fn try_from(pts: Vec<[f64; 2]>) -> Result<Self> {
        let pts: Vec<Vec2> = pts.into_iter().map(Vec2::from).collect();
        ConvexPolygon::from_points(&pts)
    }
}

impl From<ConvexPolygon> for Vec<[f64; 2]> {
    fn from(k: ConvexPolygon) -> Self {
        k.verts.into_iter().map(<[f64; 2]>::from).collect()
    }
}

/// Unit direction on S¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction(Vec2);

impl Direction {
    pub fn new(d: Vec2) -> Result<Direction> {
        let n = d.norm();
        if !(n.is_finite() && n > 1e-30) {
            return Err(Error::ZeroDirection);
        }
        Ok(Direction(d / n))
    }

    pub fn from_angle(theta: f64) -> Direction {
        Direction(v(theta.cos(), theta.sin()))
    }

    pub fn unit(self) -> Vec2 {
        self.0
    }

    pub fn opposite(self) -> Direction {
        Direction(-self.0)
    }
}

/// Cross-product magnitudes at or below 1e-12·(bounding-box scale)²
/// count as collinear and collapse a vertex.
fn collinear_tol(pts: &[Vec2]) -> f64 {
    let mut lo = pts[0];
    let mut hi = pts[0];
    for &p in pts {
        lo = v(lo.x.min(p.x), lo.y.min(p.y));
        hi = v(hi.x.max(p.x), hi.y.max(p.y));
    }
    let scale = (hi.x - lo.x).max(hi.y - lo.y);
    1e-12 * scale * scale
}

impl ConvexPolygon {
    /// Convex hull of the input, CCW, collinear vertices removed.
    pub fn from_points(points: &[Vec2]) -> Result<ConvexPolygon> {
        if points.len() < 3 {
            return Err(Error::TooFewPoints {
                need: 3,
                got: points.len(),
            });
        }
        for p in points {
            if !p.is_finite() {
                return Err(Error::BadScalar {
                    what: "coordinate",
                    value: f64::NAN,
                });
            }
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
        pts.dedup();
        if pts.len() < 3 {
            return Err(Error::DegenerateHull);
        }
        let tol = collinear_tol(&pts);

        // Andrew monotone chain; strict turns only, so the result is
        // strictly convex.
        let chain = |iter: &mut dyn Iterator<Item = Vec2>| {
            let mut h: Vec<Vec2> = Vec::new();
            for p in iter {
                while h.len() >= 2 {
                    let a = h[h.len() - 2];
                    let b = h[h.len() - 1];
                    if (b - a).cross(p - a) <= tol {
                        h.pop();
                    } else {
                        break;
                    }
                }
                h.push(p);
            }
            h
        };
        let mut lower = chain(&mut pts.iter().copied());
        let mut upper = chain(&mut pts.iter().rev().copied());
        lower.pop();
        upper.pop();
        lower.append(&mut upper);
        if lower.len() < 3 {
            return Err(Error::DegenerateHull);
        }
        Ok(ConvexPolygon { verts: lower })
    }

    fn from_convex_ccw(mut verts: Vec<Vec2>) -> ConvexPolygon {
        // Rotate so the lexicographically smallest vertex leads.
        let start = verts
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.x, a.1.y).partial_cmp(&(b.1.x, b.1.y)).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        verts.rotate_left(start);
        ConvexPolygon { verts }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.verts
    }

    pub fn area(&self) -> f64 {
        let n = self.verts.len();
        let mut s = 0.0;
        for i in 0..n {
            s += self.verts[i].cross(self.verts[(i + 1) % n]);
        }
        0.5 * s
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.verts.len();
        (0..n)
            .map(|i| self.verts[i].dist(self.verts[(i + 1) % n]))
            .sum()
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.verts.len();
        let mut acc = Vec2::ZERO;
        let mut a = 0.0;
        for i in 0..n {
            let (p, q) = (self.verts[i], self.verts[(i + 1) % n]);
            let c = p.cross(q);
            acc = acc + (p + q) * c;
            a += c;
        }
        acc / (3.0 * a)
    }

    /// Largest vertex-pair distance; equals the maximal width for polytopes.
    pub fn diameter(&self) -> f64 {
        let n = self.verts.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(self.verts[i].dist(self.verts[j]));
            }
        }
        best
    }

    /// Support function h(K, d) = max over vertices of the dot product.
    pub fn support(&self, d: Direction) -> f64 {
        let u = d.unit();
        self.verts
            .iter()
            .map(|p| p.dot(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Width w(K, d) = h(K, d) + h(K, −d).
    pub fn width(&self, d: Direction) -> f64 {
        self.support(d) + self.support(d.opposite())
    }

    /// Mean width; evaluated in the plane as perimeter/π (Cauchy's
    /// surface formula, exact for convex bodies).
    pub fn mean_width(&self) -> f64 {
        self.perimeter() / std::f64::consts::PI
    }

    pub fn transform(&self, scale: f64, shift: Vec2) -> Result<ConvexPolygon> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::NonPositive {
                what: "scale",
                value: scale,
            });
        }
        // Positive scale plus shift preserves CCW order and the
        // lexicographic ordering of vertices.
        Ok(ConvexPolygon {
            verts: self.verts.iter().map(|&p| p * scale + shift).collect(),
        })
    }

    pub fn translate(&self, shift: Vec2) -> ConvexPolygon {
        self.transform(1.0, shift).unwrap()
    }

    pub fn rotate_about(&self, theta: f64, center: Vec2) -> ConvexPolygon {
        let verts = self
            .verts
            .iter()
            .map(|&p| center + (p - center).rotated(theta))
            .collect();
        ConvexPolygon::from_convex_ccw(verts)
    }

    pub fn bbox(&self) -> (Vec2, Vec2) {
        let mut lo = self.verts[0];
        let mut hi = self.verts[0];
        for &p in &self.verts {
            lo = v(lo.x.min(p.x), lo.y.min(p.y));
            hi = v(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    /// Edge halfplanes (n, c) with the polygon equal to {x : n·x ≤ c}.
    pub fn halfplanes(&self) -> Vec<(Vec2, f64)> {
        let n = self.verts.len();
        (0..n)
            .map(|i| {
                let e = self.verts[(i + 1) % n] - self.verts[i];
                let out = v(e.y, -e.x);
                (out, out.dot(self.verts[i]))
            })
            .collect()
    }

    /// Inclusion test with a signed-distance slack of 1e-12 times the
    /// body scale.
    pub fn contains(&self, p: Vec2) -> bool {
        let (lo, hi) = self.bbox();
        let tol = 1e-12 * (hi.x - lo.x).max(hi.y - lo.y).max(1.0);
        self.halfplanes()
            .iter()
            .all(|&(n, c)| (n.dot(p) - c) / n.norm() <= tol)
    }
}

/// Clips a CCW vertex loop by the halfplane {x : n·x ≤ c}
/// (Sutherland–Hodgman step). The result may be degenerate.
pub(crate) fn clip_halfplane(verts: &[Vec2], n: Vec2, c: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(verts.len() + 1);
    let k = verts.len();
    for i in 0..k {
        let cur = verts[i];
        let nxt = verts[(i + 1) % k];
        let dc = n.dot(cur) - c;
        let dn = n.dot(nxt) - c;
        if dc <= 0.0 {
            out.push(cur);
        }
        if (dc < 0.0) != (dn < 0.0) {
            let t = dc / (dc - dn);
            out.push(cur + (nxt - cur) * t);
        }
    }
    out
}

/// Intersection of a CCW loop with a set of halfplanes, renormalized to
/// a valid polygon; `None` when the intersection has no interior.
pub(crate) fn clip_to_polygon(verts: &[Vec2], halfplanes: &[(Vec2, f64)]) -> Option<ConvexPolygon> {
    let mut cur = verts.to_vec();
    for &(n, c) in halfplanes {
        cur = clip_halfplane(&cur, n, c);
        if cur.len() < 3 {
            return None;
        }
    }
    ConvexPolygon::from_points(&cur).ok()
}

/// Convex intersection K ∩ L; empty is a distinct value, never a
/// zero-area polygon.
pub fn intersect(k: &ConvexPolygon, l: &ConvexPolygon) -> Option<ConvexPolygon> {
    clip_to_polygon(k.vertices(), &l.halfplanes())
}

/// Minkowski combination (1−λ)K₀ + λK₁ by the linear-time merge of
/// edge vectors sorted by angle. λ = 0 and λ = 1 return the endpoints.
pub fn minkowski_comb(k0: &ConvexPolygon, k1: &ConvexPolygon, lambda: f64) -> Result<ConvexPolygon> {
    if !(0.0..=1.0).contains(&lambda) || !lambda.is_finite() {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    if lambda == 0.0 {
        return Ok(k0.clone());
    }
    if lambda == 1.0 {
        return Ok(k1.clone());
    }
    let scaled = |k: &ConvexPolygon, s: f64| -> Vec<Vec2> {
        let mut verts: Vec<Vec2> = k.vertices().iter().map(|&p| p * s).collect();
        // Start at the bottom-most (then left-most) vertex so both
        // edge sequences begin in the same angular half-turn.
        let start = verts
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.y, a.1.x).partial_cmp(&(b.1.y, b.1.x)).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        verts.rotate_left(start);
        verts
    };
    let a = scaled(k0, 1.0 - lambda);
    let b = scaled(k1, lambda);
    let (n, m) = (a.len(), b.len());
    let mut sum = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0usize, 0usize);
    while i < n || j < m {
        sum.push(a[i % n] + b[j % m]);
        if i >= n {
            j += 1;
        } else if j >= m {
            i += 1;
        } else {
            let ea = a[(i + 1) % n] - a[i % n];
            let eb = b[(j + 1) % m] - b[j % m];
            let c = ea.cross(eb);
            if c > 0.0 {
                i += 1;
            } else if c < 0.0 {
                j += 1;
            } else {
                i += 1;
                j += 1;
            }
        }
    }
    // Near-parallel edges leave nearly collinear vertices; hull
    // normalization removes them.
    ConvexPolygon::from_points(&sum)
}
