//! Quadrature kernels: adaptive Simpson on an interval and an adaptive
//! split-largest rule on triangle fans. Both are budgeted; blowing the
//! budget is an error, never a silent truncation.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Adaptive Simpson with Richardson acceptance |S2 − S1| ≤ 15 tol and a
/// hard cap on function evaluations.
pub(crate) fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_evals: usize,
) -> Result<f64> {
    let mut evals = 0usize;
    let mut eval = |x: f64| -> Result<f64> {
        evals += 1;
        if evals > max_evals {
            return Err(Error::QuadratureBudget {
                reached: evals,
                wanted: max_evals,
            });
        }
        Ok(f(x))
    };
    let fa = eval(a)?;
    let fb = eval(b)?;
    let c = 0.5 * (a + b);
    let fc = eval(c)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    simpson_step(&mut eval, a, b, fa, fb, fc, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    eval: &mut dyn FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let c = 0.5 * (a + b);
    let d = 0.5 * (a + c);
    let e = 0.5 * (c + b);
    let fd = eval(d)?;
    let fe = eval(e)?;
    let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let half = 0.5 * tol;
    Ok(simpson_step(eval, a, c, fa, fc, fd, left, half, depth - 1)?
        + simpson_step(eval, c, b, fc, fb, fe, right, half, depth - 1)?)
}

struct Leaf {
    tri: [Vec2; 3],
    /// Edge-midpoint rule summed over the four children; the reported
    /// value, one level finer than the leaf itself.
    fine: f64,
    /// Per-child edge-midpoint values, reused as the children's own
    /// coarse values when this leaf is split.
    child_coarse: [f64; 4],
    err: f64,
    alive: bool,
}

struct Candidate {
    err: f64,
    idx: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // Largest error first; ties broken toward the older leaf so the
        // refinement order is reproducible.
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

fn tri_area(t: &[Vec2; 3]) -> f64 {
    0.5 * (t[1] - t[0]).cross(t[2] - t[0]).abs()
}

fn children(t: &[Vec2; 3]) -> [[Vec2; 3]; 4] {
    let [a, b, c] = *t;
    let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
    [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
}

/// Degree-2 edge-midpoint rule.
fn mid_rule(f: &dyn Fn(Vec2) -> f64, tri: &[Vec2; 3]) -> f64 {
    let area = tri_area(tri);
    let mids = [
        (tri[0] + tri[1]) * 0.5,
        (tri[1] + tri[2]) * 0.5,
        (tri[2] + tri[0]) * 0.5,
    ];
    area * (f(mids[0]) + f(mids[1]) + f(mids[2])) / 3.0
}

/// Rate a leaf from its own rule value: the indicator is the gap to
/// the rule summed over its four children. Comparing two refinement
/// levels keeps the indicator honest on creases, where same-level
/// rules (midpoint vs centroid) err together and mute the difference.
fn rate(f: &dyn Fn(Vec2) -> f64, tri: [Vec2; 3], coarse: f64) -> Leaf {
    let mut child_coarse = [0.0f64; 4];
    for (slot, child) in child_coarse.iter_mut().zip(children(&tri)) {
        *slot = mid_rule(f, &child);
    }
    let fine: f64 = child_coarse.iter().sum();
    Leaf {
        tri,
        fine,
        child_coarse,
        err: (coarse - fine).abs(),
        alive: true,
    }
}

/// Integrate `f` over a union of triangles, repeatedly splitting the
/// leaf with the largest indicator into four via edge midpoints until
/// the summed indicators drop below `tol · max(1, |I|)`.
pub(crate) fn adaptive_triangles(
    f: &dyn Fn(Vec2) -> f64,
    tris: &[[Vec2; 3]],
    tol: f64,
    max_splits: usize,
) -> Result<f64> {
    struct State {
        leaves: Vec<Leaf>,
        heap: BinaryHeap<Candidate>,
        total: f64,
        total_err: f64,
    }
    impl State {
        fn push(&mut self, leaf: Leaf) {
            self.total += leaf.fine;
            self.total_err += leaf.err;
            self.heap.push(Candidate {
                err: leaf.err,
                idx: self.leaves.len(),
            });
            self.leaves.push(leaf);
        }
    }
    let mut st = State {
        leaves: Vec::with_capacity(tris.len() * 2),
        heap: BinaryHeap::new(),
        total: 0.0,
        total_err: 0.0,
    };
    for &tri in tris {
        let coarse = mid_rule(f, &tri);
        st.push(rate(f, tri, coarse));
    }

    let mut splits = 0usize;
    while st.total_err > tol * st.total.abs().max(1.0) {
        let Some(cand) = st.heap.pop() else {
            break;
        };
        if !st.leaves[cand.idx].alive {
            continue;
        }
        splits += 1;
        if splits > max_splits {
            return Err(Error::QuadratureBudget {
                reached: splits,
                wanted: max_splits,
            });
        }
        let parent = &mut st.leaves[cand.idx];
        parent.alive = false;
        st.total -= parent.fine;
        st.total_err -= parent.err;
        let tri = parent.tri;
        let coarses = parent.child_coarse;
        for (child, coarse) in children(&tri).into_iter().zip(coarses) {
            st.push(rate(f, child, coarse));
        }
    }

    // Recompute the sum over surviving leaves in creation order; the
    // incremental total above only steers refinement.
    Ok(st
        .leaves
        .iter()
        .filter(|l| l.alive)
        .map(|l| l.fine)
        .sum())
}
