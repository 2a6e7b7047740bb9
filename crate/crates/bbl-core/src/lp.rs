//! Dense two-phase simplex for the small linear programs that piecewise
//! affine concave functions generate (at most a handful of variables and
//! a few dozen rows).
//!
//! Problem form: maximize c·x subject to Ax ≤ b and x ≥ 0. Callers shift
//! coordinates so the sign constraint is harmless. Bland's rule keeps the
//! pivoting finite even on degenerate vertices.

use crate::error::{Error, Result};

const EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 10_000;

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub value: f64,
    /// Solution vertex; callers in this crate only need the value.
    #[cfg_attr(not(test), allow(dead_code))]
    pub point: Vec<f64>,
}

/// Maximize `obj · x` over `rows[i] · x ≤ rhs[i]`, `x ≥ 0`.
pub(crate) fn lp_maximize(obj: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Result<LpSolution> {
    let n = obj.len();
    let m = rows.len();
    debug_assert!(rows.iter().all(|r| r.len() == n));
    debug_assert_eq!(rhs.len(), m);

    // Columns: n originals, m slacks, artificials for rows with b < 0.
    let art_rows: Vec<usize> = (0..m).filter(|&i| rhs[i] < 0.0).collect();
    let k = art_rows.len();
    let ncols = n + m + k;

    let mut tab = vec![vec![0.0f64; ncols + 1]; m];
    let mut basis = vec![0usize; m];
    let mut next_art = n + m;
    for i in 0..m {
        let flip = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            tab[i][j] = flip * rows[i][j];
        }
        tab[i][n + i] = flip;
        tab[i][ncols] = flip * rhs[i];
        if flip < 0.0 {
            tab[i][next_art] = 1.0;
            basis[i] = next_art;
            next_art += 1;
        } else {
            basis[i] = n + i;
        }
    }

    if k > 0 {
        // Phase 1: maximize minus the sum of artificials; feasible iff 0.
        let mut cost = vec![0.0; ncols];
        for c in cost.iter_mut().skip(n + m) {
            *c = -1.0;
        }
        let z = run_simplex(&mut tab, &mut basis, &cost, ncols)?;
        if z < -1e-7 {
            return Err(Error::LpInfeasible);
        }
        // Pivot leftover artificials out of the basis; a row with no
        // real column to pivot on is redundant and gets dropped.
        let mut i = 0;
        while i < tab.len() {
            if basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| tab[i][j].abs() > EPS) {
                    pivot(&mut tab, &mut basis, i, j);
                } else {
                    tab.remove(i);
                    basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
        for row in tab.iter_mut() {
            for j in n + m..ncols {
                row[j] = 0.0;
            }
        }
    }

    let mut cost = vec![0.0; ncols];
    cost[..n].copy_from_slice(obj);
    run_simplex(&mut tab, &mut basis, &cost, ncols)?;

    let mut point = vec![0.0; n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            point[bv] = tab[i][ncols];
        }
    }
    let value = obj.iter().zip(&point).map(|(c, x)| c * x).sum();
    Ok(LpSolution { value, point })
}

/// Iterate to optimality on a tableau already in canonical form for
/// `basis`; returns the attained objective value.
fn run_simplex(
    tab: &mut Vec<Vec<f64>>,
    basis: &mut Vec<usize>,
    cost: &[f64],
    ncols: usize,
) -> Result<f64> {
    // Objective row: z + Σ (c_B B⁻¹ A_j − c_j) x_j = c_B B⁻¹ b.
    let mut zrow: Vec<f64> = cost.iter().map(|&c| -c).collect();
    zrow.push(0.0);
    for (i, &bv) in basis.iter().enumerate() {
        if zrow[bv].abs() > 0.0 {
            let factor = zrow[bv];
            for j in 0..=ncols {
                zrow[j] -= factor * tab[i][j];
            }
        }
    }

    for _ in 0..MAX_PIVOTS {
        // Bland: smallest column with a strictly improving reduced cost.
        let Some(enter) = (0..ncols).find(|&j| zrow[j] < -EPS) else {
            return Ok(zrow[ncols]);
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..tab.len() {
            if tab[i][enter] > EPS {
                let ratio = tab[i][ncols] / tab[i][enter];
                let better = ratio < best_ratio - EPS
                    || (ratio < best_ratio + EPS
                        && leave.is_some_and(|l| basis[i] < basis[l]));
                if better {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(row) = leave else {
            return Err(Error::LpUnbounded);
        };
        pivot(tab, basis, row, enter);
        let factor = zrow[enter];
        if factor.abs() > 0.0 {
            for j in 0..=ncols {
                zrow[j] -= factor * tab[row][j];
            }
        }
    }
    Err(Error::LpStalled)
}

fn pivot(tab: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let ncols = tab[row].len();
    let inv = 1.0 / tab[row][col];
    for j in 0..ncols {
        tab[row][j] *= inv;
    }
    tab[row][col] = 1.0;
    for i in 0..tab.len() {
        if i != row && tab[i][col].abs() > 0.0 {
            let factor = tab[i][col];
            for j in 0..ncols {
                tab[i][j] -= factor * tab[row][j];
            }
            tab[i][col] = 0.0;
        }
    }
    basis[row] = col;
}
