use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{inverse_with_cond, CMatrix, SINGULAR_COND};

pub const DEFAULT_MAXVOL_SLACK: f64 = 0.01;

/// Margin added to `1 + slack` so that unit entries perturbed by rounding never trigger a swap.
const ROUNDOFF: f64 = 1e-12;

/// Outcome of a maxvol search.
#[derive(Debug, Clone)]
pub struct Maxvol {
    /// Selected rows; `rows[j]` is the row pivoting column `j`.
    pub rows: Vec<usize>,
    /// `B = M * M(rows, :)^{-1}`; every entry satisfies `|B_ij| <= 1 + slack`.
    pub coefficients: CMatrix,
    /// Row swaps performed after the initial pivoting.
    pub swaps: usize,
    /// 1-norm condition estimate of the selected square block.
    pub cond: f64,
}

/// Rows of a tall `n x r` matrix spanning a quasi-maximal-volume `r x r` block.
pub fn maxvol(m: &CMatrix, slack: f64) -> Result<Vec<usize>> {
    maxvol_full(m, slack).map(|mv| mv.rows)
}

/// Maxvol returning the interpolation coefficients alongside the rows.
///
/// Starts from the pivot rows of Gaussian elimination with partial pivoting,
/// then swaps in the row holding the largest `|B_ij|` until all entries are at
/// most `1 + slack` (up to rounding). Each swap multiplies `|det M(rows, :)|` by `|B_ij| > 1 + slack`,
/// so the loop terminates; it is nevertheless guarded at `10 n` iterations.
pub fn maxvol_full(m: &CMatrix, slack: f64) -> Result<Maxvol> {
    let (n, r) = m.shape();
    if r == 0 || n < r {
        return Err(Error::Domain(format!(
            "maxvol needs a tall matrix with at least one column, got {n}x{r}"
        )));
    }
    if !(slack >= 0.0) {
        return Err(Error::Domain(format!("maxvol slack must be >= 0, got {slack}")));
    }
    let mut rows = initial_pivots(m)?;
    let threshold = 1.0 + slack + ROUNDOFF;
    let guard = 10 * n;
    let mut swaps = 0;

    loop {
        let (inv, _) = block_inverse(m, &rows)?;
        let mut b = m * inv;
        loop {
            let (i, j, big) = argmax_abs(&b);
            if big <= threshold {
                break;
            }
            if swaps >= guard {
                return Err(Error::Convergence { iterations: swaps });
            }
            swaps += 1;
            rows[j] = i;
            rank_one_update(&mut b, i, j);
        }
        // The rank-one updates drift; accept only if the freshly computed B agrees.
        let (inv, cond) = block_inverse(m, &rows)?;
        let exact = m * inv;
        let (_, _, big) = argmax_abs(&exact);
        if big <= threshold {
            return Ok(Maxvol {
                rows,
                coefficients: exact,
                swaps,
                cond,
            });
        }
        if swaps >= guard {
            return Err(Error::Convergence { iterations: swaps });
        }
    }
}

fn block_inverse(m: &CMatrix, rows: &[usize]) -> Result<(CMatrix, f64)> {
    let block = m.select_rows(rows);
    match inverse_with_cond(&block) {
        Some((inv, cond)) if cond <= SINGULAR_COND => Ok((inv, cond)),
        Some((_, cond)) => Err(Error::Singular {
            bond: None,
            message: format!("maxvol block condition estimate {cond:.3e}"),
        }),
        None => Err(Error::Singular {
            bond: None,
            message: "maxvol block is not invertible".into(),
        }),
    }
}

fn initial_pivots(m: &CMatrix) -> Result<Vec<usize>> {
    let (n, r) = m.shape();
    let mut work = m.clone();
    let scale = work.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Singular {
            bond: None,
            message: "matrix is zero or non-finite".into(),
        });
    }
    let mut used = vec![false; n];
    let mut rows = Vec::with_capacity(r);
    for col in 0..r {
        let (p, piv) = (0..n)
            .filter(|&i| !used[i])
            .map(|i| (i, work[(i, col)].norm()))
            .fold((usize::MAX, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv <= scale * 1e-12 {
            return Err(Error::Singular {
                bond: None,
                message: format!("rank deficient: column {col} has no usable pivot"),
            });
        }
        used[p] = true;
        rows.push(p);
        let pivot = work[(p, col)];
        for i in 0..n {
            if used[i] {
                continue;
            }
            let factor = work[(i, col)] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in col..r {
                let v = work[(p, c)];
                work[(i, c)] -= factor * v;
            }
        }
    }
    Ok(rows)
}

fn argmax_abs(b: &CMatrix) -> (usize, usize, f64) {
    let mut best = (0, 0, -1.0);
    for j in 0..b.ncols() {
        for i in 0..b.nrows() {
            let v = b[(i, j)].norm();
            if v > best.2 {
                best = (i, j, v);
            }
        }
    }
    best
}

// Replace row rows[j] by row i: B <- B - B[:, j] (B[i, :] - e_j) / B[i, j].
fn rank_one_update(b: &mut CMatrix, i: usize, j: usize) {
    let pivot = b[(i, j)];
    let col = b.column(j).into_owned();
    let mut row = b.row(i).into_owned();
    row[j] -= Complex64::new(1.0, 0.0);
    for c in 0..b.ncols() {
        let f = row[c] / pivot;
        if f == Complex64::new(0.0, 0.0) {
            continue;
        }
        for rr in 0..b.nrows() {
            b[(rr, c)] -= col[rr] * f;
        }
    }
}
