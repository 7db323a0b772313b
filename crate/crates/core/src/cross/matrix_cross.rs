use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::maxvol::{maxvol, DEFAULT_MAXVOL_SLACK};
use crate::error::{Error, Result};
use crate::linalg::{inverse_with_cond, thin_q, CMatrix, SINGULAR_COND};

#[derive(Debug, Clone)]
pub struct MatrixCrossOptions {
    pub max_iterations: usize,
    pub slack: f64,
}

impl Default for MatrixCrossOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10,
            slack: DEFAULT_MAXVOL_SLACK,
        }
    }
}

/// Row and column sets of a rank-`r` skeleton `M(:,J) M(I,J)^{-1} M(I,:)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCross {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub iterations: usize,
    pub oracle_calls: u64,
}

impl MatrixCross {
    /// Dense skeleton approximation `M(:,J) M(I,J)^{-1} M(I,:)`.
    pub fn reconstruct(
        &self,
        f: impl Fn(usize, usize) -> Complex64,
        n: usize,
        m: usize,
    ) -> Result<CMatrix> {
        let c = CMatrix::from_fn(n, self.cols.len(), |i, j| f(i, self.cols[j]));
        let r = CMatrix::from_fn(self.rows.len(), m, |i, j| f(self.rows[i], j));
        let pivot = c.select_rows(&self.rows);
        let (inv, _) = pivot_inverse(&pivot)?;
        Ok(c * inv * r)
    }
}

pub fn matrix_cross(
    f: impl Fn(usize, usize) -> Complex64,
    n: usize,
    m: usize,
    r: usize,
    seed: u64,
) -> Result<MatrixCross> {
    matrix_cross_with(f, n, m, r, seed, &MatrixCrossOptions::default())
}

/// Alternating maxvol on column and row blocks, starting from random columns.
pub fn matrix_cross_with(
    f: impl Fn(usize, usize) -> Complex64,
    n: usize,
    m: usize,
    r: usize,
    seed: u64,
    opts: &MatrixCrossOptions,
) -> Result<MatrixCross> {
    if r == 0 || r > n.min(m) {
        return Err(Error::Domain(format!(
            "cross rank {r} must lie in 1..={}",
            n.min(m)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols = rand::seq::index::sample(&mut rng, m, r).into_vec();
    let mut rows: Vec<usize> = Vec::new();
    let mut calls = 0u64;
    let mut iterations = 0;
    let suggest = |e: Error| match e {
        Error::Singular { message, .. } => Error::Singular {
            bond: None,
            message: format!("{message}; try a smaller rank than {r}"),
        },
        other => other,
    };

    while iterations < opts.max_iterations.max(1) {
        iterations += 1;
        let col_block = CMatrix::from_fn(n, r, |i, j| f(i, cols[j]));
        calls += (n * r) as u64;
        let new_rows = maxvol(&thin_q(col_block), opts.slack).map_err(suggest)?;

        let row_block_t = CMatrix::from_fn(m, r, |j, i| f(new_rows[i], j));
        calls += (m * r) as u64;
        let new_cols = maxvol(&thin_q(row_block_t), opts.slack).map_err(suggest)?;

        let stable = same_set(&new_rows, &rows) && same_set(&new_cols, &cols);
        rows = new_rows;
        cols = new_cols;
        if stable {
            break;
        }
    }

    let pivot = CMatrix::from_fn(r, r, |i, j| f(rows[i], cols[j]));
    calls += (r * r) as u64;
    pivot_inverse(&pivot).map_err(suggest)?;
    Ok(MatrixCross {
        rows,
        cols,
        iterations,
        oracle_calls: calls,
    })
}

fn pivot_inverse(pivot: &CMatrix) -> Result<(CMatrix, f64)> {
    match inverse_with_cond(pivot) {
        Some((inv, cond)) if cond <= SINGULAR_COND => Ok((inv, cond)),
        Some((_, cond)) => Err(Error::Singular {
            bond: None,
            message: format!("pivot block condition estimate {cond:.3e}"),
        }),
        None => Err(Error::Singular {
            bond: None,
            message: "pivot block is not invertible".into(),
        }),
    }
}

fn same_set(a: &[usize], b: &[usize]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    a == b
}
