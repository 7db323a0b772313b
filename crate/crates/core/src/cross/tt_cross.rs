//! Fixed-rank TT-cross with nested index sets.
//!
//! Bond `b` (between sites `b - 1` and `b`) carries a left set of prefix
//! multi-indices `left[b]` (length `b`) and a right set of suffix multi-indices
//! `right[b]` (length `d - b`). Site `k` is sampled on the fiber
//! `left[k] x {0..n_k} x right[k + 1]`.
//!
//! A left-to-right pass orthogonalizes each fiber unfolding, picks maxvol rows to
//! form `left[k + 1]` and stores the interpolating core `Q Q(I, :)^{-1}`; the last
//! site keeps the raw fiber. A right-to-left pass mirrors this on the transposed
//! unfoldings. Nestedness of both families makes the resulting train interpolate
//! the oracle on every fiber of the final pass.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{CrossConfig, CrossReport};
use super::maxvol::maxvol_full;
use crate::error::{Error, Result};
use crate::linalg::{thin_q, CMatrix, SINGULAR_COND};
use crate::tensor_train::{rand_sample_diff, Core, Oracle, TensorTrain};

// Fibers smaller than this are evaluated on the calling thread.
const PAR_FIBER_MIN: usize = 2048;

// Stream offset separating the index-set initialization RNG from the check samples.
const INIT_STREAM: u64 = 0x5eed_1de5;

type MultiIndex = Vec<usize>;

/// Nested index sets at the end of a TT-cross run.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossIndexSets {
    /// `left[b]`: prefix multi-indices for bond `b`, `b = 0..=d`.
    pub left: Vec<Vec<MultiIndex>>,
    /// `right[b]`: suffix multi-indices for bond `b`, `b = 0..=d`.
    pub right: Vec<Vec<MultiIndex>>,
}

impl CrossIndexSets {
    /// Every point sampled on the fibers that define the final train.
    pub fn interpolation_points(&self, shape: &[usize]) -> Vec<MultiIndex> {
        let mut pts = Vec::new();
        for (k, &n) in shape.iter().enumerate() {
            for pre in &self.left[k] {
                for i in 0..n {
                    for suf in &self.right[k + 1] {
                        pts.push(join(pre, i, suf));
                    }
                }
            }
        }
        pts
    }
}

/// Result of [`tt_cross`].
#[derive(Debug, Clone)]
pub struct CrossOutput {
    pub tt: TensorTrain,
    pub report: CrossReport,
    pub index_sets: CrossIndexSets,
}

/// Builds a tensor-train approximation of `oracle` on the grid `shape`.
///
/// Passes alternate left-to-right and right-to-left, starting from seeded nested
/// right index sets. After every pass the normalized one-norm difference is
/// sampled at `cfg.n_conv_samples` points; the run stops once it drops to
/// `cfg.eps_tol` or after `cfg.max_sweeps` passes. Non-convergence is reported,
/// not raised.
pub fn tt_cross<O: Oracle + ?Sized>(
    oracle: &O,
    shape: &[usize],
    cfg: &CrossConfig,
) -> Result<CrossOutput> {
    cfg.validate()?;
    if shape.is_empty() {
        return Err(Error::Domain("tt_cross needs at least one axis".into()));
    }
    if let Some(axis) = shape.iter().position(|&n| n == 0) {
        return Err(Error::Domain(format!("axis {axis} has size zero")));
    }
    let mut run = CrossRun::new(oracle, shape, cfg);
    run.init_right_sets();

    let mut cores: Vec<Option<Core>> = vec![None; shape.len()];
    let mut history = Vec::new();
    let mut converged = false;
    let mut final_diff = f64::INFINITY;

    for pass in 0..cfg.max_sweeps {
        if pass % 2 == 0 {
            run.left_to_right(&mut cores)?;
        } else {
            run.right_to_left(&mut cores)?;
        }
        let tt = TensorTrain::new(cores.iter().cloned().map(Option::unwrap).collect())?;
        run.charge(cfg.n_conv_samples)?;
        run.check_calls += cfg.n_conv_samples as u64;
        final_diff = rand_sample_diff(&tt, oracle, cfg.n_conv_samples, cfg.seed)?;
        history.push(final_diff);
        if final_diff <= cfg.eps_tol {
            converged = true;
            break;
        }
    }

    let tt = TensorTrain::new(cores.into_iter().map(Option::unwrap).collect())?;
    let total: f64 = shape.iter().map(|&n| n as f64).product();
    let report = CrossReport {
        converged,
        sweeps_used: history.len(),
        oracle_calls: run.calls,
        check_calls: run.check_calls,
        final_diff,
        compression_ratio: run.calls as f64 / total,
        compression_ratio_with_checks: (run.calls + run.check_calls) as f64 / total,
        diff_history: history,
        bonds: tt.bonds(),
    };
    Ok(CrossOutput {
        tt,
        report,
        index_sets: CrossIndexSets {
            left: run.left,
            right: run.right,
        },
    })
}

struct CrossRun<'a, O: ?Sized> {
    oracle: &'a O,
    shape: &'a [usize],
    cfg: &'a CrossConfig,
    ranks: Vec<usize>,
    left: Vec<Vec<MultiIndex>>,
    right: Vec<Vec<MultiIndex>>,
    calls: u64,
    check_calls: u64,
}

impl<'a, O: Oracle + ?Sized> CrossRun<'a, O> {
    fn new(oracle: &'a O, shape: &'a [usize], cfg: &'a CrossConfig) -> Self {
        let d = shape.len();
        let ranks = bond_ranks(shape, cfg.bond_dim);
        let mut left = vec![Vec::new(); d + 1];
        left[0] = vec![Vec::new()];
        let mut right = vec![Vec::new(); d + 1];
        right[d] = vec![Vec::new()];
        Self {
            oracle,
            shape,
            cfg,
            ranks,
            left,
            right,
            calls: 0,
            check_calls: 0,
        }
    }

    fn init_right_sets(&mut self) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(INIT_STREAM);
        for b in (1..self.shape.len()).rev() {
            let next = &self.right[b + 1];
            let candidates = self.shape[b] * next.len();
            let mut picks = rand::seq::index::sample(&mut rng, candidates, self.ranks[b]).into_vec();
            picks.sort_unstable();
            self.right[b] = picks
                .into_iter()
                .map(|c| join(&[], c / next.len(), &next[c % next.len()]))
                .collect();
        }
    }

    fn charge(&self, n: usize) -> Result<()> {
        if let Some(budget) = self.cfg.oracle_call_budget {
            let requested = self.calls + self.check_calls + n as u64;
            if requested > budget {
                return Err(Error::Budget { budget, requested });
            }
        }
        Ok(())
    }

    /// Oracle values on `left[k] x {0..n_k} x right[k + 1]`, ordered `(a, i, b)` row-major.
    fn fiber(&mut self, k: usize) -> Result<Vec<Complex64>> {
        let len = self.left[k].len() * self.shape[k] * self.right[k + 1].len();
        self.charge(len)?;
        self.calls += len as u64;
        let (pre, suf, n) = (&self.left[k], &self.right[k + 1], self.shape[k]);
        let eval = |p: usize| {
            let a = p / (n * suf.len());
            let i = (p / suf.len()) % n;
            let b = p % suf.len();
            let idx = join(&pre[a], i, &suf[b]);
            self.oracle.eval(&idx).map_err(|e| Error::Oracle {
                index: idx,
                message: e.0,
            })
        };
        if len >= PAR_FIBER_MIN {
            (0..len).into_par_iter().map(eval).collect()
        } else {
            (0..len).map(eval).collect()
        }
    }

    fn left_to_right(&mut self, cores: &mut [Option<Core>]) -> Result<()> {
        let d = self.shape.len();
        for k in 0..d {
            let fiber = self.fiber(k)?;
            let (rl, n, rr) = (self.left[k].len(), self.shape[k], self.right[k + 1].len());
            if k + 1 == d {
                cores[k] = Some(Core::new(rl, n, rr, fiber)?);
                break;
            }
            let unfolding = CMatrix::from_fn(rl * n, rr, |p, b| fiber[p * rr + b]);
            let mv = maxvol_full(&thin_q(unfolding), self.cfg.maxvol_slack)
                .and_then(|mv| check_cond(mv.cond).map(|_| mv))
                .map_err(|e| at_bond(e, k + 1))?;
            let coef = &mv.coefficients;
            cores[k] = Some(Core::from_fn(rl, n, rr, |a, i, b| coef[(a * n + i, b)])?);
            self.left[k + 1] = mv
                .rows
                .iter()
                .map(|&p| join(&self.left[k][p / n], p % n, &[]))
                .collect();
        }
        Ok(())
    }

    fn right_to_left(&mut self, cores: &mut [Option<Core>]) -> Result<()> {
        let d = self.shape.len();
        for k in (0..d).rev() {
            let fiber = self.fiber(k)?;
            let (rl, n, rr) = (self.left[k].len(), self.shape[k], self.right[k + 1].len());
            if k == 0 {
                cores[k] = Some(Core::new(rl, n, rr, fiber)?);
                break;
            }
            let unfolding = CMatrix::from_fn(n * rr, rl, |p, a| fiber[a * n * rr + p]);
            let mv = maxvol_full(&thin_q(unfolding), self.cfg.maxvol_slack)
                .and_then(|mv| check_cond(mv.cond).map(|_| mv))
                .map_err(|e| at_bond(e, k))?;
            let coef = &mv.coefficients;
            cores[k] = Some(Core::from_fn(rl, n, rr, |a, i, b| coef[(i * rr + b, a)])?);
            self.right[k] = mv
                .rows
                .iter()
                .map(|&p| join(&[], p / rr, &self.right[k + 1][p % rr]))
                .collect();
        }
        Ok(())
    }
}

/// Bond ranks `r_b = min(D, prod(n_0..n_{b-1}), prod(n_b..n_{d-1}))`, with `r_0 = r_d = 1`.
fn bond_ranks(shape: &[usize], bond_dim: usize) -> Vec<usize> {
    let d = shape.len();
    let sat = |it: &[usize]| {
        it.iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .unwrap_or(usize::MAX)
    };
    (0..=d)
        .map(|b| {
            if b == 0 || b == d {
                1
            } else {
                bond_dim.min(sat(&shape[..b])).min(sat(&shape[b..]))
            }
        })
        .collect()
}

fn check_cond(cond: f64) -> Result<()> {
    if cond > SINGULAR_COND {
        return Err(Error::Singular {
            bond: None,
            message: format!("pivot block condition estimate {cond:.3e}"),
        });
    }
    Ok(())
}

fn at_bond(e: Error, bond: usize) -> Error {
    match e {
        Error::Singular { message, .. } => Error::Singular {
            bond: Some(bond),
            message,
        },
        other => other,
    }
}

fn join(pre: &[usize], i: usize, suf: &[usize]) -> MultiIndex {
    let mut idx = Vec::with_capacity(pre.len() + 1 + suf.len());
    idx.extend_from_slice(pre);
    idx.push(i);
    idx.extend_from_slice(suf);
    idx
}
