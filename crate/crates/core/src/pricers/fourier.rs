//! Contour-integral pricing of the min option: dense nested sum and the
//! tensor-train inner product.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::{grid_admissible, GridSpec, PayoffKind};
use super::result::{Diagnostics, Method, PricingResult, TtDiagnostics};
use crate::cross::{tt_cross, CrossConfig, CrossOutput};
use crate::error::{Error, Result};
use crate::market::{GbmCharFn, MarketModel, MinPayoffTransform};

/// Default cap on the number of terms in the dense nested sum.
pub const DEFAULT_DENSE_TERMS_CAP: u128 = 100_000_000;

/// Largest grid for which the TT pricer computes its dense truncation reference.
pub const TRUNC_REFERENCE_CAP: u128 = 10_000_000;

/// Relative imaginary residue tolerated in the dense sum.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;

const CHUNK: usize = 4096;

/// How the TT pricer obtains the dense price used for its truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationReference {
    /// Compute the dense sum when `(N + 1)^d <= TRUNC_REFERENCE_CAP`.
    Auto,
    Skip,
    Price(f64),
}

/// Integrand pieces evaluated on stored grid indices.
pub(crate) struct ContourIntegrand {
    grid: GridSpec,
    cf: GbmCharFn,
    payoff: MinPayoffTransform,
}

impl ContourIntegrand {
    pub(crate) fn new(m: &MarketModel, grid: &GridSpec) -> Result<Self> {
        if grid.d != m.dim() {
            return Err(Error::Domain(format!(
                "grid has {} axes, model has {} assets",
                grid.d,
                m.dim()
            )));
        }
        let adm = grid_admissible(grid, PayoffKind::Min);
        if !adm.admissible {
            return Err(Error::StripViolation(adm.reasons.join("; ")));
        }
        Ok(Self {
            grid: *grid,
            cf: GbmCharFn::new(m),
            payoff: MinPayoffTransform::new(m.dim(), m.strike()),
        })
    }

    fn contour(&self, idx: &[usize], z: &mut Vec<Complex64>) {
        z.clear();
        z.extend(idx.iter().map(|&j| self.grid.contour(j)));
    }

    /// `phi_T(-z(idx))`.
    pub(crate) fn char_fn(&self, idx: &[usize]) -> Complex64 {
        let mut z = Vec::with_capacity(idx.len());
        self.contour(idx, &mut z);
        z.iter_mut().for_each(|x| *x = -*x);
        self.cf.eval(&z)
    }

    /// `v_min(z(idx))`.
    pub(crate) fn payoff(&self, idx: &[usize]) -> Complex64 {
        let mut z = Vec::with_capacity(idx.len());
        self.contour(idx, &mut z);
        self.payoff.eval(&z)
    }

    /// `eta^d / (2 pi)^d`.
    pub(crate) fn measure(&self) -> f64 {
        (self.grid.eta / (2.0 * PI)).powi(self.grid.d as i32)
    }
}

pub fn price_fourier_dense(m: &MarketModel, grid: &GridSpec) -> Result<PricingResult> {
    price_fourier_dense_with_cap(m, grid, DEFAULT_DENSE_TERMS_CAP)
}

/// `e^{-rT} (eta / 2 pi)^d sum_j phi_T(-z_j) v_min(z_j)` over all `(N + 1)^d` grid points.
pub fn price_fourier_dense_with_cap(
    m: &MarketModel,
    grid: &GridSpec,
    cap: u128,
) -> Result<PricingResult> {
    let start = Instant::now();
    let (expectation, terms) = dense_expectation(m, grid, cap)?;
    let residue = imag_residue(expectation);
    if residue > IMAG_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue {
            residue,
            tolerance: IMAG_RESIDUE_TOL,
        });
    }
    Ok(PricingResult {
        price: m.discount(m.maturity()) * expectation.re,
        method: Method::FourierDense,
        wall_time_s: start.elapsed().as_secs_f64(),
        diagnostics: Diagnostics::FourierDense {
            terms,
            imag_residue: residue,
        },
    })
}

/// Undiscounted contour sum `(eta / 2 pi)^d sum_j phi_T(-z_j) v_min(z_j)` and its term count.
pub fn dense_expectation(m: &MarketModel, grid: &GridSpec, cap: u128) -> Result<(Complex64, u128)> {
    let integrand = ContourIntegrand::new(m, grid)?;
    let terms = grid.total_points();
    if terms > cap {
        return Err(Error::Capacity {
            required: terms,
            allowed: cap,
        });
    }
    let total = terms as usize;
    let p = grid.points();
    let d = grid.d;
    let chunks = total.div_ceil(CHUNK);
    let partial: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut idx = vec![0usize; d];
            let mut sum = Complex64::new(0.0, 0.0);
            for lin in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let mut rest = lin;
                for slot in idx.iter_mut().rev() {
                    *slot = rest % p;
                    rest /= p;
                }
                sum += integrand.char_fn(&idx) * integrand.payoff(&idx);
            }
            sum
        })
        .collect();
    let sum: Complex64 = partial.iter().sum();
    Ok((sum * integrand.measure(), terms))
}

fn imag_residue(z: Complex64) -> f64 {
    let n = z.norm();
    if n == 0.0 {
        0.0
    } else {
        z.im.abs() / n
    }
}

pub fn price_fourier_tt(
    m: &MarketModel,
    grid: &GridSpec,
    cfg_phi: &CrossConfig,
    cfg_v: &CrossConfig,
) -> Result<PricingResult> {
    price_fourier_tt_with(m, grid, cfg_phi, cfg_v, TruncationReference::Auto)
}

/// Tensor-train version of the contour sum.
///
/// `|phi>` holds `phi_T(-z)` and `|v>` holds `conj(v_min(z))`, so that the
/// conjugate-linear inner product `<v|phi>` reproduces `sum v_min(z) phi_T(-z)`.
pub fn price_fourier_tt_with(
    m: &MarketModel,
    grid: &GridSpec,
    cfg_phi: &CrossConfig,
    cfg_v: &CrossConfig,
    reference: TruncationReference,
) -> Result<PricingResult> {
    let start = Instant::now();
    let (value, phi, payoff) = tt_expectation(m, grid, cfg_phi, cfg_v)?;
    let price = m.discount(m.maturity()) * value.re;
    let wall_time_s = start.elapsed().as_secs_f64();

    let dense_price = match reference {
        TruncationReference::Price(p) => Some(p),
        TruncationReference::Skip => None,
        TruncationReference::Auto if grid.total_points() <= TRUNC_REFERENCE_CAP => {
            Some(price_fourier_dense(m, grid)?.price)
        }
        TruncationReference::Auto => None,
    };
    let eps_trunc = dense_price.map(|p| (price - p).abs() / p.abs());
    Ok(PricingResult {
        price,
        method: Method::FourierTt,
        wall_time_s,
        diagnostics: Diagnostics::FourierTt(Box::new(TtDiagnostics {
            phi: phi.report,
            payoff: payoff.report,
            eps_trunc,
            dense_price,
            imag_residue: imag_residue(value),
        })),
    })
}

/// Builds both trains and returns the undiscounted contraction with the cross outputs.
pub fn tt_expectation(
    m: &MarketModel,
    grid: &GridSpec,
    cfg_phi: &CrossConfig,
    cfg_v: &CrossConfig,
) -> Result<(Complex64, CrossOutput, CrossOutput)> {
    let integrand = ContourIntegrand::new(m, grid)?;
    let shape = grid.shape();
    let phi_oracle = |idx: &[usize]| integrand.char_fn(idx);
    let v_oracle = |idx: &[usize]| integrand.payoff(idx).conj();
    let phi = tt_cross(&phi_oracle, &shape, cfg_phi)?;
    let payoff = tt_cross(&v_oracle, &shape, cfg_v)?;
    let inner = payoff.tt.inner(&phi.tt)?;
    Ok((inner * integrand.measure(), phi, payoff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::black_scholes_price;

    #[test]
    fn single_asset_matches_closed_form() {
        let m = MarketModel::benchmark(1, 0.0).unwrap();
        let exact = black_scholes_price(&m, 0.0).unwrap();
        let g = GridSpec::new(30, 0.5, 3.0, 1).unwrap();
        let v = price_fourier_dense(&m, &g).unwrap();
        assert!((v.price - exact).abs() / exact <= 1e-4);
        match v.diagnostics {
            Diagnostics::FourierDense { terms, imag_residue } => {
                assert_eq!(terms, 31);
                assert!(imag_residue <= IMAG_RESIDUE_TOL);
            }
            _ => panic!("wrong diagnostics"),
        }
    }

    #[test]
    fn capacity_error() {
        let m = MarketModel::benchmark(3, 0.5).unwrap();
        let g = GridSpec::table1(3).unwrap();
        assert!(matches!(
            price_fourier_dense_with_cap(&m, &g, 1000),
            Err(Error::Capacity { required: 132_651, allowed: 1000 })
        ));
    }

    #[test]
    fn inadmissible_grid_is_rejected() {
        let m = MarketModel::benchmark(2, 0.5).unwrap();
        let g = GridSpec::new(10, 0.5, 0.1, 2).unwrap();
        assert!(matches!(price_fourier_dense(&m, &g), Err(Error::StripViolation(_))));
        let g3 = GridSpec::new(10, 0.5, 1.0, 3).unwrap();
        assert!(price_fourier_dense(&m, &g3).is_err());
    }

    #[test]
    fn single_asset_tt_is_exact() {
        let m = MarketModel::benchmark(1, 0.0).unwrap();
        let g = GridSpec::new(50, 0.5, 3.0, 1).unwrap();
        let cfg = CrossConfig::with_bond_dim(1);
        let tt = price_fourier_tt(&m, &g, &cfg, &cfg).unwrap();
        let dense = price_fourier_dense(&m, &g).unwrap();
        assert!((tt.price - dense.price).abs() <= 1e-10 * dense.price);
        let diag = tt.tt().unwrap();
        assert!(diag.phi.converged && diag.payoff.converged);
        assert!(diag.eps_trunc.unwrap() <= 1e-10);
    }
}
