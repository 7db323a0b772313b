//! Multi-asset geometric Brownian motion: closed forms, payoffs, characteristic
//! functions and payoff transforms on the shifted contour.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Correlated GBM under the risk-neutral measure plus a common strike.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketModel {
    rates: Vec<f64>,
    sigma: Vec<f64>,
    corr: Vec<Vec<f64>>,
    maturity: f64,
    spot: Vec<f64>,
    strike: f64,
}

impl MarketModel {
    pub fn new(
        rates: Vec<f64>,
        sigma: Vec<f64>,
        corr: Vec<Vec<f64>>,
        maturity: f64,
        spot: Vec<f64>,
        strike: f64,
    ) -> Result<Self> {
        let d = sigma.len();
        if d == 0 {
            return Err(Error::Domain("model needs at least one asset".into()));
        }
        if rates.len() != d || spot.len() != d || corr.len() != d {
            return Err(Error::Domain(format!(
                "inconsistent asset counts: {} rates, {} vols, {} spots, {}x? correlation",
                rates.len(),
                d,
                spot.len(),
                corr.len()
            )));
        }
        if let Some(row) = corr.iter().find(|row| row.len() != d) {
            return Err(Error::Domain(format!(
                "correlation row has {} entries, expected {d}",
                row.len()
            )));
        }
        if sigma.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Domain("volatilities must be positive".into()));
        }
        if spot.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Domain("spot prices must be positive".into()));
        }
        if !(maturity > 0.0) {
            return Err(Error::Domain("maturity must be positive".into()));
        }
        if !(strike > 0.0) {
            return Err(Error::Domain("strike must be positive".into()));
        }
        if rates.iter().any(|r| !r.is_finite()) {
            return Err(Error::Domain("rates must be finite".into()));
        }
        for (j, row) in corr.iter().enumerate() {
            if (row[j] - 1.0).abs() > 1e-12 {
                return Err(Error::Domain(format!(
                    "correlation diagonal entry {j} is {}, expected 1",
                    row[j]
                )));
            }
            for k in 0..j {
                if (row[k] - corr[k][j]).abs() > 1e-12 {
                    return Err(Error::Domain(format!(
                        "correlation matrix is not symmetric at ({j}, {k})"
                    )));
                }
            }
        }
        cholesky_lower(&corr)?;
        Ok(Self {
            rates,
            sigma,
            corr,
            maturity,
            spot,
            strike,
        })
    }

    /// Identical assets with common rate, volatility and spot, correlated by [`corr_matrix_plus`].
    pub fn homogeneous(
        d: usize,
        rate: f64,
        sigma: f64,
        beta: f64,
        maturity: f64,
        spot: f64,
        strike: f64,
    ) -> Result<Self> {
        Self::new(
            vec![rate; d],
            vec![sigma; d],
            corr_matrix_plus(d, beta)?,
            maturity,
            vec![spot; d],
            strike,
        )
    }

    /// `r = 0.3`, `sigma = 0.5`, `T = 1`, `S0 = K = 100` on every asset.
    pub fn benchmark(d: usize, beta: f64) -> Result<Self> {
        Self::homogeneous(d, 0.3, 0.5, beta, 1.0, 100.0, 100.0)
    }

    pub fn with_strike(&self, strike: f64) -> Result<Self> {
        let mut m = self.clone();
        if !(strike > 0.0) {
            return Err(Error::Domain("strike must be positive".into()));
        }
        m.strike = strike;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Discount rate; the first asset's rate when rates differ.
    pub fn rate(&self) -> f64 {
        self.rates[0]
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn corr(&self) -> &[Vec<f64>] {
        &self.corr
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn spot(&self) -> &[f64] {
        &self.spot
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    /// `exp(-r tau)`.
    pub fn discount(&self, tau: f64) -> f64 {
        (-self.rate() * tau).exp()
    }

    /// Mean of `ln S_T^j`: `ln S_0^j + r_j T - sigma_j^2 Sigma_jj T / 2`.
    pub fn log_mean(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|j| {
                self.spot[j].ln() + self.rates[j] * self.maturity
                    - 0.5 * self.sigma[j].powi(2) * self.corr[j][j] * self.maturity
            })
            .collect()
    }

    pub fn cholesky(&self) -> Vec<Vec<f64>> {
        cholesky_lower(&self.corr).expect("validated at construction")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ModelConfig =
            toml::from_str(s).map_err(|e| Error::config("model", e.to_string()))?;
        cfg.build()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: ModelConfig =
            serde_json::from_str(s).map_err(|e| Error::config("model", e.to_string()))?;
        cfg.build()
    }
}

/// Either one value shared by all assets or one value per asset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerAsset {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl PerAsset {
    fn expand(&self, d: usize, field: &str) -> Result<Vec<f64>> {
        match self {
            PerAsset::Scalar(x) => Ok(vec![*x; d]),
            PerAsset::Vector(v) if v.len() == d => Ok(v.clone()),
            PerAsset::Vector(v) => Err(Error::config(
                field,
                format!("expected {d} values, got {}", v.len()),
            )),
        }
    }
}

/// Serialized model description; `corr` wins over `beta` when both are given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub d: usize,
    pub r: PerAsset,
    pub sigma: PerAsset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corr: Option<Vec<Vec<f64>>>,
    #[serde(rename = "T")]
    pub maturity: f64,
    pub s0: PerAsset,
    pub strike: f64,
}

impl ModelConfig {
    pub fn build(&self) -> Result<MarketModel> {
        let d = self.d;
        if d == 0 {
            return Err(Error::config("d", "must be at least 1"));
        }
        let corr = match (&self.corr, self.beta) {
            (Some(c), _) => c.clone(),
            (None, Some(beta)) => {
                corr_matrix_plus(d, beta).map_err(|e| Error::config("beta", e.to_string()))?
            }
            (None, None) if d == 1 => vec![vec![1.0]],
            (None, None) => return Err(Error::config("corr", "give `beta` or `corr`")),
        };
        MarketModel::new(
            self.r.expand(d, "r")?,
            self.sigma.expand(d, "sigma")?,
            corr,
            self.maturity,
            self.s0.expand(d, "s0")?,
            self.strike,
        )
    }
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky_lower(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = a.len();
    let m = DMatrix::from_fn(d, d, |i, j| a[i][j]);
    let l = m.cholesky().ok_or(Error::NotPositiveDefinite)?.unpack();
    Ok((0..d).map(|i| (0..d).map(|j| l[(i, j)]).collect()).collect())
}

/// One-parameter correlation family: ones on the diagonal, `beta / (1 + beta)` elsewhere.
pub fn corr_matrix_plus(d: usize, beta: f64) -> Result<Vec<Vec<f64>>> {
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!("beta must lie in [0, 1], got {beta}")));
    }
    let off = beta / (1.0 + beta);
    Ok((0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { off }).collect())
        .collect())
}

/// Black-Scholes call value at time `t` for a single-asset model.
pub fn black_scholes_price(m: &MarketModel, t: f64) -> Result<f64> {
    if m.dim() != 1 {
        return Err(Error::Domain(format!(
            "Black-Scholes needs one asset, model has {}",
            m.dim()
        )));
    }
    let tau = m.maturity() - t;
    if !(tau > 0.0) {
        return Err(Error::Domain(format!(
            "valuation time {t} must precede maturity {}",
            m.maturity()
        )));
    }
    let (s0, k, r, sigma) = (m.spot()[0], m.strike(), m.rate(), m.sigma()[0]);
    let vol = sigma * tau.sqrt();
    let d1 = ((s0 / k).ln() + (r + 0.5 * sigma * sigma) * tau) / vol;
    let d2 = d1 - vol;
    Ok(s0 * norm_cdf(d1) - k * (-r * tau).exp() * norm_cdf(d2))
}

pub fn payoff_call(s_t: f64, strike: f64) -> f64 {
    (s_t - strike).max(0.0)
}

/// `max(min_j S_T^j - K, 0)`.
pub fn payoff_min(s_t: &[f64], strike: f64) -> Result<f64> {
    if s_t.is_empty() {
        return Err(Error::Domain("min payoff of an empty basket".into()));
    }
    Ok(payoff_min_unchecked(s_t, strike))
}

#[inline]
pub(crate) fn payoff_min_unchecked(s_t: &[f64], strike: f64) -> f64 {
    let low = s_t.iter().copied().fold(f64::INFINITY, f64::min);
    (low - strike).max(0.0)
}

/// A point `z_j = u_j + i alpha_j` on the shifted integration contour.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourPoint(pub Vec<Complex64>);

impl ContourPoint {
    pub fn new(u: &[f64], alpha: &[f64]) -> Self {
        Self(
            u.iter()
                .zip(alpha)
                .map(|(&u, &a)| Complex64::new(u, a))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    /// Checks `Im z_j > 0` for all `j` and `sum_j Im z_j > 1`.
    pub fn check_min_strip(&self) -> Result<()> {
        check_min_strip(&self.0)
    }
}

fn check_min_strip(z: &[Complex64]) -> Result<()> {
    if let Some(j) = z.iter().position(|z| !(z.im > 0.0)) {
        return Err(Error::StripViolation(format!(
            "Im z_{j} = {} must be > 0",
            z[j].im
        )));
    }
    let total: f64 = z.iter().map(|z| z.im).sum();
    if !(total > 1.0) {
        return Err(Error::StripViolation(format!(
            "sum of imaginary shifts {total} must be > 1"
        )));
    }
    Ok(())
}

/// Characteristic function of `ln S_T` with the model's parameters precomputed.
#[derive(Debug, Clone)]
pub struct GbmCharFn {
    mu: Vec<f64>,
    // sigma_j sigma_k Sigma_jk T
    quad: Vec<f64>,
    d: usize,
}

impl GbmCharFn {
    pub fn new(m: &MarketModel) -> Self {
        let d = m.dim();
        let mut quad = vec![0.0; d * d];
        for j in 0..d {
            for k in 0..d {
                quad[j * d + k] = m.sigma()[j] * m.sigma()[k] * m.corr()[j][k] * m.maturity();
            }
        }
        Self {
            mu: m.log_mean(),
            quad,
            d,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `exp(i sum_j z_j mu_j - 1/2 sum_jk sigma_j sigma_k Sigma_jk T z_j z_k)`.
    #[inline]
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        debug_assert_eq!(z.len(), self.d);
        let mut lin = Complex64::new(0.0, 0.0);
        let mut q = Complex64::new(0.0, 0.0);
        for j in 0..self.d {
            lin += z[j] * self.mu[j];
            let row = &self.quad[j * self.d..(j + 1) * self.d];
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..self.d {
                acc += z[k] * row[k];
            }
            q += z[j] * acc;
        }
        (I * lin - 0.5 * q).exp()
    }
}

/// Characteristic function `E[exp(i z . ln S_T)]`, entire in `z`.
pub fn char_fn_gbm(m: &MarketModel, z: &ContourPoint) -> Result<Complex64> {
    if z.dim() != m.dim() {
        return Err(Error::Domain(format!(
            "contour point has {} components, model has {} assets",
            z.dim(),
            m.dim()
        )));
    }
    Ok(GbmCharFn::new(m).eval(z.as_slice()))
}

/// Fourier transform of the call payoff in log-price, `-K^{iz+1} / (z (z - i))`, for `Im z > 1`.
pub fn payoff_fourier_call(z: Complex64, strike: f64) -> Result<Complex64> {
    if !(z.im > 1.0) {
        return Err(Error::StripViolation(format!(
            "call transform needs Im z > 1, got {}",
            z.im
        )));
    }
    if !(strike > 0.0) {
        return Err(Error::Domain("strike must be positive".into()));
    }
    let kpow = ((I * z + ONE) * strike.ln()).exp();
    Ok(-kpow / (z * (z - I)))
}

/// Fourier transform of the min-of-`d` call payoff.
///
/// `v(z) = K^{1 + i S} / ((-1)^{d+1} i^d (1 + i S) prod_j z_j)` with `S = sum_j z_j`,
/// valid for `Im z_j > 0` and `sum_j Im z_j > 1`. For `d = 1` this is the call
/// transform.
#[derive(Debug, Clone, Copy)]
pub struct MinPayoffTransform {
    ln_strike: f64,
    // (-1)^{d+1} i^d
    sign: Complex64,
}

impl MinPayoffTransform {
    pub fn new(d: usize, strike: f64) -> Self {
        let i_pow = match d % 4 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        };
        let sign = if d.is_multiple_of(2) { -i_pow } else { i_pow };
        Self {
            ln_strike: strike.ln(),
            sign,
        }
    }

    #[inline]
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut prod = ONE;
        for &zj in z {
            sum += zj;
            prod *= zj;
        }
        let w = ONE + I * sum;
        (w * self.ln_strike).exp() / (self.sign * w * prod)
    }
}

pub fn payoff_fourier_min(z: &ContourPoint, strike: f64) -> Result<Complex64> {
    if z.dim() == 0 {
        return Err(Error::Domain("min transform of an empty basket".into()));
    }
    if !(strike > 0.0) {
        return Err(Error::Domain("strike must be positive".into()));
    }
    z.check_min_strip()?;
    Ok(MinPayoffTransform::new(z.dim(), strike).eval(z.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(strike: f64, sigma: f64) -> MarketModel {
        MarketModel::homogeneous(1, 0.3, sigma, 0.0, 1.0, 100.0, strike).unwrap()
    }

    #[test]
    fn bs_zero_strike_limit() {
        let m = single(1e-9 * 100.0, 0.5);
        let v = black_scholes_price(&m, 0.0).unwrap();
        assert!((v - 100.0).abs() / 100.0 < 1e-6);
    }

    #[test]
    fn bs_deterministic_forward() {
        let m = single(100.0, 1e-8);
        let v = black_scholes_price(&m, 0.0).unwrap();
        let want = 100.0 - 100.0 * (-0.3f64).exp();
        assert!((v - want).abs() < 1e-6);
    }

    #[test]
    fn bs_domain_errors() {
        let m = single(100.0, 0.5);
        assert!(matches!(black_scholes_price(&m, 1.0), Err(Error::Domain(_))));
        let m2 = MarketModel::benchmark(2, 0.5).unwrap();
        assert!(black_scholes_price(&m2, 0.0).is_err());
    }

    #[test]
    fn payoffs() {
        assert_eq!(payoff_call(150.0, 100.0), 50.0);
        assert_eq!(payoff_call(100.0, 100.0), 0.0);
        assert_eq!(payoff_call(80.0, 100.0), 0.0);
        assert_eq!(payoff_min(&[120.0, 110.0, 130.0], 100.0).unwrap(), 10.0);
        assert_eq!(payoff_min(&[120.0, 90.0], 100.0).unwrap(), 0.0);
        for s in [50.0, 100.0, 137.5] {
            assert_eq!(payoff_min(&[s], 100.0).unwrap(), payoff_call(s, 100.0));
        }
        assert!(payoff_min(&[], 100.0).is_err());
    }

    #[test]
    fn char_fn_at_origin() {
        for d in 1..5 {
            let m = MarketModel::benchmark(d, 0.5).unwrap();
            let z = ContourPoint(vec![Complex64::new(0.0, 0.0); d]);
            assert_eq!(char_fn_gbm(&m, &z).unwrap(), ONE);
        }
    }

    #[test]
    fn char_fn_gaussian_modulus() {
        let m = single(100.0, 0.5);
        for u in [-3.0, -0.7, 0.4, 2.5, 6.0] {
            let phi = char_fn_gbm(&m, &ContourPoint::new(&[u], &[0.0])).unwrap();
            let want = (-0.5 * 0.25 * u * u).exp();
            assert!((phi.norm() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn char_fn_dim_mismatch() {
        let m = MarketModel::benchmark(2, 0.5).unwrap();
        assert!(char_fn_gbm(&m, &ContourPoint::new(&[1.0], &[0.0])).is_err());
    }

    #[test]
    fn call_transform_unit_strike() {
        let z = Complex64::new(0.7, 2.3);
        let v = payoff_fourier_call(z, 1.0).unwrap();
        let want = -ONE / (z * (z - I));
        assert!((v - want).norm() < 1e-15);
        assert!(matches!(
            payoff_fourier_call(Complex64::new(0.0, 0.5), 100.0),
            Err(Error::StripViolation(_))
        ));
    }

    #[test]
    fn min_transform_reduces_to_call() {
        for (u, a) in [(0.3, 1.5), (-2.0, 3.0), (5.0, 1.01)] {
            let z = Complex64::new(u, a);
            let call = payoff_fourier_call(z, 100.0).unwrap();
            let min = payoff_fourier_min(&ContourPoint(vec![z]), 100.0).unwrap();
            assert!((call - min).norm() <= 1e-12 * call.norm());
        }
    }

    #[test]
    fn min_transform_d2_unit() {
        let z = ContourPoint(vec![I, I]);
        let v = payoff_fourier_min(&z, 1.0).unwrap();
        assert!((v - ONE).norm() < 1e-15);
    }

    #[test]
    fn min_transform_strip_errors() {
        let err = payoff_fourier_min(&ContourPoint::new(&[0.0, 0.0], &[0.1, 0.1]), 100.0)
            .unwrap_err();
        assert!(err.to_string().contains("sum of imaginary shifts"));
        let err = payoff_fourier_min(&ContourPoint::new(&[0.0, 0.0], &[2.0, -0.1]), 100.0)
            .unwrap_err();
        assert!(err.to_string().contains("Im z_1"));
    }

    #[test]
    fn correlation_family() {
        let id = corr_matrix_plus(4, 0.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(id[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
        let c = corr_matrix_plus(3, 1.0).unwrap();
        assert_eq!(c[0][1], 0.5);
        assert_eq!(c[2][1], 0.5);
        for d in [1, 2, 5, 12] {
            let c = corr_matrix_plus(d, 0.5).unwrap();
            if d > 1 {
                assert!((c[0][d - 1] - 1.0 / 3.0).abs() < 1e-16);
            }
            assert!(cholesky_lower(&c).is_ok());
        }
        assert!(corr_matrix_plus(3, -0.1).is_err());
        assert!(corr_matrix_plus(3, 1.5).is_err());
    }

    #[test]
    fn model_validation() {
        let bad_corr = vec![vec![1.0, 1.2], vec![1.2, 1.0]];
        assert!(matches!(
            MarketModel::new(vec![0.3; 2], vec![0.5; 2], bad_corr, 1.0, vec![100.0; 2], 100.0),
            Err(Error::NotPositiveDefinite)
        ));
        let asym = vec![vec![1.0, 0.2], vec![0.3, 1.0]];
        assert!(MarketModel::new(vec![0.3; 2], vec![0.5; 2], asym, 1.0, vec![100.0; 2], 100.0)
            .is_err());
        assert!(MarketModel::homogeneous(1, 0.3, -0.5, 0.0, 1.0, 100.0, 100.0).is_err());
        assert!(MarketModel::homogeneous(1, 0.3, 0.5, 0.0, 0.0, 100.0, 100.0).is_err());
        assert!(MarketModel::homogeneous(1, 0.3, 0.5, 0.0, 1.0, 100.0, 0.0).is_err());
    }

    #[test]
    fn parses_toml_and_json() {
        let toml = r#"
            d = 3
            r = 0.3
            sigma = [0.5, 0.4, 0.3]
            beta = 0.5
            T = 1.0
            s0 = 100.0
            strike = 100.0
        "#;
        let m = MarketModel::from_toml_str(toml).unwrap();
        assert_eq!(m.dim(), 3);
        assert_eq!(m.sigma(), &[0.5, 0.4, 0.3]);
        assert!((m.corr()[0][2] - 1.0 / 3.0).abs() < 1e-15);

        let json = r#"{"d": 2, "r": 0.1, "sigma": 0.2, "corr": [[1.0, 0.3], [0.3, 1.0]],
                       "T": 2.0, "s0": [90.0, 110.0], "strike": 95.0}"#;
        let m = MarketModel::from_json_str(json).unwrap();
        assert_eq!(m.spot(), &[90.0, 110.0]);
        assert_eq!(m.corr()[1][0], 0.3);

        let err = MarketModel::from_json_str(r#"{"d": 2, "r": 0.1, "sigma": [0.2],
            "beta": 0.1, "T": 1.0, "s0": 1.0, "strike": 1.0}"#)
        .unwrap_err();
        assert!(err.to_string().contains("sigma"));
    }
}
