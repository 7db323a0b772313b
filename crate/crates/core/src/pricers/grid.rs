use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform Fourier grid on the shifted contour, shared by every axis.
///
/// Each axis carries `n + 1` points `j = -n/2, ..., n/2` (stored as `0..=n`),
/// mapped to `z = eta * j + i * alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub eta: f64,
    pub alpha: f64,
    pub d: usize,
}

impl GridSpec {
    pub fn new(n: usize, eta: f64, alpha: f64, d: usize) -> Result<Self> {
        let g = Self { n, eta, alpha, d };
        g.validate()?;
        Ok(g)
    }

    /// `N = 50`, `alpha = 5 / d` (3 for a single asset) and the tabulated `eta` for `d`.
    pub fn table1(d: usize) -> Result<Self> {
        Self::new(50, table1_params(d).eta, default_alpha(d), d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return Err(Error::config("grid.n", format!("must be even and >= 2, got {}", self.n)));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::config("grid.eta", "must be positive"));
        }
        if !self.alpha.is_finite() {
            return Err(Error::config("grid.alpha", "must be finite"));
        }
        if self.d == 0 {
            return Err(Error::config("grid.d", "must be at least 1"));
        }
        Ok(())
    }

    /// Points per axis, `n + 1`.
    pub fn points(&self) -> usize {
        self.n + 1
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.points(); self.d]
    }

    /// `(n + 1)^d`, saturating.
    pub fn total_points(&self) -> u128 {
        (0..self.d).fold(1u128, |acc, _| acc.saturating_mul(self.points() as u128))
    }

    /// Real coordinate of stored index `idx`: `eta * (idx - n/2)`.
    #[inline]
    pub fn u(&self, idx: usize) -> f64 {
        self.eta * (idx as f64 - (self.n / 2) as f64)
    }

    #[inline]
    pub fn contour(&self, idx: usize) -> Complex64 {
        Complex64::new(self.u(idx), self.alpha)
    }
}

/// Tabulated cross hyperparameters for a basket of `d` assets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Params {
    pub eta: f64,
    pub d_v: usize,
    pub d_phi: usize,
}

pub fn table1_params(d: usize) -> Table1Params {
    let (eta, d_v, d_phi) = match d {
        0 | 1 => (0.5, 1, 1),
        2 => (0.5, 20, 10),
        3 => (0.4, 20, 10),
        4 | 5 => (0.3, 30, 15),
        6 => (0.2, 30, 15),
        7..=10 => (0.2, 40, 20),
        _ => (0.2, 50, 25),
    };
    Table1Params { eta, d_v, d_phi }
}

pub fn default_alpha(d: usize) -> f64 {
    if d <= 1 {
        3.0
    } else {
        5.0 / d as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffKind {
    Call,
    Min,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Admissibility {
    pub admissible: bool,
    pub reasons: Vec<String>,
}

/// Checks the contour shift against the payoff's strip of analyticity.
pub fn grid_admissible(grid: &GridSpec, payoff: PayoffKind) -> Admissibility {
    let mut reasons = Vec::new();
    if let Err(e) = grid.validate() {
        reasons.push(e.to_string());
    }
    match payoff {
        PayoffKind::Min => {
            if !(grid.alpha > 0.0) {
                reasons.push(format!("shift alpha = {} must be > 0", grid.alpha));
            }
            if !(grid.d as f64 * grid.alpha > 1.0) {
                reasons.push(format!(
                    "sum of shifts ≤ 1 (d * alpha = {})",
                    grid.d as f64 * grid.alpha
                ));
            }
        }
        PayoffKind::Call => {
            if grid.d != 1 {
                reasons.push(format!("call transform is single-asset, grid has d = {}", grid.d));
            }
            if !(grid.alpha > 1.0) {
                reasons.push(format!("call transform needs alpha > 1, got {}", grid.alpha));
            }
        }
    }
    Admissibility {
        admissible: reasons.is_empty(),
        reasons,
    }
}
