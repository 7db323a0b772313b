use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::result::{Diagnostics, Method, PricingResult};
use crate::error::{Error, Result};
use crate::market::{payoff_call, MarketModel};

/// Real-space grid for direct integration over the terminal log-price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectGrid {
    pub points: usize,
    /// Half-width of the integration window in units of `sigma sqrt(T)`.
    pub half_width: f64,
}

impl DirectGrid {
    pub fn new(points: usize) -> Self {
        Self {
            points,
            half_width: 5.0,
        }
    }
}

/// Discounted trapezoid rule for `E[max(e^x - K, 0)]`, `x ~ N(ln S0 + (r - sigma^2/2) T, sigma^2 T)`.
pub fn price_direct_grid(m: &MarketModel, grid: &DirectGrid) -> Result<PricingResult> {
    let start = Instant::now();
    if m.dim() != 1 {
        return Err(Error::Domain(format!(
            "direct integration is single-asset, model has {} assets",
            m.dim()
        )));
    }
    if grid.points < 2 {
        return Err(Error::config("points", "need at least 2 grid points"));
    }
    if !(grid.half_width > 0.0) {
        return Err(Error::config("half_width", "must be positive"));
    }
    let mean = m.log_mean()[0];
    let sd = m.sigma()[0] * m.maturity().sqrt();
    let lo = mean - grid.half_width * sd;
    let dx = 2.0 * grid.half_width * sd / (grid.points - 1) as f64;
    let norm = 1.0 / (sd * (2.0 * PI).sqrt());
    let k = m.strike();
    let mut sum = 0.0;
    for i in 0..grid.points {
        let x = lo + dx * i as f64;
        let z = (x - mean) / sd;
        let weight = if i == 0 || i + 1 == grid.points { 0.5 } else { 1.0 };
        sum += weight * payoff_call(x.exp(), k) * norm * (-0.5 * z * z).exp();
    }
    let price = m.discount(m.maturity()) * sum * dx;
    Ok(PricingResult {
        price,
        method: Method::DirectGrid,
        wall_time_s: start.elapsed().as_secs_f64(),
        diagnostics: Diagnostics::DirectGrid {
            points: grid.points,
            half_width: grid.half_width,
        },
    })
}
