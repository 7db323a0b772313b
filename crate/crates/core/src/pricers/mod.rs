//! Pricing engines for the European min-call on correlated GBM assets.

mod direct;
mod fourier;
mod grid;
mod mc;
mod result;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use direct::{price_direct_grid, DirectGrid};
pub use fourier::{
    dense_expectation, price_fourier_dense, price_fourier_dense_with_cap, price_fourier_tt,
    price_fourier_tt_with, tt_expectation, TruncationReference, DEFAULT_DENSE_TERMS_CAP,
    IMAG_RESIDUE_TOL, TRUNC_REFERENCE_CAP,
};
pub use grid::{
    default_alpha, grid_admissible, table1_params, Admissibility, GridSpec, PayoffKind,
    Table1Params,
};
pub use mc::{price_monte_carlo, McScheme};
pub(crate) use fourier::ContourIntegrand;
pub use result::{Diagnostics, Method, PricingResult, TtDiagnostics};

use crate::cross::CrossConfig;
use crate::error::Result;
use crate::market::{black_scholes_price, MarketModel};

/// A fully specified pricing engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PricingMethod {
    BsExact,
    DirectGrid(DirectGrid),
    FourierDense(GridSpec),
    FourierTt {
        grid: GridSpec,
        cfg_phi: CrossConfig,
        cfg_v: CrossConfig,
    },
    MonteCarlo {
        n_samples: u64,
        seed: u64,
        #[serde(default)]
        scheme: McScheme,
    },
}

pub fn price(m: &MarketModel, method: &PricingMethod) -> Result<PricingResult> {
    match method {
        PricingMethod::BsExact => {
            let start = std::time::Instant::now();
            let price = black_scholes_price(m, 0.0)?;
            Ok(PricingResult {
                price,
                method: Method::BsExact,
                wall_time_s: start.elapsed().as_secs_f64(),
                diagnostics: Diagnostics::Exact,
            })
        }
        PricingMethod::DirectGrid(g) => price_direct_grid(m, g),
        PricingMethod::FourierDense(g) => price_fourier_dense(m, g),
        PricingMethod::FourierTt { grid, cfg_phi, cfg_v } => {
            price_fourier_tt(m, grid, cfg_phi, cfg_v)
        }
        PricingMethod::MonteCarlo {
            n_samples,
            seed,
            scheme,
        } => price_monte_carlo(m, *n_samples, *seed, *scheme),
    }
}

/// One row of a strike sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrikeRow {
    pub method: String,
    pub d: usize,
    pub beta: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub price: f64,
    pub err_estimate: Option<f64>,
    pub wall_time_s: f64,
    pub oracle_calls: Option<u64>,
}

/// Prices `m` at each strike with `method`. `beta` is carried into the rows as a label.
pub fn strike_sweep(
    m: &MarketModel,
    beta: f64,
    strikes: &[f64],
    method: &PricingMethod,
) -> Result<Vec<StrikeRow>> {
    strikes
        .iter()
        .map(|&k| {
            let r = price(&m.with_strike(k)?, method)?;
            Ok(StrikeRow {
                method: r.method.as_str().to_string(),
                d: m.dim(),
                beta,
                k,
                price: r.price,
                err_estimate: r.err_estimate(),
                wall_time_s: r.wall_time_s,
                oracle_calls: r.oracle_calls(),
            })
        })
        .collect()
}

/// Writes rows with header `method,d,beta,K,price,err_estimate,wall_time_s,oracle_calls`.
pub fn write_strike_csv<W: Write>(rows: &[StrikeRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_is_stable() {
        let m = MarketModel::benchmark(1, 0.0).unwrap();
        let rows = strike_sweep(&m, 0.0, &[90.0, 110.0], &PricingMethod::BsExact).unwrap();
        let mut buf = Vec::new();
        write_strike_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "method,d,beta,K,price,err_estimate,wall_time_s,oracle_calls"
        );
        assert_eq!(text.lines().count(), 3);
        assert!(rows[0].price > rows[1].price);
    }

    #[test]
    fn method_round_trips_through_json() {
        let method = PricingMethod::MonteCarlo {
            n_samples: 10,
            seed: 1,
            scheme: McScheme::EulerPath { steps: 4 },
        };
        let s = serde_json::to_string(&method).unwrap();
        assert_eq!(serde_json::from_str::<PricingMethod>(&s).unwrap(), method);
    }
}
