use serde::{Deserialize, Serialize};

use crate::cross::CrossReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BsExact,
    DirectGrid,
    FourierDense,
    FourierTt,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::BsExact => "bs_exact",
            Method::DirectGrid => "direct_grid",
            Method::FourierDense => "fourier_dense",
            Method::FourierTt => "fourier_tt",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtDiagnostics {
    pub phi: CrossReport,
    pub payoff: CrossReport,
    /// `|price_tt - price_dense| / |price_dense|`, when the dense reference was affordable.
    pub eps_trunc: Option<f64>,
    pub dense_price: Option<f64>,
    /// `|Im <v|phi>| / |<v|phi>|` of the contracted sum.
    pub imag_residue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostics {
    Exact,
    DirectGrid {
        points: usize,
        half_width: f64,
    },
    FourierDense {
        terms: u128,
        imag_residue: f64,
    },
    FourierTt(Box<TtDiagnostics>),
    MonteCarlo {
        n_samples: u64,
        std_error: f64,
        scheme: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingResult {
    pub price: f64,
    pub method: Method,
    pub wall_time_s: f64,
    pub diagnostics: Diagnostics,
}

impl PricingResult {
    /// Method-specific error estimate: MC standard error, TT truncation error
    /// (or the worse sampled cross difference when no dense reference exists).
    pub fn err_estimate(&self) -> Option<f64> {
        match &self.diagnostics {
            Diagnostics::MonteCarlo { std_error, .. } => Some(*std_error),
            Diagnostics::FourierTt(tt) => Some(
                tt.eps_trunc
                    .unwrap_or_else(|| tt.phi.final_diff.max(tt.payoff.final_diff)),
            ),
            _ => None,
        }
    }

    /// Oracle evaluations spent building both trains, convergence checks excluded.
    pub fn oracle_calls(&self) -> Option<u64> {
        match &self.diagnostics {
            Diagnostics::FourierTt(tt) => Some(tt.phi.oracle_calls + tt.payoff.oracle_calls),
            _ => None,
        }
    }

    pub fn std_error(&self) -> Option<f64> {
        match &self.diagnostics {
            Diagnostics::MonteCarlo { std_error, .. } => Some(*std_error),
            _ => None,
        }
    }

    pub fn tt(&self) -> Option<&TtDiagnostics> {
        match &self.diagnostics {
            Diagnostics::FourierTt(tt) => Some(tt),
            _ => None,
        }
    }
}
