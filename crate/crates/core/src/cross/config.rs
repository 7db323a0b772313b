use serde::{Deserialize, Serialize};

use super::maxvol::DEFAULT_MAXVOL_SLACK;
use crate::error::{Error, Result};

/// Controls for a TT-cross run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrossConfig {
    /// Target rank on every internal bond (capped by the unfolding sizes).
    pub bond_dim: usize,
    /// Sampled normalized one-norm difference at which the run counts as converged.
    pub eps_tol: f64,
    /// Maximum number of directional passes.
    pub max_sweeps: usize,
    pub n_conv_samples: usize,
    pub seed: u64,
    pub maxvol_slack: f64,
    /// Hard cap on oracle evaluations, convergence checks included.
    pub oracle_call_budget: Option<u64>,
}

impl Default for CrossConfig {
    fn default() -> Self {
        Self {
            bond_dim: 10,
            eps_tol: 0.005,
            max_sweeps: 4,
            n_conv_samples: 50_000,
            seed: 0,
            maxvol_slack: DEFAULT_MAXVOL_SLACK,
            oracle_call_budget: None,
        }
    }
}

impl CrossConfig {
    pub fn with_bond_dim(bond_dim: usize) -> Self {
        Self {
            bond_dim,
            ..Self::default()
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn max_sweeps(mut self, sweeps: usize) -> Self {
        self.max_sweeps = sweeps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.bond_dim == 0 {
            return Err(Error::config("bond_dim", "must be at least 1"));
        }
        if !(self.eps_tol > 0.0) {
            return Err(Error::config("eps_tol", "must be positive"));
        }
        if self.max_sweeps == 0 {
            return Err(Error::config("max_sweeps", "must be at least 1"));
        }
        if self.n_conv_samples == 0 {
            return Err(Error::config("n_conv_samples", "must be at least 1"));
        }
        if !(self.maxvol_slack >= 0.0) {
            return Err(Error::config("maxvol_slack", "must be >= 0"));
        }
        Ok(())
    }
}

/// Summary of a TT-cross run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossReport {
    pub converged: bool,
    pub sweeps_used: usize,
    /// Oracle evaluations spent building cores.
    pub oracle_calls: u64,
    /// Oracle evaluations spent on convergence checks.
    pub check_calls: u64,
    pub final_diff: f64,
    /// `oracle_calls / prod(shape)`; convergence checks excluded.
    pub compression_ratio: f64,
    /// `(oracle_calls + check_calls) / prod(shape)`.
    pub compression_ratio_with_checks: f64,
    /// Sampled difference after each pass.
    pub diff_history: Vec<f64>,
    pub bonds: Vec<usize>,
}
