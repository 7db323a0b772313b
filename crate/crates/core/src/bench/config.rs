use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::MarketModel;
use crate::pricers::{default_alpha, GridSpec, McScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    SingleAssetSweep,
    Table1,
    BondDimSweep,
    PriceOnce,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::SingleAssetSweep => "single_asset_sweep",
            Experiment::Table1 => "table1",
            Experiment::BondDimSweep => "bond_dim_sweep",
            Experiment::PriceOnce => "price_once",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOverrides {
    pub r: Option<f64>,
    pub sigma: Option<f64>,
    #[serde(rename = "T")]
    pub maturity: Option<f64>,
    pub s0: Option<f64>,
    pub strike: Option<f64>,
    pub beta: Option<Vec<f64>>,
    pub d: Option<Vec<usize>>,
}

/// Imaginary shift: a fixed value, or `over_d / d` per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaRule {
    Fixed(f64),
    OverD { over_d: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOverrides {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Explicit list of `N` values for the single-asset sweep.
    #[serde(rename = "N_list")]
    pub n_list: Option<Vec<usize>>,
    pub eta: Option<f64>,
    pub alpha: Option<AlphaRule>,
    /// Real-space half width for the direct method, in `sigma sqrt(T)` units.
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossOverrides {
    #[serde(rename = "D_v")]
    pub d_v: Option<usize>,
    #[serde(rename = "D_phi")]
    pub d_phi: Option<Vec<usize>>,
    pub eps_tol: Option<f64>,
    pub max_sweeps: Option<usize>,
    pub n_conv_samples: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub n_repeats: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McOverrides {
    pub n_samples: Option<u64>,
    pub seed: Option<u64>,
    /// Euler steps; absent means exact terminal sampling.
    pub euler_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    #[serde(alias = "bs")]
    BsExact,
    #[serde(alias = "direct")]
    DirectGrid,
    FourierDense,
    FourierTt,
    #[serde(alias = "mc")]
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub model: ModelOverrides,
    #[serde(default)]
    pub grid: GridOverrides,
    #[serde(default)]
    pub cross: CrossOverrides,
    #[serde(default)]
    pub mc: McOverrides,
    /// Engine for `price_once`.
    #[serde(default)]
    pub method: Option<MethodName>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<String>,
    /// Run independent rows concurrently.
    #[serde(default)]
    pub parallel: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment: Some(experiment),
            model: ModelOverrides::default(),
            grid: GridOverrides::default(),
            cross: CrossOverrides::default(),
            mc: McOverrides::default(),
            method: None,
            seed: None,
            output: None,
            parallel: false,
        }
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))
        }
    }

    pub fn experiment(&self) -> Result<Experiment> {
        self.experiment
            .ok_or_else(|| Error::config("experiment", "missing experiment name"))
    }

    pub fn base_seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let exp = self.experiment()?;
        if self.cross.n_repeats == Some(0) {
            return Err(Error::config("cross.n_repeats", "must be at least 1"));
        }
        if let Some(ds) = &self.model.d {
            if ds.is_empty() || ds.contains(&0) {
                return Err(Error::config("model.d", "must list dimensions >= 1"));
            }
            if exp == Experiment::Table1 && ds.iter().any(|&d| !(2..=15).contains(&d)) {
                return Err(Error::config("model.d", "table1 dimensions must lie in 2..=15"));
            }
            if exp == Experiment::SingleAssetSweep && ds != &[1] {
                return Err(Error::config("model.d", "single-asset sweep requires d = 1"));
            }
        }
        if let Some(b) = &self.model.beta {
            if b.is_empty() {
                return Err(Error::config("model.beta", "must not be empty"));
            }
        }
        if let Some(list) = &self.cross.d_phi {
            if list.is_empty() || list.contains(&0) {
                return Err(Error::config("cross.D_phi", "must list bond dimensions >= 1"));
            }
        }
        if self.cross.d_v == Some(0) {
            return Err(Error::config("cross.D_v", "must be at least 1"));
        }
        if self.mc.n_samples.is_some_and(|n| n < 2) {
            return Err(Error::config("mc.n_samples", "must be at least 2"));
        }
        if exp == Experiment::PriceOnce {
            if self.method.is_none() {
                return Err(Error::config("method", "price_once needs a method"));
            }
            if self.model.d.as_ref().is_some_and(|d| d.len() != 1) {
                return Err(Error::config("model.d", "price_once takes a single dimension"));
            }
            if self.model.beta.as_ref().is_some_and(|b| b.len() != 1) {
                return Err(Error::config("model.beta", "price_once takes a single beta"));
            }
        }
        Ok(())
    }

    pub(crate) fn model(&self, d: usize, beta: f64) -> Result<MarketModel> {
        let m = &self.model;
        MarketModel::homogeneous(
            d,
            m.r.unwrap_or(0.3),
            m.sigma.unwrap_or(0.5),
            beta,
            m.maturity.unwrap_or(1.0),
            m.s0.unwrap_or(100.0),
            m.strike.unwrap_or(100.0),
        )
        .map_err(|e| match e {
            Error::Config { .. } => e,
            other => Error::config("model", other.to_string()),
        })
    }

    pub(crate) fn grid(&self, d: usize, default_eta: f64) -> Result<GridSpec> {
        let alpha = match self.grid.alpha {
            None => default_alpha(d),
            Some(AlphaRule::Fixed(a)) => a,
            Some(AlphaRule::OverD { over_d }) => over_d / d as f64,
        };
        GridSpec::new(
            self.grid.n.unwrap_or(50),
            self.grid.eta.unwrap_or(default_eta),
            alpha,
            d,
        )
    }

    pub(crate) fn mc_scheme(&self) -> McScheme {
        match self.mc.euler_steps {
            Some(steps) => McScheme::EulerPath { steps },
            None => McScheme::TerminalExact,
        }
    }
}
