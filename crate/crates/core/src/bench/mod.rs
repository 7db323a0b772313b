//! Experiment harness: configuration, runners, and CSV/JSON artifacts.
//!
//! Every run writes its table (or the priced result for `price_once`) into an
//! output directory next to a `manifest.json` recording the SHA-256 of the
//! resolved configuration, the seeds used and the library version.
//!
//! CSV schemas, in column order:
//!
//! * `single_asset_sweep.csv`: `N, err_direct, err_fourier, ratio`
//! * `table1.csv`: `d, t_wall, t_rel, r_comp, eps_trunc, D_v, D_phi, eta,
//!   r_comp_with_checks, oracle_calls, price, phi_converged, v_converged, seed, error`
//! * `bond_dim_sweep.csv`: `beta, D_phi, mean_log_eps_trunc, min_log_eps_trunc,
//!   max_log_eps_trunc, n_repeats, n_converged`
//!
//! `t_wall` and `t_rel` are the only columns that vary between identical runs.

mod config;
mod runners;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{
    AlphaRule, CrossOverrides, Experiment, ExperimentConfig, GridOverrides, McOverrides,
    MethodName, ModelOverrides,
};
pub use runners::{
    derive_seed, run_bond_dim_sweep, run_price_once, run_single_asset_sweep, run_table1,
    BondSweepRow, RunOutput, SingleAssetRow, Table1Row,
};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: Experiment,
    pub config_sha256: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub library_version: String,
    pub outputs: Vec<String>,
}

pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let canonical = serde_json::to_string(cfg)?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the configured experiment and writes its artifacts into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Manifest> {
    cfg.validate()?;
    let experiment = cfg.experiment()?;
    fs::create_dir_all(out_dir)?;
    let file = |name: &str| -> PathBuf { out_dir.join(name) };
    let (outputs, seeds) = match experiment {
        Experiment::SingleAssetSweep => {
            let out = run_single_asset_sweep(cfg)?;
            write_csv(&file("single_asset_sweep.csv"), &out.rows)?;
            (vec!["single_asset_sweep.csv"], out.seeds)
        }
        Experiment::Table1 => {
            let out = run_table1(cfg)?;
            write_csv(&file("table1.csv"), &out.rows)?;
            (vec!["table1.csv"], out.seeds)
        }
        Experiment::BondDimSweep => {
            let out = run_bond_dim_sweep(cfg)?;
            write_csv(&file("bond_dim_sweep.csv"), &out.rows)?;
            (vec!["bond_dim_sweep.csv"], out.seeds)
        }
        Experiment::PriceOnce => {
            let (result, seeds) = run_price_once(cfg)?;
            fs::write(file("price.json"), serde_json::to_string_pretty(&result)?)?;
            (vec!["price.json"], seeds)
        }
    };
    let manifest = Manifest {
        experiment,
        config_sha256: config_hash(cfg)?,
        config: cfg.clone(),
        seeds,
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: outputs.into_iter().map(String::from).collect(),
    };
    fs::write(file("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}
