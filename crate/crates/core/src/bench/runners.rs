use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Experiment, ExperimentConfig, MethodName};
use crate::cross::{tt_cross, CrossConfig};
use crate::error::{Error, Result};
use crate::market::black_scholes_price;
use crate::pricers::{
    price, price_direct_grid, price_fourier_dense, price_fourier_tt, price_monte_carlo,
    table1_params, ContourIntegrand, DirectGrid, GridSpec, McScheme, PricingMethod,
    PricingResult,
};

/// Rows of an experiment together with every seed that went into them.
#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub rows: Vec<T>,
    pub seeds: Vec<u64>,
}

/// SplitMix64 mix of a base seed with row coordinates.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut x = base;
    for &t in tags {
        x = x.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(t.wrapping_mul(0xa076_1d64_78bd_642f));
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        x ^= x >> 31;
    }
    x
}

fn map_rows<I, T, F>(parallel: bool, items: Vec<I>, f: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Sync + Send,
{
    if parallel {
        items.into_par_iter().map(f).collect()
    } else {
        items.into_iter().map(f).collect()
    }
}

fn expect(cfg: &ExperimentConfig, want: Experiment) -> Result<()> {
    cfg.validate()?;
    let got = cfg.experiment()?;
    if got != want {
        return Err(Error::config(
            "experiment",
            format!("expected `{}`, config says `{}`", want.as_str(), got.as_str()),
        ));
    }
    Ok(())
}

fn cross_config(cfg: &ExperimentConfig, bond_dim: usize, seed: u64, default_sweeps: usize) -> CrossConfig {
    let mut c = CrossConfig::with_bond_dim(bond_dim).seed(seed);
    c.max_sweeps = cfg.cross.max_sweeps.unwrap_or(default_sweeps);
    if let Some(e) = cfg.cross.eps_tol {
        c.eps_tol = e;
    }
    if let Some(n) = cfg.cross.n_conv_samples {
        c.n_conv_samples = n;
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleAssetRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub err_direct: f64,
    pub err_fourier: f64,
    pub ratio: f64,
}

/// Relative errors of direct integration and the Fourier sum against the closed form.
pub fn run_single_asset_sweep(cfg: &ExperimentConfig) -> Result<RunOutput<SingleAssetRow>> {
    expect(cfg, Experiment::SingleAssetSweep)?;
    let m = cfg.model(1, 0.0)?;
    let exact = black_scholes_price(&m, 0.0)?;
    let ns = cfg
        .grid
        .n_list
        .clone()
        .unwrap_or_else(|| (10..=100).step_by(2).collect());
    let eta = cfg.grid.eta.unwrap_or(0.5);
    let half_width = cfg.grid.half_width.unwrap_or(5.0);
    let rows = map_rows(cfg.parallel, ns, |n| -> Result<SingleAssetRow> {
        let direct = price_direct_grid(&m, &DirectGrid { points: n, half_width })?.price;
        let fourier = price_fourier_dense(&m, &cfg.grid_with_n(1, eta, n)?)?.price;
        let err_direct = (direct - exact).abs() / exact;
        let err_fourier = (fourier - exact).abs() / exact;
        Ok(SingleAssetRow {
            n,
            err_direct,
            err_fourier,
            ratio: err_direct / err_fourier,
        })
    });
    Ok(RunOutput {
        rows: rows.into_iter().collect::<Result<_>>()?,
        seeds: Vec::new(),
    })
}

impl ExperimentConfig {
    fn grid_with_n(&self, d: usize, eta: f64, n: usize) -> Result<GridSpec> {
        let mut g = self.grid(d, eta)?;
        g.n = n;
        g.validate()?;
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub d: usize,
    pub t_wall: Option<f64>,
    pub t_rel: Option<f64>,
    pub r_comp: Option<f64>,
    pub eps_trunc: Option<f64>,
    #[serde(rename = "D_v")]
    pub d_v: usize,
    #[serde(rename = "D_phi")]
    pub d_phi: usize,
    pub eta: f64,
    pub r_comp_with_checks: Option<f64>,
    pub oracle_calls: Option<u64>,
    pub price: Option<f64>,
    pub phi_converged: Option<bool>,
    pub v_converged: Option<bool>,
    pub seed: u64,
    pub error: Option<String>,
}

/// Tensor-train pricing across dimensions with the tabulated hyperparameters.
///
/// `t_rel` divides the TT wall time by the Monte Carlo time measured at `d = 2`
/// scaled linearly to `d`. Cross failures are recorded in the `error` column.
pub fn run_table1(cfg: &ExperimentConfig) -> Result<RunOutput<Table1Row>> {
    expect(cfg, Experiment::Table1)?;
    let ds = cfg.model.d.clone().unwrap_or_else(|| (2..=15).collect());
    let beta = cfg.model.beta.as_ref().map_or(0.5, |b| b[0]);
    let d_phi_for = |i: usize, d: usize| -> Result<usize> {
        match cfg.cross.d_phi.as_deref() {
            None => Ok(table1_params(d).d_phi),
            Some([one]) => Ok(*one),
            Some(list) if list.len() == ds.len() => Ok(list[i]),
            Some(_) => Err(Error::config("cross.D_phi", "give one value or one per dimension")),
        }
    };
    let base = cfg.base_seed();
    let mut jobs = Vec::with_capacity(ds.len());
    for (i, &d) in ds.iter().enumerate() {
        jobs.push((d, d_phi_for(i, d)?, derive_seed(base, &[d as u64])));
    }

    let mc_seed = cfg.mc.seed.unwrap_or(base);
    let mc = price_monte_carlo(
        &cfg.model(2, beta)?,
        cfg.mc.n_samples.unwrap_or(50_000_000),
        mc_seed,
        McScheme::TerminalExact,
    )?;
    let mc_time_d2 = mc.wall_time_s;

    let rows = map_rows(cfg.parallel, jobs.clone(), |(d, d_phi, seed)| {
        let params = table1_params(d);
        let d_v = cfg.cross.d_v.unwrap_or(params.d_v);
        let eta = cfg.grid.eta.unwrap_or(params.eta);
        let mut row = Table1Row {
            d,
            t_wall: None,
            t_rel: None,
            r_comp: None,
            eps_trunc: None,
            d_v,
            d_phi,
            eta,
            r_comp_with_checks: None,
            oracle_calls: None,
            price: None,
            phi_converged: None,
            v_converged: None,
            seed,
            error: None,
        };
        let attempt = || -> Result<PricingResult> {
            let m = cfg.model(d, beta)?;
            let grid = cfg.grid(d, eta)?;
            let cfg_phi = cross_config(cfg, d_phi, seed, 1);
            let cfg_v = cross_config(cfg, d_v, seed, 1);
            price_fourier_tt(&m, &grid, &cfg_phi, &cfg_v)
        };
        match attempt() {
            Ok(r) => {
                let tt = r.tt().expect("tensor-train diagnostics");
                let total = cfg
                    .grid(d, eta)
                    .map(|g| g.total_points() as f64)
                    .unwrap_or(f64::NAN);
                let calls = tt.phi.oracle_calls + tt.payoff.oracle_calls;
                let checks = tt.phi.check_calls + tt.payoff.check_calls;
                row.t_wall = Some(r.wall_time_s);
                row.t_rel = Some(r.wall_time_s / (mc_time_d2 * d as f64 / 2.0));
                row.r_comp = Some(calls as f64 / total);
                row.r_comp_with_checks = Some((calls + checks) as f64 / total);
                row.eps_trunc = tt.eps_trunc;
                row.oracle_calls = Some(calls);
                row.price = Some(r.price);
                row.phi_converged = Some(tt.phi.converged);
                row.v_converged = Some(tt.payoff.converged);
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        row
    });
    let mut seeds: Vec<u64> = jobs.iter().map(|j| j.2).collect();
    seeds.push(mc_seed);
    Ok(RunOutput { rows, seeds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondSweepRow {
    pub beta: f64,
    #[serde(rename = "D_phi")]
    pub d_phi: usize,
    pub mean_log_eps_trunc: f64,
    pub min_log_eps_trunc: f64,
    pub max_log_eps_trunc: f64,
    pub n_repeats: usize,
    pub n_converged: usize,
}

const LOG_EPS_FLOOR: f64 = 1e-16;

/// Mean `log10` truncation error over repeated seeds for each correlation and
/// characteristic-function bond dimension, with a fixed payoff bond dimension.
pub fn run_bond_dim_sweep(cfg: &ExperimentConfig) -> Result<RunOutput<BondSweepRow>> {
    expect(cfg, Experiment::BondDimSweep)?;
    let d = cfg.model.d.as_ref().map_or(3, |v| v[0]);
    let betas = cfg.model.beta.clone().unwrap_or_else(|| vec![0.2, 0.5, 1.0]);
    let d_phis = cfg.cross.d_phi.clone().unwrap_or_else(|| vec![2, 4, 6, 8, 10, 12]);
    let d_v = cfg.cross.d_v.unwrap_or(30);
    let base = cfg.base_seed();
    let seeds: Vec<u64> = match &cfg.cross.seeds {
        Some(s) if !s.is_empty() => s.clone(),
        _ => (0..cfg.cross.n_repeats.unwrap_or(20) as u64)
            .map(|rep| derive_seed(base, &[rep]))
            .collect(),
    };
    let eta = cfg.grid.eta.unwrap_or(table1_params(d).eta);
    let grid = cfg.grid(d, eta)?;

    let mut rows = Vec::with_capacity(betas.len() * d_phis.len());
    for &beta in &betas {
        let m = cfg.model(d, beta)?;
        let dense = price_fourier_dense(&m, &grid)?.price;
        let integrand = ContourIntegrand::new(&m, &grid)?;
        let shape = grid.shape();
        let scale = m.discount(m.maturity()) * integrand.measure();
        // (log10 eps per D_phi, converged flags per D_phi) for one seed
        let per_seed = map_rows(cfg.parallel, seeds.clone(), |seed| -> Result<Vec<(f64, bool)>> {
            let v_oracle = |idx: &[usize]| integrand.payoff(idx).conj();
            let phi_oracle = |idx: &[usize]| integrand.char_fn(idx);
            let v = tt_cross(&v_oracle, &shape, &cross_config(cfg, d_v, seed, 1))?;
            d_phis
                .iter()
                .map(|&d_phi| {
                    let phi = tt_cross(&phi_oracle, &shape, &cross_config(cfg, d_phi, seed, 1))?;
                    let p = scale * v.tt.inner(&phi.tt)?.re;
                    let eps = ((p - dense).abs() / dense.abs()).max(LOG_EPS_FLOOR);
                    Ok((eps.log10(), phi.report.converged && v.report.converged))
                })
                .collect()
        });
        let per_seed: Vec<Vec<(f64, bool)>> = per_seed.into_iter().collect::<Result<_>>()?;
        for (k, &d_phi) in d_phis.iter().enumerate() {
            let logs: Vec<f64> = per_seed.iter().map(|s| s[k].0).collect();
            rows.push(BondSweepRow {
                beta,
                d_phi,
                mean_log_eps_trunc: logs.iter().sum::<f64>() / logs.len() as f64,
                min_log_eps_trunc: logs.iter().copied().fold(f64::INFINITY, f64::min),
                max_log_eps_trunc: logs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                n_repeats: logs.len(),
                n_converged: per_seed.iter().filter(|s| s[k].1).count(),
            });
        }
    }
    Ok(RunOutput { rows, seeds })
}

/// Prices one model with the configured engine.
pub fn run_price_once(cfg: &ExperimentConfig) -> Result<(PricingResult, Vec<u64>)> {
    expect(cfg, Experiment::PriceOnce)?;
    let d = cfg.model.d.as_ref().map_or(1, |v| v[0]);
    let beta = cfg.model.beta.as_ref().map_or(0.5, |b| b[0]);
    let m = cfg.model(d, beta)?;
    let params = table1_params(d);
    let base = cfg.base_seed();
    let mut seeds = Vec::new();
    let method = match cfg.method.expect("validated") {
        MethodName::BsExact => PricingMethod::BsExact,
        MethodName::DirectGrid => PricingMethod::DirectGrid(DirectGrid {
            points: cfg.grid.n.unwrap_or(100),
            half_width: cfg.grid.half_width.unwrap_or(5.0),
        }),
        MethodName::FourierDense => PricingMethod::FourierDense(cfg.grid(d, params.eta)?),
        MethodName::FourierTt => {
            seeds.push(base);
            let d_phi = cfg.cross.d_phi.as_ref().map_or(params.d_phi, |v| v[0]);
            PricingMethod::FourierTt {
                grid: cfg.grid(d, params.eta)?,
                cfg_phi: cross_config(cfg, d_phi, base, 4),
                cfg_v: cross_config(cfg, cfg.cross.d_v.unwrap_or(params.d_v), base, 4),
            }
        }
        MethodName::MonteCarlo => {
            let seed = cfg.mc.seed.unwrap_or(base);
            seeds.push(seed);
            PricingMethod::MonteCarlo {
                n_samples: cfg.mc.n_samples.unwrap_or(1_000_000),
                seed,
                scheme: cfg.mc_scheme(),
            }
        }
    };
    Ok((price(&m, &method)?, seeds))
}
