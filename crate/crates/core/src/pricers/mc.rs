use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::result::{Diagnostics, Method, PricingResult};
use crate::error::{Error, Result};
use crate::market::{payoff_min_unchecked, MarketModel};

const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum McScheme {
    /// Sample `S_T` from its lognormal law in one step.
    #[default]
    TerminalExact,
    /// Forward Euler on `dS = r S dt + sigma S dW` with `steps` increments.
    EulerPath { steps: usize },
}

impl McScheme {
    pub fn label(&self) -> String {
        match self {
            McScheme::TerminalExact => "terminal_exact".into(),
            McScheme::EulerPath { steps } => format!("euler_path({steps})"),
        }
    }
}

#[derive(Clone, Copy)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    const EMPTY: Moments = Moments { n: 0, mean: 0.0, m2: 0.0 };

    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        Moments {
            n,
            mean: self.mean + delta * nb / n as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n as f64,
        }
    }
}

struct Sampler<'a> {
    model: &'a MarketModel,
    chol: Vec<Vec<f64>>,
    scheme: McScheme,
}

impl Sampler<'_> {
    fn correlate(&self, xi: &[f64], out: &mut [f64]) {
        for (i, row) in self.chol.iter().enumerate() {
            out[i] = row[..=i].iter().zip(xi).map(|(l, x)| l * x).sum();
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, xi: &mut [f64], w: &mut [f64], s: &mut [f64]) {
        let m = self.model;
        let t = m.maturity();
        match self.scheme {
            McScheme::TerminalExact => {
                xi.iter_mut().for_each(|x| *x = StandardNormal.sample(rng));
                self.correlate(xi, w);
                for j in 0..m.dim() {
                    let sig = m.sigma()[j];
                    s[j] = m.spot()[j]
                        * ((m.rates()[j] - 0.5 * sig * sig) * t + sig * t.sqrt() * w[j]).exp();
                }
            }
            McScheme::EulerPath { steps } => {
                let dt = t / steps as f64;
                let sq = dt.sqrt();
                s.copy_from_slice(m.spot());
                for _ in 0..steps {
                    xi.iter_mut().for_each(|x| *x = StandardNormal.sample(rng));
                    self.correlate(xi, w);
                    for j in 0..m.dim() {
                        s[j] *= 1.0 + m.rates()[j] * dt + m.sigma()[j] * sq * w[j];
                    }
                }
            }
        }
    }

    fn run_chunk(&self, seed: u64, chunk: u64, count: u64) -> Moments {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        let d = self.model.dim();
        let (mut xi, mut w, mut s) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
        let mut acc = Moments::EMPTY;
        for _ in 0..count {
            self.draw(&mut rng, &mut xi, &mut w, &mut s);
            acc.push(payoff_min_unchecked(&s, self.model.strike()));
        }
        acc
    }
}

/// Monte Carlo estimate of the discounted min-call price.
///
/// Samples are split into fixed chunks of `2^14`, each with its own ChaCha8
/// stream, and the chunk statistics are merged in chunk order, so the result
/// is bit-identical for a given seed regardless of the thread pool.
pub fn price_monte_carlo(
    m: &MarketModel,
    n_samples: u64,
    seed: u64,
    scheme: McScheme,
) -> Result<PricingResult> {
    let start = Instant::now();
    if n_samples < 2 {
        return Err(Error::config("n_samples", "need at least 2 samples"));
    }
    if let McScheme::EulerPath { steps } = scheme {
        if steps == 0 {
            return Err(Error::config("steps", "Euler scheme needs at least one step"));
        }
    }
    let sampler = Sampler {
        model: m,
        chol: m.cholesky(),
        scheme,
    };
    let chunks = n_samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| sampler.run_chunk(seed, c, CHUNK.min(n_samples - c * CHUNK)))
        .collect();
    let stats = parts.into_iter().fold(Moments::EMPTY, Moments::merge);
    let disc = m.discount(m.maturity());
    let sd = (stats.m2 / (stats.n - 1) as f64).max(0.0).sqrt();
    let std_error = disc * sd / (stats.n as f64).sqrt();
    Ok(PricingResult {
        price: disc * stats.mean,
        method: Method::MonteCarlo,
        wall_time_s: start.elapsed().as_secs_f64(),
        diagnostics: Diagnostics::MonteCarlo {
            n_samples,
            std_error,
            scheme: scheme.label(),
        },
    })
}
