//! Exact Shapley values and the two sampling estimators for uncertain value
//! functions.
//!
//! For `N` players the Shapley value of player `i` is
//! `φ_i = Σ_{S ⊆ P∖{i}} w(|S|) [v(S ∪ {i}) − v(S)]` with
//! `w(m) = m! (N−m−1)! / N!`. When `v` is noisy, [`estimate_full`] averages
//! `K` realizations of every coalition and [`estimate_sampled`] draws `n`
//! coalitions per player from `w`, pooling all realizations by coalition.

mod analysis;
mod oracle;
mod report;

pub use analysis::{
    marginal_distribution, marginals_to_csv, multisets_to_csv, pareto_frontier, pareto_to_csv,
    value_multisets, Marginal, MarginalDistribution, ParetoRow,
};
pub use oracle::{deterministic_game, FnValue, MemoryStore, Oracle, ValueFunction, ValueStore};
pub use report::{PlayerInfo, PlayerReport, ShapleyReport};

use std::collections::BTreeMap;

use rand::seq::index::sample as sample_indices;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Coalition;
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::rng::{derive_named, rng};

/// Largest player count accepted by the enumerating estimators.
pub const DEFAULT_PLAYER_CAP: usize = 24;

/// Shapley weight `m! (N−m−1)! / N!` of a coalition of size `m`.
pub fn weight(m: usize, n: usize) -> Result<f64> {
    if n == 0 || m >= n {
        return Err(Error::Config(format!(
            "coalition size {m} out of range for {n} player(s)"
        )));
    }
    Ok(1.0 / (n as f64 * binomial(n - 1, m)))
}

/// Binomial coefficient as a float (exact while it fits in 53 bits).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (1..=k).fold(1.0, |c, j| c * (n - k + j) as f64 / j as f64)
}

/// Samples per player for sampling fraction `α`: `⌈α · 2^{N−1}⌉`.
pub fn alpha_to_n(alpha: f64, players: usize) -> Result<u64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if players == 0 || players > 64 {
        return Err(Error::Config(format!("unsupported player count {players}")));
    }
    let half = 2f64.powi(players as i32 - 1);
    Ok((alpha * half).ceil() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "full-K")]
    Full,
    #[serde(rename = "sampled-nK")]
    Sampled,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Full => "full-K",
            Method::Sampled => "sampled-nK",
        }
    }
}

/// Mean value per evaluated coalition.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueTable {
    /// Every coalition, indexed by mask.
    Dense(Vec<f64>),
    /// The coalitions that appear in a sampling pool.
    Sparse(BTreeMap<Coalition, f64>),
}

impl ValueTable {
    pub fn get(&self, s: Coalition) -> Option<f64> {
        match self {
            ValueTable::Dense(v) => v.get(s.mask() as usize).copied(),
            ValueTable::Sparse(m) => m.get(&s).copied(),
        }
    }

    /// `(coalition, value)` pairs in ascending mask order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = (Coalition, f64)> + '_> {
        match self {
            ValueTable::Dense(v) => {
                Box::new(v.iter().enumerate().map(|(m, &x)| (Coalition(m as u64), x)))
            }
            ValueTable::Sparse(m) => Box::new(m.iter().map(|(&s, &x)| (s, x))),
        }
    }
}

/// The result of one estimator run.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub method: Method,
    pub k: u32,
    pub n: u64,
    pub phi: Vec<f64>,
    /// Value-function samples the estimator consumes (`2^N K` or `2nNK`).
    pub evaluations: u64,
    pub table: ValueTable,
    pub marginals: MarginalDistribution,
}

fn check_players(players: usize, cap: usize) -> Result<()> {
    if players == 0 {
        return Err(Error::Config("a game needs at least one player".into()));
    }
    if players > cap {
        return Err(Error::ResourceCap(format!(
            "{players} players exceed the enumeration cap of {cap}"
        )));
    }
    Ok(())
}

/// `φ_i` from a complete table of coalition values, using pairwise summation.
pub fn shapley_from_table(values: &[f64]) -> Vec<f64> {
    let n = values.len().trailing_zeros() as usize;
    let weights: Vec<f64> = (0..n).map(|m| weight(m, n).unwrap()).collect();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let bit = 1usize << i;
            let terms: Vec<f64> = (0..values.len())
                .filter(|s| s & bit == 0)
                .map(|s| weights[s.count_ones() as usize] * (values[s | bit] - values[s]))
                .collect();
            pairwise_sum(&terms)
        })
        .collect()
}

/// Exact Shapley values of a deterministic game; every coalition is
/// evaluated once.
pub fn exact_shapley(oracle: &mut Oracle, cap: usize) -> Result<Estimate> {
    if !oracle.is_deterministic() {
        return Err(Error::Config(format!(
            "exact Shapley values need a deterministic value function; `{}` is stochastic",
            oracle.value_function().name()
        )));
    }
    let mut est = estimate_full(oracle, 1, cap)?;
    est.method = Method::Exact;
    Ok(est)
}

/// The sample-mean estimator: every coalition evaluated `k` times.
pub fn estimate_full(oracle: &mut Oracle, k: u32, cap: usize) -> Result<Estimate> {
    let n_players = oracle.players();
    check_players(n_players, cap)?;
    if k == 0 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    let size = 1usize << n_players;
    let reps = if oracle.is_deterministic() { 1 } else { k };
    let requests: Vec<(Coalition, u32)> = (0..reps)
        .flat_map(|rep| (0..size as u64).map(move |m| (Coalition(m), rep)))
        .collect();
    let values = oracle.evaluate(&requests)?;
    let means: Vec<f64> = if reps == 1 {
        values
    } else {
        (0..size)
            .map(|m| {
                let draws: Vec<f64> = (0..reps as usize).map(|r| values[r * size + m]).collect();
                pairwise_sum(&draws) / reps as f64
            })
            .collect()
    };
    let phi = shapley_from_table(&means);
    let marginals = MarginalDistribution::from_table(&means);
    Ok(Estimate {
        method: Method::Full,
        k,
        n: 1 << (n_players - 1),
        phi,
        evaluations: size as u64 * u64::from(k),
        table: ValueTable::Dense(means),
        marginals,
    })
}

/// Draw a coalition of the other players with probability `w(|S|)`: a size
/// uniform on `0..N`, then a uniform subset of that size.
fn draw_coalition(r: &mut crate::rng::Rng, player: usize, n: usize) -> Coalition {
    let m = r.random_range(0..n);
    let others: Vec<usize> = (0..n).filter(|&p| p != player).collect();
    Coalition::from_players(sample_indices(r, n - 1, m).into_iter().map(|j| others[j]))
}

/// The pooled sampling estimator with `n` coalition draws per player.
pub fn estimate_sampled(oracle: &mut Oracle, n: u64, k: u32) -> Result<Estimate> {
    let n_players = oracle.players();
    check_players(n_players, 63)?;
    if n == 0 || k == 0 {
        return Err(Error::Config("n and K must be at least 1".into()));
    }
    let seed = oracle.seed();
    let draws: Vec<Vec<Coalition>> = (0..n_players)
        .map(|i| {
            let mut r = rng(derive_named(seed, "draws", &[i as u64]));
            (0..n)
                .map(|_| draw_coalition(&mut r, i, n_players))
                .collect()
        })
        .collect();

    // Realizations are numbered per coalition in (player, draw, S before S∪{i}) order.
    let mut occurrences: BTreeMap<Coalition, u32> = BTreeMap::new();
    for (i, player_draws) in draws.iter().enumerate() {
        for &s in player_draws {
            for c in [s, s.with(i)] {
                *occurrences.entry(c).or_insert(0) += k;
            }
        }
    }
    let deterministic = oracle.is_deterministic();
    let requests: Vec<(Coalition, u32)> = occurrences
        .iter()
        .flat_map(|(&s, &count)| {
            (0..if deterministic { 1 } else { count }).map(move |rep| (s, rep))
        })
        .collect();
    let values = oracle.evaluate(&requests)?;

    let mut pooled: BTreeMap<Coalition, Vec<f64>> = BTreeMap::new();
    for (&(s, _), &v) in requests.iter().zip(&values) {
        pooled.entry(s).or_default().push(v);
    }
    let means: BTreeMap<Coalition, f64> = pooled
        .iter()
        .map(|(&s, vals)| (s, pairwise_sum(vals) / vals.len() as f64))
        .collect();

    let deltas: Vec<Vec<f64>> = draws
        .iter()
        .enumerate()
        .map(|(i, player_draws)| {
            player_draws
                .iter()
                .map(|&s| means[&s.with(i)] - means[&s])
                .collect()
        })
        .collect();
    let phi = deltas.iter().map(|d| pairwise_sum(d) / n as f64).collect();
    let marginals = MarginalDistribution::from_draws(&deltas);
    Ok(Estimate {
        method: Method::Sampled,
        k,
        n,
        phi,
        evaluations: 2 * n * n_players as u64 * u64::from(k),
        table: ValueTable::Sparse(means),
        marginals,
    })
}

/// Estimator settings shared by every experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(rename = "K", default = "one_u32")]
    pub k: u32,
    #[serde(default = "one_u32")]
    pub runs: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub player_cap: usize,
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

fn default_cap() -> usize {
    DEFAULT_PLAYER_CAP
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            alpha: 1.0,
            k: 1,
            runs: 1,
            seed: 0,
            player_cap: DEFAULT_PLAYER_CAP,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!(
                "estimator.alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("estimator.K must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::Config("estimator.runs must be at least 1".into()));
        }
        Ok(())
    }

    /// Seed of run `r` (0-based).
    pub fn run_seed(&self, run: u32) -> u64 {
        derive_named(self.seed, "run", &[u64::from(run)])
    }
}

/// One estimator run under `cfg`: exact for `α = 1` and a deterministic value
/// function, full enumeration for `α = 1` otherwise, sampled for `α < 1`.
pub fn estimate(oracle: &mut Oracle, cfg: &EstimatorConfig) -> Result<Estimate> {
    cfg.validate()?;
    if cfg.alpha == 1.0 {
        if oracle.is_deterministic() {
            let mut est = exact_shapley(oracle, cfg.player_cap)?;
            est.k = cfg.k;
            Ok(est)
        } else {
            estimate_full(oracle, cfg.k, cfg.player_cap)
        }
    } else {
        let n = alpha_to_n(cfg.alpha, oracle.players())?;
        estimate_sampled(oracle, n, cfg.k)
    }
}

#[cfg(test)]
mod tests;
