use serde::{Deserialize, Serialize};

use super::{Estimate, EstimatorConfig, Method};
use crate::error::{Error, Result};
use crate::numeric::{mean, std_dev};

/// Display metadata for one player.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerInfo {
    /// 1-based gate index in the original circuit, when players are gates.
    pub gate_index: Option<usize>,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerReport {
    /// 1-based player number.
    pub player: usize,
    pub gate_index: Option<usize>,
    pub gate_name: String,
    pub phi: f64,
    /// Population standard deviation of `phi` across runs.
    pub std_runs: f64,
    /// Spread of the marginal-contribution distribution (enumerating methods only).
    pub std_dist: Option<f64>,
}

/// Shapley values aggregated over independent estimator runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyReport {
    pub method: Method,
    #[serde(rename = "K")]
    pub k: u32,
    pub n: u64,
    pub alpha: f64,
    pub seeds: Vec<u64>,
    pub evaluations: u64,
    pub players: Vec<PlayerReport>,
}

impl ShapleyReport {
    pub fn from_runs(
        runs: &[Estimate],
        cfg: &EstimatorConfig,
        seeds: &[u64],
        info: &[PlayerInfo],
    ) -> Result<Self> {
        let first = runs
            .first()
            .ok_or_else(|| Error::Config("no estimator runs to aggregate".into()))?;
        let n_players = first.phi.len();
        if info.len() != n_players {
            return Err(Error::Dimension(format!(
                "{} player labels for {n_players} players",
                info.len()
            )));
        }
        let enumerated = first.method != Method::Sampled;
        let players = (0..n_players)
            .map(|i| {
                let phis: Vec<f64> = runs.iter().map(|r| r.phi[i]).collect();
                let dist: Vec<f64> = runs.iter().map(|r| r.marginals.std_dev(i)).collect();
                PlayerReport {
                    player: i + 1,
                    gate_index: info[i].gate_index,
                    gate_name: info[i].name.clone(),
                    phi: mean(&phis),
                    std_runs: std_dev(&phis),
                    std_dist: enumerated.then(|| mean(&dist)),
                }
            })
            .collect();
        Ok(ShapleyReport {
            method: first.method,
            k: first.k,
            n: first.n,
            alpha: cfg.alpha,
            seeds: seeds.to_vec(),
            evaluations: runs.iter().map(|r| r.evaluations).sum(),
            players,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// CSV `player,gate_index,gate_name,phi,std_runs,std_dist`: mean and one
    /// standard deviation over runs, ready for error-bar plots.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("player,gate_index,gate_name,phi,std_runs,std_dist\n");
        for p in &self.players {
            out.push_str(&format!(
                "{},{},{},{:?},{:?},{}\n",
                p.player,
                p.gate_index.map_or(String::new(), |g| g.to_string()),
                p.gate_name,
                p.phi,
                p.std_runs,
                p.std_dist.map_or(String::new(), |d| format!("{d:?}"))
            ));
        }
        out
    }

    /// Player with the largest `phi` (lowest number on ties).
    pub fn top_player(&self) -> Option<&PlayerReport> {
        self.players
            .iter()
            .reduce(|best, p| if p.phi > best.phi { p } else { best })
    }
}
