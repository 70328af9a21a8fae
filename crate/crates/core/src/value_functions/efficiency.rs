use serde::{Deserialize, Serialize};

use super::{features_for, theta_for, GameCircuit, ValueFunction};
use crate::circuit::Coalition;
use crate::error::{Error, Result};
use crate::transpiler::{best_of_trials, HardwareTarget};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExecConfig {
    /// Built-in target name (`oslo`, `ehningen`, `lineN`) or a target file.
    #[serde(default = "default_target")]
    pub target: String,
    #[serde(default = "default_s1")]
    pub s1: f64,
    #[serde(default = "default_s2")]
    pub s2: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    /// Parameter binding used for transpilation; a seeded uniform draw if absent.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
}

fn default_target() -> String {
    "ehningen".into()
}

fn default_s1() -> f64 {
    -1.0
}

fn default_s2() -> f64 {
    -10.0
}

fn default_trials() -> usize {
    50
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            target: default_target(),
            s1: default_s1(),
            s2: default_s2(),
            trials: default_trials(),
            seed: 0,
            x: None,
            theta: None,
        }
    }
}

/// Estimated execution efficiency: the best penalty `n₁·s₁ + n₂·s₂` over
/// seeded transpilation trials of the coalition's subcircuit.
pub struct ExecutionEfficiency {
    game: GameCircuit,
    target: HardwareTarget,
    cfg: ExecConfig,
    x: Vec<f64>,
    theta: Vec<f64>,
}

impl ExecutionEfficiency {
    pub fn new(game: GameCircuit, cfg: ExecConfig) -> Result<Self> {
        if !(cfg.s1 < 0.0 && cfg.s2 < cfg.s1) {
            return Err(Error::Config(format!(
                "penalties need s2 < s1 < 0, got s1 = {}, s2 = {}",
                cfg.s1, cfg.s2
            )));
        }
        if cfg.trials == 0 {
            return Err(Error::Config("exec_efficiency needs trials ≥ 1".into()));
        }
        let target = HardwareTarget::resolve(&cfg.target)?;
        let x = features_for(&game, &cfg.x)?;
        let theta = theta_for(&game, &cfg.theta, cfg.seed)?;
        Ok(ExecutionEfficiency {
            game,
            target,
            cfg,
            x,
            theta,
        })
    }
}

impl ValueFunction for ExecutionEfficiency {
    fn name(&self) -> &str {
        "exec_efficiency"
    }

    fn players(&self) -> usize {
        self.game.players()
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn value(&self, s: Coalition, _seed: u64) -> Result<f64> {
        let bound = self.game.bind(s, &self.x, &self.theta)?;
        let (_, p) = best_of_trials(
            &bound,
            &self.target,
            self.cfg.trials,
            self.cfg.seed,
            self.cfg.s1,
            self.cfg.s2,
        )?;
        Ok(p)
    }
}
