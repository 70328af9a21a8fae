use serde::{Deserialize, Serialize};

use super::{GameCircuit, ValueFunction};
use crate::circuit::Coalition;
use crate::error::{Error, Result};
use crate::rng::derive;
use crate::simulator::{hellinger, sample, CalibrationMatrix, NoiseModel};

/// Readout-error mitigation applied to noisy counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Mitigation {
    None,
    /// Calibrate from the noise model's true flip rates.
    Exact,
    /// Calibrate once from `shots` noisy basis-state preparations.
    Sampled {
        shots: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HellingerConfig {
    #[serde(default = "default_shots")]
    pub shots: u64,
    /// Per-qubit `[p(0→1), p(1→0)]`; a single entry applies to every qubit.
    #[serde(default)]
    pub flips: Vec<[f64; 2]>,
    #[serde(default = "default_mitigation")]
    pub mitigation: Mitigation,
    #[serde(default)]
    pub x: Vec<f64>,
    #[serde(default)]
    pub theta: Vec<f64>,
    /// Seed of the calibration run.
    #[serde(default)]
    pub seed: u64,
}

fn default_shots() -> u64 {
    10_000
}

fn default_mitigation() -> Mitigation {
    Mitigation::None
}

impl Default for HellingerConfig {
    fn default() -> Self {
        HellingerConfig {
            shots: default_shots(),
            flips: Vec::new(),
            mitigation: default_mitigation(),
            x: Vec::new(),
            theta: Vec::new(),
            seed: 0,
        }
    }
}

impl HellingerConfig {
    pub fn noise_model(&self, qubits: usize) -> Result<NoiseModel> {
        match self.flips.len() {
            0 => Ok(NoiseModel::noiseless(qubits)),
            1 => NoiseModel::new(vec![self.flips[0]; qubits]),
            n if n == qubits => NoiseModel::new(self.flips.clone()),
            n => Err(Error::Dimension(format!(
                "{n} flip entries for {qubits} qubits"
            ))),
        }
    }
}

/// Hellinger fidelity between the exact output distribution of a coalition's
/// subcircuit and a noisy, optionally mitigated, finite-shot estimate of it.
pub struct HellingerFidelity {
    game: GameCircuit,
    cfg: HellingerConfig,
    noise: NoiseModel,
    calibration: Option<CalibrationMatrix>,
}

impl HellingerFidelity {
    pub fn new(game: GameCircuit, cfg: HellingerConfig) -> Result<Self> {
        if cfg.shots == 0 {
            return Err(Error::Config("hellinger needs shots ≥ 1".into()));
        }
        game.game().circuit().check_bindings(&cfg.x, &cfg.theta)?;
        let noise = cfg.noise_model(game.qubits())?;
        let calibration = match cfg.mitigation {
            Mitigation::None => None,
            Mitigation::Exact => Some(CalibrationMatrix::exact(&noise)),
            Mitigation::Sampled { shots } => {
                Some(CalibrationMatrix::calibrate(&noise, shots, cfg.seed)?)
            }
        };
        Ok(HellingerFidelity {
            game,
            cfg,
            noise,
            calibration,
        })
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }
}

impl ValueFunction for HellingerFidelity {
    fn name(&self) -> &str {
        "hellinger"
    }

    fn players(&self) -> usize {
        self.game.players()
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn value(&self, s: Coalition, seed: u64) -> Result<f64> {
        let ideal = self
            .game
            .state(s, &self.cfg.x, &self.cfg.theta)?
            .probabilities();
        let record = sample(&ideal, self.cfg.shots, derive(seed, &[0]))?;
        let noisy = self.noise.apply(&record, derive(seed, &[1]))?;
        let measured = match &self.calibration {
            Some(cal) => cal.mitigate_record(&noisy)?,
            None => noisy.frequencies(),
        };
        Ok(hellinger(&measured, &ideal))
    }
}
