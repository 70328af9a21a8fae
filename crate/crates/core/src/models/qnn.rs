use rand::Rng as _;

use super::Dataset;
use crate::circuit::{Circuit, Coalition, CoalitionGame};
use crate::error::{Error, Result};
use crate::rng::rng;
use crate::shapley::ValueFunction;
use crate::value_functions::GameCircuit;

/// Trained parameters of the shipped classifier.
pub const QNN_THETA: [f64; 4] = [3.860, -1.070, -1.583, 0.860];

/// Gates that stay in every subcircuit: the two leading H gates.
pub const QNN_REMAINING: [usize; 2] = [1, 3];

/// The shipped 19-gate classifier: an r=2 feature map followed by an RY/CX/RY
/// trainable block.
pub fn qnn_circuit() -> Circuit {
    Circuit::from_json_str(include_str!("../../data/qnn_circuit.json"))
        .expect("shipped circuit parses")
}

/// Classifier game with the leading H gates as remaining gates.
pub fn qnn_game() -> GameCircuit {
    let game =
        CoalitionGame::with_remaining(qnn_circuit(), &QNN_REMAINING).expect("valid remaining set");
    GameCircuit::new(game, None).expect("no layers")
}

/// One-shot accuracy: each point is classified by a single measurement of qubit 0.
pub struct QnnValue {
    game: GameCircuit,
    data: Dataset,
    theta: Vec<f64>,
}

impl QnnValue {
    pub fn new(game: GameCircuit, data: Dataset, theta: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Config("QNN needs a non-empty dataset".into()));
        }
        if let Some(x) = data.points.first() {
            game.game().circuit().check_bindings(x, &theta)?;
        }
        Ok(QnnValue { game, data, theta })
    }

    /// Probability that qubit 0 reads 1, per data point.
    pub fn one_probabilities(&self, s: Coalition) -> Result<Vec<f64>> {
        let circuit = self.game.subcircuit(s)?;
        self.data
            .points
            .iter()
            .map(|x| {
                let probs = crate::simulator::run(&circuit, x, &self.theta)?.probabilities();
                Ok(probs.iter().skip(1).step_by(2).sum())
            })
            .collect()
    }

    /// Expected one-shot accuracy: the mean Born probability of the correct label.
    pub fn expected_value(&self, s: Coalition) -> Result<f64> {
        let p1 = self.one_probabilities(s)?;
        let total: f64 = p1
            .iter()
            .zip(&self.data.labels)
            .map(|(p, &y)| if y == 1 { *p } else { 1.0 - p })
            .sum();
        Ok(total / p1.len() as f64)
    }
}

impl ValueFunction for QnnValue {
    fn name(&self) -> &str {
        "accuracy_qnn"
    }

    fn players(&self) -> usize {
        self.game.players()
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn value(&self, s: Coalition, seed: u64) -> Result<f64> {
        let p1 = self.one_probabilities(s)?;
        let mut r = rng(seed);
        let hits = p1
            .iter()
            .zip(&self.data.labels)
            .filter(|(p, &y)| {
                let bit = u8::from(r.random::<f64>() < **p);
                bit == y
            })
            .count();
        Ok(hits as f64 / p1.len() as f64)
    }
}
