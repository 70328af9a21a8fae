//! Value functions that score coalition subcircuits.
//!
//! Each type here implements [`ValueFunction`] over a [`GameCircuit`]: the
//! coalition selects a subcircuit, QAOA layers are expanded against the
//! problem graph, and the resulting circuit is simulated or transpiled.

mod efficiency;
mod entangling;
mod expressibility;
mod hellinger;

pub use efficiency::{ExecConfig, ExecutionEfficiency};
pub use entangling::{
    meyer_wallach, meyer_wallach_purity, mw_distance, EntanglingCapability, EntanglingConfig,
};
pub use expressibility::{
    fidelity_bin, haar_bin_masses, kl_divergence, Expressibility, ExpressibilityConfig,
    FidelityMode,
};
pub use hellinger::{HellingerConfig, HellingerFidelity, Mitigation};

pub use crate::shapley::ValueFunction;

use std::f64::consts::TAU;

use rand::Rng as _;

use crate::circuit::{expand_layers, BoundCircuit, Circuit, Coalition, CoalitionGame};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{derive_named, rng};
use crate::simulator::{energy, run_bound, DiagonalHamiltonian, Statevector};

/// A coalition game together with the problem graph its layer gates refer to.
#[derive(Debug, Clone)]
pub struct GameCircuit {
    game: CoalitionGame,
    graph: Option<Graph>,
}

impl GameCircuit {
    pub fn new(game: CoalitionGame, graph: Option<Graph>) -> Result<Self> {
        // surface unresolvable layers at construction time
        expand_layers(game.circuit(), graph.as_ref())?;
        Ok(GameCircuit { game, graph })
    }

    pub fn game(&self) -> &CoalitionGame {
        &self.game
    }

    pub fn graph(&self) -> Option<&Graph> {
        self.graph.as_ref()
    }

    pub fn players(&self) -> usize {
        self.game.players()
    }

    pub fn qubits(&self) -> usize {
        self.game.circuit().qubits()
    }

    pub fn theta_dim(&self) -> usize {
        self.game.circuit().theta_dim()
    }

    pub fn feature_dim(&self) -> usize {
        self.game.circuit().feature_dim()
    }

    /// The coalition's primitive-gate subcircuit.
    pub fn subcircuit(&self, s: Coalition) -> Result<Circuit> {
        expand_layers(&self.game.subcircuit(s), self.graph.as_ref())
    }

    pub fn bind(&self, s: Coalition, x: &[f64], theta: &[f64]) -> Result<BoundCircuit> {
        self.subcircuit(s)?.bind(x, theta)
    }

    pub fn state(&self, s: Coalition, x: &[f64], theta: &[f64]) -> Result<Statevector> {
        run_bound(&self.bind(s, x, theta)?)
    }
}

/// `count` parameter vectors drawn uniformly from `[0, 2π)^dim`.
pub fn uniform_parameters(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| r.random_range(0.0..TAU)).collect())
        .collect()
}

/// Feature vector for parameter-sweeping value functions: the configured one,
/// or zeros when the circuit has no features and none was given.
pub(crate) fn features_for(game: &GameCircuit, x: &Option<Vec<f64>>) -> Result<Vec<f64>> {
    match x {
        Some(x) if x.len() == game.feature_dim() => Ok(x.clone()),
        Some(x) => Err(Error::Dimension(format!(
            "x has {} entries, circuit expects {}",
            x.len(),
            game.feature_dim()
        ))),
        None => Ok(vec![0.0; game.feature_dim()]),
    }
}

/// Parameter vector: the configured one or a seeded uniform draw.
pub(crate) fn theta_for(
    game: &GameCircuit,
    theta: &Option<Vec<f64>>,
    seed: u64,
) -> Result<Vec<f64>> {
    match theta {
        Some(t) if t.len() == game.theta_dim() => Ok(t.clone()),
        Some(t) => Err(Error::Dimension(format!(
            "theta has {} entries, circuit expects {}",
            t.len(),
            game.theta_dim()
        ))),
        None => {
            Ok(uniform_parameters(game.theta_dim(), 1, derive_named(seed, "theta", &[])).remove(0))
        }
    }
}

/// Fraction of predictions equal to their labels.
pub fn accuracy<T: PartialEq>(predictions: &[T], labels: &[T]) -> Result<f64> {
    if predictions.is_empty() || predictions.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let hits = predictions
        .iter()
        .zip(labels)
        .filter(|(p, l)| p == l)
        .count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Expected cost-Hamiltonian energy of the coalition's state.
pub struct EnergyValue {
    game: GameCircuit,
    hamiltonian: DiagonalHamiltonian,
    x: Vec<f64>,
    theta: Vec<f64>,
}

impl EnergyValue {
    /// Max-cut energy over `graph` (which must be the game's problem graph
    /// when the circuit has layers).
    pub fn maxcut(game: GameCircuit, graph: &Graph, x: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        let hamiltonian = DiagonalHamiltonian::maxcut(graph, game.qubits())?;
        EnergyValue::new(game, hamiltonian, x, theta)
    }

    pub fn new(
        game: GameCircuit,
        hamiltonian: DiagonalHamiltonian,
        x: Vec<f64>,
        theta: Vec<f64>,
    ) -> Result<Self> {
        if hamiltonian.qubits() != game.qubits() {
            return Err(Error::Dimension(format!(
                "Hamiltonian on {} qubits, circuit on {}",
                hamiltonian.qubits(),
                game.qubits()
            )));
        }
        game.game().circuit().check_bindings(&x, &theta)?;
        Ok(EnergyValue {
            game,
            hamiltonian,
            x,
            theta,
        })
    }
}

impl ValueFunction for EnergyValue {
    fn name(&self) -> &str {
        "energy"
    }

    fn players(&self) -> usize {
        self.game.players()
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn value(&self, s: Coalition, _seed: u64) -> Result<f64> {
        energy(
            &self.game.state(s, &self.x, &self.theta)?,
            &self.hamiltonian,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, GateKind, ParamExpr};

    #[test]
    fn accuracy_bounds() {
        assert_eq!(accuracy(&[1, 0, 1], &[1, 0, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 1], &[1, 0]).unwrap(), 0.0);
        assert!(accuracy::<u8>(&[], &[]).is_err());
    }

    #[test]
    fn energy_of_plus_states_and_layers() {
        let graph = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let mut gates: Vec<Gate> = (0..3).map(|q| Gate::fixed(GateKind::H, &[q])).collect();
        gates.push(Gate::rotation(
            GateKind::CostLayer,
            &[],
            ParamExpr::theta(0),
        ));
        gates.push(Gate::rotation(
            GateKind::MixingLayer,
            &[],
            ParamExpr::theta(1),
        ));
        let circuit = Circuit::from_gates(3, 2, 0, gates).unwrap();
        let game = CoalitionGame::new(circuit, vec![4, 5]).unwrap();
        let gc = GameCircuit::new(game, Some(graph.clone())).unwrap();
        let v = EnergyValue::maxcut(gc, &graph, vec![], vec![0.4, 0.9]).unwrap();
        // |+++⟩ cuts each edge with probability 1/2
        assert!((v.value(Coalition::EMPTY, 0).unwrap() + 1.0).abs() < 1e-12);
        // mixing alone leaves |+++⟩ invariant up to phase
        assert!((v.value(Coalition(0b10), 0).unwrap() + 1.0).abs() < 1e-12);
        let full = v.value(Coalition(0b11), 0).unwrap();
        assert!((-2.0 - 1e-12..=0.0).contains(&full));
    }
}
