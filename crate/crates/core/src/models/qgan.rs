use crate::circuit::{Circuit, CoalitionGame};
use crate::error::Result;
use crate::value_functions::{GameCircuit, HellingerConfig, HellingerFidelity};

/// Trained generator parameters.
pub const QGAN_THETA: [f64; 9] = [
    -1.328, -0.155, 3.025, 1.424, 0.427, 1.620, 0.980, 1.495, 1.461,
];

/// The three leading H gates stay in every subcircuit.
pub const QGAN_REMAINING: [usize; 3] = [1, 3, 7];

/// The shipped 16-gate, 3-qubit generator: three RY layers with CX(0,1),
/// CX(1,2) entanglers, H gates at 1, 3 and 7.
pub fn qgan_circuit() -> Circuit {
    Circuit::from_json_str(include_str!("../../data/qgan_circuit.json"))
        .expect("shipped circuit parses")
}

pub fn qgan_game() -> GameCircuit {
    let game = CoalitionGame::with_remaining(qgan_circuit(), &QGAN_REMAINING)
        .expect("valid remaining set");
    GameCircuit::new(game, None).expect("no layers")
}

/// Hellinger-fidelity game of the generator at `theta`; any `theta` in `cfg` is replaced.
pub fn qgan_value(
    game: GameCircuit,
    theta: &[f64],
    mut cfg: HellingerConfig,
) -> Result<HellingerFidelity> {
    cfg.theta = theta.to_vec();
    HellingerFidelity::new(game, cfg)
}

/// Discretized log-normal target (μ = 1, σ = 1): the density at `0, …, 7`, renormalized.
pub fn lognormal_target() -> Vec<f64> {
    let density = |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            (-(x.ln() - 1.0).powi(2) / 2.0).exp() / x
        }
    };
    let masses: Vec<f64> = (0..8).map(|j| density(j as f64)).collect();
    let total: f64 = masses.iter().sum();
    masses.iter().map(|m| m / total).collect()
}
