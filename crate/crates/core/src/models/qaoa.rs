use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Coalition, CoalitionGame, Gate, GateKind, ParamExpr};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::rng;
use crate::shapley::ValueFunction;
use crate::simulator::bitstring;
use crate::value_functions::{EnergyValue, GameCircuit};

/// The shipped 7-vertex, 10-edge instance; its maximum cut is 9.
pub fn maxcut_graph() -> Graph {
    Graph::from_json_str(include_str!("../../data/maxcut_graph.json"))
        .expect("shipped graph parses")
}

/// H on every vertex qubit, then `depth` pairs of cost layer `theta[2i]` and
/// mixing layer `theta[2i + 1]`.
pub fn qaoa_circuit(graph: &Graph, depth: usize) -> Result<Circuit> {
    if depth == 0 {
        return Err(Error::Config("QAOA depth must be at least 1".into()));
    }
    let n = graph.nodes();
    let mut gates: Vec<Gate> = (0..n).map(|q| Gate::fixed(GateKind::H, &[q])).collect();
    for i in 0..depth {
        gates.push(Gate::rotation(
            GateKind::CostLayer,
            &[],
            ParamExpr::theta(2 * i),
        ));
        gates.push(Gate::rotation(
            GateKind::MixingLayer,
            &[],
            ParamExpr::theta(2 * i + 1),
        ));
    }
    Circuit::from_gates(n, 2 * depth, 0, gates)
}

/// QAOA game: the layers are players, the H gates remain.
pub fn qaoa_game(graph: &Graph, depth: usize) -> Result<GameCircuit> {
    let n = graph.nodes();
    let active = (n + 1..=n + 2 * depth).collect();
    GameCircuit::new(
        CoalitionGame::new(qaoa_circuit(graph, depth)?, active)?,
        Some(graph.clone()),
    )
}

/// Nelder-Mead settings. Coefficients are the standard reflect 1, expand 2,
/// contract 1/2, shrink 1/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "default_budget")]
    pub max_evaluations: usize,
    /// Edge length of the initial simplex.
    #[serde(default = "default_step")]
    pub initial_step: f64,
    /// Stop once the simplex's value spread falls below this.
    #[serde(default = "default_ftol")]
    pub ftol: f64,
}

fn default_budget() -> usize {
    500
}

fn default_step() -> f64 {
    0.2
}

fn default_ftol() -> f64 {
    1e-10
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_evaluations: default_budget(),
            initial_step: default_step(),
            ftol: default_ftol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// True when the budget ran out before the tolerance was met; `x` is then the best point seen.
    pub budget_exhausted: bool,
}

/// Minimize `f` from `start` with the Nelder-Mead simplex method. The budget is
/// checked between iterations, so the final iteration may exceed it by up to
/// `dim + 2` evaluations.
pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> Result<f64>,
    start: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Minimum> {
    let dim = start.len();
    if dim == 0 {
        return Err(Error::Config("nothing to optimize".into()));
    }
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evaluations: &mut usize| -> Result<f64> {
        *evaluations += 1;
        let v = f(x)?;
        if !v.is_finite() {
            return Err(Error::Numeric(format!("objective returned {v}")));
        }
        Ok(v)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), eval(start, &mut evaluations)?));
    for k in 0..dim {
        let mut x = start.to_vec();
        x[k] += cfg.initial_step;
        let v = eval(&x, &mut evaluations)?;
        simplex.push((x, v));
    }

    let mut budget_exhausted = true;
    while evaluations < cfg.max_evaluations {
        // stable sort keeps older vertices first among ties
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[dim].1 - simplex[0].1 < cfg.ftol {
            budget_exhausted = false;
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
            .collect();
        let toward = |t: f64, worst: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(worst)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let worst = simplex[dim].0.clone();
        let reflected = toward(-1.0, &worst);
        let fr = eval(&reflected, &mut evaluations)?;
        if fr < simplex[0].1 {
            let expanded = toward(-2.0, &worst);
            let fe = eval(&expanded, &mut evaluations)?;
            simplex[dim] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < simplex[dim].1 {
                let c = toward(-0.5, &worst);
                let v = eval(&c, &mut evaluations)?;
                (c, v)
            } else {
                let c = toward(0.5, &worst);
                let v = eval(&c, &mut evaluations)?;
                (c, v)
            };
            if fc < fr.min(simplex[dim].1) {
                simplex[dim] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best
                        .iter()
                        .zip(&vertex.0)
                        .map(|(b, v)| b + 0.5 * (v - b))
                        .collect();
                    let v = eval(&x, &mut evaluations)?;
                    *vertex = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Ok(Minimum {
        x,
        value,
        evaluations,
        budget_exhausted,
    })
}

/// Largest angle of the initial ramp.
const RAMP: f64 = 0.75;

#[derive(Debug, Clone, PartialEq)]
pub struct QaoaResult {
    pub theta: Vec<f64>,
    pub energy: f64,
    pub evaluations: usize,
    pub budget_exhausted: bool,
    /// Most probable bit string of the optimized state, wire 0 first.
    pub bitstring: String,
    /// Cut value of that bit string: the optimization goal.
    pub cut: usize,
}

/// Minimize the max-cut energy at the grand coalition.
///
/// The start point is a linear ramp, cost angles rising from 0 and mixing
/// angles rising from -0.75 over the layers as in a discretized anneal, with
/// seeded uniform jitter of ±0.1 on every angle.
pub fn optimize_qaoa(
    graph: &Graph,
    depth: usize,
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<QaoaResult> {
    let game = qaoa_game(graph, depth)?;
    let grand = Coalition::grand(game.players());
    let mut r = rng(seed);
    let start: Vec<f64> = (0..2 * depth)
        .map(|k| {
            let f = ((k / 2) as f64 + 0.5) / depth as f64;
            let ramp = if k % 2 == 0 {
                RAMP * f
            } else {
                -RAMP * (1.0 - f)
            };
            ramp + r.random_range(-0.1..0.1)
        })
        .collect();
    let energy_at = |theta: &[f64]| -> Result<f64> {
        EnergyValue::maxcut(game.clone(), graph, vec![], theta.to_vec())?.value(grand, 0)
    };
    let mut objective = |theta: &[f64]| energy_at(theta);
    let min = nelder_mead(&mut objective, &start, cfg)?;
    let probs = game.state(grand, &[], &min.x)?.probabilities();
    // first index among equally likely outcomes
    let mut best = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > probs[best] {
            best = i;
        }
    }
    Ok(QaoaResult {
        cut: graph.cut_value(best as u64),
        bitstring: bitstring(best, graph.nodes()),
        theta: min.x,
        energy: min.value,
        evaluations: min.evaluations,
        budget_exhausted: min.budget_exhausted,
    })
}
