use std::cmp::Ordering;

use num_complex::Complex64 as C;
use rayon::prelude::*;

use super::svm::train_svm;
use super::Dataset;
use crate::circuit::{Circuit, Coalition, Gate, GateKind, ParamExpr};
use crate::error::{Error, Result};
use crate::shapley::ValueFunction;
use crate::simulator::{run, Statevector};
use crate::value_functions::{accuracy, GameCircuit};

/// Default SVM regularization.
pub const DEFAULT_C: f64 = 1.0;

/// Two-qubit second-order Pauli-Z evolution circuit with `reps` repetitions of
/// `H q0, P(2x0) q0, H q1, P(2x1) q1, CX(0,1), P(2(π-x0)(π-x1)) q1, CX(0,1)`.
pub fn feature_map(reps: usize) -> Circuit {
    let phi = |i: usize| ParamExpr::feature(i).scaled(2.0);
    let interaction: ParamExpr = "2 * (pi - x[0]) * (pi - x[1])"
        .parse()
        .expect("valid expression");
    let mut gates = Vec::with_capacity(7 * reps);
    for _ in 0..reps {
        gates.push(Gate::fixed(GateKind::H, &[0]));
        gates.push(Gate::rotation(GateKind::P, &[0], phi(0)));
        gates.push(Gate::fixed(GateKind::H, &[1]));
        gates.push(Gate::rotation(GateKind::P, &[1], phi(1)));
        gates.push(Gate::fixed(GateKind::CX, &[0, 1]));
        gates.push(Gate::rotation(GateKind::P, &[1], interaction.clone()));
        gates.push(Gate::fixed(GateKind::CX, &[0, 1]));
    }
    Circuit::from_gates(2, 0, 2, gates).expect("feature map is well formed")
}

/// `|<a|b>|²` with the products summed in a canonical order, so that states
/// differing only by a basis permutation give bit-identical results.
pub fn transition_probability(a: &Statevector, b: &Statevector) -> f64 {
    let mut terms: Vec<C> = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .collect();
    terms.sort_by(|p, q| match p.re.total_cmp(&q.re) {
        Ordering::Equal => p.im.total_cmp(&q.im),
        other => other,
    });
    let sum: C = terms.iter().fold(C::new(0.0, 0.0), |acc, t| acc + t);
    sum.norm_sqr().min(1.0)
}

/// Exact kernel entry `|<0|U†(x2) U(x1)|0>|²` for a feature-map circuit.
pub fn kernel_entry(circuit: &Circuit, x1: &[f64], x2: &[f64]) -> Result<f64> {
    Ok(transition_probability(
        &run(circuit, x2, &[])?,
        &run(circuit, x1, &[])?,
    ))
}

fn states(circuit: &Circuit, data: &Dataset, theta: &[f64]) -> Result<Vec<Statevector>> {
    data.points.iter().map(|x| run(circuit, x, theta)).collect()
}

/// Symmetric train kernel with unit diagonal.
pub fn gram_matrix(states: &[Statevector]) -> Vec<Vec<f64>> {
    let n = states.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        k[i][i] = transition_probability(&states[i], &states[i]);
        for j in 0..i {
            let v = transition_probability(&states[j], &states[i]);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

/// Rows of test-against-train kernel values.
pub fn cross_kernel(test: &[Statevector], train: &[Statevector]) -> Vec<Vec<f64>> {
    test.iter()
        .map(|t| train.iter().map(|s| transition_probability(s, t)).collect())
        .collect()
}

/// Train on `train` with the given circuit's exact kernel and score on `test`.
pub fn qsvm_accuracy(circuit: &Circuit, train: &Dataset, test: &Dataset, c: f64) -> Result<f64> {
    let train_states = states(circuit, train, &[])?;
    let test_states = states(circuit, test, &[])?;
    let model = train_svm(&gram_matrix(&train_states), &train.labels, c)?;
    let predictions = model.predict(&cross_kernel(&test_states, &train_states))?;
    accuracy(&predictions, &test.labels)
}

/// Test accuracy of an SVM retrained on the coalition subcircuit's kernel.
pub struct QsvmValue {
    game: GameCircuit,
    train: Dataset,
    test: Dataset,
    c: f64,
}

impl QsvmValue {
    pub fn new(game: GameCircuit, train: Dataset, test: Dataset, c: f64) -> Result<Self> {
        if game.theta_dim() != 0 || game.feature_dim() != 2 {
            return Err(Error::Config(
                "QSVM circuit must take two features and no trainable parameters".into(),
            ));
        }
        if train.is_empty() || test.is_empty() {
            return Err(Error::Config(
                "QSVM needs non-empty train and test sets".into(),
            ));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Config(format!(
                "SVM regularization C must be positive, got {c}"
            )));
        }
        Ok(QsvmValue {
            game,
            train,
            test,
            c,
        })
    }
}

impl ValueFunction for QsvmValue {
    fn name(&self) -> &str {
        "accuracy_qsvm"
    }

    fn players(&self) -> usize {
        self.game.players()
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn value(&self, s: Coalition, _seed: u64) -> Result<f64> {
        qsvm_accuracy(&self.game.subcircuit(s)?, &self.train, &self.test, self.c)
    }
}

/// Kernel matrices of many circuits at once; convenience for plotting.
pub fn kernels_for(circuits: &[Circuit], data: &Dataset) -> Result<Vec<Vec<Vec<f64>>>> {
    circuits
        .par_iter()
        .map(|c| Ok(gram_matrix(&states(c, data, &[])?)))
        .collect()
}
