use std::f64::consts::PI;

use crate::circuit::{Circuit, Gate, GateKind, ParamExpr};
use crate::error::{Error, Result};

/// Textbook QFT: for each wire `j`, H then CP(π/2^(k−j)) controlled by every
/// later wire `k`, followed by the bit-reversal swaps. `q(q+1)/2 + ⌊q/2⌋` gates;
/// wire 0 carries the most significant bit of the transformed integer.
pub fn qft_circuit(qubits: usize) -> Result<Circuit> {
    if qubits == 0 {
        return Err(Error::Config("QFT needs at least one qubit".into()));
    }
    let mut gates = Vec::new();
    for j in 0..qubits {
        gates.push(Gate::fixed(GateKind::H, &[j]));
        for k in j + 1..qubits {
            let angle = PI / f64::powi(2.0, (k - j) as i32);
            gates.push(Gate::rotation(
                GateKind::CP,
                &[k, j],
                ParamExpr::constant(angle),
            ));
        }
    }
    for i in 0..qubits / 2 {
        gates.push(Gate::fixed(GateKind::SWAP, &[i, qubits - 1 - i]));
    }
    Circuit::from_gates(qubits, 0, 0, gates)
}
