use super::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Replace QAOA layer references with their gate sequences.
///
/// A cost layer with angle `t` becomes `CX(a,b) · RZ(2t) on b · CX(a,b)` for
/// each edge `(a, b)` of `graph` in sorted order; a mixing layer with angle
/// `t` becomes `RX(2t)` on every qubit in ascending order. Circuits without
/// layers are returned unchanged.
pub fn expand_layers(circuit: &Circuit, graph: Option<&Graph>) -> Result<Circuit> {
    if !circuit.has_layers() {
        return Ok(circuit.clone());
    }
    let mut out = Vec::with_capacity(circuit.len());
    for (i, gate) in circuit.gates().iter().enumerate() {
        let Some(param) = gate.param.as_ref().filter(|_| gate.kind.is_layer()) else {
            out.push(gate.clone());
            continue;
        };
        let angle = param.clone().scaled(2.0);
        match gate.kind {
            GateKind::CostLayer => {
                let graph =
                    graph.ok_or_else(|| Error::gate(i + 1, "cost layer needs a problem graph"))?;
                if graph.nodes() > circuit.qubits() {
                    return Err(Error::gate(
                        i + 1,
                        format!(
                            "graph has {} nodes but circuit has {} qubits",
                            graph.nodes(),
                            circuit.qubits()
                        ),
                    ));
                }
                for &(a, b) in graph.edges() {
                    out.push(Gate::fixed(GateKind::CX, &[a, b]));
                    out.push(Gate::rotation(GateKind::RZ, &[b], angle.clone()));
                    out.push(Gate::fixed(GateKind::CX, &[a, b]));
                }
            }
            GateKind::MixingLayer => {
                for q in 0..circuit.qubits() {
                    out.push(Gate::rotation(GateKind::RX, &[q], angle.clone()));
                }
            }
            _ => unreachable!(),
        }
    }
    Circuit::from_gates(
        circuit.qubits(),
        circuit.theta_dim(),
        circuit.feature_dim(),
        out,
    )
}
