//! Local simplifications that never change the circuit unitary (up to
//! global phase).

use super::synth::wrap_angle;
use crate::circuit::{BoundGate, GateKind};

const ZERO_ANGLE: f64 = 1e-10;

fn touches(g: &BoundGate, q: usize) -> bool {
    g.operands().contains(&q)
}

/// Index of the next live gate after `i` acting on wire `q`.
fn next_on(gates: &[Option<BoundGate>], i: usize, q: usize) -> Option<usize> {
    (i + 1..gates.len()).find(|&j| gates[j].as_ref().is_some_and(|g| touches(g, q)))
}

/// Merge adjacent RZ rotations, drop RZ by multiples of 2π, cancel adjacent
/// X·X and identical CX pairs, turn SX·SX into X; repeat until stable.
pub fn simplify(gates: Vec<BoundGate>) -> Vec<BoundGate> {
    let mut live: Vec<Option<BoundGate>> = gates.into_iter().map(Some).collect();
    loop {
        let mut changed = false;
        for i in 0..live.len() {
            let Some(g) = live[i] else { continue };
            if g.kind == GateKind::RZ && wrap_angle(g.angle).abs() < ZERO_ANGLE {
                live[i] = None;
                changed = true;
                continue;
            }
            let q = g.qubits[0];
            let Some(j) = next_on(&live, i, q) else {
                continue;
            };
            let h = live[j].unwrap();
            match (g.kind, h.kind) {
                (GateKind::RZ, GateKind::RZ) => {
                    live[i] = Some(BoundGate::one(
                        GateKind::RZ,
                        q,
                        wrap_angle(g.angle + h.angle),
                    ));
                    live[j] = None;
                    changed = true;
                }
                (GateKind::X, GateKind::X) if h.qubits[0] == q => {
                    live[i] = None;
                    live[j] = None;
                    changed = true;
                }
                (GateKind::SX, GateKind::SX) if h.qubits[0] == q => {
                    live[i] = Some(BoundGate::one(GateKind::X, q, 0.0));
                    live[j] = None;
                    changed = true;
                }
                (GateKind::CX, GateKind::CX)
                    if h.qubits == g.qubits && next_on(&live, i, g.qubits[1]) == Some(j) =>
                {
                    live[i] = None;
                    live[j] = None;
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return live.into_iter().flatten().collect();
        }
    }
}
