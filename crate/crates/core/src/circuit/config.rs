use serde::{Deserialize, Serialize};

use super::{Circuit, Gate, GateKind, ParamExpr};
use crate::error::{Error, Result};

/// On-disk circuit description.
///
/// ```json
/// {"qubits": 2, "theta_dim": 1, "gates": [
///   {"kind": "h", "qubits": [0]},
///   {"kind": "ry", "qubits": [1], "param": "2 * theta[0]"},
///   {"kind": "cx", "qubits": [0, 1]}
/// ]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDoc {
    pub qubits: usize,
    #[serde(default)]
    pub theta_dim: usize,
    #[serde(default)]
    pub feature_dim: usize,
    pub gates: Vec<GateDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateDoc {
    pub kind: String,
    #[serde(default)]
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
}

impl CircuitDoc {
    pub fn to_circuit(&self) -> Result<Circuit> {
        let mut circuit = Circuit::new(self.qubits, self.theta_dim, self.feature_dim);
        for (i, g) in self.gates.iter().enumerate() {
            let kind: GateKind = g
                .kind
                .parse()
                .map_err(|e: Error| Error::gate(i + 1, e.to_string()))?;
            let param = match &g.param {
                Some(text) => Some(
                    text.parse::<ParamExpr>()
                        .map_err(|e| Error::gate(i + 1, e.to_string()))?,
                ),
                None => None,
            };
            circuit.push(Gate::new(kind, &g.qubits, param))?;
        }
        Ok(circuit)
    }

    pub fn from_circuit(circuit: &Circuit) -> Self {
        CircuitDoc {
            qubits: circuit.qubits(),
            theta_dim: circuit.theta_dim(),
            feature_dim: circuit.feature_dim(),
            gates: circuit
                .gates()
                .iter()
                .map(|g| GateDoc {
                    kind: g.kind.as_str().to_string(),
                    qubits: g.qubits.clone(),
                    param: g.param.as_ref().map(|p| p.to_string()),
                })
                .collect(),
        }
    }
}
