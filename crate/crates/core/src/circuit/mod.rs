//! Parameterized circuits, coalition games over their gates, and
//! coalition-indexed subcircuits.
//!
//! A [`Circuit`] is an ordered gate list `U_1 … U_G`; gate indices are 1-based
//! positions in that list. A [`CoalitionGame`] splits the gates into *active*
//! gates (the players) and *remaining* gates that are always present. Player
//! `i` (0-based bit `i` of a [`Coalition`]) stands for the `i`-th active gate.

mod config;
mod expr;
mod game;
mod layers;

pub use config::{CircuitDoc, GateDoc};
pub use expr::ParamExpr;
pub use game::{Coalition, CoalitionGame};
pub use layers::expand_layers;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    SX,
    RX,
    RY,
    RZ,
    P,
    CP,
    CX,
    SWAP,
    /// QAOA cost layer over a problem graph; expands to CX·RZ·CX per edge.
    CostLayer,
    /// QAOA mixing layer; expands to one RX per qubit.
    MixingLayer,
}

impl GateKind {
    pub const ALL: [GateKind; 12] = [
        GateKind::H,
        GateKind::X,
        GateKind::SX,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::P,
        GateKind::CP,
        GateKind::CX,
        GateKind::SWAP,
        GateKind::CostLayer,
        GateKind::MixingLayer,
    ];

    /// Operand count; layers act on the whole register and take none.
    pub fn arity(self) -> usize {
        match self {
            GateKind::CP | GateKind::CX | GateKind::SWAP => 2,
            GateKind::CostLayer | GateKind::MixingLayer => 0,
            _ => 1,
        }
    }

    pub fn is_parameterized(self) -> bool {
        matches!(
            self,
            GateKind::RX
                | GateKind::RY
                | GateKind::RZ
                | GateKind::P
                | GateKind::CP
                | GateKind::CostLayer
                | GateKind::MixingLayer
        )
    }

    pub fn is_layer(self) -> bool {
        matches!(self, GateKind::CostLayer | GateKind::MixingLayer)
    }

    /// Config-file spelling.
    pub fn as_str(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::SX => "sx",
            GateKind::RX => "rx",
            GateKind::RY => "ry",
            GateKind::RZ => "rz",
            GateKind::P => "p",
            GateKind::CP => "cp",
            GateKind::CX => "cx",
            GateKind::SWAP => "swap",
            GateKind::CostLayer => "cost_layer",
            GateKind::MixingLayer => "mixing_layer",
        }
    }

    /// Label used in reports and plots.
    pub fn label(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::SX => "SX",
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::P => "P",
            GateKind::CP => "CP",
            GateKind::CX => "CX",
            GateKind::SWAP => "S",
            GateKind::CostLayer => "Ucost",
            GateKind::MixingLayer => "Umix",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        GateKind::ALL
            .into_iter()
            .find(|k| k.as_str() == lower)
            .ok_or_else(|| Error::Config(format!("unknown gate kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    /// Wire operands; for controlled gates the control comes first.
    pub qubits: Vec<usize>,
    pub param: Option<ParamExpr>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize], param: Option<ParamExpr>) -> Self {
        Gate {
            kind,
            qubits: qubits.to_vec(),
            param,
        }
    }

    pub fn fixed(kind: GateKind, qubits: &[usize]) -> Self {
        Gate::new(kind, qubits, None)
    }

    pub fn rotation(kind: GateKind, qubits: &[usize], param: ParamExpr) -> Self {
        Gate::new(kind, qubits, Some(param))
    }

    fn check(
        &self,
        index: usize,
        qubits: usize,
        theta_dim: usize,
        feature_dim: usize,
    ) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::gate(
                index,
                format!(
                    "{} expects {} operand(s), got {}",
                    self.kind.label(),
                    self.kind.arity(),
                    self.qubits.len()
                ),
            ));
        }
        if let Some(&w) = self.qubits.iter().find(|&&w| w >= qubits) {
            return Err(Error::gate(
                index,
                format!("wire {w} out of range for {qubits} qubit(s)"),
            ));
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::gate(index, "operands must be distinct"));
        }
        match (&self.param, self.kind.is_parameterized()) {
            (None, true) => Err(Error::gate(
                index,
                format!("{} requires a parameter", self.kind.label()),
            )),
            (Some(_), false) => Err(Error::gate(
                index,
                format!("{} takes no parameter", self.kind.label()),
            )),
            (Some(p), true) => {
                if p.theta_extent() > theta_dim {
                    return Err(Error::gate(
                        index,
                        format!(
                            "theta[{}] out of range for theta_dim {theta_dim}",
                            p.theta_extent() - 1
                        ),
                    ));
                }
                if p.feature_extent() > feature_dim {
                    return Err(Error::gate(
                        index,
                        format!(
                            "x[{}] out of range for feature_dim {feature_dim}",
                            p.feature_extent() - 1
                        ),
                    ));
                }
                Ok(())
            }
            (None, false) => Ok(()),
        }
    }
}

/// An ordered gate list on `qubits` wires with `theta_dim` trainable
/// parameters and `feature_dim` data features.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    qubits: usize,
    theta_dim: usize,
    feature_dim: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubits: usize, theta_dim: usize, feature_dim: usize) -> Self {
        Circuit {
            qubits,
            theta_dim,
            feature_dim,
            gates: Vec::new(),
        }
    }

    /// Build and validate in one step.
    pub fn from_gates(
        qubits: usize,
        theta_dim: usize,
        feature_dim: usize,
        gates: impl IntoIterator<Item = Gate>,
    ) -> Result<Self> {
        let mut circuit = Circuit::new(qubits, theta_dim, feature_dim);
        for gate in gates {
            circuit.push(gate)?;
        }
        Ok(circuit)
    }

    /// Append a gate after validating it; its index is the new length.
    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.check(
            self.gates.len() + 1,
            self.qubits,
            self.theta_dim,
            self.feature_dim,
        )?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn theta_dim(&self) -> usize {
        self.theta_dim
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Gate by 1-based index.
    pub fn gate(&self, index: usize) -> Option<&Gate> {
        index.checked_sub(1).and_then(|i| self.gates.get(i))
    }

    pub fn has_layers(&self) -> bool {
        self.gates.iter().any(|g| g.kind.is_layer())
    }

    /// Same register and parameter dimensions, with the given gates.
    pub(crate) fn with_gates(&self, gates: Vec<Gate>) -> Circuit {
        Circuit {
            qubits: self.qubits,
            theta_dim: self.theta_dim,
            feature_dim: self.feature_dim,
            gates,
        }
    }

    /// Bind parameters, producing numeric angles. Layers must be expanded first.
    pub fn bind(&self, x: &[f64], theta: &[f64]) -> Result<BoundCircuit> {
        self.check_bindings(x, theta)?;
        let gates = self
            .gates
            .iter()
            .enumerate()
            .map(|(i, g)| {
                if g.kind.is_layer() {
                    return Err(Error::gate(i + 1, "unexpanded layer reference"));
                }
                Ok(BoundGate {
                    kind: g.kind,
                    qubits: [g.qubits[0], g.qubits.get(1).copied().unwrap_or(usize::MAX)],
                    angle: g.param.as_ref().map_or(0.0, |p| p.eval(theta, x)),
                })
            })
            .collect::<Result<_>>()?;
        Ok(BoundCircuit {
            qubits: self.qubits,
            gates,
        })
    }

    pub(crate) fn check_bindings(&self, x: &[f64], theta: &[f64]) -> Result<()> {
        if x.len() != self.feature_dim {
            return Err(Error::Dimension(format!(
                "circuit expects {} feature(s), got {}",
                self.feature_dim,
                x.len()
            )));
        }
        if theta.len() != self.theta_dim {
            return Err(Error::Dimension(format!(
                "circuit expects {} parameter(s), got {}",
                self.theta_dim,
                theta.len()
            )));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: CircuitDoc = serde_json::from_str(text)?;
        doc.to_circuit()
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Circuit::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_doc(&self) -> CircuitDoc {
        CircuitDoc::from_circuit(self)
    }
}

/// A gate with its angle evaluated. `qubits[1]` is meaningful only for
/// two-qubit kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundGate {
    pub kind: GateKind,
    pub qubits: [usize; 2],
    pub angle: f64,
}

impl BoundGate {
    pub fn one(kind: GateKind, qubit: usize, angle: f64) -> Self {
        BoundGate {
            kind,
            qubits: [qubit, usize::MAX],
            angle,
        }
    }

    pub fn two(kind: GateKind, a: usize, b: usize, angle: f64) -> Self {
        BoundGate {
            kind,
            qubits: [a, b],
            angle,
        }
    }

    pub fn operands(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCircuit {
    pub qubits: usize,
    pub gates: Vec<BoundGate>,
}
