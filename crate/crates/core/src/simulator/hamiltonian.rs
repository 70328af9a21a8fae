use super::Statevector;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::pairwise_sum;

/// A Hamiltonian diagonal in the computational basis, stored as its
/// diagonal `H(b)` indexed like statevector amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalHamiltonian {
    diag: Vec<f64>,
}

impl DiagonalHamiltonian {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        if !diag.len().is_power_of_two() {
            return Err(Error::Dimension(format!(
                "diagonal of length {} is not 2^q",
                diag.len()
            )));
        }
        Ok(DiagonalHamiltonian { diag })
    }

    /// Max-cut cost `H = Σ_{(a,b)∈E} (Z_a Z_b − 1)/2`, i.e. `H(b) = −cut(b)`.
    /// The ground energy is minus the maximum cut.
    pub fn maxcut(graph: &Graph, qubits: usize) -> Result<Self> {
        if graph.nodes() > qubits {
            return Err(Error::Dimension(format!(
                "graph has {} nodes but the register has {qubits} qubits",
                graph.nodes()
            )));
        }
        if qubits > super::MAX_QUBITS {
            return Err(Error::ResourceCap(format!(
                "{qubits} qubits exceed the simulator limit"
            )));
        }
        let diag = (0..1u64 << qubits)
            .map(|b| -(graph.cut_value(b) as f64))
            .collect();
        Ok(DiagonalHamiltonian { diag })
    }

    pub fn qubits(&self) -> usize {
        self.diag.len().trailing_zeros() as usize
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }
}

/// `⟨ψ|H|ψ⟩ = Σ_b P(b) H(b)`.
pub fn energy(psi: &Statevector, h: &DiagonalHamiltonian) -> Result<f64> {
    if psi.qubits() != h.qubits() {
        return Err(Error::Dimension(format!(
            "state has {} qubits, Hamiltonian {}",
            psi.qubits(),
            h.qubits()
        )));
    }
    let terms: Vec<f64> = psi
        .amplitudes()
        .iter()
        .zip(&h.diag)
        .map(|(a, e)| a.norm_sqr() * e)
        .collect();
    Ok(pairwise_sum(&terms))
}
