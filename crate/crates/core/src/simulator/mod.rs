//! Statevector simulation, shot sampling, readout noise and its mitigation.
//!
//! Basis convention: wire `j` is bit `j` of the basis index, so the index of
//! bit string `b_0 b_1 … b_{q-1}` is `Σ_j b_j 2^j`. Bit strings are printed
//! wire-0-first.

mod gates;
mod hamiltonian;
mod shots;

pub use gates::{matrix_1q, matrix_2q, Mat2, Mat4};
pub use hamiltonian::{energy, DiagonalHamiltonian};
pub use shots::{
    distribution_to_csv, hellinger, sample, CalibrationMatrix, NoiseModel, ShotRecord,
};

use num_complex::Complex64 as C;

use crate::circuit::{BoundCircuit, BoundGate, Circuit, GateKind};
use crate::error::{Error, Result};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 24;

/// Bit string of `index` on `qubits` wires, wire 0 first.
pub fn bitstring(index: usize, qubits: usize) -> String {
    (0..qubits)
        .map(|j| if index >> j & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`bitstring`].
pub fn parse_bitstring(text: &str) -> Result<usize> {
    if text.len() > 63 {
        return Err(Error::Config(format!("bit string `{text}` too long")));
    }
    text.chars()
        .enumerate()
        .try_fold(0usize, |acc, (j, ch)| match ch {
            '0' => Ok(acc),
            '1' => Ok(acc | 1 << j),
            _ => Err(Error::Config(format!("invalid bit string `{text}`"))),
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    qubits: usize,
    amps: Vec<C>,
}

impl Statevector {
    /// `|0…0⟩` on `qubits` wires.
    pub fn zero(qubits: usize) -> Result<Self> {
        if qubits > MAX_QUBITS {
            return Err(Error::ResourceCap(format!(
                "{qubits} qubits exceed the simulator limit of {MAX_QUBITS}"
            )));
        }
        let mut amps = vec![C::new(0.0, 0.0); 1 << qubits];
        amps[0] = C::new(1.0, 0.0);
        Ok(Statevector { qubits, amps })
    }

    /// Wrap raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<C>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::Dimension(format!(
                "{} amplitudes is not a power of two",
                amps.len()
            )));
        }
        let qubits = amps.len().trailing_zeros() as usize;
        Ok(Statevector { qubits, amps })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> C {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Born-rule probabilities indexed by basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply(&mut self, gate: &BoundGate) {
        let [a, b] = gate.qubits;
        match gate.kind {
            GateKind::RZ => {
                let lo = C::from_polar(1.0, -gate.angle / 2.0);
                self.apply_diagonal(a, lo, lo.conj());
            }
            GateKind::P => self.apply_diagonal(a, C::new(1.0, 0.0), C::from_polar(1.0, gate.angle)),
            GateKind::X => self.for_pairs(a, |v, i, j| v.swap(i, j)),
            GateKind::CX => {
                let (c, t) = (1 << a, 1 << b);
                for i in 0..self.amps.len() {
                    if i & c != 0 && i & t == 0 {
                        self.amps.swap(i, i | t);
                    }
                }
            }
            GateKind::SWAP => {
                let (ma, mb) = (1 << a, 1 << b);
                for i in 0..self.amps.len() {
                    if i & ma != 0 && i & mb == 0 {
                        self.amps.swap(i, i ^ ma ^ mb);
                    }
                }
            }
            GateKind::CP => {
                let phase = C::from_polar(1.0, gate.angle);
                let m = 1 << a | 1 << b;
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    if i & m == m {
                        *amp *= phase;
                    }
                }
            }
            GateKind::H | GateKind::SX | GateKind::RX | GateKind::RY => {
                let u = matrix_1q(gate.kind, gate.angle);
                self.for_pairs(a, |v, i, j| {
                    let (x, y) = (v[i], v[j]);
                    v[i] = u[0][0] * x + u[0][1] * y;
                    v[j] = u[1][0] * x + u[1][1] * y;
                });
            }
            GateKind::CostLayer | GateKind::MixingLayer => {
                panic!("layer gates must be expanded before simulation")
            }
        }
    }

    /// Apply an arbitrary 2×2 unitary on wire `q`.
    pub fn apply_matrix_1q(&mut self, q: usize, u: &Mat2) {
        self.for_pairs(q, |v, i, j| {
            let (x, y) = (v[i], v[j]);
            v[i] = u[0][0] * x + u[0][1] * y;
            v[j] = u[1][0] * x + u[1][1] * y;
        });
    }

    fn apply_diagonal(&mut self, q: usize, lo: C, hi: C) {
        let m = 1 << q;
        for (i, amp) in self.amps.iter_mut().enumerate() {
            *amp *= if i & m == 0 { lo } else { hi };
        }
    }

    /// Visit index pairs `(i, i | 2^q)` with bit `q` of `i` clear.
    fn for_pairs(&mut self, q: usize, mut f: impl FnMut(&mut [C], usize, usize)) {
        let step = 1 << q;
        let n = self.amps.len();
        let mut base = 0;
        while base < n {
            for i in base..base + step {
                f(&mut self.amps, i, i + step);
            }
            base += 2 * step;
        }
    }
}

/// Execute a bound circuit from `|0…0⟩`.
pub fn run_bound(circuit: &BoundCircuit) -> Result<Statevector> {
    let mut psi = Statevector::zero(circuit.qubits)?;
    for gate in &circuit.gates {
        psi.apply(gate);
    }
    Ok(psi)
}

/// Bind `x`, `θ` and execute from `|0…0⟩`.
pub fn run(circuit: &Circuit, x: &[f64], theta: &[f64]) -> Result<Statevector> {
    run_bound(&circuit.bind(x, theta)?)
}
