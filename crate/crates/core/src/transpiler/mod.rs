//! Transpilation onto hardware targets with the native gate set
//! `{RZ(λ), X, SX, CX}` and a coupling graph.
//!
//! The pipeline is: decompose every gate into natives, simplify, place the
//! logical qubits on a random connected region of the coupling graph, insert
//! SWAPs (three CX each) along shortest paths for non-adjacent CX operands,
//! and simplify again. [`best_of_trials`] repeats this with derived seeds and
//! keeps the cheapest result under the penalty `n₁·s₁ + n₂·s₂`.

mod peephole;
mod synth;

pub use peephole::simplify;
pub use synth::{
    decompose, decompose_1q, is_native, swap_as_cx, synthesize_1q, wrap_angle, zyz_angles,
};

use std::collections::VecDeque;
use std::path::Path;

use num_complex::Complex64 as C;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;

use crate::circuit::{BoundCircuit, BoundGate, Circuit, Gate, GateKind, ParamExpr};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{derive, rng, Rng};
use crate::simulator::Statevector;

/// A device: qubit count plus undirected coupling edges.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareTarget {
    name: String,
    graph: Graph,
    adjacency: Vec<Vec<usize>>,
}

/// 7-qubit device shape (H-shaped, as on `oslo`-class machines).
const OSLO_EDGES: [(usize, usize); 6] = [(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)];

/// 27-qubit heavy-hex device shape (`ehningen`-class machines).
const EHNINGEN_EDGES: [(usize, usize); 28] = [
    (0, 1),
    (1, 2),
    (1, 4),
    (2, 3),
    (3, 5),
    (4, 7),
    (5, 8),
    (6, 7),
    (7, 10),
    (8, 9),
    (8, 11),
    (10, 12),
    (11, 14),
    (12, 13),
    (12, 15),
    (13, 14),
    (14, 16),
    (15, 18),
    (16, 19),
    (17, 18),
    (18, 21),
    (19, 20),
    (19, 22),
    (21, 23),
    (22, 25),
    (23, 24),
    (24, 25),
    (25, 26),
];

impl HardwareTarget {
    pub fn new(name: impl Into<String>, graph: Graph) -> Self {
        let adjacency = graph.adjacency();
        HardwareTarget {
            name: name.into(),
            graph,
            adjacency,
        }
    }

    pub fn oslo() -> Self {
        HardwareTarget::new("oslo", Graph::new(7, OSLO_EDGES).unwrap())
    }

    pub fn ehningen() -> Self {
        HardwareTarget::new("ehningen", Graph::new(27, EHNINGEN_EDGES).unwrap())
    }

    /// `n` qubits on a line `0 – 1 – … – n−1`.
    pub fn line(n: usize) -> Self {
        HardwareTarget::new(
            format!("line{n}"),
            Graph::new(n, (1..n).map(|i| (i - 1, i))).unwrap(),
        )
    }

    /// A built-in target (`oslo`, `ehningen`, `lineN`) or a JSON file path.
    pub fn resolve(spec: &str) -> Result<Self> {
        match spec {
            "oslo" => Ok(HardwareTarget::oslo()),
            "ehningen" => Ok(HardwareTarget::ehningen()),
            s if s.starts_with("line") && s[4..].parse::<usize>().is_ok() => {
                Ok(HardwareTarget::line(s[4..].parse().unwrap()))
            }
            path => HardwareTarget::load(Path::new(path)),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let name = path
            .file_stem()
            .map_or("custom".into(), |s| s.to_string_lossy().into_owned());
        Ok(HardwareTarget::new(name, Graph::load(path)?))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn qubits(&self) -> usize {
        self.graph.nodes()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn coupled(&self, a: usize, b: usize) -> bool {
        self.graph.has_edge(a, b)
    }

    /// Shortest path from `a` to `b`, ties broken by neighbor order.
    fn path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.qubits()];
        prev[a] = a;
        let mut queue = VecDeque::from([a]);
        while let Some(v) = queue.pop_front() {
            if v == b {
                let mut path = vec![b];
                while *path.last().unwrap() != a {
                    path.push(prev[*path.last().unwrap()]);
                }
                path.reverse();
                return Some(path);
            }
            for &w in &self.adjacency[v] {
                if prev[w] == usize::MAX {
                    prev[w] = v;
                    queue.push_back(w);
                }
            }
        }
        None
    }

    /// A random connected set of `size` physical qubits, in discovery order.
    fn random_region(&self, size: usize, r: &mut Rng) -> Result<Vec<usize>> {
        let roots: Vec<usize> = self
            .graph
            .components()
            .into_iter()
            .filter(|c| c.len() >= size)
            .flatten()
            .collect();
        if roots.is_empty() {
            return Err(Error::Unroutable(format!(
                "no connected region of {size} qubits on target {}",
                self.name
            )));
        }
        let root = roots[r.random_range(0..roots.len())];
        let mut region = vec![root];
        let mut frontier: Vec<usize> = self.adjacency[root].clone();
        while region.len() < size {
            let pick = frontier.swap_remove(r.random_range(0..frontier.len()));
            if region.contains(&pick) {
                continue;
            }
            region.push(pick);
            frontier.extend(self.adjacency[pick].iter().filter(|w| !region.contains(w)));
        }
        Ok(region)
    }
}

/// A circuit over physical qubits using only native gates.
#[derive(Debug, Clone, PartialEq)]
pub struct TranspiledCircuit {
    pub physical_qubits: usize,
    pub gates: Vec<BoundGate>,
    /// Physical qubit holding logical qubit `l` at the start.
    pub initial_layout: Vec<usize>,
    /// Physical qubit holding logical qubit `l` at the end.
    pub final_layout: Vec<usize>,
}

impl TranspiledCircuit {
    /// Native one-qubit gate count (RZ, SX, X).
    pub fn n1(&self) -> usize {
        self.gates.iter().filter(|g| g.kind.arity() == 1).count()
    }

    /// Native two-qubit gate count (CX).
    pub fn n2(&self) -> usize {
        self.gates.iter().filter(|g| g.kind.arity() == 2).count()
    }

    /// Physical circuit in the circuit document schema, with constant angles.
    pub fn to_circuit(&self) -> Circuit {
        let gates = self.gates.iter().map(|g| {
            let param = (g.kind == GateKind::RZ).then(|| ParamExpr::constant(g.angle));
            Gate::new(g.kind, g.operands(), param)
        });
        Circuit::from_gates(self.physical_qubits, 0, 0, gates).expect("native gates are valid")
    }
}

/// Penalty `n₁·s₁ + n₂·s₂` of a transpiled circuit.
pub fn penalty(t: &TranspiledCircuit, s1: f64, s2: f64) -> f64 {
    t.n1() as f64 * s1 + t.n2() as f64 * s2
}

/// Decompose into natives on logical wires and simplify.
pub fn to_native(circuit: &BoundCircuit) -> Vec<BoundGate> {
    simplify(circuit.gates.iter().flat_map(decompose).collect())
}

/// Place and route native logical gates onto `target`.
pub fn route(
    logical_qubits: usize,
    gates: &[BoundGate],
    target: &HardwareTarget,
    seed: u64,
) -> Result<TranspiledCircuit> {
    if logical_qubits > target.qubits() {
        return Err(Error::Unroutable(format!(
            "{logical_qubits} logical qubits exceed the {} qubits of target {}",
            target.qubits(),
            target.name()
        )));
    }
    let mut r = rng(seed);
    let mut layout = target.random_region(logical_qubits, &mut r)?;
    layout.shuffle(&mut r);
    route_with_layout(gates, target, layout)
}

/// Route native logical gates starting from a fixed initial layout
/// (`layout[l]` is the physical qubit of logical qubit `l`).
pub fn route_with_layout(
    gates: &[BoundGate],
    target: &HardwareTarget,
    mut layout: Vec<usize>,
) -> Result<TranspiledCircuit> {
    let mut seen = vec![false; target.qubits()];
    for &p in &layout {
        if p >= target.qubits() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Config(format!(
                "invalid layout {layout:?} for target {}",
                target.name()
            )));
        }
    }
    let initial_layout = layout.clone();
    let mut occupant: Vec<Option<usize>> = vec![None; target.qubits()];
    for (l, &p) in layout.iter().enumerate() {
        occupant[p] = Some(l);
    }
    let mut out = Vec::with_capacity(gates.len());
    for g in gates {
        if g.kind.arity() == 1 {
            out.push(BoundGate::one(g.kind, layout[g.qubits[0]], g.angle));
            continue;
        }
        let (la, lb) = (g.qubits[0], g.qubits[1]);
        let path = target.path(layout[la], layout[lb]).ok_or_else(|| {
            Error::Unroutable(format!("no path between logical qubits {la} and {lb}"))
        })?;
        // walk the first operand towards the second
        for w in path.windows(2).take(path.len().saturating_sub(2)) {
            let (p, p2) = (w[0], w[1]);
            out.extend(swap_as_cx(p, p2));
            occupant.swap(p, p2);
            for phys in [p, p2] {
                if let Some(l) = occupant[phys] {
                    layout[l] = phys;
                }
            }
        }
        out.push(BoundGate::two(GateKind::CX, layout[la], layout[lb], 0.0));
    }
    Ok(TranspiledCircuit {
        physical_qubits: target.qubits(),
        gates: simplify(out),
        initial_layout,
        final_layout: layout,
    })
}

/// One transpilation trial.
pub fn transpile(
    circuit: &BoundCircuit,
    target: &HardwareTarget,
    seed: u64,
) -> Result<TranspiledCircuit> {
    route(circuit.qubits, &to_native(circuit), target, seed)
}

/// Best result (highest penalty value) over `trials` seeded trials. Trial `t`
/// uses seed `derive(seed, [t])`, so the trial sets are nested in `trials`.
pub fn best_of_trials(
    circuit: &BoundCircuit,
    target: &HardwareTarget,
    trials: usize,
    seed: u64,
    s1: f64,
    s2: f64,
) -> Result<(TranspiledCircuit, f64)> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let native = to_native(circuit);
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let tc = route(circuit.qubits, &native, target, derive(seed, &[t]))?;
            let p = penalty(&tc, s1, s2);
            Ok((tc, p))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(results
        .into_iter()
        .reduce(|best, cand| if cand.1 > best.1 { cand } else { best })
        .unwrap())
}

/// The logical unitary implemented by a transpiled circuit: column `k` is the
/// output for logical basis input `k`, with unused physical qubits starting
/// in `|0⟩` and outputs read through the final layout.
///
/// Only physical qubits that are used are simulated.
pub fn effective_unitary(t: &TranspiledCircuit) -> Result<Vec<Vec<C>>> {
    let mut used: Vec<usize> = t.initial_layout.clone();
    used.extend(t.gates.iter().flat_map(|g| g.operands().to_vec()));
    used.extend(&t.final_layout);
    used.sort_unstable();
    used.dedup();
    let compact = |p: usize| used.binary_search(&p).unwrap();
    let gates: Vec<BoundGate> = t
        .gates
        .iter()
        .map(|g| {
            let mut h = *g;
            h.qubits[0] = compact(g.qubits[0]);
            if g.kind.arity() == 2 {
                h.qubits[1] = compact(g.qubits[1]);
            }
            h
        })
        .collect();
    let q = t.initial_layout.len();
    let dim = 1usize << q;
    let mut columns = Vec::with_capacity(dim);
    for k in 0..dim {
        if used.len() > crate::simulator::MAX_QUBITS {
            return Err(Error::ResourceCap(format!(
                "{} physical qubits to simulate",
                used.len()
            )));
        }
        let mut start = 0usize;
        for (l, &p) in t.initial_layout.iter().enumerate() {
            start |= (k >> l & 1) << compact(p);
        }
        let mut amps = vec![C::new(0.0, 0.0); 1 << used.len()];
        amps[start] = C::new(1.0, 0.0);
        let mut psi = Statevector::from_amplitudes(amps)?;
        for g in &gates {
            psi.apply(g);
        }
        let column: Vec<C> = (0..dim)
            .map(|j| {
                let mut idx = 0usize;
                for (l, &p) in t.final_layout.iter().enumerate() {
                    idx |= (j >> l & 1) << compact(p);
                }
                psi.amplitudes()[idx]
            })
            .collect();
        columns.push(column);
    }
    // columns[k][j] → matrix[j][k]
    Ok((0..dim)
        .map(|j| (0..dim).map(|k| columns[k][j]).collect())
        .collect())
}

/// Unitary of a logical circuit by simulating every basis input.
pub fn circuit_unitary(circuit: &BoundCircuit) -> Result<Vec<Vec<C>>> {
    let dim = 1usize << circuit.qubits;
    let mut m = vec![vec![C::new(0.0, 0.0); dim]; dim];
    for k in 0..dim {
        let mut amps = vec![C::new(0.0, 0.0); dim];
        amps[k] = C::new(1.0, 0.0);
        let mut psi = Statevector::from_amplitudes(amps)?;
        for g in &circuit.gates {
            psi.apply(g);
        }
        for (j, a) in psi.amplitudes().iter().enumerate() {
            m[j][k] = *a;
        }
    }
    Ok(m)
}

/// Phase-insensitive agreement `|Tr(U†V)| / d`.
pub fn phase_fidelity(u: &[Vec<C>], v: &[Vec<C>]) -> f64 {
    let tr: C = u
        .iter()
        .zip(v)
        .flat_map(|(ru, rv)| ru.iter().zip(rv).map(|(a, b)| a.conj() * b))
        .sum();
    tr.norm() / u.len() as f64
}
