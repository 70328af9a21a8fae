//! Undirected simple graphs, used both as max-cut problem instances and as
//! hardware coupling maps. The JSON form is `{"qubits": n, "edges": [[a, b], ...]}`.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    #[serde(rename = "qubits")]
    nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Build a graph, normalizing every edge to `(min, max)` and sorting the list.
    pub fn new(nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut normalized: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a >= nodes || b >= nodes {
                return Err(Error::Config(format!(
                    "edge ({a}, {b}) references a node outside 0..{nodes}"
                )));
            }
            if a == b {
                return Err(Error::Config(format!("self-loop on node {a}")));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        let before = normalized.len();
        normalized.dedup();
        if normalized.len() != before {
            return Err(Error::Config("duplicate edge".into()));
        }
        Ok(Graph {
            nodes,
            edges: normalized,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: Graph = serde_json::from_str(text)?;
        Graph::new(raw.nodes, raw.edges)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Graph::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Edges as sorted `(low, high)` pairs.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Sorted adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Number of edges cut by the bipartition encoded in `assignment`
    /// (bit `v` gives the side of vertex `v`).
    pub fn cut_value(&self, assignment: u64) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| ((assignment >> a) ^ (assignment >> b)) & 1 == 1)
            .count()
    }

    /// Connected components as sorted node lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.nodes];
        let mut out = Vec::new();
        for start in 0..self.nodes {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Result of exhaustive max-cut search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaxCut {
    pub value: usize,
    /// Every optimal assignment with vertex 0 on side 0 (one per complement pair).
    pub optimal: Vec<u64>,
}

/// Exhaustive max-cut over all `2^n` assignments.
pub fn brute_force_maxcut(graph: &Graph) -> Result<MaxCut> {
    if graph.nodes() > 30 {
        return Err(Error::ResourceCap(format!(
            "brute-force max-cut over {} vertices",
            graph.nodes()
        )));
    }
    let mut best = 0;
    let mut optimal = Vec::new();
    for assignment in 0..(1u64 << graph.nodes()) {
        if graph.nodes() > 0 && assignment & 1 == 1 {
            continue;
        }
        let value = graph.cut_value(assignment);
        if value > best {
            best = value;
            optimal.clear();
        }
        if value == best {
            optimal.push(assignment);
        }
    }
    Ok(MaxCut {
        value: best,
        optimal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::new(3, [(0, 3)]).is_err());
        assert!(Graph::new(3, [(1, 1)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn triangle_maxcut() {
        let g = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let cut = brute_force_maxcut(&g).unwrap();
        assert_eq!(cut.value, 2);
        assert_eq!(cut.optimal.len(), 3);
    }

    #[test]
    fn json_round_trip() {
        let g = Graph::new(4, [(2, 1), (0, 3)]).unwrap();
        assert_eq!(g.edges(), &[(0, 3), (1, 2)]);
        assert_eq!(Graph::from_json_str(&g.to_json()).unwrap(), g);
        assert_eq!(g.components().len(), 2);
    }
}
