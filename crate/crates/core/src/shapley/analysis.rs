use std::collections::BTreeMap;

use super::weight;
use crate::circuit::Coalition;
use crate::numeric::pairwise_sum;

/// One atom of a marginal-contribution distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginal {
    pub delta: f64,
    pub weight: f64,
}

/// Per-player distributions of marginal contributions `Δ_i v(S)`, atoms
/// sorted by `delta` with equal deltas merged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarginalDistribution {
    pub players: Vec<Vec<Marginal>>,
}

fn merge(mut atoms: Vec<Marginal>) -> Vec<Marginal> {
    atoms.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    let mut out: Vec<Marginal> = Vec::with_capacity(atoms.len());
    let mut run: Vec<f64> = Vec::new();
    for a in atoms {
        match out.last_mut() {
            Some(last) if last.delta == a.delta => run.push(a.weight),
            _ => {
                if let Some(last) = out.last_mut() {
                    last.weight = pairwise_sum(&run);
                }
                run = vec![a.weight];
                out.push(a);
            }
        }
    }
    if let Some(last) = out.last_mut() {
        last.weight = pairwise_sum(&run);
    }
    out
}

impl MarginalDistribution {
    /// Every coalition of a complete value table, weighted by `w(|S|)`.
    pub fn from_table(values: &[f64]) -> Self {
        let n = values.len().trailing_zeros() as usize;
        let players = (0..n)
            .map(|i| {
                let bit = 1usize << i;
                let atoms = (0..values.len())
                    .filter(|s| s & bit == 0)
                    .map(|s| Marginal {
                        delta: values[s | bit] - values[s],
                        weight: weight(s.count_ones() as usize, n).unwrap(),
                    })
                    .collect();
                merge(atoms)
            })
            .collect();
        MarginalDistribution { players }
    }

    /// Sampled marginals, each draw weighted `1/n`.
    pub fn from_draws(deltas: &[Vec<f64>]) -> Self {
        let players = deltas
            .iter()
            .map(|d| {
                let w = 1.0 / d.len() as f64;
                merge(
                    d.iter()
                        .map(|&delta| Marginal { delta, weight: w })
                        .collect(),
                )
            })
            .collect();
        MarginalDistribution { players }
    }

    /// Mean `Σ w Δ` of player `i`'s distribution.
    pub fn mean(&self, i: usize) -> f64 {
        let terms: Vec<f64> = self.players[i].iter().map(|m| m.weight * m.delta).collect();
        pairwise_sum(&terms)
    }

    /// `√(E[Δ²] − E[Δ]²)`, the spread of player `i`'s marginal contributions.
    pub fn std_dev(&self, i: usize) -> f64 {
        let sq: Vec<f64> = self.players[i]
            .iter()
            .map(|m| m.weight * m.delta * m.delta)
            .collect();
        let mu = self.mean(i);
        (pairwise_sum(&sq) - mu * mu).max(0.0).sqrt()
    }

    /// Drop atoms lighter than `min_weight` (plots use 0.001).
    pub fn filtered(&self, min_weight: f64) -> Self {
        MarginalDistribution {
            players: self
                .players
                .iter()
                .map(|p| {
                    p.iter()
                        .copied()
                        .filter(|m| m.weight >= min_weight)
                        .collect()
                })
                .collect(),
        }
    }
}

/// CSV `player,delta,weight` with 1-based player numbers.
pub fn marginals_to_csv(dist: &MarginalDistribution) -> String {
    let mut out = String::from("player,delta,weight\n");
    for (i, atoms) in dist.players.iter().enumerate() {
        for m in atoms {
            out.push_str(&format!("{},{:?},{:?}\n", i + 1, m.delta, m.weight));
        }
    }
    out
}

/// Values grouped by coalition size: `W_k` for every `k` that occurs.
pub fn value_multisets(table: &super::ValueTable) -> BTreeMap<usize, Vec<(Coalition, f64)>> {
    let mut out: BTreeMap<usize, Vec<(Coalition, f64)>> = BTreeMap::new();
    for (s, v) in table.iter() {
        out.entry(s.len()).or_default().push((s, v));
    }
    out
}

/// CSV `k,mask,value`.
pub fn multisets_to_csv(sets: &BTreeMap<usize, Vec<(Coalition, f64)>>) -> String {
    let mut out = String::from("k,mask,value\n");
    for (k, entries) in sets {
        for (s, v) in entries {
            out.push_str(&format!("{k},{s},{v:?}\n"));
        }
    }
    out
}

/// Best value among coalitions of `k` players and the running frontier.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoRow {
    pub k: usize,
    pub count: usize,
    pub best: f64,
    /// Best value achievable with at most `k` players.
    pub frontier: f64,
    /// Whether `k` strictly improves on every smaller size.
    pub pareto: bool,
    /// Every coalition of size `k` attaining `best`.
    pub argmax: Vec<Coalition>,
}

/// Maximize value while minimizing the number of players.
pub fn pareto_frontier(sets: &BTreeMap<usize, Vec<(Coalition, f64)>>) -> Vec<ParetoRow> {
    let mut rows = Vec::new();
    let mut frontier = f64::NEG_INFINITY;
    for (&k, entries) in sets {
        let best = entries
            .iter()
            .map(|e| e.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let argmax = entries
            .iter()
            .filter(|e| e.1 == best)
            .map(|e| e.0)
            .collect();
        let pareto = best > frontier;
        frontier = frontier.max(best);
        rows.push(ParetoRow {
            k,
            count: entries.len(),
            best,
            frontier,
            pareto,
            argmax,
        });
    }
    rows
}

/// CSV `k,count,best,frontier,pareto,best_coalitions` (masks space-separated).
pub fn pareto_to_csv(rows: &[ParetoRow]) -> String {
    let mut out = String::from("k,count,best,frontier,pareto,best_coalitions\n");
    for r in rows {
        let masks: Vec<String> = r.argmax.iter().map(|s| s.to_string()).collect();
        out.push_str(&format!(
            "{},{},{:?},{:?},{},{}\n",
            r.k,
            r.count,
            r.best,
            r.frontier,
            r.pareto,
            masks.join(" ")
        ));
    }
    out
}

/// Marginal distribution of a complete table (exact mode).
pub fn marginal_distribution(values: &[f64]) -> MarginalDistribution {
    MarginalDistribution::from_table(values)
}
