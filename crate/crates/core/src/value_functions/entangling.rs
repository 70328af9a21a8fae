use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use super::{features_for, uniform_parameters, GameCircuit, ValueFunction};
use crate::circuit::Coalition;
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::rng::derive_named;
use crate::simulator::{run_bound, Statevector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntanglingConfig {
    /// Parameter samples `c_s`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    1000
}

impl Default for EntanglingConfig {
    fn default() -> Self {
        EntanglingConfig {
            samples: default_samples(),
            x: None,
            seed: 0,
        }
    }
}

/// `D(u, v) = ½ Σ_{i,j} |u_i v_j − u_j v_i|²`.
pub fn mw_distance(u: &[C], v: &[C]) -> f64 {
    let mut terms = Vec::with_capacity(u.len() * u.len());
    for i in 0..u.len() {
        for j in 0..u.len() {
            terms.push((u[i] * v[j] - u[j] * v[i]).norm_sqr());
        }
    }
    0.5 * pairwise_sum(&terms)
}

/// `ι_j(b)ψ`: amplitudes with wire `j` fixed to `b`, wire `j` deleted.
fn project_delete(psi: &Statevector, j: usize, b: usize) -> Vec<C> {
    let amps = psi.amplitudes();
    let low = (1usize << j) - 1;
    (0..amps.len() / 2)
        .map(|k| amps[(k & low) | b << j | (k & !low) << 1])
        .collect()
}

/// Meyer-Wallach measure `Q = (4/q) Σ_j D(ι_j(0)ψ, ι_j(1)ψ)`; zero for one qubit.
pub fn meyer_wallach(psi: &Statevector) -> f64 {
    let q = psi.qubits();
    if q < 2 {
        return 0.0;
    }
    let d: Vec<f64> = (0..q)
        .map(|j| mw_distance(&project_delete(psi, j, 0), &project_delete(psi, j, 1)))
        .collect();
    (4.0 / q as f64 * pairwise_sum(&d)).clamp(0.0, 1.0)
}

/// The same measure via single-qubit purities, `2(1 − (1/q) Σ_j Tr ρ_j²)`.
pub fn meyer_wallach_purity(psi: &Statevector) -> f64 {
    let q = psi.qubits();
    if q < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for j in 0..q {
        let u = project_delete(psi, j, 0);
        let v = project_delete(psi, j, 1);
        let r00: f64 = u.iter().map(|a| a.norm_sqr()).sum();
        let r11: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        let r01: C = u.iter().zip(&v).map(|(a, b)| a * b.conj()).sum();
        total += r00 * r00 + r11 * r11 + 2.0 * r01.norm_sqr();
    }
    2.0 * (1.0 - total / q as f64)
}

/// Entangling capability: mean Meyer-Wallach measure over sampled parameters.
pub struct EntanglingCapability {
    game: GameCircuit,
    x: Vec<f64>,
    thetas: Vec<Vec<f64>>,
}

impl EntanglingCapability {
    pub fn new(game: GameCircuit, cfg: EntanglingConfig) -> Result<Self> {
        if cfg.samples == 0 {
            return Err(Error::Config(
                "entangling capability needs samples ≥ 1".into(),
            ));
        }
        let x = features_for(&game, &cfg.x)?;
        let thetas = uniform_parameters(
            game.theta_dim(),
            cfg.samples,
            derive_named(cfg.seed, "entangling", &[]),
        );
        Ok(EntanglingCapability { game, x, thetas })
    }
}

impl ValueFunction for EntanglingCapability {
    fn name(&self) -> &str {
        "entangling"
    }

    fn players(&self) -> usize {
        self.game.players()
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn value(&self, s: Coalition, _seed: u64) -> Result<f64> {
        let sub = self.game.subcircuit(s)?;
        let q: Vec<f64> = self
            .thetas
            .iter()
            .map(|t| Ok(meyer_wallach(&run_bound(&sub.bind(&self.x, t)?)?)))
            .collect::<Result<_>>()?;
        Ok(pairwise_sum(&q) / q.len() as f64)
    }
}
