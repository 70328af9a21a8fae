use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::{features_for, uniform_parameters, GameCircuit, ValueFunction};
use crate::circuit::Coalition;
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::rng::{derive_named, rng};
use crate::simulator::run_bound;

/// How pair fidelities are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FidelityMode {
    /// `F = |⟨ψ(θ₁)|ψ(θ₂)⟩|` from exact statevectors.
    Exact,
    /// Simulated SWAP-test outcomes: `shots` Bernoulli draws with
    /// `P(1) = 1/2 − F/2`, then `F̂ = 1 − 2·ones/shots` clamped to `[0, 1]`.
    SwapShots { shots: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpressibilityConfig {
    /// Parameter pairs `c_p`.
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    /// Histogram bins `c_b`.
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_mode")]
    pub mode: FidelityMode,
    /// Fixed feature vector (zeros if absent).
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    /// Seed of the parameter pairs, shared by all coalitions.
    #[serde(default)]
    pub seed: u64,
}

fn default_pairs() -> usize {
    5000
}

fn default_bins() -> usize {
    75
}

fn default_mode() -> FidelityMode {
    FidelityMode::Exact
}

impl Default for ExpressibilityConfig {
    fn default() -> Self {
        ExpressibilityConfig {
            pairs: default_pairs(),
            bins: default_bins(),
            mode: default_mode(),
            x: None,
            seed: 0,
        }
    }
}

/// Bin of fidelity `f` among `bins` equal bins on `[0, 1]`; `f = 1` falls in
/// the last bin.
pub fn fidelity_bin(f: f64, bins: usize) -> usize {
    if f >= 1.0 {
        bins - 1
    } else {
        ((f.max(0.0) * bins as f64).floor() as usize).min(bins - 1)
    }
}

/// Natural logarithm of the Haar fidelity mass in each bin:
/// `∫ (d)(1−F)^{d−1} dF = (1−F_lo)^d − (1−F_hi)^d` with `d = 2^q − 1`,
/// computed in log space so large registers do not underflow.
pub fn haar_bin_masses(qubits: usize, bins: usize) -> Vec<f64> {
    let d = (2f64).powi(qubits as i32) - 1.0;
    (0..bins)
        .map(|b| {
            let lo = b as f64 / bins as f64;
            let hi = (b + 1) as f64 / bins as f64;
            let log_lo = d * (1.0 - lo).ln();
            let ratio = if b + 1 == bins {
                f64::NEG_INFINITY
            } else {
                d * ((1.0 - hi) / (1.0 - lo)).ln()
            };
            log_lo + (-ratio.exp_m1()).ln()
        })
        .collect()
}

/// `Σ p ln(p/q)` with `0 ln 0 = 0`; `log_q` holds `ln q`.
pub fn kl_divergence(p: &[f64], log_q: &[f64]) -> f64 {
    let terms: Vec<f64> = p
        .iter()
        .zip(log_q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &lq)| pi * (pi.ln() - lq))
        .collect();
    pairwise_sum(&terms)
}

/// Negative expressibility `v(S) = −η(S)`: the KL divergence between the
/// histogram of pair fidelities and the Haar reference, negated so that more
/// expressive coalitions score higher.
///
/// The fidelity is `|⟨ψ₁|ψ₂⟩|` and the Haar reference density is
/// `(2^q − 1)(1 − F)^{2^q − 2}`, as the estimator is usually stated; note the
/// Haar density is the law of the *squared* overlap, so absolute values of
/// `η` are offset accordingly while coalition comparisons are unaffected.
pub struct Expressibility {
    game: GameCircuit,
    cfg: ExpressibilityConfig,
    x: Vec<f64>,
    pairs: Vec<(Vec<f64>, Vec<f64>)>,
    log_haar: Vec<f64>,
}

impl Expressibility {
    pub fn new(game: GameCircuit, cfg: ExpressibilityConfig) -> Result<Self> {
        if cfg.pairs == 0 || cfg.bins == 0 {
            return Err(Error::Config(
                "expressibility needs pairs ≥ 1 and bins ≥ 1".into(),
            ));
        }
        if let FidelityMode::SwapShots { shots: 0 } = cfg.mode {
            return Err(Error::Config(
                "expressibility swap_shots needs shots ≥ 1".into(),
            ));
        }
        let x = features_for(&game, &cfg.x)?;
        let draws = uniform_parameters(
            game.theta_dim(),
            2 * cfg.pairs,
            derive_named(cfg.seed, "expressibility", &[]),
        );
        let mut it = draws.into_iter();
        let pairs = (0..cfg.pairs)
            .map(|_| (it.next().unwrap(), it.next().unwrap()))
            .collect();
        let log_haar = haar_bin_masses(game.qubits(), cfg.bins);
        Ok(Expressibility {
            game,
            cfg,
            x,
            pairs,
            log_haar,
        })
    }

    /// Pair fidelities of coalition `s`.
    pub fn fidelities(&self, s: Coalition, seed: u64) -> Result<Vec<f64>> {
        let sub = self.game.subcircuit(s)?;
        let mut r = rng(seed);
        self.pairs
            .iter()
            .map(|(t1, t2)| {
                let a = run_bound(&sub.bind(&self.x, t1)?)?;
                let b = run_bound(&sub.bind(&self.x, t2)?)?;
                let f = a.inner(&b).norm().min(1.0);
                Ok(match self.cfg.mode {
                    FidelityMode::Exact => f,
                    FidelityMode::SwapShots { shots } => {
                        let p1 = (0.5 - 0.5 * f).clamp(0.0, 1.0);
                        let ones = Binomial::new(shots, p1)
                            .expect("valid binomial")
                            .sample(&mut r);
                        (1.0 - 2.0 * ones as f64 / shots as f64).clamp(0.0, 1.0)
                    }
                })
            })
            .collect()
    }

    /// `η(S) ≥ 0`.
    pub fn eta(&self, s: Coalition, seed: u64) -> Result<f64> {
        let mut hist = vec![0.0; self.cfg.bins];
        for f in self.fidelities(s, seed)? {
            hist[fidelity_bin(f, self.cfg.bins)] += 1.0;
        }
        for h in &mut hist {
            *h /= self.cfg.pairs as f64;
        }
        Ok(kl_divergence(&hist, &self.log_haar))
    }
}

impl ValueFunction for Expressibility {
    fn name(&self) -> &str {
        "expressibility"
    }

    fn players(&self) -> usize {
        self.game.players()
    }

    fn is_deterministic(&self) -> bool {
        self.cfg.mode == FidelityMode::Exact
    }

    fn value(&self, s: Coalition, seed: u64) -> Result<f64> {
        Ok(-self.eta(s, seed)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, CoalitionGame, Gate, GateKind, ParamExpr};

    fn game(gates: Vec<Gate>, qubits: usize, theta_dim: usize) -> GameCircuit {
        let circuit = Circuit::from_gates(qubits, theta_dim, 0, gates).unwrap();
        GameCircuit::new(CoalitionGame::all_active(circuit).unwrap(), None).unwrap()
    }

    #[test]
    fn bins_and_haar_masses() {
        assert_eq!(fidelity_bin(0.0, 75), 0);
        assert_eq!(fidelity_bin(1.0, 75), 74);
        assert_eq!(fidelity_bin(0.999_999, 75), 74);
        assert_eq!(fidelity_bin(0.5, 4), 2);
        for q in [1, 2, 5, 10] {
            let total: f64 = haar_bin_masses(q, 75).iter().map(|l| l.exp()).sum();
            assert!((total - 1.0).abs() < 1e-12, "q={q}: {total}");
        }
        // q = 1: uniform reference
        for l in haar_bin_masses(1, 75) {
            assert!((l + 75f64.ln()).abs() < 1e-12);
        }
        // deep registers stay finite
        assert!(haar_bin_masses(20, 75).iter().all(|l| l.is_finite()));
    }

    #[test]
    fn kl_self_is_zero() {
        let p = [0.25, 0.5, 0.25];
        let lp: Vec<f64> = p.iter().map(|v: &f64| v.ln()).collect();
        assert_eq!(kl_divergence(&p, &lp), 0.0);
    }

    #[test]
    fn parameter_free_single_qubit() {
        let g = game(vec![Gate::fixed(GateKind::H, &[0])], 1, 0);
        let cfg = ExpressibilityConfig {
            pairs: 50,
            ..Default::default()
        };
        let e = Expressibility::new(g, cfg).unwrap();
        assert!((e.eta(Coalition(1), 0).unwrap() - 75f64.ln()).abs() < 1e-9);
        assert!((e.eta(Coalition::EMPTY, 0).unwrap() - 75f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn swap_shot_mode_tracks_exact_mode() {
        let gates = vec![Gate::rotation(GateKind::RY, &[0], ParamExpr::theta(0))];
        let exact = Expressibility::new(
            game(gates.clone(), 1, 1),
            ExpressibilityConfig {
                pairs: 2000,
                bins: 10,
                ..Default::default()
            },
        )
        .unwrap();
        let shots = Expressibility::new(
            game(gates, 1, 1),
            ExpressibilityConfig {
                pairs: 2000,
                bins: 10,
                mode: FidelityMode::SwapShots { shots: 4000 },
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!shots.is_deterministic());
        let fe = exact.fidelities(Coalition(1), 0).unwrap();
        let fs = shots.fidelities(Coalition(1), 3).unwrap();
        // per-pair sd of the estimate is at most 2·√(1/4 / 4000) ≈ 0.016
        let errors: Vec<f64> = fe.iter().zip(&fs).map(|(a, b)| (a - b).abs()).collect();
        let worst = errors.iter().cloned().fold(0.0, f64::max);
        assert!(worst < 0.1, "{worst}");
        assert!(crate::numeric::mean(&errors) < 0.02);
    }
}
