use std::collections::HashMap;

use rayon::prelude::*;

use crate::circuit::Coalition;
use crate::error::{Error, Result};
use crate::rng::derive;

/// A (possibly noisy) value function over coalitions of players.
///
/// Implementations must be pure given `(coalition, seed)`. Deterministic
/// implementations ignore the seed.
pub trait ValueFunction: Sync {
    fn name(&self) -> &str;

    fn players(&self) -> usize;

    fn is_deterministic(&self) -> bool;

    fn value(&self, coalition: Coalition, seed: u64) -> Result<f64>;
}

/// A value function backed by a closure.
pub struct FnValue<F> {
    name: String,
    players: usize,
    deterministic: bool,
    f: F,
}

impl<F> FnValue<F>
where
    F: Fn(Coalition, u64) -> f64 + Sync,
{
    pub fn new(name: impl Into<String>, players: usize, deterministic: bool, f: F) -> Self {
        FnValue {
            name: name.into(),
            players,
            deterministic,
            f,
        }
    }
}

/// A deterministic game `v(S)` from a closure.
pub fn deterministic_game(
    players: usize,
    f: impl Fn(Coalition) -> f64 + Sync,
) -> FnValue<impl Fn(Coalition, u64) -> f64 + Sync> {
    FnValue::new("custom", players, true, move |s, _| f(s))
}

impl<F> ValueFunction for FnValue<F>
where
    F: Fn(Coalition, u64) -> f64 + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn players(&self) -> usize {
        self.players
    }

    fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    fn value(&self, coalition: Coalition, seed: u64) -> Result<f64> {
        Ok((self.f)(coalition, seed))
    }
}

/// Persistent storage for evaluated values keyed by `(mask, rep)`.
pub trait ValueStore: Send {
    fn get(&self, mask: u64, rep: u32) -> Option<f64>;

    /// Record a batch of fresh evaluations, in request order.
    fn put_batch(&mut self, entries: &[(u64, u32, f64)]) -> Result<()>;
}

/// An in-memory [`ValueStore`].
#[derive(Debug, Default, Clone)]
pub struct MemoryStore {
    values: HashMap<(u64, u32), f64>,
}

impl MemoryStore {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl ValueStore for MemoryStore {
    fn get(&self, mask: u64, rep: u32) -> Option<f64> {
        self.values.get(&(mask, rep)).copied()
    }

    fn put_batch(&mut self, entries: &[(u64, u32, f64)]) -> Result<()> {
        for &(m, r, v) in entries {
            self.values.insert((m, r), v);
        }
        Ok(())
    }
}

/// Requests per parallel chunk; the store is updated after each chunk so an
/// interrupted run keeps its progress.
const CHUNK: usize = 1 << 12;

/// Evaluates value-function realizations with derived seeds and optional
/// persistence.
///
/// Realization `rep` of coalition `S` is evaluated with seed
/// `derive(seed, [mask(S), rep])`, so the value depends only on the request,
/// not on evaluation order or thread count. Deterministic value functions
/// collapse every `rep` onto `0`.
pub struct Oracle<'a> {
    vf: &'a dyn ValueFunction,
    seed: u64,
    store: Option<&'a mut dyn ValueStore>,
    computed: u64,
}

impl<'a> Oracle<'a> {
    pub fn new(vf: &'a dyn ValueFunction, seed: u64) -> Self {
        Oracle {
            vf,
            seed,
            store: None,
            computed: 0,
        }
    }

    pub fn with_store(mut self, store: &'a mut dyn ValueStore) -> Self {
        self.store = Some(store);
        self
    }

    pub fn players(&self) -> usize {
        self.vf.players()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_deterministic(&self) -> bool {
        self.vf.is_deterministic()
    }

    pub fn value_function(&self) -> &dyn ValueFunction {
        self.vf
    }

    /// Number of value-function calls made so far (cache hits excluded).
    pub fn computed(&self) -> u64 {
        self.computed
    }

    /// Canonical replication index for storage.
    pub fn rep_key(&self, rep: u32) -> u32 {
        if self.vf.is_deterministic() {
            0
        } else {
            rep
        }
    }

    /// Evaluate distinct `(coalition, rep)` requests, returning values in
    /// request order. Reps must already be canonical (see [`Oracle::rep_key`]).
    pub fn evaluate(&mut self, requests: &[(Coalition, u32)]) -> Result<Vec<f64>> {
        let mut out = vec![f64::NAN; requests.len()];
        let mut missing = Vec::new();
        for (slot, &(s, rep)) in requests.iter().enumerate() {
            match self.store.as_ref().and_then(|st| st.get(s.mask(), rep)) {
                Some(v) => out[slot] = v,
                None => missing.push(slot),
            }
        }
        let vf = self.vf;
        let seed = self.seed;
        for chunk in missing.chunks(CHUNK) {
            let values = chunk
                .par_iter()
                .map(|&slot| {
                    let (s, rep) = requests[slot];
                    let v = vf.value(s, derive(seed, &[s.mask(), u64::from(rep)]))?;
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(Error::Numeric(format!(
                            "{} returned {v} for coalition {s}",
                            vf.name()
                        )))
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            let entries: Vec<(u64, u32, f64)> = chunk
                .iter()
                .zip(&values)
                .map(|(&slot, &v)| (requests[slot].0.mask(), requests[slot].1, v))
                .collect();
            if let Some(store) = self.store.as_mut() {
                store.put_batch(&entries)?;
            }
            for (&slot, v) in chunk.iter().zip(values) {
                out[slot] = v;
            }
            self.computed += chunk.len() as u64;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_short_circuits_evaluation() {
        let vf = FnValue::new("noisy", 3, false, |s: Coalition, seed: u64| {
            s.len() as f64 + (seed % 7) as f64
        });
        let mut store = MemoryStore::default();
        let reqs: Vec<(Coalition, u32)> = (0..8)
            .flat_map(|m| [(Coalition(m), 0), (Coalition(m), 1)])
            .collect();
        let first = {
            let mut o = Oracle::new(&vf, 5).with_store(&mut store);
            let v = o.evaluate(&reqs).unwrap();
            assert_eq!(o.computed(), 16);
            v
        };
        let mut o = Oracle::new(&vf, 5).with_store(&mut store);
        assert_eq!(o.evaluate(&reqs).unwrap(), first);
        assert_eq!(o.computed(), 0);
        // without a store the same seeds reproduce the same values
        assert_eq!(Oracle::new(&vf, 5).evaluate(&reqs).unwrap(), first);
    }

    #[test]
    fn non_finite_values_are_errors() {
        let vf = deterministic_game(1, |_| f64::NAN);
        let err = Oracle::new(&vf, 0)
            .evaluate(&[(Coalition(0), 0)])
            .unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }
}
