use std::collections::BTreeMap;

use rand::Rng as _;

use super::{bitstring, parse_bitstring};
use crate::error::{Error, Result};
use crate::rng::rng;

/// A multiset of `shots` measured bit strings, keyed by basis index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecord {
    qubits: usize,
    shots: u64,
    counts: BTreeMap<usize, u64>,
}

impl ShotRecord {
    pub fn new(qubits: usize, counts: BTreeMap<usize, u64>) -> Result<Self> {
        if let Some(&b) = counts.keys().find(|&&b| b >> qubits != 0) {
            return Err(Error::Dimension(format!(
                "outcome {b} outside {qubits} qubit(s)"
            )));
        }
        let counts: BTreeMap<usize, u64> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        let shots = counts.values().sum();
        Ok(ShotRecord {
            qubits,
            shots,
            counts,
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    pub fn count(&self, outcome: usize) -> u64 {
        self.counts.get(&outcome).copied().unwrap_or(0)
    }

    /// Relative frequencies as a dense vector over all `2^q` outcomes.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut f = vec![0.0; 1 << self.qubits];
        for (&b, &c) in &self.counts {
            f[b] = c as f64 / self.shots as f64;
        }
        f
    }

    /// CSV `bitstring,count`, outcomes in ascending index order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitstring,count\n");
        for (&b, &c) in &self.counts {
            out.push_str(&format!("{},{c}\n", bitstring(b, self.qubits)));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut counts = BTreeMap::new();
        let mut qubits = None;
        for row in reader.records() {
            let row = row?;
            let (bits, count) = (&row[0], &row[1]);
            if *qubits.get_or_insert(bits.len()) != bits.len() {
                return Err(Error::Config("bit strings of different lengths".into()));
            }
            let count: u64 = count
                .parse()
                .map_err(|_| Error::Config(format!("bad count `{count}`")))?;
            *counts.entry(parse_bitstring(bits)?).or_insert(0) += count;
        }
        ShotRecord::new(qubits.unwrap_or(0), counts)
    }
}

/// Draw `shots` i.i.d. outcomes from `probs` (indexed by basis state).
pub fn sample(probs: &[f64], shots: u64, seed: u64) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(Error::Config("shot count must be at least 1".into()));
    }
    if !probs.len().is_power_of_two() {
        return Err(Error::Dimension(format!(
            "{} outcomes is not 2^q",
            probs.len()
        )));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::Numeric(
            "probabilities must be finite and nonnegative".into(),
        ));
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cdf.push(acc);
    }
    if acc <= 0.0 {
        return Err(Error::Numeric("distribution has zero total mass".into()));
    }
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut r = rng(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let u = r.random::<f64>() * acc;
        let b = cdf.partition_point(|&c| c <= u).min(last);
        *counts.entry(b).or_insert(0) += 1;
    }
    ShotRecord::new(probs.len().trailing_zeros() as usize, counts)
}

/// Independent per-qubit readout flips: `flips[j] = [p(0→1), p(1→0)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    flips: Vec<[f64; 2]>,
}

impl NoiseModel {
    pub fn new(flips: Vec<[f64; 2]>) -> Result<Self> {
        if flips.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config(
                "flip probabilities must lie in [0, 1]".into(),
            ));
        }
        Ok(NoiseModel { flips })
    }

    pub fn noiseless(qubits: usize) -> Self {
        NoiseModel {
            flips: vec![[0.0; 2]; qubits],
        }
    }

    /// The same flip probability in both directions on every qubit.
    pub fn symmetric(qubits: usize, p: f64) -> Result<Self> {
        NoiseModel::new(vec![[p, p]; qubits])
    }

    pub fn qubits(&self) -> usize {
        self.flips.len()
    }

    pub fn flips(&self) -> &[[f64; 2]] {
        &self.flips
    }

    pub fn is_noiseless(&self) -> bool {
        self.flips.iter().flatten().all(|&p| p == 0.0)
    }

    /// Flip each recorded bit independently; shot count is preserved.
    pub fn apply(&self, record: &ShotRecord, seed: u64) -> Result<ShotRecord> {
        if record.qubits() != self.qubits() {
            return Err(Error::Dimension(format!(
                "noise model covers {} qubits, record has {}",
                self.qubits(),
                record.qubits()
            )));
        }
        if self.is_noiseless() {
            return Ok(record.clone());
        }
        let mut r = rng(seed);
        let mut counts = BTreeMap::new();
        for (&b, &c) in record.counts() {
            for _ in 0..c {
                let mut out = b;
                for (j, [p01, p10]) in self.flips.iter().enumerate() {
                    let p = if b >> j & 1 == 0 { p01 } else { p10 };
                    if r.random::<f64>() < *p {
                        out ^= 1 << j;
                    }
                }
                *counts.entry(out).or_insert(0) += 1;
            }
        }
        ShotRecord::new(record.qubits(), counts)
    }

    /// Exact outcome distribution after readout noise.
    pub fn transform(&self, probs: &[f64]) -> Vec<f64> {
        let mats: Vec<[[f64; 2]; 2]> = self
            .flips
            .iter()
            .map(|&[p01, p10]| [[1.0 - p01, p10], [p01, 1.0 - p10]])
            .collect();
        tensor_apply(probs, &mats)
    }
}

/// Per-qubit column-stochastic readout matrices `m[measured][prepared]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationMatrix {
    per_qubit: Vec<[[f64; 2]; 2]>,
}

impl CalibrationMatrix {
    pub fn identity(qubits: usize) -> Self {
        CalibrationMatrix {
            per_qubit: vec![[[1.0, 0.0], [0.0, 1.0]]; qubits],
        }
    }

    /// Calibration equal to the noise model's true flip rates.
    pub fn exact(noise: &NoiseModel) -> Self {
        CalibrationMatrix {
            per_qubit: noise
                .flips()
                .iter()
                .map(|&[p01, p10]| [[1.0 - p01, p10], [p01, 1.0 - p10]])
                .collect(),
        }
    }

    /// Estimate flip rates by preparing `|0…0⟩` and `|1…1⟩`, `shots` times
    /// each, and reading them out through `noise`.
    pub fn calibrate(noise: &NoiseModel, shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::Config("calibration needs at least 1 shot".into()));
        }
        let q = noise.qubits();
        let ones = (1usize << q) - 1;
        let zeros_rec = noise.apply(
            &ShotRecord::new(q, BTreeMap::from([(0, shots)]))?,
            crate::rng::derive(seed, &[0]),
        )?;
        let ones_rec = noise.apply(
            &ShotRecord::new(q, BTreeMap::from([(ones, shots)]))?,
            crate::rng::derive(seed, &[1]),
        )?;
        let rate = |rec: &ShotRecord, j: usize, bit: usize| {
            rec.counts()
                .iter()
                .filter(|(&b, _)| b >> j & 1 == bit)
                .map(|(_, &c)| c)
                .sum::<u64>() as f64
                / shots as f64
        };
        let per_qubit = (0..q)
            .map(|j| {
                let p01 = rate(&zeros_rec, j, 1);
                let p10 = rate(&ones_rec, j, 0);
                [[1.0 - p01, p10], [p01, 1.0 - p10]]
            })
            .collect();
        Ok(CalibrationMatrix { per_qubit })
    }

    pub fn qubits(&self) -> usize {
        self.per_qubit.len()
    }

    pub fn per_qubit(&self) -> &[[[f64; 2]; 2]] {
        &self.per_qubit
    }

    /// Apply the per-qubit inverses to a measured distribution, clip negative
    /// quasi-probabilities to zero and renormalize.
    pub fn mitigate(&self, measured: &[f64]) -> Result<Vec<f64>> {
        if measured.len() != 1 << self.qubits() {
            return Err(Error::Dimension(format!(
                "distribution over {} outcomes, calibration for {} qubits",
                measured.len(),
                self.qubits()
            )));
        }
        let inverses = self
            .per_qubit
            .iter()
            .enumerate()
            .map(|(j, m)| {
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                if det.abs() < 1e-9 {
                    return Err(Error::Mitigation(format!(
                        "readout matrix of qubit {j} is singular"
                    )));
                }
                Ok([
                    [m[1][1] / det, -m[0][1] / det],
                    [-m[1][0] / det, m[0][0] / det],
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        let mut quasi = tensor_apply(measured, &inverses);
        for v in &mut quasi {
            *v = v.max(0.0);
        }
        let total: f64 = quasi.iter().sum();
        if total <= 0.0 {
            return Err(Error::Mitigation(
                "mitigated distribution has no mass".into(),
            ));
        }
        for v in &mut quasi {
            *v /= total;
        }
        Ok(quasi)
    }

    pub fn mitigate_record(&self, record: &ShotRecord) -> Result<Vec<f64>> {
        self.mitigate(&record.frequencies())
    }
}

/// Apply `mats[j]` along axis `j` of a length-`2^q` vector.
fn tensor_apply(v: &[f64], mats: &[[[f64; 2]; 2]]) -> Vec<f64> {
    let mut out = v.to_vec();
    for (j, m) in mats.iter().enumerate() {
        let bit = 1 << j;
        for i in 0..out.len() {
            if i & bit == 0 {
                let (a, b) = (out[i], out[i | bit]);
                out[i] = m[0][0] * a + m[0][1] * b;
                out[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }
    out
}

/// Hellinger fidelity `(Σ_b √(p_b q_b))²` of the normalized inputs, clamped
/// to `[0, 1]`. Normalizing makes `hellinger(p, p)` exactly 1 even when `p`
/// sums to 1 only up to rounding.
pub fn hellinger(p: &[f64], q: &[f64]) -> f64 {
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    let norm = p.iter().sum::<f64>() * q.iter().sum::<f64>();
    if norm <= 0.0 {
        return 0.0;
    }
    (bc * bc / norm).clamp(0.0, 1.0)
}

/// CSV `bitstring,probability`, every outcome in index order.
pub fn distribution_to_csv(probs: &[f64]) -> String {
    let q = probs.len().trailing_zeros() as usize;
    let mut out = String::from("bitstring,probability\n");
    for (b, p) in probs.iter().enumerate() {
        out.push_str(&format!("{},{p:?}\n", bitstring(b, q)));
    }
    out
}
