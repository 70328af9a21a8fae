use std::f64::consts::{PI, TAU};
use std::path::Path;

use num_complex::Complex64 as C;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::feature_map;
use crate::error::{Error, Result};
use crate::rng::{derive_named, rng};
use crate::simulator::run;

/// Labelled two-feature points.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<u8>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    x1: f64,
    x2: f64,
    label: u8,
}

impl Dataset {
    pub fn new(points: Vec<[f64; 2]>, labels: Vec<u8>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} points but {} labels",
                points.len(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Config(format!("label {bad} is not 0 or 1")));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite feature value".into()));
        }
        Ok(Dataset { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points per class, `[zeros, ones]`.
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.len() - ones, ones]
    }

    /// CSV with header `x1,x2,label`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (p, &label) in self.points.iter().zip(&self.labels) {
            w.serialize(Row {
                x1: p[0],
                x2: p[1],
                label,
            })
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for row in csv::Reader::from_reader(text.as_bytes()).deserialize() {
            let row: Row = row?;
            points.push([row.x1, row.x2]);
            labels.push(row.label);
        }
        Dataset::new(points, labels)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Dataset::from_csv(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_csv())?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    /// Points in (0, 2π]² labelled by a random ZZ observable on the r=2 feature-map state.
    HavlicekLike,
    /// Linearly separable points in [-1, 1]².
    QnnToy,
}

/// Separation gap of the havlicek-like labelling.
pub const HAVLICEK_GAP: f64 = 0.3;

const DRAW_BUDGET: usize = 1_000_000;

/// Generate one balanced dataset per entry of `sizes`, all from one seeded stream.
pub fn make_dataset(kind: DatasetKind, seed: u64, sizes: &[usize]) -> Result<Vec<Dataset>> {
    if let Some(odd) = sizes.iter().find(|&&n| n % 2 == 1 || n == 0) {
        return Err(Error::Config(format!(
            "dataset size {odd} cannot be balanced"
        )));
    }
    match kind {
        DatasetKind::HavlicekLike => {
            let labeller = HavlicekLabeller::new(derive_named(seed, "unitary", &[]))?;
            let mut r = rng(derive_named(seed, "points", &[]));
            let draw = |r: &mut crate::rng::Rng| -> Result<Option<([f64; 2], u8)>> {
                // 1 - u maps [0, 1) onto (0, 1]
                let x = [
                    TAU * (1.0 - r.random::<f64>()),
                    TAU * (1.0 - r.random::<f64>()),
                ];
                Ok(labeller.label(x)?.map(|y| (x, y)))
            };
            sizes.iter().map(|&n| balanced(n, &mut r, &draw)).collect()
        }
        DatasetKind::QnnToy => {
            let mut r = rng(derive_named(seed, "points", &[]));
            let angle = r.random_range(0.0..TAU);
            let normal = [angle.cos(), angle.sin()];
            let offset = r.random_range(-0.2..0.2);
            let draw = move |r: &mut crate::rng::Rng| -> Result<Option<([f64; 2], u8)>> {
                let x = [r.random_range(-1.0..=1.0), r.random_range(-1.0..=1.0)];
                let s = normal[0] * x[0] + normal[1] * x[1] - offset;
                Ok(if s.abs() < 0.1 {
                    None
                } else {
                    Some((x, u8::from(s > 0.0)))
                })
            };
            sizes.iter().map(|&n| balanced(n, &mut r, &draw)).collect()
        }
    }
}

fn balanced(
    n: usize,
    r: &mut crate::rng::Rng,
    draw: &dyn Fn(&mut crate::rng::Rng) -> Result<Option<([f64; 2], u8)>>,
) -> Result<Dataset> {
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut counts = [0usize; 2];
    for _ in 0..DRAW_BUDGET {
        if points.len() == n {
            return Dataset::new(points, labels);
        }
        if let Some((x, y)) = draw(r)? {
            if counts[y as usize] < n / 2 {
                counts[y as usize] += 1;
                points.push(x);
                labels.push(y);
            }
        }
    }
    if points.len() == n {
        return Dataset::new(points, labels);
    }
    Err(Error::ResourceCap(format!(
        "no balanced dataset of size {n} within {DRAW_BUDGET} draws"
    )))
}

/// Labels points by the sign of `<ψ(x)| V† Z⊗Z V |ψ(x)>` with ψ the r=2 feature-map
/// state, discarding points within the gap.
struct HavlicekLabeller {
    v: [[C; 4]; 4],
}

impl HavlicekLabeller {
    fn new(seed: u64) -> Result<Self> {
        Ok(HavlicekLabeller {
            v: haar_unitary_4(seed),
        })
    }

    fn label(&self, x: [f64; 2]) -> Result<Option<u8>> {
        let psi = run(&feature_map(2), &x, &[])?;
        let a = psi.amplitudes();
        let mut expectation = 0.0;
        for (row, v_row) in self.v.iter().enumerate() {
            let amp: C = v_row.iter().zip(a).map(|(v, a)| v * a).sum();
            // Z⊗Z eigenvalue of basis state `row`
            let sign = if (row.count_ones() % 2) == 0 {
                1.0
            } else {
                -1.0
            };
            expectation += sign * amp.norm_sqr();
        }
        Ok(if expectation >= HAVLICEK_GAP {
            Some(1)
        } else if expectation <= -HAVLICEK_GAP {
            Some(0)
        } else {
            None
        })
    }
}

/// Haar-random 4×4 unitary: Gram-Schmidt on a complex Gaussian matrix, whose
/// positive-diagonal R makes the Q factor Haar distributed.
fn haar_unitary_4(seed: u64) -> [[C; 4]; 4] {
    let mut r = rng(seed);
    let mut cols = [[C::new(0.0, 0.0); 4]; 4];
    for col in cols.iter_mut() {
        for z in col.iter_mut() {
            let re: f64 = r.sample(StandardNormal);
            let im: f64 = r.sample(StandardNormal);
            *z = C::new(re, im);
        }
    }
    for k in 0..4 {
        for j in 0..k {
            let proj: C = (0..4).map(|i| cols[j][i].conj() * cols[k][i]).sum();
            for i in 0..4 {
                let d = proj * cols[j][i];
                cols[k][i] -= d;
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[k].iter_mut() {
            *z /= norm;
        }
    }
    let mut v = [[C::new(0.0, 0.0); 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        for (j, z) in row.iter_mut().enumerate() {
            *z = cols[j][i];
        }
    }
    v
}

/// Domain check for havlicek-like features.
pub fn in_feature_box(x: [f64; 2]) -> bool {
    x.iter().all(|&v| v > 0.0 && v <= 2.0 * PI)
}
