//! Kernel SVM trained by sequential minimal optimization with second-order
//! working-set selection.

use crate::error::{Error, Result};

/// Stopping tolerance on the maximal KKT violation.
pub const SVM_TOLERANCE: f64 = 1e-6;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    /// Dual coefficients, one per training point, each in `[0, c]`.
    pub alpha: Vec<f64>,
    /// Training labels as ±1.
    pub signs: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub iterations: usize,
    /// False when the iteration cap stopped the solver.
    pub converged: bool,
}

impl SvmModel {
    /// Indices with non-zero dual coefficient.
    pub fn support(&self) -> Vec<usize> {
        (0..self.alpha.len())
            .filter(|&i| self.alpha[i] > 0.0)
            .collect()
    }

    /// Decision value for a point given its kernel row against the training set.
    pub fn decision(&self, row: &[f64]) -> f64 {
        let mut f = self.bias;
        for ((a, y), k) in self.alpha.iter().zip(&self.signs).zip(row) {
            if *a != 0.0 {
                f += a * y * k;
            }
        }
        f
    }

    /// Label 1 for a positive decision value, else 0.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<u8>> {
        rows.iter()
            .map(|row| {
                if row.len() != self.alpha.len() {
                    return Err(Error::Dimension(format!(
                        "kernel row of length {} for {} training points",
                        row.len(),
                        self.alpha.len()
                    )));
                }
                Ok(u8::from(self.decision(row) > 0.0))
            })
            .collect()
    }
}

/// Train on a precomputed kernel matrix. Labels are 0/1.
///
/// The solver is fully deterministic: the working set is the first maximal
/// violator paired with the first best second-order partner.
pub fn train_svm(kernel: &[Vec<f64>], labels: &[u8], c: f64) -> Result<SvmModel> {
    let n = labels.len();
    if kernel.len() != n || kernel.iter().any(|row| row.len() != n) {
        return Err(Error::Dimension(format!("kernel is not {n}×{n}")));
    }
    if kernel.iter().flatten().any(|k| !k.is_finite()) {
        return Err(Error::Numeric("non-finite kernel entry".into()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!(
            "SVM regularization C must be positive, got {c}"
        )));
    }
    let y: Vec<f64> = labels
        .iter()
        .map(|&l| if l == 1 { 1.0 } else { -1.0 })
        .collect();
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[i][j];
    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα - Σα
    let mut grad = vec![-1.0; n];
    let max_iter = 10_000_000usize.max(100 * n);
    let mut iterations = 0;
    let mut converged = false;

    let up = |a: f64, yi: f64| if yi > 0.0 { a < c } else { a > 0.0 };
    let low = |a: f64, yi: f64| if yi > 0.0 { a > 0.0 } else { a < c };

    while iterations < max_iter {
        // i: maximal violator in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        let mut gmin_neg = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !low(alpha[t], y[t]) {
                continue;
            }
            let v = y[t] * grad[t];
            gmin_neg = gmin_neg.max(v);
            if i == usize::MAX {
                continue;
            }
            let diff = gmax + v;
            if diff > 0.0 {
                let mut quad = kernel[i][i] + kernel[t][t] - 2.0 * kernel[i][t];
                if quad <= 0.0 {
                    quad = TAU;
                }
                let obj = -diff * diff / quad;
                if obj < best {
                    best = obj;
                    j = t;
                }
            }
        }
        if gmax + gmin_neg < SVM_TOLERANCE || i == usize::MAX || j == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = q(i, j);
        if y[i] != y[j] {
            let mut quad = kernel[i][i] + kernel[j][j] + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = kernel[i][i] + kernel[j][j] - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    // bias from free vectors, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            sum += yg;
            free += 1;
        }
    }
    let rho = if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    };
    Ok(SvmModel {
        alpha,
        signs: y,
        bias: -rho,
        c,
        iterations,
        converged,
    })
}
