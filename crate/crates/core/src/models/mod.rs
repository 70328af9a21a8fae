//! The experiment models: a quantum-kernel SVM, a one-shot QNN classifier, a
//! QGAN generator scored by Hellinger fidelity, QAOA for max-cut, and the QFT
//! circuits used for transpilation games.

mod data;
mod qaoa;
mod qft;
mod qgan;
mod qnn;
mod qsvm;
mod svm;

pub use data::{in_feature_box, make_dataset, Dataset, DatasetKind, HAVLICEK_GAP};
pub use qaoa::{
    maxcut_graph, nelder_mead, optimize_qaoa, qaoa_circuit, qaoa_game, Minimum, OptimizerConfig,
    QaoaResult,
};
pub use qft::qft_circuit;
pub use qgan::{lognormal_target, qgan_circuit, qgan_game, qgan_value, QGAN_REMAINING, QGAN_THETA};
pub use qnn::{qnn_circuit, qnn_game, QnnValue, QNN_REMAINING, QNN_THETA};
pub use qsvm::{
    cross_kernel, feature_map, gram_matrix, kernel_entry, kernels_for, qsvm_accuracy,
    transition_probability, QsvmValue, DEFAULT_C,
};
pub use svm::{train_svm, SvmModel, SVM_TOLERANCE};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Trained-parameter file: `{"theta": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaFile {
    pub theta: Vec<f64>,
}

pub fn load_theta(path: &Path) -> Result<Vec<f64>> {
    let file: ThetaFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    Ok(file.theta)
}
