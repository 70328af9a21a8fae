//! Config-driven experiment runs.
//!
//! An [`ExperimentConfig`] names an experiment family, a value function and
//! estimator settings. [`run`] evaluates the game for `runs` independent seeds,
//! keeps every evaluated value in an append-only [`JsonlStore`] so interrupted
//! or repeated runs resume without re-evaluation, and writes the report and
//! plotting CSVs into the output directory.

mod cache;

pub use cache::JsonlStore;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{Circuit, CoalitionGame};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::models::{
    feature_map, load_theta, make_dataset, maxcut_graph, optimize_qaoa, qaoa_game, qft_circuit,
    qgan_circuit, qnn_circuit, Dataset, DatasetKind, OptimizerConfig, QnnValue, QsvmValue,
    DEFAULT_C, QGAN_REMAINING, QGAN_THETA, QNN_REMAINING, QNN_THETA,
};
use crate::rng::derive_named;
use crate::shapley::{
    estimate, marginals_to_csv, multisets_to_csv, pareto_frontier, pareto_to_csv, value_multisets,
    EstimatorConfig, Oracle, PlayerInfo, ShapleyReport, ValueFunction,
};
use crate::value_functions::{
    EnergyValue, EntanglingCapability, EntanglingConfig, ExecConfig, ExecutionEfficiency,
    Expressibility, ExpressibilityConfig, GameCircuit, HellingerConfig, HellingerFidelity,
};

/// Environment variable that sets the worker-thread count.
pub const THREADS_ENV: &str = "QSHAP_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSpec,
    pub value_function: ValueFunctionSpec,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    /// Output directory, relative to the config file.
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentSpec {
    Qsvm(QsvmSpec),
    Qnn(QnnSpec),
    Qgan(QganSpec),
    Transpile(TranspileSpec),
    Qaoa(QaoaSpec),
    CustomGame(CustomGameSpec),
}

/// Feature-map game; the data are read from CSV files or generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QsvmSpec {
    #[serde(default = "two")]
    pub reps: usize,
    #[serde(default)]
    pub train: Option<PathBuf>,
    #[serde(default)]
    pub test: Option<PathBuf>,
    #[serde(default)]
    pub data_seed: u64,
    #[serde(default = "default_train_size")]
    pub train_size: usize,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default = "default_c")]
    pub c: f64,
}

fn two() -> usize {
    2
}

fn default_train_size() -> usize {
    40
}

fn default_test_size() -> usize {
    1000
}

fn default_c() -> f64 {
    DEFAULT_C
}

/// Classifier game; the shipped circuit and parameters unless overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QnnSpec {
    #[serde(default)]
    pub circuit: Option<PathBuf>,
    #[serde(default)]
    pub theta: Option<PathBuf>,
    #[serde(default)]
    pub remaining: Option<Vec<usize>>,
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub data_seed: u64,
    #[serde(default = "default_qnn_size")]
    pub data_size: usize,
}

fn default_qnn_size() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QganSpec {
    #[serde(default)]
    pub circuit: Option<PathBuf>,
    #[serde(default)]
    pub theta: Option<PathBuf>,
    #[serde(default)]
    pub remaining: Option<Vec<usize>>,
}

/// Transpilation game over a circuit file or a `qft`-qubit Fourier transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranspileSpec {
    #[serde(default)]
    pub circuit: Option<PathBuf>,
    #[serde(default)]
    pub qft: Option<usize>,
    #[serde(default)]
    pub remaining: Vec<usize>,
}

/// Layer game of a depth-`depth` QAOA circuit. Without `theta`, each run
/// optimizes its own parameters, seeded from the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaoaSpec {
    #[serde(default)]
    pub graph: Option<PathBuf>,
    pub depth: usize,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomGameSpec {
    pub circuit: PathBuf,
    #[serde(default)]
    pub remaining: Vec<usize>,
    #[serde(default)]
    pub graph: Option<PathBuf>,
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ValueFunctionSpec {
    Expressibility(ExpressibilityConfig),
    Entangling(EntanglingConfig),
    Hellinger(HellingerConfig),
    Energy(EnergySpec),
    AccuracyQsvm(NoOptions),
    AccuracyQnn(NoOptions),
    ExecEfficiency(ExecConfig),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySpec {
    #[serde(default)]
    pub x: Vec<f64>,
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoOptions {}

impl ExperimentConfig {
    /// Parse and validate; errors name the offending field.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::Config(format!("{}: {}", e.path(), e.inner())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        ExperimentConfig::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.estimator.validate()?;
        match &self.experiment {
            ExperimentSpec::Qsvm(s) if s.reps == 0 => {
                Err(Error::Config("experiment.reps must be at least 1".into()))
            }
            ExperimentSpec::Qsvm(s) if s.train.is_some() != s.test.is_some() => Err(Error::Config(
                "experiment.train and experiment.test must be given together".into(),
            )),
            ExperimentSpec::Qaoa(s) if s.depth == 0 => {
                Err(Error::Config("experiment.depth must be at least 1".into()))
            }
            ExperimentSpec::Transpile(s) if s.circuit.is_some() == s.qft.is_some() => Err(
                Error::Config("experiment needs exactly one of `circuit` and `qft`".into()),
            ),
            _ => Ok(()),
        }
    }
}

/// Inputs resolved from the experiment section.
struct Prepared {
    game: GameCircuit,
    theta: Option<Vec<f64>>,
    qsvm: Option<(Dataset, Dataset, f64)>,
    qnn_data: Option<Dataset>,
    /// Canonical serialization of everything read from disk or generated.
    fingerprint: Vec<u8>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn game_with_remaining(
    circuit: Circuit,
    remaining: &[usize],
    graph: Option<Graph>,
) -> Result<GameCircuit> {
    GameCircuit::new(CoalitionGame::with_remaining(circuit, remaining)?, graph)
}

fn load_circuit(base: &Path, path: &Option<PathBuf>, shipped: fn() -> Circuit) -> Result<Circuit> {
    match path {
        Some(p) => Circuit::load(&resolve(base, p)),
        None => Ok(shipped()),
    }
}

fn load_graph(base: &Path, path: &Option<PathBuf>) -> Result<Option<Graph>> {
    path.as_ref()
        .map(|p| Graph::load(&resolve(base, p)))
        .transpose()
}

fn prepare(spec: &ExperimentSpec, base: &Path) -> Result<Prepared> {
    let mut fingerprint = Vec::new();
    let mut prepared = match spec {
        ExperimentSpec::Qsvm(s) => {
            let (train, test) = match (&s.train, &s.test) {
                (Some(a), Some(b)) => (
                    Dataset::load(&resolve(base, a))?,
                    Dataset::load(&resolve(base, b))?,
                ),
                _ => {
                    let mut sets = make_dataset(
                        DatasetKind::HavlicekLike,
                        s.data_seed,
                        &[s.train_size, s.test_size],
                    )?;
                    let test = sets.pop().expect("two sets");
                    (sets.pop().expect("two sets"), test)
                }
            };
            fingerprint.extend(train.to_csv().bytes().chain(test.to_csv().bytes()));
            let game = GameCircuit::new(CoalitionGame::all_active(feature_map(s.reps))?, None)?;
            Prepared {
                game,
                theta: None,
                qsvm: Some((train, test, s.c)),
                qnn_data: None,
                fingerprint: Vec::new(),
            }
        }
        ExperimentSpec::Qnn(s) => {
            let circuit = load_circuit(base, &s.circuit, qnn_circuit)?;
            let theta = match &s.theta {
                Some(p) => load_theta(&resolve(base, p))?,
                None => QNN_THETA.to_vec(),
            };
            let data = match &s.data {
                Some(p) => Dataset::load(&resolve(base, p))?,
                None => make_dataset(DatasetKind::QnnToy, s.data_seed, &[s.data_size])?.remove(0),
            };
            fingerprint.extend(data.to_csv().bytes());
            let remaining = s
                .remaining
                .clone()
                .unwrap_or_else(|| QNN_REMAINING.to_vec());
            Prepared {
                game: game_with_remaining(circuit, &remaining, None)?,
                theta: Some(theta),
                qsvm: None,
                qnn_data: Some(data),
                fingerprint: Vec::new(),
            }
        }
        ExperimentSpec::Qgan(s) => {
            let circuit = load_circuit(base, &s.circuit, qgan_circuit)?;
            let theta = match &s.theta {
                Some(p) => load_theta(&resolve(base, p))?,
                None => QGAN_THETA.to_vec(),
            };
            let remaining = s
                .remaining
                .clone()
                .unwrap_or_else(|| QGAN_REMAINING.to_vec());
            Prepared {
                game: game_with_remaining(circuit, &remaining, None)?,
                theta: Some(theta),
                qsvm: None,
                qnn_data: None,
                fingerprint: Vec::new(),
            }
        }
        ExperimentSpec::Transpile(s) => {
            let circuit = match (&s.circuit, s.qft) {
                (Some(p), _) => Circuit::load(&resolve(base, p))?,
                (None, Some(q)) => qft_circuit(q)?,
                (None, None) => unreachable!("validated"),
            };
            Prepared {
                game: game_with_remaining(circuit, &s.remaining, None)?,
                theta: None,
                qsvm: None,
                qnn_data: None,
                fingerprint: Vec::new(),
            }
        }
        ExperimentSpec::Qaoa(s) => {
            let graph = load_graph(base, &s.graph)?.unwrap_or_else(maxcut_graph);
            Prepared {
                game: qaoa_game(&graph, s.depth)?,
                theta: s.theta.clone(),
                qsvm: None,
                qnn_data: None,
                fingerprint: Vec::new(),
            }
        }
        ExperimentSpec::CustomGame(s) => {
            let circuit = Circuit::load(&resolve(base, &s.circuit))?;
            let graph = load_graph(base, &s.graph)?;
            Prepared {
                game: game_with_remaining(circuit, &s.remaining, graph)?,
                theta: s.theta.clone(),
                qsvm: None,
                qnn_data: None,
                fingerprint: Vec::new(),
            }
        }
    };
    let game = prepared.game.game();
    fingerprint.extend(serde_json::to_vec(&game.circuit().to_doc())?);
    fingerprint.extend(serde_json::to_vec(&(
        game.active(),
        prepared.game.graph().map(Graph::to_json),
    ))?);
    fingerprint.extend(serde_json::to_vec(&prepared.theta)?);
    prepared.fingerprint = fingerprint;
    Ok(prepared)
}

/// Optimizer outcome of one QAOA run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaRecord {
    pub theta: Vec<f64>,
    pub energy: f64,
    pub evaluations: usize,
    pub budget_exhausted: bool,
    pub bitstring: String,
    pub cut: usize,
}

/// Whether the value function's inputs change from run to run, beyond the
/// per-evaluation seeds.
fn inputs_vary_per_run(cfg: &ExperimentConfig) -> bool {
    match (&cfg.value_function, &cfg.experiment) {
        (ValueFunctionSpec::ExecEfficiency(_), _) => true,
        (ValueFunctionSpec::Energy(e), ExperimentSpec::Qaoa(q)) => {
            e.theta.is_none() && q.theta.is_none()
        }
        _ => false,
    }
}

fn resolve_target(base: &Path, target: &str) -> String {
    let candidate = resolve(base, Path::new(target));
    if candidate.is_file() {
        candidate.display().to_string()
    } else {
        target.to_string()
    }
}

fn build_value_function(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    base: &Path,
    run: u32,
    run_seed: u64,
) -> Result<(Box<dyn ValueFunction>, Option<QaoaRecord>)> {
    let game = prepared.game.clone();
    let theta = prepared.theta.clone();
    let vf: Box<dyn ValueFunction> = match &cfg.value_function {
        ValueFunctionSpec::Expressibility(c) => Box::new(Expressibility::new(game, c.clone())?),
        ValueFunctionSpec::Entangling(c) => Box::new(EntanglingCapability::new(game, c.clone())?),
        ValueFunctionSpec::Hellinger(c) => {
            let mut c = c.clone();
            if c.theta.is_empty() {
                c.theta = theta.unwrap_or_default();
            }
            Box::new(HellingerFidelity::new(game, c)?)
        }
        ValueFunctionSpec::Energy(e) => {
            let graph = game.graph().cloned().ok_or_else(|| {
                Error::Config("value_function energy needs a problem graph".into())
            })?;
            let (theta, record) = match (&e.theta, theta, &cfg.experiment) {
                (Some(t), _, _) => (t.clone(), None),
                (None, Some(t), _) => (t, None),
                (None, None, ExperimentSpec::Qaoa(q)) => {
                    let seed = derive_named(run_seed, "optimizer", &[]);
                    let r = optimize_qaoa(&graph, q.depth, &q.optimizer, seed)?;
                    let record = QaoaRecord {
                        theta: r.theta.clone(),
                        energy: r.energy,
                        evaluations: r.evaluations,
                        budget_exhausted: r.budget_exhausted,
                        bitstring: r.bitstring,
                        cut: r.cut,
                    };
                    (r.theta, Some(record))
                }
                (None, None, _) => {
                    return Err(Error::Config(
                        "value_function.theta is required for energy".into(),
                    ));
                }
            };
            let vf = EnergyValue::maxcut(game, &graph, e.x.clone(), theta)?;
            return Ok((Box::new(vf), record));
        }
        ValueFunctionSpec::AccuracyQsvm(_) => {
            let (train, test, c) = prepared
                .qsvm
                .clone()
                .ok_or_else(|| Error::Config("accuracy_qsvm needs a qsvm experiment".into()))?;
            Box::new(QsvmValue::new(game, train, test, c)?)
        }
        ValueFunctionSpec::AccuracyQnn(_) => {
            let data = prepared
                .qnn_data
                .clone()
                .ok_or_else(|| Error::Config("accuracy_qnn needs a qnn experiment".into()))?;
            Box::new(QnnValue::new(game, data, theta.unwrap_or_default())?)
        }
        ValueFunctionSpec::ExecEfficiency(c) => {
            let mut c = c.clone();
            // every run transpiles with its own trial seeds
            c.seed = derive_named(c.seed, "run", &[u64::from(run)]);
            c.target = resolve_target(base, &c.target);
            if c.theta.is_none() {
                c.theta = theta;
            }
            Box::new(ExecutionEfficiency::new(game, c)?)
        }
    };
    Ok((vf, None))
}

/// Per-run entry of a [`RunRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    /// 1-based run number.
    pub run: u32,
    pub seed: u64,
    /// Value-function samples the estimator consumed.
    pub evaluations: u64,
    /// Samples that were not already in the cache.
    pub new_evaluations: u64,
    pub cache: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qaoa: Option<QaoaRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// SHA-256 of the experiment, value function and resolved inputs.
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub evaluations: u64,
    pub new_evaluations: u64,
    pub runs: Vec<RunEntry>,
    /// Files written, relative to the output directory.
    pub artifacts: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; all available cores if `None`.
    pub threads: Option<usize>,
}

impl RunOptions {
    /// Read [`THREADS_ENV`].
    pub fn from_env() -> Result<Self> {
        let threads = match std::env::var(THREADS_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(n) if n > 0 => Some(n),
                _ => {
                    return Err(Error::Config(format!(
                        "{THREADS_ENV} must be a positive integer, got `{v}`"
                    )))
                }
            },
            Err(_) => None,
        };
        Ok(RunOptions { threads })
    }
}

/// Hex SHA-256 identifying the cached values of `cfg`.
fn config_hash(cfg: &ExperimentConfig, fingerprint: &[u8], seeded: bool) -> Result<String> {
    let mut h = Sha256::new();
    h.update(concat!("qshap ", env!("CARGO_PKG_VERSION"), "\n"));
    // serde_json maps are sorted, so this is canonical
    let key = serde_json::json!({
        "experiment": cfg.experiment,
        "value_function": cfg.value_function,
        "seed": if seeded { Some(cfg.estimator.seed) } else { None },
    });
    h.update(serde_json::to_vec(&key)?);
    h.update(fingerprint);
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn write(out: &Path, rel: &str, contents: &str, artifacts: &mut Vec<PathBuf>) -> Result<()> {
    let path = out.join(rel);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&path, contents)?;
    artifacts.push(PathBuf::from(rel));
    Ok(())
}

/// Load the config at `path` and run it, resolving relative paths against
/// the config's directory.
pub fn run_file(path: &Path, opts: &RunOptions) -> Result<(RunRecord, ShapleyReport)> {
    let cfg = ExperimentConfig::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    run(&cfg, base, opts)
}

/// Execute every run of `cfg` and write the artifacts.
///
/// Output directory contents:
/// - `report.json`: [`ShapleyReport`] over all runs
/// - `summary.csv`: mean and standard deviation per player
/// - `run-R/marginals.csv`, `run-R/values.csv`, `run-R/pareto.csv`
/// - `run_record.json`: the returned [`RunRecord`]
/// - `cache/`: value logs
pub fn run(
    cfg: &ExperimentConfig,
    base: &Path,
    opts: &RunOptions,
) -> Result<(RunRecord, ShapleyReport)> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    pool.install(|| run_inner(cfg, base, threads))
}

fn run_inner(
    cfg: &ExperimentConfig,
    base: &Path,
    threads: usize,
) -> Result<(RunRecord, ShapleyReport)> {
    let start = Instant::now();
    let prepared = prepare(&cfg.experiment, base)?;
    let out = resolve(base, &cfg.output);
    std::fs::create_dir_all(&out)?;
    let info: Vec<PlayerInfo> = (0..prepared.game.players())
        .map(|p| PlayerInfo {
            gate_index: Some(prepared.game.game().gate_index(p)),
            name: prepared.game.game().gate_label(p).to_string(),
        })
        .collect();

    let mut artifacts = Vec::new();
    let mut estimates = Vec::new();
    let mut entries = Vec::new();
    let mut seeds = Vec::new();
    let mut hash = String::new();
    let mut per_run_cache = false;
    for r in 0..cfg.estimator.runs {
        let run_seed = cfg.estimator.run_seed(r);
        let (vf, qaoa) = build_value_function(cfg, &prepared, base, r, run_seed)?;
        if r == 0 {
            per_run_cache = inputs_vary_per_run(cfg) || !vf.is_deterministic();
            hash = config_hash(cfg, &prepared.fingerprint, per_run_cache)?;
        }
        let cache = if per_run_cache {
            PathBuf::from(format!("cache/{}-run{}.jsonl", &hash[..16], r + 1))
        } else {
            PathBuf::from(format!("cache/{}.jsonl", &hash[..16]))
        };
        let mut store = JsonlStore::open(&out.join(&cache))?;
        let mut oracle = Oracle::new(vf.as_ref(), run_seed).with_store(&mut store);
        let est = estimate(&mut oracle, &cfg.estimator)?;
        let new_evaluations = oracle.computed();

        let dir = format!("run-{}", r + 1);
        write(
            &out,
            &format!("{dir}/marginals.csv"),
            &marginals_to_csv(&est.marginals),
            &mut artifacts,
        )?;
        let sets = value_multisets(&est.table);
        write(
            &out,
            &format!("{dir}/values.csv"),
            &multisets_to_csv(&sets),
            &mut artifacts,
        )?;
        write(
            &out,
            &format!("{dir}/pareto.csv"),
            &pareto_to_csv(&pareto_frontier(&sets)),
            &mut artifacts,
        )?;

        entries.push(RunEntry {
            run: r + 1,
            seed: run_seed,
            evaluations: est.evaluations,
            new_evaluations,
            cache,
            qaoa,
        });
        seeds.push(run_seed);
        estimates.push(est);
    }

    let report = ShapleyReport::from_runs(&estimates, &cfg.estimator, &seeds, &info)?;
    write(&out, "report.json", &report.to_json(), &mut artifacts)?;
    write(&out, "summary.csv", &report.summary_csv(), &mut artifacts)?;
    artifacts.push(PathBuf::from("run_record.json"));
    let record = RunRecord {
        config_hash: hash,
        seeds,
        threads,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        evaluations: entries.iter().map(|e| e.evaluations).sum(),
        new_evaluations: entries.iter().map(|e| e.new_evaluations).sum(),
        runs: entries,
        artifacts,
    };
    let mut json = serde_json::to_string_pretty(&record)?;
    json.push('\n');
    std::fs::write(out.join("run_record.json"), json)?;
    Ok((record, report))
}
