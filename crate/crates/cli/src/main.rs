use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::Deserialize;

use qshap::circuit::Circuit;
use qshap::experiment::{run_file, RunOptions};
use qshap::graph::{brute_force_maxcut, Graph};
use qshap::rng::rng;
use qshap::shapley::{
    estimate, EstimatorConfig, FnValue, Oracle, PlayerInfo, ShapleyReport, ValueFunction,
    DEFAULT_PLAYER_CAP,
};
use qshap::simulator::bitstring;
use qshap::transpiler::{best_of_trials, HardwareTarget};
use qshap::value_functions::uniform_parameters;
use qshap::{Error, Result};

#[derive(Parser)]
#[command(
    name = "qshap",
    version,
    about = "Shapley values for the gates of quantum circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its report.
    Run {
        config: PathBuf,
        /// Worker threads (overrides QSHAP_THREADS).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Exact Shapley values of a game given as a value table.
    Exact {
        table: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PLAYER_CAP)]
        player_cap: usize,
    },
    /// Estimate Shapley values of a value-table game, optionally with Gaussian noise.
    Estimate {
        table: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(short = 'K', long = "K", default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        runs: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Standard deviation of additive noise on every evaluation.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Transpile a circuit and report the best penalty over seeded trials.
    Transpile {
        circuit: PathBuf,
        /// Built-in target (oslo, ehningen, lineN) or a target file.
        #[arg(long, default_value = "ehningen")]
        target: String,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        s1: f64,
        #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
        s2: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated parameter values; drawn uniformly from the seed if absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        /// Write the transpiled circuit here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exhaustive max-cut of a graph file.
    BruteForceMaxcut { graph: PathBuf },
    /// Print a report as comma-separated columns for gnuplot.
    Plotdata { report: PathBuf },
}

/// Value table file: `values[mask]` is the worth of the coalition whose bit `i` marks player `i + 1`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    values: Vec<f64>,
    #[serde(default)]
    names: Vec<String>,
}

fn load_table(path: &Path) -> Result<TableFile> {
    let table: TableFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let len = table.values.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::Config(format!(
            "value table has {len} entries, need 2^N with N ≥ 1"
        )));
    }
    let players = len.trailing_zeros() as usize;
    if !table.names.is_empty() && table.names.len() != players {
        return Err(Error::Config(format!(
            "{} names for {players} players",
            table.names.len()
        )));
    }
    if table.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite entry in value table".into()));
    }
    Ok(table)
}

fn table_report(table: &TableFile, cfg: &EstimatorConfig, noise: f64) -> Result<ShapleyReport> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::Config(format!(
            "noise must be a finite non-negative number, got {noise}"
        )));
    }
    let players = table.values.len().trailing_zeros() as usize;
    let values = &table.values;
    let vf = FnValue::new(
        "table",
        players,
        noise == 0.0,
        |s: qshap::circuit::Coalition, seed: u64| {
            let z: f64 = if noise == 0.0 {
                0.0
            } else {
                rng(seed).sample(StandardNormal)
            };
            values[s.mask() as usize] + noise * z
        },
    );
    let mut runs = Vec::new();
    let mut seeds = Vec::new();
    for r in 0..cfg.runs {
        let seed = cfg.run_seed(r);
        runs.push(estimate(&mut Oracle::new(&vf, seed), cfg)?);
        seeds.push(seed);
    }
    let info: Vec<PlayerInfo> = (0..vf.players())
        .map(|i| PlayerInfo {
            gate_index: None,
            name: table
                .names
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("p{}", i + 1)),
        })
        .collect();
    ShapleyReport::from_runs(&runs, cfg, &seeds, &info)
}

fn execute(command: Command) -> Result<String> {
    match command {
        Command::Run { config, threads } => {
            let mut opts = RunOptions::from_env()?;
            if threads.is_some() {
                opts.threads = threads;
            }
            let (record, _) = run_file(&config, &opts)?;
            Ok(serde_json::to_string_pretty(&record)?)
        }
        Command::Exact { table, player_cap } => {
            let cfg = EstimatorConfig {
                player_cap,
                ..EstimatorConfig::default()
            };
            Ok(table_report(&load_table(&table)?, &cfg, 0.0)?.to_json())
        }
        Command::Estimate {
            table,
            alpha,
            k,
            runs,
            seed,
            noise,
        } => {
            let cfg = EstimatorConfig {
                alpha,
                k,
                runs,
                seed,
                ..EstimatorConfig::default()
            };
            Ok(table_report(&load_table(&table)?, &cfg, noise)?.to_json())
        }
        Command::Transpile {
            circuit,
            target,
            trials,
            s1,
            s2,
            seed,
            theta,
            x,
            output,
        } => {
            let c = Circuit::load(&circuit)?;
            if c.has_layers() {
                return Err(Error::Config(
                    "circuit has layer gates; expand them in an experiment config".into(),
                ));
            }
            let target = HardwareTarget::resolve(&target)?;
            let theta =
                theta.unwrap_or_else(|| uniform_parameters(c.theta_dim(), 1, seed).remove(0));
            let x = x.unwrap_or_else(|| vec![0.0; c.feature_dim()]);
            let (best, penalty) =
                best_of_trials(&c.bind(&x, &theta)?, &target, trials, seed, s1, s2)?;
            if let Some(path) = output {
                std::fs::write(
                    path,
                    serde_json::to_string_pretty(&best.to_circuit().to_doc())?,
                )?;
            }
            Ok(serde_json::to_string_pretty(&serde_json::json!({
                "target": target.name(),
                "trials": trials,
                "n1": best.n1(),
                "n2": best.n2(),
                "penalty": penalty,
                "initial_layout": best.initial_layout,
                "final_layout": best.final_layout,
            }))?)
        }
        Command::BruteForceMaxcut { graph } => {
            let g = Graph::load(&graph)?;
            let cut = brute_force_maxcut(&g)?;
            let strings: Vec<String> = cut
                .optimal
                .iter()
                .map(|&m| bitstring(m as usize, g.nodes()))
                .collect();
            Ok(serde_json::to_string_pretty(&serde_json::json!({
                "value": cut.value,
                "optimal": strings,
            }))?)
        }
        Command::Plotdata { report } => {
            let r = ShapleyReport::from_json_str(&std::fs::read_to_string(report)?)?;
            let mut out =
                String::from("# player,gate_index,phi,phi_minus_std,phi_plus_std,std_runs\n");
            for p in &r.players {
                out.push_str(&format!(
                    "{},{},{:?},{:?},{:?},{:?}\n",
                    p.player,
                    p.gate_index.map_or(String::from("NaN"), |g| g.to_string()),
                    p.phi,
                    p.phi - p.std_runs,
                    p.phi + p.std_runs,
                    p.std_runs
                ));
            }
            Ok(out.trim_end().to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(text) => {
            println!("{}", text.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
