//! Command-line interface: argument parsing and command dispatch.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime errors
//! (search budgets, enumeration guards, unreadable files, failed cells).

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use dtbench_core::equiv::{doe_bruteforce, doe_scan_with_witnesses};
use dtbench_core::learners::{learn, ExactConfig, LearnerKind};
use dtbench_core::oracle::{generate_oracle, OracleConfig};
use dtbench_core::space::FeatureSpace;
use dtbench_core::{datagen, Input};

use crate::formats;
use crate::harness::{self, DataMode, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(
    name = "dtbench",
    version,
    about = "Benchmark decision-tree learners against randomly generated oracle trees"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Complete,
    Unique,
}

impl From<ModeArg> for DataMode {
    fn from(m: ModeArg) -> DataMode {
        match m {
            ModeArg::Complete => DataMode::Complete,
            ModeArg::Unique => DataMode::Unique,
        }
    }
}

fn parse_learner(s: &str) -> Result<LearnerKind, String> {
    LearnerKind::parse(s).ok_or_else(|| {
        let names: Vec<&str> = LearnerKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown algorithm {s:?}, expected one of {}", names.join(", "))
    })
}

fn parse_trial_override(s: &str) -> Result<(LearnerKind, u32), String> {
    let Some((name, count)) = s.split_once('=') else {
        return Err("expected <algo>=<trials>".into());
    };
    let kind = parse_learner(name)?;
    let trials: u32 = count
        .parse()
        .map_err(|_| format!("invalid trial count {count:?}"))?;
    Ok((kind, trials))
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random perfect oracle tree (plus a `.space` sidecar).
    GenOracle {
        /// Number of features m.
        #[arg(long)]
        features: u16,
        /// Rule length k (every leaf at this depth), 1 <= k <= m.
        #[arg(long)]
        depth: u16,
        /// Value-set size, applied to every feature.
        #[arg(long, default_value_t = 2)]
        values: u16,
        /// Number of classes.
        #[arg(long, default_value_t = 2)]
        classes: u16,
        #[arg(long)]
        seed: u64,
        /// Output tree file; the feature space goes next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Derive a training dataset from an oracle tree.
    GenData {
        /// Oracle tree file (its `#space` header locates the space).
        #[arg(long)]
        oracle: PathBuf,
        /// Feature-space file, overriding the oracle's header.
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Number of instances q.
        #[arg(long)]
        size: u64,
        #[arg(long)]
        seed: u64,
        /// Output dataset CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn a decision tree from a dataset CSV.
    Learn {
        #[arg(long, value_parser = parse_learner)]
        algo: LearnerKind,
        /// Training dataset CSV.
        #[arg(long)]
        data: PathBuf,
        /// Feature-space file; inferred from the CSV when omitted.
        #[arg(long)]
        space: Option<PathBuf>,
        /// Seed for the randomized learner.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Depth cap for the exact learner.
        #[arg(long)]
        max_depth: Option<u32>,
        /// Search-node budget for the exact learner.
        #[arg(long)]
        max_nodes: Option<u64>,
        /// Output tree file (plus a `.space` sidecar).
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a tree against an oracle: prints `succ total doe`.
    Doe {
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long)]
        tree: PathBuf,
        /// Feature-space file, overriding both headers.
        #[arg(long)]
        space: Option<PathBuf>,
        /// Also print one distinguishing input as a CSV row.
        #[arg(long)]
        witness: bool,
        /// Cross-check the scan against the quadratic rule comparison.
        #[arg(long)]
        brute_check: bool,
    },
    /// Sweep a (learner, size) grid and write mean DOE per cell as CSV.
    Experiment {
        /// Number of features n.
        #[arg(long)]
        features: u16,
        /// Oracle depth k.
        #[arg(long)]
        depth: u16,
        /// Dataset sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<u64>,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Learners, comma separated.
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_learner)]
        algos: Vec<LearnerKind>,
        /// Trials per cell.
        #[arg(long)]
        trials: u32,
        /// Per-learner trial override, e.g. `exact=20` (repeatable).
        #[arg(long, value_parser = parse_trial_override)]
        trials_override: Vec<(LearnerKind, u32)>,
        /// Master seed for the whole sweep.
        #[arg(long)]
        seed: u64,
        /// Value-set size applied to every feature.
        #[arg(long, default_value_t = 2)]
        values: u16,
        #[arg(long, default_value_t = 2)]
        classes: u16,
        /// Search-node budget for the exact learner.
        #[arg(long)]
        max_nodes: Option<u64>,
        /// Output results CSV.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the available parallelism. The
        /// output is identical for any value.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// A usage problem (exit 1) or a runtime failure (exit 2).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Runtime(e.into())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn main_impl() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version land here too; they are not usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_space_arg(path: &Option<PathBuf>) -> Result<Option<Arc<FeatureSpace>>, CliError> {
    Ok(match path {
        Some(p) => Some(formats::load_space(p)?),
        None => None,
    })
}

fn witness_csv(space: &FeatureSpace, w: &Input) -> String {
    space
        .feature_ids()
        .map(|f| space.value_name(f, w.value(f)))
        .collect::<Vec<_>>()
        .join(",")
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::GenOracle {
            features,
            depth,
            values,
            classes,
            seed,
            out,
        } => {
            let cfg = OracleConfig::uniform(features, depth, values, classes, seed);
            let tree = generate_oracle(&cfg).map_err(|e| usage(e.to_string()))?;
            formats::save_tree_with_space(&tree, &out)?;
            Ok(())
        }
        Command::GenData {
            oracle,
            space,
            mode,
            size,
            seed,
            out,
        } => {
            let space = load_space_arg(&space)?;
            let (oracle, _) = formats::load_tree(&oracle, space.as_ref())?;
            let data = match DataMode::from(mode) {
                DataMode::Complete => datagen::gen_completely_random(&oracle, size, seed)?,
                DataMode::Unique => datagen::gen_uniquely_random(&oracle, size, seed)?,
            };
            formats::save_dataset(&data, &out)?;
            Ok(())
        }
        Command::Learn {
            algo,
            data,
            space,
            seed,
            max_depth,
            max_nodes,
            out,
        } => {
            if algo != LearnerKind::ExactDepth && (max_depth.is_some() || max_nodes.is_some()) {
                return Err(usage("--max-depth/--max-nodes only apply to --algo exact"));
            }
            let space = match load_space_arg(&space)? {
                Some(s) => s,
                None => {
                    let text = std::fs::read_to_string(&data)
                        .map_err(|e| anyhow::anyhow!("{}: {e}", data.display()))?;
                    formats::infer_space_from_csv(&text, &data)?
                }
            };
            let dataset = formats::load_dataset(&data, &space)?;
            let exact = ExactConfig {
                depth_cap: max_depth,
                max_nodes,
                timeout: None,
            };
            let tree = learn(algo, &dataset, seed, &exact)?;
            formats::save_tree_with_space(&tree, &out)?;
            Ok(())
        }
        Command::Doe {
            oracle,
            tree,
            space,
            witness,
            brute_check,
        } => {
            let space_override = load_space_arg(&space)?;
            let (oracle_tree, oracle_space) = formats::load_tree(&oracle, space_override.as_ref())?;
            // The second file may omit its header; fall back to the
            // oracle's space, which the scan requires anyway.
            let (learned_tree, _) = match formats::load_tree(&tree, space_override.as_ref()) {
                Ok(pair) => pair,
                Err(formats::FormatError::NoSpace { .. }) => {
                    formats::load_tree(&tree, Some(&oracle_space))?
                }
                Err(e) => return Err(e.into()),
            };
            let report = doe_scan_with_witnesses(&oracle_tree, &learned_tree)?;
            println!(
                "{} {} {:.6}",
                report.consistent_pairs,
                report.compatible_pairs,
                report.doe()
            );
            if witness {
                if let Some(w) = report.witnesses.first() {
                    println!("{}", witness_csv(&oracle_space, w));
                }
            }
            if brute_check {
                let brute = doe_bruteforce(&oracle_tree, &learned_tree)?;
                if brute.consistent_pairs != report.consistent_pairs
                    || brute.compatible_pairs != report.compatible_pairs
                {
                    return Err(CliError::Runtime(anyhow::anyhow!(
                        "scan/bruteforce mismatch: scan {}/{}, brute {}/{}",
                        report.consistent_pairs,
                        report.compatible_pairs,
                        brute.consistent_pairs,
                        brute.compatible_pairs
                    )));
                }
            }
            Ok(())
        }
        Command::Experiment {
            features,
            depth,
            sizes,
            mode,
            algos,
            trials,
            trials_override,
            seed,
            values,
            classes,
            max_nodes,
            out,
            jobs,
        } => {
            let cfg = ExperimentConfig {
                num_features: features,
                depth,
                value_size: values,
                num_classes: classes,
                sizes,
                mode: mode.into(),
                learners: algos,
                trials,
                trial_overrides: trials_override,
                master_seed: seed,
                exact: ExactConfig {
                    max_nodes,
                    ..ExactConfig::default()
                },
            };
            let jobs = jobs
                .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
                .unwrap_or(1);
            let cells = harness::run_experiment(&cfg, jobs)
                .map_err(|e| usage(e.to_string()))?;
            let mut failures = 0usize;
            for cell in &cells {
                if let Err(e) = cell {
                    failures += 1;
                    eprintln!("error: {e}");
                }
            }
            let file = std::fs::File::create(&out)
                .map_err(|e| anyhow::anyhow!("{}: {e}", out.display()))?;
            harness::write_results_csv(
                cells.iter().filter_map(|c| c.as_ref().ok()),
                std::io::BufWriter::new(file),
            )
            .map_err(|e| anyhow::anyhow!("{}: {e}", out.display()))?;
            if failures > 0 {
                return Err(CliError::Runtime(anyhow::anyhow!(
                    "{failures} cell(s) failed; successful cells were written to {}",
                    out.display()
                )));
            }
            Ok(())
        }
    }
}
