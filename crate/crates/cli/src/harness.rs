//! Experiment orchestration: sweep a (learner, dataset size) grid, run
//! seeded trials in each cell, and aggregate mean/std DOE per cell.
//!
//! One trial generates a fresh oracle, derives a training dataset from it,
//! runs the learner, and scores the learned tree with the equivalence scan.
//! Each stream (oracle, data, learner) gets an independently derived seed,
//! and cell seeds mix `(master seed, learner tag, size)`, so adding a
//! learner or size never perturbs the other cells. Trials are independent
//! jobs: results land in a pre-indexed grid and are aggregated in trial
//! order, which makes the output bytes independent of the worker count.

use std::io::{self, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use dtbench_core::datagen::{gen_completely_random, gen_uniquely_random, DatagenError};
use dtbench_core::equiv::{doe_scan, EquivError};
use dtbench_core::learners::{learn, ExactConfig, LearnError, LearnerKind};
use dtbench_core::oracle::{generate_oracle, OracleConfig, OracleError};
use dtbench_core::seed::derive_seed;

/// How training data is derived from the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataMode {
    /// Random walks with redundancy; any size.
    Complete,
    /// Duplicate-free, rule-coverage-maximal; size bounded by the input
    /// space.
    Unique,
}

impl DataMode {
    pub fn name(self) -> &'static str {
        match self {
            DataMode::Complete => "complete",
            DataMode::Unique => "unique",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "complete" => Some(DataMode::Complete),
            "unique" => Some(DataMode::Unique),
            _ => None,
        }
    }
}

impl std::fmt::Display for DataMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
}

/// Everything a trial can propagate, tagged with nothing; cell context is
/// attached by [`CellError`].
#[derive(Debug, Clone, thiserror::Error)]
pub enum TrialError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Datagen(#[from] DatagenError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Equiv(#[from] EquivError),
}

/// A failed cell: the first failing trial aborts the cell, other cells
/// continue.
#[derive(Debug, thiserror::Error)]
#[error("cell (learner {learner}, size {size}), trial {trial}: {source}")]
pub struct CellError {
    pub learner: LearnerKind,
    pub size: u64,
    pub trial: u32,
    pub source: TrialError,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub num_features: u16,
    pub depth: u16,
    /// Uniform value-set size ("Z"); 2 for binary benchmarks.
    pub value_size: u16,
    pub num_classes: u16,
    pub sizes: Vec<u64>,
    pub mode: DataMode,
    pub learners: Vec<LearnerKind>,
    /// Trials per cell.
    pub trials: u32,
    /// Per-learner trial-count overrides (exact inference is usually run
    /// with fewer trials because its results are more stable).
    pub trial_overrides: Vec<(LearnerKind, u32)>,
    pub master_seed: u64,
    /// Budget for the exact learner, when it is part of the sweep.
    pub exact: ExactConfig,
}

impl ExperimentConfig {
    pub fn new(
        num_features: u16,
        depth: u16,
        sizes: Vec<u64>,
        mode: DataMode,
        learners: Vec<LearnerKind>,
        trials: u32,
        master_seed: u64,
    ) -> Self {
        ExperimentConfig {
            num_features,
            depth,
            value_size: 2,
            num_classes: 2,
            sizes,
            mode,
            learners,
            trials,
            trial_overrides: Vec::new(),
            master_seed,
            exact: ExactConfig::default(),
        }
    }

    pub fn trials_for(&self, learner: LearnerKind) -> u32 {
        self.trial_overrides
            .iter()
            .find(|(k, _)| *k == learner)
            .map(|&(_, t)| t)
            .unwrap_or(self.trials)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.depth == 0 || self.depth > self.num_features {
            return Err(HarnessError::InvalidConfig(format!(
                "depth {} must satisfy 1 <= depth <= {}",
                self.depth, self.num_features
            )));
        }
        if self.sizes.is_empty() {
            return Err(HarnessError::InvalidConfig("no dataset sizes".into()));
        }
        if self.learners.is_empty() {
            return Err(HarnessError::InvalidConfig("no learners".into()));
        }
        if self.trials == 0 || self.learners.iter().any(|&k| self.trials_for(k) == 0) {
            return Err(HarnessError::InvalidConfig("trials must be >= 1".into()));
        }
        if self.sizes.contains(&0) {
            return Err(HarnessError::InvalidConfig("sizes must be >= 1".into()));
        }
        if self.mode == DataMode::Unique {
            let space = (self.value_size as u128).checked_pow(self.num_features as u32);
            for &s in &self.sizes {
                if space.is_none_or(|sp| s as u128 > sp) {
                    return Err(HarnessError::InvalidConfig(format!(
                        "unique mode size {s} exceeds the input space ({}^{})",
                        self.value_size, self.num_features
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One CSV row: aggregated DOE for a (learner, size) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub learner: LearnerKind,
    pub num_features: u16,
    pub depth: u16,
    pub size: u64,
    pub mode: DataMode,
    pub trials: u32,
    pub mean_doe: f64,
    /// Sample standard deviation (0 for a single trial).
    pub std_doe: f64,
    /// Mean learner wall time in seconds; informational only, excluded
    /// from reproducibility guarantees.
    pub mean_learn_time: f64,
    /// Mean equivalence-scan wall time in seconds; informational only.
    pub mean_scan_time: f64,
    /// The cell's derived seed (distinct across the grid).
    pub seed: u64,
}

pub type CellOutcome = Result<CellResult, CellError>;

/// Mixes the cell coordinates into a seed. Distinct cells get distinct
/// seeds in practice; the derivation never looks at the other cells.
pub fn cell_seed(master_seed: u64, learner: LearnerKind, size: u64) -> u64 {
    derive_seed(&[master_seed, learner.seed_tag(), size])
}

pub fn trial_seed(cell_seed: u64, trial: u32) -> u64 {
    derive_seed(&[cell_seed, trial as u64])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub doe: f64,
    pub learn_time: f64,
    pub scan_time: f64,
}

/// Runs one experiment trial: oracle, dataset, learner, equivalence scan.
/// Oracle, dataset, and learner each consume an independent stream derived
/// from `trial_seed`.
#[allow(clippy::too_many_arguments)]
pub fn run_trial(
    num_features: u16,
    depth: u16,
    value_size: u16,
    num_classes: u16,
    size: u64,
    mode: DataMode,
    learner: LearnerKind,
    exact: &ExactConfig,
    trial_seed: u64,
) -> Result<TrialResult, TrialError> {
    let oracle = generate_oracle(&OracleConfig::uniform(
        num_features,
        depth,
        value_size,
        num_classes,
        derive_seed(&[trial_seed, 1]),
    ))?;
    let data_seed = derive_seed(&[trial_seed, 2]);
    let data = match mode {
        DataMode::Complete => gen_completely_random(&oracle, size, data_seed)?,
        DataMode::Unique => gen_uniquely_random(&oracle, size, data_seed)?,
    };
    let learn_start = Instant::now();
    let tree = learn(learner, &data, derive_seed(&[trial_seed, 3]), exact)?;
    let learn_time = learn_start.elapsed().as_secs_f64();
    let scan_start = Instant::now();
    let report = doe_scan(&oracle, &tree)?;
    let scan_time = scan_start.elapsed().as_secs_f64();
    Ok(TrialResult {
        doe: report.doe(),
        learn_time,
        scan_time,
    })
}

/// Runs every (learner, size) cell of the grid, `jobs` trials at a time.
/// Cell order is learners-major in the order given; a failing trial aborts
/// only its own cell. The aggregated results are bit-identical for any
/// worker count.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    jobs: usize,
) -> Result<Vec<CellOutcome>, HarnessError> {
    cfg.validate()?;
    let jobs = jobs.max(1);

    struct Cell {
        learner: LearnerKind,
        size: u64,
        seed: u64,
        trials: u32,
    }
    let mut cells = Vec::new();
    let mut job_list: Vec<(usize, u32)> = Vec::new();
    for &learner in &cfg.learners {
        for &size in &cfg.sizes {
            let seed = cell_seed(cfg.master_seed, learner, size);
            let trials = cfg.trials_for(learner);
            for t in 0..trials {
                job_list.push((cells.len(), t));
            }
            cells.push(Cell {
                learner,
                size,
                seed,
                trials,
            });
        }
    }

    let results: Mutex<Vec<Option<Result<TrialResult, TrialError>>>> =
        Mutex::new(vec![None; job_list.len()]);
    let next_job = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(job_list.len()) {
            scope.spawn(|| loop {
                let j = next_job.fetch_add(1, Ordering::Relaxed);
                let Some(&(cell_idx, trial)) = job_list.get(j) else {
                    break;
                };
                let cell = &cells[cell_idx];
                let outcome = run_trial(
                    cfg.num_features,
                    cfg.depth,
                    cfg.value_size,
                    cfg.num_classes,
                    cell.size,
                    cfg.mode,
                    cell.learner,
                    &cfg.exact,
                    trial_seed(cell.seed, trial),
                );
                results.lock().unwrap()[j] = Some(outcome);
            });
        }
    });
    let results = results.into_inner().unwrap();

    // Aggregate in grid and trial order, independent of scheduling.
    let mut out = Vec::with_capacity(cells.len());
    let mut cursor = 0usize;
    for cell in &cells {
        let trials = cell.trials as usize;
        let slice = &results[cursor..cursor + trials];
        cursor += trials;
        let mut doe = Vec::with_capacity(trials);
        let mut learn_time = 0.0;
        let mut scan_time = 0.0;
        let mut error = None;
        for (t, r) in slice.iter().enumerate() {
            match r.as_ref().expect("every job ran") {
                Ok(tr) => {
                    doe.push(tr.doe);
                    learn_time += tr.learn_time;
                    scan_time += tr.scan_time;
                }
                Err(e) => {
                    error = Some((t as u32, e));
                    break;
                }
            }
        }
        if let Some((trial, source)) = error {
            out.push(Err(CellError {
                learner: cell.learner,
                size: cell.size,
                trial,
                source: source.clone(),
            }));
            continue;
        }
        let n = doe.len() as f64;
        let mean = doe.iter().sum::<f64>() / n;
        let std = if doe.len() < 2 {
            0.0
        } else {
            (doe.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        out.push(Ok(CellResult {
            learner: cell.learner,
            num_features: cfg.num_features,
            depth: cfg.depth,
            size: cell.size,
            mode: cfg.mode,
            trials: cell.trials,
            mean_doe: mean,
            std_doe: std,
            mean_learn_time: learn_time / n,
            mean_scan_time: scan_time / n,
            seed: cell.seed,
        }));
    }
    Ok(out)
}

/// Writes the stable results CSV:
/// `learner,num_features,depth,size,mode,trials,mean_doe,std_doe,seed`.
pub fn write_results_csv<'a, W: Write>(
    results: impl IntoIterator<Item = &'a CellResult>,
    mut w: W,
) -> io::Result<()> {
    writeln!(
        w,
        "learner,num_features,depth,size,mode,trials,mean_doe,std_doe,seed"
    )?;
    for r in results {
        writeln!(
            w,
            "{},{},{},{},{},{},{:.6},{:.6},{}",
            r.learner, r.num_features, r.depth, r.size, r.mode, r.trials, r.mean_doe, r.std_doe, r.seed
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig::new(
            5,
            3,
            vec![8, 16],
            DataMode::Complete,
            vec![LearnerKind::Id3, LearnerKind::Gini],
            4,
            99,
        )
    }

    fn csv_bytes(cells: &[CellOutcome]) -> Vec<u8> {
        let mut buf = Vec::new();
        write_results_csv(cells.iter().filter_map(|c| c.as_ref().ok()), &mut buf).unwrap();
        buf
    }

    #[test]
    fn single_trial_cells_have_zero_std() {
        let mut cfg = small_config();
        cfg.trials = 1;
        let cells = run_experiment(&cfg, 1).unwrap();
        for cell in cells {
            let cell = cell.unwrap();
            assert_eq!(cell.std_doe, 0.0);
            assert_eq!(cell.trials, 1);
            let single = run_trial(
                cfg.num_features,
                cfg.depth,
                cfg.value_size,
                cfg.num_classes,
                cell.size,
                cfg.mode,
                cell.learner,
                &cfg.exact,
                trial_seed(cell.seed, 0),
            )
            .unwrap();
            assert_eq!(cell.mean_doe, single.doe);
        }
    }

    #[test]
    fn full_space_unique_trials_pin_the_oracle() {
        // One binary feature, both instances: any consistent learner is
        // equivalent to the oracle.
        let r = run_trial(1, 1, 2, 2, 2, DataMode::Unique, LearnerKind::Id3,
            &ExactConfig::default(), 987).unwrap();
        assert_eq!(r.doe, 1.0);
        // Full 2^4 space with the exact learner.
        let r = run_trial(4, 2, 2, 2, 16, DataMode::Unique, LearnerKind::ExactDepth,
            &ExactConfig::default(), 55).unwrap();
        assert_eq!(r.doe, 1.0);
    }

    #[test]
    fn full_space_unique_cells_have_mean_doe_exactly_one() {
        let mut cfg = small_config();
        cfg.mode = DataMode::Unique;
        cfg.sizes = vec![32]; // 2^5, the whole input space
        cfg.learners = vec![LearnerKind::ExactDepth];
        let cells = run_experiment(&cfg, 2).unwrap();
        assert_eq!(cells[0].as_ref().unwrap().mean_doe, 1.0);
        assert_eq!(cells[0].as_ref().unwrap().std_doe, 0.0);
    }

    #[test]
    fn results_are_identical_across_worker_counts() {
        let cfg = small_config();
        let a = csv_bytes(&run_experiment(&cfg, 1).unwrap());
        let b = csv_bytes(&run_experiment(&cfg, 8).unwrap());
        let c = csv_bytes(&run_experiment(&cfg, 3).unwrap());
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!(!a.is_empty());
    }

    #[test]
    fn cell_seeds_are_pairwise_distinct_over_the_grid() {
        let sizes: Vec<u64> = (1..=40).map(|i| i * 25).collect();
        let mut seen = BTreeSet::new();
        for learner in LearnerKind::ALL {
            for &size in &sizes {
                assert!(
                    seen.insert(cell_seed(7, learner, size)),
                    "collision at ({learner}, {size})"
                );
            }
        }
    }

    #[test]
    fn failing_cells_do_not_poison_the_rest() {
        let mut cfg = small_config();
        cfg.learners = vec![LearnerKind::ExactDepth, LearnerKind::Id3];
        cfg.exact = ExactConfig::with_max_nodes(1); // exact cells must fail
        let cells = run_experiment(&cfg, 2).unwrap();
        assert_eq!(cells.len(), 4);
        assert!(cells[0].is_err());
        assert!(cells[1].is_err());
        assert!(cells[2].is_ok());
        assert!(cells[3].is_ok());
        let err = cells[0].as_ref().unwrap_err();
        assert_eq!(err.learner, LearnerKind::ExactDepth);
        assert!(err.to_string().contains("budget"), "{err}");
    }

    #[test]
    fn trial_count_overrides_apply_per_learner() {
        let mut cfg = small_config();
        cfg.trials = 6;
        cfg.trial_overrides = vec![(LearnerKind::Gini, 2)];
        let cells = run_experiment(&cfg, 4).unwrap();
        for cell in cells {
            let cell = cell.unwrap();
            let expected = if cell.learner == LearnerKind::Gini { 2 } else { 6 };
            assert_eq!(cell.trials, expected);
        }
    }

    #[test]
    fn unique_mode_sizes_are_validated_against_the_space() {
        let mut cfg = small_config();
        cfg.mode = DataMode::Unique;
        cfg.sizes = vec![33]; // 2^5 = 32
        assert!(matches!(
            run_experiment(&cfg, 1),
            Err(HarnessError::InvalidConfig(_))
        ));
        cfg.sizes = vec![32];
        assert!(run_experiment(&cfg, 1).is_ok());
    }

    #[test]
    fn csv_has_the_stable_header_and_one_row_per_cell() {
        let cfg = small_config();
        let cells = run_experiment(&cfg, 2).unwrap();
        let text = String::from_utf8(csv_bytes(&cells)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "learner,num_features,depth,size,mode,trials,mean_doe,std_doe,seed"
        );
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("id3,5,3,8,complete,4,"));
        assert!(lines[4].starts_with("gini,5,3,16,complete,4,"));
        for cell in &cells {
            let mean = cell.as_ref().unwrap().mean_doe;
            assert!((0.0..=1.0).contains(&mean));
        }
    }
}
