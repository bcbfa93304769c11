//! The decision-tree learners under evaluation.
//!
//! Five algorithms, all mapping a deterministic [`Dataset`] to a
//! [`DecisionTree`] that classifies every training instance correctly
//! (there is no pruning):
//!
//! * [`learn_id3`] — multiway splits maximizing information gain.
//! * [`learn_gain_ratio`] — multiway splits maximizing gain ratio.
//! * [`learn_gini`] — binary `{f=v}` / `{f!=v}` splits maximizing the Gini
//!   impurity decrease.
//! * [`learn_random_tree`] — uniformly random split feature per node. The
//!   exact semantics are this crate's own (the usual tool of that name is
//!   underspecified), so no bit-level compatibility is claimed.
//! * [`learn_exact_depth`] — a tree of provably minimal depth, by iterative
//!   deepening over a memoized feasibility search.
//!
//! Learners are pure functions of `(dataset, seed)`; every tie is broken
//! deterministically (lowest feature id, then lowest value id).

mod criteria;
mod exact;
mod greedy;

pub use criteria::{entropy, gini_impurity, majority_class, split_info};
pub use exact::{learn_exact_depth, ExactConfig};
pub use greedy::{learn_gain_ratio, learn_gini, learn_id3, learn_random_tree};

use crate::dataset::Dataset;
use crate::tree::DecisionTree;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LearnError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("class counts are all zero")]
    NoClassCounts,
    #[error("search budget exceeded{}", match best_infeasible_depth {
        Some(d) => alloc::format!(" (depths up to {d} proven infeasible)"),
        None => alloc::string::String::new(),
    })]
    BudgetExceeded { best_infeasible_depth: Option<u32> },
    #[error("no consistent tree within the depth cap of {cap}")]
    DepthCapInfeasible { cap: u32 },
    #[error("internal tree construction failure: {0}")]
    Tree(#[from] crate::tree::TreeError),
}

/// The learning algorithms, as named on the command line and in result
/// files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LearnerKind {
    Id3,
    GainRatio,
    Gini,
    RandomTree,
    ExactDepth,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 5] = [
        LearnerKind::Id3,
        LearnerKind::GainRatio,
        LearnerKind::Gini,
        LearnerKind::RandomTree,
        LearnerKind::ExactDepth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Id3 => "id3",
            LearnerKind::GainRatio => "gainratio",
            LearnerKind::Gini => "gini",
            LearnerKind::RandomTree => "randomtree",
            LearnerKind::ExactDepth => "exact",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Stable tag for seed derivation; independent of declaration order.
    pub fn seed_tag(self) -> u64 {
        match self {
            LearnerKind::Id3 => 1,
            LearnerKind::GainRatio => 2,
            LearnerKind::Gini => 3,
            LearnerKind::RandomTree => 4,
            LearnerKind::ExactDepth => 5,
        }
    }
}

impl core::fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Runs the learner selected by `kind`. `seed` only matters for
/// [`LearnerKind::RandomTree`]; `exact` only for
/// [`LearnerKind::ExactDepth`].
pub fn learn(
    kind: LearnerKind,
    data: &Dataset,
    seed: u64,
    exact: &ExactConfig,
) -> Result<DecisionTree, LearnError> {
    match kind {
        LearnerKind::Id3 => learn_id3(data),
        LearnerKind::GainRatio => learn_gain_ratio(data),
        LearnerKind::Gini => learn_gini(data),
        LearnerKind::RandomTree => learn_random_tree(data, seed),
        LearnerKind::ExactDepth => learn_exact_depth(data, exact),
    }
}
