//! Benchmarking toolkit for decision-tree learning algorithms.
//!
//! Instead of scoring learners on a fixed domain dataset, this crate scores
//! them against randomly generated *oracle* trees:
//!
//! 1. [`oracle::generate_oracle`] builds a random "perfect" decision tree
//!    (every root-to-leaf path has the same length).
//! 2. [`datagen`] derives training datasets from the oracle, either by
//!    random walks (with redundancy) or by duplicate-free sampling from the
//!    full consistent instance set.
//! 3. [`learners`] induce a tree from the dataset (ID3, gain ratio, Gini,
//!    random splits, or an exact depth-minimal search).
//! 4. [`equiv::doe_scan`] compares the learned tree against the oracle and
//!    reports the degree of equivalence (DOE): the fraction of compatible
//!    rule pairs that agree on the class.
//!
//! Everything is deterministic for a given seed, so whole experiment grids
//! are reproducible bit for bit.
//!
//! # Example
//!
//! ```
//! use dtbench_core::oracle::{generate_oracle, OracleConfig};
//! use dtbench_core::datagen::gen_completely_random;
//! use dtbench_core::learners::learn_id3;
//! use dtbench_core::equiv::doe_scan;
//!
//! let oracle = generate_oracle(&OracleConfig::binary(6, 3, 42)).unwrap();
//! let data = gen_completely_random(&oracle, 40, 7).unwrap();
//! let learned = learn_id3(&data).unwrap();
//! let report = doe_scan(&oracle, &learned).unwrap();
//! assert!(report.doe() <= 1.0);
//! ```
//!
//! The crate is `no_std`-compatible (with `alloc`) when built without the
//! default `std` feature; wall-clock limits on the exact learner are only
//! enforced when `std` is enabled.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod dataset;
pub mod datagen;
pub mod equiv;
pub mod input;
pub mod learners;
pub mod oracle;
pub mod seed;
pub mod space;
pub mod text;
pub mod tree;

pub use dataset::{precision, Dataset};
pub use equiv::{doe_bruteforce, doe_scan, is_equivalent, DoeReport};
pub use input::{Input, PartialInput};
pub use learners::LearnerKind;
pub use oracle::{generate_oracle, OracleConfig};
pub use space::{ClassId, FeatureId, FeatureSpace, ValueId};
pub use tree::{DecisionTree, Rule, TreeBuilder};
