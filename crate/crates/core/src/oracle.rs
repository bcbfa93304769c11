//! Random generation of "perfect" oracle trees.
//!
//! An oracle is a reference tree treated as ground truth: datasets are
//! sampled from it and learned trees are scored against it. Generated
//! oracles are perfect (every leaf at depth exactly `k`), with the feature
//! at each node drawn uniformly from the features unused on its path, and
//! sibling leaves never all of one class, so no parent feature is free.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;

use crate::seed::{rng_from, Prng};
use crate::space::{ClassId, FeatureId, FeatureSpace, SpaceError};
use crate::tree::{DecisionTree, NodeId, TreeBuilder, TreeError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("depth {depth} must satisfy 1 <= depth <= {num_features}")]
    BadDepth { depth: u16, num_features: u16 },
    #[error("need at least 2 classes, got {0}")]
    TooFewClasses(u16),
    #[error("invalid feature space: {0}")]
    Space(#[from] SpaceError),
    #[error("internal tree construction failure: {0}")]
    Tree(#[from] TreeError),
}

/// Parameters for one random oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleConfig {
    /// Number of features `m`.
    pub num_features: u16,
    /// Rule length `k`, `1 <= k <= m`; every leaf sits at this depth.
    pub depth: u16,
    /// Per-feature value-set sizes, all `>= 2`.
    pub value_sizes: Vec<u16>,
    /// Number of classes, `>= 2`.
    pub num_classes: u16,
    pub seed: u64,
}

impl OracleConfig {
    /// Binary values, two classes.
    pub fn binary(num_features: u16, depth: u16, seed: u64) -> Self {
        Self::uniform(num_features, depth, 2, 2, seed)
    }

    /// All features share one value-set size.
    pub fn uniform(num_features: u16, depth: u16, values: u16, classes: u16, seed: u64) -> Self {
        OracleConfig {
            num_features,
            depth,
            value_sizes: alloc::vec![values; num_features as usize],
            num_classes: classes,
            seed,
        }
    }

    fn validate(&self) -> Result<(), OracleError> {
        if self.depth == 0 || self.depth > self.num_features {
            return Err(OracleError::BadDepth {
                depth: self.depth,
                num_features: self.num_features,
            });
        }
        if self.num_classes < 2 {
            return Err(OracleError::TooFewClasses(self.num_classes));
        }
        Ok(())
    }
}

/// Assigns classes to the `num_siblings` leaves under one parent, uniformly
/// among all assignments that are not constant, so at least two siblings
/// end up with distinct classes and the parent's feature cannot be free.
pub fn clever_random_class(
    num_siblings: usize,
    num_classes: usize,
    rng: &mut Prng,
) -> Result<Vec<ClassId>, OracleError> {
    if num_classes < 2 {
        return Err(OracleError::TooFewClasses(num_classes as u16));
    }
    debug_assert!(num_siblings >= 2);
    // Rejection sampling: constant draws have probability 1/|C|^(Z-1) <= 1/2.
    loop {
        let classes: Vec<ClassId> = (0..num_siblings)
            .map(|_| ClassId(rng.random_range(0..num_classes as u32) as u16))
            .collect();
        if classes.iter().any(|&c| c != classes[0]) {
            return Ok(classes);
        }
    }
}

/// Generates the oracle described by `cfg`, including its own
/// [`FeatureSpace`] (features `f0..`, classes `c0..`, values `false`/`true`
/// for binary features, `v0..` otherwise). Deterministic: the same config
/// always yields the same tree.
pub fn generate_oracle(cfg: &OracleConfig) -> Result<DecisionTree, OracleError> {
    cfg.validate()?;
    let sizes: Vec<usize> = cfg.value_sizes.iter().map(|&z| z as usize).collect();
    let space = Arc::new(FeatureSpace::with_value_sizes(
        cfg.num_features as usize,
        &sizes,
        cfg.num_classes as usize,
    )?);
    generate_oracle_in(&space, cfg.depth, cfg.seed)
}

/// Like [`generate_oracle`] but over an existing space.
pub fn generate_oracle_in(
    space: &Arc<FeatureSpace>,
    depth: u16,
    seed: u64,
) -> Result<DecisionTree, OracleError> {
    if depth == 0 || depth as usize > space.num_features() {
        return Err(OracleError::BadDepth {
            depth,
            num_features: space.num_features() as u16,
        });
    }
    let mut rng = rng_from(&[seed]);
    let mut builder = TreeBuilder::new(space.clone());
    let mut unused: Vec<FeatureId> = space.feature_ids().collect();
    let root = grow(&mut builder, &mut rng, &mut unused, depth)?;
    Ok(builder.build(root)?)
}

fn grow(
    builder: &mut TreeBuilder,
    rng: &mut Prng,
    unused: &mut Vec<FeatureId>,
    remaining: u16,
) -> Result<NodeId, OracleError> {
    // Sample an index into the sorted unused list, so the draw is uniform
    // over exactly the features not used by the ancestors.
    let slot = rng.random_range(0..unused.len() as u32) as usize;
    let feature = unused.remove(slot);
    let arity = builder.space().num_values(feature);
    let num_classes = builder.space().num_classes();

    let children = if remaining == 1 {
        clever_random_class(arity, num_classes, rng)?
            .into_iter()
            .map(|c| builder.leaf(c))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        (0..arity)
            .map(|_| grow(builder, rng, unused, remaining - 1))
            .collect::<Result<Vec<_>, _>>()?
    };

    unused.insert(slot, feature);
    Ok(builder.internal(feature, children)?)
}
