//! Training-dataset generation from an oracle tree.
//!
//! Two modes are provided. *Completely random* datasets take `q` random
//! walks through the oracle and fill each rule's free features with random
//! values, so inputs repeat. *Uniquely random* datasets sample `q` distinct
//! inputs from the full consistent instance set, covering as many oracle
//! rules as possible. Both are fully consistent with the oracle and
//! deterministic per seed.

use alloc::vec::Vec;

use rand::Rng;

use crate::dataset::Dataset;
use crate::input::{Input, PartialInput};
use crate::seed::rng_from;
use crate::space::{ClassId, ValueId};
use crate::tree::DecisionTree;

/// Largest input space [`enumerate_all_consistent`] will materialize.
pub const DEFAULT_ENUM_GUARD: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatagenError {
    #[error("requested size must be at least 1")]
    ZeroSize,
    #[error("requested {requested} distinct instances, the input space only has {available}")]
    NotEnoughInputs { requested: u64, available: u64 },
    #[error("input space has {size} instances, over the enumeration guard of {guard}")]
    SpaceTooLarge { size: u128, guard: u64 },
    #[error("dataset bookkeeping failed: {0}")]
    Dataset(#[from] crate::dataset::DatasetError),
}

/// One enumerated instance: a total input, the oracle's class for it, and
/// the index of the oracle rule it triggers (depth-first rule order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledInstance {
    pub input: Input,
    pub class: ClassId,
    pub rule_index: usize,
}

/// Generates a dataset of size exactly `q` by `q` random walks from the
/// oracle root: each edge is chosen uniformly, then every feature free in
/// the reached rule gets a uniformly random value. Redundant inputs
/// accumulate in the redundancy counts.
pub fn gen_completely_random(
    oracle: &DecisionTree,
    q: u64,
    seed: u64,
) -> Result<Dataset, DatagenError> {
    if q == 0 {
        return Err(DatagenError::ZeroSize);
    }
    let space = oracle.space_arc();
    let mut rng = rng_from(&[seed]);
    let mut data = Dataset::new(space.clone());
    let m = space.num_features();
    for _ in 0..q {
        let mut partial = PartialInput::undefined(m);
        let mut node = oracle.root();
        while let Some(f) = oracle.feature_at(node) {
            let v = ValueId(rng.random_range(0..space.num_values(f) as u32) as u16);
            partial.set(f, v);
            node = oracle.child(node, v).expect("internal node is total");
        }
        let class = oracle.class_at(node).expect("walk ends at a leaf");
        // Free features in feature-id order.
        let values: Vec<ValueId> = space
            .feature_ids()
            .map(|f| match partial.get(f) {
                Some(v) => v,
                None => ValueId(rng.random_range(0..space.num_values(f) as u32) as u16),
            })
            .collect();
        let input = Input::new(space, values).expect("walk values are in range");
        data.insert(input, class)?;
    }
    Ok(data)
}

/// Enumerates every input consistent with the oracle: rules in depth-first
/// order, and within a rule the free features iterate in feature-id order
/// with the last one varying fastest. Refuses input spaces larger than
/// [`DEFAULT_ENUM_GUARD`].
pub fn enumerate_all_consistent(
    oracle: &DecisionTree,
) -> Result<Vec<LabeledInstance>, DatagenError> {
    enumerate_all_consistent_with_guard(oracle, DEFAULT_ENUM_GUARD)
}

/// [`enumerate_all_consistent`] with an explicit guard.
pub fn enumerate_all_consistent_with_guard(
    oracle: &DecisionTree,
    guard: u64,
) -> Result<Vec<LabeledInstance>, DatagenError> {
    let space = oracle.space();
    let size = space.input_space_size().unwrap_or(u128::MAX);
    if size > guard as u128 {
        return Err(DatagenError::SpaceTooLarge { size, guard });
    }
    let mut out = Vec::with_capacity(size as usize);
    for (rule_index, rule) in oracle.rules().iter().enumerate() {
        let mut partial = PartialInput::undefined(space.num_features());
        for &(f, v) in rule.assignments() {
            partial.set(f, v);
        }
        let free: Vec<_> = space
            .feature_ids()
            .filter(|&f| partial.get(f).is_none())
            .collect();
        // Odometer over the free features, last one fastest.
        let mut odometer = alloc::vec![ValueId(0); free.len()];
        loop {
            for (slot, &f) in free.iter().enumerate() {
                partial.set(f, odometer[slot]);
            }
            out.push(LabeledInstance {
                input: partial.complete_first(),
                class: rule.class(),
                rule_index,
            });
            let mut pos = free.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                if odometer[pos].index() + 1 < space.num_values(free[pos]) {
                    odometer[pos] = ValueId(odometer[pos].0 + 1);
                    break;
                }
                odometer[pos] = ValueId(0);
            }
            if free.is_empty() || (pos == 0 && odometer.iter().all(|v| v.index() == 0)) {
                break;
            }
        }
    }
    Ok(out)
}

/// Generates a duplicate-free dataset of `q` distinct inputs that covers as
/// many oracle rules as possible: with `b` oracle rules, `q <= b` picks one
/// instance each from `q` distinct rules, and `q > b` covers every rule
/// once before filling the remainder uniformly without replacement from the
/// rest of the consistent instance set.
pub fn gen_uniquely_random(
    oracle: &DecisionTree,
    q: u64,
    seed: u64,
) -> Result<Dataset, DatagenError> {
    if q == 0 {
        return Err(DatagenError::ZeroSize);
    }
    let all = enumerate_all_consistent(oracle)?;
    if q > all.len() as u64 {
        return Err(DatagenError::NotEnoughInputs {
            requested: q,
            available: all.len() as u64,
        });
    }
    let q = q as usize;
    let num_rules = oracle.num_leaves();
    let mut by_rule: Vec<Vec<usize>> = alloc::vec![Vec::new(); num_rules];
    for (i, inst) in all.iter().enumerate() {
        by_rule[inst.rule_index].push(i);
    }

    let mut rng = rng_from(&[seed]);
    let mut chosen: Vec<usize> = Vec::with_capacity(q);
    let covered_rules: Vec<usize> = if q <= num_rules {
        rand::seq::index::sample(&mut rng, num_rules, q).into_vec()
    } else {
        (0..num_rules).collect()
    };
    for r in covered_rules {
        let group = &by_rule[r];
        chosen.push(group[rng.random_range(0..group.len() as u32) as usize]);
    }
    if q > chosen.len() {
        let taken: alloc::collections::BTreeSet<usize> = chosen.iter().copied().collect();
        let pool: Vec<usize> = (0..all.len()).filter(|i| !taken.contains(i)).collect();
        let extra = rand::seq::index::sample(&mut rng, pool.len(), q - chosen.len());
        chosen.extend(extra.iter().map(|i| pool[i]));
    }

    let mut data = Dataset::new(oracle.space_arc().clone());
    for i in chosen {
        data.insert(all[i].input.clone(), all[i].class)?;
    }
    debug_assert_eq!(data.num_distinct(), q);
    Ok(data)
}
