//! Deterministic datasets: multisets of labeled inputs with redundancy
//! counts, plus precision of a tree on a dataset.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::input::Input;
use crate::space::{ClassId, FeatureSpace};
use crate::tree::DecisionTree;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatasetError {
    #[error("empty dataset")]
    Empty,
    #[error("input already present with class {existing}, cannot relabel to {new}")]
    ConflictingClass { existing: u16, new: u16 },
    #[error("count must be positive")]
    ZeroCount,
    #[error("input arity {got} does not match space ({expected} features)")]
    WrongArity { got: usize, expected: usize },
    #[error("tree and dataset use different feature spaces")]
    SpaceMismatch,
}

/// A deterministic multiset of (input, class) instances.
///
/// Each distinct input maps to exactly one class and a positive redundancy
/// count, so conflicting labels are unrepresentable. Iteration is in input
/// order (lexicographic by value ids), which keeps everything downstream
/// deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    space: Arc<FeatureSpace>,
    instances: BTreeMap<Input, (ClassId, u64)>,
}

impl Dataset {
    pub fn new(space: Arc<FeatureSpace>) -> Self {
        Dataset {
            space,
            instances: BTreeMap::new(),
        }
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<FeatureSpace> {
        &self.space
    }

    /// Adds one occurrence of `(x, class)`.
    pub fn insert(&mut self, x: Input, class: ClassId) -> Result<(), DatasetError> {
        self.insert_count(x, class, 1)
    }

    /// Adds `count` occurrences of `(x, class)`; counts accumulate across
    /// calls. Fails if `x` is already present with a different class.
    pub fn insert_count(&mut self, x: Input, class: ClassId, count: u64) -> Result<(), DatasetError> {
        if count == 0 {
            return Err(DatasetError::ZeroCount);
        }
        if x.num_features() != self.space.num_features() {
            return Err(DatasetError::WrongArity {
                got: x.num_features(),
                expected: self.space.num_features(),
            });
        }
        match self.instances.entry(x) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert((class, count));
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                let (existing, k) = *e.get();
                if existing != class {
                    return Err(DatasetError::ConflictingClass {
                        existing: existing.0,
                        new: class.0,
                    });
                }
                e.insert((existing, k + count));
            }
        }
        Ok(())
    }

    /// Total size: the sum of all redundancy counts.
    pub fn size(&self) -> u64 {
        self.instances.values().map(|(_, k)| k).sum()
    }

    /// Number of distinct inputs.
    pub fn num_distinct(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn class_of(&self, x: &Input) -> Option<ClassId> {
        self.instances.get(x).map(|(c, _)| *c)
    }

    /// Iterates `(input, class, count)` in input order.
    pub fn iter(&self) -> impl Iterator<Item = (&Input, ClassId, u64)> {
        self.instances.iter().map(|(x, &(c, k))| (x, c, k))
    }

    /// Weighted class histogram over the whole dataset.
    pub fn class_counts(&self) -> Vec<u64> {
        let mut counts = alloc::vec![0u64; self.space.num_classes()];
        for (_, c, k) in self.iter() {
            counts[c.index()] += k;
        }
        counts
    }
}

fn check_same_space(tree: &DecisionTree, data: &Dataset) -> Result<(), DatasetError> {
    if !Arc::ptr_eq(tree.space_arc(), data.space_arc()) && tree.space() != data.space() {
        return Err(DatasetError::SpaceMismatch);
    }
    Ok(())
}

/// Instance-weighted precision: the summed count of instances the tree
/// classifies consistently, divided by the dataset size. Redundant rows
/// count in both the numerator and the denominator.
pub fn precision(tree: &DecisionTree, data: &Dataset) -> Result<f64, DatasetError> {
    check_same_space(tree, data)?;
    if data.is_empty() {
        return Err(DatasetError::Empty);
    }
    let mut hit = 0u64;
    let mut total = 0u64;
    for (x, c, k) in data.iter() {
        total += k;
        if tree.evaluate(x) == c {
            hit += k;
        }
    }
    Ok(hit as f64 / total as f64)
}

/// Precision over distinct inputs, ignoring redundancy counts. Secondary
/// statistic next to [`precision`]; the two differ as soon as consistent and
/// inconsistent inputs are duplicated unevenly.
pub fn distinct_precision(tree: &DecisionTree, data: &Dataset) -> Result<f64, DatasetError> {
    check_same_space(tree, data)?;
    if data.is_empty() {
        return Err(DatasetError::Empty);
    }
    let hit = data.iter().filter(|(x, c, _)| tree.evaluate(x) == *c).count();
    Ok(hit as f64 / data.num_distinct() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{ClassId, FeatureSpace};
    use crate::tree::{DecisionTree, TreeBuilder};
    use crate::space::FeatureId;
    use alloc::string::ToString;
    use alloc::vec;

    fn example_space() -> Arc<FeatureSpace> {
        Arc::new(
            FeatureSpace::new(
                vec!["f1".to_string(), "f2".to_string()],
                vec![
                    vec!["v1".to_string(), "v2".to_string()],
                    vec!["v1".to_string(), "v2".to_string(), "v3".to_string()],
                ],
                vec!["c0".to_string(), "c1".to_string()],
            )
            .unwrap(),
        )
    }

    fn example_tree(space: &Arc<FeatureSpace>) -> DecisionTree {
        let mut b = TreeBuilder::new(space.clone());
        let l00 = b.leaf(ClassId(0)).unwrap();
        let l01 = b.leaf(ClassId(1)).unwrap();
        let l02 = b.leaf(ClassId(0)).unwrap();
        let inner = b.internal(FeatureId(1), vec![l00, l01, l02]).unwrap();
        let l1 = b.leaf(ClassId(1)).unwrap();
        let root = b.internal(FeatureId(0), vec![inner, l1]).unwrap();
        b.build(root).unwrap()
    }

    fn x(space: &FeatureSpace, vals: &[u16]) -> Input {
        Input::from_indices(space, vals).unwrap()
    }

    #[test]
    fn consistent_dataset_scores_full_precision() {
        let s = example_space();
        let t = example_tree(&s);
        // (v2,v1)->c1 once, (v1,v3)->c0 twice.
        let mut d1 = Dataset::new(s.clone());
        d1.insert(x(&s, &[1, 0]), ClassId(1)).unwrap();
        d1.insert_count(x(&s, &[0, 2]), ClassId(0), 2).unwrap();
        assert_eq!(d1.size(), 3);
        assert_eq!(d1.num_distinct(), 2);
        assert_eq!(precision(&t, &d1).unwrap(), 1.0);
        assert_eq!(distinct_precision(&t, &d1).unwrap(), 1.0);
    }

    #[test]
    fn inconsistent_rows_are_weighted_by_redundancy() {
        let s = example_space();
        let t = example_tree(&s);
        // (v2,v1)->c1 three times (consistent), (v1,v3)->c1 twice (the tree
        // says c0 there): 3 of 5 weighted rows agree, 1 of 2 distinct inputs.
        let mut d2 = Dataset::new(s.clone());
        d2.insert_count(x(&s, &[1, 0]), ClassId(1), 3).unwrap();
        d2.insert_count(x(&s, &[0, 2]), ClassId(1), 2).unwrap();
        assert_eq!(precision(&t, &d2).unwrap(), 0.6);
        assert_eq!(distinct_precision(&t, &d2).unwrap(), 0.5);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let s = example_space();
        let t = example_tree(&s);
        let d = Dataset::new(s);
        assert_eq!(precision(&t, &d).unwrap_err(), DatasetError::Empty);
        assert_eq!(distinct_precision(&t, &d).unwrap_err(), DatasetError::Empty);
    }

    #[test]
    fn conflicting_class_is_rejected() {
        let s = example_space();
        let mut d = Dataset::new(s.clone());
        d.insert(x(&s, &[0, 0]), ClassId(0)).unwrap();
        let err = d.insert(x(&s, &[0, 0]), ClassId(1)).unwrap_err();
        assert_eq!(err, DatasetError::ConflictingClass { existing: 0, new: 1 });
        // Same class accumulates.
        d.insert(x(&s, &[0, 0]), ClassId(0)).unwrap();
        assert_eq!(d.size(), 2);
        assert_eq!(d.num_distinct(), 1);
    }

    #[test]
    fn space_mismatch_is_detected() {
        let s = example_space();
        let t = example_tree(&s);
        let other = Arc::new(FeatureSpace::binary(2));
        let mut d = Dataset::new(other.clone());
        d.insert(x(&other, &[0, 0]), ClassId(0)).unwrap();
        assert_eq!(precision(&t, &d).unwrap_err(), DatasetError::SpaceMismatch);
    }

    #[test]
    fn precision_one_iff_every_instance_consistent() {
        let s = example_space();
        let t = example_tree(&s);
        let mut d = Dataset::new(s.clone());
        for xi in crate::input::all_inputs(&s) {
            let c = t.evaluate(&xi);
            d.insert(xi, c).unwrap();
        }
        assert_eq!(precision(&t, &d).unwrap(), 1.0);
        // Flip one instance: precision drops strictly below 1.
        let mut d2 = Dataset::new(s.clone());
        for (i, xi) in crate::input::all_inputs(&s).enumerate() {
            let c = t.evaluate(&xi);
            let c = if i == 0 { ClassId(1 - c.0) } else { c };
            d2.insert(xi, c).unwrap();
        }
        assert!(precision(&t, &d2).unwrap() < 1.0);
    }
}
