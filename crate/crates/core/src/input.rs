//! Total and partial valuations of a feature space.

use alloc::vec::Vec;

use crate::space::{FeatureId, FeatureSpace, ValueId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InputError {
    #[error("input has {got} values, space has {expected} features")]
    WrongArity { got: usize, expected: usize },
    #[error("value {value} out of range for feature {feature} (size {size})")]
    ValueOutOfRange {
        feature: u16,
        value: u16,
        size: usize,
    },
    #[error("feature {0} is undefined")]
    Undefined(u16),
}

/// A total valuation: one value per feature, dense in feature-id order.
///
/// Inputs order lexicographically by value ids, which fixes the iteration
/// order of datasets and of full input-space enumerations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Input {
    values: Vec<ValueId>,
}

impl Input {
    /// Validates arity and value ranges against `space`.
    pub fn new(space: &FeatureSpace, values: Vec<ValueId>) -> Result<Self, InputError> {
        if values.len() != space.num_features() {
            return Err(InputError::WrongArity {
                got: values.len(),
                expected: space.num_features(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            let size = space.num_values(FeatureId(i as u16));
            if v.index() >= size {
                return Err(InputError::ValueOutOfRange {
                    feature: i as u16,
                    value: v.0,
                    size,
                });
            }
        }
        Ok(Input { values })
    }

    /// Convenience constructor from raw value indices.
    pub fn from_indices(space: &FeatureSpace, values: &[u16]) -> Result<Self, InputError> {
        Self::new(space, values.iter().map(|&v| ValueId(v)).collect())
    }

    pub fn value(&self, f: FeatureId) -> ValueId {
        self.values[f.index()]
    }

    pub fn num_features(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[ValueId] {
        &self.values
    }
}

/// A partial valuation: some features defined, the rest undefined.
///
/// Used as the `x` component of joint-traversal states in [`crate::equiv`]
/// and extended edge by edge: [`PartialInput::set`] on descent,
/// [`PartialInput::clear`] on backtrack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialInput {
    values: Vec<Option<ValueId>>,
}

impl PartialInput {
    /// The all-undefined valuation over `num_features` features.
    pub fn undefined(num_features: usize) -> Self {
        PartialInput {
            values: alloc::vec![None; num_features],
        }
    }

    pub fn get(&self, f: FeatureId) -> Option<ValueId> {
        self.values[f.index()]
    }

    pub fn set(&mut self, f: FeatureId, v: ValueId) {
        self.values[f.index()] = Some(v);
    }

    pub fn clear(&mut self, f: FeatureId) {
        self.values[f.index()] = None;
    }

    pub fn defined_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// True when every defined entry agrees with `x`.
    pub fn consistent_with(&self, x: &Input) -> bool {
        self.values
            .iter()
            .zip(x.values())
            .all(|(pv, &xv)| pv.is_none_or(|pv| pv == xv))
    }

    /// Total input obtained by filling each undefined feature with its first
    /// value (id 0). Deterministic witness completion.
    pub fn complete_first(&self) -> Input {
        Input {
            values: self
                .values
                .iter()
                .map(|v| v.unwrap_or(ValueId(0)))
                .collect(),
        }
    }
}

/// Iterates every total input of `space` in lexicographic order (the last
/// feature varies fastest).
pub fn all_inputs(space: &FeatureSpace) -> InputSpaceIter<'_> {
    InputSpaceIter {
        space,
        next: Some(alloc::vec![ValueId(0); space.num_features()]),
    }
}

pub struct InputSpaceIter<'a> {
    space: &'a FeatureSpace,
    next: Option<Vec<ValueId>>,
}

impl Iterator for InputSpaceIter<'_> {
    type Item = Input;

    fn next(&mut self) -> Option<Input> {
        let current = self.next.clone()?;
        // Odometer increment, last feature fastest.
        let mut bumped = current.clone();
        let mut pos = bumped.len();
        loop {
            if pos == 0 {
                self.next = None;
                break;
            }
            pos -= 1;
            let f = FeatureId(pos as u16);
            if bumped[pos].index() + 1 < self.space.num_values(f) {
                bumped[pos] = ValueId(bumped[pos].0 + 1);
                self.next = Some(bumped);
                break;
            }
            bumped[pos] = ValueId(0);
        }
        Some(Input { values: current })
    }
}
