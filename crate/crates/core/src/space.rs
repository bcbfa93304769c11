//! Feature spaces: the named features, their value sets, and the class set
//! shared by every tree, input, and dataset in one benchmark.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Index of a feature within its [`FeatureSpace`] (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureId(pub u16);

/// Index of a value within one feature's value set (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValueId(pub u16);

/// Index of a class within the space's class set (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub u16);

impl FeatureId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ValueId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ClassId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpaceError {
    #[error("a space needs at least one feature")]
    NoFeatures,
    #[error("feature {feature:?} has {got} values, need at least 2")]
    TooFewValues { feature: String, got: usize },
    #[error("need at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("duplicate {kind} name {name:?}")]
    DuplicateName { kind: &'static str, name: String },
    #[error("invalid {kind} name {name:?}: names are nonempty and use only [A-Za-z0-9_.-]")]
    InvalidName { kind: &'static str, name: String },
    #[error("feature count {features} does not match value-set count {value_sets}")]
    ArityMismatch { features: usize, value_sets: usize },
}

/// The domain every tree and dataset is defined over: an ordered feature
/// list, one ordered value set per feature, and an ordered class list.
///
/// All identities are small integer ids ([`FeatureId`], [`ValueId`],
/// [`ClassId`]); names are kept here and only consulted at the text
/// boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSpace {
    features: Vec<String>,
    values: Vec<Vec<String>>,
    classes: Vec<String>,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

fn check_unique(kind: &'static str, names: &[String]) -> Result<(), SpaceError> {
    for (i, name) in names.iter().enumerate() {
        if !valid_name(name) {
            return Err(SpaceError::InvalidName {
                kind,
                name: name.clone(),
            });
        }
        if names[..i].contains(name) {
            return Err(SpaceError::DuplicateName {
                kind,
                name: name.clone(),
            });
        }
    }
    Ok(())
}

impl FeatureSpace {
    /// Builds a space from explicit names, validating uniqueness, arity and
    /// the minimum sizes (every value set >= 2, classes >= 2).
    pub fn new(
        features: Vec<String>,
        values: Vec<Vec<String>>,
        classes: Vec<String>,
    ) -> Result<Self, SpaceError> {
        if features.is_empty() {
            return Err(SpaceError::NoFeatures);
        }
        if features.len() != values.len() {
            return Err(SpaceError::ArityMismatch {
                features: features.len(),
                value_sets: values.len(),
            });
        }
        if classes.len() < 2 {
            return Err(SpaceError::TooFewClasses(classes.len()));
        }
        check_unique("feature", &features)?;
        check_unique("class", &classes)?;
        for (f, vs) in features.iter().zip(values.iter()) {
            if vs.len() < 2 {
                return Err(SpaceError::TooFewValues {
                    feature: f.clone(),
                    got: vs.len(),
                });
            }
            check_unique("value", vs)?;
        }
        Ok(FeatureSpace {
            features,
            values,
            classes,
        })
    }

    /// `num_features` binary features `f0..` with values `false`/`true` and
    /// classes `c0`/`c1`.
    pub fn binary(num_features: usize) -> Self {
        Self::uniform(num_features, 2, 2).expect("binary space parameters are always valid")
    }

    /// A space with `num_features` features that all share the same value
    /// count and `num_classes` classes. Generated names: features `f0..`,
    /// classes `c0..`, values `false`/`true` when `num_values == 2` and
    /// `v0..` otherwise.
    pub fn uniform(
        num_features: usize,
        num_values: usize,
        num_classes: usize,
    ) -> Result<Self, SpaceError> {
        Self::with_value_sizes(num_features, &alloc::vec![num_values; num_features], num_classes)
    }

    /// Like [`FeatureSpace::uniform`] but with a per-feature value count.
    pub fn with_value_sizes(
        num_features: usize,
        value_sizes: &[usize],
        num_classes: usize,
    ) -> Result<Self, SpaceError> {
        let features = (0..num_features).map(|i| alloc::format!("f{i}")).collect();
        let values = value_sizes
            .iter()
            .map(|&z| {
                if z == 2 {
                    alloc::vec!["false".to_string(), "true".to_string()]
                } else {
                    (0..z).map(|i| alloc::format!("v{i}")).collect()
                }
            })
            .collect();
        let classes = (0..num_classes).map(|i| alloc::format!("c{i}")).collect();
        Self::new(features, values, classes)
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Size of the value set of feature `f`.
    pub fn num_values(&self, f: FeatureId) -> usize {
        self.values[f.index()].len()
    }

    pub fn feature_ids(&self) -> impl Iterator<Item = FeatureId> {
        (0..self.features.len() as u16).map(FeatureId)
    }

    pub fn class_ids(&self) -> impl Iterator<Item = ClassId> {
        (0..self.classes.len() as u16).map(ClassId)
    }

    pub fn value_ids(&self, f: FeatureId) -> impl Iterator<Item = ValueId> {
        (0..self.num_values(f) as u16).map(ValueId)
    }

    pub fn feature_name(&self, f: FeatureId) -> &str {
        &self.features[f.index()]
    }

    pub fn value_name(&self, f: FeatureId, v: ValueId) -> &str {
        &self.values[f.index()][v.index()]
    }

    pub fn class_name(&self, c: ClassId) -> &str {
        &self.classes[c.index()]
    }

    pub fn feature_by_name(&self, name: &str) -> Option<FeatureId> {
        self.features
            .iter()
            .position(|f| f == name)
            .map(|i| FeatureId(i as u16))
    }

    pub fn value_by_name(&self, f: FeatureId, name: &str) -> Option<ValueId> {
        self.values[f.index()]
            .iter()
            .position(|v| v == name)
            .map(|i| ValueId(i as u16))
    }

    pub fn class_by_name(&self, name: &str) -> Option<ClassId> {
        self.classes
            .iter()
            .position(|c| c == name)
            .map(|i| ClassId(i as u16))
    }

    /// Number of distinct total inputs, i.e. the product of all value-set
    /// sizes. `None` on (absurdly large) overflow.
    pub fn input_space_size(&self) -> Option<u128> {
        self.values
            .iter()
            .try_fold(1u128, |acc, vs| acc.checked_mul(vs.len() as u128))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn builds_valid_space() {
        let s = FeatureSpace::new(
            names(&["f1", "f2"]),
            vec![names(&["v1", "v2"]), names(&["v1", "v2", "v3"])],
            names(&["c0", "c1"]),
        )
        .unwrap();
        assert_eq!(s.num_features(), 2);
        assert_eq!(s.num_values(FeatureId(1)), 3);
        assert_eq!(s.input_space_size(), Some(6));
        assert_eq!(s.feature_by_name("f2"), Some(FeatureId(1)));
        assert_eq!(s.value_by_name(FeatureId(1), "v3"), Some(ValueId(2)));
        assert_eq!(s.class_by_name("nope"), None);
    }

    #[test]
    fn rejects_duplicate_feature_names() {
        let err = FeatureSpace::new(
            names(&["a", "a"]),
            vec![names(&["x", "y"]), names(&["x", "y"])],
            names(&["c0", "c1"]),
        )
        .unwrap_err();
        assert!(matches!(err, SpaceError::DuplicateName { kind: "feature", .. }));
    }

    #[test]
    fn rejects_small_value_sets_and_class_sets() {
        assert!(matches!(
            FeatureSpace::new(names(&["a"]), vec![names(&["x"])], names(&["c0", "c1"])),
            Err(SpaceError::TooFewValues { .. })
        ));
        assert!(matches!(
            FeatureSpace::new(names(&["a"]), vec![names(&["x", "y"])], names(&["c0"])),
            Err(SpaceError::TooFewClasses(1))
        ));
    }

    #[test]
    fn rejects_bad_names() {
        assert!(matches!(
            FeatureSpace::new(names(&["a b"]), vec![names(&["x", "y"])], names(&["c0", "c1"])),
            Err(SpaceError::InvalidName { .. })
        ));
        assert!(matches!(
            FeatureSpace::new(names(&["a"]), vec![names(&["x", ""])], names(&["c0", "c1"])),
            Err(SpaceError::InvalidName { .. })
        ));
    }

    #[test]
    fn uniform_binary_names_follow_convention() {
        let s = FeatureSpace::binary(3);
        assert_eq!(s.feature_name(FeatureId(2)), "f2");
        assert_eq!(s.value_name(FeatureId(0), ValueId(0)), "false");
        assert_eq!(s.value_name(FeatureId(0), ValueId(1)), "true");
        assert_eq!(s.class_name(ClassId(1)), "c1");
        let t = FeatureSpace::uniform(2, 3, 2).unwrap();
        assert_eq!(t.value_name(FeatureId(0), ValueId(2)), "v2");
    }
}
