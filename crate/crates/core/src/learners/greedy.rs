//! Greedy top-down induction: ID3, gain ratio, Gini, and random splits.
//!
//! All four share one recursive grower. A node stops when its subset is
//! pure or no unused feature still partitions it (for deterministic data
//! the latter only happens on pure subsets); branches with no instances
//! get a leaf labeled with the parent subset's majority class, which keeps
//! the tree total over the input space. Splits only consider features
//! unused on the current path.

use alloc::vec::Vec;

use rand::Rng;

use crate::dataset::Dataset;
use crate::input::Input;
use crate::seed::{rng_from, Prng};
use crate::space::{ClassId, FeatureId, FeatureSpace, ValueId};
use crate::tree::{DecisionTree, NodeId, TreeBuilder};

use super::criteria::{entropy, gini_impurity, majority_class, split_info};
use super::LearnError;

struct Ctx<'a> {
    space: &'a FeatureSpace,
    inputs: Vec<&'a Input>,
    classes: Vec<ClassId>,
    counts: Vec<u64>,
}

impl Ctx<'_> {
    fn class_hist(&self, subset: &[usize]) -> Vec<u64> {
        let mut hist = alloc::vec![0u64; self.space.num_classes()];
        for &i in subset {
            hist[self.classes[i].index()] += self.counts[i];
        }
        hist
    }

    fn weighted_size(&self, subset: &[usize]) -> u64 {
        subset.iter().map(|&i| self.counts[i]).sum()
    }

    fn partition(&self, subset: &[usize], f: FeatureId) -> Vec<Vec<usize>> {
        let mut parts = alloc::vec![Vec::new(); self.space.num_values(f)];
        for &i in subset {
            parts[self.inputs[i].value(f).index()].push(i);
        }
        parts
    }

    /// Unused features that split `subset` into at least two nonempty parts.
    fn candidates(&self, subset: &[usize], used: &[bool]) -> Vec<FeatureId> {
        self.space
            .feature_ids()
            .filter(|f| {
                if used[f.index()] {
                    return false;
                }
                let first = self.inputs[subset[0]].value(*f);
                subset[1..].iter().any(|&i| self.inputs[i].value(*f) != first)
            })
            .collect()
    }
}

fn pure_class(hist: &[u64]) -> Option<ClassId> {
    let mut found = None;
    for (i, &c) in hist.iter().enumerate() {
        if c > 0 {
            if found.is_some() {
                return None;
            }
            found = Some(ClassId(i as u16));
        }
    }
    found
}

enum Split {
    /// One child per value of the feature.
    Multiway(FeatureId),
    /// `{f = v}` against `{f != v}`.
    Binary(FeatureId, ValueId),
}

enum Strategy<'r> {
    InfoGain,
    GainRatio,
    Gini,
    Random(&'r mut Prng),
}

impl Strategy<'_> {
    fn choose(&mut self, ctx: &Ctx<'_>, subset: &[usize], candidates: &[FeatureId]) -> Split {
        match self {
            Strategy::Random(rng) => {
                let pick = rng.random_range(0..candidates.len() as u32) as usize;
                Split::Multiway(candidates[pick])
            }
            Strategy::InfoGain => Split::Multiway(argmax_gain(ctx, subset, candidates, false)),
            Strategy::GainRatio => Split::Multiway(argmax_gain(ctx, subset, candidates, true)),
            Strategy::Gini => choose_gini(ctx, subset, candidates),
        }
    }
}

/// Feature maximizing information gain (or gain ratio); candidates come in
/// ascending feature id and only a strictly better score replaces the
/// leader, so ties resolve to the lowest feature id.
fn argmax_gain(ctx: &Ctx<'_>, subset: &[usize], candidates: &[FeatureId], ratio: bool) -> FeatureId {
    let parent_h = entropy(&ctx.class_hist(subset)).expect("subset is nonempty");
    let total = ctx.weighted_size(subset);
    let mut best: Option<(f64, FeatureId)> = None;
    for &f in candidates {
        let parts = ctx.partition(subset, f);
        let sizes: Vec<u64> = parts.iter().map(|p| ctx.weighted_size(p)).collect();
        let mut children_h = 0.0;
        for (part, &size) in parts.iter().zip(&sizes) {
            if size > 0 {
                children_h +=
                    (size as f64 / total as f64) * entropy(&ctx.class_hist(part)).unwrap();
            }
        }
        let gain = parent_h - children_h;
        let score = if ratio {
            let si = split_info(&sizes, total);
            if si == 0.0 {
                // Only one nonempty part; not an actual split.
                continue;
            }
            gain / si
        } else {
            gain
        };
        if best.is_none_or(|(b, _)| score > b) {
            best = Some((score, f));
        }
    }
    best.expect("candidate list is nonempty").1
}

/// `(feature, value)` pair maximizing the Gini impurity decrease of the
/// binary partition; ties resolve to the lowest feature id, then the lowest
/// value id.
fn choose_gini(ctx: &Ctx<'_>, subset: &[usize], candidates: &[FeatureId]) -> Split {
    let parent_g = gini_impurity(&ctx.class_hist(subset)).expect("subset is nonempty");
    let total = ctx.weighted_size(subset) as f64;
    let mut best: Option<(f64, FeatureId, ValueId)> = None;
    for &f in candidates {
        for v in ctx.space.value_ids(f) {
            let (mut eq_hist, mut ne_hist) = (
                alloc::vec![0u64; ctx.space.num_classes()],
                alloc::vec![0u64; ctx.space.num_classes()],
            );
            for &i in subset {
                let hist = if ctx.inputs[i].value(f) == v {
                    &mut eq_hist
                } else {
                    &mut ne_hist
                };
                hist[ctx.classes[i].index()] += ctx.counts[i];
            }
            let eq_size: u64 = eq_hist.iter().sum();
            let ne_size: u64 = ne_hist.iter().sum();
            if eq_size == 0 || ne_size == 0 {
                continue;
            }
            let weighted = (eq_size as f64 / total) * gini_impurity(&eq_hist).unwrap()
                + (ne_size as f64 / total) * gini_impurity(&ne_hist).unwrap();
            let decrease = parent_g - weighted;
            if best.is_none_or(|(b, _, _)| decrease > b) {
                best = Some((decrease, f, v));
            }
        }
    }
    let (_, f, v) = best.expect("candidate features always admit a binary split");
    Split::Binary(f, v)
}

fn grow(
    ctx: &Ctx<'_>,
    builder: &mut TreeBuilder,
    subset: &[usize],
    used: &mut Vec<bool>,
    strategy: &mut Strategy<'_>,
) -> Result<NodeId, LearnError> {
    let hist = ctx.class_hist(subset);
    if let Some(class) = pure_class(&hist) {
        return Ok(builder.leaf(class)?);
    }
    let candidates = ctx.candidates(subset, used);
    if candidates.is_empty() {
        // Unreachable for deterministic datasets (identical inputs with
        // conflicting classes cannot be represented); kept as a safety net.
        return Ok(builder.leaf(majority_class(&hist)?)?);
    }
    match strategy.choose(ctx, subset, &candidates) {
        Split::Multiway(f) => {
            let majority = majority_class(&hist)?;
            let parts = ctx.partition(subset, f);
            used[f.index()] = true;
            let mut children = Vec::with_capacity(parts.len());
            for part in &parts {
                if part.is_empty() {
                    children.push(builder.leaf(majority)?);
                } else {
                    children.push(grow(ctx, builder, part, used, strategy)?);
                }
            }
            used[f.index()] = false;
            Ok(builder.internal(f, children)?)
        }
        Split::Binary(f, v) => {
            let mut eq = Vec::new();
            let mut ne = Vec::new();
            for &i in subset {
                if ctx.inputs[i].value(f) == v {
                    eq.push(i);
                } else {
                    ne.push(i);
                }
            }
            used[f.index()] = true;
            let eq_child = grow(ctx, builder, &eq, used, strategy)?;
            let ne_child = grow(ctx, builder, &ne, used, strategy)?;
            used[f.index()] = false;
            // Flatten the binary split onto the multiway node shape: the
            // matching value keeps its subtree, every other value gets a
            // copy of the complement subtree. With binary values this is
            // exactly a feature split.
            let mut first_other = true;
            let mut children = Vec::with_capacity(ctx.space.num_values(f));
            for value in ctx.space.value_ids(f) {
                if value == v {
                    children.push(eq_child);
                } else if first_other {
                    children.push(ne_child);
                    first_other = false;
                } else {
                    children.push(builder.duplicate(ne_child)?);
                }
            }
            Ok(builder.internal(f, children)?)
        }
    }
}

fn run(data: &Dataset, mut strategy: Strategy<'_>) -> Result<DecisionTree, LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let mut inputs = Vec::with_capacity(data.num_distinct());
    let mut classes = Vec::with_capacity(data.num_distinct());
    let mut counts = Vec::with_capacity(data.num_distinct());
    for (x, c, k) in data.iter() {
        inputs.push(x);
        classes.push(c);
        counts.push(k);
    }
    let ctx = Ctx {
        space: data.space(),
        inputs,
        classes,
        counts,
    };
    let subset: Vec<usize> = (0..ctx.inputs.len()).collect();
    let mut used = alloc::vec![false; ctx.space.num_features()];
    let mut builder = TreeBuilder::new(data.space_arc().clone());
    let root = grow(&ctx, &mut builder, &subset, &mut used, &mut strategy)?;
    Ok(builder.build(root)?)
}

/// ID3: recursive multiway splitting on the unused feature with maximal
/// information gain.
pub fn learn_id3(data: &Dataset) -> Result<DecisionTree, LearnError> {
    run(data, Strategy::InfoGain)
}

/// C4.5-style splitting on maximal gain ratio (information gain divided by
/// split information), without the pruning stage.
pub fn learn_gain_ratio(data: &Dataset) -> Result<DecisionTree, LearnError> {
    run(data, Strategy::GainRatio)
}

/// CART-style binary splitting on maximal Gini impurity decrease, without
/// the pruning stage.
pub fn learn_gini(data: &Dataset) -> Result<DecisionTree, LearnError> {
    run(data, Strategy::Gini)
}

/// Splits on a uniformly random usable feature at every node; grows until
/// purity, so the result is still consistent with the data. Deterministic
/// per seed.
pub fn learn_random_tree(data: &Dataset, seed: u64) -> Result<DecisionTree, LearnError> {
    let mut rng = rng_from(&[seed]);
    run(data, Strategy::Random(&mut rng))
}
