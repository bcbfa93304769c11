//! Exact depth-minimal tree inference.
//!
//! Iterative deepening on the target depth: for each target `0, 1, 2, ...`
//! a recursive feasibility search asks whether some tree of at most that
//! depth classifies every training instance correctly. The search branches
//! over every feature still varying in the current instance subset and
//! memoizes infeasible `(subset, depth)` outcomes, keyed by the canonical
//! sorted list of instance indices. Because infeasibility at depth `d`
//! implies infeasibility below `d`, the memo stores the largest depth
//! proven infeasible per subset.

use alloc::boxed::Box;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::dataset::Dataset;
use crate::input::Input;
use crate::space::{ClassId, FeatureId, FeatureSpace};
use crate::tree::{DecisionTree, NodeId, TreeBuilder};

use super::criteria::majority_class;
use super::LearnError;

/// Search limits for [`learn_exact_depth`]. `None` means unlimited.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExactConfig {
    /// Give up if no consistent tree exists within this depth.
    pub depth_cap: Option<u32>,
    /// Abort after this many explored search nodes.
    pub max_nodes: Option<u64>,
    /// Abort after this much wall time. Only enforced with the `std`
    /// feature; ignored in `no_std` builds.
    pub timeout: Option<core::time::Duration>,
}

impl ExactConfig {
    pub fn with_max_nodes(max_nodes: u64) -> Self {
        ExactConfig {
            max_nodes: Some(max_nodes),
            ..Self::default()
        }
    }
}

/// Returns a tree of minimal depth among all trees consistent with `data`.
///
/// Deterministic: features are tried in id order and the first feasible
/// construction at the minimal depth wins. Intended for small feature
/// counts (roughly `m <= 12`); beyond that, set a budget and expect
/// [`LearnError::BudgetExceeded`], which carries the largest depth proven
/// infeasible before the abort.
pub fn learn_exact_depth(data: &Dataset, cfg: &ExactConfig) -> Result<DecisionTree, LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let mut inputs = Vec::with_capacity(data.num_distinct());
    let mut classes = Vec::with_capacity(data.num_distinct());
    for (x, c, _) in data.iter() {
        inputs.push(x);
        classes.push(c);
    }
    let mut search = Search {
        space: data.space(),
        inputs,
        classes,
        infeasible: HashMap::new(),
        nodes_explored: 0,
        max_nodes: cfg.max_nodes.unwrap_or(u64::MAX),
        #[cfg(feature = "std")]
        deadline: cfg.timeout.map(|t| std::time::Instant::now() + t),
    };

    // Splitting on every feature isolates identical inputs, so for a
    // deterministic dataset depth m always suffices.
    let m = search.space.num_features() as u32;
    let cap = cfg.depth_cap.unwrap_or(m).min(m);
    let all: Vec<u32> = (0..search.inputs.len() as u32).collect();
    let mut best_infeasible = None;
    for target in 0..=cap {
        match search.try_depth(&all, target) {
            Ok(Some(shape)) => {
                let mut builder = TreeBuilder::new(data.space_arc().clone());
                let root = build_shape(&mut builder, &shape)?;
                return Ok(builder.build(root)?);
            }
            Ok(None) => best_infeasible = Some(target),
            Err(Stop) => {
                return Err(LearnError::BudgetExceeded {
                    best_infeasible_depth: best_infeasible,
                })
            }
        }
    }
    Err(LearnError::DepthCapInfeasible { cap })
}

/// Plain tree description assembled by the search; converted into a
/// [`DecisionTree`] only for the winning construction.
enum Shape {
    Leaf(ClassId),
    Node(FeatureId, Vec<Shape>),
}

fn build_shape(builder: &mut TreeBuilder, shape: &Shape) -> Result<NodeId, LearnError> {
    match shape {
        Shape::Leaf(class) => Ok(builder.leaf(*class)?),
        Shape::Node(feature, children) => {
            let ids = children
                .iter()
                .map(|c| build_shape(builder, c))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(builder.internal(*feature, ids)?)
        }
    }
}

/// Budget exhausted (node count or wall time).
struct Stop;

struct Search<'a> {
    space: &'a FeatureSpace,
    inputs: Vec<&'a Input>,
    classes: Vec<ClassId>,
    /// Largest depth proven infeasible, per canonical subset.
    infeasible: HashMap<Box<[u32]>, u32>,
    nodes_explored: u64,
    max_nodes: u64,
    #[cfg(feature = "std")]
    deadline: Option<std::time::Instant>,
}

impl Search<'_> {
    fn charge(&mut self) -> Result<(), Stop> {
        self.nodes_explored += 1;
        if self.nodes_explored > self.max_nodes {
            return Err(Stop);
        }
        #[cfg(feature = "std")]
        if self.nodes_explored.is_multiple_of(1024) {
            if let Some(deadline) = self.deadline {
                if std::time::Instant::now() >= deadline {
                    return Err(Stop);
                }
            }
        }
        Ok(())
    }

    fn class_hist(&self, subset: &[u32]) -> Vec<u64> {
        let mut hist = alloc::vec![0u64; self.space.num_classes()];
        for &i in subset {
            hist[self.classes[i as usize].index()] += 1;
        }
        hist
    }

    /// Is there a tree of depth at most `depth` consistent with `subset`?
    /// Returns its shape when one exists. `subset` must be sorted.
    fn try_depth(&mut self, subset: &[u32], depth: u32) -> Result<Option<Shape>, Stop> {
        self.charge()?;
        let hist = self.class_hist(subset);
        let nonzero = hist.iter().filter(|&&c| c > 0).count();
        if nonzero == 1 {
            let class = ClassId(hist.iter().position(|&c| c > 0).unwrap() as u16);
            return Ok(Some(Shape::Leaf(class)));
        }
        if depth == 0 {
            return Ok(None);
        }
        if self.infeasible.get(subset).is_some_and(|&d| d >= depth) {
            return Ok(None);
        }

        let majority = majority_class(&hist).expect("subset is nonempty");
        'features: for f in self.space.feature_ids() {
            // Only features that still vary on the subset can help; a
            // constant feature reproduces the same subset one level down.
            let first = self.inputs[subset[0] as usize].value(f);
            if subset[1..]
                .iter()
                .all(|&i| self.inputs[i as usize].value(f) == first)
            {
                continue;
            }
            let mut parts = alloc::vec![Vec::new(); self.space.num_values(f)];
            for &i in subset {
                parts[self.inputs[i as usize].value(f).index()].push(i);
            }
            let mut children = Vec::with_capacity(parts.len());
            for part in &parts {
                if part.is_empty() {
                    children.push(Shape::Leaf(majority));
                } else {
                    match self.try_depth(part, depth - 1)? {
                        Some(shape) => children.push(shape),
                        None => continue 'features,
                    }
                }
            }
            return Ok(Some(Shape::Node(f, children)));
        }

        let entry = self.infeasible.entry(subset.into()).or_insert(0);
        *entry = (*entry).max(depth);
        Ok(None)
    }
}
