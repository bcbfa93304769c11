//! Equivalence testing and the degree of equivalence (DOE).
//!
//! Two trees over one feature space are equivalent when they classify every
//! input identically. Rather than enumerating the (exponentially many)
//! inputs, [`doe_scan`] runs a joint traversal of the two trees that
//! realizes their distinguishing tree: states are `(oracle node, learned
//! node, partial input)`, the oracle side is driven edge by edge, and the
//! learned side advances whenever its current feature is already defined in
//! the partial input. When the oracle sits at a leaf and the learned
//! feature is still undefined, the scan branches over that feature's
//! values. Every joint leaf is one *compatible* pair of rules, counted
//! exactly once; the pair is *consistent* when the two classes agree.
//!
//! The DOE is `consistent pairs / compatible pairs`. It is 1 exactly when
//! the trees are equivalent, and the oracle-driven discipline makes the
//! pair count identical to the quadratic rule comparison implemented
//! independently in [`doe_bruteforce`].

use alloc::vec::Vec;
use core::ops::ControlFlow;

use crate::input::{all_inputs, Input, PartialInput};
use crate::space::{FeatureId, ValueId};
use crate::tree::{DecisionTree, NodeId, Rule};

pub use crate::datagen::DEFAULT_ENUM_GUARD;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EquivError {
    #[error("the two trees use different feature spaces")]
    SpaceMismatch,
    #[error("input space has {size} instances, over the enumeration guard of {guard}")]
    SpaceTooLarge { size: u128, guard: u64 },
}

/// Outcome of an equivalence scan.
#[derive(Debug, Clone, PartialEq)]
pub struct DoeReport {
    /// Compatible rule pairs that agree on the class ("succ").
    pub consistent_pairs: u64,
    /// All compatible rule pairs ("total"); at least 1 for any two trees.
    pub compatible_pairs: u64,
    /// One distinguishing input per inconsistent pair; only populated by
    /// [`doe_scan_with_witnesses`].
    pub witnesses: Vec<Input>,
}

impl DoeReport {
    /// Degree of equivalence in `[0, 1]`; 1 iff the trees are equivalent.
    pub fn doe(&self) -> f64 {
        self.consistent_pairs as f64 / self.compatible_pairs as f64
    }
}

/// One compatible rule pair met during a scan, in traversal order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairRecord {
    /// Index into `oracle.rules()`.
    pub oracle_rule: usize,
    /// Index into `learned.rules()`.
    pub learned_rule: usize,
    pub consistent: bool,
}

struct Scan<'a> {
    oracle: &'a DecisionTree,
    learned: &'a DecisionTree,
    oracle_rule_of: Vec<usize>,
    learned_rule_of: Vec<usize>,
}

impl<'a> Scan<'a> {
    fn new(oracle: &'a DecisionTree, learned: &'a DecisionTree) -> Result<Self, EquivError> {
        if oracle.space() != learned.space() {
            return Err(EquivError::SpaceMismatch);
        }
        Ok(Scan {
            oracle,
            learned,
            oracle_rule_of: oracle.leaf_rule_indices(),
            learned_rule_of: learned.leaf_rule_indices(),
        })
    }

    /// Advances the learned pointer while its feature is defined in `x`.
    fn catch_up(&self, mut n2: NodeId, x: &PartialInput) -> NodeId {
        while let Some(f) = self.learned.feature_at(n2) {
            match x.get(f) {
                Some(v) => n2 = self.learned.child(n2, v).expect("internal node is total"),
                None => break,
            }
        }
        n2
    }

    fn run<B>(
        &self,
        n1: NodeId,
        n2: NodeId,
        x: &mut PartialInput,
        on_pair: &mut impl FnMut(PairRecord, &PartialInput) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        let n2 = self.catch_up(n2, x);
        if let Some(f) = self.oracle.feature_at(n1) {
            for v in self.oracle.space().value_ids(f) {
                x.set(f, v);
                let child = self.oracle.child(n1, v).expect("internal node is total");
                self.run(child, n2, x, on_pair)?;
            }
            x.clear(f);
            ControlFlow::Continue(())
        } else if let Some(f) = self.learned.feature_at(n2) {
            // Oracle rule finished, feature free in it: branch the learned
            // side over every value.
            for v in self.learned.space().value_ids(f) {
                x.set(f, v);
                let child = self.learned.child(n2, v).expect("internal node is total");
                self.run(n1, child, x, on_pair)?;
            }
            x.clear(f);
            ControlFlow::Continue(())
        } else {
            let record = PairRecord {
                oracle_rule: self.oracle_rule_of[n1.index()],
                learned_rule: self.learned_rule_of[n2.index()],
                consistent: self.oracle.class_at(n1) == self.learned.class_at(n2),
            };
            on_pair(record, x)
        }
    }

    fn scan<B>(
        &self,
        on_pair: &mut impl FnMut(PairRecord, &PartialInput) -> ControlFlow<B>,
    ) -> Option<B> {
        let mut x = PartialInput::undefined(self.oracle.space().num_features());
        match self.run(self.oracle.root(), self.learned.root(), &mut x, on_pair) {
            ControlFlow::Break(b) => Some(b),
            ControlFlow::Continue(()) => None,
        }
    }
}

fn scan_counting(
    oracle: &DecisionTree,
    learned: &DecisionTree,
    mut extra: impl FnMut(PairRecord, &PartialInput),
) -> Result<DoeReport, EquivError> {
    let scan = Scan::new(oracle, learned)?;
    let mut report = DoeReport {
        consistent_pairs: 0,
        compatible_pairs: 0,
        witnesses: Vec::new(),
    };
    scan.scan::<()>(&mut |record, x| {
        report.compatible_pairs += 1;
        if record.consistent {
            report.consistent_pairs += 1;
        }
        extra(record, x);
        ControlFlow::Continue(())
    });
    Ok(report)
}

/// Scans `learned` against `oracle` and counts compatible and consistent
/// rule pairs. Each compatible pair is visited exactly once.
pub fn doe_scan(oracle: &DecisionTree, learned: &DecisionTree) -> Result<DoeReport, EquivError> {
    scan_counting(oracle, learned, |_, _| {})
}

/// Like [`doe_scan`], also returning every compatible pair in traversal
/// order (grouped by oracle rule).
pub fn doe_scan_detailed(
    oracle: &DecisionTree,
    learned: &DecisionTree,
) -> Result<(DoeReport, Vec<PairRecord>), EquivError> {
    let mut records = Vec::new();
    let report = scan_counting(oracle, learned, |record, _| records.push(record))?;
    Ok((report, records))
}

/// Like [`doe_scan`], also materializing one distinguishing input per
/// inconsistent pair (undefined features filled with each feature's first
/// value).
pub fn doe_scan_with_witnesses(
    oracle: &DecisionTree,
    learned: &DecisionTree,
) -> Result<DoeReport, EquivError> {
    let mut witnesses = Vec::new();
    let mut report = scan_counting(oracle, learned, |record, x| {
        if !record.consistent {
            witnesses.push(x.complete_first());
        }
    })?;
    report.witnesses = witnesses;
    Ok(report)
}

/// True when no feature is assigned conflicting values by the two rules,
/// i.e. some input triggers both.
pub fn compatible(r1: &Rule, r2: &Rule) -> bool {
    r1.assignments()
        .iter()
        .all(|&(f, v)| r2.value_for(f).is_none_or(|v2| v2 == v))
}

/// Compatible and agreeing on the class.
pub fn consistent(r1: &Rule, r2: &Rule) -> bool {
    r1.class() == r2.class() && compatible(r1, r2)
}

/// Independent DOE oracle: enumerates all rule pairs quadratically and
/// counts compatibility and consistency directly from the definitions.
/// Must agree with [`doe_scan`] exactly.
pub fn doe_bruteforce(t1: &DecisionTree, t2: &DecisionTree) -> Result<DoeReport, EquivError> {
    if t1.space() != t2.space() {
        return Err(EquivError::SpaceMismatch);
    }
    let rules1 = t1.rules();
    let rules2 = t2.rules();
    let mut report = DoeReport {
        consistent_pairs: 0,
        compatible_pairs: 0,
        witnesses: Vec::new(),
    };
    for r1 in &rules1 {
        for r2 in &rules2 {
            if compatible(r1, r2) {
                report.compatible_pairs += 1;
                if r1.class() == r2.class() {
                    report.consistent_pairs += 1;
                }
            }
        }
    }
    Ok(report)
}

/// Returns a distinguishing input if one exists, `None` when the trees are
/// equivalent. The witness is the first accepting state in scan order,
/// completed with first values; it always satisfies
/// `t1.evaluate(w) != t2.evaluate(w)`.
pub fn check_equivalence(
    t1: &DecisionTree,
    t2: &DecisionTree,
) -> Result<Option<Input>, EquivError> {
    let scan = Scan::new(t1, t2)?;
    let witness = scan.scan(&mut |record, x| {
        if record.consistent {
            ControlFlow::Continue(())
        } else {
            ControlFlow::Break(x.complete_first())
        }
    });
    if let Some(w) = &witness {
        debug_assert_ne!(t1.evaluate(w), t2.evaluate(w));
    }
    Ok(witness)
}

/// True iff the scan meets no accepting (inconsistent) state.
pub fn is_equivalent(t1: &DecisionTree, t2: &DecisionTree) -> Result<bool, EquivError> {
    Ok(check_equivalence(t1, t2)?.is_none())
}

/// Fraction of the full input space on which the two trees agree.
/// Input-weighted, unlike the rule-weighted DOE, so the two generally
/// differ. Enumerates the space; guarded by [`DEFAULT_ENUM_GUARD`].
pub fn agreement_rate(t1: &DecisionTree, t2: &DecisionTree) -> Result<f64, EquivError> {
    agreement_rate_with_guard(t1, t2, DEFAULT_ENUM_GUARD)
}

/// [`agreement_rate`] with an explicit guard.
pub fn agreement_rate_with_guard(
    t1: &DecisionTree,
    t2: &DecisionTree,
    guard: u64,
) -> Result<f64, EquivError> {
    if t1.space() != t2.space() {
        return Err(EquivError::SpaceMismatch);
    }
    let size = t1.space().input_space_size().unwrap_or(u128::MAX);
    if size > guard as u128 {
        return Err(EquivError::SpaceTooLarge { size, guard });
    }
    let mut agree = 0u64;
    let mut total = 0u64;
    for x in all_inputs(t1.space()) {
        total += 1;
        if t1.evaluate(&x) == t2.evaluate(&x) {
            agree += 1;
        }
    }
    Ok(agree as f64 / total as f64)
}

/// One state of the materialized distinguishing tree: node positions in
/// both trees plus the partial input built from the traversed edges.
/// Forced catch-up moves of the learned side are collapsed into their
/// parent state.
#[derive(Debug, Clone)]
pub struct DistNode {
    pub oracle_node: NodeId,
    pub learned_node: NodeId,
    pub partial: PartialInput,
    /// `(feature, value, child index)` per outgoing edge.
    pub children: Vec<(FeatureId, ValueId, usize)>,
    /// Both positions are leaves with distinct classes.
    pub accepting: bool,
}

/// Explicit distinguishing tree, for inspection and for validating the
/// streaming scan. Node 0 is the root; nodes appear in scan (pre-)order.
#[derive(Debug, Clone)]
pub struct DistTree {
    pub nodes: Vec<DistNode>,
}

impl DistTree {
    pub fn accepting(&self) -> impl Iterator<Item = &DistNode> {
        self.nodes.iter().filter(|n| n.accepting)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &DistNode> {
        self.nodes.iter().filter(|n| n.children.is_empty())
    }
}

/// Materializes the distinguishing tree the scan streams over. Debug and
/// test aid; the scan itself never allocates these states.
pub fn build_distinguishing_tree(
    oracle: &DecisionTree,
    learned: &DecisionTree,
) -> Result<DistTree, EquivError> {
    let scan = Scan::new(oracle, learned)?;
    let mut nodes = Vec::new();
    let mut x = PartialInput::undefined(oracle.space().num_features());
    build_rec(&scan, &mut nodes, oracle.root(), learned.root(), &mut x);
    Ok(DistTree { nodes })
}

fn build_rec(
    scan: &Scan<'_>,
    nodes: &mut Vec<DistNode>,
    n1: NodeId,
    n2: NodeId,
    x: &mut PartialInput,
) -> usize {
    let n2 = scan.catch_up(n2, x);
    let id = nodes.len();
    nodes.push(DistNode {
        oracle_node: n1,
        learned_node: n2,
        partial: x.clone(),
        children: Vec::new(),
        accepting: false,
    });
    if let Some(f) = scan.oracle.feature_at(n1) {
        for v in scan.oracle.space().value_ids(f) {
            x.set(f, v);
            let child = scan.oracle.child(n1, v).expect("internal node is total");
            let child_id = build_rec(scan, nodes, child, n2, x);
            nodes[id].children.push((f, v, child_id));
        }
        x.clear(f);
    } else if let Some(f) = scan.learned.feature_at(n2) {
        for v in scan.learned.space().value_ids(f) {
            x.set(f, v);
            let child = scan.learned.child(n2, v).expect("internal node is total");
            let child_id = build_rec(scan, nodes, n1, child, x);
            nodes[id].children.push((f, v, child_id));
        }
        x.clear(f);
    } else {
        nodes[id].accepting = scan.oracle.class_at(n1) != scan.learned.class_at(n2);
        nodes[id].partial = x.clone();
    }
    id
}
