//! Decision trees, the validating builder, and rules (root-to-leaf paths).

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::input::Input;
use crate::space::{ClassId, FeatureId, FeatureSpace, ValueId};

/// Index of a node in its tree's arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    /// Children are indexed by value id and cover the feature's full value
    /// set, so edge labels stay implicit.
    Internal {
        feature: FeatureId,
        children: Vec<NodeId>,
    },
    Leaf { class: ClassId },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("feature id {0} out of range")]
    InvalidFeature(u16),
    #[error("class id {0} out of range")]
    InvalidClass(u16),
    #[error("unknown node id {0}")]
    UnknownNode(u32),
    #[error("node for feature {feature} has {got} children, its value set has {expected}")]
    WrongChildCount {
        feature: u16,
        got: usize,
        expected: usize,
    },
    #[error("node {0} attached as a child more than once")]
    ChildReused(u32),
    #[error("root node {0} may not appear as a child")]
    RootIsChild(u32),
    #[error("{0} node(s) unreachable from the root")]
    Unreachable(usize),
    #[error("feature {0} appears twice on a root-to-leaf path")]
    RepeatedFeature(u16),
}

/// An immutable decision tree over a shared [`FeatureSpace`].
///
/// Internal nodes test one feature and have exactly one child per value of
/// that feature; leaves carry a class. No feature repeats along any
/// root-to-leaf path. Construction goes through [`TreeBuilder`], which
/// rejects violations eagerly; after that the tree never changes, so it is
/// safe to share across threads.
#[derive(Debug, Clone)]
pub struct DecisionTree {
    space: Arc<FeatureSpace>,
    nodes: Vec<Node>,
    root: NodeId,
    depth: u32,
    num_leaves: u32,
}

impl DecisionTree {
    /// A single-leaf tree answering `class` for every input.
    pub fn single_leaf(space: Arc<FeatureSpace>, class: ClassId) -> Result<Self, TreeError> {
        let mut b = TreeBuilder::new(space);
        let root = b.leaf(class)?;
        b.build(root)
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<FeatureSpace> {
        &self.space
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn num_leaves(&self) -> usize {
        self.num_leaves as usize
    }

    /// Maximal leaf depth (a single leaf has depth 0).
    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    pub fn is_leaf(&self, n: NodeId) -> bool {
        matches!(self.nodes[n.index()], Node::Leaf { .. })
    }

    /// Feature tested at `n`, or `None` for a leaf.
    pub fn feature_at(&self, n: NodeId) -> Option<FeatureId> {
        match &self.nodes[n.index()] {
            Node::Internal { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        }
    }

    /// Class at `n`, or `None` for an internal node.
    pub fn class_at(&self, n: NodeId) -> Option<ClassId> {
        match &self.nodes[n.index()] {
            Node::Leaf { class } => Some(*class),
            Node::Internal { .. } => None,
        }
    }

    /// Child reached from `n` along the edge labeled `v`.
    pub fn child(&self, n: NodeId, v: ValueId) -> Option<NodeId> {
        match &self.nodes[n.index()] {
            Node::Internal { children, .. } => children.get(v.index()).copied(),
            Node::Leaf { .. } => None,
        }
    }

    /// Classifies a total input by walking from the root; total by the tree
    /// invariants, so exactly one rule is triggered.
    pub fn evaluate(&self, x: &Input) -> ClassId {
        debug_assert_eq!(x.num_features(), self.space.num_features());
        let mut n = self.root;
        loop {
            match &self.nodes[n.index()] {
                Node::Leaf { class } => return *class,
                Node::Internal { feature, children } => {
                    n = children[x.value(*feature).index()];
                }
            }
        }
    }

    /// All rules in depth-first order, children visited in value-id order.
    /// The rule at index `i` ends at the `i`-th leaf in that order.
    pub fn rules(&self) -> Vec<Rule> {
        let mut out = Vec::with_capacity(self.num_leaves());
        let mut path: Vec<(FeatureId, ValueId)> = Vec::new();
        self.collect_rules(self.root, &mut path, &mut out);
        out
    }

    fn collect_rules(
        &self,
        n: NodeId,
        path: &mut Vec<(FeatureId, ValueId)>,
        out: &mut Vec<Rule>,
    ) {
        match &self.nodes[n.index()] {
            Node::Leaf { class } => out.push(Rule {
                assignments: path.clone(),
                class: *class,
            }),
            Node::Internal { feature, children } => {
                for (v, &child) in children.iter().enumerate() {
                    path.push((*feature, ValueId(v as u16)));
                    self.collect_rules(child, path, out);
                    path.pop();
                }
            }
        }
    }

    /// Maps each leaf's node id to its rule index (depth-first leaf order);
    /// internal nodes map to `usize::MAX`.
    pub(crate) fn leaf_rule_indices(&self) -> Vec<usize> {
        let mut map = alloc::vec![usize::MAX; self.nodes.len()];
        let mut next = 0usize;
        let mut stack = alloc::vec![self.root];
        // Explicit DFS, children pushed in reverse so value 0 pops first.
        while let Some(n) = stack.pop() {
            match &self.nodes[n.index()] {
                Node::Leaf { .. } => {
                    map[n.index()] = next;
                    next += 1;
                }
                Node::Internal { children, .. } => {
                    stack.extend(children.iter().rev());
                }
            }
        }
        map
    }

    fn same_shape(&self, n1: NodeId, other: &Self, n2: NodeId) -> bool {
        match (&self.nodes[n1.index()], &other.nodes[n2.index()]) {
            (Node::Leaf { class: a }, Node::Leaf { class: b }) => a == b,
            (
                Node::Internal {
                    feature: f1,
                    children: c1,
                },
                Node::Internal {
                    feature: f2,
                    children: c2,
                },
            ) => {
                f1 == f2
                    && c1.len() == c2.len()
                    && c1
                        .iter()
                        .zip(c2.iter())
                        .all(|(&a, &b)| self.same_shape(a, other, b))
            }
            _ => false,
        }
    }
}

/// Structural equality: same space and identical labeled shape, independent
/// of arena layout.
impl PartialEq for DecisionTree {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.same_shape(self.root, other, other.root)
    }
}

impl Eq for DecisionTree {}

/// One root-to-leaf path: the feature/value assignments along the path plus
/// the leaf's class. Features absent from the assignments are the rule's
/// free features; they do not affect the decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    assignments: Vec<(FeatureId, ValueId)>,
    class: ClassId,
}

impl Rule {
    pub fn new(assignments: Vec<(FeatureId, ValueId)>, class: ClassId) -> Self {
        debug_assert!({
            let mut fs: Vec<_> = assignments.iter().map(|(f, _)| *f).collect();
            fs.sort_unstable();
            fs.windows(2).all(|w| w[0] != w[1])
        });
        Rule { assignments, class }
    }

    pub fn class(&self) -> ClassId {
        self.class
    }

    /// Assignments in path order (root first).
    pub fn assignments(&self) -> &[(FeatureId, ValueId)] {
        &self.assignments
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Value this rule requires for `f`, or `None` when `f` is free.
    pub fn value_for(&self, f: FeatureId) -> Option<ValueId> {
        self.assignments
            .iter()
            .find(|(rf, _)| *rf == f)
            .map(|(_, v)| *v)
    }
}

/// True iff `x` agrees with every assignment of `r` ("x triggers r").
pub fn triggers(x: &Input, r: &Rule) -> bool {
    r.assignments().iter().all(|&(f, v)| x.value(f) == v)
}

/// Builds [`DecisionTree`]s bottom-up and validates every invariant at
/// [`TreeBuilder::build`]: child arity per feature, single use of every
/// node, reachability, and feature distinctness along each path.
pub struct TreeBuilder {
    space: Arc<FeatureSpace>,
    nodes: Vec<Node>,
}

impl TreeBuilder {
    pub fn new(space: Arc<FeatureSpace>) -> Self {
        TreeBuilder {
            space,
            nodes: Vec::new(),
        }
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    fn push(&mut self, node: Node) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        id
    }

    pub fn leaf(&mut self, class: ClassId) -> Result<NodeId, TreeError> {
        if class.index() >= self.space.num_classes() {
            return Err(TreeError::InvalidClass(class.0));
        }
        Ok(self.push(Node::Leaf { class }))
    }

    /// An internal node testing `feature`; `children[i]` is reached on value
    /// id `i`, so the slice must cover the feature's whole value set.
    pub fn internal(
        &mut self,
        feature: FeatureId,
        children: Vec<NodeId>,
    ) -> Result<NodeId, TreeError> {
        if feature.index() >= self.space.num_features() {
            return Err(TreeError::InvalidFeature(feature.0));
        }
        let expected = self.space.num_values(feature);
        if children.len() != expected {
            return Err(TreeError::WrongChildCount {
                feature: feature.0,
                got: children.len(),
                expected,
            });
        }
        for &c in &children {
            if c.index() >= self.nodes.len() {
                return Err(TreeError::UnknownNode(c.0));
            }
        }
        Ok(self.push(Node::Internal { feature, children }))
    }

    /// Recursively copies the subtree rooted at `n` of `source` into this
    /// builder. Source and builder must share the feature space.
    pub fn copy_subtree(&mut self, source: &DecisionTree, n: NodeId) -> Result<NodeId, TreeError> {
        match &source.nodes[n.index()] {
            Node::Leaf { class } => self.leaf(*class),
            Node::Internal { feature, children } => {
                let copied = children
                    .iter()
                    .map(|&c| self.copy_subtree(source, c))
                    .collect::<Result<Vec<_>, _>>()?;
                self.internal(*feature, copied)
            }
        }
    }

    /// Deep-copies a subtree already in this builder, so one construction
    /// can hang structurally equal subtrees off several edges.
    pub fn duplicate(&mut self, n: NodeId) -> Result<NodeId, TreeError> {
        if n.index() >= self.nodes.len() {
            return Err(TreeError::UnknownNode(n.0));
        }
        match self.nodes[n.index()].clone() {
            Node::Leaf { class } => self.leaf(class),
            Node::Internal { feature, children } => {
                let copied = children
                    .iter()
                    .map(|&c| self.duplicate(c))
                    .collect::<Result<Vec<_>, _>>()?;
                self.internal(feature, copied)
            }
        }
    }

    pub fn build(self, root: NodeId) -> Result<DecisionTree, TreeError> {
        if root.index() >= self.nodes.len() {
            return Err(TreeError::UnknownNode(root.0));
        }
        let mut entering = alloc::vec![0u32; self.nodes.len()];
        for node in &self.nodes {
            if let Node::Internal { children, .. } = node {
                for c in children {
                    entering[c.index()] += 1;
                    if c.index() == root.index() {
                        return Err(TreeError::RootIsChild(c.0));
                    }
                    if entering[c.index()] > 1 {
                        return Err(TreeError::ChildReused(c.0));
                    }
                }
            }
        }
        // Every non-root node hangs off exactly one parent; combined with
        // the acyclicity of "children were created before their parent"
        // this makes reachable-from-root equivalent to entering == 1.
        let unreachable = entering
            .iter()
            .enumerate()
            .filter(|&(i, &n)| n == 0 && i != root.index())
            .count();
        if unreachable > 0 {
            return Err(TreeError::Unreachable(unreachable));
        }

        let mut depth = 0u32;
        let mut num_leaves = 0u32;
        let mut on_path = alloc::vec![false; self.space.num_features()];
        self.check_paths(root, 0, &mut on_path, &mut depth, &mut num_leaves)?;

        Ok(DecisionTree {
            space: self.space,
            nodes: self.nodes,
            root,
            depth,
            num_leaves,
        })
    }

    fn check_paths(
        &self,
        n: NodeId,
        level: u32,
        on_path: &mut Vec<bool>,
        depth: &mut u32,
        num_leaves: &mut u32,
    ) -> Result<(), TreeError> {
        match &self.nodes[n.index()] {
            Node::Leaf { .. } => {
                *depth = (*depth).max(level);
                *num_leaves += 1;
                Ok(())
            }
            Node::Internal { feature, children } => {
                if on_path[feature.index()] {
                    return Err(TreeError::RepeatedFeature(feature.0));
                }
                on_path[feature.index()] = true;
                for &c in children {
                    self.check_paths(c, level + 1, on_path, depth, num_leaves)?;
                }
                on_path[feature.index()] = false;
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::all_inputs;
    use alloc::string::ToString;
    use alloc::vec;

    /// Space of the two-feature example tree: f1 in {v1,v2}, f2 in
    /// {v1,v2,v3}, classes {c0,c1}.
    pub(crate) fn example_space() -> Arc<FeatureSpace> {
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

    /// f1=v1 -> f2 (v1->c0, v2->c1, v3->c0); f1=v2 -> c1.
    pub(crate) fn example_tree() -> DecisionTree {
        let space = example_space();
        let mut b = TreeBuilder::new(space);
        let l00 = b.leaf(ClassId(0)).unwrap();
        let l01 = b.leaf(ClassId(1)).unwrap();
        let l02 = b.leaf(ClassId(0)).unwrap();
        let inner = b.internal(FeatureId(1), vec![l00, l01, l02]).unwrap();
        let l1 = b.leaf(ClassId(1)).unwrap();
        let root = b.internal(FeatureId(0), vec![inner, l1]).unwrap();
        b.build(root).unwrap()
    }

    #[test]
    fn evaluate_walks_to_the_triggered_rule() {
        let t = example_tree();
        let s = t.space_arc().clone();
        // (f1=v1, f2=v3) -> c0
        let x = Input::from_indices(&s, &[0, 2]).unwrap();
        assert_eq!(t.evaluate(&x), ClassId(0));
        // (f1=v2, f2=v1) -> c1, f2 free on that rule
        let x = Input::from_indices(&s, &[1, 0]).unwrap();
        assert_eq!(t.evaluate(&x), ClassId(1));
    }

    #[test]
    fn single_leaf_answers_everywhere() {
        let s = Arc::new(FeatureSpace::binary(2));
        let t = DecisionTree::single_leaf(s.clone(), ClassId(1)).unwrap();
        for x in all_inputs(&s) {
            assert_eq!(t.evaluate(&x), ClassId(1));
        }
        assert_eq!(t.depth(), 0);
        assert_eq!(t.rules().len(), 1);
        assert!(t.rules()[0].is_empty());
    }

    #[test]
    fn rules_come_out_in_depth_first_value_order() {
        let t = example_tree();
        let rules = t.rules();
        assert_eq!(rules.len(), 4);
        assert_eq!(
            rules[0].assignments(),
            &[(FeatureId(0), ValueId(0)), (FeatureId(1), ValueId(0))]
        );
        assert_eq!(rules[0].class(), ClassId(0));
        assert_eq!(rules[1].class(), ClassId(1));
        assert_eq!(rules[2].class(), ClassId(0));
        assert_eq!(rules[3].assignments(), &[(FeatureId(0), ValueId(1))]);
        assert_eq!(rules[3].class(), ClassId(1));
        assert_eq!(rules[3].value_for(FeatureId(1)), None);
    }

    #[test]
    fn triggers_checks_every_assignment() {
        let t = example_tree();
        let s = t.space_arc().clone();
        let rules = t.rules();
        let rightmost = &rules[3]; // f1=v2 -> c1, f2 free
        let x = Input::from_indices(&s, &[0, 2]).unwrap();
        assert!(!triggers(&x, rightmost));
        let x = Input::from_indices(&s, &[1, 0]).unwrap();
        assert!(triggers(&x, rightmost));
        let empty = Rule::new(vec![], ClassId(0));
        assert!(triggers(&x, &empty));
    }

    #[test]
    fn exactly_one_rule_triggers_per_input() {
        let t = example_tree();
        let s = t.space_arc().clone();
        let rules = t.rules();
        for x in all_inputs(&s) {
            let hits: Vec<_> = rules.iter().filter(|r| triggers(&x, r)).collect();
            assert_eq!(hits.len(), 1);
            assert_eq!(hits[0].class(), t.evaluate(&x));
        }
    }

    #[test]
    fn builder_rejects_wrong_child_count() {
        let s = example_space();
        let mut b = TreeBuilder::new(s);
        let l0 = b.leaf(ClassId(0)).unwrap();
        let l1 = b.leaf(ClassId(1)).unwrap();
        let err = b.internal(FeatureId(1), vec![l0, l1]).unwrap_err();
        assert_eq!(
            err,
            TreeError::WrongChildCount {
                feature: 1,
                got: 2,
                expected: 3
            }
        );
    }

    #[test]
    fn builder_rejects_repeated_feature_on_path() {
        let s = Arc::new(FeatureSpace::binary(2));
        let mut b = TreeBuilder::new(s);
        let l0 = b.leaf(ClassId(0)).unwrap();
        let l1 = b.leaf(ClassId(1)).unwrap();
        let inner = b.internal(FeatureId(0), vec![l0, l1]).unwrap();
        let l2 = b.leaf(ClassId(0)).unwrap();
        let root = b.internal(FeatureId(0), vec![inner, l2]).unwrap();
        assert_eq!(b.build(root).unwrap_err(), TreeError::RepeatedFeature(0));
    }

    #[test]
    fn builder_rejects_shared_and_dangling_nodes() {
        let s = Arc::new(FeatureSpace::binary(2));
        let mut b = TreeBuilder::new(s.clone());
        let l0 = b.leaf(ClassId(0)).unwrap();
        let root = b.internal(FeatureId(0), vec![l0, l0]).unwrap();
        assert_eq!(b.build(root).unwrap_err(), TreeError::ChildReused(l0.0));

        let mut b = TreeBuilder::new(s);
        let l0 = b.leaf(ClassId(0)).unwrap();
        let l1 = b.leaf(ClassId(1)).unwrap();
        let _orphan = b.leaf(ClassId(0)).unwrap();
        let root = b.internal(FeatureId(0), vec![l0, l1]).unwrap();
        assert_eq!(b.build(root).unwrap_err(), TreeError::Unreachable(1));
    }

    #[test]
    fn structural_equality_ignores_arena_order() {
        let t1 = example_tree();
        // Same tree, nodes allocated in a different order.
        let space = example_space();
        let mut b = TreeBuilder::new(space);
        let l1 = b.leaf(ClassId(1)).unwrap();
        let l02 = b.leaf(ClassId(0)).unwrap();
        let l01 = b.leaf(ClassId(1)).unwrap();
        let l00 = b.leaf(ClassId(0)).unwrap();
        let inner = b.internal(FeatureId(1), vec![l00, l01, l02]).unwrap();
        let root = b.internal(FeatureId(0), vec![inner, l1]).unwrap();
        let t2 = b.build(root).unwrap();
        assert_eq!(t1, t2);

        let t3 = DecisionTree::single_leaf(example_space(), ClassId(1)).unwrap();
        assert_ne!(t1, t3);
    }

    #[test]
    fn leaf_rule_indices_match_rules_order() {
        let t = example_tree();
        let map = t.leaf_rule_indices();
        let mut leaf_ids: Vec<usize> = (0..t.num_nodes())
            .filter(|&i| t.is_leaf(NodeId(i as u32)))
            .map(|i| map[i])
            .collect();
        leaf_ids.sort_unstable();
        assert_eq!(leaf_ids, vec![0, 1, 2, 3]);
    }
}
