//! Cross-module properties: rule partitioning, text round-trips, scan
//! versus brute-force DOE, the accepting-state characterization, exact
//! learner optimality, and the statistical coverage trend.

use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng;

use dtbench_core::dataset::{precision, Dataset};
use dtbench_core::datagen::{
    enumerate_all_consistent, gen_completely_random, gen_uniquely_random,
};
use dtbench_core::equiv::{
    agreement_rate, build_distinguishing_tree, check_equivalence, doe_bruteforce, doe_scan,
    is_equivalent,
};
use dtbench_core::input::{all_inputs, Input};
use dtbench_core::learners::{
    learn, learn_exact_depth, learn_id3, ExactConfig, LearnerKind,
};
use dtbench_core::oracle::{generate_oracle, generate_oracle_in, OracleConfig};
use dtbench_core::seed::{derive_seed, rng_from, Prng};
use dtbench_core::space::{ClassId, FeatureId, FeatureSpace};
use dtbench_core::text::{parse_tree, serialize_tree};
use dtbench_core::tree::{triggers, DecisionTree, NodeId, TreeBuilder};

/// Grows an arbitrary (generally non-perfect) tree: each node flips a
/// biased coin between leaf and a random unused feature.
fn random_general_tree(space: &Arc<FeatureSpace>, seed: u64) -> DecisionTree {
    fn grow(
        b: &mut TreeBuilder,
        rng: &mut Prng,
        unused: &mut Vec<FeatureId>,
        depth: usize,
    ) -> NodeId {
        let make_leaf = unused.is_empty() || (depth > 0 && rng.random_range(0..100u32) < 35);
        if make_leaf {
            let c = ClassId(rng.random_range(0..b.space().num_classes() as u32) as u16);
            b.leaf(c).unwrap()
        } else {
            let slot = rng.random_range(0..unused.len() as u32) as usize;
            let f = unused.remove(slot);
            let children = (0..b.space().num_values(f))
                .map(|_| grow(b, rng, unused, depth + 1))
                .collect();
            unused.insert(slot, f);
            b.internal(f, children).unwrap()
        }
    }
    let mut rng = rng_from(&[seed, 0xA11B]);
    let mut b = TreeBuilder::new(space.clone());
    let mut unused: Vec<FeatureId> = space.feature_ids().collect();
    let root = grow(&mut b, &mut rng, &mut unused, 0);
    b.build(root).unwrap()
}

/// A learned tree for `oracle`: random learner, random mode and size.
fn random_learned_tree(oracle: &DecisionTree, seed: u64) -> DecisionTree {
    let mut rng = rng_from(&[seed, 0x1EA2]);
    let space_size = oracle.space().input_space_size().unwrap() as u64;
    let q = rng.random_range(1..=space_size.min(80));
    let data = if rng.random_range(0..2u32) == 0 {
        gen_completely_random(oracle, q, seed ^ 1).unwrap()
    } else {
        gen_uniquely_random(oracle, q, seed ^ 2).unwrap()
    };
    let kind = LearnerKind::ALL[rng.random_range(0..LearnerKind::ALL.len() as u32) as usize];
    learn(kind, &data, seed ^ 3, &ExactConfig::default()).unwrap()
}

fn dataset_from_instances(oracle: &DecisionTree) -> Dataset {
    let mut d = Dataset::new(oracle.space_arc().clone());
    for inst in enumerate_all_consistent(oracle).unwrap() {
        d.insert(inst.input, inst.class).unwrap();
    }
    d
}

proptest! {
    #[test]
    fn every_input_triggers_exactly_one_rule(
        m in 2usize..=6,
        z in 2usize..=3,
        seed in any::<u64>(),
    ) {
        let space = Arc::new(FeatureSpace::uniform(m, z, 2).unwrap());
        let tree = random_general_tree(&space, seed);
        let rules = tree.rules();
        let mut triggered_total = 0u64;
        for x in all_inputs(&space) {
            let hits = rules.iter().filter(|r| triggers(&x, r)).count();
            prop_assert_eq!(hits, 1);
            triggered_total += 1;
            prop_assert_eq!(
                rules.iter().find(|r| triggers(&x, r)).unwrap().class(),
                tree.evaluate(&x)
            );
        }
        // Rules partition the input space.
        prop_assert_eq!(triggered_total as u128, space.input_space_size().unwrap());
    }

    #[test]
    fn parse_inverts_serialize(m in 1usize..=6, z in 2usize..=3, seed in any::<u64>()) {
        let space = Arc::new(FeatureSpace::uniform(m, z, 3).unwrap());
        let tree = random_general_tree(&space, seed);
        let text = serialize_tree(&tree);
        let parsed = parse_tree(&text, &space).unwrap();
        prop_assert_eq!(parsed, tree);
    }

    #[test]
    fn scan_equals_bruteforce_on_random_pairs(
        m in 2usize..=6,
        z in 2usize..=3,
        s1 in any::<u64>(),
        s2 in any::<u64>(),
    ) {
        let space = Arc::new(FeatureSpace::uniform(m, z, 2).unwrap());
        let t1 = random_general_tree(&space, s1);
        let t2 = random_general_tree(&space, s2);
        let scan = doe_scan(&t1, &t2).unwrap();
        let brute = doe_bruteforce(&t1, &t2).unwrap();
        prop_assert_eq!(scan.compatible_pairs, brute.compatible_pairs);
        prop_assert_eq!(scan.consistent_pairs, brute.consistent_pairs);
        // Pair counting is bounded by the rule-product and symmetric.
        let bound = (t1.rules().len() * t2.rules().len()) as u64;
        prop_assert!(scan.compatible_pairs <= bound);
        prop_assert!(scan.compatible_pairs >= 1);
        let flipped = doe_bruteforce(&t2, &t1).unwrap();
        prop_assert_eq!(flipped.doe(), brute.doe());
    }

    #[test]
    fn equivalence_agrees_with_full_enumeration(
        m in 2usize..=6,
        s1 in any::<u64>(),
        s2 in any::<u64>(),
    ) {
        let space = Arc::new(FeatureSpace::binary(m));
        let t1 = random_general_tree(&space, s1);
        let t2 = random_general_tree(&space, s2);
        let enumerated = all_inputs(&space).all(|x| t1.evaluate(&x) == t2.evaluate(&x));
        prop_assert_eq!(is_equivalent(&t1, &t2).unwrap(), enumerated);
        prop_assert_eq!(agreement_rate(&t1, &t2).unwrap() == 1.0, enumerated);
        prop_assert_eq!(doe_scan(&t1, &t2).unwrap().doe() == 1.0, enumerated);
        if let Some(w) = check_equivalence(&t1, &t2).unwrap() {
            prop_assert_ne!(t1.evaluate(&w), t2.evaluate(&w));
        }
    }

    #[test]
    fn generated_datasets_stay_consistent(
        m in 2u16..=8,
        seed in any::<u64>(),
    ) {
        let k = 1 + (seed % m as u64) as u16;
        let oracle = generate_oracle(&OracleConfig::binary(m, k, seed)).unwrap();
        let complete = gen_completely_random(&oracle, 40, seed ^ 5).unwrap();
        prop_assert_eq!(complete.size(), 40);
        prop_assert_eq!(precision(&oracle, &complete).unwrap(), 1.0);
        let space_size = oracle.space().input_space_size().unwrap() as u64;
        let q = 1 + seed % space_size;
        let unique = gen_uniquely_random(&oracle, q, seed ^ 6).unwrap();
        prop_assert_eq!(unique.num_distinct() as u64, q);
        prop_assert_eq!(unique.size(), q);
        prop_assert_eq!(precision(&oracle, &unique).unwrap(), 1.0);
    }
}

/// Both directions of the accepting-state characterization, on pairs that
/// mix plain random trees with real learner outputs, up to eight features.
#[test]
fn accepting_states_characterize_distinguishing_inputs() {
    for case in 0u64..40 {
        let m = 2 + (case % 7) as usize; // up to 8 features
        let space = Arc::new(FeatureSpace::binary(m));
        let t1 = random_general_tree(&space, derive_seed(&[case, 1]));
        let t2 = if case % 2 == 0 {
            random_general_tree(&space, derive_seed(&[case, 2]))
        } else {
            let k = 1 + (case % m as u64) as u16;
            let oracle = generate_oracle_in(&space, k, derive_seed(&[case, 3])).unwrap();
            random_learned_tree(&oracle, derive_seed(&[case, 4]))
        };
        let dist = build_distinguishing_tree(&t1, &t2).unwrap();
        let report = doe_scan(&t1, &t2).unwrap();
        assert_eq!(dist.leaves().count() as u64, report.compatible_pairs);

        for node in dist.accepting() {
            for x in all_inputs(&space) {
                if node.partial.consistent_with(&x) {
                    assert_ne!(t1.evaluate(&x), t2.evaluate(&x));
                }
            }
        }
        for x in all_inputs(&space) {
            if t1.evaluate(&x) != t2.evaluate(&x) {
                assert!(dist.accepting().any(|n| n.partial.consistent_with(&x)));
            }
        }
    }
}

/// Independent minimal-depth decision procedure: plain recursion over all
/// unused features, explicit used-set, no memoization.
fn brute_min_depth(data: &Dataset) -> usize {
    fn exists(
        space: &FeatureSpace,
        subset: &[(&Input, ClassId)],
        used: &mut Vec<bool>,
        depth: usize,
    ) -> bool {
        let first = subset[0].1;
        if subset.iter().all(|&(_, c)| c == first) {
            return true;
        }
        if depth == 0 {
            return false;
        }
        for f in space.feature_ids() {
            if used[f.index()] {
                continue;
            }
            let mut parts: Vec<Vec<(&Input, ClassId)>> =
                vec![Vec::new(); space.num_values(f)];
            for &(x, c) in subset {
                parts[x.value(f).index()].push((x, c));
            }
            used[f.index()] = true;
            let ok = parts
                .iter()
                .filter(|p| !p.is_empty())
                .all(|p| exists(space, p, used, depth - 1));
            used[f.index()] = false;
            if ok {
                return true;
            }
        }
        false
    }
    let space = data.space();
    let subset: Vec<(&Input, ClassId)> = data.iter().map(|(x, c, _)| (x, c)).collect();
    let mut used = vec![false; space.num_features()];
    (0..=space.num_features())
        .find(|&d| exists(space, &subset, &mut used, d))
        .expect("depth m always suffices")
}

/// Every labeled tree over the space up to `max_depth`, for the tiny-space
/// cross-validation of `brute_min_depth`.
fn enumerate_all_trees(space: &Arc<FeatureSpace>, max_depth: usize) -> Vec<DecisionTree> {
    #[derive(Clone)]
    enum Spec {
        Leaf(u16),
        Node(FeatureId, Vec<Spec>),
    }
    fn specs(space: &FeatureSpace, unused: &[FeatureId], depth: usize) -> Vec<Spec> {
        let mut out: Vec<Spec> =
            (0..space.num_classes() as u16).map(Spec::Leaf).collect();
        if depth == 0 {
            return out;
        }
        for (i, &f) in unused.iter().enumerate() {
            let mut rest = unused.to_vec();
            rest.remove(i);
            let child_specs = specs(space, &rest, depth - 1);
            let arity = space.num_values(f);
            let mut combo = vec![0usize; arity];
            loop {
                out.push(Spec::Node(
                    f,
                    combo.iter().map(|&c| child_specs[c].clone()).collect(),
                ));
                let mut pos = arity;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    combo[pos] += 1;
                    if combo[pos] < child_specs.len() {
                        break;
                    }
                    combo[pos] = 0;
                }
                if combo.iter().all(|&c| c == 0) {
                    break;
                }
            }
        }
        out
    }
    fn build(b: &mut TreeBuilder, spec: &Spec) -> NodeId {
        match spec {
            Spec::Leaf(c) => b.leaf(ClassId(*c)).unwrap(),
            Spec::Node(f, children) => {
                let ids = children.iter().map(|c| build(b, c)).collect();
                b.internal(*f, ids).unwrap()
            }
        }
    }
    let unused: Vec<FeatureId> = space.feature_ids().collect();
    specs(space, &unused, max_depth)
        .iter()
        .map(|spec| {
            let mut b = TreeBuilder::new(space.clone());
            let root = build(&mut b, spec);
            b.build(root).unwrap()
        })
        .collect()
}

#[test]
fn brute_min_depth_matches_full_tree_enumeration() {
    let space = Arc::new(FeatureSpace::binary(3));
    let all_trees = enumerate_all_trees(&space, 3);
    let inputs: Vec<Input> = all_inputs(&space).collect();
    let mut rng = rng_from(&[0xBEEF]);
    for _ in 0..20 {
        let mut d = Dataset::new(space.clone());
        for x in &inputs {
            if rng.random_range(0..4u32) > 0 {
                d.insert(x.clone(), ClassId(rng.random_range(0..2u32) as u16))
                    .unwrap();
            }
        }
        if d.is_empty() {
            continue;
        }
        let by_enumeration = all_trees
            .iter()
            .filter(|t| precision(t, &d).unwrap() == 1.0)
            .map(|t| t.depth())
            .min()
            .expect("some depth-3 tree is consistent");
        assert_eq!(brute_min_depth(&d), by_enumeration);
    }
}

#[test]
fn exact_learner_depth_is_minimal() {
    for case in 0u64..30 {
        let m = 2 + (case % 4) as u16; // up to 5 features
        let k = 1 + (case % m as u64) as u16;
        let oracle = generate_oracle(&OracleConfig::binary(m + 1, k, derive_seed(&[case, 7])))
            .unwrap();
        let space_size = oracle.space().input_space_size().unwrap() as u64;
        let q = 1 + derive_seed(&[case, 8]) % space_size;
        let data = gen_uniquely_random(&oracle, q, derive_seed(&[case, 9])).unwrap();
        let tree = learn_exact_depth(&data, &ExactConfig::default()).unwrap();
        assert_eq!(precision(&tree, &data).unwrap(), 1.0);
        assert_eq!(
            tree.depth(),
            brute_min_depth(&data),
            "case {case}: learner depth not minimal"
        );
    }
}

#[test]
fn exact_learner_recovers_oracle_from_complete_data() {
    let oracle = generate_oracle(&OracleConfig::binary(5, 3, 77)).unwrap();
    let data = dataset_from_instances(&oracle);
    let tree = learn_exact_depth(&data, &ExactConfig::default()).unwrap();
    let report = doe_scan(&oracle, &tree).unwrap();
    assert_eq!(report.doe(), 1.0);
    assert!(tree.depth() <= oracle.depth());
}

fn spearman_rho(values: &[f64]) -> f64 {
    let n = values.len();
    let rank = |v: f64| -> f64 {
        let less = values.iter().filter(|&&o| o < v).count();
        let equal = values.iter().filter(|&&o| o == v).count();
        less as f64 + (equal as f64 - 1.0) / 2.0
    };
    let ranks: Vec<f64> = values.iter().map(|&v| rank(v)).collect();
    let ideal: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let mean = (n as f64 - 1.0) / 2.0;
    let mut num = 0.0;
    let mut den_a = 0.0;
    let mut den_b = 0.0;
    for i in 0..n {
        num += (ranks[i] - mean) * (ideal[i] - mean);
        den_a += (ranks[i] - mean).powi(2);
        den_b += (ideal[i] - mean).powi(2);
    }
    num / (den_a * den_b).sqrt()
}

/// Mean DOE is nondecreasing in dataset size up to noise for a fixed
/// oracle: Spearman rank correlation of the mean curve above 0.9.
#[test]
fn id3_coverage_trend_is_monotone() {
    let oracle = generate_oracle(&OracleConfig::binary(8, 4, 2024)).unwrap();
    let sizes = [40u64, 80, 120, 160, 200, 240, 280, 320];
    let mut means = Vec::new();
    for (si, &size) in sizes.iter().enumerate() {
        let mut sum = 0.0;
        for trial in 0..100u64 {
            let data =
                gen_completely_random(&oracle, size, derive_seed(&[si as u64, trial])).unwrap();
            let tree = learn_id3(&data).unwrap();
            sum += doe_scan(&oracle, &tree).unwrap().doe();
        }
        means.push(sum / 100.0);
    }
    let rho = spearman_rho(&means);
    assert!(rho > 0.9, "Spearman rho = {rho}, means = {means:?}");
}

/// The partition property and the equivalence verdict, exercised at the
/// ten-feature scale with full 2^10 enumeration.
#[test]
fn ten_feature_trees_partition_and_compare_correctly() {
    let space = Arc::new(FeatureSpace::binary(10));
    let t1 = random_general_tree(&space, 0x5EED1);
    let rules = t1.rules();
    for x in all_inputs(&space) {
        assert_eq!(rules.iter().filter(|r| triggers(&x, r)).count(), 1);
    }
    let oracle = generate_oracle_in(&space, 5, 0x5EED2).unwrap();
    let data = gen_completely_random(&oracle, 900, 0x5EED3).unwrap();
    let learned = learn_id3(&data).unwrap();
    let enumerated = all_inputs(&space).all(|x| oracle.evaluate(&x) == learned.evaluate(&x));
    assert_eq!(is_equivalent(&oracle, &learned).unwrap(), enumerated);
    let scan = doe_scan(&oracle, &learned).unwrap();
    let brute = doe_bruteforce(&oracle, &learned).unwrap();
    assert_eq!(scan.compatible_pairs, brute.compatible_pairs);
    assert_eq!(scan.consistent_pairs, brute.consistent_pairs);
}

#[test]
fn perfect_binary_rules_cover_two_to_the_m_minus_k_inputs() {
    let oracle = generate_oracle(&OracleConfig::binary(6, 3, 5)).unwrap();
    let rules = oracle.rules();
    let mut counts = vec![0u64; rules.len()];
    for x in all_inputs(oracle.space()) {
        let idx = rules.iter().position(|r| triggers(&x, r)).unwrap();
        counts[idx] += 1;
    }
    assert!(counts.iter().all(|&c| c == 8)); // 2^(6-3)
}
