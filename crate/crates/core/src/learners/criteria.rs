//! Splitting criteria: entropy, Gini impurity, split information, and
//! majority voting. All logarithms are base 2 and `0*log2(0) = 0`.

use crate::space::ClassId;

use super::LearnError;

fn log2(x: f64) -> f64 {
    libm::log2(x)
}

/// Shannon entropy of a class histogram: `-sum p_c * log2(p_c)`.
pub fn entropy(class_counts: &[u64]) -> Result<f64, LearnError> {
    let total: u64 = class_counts.iter().sum();
    if total == 0 {
        return Err(LearnError::NoClassCounts);
    }
    let total = total as f64;
    let mut h = 0.0;
    for &c in class_counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * log2(p);
        }
    }
    Ok(h)
}

/// Gini impurity of a class histogram: `1 - sum p_c^2`.
pub fn gini_impurity(class_counts: &[u64]) -> Result<f64, LearnError> {
    let total: u64 = class_counts.iter().sum();
    if total == 0 {
        return Err(LearnError::NoClassCounts);
    }
    let total = total as f64;
    let mut sum_sq = 0.0;
    for &c in class_counts {
        let p = c as f64 / total;
        sum_sq += p * p;
    }
    Ok(1.0 - sum_sq)
}

/// Split information of a partition: the entropy of the part sizes,
/// `-sum (|part|/total) * log2(|part|/total)`. Empty parts contribute 0;
/// the result is 0 exactly when one part holds everything.
pub fn split_info(part_sizes: &[u64], total: u64) -> f64 {
    debug_assert_eq!(part_sizes.iter().sum::<u64>(), total);
    let total = total as f64;
    let mut si = 0.0;
    for &s in part_sizes {
        if s > 0 {
            let p = s as f64 / total;
            si -= p * log2(p);
        }
    }
    si
}

/// Most frequent class, ties broken by lowest class id.
pub fn majority_class(class_counts: &[u64]) -> Result<ClassId, LearnError> {
    let mut best: Option<(u64, usize)> = None;
    for (i, &c) in class_counts.iter().enumerate() {
        if best.is_none_or(|(bc, _)| c > bc) {
            best = Some((c, i));
        }
    }
    match best {
        Some((count, i)) if count > 0 => Ok(ClassId(i as u16)),
        _ => Err(LearnError::NoClassCounts),
    }
}
