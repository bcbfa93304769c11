//! On-disk formats: feature-space files, tree files, and dataset CSV.
//!
//! A feature-space file lists the classes on the first line and one
//! feature per following line:
//!
//! ```text
//! classes: c0,c1
//! feature f0: false,true
//! feature f1: false,true
//! ```
//!
//! A tree file holds the s-expression tree text, optionally preceded by a
//! `#space <path>` header naming its feature-space file (resolved relative
//! to the tree file). A dataset CSV has the feature names in id order plus
//! `class` as its header, one row per instance occurrence (redundancy is
//! repeated rows), and value names as cells.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use dtbench_core::dataset::{Dataset, DatasetError};
use dtbench_core::input::Input;
use dtbench_core::space::{FeatureSpace, SpaceError};
use dtbench_core::text::{parse_tree, serialize_tree, ParseError};
use dtbench_core::tree::DecisionTree;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Tree {
        path: PathBuf,
        source: ParseError,
    },
    #[error("{0}")]
    Space(#[from] SpaceError),
    #[error("{0}")]
    Dataset(#[from] DatasetError),
    #[error("{path}: no #space header; pass the feature-space file explicitly")]
    NoSpace { path: PathBuf },
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), FormatError> {
    fs::write(path, contents).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn malformed(path: &Path, line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

// ---------------------------------------------------------------------
// Feature-space files

pub fn format_space(space: &FeatureSpace) -> String {
    let mut out = String::from("classes: ");
    let classes: Vec<&str> = space.class_ids().map(|c| space.class_name(c)).collect();
    out.push_str(&classes.join(","));
    out.push('\n');
    for f in space.feature_ids() {
        let values: Vec<&str> = space.value_ids(f).map(|v| space.value_name(f, v)).collect();
        out.push_str(&format!(
            "feature {}: {}\n",
            space.feature_name(f),
            values.join(",")
        ));
    }
    out
}

pub fn parse_space(text: &str, path: &Path) -> Result<FeatureSpace, FormatError> {
    let mut classes: Option<Vec<String>> = None;
    let mut features = Vec::new();
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = i + 1;
        if let Some(rest) = line.strip_prefix("classes:") {
            if classes.is_some() {
                return Err(malformed(path, lineno, "duplicate classes line"));
            }
            classes = Some(split_names(rest));
        } else if let Some(rest) = line.strip_prefix("feature ") {
            let Some((name, vals)) = rest.split_once(':') else {
                return Err(malformed(path, lineno, "expected `feature <name>: v0,v1,...`"));
            };
            features.push(name.trim().to_string());
            values.push(split_names(vals));
        } else {
            return Err(malformed(
                path,
                lineno,
                format!("unrecognized line {line:?}"),
            ));
        }
    }
    let Some(classes) = classes else {
        return Err(malformed(path, 1, "missing `classes:` line"));
    };
    Ok(FeatureSpace::new(features, values, classes)?)
}

fn split_names(s: &str) -> Vec<String> {
    s.split(',')
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect()
}

pub fn load_space(path: &Path) -> Result<Arc<FeatureSpace>, FormatError> {
    Ok(Arc::new(parse_space(&read(path)?, path)?))
}

pub fn save_space(space: &FeatureSpace, path: &Path) -> Result<(), FormatError> {
    write(path, &format_space(space))
}

// ---------------------------------------------------------------------
// Tree files

/// Writes the tree, preceded by a `#space` header when `space_ref` names a
/// sidecar feature-space file.
pub fn save_tree(
    tree: &DecisionTree,
    path: &Path,
    space_ref: Option<&str>,
) -> Result<(), FormatError> {
    let mut out = String::new();
    if let Some(r) = space_ref {
        out.push_str("#space ");
        out.push_str(r);
        out.push('\n');
    }
    out.push_str(&serialize_tree(tree));
    out.push('\n');
    write(path, &out)
}

/// Writes `tree` to `path` plus a `<path with .space extension>` sidecar
/// holding its feature space, referenced from the tree file's header.
pub fn save_tree_with_space(tree: &DecisionTree, path: &Path) -> Result<(), FormatError> {
    let space_path = path.with_extension("space");
    save_space(tree.space(), &space_path)?;
    let reference = space_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .expect("output path has a file name");
    save_tree(tree, path, Some(&reference))
}

fn space_header(text: &str) -> Option<&str> {
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        return line.strip_prefix("#space").map(str::trim);
    }
    None
}

/// Loads a tree file. The space comes from `space_override` when given,
/// otherwise from the file's `#space` header (resolved relative to the
/// tree file's directory).
pub fn load_tree(
    path: &Path,
    space_override: Option<&Arc<FeatureSpace>>,
) -> Result<(DecisionTree, Arc<FeatureSpace>), FormatError> {
    let text = read(path)?;
    let space = match space_override {
        Some(s) => s.clone(),
        None => {
            let Some(reference) = space_header(&text) else {
                return Err(FormatError::NoSpace {
                    path: path.to_path_buf(),
                });
            };
            let base = path.parent().unwrap_or(Path::new("."));
            load_space(&base.join(reference))?
        }
    };
    let tree = parse_tree(&text, &space).map_err(|source| FormatError::Tree {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((tree, space))
}

// ---------------------------------------------------------------------
// Dataset CSV

pub fn format_dataset_csv(data: &Dataset) -> String {
    let space = data.space();
    let mut header: Vec<&str> = space.feature_ids().map(|f| space.feature_name(f)).collect();
    header.push("class");
    let mut out = header.join(",");
    out.push('\n');
    for (x, c, k) in data.iter() {
        let mut row: Vec<&str> = space
            .feature_ids()
            .map(|f| space.value_name(f, x.value(f)))
            .collect();
        row.push(space.class_name(c));
        let row = row.join(",");
        for _ in 0..k {
            out.push_str(&row);
            out.push('\n');
        }
    }
    out
}

pub fn parse_dataset_csv(
    text: &str,
    space: &Arc<FeatureSpace>,
    path: &Path,
) -> Result<Dataset, FormatError> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(malformed(path, 1, "empty file"));
    };
    let mut expected: Vec<&str> = space.feature_ids().map(|f| space.feature_name(f)).collect();
    expected.push("class");
    let got: Vec<&str> = header.split(',').map(str::trim).collect();
    if got != expected {
        return Err(malformed(
            path,
            1,
            format!("header {got:?} does not match the feature space {expected:?}"),
        ));
    }
    let m = space.num_features();
    let mut data = Dataset::new(space.clone());
    for (i, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != m + 1 {
            return Err(malformed(
                path,
                lineno,
                format!("expected {} cells, found {}", m + 1, cells.len()),
            ));
        }
        let mut values = Vec::with_capacity(m);
        for (f, cell) in space.feature_ids().zip(&cells) {
            let Some(v) = space.value_by_name(f, cell) else {
                return Err(malformed(
                    path,
                    lineno,
                    format!("unknown value {cell:?} for feature {:?}", space.feature_name(f)),
                ));
            };
            values.push(v);
        }
        let Some(class) = space.class_by_name(cells[m]) else {
            return Err(malformed(
                path,
                lineno,
                format!("unknown class {:?}", cells[m]),
            ));
        };
        let input = Input::new(space, values).expect("values were resolved against the space");
        data.insert(input, class).map_err(|e| {
            malformed(path, lineno, format!("{e}"))
        })?;
    }
    Ok(data)
}

pub fn load_dataset(path: &Path, space: &Arc<FeatureSpace>) -> Result<Dataset, FormatError> {
    parse_dataset_csv(&read(path)?, space, path)
}

pub fn save_dataset(data: &Dataset, path: &Path) -> Result<(), FormatError> {
    write(path, &format_dataset_csv(data))
}

/// Derives a feature space from a dataset CSV alone: features from the
/// header, value and class names from the observed cells, each sorted by
/// name. Fails when a feature shows fewer than two values, so prefer an
/// explicit space file when one exists.
pub fn infer_space_from_csv(text: &str, path: &Path) -> Result<Arc<FeatureSpace>, FormatError> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(malformed(path, 1, "empty file"));
    };
    let mut columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.last() != Some(&"class") {
        return Err(malformed(path, 1, "last header column must be `class`"));
    }
    columns.pop();
    let features: Vec<String> = columns.iter().map(|c| c.to_string()).collect();
    let mut value_sets: Vec<std::collections::BTreeSet<String>> =
        vec![Default::default(); features.len()];
    let mut classes: std::collections::BTreeSet<String> = Default::default();
    for (i, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != features.len() + 1 {
            return Err(malformed(
                path,
                i + 1,
                format!("expected {} cells, found {}", features.len() + 1, cells.len()),
            ));
        }
        for (set, cell) in value_sets.iter_mut().zip(&cells) {
            set.insert(cell.to_string());
        }
        classes.insert(cells[features.len()].to_string());
    }
    let space = FeatureSpace::new(
        features,
        value_sets
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect(),
        classes.into_iter().collect(),
    )?;
    Ok(Arc::new(space))
}
