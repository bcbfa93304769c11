//! File formats, experiment harness, and CLI for benchmarking
//! decision-tree learners against randomly generated oracle trees.
//!
//! The algorithms live in [`dtbench_core`]; this crate adds everything that
//! needs the filesystem or a clock: tree/space/dataset files, the seeded
//! experiment runner with its stable results CSV, and the `dtbench`
//! binary.

pub mod cli;
pub mod formats;
pub mod harness;
