//! Batch front end for `ckg-core`: problem files, the solve, check, certify
//! and verify workflows, and their output bundles.

// `!(x > 0.0)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod expr;
pub mod problem_file;

pub use error::{exit, CliError, CliResult};
pub use problem_file::{load_problem, parse_problem_file, ProblemFile};
