//! Config-driven runner for rough ideal convergence analyses.
//!
//! A config names a space, an ideal, a piecewise sequence and a list of
//! analyses; [`runner::run`] evaluates them and produces a [`report::Report`]
//! plus optional CSV plot data.

// `!(x >= 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod grid_csv;
pub mod report;
pub mod runner;

pub use config::{ConfigError, ExperimentConfig, Overrides};
pub use report::Report;
pub use runner::{execute, run, RunOptions};
