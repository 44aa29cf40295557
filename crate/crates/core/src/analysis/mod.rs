//! Deciders for convergence notions and verifiers for theorem instances.
//!
//! The central question is whether every violation set
//! `A(eps) = {n : |p(x_n, x) - p(x, x)| >= r + eps}` lies in an ideal. A
//! `Holds` needs one certified set covering all `eps` at once; a `Fails`
//! needs one `eps` whose set is certified outside the ideal. Anything else is
//! `Unknown`, reported with window counts.

mod cluster;
mod convergence;
mod limit_set;
mod theorems;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index_sets::IndexSetError;
use crate::sequences::SequenceError;
use crate::spaces::SpaceError;

pub use cluster::{check_cluster_ball, cluster_points};
pub use convergence::{ideal_converges, rough_converges, rough_ideal_converges};
pub use limit_set::{estimate_rough_limit_set, Classification, Classified, EstimateKind, Grid, LimitSetEstimate};
pub use theorems::{
    check_ball_inclusion, check_boundedness_equivalence, check_closedness, check_diameter_bound,
    check_perturbation_transfer, check_subsequence_inclusion, is_ideal_bounded, Variant, BALL_SELF_DISTANCE_TOL,
    PERTURBATION_INDEX, PERTURBATION_LIMIT_TOL, PERTURBATION_WINDOW_TOL,
};

/// `{1, 1e-1, ..., 1e-6}`.
pub const DEFAULT_EPSILONS: [f64; 7] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("roughness degree must be a finite number >= 0, got {0}")]
    NegativeRoughness(f64),
    #[error("epsilon schedule must be non-empty, positive and finite")]
    BadEpsilons,
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("precondition not established: {0}")]
    Precondition(String),
    #[error("hypothesis not verified: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    IndexSet(#[from] IndexSetError),
}

/// Knobs shared by all deciders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Settings {
    pub epsilons: Vec<f64>,
    /// Window for pointwise evidence attached to `Unknown` verdicts.
    pub window: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            epsilons: DEFAULT_EPSILONS.to_vec(),
            window: crate::sequences::DEFAULT_WINDOW,
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(AnalysisError::BadEpsilons);
        }
        if self.window > crate::index_sets::DEFAULT_WINDOW_CAP {
            return Err(SequenceError::WindowCap {
                n: self.window,
                cap: crate::index_sets::DEFAULT_WINDOW_CAP,
            }
            .into());
        }
        Ok(())
    }
}

fn check_roughness(r: f64) -> Result<(), AnalysisError> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(AnalysisError::NegativeRoughness(r))
    }
}
