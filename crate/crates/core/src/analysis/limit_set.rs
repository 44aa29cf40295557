use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ideals::Ideal;
use crate::sequences::{Deviation, PiecewiseSequence};
use crate::spaces::Space;
use crate::verdict::{Outcome, Verdict};

use super::{check_roughness, rough_ideal_converges, AnalysisError, Settings};

/// A uniform 1-D grid `lo, lo + step, ..., <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

/// Grids larger than this are refused.
const MAX_GRID_POINTS: usize = 1_000_000;

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self, AnalysisError> {
        let g = Grid { lo, hi, step };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.step.is_finite()) {
            return Err(AnalysisError::BadGrid("bounds and step must be finite".into()));
        }
        if !(self.step > 0.0) {
            return Err(AnalysisError::BadGrid(format!("step must be > 0, got {}", self.step)));
        }
        if self.hi < self.lo {
            return Err(AnalysisError::BadGrid("hi is below lo".into()));
        }
        if (self.hi - self.lo) / self.step >= MAX_GRID_POINTS as f64 {
            return Err(AnalysisError::BadGrid("too many grid points".into()));
        }
        Ok(())
    }

    /// Grid points, snapped to multiples of `1e-12` so that decimal steps
    /// land on their intended values.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| snap(self.lo + i as f64 * self.step)).collect()
    }
}

fn snap(v: f64) -> f64 {
    let s = (v * 1e12).round() / 1e12;
    if s == 0.0 {
        0.0
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Accepted,
    Rejected,
    Unknown,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Accepted => "accepted",
            Classification::Rejected => "rejected",
            Classification::Unknown => "unknown",
        }
    }
}

impl From<Outcome> for Classification {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Holds => Classification::Accepted,
            Outcome::Fails => Classification::Rejected,
            Outcome::Unknown => Classification::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Classified {
    pub candidate: f64,
    pub classification: Classification,
    /// Upper density bound of the master set `{n : dev > r}`, when computed.
    pub master_density_upper: Option<f64>,
    pub certificate_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EstimateKind {
    RoughLimit,
    Cluster,
}

/// A grid classification of the rough limit set (or of the cluster set).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LimitSetEstimate {
    pub kind: EstimateKind,
    pub r: f64,
    pub epsilons: Vec<f64>,
    pub entries: Vec<Classified>,
}

impl LimitSetEstimate {
    /// Assembles an estimate from explicit classifications.
    pub fn from_classes(
        kind: EstimateKind,
        r: f64,
        epsilons: Vec<f64>,
        classes: impl IntoIterator<Item = (f64, Classification)>,
    ) -> Self {
        let entries = classes
            .into_iter()
            .map(|(candidate, classification)| Classified {
                candidate,
                classification,
                master_density_upper: None,
                certificate_id: String::new(),
            })
            .collect();
        LimitSetEstimate {
            kind,
            r,
            epsilons,
            entries,
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.candidate).collect()
    }

    fn with(&self, c: Classification) -> Vec<f64> {
        self.entries
            .iter()
            .filter(|e| e.classification == c)
            .map(|e| e.candidate)
            .collect()
    }

    pub fn accepted(&self) -> Vec<f64> {
        self.with(Classification::Accepted)
    }

    pub fn rejected(&self) -> Vec<f64> {
        self.with(Classification::Rejected)
    }

    pub fn unknown(&self) -> Vec<f64> {
        self.with(Classification::Unknown)
    }

    pub fn classification_of(&self, candidate: f64) -> Option<Classification> {
        self.entries
            .iter()
            .find(|e| e.candidate == candidate)
            .map(|e| e.classification)
    }
}

/// Classifies every grid point by [`rough_ideal_converges`]. Candidates are
/// evaluated in parallel; the result keeps grid order.
pub fn estimate_rough_limit_set(
    seq: &PiecewiseSequence,
    space: &Space,
    grid: &[f64],
    r: f64,
    ideal: Ideal,
    settings: &Settings,
) -> Result<LimitSetEstimate, AnalysisError> {
    check_roughness(r)?;
    settings.validate()?;
    let points = grid.iter().map(|&g| space.point(g)).collect::<Result<Vec<_>, _>>()?;
    let entries = points
        .par_iter()
        .map(|&y| -> Result<Classified, AnalysisError> {
            let v: Verdict = rough_ideal_converges(seq, space, y, r, ideal, settings)?;
            let master = seq.level_set(space, Deviation::FromTarget(y.value()), r, true)?;
            Ok(Classified {
                candidate: y.value(),
                classification: v.outcome.into(),
                master_density_upper: Some(master.set.density_bounds().upper_f64()),
                certificate_id: v.id(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LimitSetEstimate {
        kind: EstimateKind::RoughLimit,
        r,
        epsilons: settings.epsilons.clone(),
        entries,
    })
}
