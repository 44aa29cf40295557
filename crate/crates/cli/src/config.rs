//! Experiment configuration: what to build and which analyses to run.

use std::path::Path;

use rough_ideal::analysis::{Grid, Settings, Variant, DEFAULT_EPSILONS};
use rough_ideal::index_sets::DEFAULT_WINDOW_CAP;
use rough_ideal::sequences::DEFAULT_WINDOW;
use rough_ideal::{Ideal, Outcome, PiecewiseSequence, SetDescriptor, Space};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable that lowers the window cap.
pub const WINDOW_CAP_ENV: &str = "ROUGH_IDEAL_WINDOW_CAP";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("config error at `{field}` (line {line}, column {column}): {message}")]
    Parse {
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config at `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    pub(crate) fn invalid(field: impl Into<String>, message: impl ToString) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Tolerance for numerical axiom checks.
    #[serde(default = "default_axiom_tol")]
    pub axiom: f64,
}

fn default_axiom_tol() -> f64 {
    rough_ideal::spaces::DEFAULT_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            axiom: default_axiom_tol(),
        }
    }
}

/// What an entry is expected to report. A matching result counts as a pass
/// for the exit code, which lets negative controls live in a passing config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Holds,
    Fails,
    Unknown,
    /// The analysis refuses to run (unmet precondition or hypothesis).
    Error,
}

impl Expectation {
    pub fn matches(self, outcome: Option<Outcome>) -> bool {
        matches!(
            (self, outcome),
            (Expectation::Holds, Some(Outcome::Holds))
                | (Expectation::Fails, Some(Outcome::Fails))
                | (Expectation::Unknown, Some(Outcome::Unknown))
                | (Expectation::Error, None)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "op",
    rename_all = "camelCase",
    rename_all_fields = "camelCase",
    deny_unknown_fields
)]
pub enum Analysis {
    Axioms {
        sample: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
    },
    RoughIdealConverges {
        x: f64,
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ideal: Option<Ideal>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
    },
    RoughConverges {
        x: f64,
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
    },
    IdealConverges {
        x: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ideal: Option<Ideal>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
    },
    LimitSet {
        grid: Grid,
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ideal: Option<Ideal>,
    },
    DiameterBound {
        grid: Grid,
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ideal: Option<Ideal>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
    },
    BallInclusion {
        x: f64,
        grid: Grid,
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ideal: Option<Ideal>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
    },
    Closedness {
        grid: Grid,
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ideal: Option<Ideal>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
    },
    Boundedness {
        u: f64,
        bounds: Vec<f64>,
        roughness: Vec<f64>,
        grid: Grid,
        #[serde(default = "default_eps0")]
        eps0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ideal: Option<Ideal>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
    },
    SubsequenceInclusion {
        subindex: SetDescriptor,
        grid: Grid,
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ideal: Option<Ideal>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
    },
    Perturbation {
        other: PiecewiseSequence,
        x: f64,
        r: f64,
        variant: Variant,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ideal: Option<Ideal>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
    },
    ClusterPoints {
        grid: Grid,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ideal: Option<Ideal>,
    },
    ClusterBall {
        c: f64,
        grid: Grid,
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ideal: Option<Ideal>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Expectation>,
    },
}

fn default_eps0() -> f64 {
    0.5
}

impl Analysis {
    pub fn op_name(&self) -> &'static str {
        match self {
            Analysis::Axioms { .. } => "axioms",
            Analysis::RoughIdealConverges { .. } => "roughIdealConverges",
            Analysis::RoughConverges { .. } => "roughConverges",
            Analysis::IdealConverges { .. } => "idealConverges",
            Analysis::LimitSet { .. } => "limitSet",
            Analysis::DiameterBound { .. } => "diameterBound",
            Analysis::BallInclusion { .. } => "ballInclusion",
            Analysis::Closedness { .. } => "closedness",
            Analysis::Boundedness { .. } => "boundedness",
            Analysis::SubsequenceInclusion { .. } => "subsequenceInclusion",
            Analysis::Perturbation { .. } => "perturbation",
            Analysis::ClusterPoints { .. } => "clusterPoints",
            Analysis::ClusterBall { .. } => "clusterBall",
        }
    }

    pub fn expect(&self) -> Option<Expectation> {
        match self {
            Analysis::LimitSet { .. } | Analysis::ClusterPoints { .. } => None,
            Analysis::Axioms { expect, .. }
            | Analysis::RoughIdealConverges { expect, .. }
            | Analysis::RoughConverges { expect, .. }
            | Analysis::IdealConverges { expect, .. }
            | Analysis::DiameterBound { expect, .. }
            | Analysis::BallInclusion { expect, .. }
            | Analysis::Closedness { expect, .. }
            | Analysis::Boundedness { expect, .. }
            | Analysis::SubsequenceInclusion { expect, .. }
            | Analysis::Perturbation { expect, .. }
            | Analysis::ClusterBall { expect, .. } => *expect,
        }
    }

    fn ideal_override(&self) -> Option<Ideal> {
        match self {
            Analysis::Axioms { .. } | Analysis::RoughConverges { .. } => None,
            Analysis::RoughIdealConverges { ideal, .. }
            | Analysis::IdealConverges { ideal, .. }
            | Analysis::LimitSet { ideal, .. }
            | Analysis::DiameterBound { ideal, .. }
            | Analysis::BallInclusion { ideal, .. }
            | Analysis::Closedness { ideal, .. }
            | Analysis::Boundedness { ideal, .. }
            | Analysis::SubsequenceInclusion { ideal, .. }
            | Analysis::Perturbation { ideal, .. }
            | Analysis::ClusterPoints { ideal, .. }
            | Analysis::ClusterBall { ideal, .. } => *ideal,
        }
    }

    /// The ideal this analysis runs under, given the config-level default.
    pub fn ideal_or(&self, default: Ideal) -> Ideal {
        self.ideal_override().unwrap_or(default)
    }

    fn grid(&self) -> Option<&Grid> {
        match self {
            Analysis::LimitSet { grid, .. }
            | Analysis::DiameterBound { grid, .. }
            | Analysis::BallInclusion { grid, .. }
            | Analysis::Closedness { grid, .. }
            | Analysis::Boundedness { grid, .. }
            | Analysis::SubsequenceInclusion { grid, .. }
            | Analysis::ClusterPoints { grid, .. }
            | Analysis::ClusterBall { grid, .. } => Some(grid),
            _ => None,
        }
    }

    fn roughness(&self) -> Vec<f64> {
        match self {
            Analysis::RoughIdealConverges { r, .. }
            | Analysis::RoughConverges { r, .. }
            | Analysis::LimitSet { r, .. }
            | Analysis::DiameterBound { r, .. }
            | Analysis::BallInclusion { r, .. }
            | Analysis::Closedness { r, .. }
            | Analysis::SubsequenceInclusion { r, .. }
            | Analysis::Perturbation { r, .. }
            | Analysis::ClusterBall { r, .. } => vec![*r],
            Analysis::Boundedness { roughness, .. } => roughness.clone(),
            _ => Vec::new(),
        }
    }

    /// Points that must lie in the space's carrier.
    fn points(&self) -> Vec<(&'static str, f64)> {
        match self {
            Analysis::Axioms { sample, .. } => sample.iter().map(|&v| ("sample", v)).collect(),
            Analysis::RoughIdealConverges { x, .. }
            | Analysis::RoughConverges { x, .. }
            | Analysis::IdealConverges { x, .. }
            | Analysis::BallInclusion { x, .. }
            | Analysis::Perturbation { x, .. } => vec![("x", *x)],
            Analysis::Boundedness { u, .. } => vec![("u", *u)],
            Analysis::ClusterBall { c, .. } => vec![("c", *c)],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub space: Space,
    pub ideal: Ideal,
    pub sequence: PiecewiseSequence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub analyses: Vec<Analysis>,
}

/// Command-line overrides applied on top of a parsed config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub window: Option<u64>,
    pub epsilons: Option<Vec<f64>>,
}

impl ExperimentConfig {
    /// Parses JSON, reporting the failing field path with line and column.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            ConfigError::Parse {
                field,
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(w) = overrides.window {
            self.window = Some(w);
        }
        if let Some(e) = &overrides.epsilons {
            self.epsilons = Some(e.clone());
        }
    }

    pub fn settings(&self) -> Settings {
        Settings {
            epsilons: self.epsilons.clone().unwrap_or_else(|| DEFAULT_EPSILONS.to_vec()),
            window: self.window.unwrap_or(DEFAULT_WINDOW),
        }
    }

    /// Checks everything that can be checked before running: window against
    /// `cap`, epsilons, grids, roughness degrees and carrier membership.
    pub fn validate(&self, cap: u64) -> Result<(), ConfigError> {
        let settings = self.settings();
        if settings.window == 0 || settings.window > cap {
            return Err(ConfigError::invalid(
                "window",
                format!("window {} must be in [1, {cap}]", settings.window),
            ));
        }
        settings.validate().map_err(|e| ConfigError::invalid("epsilons", e))?;
        self.sequence
            .check_carrier(&self.space)
            .map_err(|e| ConfigError::invalid("sequence", e))?;
        if !(self.tolerances.axiom >= 0.0) {
            return Err(ConfigError::invalid("tolerances.axiom", "must be >= 0"));
        }
        for (i, a) in self.analyses.iter().enumerate() {
            let at = |f: &str| format!("analyses[{i}].{f}");
            if let Some(g) = a.grid() {
                g.validate().map_err(|e| ConfigError::invalid(at("grid"), e))?;
                for p in g.points() {
                    self.space.point(p).map_err(|e| ConfigError::invalid(at("grid"), e))?;
                }
            }
            for r in a.roughness() {
                if !(r.is_finite() && r >= 0.0) {
                    return Err(ConfigError::invalid(at("r"), format!("roughness {r} must be >= 0")));
                }
            }
            for (name, v) in a.points() {
                self.space.point(v).map_err(|e| ConfigError::invalid(at(name), e))?;
            }
            match a {
                Analysis::Boundedness { bounds, eps0, .. } => {
                    if bounds.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
                        return Err(ConfigError::invalid(at("bounds"), "bounds must be > 0"));
                    }
                    if !(eps0.is_finite() && *eps0 > 0.0) {
                        return Err(ConfigError::invalid(at("eps0"), "must be > 0"));
                    }
                }
                Analysis::Perturbation { other, .. } => {
                    other
                        .check_carrier(&self.space)
                        .map_err(|e| ConfigError::invalid(at("other"), e))?;
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// The window cap: [`DEFAULT_WINDOW_CAP`], or a smaller value from
/// [`WINDOW_CAP_ENV`].
pub fn window_cap_from(env_value: Option<&str>) -> Result<u64, ConfigError> {
    match env_value {
        None => Ok(DEFAULT_WINDOW_CAP),
        Some(raw) => {
            let cap: u64 = raw
                .trim()
                .parse()
                .map_err(|_| ConfigError::invalid(WINDOW_CAP_ENV, format!("`{raw}` is not an integer")))?;
            if cap == 0 || cap > DEFAULT_WINDOW_CAP {
                return Err(ConfigError::invalid(
                    WINDOW_CAP_ENV,
                    format!("cap must be in [1, {DEFAULT_WINDOW_CAP}], got {cap}"),
                ));
            }
            Ok(cap)
        }
    }
}

pub fn window_cap() -> Result<u64, ConfigError> {
    window_cap_from(std::env::var(WINDOW_CAP_ENV).ok().as_deref())
}

/// Parses `e1,e2,...` as given to `--epsilons`.
pub fn parse_epsilons(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            let v: f64 = t.trim().parse().map_err(|_| format!("`{t}` is not a number"))?;
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(format!("epsilon {v} must be positive"))
            }
        })
        .collect()
}
