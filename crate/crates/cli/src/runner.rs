use std::path::PathBuf;
use std::time::Instant;

use rough_ideal::analysis::{
    check_ball_inclusion, check_boundedness_equivalence, check_closedness, check_cluster_ball, check_diameter_bound,
    check_perturbation_transfer, check_subsequence_inclusion, cluster_points, estimate_rough_limit_set,
    ideal_converges, rough_converges, rough_ideal_converges, AnalysisError, LimitSetEstimate, Settings,
};
use rough_ideal::Verdict;

use crate::config::{Analysis, ConfigError, ExperimentConfig, Overrides};
use crate::report::{Entry, EntryError, Environment, Report, Status, Summary, Timing};

/// Exit code for configuration and validation errors.
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub overrides: Overrides,
    pub timing: bool,
}

#[derive(Default)]
struct Produced {
    verdict: Option<Verdict>,
    estimate: Option<LimitSetEstimate>,
}

impl Produced {
    fn verdict(v: Verdict) -> Self {
        Produced {
            verdict: Some(v),
            estimate: None,
        }
    }
}

fn run_one(cfg: &ExperimentConfig, a: &Analysis, settings: &Settings) -> Result<Produced, AnalysisError> {
    let space = &cfg.space;
    let seq = &cfg.sequence;
    let ideal = a.ideal_or(cfg.ideal);
    let pt = |v: f64| space.point(v).map_err(AnalysisError::from);
    Ok(match a {
        Analysis::Axioms { sample, .. } => {
            let pts = sample.iter().map(|&v| pt(v)).collect::<Result<Vec<_>, _>>()?;
            Produced::verdict(space.check_axioms(&pts, cfg.tolerances.axiom)?)
        }
        Analysis::RoughIdealConverges { x, r, .. } => {
            Produced::verdict(rough_ideal_converges(seq, space, pt(*x)?, *r, ideal, settings)?)
        }
        Analysis::RoughConverges { x, r, .. } => Produced::verdict(rough_converges(seq, space, pt(*x)?, *r, settings)?),
        Analysis::IdealConverges { x, .. } => Produced::verdict(ideal_converges(seq, space, pt(*x)?, ideal, settings)?),
        Analysis::LimitSet { grid, r, .. } => Produced {
            verdict: None,
            estimate: Some(estimate_rough_limit_set(
                seq,
                space,
                &grid.points(),
                *r,
                ideal,
                settings,
            )?),
        },
        Analysis::DiameterBound { grid, r, .. } => {
            let est = estimate_rough_limit_set(seq, space, &grid.points(), *r, ideal, settings)?;
            Produced {
                verdict: Some(check_diameter_bound(&est, space)?),
                estimate: Some(est),
            }
        }
        Analysis::BallInclusion { x, grid, r, .. } => Produced::verdict(check_ball_inclusion(
            seq,
            space,
            pt(*x)?,
            &grid.points(),
            *r,
            ideal,
            settings,
        )?),
        Analysis::Closedness { grid, r, .. } => {
            let est = estimate_rough_limit_set(seq, space, &grid.points(), *r, ideal, settings)?;
            Produced {
                verdict: Some(check_closedness(&est, grid.step)?),
                estimate: Some(est),
            }
        }
        Analysis::Boundedness {
            u,
            bounds,
            roughness,
            grid,
            eps0,
            ..
        } => Produced::verdict(check_boundedness_equivalence(
            seq,
            space,
            pt(*u)?,
            bounds,
            roughness,
            &grid.points(),
            ideal,
            *eps0,
            settings,
        )?),
        Analysis::SubsequenceInclusion { subindex, grid, r, .. } => Produced::verdict(check_subsequence_inclusion(
            seq,
            space,
            subindex,
            &grid.points(),
            *r,
            ideal,
            settings,
        )?),
        Analysis::Perturbation {
            other, x, r, variant, ..
        } => Produced::verdict(check_perturbation_transfer(
            seq,
            other,
            space,
            pt(*x)?,
            *r,
            ideal,
            *variant,
            settings,
        )?),
        Analysis::ClusterPoints { grid, .. } => Produced {
            verdict: None,
            estimate: Some(cluster_points(seq, space, &grid.points(), ideal, settings)?),
        },
        Analysis::ClusterBall { c, grid, r, .. } => {
            let est = estimate_rough_limit_set(seq, space, &grid.points(), *r, ideal, settings)?;
            Produced {
                verdict: Some(check_cluster_ball(seq, space, pt(*c)?, &est, ideal, settings)?),
                estimate: Some(est),
            }
        }
    })
}

/// Runs every analysis of a validated config. Unmet preconditions and
/// hypotheses become entry errors; anything else is a config error.
pub fn run_config(cfg: &ExperimentConfig, cap: u64) -> Result<(Report, Vec<f64>), ConfigError> {
    cfg.validate(cap)?;
    let settings = cfg.settings();
    let mut entries = Vec::with_capacity(cfg.analyses.len());
    let mut times = Vec::with_capacity(cfg.analyses.len());
    for (index, a) in cfg.analyses.iter().enumerate() {
        let start = Instant::now();
        let result = run_one(cfg, a, &settings);
        times.push(start.elapsed().as_secs_f64() * 1e3);
        let (produced, error) = match result {
            Ok(p) => (p, None),
            Err(e @ (AnalysisError::Precondition(_) | AnalysisError::Hypothesis(_))) => {
                let kind = match e {
                    AnalysisError::Precondition(_) => "precondition",
                    _ => "hypothesis",
                };
                let err = EntryError {
                    kind: kind.into(),
                    message: e.to_string(),
                };
                (Produced::default(), Some(err))
            }
            Err(e) => return Err(ConfigError::invalid(format!("analyses[{index}]"), e)),
        };
        let outcome = produced.verdict.as_ref().map(|v| v.outcome);
        entries.push(Entry {
            index,
            op: a.op_name().into(),
            params: serde_json::to_value(a).expect("analysis serializes"),
            outcome,
            expected: a.expect(),
            status: Status::of(outcome, error.is_some(), a.expect()),
            certificate_id: produced.verdict.as_ref().map(Verdict::id),
            verdict: produced.verdict,
            estimate: produced.estimate,
            error,
        });
    }
    let summary = Summary::of(&entries);
    Ok((
        Report {
            environment: Environment::for_config(cfg),
            entries,
            summary,
            timing: None,
        },
        times,
    ))
}

/// Loads, runs and writes outputs. Returns the report and exit code, or a
/// config error (exit code [`EXIT_CONFIG`]).
pub fn run(opts: &RunOptions, cap: u64) -> Result<Report, ConfigError> {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::load(&opts.config)?;
    cfg.apply(&opts.overrides);
    let (mut report, times) = run_config(&cfg, cap)?;
    if opts.timing {
        report.timing = Some(Timing {
            total_ms: start.elapsed().as_secs_f64() * 1e3,
            entry_ms: times,
        });
    }
    let io_err = |path: &std::path::Path, e: &dyn std::fmt::Display| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    if let Some(path) = &opts.out {
        std::fs::write(path, report.to_json()).map_err(|e| io_err(path, &e))?;
    }
    if let Some(path) = &opts.csv {
        let file = std::fs::File::create(path).map_err(|e| io_err(path, &e))?;
        crate::grid_csv::write_report(&report, file).map_err(|e| io_err(path, &e))?;
    }
    Ok(report)
}

/// [`run`] with the exit-code contract applied: 0 all pass, 1 any failure,
/// 2 unknowns without failures, 3 config errors.
pub fn execute(opts: &RunOptions) -> i32 {
    let result = crate::config::window_cap().and_then(|cap| run(opts, cap));
    match result {
        Ok(report) => {
            if opts.out.is_none() {
                print!("{}", report.to_json());
            }
            let s = report.summary;
            eprintln!(
                "{} pass, {} fail, {} unknown, {} info -> exit {}",
                s.pass, s.fail, s.unknown, s.info, s.exit_code
            );
            s.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
