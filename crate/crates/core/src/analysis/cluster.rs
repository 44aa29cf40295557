use rayon::prelude::*;

use crate::ideals::Ideal;
use crate::sequences::{Deviation, PiecewiseSequence};
use crate::spaces::{Point, Space};
use crate::verdict::{Certificate, MembershipLink, Outcome, Query, Verdict};

use super::limit_set::{Classification, Classified, EstimateKind, LimitSetEstimate};
use super::{AnalysisError, Settings};

/// Decides whether `c` is an `I`-cluster point: for each `eps` the near set
/// `{n : |p(x_n, c) - p(c, c)| < eps}` must be outside `I`.
fn cluster_verdict(
    seq: &PiecewiseSequence,
    space: &Space,
    c: Point,
    ideal: Ideal,
    settings: &Settings,
) -> Result<Verdict, AnalysisError> {
    let dev = Deviation::FromTarget(c.value());
    let mut links = Vec::new();
    let mut outcome = Outcome::Holds;
    for &eps in &settings.epsilons {
        let far = seq.level_set(space, dev, eps, false)?;
        if !far.exact {
            outcome = outcome.and(Outcome::Unknown);
            continue;
        }
        let mut near = far.set.complement();
        if let Some(d) = seq.domain() {
            near = near.intersect(d.clone());
        }
        // near set outside the ideal <=> membership Fails
        let link = MembershipLink::evaluate(format!("near({eps})"), Query::InIdeal(ideal), near);
        let o = !link.outcome;
        links.push(link);
        outcome = outcome.and(o);
        if o.is_fails() {
            break;
        }
    }
    Ok(Verdict::new(
        outcome,
        Certificate::MembershipChain {
            links,
            note: "cluster point iff every near set is outside the ideal".into(),
        },
    ))
}

/// Classifies grid points as `I`-cluster points.
pub fn cluster_points(
    seq: &PiecewiseSequence,
    space: &Space,
    grid: &[f64],
    ideal: Ideal,
    settings: &Settings,
) -> Result<LimitSetEstimate, AnalysisError> {
    settings.validate()?;
    seq.check_carrier(space)?;
    let points = grid.iter().map(|&g| space.point(g)).collect::<Result<Vec<_>, _>>()?;
    let entries = points
        .par_iter()
        .map(|&c| -> Result<Classified, AnalysisError> {
            let v = cluster_verdict(seq, space, c, ideal, settings)?;
            Ok(Classified {
                candidate: c.value(),
                classification: v.outcome.into(),
                master_density_upper: None,
                certificate_id: v.id(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LimitSetEstimate {
        kind: EstimateKind::Cluster,
        r: 0.0,
        epsilons: settings.epsilons.clone(),
        entries,
    })
}

/// Every accepted rough limit point lies in the closed ball of radius `r`
/// about the cluster point `c`.
pub fn check_cluster_ball(
    seq: &PiecewiseSequence,
    space: &Space,
    c: Point,
    est: &LimitSetEstimate,
    ideal: Ideal,
    settings: &Settings,
) -> Result<Verdict, AnalysisError> {
    let a = space
        .constant_self_distance()
        .ok_or_else(|| AnalysisError::Hypothesis(format!("{space} has no constant self-distance")))?;
    if est.kind != EstimateKind::RoughLimit {
        return Err(AnalysisError::Precondition(
            "estimate must classify rough limit points".into(),
        ));
    }
    let premise = cluster_verdict(seq, space, c, ideal, settings)?;
    if Classification::from(premise.outcome) != Classification::Accepted {
        return Err(AnalysisError::Precondition(format!(
            "{c} is not a certified cluster point ({})",
            premise.outcome
        )));
    }
    let slack = est
        .grid()
        .windows(2)
        .map(|w| space.p_raw(w[0], w[1]) - a)
        .fold(0.0, f64::max);
    let pcc = space.eval_p(c, c)?;
    let mut parts = vec![("premise".to_string(), premise)];
    for w in est.accepted() {
        let pcw = space.eval_p(c, space.point(w)?)?;
        parts.push((
            format!("w={w}"),
            Verdict::inequality(format!("p({c}, {w}) <= p(c, c) + r"), pcw, pcc + est.r, slack),
        ));
    }
    let outcome = parts.iter().fold(Outcome::Holds, |acc, (_, v)| acc.and(v.outcome));
    Ok(Verdict::composite(outcome, parts))
}
