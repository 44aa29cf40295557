use serde::{Deserialize, Serialize};

use crate::ideals::Ideal;
use crate::index_sets::SetDescriptor;
use crate::sequences::{Deviation, PiecewiseSequence};
use crate::spaces::{Point, Space};
use crate::verdict::{Certificate, Counterexample, MembershipLink, Outcome, Query, Verdict};

use super::limit_set::{Classification, LimitSetEstimate};
use super::{
    check_roughness, estimate_rough_limit_set, ideal_converges, rough_ideal_converges, AnalysisError, Settings,
};

/// Tolerance for `p(x, x) = p(y, y)` in the ball-inclusion check.
pub const BALL_SELF_DISTANCE_TOL: f64 = 1e-9;
/// Index at which the pairwise-distance hypothesis is sampled.
pub const PERTURBATION_INDEX: u64 = 10_000;
/// Largest accepted `p(a_N, b_N)` (and `p(a_N, a_N)`) at that index.
pub const PERTURBATION_WINDOW_TOL: f64 = 1e-3;
/// Largest accepted distance between the declared limits.
pub const PERTURBATION_LIMIT_TOL: f64 = 1e-6;

fn constant_self_distance(space: &Space) -> Result<f64, AnalysisError> {
    space
        .constant_self_distance()
        .ok_or_else(|| AnalysisError::Hypothesis(format!("{space} has no constant self-distance")))
}

fn kleene_all<'a>(parts: impl IntoIterator<Item = &'a Verdict>) -> Outcome {
    parts.into_iter().fold(Outcome::Holds, |acc, v| acc.and(v.outcome))
}

fn composite(parts: Vec<(String, Verdict)>) -> Verdict {
    let outcome = kleene_all(parts.iter().map(|(_, v)| v));
    Verdict::composite(outcome, parts)
}

/// Largest distance excess `p(g_i, g_{i+1}) - a` between neighbouring grid
/// points: how far one grid step can move a distance.
fn grid_slack(space: &Space, est: &LimitSetEstimate, a: f64) -> f64 {
    est.grid()
        .windows(2)
        .map(|w| space.p_raw(w[0], w[1]) - a)
        .fold(0.0, f64::max)
}

/// `diam(accepted) <= 2r + 2a`, up to one grid step.
pub fn check_diameter_bound(est: &LimitSetEstimate, space: &Space) -> Result<Verdict, AnalysisError> {
    let a = constant_self_distance(space)?;
    let accepted = est
        .accepted()
        .into_iter()
        .map(|v| space.point(v))
        .collect::<Result<Vec<Point>, _>>()?;
    let diam = space.diam(&accepted);
    let slack = grid_slack(space, est, a);
    Ok(Verdict::inequality(
        "diam(accepted) <= 2r + 2a",
        diam,
        2.0 * est.r + 2.0 * a,
        slack,
    ))
}

/// Every grid point of the closed ball about `x` that shares `x`'s
/// self-distance must be a rough limit point.
pub fn check_ball_inclusion(
    seq: &PiecewiseSequence,
    space: &Space,
    x: Point,
    grid: &[f64],
    r: f64,
    ideal: Ideal,
    settings: &Settings,
) -> Result<Verdict, AnalysisError> {
    check_roughness(r)?;
    let premise = ideal_converges(seq, space, x, ideal, settings)?;
    if !premise.outcome.is_holds() {
        return Err(AnalysisError::Precondition(format!(
            "ideal convergence to {x} is {}",
            premise.outcome
        )));
    }
    let pxx = space.eval_p(x, x)?;
    let mut qualifying = Vec::new();
    for &g in grid {
        let y = space.point(g)?;
        if space.in_closed_ball(x, r, y)? && (pxx - space.eval_p(y, y)?).abs() <= BALL_SELF_DISTANCE_TOL {
            qualifying.push(g);
        }
    }
    let mut parts = vec![("premise".to_string(), premise)];
    if qualifying.is_empty() {
        parts.push((
            "candidates".into(),
            Verdict::vacuous("no grid point lies in the ball with equal self-distance"),
        ));
        return Ok(composite(parts));
    }
    for &g in &qualifying {
        let v = rough_ideal_converges(seq, space, space.point(g)?, r, ideal, settings)?;
        parts.push((format!("y={g}"), v));
    }
    Ok(composite(parts))
}

/// No holes at grid resolution: a non-accepted grid point with accepted
/// points within `h` on both sides is a hole.
pub fn check_closedness(est: &LimitSetEstimate, h: f64) -> Result<Verdict, AnalysisError> {
    let g = est.grid();
    if g.len() < 2 {
        return Ok(Verdict::vacuous("fewer than two grid points"));
    }
    let step = g[1] - g[0];
    let uniform = step > 0.0
        && g.windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.max(1.0));
    if !uniform {
        return Err(AnalysisError::BadGrid(
            "closedness needs a uniform increasing grid".into(),
        ));
    }
    if !(step <= h + 1e-12) {
        return Err(AnalysisError::BadGrid(format!(
            "grid step {step} exceeds neighbourhood radius {h}"
        )));
    }
    let accepted: Vec<f64> = est.accepted();
    if accepted.is_empty() {
        return Ok(Verdict::vacuous("no accepted points"));
    }
    let mut unknown_holes = Vec::new();
    for (i, e) in est.entries.iter().enumerate() {
        if e.classification == Classification::Accepted {
            continue;
        }
        let y = e.candidate;
        let left = accepted.iter().any(|&a| a < y && y - a <= h + 1e-12);
        let right = accepted.iter().any(|&a| a > y && a - y <= h + 1e-12);
        if left && right {
            if e.classification == Classification::Rejected {
                return Ok(Verdict::new(
                    Outcome::Fails,
                    Certificate::Counterexample(Counterexample {
                        epsilon: None,
                        witnesses: vec![(i as u64, y)],
                        note: format!("rejected grid point {y} has accepted neighbours within {h}"),
                        link: None,
                    }),
                ));
            }
            unknown_holes.push(y);
        }
    }
    let checked = est.entries.len() as u64;
    if unknown_holes.is_empty() {
        Ok(Verdict::new(
            Outcome::Holds,
            Certificate::Exhaustive {
                checked,
                note: format!("no holes at grid resolution {step}"),
            },
        ))
    } else {
        Ok(Verdict::new(
            Outcome::Unknown,
            Certificate::Exhaustive {
                checked,
                note: format!("undecided grid points inside accepted runs: {unknown_holes:?}"),
            },
        ))
    }
}

/// Ideal membership of `{n : p(x_n, u) >= m}`.
pub fn is_ideal_bounded(
    seq: &PiecewiseSequence,
    space: &Space,
    u: Point,
    m: f64,
    ideal: Ideal,
) -> Result<Verdict, AnalysisError> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(AnalysisError::Precondition(format!("bound M must be > 0, got {m}")));
    }
    space.check_carrier(u)?;
    let cs = seq.level_set(space, Deviation::Distance(u.value()), m, false)?;
    if !cs.exact {
        return Ok(Verdict::new(
            Outcome::Unknown,
            Certificate::WindowEvidence {
                window: crate::sequences::DEFAULT_WINDOW,
                counts: Vec::new(),
                note: format!("level set only known on the window: {}", cs.set),
            },
        ));
    }
    let link = MembershipLink::evaluate("bounded", Query::InIdeal(ideal), cs.set);
    Ok(Verdict::new(
        link.outcome,
        Certificate::MembershipChain {
            links: vec![link],
            note: format!("{{n : p(x_n, {u}) >= {m}}}"),
        },
    ))
}

/// Checks both constructions of the equivalence between `I`-boundedness and
/// a non-empty rough limit set.
///
/// Forward: a certified bound `M` makes `u` a rough limit point at
/// `r = M + a`. Backward: an accepted grid point `w` at roughness `r` makes
/// the sequence bounded around `w` with `M = r + a + eps0`.
#[allow(clippy::too_many_arguments)]
pub fn check_boundedness_equivalence(
    seq: &PiecewiseSequence,
    space: &Space,
    u: Point,
    bounds: &[f64],
    roughness: &[f64],
    grid: &[f64],
    ideal: Ideal,
    eps0: f64,
    settings: &Settings,
) -> Result<Verdict, AnalysisError> {
    let a = constant_self_distance(space)?;
    if !(eps0 > 0.0) {
        return Err(AnalysisError::Precondition("eps0 must be > 0".into()));
    }
    let mut bounded_verdicts = Vec::new();
    let mut bound_found = None;
    for &m in bounds {
        let v = is_ideal_bounded(seq, space, u, m, ideal)?;
        if v.outcome.is_holds() && bound_found.is_none() {
            bound_found = Some(m);
        }
        bounded_verdicts.push((format!("bounded(M={m})"), v));
    }
    let mut estimates = Vec::new();
    for &r in roughness {
        estimates.push(estimate_rough_limit_set(seq, space, grid, r, ideal, settings)?);
    }

    let mut parts = Vec::new();
    let forward = match bound_found {
        Some(m) => Some(rough_ideal_converges(seq, space, u, m + a, ideal, settings)?),
        None => None,
    };
    let witness = estimates.iter().find_map(|e| e.accepted().first().map(|&w| (e.r, w)));
    let backward = match witness {
        Some((r, w)) => Some(is_ideal_bounded(seq, space, space.point(w)?, r + a + eps0, ideal)?),
        None => None,
    };

    let outcome = match (&forward, &backward) {
        (None, None) => {
            let all_unbounded = bounded_verdicts.iter().all(|(_, v)| v.outcome.is_fails());
            let all_empty = estimates
                .iter()
                .all(|e| e.accepted().is_empty() && e.unknown().is_empty());
            if all_unbounded && all_empty {
                Outcome::Holds
            } else {
                Outcome::Unknown
            }
        }
        (f, b) => f
            .iter()
            .chain(b.iter())
            .fold(Outcome::Holds, |acc, v| acc.and(v.outcome)),
    };
    parts.extend(bounded_verdicts);
    if let Some(v) = forward {
        parts.push((format!("forward(r=M+a={})", bound_found.unwrap_or(0.0) + a), v));
    }
    if let Some(v) = backward {
        let (r, w) = witness.unwrap_or_default();
        parts.push((format!("backward(u'={w}, M=r+a+eps0={})", r + a + eps0), v));
    }
    Ok(Verdict::composite(outcome, parts))
}

/// A filter-large subsequence keeps every rough limit point.
pub fn check_subsequence_inclusion(
    seq: &PiecewiseSequence,
    space: &Space,
    subindex: &SetDescriptor,
    grid: &[f64],
    r: f64,
    ideal: Ideal,
    settings: &Settings,
) -> Result<Verdict, AnalysisError> {
    let premise = ideal.in_filter(subindex);
    if !premise.outcome.is_holds() {
        return Err(AnalysisError::Precondition(format!(
            "{subindex} is not certified in the filter of {ideal} ({})",
            premise.outcome
        )));
    }
    let sub = seq.restrict(subindex.clone());
    let full = estimate_rough_limit_set(seq, space, grid, r, ideal, settings)?;
    let mut parts = vec![("premise".to_string(), premise)];
    for y in full.accepted() {
        let v = rough_ideal_converges(&sub, space, space.point(y)?, r, ideal, settings)?;
        parts.push((format!("y={y}"), v));
    }
    Ok(composite(parts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Variant {
    /// Needs `p(a_n, a_n) -> 0`; the roughness degree is unchanged.
    EqualDegree,
    /// Needs `p(a_n, a_n) <= c` for all `n`; the degree grows by `c`.
    PlusC(f64),
}

/// If `a_n` is rough `I`-convergent to `x` and `p(a_n, b_n) -> 0`, so is
/// `b_n` (with degree `r` or `r + c`, depending on the variant).
#[allow(clippy::too_many_arguments)]
pub fn check_perturbation_transfer(
    seq_a: &PiecewiseSequence,
    seq_b: &PiecewiseSequence,
    space: &Space,
    x: Point,
    r: f64,
    ideal: Ideal,
    variant: Variant,
    settings: &Settings,
) -> Result<Verdict, AnalysisError> {
    check_roughness(r)?;
    let n = PERTURBATION_INDEX;
    let (an, bn) = (seq_a.at(n)?, seq_b.at(n)?);
    let pab = space.eval_p(an, bn)?;
    if !(pab <= PERTURBATION_WINDOW_TOL) {
        return Err(AnalysisError::Hypothesis(format!(
            "p(a_n, b_n) -> 0: p(a_{n}, b_{n}) = {pab} exceeds {PERTURBATION_WINDOW_TOL}"
        )));
    }
    let (la, lb) = match (seq_a.declared_limit(), seq_b.declared_limit()) {
        (Some(la), Some(lb)) => (la, lb),
        _ => {
            return Err(AnalysisError::Hypothesis(
                "p(a_n, b_n) -> 0: both sequences need a declared finite limit".into(),
            ))
        }
    };
    let plim = space.p_raw(la, lb);
    if !(plim <= PERTURBATION_LIMIT_TOL) {
        return Err(AnalysisError::Hypothesis(format!(
            "p(a_n, b_n) -> 0: declared limits give p({la}, {lb}) = {plim}"
        )));
    }
    let target_r = match variant {
        Variant::EqualDegree => {
            let paa = space.eval_p(an, an)?;
            let plaa = space.p_raw(la, la);
            if !(paa <= PERTURBATION_WINDOW_TOL && plaa <= PERTURBATION_LIMIT_TOL) {
                return Err(AnalysisError::Hypothesis(format!(
                    "p(a_n, a_n) -> 0: p(a_{n}, a_{n}) = {paa}, at the limit {plaa}"
                )));
            }
            r
        }
        Variant::PlusC(c) => {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(AnalysisError::Hypothesis(format!("c must be >= 0, got {c}")));
            }
            let over = seq_a.level_set(space, Deviation::SelfDistance, c, true)?;
            if !(over.exact && over.set == SetDescriptor::Empty) {
                return Err(AnalysisError::Hypothesis(format!(
                    "p(a_n, a_n) <= c = {c}: violated on {}",
                    over.set
                )));
            }
            r + c
        }
    };
    let premise = rough_ideal_converges(seq_a, space, x, r, ideal, settings)?;
    let mut parts = vec![("premise".to_string(), premise.clone())];
    let outcome = match premise.outcome {
        Outcome::Fails => {
            parts.push(("conclusion".into(), Verdict::vacuous("premise fails")));
            Outcome::Holds
        }
        Outcome::Unknown => Outcome::Unknown,
        Outcome::Holds => {
            let conclusion = rough_ideal_converges(seq_b, space, x, target_r, ideal, settings)?;
            let o = conclusion.outcome;
            parts.push((format!("conclusion(r={target_r})"), conclusion));
            o
        }
    };
    Ok(Verdict::composite(outcome, parts))
}

#[cfg(test)]
mod tests {
    use super::super::limit_set::{EstimateKind, Grid};
    use super::*;
    use crate::fixtures;
    use crate::sequences::{Limit, Monotone};

    fn s() -> Settings {
        Settings::default()
    }

    #[test]
    fn diameter_bound_alternating() {
        let space = Space::shifted(1.0).unwrap();
        let seq = fixtures::alternating(0.0, 1.0);
        let grid = Grid::new(-1.0, 2.0, 0.25).unwrap().points();
        let est = estimate_rough_limit_set(&seq, &space, &grid, 1.0, Ideal::Fin, &s()).unwrap();
        let v = check_diameter_bound(&est, &space).unwrap();
        assert!(v.outcome.is_holds());
        match v.certificate {
            Certificate::Inequality { lhs, rhs, .. } => {
                assert_eq!(lhs, 2.0);
                assert_eq!(rhs, 4.0);
            }
            other => panic!("{other:?}"),
        }
        let pm = Space::pow_max(2.0).unwrap();
        assert!(matches!(
            check_diameter_bound(&est, &pm),
            Err(AnalysisError::Hypothesis(_))
        ));
    }

    #[test]
    fn ball_inclusion_examples() {
        let sh = Space::shifted(1.0).unwrap();
        let zero = PiecewiseSequence::constant(0.0).unwrap();
        let grid = Grid::new(-3.0, 3.0, 0.25).unwrap().points();
        let v = check_ball_inclusion(&zero, &sh, sh.point(0.0).unwrap(), &grid, 2.0, Ideal::Fin, &s()).unwrap();
        assert!(v.outcome.is_holds());
        assert!(v.part("y=-2").is_some() && v.part("y=2").is_some() && v.part("y=2.25").is_none());

        let mx = Space::max_nonneg();
        let grid = Grid::new(0.0, 2.0, 0.25).unwrap().points();
        let v = check_ball_inclusion(
            &fixtures::reciprocal(),
            &mx,
            mx.point(0.0).unwrap(),
            &grid,
            1.0,
            Ideal::Fin,
            &s(),
        )
        .unwrap();
        assert!(v.outcome.is_holds());
        assert!(v.part("y=0").is_some() && v.part("y=0.25").is_none());

        let v = check_ball_inclusion(&zero, &sh, sh.point(0.0).unwrap(), &[10.0], 2.0, Ideal::Fin, &s()).unwrap();
        assert!(v.outcome.is_holds());

        let alt = fixtures::alternating(0.0, 1.0);
        let e = check_ball_inclusion(&alt, &sh, sh.point(0.0).unwrap(), &grid, 1.0, Ideal::Fin, &s());
        assert!(matches!(e, Err(AnalysisError::Precondition(_))));
    }

    #[test]
    fn closedness_examples() {
        let est = LimitSetEstimate::from_classes(
            EstimateKind::RoughLimit,
            1.0,
            vec![1.0],
            [
                (0.0, Classification::Accepted),
                (0.25, Classification::Rejected),
                (0.5, Classification::Accepted),
            ],
        );
        let v = check_closedness(&est, 0.25).unwrap();
        assert!(v.outcome.is_fails());
        match v.certificate {
            Certificate::Counterexample(c) => assert_eq!(c.witnesses, vec![(1, 0.25)]),
            other => panic!("{other:?}"),
        }
        let interval = LimitSetEstimate::from_classes(
            EstimateKind::RoughLimit,
            1.0,
            vec![1.0],
            (0..=8).map(|i| {
                let y = -1.0 + 0.25 * i as f64;
                let c = if (0.0..=1.0).contains(&y) {
                    Classification::Accepted
                } else {
                    Classification::Rejected
                };
                (y, c)
            }),
        );
        assert!(check_closedness(&interval, 0.25).unwrap().outcome.is_holds());
        assert!(check_closedness(&interval, 0.1).is_err());
        let none = LimitSetEstimate::from_classes(
            EstimateKind::RoughLimit,
            1.0,
            vec![1.0],
            [(0.0, Classification::Rejected), (1.0, Classification::Rejected)],
        );
        assert!(check_closedness(&none, 1.0).unwrap().outcome.is_holds());
        let uneven = LimitSetEstimate::from_classes(
            EstimateKind::RoughLimit,
            1.0,
            vec![1.0],
            [
                (0.0, Classification::Accepted),
                (0.1, Classification::Accepted),
                (0.3, Classification::Accepted),
            ],
        );
        assert!(matches!(check_closedness(&uneven, 1.0), Err(AnalysisError::BadGrid(_))));
    }

    #[test]
    fn bounded_examples() {
        let pm = Space::pow_max(2.0).unwrap();
        let seq = fixtures::square_supported();
        let u = pm.point(0.0).unwrap();
        assert!(is_ideal_bounded(&seq, &pm, u, 2.0, Ideal::DensityZero)
            .unwrap()
            .outcome
            .is_holds());
        assert!(is_ideal_bounded(&seq, &pm, u, 2.0, Ideal::Fin)
            .unwrap()
            .outcome
            .is_fails());
        let sh = Space::shifted(1.0).unwrap();
        let c = PiecewiseSequence::constant(1.0).unwrap();
        for ideal in Ideal::ALL {
            let v = is_ideal_bounded(&c, &sh, sh.point(0.0).unwrap(), 5.0, ideal).unwrap();
            assert!(v.outcome.is_holds());
        }
    }

    #[test]
    fn boundedness_equivalence_examples() {
        let sh = Space::shifted(1.0).unwrap();
        let grid = Grid::new(-1.0, 2.0, 0.25).unwrap().points();
        let alt = fixtures::alternating(0.0, 1.0);
        let v = check_boundedness_equivalence(
            &alt,
            &sh,
            sh.point(0.0).unwrap(),
            &[3.0],
            &[1.0],
            &grid,
            Ideal::Fin,
            0.1,
            &s(),
        )
        .unwrap();
        assert!(v.outcome.is_holds(), "{v:?}");
        assert!(v.part("forward(r=M+a=4)").unwrap().outcome.is_holds());

        let pm = Space::pow_max(2.0).unwrap();
        let e = check_boundedness_equivalence(
            &fixtures::square_supported(),
            &pm,
            pm.point(0.0).unwrap(),
            &[2.0],
            &[1.0],
            &[0.0],
            Ideal::DensityZero,
            0.1,
            &s(),
        );
        assert!(matches!(e, Err(AnalysisError::Hypothesis(_))));

        let unbounded = fixtures::identity_ranks();
        let v = check_boundedness_equivalence(
            &unbounded,
            &sh,
            sh.point(0.0).unwrap(),
            &[1.0, 10.0, 1000.0],
            &[0.5, 1.0, 10.0],
            &grid,
            Ideal::Fin,
            0.1,
            &s(),
        )
        .unwrap();
        assert!(v.outcome.is_holds());
        assert!(v.part("bounded(M=1000)").unwrap().outcome.is_fails());
        assert!(v.part("forward(r=M+a=1001)").is_none());
    }

    #[test]
    fn subsequence_examples() {
        let pm = Space::pow_max(2.0).unwrap();
        let seq = fixtures::square_supported();
        let grid = [0.0, 1.0, 2.0, 3.0];
        let non_squares = SetDescriptor::power_image(2).unwrap().complement();
        let v = check_subsequence_inclusion(&seq, &pm, &non_squares, &grid, 1.0, Ideal::DensityZero, &s()).unwrap();
        assert!(v.outcome.is_holds());
        assert_eq!(
            if let Certificate::Composite { parts } = &v.certificate {
                parts.len()
            } else {
                0
            },
            5
        );
        let v = check_subsequence_inclusion(
            &seq,
            &pm,
            &SetDescriptor::naturals(),
            &grid,
            1.0,
            Ideal::DensityZero,
            &s(),
        )
        .unwrap();
        assert!(v.outcome.is_holds());
        let e = check_subsequence_inclusion(
            &seq,
            &pm,
            &SetDescriptor::power_image(2).unwrap(),
            &grid,
            1.0,
            Ideal::DensityZero,
            &s(),
        );
        assert!(matches!(e, Err(AnalysisError::Precondition(_))));
    }

    #[test]
    fn perturbation_examples() {
        let mx = Space::max_nonneg();
        let a = fixtures::reciprocal();
        let b = fixtures::indexed_on_naturals("1/(k+1)", Monotone::Decreasing, Limit::Finite(0.0));
        let x = mx.point(0.0).unwrap();
        let v = check_perturbation_transfer(&a, &b, &mx, x, 0.0, Ideal::Fin, Variant::EqualDegree, &s()).unwrap();
        assert!(v.outcome.is_holds());
        assert!(v.replay());

        let sh = Space::shifted(1.0).unwrap();
        let c = PiecewiseSequence::constant(0.0).unwrap();
        let e = check_perturbation_transfer(
            &c,
            &c,
            &sh,
            sh.point(0.0).unwrap(),
            0.0,
            Ideal::Fin,
            Variant::EqualDegree,
            &s(),
        );
        assert!(matches!(e, Err(AnalysisError::Hypothesis(_))));

        let a = fixtures::indexed_on_naturals("0.5 + 1/k", Monotone::Decreasing, Limit::Finite(0.5));
        let b = fixtures::indexed_on_naturals("0.5 + 1/(2*k)", Monotone::Decreasing, Limit::Finite(0.5));
        let e = check_perturbation_transfer(&a, &b, &mx, x, 1.0, Ideal::Fin, Variant::PlusC(0.6), &s());
        assert!(matches!(e, Err(AnalysisError::Hypothesis(_))));
    }
}
