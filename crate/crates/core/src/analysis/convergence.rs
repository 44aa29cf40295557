use crate::ideals::Ideal;
use crate::index_sets::SetDescriptor;
use crate::sequences::{Deviation, PiecewiseSequence};
use crate::spaces::{Point, Space};
use crate::verdict::{Certificate, Counterexample, MembershipLink, Outcome, Query, Verdict, WindowCount};

use super::{check_roughness, AnalysisError, Settings};

/// Rough `I`-convergence of `seq` to `x` with roughness degree `r`.
///
/// `Holds` is certified by the strict master set `{n : dev > r}` when that
/// set is computed exactly and lies in `I`. Otherwise the essential set is
/// tried: the union of pieces whose deviation stays above `r` infinitely
/// often. Every `A(eps)` is contained in it up to finitely many indices, so
/// for an admissible ideal its membership is enough.
pub fn rough_ideal_converges(
    seq: &PiecewiseSequence,
    space: &Space,
    x: Point,
    r: f64,
    ideal: Ideal,
    settings: &Settings,
) -> Result<Verdict, AnalysisError> {
    decide(seq, space, x, r, Query::InIdeal(ideal), settings)
}

/// Ordinary rough convergence: every `A(eps)` must be finite.
pub fn rough_converges(
    seq: &PiecewiseSequence,
    space: &Space,
    x: Point,
    r: f64,
    settings: &Settings,
) -> Result<Verdict, AnalysisError> {
    decide(seq, space, x, r, Query::Finite, settings)
}

pub fn ideal_converges(
    seq: &PiecewiseSequence,
    space: &Space,
    x: Point,
    ideal: Ideal,
    settings: &Settings,
) -> Result<Verdict, AnalysisError> {
    rough_ideal_converges(seq, space, x, 0.0, ideal, settings)
}

fn decide(
    seq: &PiecewiseSequence,
    space: &Space,
    x: Point,
    r: f64,
    query: Query,
    settings: &Settings,
) -> Result<Verdict, AnalysisError> {
    check_roughness(r)?;
    settings.validate()?;
    space.check_carrier(x)?;
    seq.check_carrier(space)?;
    let dev = Deviation::FromTarget(x.value());

    let master = seq.level_set(space, dev, r, true)?;
    if master.exact {
        let link = MembershipLink::evaluate("master", query.clone(), master.set);
        if link.outcome.is_holds() {
            return Ok(chain(link, "every A(eps) is a subset of the master set"));
        }
    }
    let essential = seq.essential_set(space, dev, r)?;
    if essential.exact {
        let link = MembershipLink::evaluate("essential", query.clone(), essential.set);
        if link.outcome.is_holds() {
            let note = format!(
                "every A(eps) lies in the essential set up to finitely many indices \
                 (pieces {:?} converge within r)",
                essential.finite_pieces
            );
            return Ok(chain(link, &note));
        }
    }

    let mut counts = Vec::new();
    for &eps in &settings.epsilons {
        let cs = seq.level_set(space, dev, r + eps, false)?;
        if cs.exact {
            let link = MembershipLink::evaluate("A(eps)", query.clone(), cs.set.clone());
            if link.outcome.is_fails() {
                let witnesses = witnesses(seq, space, dev, &cs.set, 3);
                return Ok(Verdict::new(
                    Outcome::Fails,
                    Certificate::Counterexample(Counterexample {
                        epsilon: Some(eps),
                        witnesses,
                        note: format!("A({eps}) = {} is not small", cs.set),
                        link: Some(link),
                    }),
                ));
            }
        }
        let (count, upper_half) = seq.window_count(space, dev, r + eps, false, settings.window);
        counts.push(WindowCount {
            label: format!("A({eps})"),
            count,
            upper_half,
        });
    }
    Ok(Verdict::new(
        Outcome::Unknown,
        Certificate::WindowEvidence {
            window: settings.window,
            counts,
            note: "no certified set decides the query".into(),
        },
    ))
}

fn chain(link: MembershipLink, note: &str) -> Verdict {
    Verdict::new(
        Outcome::Holds,
        Certificate::MembershipChain {
            links: vec![link],
            note: note.into(),
        },
    )
}

/// The first `k` members of `set` with the deviation at each.
pub(crate) fn witnesses(
    seq: &PiecewiseSequence,
    space: &Space,
    dev: Deviation,
    set: &SetDescriptor,
    k: u64,
) -> Vec<(u64, f64)> {
    (1..=k)
        .map_while(|i| set.nth(i))
        .filter_map(|n| seq.value_at(n).map(|v| (n, dev.eval(space, v))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn settings() -> Settings {
        Settings::default()
    }

    #[test]
    fn square_supported_under_density_zero() {
        let space = Space::pow_max(2.0).unwrap();
        let seq = fixtures::square_supported();
        for x in [0.0, 1.0, 2.0, 3.0] {
            let v = rough_ideal_converges(
                &seq,
                &space,
                space.point(x).unwrap(),
                1.0,
                Ideal::DensityZero,
                &settings(),
            )
            .unwrap();
            assert_eq!(v.outcome, Outcome::Holds, "x = {x}");
            assert!(v.replay());
        }
    }

    #[test]
    fn square_supported_under_fin_fails() {
        let space = Space::pow_max(2.0).unwrap();
        let seq = fixtures::square_supported();
        let v = rough_ideal_converges(&seq, &space, space.point(0.0).unwrap(), 1.0, Ideal::Fin, &settings()).unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
        assert!(v.replay());
        for r in [1.0, 10.0, 100.0] {
            let v = rough_converges(&seq, &space, space.point(0.0).unwrap(), r, &settings()).unwrap();
            assert_eq!(v.outcome, Outcome::Fails, "r = {r}");
        }
    }

    #[test]
    fn constant_sequence_converges_to_itself() {
        let space = Space::shifted(1.0).unwrap();
        let seq = PiecewiseSequence::constant(2.5).unwrap();
        for ideal in Ideal::ALL {
            let v = rough_ideal_converges(&seq, &space, space.point(2.5).unwrap(), 0.0, ideal, &settings()).unwrap();
            assert_eq!(v.outcome, Outcome::Holds);
        }
    }

    #[test]
    fn rough_convergence_examples() {
        let space = Space::shifted(1.0).unwrap();
        let ev = fixtures::eventually_constant(&[7.0, -3.0, 11.0], 4.0);
        let v = rough_converges(&ev, &space, space.point(4.0).unwrap(), 0.0, &settings()).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        let alt = fixtures::alternating(0.0, 1.0);
        let v = rough_converges(&alt, &space, space.point(0.5).unwrap(), 0.5, &settings()).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
    }

    #[test]
    fn ideal_convergence_examples() {
        let pm = Space::pow_max(2.0).unwrap();
        let v = ideal_converges(
            &fixtures::square_supported(),
            &pm,
            pm.point(0.0).unwrap(),
            Ideal::DensityZero,
            &settings(),
        )
        .unwrap();
        assert_eq!(v.outcome, Outcome::Holds);

        let mx = Space::max_nonneg();
        let v = ideal_converges(
            &fixtures::reciprocal(),
            &mx,
            mx.point(0.0).unwrap(),
            Ideal::Fin,
            &settings(),
        )
        .unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        assert!(v.replay());

        let sh = Space::shifted(1.0).unwrap();
        let v = ideal_converges(
            &fixtures::alternating(0.0, 1.0),
            &sh,
            sh.point(0.0).unwrap(),
            Ideal::DensityZero,
            &settings(),
        )
        .unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
        match &v.certificate {
            Certificate::Counterexample(c) => assert_eq!(c.witnesses[0], (2, 1.0)),
            other => panic!("unexpected certificate {other:?}"),
        }
    }

    #[test]
    fn negative_roughness_is_rejected() {
        let space = Space::shifted(1.0).unwrap();
        let seq = PiecewiseSequence::constant(0.0).unwrap();
        assert!(rough_converges(&seq, &space, space.point(0.0).unwrap(), -1.0, &settings()).is_err());
    }
}
