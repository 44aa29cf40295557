mod common;

use common::{named_cases, random_fixtures, DeviationProfile};
use proptest::prelude::*;
use rough_ideal::analysis::{
    check_cluster_ball, check_diameter_bound, cluster_points, estimate_rough_limit_set, ideal_converges,
    rough_converges, rough_ideal_converges, Classification, Grid, Settings,
};
use rough_ideal::sequences::Deviation;
use rough_ideal::{Certificate, Ideal, Outcome, PiecewiseSequence, Space, Verdict};

const ORACLE_WINDOW: u64 = 100_000;

/// Cross-checks a symbolic verdict against pointwise evaluation of `A(eps)`
/// on `[1, 10^5]` and on a block of indices near `10^8`.
fn oracle_agrees(
    profile: &DeviationProfile,
    r: f64,
    ideal: Ideal,
    v: &Verdict,
    settings: &Settings,
) -> Result<(), String> {
    match v.outcome {
        Outcome::Holds => {
            for &eps in &settings.epsilons {
                let p = profile.view(r + eps);
                let far_density = p.far_hits as f64 / p.far_probes as f64;
                let upper_density = p.upper_half as f64 / (p.window / 2) as f64;
                let contradicted = match ideal {
                    Ideal::Fin => p.upper_half > 0 && p.far_hits > 0,
                    Ideal::DensityZero => far_density >= 0.05 && upper_density >= 0.05,
                };
                if contradicted {
                    return Err(format!(
                        "Holds but A({eps}) looks large: {} / {}",
                        p.upper_half, p.far_hits
                    ));
                }
            }
        }
        Outcome::Fails => {
            let eps = match &v.certificate {
                Certificate::Counterexample(c) => c.epsilon.ok_or("counterexample without epsilon")?,
                other => return Err(format!("Fails without counterexample: {other:?}")),
            };
            let p = profile.view(r + eps);
            let contradicted = match ideal {
                Ideal::Fin => p.upper_half == 0 && p.far_hits == 0,
                Ideal::DensityZero => {
                    (p.upper_half as f64) < 0.001 * (p.window / 2) as f64
                        && (p.far_hits as f64) < 0.001 * p.far_probes as f64
                }
            };
            if contradicted {
                return Err(format!("Fails but A({eps}) looks small"));
            }
        }
        Outcome::Unknown => {}
    }
    Ok(())
}

#[test]
fn symbolic_verdicts_agree_with_pointwise_oracle() {
    let settings = Settings::default();
    let mut decided = 0;
    for case in named_cases() {
        for &x in &case.targets {
            let Ok(xp) = case.space.point(x) else { continue };
            let profile = DeviationProfile::new(&case.seq, &case.space, Deviation::FromTarget(x), ORACLE_WINDOW);
            for &r in &case.roughness {
                for ideal in Ideal::ALL {
                    let v = rough_ideal_converges(&case.seq, &case.space, xp, r, ideal, &settings).unwrap();
                    decided += (v.outcome != Outcome::Unknown) as u32;
                    assert!(v.replay(), "{} x={x} r={r}", case.name);
                    if let Err(e) = oracle_agrees(&profile, r, ideal, &v, &settings) {
                        panic!("{} x={x} r={r} {ideal}: {e}", case.name);
                    }
                }
            }
        }
    }
    assert!(decided > 300, "only {decided} decided verdicts");
}

#[test]
fn random_fixtures_agree_with_oracle_and_transfer() {
    let settings = Settings::default();
    let fixtures = random_fixtures(100, 2024);
    let mut holds = 0;
    let mut within = 0;
    for (i, f) in fixtures.iter().enumerate() {
        let x = f.space.point(f.x).unwrap();
        let rough = rough_converges(&f.seq, &f.space, x, f.r, &settings).unwrap();
        let profile = DeviationProfile::new(&f.seq, &f.space, Deviation::FromTarget(f.x), ORACLE_WINDOW);
        for ideal in Ideal::ALL {
            let v = rough_ideal_converges(&f.seq, &f.space, x, f.r, ideal, &settings).unwrap();
            if rough.outcome.is_holds() {
                assert!(!v.outcome.is_fails(), "fixture {i}: rough Holds but {ideal} Fails");
            }
            assert!(v.replay());
            oracle_agrees(&profile, f.r, ideal, &v, &settings).unwrap_or_else(|e| panic!("fixture {i} {ideal}: {e}"));
        }
        if f.eventually_within {
            within += 1;
            assert!(!rough.outcome.is_fails(), "fixture {i} stays within r but rough Fails");
            holds += rough.outcome.is_holds() as u32;
        } else {
            assert!(!rough.outcome.is_holds(), "fixture {i} has a defect but rough Holds");
        }
    }
    assert!(within >= 40, "generator produced only {within} clean fixtures");
    assert!(
        holds * 10 >= within * 7,
        "only {holds}/{within} clean fixtures certified"
    );
}

#[test]
fn zero_roughness_matches_ideal_convergence() {
    let settings = Settings::default();
    for case in named_cases() {
        for &x in &case.targets {
            let Ok(xp) = case.space.point(x) else { continue };
            for ideal in Ideal::ALL {
                let a = rough_ideal_converges(&case.seq, &case.space, xp, 0.0, ideal, &settings).unwrap();
                let b = ideal_converges(&case.seq, &case.space, xp, ideal, &settings).unwrap();
                assert_eq!(a, b);
            }
        }
    }
}

#[test]
fn verdicts_are_monotone_in_roughness() {
    let settings = Settings::default();
    let rs = [0.0, 0.25, 0.5, 1.0, 2.0, 10.0];
    for case in named_cases() {
        for &x in &case.targets {
            let Ok(xp) = case.space.point(x) else { continue };
            for ideal in Ideal::ALL {
                let outs: Vec<Outcome> = rs
                    .iter()
                    .map(|&r| {
                        rough_ideal_converges(&case.seq, &case.space, xp, r, ideal, &settings)
                            .unwrap()
                            .outcome
                    })
                    .collect();
                for i in 0..outs.len() {
                    for j in i + 1..outs.len() {
                        assert!(
                            !(outs[i].is_holds() && outs[j].is_fails()),
                            "{} x={x} {ideal}: Holds at r={} but Fails at r={}",
                            case.name,
                            rs[i],
                            rs[j]
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn diameter_bound_with_grid_slack() {
    let settings = Settings::default();
    let step = 0.125;
    for case in named_cases() {
        let Some(a) = case.space.constant_self_distance() else {
            continue;
        };
        let grid = Grid::new(-6.0, 14.0, step).unwrap().points();
        let grid: Vec<f64> = grid.into_iter().filter(|&g| case.space.point(g).is_ok()).collect();
        for &r in &case.roughness {
            for ideal in Ideal::ALL {
                let est = estimate_rough_limit_set(&case.seq, &case.space, &grid, r, ideal, &settings).unwrap();
                let pts: Vec<_> = est
                    .accepted()
                    .into_iter()
                    .map(|g| case.space.point(g).unwrap())
                    .collect();
                let diam = case.space.diam(&pts);
                assert!(
                    diam <= 2.0 * r + 2.0 * a + 2.0 * step + 1e-9,
                    "{} r={r}: diam {diam}",
                    case.name
                );
                let v = check_diameter_bound(&est, &case.space).unwrap();
                assert!(!v.outcome.is_fails(), "{} r={r}", case.name);
                assert!(v.replay());
            }
        }
    }
}

#[test]
fn cluster_points_fit_inside_rough_limit_sets() {
    let settings = Settings::default();
    for case in named_cases() {
        let Some(a) = case.space.constant_self_distance() else {
            continue;
        };
        let grid = Grid::new(-2.0, 4.0, 0.25).unwrap().points();
        let grid: Vec<f64> = grid.into_iter().filter(|&g| case.space.point(g).is_ok()).collect();
        for ideal in Ideal::ALL {
            let clusters = cluster_points(&case.seq, &case.space, &grid, ideal, &settings).unwrap();
            for &r in &case.roughness {
                let est = estimate_rough_limit_set(&case.seq, &case.space, &grid, r, ideal, &settings).unwrap();
                for c in clusters.accepted() {
                    let v = check_cluster_ball(
                        &case.seq,
                        &case.space,
                        case.space.point(c).unwrap(),
                        &est,
                        ideal,
                        &settings,
                    )
                    .unwrap();
                    assert!(!v.outcome.is_fails(), "{} c={c} r={r}", case.name);
                    // Every accepted rough limit lies within r + a of c.
                    for y in est.accepted() {
                        let d = case.space.p_raw(c, y);
                        assert!(d <= r + a + 1e-9, "{} c={c} y={y} r={r}", case.name);
                    }
                }
                if r == 0.0 {
                    for y in est.accepted() {
                        assert_ne!(
                            clusters.classification_of(y),
                            Some(Classification::Rejected),
                            "{}",
                            case.name
                        );
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constant_sequences_have_ball_shaped_limit_sets(
        c in -8i32..8, r4 in 0u32..12, shift in 1u32..4,
    ) {
        let space = Space::shifted(shift as f64 * 0.5).unwrap();
        let c = c as f64 * 0.25;
        let r = r4 as f64 * 0.25;
        let seq = PiecewiseSequence::constant(c).unwrap();
        let grid = Grid::new(-6.0, 6.0, 0.25).unwrap().points();
        let est = estimate_rough_limit_set(&seq, &space, &grid, r, Ideal::Fin, &Settings::default()).unwrap();
        for e in &est.entries {
            let expected = if (e.candidate - c).abs() <= r { Classification::Accepted } else { Classification::Rejected };
            prop_assert_eq!(e.classification, expected, "candidate {}", e.candidate);
        }
    }
}
