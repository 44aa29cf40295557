//! Ready-made sequences used by tests, examples and the CLI fixtures.

use crate::index_sets::SetDescriptor;
use crate::sequences::{Limit, Monotone, Piece, PiecewiseSequence, PointRule};

fn build(pieces: Vec<Piece>) -> PiecewiseSequence {
    PiecewiseSequence::new(pieces).expect("built-in fixture is a valid partition")
}

fn squares() -> SetDescriptor {
    SetDescriptor::power_image(2).expect("exponent 2 is valid")
}

/// `x_n = k` when `n = k²`, and `0` otherwise.
pub fn square_supported() -> PiecewiseSequence {
    build(vec![
        Piece::new(
            squares(),
            PointRule::indexed("k", Monotone::Increasing, Limit::PosInfinity).unwrap(),
        ),
        Piece::new(squares().complement(), PointRule::constant(0.0).unwrap()),
    ])
}

/// `x_n = 1/n`.
pub fn reciprocal() -> PiecewiseSequence {
    indexed_on_naturals("1/k", Monotone::Decreasing, Limit::Finite(0.0))
}

/// `x_n = n`.
pub fn identity_ranks() -> PiecewiseSequence {
    indexed_on_naturals("k", Monotone::Increasing, Limit::PosInfinity)
}

/// A single rule over all of ℕ (rank equals index).
pub fn indexed_on_naturals(src: &str, monotone: Monotone, limit: Limit) -> PiecewiseSequence {
    build(vec![Piece::new(
        SetDescriptor::naturals(),
        PointRule::indexed(src, monotone, limit).expect("valid built-in rule"),
    )])
}

/// `odd` at odd indices and `even` at even ones.
pub fn alternating(odd: f64, even: f64) -> PiecewiseSequence {
    build(vec![
        Piece::new(SetDescriptor::ap(1, 2).unwrap(), PointRule::constant(odd).unwrap()),
        Piece::new(SetDescriptor::ap(2, 2).unwrap(), PointRule::constant(even).unwrap()),
    ])
}

/// Arbitrary values on `1..=head.len()`, then the constant `tail`.
pub fn eventually_constant(head: &[f64], tail: f64) -> PiecewiseSequence {
    let m = head.len() as u64;
    let mut pieces: Vec<Piece> = head
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            Piece::new(
                SetDescriptor::finite([i as u64 + 1]).unwrap(),
                PointRule::constant(v).unwrap(),
            )
        })
        .collect();
    pieces.push(Piece::new(
        SetDescriptor::ap(m + 1, 1).unwrap(),
        PointRule::constant(tail).unwrap(),
    ));
    build(pieces)
}

/// Descriptors exercising every node kind, used by counting and density
/// cross-checks.
pub fn descriptor_corpus() -> Vec<SetDescriptor> {
    let ap = |f, s| SetDescriptor::ap(f, s).unwrap();
    let pw = |m| SetDescriptor::power_image(m).unwrap();
    let fin = |v: &[u64]| SetDescriptor::finite(v.iter().copied()).unwrap();
    vec![
        SetDescriptor::empty(),
        SetDescriptor::naturals(),
        fin(&[3, 5, 1000]),
        fin(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]),
        ap(1, 2),
        ap(2, 2),
        ap(5, 4),
        ap(7, 1),
        ap(3, 10),
        pw(2),
        pw(3),
        pw(5),
        SetDescriptor::tail(pw(2), 2).unwrap(),
        SetDescriptor::tail(ap(1, 3), 100).unwrap(),
        SetDescriptor::tail(ap(2, 2).union(pw(3)), 17).unwrap(),
        pw(2).complement(),
        fin(&[1, 2]).complement(),
        pw(2).union(ap(1, 2)),
        ap(1, 2).union(ap(1, 3)),
        ap(2, 6).union(ap(3, 10)).union(fin(&[1, 4])),
        pw(2).intersect(ap(2, 2)),
        ap(1, 2).intersect(ap(1, 3)),
        ap(2, 4).intersect(ap(3, 6)),
        ap(1, 3).intersect(pw(2).complement()),
        pw(2).union(pw(3)).complement(),
        ap(1, 2).union(pw(2)).complement().intersect(ap(1, 5).complement()),
        SetDescriptor::initial_segment(50),
        SetDescriptor::initial_segment(50).intersect(pw(2)),
        ap(1, 1009).union(ap(1, 1013)),
        SetDescriptor::tail(pw(2).complement(), 5).unwrap().intersect(ap(4, 7)),
    ]
}

/// A randomly generated sequence together with a target and roughness.
#[derive(Debug, Clone)]
pub struct RandomFixture {
    pub space: crate::spaces::Space,
    pub seq: PiecewiseSequence,
    pub x: f64,
    pub r: f64,
    /// True when the sequence was built to stay within `r` of `x` from some
    /// index on.
    pub eventually_within: bool,
}

/// Random piecewise sequences that, except for an optional defect piece,
/// eventually stay within deviation `r` of `x`.
///
/// Indices `1..=m` carry arbitrary constants; beyond `m` the indices are split
/// into residue classes mod `d`, each carrying a constant or a monotone rule
/// whose values and limit keep the deviation at most `r`. With probability
/// about one third a defect replaces one class (or the squares) by values far
/// from `x`.
pub fn random_rough_fixture(rng: &mut impl rand::Rng) -> RandomFixture {
    use crate::spaces::Space;
    let (space, x) = match rng.gen_range(0..3) {
        0 => (
            Space::shifted([0.5, 1.0, 2.0][rng.gen_range(0..3)]).unwrap(),
            rng.gen_range(-8..=8) as f64 * 0.25,
        ),
        1 => (Space::max_nonneg(), rng.gen_range(0..=8) as f64 * 0.25),
        _ => (Space::pow_max(2.0).unwrap(), rng.gen_range(0..=8) as f64 * 0.25),
    };
    let r = [0.0, 0.5, 1.0, 2.0][rng.gen_range(0..4)];
    // Values v with deviation at most r from x (exactly representable).
    let within = |rng: &mut dyn rand::RngCore| -> f64 {
        let t = (rand::Rng::gen_range(rng, 0..=4) as f64) / 4.0;
        match space.kind() {
            crate::spaces::SpaceKind::ShiftedMetric { .. } => x + (2.0 * t - 1.0) * r,
            crate::spaces::SpaceKind::MaxOnNonnegReals => t * (x + r),
            _ => {
                // a^max(v, x) - a^x <= r  <=>  v <= log2(2^x + r)
                let hi = (2f64.powf(x) + r).log2();
                (t * hi * 1e6).floor() / 1e6
            }
        }
    };
    let far = x + r + 3.0;
    let m = rng.gen_range(0..20u64);
    let mut pieces: Vec<Piece> = (1..=m)
        .map(|n| {
            let v = rng.gen_range(0..40) as f64 * 0.5;
            Piece::new(SetDescriptor::finite([n]).unwrap(), PointRule::constant(v).unwrap())
        })
        .collect();
    let d = rng.gen_range(1..=3u64);
    let defect = rng.gen_range(0..3) == 0;
    let defect_on_squares = defect && rng.gen_bool(0.5);
    let defect_class = if defect && !defect_on_squares {
        Some(rng.gen_range(0..d))
    } else {
        None
    };
    let squares = SetDescriptor::power_image(2).unwrap();
    for j in 0..d {
        let mut set = SetDescriptor::ap(m + 1 + j, d).unwrap();
        if defect_on_squares {
            set = set.intersect(squares.clone().complement());
        }
        let rule = if defect_class == Some(j) {
            PointRule::constant(far).unwrap()
        } else if rng.gen_bool(0.5) {
            PointRule::constant(within(rng)).unwrap()
        } else {
            let limit = within(rng);
            let scale = rng.gen_range(1..=4) as f64;
            let below = limit - scale;
            let floor_ok = space.carrier().contains(below);
            if rng.gen_bool(0.5) && floor_ok {
                let src = format!("{limit} - {scale}/k");
                PointRule::indexed(&src, Monotone::Increasing, Limit::Finite(limit)).unwrap()
            } else {
                let src = format!("{limit} + {scale}/k");
                PointRule::indexed(&src, Monotone::Decreasing, Limit::Finite(limit)).unwrap()
            }
        };
        pieces.push(Piece::new(set, rule));
    }
    if defect_on_squares {
        let tail_squares = squares.intersect(SetDescriptor::ap(m + 1, 1).unwrap());
        pieces.push(Piece::new(tail_squares, PointRule::constant(far).unwrap()));
    }
    RandomFixture {
        space,
        seq: build(pieces),
        x,
        r,
        eventually_within: !defect,
    }
}
