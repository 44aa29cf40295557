#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::SeedableRng;
use rough_ideal::fixtures::{self, RandomFixture};
use rough_ideal::sequences::{Deviation, Limit, Monotone};
use rough_ideal::{PiecewiseSequence, Space};

/// Named (space, sequence, target grid, roughness list) fixtures.
pub struct Case {
    pub name: &'static str,
    pub space: Space,
    pub seq: PiecewiseSequence,
    pub targets: Vec<f64>,
    pub roughness: Vec<f64>,
}

pub fn named_cases() -> Vec<Case> {
    let quarter = |lo: i32, hi: i32| (lo..=hi).map(|i| i as f64 * 0.25).collect::<Vec<_>>();
    vec![
        Case {
            name: "square-supported/powmax",
            space: Space::pow_max(2.0).unwrap(),
            seq: fixtures::square_supported(),
            targets: vec![0.0, 1.0, 2.0, 3.0, 0.5],
            roughness: vec![0.0, 1.0, 10.0],
        },
        Case {
            name: "alternating/shifted",
            space: Space::shifted(1.0).unwrap(),
            seq: fixtures::alternating(0.0, 1.0),
            targets: quarter(-4, 8),
            roughness: vec![0.0, 0.5, 1.0],
        },
        Case {
            name: "reciprocal/max",
            space: Space::max_nonneg(),
            seq: fixtures::reciprocal(),
            targets: quarter(0, 8),
            roughness: vec![0.0, 0.25, 1.0],
        },
        Case {
            name: "identity/shifted",
            space: Space::shifted(0.5).unwrap(),
            seq: fixtures::identity_ranks(),
            targets: quarter(-4, 8),
            roughness: vec![0.0, 1.0, 100.0],
        },
        Case {
            name: "eventually-constant/shifted",
            space: Space::shifted(2.0).unwrap(),
            seq: fixtures::eventually_constant(&[9.0, -4.0, 2.5], 1.0),
            targets: quarter(-4, 12),
            roughness: vec![0.0, 0.5, 2.0],
        },
        Case {
            name: "half-plus-reciprocal/max",
            space: Space::max_nonneg(),
            seq: fixtures::indexed_on_naturals("0.5 + 1/k", Monotone::Decreasing, Limit::Finite(0.5)),
            targets: quarter(0, 8),
            roughness: vec![0.0, 0.5, 1.0],
        },
        Case {
            name: "rising-to-one/shifted",
            space: Space::shifted(1.0).unwrap(),
            seq: fixtures::indexed_on_naturals("1 - 1/k", Monotone::Increasing, Limit::Finite(1.0)),
            targets: quarter(-4, 8),
            roughness: vec![0.0, 0.5, 1.0],
        },
    ]
}

pub fn random_fixtures(n: usize, seed: u64) -> Vec<RandomFixture> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|_| fixtures::random_rough_fixture(&mut rng)).collect()
}

/// Pointwise view of a deviation level set on `[1, window]` and on a block
/// of far indices starting at `10^8`.
pub struct PointwiseView {
    pub window: u64,
    pub total: u64,
    pub upper_half: u64,
    pub far_probes: u64,
    pub far_hits: u64,
}

pub const FAR_START: u64 = 100_000_000;
pub const FAR_LEN: u64 = 20_000;

/// Deviations on `[1, window]` and on the far block, computed once so that
/// many thresholds can be checked cheaply. Indices outside the domain are
/// stored as `NaN`, which never meets a threshold.
pub struct DeviationProfile {
    window: u64,
    near: Vec<f64>,
    far: Vec<f64>,
}

impl DeviationProfile {
    pub fn new(seq: &PiecewiseSequence, space: &Space, dev: Deviation, window: u64) -> Self {
        let eval = |n: u64| {
            if seq.domain().is_none_or(|d| d.contains(n)) {
                seq.value_at(n).map_or(f64::NAN, |v| dev.eval(space, v))
            } else {
                f64::NAN
            }
        };
        DeviationProfile {
            window,
            near: (1..=window).map(eval).collect(),
            far: (FAR_START..FAR_START + FAR_LEN).map(eval).collect(),
        }
    }

    pub fn view(&self, t: f64) -> PointwiseView {
        let half = (self.window / 2) as usize;
        let total = self.near.iter().filter(|&&d| d >= t).count() as u64;
        let upper_half = self.near[half..].iter().filter(|&&d| d >= t).count() as u64;
        let far_hits = self.far.iter().filter(|&&d| d >= t).count() as u64;
        PointwiseView {
            window: self.window,
            total,
            upper_half,
            far_probes: FAR_LEN,
            far_hits,
        }
    }
}

pub fn pointwise(seq: &PiecewiseSequence, space: &Space, dev: Deviation, t: f64, window: u64) -> PointwiseView {
    DeviationProfile::new(seq, space, dev, window).view(t)
}
