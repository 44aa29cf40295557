//! Ideals on the positive integers as three-valued membership oracles.
//!
//! Only two ideals are offered: `Fin` (finite sets) and `DensityZero` (sets of
//! natural density zero). Both are admissible and non-trivial.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::index_sets::SetDescriptor;
use crate::verdict::{Certificate, Outcome, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Ideal {
    Fin,
    DensityZero,
}

impl Ideal {
    pub const ALL: [Ideal; 2] = [Ideal::Fin, Ideal::DensityZero];

    pub fn in_ideal(&self, s: &SetDescriptor) -> Verdict {
        match self {
            Ideal::Fin => s.prove_finite(),
            Ideal::DensityZero => {
                let bounds = s.density_bounds();
                let zero = Ratio::from_integer(0);
                let outcome = if bounds.upper == zero {
                    Outcome::Holds
                } else if bounds.lower > zero {
                    Outcome::Fails
                } else {
                    Outcome::Unknown
                };
                Verdict::new(outcome, Certificate::Density { set: s.clone(), bounds })
            }
        }
    }

    /// Membership in the associated filter `{A : N \ A in I}`.
    pub fn in_filter(&self, s: &SetDescriptor) -> Verdict {
        self.in_ideal(&s.clone().complement())
    }

    /// Checks that sampled singletons are members and that N is not.
    pub fn is_admissible(&self) -> bool {
        let singletons_in = [1u64, 2, 10, 1_000_000].iter().all(|&n| {
            SetDescriptor::finite([n])
                .map(|s| self.in_ideal(&s).outcome == Outcome::Holds)
                .unwrap_or(false)
        });
        let naturals_out = self.in_ideal(&SetDescriptor::naturals()).outcome == Outcome::Fails;
        singletons_in && naturals_out
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ideal::Fin => "Fin",
            Ideal::DensityZero => "DensityZero",
        })
    }
}
