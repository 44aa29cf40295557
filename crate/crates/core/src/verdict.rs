//! Three-valued verdicts and the certificates that back them.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ideals::Ideal;
use crate::index_sets::{DensityBounds, SetDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Fails,
    Unknown,
}

impl Outcome {
    /// Kleene conjunction.
    pub fn and(self, other: Outcome) -> Outcome {
        match (self, other) {
            (Outcome::Fails, _) | (_, Outcome::Fails) => Outcome::Fails,
            (Outcome::Holds, Outcome::Holds) => Outcome::Holds,
            _ => Outcome::Unknown,
        }
    }

    /// Kleene disjunction.
    pub fn or(self, other: Outcome) -> Outcome {
        match (self, other) {
            (Outcome::Holds, _) | (_, Outcome::Holds) => Outcome::Holds,
            (Outcome::Fails, Outcome::Fails) => Outcome::Fails,
            _ => Outcome::Unknown,
        }
    }

    pub fn is_holds(self) -> bool {
        self == Outcome::Holds
    }

    pub fn is_fails(self) -> bool {
        self == Outcome::Fails
    }

    pub fn is_unknown(self) -> bool {
        self == Outcome::Unknown
    }
}

impl std::ops::Not for Outcome {
    type Output = Outcome;
    fn not(self) -> Outcome {
        match self {
            Outcome::Holds => Outcome::Fails,
            Outcome::Fails => Outcome::Holds,
            Outcome::Unknown => Outcome::Unknown,
        }
    }
}

impl From<bool> for Outcome {
    fn from(b: bool) -> Self {
        if b {
            Outcome::Holds
        } else {
            Outcome::Fails
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
            Outcome::Unknown => "unknown",
        })
    }
}

/// What a [`MembershipLink`] asserts about its set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Query {
    InIdeal(Ideal),
    InFilter(Ideal),
    Finite,
}

/// One recorded membership decision: `query(set)` evaluated to `outcome`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MembershipLink {
    pub role: String,
    pub query: Query,
    pub set: SetDescriptor,
    pub outcome: Outcome,
}

impl MembershipLink {
    pub fn evaluate(role: impl Into<String>, query: Query, set: SetDescriptor) -> Self {
        let outcome = match &query {
            Query::InIdeal(i) => i.in_ideal(&set).outcome,
            Query::InFilter(i) => i.in_filter(&set).outcome,
            Query::Finite => set.prove_finite().outcome,
        };
        MembershipLink {
            role: role.into(),
            query,
            set,
            outcome,
        }
    }

    /// Re-runs the query and checks it still produces the recorded outcome.
    pub fn replay(&self) -> bool {
        let again = MembershipLink::evaluate(self.role.clone(), self.query.clone(), self.set.clone());
        again.outcome == self.outcome
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Counterexample {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon: Option<f64>,
    /// Sample indices from the violating set, with the deviation at each.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<(u64, f64)>,
    pub note: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub link: Option<MembershipLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WindowCount {
    pub label: String,
    pub count: u64,
    /// Members found in the upper half of the window.
    pub upper_half: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Certificate {
    /// Nothing to check (empty sample, empty grid).
    Vacuous {
        note: String,
    },
    /// Every tuple drawn from a finite sample was checked.
    Exhaustive {
        checked: u64,
        note: String,
    },
    /// A structural finiteness argument about `set`.
    Structural {
        set: SetDescriptor,
        reason: String,
    },
    Density {
        set: SetDescriptor,
        bounds: DensityBounds,
    },
    /// A numeric comparison `lhs <= rhs + slack`.
    Inequality {
        label: String,
        lhs: f64,
        rhs: f64,
        slack: f64,
    },
    MembershipChain {
        links: Vec<MembershipLink>,
        #[serde(default, skip_serializing_if = "String::is_empty")]
        note: String,
    },
    Counterexample(Counterexample),
    WindowEvidence {
        window: u64,
        counts: Vec<WindowCount>,
        note: String,
    },
    /// A verdict assembled from named sub-verdicts.
    Composite {
        parts: Vec<(String, Verdict)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub certificate: Certificate,
}

impl Verdict {
    pub fn new(outcome: Outcome, certificate: Certificate) -> Self {
        Verdict { outcome, certificate }
    }

    pub fn vacuous(note: impl Into<String>) -> Self {
        Verdict::new(Outcome::Holds, Certificate::Vacuous { note: note.into() })
    }

    pub fn inequality(label: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        Verdict::new(
            Outcome::from(lhs <= rhs + slack),
            Certificate::Inequality {
                label: label.into(),
                lhs,
                rhs,
                slack,
            },
        )
    }

    pub fn composite(outcome: Outcome, parts: Vec<(String, Verdict)>) -> Self {
        Verdict::new(outcome, Certificate::Composite { parts })
    }

    /// Looks up a named part of a composite verdict.
    pub fn part(&self, name: &str) -> Option<&Verdict> {
        match &self.certificate {
            Certificate::Composite { parts } => parts.iter().find(|(n, _)| n == name).map(|(_, v)| v),
            _ => None,
        }
    }

    /// Re-evaluates everything the certificate records and checks that the
    /// recorded outcomes are reproduced.
    pub fn replay(&self) -> bool {
        match &self.certificate {
            Certificate::Vacuous { .. } | Certificate::Exhaustive { .. } | Certificate::WindowEvidence { .. } => true,
            Certificate::Structural { set, .. } => set.prove_finite().outcome == self.outcome,
            Certificate::Density { set, bounds } => &set.density_bounds() == bounds,
            Certificate::Inequality { lhs, rhs, slack, .. } => Outcome::from(*lhs <= *rhs + *slack) == self.outcome,
            Certificate::MembershipChain { links, .. } => links.iter().all(MembershipLink::replay),
            Certificate::Counterexample(c) => c.link.as_ref().is_none_or(MembershipLink::replay),
            Certificate::Composite { parts } => parts.iter().all(|(_, v)| v.replay()),
        }
    }

    /// Short stable identifier derived from the serialized verdict.
    pub fn id(&self) -> String {
        let bytes = serde_json::to_vec(self).unwrap_or_default();
        let digest = Sha256::digest(&bytes);
        digest[..6].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Outcome::*;

    #[test]
    fn kleene_tables() {
        assert_eq!(Holds.and(Unknown), Unknown);
        assert_eq!(Fails.and(Unknown), Fails);
        assert_eq!(Holds.or(Unknown), Holds);
        assert_eq!(Fails.or(Unknown), Unknown);
        assert_eq!(!Unknown, Unknown);
        assert_eq!(Outcome::from(true), Holds);
    }

    #[test]
    fn inequality_replays() {
        let v = Verdict::inequality("d", 2.0, 4.0, 0.0);
        assert_eq!(v.outcome, Holds);
        assert!(v.replay());
        let tampered = Verdict::new(Fails, v.certificate.clone());
        assert!(!tampered.replay());
    }

    #[test]
    fn ids_are_stable() {
        let v = Verdict::vacuous("empty");
        assert_eq!(v.id(), v.clone().id());
        assert_eq!(v.id().len(), 12);
    }
}
