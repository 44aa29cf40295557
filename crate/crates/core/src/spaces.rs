//! Partial metric spaces over scalar carriers.
//!
//! A partial metric `p` satisfies, for all `x, y, z`:
//!
//! * p1: `0 <= p(x,x) <= p(x,y)`
//! * p2: `x = y` iff `p(x,x) = p(x,y) = p(y,y)`
//! * p3: `p(x,y) = p(y,x)`
//! * p4: `p(x,y) <= p(x,z) + p(z,y) - p(z,z)`
//!
//! Self-distances need not vanish, which is what makes balls and diameters
//! behave differently from the metric case.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, Var};
use crate::verdict::{Certificate, Counterexample, Outcome, Verdict};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("point {0} is not finite")]
    NonFinite(f64),
    #[error("point {value} lies outside the {carrier} carrier")]
    Carrier { value: f64, carrier: Carrier },
    #[error("negative radius {0}")]
    NegativeRadius(f64),
    #[error("negative tolerance {0}")]
    NegativeTolerance(f64),
    #[error("invalid space parameter: {0}")]
    Parameter(String),
    #[error("custom metric must only use x and y: {0}")]
    Expr(#[from] crate::expr::ExprError),
}

/// A carrier element. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Point(f64);

impl Point {
    pub fn new(value: f64) -> Result<Self, SpaceError> {
        if value.is_finite() {
            Ok(Point(value))
        } else {
            Err(SpaceError::NonFinite(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Point {
    type Error = SpaceError;
    fn try_from(v: f64) -> Result<Self, Self::Error> {
        Point::new(v)
    }
}

impl From<Point> for f64 {
    fn from(p: Point) -> f64 {
        p.0
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Carrier {
    #[default]
    Reals,
    NonnegReals,
}

impl Carrier {
    pub fn contains(self, v: f64) -> bool {
        v.is_finite()
            && match self {
                Carrier::Reals => true,
                Carrier::NonnegReals => v >= 0.0,
            }
    }
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Carrier::Reals => "reals",
            Carrier::NonnegReals => "nonnegative-reals",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SpaceKind {
    /// `p(x,y) = a^max{x,y}` on the nonnegative reals, `a > 1`.
    #[serde(rename = "powmax")]
    PowMax { a: f64 },
    /// `p(x,y) = |x - y| + a`; constant self-distance `a`.
    #[serde(rename = "shifted")]
    ShiftedMetric { a: f64 },
    /// `p(x,y) = max{x,y}` on the nonnegative reals.
    #[serde(rename = "maxNonneg")]
    MaxOnNonnegReals,
    /// User expression over `x` and `y`. Axioms are only sample-checked.
    #[serde(rename = "custom", rename_all = "camelCase")]
    Custom {
        expr: Expr,
        #[serde(default)]
        carrier: Carrier,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        constant_self_distance: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceKind", into = "SpaceKind")]
pub struct Space {
    kind: SpaceKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axiom {
    P1,
    P2,
    P3,
    P4,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::P1 => "p1",
            Axiom::P2 => "p2",
            Axiom::P3 => "p3",
            Axiom::P4 => "p4",
        })
    }
}

/// Default tolerance for floating-point axiom and self-distance comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

impl TryFrom<SpaceKind> for Space {
    type Error = SpaceError;
    fn try_from(kind: SpaceKind) -> Result<Self, Self::Error> {
        Space::new(kind)
    }
}

impl From<Space> for SpaceKind {
    fn from(s: Space) -> SpaceKind {
        s.kind
    }
}

impl Space {
    pub fn new(kind: SpaceKind) -> Result<Self, SpaceError> {
        match &kind {
            SpaceKind::PowMax { a } if !(a.is_finite() && *a > 1.0) => {
                return Err(SpaceError::Parameter(format!("powmax needs a > 1, got {a}")));
            }
            SpaceKind::ShiftedMetric { a } if !(a.is_finite() && *a >= 0.0) => {
                return Err(SpaceError::Parameter(format!("shifted needs a >= 0, got {a}")));
            }
            SpaceKind::Custom {
                expr,
                carrier,
                constant_self_distance,
            } => {
                if expr.uses(Var::K) {
                    return Err(SpaceError::Parameter(format!(
                        "custom metric `{expr}` may only use x and y"
                    )));
                }
                if let Some(a) = constant_self_distance {
                    let probe: &[f64] = match carrier {
                        Carrier::Reals => &[-3.0, -1.0, 0.0, 0.5, 2.0, 7.0],
                        Carrier::NonnegReals => &[0.0, 0.5, 1.0, 2.0, 7.0],
                    };
                    for &x in probe {
                        let d = expr.eval_xy(x, x);
                        if (d - a).abs() > DEFAULT_TOL {
                            return Err(SpaceError::Parameter(format!(
                                "declared self-distance {a} but p({x},{x}) = {d}"
                            )));
                        }
                    }
                }
            }
            _ => {}
        }
        Ok(Space { kind })
    }

    pub fn pow_max(a: f64) -> Result<Self, SpaceError> {
        Space::new(SpaceKind::PowMax { a })
    }

    pub fn shifted(a: f64) -> Result<Self, SpaceError> {
        Space::new(SpaceKind::ShiftedMetric { a })
    }

    pub fn max_nonneg() -> Self {
        Space {
            kind: SpaceKind::MaxOnNonnegReals,
        }
    }

    pub fn custom(source: &str, carrier: Carrier) -> Result<Self, SpaceError> {
        let expr = Expr::parse_with(source, &[Var::X, Var::Y])?;
        Space::new(SpaceKind::Custom {
            expr,
            carrier,
            constant_self_distance: None,
        })
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn carrier(&self) -> Carrier {
        match &self.kind {
            SpaceKind::PowMax { .. } | SpaceKind::MaxOnNonnegReals => Carrier::NonnegReals,
            SpaceKind::ShiftedMetric { .. } => Carrier::Reals,
            SpaceKind::Custom { carrier, .. } => *carrier,
        }
    }

    /// `Some(a)` when `p(x,x) = a` for every carrier element.
    pub fn constant_self_distance(&self) -> Option<f64> {
        match &self.kind {
            SpaceKind::ShiftedMetric { a } => Some(*a),
            SpaceKind::Custom {
                constant_self_distance, ..
            } => *constant_self_distance,
            _ => None,
        }
    }

    /// Whether `p(y, x)` grows without bound as `|y| -> inf` for fixed `x`.
    /// `None` for custom expressions.
    pub fn unbounded_at_infinity(&self) -> Option<bool> {
        match &self.kind {
            SpaceKind::Custom { .. } => None,
            _ => Some(true),
        }
    }

    /// Limit of the self-distance `p(y, y)` as `|y| -> inf`, if known.
    pub fn self_distance_at_infinity(&self) -> Option<f64> {
        match &self.kind {
            SpaceKind::PowMax { .. } | SpaceKind::MaxOnNonnegReals => Some(f64::INFINITY),
            SpaceKind::ShiftedMetric { a } => Some(*a),
            SpaceKind::Custom {
                constant_self_distance, ..
            } => *constant_self_distance,
        }
    }

    /// Builds a point and checks it against this space's carrier.
    pub fn point(&self, value: f64) -> Result<Point, SpaceError> {
        let p = Point::new(value)?;
        self.check_carrier(p)?;
        Ok(p)
    }

    pub fn check_carrier(&self, p: Point) -> Result<(), SpaceError> {
        let carrier = self.carrier();
        if carrier.contains(p.0) {
            Ok(())
        } else {
            Err(SpaceError::Carrier { value: p.0, carrier })
        }
    }

    /// Unchecked evaluation on raw scalars; may return non-finite values for
    /// custom expressions or overflowing inputs.
    pub fn p_raw(&self, x: f64, y: f64) -> f64 {
        match &self.kind {
            SpaceKind::PowMax { a } => a.powf(x.max(y)),
            SpaceKind::ShiftedMetric { a } => (x - y).abs() + a,
            SpaceKind::MaxOnNonnegReals => x.max(y),
            SpaceKind::Custom { expr, .. } => expr.eval_xy(x, y),
        }
    }

    pub fn eval_p(&self, x: Point, y: Point) -> Result<f64, SpaceError> {
        self.check_carrier(x)?;
        self.check_carrier(y)?;
        Ok(self.p_raw(x.0, y.0))
    }

    pub fn in_closed_ball(&self, center: Point, r: f64, y: Point) -> Result<bool, SpaceError> {
        if !(r >= 0.0) {
            return Err(SpaceError::NegativeRadius(r));
        }
        Ok(self.eval_p(center, y)? <= self.eval_p(center, center)? + r)
    }

    pub fn in_open_ball(&self, center: Point, r: f64, y: Point) -> Result<bool, SpaceError> {
        if !(r >= 0.0) {
            return Err(SpaceError::NegativeRadius(r));
        }
        Ok(self.eval_p(center, y)? < self.eval_p(center, center)? + r)
    }

    /// `sup { p(x,y) : x, y in pts }`, with the empty set having diameter 0.
    pub fn diam(&self, pts: &[Point]) -> f64 {
        let mut best = 0.0_f64;
        for (i, x) in pts.iter().enumerate() {
            for y in &pts[i..] {
                best = best.max(self.p_raw(x.0, y.0));
            }
        }
        best
    }

    /// Checks p1-p4 on every pair and triple drawn from `sample`.
    ///
    /// Comparisons allow `tol` scaled by the magnitude of the compared values.
    pub fn check_axioms(&self, sample: &[Point], tol: f64) -> Result<Verdict, SpaceError> {
        if !(tol >= 0.0) {
            return Err(SpaceError::NegativeTolerance(tol));
        }
        for &p in sample {
            self.check_carrier(p)?;
        }
        if sample.is_empty() {
            return Ok(Verdict::vacuous("empty sample"));
        }
        let le = |lhs: f64, rhs: f64| lhs <= rhs + tol * 1f64.max(lhs.abs()).max(rhs.abs());
        let eq = |a: f64, b: f64| (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs());
        let fail = |axiom: Axiom, pts: &[f64], values: Vec<f64>, what: String| {
            Verdict::new(
                Outcome::Fails,
                Certificate::Counterexample(Counterexample {
                    epsilon: None,
                    witnesses: Vec::new(),
                    note: format!("axiom {axiom} violated at {pts:?}: {what} (values {values:?})"),
                    link: None,
                }),
            )
        };

        for &x in sample {
            for &y in sample {
                let (x, y) = (x.0, y.0);
                let pxx = self.p_raw(x, x);
                let pxy = self.p_raw(x, y);
                if !pxx.is_finite() || !pxy.is_finite() {
                    return Ok(fail(Axiom::P1, &[x, y], vec![pxx, pxy], "non-finite value".into()));
                }
                if !le(0.0, pxx) || !le(pxx, pxy) {
                    return Ok(fail(
                        Axiom::P1,
                        &[x, y],
                        vec![pxx, pxy],
                        format!("need 0 <= p(x,x)={pxx} <= p(x,y)={pxy}"),
                    ));
                }
            }
        }
        for &x in sample {
            for &y in sample {
                let (x, y) = (x.0, y.0);
                let (pxx, pxy, pyy, pyx) = (self.p_raw(x, x), self.p_raw(x, y), self.p_raw(y, y), self.p_raw(y, x));
                if !eq(pxy, pyx) {
                    return Ok(fail(Axiom::P3, &[x, y], vec![pxy, pyx], "p(x,y) != p(y,x)".into()));
                }
                let indistinct = eq(pxx, pxy) && eq(pxy, pyy);
                if indistinct && (x - y).abs() > tol {
                    return Ok(fail(
                        Axiom::P2,
                        &[x, y],
                        vec![pxx, pxy, pyy],
                        "distinct points with equal self and cross distances".into(),
                    ));
                }
            }
        }
        for &x in sample {
            for &y in sample {
                for &z in sample {
                    let (x, y, z) = (x.0, y.0, z.0);
                    let lhs = self.p_raw(x, y);
                    let rhs = self.p_raw(x, z) + self.p_raw(z, y) - self.p_raw(z, z);
                    if !le(lhs, rhs) {
                        return Ok(fail(
                            Axiom::P4,
                            &[x, y, z],
                            vec![lhs, rhs],
                            format!("p(x,y)={lhs} > p(x,z)+p(z,y)-p(z,z)={rhs}"),
                        ));
                    }
                }
            }
        }
        let n = sample.len() as u64;
        Ok(Verdict::new(
            Outcome::Holds,
            Certificate::Exhaustive {
                checked: n * n * n,
                note: format!("p1-p4 on {n} sample points"),
            },
        ))
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SpaceKind::PowMax { a } => write!(f, "p(x,y) = {a}^max(x,y)"),
            SpaceKind::ShiftedMetric { a } => write!(f, "p(x,y) = |x-y| + {a}"),
            SpaceKind::MaxOnNonnegReals => write!(f, "p(x,y) = max(x,y)"),
            SpaceKind::Custom { expr, .. } => write!(f, "p(x,y) = {expr}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(space: &Space, vs: &[f64]) -> Vec<Point> {
        vs.iter().map(|&v| space.point(v).unwrap()).collect()
    }

    #[test]
    fn eval_examples() {
        let pm = Space::pow_max(2.0).unwrap();
        assert_eq!(pm.eval_p(pm.point(1.0).unwrap(), pm.point(2.0).unwrap()).unwrap(), 4.0);
        let sh = Space::shifted(1.0).unwrap();
        let three = sh.point(3.0).unwrap();
        assert_eq!(sh.eval_p(three, three).unwrap(), 1.0);
        let mx = Space::max_nonneg();
        let zero = mx.point(0.0).unwrap();
        assert_eq!(mx.eval_p(zero, zero).unwrap(), 0.0);
    }

    #[test]
    fn carrier_violations() {
        let pm = Space::pow_max(2.0).unwrap();
        assert!(matches!(pm.point(-1.0), Err(SpaceError::Carrier { .. })));
        let neg = Point::new(-1.0).unwrap();
        assert!(pm.eval_p(neg, neg).is_err());
        assert!(Point::new(f64::NAN).is_err());
        assert!(Space::pow_max(1.0).is_err());
        assert!(Space::shifted(-0.5).is_err());
    }

    #[test]
    fn axioms_on_builtins() {
        let pm = Space::pow_max(2.0).unwrap();
        let v = pm.check_axioms(&pts(&pm, &[0.0, 1.0, 2.0, 3.5]), 1e-9).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        let sh = Space::shifted(1.0).unwrap();
        let v = sh.check_axioms(&pts(&sh, &[-2.0, 0.0, 0.3, 5.0]), 1e-9).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        let mx = Space::max_nonneg();
        let v = mx.check_axioms(&pts(&mx, &[0.0, 0.25, 1.0, 9.0]), 1e-9).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
    }

    #[test]
    fn min_violates_p1_at_two_one() {
        let s = Space::custom("min(x,y)", Carrier::Reals).unwrap();
        let v = s.check_axioms(&pts(&s, &[1.0, 2.0]), 1e-9).unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
        match v.certificate {
            Certificate::Counterexample(c) => {
                assert!(c.note.contains("axiom p1"), "{}", c.note);
                assert!(c.note.contains("[2.0, 1.0]"), "{}", c.note);
            }
            other => panic!("unexpected certificate {other:?}"),
        }
    }

    #[test]
    fn empty_sample_is_vacuous() {
        let v = Space::max_nonneg().check_axioms(&[], 1e-9).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        assert!(matches!(v.certificate, Certificate::Vacuous { .. }));
    }

    #[test]
    fn euclidean_metric_fails_nothing_but_constant_fails_p2() {
        let s = Space::custom("abs(x-y)", Carrier::Reals).unwrap();
        assert_eq!(
            s.check_axioms(&pts(&s, &[0.0, 1.0, 3.0]), 1e-9).unwrap().outcome,
            Outcome::Holds
        );
        let s = Space::custom("1", Carrier::Reals).unwrap();
        let v = s.check_axioms(&pts(&s, &[0.0, 1.0]), 1e-9).unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
    }

    #[test]
    fn balls() {
        let sh = Space::shifted(1.0).unwrap();
        let c = sh.point(0.0).unwrap();
        assert!(sh.in_closed_ball(c, 0.0, c).unwrap());
        assert!(sh.in_closed_ball(c, 2.0, sh.point(2.0).unwrap()).unwrap());
        assert!(!sh.in_open_ball(c, 2.0, sh.point(2.0).unwrap()).unwrap());
        let pm = Space::pow_max(2.0).unwrap();
        assert!(!pm
            .in_closed_ball(pm.point(1.0).unwrap(), 1.0, pm.point(2.0).unwrap())
            .unwrap());
        assert!(matches!(
            sh.in_closed_ball(c, -1.0, c),
            Err(SpaceError::NegativeRadius(_))
        ));
    }

    #[test]
    fn diameters() {
        let sh = Space::shifted(1.0).unwrap();
        assert_eq!(sh.diam(&pts(&sh, &[4.0])), 1.0);
        let mx = Space::max_nonneg();
        assert_eq!(mx.diam(&pts(&mx, &[0.0, 1.0, 2.0])), 2.0);
        assert_eq!(mx.diam(&[]), 0.0);
    }

    #[test]
    fn declared_self_distance_is_checked() {
        let good = SpaceKind::Custom {
            expr: Expr::parse("abs(x-y) + 2").unwrap(),
            carrier: Carrier::Reals,
            constant_self_distance: Some(2.0),
        };
        assert_eq!(Space::new(good).unwrap().constant_self_distance(), Some(2.0));
        let bad = SpaceKind::Custom {
            expr: Expr::parse("max(x,y)").unwrap(),
            carrier: Carrier::NonnegReals,
            constant_self_distance: Some(0.0),
        };
        assert!(Space::new(bad).is_err());
    }

    #[test]
    fn json_shapes() {
        let s: Space = serde_json::from_str(r#"{"kind":"powmax","a":2.0}"#).unwrap();
        assert_eq!(s, Space::pow_max(2.0).unwrap());
        let s: Space = serde_json::from_str(r#"{"kind":"maxNonneg"}"#).unwrap();
        assert_eq!(s.carrier(), Carrier::NonnegReals);
        let s: Space = serde_json::from_str(r#"{"kind":"custom","expr":"abs(x-y)","carrier":"reals"}"#).unwrap();
        assert_eq!(s.constant_self_distance(), None);
        assert!(serde_json::from_str::<Space>(r#"{"kind":"powmax","a":0.5}"#).is_err());
    }
}
