//! Piecewise-symbolic sequences over the positive integers.
//!
//! A sequence is a partition of ℕ into [`SetDescriptor`]s, each carrying a
//! [`PointRule`]. A rule is either a constant point or a monotone expression
//! in the rank `k` of `n` inside its piece. For instance the sequence that is
//! `k` at `n = k²` and `0` elsewhere is two pieces: squares with rule `k`, and
//! the complement of the squares with the constant `0`.
//!
//! This shape makes level sets such as `{n : |p(x_n, x) - p(x, x)| >= t}`
//! computable as descriptors: a constant piece contributes all or nothing, and
//! a monotone piece contributes a tail or an initial run of ranks, found by
//! binary search.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ExprError, Var};
use crate::index_sets::{IndexSetError, SetDescriptor, DEFAULT_WINDOW_CAP};
use crate::spaces::{Point, Space, SpaceError};

/// Largest rank explored by threshold searches.
pub const RANK_CAP: u64 = 1_000_000_000;
/// Ranks `1..=MONOTONE_SAMPLE` are checked exhaustively for monotonicity.
pub const MONOTONE_SAMPLE: u64 = 1_000;
/// Window over which piece partitions are verified exhaustively.
pub const PARTITION_WINDOW: u64 = 10_000;
/// Default pointwise window for evidence and sampling.
pub const DEFAULT_WINDOW: u64 = 10_000;
/// Allowed gap between a declared limit and the value at [`RANK_CAP`].
pub const LIMIT_TOL: f64 = 1e-6;

/// Rank ranges shorter than this are listed explicitly.
const LIST_LIMIT: u64 = 1_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("index {n} is claimed by {claims} pieces (need exactly one)")]
    Partition { n: u64, claims: usize },
    #[error("pieces do not partition ℕ: {0}")]
    PartitionStructural(String),
    #[error("invalid rule: {0}")]
    Rule(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("value at index {n} is not finite")]
    NonFinite { n: u64 },
    #[error("window {n} exceeds the cap {cap}")]
    WindowCap { n: u64, cap: u64 },
    #[error("negative threshold {0}")]
    NegativeThreshold(f64),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    IndexSet(#[from] IndexSetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Monotone {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LimitRepr", into = "LimitRepr")]
pub enum Limit {
    Finite(f64),
    PosInfinity,
    NegInfinity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum LimitRepr {
    Num(f64),
    Word(String),
}

impl TryFrom<LimitRepr> for Limit {
    type Error = String;
    fn try_from(r: LimitRepr) -> Result<Self, Self::Error> {
        match r {
            LimitRepr::Num(v) if v.is_finite() => Ok(Limit::Finite(v)),
            LimitRepr::Num(v) => Err(format!("limit {v} is not finite; use \"infinity\"")),
            LimitRepr::Word(w) => match w.as_str() {
                "infinity" | "+infinity" => Ok(Limit::PosInfinity),
                "-infinity" => Ok(Limit::NegInfinity),
                _ => Err(format!("unknown limit `{w}`")),
            },
        }
    }
}

impl From<Limit> for LimitRepr {
    fn from(l: Limit) -> Self {
        match l {
            Limit::Finite(v) => LimitRepr::Num(v),
            Limit::PosInfinity => LimitRepr::Word("infinity".into()),
            Limit::NegInfinity => LimitRepr::Word("-infinity".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RuleRepr", into = "RuleRepr")]
pub enum PointRule {
    Constant(Point),
    /// A monotone expression in the piece rank `k`, with declared limit.
    IndexedMonotone {
        expr: Expr,
        monotone: Monotone,
        limit: Limit,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum RuleRepr {
    Const {
        #[serde(rename = "const")]
        value: Point,
    },
    Indexed {
        indexed: Expr,
        monotone: Monotone,
        limit: Limit,
    },
}

impl TryFrom<RuleRepr> for PointRule {
    type Error = SequenceError;
    fn try_from(r: RuleRepr) -> Result<Self, Self::Error> {
        match r {
            RuleRepr::Const { value } => Ok(PointRule::Constant(value)),
            RuleRepr::Indexed {
                indexed,
                monotone,
                limit,
            } => PointRule::from_expr(indexed, monotone, limit),
        }
    }
}

impl From<PointRule> for RuleRepr {
    fn from(r: PointRule) -> Self {
        match r {
            PointRule::Constant(value) => RuleRepr::Const { value },
            PointRule::IndexedMonotone { expr, monotone, limit } => RuleRepr::Indexed {
                indexed: expr,
                monotone,
                limit,
            },
        }
    }
}

fn approx_le(a: f64, b: f64) -> bool {
    a <= b + 1e-12 * 1f64.max(a.abs()).max(b.abs())
}

impl PointRule {
    pub fn constant(v: f64) -> Result<Self, SequenceError> {
        Ok(PointRule::Constant(Point::new(v)?))
    }

    pub fn indexed(source: &str, monotone: Monotone, limit: Limit) -> Result<Self, SequenceError> {
        PointRule::from_expr(Expr::parse_with(source, &[Var::K])?, monotone, limit)
    }

    /// Validates the declared monotonicity on ranks `1..=1000` and the
    /// declared limit against the value at [`RANK_CAP`].
    pub fn from_expr(expr: Expr, monotone: Monotone, limit: Limit) -> Result<Self, SequenceError> {
        if expr.uses(Var::X) || expr.uses(Var::Y) {
            return Err(SequenceError::Rule(format!("`{expr}` may only use the rank k")));
        }
        let values: Vec<f64> = (1..=MONOTONE_SAMPLE).map(|k| expr.eval_k(k as f64)).collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SequenceError::Rule(format!("`{expr}` is not finite at rank {}", i + 1)));
        }
        for (i, w) in values.windows(2).enumerate() {
            let ok = match monotone {
                Monotone::Increasing => approx_le(w[0], w[1]),
                Monotone::Decreasing => approx_le(w[1], w[0]),
            };
            if !ok {
                return Err(SequenceError::Rule(format!(
                    "`{expr}` is not {monotone:?} between ranks {} and {}",
                    i + 1,
                    i + 2
                )));
            }
        }
        let far = expr.eval_k(RANK_CAP as f64);
        let last = values[values.len() - 1];
        match (limit, monotone) {
            (Limit::Finite(l), _) => {
                let side_ok = values.iter().all(|&v| match monotone {
                    Monotone::Increasing => v <= l + LIMIT_TOL,
                    Monotone::Decreasing => v >= l - LIMIT_TOL,
                });
                if !side_ok {
                    return Err(SequenceError::Rule(format!("`{expr}` passes its declared limit {l}")));
                }
                if !((far - l).abs() <= LIMIT_TOL * 1f64.max(l.abs())) {
                    return Err(SequenceError::Rule(format!(
                        "`{expr}` is {far} at rank {RANK_CAP}, inconsistent with limit {l}"
                    )));
                }
            }
            (Limit::PosInfinity, Monotone::Increasing) => {
                if !(far > last) {
                    return Err(SequenceError::Rule(format!("`{expr}` does not diverge upward")));
                }
            }
            (Limit::NegInfinity, Monotone::Decreasing) => {
                if !(far < last) {
                    return Err(SequenceError::Rule(format!("`{expr}` does not diverge downward")));
                }
            }
            _ => return Err(SequenceError::Rule(format!("limit {limit:?} contradicts {monotone:?}"))),
        }
        Ok(PointRule::IndexedMonotone { expr, monotone, limit })
    }

    /// Value at rank `k`; may overflow to infinity for large ranks.
    pub fn eval(&self, k: u64) -> f64 {
        match self {
            PointRule::Constant(p) => p.value(),
            PointRule::IndexedMonotone { expr, .. } => expr.eval_k(k as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piece {
    pub set: SetDescriptor,
    pub rule: PointRule,
}

impl Piece {
    pub fn new(set: SetDescriptor, rule: PointRule) -> Self {
        Piece { set, rule }
    }
}

/// A scalar function of a sequence value whose level sets we compute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Deviation {
    /// `|p(y, x) - p(x, x)|`
    FromTarget(f64),
    /// `p(y, u)`
    Distance(f64),
    /// `p(y, y)`
    SelfDistance,
}

impl Deviation {
    pub fn eval(&self, space: &Space, y: f64) -> f64 {
        match *self {
            Deviation::FromTarget(x) => (space.p_raw(y, x) - space.p_raw(x, x)).abs(),
            Deviation::Distance(u) => space.p_raw(y, u),
            Deviation::SelfDistance => space.p_raw(y, y),
        }
    }

    fn at_infinity(&self, space: &Space) -> Option<f64> {
        match self {
            Deviation::FromTarget(_) | Deviation::Distance(_) => match space.unbounded_at_infinity() {
                Some(true) => Some(f64::INFINITY),
                _ => None,
            },
            Deviation::SelfDistance => space.self_distance_at_infinity(),
        }
    }

    fn at_limit(&self, space: &Space, limit: Limit) -> Option<f64> {
        match limit {
            Limit::Finite(l) => Some(self.eval(space, l)),
            Limit::PosInfinity | Limit::NegInfinity => self.at_infinity(space),
        }
    }
}

/// A level set `{n : dev(x_n) >= t}` (or `> t`) with an exactness flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSet {
    pub set: SetDescriptor,
    /// False when some piece fell back to window enumeration; the set is then
    /// only correct on the window.
    pub exact: bool,
}

/// The part of the violation sets that does not shrink to a finite set.
///
/// For every `eps > 0`, `{n : dev(x_n) >= r + eps}` is contained in `set`
/// together with a finite remainder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EssentialSet {
    pub set: SetDescriptor,
    pub exact: bool,
    /// Pieces whose violations are finite for every `eps > 0`.
    pub finite_pieces: Vec<usize>,
}

/// How `k -> dev(rule(k))` behaves on one piece.
#[derive(Debug, Clone, Copy)]
struct Profile {
    /// Ranks `>= head_end` are monotone.
    head_end: u64,
    increasing: bool,
    /// Limit of the deviation along the piece, when determinable.
    limit: Option<f64>,
    /// Monotone tail found within the exhaustive sample.
    monotone_ok: bool,
    at_cap: f64,
}

fn sample_ranks() -> Vec<u64> {
    let mut ranks: Vec<u64> = (1..=MONOTONE_SAMPLE).collect();
    let mut decade = 1_000u64;
    while decade < RANK_CAP {
        for m in [2, 5, 10] {
            ranks.push(decade * m);
        }
        decade *= 10;
    }
    ranks
}

fn profile(rule: &PointRule, limit: Limit, space: &Space, dev: Deviation) -> Profile {
    let ranks = sample_ranks();
    let g: Vec<f64> = ranks.iter().map(|&k| dev.eval(space, rule.eval(k))).collect();
    let mut dir: Option<bool> = None; // Some(true) = increasing
    let mut start = 0usize;
    for i in (0..g.len() - 1).rev() {
        let (a, b) = (g[i], g[i + 1]);
        let step = if a == b || (a.is_finite() && b.is_finite() && approx_le(a, b) && approx_le(b, a)) {
            None
        } else {
            Some(a < b)
        };
        match (dir, step) {
            (_, None) => {}
            (None, Some(s)) => dir = Some(s),
            (Some(d), Some(s)) if d == s => {}
            _ => {
                start = i + 1;
                break;
            }
        }
    }
    // The monotone run must begin with a pair inside the exhaustive sample.
    let monotone_ok = start + 1 < MONOTONE_SAMPLE as usize && g.iter().all(|v| !v.is_nan());
    Profile {
        head_end: ranks[start],
        increasing: dir.unwrap_or(false),
        limit: dev.at_limit(space, limit),
        monotone_ok,
        at_cap: dev.eval(space, rule.eval(RANK_CAP)),
    }
}

fn holds(v: f64, t: f64, strict: bool) -> bool {
    if strict {
        v > t
    } else {
        v >= t
    }
}

/// Smallest `k` in `[lo, hi]` with `pred(k)`, assuming `pred` is monotone
/// false-then-true and `pred(hi)` holds.
fn first_true(mut lo: u64, mut hi: u64, pred: impl Fn(u64) -> bool) -> u64 {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    hi
}

/// Ranks `[a, b]` of `s` as a descriptor.
fn rank_range(s: &SetDescriptor, a: u64, b: u64) -> Option<SetDescriptor> {
    if a > b {
        return Some(SetDescriptor::Empty);
    }
    if b - a < LIST_LIMIT {
        let v: Option<Vec<u64>> = (a..=b).map(|k| s.nth(k)).collect();
        return Some(SetDescriptor::Finite(v?));
    }
    let upto = s.nth(b)?;
    Some(tail_from(s, a).intersect(SetDescriptor::initial_segment(upto)))
}

fn tail_from(s: &SetDescriptor, k: u64) -> SetDescriptor {
    if k <= 1 {
        s.clone()
    } else {
        SetDescriptor::Tail {
            base: Box::new(s.clone()),
            from_rank: k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SequenceRepr", into = "SequenceRepr")]
pub struct PiecewiseSequence {
    pieces: Vec<Piece>,
    /// When present, only indices in `domain` belong to the sequence. Used
    /// for subsequences, which keep their original indices.
    domain: Option<SetDescriptor>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceRepr {
    pieces: Vec<Piece>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<SetDescriptor>,
}

impl TryFrom<SequenceRepr> for PiecewiseSequence {
    type Error = SequenceError;
    fn try_from(r: SequenceRepr) -> Result<Self, Self::Error> {
        let seq = PiecewiseSequence::new(r.pieces)?;
        Ok(match r.domain {
            Some(d) => seq.restrict(d),
            None => seq,
        })
    }
}

impl From<PiecewiseSequence> for SequenceRepr {
    fn from(s: PiecewiseSequence) -> Self {
        SequenceRepr {
            pieces: s.pieces,
            domain: s.domain,
        }
    }
}

impl PiecewiseSequence {
    /// Builds a sequence, checking that the pieces partition ℕ exhaustively on
    /// `[1, 10^4]` and, via exact densities, that no overlap or gap has
    /// positive density.
    pub fn new(pieces: Vec<Piece>) -> Result<Self, SequenceError> {
        for piece in &pieces {
            piece.set.validate()?;
        }
        for n in 1..=PARTITION_WINDOW {
            let claims = pieces.iter().filter(|p| p.set.contains(n)).count();
            if claims != 1 {
                return Err(SequenceError::Partition { n, claims });
            }
        }
        let zero = num_rational::Ratio::from_integer(0);
        for (i, a) in pieces.iter().enumerate() {
            for b in &pieces[i + 1..] {
                let overlap = a.set.clone().intersect(b.set.clone()).density_bounds();
                if overlap.lower > zero {
                    return Err(SequenceError::PartitionStructural(format!(
                        "{} and {} overlap with positive density",
                        a.set, b.set
                    )));
                }
            }
        }
        let gap = SetDescriptor::union_all(pieces.iter().map(|p| p.set.clone()))
            .complement()
            .density_bounds();
        if gap.lower > zero {
            return Err(SequenceError::PartitionStructural(
                "uncovered indices with positive density".into(),
            ));
        }
        Ok(PiecewiseSequence { pieces, domain: None })
    }

    /// The constant sequence `x_n = c`.
    pub fn constant(c: f64) -> Result<Self, SequenceError> {
        PiecewiseSequence::new(vec![Piece::new(SetDescriptor::naturals(), PointRule::constant(c)?)])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain(&self) -> Option<&SetDescriptor> {
        self.domain.as_ref()
    }

    /// The subsequence indexed by `sub`, keeping original indices.
    pub fn restrict(&self, sub: SetDescriptor) -> Self {
        let domain = match &self.domain {
            Some(d) => d.clone().intersect(sub),
            None => sub,
        };
        PiecewiseSequence {
            pieces: self.pieces.clone(),
            domain: Some(domain),
        }
    }

    /// Raw value at index `n` (possibly non-finite). The rank within the
    /// piece is only computed for indexed rules.
    pub fn value_at(&self, n: u64) -> Option<f64> {
        let piece = self.pieces.iter().find(|p| p.set.contains(n))?;
        match &piece.rule {
            PointRule::Constant(c) => Some(c.value()),
            rule => Some(rule.eval(piece.set.count_in(n, u64::MAX).ok()?)),
        }
    }

    pub fn at(&self, n: u64) -> Result<Point, SequenceError> {
        let v = self.value_at(n).ok_or(SequenceError::Partition { n, claims: 0 })?;
        Point::new(v).map_err(|_| SequenceError::NonFinite { n })
    }

    /// `[x_1, ..., x_n]`.
    pub fn sample(&self, n: u64) -> Result<Vec<Point>, SequenceError> {
        if n > DEFAULT_WINDOW_CAP {
            return Err(SequenceError::WindowCap {
                n,
                cap: DEFAULT_WINDOW_CAP,
            });
        }
        (1..=n).map(|i| self.at(i)).collect()
    }

    /// Checks constants, sampled rule values and finite limits against the
    /// space's carrier.
    pub fn check_carrier(&self, space: &Space) -> Result<(), SequenceError> {
        for piece in &self.pieces {
            match &piece.rule {
                PointRule::Constant(p) => space.check_carrier(*p)?,
                PointRule::IndexedMonotone { limit, .. } => {
                    for k in 1..=MONOTONE_SAMPLE {
                        space.check_carrier(Point::new(piece.rule.eval(k))?)?;
                    }
                    if let Limit::Finite(l) = limit {
                        space.check_carrier(Point::new(*l)?)?;
                    }
                    if *limit == Limit::NegInfinity && space.carrier() != crate::spaces::Carrier::Reals {
                        return Err(SequenceError::Rule("rule diverges below the carrier".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// The common limit of all infinite pieces, when every one declares (or
    /// is) the same finite value.
    pub fn declared_limit(&self) -> Option<f64> {
        let mut out: Option<f64> = None;
        for piece in &self.pieces {
            if piece.set.prove_finite().outcome.is_holds() {
                continue;
            }
            let l = match &piece.rule {
                PointRule::Constant(p) => p.value(),
                PointRule::IndexedMonotone {
                    limit: Limit::Finite(l),
                    ..
                } => *l,
                _ => return None,
            };
            match out {
                None => out = Some(l),
                Some(prev) if (prev - l).abs() <= 1e-12 => {}
                Some(_) => return None,
            }
        }
        out
    }

    /// `{n : |p(x_n, x) - p(x, x)| >= t}` (or `> t` when `strict`).
    pub fn condition_set(&self, space: &Space, x: Point, t: f64, strict: bool) -> Result<ConditionSet, SequenceError> {
        space.check_carrier(x)?;
        self.level_set(space, Deviation::FromTarget(x.value()), t, strict)
    }

    /// `{n : dev(x_n) >= t}` (or `> t`), restricted to the domain if any.
    pub fn level_set(
        &self,
        space: &Space,
        dev: Deviation,
        t: f64,
        strict: bool,
    ) -> Result<ConditionSet, SequenceError> {
        if !(t >= 0.0) {
            return Err(SequenceError::NegativeThreshold(t));
        }
        let mut parts = Vec::new();
        let mut exact = true;
        for piece in &self.pieces {
            let (set, ok) = self.piece_level_set(piece, space, dev, t, strict);
            exact &= ok;
            parts.push(set);
        }
        let mut set = SetDescriptor::union_all(parts);
        if let (Some(d), false) = (&self.domain, set == SetDescriptor::Empty) {
            set = set.intersect(d.clone());
        }
        Ok(ConditionSet { set, exact })
    }

    fn piece_level_set(
        &self,
        piece: &Piece,
        space: &Space,
        dev: Deviation,
        t: f64,
        strict: bool,
    ) -> (SetDescriptor, bool) {
        let pred = |k: u64| holds(dev.eval(space, piece.rule.eval(k)), t, strict);
        let (limit, s) = match &piece.rule {
            PointRule::Constant(c) => {
                let v = dev.eval(space, c.value());
                return if holds(v, t, strict) {
                    (piece.set.clone(), true)
                } else {
                    (SetDescriptor::Empty, true)
                };
            }
            PointRule::IndexedMonotone { limit, .. } => (*limit, &piece.set),
        };
        if let SetDescriptor::Finite(members) = s {
            let hits = members
                .iter()
                .enumerate()
                .filter(|(i, _)| pred(*i as u64 + 1))
                .map(|(_, &n)| n)
                .collect();
            return (SetDescriptor::Finite(hits), true);
        }
        let fallback = || {
            let hits = s
                .members_up_to(DEFAULT_WINDOW)
                .into_iter()
                .enumerate()
                .filter(|(i, _)| pred(*i as u64 + 1))
                .map(|(_, n)| n)
                .collect();
            (SetDescriptor::Finite(hits), false)
        };
        let prof = profile(&piece.rule, limit, space, dev);
        if !prof.monotone_ok {
            return fallback();
        }
        let mut head = Vec::new();
        for k in 1..prof.head_end {
            if pred(k) {
                match s.nth(k) {
                    Some(n) => head.push(n),
                    None => return fallback(),
                }
            }
        }
        let head = SetDescriptor::Finite(head);
        let h = prof.head_end;
        let tail = if prof.increasing {
            if pred(RANK_CAP) {
                Some(tail_from(s, first_true(h, RANK_CAP, pred)))
            } else {
                match prof.limit {
                    Some(l) if l > t => None,
                    Some(_) => Some(SetDescriptor::Empty),
                    None => None,
                }
            }
        } else if !pred(h) {
            Some(SetDescriptor::Empty)
        } else if pred(RANK_CAP) {
            match prof.limit {
                Some(l) if l >= t => Some(tail_from(s, h)),
                _ => None,
            }
        } else {
            let last = first_true(h, RANK_CAP, |k| !pred(k)) - 1;
            rank_range(s, h, last)
        };
        match tail {
            Some(tail) => (SetDescriptor::union_all([head, tail]), true),
            None => fallback(),
        }
    }

    /// Pieces along which `dev` stays above `r` infinitely often, for every
    /// `eps > 0`; see [`EssentialSet`].
    pub fn essential_set(&self, space: &Space, dev: Deviation, r: f64) -> Result<EssentialSet, SequenceError> {
        if !(r >= 0.0) {
            return Err(SequenceError::NegativeThreshold(r));
        }
        let mut parts = Vec::new();
        let mut exact = true;
        let mut finite_pieces = Vec::new();
        for (i, piece) in self.pieces.iter().enumerate() {
            let essential = match &piece.rule {
                PointRule::Constant(c) => Some(dev.eval(space, c.value()) > r),
                PointRule::IndexedMonotone { .. } if matches!(piece.set, SetDescriptor::Finite(_)) => Some(false),
                PointRule::IndexedMonotone { limit, .. } => {
                    let prof = profile(&piece.rule, *limit, space, dev);
                    if !prof.monotone_ok {
                        None
                    } else {
                        match prof.limit {
                            Some(l) => Some(l > r),
                            None if prof.increasing && prof.at_cap > r => Some(true),
                            None if !prof.increasing && prof.at_cap <= r => Some(false),
                            None => None,
                        }
                    }
                }
            };
            match essential {
                Some(true) => parts.push(piece.set.clone()),
                Some(false) => {
                    if !matches!(piece.rule, PointRule::Constant(_)) {
                        finite_pieces.push(i);
                    }
                }
                None => {
                    exact = false;
                    parts.push(piece.set.clone());
                }
            }
        }
        let mut set = SetDescriptor::union_all(parts);
        if let (Some(d), false) = (&self.domain, set == SetDescriptor::Empty) {
            set = set.intersect(d.clone());
        }
        Ok(EssentialSet {
            set,
            exact,
            finite_pieces,
        })
    }

    /// Counts indices in `[1, window]` (within the domain) whose deviation
    /// satisfies the threshold, pointwise. Returns `(count, count in upper half)`.
    pub fn window_count(&self, space: &Space, dev: Deviation, t: f64, strict: bool, window: u64) -> (u64, u64) {
        let mut total = 0;
        let mut upper = 0;
        for n in 1..=window {
            if let Some(d) = &self.domain {
                if !d.contains(n) {
                    continue;
                }
            }
            let Some(v) = self.value_at(n) else { continue };
            if holds(dev.eval(space, v), t, strict) {
                total += 1;
                if n > window / 2 {
                    upper += 1;
                }
            }
        }
        (total, upper)
    }
}
