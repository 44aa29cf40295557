//! Symbolic subsets of the positive integers.
//!
//! A [`SetDescriptor`] is an immutable expression tree over a few atoms
//! (finite sets, arithmetic progressions, images of `k -> k^m`) closed under
//! tails, complements, unions and intersections. Every node supports exact
//! membership and counting; densities are reported as certified bounds.
//!
//! Indices start at 1.

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::CheckedAdd;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::verdict::{Certificate, Outcome, Verdict};

/// Largest window accepted by [`SetDescriptor::count_up_to`].
pub const DEFAULT_WINDOW_CAP: u64 = 10_000_000;

/// Moduli above this are not expanded when computing exact densities.
const RESIDUE_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexSetError {
    #[error("window {n} exceeds the cap {cap}")]
    WindowCap { n: u64, cap: u64 },
    #[error("invalid descriptor: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Repr", into = "Repr")]
pub enum SetDescriptor {
    Empty,
    /// Sorted, deduplicated, all elements `>= 1`.
    Finite(Vec<u64>),
    /// `{first, first + step, ...}`.
    Ap {
        first: u64,
        step: u64,
    },
    /// `{k^m : k >= 1}`.
    PowerImage(u32),
    /// `base` without its first `from_rank - 1` elements.
    Tail {
        base: Box<SetDescriptor>,
        from_rank: u64,
    },
    Complement(Box<SetDescriptor>),
    Union(Box<SetDescriptor>, Box<SetDescriptor>),
    Intersection(Box<SetDescriptor>, Box<SetDescriptor>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
enum Repr {
    Empty,
    Finite(Vec<u64>),
    Ap {
        first: u64,
        step: u64,
    },
    PowerImage(u32),
    #[serde(rename_all = "camelCase")]
    Tail {
        base: Box<SetDescriptor>,
        from_rank: u64,
    },
    Complement(Box<SetDescriptor>),
    Union(Box<SetDescriptor>, Box<SetDescriptor>),
    Intersection(Box<SetDescriptor>, Box<SetDescriptor>),
}

impl TryFrom<Repr> for SetDescriptor {
    type Error = IndexSetError;
    fn try_from(r: Repr) -> Result<Self, Self::Error> {
        Ok(match r {
            Repr::Empty => SetDescriptor::Empty,
            Repr::Finite(v) => SetDescriptor::finite(v)?,
            Repr::Ap { first, step } => SetDescriptor::ap(first, step)?,
            Repr::PowerImage(m) => SetDescriptor::power_image(m)?,
            Repr::Tail { base, from_rank } => SetDescriptor::tail(*base, from_rank)?,
            Repr::Complement(b) => SetDescriptor::Complement(b),
            Repr::Union(a, b) => SetDescriptor::Union(a, b),
            Repr::Intersection(a, b) => SetDescriptor::Intersection(a, b),
        })
    }
}

impl From<SetDescriptor> for Repr {
    fn from(s: SetDescriptor) -> Repr {
        match s {
            SetDescriptor::Empty => Repr::Empty,
            SetDescriptor::Finite(v) => Repr::Finite(v),
            SetDescriptor::Ap { first, step } => Repr::Ap { first, step },
            SetDescriptor::PowerImage(m) => Repr::PowerImage(m),
            SetDescriptor::Tail { base, from_rank } => Repr::Tail { base, from_rank },
            SetDescriptor::Complement(b) => Repr::Complement(b),
            SetDescriptor::Union(a, b) => Repr::Union(a, b),
            SetDescriptor::Intersection(a, b) => Repr::Intersection(a, b),
        }
    }
}

/// Certified bounds on the lower and upper asymptotic density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityBounds {
    pub lower: Ratio<u64>,
    pub upper: Ratio<u64>,
    /// The density exists and equals `lower == upper`.
    pub exact: bool,
}

impl DensityBounds {
    pub fn exact(d: Ratio<u64>) -> Self {
        DensityBounds {
            lower: d,
            upper: d,
            exact: true,
        }
    }

    fn zero() -> Self {
        Self::exact(Ratio::from_integer(0))
    }

    pub fn lower_f64(&self) -> f64 {
        ratio_f64(self.lower)
    }

    pub fn upper_f64(&self) -> f64 {
        ratio_f64(self.upper)
    }
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn one() -> Ratio<u64> {
    Ratio::from_integer(1)
}

/// `floor(n^(1/m))`.
pub fn iroot(n: u64, m: u32) -> u64 {
    if n < 2 || m == 1 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / m as f64).round() as u64;
    while r > 0 && r.checked_pow(m).is_none_or(|v| v > n) {
        r -= 1;
    }
    while (r + 1).checked_pow(m).is_some_and(|v| v <= n) {
        r += 1;
    }
    r
}

fn ap_count(first: u64, step: u64, n: u64) -> u64 {
    if n < first {
        0
    } else {
        (n - first) / step + 1
    }
}

/// Intersection of two progressions as `(first, step)`, or `None` if empty.
fn ap_intersect(f1: u64, s1: u64, f2: u64, s2: u64) -> Option<(u128, u128)> {
    let (f1, s1, f2, s2) = (f1 as i128, s1 as i128, f2 as i128, s2 as i128);
    let g = s1.gcd(&s2);
    if (f2 - f1).rem_euclid(g) != 0 {
        return None;
    }
    let l = s1 / g * s2;
    // s1 * t = f2 - f1 (mod s2)
    let m = s2 / g;
    let t = if m == 1 {
        0
    } else {
        let inv = mod_inverse((s1 / g).rem_euclid(m), m)?;
        (((f2 - f1) / g).rem_euclid(m) * inv).rem_euclid(m)
    };
    let x0 = (f1 + s1 * t).rem_euclid(l);
    let lo = f1.max(f2);
    let first = if x0 >= lo { x0 } else { x0 + (lo - x0 + l - 1) / l * l };
    Some((first as u128, l as u128))
}

fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    let e = a.extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m))
}

impl SetDescriptor {
    pub fn empty() -> Self {
        SetDescriptor::Empty
    }

    /// All of the positive integers.
    pub fn naturals() -> Self {
        SetDescriptor::Complement(Box::new(SetDescriptor::Empty))
    }

    pub fn finite(values: impl IntoIterator<Item = u64>) -> Result<Self, IndexSetError> {
        let mut v: Vec<u64> = values.into_iter().collect();
        if v.contains(&0) {
            return Err(IndexSetError::Invalid("finite sets index from 1".into()));
        }
        v.sort_unstable();
        v.dedup();
        Ok(SetDescriptor::Finite(v))
    }

    pub fn ap(first: u64, step: u64) -> Result<Self, IndexSetError> {
        if first == 0 || step == 0 {
            return Err(IndexSetError::Invalid(format!(
                "progression needs first >= 1 and step >= 1, got ({first}, {step})"
            )));
        }
        Ok(SetDescriptor::Ap { first, step })
    }

    pub fn power_image(m: u32) -> Result<Self, IndexSetError> {
        if m < 2 {
            return Err(IndexSetError::Invalid(format!("power image needs m >= 2, got {m}")));
        }
        Ok(SetDescriptor::PowerImage(m))
    }

    pub fn tail(base: SetDescriptor, from_rank: u64) -> Result<Self, IndexSetError> {
        if from_rank == 0 {
            return Err(IndexSetError::Invalid("tail rank starts at 1".into()));
        }
        Ok(SetDescriptor::Tail {
            base: Box::new(base),
            from_rank,
        })
    }

    /// `{1, ..., m}`, expressed as the complement of `{m+1, m+2, ...}`.
    pub fn initial_segment(m: u64) -> Self {
        if m == 0 {
            SetDescriptor::Empty
        } else {
            SetDescriptor::Complement(Box::new(SetDescriptor::Ap { first: m + 1, step: 1 }))
        }
    }

    pub fn complement(self) -> Self {
        SetDescriptor::Complement(Box::new(self))
    }

    pub fn union(self, other: SetDescriptor) -> Self {
        SetDescriptor::Union(Box::new(self), Box::new(other))
    }

    pub fn intersect(self, other: SetDescriptor) -> Self {
        SetDescriptor::Intersection(Box::new(self), Box::new(other))
    }

    /// Left-nested union of the given sets, dropping literal `Empty` nodes.
    pub fn union_all(sets: impl IntoIterator<Item = SetDescriptor>) -> Self {
        sets.into_iter()
            .filter(|s| !matches!(s, SetDescriptor::Empty) && !matches!(s, SetDescriptor::Finite(v) if v.is_empty()))
            .reduce(SetDescriptor::union)
            .unwrap_or(SetDescriptor::Empty)
    }

    /// Re-checks the node invariants of the whole tree.
    pub fn validate(&self) -> Result<(), IndexSetError> {
        match self {
            SetDescriptor::Empty => Ok(()),
            SetDescriptor::Finite(v) => {
                if v.first() == Some(&0) || v.windows(2).any(|w| w[0] >= w[1]) {
                    Err(IndexSetError::Invalid(
                        "finite set must be sorted, distinct, >= 1".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            SetDescriptor::Ap { first, step } => SetDescriptor::ap(*first, *step).map(|_| ()),
            SetDescriptor::PowerImage(m) => SetDescriptor::power_image(*m).map(|_| ()),
            SetDescriptor::Tail { base, from_rank } => {
                if *from_rank == 0 {
                    return Err(IndexSetError::Invalid("tail rank starts at 1".into()));
                }
                base.validate()
            }
            SetDescriptor::Complement(b) => b.validate(),
            SetDescriptor::Union(a, b) | SetDescriptor::Intersection(a, b) => {
                a.validate()?;
                b.validate()
            }
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        match self {
            SetDescriptor::Empty => false,
            SetDescriptor::Finite(v) => v.binary_search(&n).is_ok(),
            SetDescriptor::Ap { first, step } => n >= *first && (n - first).is_multiple_of(*step),
            SetDescriptor::PowerImage(m) => {
                let r = iroot(n, *m);
                r.checked_pow(*m) == Some(n)
            }
            SetDescriptor::Tail { base, from_rank } => {
                // rank(n) >= k  <=>  n >= nth(k)
                base.contains(n)
                    && match base.nth(*from_rank) {
                        Some(t) => n >= t,
                        None => base.count_in(n, u64::MAX).is_ok_and(|rank| rank >= *from_rank),
                    }
            }
            SetDescriptor::Complement(b) => !b.contains(n),
            SetDescriptor::Union(a, b) => a.contains(n) || b.contains(n),
            SetDescriptor::Intersection(a, b) => a.contains(n) && b.contains(n),
        }
    }

    /// `|{i <= n : i in self}|`, exact. Fails above [`DEFAULT_WINDOW_CAP`].
    pub fn count_up_to(&self, n: u64) -> Result<u64, IndexSetError> {
        self.count_up_to_capped(n, DEFAULT_WINDOW_CAP)
    }

    pub fn count_up_to_capped(&self, n: u64, cap: u64) -> Result<u64, IndexSetError> {
        if n > cap {
            return Err(IndexSetError::WindowCap { n, cap });
        }
        self.count_in(n, cap)
    }

    /// Counting with closed forms where possible. Falls back to enumerating
    /// `1..=n`, which is refused when `n > brute_limit`.
    pub(crate) fn count_in(&self, n: u64, brute_limit: u64) -> Result<u64, IndexSetError> {
        if n == 0 {
            return Ok(0);
        }
        Ok(match self {
            SetDescriptor::Empty => 0,
            SetDescriptor::Finite(v) => v.partition_point(|&x| x <= n) as u64,
            SetDescriptor::Ap { first, step } => ap_count(*first, *step, n),
            SetDescriptor::PowerImage(m) => iroot(n, *m),
            SetDescriptor::Tail { base, from_rank } => base.count_in(n, brute_limit)?.saturating_sub(from_rank - 1),
            SetDescriptor::Complement(b) => n - b.count_in(n, brute_limit)?,
            SetDescriptor::Union(a, b) => {
                let both = SetDescriptor::Intersection(a.clone(), b.clone());
                a.count_in(n, brute_limit)? + b.count_in(n, brute_limit)? - both.count_in(n, brute_limit)?
            }
            SetDescriptor::Intersection(a, b) => count_intersection(a, b, n, brute_limit)?,
        })
    }

    fn brute_count(&self, n: u64, brute_limit: u64) -> Result<u64, IndexSetError> {
        if n > brute_limit {
            return Err(IndexSetError::WindowCap { n, cap: brute_limit });
        }
        Ok((1..=n).into_par_iter().filter(|&i| self.contains(i)).count() as u64)
    }

    /// Number of candidates [`Self::iter_up_to`] would visit, if enumerable.
    fn enum_cost(&self, n: u64) -> Option<u64> {
        match self {
            SetDescriptor::Empty => Some(0),
            SetDescriptor::Finite(v) => Some(v.partition_point(|&x| x <= n) as u64),
            SetDescriptor::Ap { first, step } => Some(ap_count(*first, *step, n)),
            SetDescriptor::PowerImage(m) => Some(iroot(n, *m)),
            SetDescriptor::Tail { base, .. } => base.enum_cost(n),
            SetDescriptor::Intersection(a, b) => match (a.enum_cost(n), b.enum_cost(n)) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            },
            _ => None,
        }
    }

    /// Iterates the elements `<= n` when that is cheap.
    fn iter_up_to(&self, n: u64) -> Option<Box<dyn Iterator<Item = u64> + '_>> {
        match self {
            SetDescriptor::Empty => Some(Box::new(std::iter::empty())),
            SetDescriptor::Finite(v) => Some(Box::new(v.iter().copied().take_while(move |&x| x <= n))),
            SetDescriptor::Ap { first, step } => {
                let (first, step) = (*first, *step);
                Some(Box::new((0..ap_count(first, step, n)).map(move |i| first + i * step)))
            }
            SetDescriptor::PowerImage(m) => {
                let m = *m;
                Some(Box::new((1..=iroot(n, m)).map(move |k| k.pow(m))))
            }
            SetDescriptor::Tail { base, from_rank } => {
                let skip = (*from_rank - 1) as usize;
                base.iter_up_to(n)
                    .map(|it| Box::new(it.skip(skip)) as Box<dyn Iterator<Item = u64>>)
            }
            SetDescriptor::Intersection(a, b) => {
                let (small, other) = match (a.enum_cost(n), b.enum_cost(n)) {
                    (Some(ca), Some(cb)) if cb < ca => (b, a),
                    (Some(_), _) => (a, b),
                    (None, Some(_)) => (b, a),
                    (None, None) => return None,
                };
                small
                    .iter_up_to(n)
                    .map(|it| Box::new(it.filter(move |&x| other.contains(x))) as Box<dyn Iterator<Item = u64>>)
            }
            _ => None,
        }
    }

    /// The `rank`-th smallest element (1-based), if it exists and is
    /// representable.
    pub fn nth(&self, rank: u64) -> Option<u64> {
        if rank == 0 {
            return None;
        }
        match self {
            SetDescriptor::Empty => None,
            SetDescriptor::Finite(v) => v.get((rank - 1) as usize).copied(),
            SetDescriptor::Ap { first, step } => (rank - 1).checked_mul(*step)?.checked_add(*first),
            SetDescriptor::PowerImage(m) => rank.checked_pow(*m),
            SetDescriptor::Tail { base, from_rank } => base.nth(rank.checked_add(from_rank - 1)?),
            _ => {
                let reached = |n: u64| self.count_in(n, DEFAULT_WINDOW_CAP).ok().map(|c| c >= rank);
                let mut hi = rank.max(1);
                while !reached(hi)? {
                    hi = hi.checked_mul(2)?;
                }
                let mut lo = hi / 2; // count(lo) < rank or lo == 0
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if reached(mid)? {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Some(hi)
            }
        }
    }

    /// Ordered members of `self` within `1..=n` (brute force where needed).
    pub fn members_up_to(&self, n: u64) -> Vec<u64> {
        match self.iter_up_to(n) {
            Some(it) => it.collect(),
            None => (1..=n).filter(|&i| self.contains(i)).collect(),
        }
    }

    /// `count_up_to(n) / n`.
    pub fn window_density(&self, n: u64) -> Result<f64, IndexSetError> {
        Ok(self.count_up_to(n)? as f64 / n.max(1) as f64)
    }

    /// Certified density bounds.
    ///
    /// Exact values come from closed forms, or from reducing the tree modulo
    /// the least common multiple of its progression steps (finite sets, power
    /// images and tails change a set only by a density-zero amount). When the
    /// modulus is too large, bounds are propagated through the tree instead.
    pub fn density_bounds(&self) -> DensityBounds {
        let propagated = self.propagate_density();
        if propagated.exact {
            return propagated;
        }
        match self.residue_density() {
            Some(d) => DensityBounds::exact(d),
            None => propagated,
        }
    }

    fn propagate_density(&self) -> DensityBounds {
        match self {
            SetDescriptor::Empty | SetDescriptor::Finite(_) | SetDescriptor::PowerImage(_) => DensityBounds::zero(),
            SetDescriptor::Ap { step, .. } => DensityBounds::exact(Ratio::new(1, *step)),
            SetDescriptor::Tail { base, .. } => base.propagate_density(),
            SetDescriptor::Complement(b) => {
                let d = b.propagate_density();
                DensityBounds {
                    lower: one() - d.upper,
                    upper: one() - d.lower,
                    exact: d.exact,
                }
            }
            SetDescriptor::Union(a, b) => {
                let (da, db) = (a.propagate_density(), b.propagate_density());
                let upper = da.upper.checked_add(&db.upper).map_or(one(), |s| s.min(one()));
                let lower = da.lower.max(db.lower);
                DensityBounds {
                    lower,
                    upper,
                    exact: da.exact && db.exact && lower == upper,
                }
            }
            SetDescriptor::Intersection(a, b) => {
                let (da, db) = (a.propagate_density(), b.propagate_density());
                let sum = da.lower.checked_add(&db.lower);
                let lower = match sum {
                    Some(s) if s > one() => s - one(),
                    _ => Ratio::from_integer(0),
                };
                let upper = da.upper.min(db.upper);
                let zero_side = (da.exact && da.upper == Ratio::from_integer(0))
                    || (db.exact && db.upper == Ratio::from_integer(0));
                DensityBounds {
                    lower,
                    upper,
                    exact: zero_side || (da.exact && db.exact && lower == upper),
                }
            }
        }
    }

    fn residue_modulus(&self) -> Option<u64> {
        match self {
            SetDescriptor::Empty | SetDescriptor::Finite(_) | SetDescriptor::PowerImage(_) => Some(1),
            SetDescriptor::Ap { step, .. } => Some(*step),
            SetDescriptor::Tail { base, .. } | SetDescriptor::Complement(base) => base.residue_modulus(),
            SetDescriptor::Union(a, b) | SetDescriptor::Intersection(a, b) => {
                let l = a.residue_modulus()?.lcm(&b.residue_modulus()?);
                (l <= RESIDUE_CAP).then_some(l)
            }
        }
    }

    /// Membership of large `n` with `n = residue (mod L)`, ignoring
    /// density-zero atoms.
    fn residue_member(&self, residue: u64) -> bool {
        match self {
            SetDescriptor::Empty | SetDescriptor::Finite(_) | SetDescriptor::PowerImage(_) => false,
            SetDescriptor::Ap { first, step } => residue % step == first % step,
            SetDescriptor::Tail { base, .. } => base.residue_member(residue),
            SetDescriptor::Complement(b) => !b.residue_member(residue),
            SetDescriptor::Union(a, b) => a.residue_member(residue) || b.residue_member(residue),
            SetDescriptor::Intersection(a, b) => a.residue_member(residue) && b.residue_member(residue),
        }
    }

    fn residue_density(&self) -> Option<Ratio<u64>> {
        let l = self.residue_modulus()?;
        if l > RESIDUE_CAP {
            return None;
        }
        let hits = (0..l).filter(|&r| self.residue_member(r)).count() as u64;
        Some(Ratio::new(hits, l))
    }

    fn finiteness(&self) -> (Outcome, String) {
        let (outcome, reason) = self.structural_finiteness();
        if outcome != Outcome::Unknown {
            return (outcome, reason);
        }
        let d = self.density_bounds();
        if d.lower > Ratio::from_integer(0) {
            return (Outcome::Fails, format!("positive lower density {}", d.lower));
        }
        if !self.has_power_image() {
            if let Some(l) = self.residue_modulus() {
                // Built from progressions and finite sets only, so the set
                // is eventually periodic with period l.
                if (0..l).all(|r| !self.residue_member(r)) {
                    return (Outcome::Holds, format!("eventually periodic mod {l} with no residues"));
                }
            }
        }
        (outcome, reason)
    }

    fn structural_finiteness(&self) -> (Outcome, String) {
        match self {
            SetDescriptor::Empty => (Outcome::Holds, "empty".into()),
            SetDescriptor::Finite(v) => (Outcome::Holds, format!("explicit list of {}", v.len())),
            SetDescriptor::Ap { .. } => (Outcome::Fails, "infinite progression".into()),
            SetDescriptor::PowerImage(_) => (Outcome::Fails, "infinite power image".into()),
            SetDescriptor::Tail { base, .. } => {
                let (o, why) = base.finiteness();
                (o, format!("tail of ({why})"))
            }
            SetDescriptor::Complement(b) => {
                if b.is_cofinite() {
                    (Outcome::Holds, "complement of a cofinite set".into())
                } else if b.finiteness().0 == Outcome::Holds {
                    (Outcome::Fails, "complement of a finite set".into())
                } else {
                    (Outcome::Unknown, "complement of a set of unknown size".into())
                }
            }
            SetDescriptor::Union(a, b) => {
                let ((oa, wa), (ob, wb)) = (a.finiteness(), b.finiteness());
                match (oa, ob) {
                    (Outcome::Holds, Outcome::Holds) => (Outcome::Holds, "union of finite sets".into()),
                    (Outcome::Fails, _) => (Outcome::Fails, format!("union with infinite side ({wa})")),
                    (_, Outcome::Fails) => (Outcome::Fails, format!("union with infinite side ({wb})")),
                    _ => (Outcome::Unknown, "union with a side of unknown size".into()),
                }
            }
            SetDescriptor::Intersection(a, b) => {
                let ((oa, wa), (ob, wb)) = (a.finiteness(), b.finiteness());
                if oa == Outcome::Holds {
                    (Outcome::Holds, format!("intersection with finite side ({wa})"))
                } else if ob == Outcome::Holds {
                    (Outcome::Holds, format!("intersection with finite side ({wb})"))
                } else {
                    (Outcome::Unknown, "intersection of possibly infinite sets".into())
                }
            }
        }
    }

    /// Structural cofiniteness (the complement is provably finite).
    fn is_cofinite(&self) -> bool {
        match self {
            SetDescriptor::Ap { step: 1, .. } => true,
            SetDescriptor::Tail { base, .. } => base.is_cofinite(),
            SetDescriptor::Complement(b) => b.finiteness().0 == Outcome::Holds,
            SetDescriptor::Union(a, b) => a.is_cofinite() || b.is_cofinite(),
            SetDescriptor::Intersection(a, b) => a.is_cofinite() && b.is_cofinite(),
            _ => false,
        }
    }

    /// Conservative finiteness prover.
    ///
    /// Holds only on structural evidence; Fails on structural evidence or a
    /// positive certified lower density; otherwise Unknown.
    pub fn prove_finite(&self) -> Verdict {
        let (outcome, reason) = self.finiteness();
        Verdict::new(
            outcome,
            Certificate::Structural {
                set: self.clone(),
                reason,
            },
        )
    }
}

impl SetDescriptor {
    fn has_power_image(&self) -> bool {
        match self {
            SetDescriptor::PowerImage(_) => true,
            SetDescriptor::Empty | SetDescriptor::Finite(_) | SetDescriptor::Ap { .. } => false,
            SetDescriptor::Tail { base, .. } | SetDescriptor::Complement(base) => base.has_power_image(),
            SetDescriptor::Union(a, b) | SetDescriptor::Intersection(a, b) => {
                a.has_power_image() || b.has_power_image()
            }
        }
    }
}

/// Largest progression step for which `AP ∩ {k^m}` is counted by residues.
const AP_POWER_STEP_LIMIT: u64 = 1 << 16;

/// `|{k : first <= k^m <= n, k^m ≡ first (mod step)}|`. Whether `k^m` lies in
/// the progression's residue class depends only on `k mod step`.
fn count_ap_powers(first: u64, step: u64, m: u32, n: u64) -> u64 {
    let k_hi = iroot(n, m);
    let mut k_lo = iroot(first, m);
    if k_lo.checked_pow(m) != Some(first) {
        k_lo += 1;
    }
    let k_lo = k_lo.max(1);
    if k_hi < k_lo {
        return 0;
    }
    let target = first % step;
    let pow_mod = |k: u64| (0..m).fold(1u128, |acc, _| acc * k as u128 % step as u128) as u64;
    // Number of k in [1, x] with k ≡ rho (mod step).
    let upto = |x: u64, rho: u64| -> u64 {
        let rho = if rho == 0 { step } else { rho };
        if x < rho {
            0
        } else {
            (x - rho) / step + 1
        }
    };
    (0..step)
        .filter(|&rho| pow_mod(rho) == target)
        .map(|rho| upto(k_hi, rho) - upto(k_lo - 1, rho))
        .sum()
}

fn is_upper_ray(s: &SetDescriptor) -> Option<u64> {
    match s {
        SetDescriptor::Ap { first, step: 1 } => Some(*first),
        _ => None,
    }
}

fn count_intersection(a: &SetDescriptor, b: &SetDescriptor, n: u64, brute_limit: u64) -> Result<u64, IndexSetError> {
    use SetDescriptor as S;
    if matches!(a, S::Empty) || matches!(b, S::Empty) {
        return Ok(0);
    }
    // X ∩ Cᶜ = X \ (X ∩ C)
    if let S::Complement(c) = b {
        let inner = S::Intersection(Box::new(a.clone()), c.clone());
        return Ok(a.count_in(n, brute_limit)? - inner.count_in(n, brute_limit)?);
    }
    if let S::Complement(c) = a {
        let inner = S::Intersection(Box::new(b.clone()), c.clone());
        return Ok(b.count_in(n, brute_limit)? - inner.count_in(n, brute_limit)?);
    }
    // X ∩ {m, m+1, ...}
    if let Some(m) = is_upper_ray(b) {
        let below = a.count_in(n.min(m - 1), brute_limit)?;
        return Ok(a.count_in(n, brute_limit)? - below);
    }
    if let Some(m) = is_upper_ray(a) {
        let below = b.count_in(n.min(m - 1), brute_limit)?;
        return Ok(b.count_in(n, brute_limit)? - below);
    }
    if let (S::Ap { first: f1, step: s1 }, S::Ap { first: f2, step: s2 }) = (a, b) {
        return Ok(match ap_intersect(*f1, *s1, *f2, *s2) {
            None => 0,
            Some((first, step)) => {
                let n = n as u128;
                if n < first {
                    0
                } else {
                    ((n - first) / step + 1) as u64
                }
            }
        });
    }
    if let (S::Ap { first, step }, S::PowerImage(m)) | (S::PowerImage(m), S::Ap { first, step }) = (a, b) {
        if *step <= AP_POWER_STEP_LIMIT {
            return Ok(count_ap_powers(*first, *step, *m, n));
        }
    }
    // Distribute over unions so the progression and complement rules apply.
    if let S::Union(x, y) = b {
        let left = S::Intersection(Box::new(a.clone()), x.clone());
        let right = S::Intersection(Box::new(a.clone()), y.clone());
        let both = S::Intersection(Box::new(a.clone()), Box::new(S::Intersection(x.clone(), y.clone())));
        return Ok(left.count_in(n, brute_limit)? + right.count_in(n, brute_limit)? - both.count_in(n, brute_limit)?);
    }
    if let S::Union(_, _) = a {
        return count_intersection(b, a, n, brute_limit);
    }
    // Enumerate the sparser side when one is enumerable.
    let size = |s: &SetDescriptor| -> Option<u64> { s.enum_cost(n).filter(|&c| c <= brute_limit) };
    let pick = match (size(a), size(b)) {
        (Some(ca), Some(cb)) => Some(if ca <= cb { (a, b) } else { (b, a) }),
        (Some(_), None) => Some((a, b)),
        (None, Some(_)) => Some((b, a)),
        (None, None) => None,
    };
    if let Some((small, other)) = pick {
        if let Some(it) = small.iter_up_to(n) {
            return Ok(it.filter(|&x| other.contains(x)).count() as u64);
        }
    }
    S::Intersection(Box::new(a.clone()), Box::new(b.clone())).brute_count(n, brute_limit)
}

impl fmt::Display for SetDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetDescriptor::Empty => write!(f, "∅"),
            SetDescriptor::Finite(v) if v.len() <= 6 => write!(f, "{v:?}"),
            SetDescriptor::Finite(v) => {
                write!(
                    f,
                    "[{}, {}, ..., {}] ({} elements)",
                    v[0],
                    v[1],
                    v[v.len() - 1],
                    v.len()
                )
            }
            SetDescriptor::Ap { first, step } => write!(f, "AP({first},{step})"),
            SetDescriptor::PowerImage(m) => write!(f, "{{k^{m}}}"),
            SetDescriptor::Tail { base, from_rank } => write!(f, "Tail({base}, {from_rank})"),
            SetDescriptor::Complement(b) => write!(f, "({b})ᶜ"),
            SetDescriptor::Union(a, b) => write!(f, "({a} ∪ {b})"),
            SetDescriptor::Intersection(a, b) => write!(f, "({a} ∩ {b})"),
        }
    }
}
