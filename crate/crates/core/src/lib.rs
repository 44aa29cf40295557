//! Rough ideal convergence in partial metric spaces, made computable.
//!
//! The crate is organised bottom-up:
//!
//! * [`spaces`]: partial metrics, axiom checks, balls and diameters;
//! * [`index_sets`]: a symbolic algebra of subsets of ℕ with counting and
//!   density bounds;
//! * [`ideals`]: the `Fin` and `DensityZero` ideals as three-valued oracles;
//! * [`sequences`]: piecewise-symbolic sequences and their level sets;
//! * [`analysis`]: deciders for (rough, ideal) convergence and the theorem
//!   verifiers built on them.
//!
//! Every decision returns a [`Verdict`] whose certificate can be replayed.
//!
//! ```
//! use rough_ideal::{analysis, fixtures, Ideal, Space};
//!
//! let space = Space::pow_max(2.0).unwrap();
//! let seq = fixtures::square_supported();
//! let x = space.point(0.0).unwrap();
//! let settings = analysis::Settings::default();
//! let v = analysis::rough_ideal_converges(&seq, &space, x, 1.0, Ideal::DensityZero, &settings).unwrap();
//! assert!(v.outcome.is_holds());
//! ```

// `!(x >= 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod expr;
pub mod fixtures;
pub mod ideals;
pub mod index_sets;
pub mod sequences;
pub mod spaces;
pub mod verdict;

pub use ideals::Ideal;
pub use index_sets::{DensityBounds, SetDescriptor};
pub use sequences::{Limit, Monotone, Piece, PiecewiseSequence, PointRule};
pub use spaces::{Carrier, Point, Space};
pub use verdict::{Certificate, Outcome, Verdict};
