//! Weighted trapezoid and midpoint error bounds for `(α, m)`-convex functions.
//!
//! The crate has two halves that never share code paths:
//!
//! * closed forms: the constants `M` and `A`, the bound right-hand sides and
//!   the classical `α = m = 1` formulas ([`bounds`]);
//! * an oracle: adaptive Simpson quadrature, sup-norm estimation and grid
//!   checks of the convexity definition ([`quadrature`], [`convexity`]).
//!
//! [`harness`] joins the two: it gates each case on the convexity hypothesis,
//! evaluates the left-hand side by quadrature and the right-hand side in
//! closed form, and writes CSV/JSON reports.

// `!(x <= y)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod convexity;
pub mod domain;
mod error;
pub mod harness;
pub mod quadrature;
pub mod registry;

pub use domain::{
    BoundCase, BoundReport, ConvexityParams, DifferentiablePair, DomainSpec, Estimate, Interval,
    TheoremId,
};
pub use error::{Error, Result};
pub use registry::{Family, RealFunction};
