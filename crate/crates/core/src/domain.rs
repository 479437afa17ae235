//! Validated domain types shared by every module.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::registry::RealFunction;
use crate::{Error, Result};

/// `k`-th of `n + 1` equally spaced points on `[lo, hi]`.
///
/// Every sampled check in the crate goes through this, so a coarse grid is a
/// subset of a finer one whenever the point counts divide.
#[inline]
pub fn grid_point(lo: f64, hi: f64, k: usize, n: usize) -> f64 {
    if k == n {
        hi
    } else {
        lo + (hi - lo) * (k as f64 / n as f64)
    }
}

/// `n` equally spaced points covering `[lo, hi]` (both ends included).
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    debug_assert!(n >= 2);
    (0..n).map(|k| grid_point(lo, hi, k, n - 1)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInterval { a, b, reason: "endpoints must be finite" });
        }
        if a == b {
            return Err(Error::InvalidInterval { a, b, reason: "degenerate interval" });
        }
        if a > b {
            return Err(Error::InvalidInterval { a, b, reason: "reversed endpoints" });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.a && t <= self.b
    }

    /// Tolerant midpoint test used by the corollary preconditions.
    pub fn is_midpoint(&self, x: f64) -> bool {
        (x - self.midpoint()).abs() <= 4.0 * f64::EPSILON * self.a.abs().max(self.b.abs()).max(1.0)
    }
}

/// The admissible domain `[0, b*]` of `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    b_star: f64,
}

impl DomainSpec {
    pub fn new(b_star: f64) -> Result<Self> {
        if !(b_star.is_finite() && b_star > 0.0) {
            return Err(Error::InvalidParameter(format!("b_star must be finite and > 0, got {b_star}")));
        }
        Ok(Self { b_star })
    }

    pub fn b_star(&self) -> f64 {
        self.b_star
    }

    pub fn contains(&self, t: f64) -> bool {
        (0.0..=self.b_star).contains(&t)
    }
}

/// The `(α, m)` pair of the convexity class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityParams {
    alpha: f64,
    m: f64,
}

impl ConvexityParams {
    /// Parameters usable in a bound: `(α, m) ∈ (0, 1]²`.
    pub fn new(alpha: f64, m: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0 && m > 0.0 && m <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "bounds need (alpha, m) in (0, 1]^2, got ({alpha}, {m})"
            )));
        }
        Ok(Self { alpha, m })
    }

    /// Parameters for checking the definition only: `(α, m) ∈ [0, 1]²`.
    pub fn for_definition(alpha: f64, m: f64) -> Result<Self> {
        if !((0.0..=1.0).contains(&alpha) && (0.0..=1.0).contains(&m)) {
            return Err(Error::InvalidParameter(format!(
                "(alpha, m) must lie in [0, 1]^2, got ({alpha}, {m})"
            )));
        }
        Ok(Self { alpha, m })
    }

    pub fn convex() -> Self {
        Self { alpha: 1.0, m: 1.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn admits_bounds(&self) -> bool {
        self.alpha > 0.0 && self.m > 0.0
    }
}

/// `f` together with its derivative, both evaluable on `[0, b*]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferentiablePair {
    f: RealFunction,
    f_prime: RealFunction,
    domain: DomainSpec,
}

/// Points of the finite-difference agreement check.
const DERIVATIVE_CHECK_POINTS: usize = 1000;

impl DifferentiablePair {
    /// Validates evaluability on `[0, b*]` and finite-difference agreement of
    /// `f_prime` with `f` there.
    pub fn new(f: RealFunction, f_prime: RealFunction, domain: DomainSpec) -> Result<Self> {
        f.check_range(0.0, domain.b_star())?;
        f_prime.check_range(0.0, domain.b_star())?;
        let pair = Self { f, f_prime, domain };
        pair.check_derivative(0.0, domain.b_star())?;
        Ok(pair)
    }

    /// Pairs `f` with its registry derivative.
    pub fn from_function(f: RealFunction, domain: DomainSpec) -> Result<Self> {
        let f_prime = f.derivative();
        Self::new(f, f_prime, domain)
    }

    pub fn f(&self) -> &RealFunction {
        &self.f
    }

    pub fn f_prime(&self) -> &RealFunction {
        &self.f_prime
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    /// Central differences with step `1e-6·(hi − lo)` on a 1000-point grid of
    /// `[lo, hi]` must match `f'` to `1e-4·(1 + |f'|)`. Points whose stencil
    /// leaves the domain of `f` or straddles a kink are skipped.
    pub fn check_derivative(&self, lo: f64, hi: f64) -> Result<()> {
        self.f.check_range(lo, hi)?;
        self.f_prime.check_range(lo, hi)?;
        let h = 1e-6 * (hi - lo);
        let kinks = self.f.kinks();
        for t in grid(lo, hi, DERIVATIVE_CHECK_POINTS) {
            if kinks.iter().any(|&k| (k - t).abs() <= h) {
                continue;
            }
            if !(self.f.contains(t - h) && self.f.contains(t + h)) {
                continue;
            }
            let fd = (self.f.value(t + h) - self.f.value(t - h)) / (2.0 * h);
            let supplied = self.f_prime.value(t);
            if !((fd - supplied).abs() <= 1e-4 * (1.0 + supplied.abs())) {
                return Err(Error::DerivativeMismatch { t, supplied, finite_difference: fd });
            }
        }
        Ok(())
    }
}

/// The inequalities the crate can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    T13,
    T14,
    C11,
    C12,
    T21,
    T22,
    C21,
    C22,
}

impl TheoremId {
    pub const ALL: [TheoremId; 8] = [
        TheoremId::T13,
        TheoremId::T14,
        TheoremId::C11,
        TheoremId::C12,
        TheoremId::T21,
        TheoremId::T22,
        TheoremId::C21,
        TheoremId::C22,
    ];

    /// Trapezoid-type left-hand side (`f(a)∫ₐˣg + f(b)∫ₓᵇg − ∫fg`) as opposed
    /// to the midpoint-type one (`f(x)∫g − ∫fg`).
    pub fn is_endpoint_form(self) -> bool {
        matches!(self, TheoremId::T13 | TheoremId::T21 | TheoremId::C11 | TheoremId::C21)
    }

    /// The `α = m = 1` results, whose hypothesis is plain convexity.
    pub fn is_classical(self) -> bool {
        matches!(self, TheoremId::T13 | TheoremId::T14 | TheoremId::C11 | TheoremId::C12)
    }

    pub fn requires_midpoint(self) -> bool {
        matches!(self, TheoremId::C11 | TheoremId::C12 | TheoremId::C21 | TheoremId::C22)
    }

    pub fn requires_symmetric_g(self) -> bool {
        matches!(self, TheoremId::C11 | TheoremId::C21)
    }

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::T13 => "T13",
            TheoremId::T14 => "T14",
            TheoremId::C11 => "C11",
            TheoremId::C12 => "C12",
            TheoremId::T21 => "T21",
            TheoremId::T22 => "T22",
            TheoremId::C21 => "C21",
            TheoremId::C22 => "C22",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name() == upper)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown theorem id `{s}`")))
    }
}

/// Number of samples used to validate `g_sup` against `|g|`.
const SUP_CHECK_POINTS: usize = 1001;

/// One fully specified inequality instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCase {
    pair: DifferentiablePair,
    g: RealFunction,
    interval: Interval,
    x: f64,
    q: f64,
    params: ConvexityParams,
    g_sup: f64,
}

impl BoundCase {
    pub fn new(
        pair: DifferentiablePair,
        g: RealFunction,
        interval: Interval,
        x: f64,
        q: f64,
        params: ConvexityParams,
        g_sup: f64,
    ) -> Result<Self> {
        let (a, b) = (interval.a(), interval.b());
        let b_star = pair.domain().b_star();
        if !(q.is_finite() && q >= 1.0) {
            return Err(Error::Precondition(format!("q must be >= 1, got {q}")));
        }
        if !params.admits_bounds() {
            return Err(Error::Precondition(format!(
                "bounds need (alpha, m) in (0, 1]^2, got ({}, {})",
                params.alpha(),
                params.m()
            )));
        }
        if a < 0.0 || b > b_star {
            return Err(Error::Precondition(format!("[{a}, {b}] is not inside [0, {b_star}]")));
        }
        if b / params.m() > b_star {
            return Err(Error::Precondition(format!(
                "b/m = {} exceeds b* = {b_star}, so f'(b/m) is undefined",
                b / params.m()
            )));
        }
        g.check_range(a, b)?;
        let sampled = (0..SUP_CHECK_POINTS)
            .map(|k| g.value(grid_point(a, b, k, SUP_CHECK_POINTS - 1)).abs())
            .fold(0.0, f64::max);
        if !(g_sup >= sampled) {
            return Err(Error::Precondition(format!(
                "g_sup = {g_sup} is below the sampled sup of |g| ({sampled})"
            )));
        }
        let case = Self { pair, g, interval, x: a, q, params, g_sup };
        case.with_x(x)
    }

    /// Builds the case with `g_sup` measured by [`crate::quadrature::sup_norm`].
    pub fn with_measured_sup(
        pair: DifferentiablePair,
        g: RealFunction,
        interval: Interval,
        x: f64,
        q: f64,
        params: ConvexityParams,
    ) -> Result<Self> {
        let g_sup = crate::quadrature::sup_norm(&g, interval)?;
        Self::new(pair, g, interval, x, q, params, g_sup)
    }

    /// Same case at another `x`; only the new point is validated.
    pub fn with_x(&self, x: f64) -> Result<Self> {
        if !self.interval.contains(x) {
            return Err(Error::Precondition(format!(
                "x = {x} is outside [{}, {}]",
                self.interval.a(),
                self.interval.b()
            )));
        }
        Ok(Self { x, ..self.clone() })
    }

    pub fn pair(&self) -> &DifferentiablePair {
        &self.pair
    }

    pub fn f(&self) -> &RealFunction {
        self.pair.f()
    }

    pub fn f_prime(&self) -> &RealFunction {
        self.pair.f_prime()
    }

    pub fn g(&self) -> &RealFunction {
        &self.g
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn params(&self) -> ConvexityParams {
        self.params
    }

    pub fn g_sup(&self) -> f64 {
        self.g_sup
    }
}

/// A numerically evaluated quantity with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error_estimate: f64,
}

/// Outcome of one inequality instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem_id: TheoremId,
    pub lhs: f64,
    pub lhs_error_estimate: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tightness: f64,
    pub holds: bool,
}

impl BoundReport {
    /// `holds ⇔ lhs ≤ rhs + max(tol, tol·|rhs|) + lhs error estimate`.
    ///
    /// Tightness is `lhs/rhs`, clamped to 1 for cases that hold (equality
    /// cases land a few ulps either side of 1). When `rhs = 0` it is 0 for
    /// `lhs = 0`, 1 for a passing nonzero `lhs`, and infinite otherwise.
    pub fn assess(theorem_id: TheoremId, lhs: Estimate, rhs: f64, tol: f64) -> Self {
        let allowance = tol.max(tol * rhs.abs()) + lhs.error_estimate;
        let holds = lhs.value <= rhs + allowance;
        let tightness = if rhs > 0.0 {
            let ratio = lhs.value / rhs;
            if holds {
                ratio.min(1.0)
            } else {
                ratio
            }
        } else if lhs.value == 0.0 {
            0.0
        } else if holds {
            1.0
        } else {
            f64::INFINITY
        };
        Self {
            theorem_id,
            lhs: lhs.value,
            lhs_error_estimate: lhs.error_estimate,
            rhs,
            slack: rhs - lhs.value,
            tightness,
            holds,
        }
    }
}
