//! Closed-form right-hand sides.
//!
//! Notation used below: `P = ((x−a)² + (b−x)²)/2` is the total of the
//! absolute-moment weight, `dₐ = |f'(a)|^q` and `d* = |f'(b/m)|^q`. The
//! `(α, m)` bounds all have the shape
//!
//! ```text
//! ‖g‖∞ · P^((q−1)/q) · { C·dₐ + m·(P − C)·d* }^(1/q)
//! ```
//!
//! with `C = M` for the endpoint (trapezoid) form and `C = A` for the point
//! (midpoint) form.

use serde::{Deserialize, Serialize};

use crate::domain::{BoundCase, Interval, TheoremId};
use crate::quadrature::{AdaptiveSimpson, IntegralResult};
use crate::{Error, Result};

/// `r^e` for `r ≥ 0` with `r^0 = 1` (also for `r = 0`) and `0^e = 0` for
/// `e > 0`.
pub fn pow_nonneg(r: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if r == 0.0 {
        0.0
    } else {
        r.powf(e)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")))
    }
}

fn check_x(iv: Interval, x: f64) -> Result<()> {
    if iv.contains(x) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("x = {x} is outside [{}, {}]", iv.a(), iv.b())))
    }
}

/// `((x−a)² + (b−x)²) / 2 = ∫ₐᵇ|t−x| dt`.
pub fn moment_total(iv: Interval, x: f64) -> f64 {
    let (l, r) = (x - iv.a(), iv.b() - x);
    0.5 * (l * l + r * r)
}

/// `M = ((b−a)^(α+1)[2x−b−a+α(x−a)] + 2(b−x)^(α+2)) / ((α+1)(α+2)(b−a)^α)`.
pub fn constant_m(iv: Interval, x: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_x(iv, x)?;
    let (a, b, len) = (iv.a(), iv.b(), iv.len());
    let num = len.powf(alpha + 1.0) * (2.0 * x - b - a + alpha * (x - a)) + 2.0 * (b - x).powf(alpha + 2.0);
    Ok(num / ((alpha + 1.0) * (alpha + 2.0) * len.powf(alpha)))
}

/// `A = ((b−a)^(α+2) + (b−x)^(α+1)[(a−x)(2+α) + α(b−x)]) / ((α+1)(α+2)(b−a)^α)`.
pub fn constant_a(iv: Interval, x: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_x(iv, x)?;
    let (a, b, len) = (iv.a(), iv.b(), iv.len());
    let num = len.powf(alpha + 2.0) + (b - x).powf(alpha + 1.0) * ((a - x) * (2.0 + alpha) + alpha * (b - x));
    Ok(num / ((alpha + 1.0) * (alpha + 2.0) * len.powf(alpha)))
}

/// The integrals evaluated in closed form inside the two main proofs.
/// `w(t) = ((b−t)/(b−a))^α` throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProofIntegral {
    /// `∫ₐᵇ |t−x| w(t) dt = M`
    T21WeightedAlpha,
    /// `∫ₐᵇ |t−x| (1 − w(t)) dt = P − M`
    T21Complement,
    /// `∫ₐˣ (t−a) w(t) dt`
    T22LeftAlpha,
    /// `∫ₓᵇ (b−t) w(t) dt`
    T22RightAlpha,
    /// `∫ₓᵇ (b−t)(1 − w(t)) dt`
    T22RightComplement,
    /// `∫ₐˣ (t−a)(1 − w(t)) dt`
    T22LeftComplement,
    /// `∫ₐᵇ S(t) dt = P`
    STotal,
}

impl ProofIntegral {
    pub const ALL: [ProofIntegral; 7] = [
        ProofIntegral::T21WeightedAlpha,
        ProofIntegral::T21Complement,
        ProofIntegral::T22LeftAlpha,
        ProofIntegral::T22RightAlpha,
        ProofIntegral::T22RightComplement,
        ProofIntegral::T22LeftComplement,
        ProofIntegral::STotal,
    ];
}

fn t22_left_alpha(iv: Interval, x: f64, alpha: f64) -> f64 {
    let (a, b, len) = (iv.a(), iv.b(), iv.len());
    let num = len.powf(alpha + 2.0) + (b - x).powf(alpha + 1.0) * (2.0 * a - b - x + alpha * (a - x));
    num / (len.powf(alpha) * (alpha + 1.0) * (alpha + 2.0))
}

fn t22_right_alpha(iv: Interval, x: f64, alpha: f64) -> f64 {
    (iv.b() - x).powf(alpha + 2.0) / (iv.len().powf(alpha) * (alpha + 2.0))
}

/// Closed form of one proof integral.
pub fn proof_integral(id: ProofIntegral, iv: Interval, x: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_x(iv, x)?;
    let (a, b) = (iv.a(), iv.b());
    Ok(match id {
        ProofIntegral::T21WeightedAlpha => constant_m(iv, x, alpha)?,
        ProofIntegral::T21Complement => moment_total(iv, x) - constant_m(iv, x, alpha)?,
        ProofIntegral::T22LeftAlpha => t22_left_alpha(iv, x, alpha),
        ProofIntegral::T22RightAlpha => t22_right_alpha(iv, x, alpha),
        ProofIntegral::T22RightComplement => 0.5 * (b - x).powi(2) - t22_right_alpha(iv, x, alpha),
        ProofIntegral::T22LeftComplement => 0.5 * (x - a).powi(2) - t22_left_alpha(iv, x, alpha),
        ProofIntegral::STotal => moment_total(iv, x),
    })
}

/// Quadrature of the integral a [`ProofIntegral`] stands for. Independent of
/// the closed forms above; split at `x` where the integrand has a kink.
pub fn proof_integral_oracle(id: ProofIntegral, iv: Interval, x: f64, alpha: f64, tol: f64) -> Result<IntegralResult> {
    check_alpha(alpha)?;
    check_x(iv, x)?;
    let (a, b, len) = (iv.a(), iv.b(), iv.len());
    let w = move |t: f64| ((b - t) / len).max(0.0).powf(alpha);
    let rule = AdaptiveSimpson::new(tol, tol);
    match id {
        ProofIntegral::T21WeightedAlpha => rule.integrate_split(|t| Ok((t - x).abs() * w(t)), a, b, &[x]),
        ProofIntegral::T21Complement => rule.integrate_split(|t| Ok((t - x).abs() * (1.0 - w(t))), a, b, &[x]),
        ProofIntegral::T22LeftAlpha => rule.integrate(|t| Ok((t - a) * w(t)), a, x),
        ProofIntegral::T22RightAlpha => rule.integrate(|t| Ok((b - t) * w(t)), x, b),
        ProofIntegral::T22RightComplement => rule.integrate(|t| Ok((b - t) * (1.0 - w(t))), x, b),
        ProofIntegral::T22LeftComplement => rule.integrate(|t| Ok((t - a) * (1.0 - w(t))), a, x),
        ProofIntegral::STotal => rule.integrate_split(|t| Ok(if t < x { t - a } else { b - t }), a, b, &[x]),
    }
}

/// Oracle value of `M`: `∫ₐᵇ |t−x| ((b−t)/(b−a))^α dt`.
pub fn constant_m_oracle(iv: Interval, x: f64, alpha: f64, tol: f64) -> Result<IntegralResult> {
    proof_integral_oracle(ProofIntegral::T21WeightedAlpha, iv, x, alpha, tol)
}

/// Oracle value of `A`: `∫ₐˣ(t−a)w + ∫ₓᵇ(b−t)w`.
pub fn constant_a_oracle(iv: Interval, x: f64, alpha: f64, tol: f64) -> Result<IntegralResult> {
    let left = proof_integral_oracle(ProofIntegral::T22LeftAlpha, iv, x, alpha, tol)?;
    let right = proof_integral_oracle(ProofIntegral::T22RightAlpha, iv, x, alpha, tol)?;
    Ok(IntegralResult {
        value: left.value + right.value,
        error_estimate: left.error_estimate + right.error_estimate,
        evaluations: left.evaluations + right.evaluations,
    })
}

/// The numbers a bound depends on, detached from any concrete `f` and `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub interval: Interval,
    pub x: f64,
    pub q: f64,
    pub alpha: f64,
    pub m: f64,
    pub g_sup: f64,
    /// `|f'(a)|`
    pub deriv_a: f64,
    /// `|f'(b)|`, used by the classical bounds
    pub deriv_b: f64,
    /// `|f'(b/m)|`, used by the `(α, m)` bounds
    pub deriv_b_over_m: f64,
}

impl BoundInputs {
    pub fn from_case(case: &BoundCase) -> Result<Self> {
        let iv = case.interval();
        let fp = case.f_prime();
        let params = case.params();
        Ok(Self {
            interval: iv,
            x: case.x(),
            q: case.q(),
            alpha: params.alpha(),
            m: params.m(),
            g_sup: case.g_sup(),
            deriv_a: fp.eval(iv.a())?.abs(),
            deriv_b: fp.eval(iv.b())?.abs(),
            deriv_b_over_m: fp.eval(iv.b() / params.m())?.abs(),
        })
    }

    fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        check_x(self.interval, self.x)?;
        if !(self.m > 0.0 && self.m <= 1.0) {
            return Err(Error::InvalidParameter(format!("m must lie in (0, 1], got {}", self.m)));
        }
        if !(self.q >= 1.0 && self.q.is_finite()) {
            return Err(Error::InvalidParameter(format!("q must be >= 1, got {}", self.q)));
        }
        Ok(())
    }

    fn require_midpoint(&self, id: TheoremId) -> Result<()> {
        if self.interval.is_midpoint(self.x) {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "{id} needs x at the midpoint {}, got {}",
                self.interval.midpoint(),
                self.x
            )))
        }
    }

    fn dq(&self, d: f64) -> f64 {
        pow_nonneg(d, self.q)
    }

    /// `‖g‖ · P^((q−1)/q) · {C·dₐ + m(P − C)·d*}^(1/q)`
    fn alpha_m_shape(&self, c: f64) -> f64 {
        let p = moment_total(self.interval, self.x);
        let q = self.q;
        let brace = c * self.dq(self.deriv_a) + self.m * (p - c) * self.dq(self.deriv_b_over_m);
        self.g_sup * pow_nonneg(p, (q - 1.0) / q) * pow_nonneg(brace, 1.0 / q)
    }

    /// Trapezoid-type bound for `(α, m)`-convex `|f'|^q`.
    pub fn theorem21(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.alpha_m_shape(constant_m(self.interval, self.x, self.alpha)?))
    }

    /// Midpoint-type bound for `(α, m)`-convex `|f'|^q`.
    pub fn theorem22(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.alpha_m_shape(constant_a(self.interval, self.x, self.alpha)?))
    }

    fn symmetric_shape(&self, c_a: f64, c_far: f64) -> f64 {
        let (q, alpha, len) = (self.q, self.alpha, self.interval.len());
        let brace = c_a * self.dq(self.deriv_a) + self.m * c_far * self.dq(self.deriv_b_over_m);
        self.g_sup
            * pow_nonneg(1.0 / ((alpha + 1.0) * (alpha + 2.0)), 1.0 / q)
            * (len * len / 4f64.powf(1.0 - 1.0 / q))
            * pow_nonneg(brace, 1.0 / q)
    }

    /// Weighted trapezoid bound at the midpoint, symmetric `g`.
    pub fn corollary21(&self) -> Result<f64> {
        self.validate()?;
        self.require_midpoint(TheoremId::C21)?;
        let al = self.alpha;
        let two_a = 2f64.powf(al);
        let c_a = (al * two_a + 1.0) / (2.0 * two_a);
        let c_far = (two_a * (al * al + al + 2.0) - 2.0) / (4.0 * two_a);
        Ok(self.symmetric_shape(c_a, c_far))
    }

    /// Weighted midpoint bound.
    pub fn corollary22(&self) -> Result<f64> {
        self.validate()?;
        self.require_midpoint(TheoremId::C22)?;
        let al = self.alpha;
        let two_a = 2f64.powf(al);
        let c_a = (2.0 * two_a - 1.0) / (2.0 * two_a);
        let c_far = (two_a * (al * al + 3.0 * al - 2.0) + 2.0) / (4.0 * two_a);
        Ok(self.symmetric_shape(c_a, c_far))
    }

    fn classical_shape(&self, coef_a: f64, coef_b: f64) -> f64 {
        let p = moment_total(self.interval, self.x);
        let q = self.q;
        let brace = coef_a * self.dq(self.deriv_a) + coef_b * self.dq(self.deriv_b);
        self.g_sup * pow_nonneg(p, (q - 1.0) / q) * pow_nonneg(brace, 1.0 / q)
    }

    /// Trapezoid-type bound for convex `|f'|^q`.
    pub fn theorem13(&self) -> Result<f64> {
        check_x(self.interval, self.x)?;
        let (a, b, x) = (self.interval.a(), self.interval.b(), self.x);
        let den = 6.0 * (b - a);
        let coef_a = ((x - a).powi(2) * (3.0 * b - x - 2.0 * a) + (b - x).powi(3)) / den;
        let coef_b = ((x - a).powi(3) + (b - x).powi(2) * (2.0 * b + x - 3.0 * a)) / den;
        Ok(self.classical_shape(coef_a, coef_b))
    }

    /// Midpoint-type bound for convex `|f'|^q`.
    pub fn theorem14(&self) -> Result<f64> {
        check_x(self.interval, self.x)?;
        let (a, b, x) = (self.interval.a(), self.interval.b(), self.x);
        let den = 6.0 * (b - a);
        let coef_a = ((x - a).powi(2) * (3.0 * b - a - 2.0 * x) + 2.0 * (b - x).powi(3)) / den;
        let coef_b = (2.0 * (x - a).powi(3) + (b - x).powi(2) * (b + 2.0 * x - 3.0 * a)) / den;
        Ok(self.classical_shape(coef_a, coef_b))
    }

    /// `‖g‖ ((b−a)²/4) [(|f'(a)|^q + |f'(b)|^q)/2]^(1/q)`, shared by the
    /// weighted trapezoid and weighted midpoint inequalities.
    pub fn classical_symmetric(&self, which: TheoremId) -> Result<f64> {
        if !matches!(which, TheoremId::C11 | TheoremId::C12) {
            return Err(Error::InvalidParameter(format!("{which} is not a classical corollary")));
        }
        self.require_midpoint(which)?;
        let len = self.interval.len();
        let mean = 0.5 * (self.dq(self.deriv_a) + self.dq(self.deriv_b));
        Ok(self.g_sup * len * len / 4.0 * pow_nonneg(mean, 1.0 / self.q))
    }

    pub fn evaluate(&self, id: TheoremId) -> Result<f64> {
        match id {
            TheoremId::T13 => self.theorem13(),
            TheoremId::T14 => self.theorem14(),
            TheoremId::C11 | TheoremId::C12 => self.classical_symmetric(id),
            TheoremId::T21 => self.theorem21(),
            TheoremId::T22 => self.theorem22(),
            TheoremId::C21 => self.corollary21(),
            TheoremId::C22 => self.corollary22(),
        }
    }
}

/// Points at which symmetry of `g` about the midpoint is sampled.
const SYMMETRY_SAMPLES: usize = 101;
const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// `g(a + s) = g(b − s)` at 101 sampled `s`, to `1e-10`.
pub fn is_symmetric(g: &crate::RealFunction, iv: Interval) -> Result<bool> {
    g.check_range(iv.a(), iv.b())?;
    let n = SYMMETRY_SAMPLES - 1;
    Ok((0..=n).all(|k| {
        let s = crate::domain::grid_point(0.0, iv.len(), k, n);
        (g.value(iv.a() + s) - g.value(iv.b() - s)).abs() <= SYMMETRY_TOLERANCE
    }))
}

/// Right-hand side of `id` for a concrete case, including the symmetry
/// precondition of the trapezoid corollaries.
pub fn bound(case: &BoundCase, id: TheoremId) -> Result<f64> {
    if id.requires_symmetric_g() && !is_symmetric(case.g(), case.interval())? {
        return Err(Error::Precondition(format!("{id} needs g symmetric about the midpoint")));
    }
    BoundInputs::from_case(case)?.evaluate(id)
}

pub fn bound_theorem21(case: &BoundCase) -> Result<f64> {
    bound(case, TheoremId::T21)
}

pub fn bound_theorem22(case: &BoundCase) -> Result<f64> {
    bound(case, TheoremId::T22)
}

pub fn bound_corollary21(case: &BoundCase) -> Result<f64> {
    bound(case, TheoremId::C21)
}

pub fn bound_corollary22(case: &BoundCase) -> Result<f64> {
    bound(case, TheoremId::C22)
}

pub fn bound_theorem13(case: &BoundCase) -> Result<f64> {
    bound(case, TheoremId::T13)
}

pub fn bound_theorem14(case: &BoundCase) -> Result<f64> {
    bound(case, TheoremId::T14)
}

pub fn bound_classical_symmetric(case: &BoundCase, which: TheoremId) -> Result<f64> {
    bound(case, which)
}
