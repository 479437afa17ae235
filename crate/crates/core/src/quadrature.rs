//! Adaptive Simpson quadrature and the numerical identity checks built on it.
//!
//! Everything here is the oracle side of the crate: it never calls into
//! [`crate::bounds`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::domain::{grid, grid_point, BoundCase, Estimate, Interval};
use crate::registry::RealFunction;
use crate::{Error, Result};

/// Default subdivision budget.
pub const DEFAULT_PANEL_BUDGET: usize = 1 << 20;

/// Tolerance used for every left-hand side integral.
pub const LHS_TOLERANCE: f64 = 1e-10;

/// Tolerance of the outer integral on the right of the identities.
pub const OUTER_TOLERANCE: f64 = 1e-8;

/// Inner integrals (kernel evaluations) are computed this tightly.
pub const INNER_TOLERANCE: f64 = 1e-12;

/// Uniform panels the adaptive loop starts from.
const INITIAL_PANELS: usize = 8;

const SUP_SCAN_POINTS: usize = 10001;
const SUP_REFINE_STEPS: usize = 40;

/// Nodes of the antiderivative table used for the inner integrals.
const TABLE_NODES: usize = 4097;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl IntegralResult {
    const ZERO: IntegralResult = IntegralResult { value: 0.0, error_estimate: 0.0, evaluations: 0 };

    fn combine(self, other: IntegralResult) -> IntegralResult {
        IntegralResult {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    fn negate(self) -> IntegralResult {
        IntegralResult { value: -self.value, ..self }
    }
}

/// Globally adaptive Simpson rule.
///
/// Each panel carries the coarse (3-point) and fine (5-point) Simpson values;
/// `|fine − coarse| / 15` is its error estimate and the Richardson value
/// `fine + (fine − coarse) / 15` its contribution. The panel with the largest
/// estimate is bisected until the summed estimate is within
/// `max(abs_tol, rel_tol·|value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveSimpson {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    fl: f64,
    fr: f64,
    value: f64,
    error: f64,
    rounding: f64,
}

impl Panel {
    fn build<F>(f: &mut F, a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> Result<Panel>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let m = 0.5 * (a + b);
        let fl = eval_finite(f, 0.5 * (a + m))?;
        let fr = eval_finite(f, 0.5 * (m + b))?;
        let h = b - a;
        let coarse = h / 6.0 * (fa + 4.0 * fm + fb);
        let fine = h / 12.0 * (fa + 4.0 * fl + 2.0 * fm + 4.0 * fr + fb);
        let diff = fine - coarse;
        // rounding floor so exact rules still report a nonzero error
        let rounding = 8.0 * f64::EPSILON * h * (fa.abs() + fl.abs() + fm.abs() + fr.abs() + fb.abs());
        Ok(Panel { a, b, fa, fm, fb, fl, fr, value: fine + diff / 15.0, error: diff.abs() / 15.0 + rounding, rounding })
    }

    /// Bisection can still lower the error: the panel has room for new
    /// nodes and its estimate is not pure rounding (the floors of the two
    /// halves add up to the parent's).
    fn splittable(&self) -> bool {
        if self.error <= 2.0 * self.rounding {
            return false;
        }
        let m = 0.5 * (self.a + self.b);
        let q1 = 0.5 * (self.a + m);
        let q3 = 0.5 * (m + self.b);
        self.a < q1 && q1 < m && m < q3 && q3 < self.b
    }
}

struct Queued(Panel);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .error
            .total_cmp(&other.0.error)
            .then_with(|| other.0.a.total_cmp(&self.0.a))
    }
}

fn eval_finite<F>(f: &mut F, t: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let value = f(t)?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { t, value })
    }
}

impl AdaptiveSimpson {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, max_panels: DEFAULT_PANEL_BUDGET }
    }

    pub fn with_max_panels(self, max_panels: usize) -> Self {
        Self { max_panels, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be > 0, got abs {} rel {}",
                self.abs_tol, self.rel_tol
            )));
        }
        Ok(())
    }

    /// Signed integral of `f` from `a` to `b`.
    pub fn integrate<F>(&self, mut f: F, a: f64, b: f64) -> Result<IntegralResult>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        self.validate()?;
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidInterval { a, b, reason: "endpoints must be finite" });
        }
        match a.partial_cmp(&b) {
            Some(Ordering::Equal) => Ok(IntegralResult::ZERO),
            Some(Ordering::Greater) => Ok(self.integrate_forward(&mut f, b, a)?.negate()),
            _ => self.integrate_forward(&mut f, a, b),
        }
    }

    /// Like [`AdaptiveSimpson::integrate`], but splits `[a, b]` at every
    /// break point strictly inside it. Used for integrands with kinks or
    /// jumps: at an end that is a break point the integrand is sampled one
    /// ulp inside, so each piece sees the one-sided limit.
    pub fn integrate_split<F>(&self, mut f: F, a: f64, b: f64, breaks: &[f64]) -> Result<IntegralResult>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if a > b {
            return Ok(self.integrate_split(f, b, a, breaks)?.negate());
        }
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(a);
        edges.extend(cuts);
        edges.push(b);
        let pieces = (edges.len() - 1) as f64;
        let piece = Self { abs_tol: self.abs_tol / pieces, ..*self };
        let is_break = |t: f64| breaks.contains(&t);
        edges.windows(2).try_fold(IntegralResult::ZERO, |acc, w| {
            let (lo, hi) = (w[0], w[1]);
            let inner_lo = if is_break(lo) { lo.next_up() } else { lo };
            let inner_hi = if is_break(hi) { hi.next_down() } else { hi };
            let r = if inner_lo < inner_hi {
                piece.integrate(|t| f(t.clamp(inner_lo, inner_hi)), lo, hi)?
            } else {
                piece.integrate(&mut f, lo, hi)?
            };
            Ok(acc.combine(r))
        })
    }

    fn integrate_forward<F>(&self, f: &mut F, a: f64, b: f64) -> Result<IntegralResult>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut evaluations = 0usize;
        let mut heap = BinaryHeap::with_capacity(4 * INITIAL_PANELS);
        let mut frozen = Vec::new();

        let nodes: Vec<f64> = (0..=2 * INITIAL_PANELS).map(|k| grid_point(a, b, k, 2 * INITIAL_PANELS)).collect();
        let values = nodes.iter().map(|&t| eval_finite(f, t)).collect::<Result<Vec<_>>>()?;
        evaluations += values.len();
        for k in 0..INITIAL_PANELS {
            let (i, j, l) = (2 * k, 2 * k + 1, 2 * k + 2);
            let panel = Panel::build(f, nodes[i], nodes[l], values[i], values[j], values[l])?;
            evaluations += 2;
            heap.push(Queued(panel));
        }

        let mut total_value: f64 = heap.iter().map(|p| p.0.value).sum();
        let mut total_error: f64 = heap.iter().map(|p| p.0.error).sum();
        let tolerance = |value: f64| self.abs_tol.max(self.rel_tol * value.abs());

        loop {
            if total_error <= tolerance(total_value) {
                // resum to shed drift from the running totals
                let all = heap.iter().map(|p| &p.0).chain(frozen.iter());
                let (v, e) = all.fold((0.0, 0.0), |(v, e), p: &Panel| (v + p.value, e + p.error));
                total_value = v;
                total_error = e;
                if total_error <= tolerance(total_value) {
                    break;
                }
            }
            let panel_count = heap.len() + frozen.len();
            let Some(Queued(worst)) = heap.pop() else {
                return Err(Error::NoConvergence {
                    a,
                    b,
                    panels: panel_count,
                    error_estimate: total_error,
                    tolerance: tolerance(total_value),
                });
            };
            if panel_count >= self.max_panels {
                return Err(Error::NoConvergence {
                    a,
                    b,
                    panels: panel_count,
                    error_estimate: total_error,
                    tolerance: tolerance(total_value),
                });
            }
            if !worst.splittable() {
                frozen.push(worst);
                continue;
            }
            let m = 0.5 * (worst.a + worst.b);
            let left = Panel::build(f, worst.a, m, worst.fa, worst.fl, worst.fm)?;
            let right = Panel::build(f, m, worst.b, worst.fm, worst.fr, worst.fb)?;
            evaluations += 4;
            total_value += left.value + right.value - worst.value;
            total_error += left.error + right.error - worst.error;
            heap.push(Queued(left));
            heap.push(Queued(right));
        }

        let mut panels: Vec<Panel> = heap.into_iter().map(|q| q.0).chain(frozen).collect();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        let (value, error_estimate) = panels.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        Ok(IntegralResult { value, error_estimate, evaluations })
    }
}

fn lhs_rule() -> AdaptiveSimpson {
    AdaptiveSimpson::new(LHS_TOLERANCE, LHS_TOLERANCE)
}

fn merged_kinks(fs: &[&RealFunction], extra: &[f64]) -> Vec<f64> {
    let mut k: Vec<f64> = fs.iter().flat_map(|f| f.kinks()).chain(extra.iter().copied()).collect();
    k.sort_by(f64::total_cmp);
    k.dedup();
    k
}

/// `∫ₐᵇ f` for a registry function, split at its kinks.
pub fn integrate(f: &RealFunction, iv: Interval, abs_tol: f64, rel_tol: f64) -> Result<IntegralResult> {
    f.check_range(iv.a(), iv.b())?;
    AdaptiveSimpson::new(abs_tol, rel_tol).integrate_split(|t| Ok(f.value(t)), iv.a(), iv.b(), &f.kinks())
}

/// Sampled estimate of `sup |g|` on the interval.
///
/// A 10001-point scan finds the best sample; successive parabolic
/// interpolation on `|g|` then refines it inside the neighbouring samples.
/// The result is never below the best sample.
pub fn sup_norm(g: &RealFunction, iv: Interval) -> Result<f64> {
    g.check_range(iv.a(), iv.b())?;
    let n = SUP_SCAN_POINTS - 1;
    let abs_g = |t: f64| g.value(t).abs();
    let (mut best_k, mut best) = (0, f64::NEG_INFINITY);
    for k in 0..=n {
        let v = abs_g(grid_point(iv.a(), iv.b(), k, n));
        if !v.is_finite() {
            return Err(Error::NonFinite { t: grid_point(iv.a(), iv.b(), k, n), value: v });
        }
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let lo = grid_point(iv.a(), iv.b(), best_k.saturating_sub(1), n);
    let hi = grid_point(iv.a(), iv.b(), (best_k + 1).min(n), n);
    let mid = grid_point(iv.a(), iv.b(), best_k, n);
    Ok(refine_max(abs_g, lo, mid, hi, best))
}

/// Parabolic refinement of a sampled maximum bracketed by `[lo, hi]`.
fn refine_max(h: impl Fn(f64) -> f64, lo: f64, mid: f64, hi: f64, at_mid: f64) -> f64 {
    if !(lo < mid && mid < hi) {
        return at_mid;
    }
    let (mut x0, mut x1, mut x2) = (lo, mid, hi);
    let (mut y0, mut y1, mut y2) = (h(x0), at_mid, h(x2));
    let mut best = at_mid.max(y0).max(y2);
    for _ in 0..SUP_REFINE_STEPS {
        let d0 = (x1 - x0) * (y1 - y2);
        let d2 = (x1 - x2) * (y1 - y0);
        let denom = d0 - d2;
        if denom == 0.0 {
            break;
        }
        let v = x1 - 0.5 * ((x1 - x0) * d0 - (x1 - x2) * d2) / denom;
        if !(v > x0 && v < x2) || v == x1 {
            break;
        }
        let yv = h(v);
        if !yv.is_finite() {
            break;
        }
        best = best.max(yv);
        if yv >= y1 {
            // v becomes the centre; keep the bracket around it
            if v < x1 {
                (x2, y2) = (x1, y1);
            } else {
                (x0, y0) = (x1, y1);
            }
            (x1, y1) = (v, yv);
        } else if v < x1 {
            (x0, y0) = (v, yv);
        } else {
            (x2, y2) = (v, yv);
        }
        if (x2 - x0) <= 4.0 * f64::EPSILON * x1.abs().max(1.0) {
            break;
        }
    }
    best
}

fn check_point(iv: Interval, name: &str, t: f64) -> Result<()> {
    if iv.contains(t) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} = {t} is outside [{}, {}]", iv.a(), iv.b())))
    }
}

/// Signed `∫ₓᵗ g(s) ds`; exactly antisymmetric in `(x, t)`.
pub fn kernel_k(g: &RealFunction, iv: Interval, x: f64, t: f64) -> Result<f64> {
    check_point(iv, "x", x)?;
    check_point(iv, "t", t)?;
    g.check_range(iv.a(), iv.b())?;
    Ok(kernel_unchecked(g, x, t)?.value)
}

fn kernel_unchecked(g: &RealFunction, x: f64, t: f64) -> Result<IntegralResult> {
    let rule = AdaptiveSimpson::new(INNER_TOLERANCE, INNER_TOLERANCE);
    let kinks = g.kinks();
    if t >= x {
        rule.integrate_split(|s| Ok(g.value(s)), x, t, &kinks)
    } else {
        Ok(rule.integrate_split(|s| Ok(g.value(s)), t, x, &kinks)?.negate())
    }
}

/// The pair `(S_g(t), S(t))`: `(∫ₐᵗ g, t − a)` for `t < x`, otherwise
/// `(−∫ₜᵇ g, b − t)`.
pub fn step_weight(g: &RealFunction, iv: Interval, x: f64, t: f64) -> Result<(f64, f64)> {
    check_point(iv, "x", x)?;
    check_point(iv, "t", t)?;
    g.check_range(iv.a(), iv.b())?;
    let rule = AdaptiveSimpson::new(INNER_TOLERANCE, INNER_TOLERANCE);
    let kinks = g.kinks();
    if t < x {
        let sg = rule.integrate_split(|s| Ok(g.value(s)), iv.a(), t, &kinks)?.value;
        Ok((sg, t - iv.a()))
    } else {
        let sg = -rule.integrate_split(|s| Ok(g.value(s)), t, iv.b(), &kinks)?.value;
        Ok((sg, iv.b() - t))
    }
}

/// Signed `f(a)∫ₐˣg + f(b)∫ₓᵇg − ∫ₐᵇfg`, integrated as
/// `∫ₐˣ(f(a) − f)g + ∫ₓᵇ(f(b) − f)g` so that constant `f` gives exactly 0.
fn endpoint_expression(f: &RealFunction, g: &RealFunction, iv: Interval, x: f64) -> Result<IntegralResult> {
    let (a, b) = (iv.a(), iv.b());
    let (fa, fb) = (f.value(a), f.value(b));
    let kinks = merged_kinks(&[f, g], &[]);
    let rule = lhs_rule();
    let left = rule.integrate_split(|s| Ok((fa - f.value(s)) * g.value(s)), a, x, &kinks)?;
    let right = rule.integrate_split(|s| Ok((fb - f.value(s)) * g.value(s)), x, b, &kinks)?;
    Ok(left.combine(right))
}

/// Signed `f(x)∫ₐᵇg − ∫ₐᵇfg`, integrated as `∫ₐᵇ(f(x) − f)g`.
fn point_expression(f: &RealFunction, g: &RealFunction, iv: Interval, x: f64) -> Result<IntegralResult> {
    let fx = f.value(x);
    let kinks = merged_kinks(&[f, g], &[x]);
    lhs_rule().integrate_split(|s| Ok((fx - f.value(s)) * g.value(s)), iv.a(), iv.b(), &kinks)
}

/// `|f(a)∫ₐˣg + f(b)∫ₓᵇg − ∫ₐᵇfg|` by quadrature at `1e-10`.
pub fn lhs_endpoint(case: &BoundCase) -> Result<Estimate> {
    let r = endpoint_expression(case.f(), case.g(), case.interval(), case.x())?;
    Ok(Estimate { value: r.value.abs(), error_estimate: r.error_estimate })
}

/// `|f(x)∫ₐᵇg − ∫ₐᵇfg|` by quadrature at `1e-10`.
pub fn lhs_point(case: &BoundCase) -> Result<Estimate> {
    let r = point_expression(case.f(), case.g(), case.interval(), case.x())?;
    Ok(Estimate { value: r.value.abs(), error_estimate: r.error_estimate })
}

/// Both sides of an identity and their disagreement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Sum of the error estimates of every integral involved.
    pub error_estimate: f64,
}

impl IdentityResidual {
    fn new(lhs: IntegralResult, rhs: IntegralResult, inner_error: f64) -> Self {
        Self {
            lhs: lhs.value,
            rhs: rhs.value,
            residual: (lhs.value - rhs.value).abs(),
            error_estimate: lhs.error_estimate + rhs.error_estimate + inner_error,
        }
    }
}

/// `G(t) = ∫ₐᵗ g` on a uniform grid, read back by cubic Hermite
/// interpolation with the exact slopes `g(tₖ)`.
struct AntiderivativeTable<'a> {
    g: &'a RealFunction,
    a: f64,
    b: f64,
    h: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    /// Bound on the accumulated panel error (Boole vs. composite Simpson).
    error_estimate: f64,
}

impl<'a> AntiderivativeTable<'a> {
    fn build(g: &'a RealFunction, iv: Interval) -> Self {
        let (a, b) = (iv.a(), iv.b());
        let nodes = grid(a, b, TABLE_NODES);
        let mut values = Vec::with_capacity(TABLE_NODES);
        let mut acc = 0.0;
        let mut error_estimate = 0.0;
        values.push(0.0);
        for w in nodes.windows(2) {
            let (t0, t4) = (w[0], w[1]);
            let h = t4 - t0;
            let f: [f64; 5] = std::array::from_fn(|i| g.value(t0 + h * i as f64 / 4.0));
            let boole = h / 90.0 * (7.0 * f[0] + 32.0 * f[1] + 12.0 * f[2] + 32.0 * f[3] + 7.0 * f[4]);
            let simpson = h / 12.0 * (f[0] + 4.0 * f[1] + 2.0 * f[2] + 4.0 * f[3] + f[4]);
            acc += boole;
            error_estimate += (boole - simpson).abs() + f64::EPSILON * acc.abs();
            values.push(acc);
        }
        Self { g, a, b, h: (b - a) / (TABLE_NODES - 1) as f64, nodes, values, error_estimate }
    }

    fn eval(&self, t: f64) -> f64 {
        let last = TABLE_NODES - 2;
        let k = (((t - self.a) / self.h).floor().max(0.0) as usize).min(last);
        let (t0, t1) = (self.nodes[k], self.nodes[k + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.values[k] + h10 * h * self.g.value(t0) + h01 * self.values[k + 1] + h11 * h * self.g.value(t1)
    }

    fn total(&self) -> f64 {
        self.values[TABLE_NODES - 1]
    }

    fn span(&self) -> f64 {
        self.b - self.a
    }
}

fn validate_identity_case(case: &BoundCase) -> Result<()> {
    let iv = case.interval();
    case.f().check_range(iv.a(), iv.b())?;
    case.f_prime().check_range(iv.a(), iv.b())?;
    case.g().check_range(iv.a(), iv.b())
}

fn deriv_sup(fp: &RealFunction, iv: Interval) -> f64 {
    grid(iv.a(), iv.b(), 1001).into_iter().map(|t| fp.value(t).abs()).fold(0.0, f64::max)
}

/// Residual of `f(a)∫ₐˣg + f(b)∫ₓᵇg − ∫fg = ∫ₐᵇ(∫ₓᵗg) f'(t) dt`.
///
/// The inner integral comes from an antiderivative table when `g` is smooth
/// and from nested adaptive quadrature otherwise.
pub fn residual_lemma11(case: &BoundCase) -> Result<IdentityResidual> {
    validate_identity_case(case)?;
    let (f, fp, g, iv, x) = (case.f(), case.f_prime(), case.g(), case.interval(), case.x());
    let lhs = endpoint_expression(f, g, iv, x)?;
    let outer = AdaptiveSimpson::new(OUTER_TOLERANCE, LHS_TOLERANCE);
    let kinks = merged_kinks(&[f, g], &[x]);
    if g.is_smooth() {
        let table = AntiderivativeTable::build(g, iv);
        let gx = table.eval(x);
        let rhs = outer.integrate_split(|t| Ok((table.eval(t) - gx) * fp.value(t)), iv.a(), iv.b(), &kinks)?;
        let inner = 2.0 * table.error_estimate * deriv_sup(fp, iv) * table.span();
        Ok(IdentityResidual::new(lhs, rhs, inner))
    } else {
        let rhs = outer.integrate_split(
            |t| Ok(kernel_unchecked(g, x, t)?.value * fp.value(t)),
            iv.a(),
            iv.b(),
            &kinks,
        )?;
        let inner = INNER_TOLERANCE * deriv_sup(fp, iv) * iv.len();
        Ok(IdentityResidual::new(lhs, rhs, inner))
    }
}

/// Residual of `f(x)∫ₐᵇg − ∫ₐᵇfg = ∫ₐᵇ S_g(t) f'(t) dt`, with the right side
/// integrated over `[a, x)` and `[x, b]` separately.
pub fn residual_lemma12(case: &BoundCase) -> Result<IdentityResidual> {
    validate_identity_case(case)?;
    let (f, fp, g, iv, x) = (case.f(), case.f_prime(), case.g(), case.interval(), case.x());
    let lhs = point_expression(f, g, iv, x)?;
    let outer = AdaptiveSimpson::new(OUTER_TOLERANCE, LHS_TOLERANCE);
    let kinks = merged_kinks(&[f, g], &[]);
    let (a, b) = (iv.a(), iv.b());
    if g.is_smooth() {
        let table = AntiderivativeTable::build(g, iv);
        let total = table.total();
        let left = outer.integrate_split(|t| Ok(table.eval(t) * fp.value(t)), a, x, &kinks)?;
        let right = outer.integrate_split(|t| Ok(-(total - table.eval(t)) * fp.value(t)), x, b, &kinks)?;
        let inner = 2.0 * table.error_estimate * deriv_sup(fp, iv) * table.span();
        Ok(IdentityResidual::new(lhs, left.combine(right), inner))
    } else {
        let rule = AdaptiveSimpson::new(INNER_TOLERANCE, INNER_TOLERANCE);
        let gk = g.kinks();
        let left = outer.integrate_split(
            |t| Ok(rule.integrate_split(|s| Ok(g.value(s)), a, t, &gk)?.value * fp.value(t)),
            a,
            x,
            &kinks,
        )?;
        let right = outer.integrate_split(
            |t| Ok(-rule.integrate_split(|s| Ok(g.value(s)), t, b, &gk)?.value * fp.value(t)),
            x,
            b,
            &kinks,
        )?;
        let inner = 2.0 * INNER_TOLERANCE * deriv_sup(fp, iv) * iv.len();
        Ok(IdentityResidual::new(lhs, left.combine(right), inner))
    }
}

/// `max_t (|S_g(t)| − g_sup·S(t))` over `samples` equally spaced points,
/// with `g_sup` from [`sup_norm`]. Non-positive when the envelope holds.
pub fn envelope_excess(g: &RealFunction, iv: Interval, x: f64, samples: usize) -> Result<f64> {
    check_point(iv, "x", x)?;
    let g_sup = sup_norm(g, iv)?;
    let mut worst = f64::NEG_INFINITY;
    for t in grid(iv.a(), iv.b(), samples.max(2)) {
        let (sg, s) = step_weight(g, iv, x, t)?;
        worst = worst.max(sg.abs() - g_sup * s);
    }
    Ok(worst)
}
