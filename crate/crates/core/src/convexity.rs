//! Grid checks of the `(α, m)`-convexity definition
//!
//! ```text
//! f(t·x + m(1−t)·y) ≤ t^α f(x) + m(1 − t^α) f(y)
//! ```
//!
//! A failing verdict carries a witness and is a proof of non-membership. A
//! passing verdict only means that no counterexample exists on the grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::pow_nonneg;
use crate::domain::{grid, ConvexityParams, DifferentiablePair, DomainSpec, Interval};
use crate::quadrature::{integrate, IntegralResult};
use crate::registry::RealFunction;
use crate::{Error, Result};

/// Relative tolerance on the defining inequality: a triple is a
/// counterexample when `gap > 1e-12·(1 + |rhs|)`.
pub const DEFINITION_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance of the Hermite-Hadamard check.
pub const HH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, nt: usize) -> Result<Self> {
        if nx < 2 || ny < 2 || nt < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid sizes must be >= 2, got ({nx}, {ny}, {nt})"
            )));
        }
        Ok(Self { nx, ny, nt })
    }

    /// Doubles the number of intervals along each axis, so the old grid is
    /// a subset of the new one.
    pub fn refined(&self) -> Self {
        Self { nx: 2 * self.nx - 1, ny: 2 * self.ny - 1, nt: 2 * self.nt - 1 }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nx: 51, ny: 51, nt: 51 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    /// `f(tx + m(1−t)y) − [t^α f(x) + m(1−t^α) f(y)]`
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl Verdict {
    fn from_witness(witness: Option<Witness>) -> Self {
        Self { holds: witness.is_none(), witness }
    }
}

/// Gap of the defining inequality at one triple, and the right-hand side it
/// was measured against.
#[inline]
pub fn definition_gap(h: impl Fn(f64) -> f64, params: ConvexityParams, x: f64, y: f64, t: f64) -> (f64, f64) {
    let ta = pow_nonneg(t, params.alpha());
    let m = params.m();
    let rhs = ta * h(x) + m * (1.0 - ta) * h(y);
    (h(t * x + m * (1.0 - t) * y) - rhs, rhs)
}

/// Worst counterexample over `xs × ys × ts`, or `None`.
///
/// Rows are swept in parallel and merged in row order; within the maximal
/// gap the lexicographically smallest `(x, y, t)` wins, so the result does
/// not depend on scheduling.
fn sweep<H>(h: H, params: ConvexityParams, xs: &[f64], ys: &[f64], ts: &[f64], b_star: f64) -> Result<Option<Witness>>
where
    H: Fn(f64) -> f64 + Sync,
{
    let m = params.m();
    let hx: Vec<f64> = xs.iter().map(|&x| h(x)).collect();
    let hy: Vec<f64> = ys.iter().map(|&y| h(y)).collect();
    let tas: Vec<f64> = ts.iter().map(|&t| pow_nonneg(t, params.alpha())).collect();

    let mut order: Vec<usize> = (0..ys.len()).collect();
    order.sort_by(|&i, &j| ys[i].total_cmp(&ys[j]));

    let rows: Vec<Option<Witness>> = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            let x = xs[i];
            let mut worst: Option<Witness> = None;
            for &j in &order {
                let y = ys[j];
                for (k, &t) in ts.iter().enumerate() {
                    let point = t * x + m * (1.0 - t) * y;
                    if !(0.0..=b_star).contains(&point) {
                        return Err(Error::DomainExit { point, b_star });
                    }
                    let rhs = tas[k] * hx[i] + m * (1.0 - tas[k]) * hy[j];
                    let gap = h(point) - rhs;
                    if gap.is_nan() {
                        return Err(Error::NonFinite { t: point, value: gap });
                    }
                    if gap > DEFINITION_TOLERANCE * (1.0 + rhs.abs())
                        && worst.is_none_or(|w| gap > w.gap)
                    {
                        worst = Some(Witness { x, y, t, gap });
                    }
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;

    let mut row_order: Vec<usize> = (0..xs.len()).collect();
    row_order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut worst: Option<Witness> = None;
    for i in row_order {
        if let Some(w) = rows[i] {
            if worst.is_none_or(|cur| w.gap > cur.gap) {
                worst = Some(w);
            }
        }
    }
    Ok(worst)
}

/// Checks the definition for `fn` on `[0, b*]² × [0, 1]`.
pub fn check_alpha_m_convex(
    f: &RealFunction,
    domain: DomainSpec,
    params: ConvexityParams,
    grid_spec: GridSpec,
) -> Result<Verdict> {
    let params = ConvexityParams::for_definition(params.alpha(), params.m())?;
    let b_star = domain.b_star();
    f.check_range(0.0, b_star)?;
    let xs = grid(0.0, b_star, grid_spec.nx);
    let ys = grid(0.0, b_star, grid_spec.ny);
    let ts = grid(0.0, 1.0, grid_spec.nt);
    sweep(|z| f.value(z), params, &xs, &ys, &ts, b_star).map(Verdict::from_witness)
}

/// Checks that `t ↦ |f'(t)|^q` is `(α, m)`-convex with `x, y` sampled on
/// `[a, b]`.
///
/// The `y` samples also include `b/m` when it lies beyond `b`: the bounds
/// apply the definition at `x = a, y = b/m`, so that point has to be covered
/// for a passing verdict to admit a case.
pub fn check_hypothesis(
    pair: &DifferentiablePair,
    q: f64,
    params: ConvexityParams,
    iv: Interval,
    grid_spec: GridSpec,
) -> Result<Verdict> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q must be >= 1, got {q}")));
    }
    let params = ConvexityParams::for_definition(params.alpha(), params.m())?;
    let b_star = pair.domain().b_star();
    let (a, b) = (iv.a(), iv.b());
    if a < 0.0 || b > b_star {
        return Err(Error::DomainExit { point: if a < 0.0 { a } else { b }, b_star });
    }
    let fp = pair.f_prime();
    let xs = grid(a, b, grid_spec.nx);
    let mut ys = grid(a, b, grid_spec.ny);
    if params.m() > 0.0 {
        let far = b / params.m();
        if far > b_star {
            return Err(Error::DomainExit { point: far, b_star });
        }
        if far > b {
            ys.push(far);
        }
    }
    let ts = grid(0.0, 1.0, grid_spec.nt);
    sweep(|z| pow_nonneg(fp.value(z).abs(), q), params, &xs, &ys, &ts, b_star).map(Verdict::from_witness)
}

/// Verdicts over an `α × m` parameter grid, row-major in `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMatrix {
    pub alphas: Vec<f64>,
    pub ms: Vec<f64>,
    pub verdicts: Vec<Verdict>,
}

impl RegionMatrix {
    pub fn get(&self, i_alpha: usize, i_m: usize) -> Verdict {
        self.verdicts[i_alpha * self.ms.len() + i_m]
    }

    /// `(α, m, verdict)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, Verdict)> + '_ {
        self.alphas
            .iter()
            .flat_map(move |&al| self.ms.iter().map(move |&m| (al, m)))
            .zip(&self.verdicts)
            .map(|((al, m), v)| (al, m, *v))
    }
}

pub fn classify_region(
    f: &RealFunction,
    domain: DomainSpec,
    alphas: &[f64],
    ms: &[f64],
    grid_spec: GridSpec,
) -> Result<RegionMatrix> {
    let mut verdicts = Vec::with_capacity(alphas.len() * ms.len());
    for &alpha in alphas {
        for &m in ms {
            let params = ConvexityParams::for_definition(alpha, m)?;
            verdicts.push(check_alpha_m_convex(f, domain, params, grid_spec)?);
        }
    }
    Ok(RegionMatrix { alphas: alphas.to_vec(), ms: ms.to_vec(), verdicts })
}

/// The three terms of the Hermite-Hadamard chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteHadamard {
    /// `f((a+b)/2)`
    pub midpoint: f64,
    /// `(1/(b−a)) ∫ₐᵇ f`
    pub mean: f64,
    /// `(f(a)+f(b))/2`
    pub endpoint_mean: f64,
    pub mean_error_estimate: f64,
    pub holds: bool,
}

/// `f((a+b)/2) ≤ (1/(b−a))∫f ≤ (f(a)+f(b))/2` up to `1e-9` plus the
/// quadrature error.
pub fn check_hh(f: &RealFunction, iv: Interval) -> Result<HermiteHadamard> {
    let IntegralResult { value, error_estimate, .. } = integrate(f, iv, 1e-12, 1e-12)?;
    let mean = value / iv.len();
    let mean_error_estimate = error_estimate / iv.len();
    let midpoint = f.eval(iv.midpoint())?;
    let endpoint_mean = 0.5 * (f.eval(iv.a())? + f.eval(iv.b())?);
    let slack = HH_TOLERANCE + mean_error_estimate;
    let holds = midpoint <= mean + slack && mean <= endpoint_mean + slack;
    Ok(HermiteHadamard { midpoint, mean, endpoint_mean, mean_error_estimate, holds })
}
