//! Built-in parametric function families.
//!
//! Functions are named on the command line and in suite files as
//! `name:param1:param2:...`, for example `monomial:2`, `exp:1:3` or
//! `pwl:0:0:0.5:1:1:0`.
//!
//! | family        | params                      | value                         |
//! |---------------|-----------------------------|-------------------------------|
//! | `const`       | `c`                         | `c`                           |
//! | `affine`      | `c0:c1`                     | `c0 + c1·t`                   |
//! | `monomial`    | `p` (p ≥ 1)                 | `t^p`                         |
//! | `negmonomial` | `p` (p ≥ 1)                 | `−t^p`                        |
//! | `power`       | `c:p`                       | `c·t^p`                       |
//! | `poly`        | `c0:c1:…:cn`                | `Σ ck·t^k`                    |
//! | `exp`         | `[c[:k]]` (defaults 1)      | `k·exp(c·t)`                  |
//! | `sin`, `cos`  | `[w[:k]]` (defaults 1)      | `k·sin(w·t)`, `k·cos(w·t)`    |
//! | `pwl`         | `x0:y0:x1:y1:…` (≥ 2 knots) | linear interpolation of knots |
//! | `step`        | `x0:…:xn:s0:…:s(n−1)`       | `sk` on `[xk, xk+1)`          |
//!
//! Non-integer and negative powers are only defined for `t ≥ 0`; a negative
//! power is infinite at 0, which checked evaluation rejects. `pwl` and `step`
//! are defined on `[x0, xn]`. Every other family is defined on the whole line.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Const,
    Affine,
    Monomial,
    NegMonomial,
    Power,
    Poly,
    Exp,
    Sin,
    Cos,
    Pwl,
    Step,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::Const,
        Family::Affine,
        Family::Monomial,
        Family::NegMonomial,
        Family::Power,
        Family::Poly,
        Family::Exp,
        Family::Sin,
        Family::Cos,
        Family::Pwl,
        Family::Step,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Const => "const",
            Family::Affine => "affine",
            Family::Monomial => "monomial",
            Family::NegMonomial => "negmonomial",
            Family::Power => "power",
            Family::Poly => "poly",
            Family::Exp => "exp",
            Family::Sin => "sin",
            Family::Cos => "cos",
            Family::Pwl => "pwl",
            Family::Step => "step",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A member of one of the registry families.
///
/// Construction validates the parameter list, so every `RealFunction` can be
/// evaluated anywhere inside [`RealFunction::domain`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RealFunction {
    family: Family,
    params: Vec<f64>,
}

fn invalid(family: Family, msg: impl fmt::Display) -> Error {
    Error::InvalidParameter(format!("{family}: {msg}"))
}

fn is_integral(p: f64) -> bool {
    p.fract() == 0.0 && p.abs() <= 64.0
}

fn pow_real(t: f64, p: f64) -> f64 {
    if is_integral(p) {
        t.powi(p as i32)
    } else {
        t.powf(p)
    }
}

impl RealFunction {
    pub fn new(family: Family, params: Vec<f64>) -> Result<Self> {
        if let Some(p) = params.iter().find(|p| !p.is_finite()) {
            return Err(invalid(family, format!("non-finite parameter {p}")));
        }
        let n = params.len();
        let arity_ok = match family {
            Family::Const | Family::Monomial | Family::NegMonomial => n == 1,
            Family::Affine | Family::Power => n == 2,
            Family::Poly => n >= 1,
            Family::Exp | Family::Sin | Family::Cos => n <= 2,
            Family::Pwl => n >= 4 && n.is_multiple_of(2),
            Family::Step => n >= 3 && n % 2 == 1,
        };
        if !arity_ok {
            return Err(invalid(family, format!("wrong number of parameters ({n})")));
        }
        match family {
            Family::Monomial | Family::NegMonomial if params[0] < 1.0 => {
                return Err(invalid(family, "exponent must be >= 1"));
            }
            Family::Pwl | Family::Step => {
                let knots = Self::knots_of(family, &params);
                if knots.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid(family, "knots must be strictly increasing"));
                }
            }
            _ => {}
        }
        Ok(Self { family, params })
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let mut parts = spec.trim().split(':');
        let family: Family = parts.next().unwrap_or_default().parse()?;
        let params = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(family, format!("cannot parse `{p}` as a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(family, params)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(Family::Const, vec![c]).expect("finite constant")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    fn knots_of(family: Family, params: &[f64]) -> Vec<f64> {
        match family {
            Family::Pwl => params.iter().step_by(2).copied().collect(),
            Family::Step => params[..params.len() / 2 + 1].to_vec(),
            _ => Vec::new(),
        }
    }

    /// Points where the function or its derivative is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        Self::knots_of(self.family, &self.params)
    }

    /// `false` for the piecewise families.
    pub fn is_smooth(&self) -> bool {
        !matches!(self.family, Family::Pwl | Family::Step)
    }

    /// Closed domain `[lo, hi]` on which the function is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self.family {
            Family::Monomial | Family::NegMonomial if !is_integral(self.params[0]) => {
                (0.0, f64::INFINITY)
            }
            Family::Power if self.params[1] < 0.0 || !is_integral(self.params[1]) => (0.0, f64::INFINITY),
            Family::Pwl | Family::Step => {
                let k = self.kinks();
                (k[0], k[k.len() - 1])
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.domain();
        t >= lo && t <= hi
    }

    /// Fails unless the whole of `[lo, hi]` is inside the domain.
    pub fn check_range(&self, lo: f64, hi: f64) -> Result<()> {
        for t in [lo, hi] {
            if !self.contains(t) {
                let (dlo, dhi) = self.domain();
                return Err(Error::OutsideDomain { function: self.to_string(), t, lo: dlo, hi: dhi });
            }
        }
        Ok(())
    }

    /// Checked evaluation: rejects points outside the domain and non-finite
    /// results.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || !self.contains(t) {
            let (lo, hi) = self.domain();
            return Err(Error::OutsideDomain { function: self.to_string(), t, lo, hi });
        }
        let value = self.value(t);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite { t, value })
        }
    }

    /// Unchecked evaluation. The caller has already verified the range with
    /// [`RealFunction::check_range`].
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        let p = &self.params;
        match self.family {
            Family::Const => p[0],
            Family::Affine => p[0] + p[1] * t,
            Family::Monomial => pow_real(t, p[0]),
            Family::NegMonomial => -pow_real(t, p[0]),
            Family::Power => p[0] * pow_real(t, p[1]),
            Family::Poly => p.iter().rev().fold(0.0, |acc, c| acc * t + c),
            Family::Exp => {
                let (c, k) = self.rate_and_scale();
                k * (c * t).exp()
            }
            Family::Sin => {
                let (w, k) = self.rate_and_scale();
                k * (w * t).sin()
            }
            Family::Cos => {
                let (w, k) = self.rate_and_scale();
                k * (w * t).cos()
            }
            Family::Pwl => {
                let n = p.len() / 2;
                let seg = segment_index(n, |i| p[2 * i], t);
                let (x0, y0, x1, y1) = (p[2 * seg], p[2 * seg + 1], p[2 * seg + 2], p[2 * seg + 3]);
                y0 + (y1 - y0) * (t - x0) / (x1 - x0)
            }
            Family::Step => {
                let n = p.len() / 2 + 1;
                let seg = segment_index(n, |i| p[i], t);
                p[n + seg]
            }
        }
    }

    fn rate_and_scale(&self) -> (f64, f64) {
        (self.params.first().copied().unwrap_or(1.0), self.params.get(1).copied().unwrap_or(1.0))
    }

    /// Exact derivative, as another registry member. Piecewise families get
    /// their almost-everywhere derivative.
    pub fn derivative(&self) -> RealFunction {
        let p = &self.params;
        let (family, params) = match self.family {
            Family::Const => (Family::Const, vec![0.0]),
            Family::Affine => (Family::Const, vec![p[1]]),
            Family::Monomial => (Family::Power, vec![p[0], p[0] - 1.0]),
            Family::NegMonomial => (Family::Power, vec![-p[0], p[0] - 1.0]),
            Family::Power if p[1] == 0.0 => (Family::Const, vec![0.0]),
            Family::Power => (Family::Power, vec![p[0] * p[1], p[1] - 1.0]),
            Family::Poly if p.len() == 1 => (Family::Const, vec![0.0]),
            Family::Poly => {
                (Family::Poly, p.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
            }
            Family::Exp => {
                let (c, k) = self.rate_and_scale();
                (Family::Exp, vec![c, k * c])
            }
            Family::Sin => {
                let (w, k) = self.rate_and_scale();
                (Family::Cos, vec![w, k * w])
            }
            Family::Cos => {
                let (w, k) = self.rate_and_scale();
                (Family::Sin, vec![w, -k * w])
            }
            Family::Pwl => {
                let n = p.len() / 2;
                let mut params: Vec<f64> = (0..n).map(|i| p[2 * i]).collect();
                params.extend(
                    (0..n - 1).map(|i| (p[2 * i + 3] - p[2 * i + 1]) / (p[2 * i + 2] - p[2 * i])),
                );
                (Family::Step, params)
            }
            Family::Step => {
                let k = self.kinks();
                (Family::Pwl, vec![k[0], 0.0, k[k.len() - 1], 0.0])
            }
        };
        RealFunction::new(family, params).expect("derivative of a valid family member is valid")
    }
}

/// Index of the segment `[x_i, x_{i+1})` containing `t`, with the last
/// segment closed on the right.
fn segment_index(n_knots: usize, knot: impl Fn(usize) -> f64, t: f64) -> usize {
    let (mut lo, mut hi) = (0, n_knots - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if t >= knot(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

impl fmt::Display for RealFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family.name())?;
        for p in &self.params {
            write!(f, ":{p}")?;
        }
        Ok(())
    }
}

impl FromStr for RealFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl TryFrom<String> for RealFunction {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Self::parse(&s)
    }
}

impl From<RealFunction> for String {
    fn from(f: RealFunction) -> String {
        f.to_string()
    }
}
