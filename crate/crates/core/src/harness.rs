//! End-to-end verification of the bounds against the quadrature oracle.
//!
//! A case is first gated on its convexity hypothesis, so the suite can tell
//! "theorem does not apply" apart from "theorem violated". Admitted cases get
//! their left-hand side from [`crate::quadrature`] and their right-hand side
//! from [`crate::bounds`].

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundInputs};
use crate::convexity::{check_hypothesis, GridSpec, Verdict, Witness};
use crate::domain::{grid, BoundCase, BoundReport, ConvexityParams, DifferentiablePair, DomainSpec, Estimate, Interval, TheoremId};
use crate::quadrature::{lhs_endpoint, lhs_point, sup_norm};
use crate::registry::RealFunction;
use crate::{Error, Result};

/// Tolerance of the `holds` rule.
pub const HOLDS_TOLERANCE: f64 = 1e-9;

/// Name of the CSV report inside the output directory.
pub const CSV_REPORT: &str = "report.csv";
/// Name of the JSON report inside the output directory.
pub const JSON_REPORT: &str = "report.json";

pub const CSV_HEADER: &str = "theorem_id,family_f,family_g,a,b,x,q,alpha,m,lhs,rhs,slack,tightness,holds";

const BUNDLED_SUITE: &str = include_str!("../suites/default.json");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub grid: GridSpec,
    pub holds_tolerance: f64,
    /// Skip the hypothesis check and evaluate regardless.
    pub ungated: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { grid: GridSpec::default(), holds_tolerance: HOLDS_TOLERANCE, ungated: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CaseOutcome {
    Verified(BoundReport),
    HypothesisRejected(Verdict),
}

impl CaseOutcome {
    pub fn report(&self) -> Option<&BoundReport> {
        match self {
            CaseOutcome::Verified(r) => Some(r),
            CaseOutcome::HypothesisRejected(_) => None,
        }
    }
}

/// Parameters whose class membership of `|f'|^q` the theorem assumes.
fn hypothesis_params(case: &BoundCase, theorem: TheoremId) -> ConvexityParams {
    if theorem.is_classical() {
        ConvexityParams::convex()
    } else {
        case.params()
    }
}

fn lhs_for(case: &BoundCase, theorem: TheoremId) -> Result<Estimate> {
    if theorem.is_endpoint_form() {
        lhs_endpoint(case)
    } else {
        lhs_point(case)
    }
}

/// Evaluates one case without looking at the hypothesis.
pub fn evaluate_case(case: &BoundCase, theorem: TheoremId, holds_tolerance: f64) -> Result<BoundReport> {
    let rhs = bounds::bound(case, theorem)?;
    let lhs = lhs_for(case, theorem)?;
    Ok(BoundReport::assess(theorem, lhs, rhs, holds_tolerance))
}

/// Gates on the hypothesis, then compares the oracle left-hand side with the
/// closed-form right-hand side.
pub fn verify_case(case: &BoundCase, theorem: TheoremId, opts: &VerifyOptions) -> Result<CaseOutcome> {
    if !opts.ungated {
        let params = hypothesis_params(case, theorem);
        let verdict = check_hypothesis(case.pair(), case.q(), params, case.interval(), opts.grid)?;
        if !verdict.holds {
            return Ok(CaseOutcome::HypothesisRejected(verdict));
        }
    }
    evaluate_case(case, theorem, opts.holds_tolerance).map(CaseOutcome::Verified)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub report: std::result::Result<BoundReport, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepOutcome {
    Reports(Vec<SweepPoint>),
    HypothesisRejected(Verdict),
}

/// [`verify_case`] at `x = a + k(b−a)/(n−1)`, `k = 0..n`. A failing point is
/// recorded and the sweep continues.
pub fn sweep_x(template: &BoundCase, n_points: usize, theorem: TheoremId, opts: &VerifyOptions) -> Result<SweepOutcome> {
    if n_points < 2 {
        return Err(Error::InvalidParameter(format!("a sweep needs at least 2 points, got {n_points}")));
    }
    if !opts.ungated {
        let params = hypothesis_params(template, theorem);
        let iv = template.interval();
        let verdict = check_hypothesis(template.pair(), template.q(), params, iv, opts.grid)?;
        if !verdict.holds {
            return Ok(SweepOutcome::HypothesisRejected(verdict));
        }
    }
    let iv = template.interval();
    let points = grid(iv.a(), iv.b(), n_points)
        .into_iter()
        .map(|x| {
            let report = template
                .with_x(x)
                .and_then(|case| evaluate_case(&case, theorem, opts.holds_tolerance))
                .map_err(|e| e.to_string());
            SweepPoint { x, report }
        })
        .collect();
    Ok(SweepOutcome::Reports(points))
}

/// Largest disagreement of each `(α, m)` bound with its classical
/// counterpart at `α = m = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionSummary {
    pub cases: usize,
    pub max_residual: f64,
    pub pairs: Vec<(TheoremId, TheoremId, f64)>,
}

/// `[|T21−T13|, |T22−T14|, |C21−C11|, |C22−C12|]` at `α = m = 1`. The
/// corollary pairs are evaluated at the midpoint whatever `inputs.x` is.
pub fn reduction_residuals(inputs: &BoundInputs) -> Result<[f64; 4]> {
    let mut at = BoundInputs { alpha: 1.0, m: 1.0, deriv_b_over_m: inputs.deriv_b, ..*inputs };
    let t = [
        (at.theorem21()? - at.theorem13()?).abs(),
        (at.theorem22()? - at.theorem14()?).abs(),
    ];
    at.x = at.interval.midpoint();
    Ok([
        t[0],
        t[1],
        (at.corollary21()? - at.classical_symmetric(TheoremId::C11)?).abs(),
        (at.corollary22()? - at.classical_symmetric(TheoremId::C12)?).abs(),
    ])
}

pub const REDUCTION_PAIRS: [(TheoremId, TheoremId); 4] = [
    (TheoremId::T21, TheoremId::T13),
    (TheoremId::T22, TheoremId::T14),
    (TheoremId::C21, TheoremId::C11),
    (TheoremId::C22, TheoremId::C12),
];

/// Random draws of `(x, q, |f'(a)|, |f'(b)|, ‖g‖)`, each checked with
/// [`reduction_residuals`].
pub fn reduction_check(iv: Interval, n_cases: usize, seed: u64) -> Result<ReductionSummary> {
    if n_cases == 0 {
        return Err(Error::InvalidParameter("reduction check needs at least one case".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 4];
    for _ in 0..n_cases {
        let deriv_b = rng.gen_range(0.0..5.0);
        let inputs = BoundInputs {
            interval: iv,
            x: rng.gen_range(iv.a()..=iv.b()),
            q: rng.gen_range(1.0..4.0),
            alpha: 1.0,
            m: 1.0,
            g_sup: rng.gen_range(0.1..2.0),
            deriv_a: rng.gen_range(0.0..5.0),
            deriv_b,
            deriv_b_over_m: deriv_b,
        };
        let r = reduction_residuals(&inputs)?;
        for (w, v) in worst.iter_mut().zip(r) {
            *w = w.max(v);
        }
    }
    let pairs: Vec<_> = REDUCTION_PAIRS.iter().zip(worst).map(|(&(s, c), v)| (s, c, v)).collect();
    Ok(ReductionSummary { cases: n_cases, max_residual: worst.into_iter().fold(0.0, f64::max), pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XSpec {
    /// `n` equally spaced points including both ends.
    Sweep(usize),
    Points(Vec<f64>),
}

fn default_q() -> Vec<f64> {
    vec![1.0]
}

fn default_one() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSpec {
    pub f: RealFunction,
    pub g: RealFunction,
    pub a: f64,
    pub b: f64,
    pub x: XSpec,
    #[serde(default = "default_q")]
    pub q: Vec<f64>,
    #[serde(default = "default_one")]
    pub alpha: Vec<f64>,
    #[serde(default = "default_one")]
    pub m: Vec<f64>,
    pub theorems: Vec<TheoremId>,
    /// Right end of the domain of `f`; defaults to `b / min(m)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_star: Option<f64>,
}

/// Seeded random cases with piecewise-linear `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzSpec {
    pub count: usize,
    #[serde(default = "FuzzSpec::default_knots")]
    pub knots: usize,
}

impl FuzzSpec {
    fn default_knots() -> usize {
        5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub holds: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { holds: HOLDS_TOLERANCE }
    }
}

fn default_seed() -> u64 {
    0x5EED
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("reports")
}

fn default_jobs() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub cases: Vec<CaseSpec>,
    #[serde(default)]
    pub fuzz: Option<FuzzSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: SuiteConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The suite shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_SUITE).expect("bundled suite is valid")
    }

    pub fn validate(&self) -> Result<()> {
        let fuzz = self.fuzz.as_ref().map_or(0, |f| f.count);
        if self.cases.is_empty() && fuzz == 0 {
            return Err(Error::Config("the case list is empty".into()));
        }
        if let Some(f) = &self.fuzz {
            if f.knots < 2 {
                return Err(Error::Config("fuzz cases need at least 2 knots".into()));
            }
        }
        GridSpec::new(self.grid.nx, self.grid.ny, self.grid.nt).map_err(|e| Error::Config(e.to_string()))?;
        if !(self.tolerances.holds > 0.0) {
            return Err(Error::Config("the holds tolerance must be > 0".into()));
        }
        for (i, c) in self.cases.iter().enumerate() {
            c.validate().map_err(|e| Error::Config(format!("case {i}: {e}")))?;
        }
        Ok(())
    }

    /// Explicit cases followed by the seeded fuzz cases.
    pub fn expanded_cases(&self) -> Vec<CaseSpec> {
        let mut cases = self.cases.clone();
        if let Some(fuzz) = &self.fuzz {
            cases.extend(fuzz_cases(fuzz, self.seed));
        }
        cases
    }
}

impl CaseSpec {
    fn validate(&self) -> Result<()> {
        let iv = Interval::new(self.a, self.b)?;
        if self.theorems.is_empty() {
            return Err(Error::Config("no theorems listed".into()));
        }
        if self.q.is_empty() || self.q.iter().any(|&q| !(q >= 1.0 && q.is_finite())) {
            return Err(Error::Config(format!("q values must be >= 1, got {:?}", self.q)));
        }
        if self.alpha.is_empty() || self.m.is_empty() {
            return Err(Error::Config("alpha and m lists must be nonempty".into()));
        }
        for &al in &self.alpha {
            for &m in &self.m {
                ConvexityParams::new(al, m)?;
            }
        }
        match &self.x {
            XSpec::Sweep(n) if *n < 2 => return Err(Error::Config("an x sweep needs at least 2 points".into())),
            XSpec::Points(p) if p.is_empty() || p.iter().any(|&x| !iv.contains(x)) => {
                return Err(Error::Config(format!("x points must be nonempty and inside [{}, {}]", self.a, self.b)))
            }
            _ => {}
        }
        if let Some(bs) = self.b_star {
            DomainSpec::new(bs)?;
        }
        Ok(())
    }

    fn interval(&self) -> Interval {
        Interval::new(self.a, self.b).expect("validated")
    }

    fn xs(&self) -> Vec<f64> {
        match &self.x {
            XSpec::Sweep(n) => grid(self.a, self.b, *n),
            XSpec::Points(p) => p.clone(),
        }
    }

    fn b_star(&self) -> f64 {
        self.b_star.unwrap_or_else(|| {
            let m_min = self.m.iter().copied().fold(1.0, f64::min);
            self.b / m_min
        })
    }
}

const FUZZ_F: [&str; 3] = ["monomial:2", "monomial:3", "exp"];
const FUZZ_Q: [f64; 4] = [1.0, 1.5, 2.0, 3.0];
const FUZZ_PARAMS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

fn fuzz_cases(spec: &FuzzSpec, seed: u64) -> Vec<CaseSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..spec.count)
        .map(|_| {
            let mut knots: Vec<f64> = (0..spec.knots - 2).map(|_| rng.gen_range(0.0..1.0)).collect();
            knots.push(0.0);
            knots.push(1.0);
            knots.sort_by(f64::total_cmp);
            knots.dedup();
            let params: Vec<f64> = knots.iter().flat_map(|&k| [k, rng.gen_range(-1.0..1.0)]).collect();
            let g = RealFunction::new(crate::Family::Pwl, params).expect("sorted knots");
            let f = RealFunction::parse(FUZZ_F.choose(&mut rng).expect("nonempty")).expect("valid family");
            CaseSpec {
                f,
                g,
                a: 0.0,
                b: 1.0,
                x: XSpec::Points(vec![rng.gen_range(0.0..=1.0)]),
                q: vec![*FUZZ_Q.choose(&mut rng).expect("nonempty")],
                alpha: vec![*FUZZ_PARAMS.choose(&mut rng).expect("nonempty")],
                m: vec![*FUZZ_PARAMS.choose(&mut rng).expect("nonempty")],
                theorems: vec![TheoremId::T21, TheoremId::T22],
                b_star: None,
            }
        })
        .collect()
}

/// One row of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case: usize,
    pub family_f: String,
    pub family_g: String,
    pub a: f64,
    pub b: f64,
    pub x: f64,
    pub q: f64,
    pub alpha: f64,
    pub m: f64,
    #[serde(flatten)]
    pub report: BoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRecord {
    pub case: usize,
    pub family_f: String,
    pub q: f64,
    pub alpha: f64,
    pub m: f64,
    pub theorems: Vec<TheoremId>,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub case: usize,
    pub theorem_id: Option<TheoremId>,
    pub x: Option<f64>,
    pub q: Option<f64>,
    pub alpha: Option<f64>,
    pub m: Option<f64>,
    pub message: String,
}

impl ErrorRecord {
    fn for_case(case: usize, message: String) -> Self {
        Self { case, theorem_id: None, x: None, q: None, alpha: None, m: None, message }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub seed: u64,
    pub reports: Vec<CaseRecord>,
    pub violations: usize,
    pub hypothesis_rejections: usize,
    pub max_tightness: Option<f64>,
    pub min_tightness: Option<f64>,
    pub rejections: Vec<RejectionRecord>,
    pub errors: Vec<ErrorRecord>,
    /// Not persisted: reports must be byte-identical across runs.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Per-case data shared by every unit of the case.
struct Prepared {
    spec: CaseSpec,
    interval: Interval,
    pair: DifferentiablePair,
    g_sup: f64,
    xs: Vec<f64>,
}

fn prepare(spec: &CaseSpec) -> Result<Prepared> {
    let interval = spec.interval();
    let domain = DomainSpec::new(spec.b_star().max(spec.b))?;
    let pair = DifferentiablePair::from_function(spec.f.clone(), domain)?;
    let g_sup = sup_norm(&spec.g, interval)?;
    Ok(Prepared { spec: spec.clone(), interval, pair, g_sup, xs: spec.xs() })
}

/// A set of theorems sharing one hypothesis check.
struct Unit {
    case: usize,
    q: f64,
    params: ConvexityParams,
    theorems: Vec<TheoremId>,
}

impl Unit {
    fn hypothesis_key(&self) -> (usize, u64, u64, u64) {
        (self.case, self.q.to_bits(), self.params.alpha().to_bits(), self.params.m().to_bits())
    }
}

fn units_for(case: usize, spec: &CaseSpec) -> Vec<Unit> {
    let classical: Vec<TheoremId> = spec.theorems.iter().copied().filter(|t| t.is_classical()).collect();
    let general: Vec<TheoremId> = spec.theorems.iter().copied().filter(|t| !t.is_classical()).collect();
    let mut units = Vec::new();
    for &q in &spec.q {
        if !classical.is_empty() {
            units.push(Unit { case, q, params: ConvexityParams::convex(), theorems: classical.clone() });
        }
        if general.is_empty() {
            continue;
        }
        for &alpha in &spec.alpha {
            for &m in &spec.m {
                let params = ConvexityParams::new(alpha, m).expect("validated");
                units.push(Unit { case, q, params, theorems: general.clone() });
            }
        }
    }
    units
}

fn theorem_xs(theorem: TheoremId, prepared: &Prepared) -> Vec<f64> {
    if theorem.requires_midpoint() {
        vec![prepared.interval.midpoint()]
    } else {
        prepared.xs.clone()
    }
}

/// Runs the suite without writing anything.
pub fn execute_suite(config: &SuiteConfig) -> Result<SuiteResult> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} worker threads: {e}", config.jobs)))?;
    pool.install(|| execute_in_pool(config))
}

fn execute_in_pool(config: &SuiteConfig) -> Result<SuiteResult> {
    let started = Instant::now();
    let specs = config.expanded_cases();
    let prepared: Vec<std::result::Result<Prepared, String>> =
        specs.par_iter().map(|s| prepare(s).map_err(|e| e.to_string())).collect();

    let units: Vec<Unit> = specs.iter().enumerate().flat_map(|(i, s)| units_for(i, s)).collect();

    let mut hypothesis_keys: Vec<(usize, u64, u64, u64)> = units
        .iter()
        .filter(|u| prepared[u.case].is_ok())
        .map(Unit::hypothesis_key)
        .collect();
    hypothesis_keys.sort_unstable();
    hypothesis_keys.dedup();
    let verdicts: HashMap<(usize, u64, u64, u64), std::result::Result<Verdict, String>> = hypothesis_keys
        .par_iter()
        .map(|&key| {
            let (case, q, alpha, m) = key;
            let p = prepared[case].as_ref().expect("filtered");
            let params = ConvexityParams::new(f64::from_bits(alpha), f64::from_bits(m)).expect("validated");
            let verdict = check_hypothesis(&p.pair, f64::from_bits(q), params, p.interval, config.grid)
                .map_err(|e| e.to_string());
            (key, verdict)
        })
        .collect();

    // The left-hand side depends on (f, g, [a, b], x, form) only.
    let mut lhs_keys: Vec<(usize, bool, u64)> = units
        .iter()
        .filter(|u| matches!(verdicts.get(&u.hypothesis_key()), Some(Ok(v)) if v.holds))
        .flat_map(|u| {
            let p = prepared[u.case].as_ref().expect("admitted");
            u.theorems
                .iter()
                .flat_map(move |&t| theorem_xs(t, p).into_iter().map(move |x| (u.case, t.is_endpoint_form(), x.to_bits())))
        })
        .collect();
    lhs_keys.sort_unstable();
    lhs_keys.dedup();
    let lhs_values: HashMap<(usize, bool, u64), std::result::Result<Estimate, String>> = lhs_keys
        .par_iter()
        .map(|&key| {
            let (case, endpoint, x) = key;
            let p = prepared[case].as_ref().expect("admitted");
            let theorem = if endpoint { TheoremId::T21 } else { TheoremId::T22 };
            let value = BoundCase::new(
                p.pair.clone(),
                p.spec.g.clone(),
                p.interval,
                f64::from_bits(x),
                1.0,
                ConvexityParams::convex(),
                p.g_sup,
            )
            .and_then(|c| lhs_for(&c, theorem))
            .map_err(|e| e.to_string());
            (key, value)
        })
        .collect();

    let mut result = SuiteResult {
        seed: config.seed,
        reports: Vec::new(),
        violations: 0,
        hypothesis_rejections: 0,
        max_tightness: None,
        min_tightness: None,
        rejections: Vec::new(),
        errors: Vec::new(),
        wall_time: Duration::ZERO,
    };

    for (i, p) in prepared.iter().enumerate() {
        if let Err(message) = p {
            result.errors.push(ErrorRecord::for_case(i, message.clone()));
        }
    }

    for unit in &units {
        let Ok(p) = prepared[unit.case].as_ref() else { continue };
        let (alpha, m) = (unit.params.alpha(), unit.params.m());
        let unit_error = |theorem_id, x, message| ErrorRecord {
            case: unit.case,
            theorem_id,
            x,
            q: Some(unit.q),
            alpha: Some(alpha),
            m: Some(m),
            message,
        };
        match &verdicts[&unit.hypothesis_key()] {
            Err(message) => {
                result.errors.push(unit_error(None, None, format!("hypothesis check failed: {message}")));
                continue;
            }
            Ok(v) if !v.holds => {
                result.hypothesis_rejections += 1;
                result.rejections.push(RejectionRecord {
                    case: unit.case,
                    family_f: p.spec.f.to_string(),
                    q: unit.q,
                    alpha,
                    m,
                    theorems: unit.theorems.clone(),
                    witness: v.witness,
                });
                continue;
            }
            Ok(_) => {}
        }
        let template = match BoundCase::new(
            p.pair.clone(),
            p.spec.g.clone(),
            p.interval,
            p.interval.a(),
            unit.q,
            unit.params,
            p.g_sup,
        ) {
            Ok(t) => t,
            Err(e) => {
                result.errors.push(unit_error(None, None, e.to_string()));
                continue;
            }
        };
        for &theorem in &unit.theorems {
            for x in theorem_xs(theorem, p) {
                let evaluated = template.with_x(x).and_then(|case| {
                    let rhs = bounds::bound(&case, theorem)?;
                    let key = (unit.case, theorem.is_endpoint_form(), x.to_bits());
                    let lhs = lhs_values[&key].clone().map_err(Error::Precondition)?;
                    Ok(BoundReport::assess(theorem, lhs, rhs, config.tolerances.holds))
                });
                match evaluated {
                    Ok(report) => result.reports.push(CaseRecord {
                        case: unit.case,
                        family_f: p.spec.f.to_string(),
                        family_g: p.spec.g.to_string(),
                        a: p.interval.a(),
                        b: p.interval.b(),
                        x,
                        q: unit.q,
                        alpha,
                        m,
                        report,
                    }),
                    Err(e) => result.errors.push(unit_error(Some(theorem), Some(x), e.to_string())),
                }
            }
        }
    }

    result.violations = result.reports.iter().filter(|r| !r.report.holds).count();
    let passing = result.reports.iter().filter(|r| r.report.holds).map(|r| r.report.tightness);
    result.max_tightness = passing.clone().reduce(f64::max);
    result.min_tightness = passing.reduce(f64::min);
    result.wall_time = started.elapsed();
    Ok(result)
}

/// Runs the suite and writes `report.csv` and `report.json` into the
/// configured output directory.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteResult> {
    let result = execute_suite(config)?;
    write_reports(config, &result, &config.output_dir)?;
    Ok(result)
}

/// Reals in the CSV report: 17 significant digits.
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn render_csv(result: &SuiteResult) -> String {
    let mut out = String::with_capacity(256 * (result.reports.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &result.reports {
        let rep = &r.report;
        let reals = [r.a, r.b, r.x, r.q, r.alpha, r.m, rep.lhs, rep.rhs, rep.slack, rep.tightness];
        out.push_str(rep.theorem_id.name());
        out.push(',');
        out.push_str(&csv_field(&r.family_f));
        out.push(',');
        out.push_str(&csv_field(&r.family_g));
        for v in reals {
            out.push(',');
            out.push_str(&format_real(v));
        }
        out.push(',');
        out.push_str(if rep.holds { "true" } else { "false" });
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    seed: u64,
    config: serde_json::Value,
    result: &'a SuiteResult,
}

/// The config echo leaves out `output_dir` and `jobs`: they do not affect
/// the results, and the report must not change with them.
pub fn render_json(config: &SuiteConfig, result: &SuiteResult) -> Result<String> {
    let mut echo = serde_json::to_value(SuiteConfig { seed: result.seed, ..config.clone() })?;
    if let Some(map) = echo.as_object_mut() {
        map.remove("output_dir");
        map.remove("jobs");
    }
    let mut text = serde_json::to_string_pretty(&JsonReport { seed: result.seed, config: echo, result })?;
    text.push('\n');
    Ok(text)
}

fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents.as_bytes())?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes both reports; nothing is written unless both render.
pub fn write_reports(config: &SuiteConfig, result: &SuiteResult, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let csv = render_csv(result);
    let json = render_json(config, result)?;
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(CSV_REPORT);
    let json_path = dir.join(JSON_REPORT);
    write_atomically(&csv_path, &csv)?;
    write_atomically(&json_path, &json)?;
    Ok((csv_path, json_path))
}
