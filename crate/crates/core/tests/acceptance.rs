#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Acceptance criteria, one line each. Runs as a plain binary so the
//! verdict lines are always printed; exits non-zero when any criterion fails.

mod common;

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use hhbound::bounds::{constant_a, constant_m};
use hhbound::convexity::{check_alpha_m_convex, definition_gap, GridSpec};
use hhbound::domain::grid;
use hhbound::harness::{reduction_check, run_suite, verify_case, CaseOutcome, SuiteConfig, VerifyOptions};
use hhbound::quadrature::{envelope_excess, residual_lemma11, residual_lemma12};
use hhbound::{BoundCase, ConvexityParams, DifferentiablePair, DomainSpec, Interval, RealFunction, TheoremId};

const CONSTANT_REL_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-7;
const ENVELOPE_TOL: f64 = 1e-10;
const REDUCTION_TOL: f64 = 1e-12;
const HOLDS_TOL: f64 = 1e-9;
const SPOT_TOL: f64 = 1e-9;

struct Verdict {
    pass: bool,
    detail: String,
}

fn func(spec: &str) -> RealFunction {
    RealFunction::parse(spec).expect("valid family")
}

fn unit_case(f: &str, g: &str, x: f64, q: f64, alpha: f64, m: f64) -> BoundCase {
    let iv = Interval::new(0.0, 1.0).unwrap();
    let pair = DifferentiablePair::from_function(func(f), DomainSpec::new(1.0 / m).unwrap()).unwrap();
    BoundCase::with_measured_sup(pair, func(g), iv, x, q, ConvexityParams::new(alpha, m).unwrap()).unwrap()
}

fn closed_form_constants() -> Verdict {
    let started = Instant::now();
    let (mut checks, mut worst_m, mut worst_a) = (0, 0.0f64, 0.0f64);
    for (a, b) in [(0.0, 1.0), (2.0, 5.0)] {
        let iv = Interval::new(a, b).unwrap();
        for alpha in [0.25, 0.5, 0.75, 1.0] {
            for x in grid(a, b, 11) {
                let m = constant_m(iv, x, alpha).unwrap();
                let am = constant_a(iv, x, alpha).unwrap();
                let m_ref = common::m_integral(a, b, x, alpha);
                let a_ref = common::a_integral(a, b, x, alpha);
                worst_m = worst_m.max((m - m_ref).abs() / m_ref.abs());
                worst_a = worst_a.max((am - a_ref).abs() / a_ref.abs());
                checks += 1;
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    Verdict {
        pass: checks == 88 && worst_m <= CONSTANT_REL_TOL && worst_a <= CONSTANT_REL_TOL && secs < 10.0,
        detail: format!("{checks} checks each, max rel err M={worst_m:.2e} A={worst_a:.2e}, {secs:.2}s"),
    }
}

fn identity_suite() -> Verdict {
    let iv = Interval::new(0.0, 1.0).unwrap();
    let (mut cases, mut worst11, mut worst12, mut worst_env) = (0, 0.0f64, 0.0f64, f64::NEG_INFINITY);
    for f in ["monomial:2", "monomial:3", "exp", "affine:1:2"] {
        for g in ["const:1", "monomial:1", "sin"] {
            for x in grid(0.0, 1.0, 20) {
                let case = unit_case(f, g, x, 1.0, 1.0, 1.0);
                worst11 = worst11.max(residual_lemma11(&case).unwrap().residual);
                worst12 = worst12.max(residual_lemma12(&case).unwrap().residual);
                worst_env = worst_env.max(envelope_excess(&func(g), iv, x, 1001).unwrap());
                cases += 1;
            }
        }
    }
    Verdict {
        pass: cases == 240 && worst11 <= IDENTITY_TOL && worst12 <= IDENTITY_TOL && worst_env <= ENVELOPE_TOL,
        detail: format!(
            "{cases} cases, max residuals {worst11:.2e} / {worst12:.2e}, max envelope excess {worst_env:.2e}"
        ),
    }
}

fn reduction_suite() -> Verdict {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (a, b, seed) in [(0.0, 1.0, 11), (2.0, 5.0, 12)] {
        let summary = reduction_check(Interval::new(a, b).unwrap(), 100, seed).unwrap();
        worst = worst.max(summary.max_residual);
        for (s, c, r) in summary.pairs {
            parts.push(format!("{s}/{c}@[{a},{b}]={r:.1e}"));
        }
    }
    Verdict { pass: worst <= REDUCTION_TOL, detail: format!("100 cases per pair, max {worst:.2e} ({})", parts.join(" ")) }
}

fn main_inequality_suite(out: &std::path::Path) -> Verdict {
    let mut config = SuiteConfig::bundled();
    config.jobs = 1;
    config.output_dir = out.to_path_buf();

    let covered = |f: &str, g: &str| {
        config.cases.iter().any(|c| {
            c.f.to_string() == f
                && c.g.to_string() == g
                && c.a == 0.0
                && c.b == 1.0
                && c.x == hhbound::harness::XSpec::Sweep(21)
                && [1.0, 1.5, 2.0, 3.0].iter().all(|q| c.q.contains(q))
                && [0.25, 0.5, 0.75, 1.0].iter().all(|p| c.alpha.contains(p) && c.m.contains(p))
                && c.theorems.contains(&TheoremId::T21)
                && c.theorems.contains(&TheoremId::T22)
        })
    };
    let coverage = ["monomial:2", "monomial:3", "exp"]
        .iter()
        .all(|f| ["const:1", "monomial:1", "poly:0:1:-1", "sin"].iter().all(|g| covered(f, g)));

    let started = Instant::now();
    let result = run_suite(&config).unwrap();
    let secs = started.elapsed().as_secs_f64();
    let violations = result
        .reports
        .iter()
        .filter(|r| !(r.report.lhs <= r.report.rhs + HOLDS_TOL + r.report.lhs_error_estimate) || !r.report.holds)
        .count();
    let main_reports = result
        .reports
        .iter()
        .filter(|r| matches!(r.report.theorem_id, TheoremId::T21 | TheoremId::T22))
        .count();
    Verdict {
        pass: coverage && violations == 0 && result.violations == 0 && main_reports > 0 && result.errors.is_empty() && secs < 300.0,
        detail: format!(
            "coverage={coverage}, {} reports ({main_reports} main), {violations} violations, {} rejected, {} errors, {secs:.1}s",
            result.reports.len(),
            result.hypothesis_rejections,
            result.errors.len()
        ),
    }
}

fn spot_checks() -> Verdict {
    let opts = VerifyOptions::default();
    let report = |case: &BoundCase, id| match verify_case(case, id, &opts).unwrap() {
        CaseOutcome::Verified(r) => Some(r),
        CaseOutcome::HypothesisRejected(_) => None,
    };
    let mid = unit_case("monomial:2", "const:1", 0.5, 1.0, 1.0, 1.0);
    let (Some(t21), Some(t22)) = (report(&mid, TheoremId::T21), report(&mid, TheoremId::T22)) else {
        return Verdict { pass: false, detail: "hypothesis unexpectedly rejected".into() };
    };
    let edge = unit_case("monomial:2", "const:1", 0.0, 1.0, 1.0, 1.0);
    let Some(eq) = report(&edge, TheoremId::T21) else {
        return Verdict { pass: false, detail: "hypothesis unexpectedly rejected".into() };
    };
    let pass = (t21.lhs - 1.0 / 6.0).abs() <= SPOT_TOL
        && t21.rhs == 0.25
        && (t22.lhs - 1.0 / 12.0).abs() <= SPOT_TOL
        && t22.rhs == 0.25
        && (eq.tightness - 1.0).abs() <= SPOT_TOL
        && eq.holds;
    Verdict {
        pass,
        detail: format!(
            "T21 lhs={:e} rhs={:e}; T22 lhs={:e} rhs={:e}; x=a tightness={:e} holds={}",
            t21.lhs, t21.rhs, t22.lhs, t22.rhs, eq.tightness, eq.holds
        ),
    }
}

fn convexity_checker() -> Verdict {
    let grid_spec = GridSpec::default();
    let unit = DomainSpec::new(1.0).unwrap();
    let convex = ConvexityParams::convex();
    let square = check_alpha_m_convex(&func("monomial:2"), unit, convex, grid_spec).unwrap();
    let neg = func("negmonomial:2");
    let first = check_alpha_m_convex(&neg, unit, convex, grid_spec).unwrap();
    let second = check_alpha_m_convex(&neg, unit, convex, grid_spec).unwrap();
    let witness_ok = match first.witness {
        Some(w) => {
            let h = |t: f64| -t * t;
            let gap = h(w.t * w.x + (1.0 - w.t) * w.y) - (w.t * h(w.x) + (1.0 - w.t) * h(w.y));
            let (lib_gap, _) = definition_gap(|t| neg.value(t), convex, w.x, w.y, w.t);
            (gap - w.gap).abs() <= 1e-12 && (lib_gap - w.gap).abs() <= 1e-12
        }
        None => false,
    };
    let mut disagreements = Vec::new();
    for spec in common::REGISTRY_SAMPLES {
        let f = func(spec);
        let lib = check_alpha_m_convex(&f, unit, convex, grid_spec).unwrap().holds;
        let plain = common::plain_convex_on_grid(|t| f.value(t), 0.0, 1.0, grid_spec.nx, grid_spec.nt);
        if lib != plain {
            disagreements.push(spec);
        }
    }
    Verdict {
        pass: square.holds && !first.holds && first == second && witness_ok && disagreements.is_empty(),
        detail: format!(
            "x^2 holds={}, -x^2 witness={:?} reproducible={}, {} families compared, disagreements={disagreements:?}",
            square.holds,
            first.witness.map(|w| (w.x, w.y, w.t, w.gap)),
            first == second,
            common::REGISTRY_SAMPLES.len()
        ),
    }
}

fn determinism(first: &std::path::Path, second: &std::path::Path) -> Verdict {
    let mut config = SuiteConfig::bundled();
    config.jobs = 2;
    config.output_dir = second.to_path_buf();
    if let Err(e) = run_suite(&config) {
        return Verdict { pass: false, detail: format!("second run failed: {e}") };
    }
    let same = |name: &str| fs::read(first.join(name)).ok().is_some_and(|a| Some(a) == fs::read(second.join(name)).ok());
    let (csv, json) = (same("report.csv"), same("report.json"));
    Verdict { pass: csv && json, detail: format!("csv identical={csv}, json identical={json} (jobs 1 vs 2)") }
}

type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Verdict + 'a>);

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temp dir");
    let (run1, run2) = (tmp.path().join("run1"), tmp.path().join("run2"));
    let criteria: Vec<Criterion> = vec![
        ("closed-form constants vs quadrature", Box::new(closed_form_constants)),
        ("kernel identities and envelope", Box::new(identity_suite)),
        ("reduction to the classical bounds", Box::new(reduction_suite)),
        ("main inequality suite", Box::new(|| main_inequality_suite(&run1))),
        ("known-value spot checks", Box::new(spot_checks)),
        ("convexity checker", Box::new(convexity_checker)),
        ("determinism", Box::new(|| determinism(&tmp.path().join("run1"), &run2))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let v = check();
        println!("criterion {} {name}: {} ({})", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
