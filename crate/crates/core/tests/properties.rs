mod common;

use hhbound::bounds::{constant_a, constant_m, moment_total, BoundInputs};
use hhbound::convexity::{check_alpha_m_convex, GridSpec};
use hhbound::quadrature::{envelope_excess, kernel_k, lhs_endpoint, lhs_point, AdaptiveSimpson};
use hhbound::{BoundCase, ConvexityParams, DifferentiablePair, DomainSpec, Family, Interval, RealFunction, TheoremId};
use proptest::prelude::*;

fn smooth_function() -> impl Strategy<Value = RealFunction> {
    prop_oneof![
        (-3.0..3.0f64).prop_map(|c| RealFunction::new(Family::Const, vec![c]).unwrap()),
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| RealFunction::new(Family::Affine, vec![a, b]).unwrap()),
        (1.0..5.0f64).prop_map(|p| RealFunction::new(Family::Monomial, vec![p]).unwrap()),
        (1.0..5.0f64).prop_map(|p| RealFunction::new(Family::NegMonomial, vec![p]).unwrap()),
        (-2.0..2.0f64, 0.0..4.0f64).prop_map(|(c, p)| RealFunction::new(Family::Power, vec![c, p]).unwrap()),
        prop::collection::vec(-2.0..2.0f64, 1..6).prop_map(|c| RealFunction::new(Family::Poly, c).unwrap()),
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(c, k)| RealFunction::new(Family::Exp, vec![c, k]).unwrap()),
        (-4.0..4.0f64, -2.0..2.0f64).prop_map(|(w, k)| RealFunction::new(Family::Sin, vec![w, k]).unwrap()),
        (-4.0..4.0f64, -2.0..2.0f64).prop_map(|(w, k)| RealFunction::new(Family::Cos, vec![w, k]).unwrap()),
    ]
}

/// Piecewise-linear function on [0, 1] with random interior knots.
fn pwl_on_unit() -> impl Strategy<Value = RealFunction> {
    (prop::collection::vec(0.05..0.95f64, 0..5), prop::collection::vec(-2.0..2.0f64, 7)).prop_map(|(mut inner, ys)| {
        inner.sort_by(f64::total_cmp);
        inner.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let mut knots = vec![0.0];
        knots.extend(inner);
        knots.push(1.0);
        let params = knots.iter().zip(&ys).flat_map(|(&x, &y)| [x, y]).collect();
        RealFunction::new(Family::Pwl, params).unwrap()
    })
}

fn any_g() -> impl Strategy<Value = RealFunction> {
    prop_oneof![smooth_function(), pwl_on_unit()]
}

fn interval() -> impl Strategy<Value = (Interval, f64)> {
    (-5.0..5.0f64, 0.01..10.0f64, 0.0..=1.0f64).prop_map(|(a, len, s)| {
        let iv = Interval::new(a, a + len).unwrap();
        (iv, (a + s * len).min(iv.b()))
    })
}

fn alpha() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), 0.01..=1.0f64]
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn derivative_matches_finite_difference(f in smooth_function(), t in 0.1..2.0f64) {
        let h = 1e-5;
        let fd = (f.value(t + h) - f.value(t - h)) / (2.0 * h);
        let exact = f.derivative().value(t);
        prop_assert!((fd - exact).abs() <= 1e-4 * (1.0 + exact.abs()), "{f}: {fd} vs {exact}");
    }

    #[test]
    fn kernel_is_antisymmetric(g in any_g(), x in 0.0..=1.0f64, t in 0.0..=1.0f64) {
        let iv = Interval::new(0.0, 1.0).unwrap();
        let sum = kernel_k(&g, iv, x, t).unwrap() + kernel_k(&g, iv, t, x).unwrap();
        prop_assert!(sum.abs() <= 1e-12, "{sum}");
    }

    #[test]
    fn cubics_integrate_exactly(c in prop::collection::vec(-3.0..3.0f64, 4), (iv, _) in interval()) {
        let p = |t: f64| c[0] + t * (c[1] + t * (c[2] + t * c[3]));
        let big = |t: f64| t * (c[0] + t * (c[1] / 2.0 + t * (c[2] / 3.0 + t * c[3] / 4.0)));
        let exact = big(iv.b()) - big(iv.a());
        let scale = iv.len() * (0..=40).map(|k| p(iv.a() + iv.len() * k as f64 / 40.0).abs()).fold(1.0, f64::max);
        let r = AdaptiveSimpson::new(1e-12 * scale, 1e-12).integrate(|t| Ok(p(t)), iv.a(), iv.b()).unwrap();
        prop_assert!((r.value - exact).abs() <= 1e-12 * scale, "{} vs {exact}", r.value);
    }

    #[test]
    fn constants_are_bracketed((iv, x) in interval(), al in alpha()) {
        let p = moment_total(iv, x);
        let slack = 1e-12 * p.max(f64::MIN_POSITIVE) + 1e-300;
        let m = constant_m(iv, x, al).unwrap();
        let a = constant_a(iv, x, al).unwrap();
        prop_assert!(m >= -slack && m <= p + slack, "M={m} P={p}");
        prop_assert!(a >= -slack && a <= p + slack, "A={a} P={p}");
    }

    #[test]
    fn bounds_are_linear_in_g_sup(
        (iv, x) in interval(),
        q in 1.0..4.0f64,
        al in alpha(),
        m in 0.05..=1.0f64,
        d in prop::array::uniform3(0.0..5.0f64),
        c in 0.1..10.0f64,
    ) {
        let base = BoundInputs {
            interval: iv, x, q, alpha: al, m, g_sup: 1.3,
            deriv_a: d[0], deriv_b: d[1], deriv_b_over_m: d[2],
        };
        let scaled = BoundInputs { g_sup: 1.3 * c, ..base };
        for id in [TheoremId::T21, TheoremId::T22, TheoremId::T13, TheoremId::T14] {
            let (b0, b1) = (base.evaluate(id).unwrap(), scaled.evaluate(id).unwrap());
            prop_assert!(close(b1, c * b0, 1e-12) || (b0 == 0.0 && b1 == 0.0), "{id}: {b1} vs {}", c * b0);
        }
    }

    #[test]
    fn alpha_one_depends_on_m_only_through_weighted_derivative(
        (iv, x) in interval(),
        q in 1.0..4.0f64,
        m1 in 0.05..=1.0f64,
        m2 in 0.05..=1.0f64,
        d in prop::array::uniform2(0.0..5.0f64),
        g_sup in 0.1..3.0f64,
    ) {
        let first = BoundInputs {
            interval: iv, x, q, alpha: 1.0, m: m1, g_sup,
            deriv_a: d[0], deriv_b: d[1], deriv_b_over_m: d[1],
        };
        // m2·d2^q = m1·d1^q
        let second = BoundInputs { m: m2, deriv_b_over_m: d[1] * (m1 / m2).powf(1.0 / q), ..first };
        for (one, two) in [(first, second), (BoundInputs { x: iv.midpoint(), ..first }, BoundInputs { x: iv.midpoint(), ..second })] {
            let ids: &[TheoremId] = if one.x == iv.midpoint() {
                &[TheoremId::C21, TheoremId::C22]
            } else {
                &[TheoremId::T21, TheoremId::T22]
            };
            for &id in ids {
                let (b1, b2) = (one.evaluate(id).unwrap(), two.evaluate(id).unwrap());
                prop_assert!((b1 - b2).abs() <= 1e-12 * b1.abs().max(1.0), "{id}: {b1} vs {b2}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn envelope_holds(g in any_g(), x in 0.0..=1.0f64) {
        let excess = envelope_excess(&g, Interval::new(0.0, 1.0).unwrap(), x, 1001).unwrap();
        prop_assert!(excess <= 1e-10, "{excess}");
    }

    #[test]
    fn lhs_scales_with_g(x in 0.0..=1.0f64, w in 0.5..4.0f64, c in 0.1..10.0f64) {
        let iv = Interval::new(0.0, 1.0).unwrap();
        let pair = DifferentiablePair::from_function(RealFunction::parse("exp").unwrap(), DomainSpec::new(1.0).unwrap()).unwrap();
        let case = |k: f64| {
            let g = RealFunction::new(Family::Sin, vec![w, k]).unwrap();
            BoundCase::with_measured_sup(pair.clone(), g, iv, x, 1.0, ConvexityParams::convex()).unwrap()
        };
        let (one, scaled) = (case(1.0), case(c));
        prop_assert!(close(scaled.g_sup(), c * one.g_sup(), 1e-12));
        for (l0, l1) in [
            (lhs_endpoint(&one).unwrap(), lhs_endpoint(&scaled).unwrap()),
            (lhs_point(&one).unwrap(), lhs_point(&scaled).unwrap()),
        ] {
            let err = c * l0.error_estimate + l1.error_estimate + 1e-12 * c;
            prop_assert!((l1.value - c * l0.value).abs() <= err.max(1e-9 * l1.value), "{} vs {}", l1.value, c * l0.value);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refinement_never_clears_a_failure(
        spec in prop::sample::select(&common::REGISTRY_SAMPLES[..]),
        al in prop::sample::select(vec![0.0, 0.25, 0.5, 1.0]),
        m in prop::sample::select(vec![0.0, 0.5, 1.0]),
        n in 3usize..12,
    ) {
        let f = RealFunction::parse(spec).unwrap();
        let params = ConvexityParams::for_definition(al, m).unwrap();
        let domain = DomainSpec::new(1.0).unwrap();
        let coarse = GridSpec::new(n, n, n).unwrap();
        let v0 = check_alpha_m_convex(&f, domain, params, coarse).unwrap();
        let v1 = check_alpha_m_convex(&f, domain, params, coarse.refined()).unwrap();
        if !v0.holds {
            prop_assert!(!v1.holds);
            prop_assert!(v1.witness.unwrap().gap >= v0.witness.unwrap().gap);
        }
    }
}

#[test]
fn identity_residuals_sit_inside_their_error_estimates() {
    use hhbound::quadrature::{residual_lemma11, residual_lemma12};
    let iv = Interval::new(0.0, 1.0).unwrap();
    let xs: Vec<f64> = (0..20).map(|k| (k as f64 * 0.618_033_988_749_895).fract()).collect();
    let mut checked = 0;
    for f_spec in common::REGISTRY_SAMPLES {
        let f = RealFunction::parse(f_spec).unwrap();
        let Ok(pair) = DifferentiablePair::from_function(f, DomainSpec::new(1.0).unwrap()) else { continue };
        if !pair.f_prime().is_smooth() || pair.f_prime().eval(0.0).is_err() {
            continue;
        }
        for g_spec in common::REGISTRY_SAMPLES {
            let g = RealFunction::parse(g_spec).unwrap();
            for &x in &xs {
                let case = BoundCase::with_measured_sup(pair.clone(), g.clone(), iv, x, 1.0, ConvexityParams::convex()).unwrap();
                for r in [residual_lemma11(&case).unwrap(), residual_lemma12(&case).unwrap()] {
                    assert!(r.residual <= (10.0 * r.error_estimate).max(1e-13), "{f_spec} {g_spec} x={x}: {r:?}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 0);
    eprintln!("{checked} identity checks");
}
