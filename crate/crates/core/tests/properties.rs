use std::f64::consts::FRAC_2_PI;

use proptest::prelude::*;
use stable_moments::condexp::{self, Alpha1Variant, SpectralAtom};
use stable_moments::dist;
use stable_moments::gfun::{self, GFunQuery, GKind};
use stable_moments::moments::{self, MomentKind, MomentQuery};
use stable_moments::oracle::{self, VerifyConfig};
use stable_moments::params::{is_alpha_one, theta0, StableParams0, StableParams1};
use stable_moments::quad::QuadConfig;

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
}

/// Parameters of `cX` for `c > 0`.
fn scaled(p: &StableParams1, c: f64) -> StableParams1 {
    let mut delta = c * p.delta;
    if is_alpha_one(p.alpha) {
        delta -= FRAC_2_PI * p.beta * c * p.gamma * c.ln();
    }
    StableParams1::new(p.alpha, p.beta, c * p.gamma, delta).unwrap()
}

fn alpha_any() -> impl Strategy<Value = f64> {
    prop_oneof![0.2f64..1.95, Just(1.0)]
}

fn params() -> impl Strategy<Value = StableParams1> {
    (alpha_any(), -1.0f64..=1.0, 0.2f64..5.0, -3.0f64..3.0)
        .prop_map(|(a, b, g, d)| StableParams1::new(a, b, g, d).unwrap())
}

fn atoms() -> impl Strategy<Value = Vec<SpectralAtom>> {
    prop::collection::vec((0.0f64..std::f64::consts::TAU, 0.1f64..2.0), 1..5).prop_map(|v| {
        v.into_iter()
            .map(|(t, w)| SpectralAtom::from_angle(t, w).unwrap())
            .filter(|a| a.s1.abs() > 1e-3)
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parameterizations_round_trip(p in params()) {
        // the intermediate location carries the shift βγ tan(πα/2), whose
        // ulp bounds what any round trip can recover
        let mid = StableParams0::from(p);
        let back = StableParams1::from(mid);
        prop_assert!(close(back.delta, p.delta, 1e-14, 1e-14 * mid.delta0.abs().max(p.gamma)));
        let q = StableParams0::new(p.alpha, p.beta, p.gamma, p.delta).unwrap();
        let mid = StableParams1::from(q);
        let again = StableParams0::from(mid);
        prop_assert!(close(again.delta0, q.delta0, 1e-14, 1e-14 * mid.delta.abs().max(p.gamma)));
    }

    #[test]
    fn theta0_is_odd_in_beta(a in alpha_any(), b in -1.0f64..=1.0) {
        prop_assert_eq!(theta0(a, -b), -theta0(a, b));
    }

    #[test]
    fn delta_star_is_scale_invariant(p in params(), c in 0.1f64..10.0) {
        prop_assert!(close(scaled(&p, c).delta_star(), p.delta_star(), 1e-12, 1e-12));
    }

    #[test]
    fn g_reflection(
        a in 0.3f64..1.95, b in -1.0f64..=1.0, x in -6.0f64..6.0, d in -0.4f64..2.5,
    ) {
        for (kind, sign) in [(GKind::G, 1.0), (GKind::GTilde, -1.0)] {
            if gfun::branch(kind, d, a).is_err() {
                continue;
            }
            let l = gfun::evaluate(kind, &GFunQuery::new(d, -x, a, b)).unwrap();
            let r = gfun::evaluate(kind, &GFunQuery::new(d, x, a, -b)).unwrap();
            prop_assert!(l.converged && r.converged);
            prop_assert!((l.value - sign * r.value).abs() <= 1e-9);
        }
    }

    #[test]
    fn moment_scale_law(p in params(), c in 0.2f64..5.0, frac in 0.05f64..0.95) {
        let order = frac * p.alpha;
        let m = moments::truncated_moment_plus(&p, order, &cfg()).unwrap();
        let mc = moments::truncated_moment_plus(&scaled(&p, c), order, &cfg()).unwrap();
        prop_assert!(close(mc, c.powf(order) * m, 1e-10, 1e-13), "{} vs {}", mc, c.powf(order) * m);
    }

    #[test]
    fn abs_and_signed_decompose(p in params(), frac in 0.05f64..0.95) {
        let order = frac * p.alpha;
        let plus = moments::truncated_moment_plus(&p, order, &cfg()).unwrap();
        let minus = moments::truncated_moment_minus(&p, order, &cfg()).unwrap();
        let abs = moments::abs_moment(&p, order, &cfg()).unwrap().value;
        let signed = moments::signed_moment(&p, order, &cfg()).unwrap().value;
        prop_assert!(close(abs, plus + minus, 1e-14, 1e-300));
        prop_assert!(close(signed, plus - minus, 1e-14, 1e-14 * abs));
        prop_assert!(plus >= 0.0 && minus >= 0.0 || plus.min(minus) > -1e-10);
    }

    #[test]
    fn parity(a in 1.1f64..1.95, b in -1.0f64..=1.0, g in 0.3f64..3.0, d in -2.0f64..2.0, s in -3.0f64..3.0) {
        let p = StableParams1::new(a, b, g, d).unwrap();
        let up = moments::shifted_positive_mean(&p, s, &cfg()).unwrap();
        let down = moments::shifted_positive_mean(&p.reflected(), -s, &cfg()).unwrap();
        prop_assert!(close(up - down, d - s, 1e-8, 1e-9 * g));
    }

    #[test]
    fn positive_probabilities_sum_to_one(p in params()) {
        let up = dist::prob_positive(&p, &cfg()).unwrap();
        let down = dist::prob_positive(&p.reflected(), &cfg()).unwrap();
        prop_assert!((up + down - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn cdf_reflection(p in params(), x in -8.0f64..8.0) {
        let f = dist::cdf(x, &p, &cfg()).unwrap();
        let g = dist::cdf(-x, &p.reflected(), &cfg()).unwrap();
        prop_assert!((f + g - 1.0).abs() <= 1e-8, "{} + {}", f, g);
    }

    #[test]
    fn conditional_expectation_antisymmetry(lam in atoms(), a in 0.3f64..1.95, x in -3.0f64..3.0) {
        prop_assume!(!lam.is_empty());
        let flipped: Vec<SpectralAtom> = lam.iter().map(SpectralAtom::antipode).collect();
        let v = condexp::cond_exp(&lam, a, x, Alpha1Variant::default(), &cfg());
        let w = condexp::cond_exp(&flipped, a, -x, Alpha1Variant::default(), &cfg());
        if let (Ok(v), Ok(w)) = (v, w) {
            prop_assert!(close(v, -w, 1e-8, 1e-10), "{} vs {}", v, -w);
        }
    }

    #[test]
    fn degenerate_pair_is_a_line(t in 0.0f64..std::f64::consts::TAU, w1 in 0.1f64..2.0, w2 in 0.1f64..2.0,
                                 a in 0.3f64..1.95, x in -4.0f64..4.0) {
        let s = SpectralAtom::from_angle(t, w1).unwrap();
        prop_assume!(s.s1.abs() > 0.05);
        let lam = [s, SpectralAtom { weight: w2, ..s.antipode() }];
        let v = condexp::cond_exp(&lam, a, x, Alpha1Variant::default(), &cfg()).unwrap();
        prop_assert!(close(v, s.s2 / s.s1 * x, 1e-6, 1e-10), "{} vs {}", v, s.s2 / s.s1 * x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn verification_report_relative_error(
        a in 0.6f64..1.9, b in -1.0f64..=1.0, g in 0.5f64..2.0, d in -2.0f64..2.0, frac in 0.1f64..0.9,
    ) {
        let p = StableParams1::new(a, b, g, d).unwrap();
        let q = MomentQuery::new(frac * a.min(1.0), MomentKind::Plus);
        let cfg = VerifyConfig { mc: None, ..VerifyConfig::default() };
        for r in oracle::verify(&p, &q, &cfg).unwrap() {
            prop_assert_eq!(r.abs_err, (r.analytic - r.oracle).abs());
            prop_assert_eq!(r.rel_err, r.abs_err / r.oracle.abs().max(1e-300));
        }
    }

    #[test]
    fn tower_property(lam in atoms(), a in 1.2f64..1.9) {
        prop_assume!(!lam.is_empty());
        let t = condexp::tower_integral(&lam, a, 200.0, Alpha1Variant::default(), &cfg()).unwrap();
        let scale: f64 = lam.iter().map(|s| s.weight).sum::<f64>().powf(1.0 / a);
        prop_assert!(t.abs() <= 1e-4 * scale, "{}", t);
    }
}
