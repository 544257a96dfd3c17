use std::path::PathBuf;

use fracthermo_core::{
    apply_t, check_cone, classify, integrate_against_kernel, parse_problem, Bindings, GridFunction, KernelParams,
    ProblemSpec, QuadratureRule,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn load(name: &str) -> ProblemSpec {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name);
    parse_problem(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn parsed_nonlinearities_match_hand_written_ones() {
    let case2 = load("case2.prob");
    let case3 = load("case3.prob");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let (t, u, rho) = (rng.gen_range(0.0..=1.0), rng.gen_range(-3.0..=3.0), rng.gen_range(0.01..=5.0));
        let b = Bindings::t_u_rho(t, u, rho);
        let f2 = t * t + u * u / (1.0 + rho * rho);
        let f3 = t / (1.0 + u * u);
        assert!((case2.f.eval(&b).unwrap() - f2).abs() <= 1e-14 * f2.abs().max(1.0));
        assert!((case3.f.eval(&b).unwrap() - f3).abs() <= 1e-14 * f3.abs().max(1.0));
    }
}

#[test]
fn operator_maps_the_cone_into_itself() {
    let rule = QuadratureRule::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in ["case1.prob", "case2.prob", "case3.prob"] {
        let spec = load(name);
        let case = classify(&spec, None).unwrap();
        let outside = if case.requires_nonneg() {
            0.0
        } else if case.case_id.uses_subinterval() {
            -1.0
        } else {
            case.sigma
        };
        for i in 0..100 {
            let rho = 0.25 + 0.05 * i as f64;
            let mut v: Vec<f64> = (0..129)
                .map(|k| {
                    let t = k as f64 / 128.0;
                    if t <= case.b {
                        rng.gen_range(case.sigma * rho..=rho)
                    } else {
                        rng.gen_range(outside * rho..=rho)
                    }
                })
                .collect();
            v[rng.gen_range(0..129)] = rho;
            let u = GridFunction::new(v).unwrap();
            let tu = apply_t(&u, &spec, rho, &rule).unwrap();
            assert!(check_cone(&tu, &case).satisfied, "{name} sample {i}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_integral_of_one_is_closed_form(alpha in 1.05f64..2.0, eta in 0.05f64..0.95, beta in 0.0f64..2.0, t in 0.0f64..=1.0) {
        let p = KernelParams::new(alpha, eta, beta);
        let q = integrate_against_kernel(t, |_| Ok::<_, ()>(1.0), &p, &QuadratureRule::default()).unwrap();
        let g = fracthermo_core::gamma_fn(alpha + 1.0).unwrap();
        let exact = beta + (eta.powf(alpha) - t.powf(alpha)) / g;
        prop_assert!((q - exact).abs() <= 1e-10, "{q} vs {exact}");
    }

    #[test]
    fn kernel_integral_is_linear(a in -3.0f64..3.0, c in -3.0f64..3.0, t in 0.0f64..=1.0) {
        let p = KernelParams::new(1.5, 0.5, 0.1);
        let rule = QuadratureRule::default();
        let lhs = integrate_against_kernel(t, |s| Ok::<_, ()>(a * s + c * s * s), &p, &rule).unwrap();
        let x = integrate_against_kernel(t, Ok::<_, ()>, &p, &rule).unwrap();
        let y = integrate_against_kernel(t, |s| Ok::<_, ()>(s * s), &p, &rule).unwrap();
        prop_assert!((lhs - (a * x + c * y)).abs() <= 1e-12);
    }

    #[test]
    fn classification_is_consistent_with_thresholds(alpha in 1.05f64..2.0, eta in 0.05f64..0.95, beta in 0.01f64..2.0) {
        let spec = ProblemSpec::new(alpha, eta, fracthermo_core::BetaSpec::Value(beta), fracthermo_core::Expr::num(1.0));
        if let Ok(case) = classify(&spec, None) {
            let th = case.thresholds;
            prop_assert!(case.sigma > 0.0 && case.sigma <= 1.0);
            prop_assert!(case.b > 0.0 && case.b <= 1.0);
            if beta > th.beta_k.max(th.beta_gamma) + 1e-12 {
                prop_assert_eq!(case.case_id, fracthermo_core::CaseId::Case1);
            }
            if beta < th.beta_k.min(th.beta_gamma) {
                // t* − η can underflow for α near 1; b = η is then the only choice
                prop_assert!(case.b >= eta);
                prop_assert!(case.b < th.t_star || (case.b == eta && th.t_star == eta));
            }
        }
    }
}
