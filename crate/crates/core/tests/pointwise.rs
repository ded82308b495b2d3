use proptest::prelude::*;

use extremal_core::kernel::i_xi;
use extremal_core::oracles::{
    barrier_constant, make_barrier, make_counterexample, verify_suite, Counterexample,
    VerifyOptions,
};
use extremal_core::operators::eval_ik;
use extremal_core::{ExtremizeOptions, FractionalOrder, QuadratureSpec, ScalarField, Sign};

fn unit(th: f64) -> Vec<f64> {
    vec![th.cos(), th.sin()]
}

fn smooth_bump() -> ScalarField<f64> {
    extremal_core::field::FnField::new("gauss", 1.0, |x: &[f64]| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (-(r2 + 0.3 * x[0])).exp() / (-(-0.0225f64)).exp()
    })
    .smooth_everywhere()
    .build()
}

#[test]
fn catalog_passes_in_every_dimension() {
    for dim in 1..=3 {
        let recs = verify_suite(&VerifyOptions {
            dim,
            ..VerifyOptions::default()
        })
        .unwrap();
        let bad: Vec<_> = recs.iter().filter(|r| !r.pass).collect();
        assert!(bad.is_empty(), "N = {dim}: {bad:#?}");
    }
}

#[test]
fn corrupted_constant_fails_the_catalog() {
    let recs = verify_suite(&VerifyOptions {
        cs_override: Some(1.1 * extremal_core::oracles::cs_constant(0.75)),
        ..VerifyOptions::default()
    })
    .unwrap();
    assert!(recs.iter().any(|r| !r.pass));
}

#[test]
fn monotone_in_k_for_the_barrier() {
    let s = 0.75;
    let order = FractionalOrder::new(s).unwrap();
    let u = make_barrier(1.0, vec![0.0; 3], 1.0, s);
    let x = [0.2, -0.1, 0.3];
    let mut prev = f64::INFINITY;
    for k in 1..=3 {
        let v = eval_ik(&u, &x, k, Sign::Sup, &order, &QuadratureSpec::default(), &ExtremizeOptions::quick())
            .unwrap()
            .value;
        assert!(v <= prev + 1e-6);
        assert!((v + k as f64 * barrier_constant(s).unwrap()).abs() < 1e-5);
        prev = v;
    }
}

#[test]
fn radial_field_at_origin_has_equal_sup_and_inf_for_full_frames() {
    let order = FractionalOrder::new(0.6).unwrap();
    let u = make_counterexample::<f64>(Counterexample::RadialBump, 2).unwrap();
    let q = QuadratureSpec::default();
    let o = ExtremizeOptions::default();
    let a = eval_ik(&u, &[0.0, 0.0], 2, Sign::Sup, &order, &q, &o).unwrap().value;
    let b = eval_ik(&u, &[0.0, 0.0], 2, Sign::Inf, &order, &q, &o).unwrap().value;
    assert!((a - b).abs() < 1e-6, "{a} {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn direction_and_its_opposite_agree(th in 0.0f64..std::f64::consts::TAU, x0 in -0.5f64..0.5, x1 in -0.5f64..0.5) {
        let order = FractionalOrder::new(0.7).unwrap();
        let q = QuadratureSpec::default();
        let u = smooth_bump();
        let xi = unit(th);
        let m: Vec<f64> = xi.iter().map(|v| -v).collect();
        let a = i_xi(&u, &[x0, x1], &xi, &order, &q).unwrap();
        let b = i_xi(&u, &[x0, x1], &m, &order, &q).unwrap();
        prop_assert!((a.value - b.value).abs() <= 2.0 * q.tol.max(a.error + b.error));
    }

    #[test]
    fn dilation_scales_by_lambda_to_the_2s(lambda in 0.5f64..2.0, th in 0.0f64..std::f64::consts::TAU, r in 0.0f64..0.4) {
        let s = 0.65;
        let order = FractionalOrder::new(s).unwrap();
        let q = QuadratureSpec::default();
        let u = make_barrier(1.0, vec![0.0, 0.0], 1.0, s);
        let ul = u.dilated(lambda);
        let x = [r / lambda, 0.0];
        let lx = [r, 0.0];
        let xi = unit(th);
        let a = i_xi(&ul, &x, &xi, &order, &q).unwrap().value;
        let b = i_xi(&u, &lx, &xi, &order, &q).unwrap().value;
        prop_assert!((a - lambda.powf(2.0 * s) * b).abs() <= 2.0 * q.tol * lambda.powf(2.0 * s).max(1.0));
    }

    #[test]
    fn sign_flip_and_ordering(x0 in -0.5f64..0.5, x1 in -0.5f64..0.5, k in 1usize..=2) {
        let order = FractionalOrder::new(0.7).unwrap();
        let q = QuadratureSpec::default();
        let o = ExtremizeOptions::default();
        let u = smooth_bump();
        let x = [x0, x1];
        let sup_neg = eval_ik(&u.negated(), &x, k, Sign::Sup, &order, &q, &o).unwrap().value;
        let inf = eval_ik(&u, &x, k, Sign::Inf, &order, &q, &o).unwrap().value;
        let sup = eval_ik(&u, &x, k, Sign::Sup, &order, &q, &o).unwrap().value;
        prop_assert!((sup_neg + inf).abs() <= 1e-5, "{} {}", sup_neg, inf);
        prop_assert!(sup >= inf - 1e-9);
    }
}
