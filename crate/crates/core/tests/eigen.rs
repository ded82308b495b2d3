use extremal_core::eigen::{estimate_mu, EigenConfig};
use extremal_core::{DomainSpec, Error, Sign, SolverConfig};

fn cfg(h: f64, tol_mu: f64) -> EigenConfig {
    EigenConfig {
        solver: SolverConfig {
            h,
            ..SolverConfig::default()
        },
        tol_mu,
        ..EigenConfig::default()
    }
}

fn disk() -> DomainSpec {
    DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap()
}

#[test]
fn halving_tol_mu_nests_the_bracket() {
    let a = estimate_mu(&disk(), 1, Sign::Sup, 0.75, &cfg(1.0 / 16.0, 2e-2)).unwrap();
    let b = estimate_mu(&disk(), 1, Sign::Sup, 0.75, &cfg(1.0 / 16.0, 1e-2)).unwrap();
    assert!(b.mu_lo >= a.mu_lo && b.mu_hi <= a.mu_hi, "{a:?} {b:?}");
    assert!(b.width() <= a.width());
}

#[test]
fn eigenvalues_increase_with_k() {
    let c = cfg(1.0 / 16.0, 1e-2);
    let m1 = estimate_mu(&disk(), 1, Sign::Sup, 0.75, &c).unwrap();
    let m2 = estimate_mu(&disk(), 2, Sign::Sup, 0.75, &c).unwrap();
    assert!(m1.mu_lo <= m2.mu_hi, "{m1:?} {m2:?}");
    // the full-frame inf is finite
    let full = estimate_mu(&disk(), 2, Sign::Inf, 0.75, &c).unwrap();
    assert!(!full.infinite && full.mu_hi.is_finite());
    assert!(m2.mu_lo <= full.mu_hi);
}

#[test]
fn trace_serializes_and_k_is_checked() {
    let e = estimate_mu(
        &DomainSpec::ball(vec![0.0], 1.0).unwrap(),
        1,
        Sign::Inf,
        0.6,
        &cfg(1.0 / 32.0, 1e-2),
    )
    .unwrap();
    let json = serde_json::to_value(&e).unwrap();
    assert_eq!(json["trace"].as_array().unwrap().len(), e.trace.len());
    assert_eq!(json["sign"], "inf");
    assert!(matches!(
        estimate_mu(&disk(), 3, Sign::Sup, 0.75, &cfg(0.25, 1e-2)),
        Err(Error::BadDims(_))
    ));
}
