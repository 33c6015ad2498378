use randamp::boxes::{raw_bell_value, validate_behavior};
use randamp::ks_bell::{TARGET_OUTCOME, TARGET_SETTING};
use randamp::ns_certify::{
    attack_box, build_lp, lp_bound_formula, solve_lp, verify_certificate, CertificateJson, DualCertificate, Sense,
    SolveMode, NUM_EQUALITY_ROWS,
};
use randamp::protocol::standard_functional;
use randamp::rational::{frac, int, parse_decimal, Rational};

const TARGET: (randamp::ks_bell::OutcomePair, randamp::ks_bell::SettingPair) = (TARGET_OUTCOME, TARGET_SETTING);

#[test]
fn stored_zero_cap_certificate_verifies() {
    let text = include_str!("fixtures/certificate_dt0.json");
    let j: CertificateJson = serde_json::from_str(text).unwrap();
    let d = DualCertificate::from_json(&j, NUM_EQUALITY_ROWS).unwrap();
    let lp = build_lp(standard_functional(), int(0), TARGET, Sense::Maximize).unwrap();
    assert!(verify_certificate(&lp, &d));
    assert_eq!(d.bound, frac(3, 4));

    // the same multipliers do not certify a smaller bound
    let mut tight = d.clone();
    tight.bound = frac(3, 4) - frac(1, 1000);
    assert!(!verify_certificate(&lp, &tight));
}

#[test]
fn small_grid_is_monotone_and_primal_feasible() {
    let mut last: Option<Rational> = None;
    for s in ["0", "0.1", "0.2"] {
        let dt = parse_decimal(s).unwrap();
        let lp = build_lp(standard_functional(), dt.clone(), TARGET, Sense::Maximize).unwrap();
        let sol = solve_lp(&lp, SolveMode::Exact).unwrap();
        assert!(verify_certificate(&lp, &sol.dual));
        assert!(sol.optimum <= lp_bound_formula(&dt));
        assert_eq!(sol.optimum, frac(3, 4) + &dt / int(6));
        // weak duality: the primal is feasible and its value matches the dual bound
        let v = validate_behavior(&sol.primal, 1e-9);
        assert!(v.ok, "{v:?}");
        assert!(raw_bell_value(&sol.primal, standard_functional()) <= randamp::rational::to_f64(&dt) + 1e-9);
        assert!((sol.primal.prob(TARGET_OUTCOME, TARGET_SETTING) - sol.optimum_f64).abs() < 1e-9);
        if let Some(prev) = &last {
            assert!(&sol.optimum >= prev);
        }
        last = Some(sol.optimum);
    }
}

#[test]
fn float_mode_agrees_with_exact_mode() {
    let dt = parse_decimal("0.3").unwrap();
    let lp = build_lp(standard_functional(), dt, TARGET, Sense::Maximize).unwrap();
    let f = solve_lp(&lp, SolveMode::Float).unwrap();
    assert!(verify_certificate(&lp, &f.dual));
    assert_eq!(f.optimum, frac(3, 4) + frac(1, 20));
}

#[test]
fn attack_boxes_are_zero_violation_no_signaling_boxes() {
    let lo = attack_box(Sense::Minimize).unwrap();
    let hi = attack_box(Sense::Maximize).unwrap();
    for b in [&lo, &hi] {
        assert!(validate_behavior(b, 1e-12).ok);
        assert!(raw_bell_value(b, standard_functional()).abs() < 1e-12);
    }
    assert!(lo.prob(TARGET_OUTCOME, TARGET_SETTING).abs() < 1e-12);
    assert!((hi.prob(TARGET_OUTCOME, TARGET_SETTING) - 0.75).abs() < 1e-12);
}
