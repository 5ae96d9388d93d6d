use conelab_core::json::to_canonical_string;
use conelab_core::*;

fn shape(dims: &[usize]) -> AlgebraShape {
    AlgebraShape::new(dims.to_vec()).unwrap()
}

fn params(dims: &[usize], trials: usize, seed: u64) -> SuiteParams {
    SuiteParams::new(shape(dims), trials, seed)
}

#[test]
fn every_suite_passes_on_small_runs() {
    for dims in [&[2][..], &[1, 2], &[2, 3]] {
        for id in SuiteId::all() {
            let r = run_suite(id, &params(dims, 40, 17)).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{id} on {dims:?}: {:?}", r.reason);
            assert!(r.max_violation <= 1.0, "{id}");
        }
    }
}

#[test]
fn commutative_algebras_have_no_noncentral_witnesses() {
    for id in SuiteId::all() {
        let r = run_suite(id, &params(&[1, 1], 30, 5)).unwrap();
        if id == SuiteId::Example38NonAdditive {
            assert_eq!(r.verdict, Verdict::Inconclusive);
            assert!(r.reason.as_deref().unwrap().contains("non-central"));
        } else {
            assert_eq!(r.verdict, Verdict::Pass, "{id}: {:?}", r.reason);
        }
    }
}

#[test]
fn transpose_is_a_valid_jordan_map() {
    let s = shape(&[3]);
    let p = params(&[3], 100, 2).with_jordan(JordanIso::transpose_map(&s));
    for id in [SuiteId::HooEquivalence, SuiteId::QimEquivalence, SuiteId::TripleNormJordan] {
        let r = run_suite(id, &p).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{id}: {:?}", r.reason);
    }

    let m = mutate_and_expect_failure(SuiteId::HooEquivalence, Mutation::BreakTranspose, &params(&[3], 100, 2)).unwrap();
    assert!(m.applicable && m.harness_ok);
    assert_eq!(m.expectation("seminorm_identity").unwrap().observed, Verdict::Pass);
    assert_eq!(m.expectation("spectrum_identity").unwrap().observed, Verdict::Pass);
    assert_eq!(m.expectation("extraction_agreement").unwrap().observed, Verdict::Fail);
}

#[test]
fn weight_perturbation_is_detected() {
    for dims in [&[2][..], &[3], &[2, 3]] {
        let m = mutate_and_expect_failure(SuiteId::GyoeNormIdentities, Mutation::PerturbWeight(0.01), &params(dims, 100, 3)).unwrap();
        assert!(m.harness_ok, "{dims:?}");
        assert_eq!(m.report.verdict, Verdict::Fail);
        for check in ["norm_identity", "quotient_identity"] {
            let e = m.expectation(check).unwrap();
            assert_eq!(e.observed, Verdict::Fail);
            assert!(e.max_violation >= 1e-3, "{check}: {:.3e}", e.max_violation);
        }
    }
}

#[test]
fn every_mutation_meets_its_expectations() {
    let mutations = [
        Mutation::PerturbWeight(0.05),
        Mutation::PerturbUnitary(0.05),
        Mutation::BreakTranspose,
        Mutation::SwapBlocks,
    ];
    for dims in [&[2, 2][..], &[2, 3]] {
        for id in SuiteId::all() {
            for m in mutations {
                let r = mutate_and_expect_failure(id, m, &params(dims, 40, 23)).unwrap();
                if !r.applicable {
                    continue;
                }
                let unmet: Vec<_> = r.expectations.iter().filter(|e| !e.met).collect();
                assert!(r.harness_ok, "{id} under {m} on {dims:?}: {unmet:?}");
            }
        }
    }
}

#[test]
fn example_pair_is_non_additive() {
    let a = Element::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]);
    let r = run_suite(SuiteId::Example38NonAdditive, &params(&[2], 100, 8).with_weight(a)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.reason);
    let w = r.check("nonadditivity_witness").unwrap();
    assert_eq!((w.found, w.searches), (10, 10));
    assert!(r.witnesses.iter().all(|w| w.margin >= 1e-3));
}

#[test]
fn equivalence_verdicts_agree() {
    for p in [0.5, 1.0, 3.0] {
        for id in [SuiteId::Thm36Equivalences(p), SuiteId::Semi13Equivalences(p)] {
            let r = run_suite(id, &params(&[2, 3], 80, 4)).unwrap();
            assert_eq!(r.check("equivalence_consistency").unwrap().verdict, Verdict::Pass);
            let m = mutate_and_expect_failure(id, Mutation::PerturbUnitary(0.05), &params(&[2, 3], 80, 4)).unwrap();
            let c = m.report.check("equivalence_consistency").unwrap();
            assert_eq!(c.verdict, Verdict::Pass, "{id}: {:?}", c.note);
        }
    }
}

#[test]
fn reports_are_replayable() {
    for id in [SuiteId::QimEquivalence, SuiteId::IneqSemidefinite, SuiteId::EffectDiamond(2.0)] {
        let p = params(&[1, 2], 50, 99).with_tol(1e-9);
        let a = to_canonical_string(&run_suite(id, &p).unwrap().to_json());
        let b = to_canonical_string(&run_suite(id, &p).unwrap().to_json());
        assert_eq!(a, b);
        let other = to_canonical_string(&run_suite(id, &params(&[1, 2], 50, 100)).unwrap().to_json());
        assert_ne!(a, other);
    }
}

#[test]
fn report_json_schema() {
    let r = run_suite(SuiteId::CentralityCriteria, &params(&[2], 20, 1)).unwrap();
    let v = r.to_json();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(
        keys,
        ["checks", "max_violation", "params", "reason", "seed", "statement", "suite", "verdict", "witnesses"]
    );
    assert_eq!(v["seed"], 1);
    assert!(v["reason"].is_null());
    let params: Vec<&String> = v["params"].as_object().unwrap().keys().collect();
    assert_eq!(params, ["dims", "tol", "trials"]);
    for c in v["checks"].as_array().unwrap() {
        for key in ["kind", "max_violation", "name", "tol", "verdict"] {
            assert!(c.get(key).is_some(), "{key} missing in {c}");
        }
    }
    let witness = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "gap_witness").unwrap();
    assert_eq!(witness["searches"], 10);

    let text = to_canonical_string(&v);
    assert!(text.contains("\"verdict\":\"Pass\""));
    assert_eq!(serde_json::from_str::<serde_json::Value>(&text).unwrap(), v);
}

#[test]
fn invalid_params_are_rejected() {
    let id = SuiteId::HooEquivalence;
    assert!(matches!(run_suite(id, &params(&[2], 0, 1)), Err(ConeError::InvalidRange(_))));
    assert!(matches!(run_suite(id, &params(&[2], 5, 1).with_tol(0.0)), Err(ConeError::InvalidRange(_))));
    assert!(matches!(run_suite(id, &params(&[2], 5, 1).with_tol(f64::NAN)), Err(ConeError::InvalidRange(_))));
    assert!(matches!(
        run_suite(id, &params(&[2], 5, 1).with_weight(Element::diag(&[1.0, 2.0, 3.0]))),
        Err(ConeError::ShapeMismatch { .. })
    ));
    assert!(matches!(
        run_suite(id, &params(&[2], 5, 1).with_weight(Element::diag(&[1.0, 0.0]))),
        Err(ConeError::DomainError(_))
    ));
    assert!(matches!(
        run_suite(id, &params(&[2], 5, 1).with_jordan(JordanIso::identity(&shape(&[3])))),
        Err(ConeError::ShapeMismatch { .. })
    ));
}

#[test]
fn fixed_weight_is_used() {
    let a = Element::from_real_rows(&[&[3.0, 1.0], &[1.0, 2.0]]);
    let r = run_suite(SuiteId::Ax2aCentrality, &params(&[2], 30, 6).with_weight(a)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.check("noncentral_witness").unwrap().found, 10);

    let central = Element::diag(&[2.0, 2.0]);
    let r = run_suite(SuiteId::Ax2aCentrality, &params(&[2], 30, 6).with_weight(central)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.check("noncentral_witness").unwrap().found, 0);
}
