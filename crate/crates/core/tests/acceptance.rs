//! End-to-end acceptance run: one line per criterion, non-zero exit if any
//! criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use conelab_core::cone::thompson_routes;
use conelab_core::json::{float_from, to_canonical_string};
use conelab_core::random::{rng_for, Sampler};
use conelab_core::suites::witness::{
    search_nonadditivity_witness, search_seminorm_gap_witness, search_squaring_witness,
};
use conelab_core::*;
use conelab_core::jordan::max_pointwise_distance;
use serde_json::Value;

const TOL: f64 = 1e-8;

type Outcome = std::result::Result<String, String>;

fn shapes() -> Vec<AlgebraShape> {
    [vec![2], vec![3], vec![2, 3]]
        .into_iter()
        .map(|d| AlgebraShape::new(d).unwrap())
        .collect()
}

/// Shapes with a block of size at least two, where non-central elements exist.
fn noncommutative_shapes() -> Vec<AlgebraShape> {
    [vec![2], vec![3], vec![2, 3], vec![1, 2]]
        .into_iter()
        .map(|d| AlgebraShape::new(d).unwrap())
        .collect()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(id: SuiteId, shape: &AlgebraShape, trials: usize, seed: u64) -> SuiteReport {
    run_suite(id, &SuiteParams::new(shape.clone(), trials, seed)).unwrap()
}

fn check_at_most(r: &SuiteReport, check: &str, bound: f64) -> std::result::Result<f64, String> {
    let c = r
        .check(check)
        .ok_or_else(|| format!("{}: no check {check}", r.suite))?;
    ensure(c.verdict == Verdict::Pass && c.max_violation <= bound, || {
        format!(
            "{} {:?} {check}: {} with violation {:.3e} (bound {bound:.0e})",
            r.suite,
            r.params.shape.dims(),
            c.verdict,
            c.max_violation
        )
    })?;
    Ok(c.max_violation)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for shape in shapes() {
        let r = run(SuiteId::GyoeNormIdentities, &shape, 500, 1);
        worst = worst.max(check_at_most(&r, "norm_identity", TOL)?);
        worst = worst.max(check_at_most(&r, "quotient_identity", TOL)?);
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= Duration::from_secs(5), || format!("took {elapsed:.2?}"))?;
    Ok(format!("max relative error {worst:.2e} in {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for (k, shape) in shapes().iter().enumerate() {
        let mut s = Sampler::new(shape, 2, k as u64);
        for _ in 0..1000 {
            let (x, y) = (s.pd(), s.pd());
            let r = thompson_routes(&x, &y).map_err(|e| e.to_string())?;
            let d = thompson_distance(&x, &y).map_err(|e| e.to_string())?;
            worst = worst.max((r.dominance - r.jacobson).abs() / d.max(1.0));

            let g = random_element(shape, ElementClass::General, (0.5, 2.0), s.index(1 << 30) as u64)
                .map_err(|e| e.to_string())?;
            let congr = |z: &Element| (&(&g * z) * &g.adjoint()).hermitian_part();
            let dc = thompson_distance(&congr(&x), &congr(&y)).map_err(|e| e.to_string())?;
            let di = thompson_distance(&x.inverse().unwrap(), &y.inverse().unwrap())
                .map_err(|e| e.to_string())?;
            worst = worst.max((dc - d).abs() / d.max(1.0));
            worst = worst.max((di - d).abs() / d.max(1.0));
        }
    }
    ensure(worst <= TOL, || format!("route or invariance gap {worst:.3e}"))?;
    Ok(format!("3000 pairs, max gap {worst:.2e}"))
}

/// Extraction from a secret canonical form, compared with the ground truth
/// on 100 fresh samples and checked against the Jordan axioms.
fn reverse(
    shape: &AlgebraShape,
    seed: u64,
    build: impl Fn(JordanIso, Element) -> ConeMap,
    extract: impl Fn(&BlackBox, &Element) -> Result<BlackBox>,
) -> std::result::Result<(f64, f64), String> {
    let mut rng = rng_for(seed, 0);
    let mut s = Sampler::new(shape, seed, 1);
    let (mut pointwise, mut axioms) = (0.0f64, 0.0f64);
    for k in 0..5 {
        let j = JordanIso::random(shape, &mut rng);
        let a = s.pd();
        let phi = build(j.clone(), a).black_box();
        let ext = extract(&phi, &unit(shape)).map_err(|e| e.to_string())?;
        pointwise = pointwise.max(max_pointwise_distance(
            &ext,
            &BlackBox::from_jordan(j),
            shape,
            100,
            seed + k,
        ));
        axioms = axioms.max(verify_jordan(&ext, shape, 100, seed + k).max_violation());
    }
    ensure(pointwise <= 1e-7 && axioms <= TOL, || {
        format!("{:?}: pointwise {pointwise:.3e}, axioms {axioms:.3e}", shape.dims())
    })?;
    Ok((pointwise, axioms))
}

fn criterion_3() -> Outcome {
    let mut fwd = 0.0f64;
    let (mut pw, mut ax) = (0.0f64, 0.0f64);
    for shape in shapes() {
        let r = run(SuiteId::QimEquivalence, &shape, 500, 3);
        fwd = fwd.max(check_at_most(&r, "quotient_norm", TOL)?);
        let (p, a) = reverse(
            &shape,
            3,
            |j, a| ConeMap::sqrt_congruence(j, a).unwrap(),
            extract_jordan_sqrt_congruence,
        )?;
        pw = pw.max(p);
        ax = ax.max(a);
    }
    Ok(format!("forward {fwd:.2e}, extraction {pw:.2e}, axioms {ax:.2e}"))
}

fn criterion_4() -> Outcome {
    let (mut semi, mut spec) = (0.0f64, 0.0f64);
    let (mut pw, mut ax) = (0.0f64, 0.0f64);
    for shape in shapes() {
        let r = run(SuiteId::HooEquivalence, &shape, 500, 4);
        semi = semi.max(check_at_most(&r, "seminorm_identity", TOL)?);
        spec = spec.max(check_at_most(&r, "spectrum_identity", 1e-7)?);
        let (p, a) = reverse(
            &shape,
            4,
            |j, a| ConeMap::sandwich(j, a).unwrap(),
            extract_jordan_sandwich,
        )?;
        pw = pw.max(p);
        ax = ax.max(a);
    }
    Ok(format!(
        "seminorm {semi:.2e}, spectrum {spec:.2e}, extraction {pw:.2e}, axioms {ax:.2e}"
    ))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    type Search = fn(&Element, usize, u64) -> Result<SearchOutcome>;
    let searches: [(&str, Search); 3] = [
        ("nonadditivity", search_nonadditivity_witness),
        ("squaring", search_squaring_witness),
        ("seminorm-gap", search_seminorm_gap_witness),
    ];
    let mut central_worst = 0.0f64;
    let mut summary = Vec::new();
    for (name, search) in searches {
        let mut found = 0;
        for k in 0..20u64 {
            let shape = &noncommutative_shapes()[k as usize % 4];
            let mut s = Sampler::new(shape, 5, k);
            match search(&s.central_pd(), 2000, k).map_err(|e| e.to_string())? {
                SearchOutcome::Central {
                    max_violation,
                    samples,
                } => {
                    ensure(samples == 2000, || format!("{name}: {samples} samples"))?;
                    central_worst = central_worst.max(max_violation);
                }
                other => return Err(format!("{name}: central element gave {other:?}")),
            }
            let a = s.noncentral_pd().expect("non-commutative shape");
            match search(&a, 2000, k).map_err(|e| e.to_string())? {
                SearchOutcome::Found(_) => found += 1,
                SearchOutcome::Inconclusive { .. } => {}
                SearchOutcome::Central { .. } => {
                    return Err(format!("{name}: non-central element reported central"))
                }
            }
        }
        ensure(found >= 19, || format!("{name}: only {found}/20 witnesses"))?;
        summary.push(format!("{name} {found}/20"));
    }
    ensure(central_worst <= 1e-9, || {
        format!("central conditions violated by {central_worst:.3e}")
    })?;
    let elapsed = start.elapsed();
    ensure(elapsed <= Duration::from_secs(60), || format!("took {elapsed:.2?}"))?;
    Ok(format!(
        "central {central_worst:.2e}; witnesses {} in {elapsed:.2?}",
        summary.join(", ")
    ))
}

fn criterion_6() -> Outcome {
    const CONDITIONS: [&str; 4] = ["product_norm", "product_seminorm", "product_spectrum", "mean_norm"];
    let mut worst = 0.0f64;
    let mut weakest = f64::INFINITY;
    for shape in shapes() {
        for p in [0.5, 1.0, 2.0, 3.0] {
            let id = SuiteId::Thm36Equivalences(p);
            let r = run(id, &shape, 500, 6);
            for c in CONDITIONS {
                worst = worst.max(check_at_most(&r, c, TOL)?);
            }
            let params = SuiteParams::new(shape.clone(), 200, 6);
            let m = mutate_and_expect_failure(id, Mutation::PerturbUnitary(0.05), &params)
                .map_err(|e| e.to_string())?;
            ensure(m.harness_ok, || format!("{id}: unitary mutation harness mismatch"))?;
            for c in CONDITIONS {
                let e = m.expectation(c).unwrap();
                ensure(e.observed == Verdict::Fail && e.max_violation >= 5e-3, || {
                    format!("{id} {c}: {} at {:.3e} under perturb_unitary", e.observed, e.max_violation)
                })?;
                weakest = weakest.min(e.max_violation);
            }
            let m = mutate_and_expect_failure(id, Mutation::BreakTranspose, &params)
                .map_err(|e| e.to_string())?;
            let e = m.expectation("product_spectrum").unwrap();
            ensure(e.expected == Expected::Pass && e.observed == Verdict::Pass && m.harness_ok, || {
                format!("{id}: spectrum under transpose {:?}/{}", e.expected, e.observed)
            })?;
        }
    }
    Ok(format!(
        "conditions {worst:.2e}; weakest mutated violation {weakest:.2e}; transpose keeps spectra"
    ))
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    let mut margin = f64::INFINITY;
    for shape in noncommutative_shapes() {
        let r = run(SuiteId::HunaTwoMaps, &shape, 500, 7);
        worst = worst.max(check_at_most(&r, "maps_agree", TOL)?);
        worst = worst.max(check_at_most(&r, "recovers_jordan", TOL)?);
        worst = worst.max(check_at_most(&r, "example_product_norm", TOL)?);
        let distinct = r.check("example_maps_distinct").unwrap();
        ensure(distinct.found == distinct.searches && distinct.found > 0, || {
            "example pair not shown distinct".into()
        })?;

        let r = run(SuiteId::Example38NonAdditive, &shape, 500, 7);
        worst = worst.max(check_at_most(&r, "product_norm", TOL)?);
        let w = r.check("nonadditivity_witness").unwrap();
        ensure(w.verdict == Verdict::Pass && w.found == w.searches && w.found > 0, || {
            format!("{:?}: {}/{} non-additivity witnesses", shape.dims(), w.found, w.searches)
        })?;
        for wit in r.witnesses.iter().filter(|w| w.name == "nonadditivity") {
            margin = margin.min(wit.margin);
        }
    }
    ensure(margin >= 1e-3, || format!("witness margin {margin:.3e}"))?;
    Ok(format!("identities {worst:.2e}; smallest non-additivity margin {margin:.2e}"))
}

fn criterion_8() -> Outcome {
    let mut forward = 0.0f64;
    let mut witnesses = (0, 0);
    let mut semi = 0.0f64;
    let (mut diamond, mut homog) = (0.0f64, 0.0f64);
    for shape in shapes() {
        let r = run(SuiteId::IneqSemidefinite, &shape, 100, 8);
        forward = forward.max(check_at_most(&r, "forward", 1e-9)?);
        let w = r.check("witness_success").unwrap();
        ensure(w.searches == 100 && w.found == 100, || {
            format!("{:?}: {}/{} order witnesses", shape.dims(), w.found, w.searches)
        })?;
        witnesses.0 += w.found;
        witnesses.1 += w.searches;

        let r = run(SuiteId::Semi13Equivalences(1.0), &shape, 500, 8);
        for c in ["product_norm", "product_seminorm", "product_spectrum", "mean_norm"] {
            semi = semi.max(check_at_most(&r, c, TOL)?);
        }
        for p in [0.5, 1.0, 2.0] {
            let r = run(SuiteId::EffectDiamond(p), &shape, 500, 8);
            diamond = diamond.max(check_at_most(&r, "mean_norm", TOL)?);
            homog = homog.max(check_at_most(&r, "homogeneity", 1e-9)?);
        }
    }
    Ok(format!(
        "ineq forward {forward:.2e} (30% singular); witnesses {}/{}; semidefinite {semi:.2e}; \
         effects {diamond:.2e}, homogeneity {homog:.2e}",
        witnesses.0, witnesses.1
    ))
}

/// Re-runs a suite from the parameters recorded in its JSON report.
fn replay(report: &Value, id: SuiteId) -> String {
    let params = &report["params"];
    let dims = params["dims"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d.as_u64().unwrap() as usize)
        .collect();
    let shape = AlgebraShape::new(dims).unwrap();
    let trials = params["trials"].as_u64().unwrap() as usize;
    let tol = float_from(&params["tol"]).unwrap();
    let seed = report["seed"].as_u64().unwrap();
    let r = run_suite(id, &SuiteParams::new(shape, trials, seed).with_tol(tol)).unwrap();
    to_canonical_string(&r.to_json())
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut runs = 0;
    for shape in shapes() {
        for id in SuiteId::all() {
            let r = run(id, &shape, 500, 9);
            ensure(r.verdict == Verdict::Pass, || {
                format!("{id} {:?}: {} ({:?})", shape.dims(), r.verdict, r.reason)
            })?;
            runs += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= Duration::from_secs(300), || format!("full run took {elapsed:.2?}"))?;

    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    for shape in shapes() {
        for id in SuiteId::all() {
            let json = run(id, &shape, 50, 99).to_json();
            let text = to_canonical_string(&json);
            ensure(replay(&json, id) == text, || format!("{id}: replay differs"))?;
            let serial = single.install(|| replay(&json, id));
            ensure(serial == text, || format!("{id}: single-threaded replay differs"))?;
        }
    }
    Ok(format!(
        "{runs} suite runs of 500 trials in {elapsed:.2?}; replays byte-identical"
    ))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("quotient norm identities", criterion_1),
        ("Thompson metric routes and invariance", criterion_2),
        ("square-root congruence preservers", criterion_3),
        ("seminorm and spectrum preservers", criterion_4),
        ("centrality dichotomies", criterion_5),
        ("multiplicative equivalences and mutations", criterion_6),
        ("two-map preservers and the non-additive pair", criterion_7),
        ("semidefinite and effect suites", criterion_8),
        ("harness replay and full run", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
