//! Negative controls: re-run a suite on a deliberately broken construction
//! and check that it notices.
//!
//! The perturbations depend on the input point (a fixed direction scaled by
//! `δ‖x‖`), since a constant unitary or weight change would produce another
//! valid construction. The relabelings (transpose flip, block swap) yield
//! another Jordan *-isomorphism: forward identities must keep passing while
//! comparisons against the original map must fail.

use std::fmt;
use std::str::FromStr;

use crate::algebra::{AlgebraShape, Element};
use crate::error::{ConeError, Result};
use crate::json::float;
use crate::jordan::{BlackBox, ConeMap, ConeMapKind, JordanIso};
use crate::matrix::{CMat, C64};
use crate::random::{with_eigenvalues, Sampler};
use crate::spectral::{hermitian_eig, EigenSystem};

use serde_json::{json, Value};

use super::{run_with, CheckKind, SuiteId, SuiteParams, SuiteReport, Verdict};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mutation {
    /// Weight `a` replaced by `a^{1/2} exp(δ‖x‖B) a^{1/2}` at the point `x`.
    PerturbWeight(f64),
    /// Jordan map post-composed with conjugation by `exp(iδ‖x‖H)`.
    PerturbUnitary(f64),
    /// Every transpose flag of the Jordan map toggled.
    BreakTranspose,
    /// Images of two equal-size blocks exchanged.
    SwapBlocks,
}

impl Mutation {
    pub fn delta(&self) -> Option<f64> {
        match *self {
            Mutation::PerturbWeight(d) | Mutation::PerturbUnitary(d) => Some(d),
            _ => None,
        }
    }

    /// Relabelings turn one Jordan map into another.
    pub fn is_relabeling(&self) -> bool {
        self.delta().is_none()
    }

    pub fn applies_to(&self, id: SuiteId, shape: &AlgebraShape) -> bool {
        match self {
            Mutation::PerturbWeight(_) => id.uses_jordan() || id.uses_weight_only(),
            // Unitary conjugation and transposition act trivially on 1×1 blocks.
            Mutation::PerturbUnitary(_) | Mutation::BreakTranspose => {
                id.uses_jordan() && shape.dims().iter().any(|&n| n >= 2)
            }
            Mutation::SwapBlocks => {
                let d = shape.dims();
                id.uses_jordan() && (0..d.len()).any(|i| d[i + 1..].contains(&d[i]))
            }
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mutation::PerturbWeight(d) => write!(f, "perturb_weight({d})"),
            Mutation::PerturbUnitary(d) => write!(f, "perturb_unitary({d})"),
            Mutation::BreakTranspose => f.write_str("break_transpose"),
            Mutation::SwapBlocks => f.write_str("swap_blocks"),
        }
    }
}

impl FromStr for Mutation {
    type Err = ConeError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "break_transpose" => return Ok(Mutation::BreakTranspose),
            "swap_blocks" => return Ok(Mutation::SwapBlocks),
            _ => {}
        }
        let (name, arg) = s
            .strip_suffix(')')
            .and_then(|r| r.split_once('('))
            .ok_or_else(|| ConeError::Parse(format!("unknown mutation {s:?}")))?;
        let d: f64 = arg
            .trim()
            .parse()
            .map_err(|_| ConeError::Parse(format!("invalid δ in {s:?}")))?;
        match name {
            "perturb_weight" => Ok(Mutation::PerturbWeight(d)),
            "perturb_unitary" => Ok(Mutation::PerturbUnitary(d)),
            _ => Err(ConeError::Parse(format!("unknown mutation {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Form {
    Plain,
    Sandwich,
    SqrtCongruence,
    InverseSqrtCongruence,
}

fn kind(form: Form, a: Element) -> ConeMapKind {
    match form {
        Form::Plain => ConeMapKind::PlainJordan,
        Form::Sandwich => ConeMapKind::Sandwich(a),
        Form::SqrtCongruence => ConeMapKind::SqrtCongruence(a),
        Form::InverseSqrtCongruence => ConeMapKind::InverseSqrtCongruence(a),
    }
}

/// Hermitian direction whose spectrum in every block of size two or more
/// spans `[-1, 1]`, so that a perturbation along it moves every block.
fn spread_direction(s: &mut Sampler) -> Element {
    let dims = s.shape().dims().to_vec();
    let eigenvalues: Vec<Vec<f64>> = dims
        .iter()
        .map(|&n| match n {
            1 => vec![if s.coin(0.5) { 1.0 } else { -1.0 }],
            _ => {
                let mut v = vec![-1.0, 1.0];
                v.extend((2..n).map(|_| s.uniform(-1.0, 1.0)));
                v
            }
        })
        .collect();
    with_eigenvalues(&AlgebraShape::new(dims).expect("valid shape"), &eigenvalues, s.rng())
}

/// Builds the (possibly mutated) maps of a suite run.
pub(crate) struct Forge {
    mutation: Option<Mutation>,
    b: Element,
    b_eig: EigenSystem,
    h_eig: EigenSystem,
}

impl Forge {
    pub fn new(id: SuiteId, shape: &AlgebraShape, seed: u64, mutation: Option<Mutation>) -> Self {
        let mut s = Sampler::new(shape, seed, ((id.index() as u64) << 40) | (1 << 38));
        let b = spread_direction(&mut s);
        let h = spread_direction(&mut s);
        let b_eig = hermitian_eig(&b).expect("Hermitian direction");
        let h_eig = hermitian_eig(&h).expect("Hermitian direction");
        Self {
            mutation,
            b,
            b_eig,
            h_eig,
        }
    }

    /// The Jordan map after relabeling mutations.
    pub fn jordan(&self, j: &JordanIso) -> JordanIso {
        match self.mutation {
            Some(Mutation::BreakTranspose) => j.with_flipped_transpose(),
            Some(Mutation::SwapBlocks) => j.with_swapped_blocks().unwrap_or_else(|| j.clone()),
            _ => j.clone(),
        }
    }

    /// `exp(θB)`.
    fn weight_factor(&self, theta: f64) -> Element {
        self.b_eig.map(&self.b, |l| (theta * l).exp())
    }

    /// `exp(iθH)`, one unitary per block.
    fn unitary_factor(&self, theta: f64) -> Vec<CMat> {
        self.h_eig
            .vectors
            .iter()
            .zip(&self.h_eig.values)
            .map(|(v, vals)| {
                let n = v.dim();
                let mut d = CMat::zeros(n);
                for (k, &l) in vals.iter().enumerate() {
                    d[(k, k)] = C64::from_polar(1.0, theta * l);
                }
                v.mul(&d).mul(&v.adjoint())
            })
            .collect()
    }

    fn perturbed_weight(&self, a: &Element, theta: f64) -> Result<Element> {
        let r = a.sqrt()?;
        Ok((&(&r * &self.weight_factor(theta)) * &r).hermitian_part())
    }

    /// Cone map of the given form built on `j` and weight `a` (ignored for
    /// `Form::Plain`), with the mutation applied.
    pub fn cone(&self, form: Form, j: &JordanIso, a: &Element) -> Result<BlackBox> {
        let j = self.jordan(j);
        match self.mutation {
            Some(Mutation::PerturbWeight(d)) => {
                let a = a.clone();
                let me = self.clone_dirs();
                Ok(BlackBox::new("perturbed-weight", move |x| {
                    let theta = d * x.norm();
                    match form {
                        Form::Plain => {
                            let w = me.weight_factor(theta / 2.0);
                            Ok((&(&w * &j.apply(x)?) * &w).hermitian_part())
                        }
                        _ => {
                            let ax = me.perturbed_weight(&a, theta)?;
                            ConeMap::new(j.clone(), kind(form, ax))?.apply(x)
                        }
                    }
                }))
            }
            Some(Mutation::PerturbUnitary(d)) => {
                let base = ConeMap::new(j.clone(), kind(form, a.clone()))?;
                let me = self.clone_dirs();
                Ok(BlackBox::new("perturbed-unitary", move |x| {
                    let jx = j.conjugated_by(&me.unitary_factor(d * x.norm()));
                    ConeMap::new(jx, base.kind().clone())?.apply(x)
                }))
            }
            _ => Ok(ConeMap::new(j, kind(form, a.clone()))?.black_box()),
        }
    }

    /// Map `x ↦ f(a, x)` with no Jordan part; only the weight can be mutated.
    pub fn weighted<F>(&self, a: &Element, f: F) -> BlackBox
    where
        F: Fn(&Element, &Element) -> Result<Element> + Send + Sync + 'static,
    {
        let a = a.clone();
        match self.mutation {
            Some(Mutation::PerturbWeight(d)) => {
                let me = self.clone_dirs();
                BlackBox::new("perturbed-weight", move |x| {
                    f(&me.perturbed_weight(&a, d * x.norm())?, x)
                })
            }
            _ => BlackBox::new("weighted", move |x| f(&a, x)),
        }
    }

    fn clone_dirs(&self) -> Forge {
        Forge {
            mutation: self.mutation,
            b: self.b.clone(),
            b_eig: self.b_eig.clone(),
            h_eig: self.h_eig.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    Pass,
    Fail,
    Any,
}

impl Expected {
    pub fn as_str(&self) -> &'static str {
        match self {
            Expected::Pass => "Pass",
            Expected::Fail => "Fail",
            Expected::Any => "Any",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckExpectation {
    pub check: String,
    pub expected: Expected,
    pub observed: Verdict,
    pub max_violation: f64,
    pub met: bool,
}

#[derive(Debug, Clone)]
pub struct MutationReport {
    pub mutation: Mutation,
    pub applicable: bool,
    pub report: SuiteReport,
    pub expectations: Vec<CheckExpectation>,
    /// Verdict the mutated suite should reach.
    pub expected_verdict: Verdict,
    /// Every expectation met; a mutated suite that wrongly passes sets this false.
    pub harness_ok: bool,
}

impl MutationReport {
    pub fn expectation(&self, check: &str) -> Option<&CheckExpectation> {
        self.expectations.iter().find(|e| e.check == check)
    }

    pub fn to_json(&self) -> Value {
        let expectations: Vec<Value> = self
            .expectations
            .iter()
            .map(|e| {
                json!({
                    "check": e.check,
                    "expected": e.expected.as_str(),
                    "observed": e.observed.as_str(),
                    "max_violation": float(e.max_violation),
                    "met": e.met,
                })
            })
            .collect();
        json!({
            "mutation": self.mutation.to_string(),
            "applicable": self.applicable,
            "expected_verdict": self.expected_verdict.as_str(),
            "harness_ok": self.harness_ok,
            "expectations": expectations,
            "report": self.report.to_json(),
        })
    }
}

fn expected_for(kind: CheckKind, m: Mutation) -> Expected {
    match (kind, m.is_relabeling()) {
        (CheckKind::Identity, false) => Expected::Fail,
        (CheckKind::Identity, true) => Expected::Pass,
        (CheckKind::GroundTruth, _) => Expected::Fail,
        (CheckKind::Invariant, false) => Expected::Any,
        (CheckKind::Invariant, true) => Expected::Pass,
        (CheckKind::Structural, _) => Expected::Pass,
        (CheckKind::Witness, _) => Expected::Any,
    }
}

/// Runs `id` on a mutated construction. Perturbations must make every
/// identity check fail with violation at least `δ/10`; relabelings must keep
/// identities passing and make ground-truth comparisons fail.
pub fn mutate_and_expect_failure(
    id: SuiteId,
    mutation: Mutation,
    params: &SuiteParams,
) -> Result<MutationReport> {
    if let Some(d) = mutation.delta() {
        if !(d >= 1e-3 && d.is_finite()) {
            return Err(ConeError::InvalidRange(format!("δ must be at least 1e-3, got {d}")));
        }
    }
    if !mutation.applies_to(id, &params.shape) {
        let report = SuiteReport {
            suite: id,
            params: params.clone(),
            verdict: Verdict::Inconclusive,
            reason: Some("mutation not applicable".into()),
            max_violation: 0.0,
            checks: Vec::new(),
            witnesses: Vec::new(),
            mutation: Some(mutation),
        };
        return Ok(MutationReport {
            mutation,
            applicable: false,
            report,
            expectations: Vec::new(),
            expected_verdict: Verdict::Inconclusive,
            harness_ok: true,
        });
    }
    let report = run_with(id, params, Some(mutation))?;
    let floor = mutation.delta().map_or(0.0, |d| d / 10.0);
    let expectations: Vec<CheckExpectation> = report
        .checks
        .iter()
        .map(|c| {
            let expected = expected_for(c.kind, mutation);
            let met = match expected {
                Expected::Pass => c.verdict == Verdict::Pass,
                Expected::Fail => {
                    c.verdict == Verdict::Fail
                        && (c.kind != CheckKind::Identity || c.max_violation >= floor)
                }
                Expected::Any => true,
            };
            CheckExpectation {
                check: c.name.clone(),
                expected,
                observed: c.verdict,
                max_violation: c.max_violation,
                met,
            }
        })
        .collect();
    let expected_verdict = if expectations.iter().any(|e| e.expected == Expected::Fail) {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    let verdict_ok = match expected_verdict {
        Verdict::Fail => report.verdict == Verdict::Fail,
        _ => report.verdict != Verdict::Fail,
    };
    let harness_ok = verdict_ok && expectations.iter().all(|e| e.met);
    Ok(MutationReport {
        mutation,
        applicable: true,
        report,
        expectations,
        expected_verdict,
        harness_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        for m in [
            Mutation::PerturbWeight(0.01),
            Mutation::PerturbUnitary(0.05),
            Mutation::BreakTranspose,
            Mutation::SwapBlocks,
        ] {
            assert_eq!(m.to_string().parse::<Mutation>().unwrap(), m);
        }
        assert!("shuffle".parse::<Mutation>().is_err());
    }

    #[test]
    fn applicability() {
        let one = AlgebraShape::new(vec![2, 3]).unwrap();
        let twin = AlgebraShape::new(vec![2, 2]).unwrap();
        assert!(!Mutation::SwapBlocks.applies_to(SuiteId::HooEquivalence, &one));
        assert!(Mutation::SwapBlocks.applies_to(SuiteId::HooEquivalence, &twin));
        assert!(!Mutation::PerturbUnitary(0.1).applies_to(SuiteId::GyoeNormIdentities, &one));
        assert!(Mutation::PerturbWeight(0.1).applies_to(SuiteId::GyoeNormIdentities, &one));
        assert!(!Mutation::PerturbWeight(0.1).applies_to(SuiteId::OgasawaraLocal, &one));
    }

    #[test]
    fn unitary_factor_is_unitary() {
        let s = AlgebraShape::new(vec![2, 3]).unwrap();
        let f = Forge::new(SuiteId::HooEquivalence, &s, 1, None);
        for u in f.unitary_factor(0.7) {
            let err = u.adjoint().mul(&u).sub(&CMat::identity(u.dim())).max_abs();
            assert!(err < 1e-13);
        }
    }
}
