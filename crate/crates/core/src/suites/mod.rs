//! Randomized property suites, one per preserver statement, with witness
//! searches for the non-constructive directions and mutation controls.
//!
//! A suite is a list of named checks evaluated over independent trials.
//! Trials run in parallel; each draws from its own seeded stream and the
//! per-trial observations are merged in trial order, so a report depends only
//! on `(suite, shape, trials, seed, tol)`.

mod centrality;
mod multiplicative;
mod mutation;
mod quotient;
mod semidefinite;
pub mod witness;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::{json, Value};

use rand::Rng;

use crate::algebra::{classify, is_central, unit, AlgebraShape, Element, CLASSIFY_TOL};
use crate::error::{ConeError, Result};
use crate::jordan::JordanIso;
use crate::json::{element_to_json, float, jordan_to_json};
use crate::random::Sampler;

pub use mutation::{mutate_and_expect_failure, CheckExpectation, Expected, Mutation, MutationReport};
pub use witness::{
    search_nonadditivity_witness, search_seminorm_gap_witness, search_squaring_witness,
    SearchOutcome, DEFAULT_BUDGET,
};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Number of witness searches a suite runs (at most one per trial).
pub const WITNESS_SEARCHES: usize = 10;

/// Number of `(J, a)` constructions a suite cycles through.
pub const CONSTRUCTIONS: usize = 5;

/// Relative errors are measured against `max(|lhs|, |rhs|, REL_FLOOR · scale)`
/// where `scale` is the natural size of the inputs; this only matters for
/// products of singular elements.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuiteId {
    GyoeNormIdentities,
    Ax2aCentrality,
    QimEquivalence,
    HooEquivalence,
    NormEqualityLemma,
    SeminormOrderLemma,
    TripleNormJordan,
    Thm36Equivalences(f64),
    HunaTwoMaps,
    Example38NonAdditive,
    AdditiveBijection,
    GeoMeanCentrality,
    OgasawaraLocal,
    CentralityCriteria,
    ExtheSemidefinite,
    IneqSemidefinite,
    Semi13Equivalences(f64),
    EffectDiamond(f64),
}

const NAMES: [&str; 18] = [
    "GyoeNormIdentities",
    "Ax2aCentrality",
    "QimEquivalence",
    "HooEquivalence",
    "NormEqualityLemma",
    "SeminormOrderLemma",
    "TripleNormJordan",
    "Thm36Equivalences",
    "HunaTwoMaps",
    "Example38NonAdditive",
    "AdditiveBijection",
    "GeoMeanCentrality",
    "OgasawaraLocal",
    "CentralityCriteria",
    "ExtheSemidefinite",
    "IneqSemidefinite",
    "Semi13Equivalences",
    "EffectDiamond",
];

impl SuiteId {
    /// Every suite once, with `p = 1` for the parametrized ones.
    pub fn all() -> Vec<SuiteId> {
        (0..NAMES.len())
            .map(|i| Self::from_index(i, 1.0))
            .collect()
    }

    fn from_index(i: usize, p: f64) -> Self {
        use SuiteId::*;
        match i {
            0 => GyoeNormIdentities,
            1 => Ax2aCentrality,
            2 => QimEquivalence,
            3 => HooEquivalence,
            4 => NormEqualityLemma,
            5 => SeminormOrderLemma,
            6 => TripleNormJordan,
            7 => Thm36Equivalences(p),
            8 => HunaTwoMaps,
            9 => Example38NonAdditive,
            10 => AdditiveBijection,
            11 => GeoMeanCentrality,
            12 => OgasawaraLocal,
            13 => CentralityCriteria,
            14 => ExtheSemidefinite,
            15 => IneqSemidefinite,
            16 => Semi13Equivalences(p),
            17 => EffectDiamond(p),
            _ => unreachable!("suite index out of range"),
        }
    }

    pub fn index(&self) -> usize {
        use SuiteId::*;
        match self {
            GyoeNormIdentities => 0,
            Ax2aCentrality => 1,
            QimEquivalence => 2,
            HooEquivalence => 3,
            NormEqualityLemma => 4,
            SeminormOrderLemma => 5,
            TripleNormJordan => 6,
            Thm36Equivalences(_) => 7,
            HunaTwoMaps => 8,
            Example38NonAdditive => 9,
            AdditiveBijection => 10,
            GeoMeanCentrality => 11,
            OgasawaraLocal => 12,
            CentralityCriteria => 13,
            ExtheSemidefinite => 14,
            IneqSemidefinite => 15,
            Semi13Equivalences(_) => 16,
            EffectDiamond(_) => 17,
        }
    }

    pub fn name(&self) -> &'static str {
        NAMES[self.index()]
    }

    pub fn p(&self) -> Option<f64> {
        match *self {
            SuiteId::Thm36Equivalences(p)
            | SuiteId::Semi13Equivalences(p)
            | SuiteId::EffectDiamond(p) => Some(p),
            _ => None,
        }
    }

    /// Plain-language statement the suite exercises.
    pub fn statement(&self) -> &'static str {
        use SuiteId::*;
        match self {
            GyoeNormIdentities => {
                "norm identities ‖(ax²a)^½a⁻¹‖=‖x‖ and ‖(ax²a)^½(ay²a)^-½‖=‖xy⁻¹‖"
            }
            Ax2aCentrality => "x ↦ (ax²a)^½ is additive iff a is central, and then equals ax",
            QimEquivalence => {
                "surjections with ‖φ(x)φ(y)⁻¹‖=‖xy⁻¹‖ are φ(x)=(φ(e)J(x)²φ(e))^½"
            }
            HooEquivalence => {
                "spectral seminorm or spectrum of quotients preserved iff φ=φ(e)^½Jφ(e)^½"
            }
            NormEqualityLemma => "a=a' iff ‖xax‖=‖xa'x‖ for all positive invertible x",
            SeminormOrderLemma => "a≤a' iff ‖ay‖_S≤‖a'y‖_S for all positive invertible y",
            TripleNormJordan => "‖φ(y)φ(x)φ(y)‖=‖yxy‖ characterizes Jordan *-isomorphisms",
            Thm36Equivalences(_) => {
                "multiplicative norm, seminorm, spectrum and p-mean norm preservers are Jordan"
            }
            HunaTwoMaps => "‖φ₁(x)φ₂(y)‖=‖xy‖ with φ₁(e)=e forces φ₁=φ₂=J",
            Example38NonAdditive => {
                "φ₁=(aJ(·)²a)^½, φ₂=(a⁻¹J(·)²a⁻¹)^½ preserve ‖xy‖ without being Jordan"
            }
            AdditiveBijection => "additive bijections of positive definite cones are T(e)^½JT(e)^½",
            GeoMeanCentrality => "x ↦ (b#x)² is additive only for central b",
            OgasawaraLocal => "squaring is locally monotone at a iff a is central",
            CentralityCriteria => "norm and seminorm criteria for centrality",
            ExtheSemidefinite => {
                "homogeneous order isomorphisms of positive semidefinite cones are φ(e)^½Jφ(e)^½"
            }
            IneqSemidefinite => "a≤b iff ‖xax‖≤‖xbx‖ for all positive x",
            Semi13Equivalences(_) => {
                "multiplicative preservers on positive semidefinite cones are Jordan"
            }
            EffectDiamond(_) => "maps of effect algebras preserving ‖x⋄ₚy‖ are Jordan",
        }
    }

    pub fn uses_jordan(&self) -> bool {
        use SuiteId::*;
        matches!(
            self,
            QimEquivalence
                | HooEquivalence
                | TripleNormJordan
                | Thm36Equivalences(_)
                | HunaTwoMaps
                | Example38NonAdditive
                | AdditiveBijection
                | ExtheSemidefinite
                | Semi13Equivalences(_)
                | EffectDiamond(_)
        )
    }

    /// Suites whose map is built from a weight without a Jordan part.
    pub fn uses_weight_only(&self) -> bool {
        use SuiteId::*;
        matches!(self, GyoeNormIdentities | Ax2aCentrality | GeoMeanCentrality)
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.p() {
            Some(p) => write!(f, "{}:{p}", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for SuiteId {
    type Err = ConeError;

    /// `Name`, `Name:p` or `Name(p)`; `p` defaults to 1.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, p) = if let Some((n, p)) = s.split_once(':') {
            (n, Some(p))
        } else if let Some(rest) = s.strip_suffix(')') {
            match rest.split_once('(') {
                Some((n, p)) => (n, Some(p)),
                None => (s, None),
            }
        } else {
            (s, None)
        };
        let idx = NAMES
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
            .ok_or_else(|| ConeError::Parse(format!("unknown suite {name:?}")))?;
        let p = match p {
            Some(p) => p
                .trim()
                .parse::<f64>()
                .map_err(|_| ConeError::Parse(format!("invalid p in {s:?}")))?,
            None => 1.0,
        };
        let id = Self::from_index(idx, p);
        if id.p().is_none() && s.contains([':', '(']) {
            return Err(ConeError::Parse(format!("suite {name} takes no parameter")));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(ConeError::InvalidRange(format!("p must be positive, got {p}")));
        }
        Ok(id)
    }
}

/// Everything a report needs to be replayed.
#[derive(Debug, Clone)]
pub struct SuiteParams {
    pub shape: AlgebraShape,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    /// Fixed weight `a` instead of a random one.
    pub weight: Option<Element>,
    /// Fixed Jordan map instead of a random one.
    pub jordan: Option<JordanIso>,
}

impl SuiteParams {
    pub fn new(shape: AlgebraShape, trials: usize, seed: u64) -> Self {
        Self {
            shape,
            trials,
            seed,
            tol: DEFAULT_TOL,
            weight: None,
            jordan: None,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_weight(mut self, a: Element) -> Self {
        self.weight = Some(a);
        self
    }

    pub fn with_jordan(mut self, j: JordanIso) -> Self {
        self.jordan = Some(j);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(ConeError::InvalidRange("trials must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(ConeError::InvalidRange(format!("tol must be positive, got {}", self.tol)));
        }
        if let Some(a) = &self.weight {
            if a.shape() != &self.shape {
                return Err(ConeError::ShapeMismatch {
                    left: a.shape().dims().to_vec(),
                    right: self.shape.dims().to_vec(),
                });
            }
            if !classify(a, CLASSIFY_TOL).positive_invertible {
                return Err(ConeError::DomainError(
                    "suite weight must be positive invertible".into(),
                ));
            }
        }
        if let Some(j) = &self.jordan {
            if j.source() != &self.shape {
                return Err(ConeError::ShapeMismatch {
                    left: j.source().dims().to_vec(),
                    right: self.shape.dims().to_vec(),
                });
            }
        }
        Ok(())
    }
}

/// Ordered by severity: `Fail` dominates `Inconclusive` dominates `Pass`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "Pass",
            Verdict::Inconclusive => "Inconclusive",
            Verdict::Fail => "Fail",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a check compares, which decides how it reacts to mutations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// Identity evaluated on the (possibly mutated) map.
    Identity,
    /// Agreement with the secret Jordan map the construction started from.
    GroundTruth,
    /// Map-dependent property that every mutation preserves.
    Invariant,
    /// Does not involve the map at all.
    Structural,
    /// Existence of a counterexample, found by search.
    Witness,
}

impl CheckKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckKind::Identity => "identity",
            CheckKind::GroundTruth => "ground_truth",
            CheckKind::Invariant => "invariant",
            CheckKind::Structural => "structural",
            CheckKind::Witness => "witness",
        }
    }
}

/// Named elements exhibiting a quantity gap, or the worst inputs of a
/// failing check.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub name: String,
    pub elements: Vec<(String, Element)>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// Trial that produced it, when it came from a suite.
    pub trial: Option<usize>,
}

impl Witness {
    pub fn new(name: impl Into<String>, elements: Vec<(&str, Element)>, lhs: f64, rhs: f64, margin: f64) -> Self {
        Self {
            name: name.into(),
            elements: elements.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            lhs,
            rhs,
            margin,
            trial: None,
        }
    }

    pub fn element(&self, name: &str) -> Option<&Element> {
        self.elements.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn to_json(&self) -> Value {
        let elements: serde_json::Map<String, Value> = self
            .elements
            .iter()
            .map(|(k, v)| (k.clone(), element_to_json(v)))
            .collect();
        let mut v = json!({
            "name": self.name,
            "elements": elements,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "margin": float(self.margin),
        });
        if let Some(t) = self.trial {
            v["trial"] = json!(t);
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub tol: f64,
    /// Largest relative violation over all trials.
    pub max_violation: f64,
    pub verdict: Verdict,
    pub note: Option<String>,
    /// Inputs of the worst trial, kept only when the check fails.
    pub worst: Option<Witness>,
    pub searches: usize,
    pub found: usize,
}

impl Check {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "name": self.name,
            "kind": self.kind.as_str(),
            "tol": float(self.tol),
            "max_violation": float(self.max_violation),
            "verdict": self.verdict.as_str(),
        });
        if self.kind == CheckKind::Witness {
            v["searches"] = json!(self.searches);
            v["found"] = json!(self.found);
        }
        if let Some(n) = &self.note {
            v["note"] = json!(n);
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: SuiteId,
    pub params: SuiteParams,
    pub verdict: Verdict,
    pub reason: Option<String>,
    /// Worst check violation rescaled to the suite tolerance, so that a
    /// report with `max_violation > tol` is a failure.
    pub max_violation: f64,
    pub checks: Vec<Check>,
    pub witnesses: Vec<Witness>,
    pub mutation: Option<Mutation>,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn seed(&self) -> u64 {
        self.params.seed
    }

    pub fn to_json(&self) -> Value {
        let mut params = json!({
            "dims": self.params.shape.dims(),
            "trials": self.params.trials,
            "tol": float(self.params.tol),
        });
        if let Some(p) = self.suite.p() {
            params["p"] = float(p);
        }
        if let Some(a) = &self.params.weight {
            params["weight"] = element_to_json(a);
        }
        if let Some(j) = &self.params.jordan {
            params["jordan"] = jordan_to_json(j);
        }
        if let Some(m) = &self.mutation {
            params["mutation"] = json!(m.to_string());
        }
        json!({
            "suite": self.suite.name(),
            "params": params,
            "verdict": self.verdict.as_str(),
            "reason": self.reason,
            "max_violation": float(self.max_violation),
            "witnesses": self.witnesses.iter().map(Witness::to_json).collect::<Vec<_>>(),
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            "seed": self.params.seed,
            "statement": self.suite.statement(),
        })
    }
}

pub(crate) struct CheckSpec {
    pub name: &'static str,
    pub tol_factor: f64,
    pub kind: CheckKind,
}

pub(crate) const fn spec(name: &'static str, tol_factor: f64, kind: CheckKind) -> CheckSpec {
    CheckSpec {
        name,
        tol_factor,
        kind,
    }
}

enum Obs {
    Value {
        check: usize,
        violation: f64,
        inputs: Option<Vec<(String, Element)>>,
    },
    Found {
        check: usize,
        witness: Witness,
    },
    Missing {
        check: usize,
        reason: String,
    },
    Skipped {
        check: usize,
        reason: String,
    },
}

/// Collects the observations of one trial.
pub(crate) struct Recorder<'a> {
    specs: &'a [CheckSpec],
    tol: f64,
    trial: usize,
    obs: Vec<Obs>,
}

impl Recorder<'_> {
    /// Records a violation; `inputs` is only evaluated when it exceeds the
    /// check tolerance.
    pub fn value(
        &mut self,
        check: usize,
        violation: f64,
        inputs: impl FnOnce() -> Vec<(&'static str, Element)>,
    ) {
        let violation = if violation.is_nan() { f64::INFINITY } else { violation };
        let limit = self.tol * self.specs[check].tol_factor;
        let inputs = (violation > limit).then(|| {
            inputs()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect()
        });
        self.obs.push(Obs::Value {
            check,
            violation,
            inputs,
        });
    }

    pub fn outcome(&mut self, check: usize, outcome: SearchOutcome) {
        match outcome {
            SearchOutcome::Central { max_violation, .. } => {
                self.value(check, max_violation, Vec::new)
            }
            SearchOutcome::Found(mut w) => {
                w.trial = Some(self.trial);
                self.obs.push(Obs::Found { check, witness: w });
            }
            SearchOutcome::Inconclusive { reason } => self.obs.push(Obs::Missing { check, reason }),
        }
    }

    pub fn missing(&mut self, check: usize, reason: impl Into<String>) {
        self.obs.push(Obs::Missing {
            check,
            reason: reason.into(),
        });
    }

    pub fn skip(&mut self, check: usize, reason: impl Into<String>) {
        self.obs.push(Obs::Skipped {
            check,
            reason: reason.into(),
        });
    }
}

pub(crate) trait Suite: Sync {
    fn specs(&self) -> &'static [CheckSpec];
    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()>;
    /// Derived checks computed from the merged results.
    fn finish(&self, _checks: &mut [Check]) {}
}

/// Inputs and random draws shared by all trials of one suite run.
pub(crate) struct Setup {
    pub id: SuiteId,
    pub params: SuiteParams,
    pub forge: mutation::Forge,
}

impl Setup {
    /// Deterministic stream for suite-level randomness, distinct from all trial streams.
    pub fn stream(&self, k: u64) -> u64 {
        ((self.id.index() as u64) << 40) | (1 << 39) | k
    }

    pub fn sampler(&self, k: u64) -> Sampler {
        Sampler::new(&self.params.shape, self.params.seed, self.stream(k))
    }

    pub fn is_witness_trial(&self, i: usize) -> bool {
        i < WITNESS_SEARCHES
    }

    pub fn budget(&self) -> usize {
        DEFAULT_BUDGET
    }
}

/// One canonical construction: a Jordan map, a weight (non-central whenever
/// the shape allows) and a central weight.
pub(crate) struct Construction {
    pub j: JordanIso,
    pub a: Element,
    pub central: Element,
}

impl Setup {
    pub fn unit(&self) -> Element {
        unit(&self.params.shape)
    }

    pub fn constructions(&self) -> Vec<Construction> {
        (0..CONSTRUCTIONS as u64)
            .map(|k| {
                let mut s = self.sampler(k);
                let j = match &self.params.jordan {
                    Some(j) => j.clone(),
                    None => JordanIso::random(&self.params.shape, s.rng()),
                };
                let generated = s.noncentral_pd().unwrap_or_else(|| s.pd());
                let central = s.central_pd();
                let (a, central) = match &self.params.weight {
                    Some(w) if is_central(w, CLASSIFY_TOL) => (w.clone(), w.clone()),
                    Some(w) => (w.clone(), central),
                    None => (generated, central),
                };
                Construction { j, a, central }
            })
            .collect()
    }
}

/// Fresh seed for a nested search, drawn from the trial stream.
pub(crate) fn sub_seed(s: &mut Sampler) -> u64 {
    s.rng().random()
}

/// Rank-deficient inputs in three trials out of ten.
pub(crate) fn singular_trial(i: usize) -> bool {
    i % 10 < 3
}

const EVALUATION: CheckSpec = spec("evaluation", 1.0, CheckKind::Invariant);

fn build(setup: &Setup) -> Result<Box<dyn Suite + '_>> {
    use SuiteId::*;
    Ok(match setup.id {
        GyoeNormIdentities => Box::new(quotient::Gyoe::new(setup)?),
        Ax2aCentrality => Box::new(quotient::Ax2a::new(setup)?),
        QimEquivalence => Box::new(quotient::Qim::new(setup)?),
        HooEquivalence => Box::new(quotient::Hoo::new(setup)?),
        NormEqualityLemma => Box::new(multiplicative::NormEquality::new(setup)),
        SeminormOrderLemma => Box::new(multiplicative::SeminormOrder::new(setup)),
        TripleNormJordan => Box::new(multiplicative::TripleNorm::new(setup)?),
        Thm36Equivalences(p) => Box::new(multiplicative::Equivalences::new(setup, p)?),
        HunaTwoMaps => Box::new(multiplicative::TwoMaps::new(setup)?),
        Example38NonAdditive => Box::new(multiplicative::NonAdditivePair::new(setup)?),
        AdditiveBijection => Box::new(centrality::Additive::new(setup)?),
        GeoMeanCentrality => Box::new(centrality::GeoMean::new(setup)?),
        OgasawaraLocal => Box::new(centrality::Squaring::new(setup)),
        CentralityCriteria => Box::new(centrality::Criteria::new(setup)),
        ExtheSemidefinite => Box::new(semidefinite::OrderIso::new(setup)?),
        IneqSemidefinite => Box::new(semidefinite::Ineq::new(setup)),
        Semi13Equivalences(p) => Box::new(semidefinite::Equivalences::new(setup, p)?),
        EffectDiamond(p) => Box::new(semidefinite::Effects::new(setup, p)?),
    })
}

/// Runs suite `id` with the given parameters.
pub fn run_suite(id: SuiteId, params: &SuiteParams) -> Result<SuiteReport> {
    run_with(id, params, None)
}

pub(crate) fn run_with(
    id: SuiteId,
    params: &SuiteParams,
    mutation: Option<Mutation>,
) -> Result<SuiteReport> {
    params.validate()?;
    if let Some(p) = id.p() {
        if !(p > 0.0 && p.is_finite()) {
            return Err(ConeError::InvalidRange(format!("p must be positive, got {p}")));
        }
    }
    let setup = Setup {
        id,
        params: params.clone(),
        forge: mutation::Forge::new(id, &params.shape, params.seed, mutation),
    };
    let suite = build(&setup)?;
    let specs = suite.specs();
    let eval_idx = specs.len();
    let all_specs: Vec<&CheckSpec> = specs.iter().chain(std::iter::once(&EVALUATION)).collect();

    let per_trial: Vec<(Vec<Obs>, Option<String>)> = (0..params.trials)
        .into_par_iter()
        .map(|i| {
            let stream = ((id.index() as u64) << 40) | i as u64;
            let mut sampler = Sampler::new(&params.shape, params.seed, stream);
            let mut rec = Recorder {
                specs,
                tol: params.tol,
                trial: i,
                obs: Vec::new(),
            };
            let err = suite.trial(i, &mut sampler, &mut rec).err();
            (rec.obs, err.map(|e| e.to_string()))
        })
        .collect();

    let mut acc: Vec<Acc> = (0..all_specs.len()).map(|_| Acc::default()).collect();
    for (i, (obs, err)) in per_trial.into_iter().enumerate() {
        for o in obs {
            match o {
                Obs::Value {
                    check,
                    violation,
                    inputs,
                } => acc[check].value(i, violation, inputs),
                Obs::Found { check, witness } => {
                    acc[check].searches += 1;
                    acc[check].found.push(witness);
                }
                Obs::Missing { check, reason } => {
                    acc[check].searches += 1;
                    acc[check].missing.get_or_insert(reason);
                    acc[check].missing_count += 1;
                }
                Obs::Skipped { check, reason } => {
                    acc[check].skipped.get_or_insert(reason);
                }
            }
        }
        acc[eval_idx].value(i, if err.is_some() { f64::INFINITY } else { 0.0 }, None);
        if let Some(e) = err {
            acc[eval_idx].skipped.get_or_insert(format!("trial {i}: {e}"));
        }
    }

    let mut checks: Vec<Check> = all_specs
        .iter()
        .zip(acc.iter_mut())
        .map(|(s, a)| a.finish(s, params.tol))
        .collect();
    suite.finish(&mut checks[..eval_idx]);

    let mut witnesses = Vec::new();
    for (c, a) in checks.iter().zip(acc) {
        witnesses.extend(a.found.into_iter().take(3));
        if c.verdict == Verdict::Fail {
            if let Some(w) = &c.worst {
                witnesses.push(w.clone());
            }
        }
    }

    let verdict = checks.iter().map(|c| c.verdict).max().unwrap_or(Verdict::Pass);
    let reason = checks
        .iter()
        .find(|c| c.verdict == verdict && verdict != Verdict::Pass)
        .map(|c| match verdict {
            Verdict::Fail => format!(
                "{}: violation {:.3e} exceeds {:.1e}{}",
                c.name,
                c.max_violation,
                c.tol,
                c.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
            ),
            _ => format!("{}: {}", c.name, c.note.as_deref().unwrap_or("inconclusive")),
        });
    let max_violation = checks
        .iter()
        .map(|c| c.max_violation * params.tol / c.tol)
        .fold(0.0, f64::max);
    Ok(SuiteReport {
        suite: id,
        params: params.clone(),
        verdict,
        reason,
        max_violation,
        checks,
        witnesses,
        mutation,
    })
}

#[derive(Default)]
struct Acc {
    max: f64,
    worst: Option<(usize, Vec<(String, Element)>)>,
    seen: bool,
    found: Vec<Witness>,
    searches: usize,
    missing: Option<String>,
    missing_count: usize,
    skipped: Option<String>,
}

impl Acc {
    fn value(&mut self, trial: usize, v: f64, inputs: Option<Vec<(String, Element)>>) {
        if !self.seen || v > self.max {
            self.max = v;
            self.worst = inputs.map(|x| (trial, x));
        }
        self.seen = true;
    }

    fn finish(&mut self, spec: &CheckSpec, tol: f64) -> Check {
        let limit = tol * spec.tol_factor;
        let mut note = self.skipped.clone();
        let verdict = if self.max > limit {
            Verdict::Fail
        } else if self.missing_count > 0 {
            note = Some(format!(
                "{} of {} searches produced no witness: {}",
                self.missing_count,
                self.searches,
                self.missing.as_deref().unwrap_or_default()
            ));
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        let worst = self.worst.take().map(|(trial, elements)| Witness {
            name: format!("worst:{}", spec.name),
            elements,
            lhs: self.max,
            rhs: limit,
            margin: self.max - limit,
            trial: Some(trial),
        });
        Check {
            name: spec.name.to_string(),
            kind: spec.kind,
            tol: limit,
            max_violation: self.max,
            verdict,
            note,
            worst,
            searches: self.searches,
            found: self.found.len(),
        }
    }
}

/// `|lhs − rhs| / max(|lhs|, |rhs|, REL_FLOOR · scale)`.
pub(crate) fn rel_err(lhs: f64, rhs: f64, scale: f64) -> f64 {
    let den = lhs.abs().max(rhs.abs()).max(REL_FLOOR * scale.abs());
    if den == 0.0 {
        return if lhs == rhs { 0.0 } else { f64::INFINITY };
    }
    let v = (lhs - rhs).abs() / den;
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// `num / den` with `0 / 0 = 0`, for one-sided defects of possibly zero inputs.
pub(crate) fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Relative distance between elements with the same floor convention.
pub(crate) fn rel_diff(x: &Element, y: &Element, scale: f64) -> f64 {
    let d = (x - y).norm();
    let den = x.norm().max(y.norm()).max(REL_FLOOR * scale.abs());
    if den == 0.0 {
        0.0
    } else {
        d / den
    }
}

/// Sup-distance between sorted spectra relative to their size.
pub(crate) fn spectrum_gap(s: &[f64], t: &[f64], scale: f64) -> f64 {
    if s.len() != t.len() {
        return f64::INFINITY;
    }
    let size = s
        .iter()
        .chain(t)
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(REL_FLOOR * scale.abs());
    if size == 0.0 {
        return 0.0;
    }
    s.iter()
        .zip(t)
        .map(|(a, b)| (a - b).abs() / size)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_id_parsing() {
        assert_eq!("GyoeNormIdentities".parse::<SuiteId>().unwrap(), SuiteId::GyoeNormIdentities);
        assert_eq!(
            "Thm36Equivalences:2".parse::<SuiteId>().unwrap(),
            SuiteId::Thm36Equivalences(2.0)
        );
        assert_eq!(
            "EffectDiamond(0.5)".parse::<SuiteId>().unwrap(),
            SuiteId::EffectDiamond(0.5)
        );
        assert_eq!(
            "semi13equivalences".parse::<SuiteId>().unwrap(),
            SuiteId::Semi13Equivalences(1.0)
        );
        assert!("Bogus".parse::<SuiteId>().is_err());
        assert!("Thm36Equivalences:-1".parse::<SuiteId>().is_err());
        assert!("HooEquivalence:2".parse::<SuiteId>().is_err());
        for id in SuiteId::all() {
            assert_eq!(id.to_string().parse::<SuiteId>().unwrap(), id);
        }
    }

    #[test]
    fn verdict_order() {
        assert!(Verdict::Fail > Verdict::Inconclusive);
        assert!(Verdict::Inconclusive > Verdict::Pass);
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(rel_err(0.0, 0.0, 0.0), 0.0);
        assert!((rel_err(1.0, 1.1, 1.0) - 0.1 / 1.1).abs() < 1e-15);
        assert!(rel_err(1e-20, 0.0, 1.0) < 1e-13);
    }

    #[test]
    fn invalid_params() {
        let shape = AlgebraShape::new(vec![2]).unwrap();
        let p = SuiteParams::new(shape.clone(), 0, 1);
        assert!(run_suite(SuiteId::GyoeNormIdentities, &p).is_err());
        let p = SuiteParams::new(shape, 1, 1).with_tol(0.0);
        assert!(run_suite(SuiteId::GyoeNormIdentities, &p).is_err());
    }
}
