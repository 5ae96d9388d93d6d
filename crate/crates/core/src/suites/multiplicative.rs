//! Norms of products: the order lemmas and the multiplicative preservers.

use crate::algebra::{is_central, Element, CLASSIFY_TOL};
use crate::cone::{diamond_p, rank_one, loewner_leq, order_witness_from_norms};
use crate::error::Result;
use crate::jordan::{power_conjugate, verify_jordan, BlackBox};
use crate::random::Sampler;
use crate::spectral::{product_seminorm, spectrum_of_positive_product};

use super::mutation::Form;
use super::quotient::{nonadditivity_check, AXIOM_SAMPLES};
use super::witness::NONADDITIVITY_TARGET;
use super::{
    rel_diff, rel_err, spec, spectrum_gap, sub_seed, Check, CheckKind::*, CheckSpec,
    Construction, Recorder, SearchOutcome, Setup, Suite, Verdict, Witness as Found,
    CONSTRUCTIONS,
};

fn sandwich_norm(x: &Element, a: &Element) -> f64 {
    (&(x * a) * x).norm()
}

/// Derived check: the listed equivalent conditions must agree on every
/// construction, i.e. all pass or all fail.
pub(crate) fn consistency(checks: &mut [Check], members: &[usize], target: usize) {
    let verdicts: Vec<Verdict> = members
        .iter()
        .map(|&m| checks[m].verdict)
        .filter(|&v| v != Verdict::Inconclusive)
        .collect();
    let agree = verdicts.windows(2).all(|w| w[0] == w[1]);
    if !agree {
        let summary = members
            .iter()
            .map(|&m| format!("{}={}", checks[m].name, checks[m].verdict))
            .collect::<Vec<_>>()
            .join(", ");
        let c = &mut checks[target];
        c.max_violation = 1.0;
        c.verdict = Verdict::Fail;
        c.note = Some(format!("equivalent conditions disagree: {summary}"));
    }
}

pub(crate) struct NormEquality<'s> {
    setup: &'s Setup,
}

impl<'s> NormEquality<'s> {
    pub fn new(setup: &'s Setup) -> Self {
        Self { setup }
    }
}

const NORM_EQUALITY: &[CheckSpec] = &[
    spec("product_square", 1.0, Structural),
    spec("order_forward", 1.0, Structural),
    spec("distinguishing_witness", 1.0, Witness),
];

impl Suite for NormEquality<'_> {
    fn specs(&self) -> &'static [CheckSpec] {
        NORM_EQUALITY
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let (a, x) = (s.pd(), s.pd());
        let lhs = (&a * &x).norm().powi(2);
        let rhs = sandwich_norm(&x, &a.square());
        rec.value(0, rel_err(lhs, rhs, rhs), || {
            vec![("a", a.clone()), ("x", x.clone())]
        });

        let big = &a + &s.psd(true);
        let lo = sandwich_norm(&x, &a);
        let hi = sandwich_norm(&x, &big);
        rec.value(1, (lo - hi).max(0.0) / hi, || {
            vec![("a", a.clone()), ("b", big.clone()), ("x", x.clone())]
        });

        if self.setup.is_witness_trial(i) {
            let b = s.pd();
            let found = match order_witness_from_norms(&a, &b)? {
                Some(x) => Some((a.clone(), b.clone(), x)),
                None => order_witness_from_norms(&b, &a)?.map(|x| (b.clone(), a.clone(), x)),
            };
            match found {
                Some((a, b, x)) => {
                    let lhs = sandwich_norm(&x, &a);
                    let rhs = sandwich_norm(&x, &b);
                    rec.outcome(
                        2,
                        SearchOutcome::Found(Found::new(
                            "norm-distinguishes",
                            vec![("a", a), ("b", b), ("x", x)],
                            lhs,
                            rhs,
                            (lhs - rhs) / lhs,
                        )),
                    );
                }
                None => rec.missing(2, "weights are numerically equal"),
            }
        }
        Ok(())
    }
}

pub(crate) struct SeminormOrder<'s> {
    setup: &'s Setup,
}

impl<'s> SeminormOrder<'s> {
    pub fn new(setup: &'s Setup) -> Self {
        Self { setup }
    }
}

const SEMINORM_ORDER: &[CheckSpec] = &[
    spec("order_forward", 1.0, Structural),
    spec("triple_equals_seminorm", 1.0, Structural),
    spec("converse_witness", 1.0, Witness),
];

impl Suite for SeminormOrder<'_> {
    fn specs(&self) -> &'static [CheckSpec] {
        SEMINORM_ORDER
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let (a, y) = (s.pd(), s.pd());
        let big = &a + &s.psd(true);
        let lo = product_seminorm(&a, &y)?;
        let hi = product_seminorm(&big, &y)?;
        rec.value(0, (lo - hi).max(0.0) / hi, || {
            vec![("a", a.clone()), ("b", big.clone()), ("y", y.clone())]
        });

        let lhs = sandwich_norm(&y, &a);
        let rhs = product_seminorm(&a, &y.square())?;
        rec.value(1, rel_err(lhs, rhs, rhs), || {
            vec![("a", a.clone()), ("y", y.clone())]
        });

        if self.setup.is_witness_trial(i) {
            let mut b = s.pd();
            if loewner_leq(&a, &b, 0.0)?.holds {
                // b = a - t vv* keeps b invertible while b - a has a negative direction.
                let blk = s.index(a.shape().num_blocks());
                let v = s.unit_vector(a.shape().dims()[blk]);
                let t = 0.5 * loewner_min(&a)?;
                b = (&a - &rank_one(&a, blk, &v).scale_real(t)).hermitian_part();
            }
            match order_witness_from_norms(&a, &b) {
                Ok(Some(x)) => {
                    let y = x.square();
                    let lhs = product_seminorm(&a, &y)?;
                    let rhs = product_seminorm(&b, &y)?;
                    if lhs > rhs {
                        rec.outcome(
                            2,
                            SearchOutcome::Found(Found::new(
                                "seminorm-order",
                                vec![("a", a), ("b", b), ("y", y)],
                                lhs,
                                rhs,
                                (lhs - rhs) / lhs,
                            )),
                        );
                    } else {
                        rec.missing(2, "order witness does not separate the seminorms");
                    }
                }
                Ok(None) => rec.missing(2, "could not construct an incomparable pair"),
                Err(e) => rec.missing(2, e.to_string()),
            }
        }
        Ok(())
    }
}

fn loewner_min(x: &Element) -> Result<f64> {
    Ok(crate::spectral::hermitian_eig(x)?.min_eigenvalue())
}

pub(crate) struct TripleNorm<'s> {
    setup: &'s Setup,
    cons: Vec<Construction>,
    phi: Vec<BlackBox>,
}

impl<'s> TripleNorm<'s> {
    pub fn new(setup: &'s Setup) -> Result<Self> {
        let cons = setup.constructions();
        let e = setup.unit();
        let phi = cons
            .iter()
            .map(|c| setup.forge.cone(Form::Plain, &c.j, &e))
            .collect::<Result<_>>()?;
        Ok(Self { setup, cons, phi })
    }
}

const TRIPLE_NORM: &[CheckSpec] = &[
    spec("triple_norm", 1.0, Identity),
    spec("unit_fixed", 1.0, Invariant),
    spec("jordan_axioms", 1.0, Identity),
    spec("recovers_jordan", 10.0, GroundTruth),
];

impl Suite for TripleNorm<'_> {
    fn specs(&self) -> &'static [CheckSpec] {
        TRIPLE_NORM
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let k = i % CONSTRUCTIONS;
        let c = &self.cons[k];
        let phi = &self.phi[k];
        let (x, y) = (s.pd(), s.pd());
        let fx = phi.eval(&x)?;
        let fy = phi.eval(&y)?;

        let lhs = sandwich_norm(&fy, &fx);
        let rhs = sandwich_norm(&y, &x);
        rec.value(0, rel_err(lhs, rhs, rhs), || {
            vec![("x", x.clone()), ("y", y.clone())]
        });

        let e = self.setup.unit();
        rec.value(1, rel_diff(&phi.eval(&e)?, &e, 1.0), Vec::new);

        if self.setup.is_witness_trial(i) {
            let rep = verify_jordan(phi, &self.setup.params.shape, AXIOM_SAMPLES, sub_seed(s));
            rec.value(2, rep.max_violation(), Vec::new);
        }

        rec.value(3, rel_diff(&fx, &c.j.apply(&x)?, x.norm()), || {
            vec![("x", x.clone())]
        });
        Ok(())
    }
}

pub(crate) struct Equivalences<'s> {
    setup: &'s Setup,
    p: f64,
    cons: Vec<Construction>,
    phi: Vec<BlackBox>,
}

impl<'s> Equivalences<'s> {
    pub fn new(setup: &'s Setup, p: f64) -> Result<Self> {
        let cons = setup.constructions();
        let e = setup.unit();
        let phi = cons
            .iter()
            .map(|c| setup.forge.cone(Form::Plain, &c.j, &e))
            .collect::<Result<_>>()?;
        Ok(Self {
            setup,
            p,
            cons,
            phi,
        })
    }
}

const EQUIVALENCES: &[CheckSpec] = &[
    spec("product_norm", 1.0, Identity),
    spec("product_seminorm", 1.0, Identity),
    spec("product_spectrum", 10.0, Identity),
    spec("mean_norm", 1.0, Identity),
    spec("reverse_unit", 1.0, Invariant),
    spec("reverse_recovers_jordan", 10.0, GroundTruth),
    spec("reverse_axioms", 1.0, Identity),
    spec("equivalence_consistency", 1.0, Structural),
];

impl Suite for Equivalences<'_> {
    fn specs(&self) -> &'static [CheckSpec] {
        EQUIVALENCES
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let k = i % CONSTRUCTIONS;
        let c = &self.cons[k];
        let phi = &self.phi[k];
        let (x, y) = (s.pd(), s.pd());
        let fx = phi.eval(&x)?;
        let fy = phi.eval(&y)?;
        let inputs = || vec![("x", x.clone()), ("y", y.clone())];

        let lhs = (&fx * &fy).norm();
        let rhs = (&x * &y).norm();
        rec.value(0, rel_err(lhs, rhs, rhs), inputs);

        let lhs = product_seminorm(&fx, &fy)?;
        let rhs = product_seminorm(&x, &y)?;
        rec.value(1, rel_err(lhs, rhs, rhs), inputs);

        let lhs = spectrum_of_positive_product(&fx, &fy)?;
        let rhs = spectrum_of_positive_product(&x, &y)?;
        rec.value(
            2,
            spectrum_gap(&lhs.eigenvalues, &rhs.eigenvalues, rhs.max()),
            inputs,
        );

        let lhs = diamond_p(&fx, &fy, self.p)?.norm();
        let rhs = diamond_p(&x, &y, self.p)?.norm();
        rec.value(3, rel_err(lhs, rhs, rhs), inputs);

        // Reverse direction: the square and p-th power conjugates of φ are
        // unital triple-product preservers, hence Jordan.
        let e = self.setup.unit();
        let squared = power_conjugate(phi, 2.0);
        let powered = power_conjugate(phi, self.p);
        rec.value(4, rel_diff(&squared.eval(&e)?, &e, 1.0), Vec::new);
        let z = s.pd();
        let jz = c.j.apply(&z)?;
        let gap = rel_diff(&squared.eval(&z)?, &jz, z.norm())
            .max(rel_diff(&powered.eval(&z)?, &jz, z.norm()));
        rec.value(5, gap, || vec![("x", z.clone())]);

        if self.setup.is_witness_trial(i) {
            let rep = verify_jordan(&squared, &self.setup.params.shape, AXIOM_SAMPLES, sub_seed(s));
            rec.value(6, rep.max_violation(), Vec::new);
        }
        Ok(())
    }

    fn finish(&self, checks: &mut [Check]) {
        consistency(checks, &[0, 1, 2, 3], 7);
    }
}

pub(crate) struct TwoMaps<'s> {
    setup: &'s Setup,
    cons: Vec<Construction>,
    first: Vec<BlackBox>,
    second: Vec<BlackBox>,
    example: Vec<(BlackBox, BlackBox)>,
}

impl<'s> TwoMaps<'s> {
    pub fn new(setup: &'s Setup) -> Result<Self> {
        let cons = setup.constructions();
        let e = setup.unit();
        let mut first = Vec::new();
        let mut second = Vec::new();
        let mut example = Vec::new();
        for c in &cons {
            first.push(setup.forge.cone(Form::Plain, &c.j, &e)?);
            second.push(setup.forge.cone(Form::Plain, &c.j, &e)?);
            example.push((
                setup.forge.cone(Form::SqrtCongruence, &c.j, &c.a)?,
                setup.forge.cone(Form::InverseSqrtCongruence, &c.j, &c.a)?,
            ));
        }
        Ok(Self {
            setup,
            cons,
            first,
            second,
            example,
        })
    }
}

const TWO_MAPS: &[CheckSpec] = &[
    spec("unital_product_norm", 1.0, Identity),
    spec("second_unit", 1.0, Invariant),
    spec("maps_agree", 1.0, Invariant),
    spec("recovers_jordan", 10.0, GroundTruth),
    spec("example_product_norm", 1.0, Identity),
    spec("example_maps_distinct", 1.0, Witness),
];

impl Suite for TwoMaps<'_> {
    fn specs(&self) -> &'static [CheckSpec] {
        TWO_MAPS
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let k = i % CONSTRUCTIONS;
        let c = &self.cons[k];
        let (f1, f2) = (&self.first[k], &self.second[k]);
        let (x, y) = (s.pd(), s.pd());
        let inputs = || vec![("x", x.clone()), ("y", y.clone())];
        let rhs = (&x * &y).norm();

        let lhs = (&f1.eval(&x)? * &f2.eval(&y)?).norm();
        rec.value(0, rel_err(lhs, rhs, rhs), inputs);

        let e = self.setup.unit();
        rec.value(1, rel_diff(&f2.eval(&e)?, &e, 1.0), Vec::new);
        rec.value(2, rel_diff(&f1.eval(&x)?, &f2.eval(&x)?, x.norm()), || {
            vec![("x", x.clone())]
        });

        let jx = c.j.apply(&x)?;
        let gap = rel_diff(&power_conjugate(f1, 2.0).eval(&x)?, &jx, x.norm())
            .max(rel_diff(&f2.eval(&x)?, &jx, x.norm()));
        rec.value(3, gap, || vec![("x", x.clone())]);

        let (g1, g2) = &self.example[k];
        let lhs = (&g1.eval(&x)? * &g2.eval(&y)?).norm();
        rec.value(4, rel_err(lhs, rhs, rhs), || {
            vec![("a", c.a.clone()), ("x", x.clone()), ("y", y.clone())]
        });

        if self.setup.is_witness_trial(i) {
            let (u1, u2) = (g1.eval(&e)?, g2.eval(&e)?);
            let d = rel_diff(&u1, &u2, 1.0);
            if d > 1e-6 {
                rec.outcome(
                    5,
                    SearchOutcome::Found(Found::new(
                        "distinct-maps",
                        vec![("a", c.a.clone()), ("x", e)],
                        (&u1 - &u2).norm(),
                        0.0,
                        d,
                    )),
                );
            } else {
                rec.missing(5, "weight is numerically the unit");
            }
        }
        Ok(())
    }
}

pub(crate) struct NonAdditivePair<'s> {
    setup: &'s Setup,
    cons: Vec<Construction>,
    maps: Vec<(BlackBox, BlackBox)>,
}

impl<'s> NonAdditivePair<'s> {
    pub fn new(setup: &'s Setup) -> Result<Self> {
        let cons = setup.constructions();
        let maps = cons
            .iter()
            .map(|c| {
                Ok((
                    setup.forge.cone(Form::SqrtCongruence, &c.j, &c.a)?,
                    setup.forge.cone(Form::InverseSqrtCongruence, &c.j, &c.a)?,
                ))
            })
            .collect::<Result<_>>()?;
        Ok(Self { setup, cons, maps })
    }
}

const NON_ADDITIVE: &[CheckSpec] = &[
    spec("product_norm", 1.0, Identity),
    spec("inverse_relation", 1.0, Identity),
    spec("unit_image", 1.0, Invariant),
    spec("nonadditivity_witness", 1.0, Witness),
];

impl Suite for NonAdditivePair<'_> {
    fn specs(&self) -> &'static [CheckSpec] {
        NON_ADDITIVE
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let k = i % CONSTRUCTIONS;
        let c = &self.cons[k];
        let (f1, f2) = &self.maps[k];
        let (x, y) = (s.pd(), s.pd());

        let lhs = (&f1.eval(&x)? * &f2.eval(&y)?).norm();
        let rhs = (&x * &y).norm();
        rec.value(0, rel_err(lhs, rhs, rhs), || {
            vec![("a", c.a.clone()), ("x", x.clone()), ("y", y.clone())]
        });

        let lhs = f2.eval(&y)?;
        let rhs = f1.eval(&y.inverse()?)?.inverse()?;
        rec.value(1, rel_diff(&lhs, &rhs, y.norm()), || {
            vec![("a", c.a.clone()), ("y", y.clone())]
        });

        let e = self.setup.unit();
        rec.value(2, rel_diff(&f1.eval(&e)?, &c.a, 1.0), || {
            vec![("a", c.a.clone())]
        });

        if self.setup.is_witness_trial(i) {
            if is_central(&c.a, CLASSIFY_TOL) {
                rec.missing(3, "the pair needs a non-central weight");
                return Ok(());
            }
            let pivot = c.j.inverse().apply(&c.a.inverse()?)?;
            nonadditivity_check(
                self.setup,
                f1,
                &c.a,
                &[pivot],
                NONADDITIVITY_TARGET,
                (3, s, rec),
            )?;
        }
        Ok(())
    }
}
