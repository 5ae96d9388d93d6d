//! Quotient-norm identities and the preservers they characterize.

use crate::algebra::{is_central, Element, CLASSIFY_TOL};
use crate::cone::thompson_distance;
use crate::error::Result;
use crate::jordan::{
    extract_jordan_sandwich, extract_jordan_sqrt_congruence, verify_jordan, BlackBox,
};
use crate::random::Sampler;
use crate::spectral::{product_seminorm, spectrum_of_positive_product};

use super::mutation::Form;
use super::witness::{additivity_defect, search_nonadditivity_in, NONADDITIVITY_FLOOR};
use super::{
    rel_diff, rel_err, spec, spectrum_gap, sub_seed, CheckKind::*, CheckSpec, Construction,
    Recorder, SearchOutcome, Setup, Suite, CONSTRUCTIONS,
};

/// Number of samples per Jordan-axiom verification.
pub(crate) const AXIOM_SAMPLES: usize = 10;

fn sqrt_congruence(a: &Element, x: &Element) -> Result<Element> {
    (&(a * &x.square()) * a).sqrt()
}

/// Relative change of the Thompson distance, absolute below distance one.
pub(crate) fn distance_gap(d_map: f64, d: f64) -> f64 {
    (d_map - d).abs() / d.max(1.0)
}

/// Witness search for non-additivity of `phi`, whose weight `a = φ(e)` is
/// expected to be non-central. Witnesses with relative defect below
/// `min_margin` count as misses.
pub(crate) fn nonadditivity_check(
    setup: &Setup,
    phi: &BlackBox,
    a: &Element,
    candidates: &[Element],
    min_margin: f64,
    (check, s, rec): (usize, &mut Sampler, &mut Recorder<'_>),
) -> Result<()> {
    if setup.params.shape.is_commutative() {
        rec.skip(check, "commutative algebra: every weight is central");
    } else if is_central(a, CLASSIFY_TOL) {
        rec.skip(check, "weight is central");
    } else {
        let seed = sub_seed(s);
        match search_nonadditivity_in(phi, a, candidates, setup.budget(), seed)? {
            SearchOutcome::Found(w) if w.margin < min_margin => rec.missing(
                check,
                format!("best relative defect {:.3e} below {min_margin:.0e}", w.margin),
            ),
            outcome => rec.outcome(check, outcome),
        }
    }
    Ok(())
}

pub(crate) struct Gyoe {
    cons: Vec<Construction>,
    phi: Vec<BlackBox>,
    a_inv: Vec<Element>,
}

impl Gyoe {
    pub fn new(setup: &Setup) -> Result<Self> {
        let cons = setup.constructions();
        let phi = cons
            .iter()
            .map(|c| setup.forge.weighted(&c.a, sqrt_congruence))
            .collect();
        let a_inv = cons.iter().map(|c| c.a.inverse()).collect::<Result<_>>()?;
        Ok(Self { cons, phi, a_inv })
    }
}

const GYOE: &[CheckSpec] = &[
    spec("norm_identity", 1.0, Identity),
    spec("quotient_identity", 1.0, Identity),
];

impl Suite for Gyoe {
    fn specs(&self) -> &'static [CheckSpec] {
        GYOE
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let k = i % CONSTRUCTIONS;
        let a = &self.cons[k].a;
        let (x, y) = (s.pd(), s.pd());
        let fx = self.phi[k].eval(&x)?;
        let fy = self.phi[k].eval(&y)?;

        let lhs = (&fx * &self.a_inv[k]).norm();
        rec.value(0, rel_err(lhs, x.norm(), x.norm()), || {
            vec![("a", a.clone()), ("x", x.clone())]
        });

        let lhs = (&fx * &fy.inverse()?).norm();
        let rhs = (&x * &y.inverse()?).norm();
        rec.value(1, rel_err(lhs, rhs, rhs), || {
            vec![("a", a.clone()), ("x", x.clone()), ("y", y.clone())]
        });
        Ok(())
    }
}

pub(crate) struct Ax2a<'s> {
    setup: &'s Setup,
    cons: Vec<Construction>,
    central: Vec<BlackBox>,
    general: Vec<BlackBox>,
}

impl<'s> Ax2a<'s> {
    pub fn new(setup: &'s Setup) -> Result<Self> {
        let cons = setup.constructions();
        let central = cons
            .iter()
            .map(|c| setup.forge.weighted(&c.central, sqrt_congruence))
            .collect();
        let general = cons
            .iter()
            .map(|c| setup.forge.weighted(&c.a, sqrt_congruence))
            .collect();
        Ok(Self {
            setup,
            cons,
            central,
            general,
        })
    }
}

const AX2A: &[CheckSpec] = &[
    spec("central_additivity", 1.0, Identity),
    spec("central_form", 1.0, Identity),
    spec("noncentral_witness", 1.0, Witness),
];

impl Suite for Ax2a<'_> {
    fn specs(&self) -> &'static [CheckSpec] {
        AX2A
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let k = i % CONSTRUCTIONS;
        let c = &self.cons[k];
        let (x, y) = (s.pd(), s.pd());

        let (_, rel) = additivity_defect(&self.central[k], &x, &y)?;
        rec.value(0, rel, || {
            vec![("a", c.central.clone()), ("x", x.clone()), ("y", y.clone())]
        });

        let ax = &c.central * &x;
        rec.value(1, rel_diff(&self.central[k].eval(&x)?, &ax, ax.norm()), || {
            vec![("a", c.central.clone()), ("x", x.clone())]
        });

        if self.setup.is_witness_trial(i) {
            nonadditivity_check(
                self.setup,
                &self.general[k],
                &c.a,
                &[c.a.inverse()?],
                NONADDITIVITY_FLOOR,
                (2, s, rec),
            )?;
        }
        Ok(())
    }
}

pub(crate) struct Qim<'s> {
    setup: &'s Setup,
    cons: Vec<Construction>,
    phi: Vec<BlackBox>,
    phi_central: Vec<BlackBox>,
    extracted: Vec<BlackBox>,
}

impl<'s> Qim<'s> {
    pub fn new(setup: &'s Setup) -> Result<Self> {
        let cons = setup.constructions();
        let e = setup.unit();
        let mut phi = Vec::new();
        let mut phi_central = Vec::new();
        let mut extracted = Vec::new();
        for c in &cons {
            let f = setup.forge.cone(Form::SqrtCongruence, &c.j, &c.a)?;
            extracted.push(extract_jordan_sqrt_congruence(&f, &e)?);
            phi.push(f);
            phi_central.push(setup.forge.cone(Form::SqrtCongruence, &c.j, &c.central)?);
        }
        Ok(Self {
            setup,
            cons,
            phi,
            phi_central,
            extracted,
        })
    }
}

const QIM: &[CheckSpec] = &[
    spec("quotient_norm", 1.0, Identity),
    spec("thompson_isometry", 1.0, Identity),
    spec("extraction_agreement", 10.0, GroundTruth),
    spec("extraction_axioms", 1.0, Identity),
    spec("central_additivity", 1.0, Identity),
    spec("central_form", 1.0, GroundTruth),
    spec("noncentral_witness", 1.0, Witness),
];

impl Suite for Qim<'_> {
    fn specs(&self) -> &'static [CheckSpec] {
        QIM
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let k = i % CONSTRUCTIONS;
        let c = &self.cons[k];
        let phi = &self.phi[k];
        let (x, y) = (s.pd(), s.pd());
        let fx = phi.eval(&x)?;
        let fy = phi.eval(&y)?;
        let inputs = || vec![("a", c.a.clone()), ("x", x.clone()), ("y", y.clone())];

        let lhs = (&fx * &fy.inverse()?).norm();
        let rhs = (&x * &y.inverse()?).norm();
        rec.value(0, rel_err(lhs, rhs, rhs), inputs);

        // ψ(x) = φ(x^{1/2})² is a Thompson isometry.
        let psi_x = phi.eval(&x.sqrt()?)?.square();
        let psi_y = phi.eval(&y.sqrt()?)?.square();
        let d = thompson_distance(&x, &y)?;
        rec.value(1, distance_gap(thompson_distance(&psi_x, &psi_y)?, d), inputs);

        let z = s.pd();
        let jz = c.j.apply(&z)?;
        rec.value(2, rel_diff(&self.extracted[k].eval(&z)?, &jz, z.norm()), || {
            vec![("a", c.a.clone()), ("x", z.clone())]
        });

        if self.setup.is_witness_trial(i) {
            let rep = verify_jordan(
                &self.extracted[k],
                &self.setup.params.shape,
                AXIOM_SAMPLES,
                sub_seed(s),
            );
            rec.value(3, rep.max_violation(), || vec![("a", c.a.clone())]);
        }

        let (_, rel) = additivity_defect(&self.phi_central[k], &x, &y)?;
        rec.value(4, rel, || {
            vec![("a", c.central.clone()), ("x", x.clone()), ("y", y.clone())]
        });
        let target = &c.central * &jz;
        rec.value(
            5,
            rel_diff(&self.phi_central[k].eval(&z)?, &target, target.norm()),
            || vec![("a", c.central.clone()), ("x", z.clone())],
        );

        if self.setup.is_witness_trial(i) {
            // φ(J⁻¹(a⁻¹)) = e, the pivot of the non-additivity argument.
            let w = phi.eval(&self.setup.unit())?;
            let pivot = c.j.inverse().apply(&c.a.inverse()?)?;
            nonadditivity_check(self.setup, phi, &w, &[pivot], NONADDITIVITY_FLOOR, (6, s, rec))?;
        }
        Ok(())
    }
}

pub(crate) struct Hoo<'s> {
    setup: &'s Setup,
    cons: Vec<Construction>,
    phi: Vec<BlackBox>,
    extracted: Vec<BlackBox>,
}

impl<'s> Hoo<'s> {
    pub fn new(setup: &'s Setup) -> Result<Self> {
        let cons = setup.constructions();
        let e = setup.unit();
        let mut phi = Vec::new();
        let mut extracted = Vec::new();
        for c in &cons {
            let f = setup.forge.cone(Form::Sandwich, &c.j, &c.a)?;
            extracted.push(extract_jordan_sandwich(&f, &e)?);
            phi.push(f);
        }
        Ok(Self {
            setup,
            cons,
            phi,
            extracted,
        })
    }
}

const HOO: &[CheckSpec] = &[
    spec("seminorm_identity", 1.0, Identity),
    spec("spectrum_identity", 10.0, Identity),
    spec("thompson_isometry", 1.0, Identity),
    spec("extraction_agreement", 10.0, GroundTruth),
    spec("extraction_axioms", 1.0, Identity),
];

impl Suite for Hoo<'_> {
    fn specs(&self) -> &'static [CheckSpec] {
        HOO
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let k = i % CONSTRUCTIONS;
        let c = &self.cons[k];
        let phi = &self.phi[k];
        let (x, y) = (s.pd(), s.pd());
        let fx = phi.eval(&x)?;
        let fy = phi.eval(&y)?;
        let inputs = || vec![("a", c.a.clone()), ("x", x.clone()), ("y", y.clone())];
        let (fy_inv, y_inv) = (fy.inverse()?, y.inverse()?);

        let lhs = product_seminorm(&fx, &fy_inv)?;
        let rhs = product_seminorm(&x, &y_inv)?;
        rec.value(0, rel_err(lhs, rhs, rhs), inputs);

        let lhs = spectrum_of_positive_product(&fx, &fy_inv)?;
        let rhs = spectrum_of_positive_product(&x, &y_inv)?;
        rec.value(
            1,
            spectrum_gap(&lhs.eigenvalues, &rhs.eigenvalues, rhs.max()),
            inputs,
        );

        let d = thompson_distance(&x, &y)?;
        rec.value(2, distance_gap(thompson_distance(&fx, &fy)?, d), inputs);

        let z = s.pd();
        let jz = c.j.apply(&z)?;
        rec.value(3, rel_diff(&self.extracted[k].eval(&z)?, &jz, z.norm()), || {
            vec![("a", c.a.clone()), ("x", z.clone())]
        });

        if self.setup.is_witness_trial(i) {
            let rep = verify_jordan(
                &self.extracted[k],
                &self.setup.params.shape,
                AXIOM_SAMPLES,
                sub_seed(s),
            );
            rec.value(4, rep.max_violation(), || vec![("a", c.a.clone())]);
        }
        Ok(())
    }
}
