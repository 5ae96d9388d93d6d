//! Additive bijections and the centrality criteria.

use crate::algebra::Element;
use crate::cone::geometric_mean;
use crate::error::Result;
use crate::jordan::{extract_jordan_sandwich, BlackBox};
use crate::random::Sampler;
use crate::spectral::{hermitian_eig, product_seminorm};

use super::mutation::Form;
use super::quotient::nonadditivity_check;
use super::witness::{
    additivity_defect, centrality_violations, search_seminorm_gap_witness,
    search_squaring_witness, NONADDITIVITY_FLOOR,
};
use super::{
    rel_diff, rel_err, spec, sub_seed, CheckKind::*, CheckSpec, Construction, Recorder, Setup,
    Suite, CONSTRUCTIONS,
};

pub(crate) struct Additive {
    cons: Vec<Construction>,
    phi: Vec<BlackBox>,
    extracted: Vec<BlackBox>,
}

impl Additive {
    pub fn new(setup: &Setup) -> Result<Self> {
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
            cons,
            phi,
            extracted,
        })
    }
}

const ADDITIVE: &[CheckSpec] = &[
    spec("additivity", 1.0, Identity),
    spec("midpoint", 0.1, Identity),
    spec("halving", 1.0, Identity),
    spec("extraction_agreement", 10.0, GroundTruth),
];

impl Suite for Additive {
    fn specs(&self) -> &'static [CheckSpec] {
        ADDITIVE
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let k = i % CONSTRUCTIONS;
        let c = &self.cons[k];
        let phi = &self.phi[k];
        let (x, y) = (s.pd(), s.pd());
        let inputs = || vec![("a", c.a.clone()), ("x", x.clone()), ("y", y.clone())];

        let (_, rel) = additivity_defect(phi, &x, &y)?;
        rec.value(0, rel, inputs);

        let fx = phi.eval(&x)?;
        let fy = phi.eval(&y)?;
        let mid = phi.eval(&(&x + &y).scale_real(0.5))?;
        let avg = (&fx + &fy).scale_real(0.5);
        rec.value(1, rel_diff(&mid, &avg, avg.norm()), inputs);

        let half = phi.eval(&x.scale_real(0.5))?;
        rec.value(2, rel_diff(&half, &fx.scale_real(0.5), fx.norm()), inputs);

        let jx = c.j.apply(&x)?;
        rec.value(3, rel_diff(&self.extracted[k].eval(&x)?, &jx, x.norm()), inputs);
        Ok(())
    }
}

fn squared_mean(b: &Element, x: &Element) -> Result<Element> {
    Ok(geometric_mean(b, x)?.square())
}

pub(crate) struct GeoMean<'s> {
    setup: &'s Setup,
    cons: Vec<Construction>,
    central: Vec<BlackBox>,
    general: Vec<BlackBox>,
}

impl<'s> GeoMean<'s> {
    pub fn new(setup: &'s Setup) -> Result<Self> {
        let cons = setup.constructions();
        let central = cons
            .iter()
            .map(|c| setup.forge.weighted(&c.central, squared_mean))
            .collect();
        let general = cons
            .iter()
            .map(|c| setup.forge.weighted(&c.a, squared_mean))
            .collect();
        Ok(Self {
            setup,
            cons,
            central,
            general,
        })
    }
}

const GEO_MEAN: &[CheckSpec] = &[
    spec("central_additivity", 1.0, Identity),
    spec("central_form", 1.0, Identity),
    spec("unit_image", 1.0, Identity),
    spec("noncentral_witness", 1.0, Witness),
];

impl Suite for GeoMean<'_> {
    fn specs(&self) -> &'static [CheckSpec] {
        GEO_MEAN
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let k = i % CONSTRUCTIONS;
        let c = &self.cons[k];
        let (x, y) = (s.pd(), s.pd());

        let (_, rel) = additivity_defect(&self.central[k], &x, &y)?;
        rec.value(0, rel, || {
            vec![("b", c.central.clone()), ("x", x.clone()), ("y", y.clone())]
        });

        let bx = &c.central * &x;
        rec.value(1, rel_diff(&self.central[k].eval(&x)?, &bx, bx.norm()), || {
            vec![("b", c.central.clone()), ("x", x.clone())]
        });

        let e = self.setup.unit();
        rec.value(2, rel_diff(&self.general[k].eval(&e)?, &c.a, 1.0), || {
            vec![("b", c.a.clone())]
        });

        if self.setup.is_witness_trial(i) {
            nonadditivity_check(
                self.setup,
                &self.general[k],
                &c.a,
                &[c.a.inverse()?, c.a.clone()],
                NONADDITIVITY_FLOOR,
                (3, s, rec),
            )?;
        }
        Ok(())
    }
}

pub(crate) struct Squaring<'s> {
    setup: &'s Setup,
    cons: Vec<Construction>,
}

impl<'s> Squaring<'s> {
    pub fn new(setup: &'s Setup) -> Self {
        Self {
            setup,
            cons: setup.constructions(),
        }
    }
}

const SQUARING: &[CheckSpec] = &[
    spec("central_monotone", 1.0, Structural),
    spec("squaring_witness", 1.0, Witness),
];

impl Suite for Squaring<'_> {
    fn specs(&self) -> &'static [CheckSpec] {
        SQUARING
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let c = &self.cons[i % CONSTRUCTIONS];
        let a = &c.central;
        let x = a + &s.psd(i % 10 < 3).scale_real(s.uniform(0.01, 3.0) / a.norm().max(1.0));
        let d = &x.square() - &a.square();
        let lam = hermitian_eig(&d.hermitian_part())?.min_eigenvalue();
        rec.value(0, (-lam / x.norm().powi(2)).max(0.0), || {
            vec![("a", a.clone()), ("x", x.clone())]
        });

        if self.setup.is_witness_trial(i) {
            if self.setup.params.shape.is_commutative() {
                rec.skip(1, "commutative algebra: every element is central");
            } else {
                let seed = sub_seed(s);
                rec.outcome(1, search_squaring_witness(&c.a, self.setup.budget(), seed)?);
            }
        }
        Ok(())
    }
}

pub(crate) struct Criteria<'s> {
    setup: &'s Setup,
    cons: Vec<Construction>,
}

impl<'s> Criteria<'s> {
    pub fn new(setup: &'s Setup) -> Self {
        Self {
            setup,
            cons: setup.constructions(),
        }
    }
}

const CRITERIA: &[CheckSpec] = &[
    spec("central_conjugation_norm", 1.0, Structural),
    spec("central_square_norm", 1.0, Structural),
    spec("central_seminorm", 1.0, Structural),
    spec("central_square_seminorm", 1.0, Structural),
    spec("sandwich_equals_seminorm", 1.0, Structural),
    spec("gap_witness", 1.0, Witness),
];

impl Suite for Criteria<'_> {
    fn specs(&self) -> &'static [CheckSpec] {
        CRITERIA
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let c = &self.cons[i % CONSTRUCTIONS];
        let x = s.pd();
        let v = centrality_violations(&c.central, &x)?;
        for (check, &violation) in v.iter().enumerate() {
            rec.value(check, violation, || {
                vec![("a", c.central.clone()), ("x", x.clone())]
            });
        }

        // ‖axa‖ = ‖a²x‖_S holds for every positive a.
        let a = s.pd();
        let lhs = (&(&a * &x) * &a).norm();
        let rhs = product_seminorm(&a.square(), &x)?;
        rec.value(4, rel_err(lhs, rhs, rhs), || {
            vec![("a", a.clone()), ("x", x.clone())]
        });

        if self.setup.is_witness_trial(i) {
            if self.setup.params.shape.is_commutative() {
                rec.skip(5, "commutative algebra: every element is central");
            } else {
                let seed = sub_seed(s);
                rec.outcome(5, search_seminorm_gap_witness(&c.a, self.setup.budget(), seed)?);
            }
        }
        Ok(())
    }
}
