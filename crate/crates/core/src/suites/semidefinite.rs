//! Positive semidefinite cones and effect algebras.

use crate::algebra::{unit, Element};
use crate::cone::{contraction_order_witness, diamond_p, loewner_leq, order_witness_from_norms};
use crate::error::Result;
use crate::jordan::{extract_jordan_sandwich, power_conjugate, BlackBox};
use crate::matrix::{CMat, C64};
use crate::random::Sampler;
use crate::spectral::{hermitian_eig, product_seminorm, spectrum_of_positive_product};

use super::multiplicative::consistency;
use super::mutation::Form;
use super::{
    ratio, rel_diff, rel_err, singular_trial, spec, spectrum_gap, CheckKind::*, CheckSpec, Construction,
    Recorder, SearchOutcome, Setup, Suite, Witness as Found, CONSTRUCTIONS, REL_FLOOR,
};

/// Tolerance for deciding Loewner comparisons of sampled pairs.
const ORDER_TOL: f64 = 1e-9;

/// Homogeneity factors for maps on the full semidefinite cone.
const CONE_FACTORS: [f64; 3] = [0.0, 0.5, 2.0];

/// Homogeneity factors for maps on effects.
const EFFECT_FACTORS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn sandwich_norm(x: &Element, a: &Element) -> f64 {
    (&(x * a) * x).norm()
}

/// Largest relative homogeneity defect `‖φ(tx) − tφ(x)‖ / ‖φ(x)‖` over `ts`.
fn homogeneity(phi: &BlackBox, x: &Element, ts: &[f64]) -> Result<f64> {
    let fx = phi.eval(x)?;
    let scale = fx.norm().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for &t in ts {
        let ftx = phi.eval(&x.scale_real(t))?;
        worst = worst.max((&ftx - &fx.scale_real(t)).norm() / scale);
    }
    Ok(worst)
}

/// Positive semidefinite increment of random rank and size.
fn increment(s: &mut Sampler) -> Element {
    let singular = s.coin(0.5);
    let size = s.uniform(0.01, 1.0);
    s.psd(singular).scale_real(size)
}

/// `λ_min(x)` relative to `‖x‖`.
fn relative_min_eigenvalue(x: &Element) -> Result<f64> {
    let eig = hermitian_eig(x)?;
    Ok(eig.min_eigenvalue() / eig.spectral_radius().max(f64::MIN_POSITIVE))
}

/// `b` with `a ≰ b` for non-zero `a`: `a + p` compressed away from a
/// direction `v` in the range of `a`, so that `v*(b − a)v = −v*av < 0`.
fn incomparable_above(a: &Element, s: &mut Sampler) -> Element {
    let dims = a.shape().dims().to_vec();
    let live: Vec<usize> = (0..dims.len())
        .filter(|&b| a.block(b).max_abs() > 0.0)
        .collect();
    let blk = live[s.index(live.len())];
    let m = a.block(blk);
    let n = dims[blk];
    let w = s.unit_vector(n);
    let mut v: Vec<C64> = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)] * w[j]).sum())
        .collect();
    let len = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= len);
    let mut q = unit(a.shape()).into_blocks();
    q[blk] = q[blk].sub(&CMat::outer(&v));
    let q = Element::new(q).expect("same shape");
    let big = a + &s.psd(false);
    (&(&q * &big) * &q).hermitian_part()
}

pub(crate) struct OrderIso {
    cons: Vec<Construction>,
    phi: Vec<BlackBox>,
    extracted: Vec<BlackBox>,
}

impl OrderIso {
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

const ORDER_ISO: &[CheckSpec] = &[
    spec("homogeneity", 0.1, Identity),
    spec("order_forward", 1.0, Invariant),
    spec("order_backward", 1.0, Invariant),
    spec("singularity_preserved", 1.0, Invariant),
    spec("extraction_agreement", 10.0, GroundTruth),
];

impl Suite for OrderIso {
    fn specs(&self) -> &'static [CheckSpec] {
        ORDER_ISO
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let k = i % CONSTRUCTIONS;
        let c = &self.cons[k];
        let phi = &self.phi[k];
        let singular = singular_trial(i);
        let x = s.psd(singular);
        let fx = phi.eval(&x)?;

        rec.value(0, homogeneity(phi, &x, &CONE_FACTORS)?, || {
            vec![("a", c.a.clone()), ("x", x.clone())]
        });

        // x ≤ y = x + p, with p of random rank and size.
        let p = increment(s);
        let y = &x + &p;
        let fy = phi.eval(&y)?;
        let lam = hermitian_eig(&(&fy - &fx))?.min_eigenvalue();
        rec.value(1, ratio((-lam).max(0.0), fy.norm()), || {
            vec![("a", c.a.clone()), ("x", x.clone()), ("y", y.clone())]
        });

        // Order comparison in both directions for a pair that is comparable
        // about half the time.
        let z = if s.coin(0.5) {
            &x + &s.psd(true).scale_real(s.uniform(0.01, 1.0))
        } else {
            s.psd(singular)
        };
        let fz = phi.eval(&z)?;
        let before = loewner_leq(&x, &z, ORDER_TOL)?;
        let after = loewner_leq(&fx, &fz, ORDER_TOL)?;
        let violation = if before.holds == after.holds {
            0.0
        } else {
            before.margin.abs().min(after.margin.abs())
        };
        rec.value(2, violation, || {
            vec![("a", c.a.clone()), ("x", x.clone()), ("y", z.clone())]
        });

        let lam = relative_min_eigenvalue(&fx)?;
        let violation = if singular { lam.max(0.0) } else if lam > 0.0 { 0.0 } else { 1.0 };
        rec.value(3, violation, || vec![("a", c.a.clone()), ("x", x.clone())]);

        let jx = c.j.apply(&x)?;
        rec.value(4, rel_diff(&self.extracted[k].eval(&x)?, &jx, x.norm()), || {
            vec![("a", c.a.clone()), ("x", x.clone())]
        });
        Ok(())
    }
}

pub(crate) struct Ineq;

impl Ineq {
    pub fn new(_setup: &Setup) -> Self {
        Self
    }
}

const INEQ: &[CheckSpec] = &[
    spec("forward", 0.1, Structural),
    spec("witness_success", 1.0, Witness),
    spec("contraction_witness", 1.0, Witness),
];

impl Suite for Ineq {
    fn specs(&self) -> &'static [CheckSpec] {
        INEQ
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let singular = singular_trial(i);
        let a = s.psd(singular);
        let b = &a + &increment(s);
        let x = s.psd(singular);
        let lo = sandwich_norm(&x, &a);
        let hi = sandwich_norm(&x, &b);
        let scale = x.norm().powi(2) * b.norm();
        rec.value(0, ratio((lo - hi).max(0.0), hi.max(REL_FLOOR * scale)), || {
            vec![("a", a.clone()), ("b", b.clone()), ("x", x.clone())]
        });

        // Every trial builds an incomparable pair and asks for a witness.
        let mut a = s.psd(singular);
        while a.norm() == 0.0 {
            a = s.psd(singular);
        }
        let b = incomparable_above(&a, s);
        for (check, x) in [
            (1, order_witness_from_norms(&a, &b)),
            (2, contraction_order_witness(&a, &b)),
        ] {
            match x {
                Ok(Some(x)) => {
                    let lhs = sandwich_norm(&x, &a);
                    let rhs = sandwich_norm(&x, &b);
                    let found = Found::new(
                        "norm-order",
                        vec![("a", a.clone()), ("b", b.clone()), ("x", x)],
                        lhs,
                        rhs,
                        (lhs - rhs) / lhs,
                    );
                    if found.margin > 0.0 {
                        rec.outcome(check, SearchOutcome::Found(found));
                    } else {
                        rec.missing(check, "witness does not separate the norms");
                    }
                }
                Ok(None) => rec.missing(check, "pair reported comparable"),
                Err(e) => rec.missing(check, e.to_string()),
            }
        }
        Ok(())
    }
}

/// Relative error for norms of products of possibly singular elements.
fn product_err(lhs: f64, rhs: f64, x: &Element, y: &Element) -> f64 {
    rel_err(lhs, rhs, x.norm() * y.norm())
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
        let singular = singular_trial(i);
        let x = s.psd(singular);
        let y_singular = singular && s.coin(0.5);
        let y = s.psd(y_singular);
        let fx = phi.eval(&x)?;
        let fy = phi.eval(&y)?;
        let inputs = || vec![("x", x.clone()), ("y", y.clone())];

        let lhs = (&fx * &fy).norm();
        let rhs = (&x * &y).norm();
        rec.value(0, product_err(lhs, rhs, &x, &y), inputs);

        let lhs = product_seminorm(&fx, &fy)?;
        let rhs = product_seminorm(&x, &y)?;
        rec.value(1, product_err(lhs, rhs, &x, &y), inputs);

        // Full sorted spectra (zeros included) and the invertibility flags.
        let lhs = spectrum_of_positive_product(&fx, &fy)?;
        let rhs = spectrum_of_positive_product(&x, &y)?;
        let gap = if lhs.singular == rhs.singular {
            spectrum_gap(&lhs.eigenvalues, &rhs.eigenvalues, x.norm() * y.norm())
        } else {
            1.0
        };
        rec.value(2, gap, inputs);

        let lhs = diamond_p(&fx, &fy, self.p)?.norm();
        let rhs = diamond_p(&x, &y, self.p)?.norm();
        rec.value(3, product_err(lhs, rhs, &x, &y), inputs);

        let e = self.setup.unit();
        let squared = power_conjugate(phi, 2.0);
        let powered = power_conjugate(phi, self.p);
        rec.value(4, rel_diff(&squared.eval(&e)?, &e, 1.0), Vec::new);
        let jx = c.j.apply(&x)?;
        let gap = rel_diff(&squared.eval(&x)?, &jx, x.norm())
            .max(rel_diff(&powered.eval(&x)?, &jx, x.norm()));
        rec.value(5, gap, || vec![("x", x.clone())]);
        Ok(())
    }

    fn finish(&self, checks: &mut [super::Check]) {
        consistency(checks, &[0, 1, 2, 3], 6);
    }
}

/// `φ̃(x) = ‖x‖ φ(x/‖x‖)`, the extension of a map on effects to the cone.
fn scalar_extension(phi: &BlackBox) -> BlackBox {
    let phi = phi.clone();
    BlackBox::new("scalar-extension", move |x| {
        let n = x.norm();
        if n == 0.0 {
            return Ok(x.clone());
        }
        Ok(phi.eval(&x.scale_real(1.0 / n))?.scale_real(n))
    })
}

pub(crate) struct Effects {
    p: f64,
    cons: Vec<Construction>,
    phi: Vec<BlackBox>,
    extended: Vec<BlackBox>,
}

impl Effects {
    pub fn new(setup: &Setup, p: f64) -> Result<Self> {
        let cons = setup.constructions();
        let e = setup.unit();
        let phi: Vec<BlackBox> = cons
            .iter()
            .map(|c| setup.forge.cone(Form::Plain, &c.j, &e))
            .collect::<Result<_>>()?;
        let extended = phi.iter().map(scalar_extension).collect();
        Ok(Self {
            p,
            cons,
            phi,
            extended,
        })
    }
}

const EFFECTS: &[CheckSpec] = &[
    spec("mean_norm", 1.0, Identity),
    spec("homogeneity", 0.1, Identity),
    spec("extension_mean_norm", 1.0, Invariant),
    spec("effect_preserved", 1.0, Invariant),
    spec("extension_recovers_jordan", 10.0, GroundTruth),
];

impl Suite for Effects {
    fn specs(&self) -> &'static [CheckSpec] {
        EFFECTS
    }

    fn trial(&self, i: usize, s: &mut Sampler, rec: &mut Recorder<'_>) -> Result<()> {
        let k = i % CONSTRUCTIONS;
        let c = &self.cons[k];
        let phi = &self.phi[k];
        let singular = singular_trial(i);
        let x = s.effect(singular);
        let y_singular = singular && s.coin(0.5);
        let y = s.effect(y_singular);
        let fx = phi.eval(&x)?;
        let fy = phi.eval(&y)?;

        let lhs = diamond_p(&fx, &fy, self.p)?.norm();
        let rhs = diamond_p(&x, &y, self.p)?.norm();
        rec.value(0, product_err(lhs, rhs, &x, &y), || {
            vec![("x", x.clone()), ("y", y.clone())]
        });

        rec.value(1, homogeneity(phi, &x, &EFFECT_FACTORS)?, || {
            vec![("x", x.clone())]
        });

        let ext = &self.extended[k];
        let (u, v) = (s.psd(singular), s.pd());
        let lhs = diamond_p(&ext.eval(&u)?, &ext.eval(&v)?, self.p)?.norm();
        let rhs = diamond_p(&u, &v, self.p)?.norm();
        rec.value(2, product_err(lhs, rhs, &u, &v), || {
            vec![("x", u.clone()), ("y", v.clone())]
        });

        let eig = hermitian_eig(&fx)?;
        let violation = (eig.max_eigenvalue() - 1.0).max(-eig.min_eigenvalue()).max(0.0);
        rec.value(3, violation, || vec![("x", x.clone())]);

        let ju = c.j.apply(&u)?;
        rec.value(4, rel_diff(&ext.eval(&u)?, &ju, u.norm()), || {
            vec![("x", u.clone())]
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraShape;

    #[test]
    fn incomparable_pairs() {
        let shape = AlgebraShape::new(vec![1, 3]).unwrap();
        let mut s = Sampler::new(&shape, 4, 0);
        for _ in 0..50 {
            let a = s.pd();
            let b = incomparable_above(&a, &mut s);
            assert!(!loewner_leq(&a, &b, ORDER_TOL).unwrap().holds);
            assert!(relative_min_eigenvalue(&b).unwrap() > -1e-12);
        }
    }
}
