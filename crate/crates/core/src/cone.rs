//! Order and metric geometry of the positive cones: Loewner comparison,
//! Thompson metric, geometric mean, sequential products and order-violation
//! witnesses.

use crate::algebra::{unit, Element};
use crate::error::{ConeError, Result};
use crate::matrix::CMat;
use crate::spectral::{self, hermitian_eig, inf_dominance};

/// Maximum disagreement between the two Thompson distance routes before the
/// computation is declared numerically unhealthy.
pub const THOMPSON_CROSSCHECK_TOL: f64 = 1e-8;

/// Regularization sweep used by [`order_witness_from_norms`].
pub const WITNESS_EPSILONS: [f64; 7] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

/// Minimum relative gap `‖xax‖ − ‖xbx‖` accepted from a witness.
pub const WITNESS_MARGIN: f64 = 1e-10;

/// Loewner comparison `a ≤ b`.
#[derive(Debug, Clone)]
pub struct OrderVerdict {
    pub holds: bool,
    /// `λ_min(b − a) / max(‖a‖, ‖b‖)`.
    pub margin: f64,
    /// Rank-one `vv*` with `v*(b − a)v < 0`, present only when the order fails.
    pub witness: Option<Element>,
}

pub fn loewner_leq(a: &Element, b: &Element, tol: f64) -> Result<OrderVerdict> {
    a.check_shape(b)?;
    let diff = b - a;
    let eig = hermitian_eig(&diff)?;
    let scale = a.norm().max(b.norm()).max(f64::MIN_POSITIVE);
    let margin = eig.min_eigenvalue() / scale;
    let holds = margin >= -tol;
    let witness = (!holds).then(|| {
        let (blk, idx) = eig.argmin();
        let v = eig.vectors[blk].column(idx);
        rank_one(a, blk, &v)
    });
    Ok(OrderVerdict {
        holds,
        margin,
        witness,
    })
}

/// `vv*` placed in block `blk`, zero elsewhere.
pub fn rank_one(like: &Element, blk: usize, v: &[crate::matrix::C64]) -> Element {
    let blocks = like
        .shape()
        .dims()
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            if i == blk {
                CMat::outer(v)
            } else {
                CMat::zeros(n)
            }
        })
        .collect();
    Element::from_blocks_unchecked(like.shape().clone(), blocks)
}

/// Thompson distance computed two ways:
/// `dominance` uses `‖y^{-1/2} x y^{-1/2}‖` and `jacobson` uses
/// `λ_max(x^{1/2} y^{-1} x^{1/2}) = ‖x y^{-1}‖_S`.
#[derive(Debug, Clone, Copy)]
pub struct ThompsonRoutes {
    pub dominance: f64,
    pub jacobson: f64,
}

pub fn thompson_routes(x: &Element, y: &Element) -> Result<ThompsonRoutes> {
    let dominance = inf_dominance(x, y)?.max(inf_dominance(y, x)?).ln();
    let xi = x.inverse()?;
    let yi = y.inverse()?;
    let t = spectral::product_seminorm(x, &yi)?;
    let s = spectral::product_seminorm(y, &xi)?;
    let jacobson = t.max(s).ln();
    Ok(ThompsonRoutes {
        dominance,
        jacobson,
    })
}

/// `d_T(x, y) = log max{inf{t : x ≤ ty}, inf{s : y ≤ sx}}`.
///
/// Fails with `NumericalHealthFailure` if the two computation routes disagree
/// by more than [`THOMPSON_CROSSCHECK_TOL`].
pub fn thompson_distance(x: &Element, y: &Element) -> Result<f64> {
    let r = thompson_routes(x, y)?;
    let gap = (r.dominance - r.jacobson).abs();
    if gap > THOMPSON_CROSSCHECK_TOL * r.dominance.abs().max(1.0) {
        return Err(ConeError::NumericalHealthFailure(format!(
            "Thompson routes disagree: {} vs {} (gap {gap:.3e})",
            r.dominance, r.jacobson
        )));
    }
    Ok(r.dominance.max(0.0))
}

/// `x # y = x^{1/2} (x^{-1/2} y x^{-1/2})^{1/2} x^{1/2}`.
pub fn geometric_mean(x: &Element, y: &Element) -> Result<Element> {
    x.check_shape(y)?;
    let root = x.sqrt()?;
    let inv_root = x.inv_sqrt().map_err(as_singular)?;
    y.inverse().map_err(as_singular)?;
    let inner = (&(&inv_root * y) * &inv_root).sqrt()?;
    Ok((&(&root * &inner) * &root).hermitian_part())
}

fn as_singular(e: ConeError) -> ConeError {
    match e {
        ConeError::DomainError(msg) => ConeError::SingularError(msg),
        other => other,
    }
}

/// `x ⋄_p y = (x^{p/2} y^p x^{p/2})^{1/p}` for positive `x, y`.
pub fn diamond_p(x: &Element, y: &Element, p: f64) -> Result<Element> {
    x.check_shape(y)?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(ConeError::DomainError(format!("p must be positive, got {p}")));
    }
    let xh = x.powf(p / 2.0)?;
    let yp = y.powf(p)?;
    let inner = &(&xh * &yp) * &xh;
    inner.powf(1.0 / p)
}

/// Constructive converse of "`a ≤ b` iff `‖xax‖ ≤ ‖xbx‖` for all positive
/// invertible `x`": when `a ≰ b`, returns `x = vv* + εe` with `‖xax‖ > ‖xbx‖`,
/// where `v` spans the most negative direction of `b − a`.
pub fn order_witness_from_norms(a: &Element, b: &Element) -> Result<Option<Element>> {
    let verdict = loewner_leq(a, b, crate::algebra::CLASSIFY_TOL)?;
    if verdict.holds {
        return Ok(None);
    }
    let projector = verdict.witness.expect("failing verdict carries a witness");
    let e = unit(a.shape());
    for &eps in &WITNESS_EPSILONS {
        let x = &projector + &e.scale_real(eps);
        let lhs = (&(&x * a) * &x).norm();
        let rhs = (&(&x * b) * &x).norm();
        if lhs - rhs >= WITNESS_MARGIN * lhs.max(rhs) {
            return Ok(Some(x));
        }
    }
    Err(ConeError::WitnessNotFound(format!(
        "ε sweep exhausted (order margin {:.3e})",
        verdict.margin
    )))
}

/// [`order_witness_from_norms`] rescaled to `‖x‖ = 1`, so that `x ≤ e`.
pub fn contraction_order_witness(a: &Element, b: &Element) -> Result<Option<Element>> {
    Ok(order_witness_from_norms(a, b)?.map(|x| {
        let n = x.norm();
        x.scale_real(1.0 / n)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraShape;

    fn shape2() -> AlgebraShape {
        AlgebraShape::new(vec![2]).unwrap()
    }

    #[test]
    fn loewner_examples() {
        let v = loewner_leq(&Element::diag(&[1.0, 2.0]), &Element::diag(&[2.0, 2.0]), 1e-12)
            .unwrap();
        assert!(v.holds && v.witness.is_none());

        let v = loewner_leq(&Element::diag(&[1.0, 3.0]), &Element::diag(&[2.0, 2.0]), 1e-12)
            .unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert!(w.rel_dist(&Element::diag(&[0.0, 1.0])) < 1e-14);

        let a = Element::diag(&[1.0, 3.0]);
        let v = loewner_leq(&a, &a, 1e-12).unwrap();
        assert!(v.holds && v.margin == 0.0);
    }

    #[test]
    fn thompson_examples() {
        let x = Element::diag(&[1.0, 4.0]);
        assert!(thompson_distance(&x, &x).unwrap().abs() < 1e-14);
        let d = thompson_distance(&x, &Element::diag(&[2.0, 2.0])).unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-14);
        let e = unit(&shape2());
        let d = thompson_distance(&e, &e.scale_real(3.0)).unwrap();
        assert!((d - 3f64.ln()).abs() < 1e-14);
        assert!(matches!(
            thompson_distance(&x, &Element::diag(&[1.0, 0.0])),
            Err(ConeError::SingularError(_))
        ));
    }

    #[test]
    fn geometric_mean_examples() {
        let e = unit(&shape2());
        let y = Element::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]);
        assert!(geometric_mean(&e, &y).unwrap().rel_dist(&y.sqrt().unwrap()) < 1e-14);
        let g = geometric_mean(&Element::diag(&[1.0, 4.0]), &Element::diag(&[4.0, 1.0])).unwrap();
        assert!(g.rel_dist(&Element::diag(&[2.0, 2.0])) < 1e-14);
        assert!(geometric_mean(&y, &y).unwrap().rel_dist(&y) < 1e-14);
    }

    #[test]
    fn diamond_examples() {
        let e = unit(&shape2());
        let y = Element::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]);
        assert!(diamond_p(&e, &y, 1.0).unwrap().rel_dist(&y) < 1e-14);
        let d = diamond_p(&Element::diag(&[4.0, 1.0]), &Element::diag(&[1.0, 9.0]), 2.0).unwrap();
        assert!(d.rel_dist(&Element::diag(&[4.0, 9.0])) < 1e-14);
        for p in [0.5, 1.0, 3.0] {
            assert!(diamond_p(&y, &e, p).unwrap().rel_dist(&y) < 1e-13);
        }
        assert!(diamond_p(&y, &e, 0.0).is_err());
    }

    #[test]
    fn order_witness_examples() {
        // a = diag(2,0) ≰ b = diag(1,0): compress onto e₁.
        let a = Element::diag(&[2.0, 0.0]);
        let b = Element::diag(&[1.0, 0.0]);
        let x = order_witness_from_norms(&a, &b).unwrap().unwrap();
        let lhs = (&(&x * &a) * &x).norm();
        let rhs = (&(&x * &b) * &x).norm();
        assert!((lhs - 2.0).abs() < 0.1 && (rhs - 1.0).abs() < 0.1);
        assert!(lhs > rhs);

        assert!(order_witness_from_norms(&b, &a).unwrap().is_none());
        assert!(order_witness_from_norms(&a, &a).unwrap().is_none());

        let xn = contraction_order_witness(&a, &b).unwrap().unwrap();
        assert!((xn.norm() - 1.0).abs() < 1e-14);
    }
}
