//! Finite-dimensional unital C*-algebras as direct sums `M_{n1} ⊕ … ⊕ M_{nk}`.
//!
//! An [`Element`] is an immutable list of complex square blocks. Every
//! operation returns a fresh value. The `std::ops` impls on `&Element` panic
//! on shape mismatch (like dense matrix libraries do); [`arith`] is the
//! fallible entry point.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{ConeError, Result};
use crate::matrix::{CMat, C64, ONE};
use crate::spectral;

/// Relative tolerance used by [`classify`] when none is given.
pub const CLASSIFY_TOL: f64 = 1e-9;
/// Absolute floor on the smallest eigenvalue of a positive invertible element.
pub const INVERTIBILITY_FLOOR: f64 = 1e-8;

/// Block sizes of a direct sum of full matrix algebras.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct AlgebraShape(Vec<usize>);

impl AlgebraShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(ConeError::InvalidShape(dims));
        }
        Ok(Self(dims))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn num_blocks(&self) -> usize {
        self.0.len()
    }

    /// Complex dimension of the algebra, `Σ nᵢ²`.
    pub fn total_dimension(&self) -> usize {
        self.0.iter().map(|n| n * n).sum()
    }

    /// Dimension of the underlying Hilbert space, `Σ nᵢ`.
    pub fn hilbert_dimension(&self) -> usize {
        self.0.iter().sum()
    }

    /// True when every block is 1×1.
    pub fn is_commutative(&self) -> bool {
        self.0.iter().all(|&n| n == 1)
    }
}

impl TryFrom<Vec<usize>> for AlgebraShape {
    type Error = ConeError;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<AlgebraShape> for Vec<usize> {
    fn from(shape: AlgebraShape) -> Self {
        shape.0
    }
}

impl fmt::Display for AlgebraShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[derive(Clone, PartialEq)]
pub struct Element {
    shape: AlgebraShape,
    blocks: Vec<CMat>,
}

impl Element {
    /// Assembles an element from its blocks; rejects empty lists and non-finite entries.
    pub fn new(blocks: Vec<CMat>) -> Result<Self> {
        let shape = AlgebraShape::new(blocks.iter().map(CMat::dim).collect())?;
        if let Some(i) = blocks.iter().position(|b| !b.is_finite()) {
            return Err(ConeError::InvalidElement(format!(
                "block {i} contains a non-finite entry"
            )));
        }
        Ok(Self { shape, blocks })
    }

    pub(crate) fn from_blocks_unchecked(shape: AlgebraShape, blocks: Vec<CMat>) -> Self {
        debug_assert_eq!(shape.num_blocks(), blocks.len());
        Self { shape, blocks }
    }

    pub fn zeros(shape: &AlgebraShape) -> Self {
        let blocks = shape.dims().iter().map(|&n| CMat::zeros(n)).collect();
        Self::from_blocks_unchecked(shape.clone(), blocks)
    }

    /// Single-block real diagonal element.
    pub fn diag(values: &[f64]) -> Self {
        Self::new(vec![CMat::from_diag(values)]).expect("diagonal element")
    }

    /// Single-block element from real rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        Self::new(vec![CMat::from_real_rows(rows)]).expect("real element")
    }

    /// Per-block scalar multiples of the identity, i.e. a central element.
    pub fn block_scalars(shape: &AlgebraShape, scalars: &[f64]) -> Result<Self> {
        if scalars.len() != shape.num_blocks() {
            return Err(ConeError::InvalidElement(format!(
                "{} scalars for {} blocks",
                scalars.len(),
                shape.num_blocks()
            )));
        }
        let blocks = shape
            .dims()
            .iter()
            .zip(scalars)
            .map(|(&n, &s)| CMat::scalar(n, C64::new(s, 0.0)))
            .collect();
        Self::new(blocks)
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMat {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<CMat> {
        self.blocks
    }

    pub fn map_blocks(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        Self::from_blocks_unchecked(self.shape.clone(), self.blocks.iter().map(f).collect())
    }

    fn zip_blocks(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<Self> {
        self.check_shape(other)?;
        Ok(Self::from_blocks_unchecked(
            self.shape.clone(),
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        ))
    }

    pub fn check_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(ConeError::ShapeMismatch {
                left: self.shape.dims().to_vec(),
                right: other.shape.dims().to_vec(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, CMat::add)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, CMat::sub)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, CMat::mul)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_blocks(|b| b.scale(s))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map_blocks(|b| b.scale_real(s))
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(CMat::adjoint)
    }

    /// `(a + a*) / 2`
    pub fn hermitian_part(&self) -> Self {
        self.map_blocks(CMat::hermitian_part)
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Frobenius norm over all blocks.
    pub fn frobenius_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(CMat::max_abs).fold(0.0, f64::max)
    }

    /// Operator (C*-) norm.
    pub fn norm(&self) -> f64 {
        spectral::op_norm(self)
    }

    /// Relative distance `‖self − other‖ / max(‖other‖, floor)` in operator norm.
    pub fn rel_dist(&self, other: &Self) -> f64 {
        let diff = (self - other).norm();
        let scale = other.norm().max(self.norm()).max(f64::MIN_POSITIVE);
        diff / scale
    }

    pub fn sqrt(&self) -> Result<Self> {
        spectral::func_calc(self, spectral::Func::Sqrt)
    }

    pub fn inverse(&self) -> Result<Self> {
        spectral::func_calc(self, spectral::Func::Inverse)
    }

    pub fn powf(&self, p: f64) -> Result<Self> {
        spectral::func_calc(self, spectral::Func::Power(p))
    }

    /// `x ↦ x^{-1/2}`
    pub fn inv_sqrt(&self) -> Result<Self> {
        spectral::func_calc(self, spectral::Func::Power(-0.5))
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Element")
            .field("shape", &self.shape.dims())
            .field("blocks", &self.blocks)
            .finish()
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&Element> for &Element {
            type Output = Element;

            fn $method(self, rhs: &Element) -> Element {
                match self.$try(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }

        impl $trait<Element> for Element {
            type Output = Element;

            fn $method(self, rhs: Element) -> Element {
                (&self).$method(&rhs)
            }
        }

        impl $trait<&Element> for Element {
            type Output = Element;

            fn $method(self, rhs: &Element) -> Element {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Mul<f64> for &Element {
    type Output = Element;

    fn mul(self, rhs: f64) -> Element {
        self.scale_real(rhs)
    }
}

impl Mul<f64> for Element {
    type Output = Element;

    fn mul(self, rhs: f64) -> Element {
        self.scale_real(rhs)
    }
}

impl Neg for &Element {
    type Output = Element;

    fn neg(self) -> Element {
        self.scale_real(-1.0)
    }
}

/// Binary and unary C*-algebra operations accepted by [`arith`].
#[derive(Debug, Clone, Copy)]
pub enum Arith<'a> {
    Add(&'a Element),
    Sub(&'a Element),
    Mul(&'a Element),
    Scale(C64),
    Adjoint,
}

pub fn arith(a: &Element, op: Arith<'_>) -> Result<Element> {
    match op {
        Arith::Add(b) => a.try_add(b),
        Arith::Sub(b) => a.try_sub(b),
        Arith::Mul(b) => a.try_mul(b),
        Arith::Scale(s) => Ok(a.scale(s)),
        Arith::Adjoint => Ok(a.adjoint()),
    }
}

/// `(ab + ba) / 2`
pub fn jordan_product(a: &Element, b: &Element) -> Result<Element> {
    let ab = a.try_mul(b)?;
    let ba = b.try_mul(a)?;
    Ok((ab + ba).scale_real(0.5))
}

/// `aba`
pub fn triple_product(a: &Element, b: &Element) -> Result<Element> {
    a.try_mul(b)?.try_mul(a)
}

pub fn unit(shape: &AlgebraShape) -> Element {
    let blocks = shape.dims().iter().map(|&n| CMat::identity(n)).collect();
    Element::from_blocks_unchecked(shape.clone(), blocks)
}

/// Cone membership tags, from least to most specific.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementClass {
    General,
    SelfAdjoint,
    Positive,
    PositiveInvertible,
    Effect,
}

impl ElementClass {
    pub const ALL: [ElementClass; 5] = [
        ElementClass::General,
        ElementClass::SelfAdjoint,
        ElementClass::Positive,
        ElementClass::PositiveInvertible,
        ElementClass::Effect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ElementClass::General => "General",
            ElementClass::SelfAdjoint => "SelfAdjoint",
            ElementClass::Positive => "Positive",
            ElementClass::PositiveInvertible => "PositiveInvertible",
            ElementClass::Effect => "Effect",
        }
    }
}

impl std::str::FromStr for ElementClass {
    type Err = ConeError;

    fn from_str(s: &str) -> Result<Self> {
        ElementClass::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ConeError::Parse(format!("unknown element class `{s}`")))
    }
}

/// Result of [`classify`]. `PositiveInvertible` and `Effect` both refine
/// `Positive` and can hold together, so every flag is reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub self_adjoint: bool,
    pub positive: bool,
    pub positive_invertible: bool,
    pub effect: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl Classification {
    /// Most specific tag; `Effect` wins over `PositiveInvertible` when both hold.
    pub fn most_specific(&self) -> ElementClass {
        if self.effect {
            ElementClass::Effect
        } else if self.positive_invertible {
            ElementClass::PositiveInvertible
        } else if self.positive {
            ElementClass::Positive
        } else if self.self_adjoint {
            ElementClass::SelfAdjoint
        } else {
            ElementClass::General
        }
    }

    pub fn has(&self, class: ElementClass) -> bool {
        match class {
            ElementClass::General => true,
            ElementClass::SelfAdjoint => self.self_adjoint,
            ElementClass::Positive => self.positive,
            ElementClass::PositiveInvertible => self.positive_invertible,
            ElementClass::Effect => self.effect,
        }
    }
}

pub fn classify(a: &Element, tol: f64) -> Classification {
    let norm = a.norm();
    let skew = (a - &a.adjoint()).norm();
    let self_adjoint = skew <= tol * norm;
    let not_sa = Classification {
        self_adjoint: false,
        positive: false,
        positive_invertible: false,
        effect: false,
        min_eigenvalue: f64::NAN,
        max_eigenvalue: f64::NAN,
    };
    if !self_adjoint {
        return not_sa;
    }
    let Ok(eig) = spectral::hermitian_eig(a) else {
        return Classification {
            self_adjoint: true,
            ..not_sa
        };
    };
    let lo = eig.min_eigenvalue();
    let hi = eig.max_eigenvalue();
    let positive = lo >= -tol * norm;
    Classification {
        self_adjoint,
        positive,
        positive_invertible: lo >= INVERTIBILITY_FLOOR,
        effect: positive && hi <= 1.0 + tol,
        min_eigenvalue: lo,
        max_eigenvalue: hi,
    }
}

/// Central elements of a direct sum of full matrix algebras are exactly the
/// per-block scalars; this checks that structurally, relative to `‖a‖`.
pub fn is_central(a: &Element, tol: f64) -> bool {
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    a.blocks().iter().all(|b| {
        let n = b.dim();
        let mean = b.trace() / n as f64;
        let dev = b.sub(&CMat::scalar(n, mean));
        dev.max_abs() <= tol * scale
    })
}

/// `‖ax − xa‖` in operator norm.
pub fn commutator_norm(a: &Element, x: &Element) -> f64 {
    (&(a * x) - &(x * a)).norm()
}

/// Matrix-unit basis `E_ij` of every block; used to cross-check [`is_central`].
pub fn matrix_unit_basis(shape: &AlgebraShape) -> Vec<Element> {
    let mut out = Vec::with_capacity(shape.total_dimension());
    for (k, &n) in shape.dims().iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let mut el = Element::zeros(shape);
                el.blocks[k][(i, j)] = ONE;
                out.push(el);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_arithmetic() {
        let a = Element::diag(&[1.0, 2.0]);
        let b = Element::diag(&[3.0, 4.0]);
        assert_eq!(arith(&a, Arith::Add(&b)).unwrap(), Element::diag(&[4.0, 6.0]));
        assert_eq!(arith(&a, Arith::Mul(&b)).unwrap(), Element::diag(&[3.0, 8.0]));
    }

    #[test]
    fn adjoint_is_conjugate_transpose() {
        let mut m = CMat::zeros(2);
        m[(0, 1)] = c(0.0, 1.0);
        let a = Element::new(vec![m]).unwrap();
        let adj = arith(&a, Arith::Adjoint).unwrap();
        let mut expected = CMat::zeros(2);
        expected[(1, 0)] = c(0.0, -1.0);
        assert_eq!(adj, Element::new(vec![expected]).unwrap());
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = Element::diag(&[1.0, 2.0]);
        let b = Element::diag(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            arith(&a, Arith::Add(&b)),
            Err(ConeError::ShapeMismatch { .. })
        ));
        assert!(jordan_product(&a, &b).is_err());
        assert!(triple_product(&a, &b).is_err());
    }

    #[test]
    fn rejects_bad_shapes_and_non_finite_entries() {
        assert!(AlgebraShape::new(vec![]).is_err());
        assert!(AlgebraShape::new(vec![2, 0]).is_err());
        let mut m = CMat::identity(2);
        m[(0, 0)] = c(f64::NAN, 0.0);
        assert!(matches!(
            Element::new(vec![m]),
            Err(ConeError::InvalidElement(_))
        ));
    }

    #[test]
    fn jordan_product_examples() {
        let a = Element::diag(&[1.0, 2.0]);
        assert_eq!(jordan_product(&a, &a).unwrap(), Element::diag(&[1.0, 4.0]));

        let shape = AlgebraShape::new(vec![2]).unwrap();
        let b = Element::from_real_rows(&[&[1.0, 5.0], &[-2.0, 3.0]]);
        assert_eq!(jordan_product(&unit(&shape), &b).unwrap(), b);

        // Pauli x and z anticommute.
        let x = Element::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let z = Element::diag(&[1.0, -1.0]);
        assert_eq!(jordan_product(&x, &z).unwrap(), Element::zeros(&shape));
    }

    #[test]
    fn triple_product_examples() {
        let shape = AlgebraShape::new(vec![2]).unwrap();
        let e = unit(&shape);
        let b = Element::from_real_rows(&[&[1.0, 5.0], &[-2.0, 3.0]]);
        assert_eq!(triple_product(&e, &b).unwrap(), b);
        assert_eq!(
            triple_product(&Element::diag(&[2.0, 3.0]), &e).unwrap(),
            Element::diag(&[4.0, 9.0])
        );
        let a = Element::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert_eq!(triple_product(&a, &e).unwrap(), &a * &a);
    }

    #[test]
    fn classification_examples() {
        let pi = classify(&Element::diag(&[1.0, 2.0]), CLASSIFY_TOL);
        assert!(pi.positive_invertible && !pi.effect);
        assert_eq!(pi.most_specific(), ElementClass::PositiveInvertible);

        let psd = classify(&Element::diag(&[1.0, 0.0]), CLASSIFY_TOL);
        assert!(psd.positive && !psd.positive_invertible);

        let eff = classify(&Element::diag(&[0.5, 1.0]), CLASSIFY_TOL);
        assert_eq!(eff.most_specific(), ElementClass::Effect);

        let sa = classify(&Element::diag(&[-1.0, 1.0]), CLASSIFY_TOL);
        assert_eq!(sa.most_specific(), ElementClass::SelfAdjoint);

        let gen = classify(
            &Element::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]),
            CLASSIFY_TOL,
        );
        assert_eq!(gen.most_specific(), ElementClass::General);
    }

    #[test]
    fn unit_examples() {
        let s = AlgebraShape::new(vec![1, 3]).unwrap();
        let e = unit(&s);
        assert_eq!(e.block(0), &CMat::identity(1));
        assert_eq!(e.block(1), &CMat::identity(3));
        let cl = classify(&e, CLASSIFY_TOL);
        assert!(cl.positive_invertible && cl.effect);
    }

    #[test]
    fn centrality_examples() {
        let s = AlgebraShape::new(vec![2, 3]).unwrap();
        let central = Element::block_scalars(&s, &[2.0, 3.0]).unwrap();
        assert!(is_central(&central, 1e-12));
        let not_central = Element::new(vec![
            CMat::from_diag(&[1.0, 2.0]),
            CMat::identity(3),
        ])
        .unwrap();
        assert!(!is_central(&not_central, 1e-12));
        assert!(is_central(&unit(&s), 1e-12));

        for b in matrix_unit_basis(&s) {
            assert!(commutator_norm(&central, &b) <= 1e-12);
        }
        assert!(matrix_unit_basis(&s)
            .iter()
            .any(|b| commutator_norm(&not_central, b) > 0.5));
    }
}
