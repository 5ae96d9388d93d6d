//! Jordan *-isomorphisms between direct sums of full matrix algebras, the
//! cone maps built from them, and the extraction operators that recover a
//! Jordan map from an opaque preserver.
//!
//! On `M_{n1} ⊕ … ⊕ M_{nk}` every Jordan *-isomorphism is a block
//! permutation (between blocks of equal size) followed, block by block, by an
//! optional transpose and a unitary conjugation. [`JordanIso`] stores exactly
//! that data.

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::{classify, unit, AlgebraShape, Element, CLASSIFY_TOL};
use crate::error::{ConeError, Result};
use crate::matrix::CMat;
use crate::random::{haar_unitary, Sampler};

/// Tolerance on `U*U = I` for the unitaries of a [`JordanIso`].
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct JordanIso {
    source: AlgebraShape,
    target: AlgebraShape,
    /// Source block `i` lands in target block `perm[i]`.
    perm: Vec<usize>,
    /// One unitary per target block.
    unitaries: Vec<CMat>,
    /// One flag per target block.
    transpose: Vec<bool>,
}

impl JordanIso {
    /// Validates the permutation, block dimensions and unitarity.
    pub fn new(
        source: AlgebraShape,
        perm: Vec<usize>,
        unitaries: Vec<CMat>,
        transpose: Vec<bool>,
    ) -> Result<Self> {
        let k = source.num_blocks();
        if perm.len() != k || unitaries.len() != k || transpose.len() != k {
            return Err(ConeError::InvalidJordan(format!(
                "expected {k} entries in perm/unitaries/transpose, got {}/{}/{}",
                perm.len(),
                unitaries.len(),
                transpose.len()
            )));
        }
        let mut seen = vec![false; k];
        for &t in &perm {
            if t >= k || seen[t] {
                return Err(ConeError::InvalidJordan(format!(
                    "perm {perm:?} is not a bijection"
                )));
            }
            seen[t] = true;
        }
        for (i, &t) in perm.iter().enumerate() {
            if unitaries[t].dim() != source.dims()[i] {
                return Err(ConeError::InvalidJordan(format!(
                    "source block {i} has size {} but target block {t} has size {}",
                    source.dims()[i],
                    unitaries[t].dim()
                )));
            }
        }
        for (t, u) in unitaries.iter().enumerate() {
            let err = u.adjoint().mul(u).sub(&CMat::identity(u.dim())).max_abs();
            if err.is_nan() || err > UNITARY_TOL {
                return Err(ConeError::InvalidJordan(format!(
                    "unitary {t} deviates from U*U = I by {err:.3e}"
                )));
            }
        }
        let target = AlgebraShape::new(unitaries.iter().map(CMat::dim).collect())?;
        Ok(Self {
            source,
            target,
            perm,
            unitaries,
            transpose,
        })
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let k = shape.num_blocks();
        Self {
            source: shape.clone(),
            target: shape.clone(),
            perm: (0..k).collect(),
            unitaries: shape.dims().iter().map(|&n| CMat::identity(n)).collect(),
            transpose: vec![false; k],
        }
    }

    /// The transpose map `x ↦ xᵀ` on every block.
    pub fn transpose_map(shape: &AlgebraShape) -> Self {
        let mut j = Self::identity(shape);
        j.transpose = vec![true; shape.num_blocks()];
        j
    }

    /// Random Jordan automorphism of `shape`: blocks of equal size are
    /// shuffled, unitaries are Haar, transpose flags are fair coins.
    pub fn random<R: Rng + ?Sized>(shape: &AlgebraShape, rng: &mut R) -> Self {
        let dims = shape.dims();
        let k = dims.len();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut sizes: Vec<usize> = dims.to_vec();
        sizes.sort_unstable();
        sizes.dedup();
        for n in sizes {
            let slots: Vec<usize> = (0..k).filter(|&i| dims[i] == n).collect();
            let mut shuffled = slots.clone();
            shuffled.shuffle(rng);
            for (&s, &t) in slots.iter().zip(&shuffled) {
                perm[s] = t;
            }
        }
        let unitaries = dims.iter().map(|&n| haar_unitary(n, rng)).collect();
        let transpose = (0..k).map(|_| rng.random_bool(0.5)).collect();
        Self {
            source: shape.clone(),
            target: shape.clone(),
            perm,
            unitaries,
            transpose,
        }
    }

    pub fn source(&self) -> &AlgebraShape {
        &self.source
    }

    pub fn target(&self) -> &AlgebraShape {
        &self.target
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn unitaries(&self) -> &[CMat] {
        &self.unitaries
    }

    pub fn transpose_flags(&self) -> &[bool] {
        &self.transpose
    }

    /// Same map with every transpose flag toggled.
    pub fn with_flipped_transpose(&self) -> Self {
        let mut j = self.clone();
        j.transpose.iter_mut().for_each(|t| *t = !*t);
        j
    }

    /// Same map with the images of the first two equal-size source blocks
    /// exchanged; `None` when all block sizes are distinct.
    pub fn with_swapped_blocks(&self) -> Option<Self> {
        let dims = self.source.dims();
        for i in 0..dims.len() {
            for j in i + 1..dims.len() {
                if dims[i] == dims[j] {
                    let mut out = self.clone();
                    out.perm.swap(i, j);
                    return Some(out);
                }
            }
        }
        None
    }

    /// The inverse Jordan map, from the target algebra back to the source.
    pub fn inverse(&self) -> Self {
        let k = self.perm.len();
        let mut perm = vec![0; k];
        let mut unitaries = vec![CMat::zeros(0); k];
        let mut transpose = vec![false; k];
        for (i, &t) in self.perm.iter().enumerate() {
            perm[t] = i;
            let u = &self.unitaries[t];
            // (U* y U)ᵀ = Uᵀ yᵀ conj(U)
            unitaries[i] = if self.transpose[t] { u.transpose() } else { u.adjoint() };
            transpose[i] = self.transpose[t];
        }
        Self {
            source: self.target.clone(),
            target: self.source.clone(),
            perm,
            unitaries,
            transpose,
        }
    }

    /// Post-composes with conjugation by the unitaries `w` (one per target block).
    pub fn conjugated_by(&self, w: &[CMat]) -> Self {
        let mut j = self.clone();
        for (u, wt) in j.unitaries.iter_mut().zip(w) {
            *u = wt.mul(u);
        }
        j
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        if x.shape() != &self.source {
            return Err(ConeError::ShapeMismatch {
                left: x.shape().dims().to_vec(),
                right: self.source.dims().to_vec(),
            });
        }
        let mut blocks: Vec<Option<CMat>> = vec![None; self.target.num_blocks()];
        for (i, b) in x.blocks().iter().enumerate() {
            let t = self.perm[i];
            let m = if self.transpose[t] { b.transpose() } else { b.clone() };
            let u = &self.unitaries[t];
            blocks[t] = Some(u.mul(&m).mul(&u.adjoint()));
        }
        Ok(Element::from_blocks_unchecked(
            self.target.clone(),
            blocks.into_iter().map(|b| b.expect("perm is a bijection")).collect(),
        ))
    }
}

impl fmt::Debug for JordanIso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JordanIso")
            .field("source", &self.source.dims())
            .field("perm", &self.perm)
            .field("transpose", &self.transpose)
            .finish_non_exhaustive()
    }
}

pub fn apply_jordan(j: &JordanIso, x: &Element) -> Result<Element> {
    j.apply(x)
}

type MapFn = dyn Fn(&Element) -> Result<Element> + Send + Sync;

/// Opaque map between cones. Harness code may only evaluate it.
#[derive(Clone)]
pub struct BlackBox {
    name: String,
    f: Arc<MapFn>,
}

impl BlackBox {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&Element) -> Result<Element> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, x: &Element) -> Result<Element> {
        (self.f)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn from_jordan(j: JordanIso) -> Self {
        Self::new("jordan", move |x| j.apply(x))
    }
}

impl fmt::Debug for BlackBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlackBox({})", self.name)
    }
}

/// The cone map formulas, all built on a Jordan *-isomorphism `J` and a
/// positive invertible weight `a` of the target algebra.
#[derive(Debug, Clone)]
pub enum ConeMapKind {
    /// `x ↦ J(x)`
    PlainJordan,
    /// `x ↦ a^{1/2} J(x) a^{1/2}`
    Sandwich(Element),
    /// `x ↦ (a J(x)² a)^{1/2}`
    SqrtCongruence(Element),
    /// `x ↦ (a^{-1} J(x)² a^{-1})^{1/2}`
    InverseSqrtCongruence(Element),
    /// `x ↦ inner(x^{1/p})^p`
    PowerDeformed(Box<ConeMap>, f64),
}

#[derive(Debug, Clone)]
pub struct ConeMap {
    kind: ConeMapKind,
    jordan: JordanIso,
    /// `a^{1/2}` for sandwiches, `a^{-1}` for inverse congruences, `a` otherwise.
    factor: Option<Element>,
}

impl ConeMap {
    pub fn new(jordan: JordanIso, kind: ConeMapKind) -> Result<Self> {
        let weight = match &kind {
            ConeMapKind::Sandwich(a)
            | ConeMapKind::SqrtCongruence(a)
            | ConeMapKind::InverseSqrtCongruence(a) => Some(a),
            _ => None,
        };
        if let Some(a) = weight {
            if a.shape() != jordan.target() {
                return Err(ConeError::ShapeMismatch {
                    left: a.shape().dims().to_vec(),
                    right: jordan.target().dims().to_vec(),
                });
            }
            if !classify(a, CLASSIFY_TOL).positive_invertible {
                return Err(ConeError::DomainError(
                    "cone map weight must be positive invertible".into(),
                ));
            }
        }
        let factor = match &kind {
            ConeMapKind::Sandwich(a) => Some(a.sqrt()?),
            ConeMapKind::SqrtCongruence(a) => Some(a.clone()),
            ConeMapKind::InverseSqrtCongruence(a) => Some(a.inverse()?),
            ConeMapKind::PowerDeformed(inner, p) => {
                if !(*p > 0.0 && p.is_finite()) {
                    return Err(ConeError::DomainError(format!("power {p} must be positive")));
                }
                if inner.jordan != jordan {
                    return Err(ConeError::InvalidJordan(
                        "power-deformed map must share the inner Jordan map".into(),
                    ));
                }
                None
            }
            ConeMapKind::PlainJordan => None,
        };
        Ok(Self {
            kind,
            jordan,
            factor,
        })
    }

    pub fn plain(jordan: JordanIso) -> Self {
        Self::new(jordan, ConeMapKind::PlainJordan).expect("plain Jordan map")
    }

    pub fn sandwich(jordan: JordanIso, a: Element) -> Result<Self> {
        Self::new(jordan, ConeMapKind::Sandwich(a))
    }

    pub fn sqrt_congruence(jordan: JordanIso, a: Element) -> Result<Self> {
        Self::new(jordan, ConeMapKind::SqrtCongruence(a))
    }

    pub fn inverse_sqrt_congruence(jordan: JordanIso, a: Element) -> Result<Self> {
        Self::new(jordan, ConeMapKind::InverseSqrtCongruence(a))
    }

    pub fn power_deformed(inner: ConeMap, p: f64) -> Result<Self> {
        let jordan = inner.jordan.clone();
        Self::new(jordan, ConeMapKind::PowerDeformed(Box::new(inner), p))
    }

    pub fn kind(&self) -> &ConeMapKind {
        &self.kind
    }

    pub fn jordan(&self) -> &JordanIso {
        &self.jordan
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        match &self.kind {
            ConeMapKind::PlainJordan => self.jordan.apply(x),
            ConeMapKind::Sandwich(_) => {
                let r = self.factor.as_ref().expect("cached root");
                Ok((&(r * &self.jordan.apply(x)?) * r).hermitian_part())
            }
            ConeMapKind::SqrtCongruence(_) | ConeMapKind::InverseSqrtCongruence(_) => {
                let w = self.factor.as_ref().expect("cached weight");
                let jx = self.jordan.apply(x)?;
                (&(w * &jx.square()) * w).sqrt()
            }
            ConeMapKind::PowerDeformed(inner, p) => inner.apply(&x.powf(1.0 / p)?)?.powf(*p),
        }
    }

    /// Opaque view of this map.
    pub fn black_box(&self) -> BlackBox {
        let me = self.clone();
        BlackBox::new(format!("{:?}", std::mem::discriminant(&self.kind)), move |x| {
            me.apply(x)
        })
    }
}

pub fn apply_cone_map(m: &ConeMap, x: &Element) -> Result<Element> {
    m.apply(x)
}

/// Largest relative violation of each Jordan *-isomorphism axiom on sampled
/// positive invertible inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JordanReport {
    pub samples: usize,
    pub additivity: f64,
    pub homogeneity: f64,
    pub squares: f64,
    pub triple_product: f64,
    pub unit: f64,
    pub norm: f64,
}

impl JordanReport {
    pub fn max_violation(&self) -> f64 {
        [
            self.additivity,
            self.homogeneity,
            self.squares,
            self.triple_product,
            self.unit,
            self.norm,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }

    pub fn axioms(&self) -> [(&'static str, f64); 6] {
        [
            ("additivity", self.additivity),
            ("homogeneity", self.homogeneity),
            ("squares", self.squares),
            ("triple_product", self.triple_product),
            ("unit", self.unit),
            ("norm", self.norm),
        ]
    }
}

fn rel(num: f64, den: f64) -> f64 {
    let v = num / den.max(f64::MIN_POSITIVE);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Samples `sample_count` pairs from the positive definite cone of `source`
/// and measures how far `map` is from a Jordan *-isomorphism.
pub fn verify_jordan(
    map: &BlackBox,
    source: &AlgebraShape,
    sample_count: usize,
    seed: u64,
) -> JordanReport {
    let mut s = Sampler::new(source, seed, 0x4a4f_5244);
    let e = unit(source);
    let mut rep = JordanReport {
        samples: sample_count,
        additivity: 0.0,
        homogeneity: 0.0,
        squares: 0.0,
        triple_product: 0.0,
        unit: 0.0,
        norm: 0.0,
    };
    rep.unit = match map.eval(&e) {
        Ok(je) => (&je - &unit(je.shape())).norm(),
        Err(_) => f64::INFINITY,
    };
    for _ in 0..sample_count {
        let x = s.pd();
        let y = s.pd();
        let t = s.uniform(0.1, 10.0);
        let r = (|| -> Result<[f64; 5]> {
            let jx = map.eval(&x)?;
            let jy = map.eval(&y)?;
            let add = (&(&map.eval(&(&x + &y))? - &jx) - &jy).norm();
            let add = rel(add, jx.norm() + jy.norm());
            let hom = rel(
                (&map.eval(&x.scale_real(t))? - &jx.scale_real(t)).norm(),
                t * jx.norm(),
            );
            let jx2 = jx.square();
            let sq = rel((&map.eval(&x.square())? - &jx2).norm(), jx2.norm());
            let jxyx = &(&jx * &jy) * &jx;
            let tri = rel(
                (&map.eval(&(&(&x * &y) * &x))? - &jxyx).norm(),
                jxyx.norm(),
            );
            let nrm = rel((jx.norm() - x.norm()).abs(), x.norm());
            Ok([add, hom, sq, tri, nrm])
        })();
        let [add, hom, sq, tri, nrm] = r.unwrap_or([f64::INFINITY; 5]);
        rep.additivity = rep.additivity.max(add);
        rep.homogeneity = rep.homogeneity.max(hom);
        rep.squares = rep.squares.max(sq);
        rep.triple_product = rep.triple_product.max(tri);
        rep.norm = rep.norm.max(nrm);
    }
    rep
}

fn weight_at_unit(phi: &BlackBox, e_src: &Element) -> Result<Element> {
    let w = phi.eval(e_src)?;
    let cl = classify(&w, CLASSIFY_TOL);
    if !cl.positive_invertible {
        return Err(ConeError::SingularError(format!(
            "φ(e) is not positive invertible (smallest eigenvalue {:.3e})",
            cl.min_eigenvalue
        )));
    }
    Ok(w)
}

/// Inverts the sandwich form: `x ↦ φ(e)^{-1/2} φ(x) φ(e)^{-1/2}`.
pub fn extract_jordan_sandwich(phi: &BlackBox, e_src: &Element) -> Result<BlackBox> {
    let w = weight_at_unit(phi, e_src)?;
    let wi = w.inv_sqrt()?;
    let phi = phi.clone();
    Ok(BlackBox::new("sandwich-extraction", move |x| {
        Ok((&(&wi * &phi.eval(x)?) * &wi).hermitian_part())
    }))
}

/// Inverts the square-root congruence form:
/// `x ↦ (φ(e)^{-1} φ(x)² φ(e)^{-1})^{1/2}`.
pub fn extract_jordan_sqrt_congruence(phi: &BlackBox, e_src: &Element) -> Result<BlackBox> {
    let w = weight_at_unit(phi, e_src)?;
    let wi = w.inverse()?;
    let phi = phi.clone();
    Ok(BlackBox::new("sqrt-congruence-extraction", move |x| {
        let px = phi.eval(x)?;
        (&(&wi * &px.square()) * &wi).sqrt()
    }))
}

/// `x ↦ φ(x^{1/p})^p`, the reparametrization used to reduce power-type
/// preservers to the `p = 1` case (and, with `p = 2`, norm preservers of
/// products to triple-product preservers).
pub fn power_conjugate(phi: &BlackBox, p: f64) -> BlackBox {
    let phi = phi.clone();
    BlackBox::new(format!("power-conjugate({p})"), move |x| {
        phi.eval(&x.powf(1.0 / p)?)?.powf(p)
    })
}

/// Largest relative pointwise distance between two maps on `samples` random
/// positive definite inputs.
pub fn max_pointwise_distance(
    f: &BlackBox,
    g: &BlackBox,
    source: &AlgebraShape,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut s = Sampler::new(source, seed, 0x5054_5749);
    (0..samples)
        .map(|_| {
            let x = s.pd();
            match (f.eval(&x), g.eval(&x)) {
                (Ok(fx), Ok(gx)) => fx.rel_dist(&gx),
                _ => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max)
}
