//! Hermitian eigendecomposition and everything built on it: functional
//! calculus, the operator norm, the spectral seminorm on the cases the cone
//! theory needs, spectra of products of positive elements, and the dominance
//! functional `inf{t : x ≤ t y}`.

use crate::algebra::{Element, CLASSIFY_TOL};
use crate::error::{ConeError, Result};
use crate::matrix::{CMat, C64};

/// Maximum number of cyclic Jacobi sweeps.
pub const MAX_SWEEPS: usize = 64;

/// Eigenvalues below `NUMERICAL_ZERO · max|λ|` are treated as exact zeros by
/// the functional calculus.
pub const NUMERICAL_ZERO: f64 = 64.0 * f64::EPSILON;

/// Relative cutoff for `0 ∈ σ(xy)`: smallest eigenvalue of `x^{1/2} y x^{1/2}`
/// at most `SINGULAR_CUTOFF · ‖x‖‖y‖`.
pub const SINGULAR_CUTOFF: f64 = 1e-10;

/// Relative Frobenius asymmetry accepted as "self-adjoint up to rounding".
const HERMITIAN_SLACK: f64 = 1e-8;

/// Per-block eigendecomposition `a = ⊕ U Λ U*`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<Vec<f64>>,
    pub vectors: Vec<CMat>,
}

impl EigenSystem {
    pub fn min_eigenvalue(&self) -> f64 {
        self.values
            .iter()
            .filter_map(|v| v.first().copied())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.values
            .iter()
            .filter_map(|v| v.last().copied())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `|λ|`.
    pub fn spectral_radius(&self) -> f64 {
        self.min_eigenvalue().abs().max(self.max_eigenvalue().abs())
    }

    /// All eigenvalues of the direct sum, sorted ascending.
    pub fn sorted_spectrum(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.values.iter().flatten().copied().collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// Location `(block, index)` of the smallest eigenvalue.
    pub fn argmin(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_val = f64::INFINITY;
        for (b, vals) in self.values.iter().enumerate() {
            if let Some(&v) = vals.first() {
                if v < best_val {
                    best_val = v;
                    best = (b, 0);
                }
            }
        }
        best
    }

    /// `⊕ U f(Λ) U*`.
    pub fn map(&self, like: &Element, f: impl Fn(f64) -> f64) -> Element {
        let blocks = self
            .values
            .iter()
            .zip(&self.vectors)
            .map(|(vals, u)| {
                let fv: Vec<f64> = vals.iter().map(|&l| f(l)).collect();
                CMat::from_spectral(u, &fv).hermitian_part()
            })
            .collect();
        Element::from_blocks_unchecked(like.shape().clone(), blocks)
    }

    pub fn reconstruct(&self, like: &Element) -> Element {
        self.map(like, |l| l)
    }
}

/// Cyclic Jacobi diagonalization of one Hermitian block.
fn jacobi_block(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a.dim();
    let mut m = a.hermitian_part();
    let mut v = CMat::identity(n);
    if n == 1 {
        return Ok((vec![m[(0, 0)].re], v));
    }
    let fro = m.frobenius_norm();
    if fro == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let off_norm = |m: &CMat| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let g = m[(p, q)];
                let ag = g.norm();
                if ag == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // Negligible relative to the diagonal: keeps small eigenvalues accurate.
                if ag <= 1e-18 * (app.abs() * aqq.abs()).sqrt() || ag <= 1e-300 * fro {
                    m[(p, q)] = C64::new(0.0, 0.0);
                    m[(q, p)] = C64::new(0.0, 0.0);
                    continue;
                }
                rotated = true;
                let phase = g / ag;
                let theta = (aqq - app) / (2.0 * ag);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let ph_c = phase.conj();

                // m ← m G with G = diag(1, e^{-iφ}) · rotation(c, s)
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * c - miq * ph_c * s;
                    m[(i, q)] = mip * s + miq * ph_c * c;
                }
                // m ← G* m
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = mpj * c - mqj * phase * s;
                    m[(q, j)] = mpj * s + mqj * phase * c;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * ph_c * s;
                    v[(i, q)] = vip * s + viq * ph_c * c;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(app - t * ag, 0.0);
                m[(q, q)] = C64::new(aqq + t * ag, 0.0);
            }
        }
        sweeps += 1;
        if !rotated {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            let off = off_norm(&m);
            if off <= 1e-12 * fro {
                break;
            }
            return Err(ConeError::NoConvergence { sweeps, off });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = CMat::zeros(n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new_j)] = v[(i, old_j)];
        }
    }
    Ok((values, vectors))
}

fn frobenius_asymmetry(a: &Element) -> f64 {
    a.blocks()
        .iter()
        .map(|b| b.sub(&b.adjoint()).frobenius_norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

fn ensure_hermitian(a: &Element, what: &str) -> Result<()> {
    let skew = frobenius_asymmetry(a);
    if skew > HERMITIAN_SLACK * a.frobenius_norm() {
        return Err(ConeError::DomainError(format!(
            "{what} needs a self-adjoint element (asymmetry {skew:.3e})"
        )));
    }
    Ok(())
}

/// Eigendecomposition of the Hermitian part `(a + a*)/2`, block by block.
pub fn hermitian_eig(a: &Element) -> Result<EigenSystem> {
    let mut values = Vec::with_capacity(a.blocks().len());
    let mut vectors = Vec::with_capacity(a.blocks().len());
    for b in a.blocks() {
        let (vals, vecs) = jacobi_block(b)?;
        values.push(vals);
        vectors.push(vecs);
    }
    Ok(EigenSystem { values, vectors })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Func {
    Power(f64),
    Sqrt,
    Inverse,
    Log,
    Exp,
}

/// Continuous functional calculus `U Λ U* ↦ U f(Λ) U*` on self-adjoint elements.
pub fn func_calc(a: &Element, f: Func) -> Result<Element> {
    ensure_hermitian(a, "functional calculus")?;
    let eig = hermitian_eig(a)?;
    let scale = eig.spectral_radius();
    let zero = NUMERICAL_ZERO * scale;
    let lo = eig.min_eigenvalue();

    let needs_positive = match f {
        Func::Sqrt => true,
        Func::Power(p) => p.fract() != 0.0 || p < 0.0,
        _ => false,
    };
    if needs_positive && lo < -CLASSIFY_TOL * scale {
        return Err(ConeError::DomainError(format!(
            "{f:?} of an element with eigenvalue {lo:.3e}"
        )));
    }
    match f {
        Func::Exp => Ok(eig.map(a, f64::exp)),
        Func::Sqrt => Ok(eig.map(a, |l| if l <= zero { 0.0 } else { l.sqrt() })),
        Func::Power(p) if p > 0.0 => {
            if p.fract() == 0.0 && p <= i32::MAX as f64 {
                let k = p as i32;
                Ok(eig.map(a, |l| l.powi(k)))
            } else {
                Ok(eig.map(a, |l| if l <= zero { 0.0 } else { l.powf(p) }))
            }
        }
        Func::Power(0.0) => Ok(eig.map(a, |_| 1.0)),
        Func::Inverse => {
            if lo < -CLASSIFY_TOL * scale {
                return Err(ConeError::DomainError(format!(
                    "inverse requires a positive element, eigenvalue {lo:.3e}"
                )));
            }
            if lo <= zero {
                return Err(ConeError::SingularError(format!(
                    "smallest eigenvalue {lo:.3e} relative to norm {scale:.3e}"
                )));
            }
            Ok(eig.map(a, |l| 1.0 / l))
        }
        Func::Log | Func::Power(_) => {
            if lo <= zero {
                return Err(ConeError::DomainError(format!(
                    "{f:?} of a non-invertible element (smallest eigenvalue {lo:.3e})"
                )));
            }
            match f {
                Func::Log => Ok(eig.map(a, f64::ln)),
                Func::Power(p) => Ok(eig.map(a, |l| l.powf(p))),
                _ => unreachable!(),
            }
        }
    }
}

/// Operator norm `max_blocks sqrt(λ_max(b* b))`.
pub fn op_norm(a: &Element) -> f64 {
    a.blocks()
        .iter()
        .map(|b| {
            let gram = b.adjoint().mul(b);
            match jacobi_block(&gram) {
                Ok((vals, _)) => vals.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
                // Jacobi on a Gram matrix of finite entries does not fail in
                // practice; fall back to the Frobenius bound if it does.
                Err(_) => b.frobenius_norm(),
            }
        })
        .fold(0.0, f64::max)
}

/// How the spectrum of the argument of [`spectral_seminorm`] may be computed.
#[derive(Debug, Clone, Copy)]
pub enum SeminormHint<'a> {
    /// The element is self-adjoint.
    Hermitian,
    /// The element equals `x y` for positive `x`, `y`.
    PositiveProduct(&'a Element, &'a Element),
}

/// `‖a‖_S = sup{|t| : t ∈ σ(a)}` for the element classes where the spectrum is
/// reachable through a Hermitian problem.
pub fn spectral_seminorm(a: &Element, hint: SeminormHint<'_>) -> Result<f64> {
    match hint {
        SeminormHint::Hermitian => {
            if frobenius_asymmetry(a) > HERMITIAN_SLACK * a.frobenius_norm() {
                return Err(ConeError::UnsupportedElement(
                    "Hermitian hint on a non-self-adjoint element".into(),
                ));
            }
            Ok(hermitian_eig(a)?.spectral_radius())
        }
        SeminormHint::PositiveProduct(x, y) => {
            a.check_shape(x)?;
            a.check_shape(y)?;
            let xy = x * y;
            let tol = 1e-9 * x.frobenius_norm() * y.frobenius_norm();
            if (a - &xy).frobenius_norm() > tol {
                return Err(ConeError::UnsupportedElement(
                    "element does not match the supplied positive product".into(),
                ));
            }
            product_seminorm(x, y)
        }
    }
}

/// `‖xy‖_S` for positive `x, y`, as `λ_max(x^{1/2} y x^{1/2})`.
pub fn product_seminorm(x: &Element, y: &Element) -> Result<f64> {
    let root = x.sqrt().map_err(unsupported)?;
    let sandwich = &(&root * y) * &root;
    ensure_hermitian(&sandwich, "positive product").map_err(unsupported)?;
    let lam = hermitian_eig(&sandwich)?;
    if lam.min_eigenvalue() < -CLASSIFY_TOL * lam.spectral_radius() {
        return Err(ConeError::UnsupportedElement(
            "second factor of the product is not positive".into(),
        ));
    }
    Ok(lam.max_eigenvalue().max(0.0))
}

fn unsupported(e: ConeError) -> ConeError {
    match e {
        ConeError::DomainError(msg) => ConeError::UnsupportedElement(msg),
        other => other,
    }
}

/// Spectrum of `xy` for positive `x, y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpectrum {
    /// Ascending; eigenvalues within the singularity cutoff are exactly `0.0`.
    pub eigenvalues: Vec<f64>,
    /// `0 ∈ σ(xy)`.
    pub singular: bool,
}

impl ProductSpectrum {
    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Non-zero part of the spectrum.
    pub fn nonzero(&self) -> Vec<f64> {
        self.eigenvalues.iter().copied().filter(|&l| l != 0.0).collect()
    }
}

/// `σ(xy) = σ(x^{1/2} y x^{1/2})`, including `0` exactly when the compression
/// is singular.
pub fn spectrum_of_positive_product(x: &Element, y: &Element) -> Result<ProductSpectrum> {
    x.check_shape(y)?;
    let root = x.sqrt()?;
    let sandwich = &(&root * y) * &root;
    let eig = hermitian_eig(&sandwich)?;
    let cutoff = SINGULAR_CUTOFF * x.norm() * y.norm();
    let eigenvalues: Vec<f64> = eig
        .sorted_spectrum()
        .into_iter()
        .map(|l| if l <= cutoff { 0.0 } else { l })
        .collect();
    let singular = eigenvalues.first().is_some_and(|&l| l == 0.0);
    Ok(ProductSpectrum {
        eigenvalues,
        singular,
    })
}

/// Builds `y^{-1/2}` from an eigensystem, rejecting singular `y`.
fn inverse_sqrt_checked(y: &Element) -> Result<Element> {
    ensure_hermitian(y, "inverse square root")?;
    let eig = hermitian_eig(y)?;
    let lo = eig.min_eigenvalue();
    if lo <= NUMERICAL_ZERO * eig.spectral_radius() {
        return Err(ConeError::SingularError(format!(
            "smallest eigenvalue {lo:.3e} is not positive"
        )));
    }
    Ok(eig.map(y, |l| 1.0 / l.sqrt()))
}

/// `inf{t : x ≤ t y} = ‖y^{-1/2} x y^{-1/2}‖`.
pub fn inf_dominance(x: &Element, y: &Element) -> Result<f64> {
    x.check_shape(y)?;
    let w = inverse_sqrt_checked(y)?;
    let compressed = &(&w * x) * &w;
    Ok(hermitian_eig(&compressed)?.max_eigenvalue().max(0.0))
}
