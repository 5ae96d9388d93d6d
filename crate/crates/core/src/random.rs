//! Seeded instance generation: Haar unitaries and elements with prescribed
//! spectra. All randomness flows from explicit seeds through ChaCha8 streams,
//! so every instance is reproducible across runs and platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{is_central, AlgebraShape, Element, ElementClass};
use crate::error::{ConeError, Result};
use crate::matrix::{CMat, C64};

pub type SeededRng = ChaCha8Rng;

/// Independent RNG stream `stream` derived from `seed`.
pub fn rng_for(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary: modified Gram–Schmidt on a complex Gaussian
/// matrix (the triangular factor then has a positive diagonal).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    loop {
        let mut cols: Vec<Vec<C64>> = (0..n)
            .map(|_| (0..n).map(|_| complex_gaussian(rng)).collect())
            .collect();
        let mut ok = true;
        for j in 0..n {
            for k in 0..j {
                let (head, tail) = cols.split_at_mut(j);
                let qk = &head[k];
                let cj = &mut tail[0];
                let proj: C64 = qk.iter().zip(cj.iter()).map(|(q, c)| q.conj() * c).sum();
                for (c, q) in cj.iter_mut().zip(qk) {
                    *c -= proj * q;
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-12 {
                ok = false;
                break;
            }
            for c in cols[j].iter_mut() {
                *c /= norm;
            }
        }
        if ok {
            let mut u = CMat::zeros(n);
            for (j, col) in cols.iter().enumerate() {
                for (i, &z) in col.iter().enumerate() {
                    u[(i, j)] = z;
                }
            }
            return u;
        }
    }
}

/// Uniformly random unit vector in `ℂⁿ`.
pub fn unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Element `⊕ Uᵢ diag(λᵢ) Uᵢ*` with Haar `Uᵢ` and eigenvalues drawn by `draw`.
pub fn with_spectrum<R: Rng + ?Sized>(
    shape: &AlgebraShape,
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> f64,
) -> Element {
    let blocks = shape
        .dims()
        .iter()
        .map(|&n| {
            let vals: Vec<f64> = (0..n).map(|_| draw(rng)).collect();
            let u = haar_unitary(n, rng);
            CMat::from_spectral(&u, &vals).hermitian_part()
        })
        .collect();
    Element::new(blocks).expect("finite spectrum")
}

/// Same as [`with_spectrum`] but with explicit per-block eigenvalue lists.
pub fn with_eigenvalues<R: Rng + ?Sized>(
    shape: &AlgebraShape,
    eigenvalues: &[Vec<f64>],
    rng: &mut R,
) -> Element {
    let blocks = shape
        .dims()
        .iter()
        .zip(eigenvalues)
        .map(|(&n, vals)| {
            let u = haar_unitary(n, rng);
            CMat::from_spectral(&u, vals).hermitian_part()
        })
        .collect();
    Element::new(blocks).expect("finite spectrum")
}

/// Seeded random element of the requested class with spectrum (singular values
/// for `General`) uniform in `[lo, hi]`. For `Positive` with `lo == 0` one
/// eigenvalue is forced to zero.
pub fn random_element(
    shape: &AlgebraShape,
    class: ElementClass,
    range: (f64, f64),
    seed: u64,
) -> Result<Element> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(ConeError::InvalidRange(format!("[{lo}, {hi}]")));
    }
    let invalid = |why: &str| Err(ConeError::InvalidRange(format!("[{lo}, {hi}]: {why}")));
    match class {
        ElementClass::PositiveInvertible if lo <= 0.0 => return invalid("needs lo > 0"),
        ElementClass::Effect if lo < 0.0 || hi > 1.0 => return invalid("must lie in [0, 1]"),
        ElementClass::Positive | ElementClass::General if lo < 0.0 => {
            return invalid("needs lo >= 0")
        }
        _ => {}
    }
    let mut rng = rng_for(seed, 0);
    let uniform = |rng: &mut SeededRng| {
        if hi > lo {
            rng.random_range(lo..=hi)
        } else {
            lo
        }
    };
    match class {
        ElementClass::General => {
            let blocks = shape
                .dims()
                .iter()
                .map(|&n| {
                    let sv: Vec<f64> = (0..n).map(|_| uniform(&mut rng)).collect();
                    let u = haar_unitary(n, &mut rng);
                    let v = haar_unitary(n, &mut rng);
                    let mut s = CMat::zeros(n);
                    for (i, &x) in sv.iter().enumerate() {
                        s[(i, i)] = C64::new(x, 0.0);
                    }
                    u.mul(&s).mul(&v.adjoint())
                })
                .collect();
            Element::new(blocks)
        }
        _ => {
            let mut eigenvalues: Vec<Vec<f64>> = shape
                .dims()
                .iter()
                .map(|&n| (0..n).map(|_| uniform(&mut rng)).collect())
                .collect();
            if class == ElementClass::Positive && lo == 0.0 {
                let b = rng.random_range(0..shape.num_blocks());
                let i = rng.random_range(0..shape.dims()[b]);
                eigenvalues[b][i] = 0.0;
            }
            Ok(with_eigenvalues(shape, &eigenvalues, &mut rng))
        }
    }
}

/// Log-uniform spectrum range used for positive definite samples.
pub const PD_RANGE: (f64, f64) = (0.2, 5.0);

/// Convenience wrapper around a seeded stream for suite code.
pub struct Sampler {
    shape: AlgebraShape,
    rng: SeededRng,
}

impl Sampler {
    pub fn new(shape: &AlgebraShape, seed: u64, stream: u64) -> Self {
        Self {
            shape: shape.clone(),
            rng: rng_for(seed, stream),
        }
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn rng(&mut self) -> &mut SeededRng {
        &mut self.rng
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Positive definite, eigenvalues log-uniform in `[lo, hi]`.
    pub fn pd_in(&mut self, lo: f64, hi: f64) -> Element {
        let (a, b) = (lo.ln(), hi.ln());
        with_spectrum(&self.shape, &mut self.rng, |r| r.random_range(a..b).exp())
    }

    pub fn pd(&mut self) -> Element {
        self.pd_in(PD_RANGE.0, PD_RANGE.1)
    }

    /// Positive semidefinite; when `singular`, at least one eigenvalue is exactly zero.
    pub fn psd(&mut self, singular: bool) -> Element {
        let (a, b) = (PD_RANGE.0.ln(), PD_RANGE.1.ln());
        let mut eigenvalues: Vec<Vec<f64>> = self
            .shape
            .dims()
            .iter()
            .map(|&n| (0..n).map(|_| self.rng.random_range(a..b).exp()).collect())
            .collect();
        if singular {
            self.zero_out(&mut eigenvalues);
        }
        with_eigenvalues(&self.shape.clone(), &eigenvalues, &mut self.rng)
    }

    /// Effect `0 ≤ x ≤ e`; when `singular`, at least one eigenvalue is zero.
    /// Roughly one sample in ten also touches the upper boundary `1`.
    pub fn effect(&mut self, singular: bool) -> Element {
        let mut eigenvalues: Vec<Vec<f64>> = self
            .shape
            .dims()
            .iter()
            .map(|&n| (0..n).map(|_| self.rng.random_range(0.0..1.0)).collect())
            .collect();
        if singular {
            self.zero_out(&mut eigenvalues);
        }
        if self.rng.random_bool(0.1) {
            let b = self.rng.random_range(0..eigenvalues.len());
            let i = self.rng.random_range(0..eigenvalues[b].len());
            if eigenvalues[b][i] != 0.0 {
                eigenvalues[b][i] = 1.0;
            }
        }
        with_eigenvalues(&self.shape.clone(), &eigenvalues, &mut self.rng)
    }

    fn zero_out(&mut self, eigenvalues: &mut [Vec<f64>]) {
        let b = self.rng.random_range(0..eigenvalues.len());
        let n = eigenvalues[b].len();
        let zeros = self.rng.random_range(1..=n);
        let start = self.rng.random_range(0..n);
        for k in 0..zeros {
            eigenvalues[b][(start + k) % n] = 0.0;
        }
    }

    /// Central positive invertible element: per-block scalars in `[0.5, 3]`.
    pub fn central_pd(&mut self) -> Element {
        let scalars: Vec<f64> = (0..self.shape.num_blocks())
            .map(|_| self.rng.random_range(0.5..3.0))
            .collect();
        Element::block_scalars(&self.shape, &scalars).expect("scalars match blocks")
    }

    /// Non-central positive invertible element with eigenvalues spread over
    /// `[0.5, 3]` in every block of size at least two. `None` for commutative shapes.
    pub fn noncentral_pd(&mut self) -> Option<Element> {
        if self.shape.is_commutative() {
            return None;
        }
        loop {
            let eigenvalues: Vec<Vec<f64>> = self
                .shape
                .dims()
                .iter()
                .map(|&n| {
                    if n == 1 {
                        vec![self.rng.random_range(0.5..3.0)]
                    } else {
                        // Keep the extreme eigenvalues well separated.
                        let mut v: Vec<f64> =
                            (0..n).map(|_| self.rng.random_range(0.5..3.0)).collect();
                        v[0] = self.rng.random_range(0.5..1.0);
                        v[n - 1] = self.rng.random_range(2.0..3.0);
                        v
                    }
                })
                .collect();
            let a = with_eigenvalues(&self.shape.clone(), &eigenvalues, &mut self.rng);
            if !is_central(&a, 1e-6) {
                return Some(a);
            }
        }
    }

    /// Positive semidefinite element of norm one and random rank.
    pub fn psd_unit(&mut self) -> Element {
        let singular = self.rng.random_bool(0.5);
        let x = self.psd(singular);
        let n = x.norm();
        x.scale_real(1.0 / n)
    }

    /// Hermitian element with spectrum in `[-1, 1]` and norm one.
    pub fn hermitian_unit(&mut self) -> Element {
        let h = with_spectrum(&self.shape.clone(), &mut self.rng, |r| r.random_range(-1.0..1.0));
        let n = h.norm().max(f64::MIN_POSITIVE);
        h.scale_real(1.0 / n)
    }

    pub fn unitary(&mut self, n: usize) -> CMat {
        haar_unitary(n, &mut self.rng)
    }

    pub fn unit_vector(&mut self, n: usize) -> Vec<C64> {
        unit_vector(n, &mut self.rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{classify, CLASSIFY_TOL};
    use crate::spectral::hermitian_eig;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_for(3, 0);
        for n in 1..6 {
            let u = haar_unitary(n, &mut rng);
            let err = u.adjoint().mul(&u).sub(&CMat::identity(n)).max_abs();
            assert!(err < 1e-13, "n={n} err={err}");
        }
    }

    #[test]
    fn positive_invertible_sample_has_requested_spectrum() {
        let shape = AlgebraShape::new(vec![2]).unwrap();
        let a = random_element(&shape, ElementClass::PositiveInvertible, (0.5, 2.0), 7).unwrap();
        let spec = hermitian_eig(&a).unwrap().sorted_spectrum();
        assert!(spec[0] >= 0.5 - 1e-12 && spec[1] <= 2.0 + 1e-12);
        assert!(classify(&a, CLASSIFY_TOL).positive_invertible);
    }

    #[test]
    fn positive_with_zero_floor_is_singular() {
        let shape = AlgebraShape::new(vec![2]).unwrap();
        let a = random_element(&shape, ElementClass::Positive, (0.0, 1.0), 11).unwrap();
        let b = a.block(0);
        let det = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
        assert!(det.norm() < 1e-14);
        let cl = classify(&a, CLASSIFY_TOL);
        assert!(cl.positive && !cl.positive_invertible);
    }

    #[test]
    fn same_seed_same_element() {
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        for class in ElementClass::ALL {
            let r = (0.1, 0.9);
            let a = random_element(&shape, class, r, 5).unwrap();
            let b = random_element(&shape, class, r, 5).unwrap();
            assert_eq!(a, b);
            assert!(classify(&a, CLASSIFY_TOL).has(class), "{class:?}");
        }
    }

    #[test]
    fn invalid_ranges_rejected() {
        let shape = AlgebraShape::new(vec![2]).unwrap();
        let bad = [
            (ElementClass::PositiveInvertible, (0.0, 1.0)),
            (ElementClass::Effect, (0.5, 1.5)),
            (ElementClass::Positive, (-0.1, 1.0)),
            (ElementClass::SelfAdjoint, (2.0, 1.0)),
        ];
        for (class, range) in bad {
            assert!(matches!(
                random_element(&shape, class, range, 1),
                Err(ConeError::InvalidRange(_))
            ));
        }
    }

    #[test]
    fn sampler_singular_psd_has_zero_eigenvalue() {
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        let mut s = Sampler::new(&shape, 9, 1);
        for _ in 0..20 {
            let x = s.psd(true);
            let lo = hermitian_eig(&x).unwrap().min_eigenvalue();
            assert!(lo.abs() < 1e-14 * x.norm());
            let e = s.effect(true);
            assert!(classify(&e, CLASSIFY_TOL).effect);
        }
    }
}
