//! Shared fixtures for the benchmarks.

use conelab_core::random::Sampler;
use conelab_core::{AlgebraShape, Element};

/// Shapes the benchmarks sweep over, from a single qubit block to a
/// mixed direct sum.
pub const SHAPES: &[&[usize]] = &[&[2], &[3], &[2, 3], &[4, 4]];

pub fn shape(dims: &[usize]) -> AlgebraShape {
    AlgebraShape::new(dims.to_vec()).expect("valid benchmark shape")
}

pub fn label(dims: &[usize]) -> String {
    shape(dims).to_string()
}

/// Two seeded positive invertible elements.
pub fn pd_pair(dims: &[usize], seed: u64) -> (Element, Element) {
    let mut s = Sampler::new(&shape(dims), seed, 0);
    (s.pd(), s.pd())
}

/// A seeded non-central positive invertible element.
pub fn noncentral(dims: &[usize], seed: u64) -> Element {
    Sampler::new(&shape(dims), seed, 1)
        .noncentral_pd()
        .expect("shape has a block of size at least two")
}
