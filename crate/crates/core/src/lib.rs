//! Numerical laboratory for maps between positive cones of finite-dimensional
//! C*-algebras `M_{n1} ⊕ … ⊕ M_{nk}`.
//!
//! The crate provides the algebra itself ([`Element`], [`AlgebraShape`]),
//! spectral tools (Hermitian eigensolver, functional calculus, spectral
//! seminorm), cone geometry (Loewner order, Thompson metric, geometric mean,
//! sequential products), Jordan *-isomorphisms and the cone maps built from
//! them, and a harness of randomized verification suites with mutation
//! testing.

pub mod algebra;
pub mod cone;
pub mod error;
pub mod jordan;
pub mod json;
pub mod matrix;
pub mod random;
pub mod spectral;
pub mod suites;

pub use algebra::{
    arith, classify, is_central, jordan_product, triple_product, unit, AlgebraShape, Arith,
    Classification, Element, ElementClass,
};
pub use cone::{
    diamond_p, geometric_mean, loewner_leq, order_witness_from_norms, thompson_distance,
    OrderVerdict,
};
pub use error::{ConeError, Result};
pub use jordan::{
    apply_cone_map, apply_jordan, extract_jordan_sandwich, extract_jordan_sqrt_congruence,
    verify_jordan, BlackBox, ConeMap, ConeMapKind, JordanIso, JordanReport,
};
pub use matrix::{CMat, C64};
pub use random::random_element;
pub use spectral::{
    func_calc, hermitian_eig, op_norm, spectral_seminorm, spectrum_of_positive_product,
    EigenSystem, Func, ProductSpectrum, SeminormHint,
};
pub use suites::{
    mutate_and_expect_failure, run_suite, Check, CheckExpectation, CheckKind, Expected, Mutation,
    MutationReport, SearchOutcome, SuiteId, SuiteParams, SuiteReport, Verdict, Witness,
};
