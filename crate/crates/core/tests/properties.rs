use conelab_core::random::{rng_for, Sampler};
use conelab_core::spectral::inf_dominance;
use conelab_core::*;
use proptest::prelude::*;

const SHAPES: &[&[usize]] = &[&[1], &[2], &[3], &[1, 2], &[2, 3], &[1, 1, 1], &[2, 2]];

/// Shape index and seed; the sampler is rebuilt from them inside each case.
fn case() -> impl Strategy<Value = (usize, u64)> {
    (0..SHAPES.len(), any::<u64>())
}

fn setup((k, seed): (usize, u64)) -> (AlgebraShape, Sampler) {
    let shape = AlgebraShape::new(SHAPES[k].to_vec()).unwrap();
    let s = Sampler::new(&shape, seed, 0);
    (shape, s)
}

fn general(shape: &AlgebraShape, s: &mut Sampler) -> Element {
    random_element(shape, ElementClass::General, (0.3, 3.0), s.index(1 << 30) as u64).unwrap()
}

fn hermitian(shape: &AlgebraShape, s: &mut Sampler) -> Element {
    random_element(shape, ElementClass::SelfAdjoint, (-2.0, 2.0), s.index(1 << 30) as u64).unwrap()
}

fn psd(s: &mut Sampler, p_singular: f64) -> Element {
    let singular = s.coin(p_singular);
    s.psd(singular)
}

fn close(a: &Element, b: &Element, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

fn sorted_eigs(x: &Element) -> Vec<f64> {
    hermitian_eig(x).unwrap().sorted_spectrum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn involution(c in case()) {
        let (shape, mut s) = setup(c);
        let (a, b) = (general(&shape, &mut s), general(&shape, &mut s));
        prop_assert!(close(&(&a * &b).adjoint(), &(&b.adjoint() * &a.adjoint()), 1e-12));
        prop_assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn jordan_and_triple_products(c in case()) {
        let (shape, mut s) = setup(c);
        let a = hermitian(&shape, &mut s);
        let b = general(&shape, &mut s);
        prop_assert!(close(&jordan_product(&a, &a).unwrap(), &(&a * &a), 1e-12));
        let lhs = triple_product(&a, &b).unwrap();
        let ab = jordan_product(&a, &b).unwrap();
        let rhs = &jordan_product(&ab, &a).unwrap().scale_real(2.0) - &jordan_product(&a.square(), &b).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-11));
    }

    #[test]
    fn classification_scales(c in case(), lambda in 1e-3f64..1e3) {
        let (_shape, mut s) = setup(c);
        let a = s.pd();
        prop_assert!(classify(&a, 1e-9).positive_invertible);
        prop_assert!(classify(&a.scale_real(lambda), 1e-9).positive_invertible);
    }

    #[test]
    fn centrality_matches_commutators(c in case()) {
        let (shape, mut s) = setup(c);
        let central = s.central_pd();
        prop_assert!(is_central(&central, 1e-9));
        if let Some(a) = s.noncentral_pd() {
            prop_assert!(!is_central(&a, 1e-9));
            let worst = (0..50)
                .map(|_| {
                    let x = general(&shape, &mut s);
                    (&(&a * &x) - &(&x * &a)).norm() / (a.norm() * x.norm())
                })
                .fold(0.0, f64::max);
            prop_assert!(worst > 1e-9);
        }
    }

    #[test]
    fn spectral_calculus(c in case()) {
        let (shape, mut s) = setup(c);
        let a = psd(&mut s, 0.3);
        let back = func_calc(&func_calc(&a, Func::Sqrt).unwrap(), Func::Power(2.0)).unwrap();
        prop_assert!((&back - &a).norm() <= 1e-9 * a.norm().max(1e-300));

        let g = general(&shape, &mut s);
        let n = op_norm(&g);
        prop_assert!((op_norm(&(&g.adjoint() * &g)) - n * n).abs() <= 1e-10 * n * n);

        let h = hermitian(&shape, &mut s);
        let sn = spectral_seminorm(&h, SeminormHint::Hermitian).unwrap();
        prop_assert!((sn - op_norm(&h)).abs() <= 1e-10 * op_norm(&h).max(1.0));
    }

    #[test]
    fn jacobson_symmetry(c in case()) {
        let (_shape, mut s) = setup(c);
        let x = psd(&mut s, 0.3);
        let y = psd(&mut s, 0.3);
        let xy = spectral_seminorm(&(&x * &y), SeminormHint::PositiveProduct(&x, &y)).unwrap();
        let yx = spectral_seminorm(&(&y * &x), SeminormHint::PositiveProduct(&y, &x)).unwrap();
        prop_assert!((xy - yx).abs() <= 1e-10 * xy.max(1.0));
        prop_assert!(xy <= op_norm(&(&x * &y)) * (1.0 + 1e-10) + 1e-12);

        let spec = spectrum_of_positive_product(&x, &y).unwrap();
        prop_assert!(spec.eigenvalues.iter().all(|&l| l >= 0.0));
        let invertible = classify(&x, 1e-9).positive_invertible && classify(&y, 1e-9).positive_invertible;
        prop_assert_eq!(spec.singular, !invertible);
    }

    #[test]
    fn thompson_metric(c in case()) {
        let (shape, mut s) = setup(c);
        let (x, y) = (s.pd(), s.pd());
        prop_assert!(inf_dominance(&x, &y).unwrap() * inf_dominance(&y, &x).unwrap() >= 1.0 - 1e-12);
        let d = thompson_distance(&x, &y).unwrap();
        let c = general(&shape, &mut s);
        let cong = |z: &Element| (&(&c.adjoint() * z) * &c).hermitian_part();
        let dc = thompson_distance(&cong(&x), &cong(&y)).unwrap();
        prop_assert!((dc - d).abs() <= 1e-8 * d.max(1.0));
        let di = thompson_distance(&x.inverse().unwrap(), &y.inverse().unwrap()).unwrap();
        prop_assert!((di - d).abs() <= 1e-8 * d.max(1.0));
    }

    #[test]
    fn geometric_mean_identities(c in case()) {
        let (shape, mut s) = setup(c);
        let (x, y) = (s.pd(), s.pd());
        let m = geometric_mean(&x, &y).unwrap();
        prop_assert!(close(&m, &geometric_mean(&y, &x).unwrap(), 1e-8));
        let dual = geometric_mean(&x.inverse().unwrap(), &y.inverse().unwrap()).unwrap();
        prop_assert!(close(&m.inverse().unwrap(), &dual, 1e-8));
        if shape.is_commutative() {
            prop_assert!(close(&geometric_mean(&x.square(), &y.square()).unwrap(), &(&x * &y), 1e-10));
            prop_assert!(close(&geometric_mean(&x, &y).unwrap().square(), &(&x * &y), 1e-10));
        }
    }

    #[test]
    fn loewner_order(c in case()) {
        let (_shape, mut s) = setup(c);
        let a = psd(&mut s, 0.3);
        let b = &a + &psd(&mut s, 0.5);
        prop_assert!(loewner_leq(&a, &b, 1e-9).unwrap().holds);
        for _ in 0..20 {
            let x = psd(&mut s, 0.3);
            let lhs = (&(&x * &a) * &x).norm();
            let rhs = (&(&x * &b) * &x).norm();
            prop_assert!(lhs <= rhs + 1e-9 * rhs.max(1.0));
        }
        let tol = 1e-9;
        let c = &a + &s.pd().scale_real(1e-12);
        if loewner_leq(&a, &c, tol).unwrap().holds && loewner_leq(&c, &a, tol).unwrap().holds {
            prop_assert!((&a - &c).norm() <= 2.0 * tol * a.norm().max(c.norm()) + 1e-15);
        }
    }

    #[test]
    fn jordan_maps(c in case(), seed in any::<u64>()) {
        let (shape, mut s) = setup(c);
        let j = JordanIso::random(&shape, &mut rng_for(seed, 0));
        let x = hermitian(&shape, &mut s);
        let jx = j.apply(&x).unwrap();
        let (ex, ej) = (sorted_eigs(&x), sorted_eigs(&jx));
        prop_assert!(ex.iter().zip(&ej).all(|(p, q)| (p - q).abs() <= 1e-9));
        let g = general(&shape, &mut s);
        prop_assert!((op_norm(&j.apply(&g).unwrap()) - op_norm(&g)).abs() <= 1e-10 * op_norm(&g));

        let c = s.central_pd();
        let jc = j.apply(&c).unwrap();
        let jh = j.apply(&x).unwrap();
        prop_assert!((&(&jc * &jh) - &(&jh * &jc)).norm() <= 1e-9 * jc.norm() * jh.norm());
    }

    #[test]
    fn cone_maps(c in case(), seed in any::<u64>()) {
        let (shape, mut s) = setup(c);
        let j = JordanIso::random(&shape, &mut rng_for(seed, 0));
        let a = s.pd();
        let (x, y) = (s.pd(), s.pd());
        let sandwich = ConeMap::sandwich(j.clone(), a.clone()).unwrap();
        let d = thompson_distance(&x, &y).unwrap();
        let dm = thompson_distance(&sandwich.apply(&x).unwrap(), &sandwich.apply(&y).unwrap()).unwrap();
        prop_assert!((dm - d).abs() <= 1e-8 * d.max(1.0));

        let sqrt = ConeMap::sqrt_congruence(j.clone(), a.clone()).unwrap();
        prop_assert!(close(&sqrt.apply(&unit(&shape)).unwrap(), &a, 1e-12));

        let inv = ConeMap::inverse_sqrt_congruence(j, a).unwrap();
        let via = sqrt.apply(&x.inverse().unwrap()).unwrap().inverse().unwrap();
        prop_assert!(close(&inv.apply(&x).unwrap(), &via, 1e-8));
    }
}
