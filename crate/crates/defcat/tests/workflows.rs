use std::sync::Arc;

use defcat::arith::Field;
use defcat::complexes::{build_complex, ComplexSpec};
use defcat::deform::{classify_first_order, extend_order, DeformationBase, DeformationKind, DeformationState, Extension};
use defcat::examples::{fibonacci_gf19, vec_z2_sign, vec_zn};
use defcat::functor::{AlgebraData, FunctorData};
use defcat::hochschild::{build_hochschild, AlgebraBimodule};

fn gf(p: u64) -> Field {
    Field::fp(p).unwrap()
}

#[test]
fn third_cohomology_of_small_categories() {
    let cases = [
        (Arc::new(vec_zn(gf(2), 2)), 1),
        (Arc::new(vec_z2_sign(gf(2))), 1),
        (Arc::new(vec_zn(Field::Q, 2)), 0),
        (Arc::new(vec_zn(gf(3), 3)), 1),
        (Arc::new(fibonacci_gf19()), 0),
    ];
    for (c, want) in cases {
        assert_eq!(classify_first_order(&ComplexSpec::Category(c.clone()), 3).unwrap().dim, want, "{:?}", c.names);
    }
}

#[test]
fn identity_functor_deformations_over_gf2() {
    let c = Arc::new(vec_zn(gf(2), 2));
    let f = FunctorData::identity(&c);
    assert_eq!(classify_first_order(&ComplexSpec::Functor(f.clone()), 2).unwrap().dim, 1);
    let fibred = build_complex(&ComplexSpec::Fibred(f), 2).unwrap();
    assert_eq!(fibred.complex.dim(2), 4 + 8);
}

#[test]
fn dual_numbers_hochschild_over_gf2() {
    let a = AlgebraData::dual_numbers(gf(2));
    let hh = build_hochschild(&a, &AlgebraBimodule::regular(&a), 4).unwrap();
    let dims: Vec<usize> = (0..=3).map(|n| hh.cohomology(n).unwrap().dim).collect();
    assert_eq!(dims, vec![2, 2, 2, 2]);
}

#[test]
fn trivial_category_deformation_extends_by_zero() {
    let c = Arc::new(vec_zn(Field::Q, 3));
    let mut s = DeformationState::trivial(DeformationKind::Category, DeformationBase::Category(c), 0).unwrap();
    for order in 1..=2 {
        match extend_order(&s).unwrap() {
            Extension::Extended(next) => s = next,
            Extension::Obstructed(o) => panic!("H^4 vanishes over Q, got {o:?}"),
        }
        assert_eq!(s.order, order);
    }
    assert!(s.alpha.iter().all(|a| a.is_zero()));
}
