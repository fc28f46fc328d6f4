use std::sync::Arc;

use proptest::prelude::*;

use defcat::arith::{Field, Scalar, TruncatedSeries};
use defcat::cochain::CochainModel;
use defcat::examples::{vec_z2_sign, vec_zn};
use defcat::functor::FunctorData;
use defcat::linalg::{solve_linear, MatrixK, Solution};

fn field_strategy() -> impl Strategy<Value = Field> {
    prop_oneof![Just(Field::Q), Just(Field::fp(2).unwrap()), Just(Field::fp(5).unwrap()), Just(Field::fp(19).unwrap())]
}

fn scalar(field: Field, n: i64, d: i64) -> Scalar {
    match field {
        Field::Q => field.ratio(n, d).unwrap(),
        _ => field.from_i64(n),
    }
}

fn vector(field: Field, raw: &[(i64, i64)]) -> Vec<Scalar> {
    raw.iter().map(|&(n, d)| scalar(field, n, d)).collect()
}

fn entries(len: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-5i64..=5, 1i64..=4), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(field in field_strategy(), a in (-50i64..50, 1i64..9), b in (-50i64..50, 1i64..9), c in (-50i64..50, 1i64..9)) {
        let (a, b, c) = (scalar(field, a.0, a.1), scalar(field, b.0, b.1), scalar(field, c.0, c.1));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn json_round_trip(field in field_strategy(), a in (-1000i64..1000, 1i64..50)) {
        let s = scalar(field, a.0, a.1);
        prop_assert_eq!(Scalar::from_json(field, &s.to_json()).unwrap(), s);
    }

    #[test]
    fn series_inverse(field in field_strategy(), raw in entries(5)) {
        let mut coeffs = vector(field, &raw);
        if coeffs[0].is_zero() {
            coeffs[0] = field.one();
        }
        let a = TruncatedSeries::new(field, 4, coeffs).unwrap();
        let inv = a.invert().unwrap();
        prop_assert_eq!(a.mul(&inv).unwrap(), TruncatedSeries::one(field, 4));
    }

    #[test]
    fn rank_nullity_and_solving(field in field_strategy(), raw in entries(20), x in entries(5)) {
        let rows: Vec<Vec<Scalar>> = vector(field, &raw).chunks(5).map(<[Scalar]>::to_vec).collect();
        let m = MatrixK::from_rows(field, rows).unwrap();
        let kernel = m.kernel();
        prop_assert_eq!(m.rank() + kernel.len(), 5);
        for k in &kernel {
            prop_assert!(m.mul_vec(k).unwrap().iter().all(Scalar::is_zero));
        }
        let b = m.mul_vec(&vector(field, &x)).unwrap();
        match solve_linear(&m, &b).unwrap() {
            Solution::Solved(y) => prop_assert_eq!(m.mul_vec(&y).unwrap(), b),
            Solution::NoSolution { .. } => prop_assert!(false, "consistent system reported unsolvable"),
        }
    }

    #[test]
    fn route_coboundary_squares_to_zero(p in prop_oneof![Just(0u64), Just(3), Just(5)], raw in entries(64), degree in 1usize..=3) {
        let field = if p == 0 { Field::Q } else { Field::fp(p).unwrap() };
        let model = CochainModel::category(Arc::new(vec_z2_sign(field)));
        let space = model.space(degree);
        let x = space.to_cochain(&vector(field, &raw[..space.dim])).unwrap();
        let dx = model.coboundary(&x).unwrap();
        prop_assert_eq!(model.space(degree + 1).vector(&dx).unwrap(), model.coboundary_matrix(degree).unwrap().mul_vec(&space.vector(&x).unwrap()).unwrap());
        prop_assert!(model.coboundary(&dx).unwrap().is_zero());
    }

    #[test]
    fn bracket_is_graded_antisymmetric(raw in entries(16), raw2 in entries(16)) {
        let field = Field::fp(5).unwrap();
        let c = Arc::new(vec_zn(field, 2));
        let model = CochainModel::functor(&FunctorData::identity(&c));
        let space = model.space(2);
        let g = space.to_cochain(&vector(field, &raw[..space.dim])).unwrap();
        let h = space.to_cochain(&vector(field, &raw2[..space.dim])).unwrap();
        let out = model.space(3);
        let gh = out.vector(&model.bracket(&g, &h).unwrap()).unwrap();
        let hg = out.vector(&model.bracket(&h, &g).unwrap()).unwrap();
        // Degree-2 cochains have odd shifted degree, so the bracket is symmetric.
        prop_assert_eq!(gh, hg);
    }
}
