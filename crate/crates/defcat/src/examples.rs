//! Ready-made categories used by tests, fixtures and the command line.

use crate::arith::{Field, Scalar};
use crate::fusion::{Category, FusionData, FusionError};
use crate::linalg::MatrixK;

/// Pointed category on a finite group given by its multiplication table,
/// with associator entries `omega(a, b, c)`.
pub fn pointed(
    field: Field,
    names: Vec<String>,
    mul: &dyn Fn(usize, usize) -> usize,
    unit: usize,
    omega: &dyn Fn(usize, usize, usize) -> Scalar,
) -> Result<Category, FusionError> {
    let n = names.len();
    let mut rules = Vec::new();
    for a in 0..n {
        for b in 0..n {
            rules.push((a, b, mul(a, b), 1));
        }
    }
    let mut data = FusionData::new(field, names, unit, &rules);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let d = mul(mul(a, b), c);
                data.set_f([a, b, c, d], MatrixK::scalar(omega(a, b, c)));
            }
        }
    }
    Category::new(data)
}

/// `Vec_{Z/n}` with trivial associator.
pub fn vec_zn(field: Field, n: usize) -> Category {
    let names = (0..n).map(|i| i.to_string()).collect();
    pointed(field, names, &|a, b| (a + b) % n, 0, &|_, _, _| field.one()).expect("valid pointed data")
}

/// `Vec_{Z/2}` with associator `(-1)^{abc}`.
pub fn vec_z2_sign(field: Field) -> Category {
    let names = vec!["0".into(), "1".into()];
    pointed(field, names, &|a, b| (a + b) % 2, 0, &|a, b, c| {
        if a * b * c == 1 {
            field.from_i64(-1)
        } else {
            field.one()
        }
    })
    .expect("valid pointed data")
}

/// `Vec_{Z/2 × Z/2}` with trivial associator; simple `2x + y` is `(x, y)`.
pub fn vec_z2z2(field: Field) -> Category {
    let names = vec!["00".into(), "01".into(), "10".into(), "11".into()];
    pointed(field, names, &|a, b| a ^ b, 0, &|_, _, _| field.one()).expect("valid pointed data")
}

/// Fibonacci category over GF(19): `τ ⊗ τ = 1 ⊕ τ`, golden ratio `5`.
pub fn fibonacci_gf19() -> Category {
    let field = Field::fp(19).expect("19 is prime");
    let rules = [(0, 0, 0, 1), (0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1), (1, 1, 1, 1)];
    let mut data = FusionData::new(field, vec!["1".into(), "t".into()], 0, &rules);
    // φ = 5 solves x² = x + 1; φ⁻¹ = 4 and 2² = φ⁻¹.
    data.set_f([1, 1, 1, 1], MatrixK::from_i64(field, &[vec![4, 2], vec![2, -4]]));
    data.fill_identity_f();
    Category::new(data).expect("valid Fibonacci data")
}
