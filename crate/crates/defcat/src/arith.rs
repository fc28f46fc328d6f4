//! Exact scalars over Q and GF(p), and truncated series over them.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(Field, Field),
    #[error("division by zero")]
    DivisionByZero,
    #[error("truncation order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("series with zero constant term is not invertible")]
    NotInvertible,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("cannot parse scalar {0:?}")]
    Parse(String),
}

/// Largest admissible modulus, so products of residues fit in a `u64`.
pub const MAX_PRIME: u64 = (1 << 31) - 1;

/// Base field descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Field {
    Q,
    Fp { p: u64 },
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    pub fn fp(p: u64) -> Result<Field, ArithError> {
        if p > MAX_PRIME || !is_prime(p) {
            return Err(ArithError::NotPrime(p));
        }
        Ok(Field::Fp { p })
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            Field::Q => 0,
            Field::Fp { p } => *p,
        }
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match self {
            Field::Q => Scalar::Q(BigRational::from_integer(BigInt::from(n))),
            Field::Fp { p } => {
                let p = *p as i64;
                Scalar::Fp { v: n.rem_euclid(p) as u64, p: p as u64 }
            }
        }
    }

    /// `num/den`; fails when `den` vanishes in the field.
    pub fn ratio(&self, num: i64, den: i64) -> Result<Scalar, ArithError> {
        self.from_i64(num).div(&self.from_i64(den))
    }

    /// Parses `"a"`, `"a/b"` (or any integer for residues).
    pub fn parse(&self, s: &str) -> Result<Scalar, ArithError> {
        let bad = || ArithError::Parse(s.to_string());
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n = BigInt::from_str(n).map_err(|_| bad())?;
        let d = BigInt::from_str(d).map_err(|_| bad())?;
        match self {
            Field::Q => {
                if d.is_zero() {
                    return Err(ArithError::DivisionByZero);
                }
                Ok(Scalar::Q(BigRational::new(n, d)))
            }
            Field::Fp { p } => {
                let m = BigInt::from(*p);
                let red = |x: &BigInt| x.mod_floor(&m).to_u64().unwrap_or(0);
                let a = Scalar::Fp { v: red(&n), p: *p };
                let b = Scalar::Fp { v: red(&d), p: *p };
                a.div(&b)
            }
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Q => write!(f, "Q"),
            Field::Fp { p } => write!(f, "GF({p})"),
        }
    }
}

/// An exact field element. Rationals are kept reduced with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Q(BigRational),
    Fp { v: u64, p: u64 },
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Q(_) => Field::Q,
            Scalar::Fp { p, .. } => Field::Fp { p: *p },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_one(),
            Scalar::Fp { v, .. } => *v == 1,
        }
    }

    fn check(&self, other: &Scalar) -> Result<(), ArithError> {
        if self.field() != other.field() {
            return Err(ArithError::FieldMismatch(self.field(), other.field()));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar, ArithError> {
        self.check(other)?;
        Ok(match (self, other) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a + b),
            (Scalar::Fp { v: a, p }, Scalar::Fp { v: b, .. }) => Scalar::Fp { v: (a + b) % p, p: *p },
            _ => unreachable!(),
        })
    }

    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar, ArithError> {
        self.check(other)?;
        Ok(match (self, other) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a * b),
            (Scalar::Fp { v: a, p }, Scalar::Fp { v: b, .. }) => Scalar::Fp { v: a * b % p, p: *p },
            _ => unreachable!(),
        })
    }

    pub fn inv(&self) -> Result<Scalar, ArithError> {
        if self.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(match self {
            Scalar::Q(a) => Scalar::Q(a.recip()),
            Scalar::Fp { v, p } => Scalar::Fp { v: pow_mod(*v, p - 2, *p), p: *p },
        })
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, ArithError> {
        self.check(other)?;
        self.checked_mul(&other.inv()?)
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut r = self.field().one();
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    /// JSON form: `"a/b"` string for rationals, integer for residues.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Scalar::Q(_) => serde_json::Value::String(self.to_string()),
            Scalar::Fp { v, .. } => serde_json::Value::from(*v),
        }
    }

    pub fn from_json(field: Field, v: &serde_json::Value) -> Result<Scalar, ArithError> {
        match v {
            serde_json::Value::String(s) => field.parse(s),
            serde_json::Value::Number(n) => match n.as_i64() {
                Some(i) => Ok(field.from_i64(i)),
                None => Err(ArithError::Parse(n.to_string())),
            },
            other => Err(ArithError::Parse(other.to_string())),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Q(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Fp { v, .. } => write!(f, "{v}"),
        }
    }
}

// Operator forms panic on field mismatch; values built from one validated
// document always share a field. Use the `checked_*` methods at boundaries.
impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &'a Scalar) -> Scalar {
        self.checked_add(o).expect("scalar field mismatch")
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &'a Scalar) -> Scalar {
        self.checked_mul(o).expect("scalar field mismatch")
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &'a Scalar) -> Scalar {
        self + &(-o)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Q(a) => Scalar::Q(-a),
            Scalar::Fp { v, p } => Scalar::Fp { v: (p - v) % p, p: *p },
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        &self + &o
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, o: Scalar) -> Scalar {
        &self * &o
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, o: Scalar) -> Scalar {
        &self - &o
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// The binary operations exposed to documents and tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarOp {
    Add,
    Mul,
    Inv,
    Neg,
}

/// Applies `op`; unary ops ignore `b`.
pub fn scalar_arith(a: &Scalar, b: &Scalar, op: ScalarOp) -> Result<Scalar, ArithError> {
    match op {
        ScalarOp::Add => a.checked_add(b),
        ScalarOp::Mul => a.checked_mul(b),
        ScalarOp::Inv => a.inv(),
        ScalarOp::Neg => Ok(-a),
    }
}

/// An element of k[ε]/ε^(N+1), coefficients lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    field: Field,
    coeffs: Vec<Scalar>,
}

impl TruncatedSeries {
    /// Pads or truncates `coeffs` to `order + 1` entries.
    pub fn new(field: Field, order: usize, coeffs: Vec<Scalar>) -> Result<Self, ArithError> {
        let mut c = Vec::with_capacity(order + 1);
        for x in coeffs.into_iter().take(order + 1) {
            if x.field() != field {
                return Err(ArithError::FieldMismatch(field, x.field()));
            }
            c.push(x);
        }
        c.resize(order + 1, field.zero());
        Ok(TruncatedSeries { field, coeffs: c })
    }

    pub fn constant(c: Scalar, order: usize) -> Self {
        let field = c.field();
        let mut coeffs = vec![field.zero(); order + 1];
        coeffs[0] = c;
        TruncatedSeries { field, coeffs }
    }

    pub fn zero(field: Field, order: usize) -> Self {
        Self::constant(field.zero(), order)
    }

    pub fn one(field: Field, order: usize) -> Self {
        Self::constant(field.one(), order)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &Scalar {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    fn check(&self, o: &Self) -> Result<(), ArithError> {
        if self.field != o.field {
            return Err(ArithError::FieldMismatch(self.field, o.field));
        }
        if self.order() != o.order() {
            return Err(ArithError::OrderMismatch(self.order(), o.order()));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, ArithError> {
        self.check(o)?;
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect();
        Ok(TruncatedSeries { field: self.field, coeffs })
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries { field: self.field, coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn sub(&self, o: &Self) -> Result<Self, ArithError> {
        self.add(&o.neg())
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, o: &Self) -> Result<Self, ArithError> {
        self.check(o)?;
        let n = self.order();
        let mut coeffs = vec![self.field.zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(n + 1 - i) {
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        Ok(TruncatedSeries { field: self.field, coeffs })
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        TruncatedSeries { field: self.field, coeffs: self.coeffs.iter().map(|a| a * s).collect() }
    }

    /// Inverse by the recursion b_0 = 1/a_0, b_n = -b_0 Σ_{k≥1} a_k b_{n-k}.
    pub fn invert(&self) -> Result<Self, ArithError> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(ArithError::NotInvertible);
        }
        let b0 = a0.inv()?;
        let mut b = vec![b0.clone()];
        for n in 1..=self.order() {
            let mut s = self.field.zero();
            for k in 1..=n {
                s = &s + &(&self.coeffs[k] * &b[n - k]);
            }
            b.push(-&(&b0 * &s));
        }
        Ok(TruncatedSeries { field: self.field, coeffs: b })
    }

    /// Drops all terms of degree above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, self.field.zero());
        TruncatedSeries { field: self.field, coeffs: c }
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => c.to_string(),
                1 => format!("({c})e"),
                _ => format!("({c})e^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Mul,
}

pub fn series_arith(a: &TruncatedSeries, b: &TruncatedSeries, op: SeriesOp) -> Result<TruncatedSeries, ArithError> {
    match op {
        SeriesOp::Add => a.add(b),
        SeriesOp::Mul => a.mul(b),
    }
}

pub fn series_invert(a: &TruncatedSeries) -> Result<TruncatedSeries, ArithError> {
    a.invert()
}

/// Rational sign helper used by formatting and tests.
pub fn is_negative(s: &Scalar) -> bool {
    match s {
        Scalar::Q(r) => r.is_negative(),
        Scalar::Fp { .. } => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Field::Q.ratio(n, d).unwrap()
    }

    #[test]
    fn rational_sum() {
        assert_eq!(q(1, 2) + q(1, 3), q(5, 6));
        assert_eq!(q(2, -4).to_string(), "-1/2");
    }

    #[test]
    fn residue_product() {
        let f = Field::fp(5).unwrap();
        assert_eq!(f.from_i64(3) * f.from_i64(4), f.from_i64(2));
    }

    #[test]
    fn inverse_of_zero_fails() {
        assert_eq!(Field::Q.zero().inv(), Err(ArithError::DivisionByZero));
        let f = Field::fp(7).unwrap();
        assert_eq!(f.zero().inv(), Err(ArithError::DivisionByZero));
    }

    #[test]
    fn mismatch_is_reported() {
        let f = Field::fp(5).unwrap();
        assert!(matches!(q(1, 2).checked_add(&f.one()), Err(ArithError::FieldMismatch(..))));
    }

    #[test]
    fn composite_modulus_rejected() {
        assert_eq!(Field::fp(4), Err(ArithError::NotPrime(4)));
    }

    fn ser(c: &[i64], n: usize) -> TruncatedSeries {
        TruncatedSeries::new(Field::Q, n, c.iter().map(|&x| Field::Q.from_i64(x)).collect()).unwrap()
    }

    #[test]
    fn eps_squared_vanishes() {
        assert_eq!(ser(&[1, 1], 1).mul(&ser(&[1, -1], 1)).unwrap(), ser(&[1], 1));
        assert_eq!(ser(&[1, 1], 2).mul(&ser(&[1, -1], 2)).unwrap(), ser(&[1, 0, -1], 2));
        assert_eq!(ser(&[0, 1], 1).mul(&ser(&[0, 1], 1)).unwrap(), ser(&[0], 1));
    }

    #[test]
    fn geometric_inverse() {
        assert_eq!(ser(&[1, 1], 2).invert().unwrap(), ser(&[1, -1, 1], 2));
        assert_eq!(ser(&[2], 0).invert().unwrap().coeff(0), &q(1, 2));
        assert_eq!(ser(&[0, 1], 2).invert(), Err(ArithError::NotInvertible));
    }

    #[test]
    fn order_mismatch() {
        assert_eq!(ser(&[1], 1).add(&ser(&[1], 2)), Err(ArithError::OrderMismatch(1, 2)));
    }

    #[test]
    fn parse_forms() {
        let f = Field::fp(7).unwrap();
        assert_eq!(f.parse("3/2").unwrap(), f.from_i64(5));
        assert_eq!(Field::Q.parse("6/4").unwrap(), q(3, 2));
        assert!(Field::Q.parse("1/0").is_err());
    }
}
