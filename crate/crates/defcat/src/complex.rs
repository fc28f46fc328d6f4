//! Finite cochain complexes given by explicit differential matrices.
//!
//! Differentials act on column vectors: `d_n` has shape `dim C^{n+1} × dim C^n`.

use thiserror::Error;

use crate::arith::{Field, Scalar};
use crate::linalg::{rank_kernel_image, solve_linear, LinalgError, MatrixK, Reducer, Solution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("degree {0} outside [{1}, {2}]")]
    DegreeOutOfRange(i32, i32, i32),
    #[error("differential d_{0} has shape {1:?}, expected {2:?}")]
    Shape(i32, (usize, usize), (usize, usize)),
    #[error("d_{0} composed with d_{1} is nonzero")]
    NotAComplex(i32, i32),
    #[error("differential leaves the chosen subspace in degree {0}")]
    NotInvariant(i32),
    #[error("map does not commute with the differentials in degree {0}")]
    NotAChainMap(i32),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedComplex {
    field: Field,
    lo: i32,
    dims: Vec<usize>,
    diffs: Vec<MatrixK>,
}

impl GradedComplex {
    /// `dims[i]` is the dimension in degree `lo + i`; `diffs[i]` is `d_{lo+i}`.
    /// The differential out of the top degree is zero.
    pub fn new(field: Field, lo: i32, dims: Vec<usize>, diffs: Vec<MatrixK>) -> Result<Self, ComplexError> {
        assert!(!dims.is_empty(), "a complex needs at least one degree");
        if diffs.len() + 1 != dims.len() {
            return Err(ComplexError::Shape(lo, (diffs.len(), 0), (dims.len() - 1, 0)));
        }
        for (i, d) in diffs.iter().enumerate() {
            let want = (dims[i + 1], dims[i]);
            if d.shape() != want {
                return Err(ComplexError::Shape(lo + i as i32, d.shape(), want));
            }
        }
        for i in 1..diffs.len() {
            if !diffs[i].mul(&diffs[i - 1])?.is_zero() {
                return Err(ComplexError::NotAComplex(lo + i as i32, lo + i as i32 - 1));
            }
        }
        Ok(GradedComplex { field, lo, dims, diffs })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.dims.len() as i32 - 1
    }

    pub fn dim(&self, n: i32) -> usize {
        if n < self.lo || n > self.hi() {
            0
        } else {
            self.dims[(n - self.lo) as usize]
        }
    }

    /// `d_n`, with zero matrices outside the stored range.
    pub fn differential(&self, n: i32) -> MatrixK {
        if n >= self.lo && n < self.hi() {
            self.diffs[(n - self.lo) as usize].clone()
        } else {
            MatrixK::zeros(self.field, self.dim(n + 1), self.dim(n))
        }
    }

    fn check_degree(&self, n: i32) -> Result<(), ComplexError> {
        if n < self.lo || n > self.hi() {
            return Err(ComplexError::DegreeOutOfRange(n, self.lo, self.hi()));
        }
        Ok(())
    }

    /// Cocycle basis in degree `n`.
    pub fn cocycles(&self, n: i32) -> Vec<Vec<Scalar>> {
        rank_kernel_image(&self.differential(n)).kernel
    }

    /// Coboundary basis in degree `n`.
    pub fn coboundaries(&self, n: i32) -> Vec<Vec<Scalar>> {
        rank_kernel_image(&self.differential(n - 1)).image
    }

    pub fn cohomology(&self, n: i32) -> Result<Cohomology, ComplexError> {
        self.check_degree(n)?;
        let z = self.cocycles(n);
        let b = self.coboundaries(n);
        let dim = self.dim(n);
        let red = Reducer::new(self.field, dim, &b);
        let mut acc = red.clone();
        let mut reps = Vec::new();
        let mut acc_span = b.clone();
        for v in z {
            if !acc.contains(&v) {
                reps.push(red.reduce(&v));
                acc_span.push(v);
                acc = Reducer::new(self.field, dim, &acc_span);
            }
        }
        Ok(Cohomology { degree: n, dim: reps.len(), representatives: reps, boundary_rank: b.len() })
    }

    /// Whether `v` is a cocycle that is a coboundary.
    pub fn is_exact_vector(&self, n: i32, v: &[Scalar]) -> bool {
        Reducer::new(self.field, self.dim(n), &self.coboundaries(n)).contains(v)
    }

    /// The same complex restricted to degrees `lo..=hi`.
    pub fn truncated(&self, hi: i32) -> Self {
        let hi = hi.min(self.hi()).max(self.lo);
        let len = (hi - self.lo + 1) as usize;
        GradedComplex { field: self.field, lo: self.lo, dims: self.dims[..len].to_vec(), diffs: self.diffs[..len - 1].to_vec() }
    }

    /// Degreewise direct sum, with the summands in order.
    pub fn direct_sum(a: &GradedComplex, b: &GradedComplex) -> Result<Self, ComplexError> {
        let f = a.field;
        let lo = a.lo.min(b.lo);
        let hi = a.hi().max(b.hi());
        let dims = (lo..=hi).map(|n| a.dim(n) + b.dim(n)).collect();
        let mut diffs = Vec::new();
        for n in lo..hi {
            let top = vec![a.differential(n), MatrixK::zeros(f, a.dim(n + 1), b.dim(n))];
            let bottom = vec![MatrixK::zeros(f, b.dim(n + 1), a.dim(n)), b.differential(n)];
            diffs.push(MatrixK::blocks(f, &[top, bottom])?);
        }
        GradedComplex::new(f, lo, dims, diffs)
    }

    /// The subcomplex spanned by `bases[n - lo]` in each degree, written in
    /// those bases. Fails when the differential leaves the subspaces.
    pub fn restricted(&self, bases: &[Vec<Vec<Scalar>>]) -> Result<Self, ComplexError> {
        let f = self.field;
        let dims: Vec<usize> = bases.iter().map(Vec::len).collect();
        let mut diffs = Vec::new();
        for i in 0..bases.len().saturating_sub(1) {
            let n = self.lo + i as i32;
            let d = self.differential(n);
            let target = MatrixK::from_columns(f, self.dim(n + 1), &bases[i + 1]);
            let mut cols = Vec::new();
            for v in &bases[i] {
                let image = d.mul_vec(v)?;
                match solve_linear(&target, &image)? {
                    Solution::Solved(x) => cols.push(x),
                    Solution::NoSolution { .. } => return Err(ComplexError::NotInvariant(n)),
                }
            }
            diffs.push(MatrixK::from_columns(f, bases[i + 1].len(), &cols));
        }
        GradedComplex::new(f, self.lo, dims, diffs)
    }
}

/// Cohomology in one degree with deterministic representatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cohomology {
    pub degree: i32,
    pub dim: usize,
    pub representatives: Vec<Vec<Scalar>>,
    pub boundary_rank: usize,
}

pub fn cohomology(c: &GradedComplex, n: i32) -> Result<Cohomology, ComplexError> {
    c.cohomology(n)
}

/// A degreewise linear map `u_n: A^n → B^n` commuting with the differentials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexMap {
    source: GradedComplex,
    target: GradedComplex,
    lo: i32,
    maps: Vec<MatrixK>,
}

impl ComplexMap {
    /// `maps[i]` is `u_{lo+i}`; degrees outside the list map by zero.
    pub fn new(source: GradedComplex, target: GradedComplex, lo: i32, maps: Vec<MatrixK>) -> Result<Self, ComplexError> {
        let cm = ComplexMap { source, target, lo, maps };
        for (i, m) in cm.maps.iter().enumerate() {
            let n = lo + i as i32;
            let want = (cm.target.dim(n), cm.source.dim(n));
            if m.shape() != want {
                return Err(ComplexError::Shape(n, m.shape(), want));
            }
        }
        let lo = cm.source.lo().min(cm.target.lo());
        let hi = cm.source.hi().max(cm.target.hi());
        for n in lo..hi {
            let left = cm.target.differential(n).mul(&cm.at(n))?;
            let right = cm.at(n + 1).mul(&cm.source.differential(n))?;
            if left != right {
                return Err(ComplexError::NotAChainMap(n));
            }
        }
        Ok(cm)
    }

    pub fn identity(c: &GradedComplex) -> Self {
        let maps = (c.lo()..=c.hi()).map(|n| MatrixK::identity(c.field(), c.dim(n))).collect();
        ComplexMap::new(c.clone(), c.clone(), c.lo(), maps).expect("identity is a chain map")
    }

    pub fn zero(a: &GradedComplex, b: &GradedComplex) -> Self {
        ComplexMap { source: a.clone(), target: b.clone(), lo: 0, maps: Vec::new() }
    }

    pub fn source(&self) -> &GradedComplex {
        &self.source
    }

    pub fn target(&self) -> &GradedComplex {
        &self.target
    }

    pub fn at(&self, n: i32) -> MatrixK {
        let i = n - self.lo;
        if i >= 0 && (i as usize) < self.maps.len() {
            self.maps[i as usize].clone()
        } else {
            MatrixK::zeros(self.source.field(), self.target.dim(n), self.source.dim(n))
        }
    }

    pub fn neg(&self) -> Self {
        ComplexMap { maps: self.maps.iter().map(MatrixK::neg).collect(), ..self.clone() }
    }
}

/// The cone `B^n ⊕ A^{n+1}` of `u: A → B`, with `d(b, a) = (d_B b + u a, -d_A a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeComplex {
    pub complex: GradedComplex,
    pub map: ComplexMap,
}

impl ConeComplex {
    /// Splits a cone vector into its `B^n` and `A^{n+1}` parts.
    pub fn split(&self, n: i32, v: &[Scalar]) -> (Vec<Scalar>, Vec<Scalar>) {
        let nb = self.map.target().dim(n);
        (v[..nb].to_vec(), v[nb..].to_vec())
    }

    pub fn join(b: &[Scalar], a: &[Scalar]) -> Vec<Scalar> {
        b.iter().chain(a).cloned().collect()
    }
}

pub fn cone(u: &ComplexMap) -> Result<ConeComplex, ComplexError> {
    let a = u.source();
    let b = u.target();
    let f = b.field();
    let lo = b.lo().min(a.lo() - 1);
    let hi = b.hi().max(a.hi() - 1);
    let dims: Vec<usize> = (lo..=hi).map(|n| b.dim(n) + a.dim(n + 1)).collect();
    let mut diffs = Vec::new();
    for n in lo..hi {
        let top = vec![b.differential(n), u.at(n + 1)];
        let bottom = vec![MatrixK::zeros(f, a.dim(n + 2), b.dim(n)), a.differential(n + 1).neg()];
        diffs.push(MatrixK::blocks(f, &[top, bottom])?);
    }
    let complex = GradedComplex::new(f, lo, dims, diffs)?;
    Ok(ConeComplex { complex, map: u.clone() })
}

/// Exactness bookkeeping for H(A) →u H(B) →i H(C_u) →p H(A[1]) →u ...
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LesDegreeReport {
    pub degree: i32,
    pub h_a_next: usize,
    pub h_b: usize,
    pub h_cone: usize,
    pub rank_u: usize,
    pub rank_u_next: usize,
    pub rank_i: usize,
    pub rank_p: usize,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LesReport {
    pub degrees: Vec<LesDegreeReport>,
}

impl LesReport {
    pub fn exact(&self) -> bool {
        self.degrees.iter().all(|d| d.exact)
    }
}

/// Rank of the map induced on cohomology by `f: X^n → Y^n`.
fn induced_rank(f: &MatrixK, x: &GradedComplex, xn: i32, y: &GradedComplex, yn: i32) -> usize {
    let field = y.field();
    let by = y.coboundaries(yn);
    let base = Reducer::new(field, y.dim(yn), &by).dim();
    let mut span = by;
    for z in x.cocycles(xn) {
        span.push(f.mul_vec(&z).expect("shapes agree"));
    }
    Reducer::new(field, y.dim(yn), &span).dim() - base
}

/// Checks exactness of the long exact sequence of `u` in each degree of `degrees`.
pub fn les_rank_check(u: &ComplexMap, degrees: std::ops::RangeInclusive<i32>) -> Result<LesReport, ComplexError> {
    let cn = cone(u)?;
    let c = &cn.complex;
    let a = u.source();
    let b = u.target();
    let f = b.field();
    let mut out = Vec::new();
    for n in degrees {
        let inc = {
            let mut m = MatrixK::zeros(f, c.dim(n), b.dim(n));
            for i in 0..b.dim(n) {
                m.set(i, i, f.one());
            }
            m
        };
        let proj = {
            let mut m = MatrixK::zeros(f, a.dim(n + 1), c.dim(n));
            for i in 0..a.dim(n + 1) {
                m.set(i, b.dim(n) + i, f.one());
            }
            m
        };
        let h_b = b.cohomology(n).map(|h| h.dim).unwrap_or(0);
        let h_a_next = a.cohomology(n + 1).map(|h| h.dim).unwrap_or(0);
        let h_cone = c.cohomology(n)?.dim;
        let rank_u = induced_rank(&u.at(n), a, n, b, n);
        let rank_u_next = induced_rank(&u.at(n + 1), a, n + 1, b, n + 1);
        let rank_i = induced_rank(&inc, b, n, c, n);
        let rank_p = induced_rank(&proj, c, n, a, n + 1);
        // ker i = im u, ker p = im i, ker u' = im p.
        let exact = h_b - rank_i == rank_u && h_cone - rank_p == rank_i && h_a_next - rank_u_next == rank_p;
        out.push(LesDegreeReport { degree: n, h_a_next, h_b, h_cone, rank_u, rank_u_next, rank_i, rank_p, exact });
    }
    Ok(LesReport { degrees: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Q
    }

    #[test]
    fn identity_step_is_acyclic() {
        let c = GradedComplex::new(q(), 0, vec![1, 1], vec![MatrixK::identity(q(), 1)]).unwrap();
        assert_eq!(c.cohomology(0).unwrap().dim, 0);
        assert_eq!(c.cohomology(1).unwrap().dim, 0);
    }

    #[test]
    fn zero_differentials() {
        let c = GradedComplex::new(q(), 0, vec![2, 3], vec![MatrixK::zeros(q(), 3, 2)]).unwrap();
        assert_eq!(c.cohomology(0).unwrap().dim, 2);
        assert_eq!(c.cohomology(1).unwrap().dim, 3);
        assert!(matches!(c.cohomology(2), Err(ComplexError::DegreeOutOfRange(2, 0, 1))));
    }

    #[test]
    fn non_complex_rejected() {
        let one = MatrixK::identity(q(), 1);
        assert!(matches!(
            GradedComplex::new(q(), 0, vec![1, 1, 1], vec![one.clone(), one]),
            Err(ComplexError::NotAComplex(1, 0))
        ));
    }

    #[test]
    fn cone_of_identity_is_exact() {
        let c = GradedComplex::new(q(), 0, vec![1, 2, 1], vec![MatrixK::from_i64(q(), &[vec![1], vec![0]]), MatrixK::from_i64(q(), &[vec![0, 1]])]).unwrap();
        let cn = cone(&ComplexMap::identity(&c)).unwrap();
        for n in cn.complex.lo()..=cn.complex.hi() {
            assert_eq!(cn.complex.cohomology(n).unwrap().dim, 0, "degree {n}");
        }
    }

    #[test]
    fn cone_of_zero_map_splits() {
        let a = GradedComplex::new(q(), 0, vec![1, 1], vec![MatrixK::zeros(q(), 1, 1)]).unwrap();
        let b = GradedComplex::new(q(), 0, vec![2, 1], vec![MatrixK::from_i64(q(), &[vec![1, 0]])]).unwrap();
        let u = ComplexMap::zero(&a, &b);
        let cn = cone(&u).unwrap();
        for n in 0..=1 {
            let want = b.cohomology(n).unwrap().dim + a.cohomology(n + 1).map(|h| h.dim).unwrap_or(0);
            assert_eq!(cn.complex.cohomology(n).unwrap().dim, want);
        }
        assert!(les_rank_check(&u, 0..=1).unwrap().exact());
    }

    #[test]
    fn non_chain_map_rejected() {
        let a = GradedComplex::new(q(), 0, vec![1, 1], vec![MatrixK::identity(q(), 1)]).unwrap();
        let b = GradedComplex::new(q(), 0, vec![1, 1], vec![MatrixK::zeros(q(), 1, 1)]).unwrap();
        let r = ComplexMap::new(a, b, 0, vec![MatrixK::zeros(q(), 1, 1), MatrixK::identity(q(), 1)]);
        assert!(matches!(r, Err(ComplexError::NotAChainMap(0))));
    }
}
