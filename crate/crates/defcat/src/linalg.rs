//! Dense exact matrices with deterministic Gaussian elimination.
//!
//! Pivots are always the first nonzero entry in column order, so kernels,
//! images and solutions are reproducible bit for bit.

use std::fmt;

use thiserror::Error;

use crate::arith::{Field, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(Field, Field),
    #[error("matrix is singular")]
    Singular,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MatrixK {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl fmt::Debug for MatrixK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatrixK[{}x{} over {}](", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|s| s.to_string()).collect();
            write!(f, "[{}]", row.join(","))?;
        }
        write!(f, ")")
    }
}

impl MatrixK {
    pub fn new(field: Field, rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape(format!("{} entries for {rows}x{cols}", data.len())));
        }
        if let Some(bad) = data.iter().find(|s| s.field() != field) {
            return Err(LinalgError::FieldMismatch(field, bad.field()));
        }
        Ok(MatrixK { field, rows, cols, data })
    }

    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        MatrixK { field, rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn scalar(s: Scalar) -> Self {
        MatrixK { field: s.field(), rows: 1, cols: 1, data: vec![s] }
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Shape("ragged rows".into()));
        }
        Self::new(field, r, c, rows.into_iter().flatten().collect())
    }

    /// Integer convenience constructor, mainly for tests and examples.
    pub fn from_i64(field: Field, rows: &[Vec<i64>]) -> Self {
        let c = rows.first().map_or(0, Vec::len);
        let data = rows.iter().flat_map(|r| r.iter().map(|&x| field.from_i64(x))).collect();
        MatrixK { field, rows: rows.len(), cols: c, data }
    }

    /// Column vectors as the columns of a matrix with `rows` rows.
    pub fn from_columns(field: Field, rows: usize, cols: &[Vec<Scalar>]) -> Self {
        let mut m = Self::zeros(field, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    pub fn add_at(&mut self, r: usize, c: usize, v: &Scalar) {
        let i = r * self.cols + c;
        self.data[i] = &self.data[i] + v;
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Scalar> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(c, r, self.get(r, c).clone());
            }
        }
        m
    }

    fn same_shape(&self, o: &Self) -> Result<(), LinalgError> {
        if self.field != o.field {
            return Err(LinalgError::FieldMismatch(self.field, o.field));
        }
        if self.shape() != o.shape() {
            return Err(LinalgError::Shape(format!("{:?} vs {:?}", self.shape(), o.shape())));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, LinalgError> {
        self.same_shape(o)?;
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect();
        Ok(self.with_data(data))
    }

    pub fn sub(&self, o: &Self) -> Result<Self, LinalgError> {
        self.same_shape(o)?;
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect();
        Ok(self.with_data(data))
    }

    fn with_data(&self, data: Vec<Scalar>) -> MatrixK {
        MatrixK { field: self.field, rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        self.with_data(self.data.iter().map(|a| a * s).collect())
    }

    pub fn neg(&self) -> Self {
        self.with_data(self.data.iter().map(|a| -a).collect())
    }

    /// Matrix product `self · o`.
    pub fn mul(&self, o: &Self) -> Result<Self, LinalgError> {
        if self.field != o.field {
            return Err(LinalgError::FieldMismatch(self.field, o.field));
        }
        if self.cols != o.rows {
            return Err(LinalgError::Shape(format!("product {:?} · {:?}", self.shape(), o.shape())));
        }
        let mut out = Self::zeros(self.field, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        out.add_at(i, j, &(a * b));
                    }
                }
            }
        }
        Ok(out)
    }

    /// `self · x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[Scalar]) -> Result<Vec<Scalar>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::Shape(format!("vector of length {} for {} columns", x.len(), self.cols)));
        }
        let mut out = vec![self.field.zero(); self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            for (a, b) in self.row(i).iter().zip(x) {
                if !a.is_zero() && !b.is_zero() {
                    *o = &*o + &(a * b);
                }
            }
        }
        Ok(out)
    }

    /// `y · self` for a row vector `y`.
    pub fn vec_mul(&self, y: &[Scalar]) -> Result<Vec<Scalar>, LinalgError> {
        if y.len() != self.rows {
            return Err(LinalgError::Shape(format!("vector of length {} for {} rows", y.len(), self.rows)));
        }
        let mut out = vec![self.field.zero(); self.cols];
        for (r, a) in y.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (o, b) in out.iter_mut().zip(self.row(r)) {
                if !b.is_zero() {
                    *o = &*o + &(a * b);
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product; row (i1,i2) ↦ i1·rows(o)+i2.
    pub fn kron(&self, o: &Self) -> Self {
        let mut m = Self::zeros(self.field, self.rows * o.rows, self.cols * o.cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.get(i1, j1);
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..o.rows {
                    for j2 in 0..o.cols {
                        m.set(i1 * o.rows + i2, j1 * o.cols + j2, a * o.get(i2, j2));
                    }
                }
            }
        }
        m
    }

    /// Block matrix from a grid of blocks; all blocks in a row share a height.
    pub fn blocks(field: Field, grid: &[Vec<MatrixK>]) -> Result<Self, LinalgError> {
        let heights: Vec<usize> = grid.iter().map(|r| r.first().map_or(0, |b| b.rows)).collect();
        let widths: Vec<usize> = grid.first().map_or(Vec::new(), |r| r.iter().map(|b| b.cols).collect());
        let mut m = Self::zeros(field, heights.iter().sum(), widths.iter().sum());
        let mut r0 = 0;
        for (bi, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            if row.len() != widths.len() {
                return Err(LinalgError::Shape("ragged block grid".into()));
            }
            for (bj, b) in row.iter().enumerate() {
                if b.rows != heights[bi] || b.cols != widths[bj] {
                    return Err(LinalgError::Shape(format!("block ({bi},{bj}) has shape {:?}", b.shape())));
                }
                for r in 0..b.rows {
                    for c in 0..b.cols {
                        m.set(r0 + r, c0 + c, b.get(r, c).clone());
                    }
                }
                c0 += b.cols;
            }
            r0 += heights[bi];
        }
        Ok(m)
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (MatrixK, Vec<usize>) {
        let mut rows = self.to_rows();
        let pivots = rref_rows(self.field, &mut rows, self.cols);
        let m = MatrixK { field: self.field, rows: self.rows, cols: self.cols, data: rows.into_iter().flatten().collect() };
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of {x : self·x = 0}, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref();
        kernel_from_rref(&r, &pivots)
    }

    /// Basis of the column space: the pivot columns of `self`.
    pub fn image(&self) -> Vec<Vec<Scalar>> {
        let (_, pivots) = self.rref();
        pivots.iter().map(|&c| self.col(c)).collect()
    }

    /// Basis of {y : y·self = 0}.
    pub fn left_kernel(&self) -> Vec<Vec<Scalar>> {
        self.transpose().kernel()
    }

    pub fn inverse(&self) -> Result<MatrixK, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::Shape("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let aug = MatrixK::blocks(self.field, &[vec![self.clone(), MatrixK::identity(self.field, n)]])?;
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(LinalgError::Singular);
        }
        let mut inv = MatrixK::zeros(self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j).clone());
            }
        }
        Ok(inv)
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }
}

/// Elimination on residues as machine integers.
fn rref_fp(p: u64, rows: &mut [Vec<u64>], cols: usize) -> Vec<usize> {
    let inv = |a: u64| {
        let (mut r, mut b, mut e) = (1u64, a % p, p - 2);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    };
    let mut pivots = Vec::new();
    let mut pr = 0;
    for c in 0..cols {
        if pr == rows.len() {
            break;
        }
        let Some(sel) = (pr..rows.len()).find(|&r| rows[r][c] != 0) else { continue };
        rows.swap(pr, sel);
        let iv = inv(rows[pr][c]);
        for x in rows[pr].iter_mut() {
            *x = *x * iv % p;
        }
        let prow = rows[pr].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == pr || row[c] == 0 {
                continue;
            }
            let f = row[c];
            for (x, y) in row.iter_mut().zip(&prow).skip(c) {
                if *y != 0 {
                    *x = (*x + p - f * y % p) % p;
                }
            }
        }
        pivots.push(c);
        pr += 1;
    }
    pivots
}

fn rref_rows(field: Field, rows: &mut [Vec<Scalar>], cols: usize) -> Vec<usize> {
    if let Field::Fp { p } = field {
        let mut raw: Vec<Vec<u64>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| match s {
                        Scalar::Fp { v, .. } => *v,
                        Scalar::Q(_) => unreachable!(),
                    })
                    .collect()
            })
            .collect();
        let piv = rref_fp(p, &mut raw, cols);
        for (dst, src) in rows.iter_mut().zip(raw) {
            for (d, v) in dst.iter_mut().zip(src) {
                *d = Scalar::Fp { v, p };
            }
        }
        return piv;
    }
    let mut pivots = Vec::new();
    let mut pr = 0;
    for c in 0..cols {
        if pr == rows.len() {
            break;
        }
        let Some(sel) = (pr..rows.len()).find(|&r| !rows[r][c].is_zero()) else { continue };
        rows.swap(pr, sel);
        let iv = rows[pr][c].inv().expect("pivot is nonzero");
        for x in rows[pr].iter_mut() {
            *x = &*x * &iv;
        }
        let prow = rows[pr].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == pr || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow).skip(c) {
                if !y.is_zero() {
                    *x = &*x - &(&f * y);
                }
            }
        }
        pivots.push(c);
        pr += 1;
    }
    pivots
}

fn kernel_from_rref(r: &MatrixK, pivots: &[usize]) -> Vec<Vec<Scalar>> {
    let f = r.field();
    let n = r.cols();
    let mut is_pivot = vec![None; n];
    for (row, &c) in pivots.iter().enumerate() {
        is_pivot[c] = Some(row);
    }
    (0..n)
        .filter(|&c| is_pivot[c].is_none())
        .map(|free| {
            let mut v = vec![f.zero(); n];
            v[free] = f.one();
            for (row, &pc) in pivots.iter().enumerate() {
                let e = r.get(row, free);
                if !e.is_zero() {
                    v[pc] = -e;
                }
            }
            v
        })
        .collect()
}

/// Rank, kernel basis and image basis of a matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankKernelImage {
    pub rank: usize,
    pub kernel: Vec<Vec<Scalar>>,
    pub image: Vec<Vec<Scalar>>,
}

/// Rank, kernel and image; kernel vectors are checked by multiplication.
pub fn rank_kernel_image(m: &MatrixK) -> RankKernelImage {
    let (r, pivots) = m.rref();
    let kernel = kernel_from_rref(&r, &pivots);
    for v in &kernel {
        let w = m.mul_vec(v).expect("kernel vector has matching length");
        assert!(w.iter().all(Scalar::is_zero), "kernel vector failed verification");
    }
    assert_eq!(pivots.len() + kernel.len(), m.cols(), "rank-nullity");
    let image = pivots.iter().map(|&c| m.col(c)).collect();
    RankKernelImage { rank: pivots.len(), kernel, image }
}

/// Outcome of solving `m·x = b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Solved(Vec<Scalar>),
    /// `certificate·m = 0` while `certificate·b ≠ 0`.
    NoSolution { certificate: Vec<Scalar> },
}

/// Solves `m·x = b`, setting free variables to zero.
pub fn solve_linear(m: &MatrixK, b: &[Scalar]) -> Result<Solution, LinalgError> {
    if b.len() != m.rows() {
        return Err(LinalgError::Shape(format!("rhs of length {} for {} rows", b.len(), m.rows())));
    }
    let f = m.field();
    let bcol = MatrixK::from_columns(f, m.rows(), &[b.to_vec()]);
    let aug = MatrixK::blocks(f, &[vec![m.clone(), bcol]])?;
    let (r, pivots) = aug.rref();
    if pivots.last() == Some(&m.cols()) {
        let certificate = m
            .left_kernel()
            .into_iter()
            .find(|y| !dot(y, b).is_zero())
            .expect("inconsistent system has a separating left-kernel vector");
        return Ok(Solution::NoSolution { certificate });
    }
    let mut x = vec![f.zero(); m.cols()];
    for (row, &c) in pivots.iter().enumerate() {
        x[c] = r.get(row, m.cols()).clone();
    }
    Ok(Solution::Solved(x))
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    let f = a.first().or(b.first()).map(Scalar::field).unwrap_or(Field::Q);
    a.iter().zip(b).fold(f.zero(), |acc, (x, y)| &acc + &(x * y))
}

pub fn vec_add(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(a: &[Scalar], s: &Scalar) -> Vec<Scalar> {
    a.iter().map(|x| x * s).collect()
}

pub fn is_zero_vec(a: &[Scalar]) -> bool {
    a.iter().all(Scalar::is_zero)
}

/// Row-echelon basis of a span, used to reduce vectors to normal form modulo it.
#[derive(Debug, Clone)]
pub struct Reducer {
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl Reducer {
    pub fn new(field: Field, dim: usize, span: &[Vec<Scalar>]) -> Self {
        let mut rows: Vec<Vec<Scalar>> = span.to_vec();
        let pivots = rref_rows(field, &mut rows, dim);
        rows.truncate(pivots.len());
        Reducer { rows, pivots }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    /// Normal form of `v` modulo the span (pivot coordinates cleared).
    pub fn reduce(&self, v: &[Scalar]) -> Vec<Scalar> {
        let mut v = v.to_vec();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            if v[c].is_zero() {
                continue;
            }
            let f = v[c].clone();
            for (x, y) in v.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x = &*x - &(&f * y);
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        is_zero_vec(&self.reduce(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_kernel() {
        let m = MatrixK::from_i64(Field::Q, &[vec![1, 2], vec![2, 4]]);
        let rki = rank_kernel_image(&m);
        assert_eq!(rki.rank, 1);
        let q = |x| Field::Q.from_i64(x);
        assert_eq!(rki.kernel, vec![vec![q(-2), q(1)]]);
    }

    #[test]
    fn identity_and_zero() {
        let id = MatrixK::identity(Field::Q, 3);
        assert_eq!(rank_kernel_image(&id).rank, 3);
        assert!(rank_kernel_image(&id).kernel.is_empty());
        let z = MatrixK::zeros(Field::Q, 2, 3);
        let rki = rank_kernel_image(&z);
        assert_eq!((rki.rank, rki.kernel.len()), (0, 3));
    }

    #[test]
    fn solve_examples() {
        let f = Field::Q;
        let b = vec![f.from_i64(3), f.from_i64(-1)];
        assert_eq!(solve_linear(&MatrixK::identity(f, 2), &b).unwrap(), Solution::Solved(b));
        let m = MatrixK::from_i64(f, &[vec![1, 1]]);
        assert_eq!(solve_linear(&m, &[f.from_i64(2)]).unwrap(), Solution::Solved(vec![f.from_i64(2), f.zero()]));
        let z = MatrixK::from_i64(f, &[vec![0]]);
        assert_eq!(
            solve_linear(&z, &[f.one()]).unwrap(),
            Solution::NoSolution { certificate: vec![f.one()] }
        );
    }

    #[test]
    fn inverse_mod_p() {
        let f = Field::fp(7).unwrap();
        let m = MatrixK::from_i64(f, &[vec![2, 1], vec![1, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), MatrixK::identity(f, 2));
        assert_eq!(MatrixK::from_i64(f, &[vec![1, 2], vec![2, 4]]).inverse(), Err(LinalgError::Singular));
    }

    #[test]
    fn reducer_normal_form() {
        let f = Field::Q;
        let span = vec![vec![f.one(), f.one(), f.zero()]];
        let red = Reducer::new(f, 3, &span);
        let v = vec![f.from_i64(2), f.from_i64(3), f.from_i64(1)];
        assert_eq!(red.reduce(&v), vec![f.zero(), f.one(), f.one()]);
    }
}
