//! Classical Hochschild cochains of a finite-dimensional algebra, the
//! comparison with the categorical bimodule complex of its one-object
//! functor, and the unit-insertion contraction on bimodule-inducing cochains.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::arith::{Field, Scalar};
use crate::cochain::{CochainError, CochainModel};
use crate::complex::{ComplexError, GradedComplex};
use crate::functor::{algebra_to_functor, verify_bimodule, AlgebraData, BimoduleData, FunctorError};
use crate::linalg::{LinalgError, MatrixK};
use crate::tree::LTree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HochschildError {
    #[error("not a bimodule: {0}")]
    NotBimodule(String),
    #[error("categorical and classical complexes disagree in degree {0}")]
    MismatchAt(i32),
    #[error(transparent)]
    Functor(#[from] FunctorError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

type Result<T> = std::result::Result<T, HochschildError>;

/// A bimodule over an algebra given by action matrices on column vectors:
/// `left[i]` is `m ↦ e_i · m` and `right[i]` is `m ↦ m · e_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraBimodule {
    pub dim: usize,
    pub left: Vec<MatrixK>,
    pub right: Vec<MatrixK>,
}

impl AlgebraBimodule {
    /// The algebra acting on itself.
    pub fn regular(a: &AlgebraData) -> AlgebraBimodule {
        let d = a.dim;
        let mut left = Vec::new();
        let mut right = Vec::new();
        for i in 0..d {
            let mut l = MatrixK::zeros(a.field, d, d);
            let mut r = MatrixK::zeros(a.field, d, d);
            for j in 0..d {
                for k in 0..d {
                    l.set(k, j, a.m[i][j][k].clone());
                    r.set(k, j, a.m[j][i][k].clone());
                }
            }
            left.push(l);
            right.push(r);
        }
        AlgebraBimodule { dim: d, left, right }
    }

    fn combination(a: &AlgebraData, mats: &[MatrixK], coeffs: &[Scalar], dim: usize) -> MatrixK {
        let mut out = MatrixK::zeros(a.field, dim, dim);
        for (m, c) in mats.iter().zip(coeffs) {
            if !c.is_zero() {
                out = out.add(&m.scale(c)).expect("square action matrices");
            }
        }
        out
    }

    /// Checks both actions, their compatibility and unitality.
    pub fn validate(&self, a: &AlgebraData) -> Result<()> {
        let d = a.dim;
        let bad = |s: String| Err(HochschildError::NotBimodule(s));
        if self.left.len() != d || self.right.len() != d {
            return bad(format!("expected {d} action matrices per side"));
        }
        if self.left.iter().chain(&self.right).any(|m| m.shape() != (self.dim, self.dim)) {
            return bad(format!("action matrices must be {0} x {0}", self.dim));
        }
        let id = MatrixK::identity(a.field, self.dim);
        if Self::combination(a, &self.left, &a.unit, self.dim) != id || Self::combination(a, &self.right, &a.unit, self.dim) != id {
            return bad("the unit does not act as the identity".into());
        }
        for i in 0..d {
            for j in 0..d {
                let prod = Self::combination(a, &self.left, &a.m[i][j], self.dim);
                if self.left[i].mul(&self.left[j])? != prod {
                    return bad(format!("left action fails on e{i} e{j}"));
                }
                let prod = Self::combination(a, &self.right, &a.m[i][j], self.dim);
                if self.right[j].mul(&self.right[i])? != prod {
                    return bad(format!("right action fails on e{i} e{j}"));
                }
                if self.left[i].mul(&self.right[j])? != self.right[j].mul(&self.left[i])? {
                    return bad(format!("actions of e{i} and e{j} do not commute"));
                }
            }
        }
        Ok(())
    }

    /// The same bimodule over the one-object functor of `a`.
    pub fn categorical(&self, a: &AlgebraData) -> Result<BimoduleData> {
        let f = algebra_to_functor(a)?;
        let (d, dm) = (a.dim, self.dim);
        let mut mul = MatrixK::zeros(a.field, d * dm, dm);
        let mut mur = MatrixK::zeros(a.field, dm * d, dm);
        for i in 0..d {
            for j in 0..dm {
                for k in 0..dm {
                    mul.set(i * dm + j, k, self.left[i].get(k, j).clone());
                    mur.set(j * d + i, k, self.right[i].get(k, j).clone());
                }
            }
        }
        let m = BimoduleData {
            functor: f,
            objmap: vec![vec![dm]],
            mul: BTreeMap::from([((0, 0, 0), mul)]),
            mur: BTreeMap::from([((0, 0, 0), mur)]),
        };
        verify_bimodule(&m)?;
        Ok(m)
    }
}

fn multi_index(d: usize, mut idx: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = idx % d;
        idx /= d;
    }
    out
}

fn flat_index(d: usize, ix: &[usize]) -> usize {
    ix.iter().fold(0, |acc, &i| acc * d + i)
}

/// Classical differential `C^n → C^{n+1}` on `Hom(A^{⊗n}, M)` with coordinate
/// `flat(i_1..i_n) · dim M + k`.
fn hochschild_differential(a: &AlgebraData, m: &AlgebraBimodule, n: usize) -> MatrixK {
    let (d, dm) = (a.dim, m.dim);
    let f = a.field;
    let rows = d.pow(n as u32 + 1) * dm;
    let cols = d.pow(n as u32) * dm;
    let mut out = MatrixK::zeros(f, rows, cols);
    let minus = f.from_i64(-1);
    for idx in 0..d.pow(n as u32 + 1) {
        let ix = multi_index(d, idx, n + 1);
        for kp in 0..dm {
            let row = idx * dm + kp;
            let inner = flat_index(d, &ix[1..]);
            for k in 0..dm {
                out.add_at(row, inner * dm + k, m.left[ix[0]].get(kp, k));
            }
            for i in 1..=n {
                let sign = if i % 2 == 1 { minus.clone() } else { f.one() };
                for l in 0..d {
                    let c = &a.m[ix[i - 1]][ix[i]][l];
                    if c.is_zero() {
                        continue;
                    }
                    let mut merged = ix[..i - 1].to_vec();
                    merged.push(l);
                    merged.extend(&ix[i + 1..]);
                    out.add_at(row, flat_index(d, &merged) * dm + kp, &(&sign * c));
                }
            }
            let sign = if n.is_multiple_of(2) { minus.clone() } else { f.one() };
            let head = flat_index(d, &ix[..n]);
            for k in 0..dm {
                out.add_at(row, head * dm + k, &(&sign * m.right[ix[n]].get(kp, k)));
            }
        }
    }
    out
}

/// The classical complex in degrees `0..=top`.
pub fn build_hochschild(a: &AlgebraData, m: &AlgebraBimodule, top: usize) -> Result<GradedComplex> {
    a.validate()?;
    m.validate(a)?;
    let dims = (0..=top).map(|n| a.dim.pow(n as u32) * m.dim).collect();
    let diffs = (0..top).map(|n| hochschild_differential(a, m, n)).collect();
    Ok(GradedComplex::new(a.field, 0, dims, diffs)?)
}

fn copies(t: &LTree, out: &mut Vec<usize>) {
    match t {
        LTree::Apply { k, inner, .. } => {
            out.push(*k);
            copies(inner, out);
        }
        LTree::Node { l, r, .. } => {
            copies(l, out);
            copies(r, out);
        }
        LTree::Leaf(_) | LTree::Unit(_) => {}
    }
}

/// Permutation from categorical coordinates to classical ones in degree `n`.
fn identification(model: &CochainModel, d: usize, dm: usize, n: usize) -> Result<MatrixK> {
    let space = model.space(n);
    let f = model.field();
    let mut p = MatrixK::zeros(f, d.pow(n as u32) * dm, space.dim);
    for slot in &space.slots {
        let rows = model.ctx().basis_trees(0, &model.src_shape(&slot.tuple), slot.out);
        let cols = model.ctx().basis_trees(0, &model.dst_shape(&slot.tuple), slot.out);
        for (r, rt) in rows.iter().enumerate() {
            let mut ix = Vec::new();
            copies(rt, &mut ix);
            for (c, ct) in cols.iter().enumerate() {
                let mut k = Vec::new();
                copies(ct, &mut k);
                p.set(flat_index(d, &ix) * dm + k[0], slot.offset + r * slot.cols + c, f.one());
            }
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeComparison {
    pub degree: usize,
    pub categorical_dim: usize,
    pub classical_dim: usize,
    pub categorical_cohomology: usize,
    pub classical_cohomology: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonReport {
    pub degrees: Vec<DegreeComparison>,
    /// The basis identification intertwines the two differentials.
    pub intertwines: bool,
}

/// Compares cohomology of the categorical complex of `F_A` with coefficients
/// in `F_A` against classical Hochschild cohomology `HH(A, A)`.
pub fn compare_with_categorical(a: &AlgebraData, top: usize) -> Result<ComparisonReport> {
    let m = AlgebraBimodule::regular(a);
    let classical = build_hochschild(a, &m, top + 1)?;
    let model = CochainModel::bimodule(&m.categorical(a)?);
    let categorical = model.complex(top + 1)?;
    let mut degrees = Vec::new();
    for n in 0..=top {
        let i = n as i32;
        let row = DegreeComparison {
            degree: n,
            categorical_dim: categorical.dim(i),
            classical_dim: classical.dim(i),
            categorical_cohomology: categorical.cohomology(i)?.dim,
            classical_cohomology: classical.cohomology(i)?.dim,
        };
        if row.categorical_dim != row.classical_dim || row.categorical_cohomology != row.classical_cohomology {
            return Err(HochschildError::MismatchAt(i));
        }
        let p = identification(&model, a.dim, m.dim, n)?;
        let q = identification(&model, a.dim, m.dim, n + 1)?;
        if q.mul(&categorical.differential(i))? != classical.differential(i).mul(&p)? {
            return Err(HochschildError::MismatchAt(i));
        }
        degrees.push(row);
    }
    Ok(ComparisonReport { degrees, intertwines: true })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubcomplexDegree {
    pub degree: usize,
    pub full_dim: usize,
    pub subspace_dim: usize,
    /// Cocycles of the full complex lying in the subspace.
    pub cocycles: usize,
    /// Cohomology of the restricted complex, when the subspaces form one.
    pub restricted_cohomology: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactnessReport {
    pub degrees: Vec<SubcomplexDegree>,
    /// Every bimodule-inducing 2-cochain is a cocycle.
    pub claim_a: bool,
    /// Unit insertion inverts the coboundary on bimodule-inducing cocycles.
    pub claim_b: bool,
    /// Counterexample descriptions, empty when both claims hold.
    pub failures: Vec<String>,
}

fn stack(f: Field, top: &MatrixK, bottom: &MatrixK) -> Result<MatrixK> {
    Ok(MatrixK::blocks(f, &[vec![top.clone()], vec![bottom.clone()]])?)
}

/// Cochains whose outer faces agree pairwise: `φ` acting after the first
/// argument equals `φ` after merging the first two, and likewise on the right.
pub fn bimodule_inducing_basis(model: &CochainModel, n: usize) -> Result<Vec<Vec<Scalar>>> {
    let f = model.field();
    let left = model.face_matrix(n, 0)?.sub(&model.face_matrix(n, 1)?)?;
    let right = model.face_matrix(n, n)?.sub(&model.face_matrix(n, n + 1)?)?;
    Ok(stack(f, &left, &right)?.kernel())
}

/// Checks the two contraction claims on bimodule-inducing cochains in
/// degrees `2..=top`.
pub fn bimodule_subcomplex_exactness(a: &AlgebraData, m: &AlgebraBimodule, top: usize) -> Result<ExactnessReport> {
    a.validate()?;
    m.validate(a)?;
    let model = CochainModel::bimodule(&m.categorical(a)?);
    let full = model.complex(top + 1)?;
    let bases: Vec<Vec<Vec<Scalar>>> = (0..=top + 1).map(|n| bimodule_inducing_basis(&model, n)).collect::<Result<_>>()?;
    let restricted = full.restricted(&bases).ok();
    let mut degrees = Vec::new();
    let mut failures = Vec::new();
    let mut claim_a = true;
    let mut claim_b = true;
    for n in 0..=top {
        let d = full.differential(n as i32);
        let mut cocycles = Vec::new();
        if !bases[n].is_empty() {
            let sub = MatrixK::from_columns(full.field(), full.dim(n as i32), &bases[n]);
            for z in d.mul(&sub)?.kernel() {
                cocycles.push(sub.mul_vec(&z)?);
            }
        }
        if n == 2 && cocycles.len() != bases[n].len() {
            claim_a = false;
            failures.push(format!("a bimodule-inducing 2-cochain is not a cocycle ({} of {})", cocycles.len(), bases[n].len()));
        }
        if n >= 2 {
            let h = model.unit_insertion_matrix(n - 1)?;
            let back = full.differential(n as i32 - 1);
            for z in &cocycles {
                if back.mul_vec(&h.mul_vec(z)?)? != *z {
                    claim_b = false;
                    failures.push(format!("unit insertion fails on a degree-{n} cocycle"));
                    break;
                }
            }
        }
        degrees.push(SubcomplexDegree {
            degree: n,
            full_dim: full.dim(n as i32),
            subspace_dim: bases[n].len(),
            cocycles: cocycles.len(),
            restricted_cohomology: restricted.as_ref().map(|r| r.cohomology(n as i32).map(|h| h.dim)).transpose()?,
        });
    }
    Ok(ExactnessReport { degrees, claim_a, claim_b, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn algebras() -> Vec<AlgebraData> {
        vec![
            AlgebraData::ground(Field::Q),
            AlgebraData::dual_numbers(Field::Q),
            AlgebraData::dual_numbers(Field::fp(2).unwrap()),
            AlgebraData::matrices2(Field::fp(3).unwrap()),
        ]
    }

    #[test]
    fn classical_dimensions_and_known_values() {
        let q = Field::Q;
        let k = AlgebraData::ground(q);
        let c = build_hochschild(&k, &AlgebraBimodule::regular(&k), 4).unwrap();
        let h: Vec<usize> = (0..4).map(|n| c.cohomology(n).unwrap().dim).collect();
        assert_eq!(h, vec![1, 0, 0, 0]);
        let a = AlgebraData::dual_numbers(q);
        let c = build_hochschild(&a, &AlgebraBimodule::regular(&a), 4).unwrap();
        assert_eq!(c.dim(3), 16);
        let h: Vec<usize> = (0..3).map(|n| c.cohomology(n).unwrap().dim).collect();
        assert_eq!(h, vec![2, 1, 1]);
        let m = AlgebraData::matrices2(Field::fp(3).unwrap());
        let c = build_hochschild(&m, &AlgebraBimodule::regular(&m), 2).unwrap();
        assert_eq!((c.cohomology(0).unwrap().dim, c.cohomology(1).unwrap().dim), (1, 0));
    }

    #[test]
    fn categorical_matches_classical() {
        for a in algebras() {
            let top = if a.dim > 2 { 2 } else { 3 };
            let r = compare_with_categorical(&a, top).unwrap();
            assert!(r.intertwines);
        }
    }

    #[test]
    fn contraction_claims() {
        for a in algebras() {
            let top = if a.dim > 2 { 2 } else { 3 };
            let r = bimodule_subcomplex_exactness(&a, &AlgebraBimodule::regular(&a), top).unwrap();
            assert!(r.claim_a && r.claim_b, "{:?}", r);
        }
    }

    #[test]
    fn broken_bimodule_rejected() {
        let a = AlgebraData::dual_numbers(Field::Q);
        let mut m = AlgebraBimodule::regular(&a);
        m.right[1] = MatrixK::identity(Field::Q, 2);
        assert!(matches!(m.validate(&a), Err(HochschildError::NotBimodule(_))));
    }
}
