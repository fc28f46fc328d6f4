//! Skeletal semisimple monoidal categories given by fusion rules and F-matrices.
//!
//! Hom spaces into composite objects use splitting-tree bases. The F-matrix
//! `F^{abc}_d` maps the left-tree basis `(e, μ_{ab}^e, μ_{ec}^d)` to the
//! right-tree basis `(f, μ_{bc}^f, μ_{af}^d)`, both in lexicographic order,
//! and composes left to right.

use std::collections::BTreeMap;
use std::ops::Deref;

use thiserror::Error;

use crate::arith::{Field, Scalar};
use crate::linalg::MatrixK;

pub type Simple = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FusionError {
    #[error("shape error at {index:?}: {detail}")]
    ShapeError { index: Vec<String>, detail: String },
    #[error("singular F-matrix at {0:?}")]
    SingularF(Vec<String>),
    #[error("unit rule violated: {0}")]
    UnitRuleViolation(String),
    #[error("pentagon fails at {abcd:?} with output {out}")]
    PentagonViolation { abcd: Vec<String>, out: String },
    #[error("triangle fails at {ab:?} with output {out}")]
    TriangleViolation { ab: Vec<String>, out: String },
    #[error("field mismatch: {0:?} vs {1:?}")]
    FieldMismatch(Field, Field),
    #[error("unknown simple {0:?}")]
    UnknownLabel(String),
}

/// Raw fusion data; use [`Category::new`] to validate it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionData {
    pub field: Field,
    pub names: Vec<String>,
    pub unit: Simple,
    fusion: Vec<usize>,
    pub fmats: BTreeMap<[Simple; 4], MatrixK>,
    pub lambda: Vec<Scalar>,
    pub rho: Vec<Scalar>,
}

impl FusionData {
    /// Data with the given fusion rules, no F-matrices and unit scalars 1.
    pub fn new(field: Field, names: Vec<String>, unit: Simple, rules: &[(Simple, Simple, Simple, usize)]) -> Self {
        let n = names.len();
        let mut fusion = vec![0; n * n * n];
        for &(a, b, c, m) in rules {
            fusion[(a * n + b) * n + c] = m;
        }
        FusionData {
            field,
            names,
            unit,
            fusion,
            fmats: BTreeMap::new(),
            lambda: vec![field.one(); n],
            rho: vec![field.one(); n],
        }
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn simples(&self) -> std::ops::Range<Simple> {
        0..self.rank()
    }

    pub fn label(&self, name: &str) -> Result<Simple, FusionError> {
        self.names.iter().position(|s| s == name).ok_or_else(|| FusionError::UnknownLabel(name.to_string()))
    }

    pub fn name(&self, s: Simple) -> &str {
        &self.names[s]
    }

    pub fn n(&self, a: Simple, b: Simple, c: Simple) -> usize {
        let r = self.rank();
        self.fusion[(a * r + b) * r + c]
    }

    pub fn set_n(&mut self, a: Simple, b: Simple, c: Simple, m: usize) {
        let r = self.rank();
        self.fusion[(a * r + b) * r + c] = m;
    }

    /// Left-tree basis `(e, μ1, μ2)` of `(ab)c → d`.
    pub fn left_basis(&self, a: Simple, b: Simple, c: Simple, d: Simple) -> Vec<(Simple, usize, usize)> {
        let mut out = Vec::new();
        for e in self.simples() {
            for m1 in 0..self.n(a, b, e) {
                for m2 in 0..self.n(e, c, d) {
                    out.push((e, m1, m2));
                }
            }
        }
        out
    }

    /// Right-tree basis `(f, ν1, ν2)` of `a(bc) → d`.
    pub fn right_basis(&self, a: Simple, b: Simple, c: Simple, d: Simple) -> Vec<(Simple, usize, usize)> {
        let mut out = Vec::new();
        for f in self.simples() {
            for n1 in 0..self.n(b, c, f) {
                for n2 in 0..self.n(a, f, d) {
                    out.push((f, n1, n2));
                }
            }
        }
        out
    }

    pub fn set_f(&mut self, abcd: [Simple; 4], m: MatrixK) {
        self.fmats.insert(abcd, m);
    }

    /// Inserts identity F-matrices for every square index that has none.
    pub fn fill_identity_f(&mut self) {
        for a in self.simples() {
            for b in self.simples() {
                for c in self.simples() {
                    for d in self.simples() {
                        let l = self.left_basis(a, b, c, d).len();
                        let r = self.right_basis(a, b, c, d).len();
                        if l > 0 && l == r && !self.fmats.contains_key(&[a, b, c, d]) {
                            self.fmats.insert([a, b, c, d], MatrixK::identity(self.field, l));
                        }
                    }
                }
            }
        }
    }

    fn names_of(&self, idx: &[Simple]) -> Vec<String> {
        idx.iter().map(|&s| self.names[s].clone()).collect()
    }
}

/// Structural checks: shapes, invertibility, unit multiplicities and `ρ_1 = λ_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionReport {
    pub simples: usize,
    pub f_blocks: usize,
}

pub fn validate_fusion(c: &FusionData) -> Result<FusionReport, FusionError> {
    let r = c.rank();
    if r == 0 || c.unit >= r {
        return Err(FusionError::UnitRuleViolation("unit label out of range".into()));
    }
    if c.lambda.len() != r || c.rho.len() != r {
        return Err(FusionError::ShapeError { index: vec![], detail: "one unit scalar per simple required".into() });
    }
    for a in c.simples() {
        for b in c.simples() {
            let want = usize::from(a == b);
            if c.n(c.unit, a, b) != want || c.n(a, c.unit, b) != want {
                return Err(FusionError::UnitRuleViolation(format!(
                    "unit multiplicity at ({}, {})",
                    c.names[a], c.names[b]
                )));
            }
        }
        for s in [&c.lambda[a], &c.rho[a]] {
            if s.field() != c.field {
                return Err(FusionError::FieldMismatch(c.field, s.field()));
            }
            if s.is_zero() {
                return Err(FusionError::UnitRuleViolation(format!("unit scalar at {} is zero", c.names[a])));
            }
        }
    }
    if c.lambda[c.unit] != c.rho[c.unit] {
        return Err(FusionError::UnitRuleViolation("bigon: rho of the unit differs from lambda".into()));
    }
    for (idx, m) in &c.fmats {
        if idx.iter().any(|&s| s >= r) {
            return Err(FusionError::ShapeError { index: vec![], detail: format!("index {idx:?} out of range") });
        }
        if m.field() != c.field {
            return Err(FusionError::FieldMismatch(c.field, m.field()));
        }
    }
    let mut blocks = 0;
    for a in c.simples() {
        for b in c.simples() {
            for cc in c.simples() {
                for d in c.simples() {
                    let idx = [a, b, cc, d];
                    let want = (c.left_basis(a, b, cc, d).len(), c.right_basis(a, b, cc, d).len());
                    match c.fmats.get(&idx) {
                        None if want == (0, 0) => {}
                        None => {
                            return Err(FusionError::ShapeError {
                                index: c.names_of(&idx),
                                detail: format!("missing F-matrix of shape {want:?}"),
                            })
                        }
                        Some(m) if m.shape() != want => {
                            return Err(FusionError::ShapeError {
                                index: c.names_of(&idx),
                                detail: format!("shape {:?}, expected {want:?}", m.shape()),
                            })
                        }
                        Some(m) => {
                            if want.0 > 0 {
                                if !m.is_invertible() {
                                    return Err(FusionError::SingularF(c.names_of(&idx)));
                                }
                                blocks += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(FusionReport { simples: r, f_blocks: blocks })
}

/// Validated fusion data with cached F-matrix inverses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    data: FusionData,
    finv: BTreeMap<[Simple; 4], MatrixK>,
}

impl Category {
    pub fn new(data: FusionData) -> Result<Self, FusionError> {
        validate_fusion(&data)?;
        let finv = data
            .fmats
            .iter()
            .filter(|(_, m)| m.rows() > 0)
            .map(|(k, m)| (*k, m.inverse().expect("validated invertible")))
            .collect();
        Ok(Category { data, finv })
    }

    pub fn data(&self) -> &FusionData {
        &self.data
    }

    pub fn into_data(self) -> FusionData {
        self.data
    }

    /// `F^{abc}_d`, or `None` when the hom space is zero.
    pub fn f(&self, a: Simple, b: Simple, c: Simple, d: Simple) -> Option<&MatrixK> {
        self.data.fmats.get(&[a, b, c, d]).filter(|m| m.rows() > 0)
    }

    pub fn f_inv(&self, a: Simple, b: Simple, c: Simple, d: Simple) -> Option<&MatrixK> {
        self.finv.get(&[a, b, c, d])
    }
}

impl Deref for Category {
    type Target = FusionData;
    fn deref(&self) -> &FusionData {
        &self.data
    }
}

/// Paired simples `(a1, a2)` are indexed `a1 * rank2 + a2`.
pub fn deligne_product(a: &Category, b: &Category) -> Result<Category, FusionError> {
    if a.field != b.field {
        return Err(FusionError::FieldMismatch(a.field, b.field));
    }
    let field = a.field;
    let (ra, rb) = (a.rank(), b.rank());
    let pair = |x: Simple, y: Simple| x * rb + y;
    let names = a.simples().flat_map(|x| b.simples().map(move |y| (x, y))).map(|(x, y)| format!("{}|{}", a.names[x], b.names[y])).collect();
    let mut rules = Vec::new();
    for x1 in 0..ra {
        for x2 in 0..ra {
            for x3 in 0..ra {
                for y1 in 0..rb {
                    for y2 in 0..rb {
                        for y3 in 0..rb {
                            let m = a.n(x1, x2, x3) * b.n(y1, y2, y3);
                            if m > 0 {
                                rules.push((pair(x1, y1), pair(x2, y2), pair(x3, y3), m));
                            }
                        }
                    }
                }
            }
        }
    }
    let mut out = FusionData::new(field, names, pair(a.unit, b.unit), &rules);
    for x in 0..ra {
        for y in 0..rb {
            out.lambda[pair(x, y)] = &a.lambda[x] * &b.lambda[y];
            out.rho[pair(x, y)] = &a.rho[x] * &b.rho[y];
        }
    }
    let split = |s: Simple| (s / rb, s % rb);
    for p in out.simples() {
        for q in out.simples() {
            for r in out.simples() {
                for d in out.simples() {
                    let left = out.left_basis(p, q, r, d);
                    let right = out.right_basis(p, q, r, d);
                    if left.is_empty() {
                        continue;
                    }
                    let ((p1, p2), (q1, q2), (r1, r2), (d1, d2)) = (split(p), split(q), split(r), split(d));
                    let (fa, fb) = (a.f(p1, q1, r1, d1), b.f(p2, q2, r2, d2));
                    let (fa, fb) = (fa.expect("nonzero factor"), fb.expect("nonzero factor"));
                    let la = a.left_basis(p1, q1, r1, d1);
                    let lb = b.left_basis(p2, q2, r2, d2);
                    let rra = a.right_basis(p1, q1, r1, d1);
                    let rrb = b.right_basis(p2, q2, r2, d2);
                    // Factor a basis triple of the product into its two components.
                    let locate = |list_a: &[(Simple, usize, usize)],
                                  list_b: &[(Simple, usize, usize)],
                                  m1b: usize,
                                  m2b: usize,
                                  (e, m1, m2): (Simple, usize, usize)| {
                        let (e1, e2) = split(e);
                        let ia = list_a.iter().position(|&t| t == (e1, m1 / m1b, m2 / m2b)).expect("component basis");
                        let ib = list_b.iter().position(|&t| t == (e2, m1 % m1b, m2 % m2b)).expect("component basis");
                        (ia, ib)
                    };
                    let mut m = MatrixK::zeros(field, left.len(), right.len());
                    for (i, &(e, m1, m2)) in left.iter().enumerate() {
                        let (_, e2) = split(e);
                        let (ia, ib) = locate(&la, &lb, b.n(p2, q2, e2), b.n(e2, r2, d2), (e, m1, m2));
                        for (j, &(f, n1, n2)) in right.iter().enumerate() {
                            let (_, f2) = split(f);
                            let (ja, jb) = locate(&rra, &rrb, b.n(q2, r2, f2), b.n(p2, f2, d2), (f, n1, n2));
                            m.set(i, j, fa.get(ia, ja) * fb.get(ib, jb));
                        }
                    }
                    out.set_f([p, q, r, d], m);
                }
            }
        }
    }
    Category::new(out)
}
