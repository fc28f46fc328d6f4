//! Lax monoidal functors, bimodules over them, and finite-dimensional algebras
//! viewed as functors out of the trivial category.
//!
//! A tensor-structure block `F̃_{a,b}` at target simple `z` maps the basis of
//! `Hom(z, F(a) ⊗ F(b))`, ordered `(x, y, k_x, k_y, μ)`, to the basis of
//! `Hom(z, F(a ⊗ b))`, ordered `(c, ν, k)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::arith::{Field, Scalar};
use crate::engine::{Ctx, EngineError, Leg, MergeTable, Side, Step, TransformBlocks};
use crate::fusion::{Category, FusionData, Simple};
use crate::linalg::MatrixK;
use crate::tree::{Dir, Fid, Shape};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunctorError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("hexagon fails at ({0}, {1}, {2})")]
    HexagonViolation(String, String, String),
    #[error("unit square fails at {0} on the {1} side")]
    UnitSquareViolation(String, &'static str),
    #[error("left module hexagon fails at ({0}, {1}, {2})")]
    LeftHexagonViolation(String, String, String),
    #[error("right module hexagon fails at ({0}, {1}, {2})")]
    RightHexagonViolation(String, String, String),
    #[error("middle hexagon fails at ({0}, {1}, {2})")]
    MiddleHexagonViolation(String, String, String),
    #[error("module unit square fails at {0} on the {1} side")]
    UnitViolation(String, &'static str),
    #[error("multiplication is not associative at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("unit is not two-sided at basis vector {0}")]
    NotUnital(usize),
    #[error("not a monoidal natural transformation")]
    NotMonoidalTransformation,
    #[error("field mismatch")]
    FieldMismatch,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A lax monoidal functor between skeletal categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctorData {
    pub source: Arc<Category>,
    pub target: Arc<Category>,
    /// `objmap[c][x]`: copies of `x` in `F(c)`.
    pub objmap: Vec<Vec<usize>>,
    /// Tensor structure blocks keyed by `(a, b, z)`.
    pub ftilde: BTreeMap<(Simple, Simple, Simple), MatrixK>,
    /// `F0: 1 → F(1)`, one entry per copy of the target unit in `F(1)`.
    pub f0: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctorReport {
    pub hexagons: usize,
    pub unit_squares: usize,
    pub strong: bool,
}

/// Functor and merge ids inside a context built from one or more functors.
pub const F_ID: Fid = 0;

impl FunctorData {
    pub fn field(&self) -> Field {
        self.target.field
    }

    pub fn leg(&self, name: &str) -> Leg {
        Leg { name: name.into(), objmap: self.objmap.clone(), unit: Some(self.f0.clone()) }
    }

    pub fn merge_table(&self, out: Fid) -> MergeTable {
        MergeTable { out, blocks: self.ftilde.clone() }
    }

    /// Evaluation context with this functor registered as id 0.
    pub fn ctx(&self) -> Ctx {
        let mut ctx = Ctx::functors(self.source.clone(), self.target.clone());
        let f = ctx.add_leg(self.leg("F"));
        ctx.set_merge(f, f, self.merge_table(f));
        ctx
    }

    /// The identity functor with identity structure maps.
    pub fn identity(c: &Arc<Category>) -> FunctorData {
        let n = c.rank();
        let objmap = (0..n).map(|a| (0..n).map(|x| usize::from(a == x)).collect()).collect();
        let mut f = FunctorData { source: c.clone(), target: c.clone(), objmap, ftilde: BTreeMap::new(), f0: vec![c.field.one()] };
        let ctx = f.ctx();
        for a in c.simples() {
            for b in c.simples() {
                for z in c.simples() {
                    let rows = ctx.dim(&Self::tensor_shape(a, b), z);
                    if rows > 0 {
                        f.ftilde.insert((a, b, z), MatrixK::identity(c.field, rows));
                    }
                }
            }
        }
        f
    }

    fn tensor_shape(a: Simple, b: Simple) -> Shape {
        Shape::node(Shape::apply(F_ID, Shape::Leaf(a)), Shape::apply(F_ID, Shape::Leaf(b)))
    }

    fn image_shape(a: Simple, b: Simple) -> Shape {
        Shape::apply(F_ID, Shape::node(Shape::Leaf(a), Shape::Leaf(b)))
    }

    /// Checks block shapes against the object map.
    pub fn check_shapes(&self) -> Result<(), FunctorError> {
        if self.source.field != self.target.field {
            return Err(FunctorError::FieldMismatch);
        }
        let (ns, nt) = (self.source.rank(), self.target.rank());
        if self.objmap.len() != ns || self.objmap.iter().any(|r| r.len() != nt) {
            return Err(FunctorError::Shape(format!("object map must be {ns} x {nt}")));
        }
        let ones = self.objmap[self.source.unit][self.target.unit];
        if self.f0.len() != ones {
            return Err(FunctorError::Shape(format!("unit map has {} entries, expected {ones}", self.f0.len())));
        }
        let ctx = self.ctx();
        for a in self.source.simples() {
            for b in self.source.simples() {
                for z in self.target.simples() {
                    let want = (ctx.dim(&Self::tensor_shape(a, b), z), ctx.dim(&Self::image_shape(a, b), z));
                    let got = self.ftilde.get(&(a, b, z)).map(MatrixK::shape).unwrap_or((0, 0));
                    let empty = want.0 == 0 || want.1 == 0;
                    if got != want && !(empty && got == (0, 0)) {
                        return Err(FunctorError::Shape(format!(
                            "tensor block ({}, {}, {}) has shape {got:?}, expected {want:?}",
                            self.source.name(a),
                            self.source.name(b),
                            self.target.name(z)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Fills absent tensor blocks whose hom space is nonzero with zero matrices.
    pub fn fill_zero_blocks(&mut self) {
        let ctx = self.ctx();
        for a in self.source.simples() {
            for b in self.source.simples() {
                for z in self.target.simples() {
                    let (r, c) = (ctx.dim(&Self::tensor_shape(a, b), z), ctx.dim(&Self::image_shape(a, b), z));
                    if r > 0 && c > 0 {
                        self.ftilde.entry((a, b, z)).or_insert_with(|| MatrixK::zeros(self.target.field, r, c));
                    }
                }
            }
        }
    }

    pub fn is_strong(&self) -> bool {
        let units = self.f0.len() == 1 && !self.f0[0].is_zero();
        units && self.ftilde.values().all(MatrixK::is_invertible) && {
            let ctx = self.ctx();
            self.source.simples().all(|a| {
                self.source.simples().all(|b| {
                    self.target.simples().all(|z| ctx.dim(&Self::tensor_shape(a, b), z) == ctx.dim(&Self::image_shape(a, b), z))
                })
            })
        }
    }
}

fn names(c: &Category, xs: &[Simple]) -> (String, String, String) {
    let n = |i: usize| xs.get(i).map(|&s| c.name(s).to_string()).unwrap_or_default();
    (n(0), n(1), n(2))
}

fn same_on_all_outputs(ctx: &Ctx, src: &Shape, one: &[Step], two: &[Step]) -> Result<bool, EngineError> {
    for z in ctx.target().simples() {
        if ctx.dim(src, z) == 0 {
            continue;
        }
        if ctx.route_matrix(src, z, one)? != ctx.route_matrix(src, z, two)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn ap(f: Fid, a: Simple) -> Shape {
    Shape::apply(f, Shape::Leaf(a))
}

fn assoc(path: Vec<Dir>) -> Step<'static> {
    Step::Assoc { path, inverse: false }
}

fn merge(path: Vec<Dir>) -> Step<'static> {
    Step::Merge { path }
}

/// Hexagon and unit squares for a functor with id `f` whose tensor structure
/// is registered as the merge `(f, f)`.
pub(crate) fn functor_axioms(ctx: &Ctx, f: Fid) -> Result<(usize, usize), FunctorError> {
    let (src, tgt) = (ctx.source(), ctx.target());
    let hex1 = [merge(vec![Dir::L]), merge(vec![]), assoc(vec![Dir::In])];
    let hex2 = [assoc(vec![]), merge(vec![Dir::R]), merge(vec![])];
    let mut hexagons = 0;
    for a in src.simples() {
        for b in src.simples() {
            for c in src.simples() {
                hexagons += 1;
                let s = Shape::lcomb([ap(f, a), ap(f, b), ap(f, c)]);
                if !same_on_all_outputs(ctx, &s, &hex1, &hex2)? {
                    let (x, y, z) = names(src, &[a, b, c]);
                    return Err(FunctorError::HexagonViolation(x, y, z));
                }
            }
        }
    }
    let mut squares = 0;
    for a in src.simples() {
        for side in [Side::Left, Side::Right] {
            squares += 1;
            let (s, unit_path, tag) = match side {
                Side::Left => (Shape::node(Shape::Unit, ap(f, a)), vec![Dir::L], "left"),
                Side::Right => (Shape::node(ap(f, a), Shape::Unit), vec![Dir::R], "right"),
            };
            let one = [Step::UnitIn { path: unit_path, f }, merge(vec![]), Step::UnitElim { path: vec![Dir::In], side }];
            let two = [Step::UnitElim { path: vec![], side }];
            if !same_on_all_outputs(ctx, &s, &one, &two)? {
                return Err(FunctorError::UnitSquareViolation(src.name(a).to_string(), tag));
            }
        }
    }
    let _ = tgt;
    Ok((hexagons, squares))
}

pub fn verify_functor(f: &FunctorData) -> Result<FunctorReport, FunctorError> {
    f.check_shapes()?;
    let ctx = f.ctx();
    let (hexagons, unit_squares) = functor_axioms(&ctx, F_ID)?;
    Ok(FunctorReport { hexagons, unit_squares, strong: f.is_strong() })
}

/// An `F,F`-bimodule: a functor `M` with actions `μ_l: F(A) ⊗ M(X) → M(A ⊗ X)`
/// and `μ_r: M(X) ⊗ F(B) → M(X ⊗ B)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BimoduleData {
    pub functor: FunctorData,
    pub objmap: Vec<Vec<usize>>,
    pub mul: BTreeMap<(Simple, Simple, Simple), MatrixK>,
    pub mur: BTreeMap<(Simple, Simple, Simple), MatrixK>,
}

/// Id of the module functor in [`BimoduleData::ctx`].
pub const M_ID: Fid = 1;

impl BimoduleData {
    /// `M = F` with both actions given by the tensor structure.
    pub fn regular(f: &FunctorData) -> BimoduleData {
        BimoduleData { functor: f.clone(), objmap: f.objmap.clone(), mul: f.ftilde.clone(), mur: f.ftilde.clone() }
    }

    /// `G` made into an `F,F`-bimodule through `φ: F ⇒ G`:
    /// `μ_l = (φ ⊗ Id) G̃` and `μ_r = (Id ⊗ φ) G̃`.
    pub fn from_transformation(f: &FunctorData, g: &FunctorData, phi: &TransformBlocks) -> Result<BimoduleData, FunctorError> {
        let mut ctx = Ctx::functors(f.source.clone(), f.target.clone());
        let fi = ctx.add_leg(f.leg("F"));
        let gi = ctx.add_leg(g.leg("G"));
        ctx.set_merge(gi, gi, g.merge_table(gi));
        let mut mul = BTreeMap::new();
        let mut mur = BTreeMap::new();
        for a in f.source.simples() {
            for b in f.source.simples() {
                for z in f.target.simples() {
                    let sl = Shape::node(ap(fi, a), ap(gi, b));
                    if ctx.dim(&sl, z) > 0 {
                        let steps = [Step::Transform { path: vec![Dir::L], to: gi, blocks: phi }, merge(vec![])];
                        let m = ctx.route_matrix(&sl, z, &steps)?;
                        if m.cols() > 0 {
                            mul.insert((a, b, z), m);
                        }
                    }
                    let sr = Shape::node(ap(gi, a), ap(fi, b));
                    if ctx.dim(&sr, z) > 0 {
                        let steps = [Step::Transform { path: vec![Dir::R], to: gi, blocks: phi }, merge(vec![])];
                        let m = ctx.route_matrix(&sr, z, &steps)?;
                        if m.cols() > 0 {
                            mur.insert((a, b, z), m);
                        }
                    }
                }
            }
        }
        Ok(BimoduleData { functor: f.clone(), objmap: g.objmap.clone(), mul, mur })
    }

    pub fn leg(&self) -> Leg {
        Leg { name: "M".into(), objmap: self.objmap.clone(), unit: None }
    }

    /// Context with `F` as id 0 and `M` as id 1, and merges for `F̃`, `μ_l`, `μ_r`.
    pub fn ctx(&self) -> Ctx {
        let mut ctx = self.functor.ctx();
        let m = ctx.add_leg(self.leg());
        ctx.set_merge(F_ID, m, MergeTable { out: m, blocks: self.mul.clone() });
        ctx.set_merge(m, F_ID, MergeTable { out: m, blocks: self.mur.clone() });
        ctx
    }

    fn check_shapes(&self, ctx: &Ctx) -> Result<(), FunctorError> {
        let (src, tgt) = (ctx.source(), ctx.target());
        if self.objmap.len() != src.rank() || self.objmap.iter().any(|r| r.len() != tgt.rank()) {
            return Err(FunctorError::Shape("module object map has the wrong size".into()));
        }
        for (table, left, right) in [(&self.mul, F_ID, M_ID), (&self.mur, M_ID, F_ID)] {
            for a in src.simples() {
                for b in src.simples() {
                    for z in tgt.simples() {
                        let rs = Shape::node(ap(left, a), ap(right, b));
                        let cs = Shape::apply(M_ID, Shape::node(Shape::Leaf(a), Shape::Leaf(b)));
                        let want = (ctx.dim(&rs, z), ctx.dim(&cs, z));
                        let got = table.get(&(a, b, z)).map(MatrixK::shape).unwrap_or((0, 0));
                        if got != want && !((want.0 == 0 || want.1 == 0) && got == (0, 0)) {
                            return Err(FunctorError::Shape(format!("action block ({a}, {b}, {z}) has shape {got:?}, expected {want:?}")));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BimoduleReport {
    pub hexagons: usize,
    pub unit_squares: usize,
}

pub fn verify_bimodule(m: &BimoduleData) -> Result<BimoduleReport, FunctorError> {
    let ctx = m.ctx();
    m.check_shapes(&ctx)?;
    let src = ctx.source();
    let (f, mm) = (F_ID, M_ID);
    let mut hexagons = 0;
    let mut squares = 0;
    for a in src.simples() {
        for b in src.simples() {
            for c in src.simples() {
                hexagons += 3;
                let (x, y, z) = names(src, &[a, b, c]);
                let left = Shape::lcomb([ap(f, a), ap(f, b), ap(mm, c)]);
                let one = [merge(vec![Dir::L]), merge(vec![]), assoc(vec![Dir::In])];
                let two = [assoc(vec![]), merge(vec![Dir::R]), merge(vec![])];
                if !same_on_all_outputs(&ctx, &left, &one, &two)? {
                    return Err(FunctorError::LeftHexagonViolation(x, y, z));
                }
                let right = Shape::lcomb([ap(mm, a), ap(f, b), ap(f, c)]);
                if !same_on_all_outputs(&ctx, &right, &one, &two)? {
                    return Err(FunctorError::RightHexagonViolation(x, y, z));
                }
                let middle = Shape::lcomb([ap(f, a), ap(mm, b), ap(f, c)]);
                if !same_on_all_outputs(&ctx, &middle, &one, &two)? {
                    return Err(FunctorError::MiddleHexagonViolation(x, y, z));
                }
            }
        }
    }
    for a in src.simples() {
        squares += 2;
        let s = Shape::node(Shape::Unit, ap(mm, a));
        let one = [Step::UnitIn { path: vec![Dir::L], f }, merge(vec![]), Step::UnitElim { path: vec![Dir::In], side: Side::Left }];
        let two = [Step::UnitElim { path: vec![], side: Side::Left }];
        if !same_on_all_outputs(&ctx, &s, &one, &two)? {
            return Err(FunctorError::UnitViolation(src.name(a).to_string(), "left"));
        }
        let s = Shape::node(ap(mm, a), Shape::Unit);
        let one = [Step::UnitIn { path: vec![Dir::R], f }, merge(vec![]), Step::UnitElim { path: vec![Dir::In], side: Side::Right }];
        let two = [Step::UnitElim { path: vec![], side: Side::Right }];
        if !same_on_all_outputs(&ctx, &s, &one, &two)? {
            return Err(FunctorError::UnitViolation(src.name(a).to_string(), "right"));
        }
    }
    Ok(BimoduleReport { hexagons, unit_squares: squares })
}

/// A finite-dimensional algebra: `e_i e_j = Σ_k m[i][j][k] e_k`, unit `Σ u_k e_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraData {
    pub field: Field,
    pub dim: usize,
    pub m: Vec<Vec<Vec<Scalar>>>,
    pub unit: Vec<Scalar>,
}

impl AlgebraData {
    pub fn product(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![self.field.zero(); self.dim];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let c = xi * yj;
                for (k, o) in out.iter_mut().enumerate() {
                    *o = &*o + &(&c * &self.m[i][j][k]);
                }
            }
        }
        out
    }

    pub fn basis_vector(&self, i: usize) -> Vec<Scalar> {
        (0..self.dim).map(|k| if k == i { self.field.one() } else { self.field.zero() }).collect()
    }

    /// Checks associativity and the two-sided unit.
    pub fn validate(&self) -> Result<(), FunctorError> {
        if self.m.len() != self.dim || self.m.iter().any(|r| r.len() != self.dim || r.iter().any(|v| v.len() != self.dim)) || self.unit.len() != self.dim {
            return Err(FunctorError::Shape("structure constants must be dim x dim x dim".into()));
        }
        let e: Vec<Vec<Scalar>> = (0..self.dim).map(|i| self.basis_vector(i)).collect();
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    let l = self.product(&self.product(&e[i], &e[j]), &e[k]);
                    let r = self.product(&e[i], &self.product(&e[j], &e[k]));
                    if l != r {
                        return Err(FunctorError::NotAssociative(i, j, k));
                    }
                }
            }
        }
        for (i, ei) in e.iter().enumerate() {
            if &self.product(&self.unit, ei) != ei || &self.product(ei, &self.unit) != ei {
                return Err(FunctorError::NotUnital(i));
            }
        }
        Ok(())
    }

    /// The base field as an algebra.
    pub fn ground(field: Field) -> AlgebraData {
        AlgebraData { field, dim: 1, m: vec![vec![vec![field.one()]]], unit: vec![field.one()] }
    }

    /// `k[x]/x²` with basis `1, x`.
    pub fn dual_numbers(field: Field) -> AlgebraData {
        let (o, z) = (field.one(), field.zero());
        let m = vec![vec![vec![o.clone(), z.clone()], vec![z.clone(), o.clone()]], vec![vec![z.clone(), o.clone()], vec![z.clone(), z.clone()]]];
        AlgebraData { field, dim: 2, m, unit: vec![o, z] }
    }

    /// 2×2 matrices with basis `E11, E12, E21, E22`.
    pub fn matrices2(field: Field) -> AlgebraData {
        let idx = |r: usize, c: usize| 2 * r + c;
        let mut m = vec![vec![vec![field.zero(); 4]; 4]; 4];
        for (a, b, c, d) in (0..16).map(|n| (n >> 3 & 1, n >> 2 & 1, n >> 1 & 1, n & 1)) {
            if b == c {
                m[idx(a, b)][idx(c, d)][idx(a, d)] = field.one();
            }
        }
        let mut unit = vec![field.zero(); 4];
        unit[idx(0, 0)] = field.one();
        unit[idx(1, 1)] = field.one();
        AlgebraData { field, dim: 4, m, unit }
    }
}

/// The category with one simple object and trivial structure.
pub fn trivial_category(field: Field) -> Arc<Category> {
    let mut d = FusionData::new(field, vec!["1".into()], 0, &[(0, 0, 0, 1)]);
    d.fill_identity_f();
    Arc::new(Category::new(d).expect("trivial category is valid"))
}

/// The one-object lax monoidal functor of an algebra: `F(1)` has `dim`
/// copies of the unit, `F̃` is the multiplication and `F0` the unit.
pub fn algebra_to_functor(a: &AlgebraData) -> Result<FunctorData, FunctorError> {
    a.validate()?;
    Ok(algebra_functor_unchecked(a))
}

/// The same construction without validating the algebra.
pub fn algebra_functor_unchecked(a: &AlgebraData) -> FunctorData {
    let c = trivial_category(a.field);
    let d = a.dim;
    let mut mt = MatrixK::zeros(a.field, d * d, d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                mt.set(i * d + j, k, a.m[i][j][k].clone());
            }
        }
    }
    let mut ftilde = BTreeMap::new();
    ftilde.insert((0, 0, 0), mt);
    FunctorData { source: c.clone(), target: c, objmap: vec![vec![d]], ftilde, f0: a.unit.clone() }
}

/// Checks `(φ_A ⊗ φ_B) G̃ = F̃ φ_{A⊗B}` and `F0 φ_I = G0`.
pub fn nat_transformation_check(phi: &TransformBlocks, f: &FunctorData, g: &FunctorData) -> Result<bool, FunctorError> {
    let mut ctx = Ctx::functors(f.source.clone(), f.target.clone());
    let fi = ctx.add_leg(f.leg("F"));
    let gi = ctx.add_leg(g.leg("G"));
    ctx.set_merge(fi, fi, f.merge_table(fi));
    ctx.set_merge(gi, gi, g.merge_table(gi));
    for a in f.source.simples() {
        for b in f.source.simples() {
            let s = Shape::node(ap(fi, a), ap(fi, b));
            let one = [
                Step::Transform { path: vec![Dir::L], to: gi, blocks: phi },
                Step::Transform { path: vec![Dir::R], to: gi, blocks: phi },
                merge(vec![]),
            ];
            let two = [merge(vec![]), Step::Transform { path: vec![], to: gi, blocks: phi }];
            if !same_on_all_outputs(&ctx, &s, &one, &two)? {
                return Ok(false);
            }
        }
    }
    let u = f.target.unit;
    let one = ctx.route_matrix(&Shape::Unit, u, &[Step::UnitIn { path: vec![], f: fi }, Step::Transform { path: vec![], to: gi, blocks: phi }])?;
    let two = ctx.route_matrix(&Shape::Unit, u, &[Step::UnitIn { path: vec![], f: gi }])?;
    Ok(one == two)
}

/// Identity transformation blocks of a functor.
pub fn identity_transformation(f: &FunctorData) -> TransformBlocks {
    let mut out = BTreeMap::new();
    for c in f.source.simples() {
        for x in f.target.simples() {
            let k = f.objmap[c][x];
            if k > 0 {
                out.insert((c, x), MatrixK::identity(f.field(), k));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::vec_zn;

    #[test]
    fn identity_functor_passes() {
        let c = Arc::new(vec_zn(Field::Q, 2));
        let r = verify_functor(&FunctorData::identity(&c)).unwrap();
        assert!(r.strong);
        assert_eq!(r.hexagons, 8);
    }

    #[test]
    fn rescaled_structure_needs_inverse_unit() {
        let q = Field::Q;
        let c = Arc::new(vec_zn(q, 2));
        let mut f = FunctorData::identity(&c);
        for m in f.ftilde.values_mut() {
            *m = m.scale(&q.from_i64(3));
        }
        f.f0 = vec![q.ratio(1, 3).unwrap()];
        verify_functor(&f).unwrap();
        f.f0 = vec![q.one()];
        assert!(matches!(verify_functor(&f), Err(FunctorError::UnitSquareViolation(..))));
    }

    #[test]
    fn algebras_become_functors() {
        let q = Field::Q;
        for a in [AlgebraData::ground(q), AlgebraData::dual_numbers(q), AlgebraData::matrices2(Field::fp(3).unwrap())] {
            let f = algebra_to_functor(&a).unwrap();
            verify_functor(&f).unwrap();
            verify_bimodule(&BimoduleData::regular(&f)).unwrap();
        }
        // Basis 1, x, y with x·x = y and x·y = x: (xx)y = 0 but x(xy) = y.
        let mut m = vec![vec![vec![q.zero(); 3]; 3]; 3];
        for i in 0..3 {
            m[0][i][i] = q.one();
            m[i][0][i] = q.one();
        }
        m[1][1][2] = q.one();
        m[1][2][1] = q.one();
        let bad = AlgebraData { field: q, dim: 3, m, unit: vec![q.one(), q.zero(), q.zero()] };
        assert!(matches!(algebra_to_functor(&bad), Err(FunctorError::NotAssociative(..))));
        assert!(matches!(verify_functor(&algebra_functor_unchecked(&bad)), Err(FunctorError::HexagonViolation(..))));
        let mut no_unit = AlgebraData::dual_numbers(q);
        no_unit.unit = vec![q.zero(), q.one()];
        assert!(matches!(algebra_to_functor(&no_unit), Err(FunctorError::NotUnital(_))));
        assert!(matches!(verify_functor(&algebra_functor_unchecked(&no_unit)), Err(FunctorError::UnitSquareViolation(..))));
    }

    #[test]
    fn characters_are_monoidal() {
        let q = Field::Q;
        let c = Arc::new(vec_zn(q, 2));
        let id = FunctorData::identity(&c);
        let chi = |v: i64| -> TransformBlocks {
            [((0, 0), MatrixK::scalar(q.one())), ((1, 1), MatrixK::scalar(q.from_i64(v)))].into_iter().collect()
        };
        assert!(nat_transformation_check(&chi(-1), &id, &id).unwrap());
        assert!(nat_transformation_check(&chi(1), &id, &id).unwrap());
        assert!(!nat_transformation_check(&chi(2), &id, &id).unwrap());
        let m = BimoduleData::from_transformation(&id, &id, &chi(-1)).unwrap();
        verify_bimodule(&m).unwrap();
    }

    #[test]
    fn scaled_right_action_fails() {
        let c = Arc::new(vec_zn(Field::Q, 2));
        let f = FunctorData::identity(&c);
        let mut m = BimoduleData::regular(&f);
        for v in m.mur.values_mut() {
            *v = v.scale(&Field::Q.from_i64(2));
        }
        assert!(matches!(
            verify_bimodule(&m),
            Err(FunctorError::RightHexagonViolation(..) | FunctorError::MiddleHexagonViolation(..) | FunctorError::UnitViolation(..))
        ));
    }
}
