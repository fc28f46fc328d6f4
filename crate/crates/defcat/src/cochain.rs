//! Cochain spaces, coboundaries and products for categories, functors and
//! bimodules, assembled as exact matrices.
//!
//! A degree-`n` cochain has one block per tuple of `n` source simples and
//! output simple `w`. Rows index the basis of `Hom(w, ⊗ of the tuple)` in the
//! left-parenthesized form (images under the functor for functor kinds) and
//! columns the basis of the right-parenthesized form (inside the coefficient
//! functor). Coordinates are laid out block by block in sorted key order,
//! row-major inside each block.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{Field, Scalar};
use crate::complex::{ComplexError, GradedComplex};
use crate::engine::{BlockMap, Coeffs, Ctx, EngineError, SlotIndex, SlotKind, Step};
use crate::functor::{BimoduleData, FunctorData, F_ID, M_ID};
use crate::fusion::{Category, Simple};
use crate::linalg::{LinalgError, MatrixK};
use crate::reassoc::route_between;
use crate::tree::{Dir, Fid, LTree, Shape};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CochainError {
    #[error("operation needs a {0} complex")]
    KindMismatch(&'static str),
    #[error("insertion slot {index} out of range for a cochain of degree {degree}")]
    IndexOutOfRange { index: usize, degree: usize },
    #[error("degree {degree} exceeds the maximum {max}")]
    DegreeOverflow { degree: usize, max: usize },
    #[error("cochain block {0} has the wrong shape")]
    BlockShape(String),
    #[error("vector of length {got} does not fit a space of dimension {want}")]
    Length { got: usize, want: usize },
    #[error("no coherence route from {0} to {1}")]
    NoRoute(String, String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The coefficient pattern of a cochain space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CochainKind {
    Category,
    Functor,
    Bimodule,
}

impl CochainKind {
    pub fn name(self) -> &'static str {
        match self {
            CochainKind::Category => "category",
            CochainKind::Functor => "functor",
            CochainKind::Bimodule => "bimodule",
        }
    }
}

/// A cochain as explicit blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain {
    pub degree: usize,
    pub blocks: BlockMap,
}

impl Cochain {
    pub fn zero(degree: usize) -> Cochain {
        Cochain { degree, blocks: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(MatrixK::is_zero)
    }
}

/// Position of one block inside the coordinate vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSlot {
    pub tuple: Vec<Simple>,
    pub out: Simple,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

#[derive(Debug, Clone)]
pub struct CochainSpace {
    pub degree: usize,
    pub slots: Vec<BlockSlot>,
    pub index: SlotIndex,
    pub dim: usize,
    field: Field,
}

impl CochainSpace {
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn zero_vector(&self) -> Vec<Scalar> {
        vec![self.field.zero(); self.dim]
    }

    pub fn slot(&self, tuple: &[Simple], out: Simple) -> Option<&BlockSlot> {
        let &(offset, _) = self.index.get(&(tuple.to_vec(), out))?;
        self.slots.iter().find(|s| s.offset == offset && s.out == out && s.tuple == tuple)
    }

    pub fn to_cochain(&self, v: &[Scalar]) -> Result<Cochain, CochainError> {
        if v.len() != self.dim {
            return Err(CochainError::Length { got: v.len(), want: self.dim });
        }
        let mut blocks = BTreeMap::new();
        for s in &self.slots {
            let data = v[s.offset..s.offset + s.rows * s.cols].to_vec();
            blocks.insert((s.tuple.clone(), s.out), MatrixK::new(self.field, s.rows, s.cols, data)?);
        }
        Ok(Cochain { degree: self.degree, blocks })
    }

    /// Coordinates of a cochain; absent blocks count as zero.
    pub fn vector(&self, c: &Cochain) -> Result<Vec<Scalar>, CochainError> {
        let mut v = self.zero_vector();
        for ((tuple, out), m) in &c.blocks {
            let Some(s) = self.slot(tuple, *out) else {
                if m.is_zero() {
                    continue;
                }
                return Err(CochainError::BlockShape(format!("{tuple:?} -> {out}")));
            };
            if m.shape() != (s.rows, s.cols) {
                return Err(CochainError::BlockShape(format!("{tuple:?} -> {out}")));
            }
            v[s.offset..s.offset + s.rows * s.cols].clone_from_slice(m.entries());
        }
        Ok(v)
    }

    /// Human-readable coordinate names: `tuple->out[row,col]`.
    pub fn labels(&self, names: &dyn Fn(Simple) -> String, out_names: &dyn Fn(Simple) -> String) -> Vec<String> {
        let mut out = Vec::with_capacity(self.dim);
        for s in &self.slots {
            let t: Vec<String> = s.tuple.iter().map(|&a| names(a)).collect();
            for r in 0..s.rows {
                for c in 0..s.cols {
                    out.push(format!("({})->{}[{r},{c}]", t.join(","), out_names(s.out)));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Nat,
    Functor { input: Fid, output: Fid },
}

/// Everything needed to evaluate cochains of one kind: an evaluation context
/// and the shape of the cochain slots.
#[derive(Debug, Clone)]
pub struct CochainModel {
    ctx: Ctx,
    slot: Slot,
    kind: CochainKind,
}

/// Path of item `j` inside a left comb of `n` items.
pub fn lcomb_item_path(n: usize, j: usize) -> Vec<Dir> {
    if n <= 1 {
        return Vec::new();
    }
    if j == 0 {
        return vec![Dir::L; n - 1];
    }
    let mut p = vec![Dir::L; n - 1 - j];
    p.push(Dir::R);
    p
}

fn tuples(rank: usize, n: usize) -> Vec<Vec<Simple>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out.into_iter().flat_map(|t| (0..rank).map(move |a| [t.clone(), vec![a]].concat())).collect();
    }
    out
}

fn sign(field: Field, negative: bool) -> Scalar {
    if negative {
        field.from_i64(-1)
    } else {
        field.one()
    }
}

type Route<'a> = (Scalar, Vec<Step<'a>>);

impl CochainModel {
    pub fn category(c: Arc<Category>) -> CochainModel {
        CochainModel { ctx: Ctx::category(c), slot: Slot::Nat, kind: CochainKind::Category }
    }

    pub fn functor(f: &FunctorData) -> CochainModel {
        CochainModel { ctx: f.ctx(), slot: Slot::Functor { input: F_ID, output: F_ID }, kind: CochainKind::Functor }
    }

    pub fn bimodule(m: &BimoduleData) -> CochainModel {
        CochainModel { ctx: m.ctx(), slot: Slot::Functor { input: F_ID, output: M_ID }, kind: CochainKind::Bimodule }
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn kind(&self) -> CochainKind {
        self.kind
    }

    pub fn field(&self) -> Field {
        self.ctx.field()
    }

    /// Category whose simples label the tuple entries.
    pub fn source(&self) -> &Category {
        self.ctx.source()
    }

    fn arg(&self, a: Simple) -> Shape {
        match self.slot {
            Slot::Nat => Shape::Leaf(a),
            Slot::Functor { input, .. } => Shape::apply(input, Shape::Leaf(a)),
        }
    }

    fn args(&self, tuple: &[Simple]) -> Vec<Shape> {
        tuple.iter().map(|&a| self.arg(a)).collect()
    }

    pub fn src_shape(&self, tuple: &[Simple]) -> Shape {
        Shape::lcomb(self.args(tuple))
    }

    pub fn dst_shape(&self, tuple: &[Simple]) -> Shape {
        let r = Shape::rcomb(Shape::leaves_of(tuple));
        match self.slot {
            Slot::Nat => r,
            Slot::Functor { output, .. } => Shape::apply(output, r),
        }
    }

    fn inner(&self) -> Vec<Dir> {
        match self.slot {
            Slot::Nat => Vec::new(),
            Slot::Functor { .. } => vec![Dir::In],
        }
    }

    fn is_functor(&self) -> bool {
        matches!(self.slot, Slot::Functor { .. })
    }

    fn slot_step<'a>(&self, path: Vec<Dir>, arity: usize, coeffs: Coeffs<'a>) -> Step<'a> {
        let kind = match self.slot {
            Slot::Nat => SlotKind::Nat,
            Slot::Functor { input, output } => SlotKind::Functor { input, output },
        };
        Step::Cochain { path, arity, kind, coeffs }
    }

    fn route(&self, src: &Shape, dst: &Shape, base: &[Dir]) -> Result<Vec<Step<'static>>, CochainError> {
        route_between(src, dst, base).ok_or_else(|| CochainError::NoRoute(format!("{src:?}"), format!("{dst:?}")))
    }

    /// Appends the reassociation from the current shape to the normal target.
    fn finish<'a>(&self, tuple: &[Simple], mut steps: Vec<Step<'a>>) -> Result<Vec<Step<'a>>, CochainError> {
        let cur = self.ctx.route_shape(&self.src_shape(tuple), &steps)?;
        let tail = self.route(&cur, &self.dst_shape(tuple), &self.inner())?;
        steps.extend(tail);
        Ok(steps)
    }

    pub fn space(&self, n: usize) -> CochainSpace {
        let src = self.source();
        let tgt = self.ctx.target();
        let mut slots = Vec::new();
        let mut index = HashMap::new();
        let mut offset = 0;
        for tuple in tuples(src.rank(), n) {
            let (s, d) = (self.src_shape(&tuple), self.dst_shape(&tuple));
            for w in tgt.simples() {
                let (rows, cols) = (self.ctx.dim(&s, w), self.ctx.dim(&d, w));
                if rows == 0 || cols == 0 {
                    continue;
                }
                index.insert((tuple.clone(), w), (offset, cols));
                slots.push(BlockSlot { tuple: tuple.clone(), out: w, rows, cols, offset });
                offset += rows * cols;
            }
        }
        CochainSpace { degree: n, slots, index, dim: offset, field: self.field() }
    }

    /// Face routes of the coboundary at a tuple of length `n + 1`, tagged by
    /// face index: `0` acts on the last `n` arguments, `i` in `1..=n` merges
    /// arguments `i - 1` and `i`, and `n + 1` acts on the first `n`.
    pub fn face_routes<'a>(&self, tuple: &[Simple], coeffs: Coeffs<'a>) -> Result<Vec<(usize, Vec<Step<'a>>)>, CochainError> {
        let n = tuple.len() - 1;
        let src = self.src_shape(tuple);
        let args = self.args(tuple);
        let mut out = Vec::with_capacity(n + 2);

        let first = Shape::node(args[0].clone(), Shape::lcomb(args[1..].iter().cloned()));
        let mut s: Vec<Step<'a>> = self.route(&src, &first, &[])?;
        s.push(self.slot_step(vec![Dir::R], n, coeffs));
        if self.is_functor() {
            s.push(Step::Merge { path: vec![] });
        }
        out.push((0, self.finish(tuple, s)?));

        for i in 1..=n {
            let mut items: Vec<Shape> = args[..i - 1].to_vec();
            items.push(Shape::node(args[i - 1].clone(), args[i].clone()));
            items.extend(args[i + 1..].iter().cloned());
            let mut s: Vec<Step<'a>> = self.route(&src, &Shape::lcomb(items), &[])?;
            if self.is_functor() {
                s.push(Step::Merge { path: lcomb_item_path(n, i - 1) });
            }
            s.push(self.slot_step(vec![], n, coeffs));
            out.push((i, self.finish(tuple, s)?));
        }

        let last = Shape::node(Shape::lcomb(args[..n].iter().cloned()), args[n].clone());
        let mut s: Vec<Step<'a>> = self.route(&src, &last, &[])?;
        s.push(self.slot_step(vec![Dir::L], n, coeffs));
        if self.is_functor() {
            s.push(Step::Merge { path: vec![] });
        }
        out.push((n + 1, self.finish(tuple, s)?));
        Ok(out)
    }

    /// Assembles the matrix of a linear map into `dst` from routes that carry
    /// one symbolic cochain step over a source space of dimension `src_dim`.
    pub fn assemble<'a, F>(&self, dst: &CochainSpace, src_dim: usize, routes: F) -> Result<MatrixK, CochainError>
    where
        F: Fn(&BlockSlot) -> Result<Vec<Route<'a>>, CochainError> + Sync,
    {
        let parts: Vec<Vec<(usize, usize, Scalar)>> = dst
            .slots
            .par_iter()
            .map(|slot| {
                let src = self.src_shape(&slot.tuple);
                let mut entries = Vec::new();
                for (coef, steps) in routes(slot)? {
                    for (r, c, coord, v) in self.ctx.route_symbolic(&src, slot.out, &steps)? {
                        entries.push((slot.offset + r * slot.cols + c, coord, &coef * &v));
                    }
                }
                Ok(entries)
            })
            .collect::<Result<_, CochainError>>()?;
        let mut m = MatrixK::zeros(self.field(), dst.dim, src_dim);
        for (r, c, v) in parts.into_iter().flatten() {
            m.add_at(r, c, &v);
        }
        Ok(m)
    }

    /// Evaluates concrete routes block by block into a cochain of `dst`.
    fn evaluate<'a, F>(&self, dst: &CochainSpace, routes: F) -> Result<Cochain, CochainError>
    where
        F: Fn(&BlockSlot) -> Result<Vec<Route<'a>>, CochainError> + Sync,
    {
        let blocks: Vec<((Vec<Simple>, Simple), MatrixK)> = dst
            .slots
            .par_iter()
            .map(|slot| {
                let src = self.src_shape(&slot.tuple);
                let mut acc = MatrixK::zeros(self.field(), slot.rows, slot.cols);
                for (coef, steps) in routes(slot)? {
                    let m = self.ctx.route_matrix(&src, slot.out, &steps)?;
                    acc = acc.add(&m.scale(&coef))?;
                }
                Ok(((slot.tuple.clone(), slot.out), acc))
            })
            .collect::<Result<_, CochainError>>()?;
        Ok(Cochain { degree: dst.degree, blocks: blocks.into_iter().collect() })
    }

    /// Matrix of face `i` from degree `n` to degree `n + 1`.
    pub fn face_matrix(&self, n: usize, i: usize) -> Result<MatrixK, CochainError> {
        let src = self.space(n);
        let dst = self.space(n + 1);
        let coeffs = Coeffs::Symbolic(&src.index);
        let one = self.field().one();
        self.assemble(&dst, src.dim, |slot| {
            Ok(self.face_routes(&slot.tuple, coeffs)?.into_iter().filter(|(k, _)| *k == i).map(|(_, s)| (one.clone(), s)).collect())
        })
    }

    /// Matrix of the coboundary from degree `n` to degree `n + 1`.
    pub fn coboundary_matrix(&self, n: usize) -> Result<MatrixK, CochainError> {
        let src = self.space(n);
        let dst = self.space(n + 1);
        let coeffs = Coeffs::Symbolic(&src.index);
        let f = self.field();
        self.assemble(&dst, src.dim, |slot| {
            Ok(self.face_routes(&slot.tuple, coeffs)?.into_iter().map(|(i, s)| (sign(f, i % 2 == 1), s)).collect())
        })
    }

    /// Coboundary of a concrete cochain, evaluated route by route.
    pub fn coboundary(&self, phi: &Cochain) -> Result<Cochain, CochainError> {
        let dst = self.space(phi.degree + 1);
        let coeffs = Coeffs::Concrete(&phi.blocks);
        let f = self.field();
        self.evaluate(&dst, |slot| {
            Ok(self.face_routes(&slot.tuple, coeffs)?.into_iter().map(|(i, s)| (sign(f, i % 2 == 1), s)).collect())
        })
    }

    /// The complex in degrees `0..=top`.
    pub fn complex(&self, top: usize) -> Result<GradedComplex, CochainError> {
        let dims = (0..=top).map(|n| self.space(n).dim).collect();
        let diffs = (0..top).map(|n| self.coboundary_matrix(n)).collect::<Result<_, _>>()?;
        Ok(GradedComplex::new(self.field(), 0, dims, diffs)?)
    }

    fn require_products(&self) -> Result<(), CochainError> {
        match self.kind {
            CochainKind::Bimodule => Err(CochainError::KindMismatch("category or functor")),
            _ => Ok(()),
        }
    }

    /// `G ∪ H`: `G` on the first arguments tensored with `H` on the rest.
    pub fn cup(&self, g: &Cochain, h: &Cochain) -> Result<Cochain, CochainError> {
        self.require_products()?;
        let (p, q) = (g.degree, h.degree);
        let dst = self.space(p + q);
        let one = self.field().one();
        self.evaluate(&dst, |slot| {
            let args = self.args(&slot.tuple);
            let target = Shape::node(Shape::lcomb(args[..p].iter().cloned()), Shape::lcomb(args[p..].iter().cloned()));
            let mut s: Vec<Step> = self.route(&self.src_shape(&slot.tuple), &target, &[])?;
            s.push(self.slot_step(vec![Dir::L], p, Coeffs::Concrete(&g.blocks)));
            s.push(self.slot_step(vec![Dir::R], q, Coeffs::Concrete(&h.blocks)));
            if self.is_functor() {
                s.push(Step::Merge { path: vec![] });
            }
            Ok(vec![(one.clone(), self.finish(&slot.tuple, s)?)])
        })
    }

    /// `⟨G, H⟩^{(i)}`: `H` evaluated on the arguments `i..i + deg H`, and `G`
    /// applied with that block as its `i`-th argument.
    pub fn prelie_component(&self, g: &Cochain, h: &Cochain, i: usize) -> Result<Cochain, CochainError> {
        self.require_products()?;
        let (m, n) = (g.degree, h.degree);
        if i >= m {
            return Err(CochainError::IndexOutOfRange { index: i, degree: m });
        }
        let dst = self.space(m + n - 1);
        let one = self.field().one();
        self.evaluate(&dst, |slot| {
            let args = self.args(&slot.tuple);
            let mut items: Vec<Shape> = args[..i].to_vec();
            items.push(Shape::lcomb(args[i..i + n].iter().cloned()));
            items.extend(args[i + n..].iter().cloned());
            let mut s: Vec<Step> = self.route(&self.src_shape(&slot.tuple), &Shape::lcomb(items), &[])?;
            s.push(self.slot_step(lcomb_item_path(m, i), n, Coeffs::Concrete(&h.blocks)));
            s.push(self.slot_step(vec![], m, Coeffs::Concrete(&g.blocks)));
            Ok(vec![(one.clone(), self.finish(&slot.tuple, s)?)])
        })
    }

    /// `⟨G, H⟩ = Σ_i (-1)^{i (deg H - 1)} ⟨G, H⟩^{(i)}`.
    pub fn composition_product(&self, g: &Cochain, h: &Cochain) -> Result<Cochain, CochainError> {
        let space = self.space(g.degree + h.degree - 1);
        let mut acc = space.zero_vector();
        for i in 0..g.degree {
            let c = space.vector(&self.prelie_component(g, h, i)?)?;
            let s = sign(self.field(), (i * (h.degree + 1)) % 2 == 1);
            for (a, x) in acc.iter_mut().zip(&c) {
                *a = &*a + &(&s * x);
            }
        }
        space.to_cochain(&acc)
    }

    /// `[G, H] = ⟨G, H⟩ - (-1)^{(deg G - 1)(deg H - 1)} ⟨H, G⟩`.
    pub fn bracket(&self, g: &Cochain, h: &Cochain) -> Result<Cochain, CochainError> {
        let space = self.space(g.degree + h.degree - 1);
        let a = space.vector(&self.composition_product(g, h)?)?;
        let b = space.vector(&self.composition_product(h, g)?)?;
        let s = sign(self.field(), (g.degree + 1) * (h.degree + 1) % 2 == 1);
        let v: Vec<Scalar> = a.iter().zip(&b).map(|(x, y)| x - &(&s * y)).collect();
        space.to_cochain(&v)
    }

    fn functor_id(&self) -> Result<Fid, CochainError> {
        match (self.kind, self.slot) {
            (CochainKind::Functor, Slot::Functor { input, .. }) => Ok(input),
            _ => Err(CochainError::KindMismatch("functor")),
        }
    }

    /// Matrix of `x ↦ ⌈F(x)⌉` from source-category cochains of degree `n`.
    pub fn lift_source_matrix(&self, n: usize, source: &CochainModel) -> Result<MatrixK, CochainError> {
        let f = self.functor_id()?;
        let src = source.space(n);
        let dst = self.space(n);
        let one = self.field().one();
        self.assemble(&dst, src.dim, |slot| {
            let mut s: Vec<Step> = Vec::new();
            if n == 0 {
                s.push(Step::UnitIn { path: vec![], f });
            }
            for depth in (0..n.saturating_sub(1)).rev() {
                s.push(Step::Merge { path: vec![Dir::L; depth] });
            }
            s.push(Step::Cochain { path: vec![Dir::In], arity: n, kind: SlotKind::Nat, coeffs: Coeffs::Symbolic(&src.index) });
            Ok(vec![(one.clone(), self.finish(&slot.tuple, s)?)])
        })
    }

    /// Matrix of `x ↦ ⌈x_{F•}⌉` from target-category cochains of degree `n`.
    pub fn lift_target_matrix(&self, n: usize, target: &CochainModel) -> Result<MatrixK, CochainError> {
        let f = self.functor_id()?;
        let src = target.space(n);
        let dst = self.space(n);
        let one = self.field().one();
        self.assemble(&dst, src.dim, |slot| {
            let mut s: Vec<Step> = vec![Step::Cochain { path: vec![], arity: n, kind: SlotKind::Nat, coeffs: Coeffs::Symbolic(&src.index) }];
            if n == 0 {
                s.push(Step::UnitIn { path: vec![], f });
            }
            for depth in (0..n.saturating_sub(1)).rev() {
                s.push(Step::Merge { path: vec![Dir::R; depth] });
            }
            Ok(vec![(one.clone(), self.finish(&slot.tuple, s)?)])
        })
    }

    /// Matrix of `φ ↦ φ_{X_1, I, X_2, …}` from degree `n + 1` to degree `n`,
    /// inserting the unit map of the input functor in the second slot.
    pub fn unit_insertion_matrix(&self, n: usize) -> Result<MatrixK, CochainError> {
        let Slot::Functor { input, .. } = self.slot else { return Err(CochainError::KindMismatch("functor or bimodule")) };
        let src = self.space(n + 1);
        let dst = self.space(n);
        let one = self.field().one();
        self.assemble(&dst, src.dim, |slot| {
            let mut items = self.args(&slot.tuple);
            items.insert(1.min(items.len()), Shape::Unit);
            let mut s: Vec<Step> = self.route(&self.src_shape(&slot.tuple), &Shape::lcomb(items), &[])?;
            s.push(Step::UnitIn { path: lcomb_item_path(n + 1, 1.min(n)), f: input });
            s.push(self.slot_step(vec![], n + 1, Coeffs::Symbolic(&src.index)));
            Ok(vec![(one.clone(), self.finish(&slot.tuple, s)?)])
        })
    }
}

/// Splits a basis tree of a Deligne square into its two factor trees.
fn project(tree: &LTree, c: &Category, first: bool) -> LTree {
    let rb = c.rank();
    let comp = |p: Simple| if first { p / rb } else { p % rb };
    match tree {
        LTree::Leaf(p) => LTree::Leaf(comp(*p)),
        LTree::Unit(p) => LTree::Unit(comp(*p)),
        LTree::Node { t, mu, l, r } => {
            let nb = c.n(l.label() % rb, r.label() % rb, t % rb);
            let m = if first { mu / nb } else { mu % nb };
            LTree::node(comp(*t), m, project(l, c, first), project(r, c, first))
        }
        LTree::Apply { .. } => unreachable!("category trees carry no functor nodes"),
    }
}

/// Matrix of `Δ(φ) = φ ⊠ ⌈Id⌉ + ⌈Id⌉ ⊠ φ` from `X^n(C)` to `X^n(C ⊠ C)`.
/// `square` must be the category model of the Deligne square of `base`'s category.
pub fn diagonal_matrix(base: &CochainModel, square: &CochainModel, n: usize) -> Result<MatrixK, CochainError> {
    if base.kind != CochainKind::Category || square.kind != CochainKind::Category {
        return Err(CochainError::KindMismatch("category"));
    }
    let c = base.ctx.target();
    let rb = c.rank();
    let src = base.space(n);
    let dst = square.space(n);
    let f = base.field();
    let basis_index = |shape: &Shape, w: Simple| -> HashMap<LTree, usize> {
        base.ctx.basis_trees(0, shape, w).into_iter().enumerate().map(|(i, t)| (t, i)).collect()
    };
    let mut m = MatrixK::zeros(f, dst.dim, src.dim);
    for slot in &dst.slots {
        let halves: Vec<(Vec<Simple>, Simple)> = [true, false]
            .iter()
            .map(|&first| (slot.tuple.iter().map(|&p| if first { p / rb } else { p % rb }).collect(), if first { slot.out / rb } else { slot.out % rb }))
            .collect();
        let mut reassoc = Vec::new();
        let mut rows_idx = Vec::new();
        let mut cols_idx = Vec::new();
        for (t, w) in &halves {
            let (s, d) = (base.src_shape(t), base.dst_shape(t));
            let steps = base.route(&s, &d, &[])?;
            reassoc.push(base.ctx.route_matrix(&s, *w, &steps)?);
            rows_idx.push(basis_index(&s, *w));
            cols_idx.push(basis_index(&d, *w));
        }
        let rows = square.ctx.basis_trees(0, &square.src_shape(&slot.tuple), slot.out);
        let cols = square.ctx.basis_trees(0, &square.dst_shape(&slot.tuple), slot.out);
        for (r, rt) in rows.iter().enumerate() {
            let (r1, r2) = (rows_idx[0][&project(rt, c, true)], rows_idx[1][&project(rt, c, false)]);
            for (k, ct) in cols.iter().enumerate() {
                let (c1, c2) = (cols_idx[0][&project(ct, c, true)], cols_idx[1][&project(ct, c, false)]);
                let row = slot.offset + r * slot.cols + k;
                for (h, (own, other)) in [((r1, c1), (r2, c2)), ((r2, c2), (r1, c1))].into_iter().enumerate() {
                    let Some(s) = src.slot(&halves[h].0, halves[h].1) else { continue };
                    let coef = reassoc[1 - h].get(other.0, other.1);
                    if !coef.is_zero() {
                        m.add_at(row, s.offset + own.0 * s.cols + own.1, coef);
                    }
                }
            }
        }
    }
    Ok(m)
}

/// The associator of a category as a degree-3 cochain.
pub fn associator_cochain(c: &Category) -> Cochain {
    let mut blocks = BTreeMap::new();
    for (&[a, b, cc, d], m) in &c.fmats {
        if m.rows() > 0 && m.cols() > 0 {
            blocks.insert((vec![a, b, cc], d), m.clone());
        }
    }
    Cochain { degree: 3, blocks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{fibonacci_gf19, vec_z2_sign, vec_zn};

    fn seq(field: Field, n: usize, seed: i64) -> Vec<Scalar> {
        (0..n as i64).map(|i| field.from_i64((i * 7 + seed * 13 + i * i * 3) % 11 - 5)).collect()
    }

    #[test]
    fn vec_z2_dimensions() {
        let m = CochainModel::category(Arc::new(vec_zn(Field::Q, 2)));
        for n in 0..5 {
            assert_eq!(m.space(n).dim, 1 << n);
        }
    }

    #[test]
    fn group_differential_on_vec_z3() {
        // δφ(a0..an) = φ(a1..an) + Σ(-1)^i φ(..a_{i-1}a_i..) + (-1)^{n+1} φ(a0..a_{n-1}).
        let q = Field::Q;
        let m = CochainModel::category(Arc::new(vec_zn(q, 3)));
        for n in 0..3 {
            let d = m.coboundary_matrix(n).unwrap();
            let src = m.space(n);
            let dst = m.space(n + 1);
            for t in &dst.slots {
                let a = &t.tuple;
                let mut want = vec![q.zero(); src.dim];
                let mut add = |tuple: Vec<Simple>, s: i64| {
                    let out = tuple.iter().sum::<usize>() % 3;
                    let slot = src.slot(&tuple, out).unwrap();
                    want[slot.offset] = &want[slot.offset] + &q.from_i64(s);
                };
                add(a[1..].to_vec(), 1);
                for i in 1..=n {
                    let mut t2 = a[..i - 1].to_vec();
                    t2.push((a[i - 1] + a[i]) % 3);
                    t2.extend(&a[i + 1..]);
                    add(t2, if i % 2 == 1 { -1 } else { 1 });
                }
                add(a[..n].to_vec(), if n % 2 == 0 { -1 } else { 1 });
                assert_eq!(d.row(t.offset), &want[..], "degree {n} tuple {a:?}");
            }
        }
    }

    #[test]
    fn matrix_and_route_coboundaries_agree() {
        let c = Arc::new(fibonacci_gf19());
        let m = CochainModel::category(c);
        for n in 0..3 {
            let d = m.coboundary_matrix(n).unwrap();
            let src = m.space(n);
            let v = seq(m.field(), src.dim, n as i64);
            let by_route = m.space(n + 1).vector(&m.coboundary(&src.to_cochain(&v).unwrap()).unwrap()).unwrap();
            assert_eq!(d.mul_vec(&v).unwrap(), by_route);
        }
    }

    #[test]
    fn squares_vanish() {
        for c in [vec_z2_sign(Field::Q), fibonacci_gf19()] {
            let m = CochainModel::category(Arc::new(c));
            m.complex(4).unwrap();
        }
    }

    #[test]
    fn associator_is_a_cocycle_only_when_trivial_over_gf2() {
        let f2 = Field::fp(2).unwrap();
        let m = CochainModel::category(Arc::new(vec_zn(f2, 2)));
        let h3 = m.complex(4).unwrap().cohomology(3).unwrap();
        assert_eq!(h3.dim, 1);
    }
}
