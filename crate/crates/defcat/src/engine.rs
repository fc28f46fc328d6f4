//! Evaluation of structural morphisms on splitting-tree bases.
//!
//! A [`Ctx`] holds up to two category levels (level 0 is the target, level 1
//! the source of the registered functors), the functors' object maps and unit
//! maps, and the tensor structure maps that merge two functor leaves into one.
//! A morphism is a sequence of [`Step`]s; its matrix has the source basis as
//! rows and composes left to right.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::arith::{Field, Scalar};
use crate::fusion::{Category, Simple};
use crate::linalg::MatrixK;
use crate::tree::{Dir, Fid, LTree, Shape};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("step {step} does not apply to shape {shape}")]
    ShapeMismatch { step: String, shape: String },
    #[error("no category at level {0}")]
    MissingLevel(usize),
    #[error("no tensor structure for functor pair ({0}, {1})")]
    MissingMerge(Fid, Fid),
    #[error("functor {0} has no unit map")]
    MissingUnit(Fid),
    #[error("unknown functor {0}")]
    UnknownFunctor(Fid),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// The unit sits on the left: `I ⊗ X`.
    Left,
    Right,
}

/// Per `(tuple, output)` block matrices of a cochain.
pub type BlockMap = BTreeMap<(Vec<Simple>, Simple), MatrixK>;

/// Coordinate layout of a cochain space: block key to `(offset, cols)`.
pub type SlotIndex = HashMap<(Vec<Simple>, Simple), (usize, usize)>;

/// Block data of a natural transformation between two functors: `(c, x)` to
/// a matrix from the copies of `x` in `F(c)` to those in `G(c)`.
pub type TransformBlocks = BTreeMap<(Simple, Simple), MatrixK>;

#[derive(Debug, Clone, Copy)]
pub enum Coeffs<'a> {
    Concrete(&'a BlockMap),
    /// Leaves the coefficient as a coordinate tag of the given space.
    Symbolic(&'a SlotIndex),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    /// A category cochain `Lcomb(T_i) → Rcomb(T_i)` at the level of the path.
    Nat,
    /// A functor cochain `Lcomb(F(T_i)) → M(Rcomb(T_i))`.
    Functor { input: Fid, output: Fid },
}

#[derive(Debug, Clone)]
pub enum Step<'a> {
    Assoc { path: Vec<Dir>, inverse: bool },
    Merge { path: Vec<Dir> },
    UnitIn { path: Vec<Dir>, f: Fid },
    UnitElim { path: Vec<Dir>, side: Side },
    UnitIntro { path: Vec<Dir>, side: Side },
    Cochain { path: Vec<Dir>, arity: usize, kind: SlotKind, coeffs: Coeffs<'a> },
    Transform { path: Vec<Dir>, to: Fid, blocks: &'a TransformBlocks },
    /// An explicit morphism whose source shape must match the subtree exactly.
    Block { path: Vec<Dir>, morph: &'a BlockMorphism },
    Scale(Scalar),
}

/// A morphism between two fixed shapes, one matrix per output simple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMorphism {
    pub src: Shape,
    pub dst: Shape,
    pub blocks: BTreeMap<Simple, MatrixK>,
}

impl Step<'_> {
    pub fn path(&self) -> &[Dir] {
        match self {
            Step::Assoc { path, .. }
            | Step::Merge { path }
            | Step::UnitIn { path, .. }
            | Step::UnitElim { path, .. }
            | Step::UnitIntro { path, .. }
            | Step::Cochain { path, .. }
            | Step::Transform { path, .. }
            | Step::Block { path, .. } => path,
            Step::Scale(_) => &[],
        }
    }

    pub fn name(&self) -> String {
        match self {
            Step::Assoc { inverse, .. } => if *inverse { "assoc-inverse" } else { "assoc" }.into(),
            Step::Merge { .. } => "merge".into(),
            Step::UnitIn { .. } => "unit-in".into(),
            Step::UnitElim { .. } => "unit-elim".into(),
            Step::UnitIntro { .. } => "unit-intro".into(),
            Step::Cochain { arity, .. } => format!("cochain/{arity}"),
            Step::Transform { .. } => "transform".into(),
            Step::Block { .. } => "block".into(),
            Step::Scale(_) => "scale".into(),
        }
    }

    /// Shift the step below a prefix path.
    pub fn under(mut self, prefix: &[Dir]) -> Self {
        let p = match &mut self {
            Step::Assoc { path, .. }
            | Step::Merge { path }
            | Step::UnitIn { path, .. }
            | Step::UnitElim { path, .. }
            | Step::UnitIntro { path, .. }
            | Step::Cochain { path, .. }
            | Step::Transform { path, .. }
            | Step::Block { path, .. } => path,
            Step::Scale(_) => return self,
        };
        let mut full = prefix.to_vec();
        full.append(p);
        *p = full;
        self
    }
}

/// Object map and unit map of one functor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leg {
    pub name: String,
    /// `objmap[c][x]`: copies of target simple `x` in the image of source simple `c`.
    pub objmap: Vec<Vec<usize>>,
    /// Image of the target unit in the copies of `1` inside the image of `1`.
    pub unit: Option<Vec<Scalar>>,
}

/// A tensor structure `F1(A) ⊗ F2(B) → Out(A ⊗ B)`, per `(a, b, z)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeTable {
    pub out: Fid,
    pub blocks: BTreeMap<(Simple, Simple, Simple), MatrixK>,
}

struct Basis {
    items: Vec<LTree>,
    index: HashMap<LTree, usize>,
}

type Terms = HashMap<(LTree, u32), Scalar>;
const UNTAGGED: u32 = u32::MAX;

pub struct Ctx {
    levels: Vec<Arc<Category>>,
    legs: Vec<Leg>,
    merges: BTreeMap<(Fid, Fid), MergeTable>,
    cache: Mutex<HashMap<(usize, Shape, Simple), Arc<Basis>>>,
}

impl Clone for Ctx {
    fn clone(&self) -> Self {
        Ctx { levels: self.levels.clone(), legs: self.legs.clone(), merges: self.merges.clone(), cache: Mutex::new(HashMap::new()) }
    }
}

impl std::fmt::Debug for Ctx {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ctx").field("levels", &self.levels.len()).field("legs", &self.legs).finish()
    }
}

impl Ctx {
    /// A single category, for category-level computations.
    pub fn category(c: Arc<Category>) -> Ctx {
        Ctx { levels: vec![c], legs: Vec::new(), merges: BTreeMap::new(), cache: Mutex::new(HashMap::new()) }
    }

    /// Functors from `source` (level 1) to `target` (level 0).
    pub fn functors(source: Arc<Category>, target: Arc<Category>) -> Ctx {
        Ctx { levels: vec![target, source], legs: Vec::new(), merges: BTreeMap::new(), cache: Mutex::new(HashMap::new()) }
    }

    pub fn field(&self) -> Field {
        self.levels[0].field
    }

    pub fn level(&self, l: usize) -> Result<&Category, EngineError> {
        self.levels.get(l).map(|c| &**c).ok_or(EngineError::MissingLevel(l))
    }

    pub fn target(&self) -> &Category {
        &self.levels[0]
    }

    pub fn source(&self) -> &Category {
        self.levels.get(1).unwrap_or(&self.levels[0])
    }

    pub fn add_leg(&mut self, leg: Leg) -> Fid {
        self.legs.push(leg);
        self.cache.lock().expect("cache lock").clear();
        self.legs.len() - 1
    }

    pub fn leg(&self, f: Fid) -> Result<&Leg, EngineError> {
        self.legs.get(f).ok_or(EngineError::UnknownFunctor(f))
    }

    pub fn set_merge(&mut self, left: Fid, right: Fid, table: MergeTable) {
        self.merges.insert((left, right), table);
    }

    pub fn merge(&self, left: Fid, right: Fid) -> Result<&MergeTable, EngineError> {
        self.merges.get(&(left, right)).ok_or(EngineError::MissingMerge(left, right))
    }

    fn basis(&self, level: usize, shape: &Shape, t: Simple) -> Arc<Basis> {
        let key = (level, shape.clone(), t);
        if let Some(b) = self.cache.lock().expect("cache lock").get(&key) {
            return b.clone();
        }
        let items = self.enumerate(level, shape, t);
        let index = items.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
        let b = Arc::new(Basis { items, index });
        self.cache.lock().expect("cache lock").insert(key, b.clone());
        b
    }

    fn enumerate(&self, level: usize, shape: &Shape, t: Simple) -> Vec<LTree> {
        let cat = &self.levels[level];
        match shape {
            Shape::Leaf(s) => if *s == t { vec![LTree::Leaf(t)] } else { Vec::new() },
            Shape::Unit => if t == cat.unit { vec![LTree::Unit(t)] } else { Vec::new() },
            Shape::Apply(f, inner) => {
                let objmap = &self.legs[*f].objmap;
                let mut out = Vec::new();
                for c in self.levels[level + 1].simples() {
                    let k = objmap[c][t];
                    if k == 0 {
                        continue;
                    }
                    for ib in self.basis(level + 1, inner, c).items.iter() {
                        for kk in 0..k {
                            out.push(LTree::apply(*f, t, kk, ib.clone()));
                        }
                    }
                }
                out
            }
            Shape::Node(l, r) => {
                let mut out = Vec::new();
                for a in cat.simples() {
                    for b in cat.simples() {
                        let m = cat.n(a, b, t);
                        if m == 0 {
                            continue;
                        }
                        let lb = self.basis(level, l, a);
                        if lb.items.is_empty() {
                            continue;
                        }
                        let rb = self.basis(level, r, b);
                        for x in &lb.items {
                            for y in &rb.items {
                                for mu in 0..m {
                                    out.push(LTree::node(t, mu, x.clone(), y.clone()));
                                }
                            }
                        }
                    }
                }
                out
            }
        }
    }

    /// Number of basis vectors of `Hom(t, shape)` for a level-0 shape.
    pub fn dim(&self, shape: &Shape, t: Simple) -> usize {
        self.basis(0, shape, t).items.len()
    }

    pub fn dim_at(&self, level: usize, shape: &Shape, t: Simple) -> usize {
        self.basis(level, shape, t).items.len()
    }

    pub fn basis_trees(&self, level: usize, shape: &Shape, t: Simple) -> Vec<LTree> {
        self.basis(level, shape, t).items.clone()
    }

    fn index_of(&self, level: usize, shape: &Shape, tree: &LTree) -> usize {
        *self.basis(level, shape, tree.label()).index.get(tree).unwrap_or_else(|| panic!("{tree:?} is not a basis tree of {shape:?}"))
    }

    /// Applies a step to a shape.
    pub fn step_shape(&self, shape: &Shape, step: &Step) -> Result<Shape, EngineError> {
        let mismatch = || EngineError::ShapeMismatch { step: step.name(), shape: format!("{shape:?}") };
        if let Step::Scale(_) = step {
            return Ok(shape.clone());
        }
        let path = step.path();
        let sub = shape.at(path).ok_or_else(mismatch)?;
        let new = match step {
            Step::Assoc { inverse: false, .. } => match sub {
                Shape::Node(l, c) => match &**l {
                    Shape::Node(a, b) => Shape::node((**a).clone(), Shape::node((**b).clone(), (**c).clone())),
                    _ => return Err(mismatch()),
                },
                _ => return Err(mismatch()),
            },
            Step::Assoc { inverse: true, .. } => match sub {
                Shape::Node(a, r) => match &**r {
                    Shape::Node(b, c) => Shape::node(Shape::node((**a).clone(), (**b).clone()), (**c).clone()),
                    _ => return Err(mismatch()),
                },
                _ => return Err(mismatch()),
            },
            Step::Merge { .. } => match sub {
                Shape::Node(l, r) => match (&**l, &**r) {
                    (Shape::Apply(f1, x), Shape::Apply(f2, y)) => {
                        let m = self.merge(*f1, *f2)?;
                        Shape::apply(m.out, Shape::node((**x).clone(), (**y).clone()))
                    }
                    _ => return Err(mismatch()),
                },
                _ => return Err(mismatch()),
            },
            Step::UnitIn { f, .. } => match sub {
                Shape::Unit => Shape::apply(*f, Shape::Unit),
                _ => return Err(mismatch()),
            },
            Step::UnitElim { side, .. } => match (sub, side) {
                (Shape::Node(u, x), Side::Left) if **u == Shape::Unit => (**x).clone(),
                (Shape::Node(x, u), Side::Right) if **u == Shape::Unit => (**x).clone(),
                _ => return Err(mismatch()),
            },
            Step::UnitIntro { side: Side::Left, .. } => Shape::node(Shape::Unit, sub.clone()),
            Step::UnitIntro { side: Side::Right, .. } => Shape::node(sub.clone(), Shape::Unit),
            Step::Cochain { arity, kind, .. } => {
                let args = sub.split_lcomb(*arity).ok_or_else(mismatch)?;
                match kind {
                    SlotKind::Nat => Shape::rcomb(args.into_iter().cloned()),
                    SlotKind::Functor { input, output } => {
                        let mut inner = Vec::new();
                        for a in args {
                            match a {
                                Shape::Apply(f, x) if f == input => inner.push((**x).clone()),
                                _ => return Err(mismatch()),
                            }
                        }
                        Shape::apply(*output, Shape::rcomb(inner))
                    }
                }
            }
            Step::Transform { to, .. } => match sub {
                Shape::Apply(_, x) => Shape::Apply(*to, x.clone()),
                _ => return Err(mismatch()),
            },
            Step::Block { morph, .. } if *sub == morph.src => morph.dst.clone(),
            Step::Block { .. } => return Err(mismatch()),
            Step::Scale(_) => unreachable!(),
        };
        shape.replace_at(path, new).ok_or_else(mismatch)
    }

    pub fn route_shape(&self, src: &Shape, steps: &[Step]) -> Result<Shape, EngineError> {
        steps.iter().try_fold(src.clone(), |s, st| self.step_shape(&s, st))
    }

    fn apply_step(&self, step: &Step, terms: Terms) -> Result<Terms, EngineError> {
        let mut out: Terms = HashMap::new();
        for ((tree, tag), c) in terms {
            for (nt, ntag, nc) in self.rewrite(step, &tree, step.path(), 0)? {
                let tag = match ntag {
                    Some(t) => {
                        assert_eq!(tag, UNTAGGED, "one symbolic slot per route");
                        t
                    }
                    None => tag,
                };
                let v = &c * &nc;
                let e = out.entry((nt, tag)).or_insert_with(|| self.field().zero());
                *e = &*e + &v;
            }
        }
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    fn rewrite(&self, step: &Step, tree: &LTree, path: &[Dir], level: usize) -> Result<Vec<(LTree, Option<u32>, Scalar)>, EngineError> {
        let mismatch = || EngineError::ShapeMismatch { step: step.name(), shape: format!("{tree:?}") };
        let Some(dir) = path.first() else { return self.local(step, tree, level) };
        Ok(match (dir, tree) {
            (Dir::L, LTree::Node { t, mu, l, r }) => self
                .rewrite(step, l, &path[1..], level)?
                .into_iter()
                .map(|(x, g, c)| (LTree::Node { t: *t, mu: *mu, l: Box::new(x), r: r.clone() }, g, c))
                .collect(),
            (Dir::R, LTree::Node { t, mu, l, r }) => self
                .rewrite(step, r, &path[1..], level)?
                .into_iter()
                .map(|(x, g, c)| (LTree::Node { t: *t, mu: *mu, l: l.clone(), r: Box::new(x) }, g, c))
                .collect(),
            (Dir::In, LTree::Apply { f, x, k, inner }) => self
                .rewrite(step, inner, &path[1..], level + 1)?
                .into_iter()
                .map(|(i, g, c)| (LTree::apply(*f, *x, *k, i), g, c))
                .collect(),
            _ => return Err(mismatch()),
        })
    }

    fn local(&self, step: &Step, tree: &LTree, level: usize) -> Result<Vec<(LTree, Option<u32>, Scalar)>, EngineError> {
        let mismatch = || EngineError::ShapeMismatch { step: step.name(), shape: format!("{tree:?}") };
        let cat = self.level(level)?;
        let mut out = Vec::new();
        match step {
            Step::Scale(s) => out.push((tree.clone(), None, s.clone())),
            Step::Assoc { inverse: false, .. } => {
                let LTree::Node { t: d, mu: m2, l, r: c } = tree else { return Err(mismatch()) };
                let LTree::Node { t: e, mu: m1, l: a, r: b } = &**l else { return Err(mismatch()) };
                let (la, lb, lc) = (a.label(), b.label(), c.label());
                let row = cat.left_basis(la, lb, lc, *d).iter().position(|&x| x == (*e, *m1, *m2)).expect("left basis");
                let cols = cat.right_basis(la, lb, lc, *d);
                let f = cat.f(la, lb, lc, *d).expect("validated F-matrix");
                for (j, &(ff, n1, n2)) in cols.iter().enumerate() {
                    let v = f.get(row, j);
                    if !v.is_zero() {
                        let bc = LTree::node(ff, n1, (**b).clone(), (**c).clone());
                        out.push((LTree::node(*d, n2, (**a).clone(), bc), None, v.clone()));
                    }
                }
            }
            Step::Assoc { inverse: true, .. } => {
                let LTree::Node { t: d, mu: n2, l: a, r } = tree else { return Err(mismatch()) };
                let LTree::Node { t: ff, mu: n1, l: b, r: c } = &**r else { return Err(mismatch()) };
                let (la, lb, lc) = (a.label(), b.label(), c.label());
                let row = cat.right_basis(la, lb, lc, *d).iter().position(|&x| x == (*ff, *n1, *n2)).expect("right basis");
                let cols = cat.left_basis(la, lb, lc, *d);
                let f = cat.f_inv(la, lb, lc, *d).expect("validated F-matrix");
                for (j, &(e, m1, m2)) in cols.iter().enumerate() {
                    let v = f.get(row, j);
                    if !v.is_zero() {
                        let ab = LTree::node(e, m1, (**a).clone(), (**b).clone());
                        out.push((LTree::node(*d, m2, ab, (**c).clone()), None, v.clone()));
                    }
                }
            }
            Step::Merge { .. } => {
                let LTree::Node { t: z, mu, l, r } = tree else { return Err(mismatch()) };
                let (LTree::Apply { f: f1, x, k: k1, inner: i1 }, LTree::Apply { f: f2, x: y, k: k2, inner: i2 }) = (&**l, &**r) else {
                    return Err(mismatch());
                };
                let table = self.merge(*f1, *f2)?;
                let (a, b) = (i1.label(), i2.label());
                let row_shape = Shape::node(Shape::apply(*f1, Shape::Leaf(a)), Shape::apply(*f2, Shape::Leaf(b)));
                let local = LTree::node(*z, *mu, LTree::apply(*f1, *x, *k1, LTree::Leaf(a)), LTree::apply(*f2, *y, *k2, LTree::Leaf(b)));
                let row = self.index_of(level, &row_shape, &local);
                let col_shape = Shape::apply(table.out, Shape::node(Shape::Leaf(a), Shape::Leaf(b)));
                let cols = self.basis(level, &col_shape, *z);
                let m = table.blocks.get(&(a, b, *z)).expect("merge block present");
                for (j, ct) in cols.items.iter().enumerate() {
                    let v = m.get(row, j);
                    if !v.is_zero() {
                        let nt = ct.substitute(&mut [(**i1).clone(), (**i2).clone()].into_iter());
                        out.push((nt, None, v.clone()));
                    }
                }
            }
            Step::UnitIn { f, .. } => {
                let LTree::Unit(u) = tree else { return Err(mismatch()) };
                let unit = self.leg(*f)?.unit.as_ref().ok_or(EngineError::MissingUnit(*f))?;
                let src_unit = self.level(level + 1)?.unit;
                for (k, v) in unit.iter().enumerate() {
                    if !v.is_zero() {
                        out.push((LTree::apply(*f, *u, k, LTree::Unit(src_unit)), None, v.clone()));
                    }
                }
            }
            Step::UnitElim { side, .. } => {
                let LTree::Node { t, l, r, .. } = tree else { return Err(mismatch()) };
                match side {
                    Side::Left if matches!(**l, LTree::Unit(_)) => out.push(((**r).clone(), None, cat.lambda[*t].clone())),
                    Side::Right if matches!(**r, LTree::Unit(_)) => out.push(((**l).clone(), None, cat.rho[*t].clone())),
                    _ => return Err(mismatch()),
                }
            }
            Step::UnitIntro { side, .. } => {
                let t = tree.label();
                let u = LTree::Unit(cat.unit);
                match side {
                    Side::Left => out.push((LTree::node(t, 0, u, tree.clone()), None, cat.lambda[t].inv().expect("nonzero"))),
                    Side::Right => out.push((LTree::node(t, 0, tree.clone(), u), None, cat.rho[t].inv().expect("nonzero"))),
                }
            }
            Step::Transform { to, blocks, .. } => {
                let LTree::Apply { x, k, inner, .. } = tree else { return Err(mismatch()) };
                if let Some(m) = blocks.get(&(inner.label(), *x)) {
                    for j in 0..m.cols() {
                        let v = m.get(*k, j);
                        if !v.is_zero() {
                            out.push((LTree::Apply { f: *to, x: *x, k: j, inner: inner.clone() }, None, v.clone()));
                        }
                    }
                }
            }
            Step::Block { morph, .. } => {
                let t = tree.label();
                let src = self.basis(level, &morph.src, t);
                let row = *src.index.get(tree).ok_or_else(mismatch)?;
                if let Some(m) = morph.blocks.get(&t) {
                    let cols = self.basis(level, &morph.dst, t);
                    for (j, ct) in cols.items.iter().enumerate() {
                        let v = m.get(row, j);
                        if !v.is_zero() {
                            out.push((ct.clone(), None, v.clone()));
                        }
                    }
                }
            }
            Step::Cochain { arity, kind, coeffs, .. } => {
                let (skel, args) = tree.split_lcomb(*arity).ok_or_else(mismatch)?;
                let w = tree.label();
                let (row_shape, col_shape, skel, repl, labels) = match kind {
                    SlotKind::Nat => {
                        let labels: Vec<Simple> = args.iter().map(LTree::label).collect();
                        let leaves = Shape::leaves_of(&labels);
                        let rs = if *arity == 0 { Shape::Unit } else { Shape::lcomb(leaves.clone()) };
                        (rs, Shape::rcomb(leaves), skel, args, labels)
                    }
                    SlotKind::Functor { input, output } => {
                        let mut labels = Vec::new();
                        let mut holes = Vec::new();
                        let mut inners = Vec::new();
                        for a in &args {
                            let LTree::Apply { f, x, k, inner } = a else { return Err(mismatch()) };
                            if f != input {
                                return Err(mismatch());
                            }
                            labels.push(inner.label());
                            holes.push(LTree::apply(*f, *x, *k, LTree::Leaf(inner.label())));
                            inners.push((**inner).clone());
                        }
                        let skel = if *arity == 0 { skel } else { skel.substitute(&mut holes.into_iter()) };
                        let leaves = Shape::leaves_of(&labels);
                        let rs = Shape::lcomb(leaves.iter().map(|s| Shape::apply(*input, s.clone())));
                        (rs, Shape::apply(*output, Shape::rcomb(leaves)), skel, inners, labels)
                    }
                };
                let row = self.index_of(level, &row_shape, &skel);
                let cols = self.basis(level, &col_shape, w);
                let key = (labels, w);
                match coeffs {
                    Coeffs::Concrete(blocks) => {
                        let Some(m) = blocks.get(&key) else { return Ok(out) };
                        for (j, ct) in cols.items.iter().enumerate() {
                            let v = m.get(row, j);
                            if !v.is_zero() {
                                out.push((ct.substitute(&mut repl.iter().cloned()), None, v.clone()));
                            }
                        }
                    }
                    Coeffs::Symbolic(index) => {
                        let Some(&(offset, ncols)) = index.get(&key) else { return Ok(out) };
                        for (j, ct) in cols.items.iter().enumerate() {
                            let tag = (offset + row * ncols + j) as u32;
                            out.push((ct.substitute(&mut repl.iter().cloned()), Some(tag), self.field().one()));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn run(&self, src: &Shape, t: Simple, steps: &[Step]) -> Result<Vec<Terms>, EngineError> {
        let basis = self.basis(0, src, t);
        basis
            .items
            .iter()
            .map(|b| {
                let mut terms: Terms = HashMap::new();
                terms.insert((b.clone(), UNTAGGED), self.field().one());
                for s in steps {
                    terms = self.apply_step(s, terms)?;
                }
                Ok(terms)
            })
            .collect()
    }

    /// Matrix of a composite of steps on `Hom(t, src)`, rows indexed by the
    /// source basis and columns by the basis of the resulting shape.
    pub fn route_matrix(&self, src: &Shape, t: Simple, steps: &[Step]) -> Result<MatrixK, EngineError> {
        let dst = self.route_shape(src, steps)?;
        let rows = self.run(src, t, steps)?;
        let mut m = MatrixK::zeros(self.field(), rows.len(), self.dim(&dst, t));
        for (i, terms) in rows.iter().enumerate() {
            for ((tree, _), c) in terms {
                m.add_at(i, self.index_of(0, &dst, tree), c);
            }
        }
        Ok(m)
    }

    /// Contributions `(row, col, coordinate, coefficient)` of a route that
    /// contains exactly one symbolic cochain step.
    pub fn route_symbolic(&self, src: &Shape, t: Simple, steps: &[Step]) -> Result<Vec<(usize, usize, usize, Scalar)>, EngineError> {
        let dst = self.route_shape(src, steps)?;
        let rows = self.run(src, t, steps)?;
        let mut out = Vec::new();
        for (i, terms) in rows.into_iter().enumerate() {
            for ((tree, tag), c) in terms {
                if tag != UNTAGGED {
                    out.push((i, self.index_of(0, &dst, &tree), tag as usize, c));
                }
            }
        }
        out.sort_by_key(|a| (a.0, a.1, a.2));
        Ok(out)
    }
}
