//! Canonical reassociators and padded composition.
//!
//! Reassociators are built by rotating both trees to the right comb and
//! composing one route with the inverse of the other. Unit leaves are removed
//! with `λ`/`ρ` before any rotation.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::arith::Field;
use crate::engine::{BlockMap, BlockMorphism, Coeffs, Ctx, EngineError, Side, SlotKind, Step};
use crate::fusion::{Category, Simple};
use crate::linalg::MatrixK;
use crate::tree::{Dir, Shape};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReassocError {
    #[error("tree has {tree} leaves but the word has {word}")]
    ArityMismatch { tree: usize, word: usize },
    #[error("no coherence isomorphism links part {0} to part {1}")]
    ShapeChainBroken(usize, usize),
    #[error("no parts to compose")]
    Empty,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Steps rotating the subtree at `base` into a right comb of its atoms.
pub fn to_rcomb(shape: &Shape, base: &[Dir]) -> (Vec<Step<'static>>, Shape) {
    let mut steps = Vec::new();
    let mut cur = shape.clone();
    let mut path = base.to_vec();
    loop {
        let Some(Shape::Node(l, r)) = cur.at(&path).cloned() else { break };
        if let Shape::Node(a, b) = *l {
            steps.push(Step::Assoc { path: path.clone(), inverse: false });
            let rotated = Shape::node(*a, Shape::node(*b, *r));
            cur = cur.replace_at(&path, rotated).expect("path exists");
        } else {
            path.push(Dir::R);
        }
    }
    (steps, cur)
}

/// Inverse of a route made of rotations and unit moves.
pub fn invert(steps: &[Step<'static>]) -> Vec<Step<'static>> {
    steps
        .iter()
        .rev()
        .map(|s| match s {
            Step::Assoc { path, inverse } => Step::Assoc { path: path.clone(), inverse: !inverse },
            Step::UnitElim { path, side } => Step::UnitIntro { path: path.clone(), side: *side },
            Step::UnitIntro { path, side } => Step::UnitElim { path: path.clone(), side: *side },
            other => panic!("cannot invert step {}", other.name()),
        })
        .collect()
}

/// Steps removing every unit atom from the subtree at `base`.
pub fn strip_units(shape: &Shape, base: &[Dir]) -> (Vec<Step<'static>>, Shape) {
    fn find(s: &Shape, path: &mut Vec<Dir>) -> Option<Side> {
        let Shape::Node(l, r) = s else { return None };
        if **l == Shape::Unit {
            return Some(Side::Left);
        }
        if **r == Shape::Unit {
            return Some(Side::Right);
        }
        path.push(Dir::L);
        if let Some(side) = find(l, path) {
            return Some(side);
        }
        path.pop();
        path.push(Dir::R);
        if let Some(side) = find(r, path) {
            return Some(side);
        }
        path.pop();
        None
    }
    let mut steps = Vec::new();
    let mut cur = shape.clone();
    loop {
        let mut path = base.to_vec();
        let sub = cur.at(base).expect("base path exists").clone();
        let mut rel = Vec::new();
        let Some(side) = find(&sub, &mut rel) else { break };
        path.extend(rel);
        let step = Step::UnitElim { path: path.clone(), side };
        let Some(Shape::Node(l, r)) = cur.at(&path).cloned() else { unreachable!() };
        let kept = if side == Side::Left { *r } else { *l };
        cur = cur.replace_at(&path, kept).expect("path exists");
        steps.push(step);
    }
    (steps, cur)
}

fn atoms_of(shape: &Shape) -> Vec<Shape> {
    shape.atoms().into_iter().filter(|s| **s != Shape::Unit).cloned().collect()
}

/// Route from `src` to `dst` at `base`, if their non-unit atoms agree.
pub fn route_between(src: &Shape, dst: &Shape, base: &[Dir]) -> Option<Vec<Step<'static>>> {
    let (s1, red_src) = strip_units(src, base);
    let (s2, red_dst) = strip_units(dst, base);
    let a = red_src.at(base)?;
    let b = red_dst.at(base)?;
    if atoms_of(a) != atoms_of(b) {
        return None;
    }
    let (r1, _) = to_rcomb(&red_src, base);
    let (r2, _) = to_rcomb(&red_dst, base);
    let mut steps = s1;
    steps.extend(r1);
    steps.extend(invert(&r2));
    steps.extend(invert(&s2));
    Some(steps)
}

/// A full binary tree with a fixed number of leaves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ParenTree {
    Leaf,
    Node(Box<ParenTree>, Box<ParenTree>),
}

impl ParenTree {
    pub fn node(l: ParenTree, r: ParenTree) -> ParenTree {
        ParenTree::Node(Box::new(l), Box::new(r))
    }

    pub fn left_comb(n: usize) -> ParenTree {
        assert!(n >= 1, "a tree has at least one leaf");
        (1..n).fold(ParenTree::Leaf, |acc, _| ParenTree::node(acc, ParenTree::Leaf))
    }

    pub fn right_comb(n: usize) -> ParenTree {
        assert!(n >= 1, "a tree has at least one leaf");
        (1..n).fold(ParenTree::Leaf, |acc, _| ParenTree::node(ParenTree::Leaf, acc))
    }

    pub fn leaves(&self) -> usize {
        match self {
            ParenTree::Leaf => 1,
            ParenTree::Node(l, r) => l.leaves() + r.leaves(),
        }
    }

    /// All trees with `n` leaves.
    pub fn all(n: usize) -> Vec<ParenTree> {
        if n == 1 {
            return vec![ParenTree::Leaf];
        }
        let mut out = Vec::new();
        for k in 1..n {
            for l in ParenTree::all(k) {
                for r in ParenTree::all(n - k) {
                    out.push(ParenTree::node(l.clone(), r));
                }
            }
        }
        out
    }

    pub fn to_shape(&self, word: &ObjectWord) -> Result<Shape, ReassocError> {
        if self.leaves() != word.len() {
            return Err(ReassocError::ArityMismatch { tree: self.leaves(), word: word.len() });
        }
        fn go(t: &ParenTree, it: &mut std::slice::Iter<'_, Option<Simple>>) -> Shape {
            match t {
                ParenTree::Leaf => match it.next().expect("length checked") {
                    Some(s) => Shape::Leaf(*s),
                    None => Shape::Unit,
                },
                ParenTree::Node(l, r) => {
                    let l = go(l, it);
                    Shape::node(l, go(r, it))
                }
            }
        }
        Ok(go(self, &mut word.items.iter()))
    }
}

/// A word of simples; `None` marks an inserted unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObjectWord {
    pub items: Vec<Option<Simple>>,
}

impl ObjectWord {
    pub fn simples(labels: &[Simple]) -> Self {
        ObjectWord { items: labels.iter().map(|&s| Some(s)).collect() }
    }

    /// Inserts a unit before position `i`.
    pub fn with_unit_at(mut self, i: usize) -> Self {
        self.items.insert(i, None);
        self
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// The coherence isomorphism between two parenthesizations of a word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reassociator {
    pub word: ObjectWord,
    pub src: ParenTree,
    pub dst: ParenTree,
    pub morph: BlockMorphism,
}

impl Reassociator {
    pub fn block(&self, d: Simple) -> Option<&MatrixK> {
        self.morph.blocks.get(&d)
    }
}

fn blocks_of(ctx: &Ctx, src: &Shape, steps: &[Step]) -> Result<BTreeMap<Simple, MatrixK>, EngineError> {
    let mut out = BTreeMap::new();
    for d in ctx.target().simples() {
        if ctx.dim(src, d) > 0 {
            out.insert(d, ctx.route_matrix(src, d, steps)?);
        }
    }
    Ok(out)
}

pub fn reassociate(word: &ObjectWord, src: &ParenTree, dst: &ParenTree, c: &Arc<Category>) -> Result<Reassociator, ReassocError> {
    let s = src.to_shape(word)?;
    let t = dst.to_shape(word)?;
    let ctx = Ctx::category(c.clone());
    let steps = route_between(&s, &t, &[]).expect("same word");
    let blocks = blocks_of(&ctx, &s, &steps)?;
    Ok(Reassociator { word: word.clone(), src: src.clone(), dst: dst.clone(), morph: BlockMorphism { src: s, dst: t, blocks } })
}

/// Matrices of an explicit route of rotations, for testing path independence.
pub fn route_blocks(c: &Arc<Category>, src: &Shape, steps: &[Step]) -> Result<BTreeMap<Simple, MatrixK>, EngineError> {
    blocks_of(&Ctx::category(c.clone()), src, steps)
}

fn reduced(shape: &Shape, right: bool) -> Shape {
    let atoms = atoms_of(shape);
    if right {
        Shape::rcomb(atoms)
    } else {
        Shape::lcomb(atoms)
    }
}

/// Composite of the parts with reassociators inserted, from the reduced left
/// comb of the first source to the reduced right comb of the last target.
pub fn pad_compose(parts: &[BlockMorphism], c: &Arc<Category>) -> Result<BlockMorphism, ReassocError> {
    let first = parts.first().ok_or(ReassocError::Empty)?;
    let last = parts.last().expect("nonempty");
    let ctx = Ctx::category(c.clone());
    let src = reduced(&first.src, false);
    let dst = reduced(&last.dst, true);
    let mut steps: Vec<Step> = route_between(&src, &first.src, &[]).ok_or(ReassocError::ShapeChainBroken(0, 0))?;
    for (i, p) in parts.iter().enumerate() {
        steps.push(Step::Block { path: vec![], morph: p });
        let next = parts.get(i + 1).map(|q| &q.src).unwrap_or(&dst);
        steps.extend(route_between(&p.dst, next, &[]).ok_or(ReassocError::ShapeChainBroken(i, i + 1))?);
    }
    let blocks = blocks_of(&ctx, &src, &steps)?;
    Ok(BlockMorphism { src, dst, blocks })
}

/// The morphism of a cochain evaluated at a subtree of `shape`.
pub fn cochain_at(c: &Arc<Category>, shape: &Shape, path: &[Dir], arity: usize, cochain: &BlockMap) -> Result<BlockMorphism, ReassocError> {
    let ctx = Ctx::category(c.clone());
    let step = Step::Cochain { path: path.to_vec(), arity, kind: SlotKind::Nat, coeffs: Coeffs::Concrete(cochain) };
    let dst = ctx.step_shape(shape, &step)?;
    let blocks = blocks_of(&ctx, shape, &[step])?;
    Ok(BlockMorphism { src: shape.clone(), dst, blocks })
}

/// Checks `⌈[φ_{A,I,I}⊗B] ψ_{A,I,B}⌉ = ⌈ψ_{A,I,B} [φ_{A,I,I}⊗B]⌉` and the
/// mirrored identity with `φ_{I,I,B}` for all simples `A`, `B`.
pub fn unit_commuting_check(psi: &BlockMap, phi: &BlockMap, c: &Arc<Category>) -> Result<bool, ReassocError> {
    let u = Shape::Unit;
    for a in c.simples() {
        for b in c.simples() {
            let (la, lb) = (Shape::Leaf(a), Shape::Leaf(b));
            let psi_aib = cochain_at(c, &Shape::node(Shape::node(la.clone(), u.clone()), lb.clone()), &[], 3, psi)?;
            let phi_aii_b = cochain_at(
                c,
                &Shape::node(Shape::lcomb([la.clone(), u.clone(), u.clone()]), lb.clone()),
                &[Dir::L],
                3,
                phi,
            )?;
            let one = pad_compose(&[phi_aii_b.clone(), psi_aib.clone()], c)?;
            let two = pad_compose(&[psi_aib, phi_aii_b], c)?;
            if one.blocks != two.blocks {
                return Ok(false);
            }
            let psi_aib2 = cochain_at(c, &Shape::node(Shape::node(la.clone(), u.clone()), lb.clone()), &[], 3, psi)?;
            let a_phi_iib = cochain_at(
                c,
                &Shape::node(la.clone(), Shape::lcomb([u.clone(), u.clone(), lb.clone()])),
                &[Dir::R],
                3,
                phi,
            )?;
            let one = pad_compose(&[psi_aib2.clone(), a_phi_iib.clone()], c)?;
            let two = pad_compose(&[a_phi_iib, psi_aib2], c)?;
            if one.blocks != two.blocks {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Identity block morphism on a shape.
pub fn identity_on(c: &Arc<Category>, shape: &Shape) -> BlockMorphism {
    let ctx = Ctx::category(c.clone());
    let mut blocks = BTreeMap::new();
    for d in c.simples() {
        let n = ctx.dim(shape, d);
        if n > 0 {
            blocks.insert(d, MatrixK::identity(c.field, n));
        }
    }
    BlockMorphism { src: shape.clone(), dst: shape.clone(), blocks }
}

/// Random block morphism between two shapes with the same atoms.
pub fn random_morphism(c: &Arc<Category>, src: &Shape, dst: &Shape, mut sample: impl FnMut(Field) -> crate::arith::Scalar) -> BlockMorphism {
    let ctx = Ctx::category(c.clone());
    let mut blocks = BTreeMap::new();
    for d in c.simples() {
        let (r, k) = (ctx.dim(src, d), ctx.dim(dst, d));
        if r > 0 && k > 0 {
            let data = (0..r * k).map(|_| sample(c.field)).collect();
            blocks.insert(d, MatrixK::new(c.field, r, k, data).expect("sizes match"));
        }
    }
    BlockMorphism { src: src.clone(), dst: dst.clone(), blocks }
}
