//! Object shapes and labeled splitting trees.
//!
//! A [`Shape`] is a parenthesized word of simples, units and functor images.
//! An [`LTree`] is one basis vector of `Hom(t, shape)`: every internal node
//! carries its output simple and multiplicity index, every functor leaf the
//! simple it picks out of the image and a copy index.

use std::fmt;

use crate::fusion::Simple;

/// Index of a functor (or bimodule) registered in an evaluation context.
pub type Fid = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    L,
    R,
    /// Into the argument of a functor leaf, one level down.
    In,
}

pub type Path = Vec<Dir>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Leaf(Simple),
    Unit,
    Apply(Fid, Box<Shape>),
    Node(Box<Shape>, Box<Shape>),
}

impl Shape {
    pub fn node(l: Shape, r: Shape) -> Shape {
        Shape::Node(Box::new(l), Box::new(r))
    }

    pub fn apply(f: Fid, inner: Shape) -> Shape {
        Shape::Apply(f, Box::new(inner))
    }

    /// `((x1 x2) x3) ...`; the empty word is the unit.
    pub fn lcomb(items: impl IntoIterator<Item = Shape>) -> Shape {
        let mut it = items.into_iter();
        let Some(mut acc) = it.next() else { return Shape::Unit };
        for x in it {
            acc = Shape::node(acc, x);
        }
        acc
    }

    /// `x1 (x2 (x3 ...))`; the empty word is the unit.
    pub fn rcomb(items: impl IntoIterator<Item = Shape>) -> Shape {
        let items: Vec<Shape> = items.into_iter().collect();
        let mut it = items.into_iter().rev();
        let Some(mut acc) = it.next() else { return Shape::Unit };
        for x in it {
            acc = Shape::node(x, acc);
        }
        acc
    }

    pub fn leaves_of(labels: &[Simple]) -> Vec<Shape> {
        labels.iter().map(|&s| Shape::Leaf(s)).collect()
    }

    pub fn at(&self, path: &[Dir]) -> Option<&Shape> {
        match (path.first(), self) {
            (None, _) => Some(self),
            (Some(Dir::L), Shape::Node(l, _)) => l.at(&path[1..]),
            (Some(Dir::R), Shape::Node(_, r)) => r.at(&path[1..]),
            (Some(Dir::In), Shape::Apply(_, i)) => i.at(&path[1..]),
            _ => None,
        }
    }

    pub fn replace_at(&self, path: &[Dir], new: Shape) -> Option<Shape> {
        match (path.first(), self) {
            (None, _) => Some(new),
            (Some(Dir::L), Shape::Node(l, r)) => Some(Shape::Node(Box::new(l.replace_at(&path[1..], new)?), r.clone())),
            (Some(Dir::R), Shape::Node(l, r)) => Some(Shape::Node(l.clone(), Box::new(r.replace_at(&path[1..], new)?))),
            (Some(Dir::In), Shape::Apply(f, i)) => Some(Shape::Apply(*f, Box::new(i.replace_at(&path[1..], new)?))),
            _ => None,
        }
    }

    /// The maximal non-node subshapes, left to right.
    pub fn atoms(&self) -> Vec<&Shape> {
        let mut out = Vec::new();
        fn go<'a>(s: &'a Shape, out: &mut Vec<&'a Shape>) {
            match s {
                Shape::Node(l, r) => {
                    go(l, out);
                    go(r, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    /// Splits `((T1 T2) ...) Tn` into its `n` arguments.
    pub fn split_lcomb(&self, arity: usize) -> Option<Vec<&Shape>> {
        if arity == 0 {
            return matches!(self, Shape::Unit).then(Vec::new);
        }
        let mut out = Vec::with_capacity(arity);
        let mut cur = self;
        for _ in 1..arity {
            let Shape::Node(l, r) = cur else { return None };
            out.push(&**r);
            cur = l;
        }
        out.push(cur);
        out.reverse();
        Some(out)
    }

    /// Splits `T1 (T2 (... Tn))` into its `n` arguments.
    pub fn split_rcomb(&self, arity: usize) -> Option<Vec<&Shape>> {
        if arity == 0 {
            return matches!(self, Shape::Unit).then(Vec::new);
        }
        let mut out = Vec::with_capacity(arity);
        let mut cur = self;
        for _ in 1..arity {
            let Shape::Node(l, r) = cur else { return None };
            out.push(&**l);
            cur = r;
        }
        out.push(cur);
        Some(out)
    }
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Leaf(s) => write!(f, "{s}"),
            Shape::Unit => write!(f, "I"),
            Shape::Apply(g, i) => write!(f, "F{g}[{i:?}]"),
            Shape::Node(l, r) => write!(f, "({l:?} {r:?})"),
        }
    }
}

/// A basis vector of `Hom(label, shape)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LTree {
    Leaf(Simple),
    Unit(Simple),
    Apply { f: Fid, x: Simple, k: usize, inner: Box<LTree> },
    Node { t: Simple, mu: usize, l: Box<LTree>, r: Box<LTree> },
}

impl LTree {
    pub fn label(&self) -> Simple {
        match self {
            LTree::Leaf(s) | LTree::Unit(s) => *s,
            LTree::Apply { x, .. } => *x,
            LTree::Node { t, .. } => *t,
        }
    }

    pub fn node(t: Simple, mu: usize, l: LTree, r: LTree) -> LTree {
        LTree::Node { t, mu, l: Box::new(l), r: Box::new(r) }
    }

    pub fn apply(f: Fid, x: Simple, k: usize, inner: LTree) -> LTree {
        LTree::Apply { f, x, k, inner: Box::new(inner) }
    }

    /// Replaces every `Leaf`, at any depth, by the next tree from `repl`.
    pub fn substitute(&self, repl: &mut impl Iterator<Item = LTree>) -> LTree {
        match self {
            LTree::Leaf(_) => repl.next().expect("one replacement per placeholder"),
            LTree::Unit(s) => LTree::Unit(*s),
            LTree::Apply { f, x, k, inner } => LTree::apply(*f, *x, *k, inner.substitute(repl)),
            LTree::Node { t, mu, l, r } => {
                let l = l.substitute(repl);
                let r = r.substitute(repl);
                LTree::node(*t, *mu, l, r)
            }
        }
    }

    /// Splits a left comb of `arity` arguments into its skeleton, with `Leaf`
    /// placeholders, and the arguments themselves.
    pub fn split_lcomb(&self, arity: usize) -> Option<(LTree, Vec<LTree>)> {
        if arity == 0 {
            return matches!(self, LTree::Unit(_)).then(|| (self.clone(), Vec::new()));
        }
        if arity == 1 {
            return Some((LTree::Leaf(self.label()), vec![self.clone()]));
        }
        let LTree::Node { t, mu, l, r } = self else { return None };
        let (skel, mut args) = l.split_lcomb(arity - 1)?;
        args.push((**r).clone());
        Some((LTree::node(*t, *mu, skel, LTree::Leaf(r.label())), args))
    }
}

impl fmt::Debug for LTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LTree::Leaf(s) => write!(f, "{s}"),
            LTree::Unit(s) => write!(f, "I{s}"),
            LTree::Apply { f: g, x, k, inner } => write!(f, "F{g}[{inner:?}]>{x}#{k}"),
            LTree::Node { t, mu, l, r } => write!(f, "({l:?} {r:?})>{t}#{mu}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comb_splitting_roundtrips() {
        let xs = Shape::leaves_of(&[0, 1, 2, 3]);
        let l = Shape::lcomb(xs.clone());
        let r = Shape::rcomb(xs.clone());
        assert_eq!(l.split_lcomb(4).unwrap().into_iter().cloned().collect::<Vec<_>>(), xs);
        assert_eq!(r.split_rcomb(4).unwrap().into_iter().cloned().collect::<Vec<_>>(), xs);
        assert_eq!(Shape::lcomb(Vec::new()), Shape::Unit);
        assert_eq!(format!("{r:?}"), "(0 (1 (2 3)))");
    }

    #[test]
    fn replace_and_lookup() {
        let s = Shape::node(Shape::Leaf(0), Shape::apply(1, Shape::Leaf(2)));
        assert_eq!(s.at(&[Dir::R, Dir::In]), Some(&Shape::Leaf(2)));
        let t = s.replace_at(&[Dir::R, Dir::In], Shape::Unit).unwrap();
        assert_eq!(t.at(&[Dir::R, Dir::In]), Some(&Shape::Unit));
        assert!(s.at(&[Dir::L, Dir::L]).is_none());
    }
}
