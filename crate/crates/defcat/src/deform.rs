//! Order-by-order deformations over `k[ε]/ε^(M+1)`: direct coherence checks,
//! obstructions, extension, first-order classification, equivalence and
//! unit transport.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{ArithError, Field, Scalar, TruncatedSeries};
use crate::cochain::{BlockSlot, Cochain, CochainError, CochainModel};
use crate::complex::ComplexError;
use crate::complexes::{build_complex, BuiltComplex, ComplexSpec};
use crate::engine::{Coeffs, Ctx, EngineError, SlotKind, Step, TransformBlocks};
use crate::functor::{nat_transformation_check, BimoduleData, FunctorData, FunctorError, F_ID};
use crate::fusion::{Category, Simple};
use crate::linalg::{solve_linear, LinalgError, MatrixK, Solution};
use crate::tree::{Dir, Shape};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeformationError {
    #[error("coherence fails at order {order}: {instance}")]
    CoherenceFailure { order: usize, instance: String },
    #[error("{kind} deformations are classified in degree {want}, not {got}")]
    KindDegreeMismatch { kind: &'static str, want: usize, got: usize },
    #[error("{0}")]
    KindMismatch(String),
    #[error("the given data is not a deformation at order {0}")]
    LowerOrderNotDeformation(usize),
    #[error("obstruction at order {0} is not closed")]
    NotClosed(usize),
    #[error("constant term of a unit or associator block is not invertible")]
    NotInvertible,
    #[error("not a monoidal natural transformation")]
    NotMonoidalTransformation,
    #[error(transparent)]
    Cochain(#[from] CochainError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Functor(#[from] FunctorError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

type Result<T> = std::result::Result<T, DeformationError>;

/// Which structure maps a deformation is allowed to change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeformationKind {
    /// The associator of a category.
    Category,
    /// The tensor structure of a functor, with both categories fixed.
    Functorial,
    /// The tensor structure of a functor and the source associator.
    Fibred,
    /// The tensor structure and both associators.
    Total,
}

impl DeformationKind {
    pub fn name(self) -> &'static str {
        match self {
            DeformationKind::Category => "category",
            DeformationKind::Functorial => "functorial",
            DeformationKind::Fibred => "fibred",
            DeformationKind::Total => "total",
        }
    }

    pub fn parse(s: &str) -> Option<DeformationKind> {
        match s {
            "category" => Some(DeformationKind::Category),
            "functorial" | "functor" => Some(DeformationKind::Functorial),
            "fibred" => Some(DeformationKind::Fibred),
            "total" => Some(DeformationKind::Total),
            _ => None,
        }
    }

    fn deforms_source(self) -> bool {
        !matches!(self, DeformationKind::Functorial)
    }

    fn deforms_functor(self) -> bool {
        !matches!(self, DeformationKind::Category)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeformationBase {
    Category(Arc<Category>),
    Functor(FunctorData),
}

/// A deformation truncated at `order`. Coefficient lists hold orders
/// `1..=order` in sequence; lists a kind does not deform stay empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeformationState {
    pub kind: DeformationKind,
    pub base: DeformationBase,
    pub order: usize,
    /// Source (or only) associator coefficients, degree 3.
    pub alpha: Vec<Cochain>,
    /// Tensor structure coefficients, degree 2.
    pub ftilde: Vec<Cochain>,
    /// Target associator coefficients, degree 3.
    pub target_alpha: Vec<Cochain>,
    /// Unit gauge coefficients `ν^(1), ν^(2), …`.
    pub nu: Vec<Scalar>,
}

impl DeformationState {
    /// The trivial deformation of the given kind and order.
    pub fn trivial(kind: DeformationKind, base: DeformationBase, order: usize) -> Result<DeformationState> {
        let mut s = DeformationState { kind, base, order: 0, alpha: vec![], ftilde: vec![], target_alpha: vec![], nu: vec![] };
        s.check_base()?;
        for _ in 0..order {
            s.push_order(s.zero_unknowns())?;
        }
        Ok(s)
    }

    fn check_base(&self) -> Result<()> {
        match (&self.base, self.kind) {
            (DeformationBase::Category(_), DeformationKind::Category) => Ok(()),
            (DeformationBase::Functor(_), DeformationKind::Category) => Err(DeformationError::KindMismatch("category deformations need a category".into())),
            (DeformationBase::Category(_), k) => Err(DeformationError::KindMismatch(format!("{} deformations need a functor", k.name()))),
            _ => Ok(()),
        }
    }

    pub fn field(&self) -> Field {
        match &self.base {
            DeformationBase::Category(c) => c.field,
            DeformationBase::Functor(f) => f.field(),
        }
    }

    /// The category whose associator `alpha` deforms.
    pub fn source(&self) -> &Arc<Category> {
        match &self.base {
            DeformationBase::Category(c) => c,
            DeformationBase::Functor(f) => &f.source,
        }
    }

    fn functor(&self) -> Option<&FunctorData> {
        match &self.base {
            DeformationBase::Functor(f) => Some(f),
            DeformationBase::Category(_) => None,
        }
    }

    /// The complex whose degree-`unknown_degree` cochains are first-order deformations.
    pub fn spec(&self) -> ComplexSpec {
        match (&self.base, self.kind) {
            (DeformationBase::Category(c), _) => ComplexSpec::Category(c.clone()),
            (DeformationBase::Functor(f), DeformationKind::Functorial) => ComplexSpec::Functor(f.clone()),
            (DeformationBase::Functor(f), DeformationKind::Fibred) => ComplexSpec::Fibred(f.clone()),
            (DeformationBase::Functor(f), _) => ComplexSpec::Total(f.clone()),
        }
    }

    /// Literal degree of the deformation coefficients in [`Self::spec`].
    pub fn unknown_degree(&self) -> usize {
        match self.kind {
            DeformationKind::Category => 3,
            _ => 2,
        }
    }

    fn models(&self) -> Vec<CochainModel> {
        let f = self.functor();
        match self.kind {
            DeformationKind::Category => vec![CochainModel::category(self.source().clone())],
            DeformationKind::Functorial => vec![CochainModel::functor(f.expect("checked base"))],
            DeformationKind::Fibred => vec![CochainModel::functor(f.expect("checked base")), CochainModel::category(self.source().clone())],
            DeformationKind::Total => {
                let f = f.expect("checked base");
                vec![CochainModel::functor(f), CochainModel::category(f.source.clone()), CochainModel::category(f.target.clone())]
            }
        }
    }

    fn zero_unknowns(&self) -> Vec<Cochain> {
        match self.kind {
            DeformationKind::Category => vec![Cochain::zero(3)],
            DeformationKind::Functorial => vec![Cochain::zero(2)],
            DeformationKind::Fibred => vec![Cochain::zero(2), Cochain::zero(3)],
            DeformationKind::Total => vec![Cochain::zero(2), Cochain::zero(3), Cochain::zero(3)],
        }
    }

    /// Coefficients of order `n` in the order used by [`Self::spec`]'s components.
    pub fn unknowns(&self, n: usize) -> Vec<Cochain> {
        let get = |v: &Vec<Cochain>, d| v.get(n - 1).cloned().unwrap_or_else(|| Cochain::zero(d));
        match self.kind {
            DeformationKind::Category => vec![get(&self.alpha, 3)],
            DeformationKind::Functorial => vec![get(&self.ftilde, 2)],
            DeformationKind::Fibred => vec![get(&self.ftilde, 2), get(&self.alpha, 3)],
            DeformationKind::Total => vec![get(&self.ftilde, 2), get(&self.alpha, 3), get(&self.target_alpha, 3)],
        }
    }

    /// Appends coefficients for the next order.
    pub fn push_order(&mut self, parts: Vec<Cochain>) -> Result<()> {
        let mut it = parts.into_iter();
        let mut next = || it.next().ok_or_else(|| DeformationError::KindMismatch("missing coefficient".into()));
        match self.kind {
            DeformationKind::Category => self.alpha.push(next()?),
            DeformationKind::Functorial => self.ftilde.push(next()?),
            DeformationKind::Fibred => {
                self.ftilde.push(next()?);
                self.alpha.push(next()?);
            }
            DeformationKind::Total => {
                self.ftilde.push(next()?);
                self.alpha.push(next()?);
                self.target_alpha.push(next()?);
            }
        }
        self.order += 1;
        Ok(())
    }

    /// Checks kinds, list lengths and block shapes.
    pub fn validate(&self) -> Result<()> {
        self.check_base()?;
        let lens = [
            (self.kind.deforms_source(), self.alpha.len()),
            (self.kind.deforms_functor(), self.ftilde.len()),
            (self.kind == DeformationKind::Total, self.target_alpha.len()),
        ];
        for (used, len) in lens {
            let want = if used { self.order } else { 0 };
            if len != want {
                return Err(DeformationError::KindMismatch(format!("expected {want} coefficients for a {} deformation of order {}, got {len}", self.kind.name(), self.order)));
            }
        }
        let models = self.models();
        for n in 1..=self.order {
            for (m, c) in models.iter().zip(self.unknowns(n)) {
                m.space(c.degree).vector(&c)?;
            }
        }
        Ok(())
    }
}

/// A matrix with entries in `k[ε]/ε^(order+1)`, stored by coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesMatrix {
    coeffs: Vec<MatrixK>,
}

impl SeriesMatrix {
    pub fn new(coeffs: Vec<MatrixK>) -> SeriesMatrix {
        assert!(!coeffs.is_empty(), "a series has a constant term");
        SeriesMatrix { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> &MatrixK {
        &self.coeffs[i]
    }

    pub fn mul(&self, o: &SeriesMatrix) -> Result<SeriesMatrix> {
        let n = self.order().min(o.order());
        let f = self.coeffs[0].field();
        let mut out = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = MatrixK::zeros(f, self.coeffs[0].rows(), o.coeffs[0].cols());
            for i in 0..=k {
                if self.coeffs[i].is_zero() || o.coeffs[k - i].is_zero() {
                    continue;
                }
                acc = acc.add(&self.coeffs[i].mul(&o.coeffs[k - i])?)?;
            }
            out.push(acc);
        }
        Ok(SeriesMatrix { coeffs: out })
    }

    pub fn sub(&self, o: &SeriesMatrix) -> Result<SeriesMatrix> {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.sub(b)).collect::<std::result::Result<_, _>>()?;
        Ok(SeriesMatrix { coeffs })
    }

    /// Lowest order with a nonzero coefficient.
    pub fn first_nonzero(&self) -> Option<usize> {
        self.coeffs.iter().position(|m| !m.is_zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Source,
    Target,
}

/// One step of a coherence law whose coefficients vary with the order.
#[derive(Debug, Clone)]
enum Move {
    Assoc(Family, Vec<Dir>),
    Merge(Vec<Dir>),
}

struct Law {
    name: &'static str,
    ctx: Ctx,
    model: CochainModel,
    degree: usize,
    first: Vec<Move>,
    second: Vec<Move>,
    /// Sign that turns `first − second` into the obstruction orientation.
    flip: bool,
}

fn pentagon(family: Family) -> (Vec<Move>, Vec<Move>) {
    let a = |p: Vec<Dir>| Move::Assoc(family, p);
    (vec![a(vec![Dir::L]), a(vec![]), a(vec![Dir::R])], vec![a(vec![]), a(vec![])])
}

fn hexagon() -> (Vec<Move>, Vec<Move>) {
    (
        vec![Move::Merge(vec![Dir::L]), Move::Merge(vec![]), Move::Assoc(Family::Source, vec![Dir::In])],
        vec![Move::Assoc(Family::Target, vec![]), Move::Merge(vec![Dir::R]), Move::Merge(vec![])],
    )
}

fn laws(s: &DeformationState) -> Vec<Law> {
    let mut out = Vec::new();
    let category_law = |name, c: &Arc<Category>, family| {
        let (first, second) = pentagon(family);
        Law { name, ctx: Ctx::category(c.clone()), model: CochainModel::category(c.clone()), degree: 4, first, second, flip: true }
    };
    if s.kind.deforms_source() {
        out.push(category_law("pentagon", s.source(), Family::Source));
    }
    if s.kind == DeformationKind::Total {
        out.push(category_law("target pentagon", &s.functor().expect("checked base").target, Family::Target));
    }
    if let Some(f) = s.functor() {
        let (first, second) = hexagon();
        out.push(Law { name: "hexagon", ctx: f.ctx(), model: CochainModel::functor(f), degree: 3, first, second, flip: false });
    }
    out
}

struct Evaluator<'a> {
    state: &'a DeformationState,
    ctx: &'a Ctx,
    /// Coefficients above this order count as zero.
    known: usize,
    upto: usize,
}

impl Evaluator<'_> {
    fn coefficient(&self, mv: &Move, i: usize) -> Option<&BTreeMap<(Vec<Simple>, Simple), MatrixK>> {
        if i > self.known {
            return None;
        }
        let list = match mv {
            Move::Assoc(Family::Source, _) => &self.state.alpha,
            Move::Assoc(Family::Target, _) => &self.state.target_alpha,
            Move::Merge(_) => &self.state.ftilde,
        };
        list.get(i - 1).map(|c| &c.blocks)
    }

    fn step(&self, shape: &Shape, t: Simple, mv: &Move) -> Result<(SeriesMatrix, Shape)> {
        let base = match mv {
            Move::Assoc(_, p) => Step::Assoc { path: p.clone(), inverse: false },
            Move::Merge(p) => Step::Merge { path: p.clone() },
        };
        let one = std::slice::from_ref(&base);
        let next = self.ctx.route_shape(shape, one)?;
        let m0 = self.ctx.route_matrix(shape, t, one)?;
        let mut coeffs = vec![m0];
        for i in 1..=self.upto {
            let m = match self.coefficient(mv, i) {
                Some(blocks) => {
                    let step = match mv {
                        Move::Assoc(_, p) => Step::Cochain { path: p.clone(), arity: 3, kind: SlotKind::Nat, coeffs: Coeffs::Concrete(blocks) },
                        Move::Merge(p) => Step::Cochain {
                            path: p.clone(),
                            arity: 2,
                            kind: SlotKind::Functor { input: F_ID, output: F_ID },
                            coeffs: Coeffs::Concrete(blocks),
                        },
                    };
                    self.ctx.route_matrix(shape, t, &[step])?
                }
                None => MatrixK::zeros(self.ctx.field(), coeffs[0].rows(), coeffs[0].cols()),
            };
            coeffs.push(m);
        }
        Ok((SeriesMatrix::new(coeffs), next))
    }

    fn route(&self, src: &Shape, t: Simple, moves: &[Move]) -> Result<SeriesMatrix> {
        let mut shape = src.clone();
        let mut acc: Option<SeriesMatrix> = None;
        for mv in moves {
            let (m, next) = self.step(&shape, t, mv)?;
            acc = Some(match acc {
                None => m,
                Some(a) => a.mul(&m)?,
            });
            shape = next;
        }
        Ok(acc.expect("laws have steps"))
    }
}

/// `first − second` as series, per cochain block of the law.
fn law_defects(s: &DeformationState, law: &Law, known: usize, upto: usize) -> Result<Vec<(BlockSlot, SeriesMatrix)>> {
    let space = law.model.space(law.degree);
    let ev = Evaluator { state: s, ctx: &law.ctx, known, upto };
    space
        .slots
        .par_iter()
        .map(|slot| {
            let src = law.model.src_shape(&slot.tuple);
            let d = ev.route(&src, slot.out, &law.first)?.sub(&ev.route(&src, slot.out, &law.second)?)?;
            Ok((slot.clone(), d))
        })
        .collect()
}

fn instance_name(law: &Law, slot: &BlockSlot) -> String {
    let src = law.model.source();
    let names: Vec<&str> = slot.tuple.iter().map(|&a| src.name(a)).collect();
    format!("{} ({}) -> {}", law.name, names.join(", "), law.ctx.target().name(slot.out))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeformationReport {
    pub kind: DeformationKind,
    pub order: usize,
    /// Coherence instances checked, per law.
    pub instances: Vec<(String, usize)>,
}

/// Re-verifies every coherence law with all structure maps promoted to
/// truncated series.
pub fn check_deformation(s: &DeformationState) -> Result<DeformationReport> {
    s.validate()?;
    let mut worst: Option<(usize, String)> = None;
    let mut instances = Vec::new();
    for law in laws(s) {
        let defects = law_defects(s, &law, s.order, s.order)?;
        instances.push((law.name.to_string(), defects.len()));
        for (slot, d) in &defects {
            if let Some(order) = d.first_nonzero() {
                if worst.as_ref().is_none_or(|(o, _)| order < *o) {
                    worst = Some((order, instance_name(&law, slot)));
                }
            }
        }
    }
    match worst {
        Some((order, instance)) => Err(DeformationError::CoherenceFailure { order, instance }),
        None => Ok(DeformationReport { kind: s.kind, order: s.order, instances }),
    }
}

/// Obstruction cochains of order `n` computed from the coefficients of
/// lower order, one per deformed structure: the functor term first, then
/// the source and target associator terms.
fn raw_obstructions(s: &DeformationState, n: usize) -> Result<Vec<Cochain>> {
    let mut hex = None;
    let mut pents = Vec::new();
    for law in laws(s) {
        let defects = law_defects(s, &law, n - 1, n)?;
        let mut blocks = BTreeMap::new();
        for (slot, d) in defects {
            let m = d.coeff(n);
            blocks.insert((slot.tuple, slot.out), if law.flip { m.neg() } else { m.clone() });
        }
        let c = Cochain { degree: law.degree, blocks };
        if law.degree == 3 {
            hex = Some(c);
        } else {
            pents.push(c);
        }
    }
    Ok(hex.into_iter().chain(pents).collect())
}

/// Right-hand side in the deformation complex: `ω` for categories, `Ω` for
/// purely functorial deformations and `(Ω, −ω, −o)` for the cones.
fn obstruction_vector(s: &DeformationState, built: &BuiltComplex, parts: &[Cochain]) -> Result<Vec<Scalar>> {
    let k = s.unknown_degree() as i32 + 1;
    let signed: Vec<Cochain> = parts
        .iter()
        .enumerate()
        .map(|(i, c)| if i > 0 { Cochain { degree: c.degree, blocks: c.blocks.iter().map(|(k, m)| (k.clone(), m.neg())).collect() } } else { c.clone() })
        .collect();
    Ok(built.join(k, &signed)?)
}

fn first_order_complex(s: &DeformationState, top: usize) -> Result<BuiltComplex> {
    Ok(build_complex(&s.spec(), top)?)
}

/// The cocycle and obstruction route: the first order `n ≤ s.order` whose
/// coefficients violate `d(coefficients) = obstruction`, if any.
pub fn first_failing_condition(s: &DeformationState) -> Result<Option<usize>> {
    s.validate()?;
    let built = first_order_complex(s, s.unknown_degree())?;
    let k = s.unknown_degree() as i32;
    let d = built.complex.differential(k);
    for n in 1..=s.order {
        let x = built.join(k, &s.unknowns(n))?;
        let b = obstruction_vector(s, &built, &raw_obstructions(s, n)?)?;
        if d.mul_vec(&x)? != b {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

fn require_lower_orders(s: &DeformationState, n: usize) -> Result<()> {
    let mut lower = s.clone();
    truncate(&mut lower, n - 1);
    if let Some(bad) = first_failing_condition(&lower)? {
        return Err(DeformationError::LowerOrderNotDeformation(bad));
    }
    Ok(())
}

fn truncate(s: &mut DeformationState, order: usize) {
    s.order = s.order.min(order);
    for v in [&mut s.alpha, &mut s.ftilde, &mut s.target_alpha] {
        v.truncate(s.order);
    }
}

/// The order-`m` obstruction of a category deformation given `α^(1..m-1)`;
/// verifies that lower orders are deformations and that the result is closed.
pub fn obstruction_category(c: &Arc<Category>, alphas: &[Cochain], m: usize) -> Result<Cochain> {
    let mut s = DeformationState::trivial(DeformationKind::Category, DeformationBase::Category(c.clone()), 0)?;
    for a in alphas.iter().take(m - 1) {
        s.push_order(vec![a.clone()])?;
    }
    if s.order + 1 != m {
        return Err(DeformationError::KindMismatch(format!("order {m} needs {} lower coefficients", m - 1)));
    }
    require_lower_orders(&s, m)?;
    let omega = raw_obstructions(&s, m)?.remove(0);
    let model = CochainModel::category(c.clone());
    if !model.coboundary(&omega)?.is_zero() {
        return Err(DeformationError::NotClosed(m));
    }
    Ok(omega)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalObstruction {
    /// Functor coordinate, degree 3.
    pub functor: Cochain,
    /// Source associator coordinate, degree 4.
    pub source: Cochain,
    /// Target associator coordinate, degree 4.
    pub target: Cochain,
}

/// The order-`n` obstruction triple of a total deformation whose first
/// `n − 1` orders are given in `s`; verifies lower orders and closedness of
/// the functor coordinate.
pub fn obstruction_total(s: &DeformationState, n: usize) -> Result<TotalObstruction> {
    if s.kind != DeformationKind::Total {
        return Err(DeformationError::KindMismatch("total deformation expected".into()));
    }
    let mut lower = s.clone();
    truncate(&mut lower, n - 1);
    require_lower_orders(&lower, n)?;
    let parts = raw_obstructions(&lower, n)?;
    let f = lower.functor().expect("checked base");
    let (fm, cm, dm) = (CochainModel::functor(f), CochainModel::category(f.source.clone()), CochainModel::category(f.target.clone()));
    // δΩ + ⌈F(ω)⌉ − ⌈o_F•⌉ must vanish.
    let big = fm.space(3).vector(&parts[0])?;
    let omega = cm.space(4).vector(&parts[1])?;
    let o = dm.space(4).vector(&parts[2])?;
    let first = fm.coboundary_matrix(3)?.mul_vec(&big)?;
    let lifted = fm.lift_source_matrix(4, &cm)?.mul_vec(&omega)?;
    let pushed = fm.lift_target_matrix(4, &dm)?.mul_vec(&o)?;
    let closed = first.iter().zip(&lifted).zip(&pushed).all(|((a, b), c)| (&(a + b) - c).is_zero());
    if !closed {
        return Err(DeformationError::NotClosed(n));
    }
    let mut it = parts.into_iter();
    Ok(TotalObstruction { functor: it.next().unwrap(), source: it.next().unwrap(), target: it.next().unwrap() })
}

/// The order-`n` obstruction of any kind, one cochain per component of the
/// first-order complex, computed from the first `n − 1` orders of `s`.
pub fn obstruction(s: &DeformationState, n: usize) -> Result<Vec<Cochain>> {
    if n == 0 || s.order + 1 < n {
        return Err(DeformationError::KindMismatch(format!("order {n} needs {} lower coefficients", n.saturating_sub(1))));
    }
    let mut lower = s.clone();
    truncate(&mut lower, n - 1);
    require_lower_orders(&lower, n)?;
    raw_obstructions(&lower, n)
}

/// Truncation of `s` to its first `order` orders.
pub fn truncated_state(s: &DeformationState, order: usize) -> DeformationState {
    let mut lower = s.clone();
    truncate(&mut lower, order);
    lower
}

/// An obstruction that does not cobound, with its coordinates in the
/// cohomology basis of the next degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionClass {
    pub order: usize,
    pub degree: i32,
    pub parts: Vec<Cochain>,
    pub class: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extension {
    Extended(DeformationState),
    Obstructed(ObstructionClass),
}

/// Extends a deformation by one order, or reports the obstruction class.
pub fn extend_order(s: &DeformationState) -> Result<Extension> {
    check_deformation(s)?;
    let n = s.order + 1;
    let k = s.unknown_degree();
    let parts = raw_obstructions(s, n)?;
    let built = first_order_complex(s, k)?;
    let b = obstruction_vector(s, &built, &parts)?;
    let d = built.complex.differential(k as i32);
    match solve_linear(&d, &b)? {
        Solution::Solved(x) => {
            let mut next = s.clone();
            next.push_order(built.split(k as i32, &x)?)?;
            check_deformation(&next)?;
            Ok(Extension::Extended(next))
        }
        Solution::NoSolution { .. } => {
            let bigger = first_order_complex(s, k + 1)?;
            let h = bigger.complex.cohomology(k as i32 + 1)?;
            let class = class_coordinates(&bigger, k as i32 + 1, &h.representatives, &b)?;
            Ok(Extension::Obstructed(ObstructionClass { order: n, degree: k as i32 + 1, parts, class }))
        }
    }
}

/// Coordinates of the class of cocycle `v` against cohomology representatives.
fn class_coordinates(b: &BuiltComplex, n: i32, reps: &[Vec<Scalar>], v: &[Scalar]) -> Result<Vec<Scalar>> {
    let mut cols = reps.to_vec();
    cols.extend(b.complex.coboundaries(n));
    let m = MatrixK::from_columns(b.complex.field(), b.complex.dim(n), &cols);
    match solve_linear(&m, v)? {
        Solution::Solved(x) => Ok(x[..reps.len()].to_vec()),
        Solution::NoSolution { .. } => Err(DeformationError::NotClosed(n as usize)),
    }
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub kind: &'static str,
    /// Requested degree.
    pub degree: usize,
    /// Degree read in the built complex.
    pub literal_degree: i32,
    pub dim: usize,
    /// Representatives split into the complex's components.
    pub representatives: Vec<Vec<Cochain>>,
    pub built: BuiltComplex,
}

/// Cohomology classifying first-order deformations: degree 3 for categories
/// and the cones, 2 for functors, 1 for natural transformations.
pub fn classify_first_order(spec: &ComplexSpec, k: usize) -> Result<Classification> {
    let want = match spec {
        ComplexSpec::Functor(_) => 2,
        ComplexSpec::Bimodule(_) => 1,
        _ => 3,
    };
    if k != want {
        return Err(DeformationError::KindDegreeMismatch { kind: spec.name(), want, got: k });
    }
    let literal = if spec.is_cone() { k - 1 } else { k };
    let built = build_complex(spec, literal)?;
    let h = built.complex.cohomology(literal as i32)?;
    let representatives = h.representatives.iter().map(|v| built.split(literal as i32, v)).collect::<std::result::Result<_, _>>()?;
    Ok(Classification { kind: spec.name(), degree: k, literal_degree: literal as i32, dim: h.dim, representatives, built })
}

/// Named components of an equivalence between first-order deformations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceWitness {
    pub parts: Vec<(&'static str, Cochain)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent(EquivalenceWitness),
    /// The coefficient difference and its class coordinates.
    NotEquivalent { difference: Vec<Cochain>, class: Vec<Scalar> },
}

/// Solves for a gauge relating two first-order deformations of the same base.
pub fn equivalence_check(s1: &DeformationState, s2: &DeformationState) -> Result<Equivalence> {
    if s1.kind != s2.kind || s1.base != s2.base {
        return Err(DeformationError::KindMismatch("states differ in kind or base".into()));
    }
    if s1.order < 1 || s2.order < 1 {
        return Err(DeformationError::KindMismatch("first-order states expected".into()));
    }
    s1.validate()?;
    s2.validate()?;
    let k = s1.unknown_degree();
    let built = first_order_complex(s1, k)?;
    let ki = k as i32;
    let a = built.join(ki, &s1.unknowns(1))?;
    let b = built.join(ki, &s2.unknowns(1))?;
    let diff: Vec<Scalar> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    match solve_linear(&built.complex.differential(ki - 1), &diff)? {
        Solution::Solved(x) => {
            let parts = built.split(ki - 1, &x)?;
            let names: &[&'static str] = match s1.kind {
                DeformationKind::Category => &["phi"],
                DeformationKind::Functorial => &["psi"],
                DeformationKind::Fibred => &["psi", "iota"],
                DeformationKind::Total => &["psi", "iota", "kappa"],
            };
            // Cone preimages (x, y) give the gauge (x, −y).
            let parts = names
                .iter()
                .zip(parts)
                .enumerate()
                .map(|(i, (n, c))| (*n, if i > 0 { Cochain { degree: c.degree, blocks: c.blocks.iter().map(|(k, m)| (k.clone(), m.neg())).collect() } } else { c }))
                .collect();
            Ok(Equivalence::Equivalent(EquivalenceWitness { parts }))
        }
        Solution::NoSolution { .. } => {
            let h = built.complex.cohomology(ki)?;
            let class = class_coordinates(&built, ki, &h.representatives, &diff)?;
            Ok(Equivalence::NotEquivalent { difference: built.split(ki, &diff)?, class })
        }
    }
}

/// Deformed unit isomorphisms and their coherence verdicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitTransport {
    pub order: usize,
    /// `A ⊗ 1 → A` per simple.
    pub right_unit: Vec<TruncatedSeries>,
    /// `1 ⊗ A → A` per simple.
    pub left_unit: Vec<TruncatedSeries>,
    pub triangle: bool,
    pub bigon: bool,
    pub failures: Vec<String>,
}

fn associator_series(c: &Category, alpha: &[Cochain], key: [Simple; 4], order: usize) -> Option<SeriesMatrix> {
    let base = c.f(key[0], key[1], key[2], key[3])?.clone();
    let mut coeffs = vec![base.clone()];
    for i in 1..=order {
        let block = alpha.get(i - 1).and_then(|a| a.blocks.get(&(key[..3].to_vec(), key[3])));
        coeffs.push(block.cloned().unwrap_or_else(|| MatrixK::zeros(c.field, base.rows(), base.cols())));
    }
    Some(SeriesMatrix::new(coeffs))
}

fn scalar_series(m: &SeriesMatrix, field: Field) -> Result<TruncatedSeries> {
    Ok(TruncatedSeries::new(field, m.order(), (0..=m.order()).map(|i| m.coeff(i).get(0, 0).clone()).collect())?)
}

/// Transports the units along a deformed associator with unit gauge
/// `ν = λ_1 + ν^(1) ε + …` and verifies triangle and bigon.
pub fn unit_transport(s: &DeformationState, nu: &[Scalar]) -> Result<UnitTransport> {
    check_deformation(s)?;
    let c = s.source();
    let f = c.field;
    let m = s.order;
    let one = c.unit;
    let mut gauge = vec![c.lambda[one].clone()];
    gauge.extend(nu.iter().cloned());
    let gauge = TruncatedSeries::new(f, m, gauge)?;
    let mut right = Vec::new();
    let mut left = Vec::new();
    for a in c.simples() {
        let r = associator_series(c, &s.alpha, [a, one, one, a], m).ok_or(DeformationError::NotInvertible)?;
        right.push(scalar_series(&r, f)?.mul(&gauge)?);
        let l = associator_series(c, &s.alpha, [one, one, a, a], m).ok_or(DeformationError::NotInvertible)?;
        let inv = scalar_series(&l, f)?.invert().map_err(|_| DeformationError::NotInvertible)?;
        left.push(inv.mul(&gauge)?);
    }
    let mut failures = Vec::new();
    for a in c.simples() {
        for b in c.simples() {
            for d in c.simples() {
                let Some(assoc) = associator_series(c, &s.alpha, [a, one, b, d], m) else { continue };
                if assoc.coeff(0).rows() == 0 {
                    continue;
                }
                for i in 0..=m {
                    let mut lhs = MatrixK::zeros(f, assoc.coeff(0).rows(), assoc.coeff(0).cols());
                    for j in 0..=i {
                        lhs = lhs.add(&assoc.coeff(j).scale(left[b].coeff(i - j)))?;
                    }
                    let rhs = MatrixK::identity(f, assoc.coeff(0).rows()).scale(right[a].coeff(i));
                    if lhs != rhs {
                        failures.push(format!("triangle ({}, 1, {}) -> {} at order {i}", c.name(a), c.name(b), c.name(d)));
                        break;
                    }
                }
            }
        }
    }
    let triangle = failures.is_empty();
    let bigon = right[one] == left[one];
    if !bigon {
        failures.push("bigon".into());
    }
    Ok(UnitTransport { order: m, right_unit: right, left_unit: left, triangle, bigon, failures })
}

#[derive(Debug, Clone)]
pub struct NatTransformationReport {
    pub h1: Classification,
    /// Obstructions to extending first-order deformations live here.
    pub h2_dim: usize,
}

/// First-order deformations of a monoidal natural transformation `φ: F → G`.
pub fn nat_transf_first_order(f: &FunctorData, g: &FunctorData, phi: &TransformBlocks) -> Result<NatTransformationReport> {
    if !nat_transformation_check(phi, f, g)? {
        return Err(DeformationError::NotMonoidalTransformation);
    }
    let m = BimoduleData::from_transformation(f, g, phi)?;
    let spec = ComplexSpec::Bimodule(m);
    let built = build_complex(&spec, 2)?;
    let h2_dim = built.complex.cohomology(2)?.dim;
    Ok(NatTransformationReport { h1: classify_first_order(&spec, 1)?, h2_dim })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{vec_z2_sign, vec_zn};
    use crate::functor::identity_transformation;

    fn gf(p: u64) -> Field {
        Field::fp(p).unwrap()
    }

    fn category_state(c: &Arc<Category>, alpha: Vec<Cochain>) -> DeformationState {
        let mut s = DeformationState::trivial(DeformationKind::Category, DeformationBase::Category(c.clone()), 0).unwrap();
        for a in alpha {
            s.push_order(vec![a]).unwrap();
        }
        s
    }

    fn generator(c: &Arc<Category>) -> Cochain {
        let cl = classify_first_order(&ComplexSpec::Category(c.clone()), 3).unwrap();
        cl.representatives[0][0].clone()
    }

    #[test]
    fn trivial_deformations_pass() {
        let c = Arc::new(vec_z2_sign(Field::Q));
        let s = DeformationState::trivial(DeformationKind::Category, DeformationBase::Category(c.clone()), 2).unwrap();
        check_deformation(&s).unwrap();
        let f = FunctorData::identity(&c);
        for kind in [DeformationKind::Functorial, DeformationKind::Fibred, DeformationKind::Total] {
            let s = DeformationState::trivial(kind, DeformationBase::Functor(f.clone()), 2).unwrap();
            check_deformation(&s).unwrap();
            assert_eq!(first_failing_condition(&s).unwrap(), None);
        }
    }

    #[test]
    fn vec_z2_generator_and_non_cocycle() {
        let f2 = gf(2);
        let c = Arc::new(vec_zn(f2, 2));
        let g = generator(&c);
        let s = category_state(&c, vec![g.clone()]);
        check_deformation(&s).unwrap();
        assert_eq!(first_failing_condition(&s).unwrap(), None);
        let space = CochainModel::category(c.clone()).space(3);
        let mut v = space.zero_vector();
        v[1] = f2.one();
        let bad = category_state(&c, vec![space.to_cochain(&v).unwrap()]);
        assert!(matches!(check_deformation(&bad), Err(DeformationError::CoherenceFailure { order: 1, .. })));
        assert_eq!(first_failing_condition(&bad).unwrap(), Some(1));
    }

    #[test]
    fn extension_matches_direct_check() {
        let f2 = gf(2);
        let c = Arc::new(vec_zn(f2, 2));
        let s = category_state(&c, vec![generator(&c)]);
        let omega = obstruction_category(&c, &s.alpha, 2).unwrap();
        match extend_order(&s).unwrap() {
            Extension::Extended(next) => {
                assert_eq!(next.order, 2);
                assert_eq!(first_failing_condition(&next).unwrap(), None);
            }
            Extension::Obstructed(o) => assert_eq!(o.parts[0], omega),
        }
    }

    #[test]
    fn first_order_classification() {
        let f2 = gf(2);
        let c = Arc::new(vec_zn(f2, 2));
        assert_eq!(classify_first_order(&ComplexSpec::Category(c.clone()), 3).unwrap().dim, 1);
        let f = FunctorData::identity(&c);
        assert_eq!(classify_first_order(&ComplexSpec::Functor(f.clone()), 2).unwrap().dim, 1);
        assert!(matches!(classify_first_order(&ComplexSpec::Functor(f), 3), Err(DeformationError::KindDegreeMismatch { .. })));
        let c3 = Arc::new(vec_zn(Field::Q, 3));
        assert_eq!(classify_first_order(&ComplexSpec::Category(c3), 3).unwrap().dim, 0);
    }

    #[test]
    fn equivalence_round_trip() {
        let f2 = gf(2);
        let c = Arc::new(vec_zn(f2, 2));
        let model = CochainModel::category(c.clone());
        let space = model.space(2);
        let mut v = space.zero_vector();
        v[2] = f2.one();
        let phi = space.to_cochain(&v).unwrap();
        let g = generator(&c);
        let s1 = category_state(&c, vec![g.clone()]);
        let shifted = model.space(3).vector(&g).unwrap();
        let dphi = model.space(3).vector(&model.coboundary(&phi).unwrap()).unwrap();
        let sum: Vec<Scalar> = shifted.iter().zip(&dphi).map(|(a, b)| a + b).collect();
        let s2 = category_state(&c, vec![model.space(3).to_cochain(&sum).unwrap()]);
        let Equivalence::Equivalent(w) = equivalence_check(&s1, &s2).unwrap() else { panic!("should be equivalent") };
        let back = model.space(3).vector(&model.coboundary(&w.parts[0].1).unwrap()).unwrap();
        let diff: Vec<Scalar> = shifted.iter().zip(&sum).map(|(a, b)| a - b).collect();
        assert_eq!(back, diff);
        let trivial = category_state(&c, vec![Cochain::zero(3)]);
        assert!(matches!(equivalence_check(&trivial, &s1).unwrap(), Equivalence::NotEquivalent { .. }));
    }

    #[test]
    fn units_transport_with_gauge() {
        let f2 = gf(2);
        let c = Arc::new(vec_zn(f2, 2));
        let s = category_state(&c, vec![generator(&c)]);
        for nu in [vec![], vec![f2.one()]] {
            let u = unit_transport(&s, &nu).unwrap();
            assert!(u.triangle && u.bigon, "{:?}", u.failures);
        }
    }

    #[test]
    fn nat_transformations_of_identity() {
        for (field, want) in [(gf(2), 1), (Field::Q, 0)] {
            let c = Arc::new(vec_zn(field, 2));
            let f = FunctorData::identity(&c);
            let r = nat_transf_first_order(&f, &f, &identity_transformation(&f)).unwrap();
            assert_eq!(r.h1.dim, want);
        }
    }

    fn cocycle_states(kind: DeformationKind, f: &FunctorData, seed: u64) -> Vec<DeformationState> {
        let base = DeformationState::trivial(kind, DeformationBase::Functor(f.clone()), 0).unwrap();
        let k = base.unknown_degree() as i32;
        let built = build_complex(&base.spec(), k as usize).unwrap();
        let z = built.complex.cocycles(k);
        let field = f.field();
        (0..4u64)
            .map(|t| {
                let mut v = vec![field.zero(); built.complex.dim(k)];
                for (j, b) in z.iter().enumerate() {
                    let coef = field.from_i64(((seed + t) * 31 + j as u64 * 17) as i64 % 5);
                    for (x, y) in v.iter_mut().zip(b) {
                        *x = &*x + &(&coef * y);
                    }
                }
                let mut s = base.clone();
                s.push_order(built.split(k, &v).unwrap()).unwrap();
                s
            })
            .collect()
    }

    #[test]
    fn functor_kinds_extend_consistently() {
        let c = Arc::new(vec_zn(gf(3), 2));
        let f = FunctorData::identity(&c);
        for kind in [DeformationKind::Functorial, DeformationKind::Fibred, DeformationKind::Total] {
            for s in cocycle_states(kind, &f, 3) {
                check_deformation(&s).unwrap();
                assert_eq!(first_failing_condition(&s).unwrap(), None);
                let mut cur = s;
                for _ in 0..2 {
                    match extend_order(&cur).unwrap() {
                        Extension::Extended(next) => {
                            assert_eq!(first_failing_condition(&next).unwrap(), None);
                            cur = next;
                        }
                        Extension::Obstructed(_) => break,
                    }
                }
                if kind == DeformationKind::Total && cur.order >= 2 {
                    obstruction_total(&cur, 2).unwrap();
                }
            }
        }
    }
}
