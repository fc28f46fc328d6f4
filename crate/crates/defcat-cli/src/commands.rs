//! Command dispatch and deterministic JSON reports.

use std::sync::Arc;

use serde_json::{json, Map, Value};
use thiserror::Error;

use defcat::arith::{Scalar, TruncatedSeries};
use defcat::cochain::{Cochain, CochainError, CochainModel};
use defcat::coherence::verify_coherence;
use defcat::complex::ComplexError;
use defcat::complexes::{build_complex, multiplication_functor, BuiltComplex, ComplexSpec};
use defcat::deform::{
    check_deformation, classify_first_order, extend_order, first_failing_condition, nat_transf_first_order, obstruction,
    truncated_state, unit_transport, Classification, DeformationBase, DeformationError, DeformationKind, DeformationState,
    Extension,
};
use defcat::functor::{algebra_to_functor, BimoduleData, FunctorData, FunctorError};
use defcat::fusion::{Category, FusionError};
use defcat::hochschild::{bimodule_subcomplex_exactness, build_hochschild, compare_with_categorical, HochschildError};

use crate::document::{cochain_json, products_model, WorkspaceDocument};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("unknown command {0:?}")]
    UnknownCommand(String),
    #[error("invalid flag: {0}")]
    Flag(String),
    #[error("document has no {0} section")]
    MissingSection(&'static str),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Deformation(#[from] DeformationError),
    #[error(transparent)]
    Functor(#[from] FunctorError),
    #[error(transparent)]
    Hochschild(#[from] HochschildError),
}

type Result<T> = std::result::Result<T, CommandError>;

pub const COMMANDS: [&str; 9] = ["check", "cohomology", "classify", "deform", "obstruct", "products", "units", "hochschild", "compare"];

/// Flags shared by all commands; each command reads the ones it needs.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub kind: Option<String>,
    pub degree: Option<usize>,
    pub order: Option<usize>,
    pub max_order: Option<usize>,
}

/// A report and whether it records a mathematical negative result.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub value: Value,
    pub negative: bool,
}

impl Report {
    fn ok(value: Value) -> Report {
        Report { value, negative: false }
    }

    pub fn exit_code(&self) -> i32 {
        if self.negative {
            2
        } else {
            0
        }
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.value).expect("JSON values serialize");
        s.push('\n');
        s
    }
}

pub fn run(command: &str, doc: &WorkspaceDocument, flags: &Flags) -> Result<Report> {
    match command {
        "check" => check(doc),
        "cohomology" => cohomology(doc, flags),
        "classify" => classify(doc, flags),
        "deform" => deform(doc, flags),
        "obstruct" => obstruct(doc, flags),
        "products" => products(doc),
        "units" => units(doc),
        "hochschild" => hochschild(doc, flags),
        "compare" => compare(doc, flags),
        other => Err(CommandError::UnknownCommand(other.into())),
    }
}

fn category(doc: &WorkspaceDocument) -> Result<&Arc<Category>> {
    doc.category.as_ref().ok_or(CommandError::MissingSection("category"))
}

fn functor(doc: &WorkspaceDocument) -> Result<&FunctorData> {
    doc.functor.as_ref().ok_or(CommandError::MissingSection("functor"))
}

fn deformation(doc: &WorkspaceDocument) -> Result<&DeformationState> {
    doc.deformation.as_ref().ok_or(CommandError::MissingSection("deformation"))
}

fn scalars(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(Scalar::to_json).collect())
}

fn series(s: &TruncatedSeries) -> Value {
    scalars(s.coeffs())
}

fn check(doc: &WorkspaceDocument) -> Result<Report> {
    let mut out = Map::new();
    // Loading already verified every section; this re-derives the verdicts.
    for (key, c) in [("category", &doc.category), ("target_category", &doc.target_category)] {
        if let Some(c) = c {
            verify_coherence(c)?;
            let prefix = if key == "category" { String::new() } else { format!("{key}_") };
            out.insert(format!("{prefix}pentagon"), json!("ok"));
            out.insert(format!("{prefix}triangle"), json!("ok"));
        }
    }
    for (key, present) in [
        ("functor", doc.functor.is_some()),
        ("functor2", doc.functor2.is_some()),
        ("transformation", doc.transformation.is_some()),
        ("bimodule", doc.bimodule.is_some()),
        ("algebra", doc.algebra.is_some()),
    ] {
        if present {
            out.insert(key.into(), json!("ok"));
        }
    }
    let mut negative = false;
    if let Some(s) = &doc.deformation {
        let entry = match check_deformation(s) {
            Ok(r) => json!({"kind": r.kind.name(), "order": r.order, "status": "ok"}),
            Err(DeformationError::CoherenceFailure { order, instance }) => {
                negative = true;
                let dual = first_failing_condition(s)?;
                json!({"kind": s.kind.name(), "order": s.order, "status": "fails", "failing_order": order, "instance": instance, "cocycle_condition_order": dual})
            }
            Err(e) => return Err(e.into()),
        };
        out.insert("deformation".into(), entry);
    }
    Ok(Report { value: Value::Object(out), negative })
}

/// The complex selected by `--kind`.
fn complex_spec(doc: &WorkspaceDocument, kind: &str) -> Result<ComplexSpec> {
    Ok(match kind {
        "category" => ComplexSpec::Category(category(doc)?.clone()),
        "functor" => ComplexSpec::Functor(functor(doc)?.clone()),
        "bimodule" => match (&doc.bimodule, &doc.functor) {
            (Some(m), _) => ComplexSpec::Bimodule(m.clone()),
            (None, Some(f)) => ComplexSpec::Bimodule(BimoduleData::regular(f)),
            (None, None) => return Err(CommandError::MissingSection("bimodule")),
        },
        "fibred" => ComplexSpec::Fibred(functor(doc)?.clone()),
        "total" => ComplexSpec::Total(functor(doc)?.clone()),
        "coarse" => ComplexSpec::Coarse(multiplication_functor(category(doc)?)?),
        other => return Err(CommandError::Flag(format!("unknown --kind {other:?}"))),
    })
}

fn kind_flag(flags: &Flags) -> Result<&str> {
    flags.kind.as_deref().ok_or_else(|| CommandError::Flag("--kind is required".into()))
}

fn cohomology(doc: &WorkspaceDocument, flags: &Flags) -> Result<Report> {
    let kind = kind_flag(flags)?;
    let degree = flags.degree.ok_or_else(|| CommandError::Flag("--degree is required".into()))?;
    let spec = complex_spec(doc, kind)?;
    let built = build_complex(&spec, degree)?;
    Ok(Report::ok(json!({"dim": built.complex.cohomology(degree as i32)?.dim})))
}

fn component_json(built: &BuiltComplex, parts: &[Cochain]) -> Value {
    let mut m = Map::new();
    for (c, part) in built.components.iter().zip(parts) {
        m.insert(c.name.into(), cochain_json(part, &c.model));
    }
    Value::Object(m)
}

fn classification_json(c: &Classification) -> Value {
    json!({
        "kind": c.kind,
        "degree": c.degree,
        "complex_degree": c.literal_degree,
        "dim": c.dim,
        "representatives": c.representatives.iter().map(|r| component_json(&c.built, r)).collect::<Vec<_>>(),
    })
}

fn classify(doc: &WorkspaceDocument, flags: &Flags) -> Result<Report> {
    let kind = kind_flag(flags)?;
    if kind == "transformation" {
        let phi = doc.transformation.as_ref().ok_or(CommandError::MissingSection("transformation"))?;
        let g = doc.functor2.as_ref().ok_or(CommandError::MissingSection("functor2"))?;
        let r = nat_transf_first_order(functor(doc)?, g, phi)?;
        let mut v = classification_json(&r.h1);
        v["obstruction_space_dim"] = json!(r.h2_dim);
        return Ok(Report::ok(v));
    }
    let spec = complex_spec(doc, kind)?;
    let k = flags.degree.unwrap_or(match spec {
        ComplexSpec::Functor(_) => 2,
        ComplexSpec::Bimodule(_) => 1,
        _ => 3,
    });
    Ok(Report::ok(classification_json(&classify_first_order(&spec, k)?)))
}

/// Component names and cochain models of a deformation's coefficients.
fn state_models(s: &DeformationState) -> Vec<(&'static str, CochainModel)> {
    match &s.base {
        DeformationBase::Category(c) => vec![("category", CochainModel::category(c.clone()))],
        DeformationBase::Functor(f) => {
            let mut out = vec![("functor", CochainModel::functor(f))];
            if matches!(s.kind, DeformationKind::Fibred | DeformationKind::Total) {
                out.push(("source", CochainModel::category(f.source.clone())));
            }
            if s.kind == DeformationKind::Total {
                out.push(("target", CochainModel::category(f.target.clone())));
            }
            out
        }
    }
}

fn parts_json(s: &DeformationState, parts: &[Cochain]) -> Value {
    let mut m = Map::new();
    for ((name, model), c) in state_models(s).iter().zip(parts) {
        m.insert((*name).into(), cochain_json(c, model));
    }
    Value::Object(m)
}

fn deform(doc: &WorkspaceDocument, flags: &Flags) -> Result<Report> {
    let start = deformation(doc)?;
    let max = flags.max_order.ok_or_else(|| CommandError::Flag("--max-order is required".into()))?;
    let mut s = start.clone();
    let mut orders = Vec::new();
    let mut negative = false;
    while s.order < max {
        match extend_order(&s)? {
            Extension::Extended(next) => {
                let n = next.order;
                orders.push(json!({"order": n, "status": "extended", "coefficients": parts_json(&next, &next.unknowns(n))}));
                s = next;
            }
            Extension::Obstructed(o) => {
                orders.push(json!({
                    "order": o.order,
                    "status": "obstructed",
                    "degree": o.degree,
                    "class": scalars(&o.class),
                    "obstruction": parts_json(&s, &o.parts),
                }));
                negative = true;
                break;
            }
        }
    }
    let value = json!({"kind": s.kind.name(), "start_order": start.order, "reached_order": s.order, "orders": orders});
    Ok(Report { value, negative })
}

fn obstruct(doc: &WorkspaceDocument, flags: &Flags) -> Result<Report> {
    let s = deformation(doc)?;
    let n = flags.order.unwrap_or(s.order + 1);
    let parts = obstruction(s, n)?;
    let lower = truncated_state(s, n - 1);
    let (status, class) = match extend_order(&lower)? {
        Extension::Extended(_) => ("coboundary", None),
        Extension::Obstructed(o) => ("obstructed", Some(scalars(&o.class))),
    };
    let mut v = json!({"kind": s.kind.name(), "order": n, "status": status, "obstruction": parts_json(s, &parts)});
    if let Some(c) = class {
        v["class"] = c;
    }
    Ok(Report { value: v, negative: status == "obstructed" })
}

fn products(doc: &WorkspaceDocument) -> Result<Report> {
    let model = products_model(doc).ok_or(CommandError::MissingSection("category"))?;
    let [g, h, ..] = doc.cochains.as_slice() else {
        return Err(CommandError::MissingSection("cochains (two entries)"));
    };
    let value = json!({
        "cup": cochain_json(&model.cup(g, h)?, &model),
        "composition": cochain_json(&model.composition_product(g, h)?, &model),
        "bracket": cochain_json(&model.bracket(g, h)?, &model),
        "coboundary": [cochain_json(&model.coboundary(g)?, &model), cochain_json(&model.coboundary(h)?, &model)],
    });
    Ok(Report::ok(value))
}

fn units(doc: &WorkspaceDocument) -> Result<Report> {
    let s = deformation(doc)?;
    let t = unit_transport(s, &s.nu)?;
    let c = s.source();
    let named = |v: &[TruncatedSeries]| -> Value { Value::Object(c.simples().map(|a| (c.name(a).to_string(), series(&v[a]))).collect()) };
    let ok = |b: bool| if b { "ok" } else { "fails" };
    let value = json!({
        "order": t.order,
        "right_unit": named(&t.right_unit),
        "left_unit": named(&t.left_unit),
        "triangle": ok(t.triangle),
        "bigon": ok(t.bigon),
        "failures": t.failures,
    });
    Ok(Report { value, negative: !(t.triangle && t.bigon) })
}

fn algebra(doc: &WorkspaceDocument) -> Result<&crate::document::AlgebraSection> {
    doc.algebra.as_ref().ok_or(CommandError::MissingSection("algebra"))
}

fn hochschild(doc: &WorkspaceDocument, flags: &Flags) -> Result<Report> {
    let a = algebra(doc)?;
    let top = flags.degree.unwrap_or(3);
    let hh = build_hochschild(&a.algebra, &a.bimodule, top + 1)?;
    let dims = (0..=top as i32).map(|n| hh.cohomology(n).map(|h| h.dim)).collect::<std::result::Result<Vec<_>, _>>()?;
    let ex = bimodule_subcomplex_exactness(&a.algebra, &a.bimodule, top)?;
    let degrees: Vec<Value> = ex
        .degrees
        .iter()
        .map(|d| {
            json!({
                "degree": d.degree,
                "cochains": d.full_dim,
                "bimodule_inducing": d.subspace_dim,
                "cocycles": d.cocycles,
                "restricted_cohomology": d.restricted_cohomology,
            })
        })
        .collect();
    let value = json!({
        "cohomology": dims,
        "subcomplex": {"degrees": degrees, "cocycles_in_degree_2": ex.claim_a, "contracting": ex.claim_b, "failures": ex.failures},
    });
    Ok(Report { value, negative: !(ex.claim_a && ex.claim_b) })
}

fn compare(doc: &WorkspaceDocument, flags: &Flags) -> Result<Report> {
    let a = algebra(doc)?;
    algebra_to_functor(&a.algebra)?;
    let r = compare_with_categorical(&a.algebra, flags.degree.unwrap_or(3))?;
    let degrees: Vec<Value> = r
        .degrees
        .iter()
        .map(|d| {
            json!({
                "degree": d.degree,
                "categorical_dim": d.categorical_dim,
                "classical_dim": d.classical_dim,
                "categorical_cohomology": d.categorical_cohomology,
                "classical_cohomology": d.classical_cohomology,
            })
        })
        .collect();
    let matches = r.degrees.iter().all(|d| d.categorical_dim == d.classical_dim && d.categorical_cohomology == d.classical_cohomology);
    let value = json!({"degrees": degrees, "intertwines": r.intertwines, "dimensions_match": matches});
    Ok(Report { value, negative: !(matches && r.intertwines) })
}
