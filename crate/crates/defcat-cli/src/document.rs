//! Loading and validating workspace documents.
//!
//! Every error carries a JSON pointer to the offending value.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde_json::Value;
use thiserror::Error;

use defcat::arith::{Field, Scalar};
use defcat::cochain::{Cochain, CochainModel};
use defcat::coherence::verify_coherence;
use defcat::deform::{DeformationBase, DeformationKind, DeformationState};
use defcat::engine::TransformBlocks;
use defcat::functor::{nat_transformation_check, verify_bimodule, verify_functor, AlgebraData, BimoduleData, FunctorData};
use defcat::fusion::{Category, FusionData, Simple};
use defcat::hochschild::AlgebraBimodule;
use defcat::linalg::MatrixK;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("validation error at {pointer}: {message}")]
    Validation { pointer: String, message: String },
}

type Result<T> = std::result::Result<T, LoadError>;

struct At<'a> {
    value: &'a Value,
    pointer: String,
}

impl<'a> At<'a> {
    fn root(value: &'a Value) -> At<'a> {
        At { value, pointer: String::new() }
    }

    fn schema<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(LoadError::Schema { pointer: self.ptr(), message: message.into() })
    }

    fn invalid<T>(&self, message: impl std::fmt::Display) -> Result<T> {
        Err(LoadError::Validation { pointer: self.ptr(), message: message.to_string() })
    }

    fn ptr(&self) -> String {
        if self.pointer.is_empty() {
            "/".into()
        } else {
            self.pointer.clone()
        }
    }

    fn opt(&self, key: &str) -> Option<At<'a>> {
        self.value.get(key).map(|value| At { value, pointer: format!("{}/{key}", self.pointer) })
    }

    fn key(&self, key: &str) -> Result<At<'a>> {
        match self.opt(key) {
            Some(a) => Ok(a),
            None => At { value: self.value, pointer: format!("{}/{key}", self.pointer) }.schema("missing"),
        }
    }

    fn items(&self) -> Result<Vec<At<'a>>> {
        match self.value {
            Value::Array(xs) => Ok(xs.iter().enumerate().map(|(i, value)| At { value, pointer: format!("{}/{i}", self.pointer) }).collect()),
            _ => self.schema("expected an array"),
        }
    }

    fn entries(&self) -> Result<Vec<(String, At<'a>)>> {
        match self.value {
            Value::Object(m) => Ok(m.iter().map(|(k, value)| (k.clone(), At { value, pointer: format!("{}/{k}", self.pointer) })).collect()),
            _ => self.schema("expected an object"),
        }
    }

    fn str(&self) -> Result<&'a str> {
        self.value.as_str().map_or_else(|| self.schema("expected a string"), Ok)
    }

    fn uint(&self) -> Result<usize> {
        self.value.as_u64().map_or_else(|| self.schema("expected a non-negative integer"), |n| Ok(n as usize))
    }

    fn scalar(&self, field: Field) -> Result<Scalar> {
        Scalar::from_json(field, self.value).or_else(|e| self.schema(format!("bad scalar: {e}")))
    }

    fn scalars(&self, field: Field) -> Result<Vec<Scalar>> {
        self.items()?.iter().map(|a| a.scalar(field)).collect()
    }

    fn matrix(&self, field: Field) -> Result<MatrixK> {
        let rows: Vec<Vec<Scalar>> = self.items()?.iter().map(|r| r.scalars(field)).collect::<Result<_>>()?;
        if rows.is_empty() {
            return self.schema("empty matrix");
        }
        MatrixK::from_rows(field, rows).or_else(|e| self.schema(e.to_string()))
    }
}

/// Simple-object names of one category.
#[derive(Debug, Clone)]
struct Names(Vec<String>);

impl Names {
    fn lookup(&self, at: &At<'_>) -> Result<Simple> {
        let s = at.str()?;
        self.0.iter().position(|n| n == s).map_or_else(|| at.schema(format!("unknown simple {s:?}")), Ok)
    }
}

/// Algebra section with its bimodule (regular unless given).
#[derive(Debug, Clone)]
pub struct AlgebraSection {
    pub algebra: AlgebraData,
    pub bimodule: AlgebraBimodule,
}

/// A fully validated document.
#[derive(Debug, Clone)]
pub struct WorkspaceDocument {
    pub field: Field,
    pub category: Option<Arc<Category>>,
    pub target_category: Option<Arc<Category>>,
    pub functor: Option<FunctorData>,
    pub functor2: Option<FunctorData>,
    pub transformation: Option<TransformBlocks>,
    pub bimodule: Option<BimoduleData>,
    pub algebra: Option<AlgebraSection>,
    pub deformation: Option<DeformationState>,
    /// Free cochains for the `products` command.
    pub cochains: Vec<Cochain>,
}

fn parse_field(at: &At<'_>) -> Result<Field> {
    let ty = at.key("type")?;
    match ty.str()? {
        "Q" => Ok(Field::Q),
        "Fp" => {
            let p = at.key("p")?;
            let n = p.uint()? as u64;
            Field::fp(n).or_else(|_| p.schema("not prime"))
        }
        other => ty.schema(format!("unknown field type {other:?}")),
    }
}

fn parse_category(at: &At<'_>, field: Field) -> Result<Arc<Category>> {
    let names: Vec<String> = at.key("simples")?.items()?.iter().map(|a| a.str().map(String::from)).collect::<Result<_>>()?;
    if names.is_empty() {
        return at.key("simples")?.schema("no simples");
    }
    let nm = Names(names.clone());
    let unit = nm.lookup(&at.key("unit")?)?;
    let mut rules = Vec::new();
    for r in at.key("fusion")?.items()? {
        let parts = r.items()?;
        if parts.len() != 4 {
            return r.schema("fusion rules are [a, b, c, N]");
        }
        rules.push((nm.lookup(&parts[0])?, nm.lookup(&parts[1])?, nm.lookup(&parts[2])?, parts[3].uint()?));
    }
    let mut data = FusionData::new(field, names, unit, &rules);
    if let Some(fs) = at.opt("F") {
        for e in fs.items()? {
            let idx = e.key("abcd")?.items()?;
            if idx.len() != 4 {
                return e.key("abcd")?.schema("expected four simples");
            }
            let abcd = [nm.lookup(&idx[0])?, nm.lookup(&idx[1])?, nm.lookup(&idx[2])?, nm.lookup(&idx[3])?];
            data.set_f(abcd, e.key("matrix")?.matrix(field)?);
        }
    }
    match at.opt("F_default") {
        Some(d) if d.str()? == "identity" => data.fill_identity_f(),
        Some(d) => return d.schema("only \"identity\" is supported"),
        None => {}
    }
    for (key, slot) in [("lambda", &mut data.lambda), ("rho", &mut data.rho)] {
        if let Some(m) = at.opt(key) {
            for (name, v) in m.entries()? {
                let s = nm.0.iter().position(|n| *n == name).map_or_else(|| v.schema(format!("unknown simple {name:?}")), Ok)?;
                slot[s] = v.scalar(field)?;
            }
        }
    }
    let c = Arc::new(Category::new(data).or_else(|e| at.invalid(e))?);
    verify_coherence(&c).or_else(|e| at.invalid(e))?;
    Ok(c)
}

fn objmap(at: &At<'_>, src: &Names, tgt: &Names) -> Result<Vec<Vec<usize>>> {
    let mut out = vec![vec![0; tgt.0.len()]; src.0.len()];
    for (c, row) in at.entries()? {
        let ci = src.0.iter().position(|n| *n == c).map_or_else(|| row.schema(format!("unknown simple {c:?}")), Ok)?;
        for (x, n) in row.entries()? {
            let xi = tgt.0.iter().position(|m| *m == x).map_or_else(|| n.schema(format!("unknown simple {x:?}")), Ok)?;
            out[ci][xi] = n.uint()?;
        }
    }
    Ok(out)
}

fn triple_blocks(at: &At<'_>, key: &str, field: Field, src: &Names, tgt: &Names) -> Result<BTreeMap<(Simple, Simple, Simple), MatrixK>> {
    let mut out = BTreeMap::new();
    for e in at.items()? {
        let idx = e.key(key)?.items()?;
        if idx.len() != 3 {
            return e.key(key)?.schema("expected three simples");
        }
        let k = (src.lookup(&idx[0])?, src.lookup(&idx[1])?, tgt.lookup(&idx[2])?);
        out.insert(k, e.key("matrix")?.matrix(field)?);
    }
    Ok(out)
}

fn names_of(c: &Category) -> Names {
    Names(c.names.clone())
}

fn category_ref(doc: &WorkspaceDocument, at: &At<'_>) -> Result<Arc<Category>> {
    let which = at.str()?;
    let c = match which {
        "category" => doc.category.clone(),
        "target_category" => doc.target_category.clone(),
        _ => return at.schema("expected \"category\" or \"target_category\""),
    };
    c.map_or_else(|| at.schema(format!("section {which:?} is missing")), Ok)
}

fn parse_functor(at: &At<'_>, doc: &WorkspaceDocument) -> Result<FunctorData> {
    let field = doc.field;
    let source = category_ref(doc, &at.key("source")?)?;
    let target = category_ref(doc, &at.key("target")?)?;
    let (sn, tn) = (names_of(&source), names_of(&target));
    let objmap = objmap(&at.key("objmap")?, &sn, &tn)?;
    let f0 = match at.opt("F0") {
        Some(a) => a.scalars(field)?,
        None => vec![field.one(); objmap[source.unit][target.unit]],
    };
    let mut f = FunctorData { source, target, objmap, ftilde: BTreeMap::new(), f0 };
    if let Some(t) = at.opt("Ftilde") {
        f.ftilde = triple_blocks(&t, "abz", field, &sn, &tn)?;
    }
    match at.opt("Ftilde_default") {
        Some(d) if d.str()? == "identity" => {
            let id = FunctorData::identity(&f.source);
            if f.source != f.target || f.objmap != id.objmap {
                return d.schema("identity tensor structure needs the identity object map");
            }
            for (k, m) in id.ftilde {
                f.ftilde.entry(k).or_insert(m);
            }
        }
        Some(d) => return d.schema("only \"identity\" is supported"),
        None => {}
    }
    f.fill_zero_blocks();
    f.check_shapes().or_else(|e| at.invalid(e))?;
    verify_functor(&f).or_else(|e| at.invalid(e))?;
    Ok(f)
}

fn parse_transformation(at: &At<'_>, f: &FunctorData) -> Result<TransformBlocks> {
    let (sn, tn) = (names_of(&f.source), names_of(&f.target));
    let mut out = BTreeMap::new();
    for e in at.key("blocks")?.items()? {
        let k = (sn.lookup(&e.key("object")?)?, tn.lookup(&e.key("image")?)?);
        out.insert(k, e.key("matrix")?.matrix(f.field())?);
    }
    Ok(out)
}

fn parse_bimodule(at: &At<'_>, f: &FunctorData) -> Result<BimoduleData> {
    let (sn, tn) = (names_of(&f.source), names_of(&f.target));
    let m = BimoduleData {
        functor: f.clone(),
        objmap: objmap(&at.key("objmap")?, &sn, &tn)?,
        mul: triple_blocks(&at.key("mul")?, "abz", f.field(), &sn, &tn)?,
        mur: triple_blocks(&at.key("mur")?, "abz", f.field(), &sn, &tn)?,
    };
    verify_bimodule(&m).or_else(|e| at.invalid(e))?;
    Ok(m)
}

fn parse_algebra(at: &At<'_>, field: Field) -> Result<AlgebraData> {
    let dim = at.key("dim")?.uint()?;
    let m: Vec<Vec<Vec<Scalar>>> = at
        .key("m")?
        .items()?
        .iter()
        .map(|r| r.items()?.iter().map(|c| c.scalars(field)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let unit = at.key("unit")?.scalars(field)?;
    let a = AlgebraData { field, dim, m, unit };
    a.validate().or_else(|e| at.invalid(e))?;
    Ok(a)
}

fn parse_algebra_bimodule(at: &At<'_>, a: &AlgebraData) -> Result<AlgebraBimodule> {
    let dim = at.key("dim")?.uint()?;
    let mats = |key| -> Result<Vec<MatrixK>> { at.key(key)?.items()?.iter().map(|m| m.matrix(a.field)).collect() };
    let m = AlgebraBimodule { dim, left: mats("left")?, right: mats("right")? };
    m.validate(a).or_else(|e| at.invalid(e))?;
    Ok(m)
}

/// Reads a cochain whose tuple entries name simples of `model`'s source.
fn parse_cochain_in(at: &At<'_>, model: &CochainModel) -> Result<Cochain> {
    let degree = at.key("degree")?.uint()?;
    let src = Names(model.source().names.clone());
    let tgt = Names(model.ctx().target().names.clone());
    let field = model.field();
    let mut blocks = BTreeMap::new();
    for b in at.key("blocks")?.items()? {
        let tuple: Vec<Simple> = b.key("tuple")?.items()?.iter().map(|t| src.lookup(t)).collect::<Result<_>>()?;
        if tuple.len() != degree {
            return b.key("tuple")?.schema(format!("expected {degree} simples"));
        }
        let out = tgt.lookup(&b.key("out")?)?;
        blocks.insert((tuple, out), b.key("matrix")?.matrix(field)?);
    }
    let c = Cochain { degree, blocks };
    model.space(degree).vector(&c).or_else(|e| at.invalid(e))?;
    Ok(c)
}

fn parse_deformation(at: &At<'_>, doc: &WorkspaceDocument) -> Result<DeformationState> {
    let kind_at = at.key("kind")?;
    let kind = DeformationKind::parse(kind_at.str()?).map_or_else(|| kind_at.schema("unknown deformation kind"), Ok)?;
    let base = match kind {
        DeformationKind::Category => DeformationBase::Category(doc.category.clone().map_or_else(|| at.schema("needs a category section"), Ok)?),
        _ => DeformationBase::Functor(doc.functor.clone().map_or_else(|| at.schema("needs a functor section"), Ok)?),
    };
    let order = at.key("order")?.uint()?;
    let mut s = DeformationState::trivial(kind, base, 0).or_else(|e| at.invalid(e))?;
    let (f, c) = (s.base.clone(), s.source().clone());
    let functor_model = match &f {
        DeformationBase::Functor(f) => Some(CochainModel::functor(f)),
        DeformationBase::Category(_) => None,
    };
    let read = |key: &str, model: Option<CochainModel>| -> Result<Vec<Cochain>> {
        let Some(list) = at.opt(key) else { return Ok(Vec::new()) };
        let Some(model) = model else { return list.schema(format!("not used by {} deformations", kind.name())) };
        list.items()?.iter().map(|c| parse_cochain_in(c, &model)).collect()
    };
    let target_model = match &f {
        DeformationBase::Functor(f) if kind == DeformationKind::Total => Some(CochainModel::category(f.target.clone())),
        _ => None,
    };
    let source_model = (kind != DeformationKind::Functorial).then(|| CochainModel::category(c));
    s.alpha = read("alpha", source_model)?;
    s.ftilde = read("Ftilde", functor_model.filter(|_| kind != DeformationKind::Category))?;
    s.target_alpha = read("target_alpha", target_model)?;
    s.order = order;
    if let Some(nu) = at.opt("nu") {
        s.nu = nu.scalars(doc.field)?;
    }
    s.validate().or_else(|e| at.invalid(e))?;
    Ok(s)
}

/// Parses and validates a document from JSON text.
pub fn load_str(text: &str) -> Result<WorkspaceDocument> {
    let value: Value = serde_json::from_str(text).map_err(|e| LoadError::Parse(e.to_string()))?;
    let root = At::root(&value);
    if !value.is_object() {
        return root.schema("expected an object");
    }
    let version = root.key("version")?;
    if version.uint()? as u64 != FORMAT_VERSION {
        return version.schema(format!("unsupported version, expected {FORMAT_VERSION}"));
    }
    let field = parse_field(&root.key("field")?)?;
    let mut doc = WorkspaceDocument {
        field,
        category: None,
        target_category: None,
        functor: None,
        functor2: None,
        transformation: None,
        bimodule: None,
        algebra: None,
        deformation: None,
        cochains: Vec::new(),
    };
    if let Some(c) = root.opt("category") {
        doc.category = Some(parse_category(&c, field)?);
    }
    if let Some(c) = root.opt("target_category") {
        doc.target_category = Some(parse_category(&c, field)?);
    }
    if let Some(f) = root.opt("functor") {
        doc.functor = Some(parse_functor(&f, &doc)?);
    }
    if let Some(f) = root.opt("functor2") {
        doc.functor2 = Some(parse_functor(&f, &doc)?);
    }
    if let Some(t) = root.opt("transformation") {
        let (Some(f), Some(g)) = (&doc.functor, &doc.functor2) else { return t.schema("needs functor and functor2 sections") };
        let blocks = parse_transformation(&t, f)?;
        if !nat_transformation_check(&blocks, f, g).or_else(|e| t.invalid(e))? {
            return t.invalid("not a monoidal natural transformation");
        }
        doc.transformation = Some(blocks);
    }
    if let Some(m) = root.opt("bimodule") {
        let Some(f) = &doc.functor else { return m.schema("needs a functor section") };
        doc.bimodule = Some(parse_bimodule(&m, f)?);
    }
    if let Some(a) = root.opt("algebra") {
        let algebra = parse_algebra(&a, field)?;
        let bimodule = match root.opt("algebra_bimodule") {
            Some(m) => parse_algebra_bimodule(&m, &algebra)?,
            None => AlgebraBimodule::regular(&algebra),
        };
        doc.algebra = Some(AlgebraSection { algebra, bimodule });
    }
    if let Some(d) = root.opt("deformation") {
        doc.deformation = Some(parse_deformation(&d, &doc)?);
    }
    if let Some(cs) = root.opt("cochains") {
        let model = products_model(&doc).map_or_else(|| cs.schema("needs a category or functor section"), Ok)?;
        doc.cochains = cs.items()?.iter().map(|c| parse_cochain_in(c, &model)).collect::<Result<_>>()?;
    }
    Ok(doc)
}

/// The model free cochains live in: the functor if present, else the category.
pub fn products_model(doc: &WorkspaceDocument) -> Option<CochainModel> {
    match (&doc.functor, &doc.category) {
        (Some(f), _) => Some(CochainModel::functor(f)),
        (None, Some(c)) => Some(CochainModel::category(c.clone())),
        _ => None,
    }
}

pub fn load(path: &Path) -> Result<WorkspaceDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io { path: path.display().to_string(), message: e.to_string() })?;
    load_str(&text)
}

/// JSON form of a cochain with simples written by name; zero blocks are
/// omitted and the rest are sorted.
pub fn cochain_json(c: &Cochain, model: &CochainModel) -> Value {
    let src = model.source();
    let tgt = model.ctx().target();
    let blocks: Vec<Value> = c
        .blocks
        .iter()
        .filter(|(_, m)| !m.is_zero())
        .map(|((tuple, out), m)| {
            serde_json::json!({
                "tuple": tuple.iter().map(|&a| src.name(a)).collect::<Vec<_>>(),
                "out": tgt.name(*out),
                "matrix": m.to_rows().iter().map(|r| r.iter().map(Scalar::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            })
        })
        .collect();
    serde_json::json!({ "degree": c.degree, "blocks": blocks })
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z2: &str = r#"{"simples":["0","1"],"unit":"0","fusion":[["0","0","0",1],["0","1","1",1],["1","0","1",1],["1","1","0",1]],"F_default":"identity"}"#;

    #[test]
    fn composite_prime_is_a_schema_error() {
        let text = format!(r#"{{"version":1,"field":{{"type":"Fp","p":4}},"category":{Z2}}}"#);
        assert_eq!(load_str(&text).unwrap_err(), LoadError::Schema { pointer: "/field/p".into(), message: "not prime".into() });
    }

    #[test]
    fn corrupted_associator_is_located() {
        let bad = Z2.replace(r#""F_default""#, r#""F":[{"abcd":["1","1","1","1"],"matrix":[[1]]},{"abcd":["0","1","1","0"],"matrix":[[2]]}],"F_default""#);
        let text = format!(r#"{{"version":1,"field":{{"type":"Q"}},"category":{bad}}}"#);
        match load_str(&text).unwrap_err() {
            LoadError::Validation { pointer, message } => {
                assert_eq!(pointer, "/category");
                assert!(message.contains("pentagon"), "{message}");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn unknown_simple_is_located() {
        let bad = Z2.replace(r#"["1","1","0",1]"#, r#"["1","1","x",1]"#);
        let text = format!(r#"{{"version":1,"field":{{"type":"Q"}},"category":{bad}}}"#);
        assert!(matches!(load_str(&text).unwrap_err(), LoadError::Schema { pointer, .. } if pointer == "/category/fusion/3/2"));
    }
}
