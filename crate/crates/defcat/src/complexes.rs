//! Explicit deformation complexes: categories, functors, bimodule
//! coefficients and the fibred, total and coarse cones.

use std::sync::Arc;

use crate::arith::Scalar;
use crate::cochain::{diagonal_matrix, Cochain, CochainError, CochainModel};
use crate::complex::{cone, ComplexMap, ConeComplex, GradedComplex};
use crate::functor::{verify_functor, BimoduleData, FunctorData, FunctorError, F_ID};
use crate::fusion::{deligne_product, Category, FusionError};
use crate::linalg::MatrixK;
use crate::tree::Shape;

/// Default cap on requested degrees, overridable by `DEFCAT_MAX_DEGREE`.
pub const DEFAULT_MAX_DEGREE: usize = 4;

pub fn max_degree() -> usize {
    std::env::var("DEFCAT_MAX_DEGREE").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_MAX_DEGREE)
}

#[derive(Debug, Clone)]
pub enum ComplexSpec {
    Category(Arc<Category>),
    Functor(FunctorData),
    Bimodule(BimoduleData),
    /// Deformations of the functor together with the source associator.
    Fibred(FunctorData),
    /// Deformations of the functor and both associators.
    Total(FunctorData),
    /// Deformations of a category together with a multiplication `C ⊠ C → C`.
    Coarse(FunctorData),
}

impl ComplexSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ComplexSpec::Category(_) => "category",
            ComplexSpec::Functor(_) => "functor",
            ComplexSpec::Bimodule(_) => "bimodule",
            ComplexSpec::Fibred(_) => "fibred",
            ComplexSpec::Total(_) => "total",
            ComplexSpec::Coarse(_) => "coarse",
        }
    }

    pub fn is_cone(&self) -> bool {
        matches!(self, ComplexSpec::Fibred(_) | ComplexSpec::Total(_) | ComplexSpec::Coarse(_))
    }
}

/// One summand of a cone: cochains of `model` in degree `n + shift` sit in
/// cone degree `n`.
#[derive(Debug, Clone)]
pub struct Component {
    pub name: &'static str,
    pub model: CochainModel,
    pub shift: usize,
}

#[derive(Debug, Clone)]
pub struct BuiltComplex {
    pub kind: &'static str,
    pub complex: GradedComplex,
    /// Highest degree whose cohomology is fully determined.
    pub top: usize,
    pub components: Vec<Component>,
    pub cone: Option<ConeComplex>,
}

impl BuiltComplex {
    fn component_dims(&self, n: i32) -> Vec<usize> {
        self.components
            .iter()
            .map(|c| {
                let d = n + c.shift as i32;
                if d < 0 {
                    0
                } else {
                    c.model.space(d as usize).dim
                }
            })
            .collect()
    }

    /// Splits a vector of degree `n` into cochains of each component.
    pub fn split(&self, n: i32, v: &[Scalar]) -> Result<Vec<Cochain>, CochainError> {
        let mut out = Vec::new();
        let mut at = 0;
        for (c, dim) in self.components.iter().zip(self.component_dims(n)) {
            let d = n + c.shift as i32;
            if d < 0 {
                continue;
            }
            out.push(c.model.space(d as usize).to_cochain(&v[at..at + dim])?);
            at += dim;
        }
        Ok(out)
    }

    /// Joins component cochains of degree `n` into one vector.
    pub fn join(&self, n: i32, parts: &[Cochain]) -> Result<Vec<Scalar>, CochainError> {
        let mut out = Vec::new();
        let live = self.components.iter().filter(|c| n + c.shift as i32 >= 0);
        for (c, part) in live.zip(parts) {
            out.extend(c.model.space((n + c.shift as i32) as usize).vector(part)?);
        }
        Ok(out)
    }

    /// Basis labels of degree `n` as `component:(tuple)->out[row,col]`.
    pub fn labels(&self, n: i32) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.components {
            let d = n + c.shift as i32;
            if d < 0 {
                continue;
            }
            let src = c.model.source();
            let tgt = c.model.ctx().target();
            let names = |s| src.name(s).to_string();
            let out_names = |s| tgt.name(s).to_string();
            let labels = c.model.space(d as usize).labels(&names, &out_names);
            out.extend(labels.into_iter().map(|l| format!("{}:{l}", c.name)));
        }
        out
    }
}

fn lift_map(
    source: &GradedComplex,
    target: &GradedComplex,
    top: usize,
    map: impl Fn(usize) -> Result<MatrixK, CochainError>,
) -> Result<ComplexMap, CochainError> {
    let maps = (0..=top).map(map).collect::<Result<_, _>>()?;
    Ok(ComplexMap::new(source.clone(), target.clone(), 0, maps)?)
}

fn check_degree(top: usize) -> Result<(), CochainError> {
    let max = max_degree();
    if top > max {
        return Err(CochainError::DegreeOverflow { degree: top, max });
    }
    Ok(())
}

/// Builds the complex of `spec` with cohomology determined in degrees up to `top`.
pub fn build_complex(spec: &ComplexSpec, top: usize) -> Result<BuiltComplex, CochainError> {
    check_degree(top)?;
    let plain = |name, model: CochainModel| -> Result<BuiltComplex, CochainError> {
        let complex = model.complex(top + 1)?;
        Ok(BuiltComplex { kind: name, complex, top, components: vec![Component { name, model, shift: 0 }], cone: None })
    };
    match spec {
        ComplexSpec::Category(c) => plain("category", CochainModel::category(c.clone())),
        ComplexSpec::Functor(f) => plain("functor", CochainModel::functor(f)),
        ComplexSpec::Bimodule(m) => plain("bimodule", CochainModel::bimodule(m)),
        ComplexSpec::Fibred(f) => {
            let fm = CochainModel::functor(f);
            let cm = CochainModel::category(f.source.clone());
            let b = fm.complex(top + 1)?;
            let a = cm.complex(top + 2)?;
            let u = lift_map(&a, &b, top + 1, |n| Ok(fm.lift_source_matrix(n, &cm)?.neg()))?;
            finish_cone("fibred", u, top, vec![("functor", fm), ("source", cm)])
        }
        ComplexSpec::Total(f) => {
            let fm = CochainModel::functor(f);
            let cm = CochainModel::category(f.source.clone());
            let dm = CochainModel::category(f.target.clone());
            let b = fm.complex(top + 1)?;
            let a = GradedComplex::direct_sum(&cm.complex(top + 2)?, &dm.complex(top + 2)?)?;
            let u = lift_map(&a, &b, top + 1, |n| {
                let s = fm.lift_source_matrix(n, &cm)?.neg();
                let t = fm.lift_target_matrix(n, &dm)?;
                Ok(MatrixK::blocks(fm.field(), &[vec![s, t]])?)
            })?;
            finish_cone("total", u, top, vec![("functor", fm), ("source", cm), ("target", dm)])
        }
        ComplexSpec::Coarse(phi) => {
            let base = phi.target.clone();
            check_multiplication_shape(phi)?;
            let pm = CochainModel::functor(phi);
            let cm = CochainModel::category(base);
            let sm = CochainModel::category(phi.source.clone());
            let b = pm.complex(top + 1)?;
            let a = cm.complex(top + 2)?;
            let u = lift_map(&a, &b, top + 1, |n| {
                let through = pm.lift_source_matrix(n, &sm)?.mul(&diagonal_matrix(&cm, &sm, n)?)?;
                Ok(pm.lift_target_matrix(n, &cm)?.sub(&through)?)
            })?;
            finish_cone("coarse", u, top, vec![("multiplication", pm), ("category", cm)])
        }
    }
}

fn finish_cone(
    kind: &'static str,
    u: ComplexMap,
    top: usize,
    parts: Vec<(&'static str, CochainModel)>,
) -> Result<BuiltComplex, CochainError> {
    let cn = cone(&u)?;
    let components = parts.into_iter().enumerate().map(|(i, (name, model))| Component { name, model, shift: usize::from(i > 0) }).collect();
    Ok(BuiltComplex { kind, complex: cn.complex.clone(), top, components, cone: Some(cn) })
}

fn check_multiplication_shape(phi: &FunctorData) -> Result<(), CochainError> {
    let r = phi.target.rank();
    if phi.source.rank() != r * r {
        return Err(CochainError::KindMismatch("multiplication functor C ⊠ C → C"));
    }
    Ok(())
}

/// The tensor product of a pointed category with trivial associator, as a
/// functor `C ⊠ C → C` with identity structure maps.
pub fn multiplication_functor(c: &Arc<Category>) -> Result<FunctorData, FunctorError> {
    let square = Arc::new(deligne_product(c, c).map_err(|e: FusionError| FunctorError::Shape(e.to_string()))?);
    let r = c.rank();
    let objmap = (0..r * r).map(|p| c.simples().map(|x| c.n(p / r, p % r, x)).collect()).collect();
    let mut f = FunctorData { source: square.clone(), target: c.clone(), objmap, ftilde: Default::default(), f0: vec![c.field.one()] };
    let ctx = f.ctx();
    for p in square.simples() {
        for q in square.simples() {
            for z in c.simples() {
                let tensor = Shape::node(ap(p), ap(q));
                let image = Shape::apply(F_ID, Shape::node(leaf(p), leaf(q)));
                let (rows, cols) = (ctx.dim(&tensor, z), ctx.dim(&image, z));
                if rows == 0 || cols == 0 {
                    continue;
                }
                if rows != cols {
                    return Err(FunctorError::Shape("multiplication needs a pointed category".into()));
                }
                f.ftilde.insert((p, q, z), MatrixK::identity(c.field, rows));
            }
        }
    }
    verify_functor(&f)?;
    Ok(f)
}

fn leaf(s: usize) -> Shape {
    Shape::Leaf(s)
}

fn ap(s: usize) -> Shape {
    Shape::apply(F_ID, leaf(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Field;
    use crate::examples::vec_zn;

    fn dims(b: &BuiltComplex) -> Vec<usize> {
        (b.complex.lo()..=b.complex.hi()).map(|n| b.complex.dim(n)).collect()
    }

    #[test]
    fn fibred_identity_dimensions() {
        let f2 = Field::fp(2).unwrap();
        let c = Arc::new(vec_zn(f2, 2));
        let b = build_complex(&ComplexSpec::Fibred(FunctorData::identity(&c)), 3).unwrap();
        assert_eq!(b.complex.dim(3), 8 + 16);
        assert_eq!(b.complex.lo(), -1);
        assert_eq!(dims(&b), vec![1, 1 + 2, 2 + 4, 4 + 8, 8 + 16, 16 + 32]);
    }

    #[test]
    fn total_and_coarse_build() {
        let q = Field::Q;
        let c = Arc::new(vec_zn(q, 2));
        let t = build_complex(&ComplexSpec::Total(FunctorData::identity(&c)), 2).unwrap();
        assert_eq!(t.complex.dim(2), 4 + 8 + 8);
        let phi = multiplication_functor(&c).unwrap();
        let k = build_complex(&ComplexSpec::Coarse(phi), 3).unwrap();
        assert_eq!(k.complex.dim(3), 64 + 16);
        assert_eq!(k.complex.cohomology(3).unwrap().dim, 0);
    }

    #[test]
    fn degree_cap() {
        let c = Arc::new(vec_zn(Field::Q, 2));
        assert!(matches!(
            build_complex(&ComplexSpec::Category(c), DEFAULT_MAX_DEGREE + 1),
            Err(CochainError::DegreeOverflow { .. })
        ));
    }
}
