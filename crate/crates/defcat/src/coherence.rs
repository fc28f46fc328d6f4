//! Pentagon and triangle verification by explicit route evaluation.

use std::sync::Arc;

use crate::engine::{Ctx, Side, Step};
use crate::fusion::{Category, FusionError, Simple};
use crate::tree::{Dir, Shape};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoherenceReport {
    pub pentagon_instances: usize,
    pub triangle_instances: usize,
}

/// Both sides of the pentagon on `((ab)c)d`, as steps.
pub fn pentagon_routes() -> (Vec<Step<'static>>, Vec<Step<'static>>) {
    let a = |path: Vec<Dir>| Step::Assoc { path, inverse: false };
    (vec![a(vec![Dir::L]), a(vec![]), a(vec![Dir::R])], vec![a(vec![]), a(vec![])])
}

/// Both sides of the triangle on `(a I) b`.
pub fn triangle_routes() -> (Vec<Step<'static>>, Vec<Step<'static>>) {
    (
        vec![Step::Assoc { path: vec![], inverse: false }, Step::UnitElim { path: vec![Dir::R], side: Side::Left }],
        vec![Step::UnitElim { path: vec![Dir::L], side: Side::Right }],
    )
}

pub fn pentagon_shape(x: [Simple; 4]) -> Shape {
    Shape::lcomb(Shape::leaves_of(&x))
}

pub fn verify_coherence(c: &Arc<Category>) -> Result<CoherenceReport, FusionError> {
    let ctx = Ctx::category(c.clone());
    let (p1, p2) = pentagon_routes();
    let mut pentagons = 0;
    for a in c.simples() {
        for b in c.simples() {
            for cc in c.simples() {
                for d in c.simples() {
                    pentagons += 1;
                    let src = pentagon_shape([a, b, cc, d]);
                    for e in c.simples() {
                        if ctx.dim(&src, e) == 0 {
                            continue;
                        }
                        let m1 = ctx.route_matrix(&src, e, &p1).expect("pentagon route");
                        let m2 = ctx.route_matrix(&src, e, &p2).expect("pentagon route");
                        if m1 != m2 {
                            return Err(FusionError::PentagonViolation {
                                abcd: [a, b, cc, d].iter().map(|&s| c.name(s).to_string()).collect(),
                                out: c.name(e).to_string(),
                            });
                        }
                    }
                }
            }
        }
    }
    let (t1, t2) = triangle_routes();
    let mut triangles = 0;
    for a in c.simples() {
        for b in c.simples() {
            triangles += 1;
            let src = Shape::node(Shape::node(Shape::Leaf(a), Shape::Unit), Shape::Leaf(b));
            for d in c.simples() {
                if ctx.dim(&src, d) == 0 {
                    continue;
                }
                let m1 = ctx.route_matrix(&src, d, &t1).expect("triangle route");
                let m2 = ctx.route_matrix(&src, d, &t2).expect("triangle route");
                if m1 != m2 {
                    return Err(FusionError::TriangleViolation {
                        ab: vec![c.name(a).to_string(), c.name(b).to_string()],
                        out: c.name(d).to_string(),
                    });
                }
            }
        }
    }
    Ok(CoherenceReport { pentagon_instances: pentagons, triangle_instances: triangles })
}
