//! Acceptance criteria, one pass/fail line each.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use defcat::arith::{Field, Scalar};
use defcat::cochain::{Cochain, CochainModel};
use defcat::coherence::verify_coherence;
use defcat::complex::{les_rank_check, GradedComplex};
use defcat::complexes::{build_complex, multiplication_functor, ComplexSpec};
use defcat::deform::{
    check_deformation, extend_order, first_failing_condition, obstruction_category, unit_transport, DeformationBase,
    DeformationError, DeformationKind, DeformationState, Extension,
};
use defcat::examples::{fibonacci_gf19, vec_z2_sign, vec_z2z2, vec_zn};
use defcat::functor::{AlgebraData, FunctorData};
use defcat::fusion::{Category, FusionError};
use defcat::hochschild::{bimodule_subcomplex_exactness, compare_with_categorical, AlgebraBimodule};
use defcat_cli::{load_str, LoadError};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gf(p: u64) -> Field {
    Field::fp(p).unwrap()
}

fn random_scalar(rng: &mut ChaCha8Rng, field: Field) -> Scalar {
    match field {
        Field::Q => field.ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3)).unwrap(),
        _ => field.from_i64(rng.gen_range(0..field.characteristic() as i64)),
    }
}

fn random_vector(rng: &mut ChaCha8Rng, field: Field, dim: usize) -> Vec<Scalar> {
    (0..dim).map(|_| random_scalar(rng, field)).collect()
}

fn combination(rng: &mut ChaCha8Rng, field: Field, dim: usize, basis: &[Vec<Scalar>]) -> Vec<Scalar> {
    let mut v = vec![field.zero(); dim];
    for b in basis {
        let c = random_scalar(rng, field);
        for (x, y) in v.iter_mut().zip(b) {
            *x = &*x + &(&c * y);
        }
    }
    v
}

fn criterion_1() -> Outcome {
    let q = Field::Q;
    let cases: Vec<(&str, Category, [usize; 4], (usize, usize))> = vec![
        ("Vec_Z2/Q", vec_zn(q, 2), [1, 1, 1, 1], (0, 0)),
        ("Vec_Z2 sign/Q", vec_z2_sign(q), [1, 1, 1, 1], (0, 0)),
        ("Vec_Z3/Q", vec_zn(q, 3), [1, 2, 1, 1], (0, 0)),
        ("Fibonacci/GF19", fibonacci_gf19(), [1, 1, 1, 1], (0, 1)),
    ];
    for (name, c, key, (r, col)) in cases {
        let c = Arc::new(c);
        verify_coherence(&c).map_err(|e| format!("{name}: {e}"))?;
        let mut data = c.data().clone();
        let m = data.fmats.get_mut(&key).unwrap();
        let scaled = m.get(r, col) * &data.field.from_i64(3);
        m.set(r, col, scaled);
        let bad = Category::new(data).map_err(|e| format!("{name} corruption not invertible: {e}"))?;
        match verify_coherence(&Arc::new(bad)) {
            Err(FusionError::PentagonViolation { abcd, .. }) if abcd.len() == 4 => {}
            other => return Err(format!("{name}: corruption not located: {other:?}")),
        }
    }
    let text = std::fs::read_to_string(common::crate_dir().join("fixtures/vec_z2_sign_q_corrupt.json")).unwrap();
    match load_str(&text) {
        Err(LoadError::Validation { pointer, message }) if pointer == "/category" && message.contains("pentagon") => {}
        other => return Err(format!("corrupted fixture: {other:?}")),
    }
    Ok("4 categories coherent, 4 corruptions located, corrupted fixture rejected at /category".into())
}

fn d_squared(name: &str, complex: &GradedComplex, rng: &mut ChaCha8Rng, count: usize) -> Result<(), String> {
    let field = complex.field();
    let degrees: Vec<i32> = (complex.lo()..=3).filter(|n| n + 2 <= complex.hi()).collect();
    for t in 0..count {
        let n = degrees[t % degrees.len()];
        let v = random_vector(rng, field, complex.dim(n));
        let dv = complex.differential(n).mul_vec(&v).unwrap();
        let ddv = complex.differential(n + 1).mul_vec(&dv).unwrap();
        ensure(ddv.iter().all(Scalar::is_zero), || format!("{name}: d^2 != 0 in degree {n}"))?;
    }
    Ok(())
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for field in [Field::Q, gf(5)] {
        let c = Arc::new(vec_z2_sign(field));
        let f = FunctorData::identity(&c);
        let a = AlgebraData::dual_numbers(field);
        let m = AlgebraBimodule::regular(&a).categorical(&a).map_err(|e| e.to_string())?;
        let specs = [
            ComplexSpec::Category(c.clone()),
            ComplexSpec::Functor(f.clone()),
            ComplexSpec::Bimodule(m.clone()),
            ComplexSpec::Fibred(f.clone()),
            ComplexSpec::Total(f.clone()),
            ComplexSpec::Coarse(multiplication_functor(&Arc::new(vec_zn(field, 2))).map_err(|e| e.to_string())?),
        ];
        for spec in &specs {
            let built = build_complex(spec, 4).map_err(|e| e.to_string())?;
            d_squared(&format!("{} over {field:?}", spec.name()), &built.complex, &mut rng, 50)?;
        }
        // Route evaluation of the coboundary, independent of the assembled matrices.
        for model in [CochainModel::category(c.clone()), CochainModel::functor(&f), CochainModel::bimodule(&m)] {
            for t in 0..10 {
                let n = t % 3 + 1;
                let x = model.space(n).to_cochain(&random_vector(&mut rng, field, model.space(n).dim)).unwrap();
                let dd = model.coboundary(&model.coboundary(&x).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
                ensure(dd.is_zero(), || format!("route d^2 != 0 for {:?} in degree {n}", model.kind()))?;
            }
        }
    }
    Ok("6 kinds x 50 cochains x {Q, GF5} plus route coboundaries".into())
}

/// Rank over `field` by elimination on `i128` entries: modular for `Fp`,
/// fraction-free with row gcd reduction for `Q`.
fn oracle_rank(rows: Vec<Vec<i128>>, field: Field) -> usize {
    let p = field.characteristic() as i128;
    let norm = |x: i128| if p == 0 { x } else { x.rem_euclid(p) };
    let mut a: Vec<Vec<i128>> = rows.into_iter().map(|r| r.into_iter().map(norm).collect()).collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..a.len()).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, piv);
        for r in 0..a.len() {
            if r == rank || a[r][c] == 0 {
                continue;
            }
            let (x, y) = (a[rank][c], a[r][c]);
            for k in 0..cols {
                a[r][k] = norm(a[r][k] * x - a[rank][k] * y);
            }
            if p == 0 {
                let g = a[r].iter().fold(0i128, |g, &v| gcd(g, v));
                if g > 1 {
                    a[r].iter_mut().for_each(|v| *v /= g);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Standard inhomogeneous group cochain complex with trivial coefficients.
fn group_cohomology(mul: &dyn Fn(usize, usize) -> usize, order: usize, field: Field, top: usize) -> Vec<usize> {
    let tuples = |n: usize| -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out.into_iter().flat_map(|t| (0..order).map(move |g| [t.clone(), vec![g]].concat())).collect();
        }
        out
    };
    let index = |t: &[usize]| t.iter().fold(0, |acc, &g| acc * order + g);
    let rank_of = |n: usize| -> usize {
        let mut rows = Vec::new();
        for t in tuples(n + 1) {
            let mut row = vec![0i128; order.pow(n as u32)];
            row[index(&t[1..])] += 1;
            for i in 0..n {
                let mut s = t[..i].to_vec();
                s.push(mul(t[i], t[i + 1]));
                s.extend_from_slice(&t[i + 2..]);
                row[index(&s)] += if (i + 1) % 2 == 0 { 1 } else { -1 };
            }
            row[index(&t[..n])] += if (n + 1).is_multiple_of(2) { 1 } else { -1 };
            rows.push(row);
        }
        oracle_rank(rows, field)
    };
    let ranks: Vec<usize> = (0..=top).map(rank_of).collect();
    (0..=top).map(|n| order.pow(n as u32) - ranks[n] - if n > 0 { ranks[n - 1] } else { 0 }).collect()
}

fn criterion_3() -> Outcome {
    let mut checked = 0;
    for field in [Field::Q, gf(2), gf(3)] {
        let groups: [(&str, Category, Box<dyn Fn(usize, usize) -> usize>, usize); 3] = [
            ("Z2", vec_zn(field, 2), Box::new(|a, b| (a + b) % 2), 2),
            ("Z3", vec_zn(field, 3), Box::new(|a, b| (a + b) % 3), 3),
            ("Z2xZ2", vec_z2z2(field), Box::new(|a, b| a ^ b), 4),
        ];
        for (name, c, mul, order) in groups {
            let oracle = group_cohomology(&*mul, order, field, 4);
            let built = build_complex(&ComplexSpec::Category(Arc::new(c)), 4).map_err(|e| e.to_string())?;
            let got: Vec<usize> = (0..=4).map(|n| built.complex.cohomology(n).unwrap().dim).collect();
            ensure(got == oracle, || format!("{name} over {field:?}: categorical {got:?}, group oracle {oracle:?}"))?;
            let coprime = field == Field::Q || order % field.characteristic() as usize != 0;
            if coprime {
                ensure(got[1..].iter().all(|&d| d == 0), || format!("{name} over {field:?}: {got:?} not acyclic"))?;
            }
            if name == "Z2" && field == gf(2) {
                ensure(got[..4] == [1, 1, 1, 1], || format!("Vec_Z2/GF2: {got:?}"))?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} group/field pairs match in degrees 0..4"))
}

fn oracle_algebras() -> Vec<(&'static str, AlgebraData, usize)> {
    vec![
        ("k", AlgebraData::ground(Field::Q), 3),
        ("Q[x]/x^2", AlgebraData::dual_numbers(Field::Q), 3),
        ("GF2[x]/x^2", AlgebraData::dual_numbers(gf(2)), 3),
        ("M2(GF3)", AlgebraData::matrices2(gf(3)), 3),
    ]
}

fn criterion_4() -> Outcome {
    for (name, a, top) in oracle_algebras() {
        let r = compare_with_categorical(&a, top).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.intertwines, || format!("{name}: differentials do not intertwine"))?;
        for d in &r.degrees {
            ensure(d.categorical_dim == d.classical_dim && d.categorical_cohomology == d.classical_cohomology, || format!("{name}: {d:?}"))?;
        }
        ensure(r.degrees.len() == top + 1, || format!("{name}: {} degrees compared", r.degrees.len()))?;
    }
    Ok("4 algebras, degrees 0..3, dimensions and differentials".into())
}

fn add(space_dim: usize, field: Field, parts: &[(i64, Vec<Scalar>)]) -> Vec<Scalar> {
    let mut v = vec![field.zero(); space_dim];
    for (s, x) in parts {
        let s = field.from_i64(*s);
        for (a, b) in v.iter_mut().zip(x) {
            *a = &*a + &(&s * b);
        }
    }
    v
}

fn criterion_5() -> Outcome {
    let field = gf(5);
    let model = CochainModel::category(Arc::new(vec_zn(field, 2)));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rand_cochain = |rng: &mut ChaCha8Rng, n: usize| model.space(n).to_cochain(&random_vector(rng, field, model.space(n).dim)).unwrap();
    let vec_of = |c: &Cochain| model.space(c.degree).vector(c).unwrap();
    let e = |r: Result<Cochain, _>| r.map_err(|e: defcat::cochain::CochainError| e.to_string());
    let mut components = 0;
    for t in 0..100 {
        let m = if t < 50 { 2 } else { 3 };
        let (g, h, k) = (rand_cochain(&mut rng, m), rand_cochain(&mut rng, 2), rand_cochain(&mut rng, 2));
        let (n, p) = (h.degree, k.degree);
        for i in 0..m {
            let gh = e(model.prelie_component(&g, &h, i))?;
            for j in 0..m + n - 1 {
                let lhs = vec_of(&e(model.prelie_component(&gh, &k, j))?);
                let rhs = if j < i {
                    let gk = e(model.prelie_component(&g, &k, j))?;
                    vec_of(&e(model.prelie_component(&gk, &h, i + p - 1))?)
                } else if j < i + n {
                    let hk = e(model.prelie_component(&h, &k, j - i))?;
                    vec_of(&e(model.prelie_component(&g, &hk, i))?)
                } else {
                    let gk = e(model.prelie_component(&g, &k, j - n + 1))?;
                    vec_of(&e(model.prelie_component(&gk, &h, i))?)
                };
                ensure(lhs == rhs, || format!("triple {t}: component ({i}, {j}) differs"))?;
                components += 1;
            }
        }
        let dim = model.space(m + n + p - 2).dim;
        let assoc = |a: &Cochain, b: &Cochain, c: &Cochain| -> Result<Vec<Scalar>, String> {
            let left = vec_of(&e(model.composition_product(&e(model.composition_product(a, b))?, c))?);
            let right = vec_of(&e(model.composition_product(a, &e(model.composition_product(b, c))?))?);
            Ok(add(dim, field, &[(1, left), (-1, right)]))
        };
        let sign = if (n + 1) * (p + 1) % 2 == 1 { -1 } else { 1 };
        let a1 = assoc(&g, &h, &k)?;
        let a2 = assoc(&g, &k, &h)?;
        ensure(a1 == add(dim, field, &[(sign, a2)]), || format!("triple {t}: graded pre-Lie identity fails"))?;
    }
    Ok(format!("100 triples (2,2,2)/(3,2,2) over GF5, {components} nested and disjoint components"))
}

fn category_states(field: Field, order: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<DeformationState> {
    let c = Arc::new(vec_zn(field, order));
    let built = build_complex(&ComplexSpec::Category(c.clone()), 3).unwrap();
    let z = built.complex.cocycles(3);
    (0..count)
        .map(|_| {
            let v = combination(rng, field, built.complex.dim(3), &z);
            let mut s = DeformationState::trivial(DeformationKind::Category, DeformationBase::Category(c.clone()), 0).unwrap();
            s.push_order(built.split(3, &v).unwrap()).unwrap();
            s
        })
        .collect()
}

/// States accepted by criterion 6, extended to order 3 where unobstructed.
fn accepted_states() -> Result<Vec<DeformationState>, String> {
    static STATES: OnceLock<Result<Vec<DeformationState>, String>> = OnceLock::new();
    STATES.get_or_init(compute_accepted_states).clone()
}

fn compute_accepted_states() -> Result<Vec<DeformationState>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut out = Vec::new();
    for (field, n) in [(gf(2), 2), (gf(3), 3)] {
        for s in category_states(field, n, 10, &mut rng) {
            let c = s.source().clone();
            let omega = obstruction_category(&c, &s.alpha, 2).map_err(|e| e.to_string())?;
            let model = CochainModel::category(c.clone());
            ensure(model.coboundary(&omega).map_err(|e| e.to_string())?.is_zero(), || "obstruction not closed".into())?;
            let mut cur = s;
            loop {
                check_deformation(&cur).map_err(|e| e.to_string())?;
                ensure(first_failing_condition(&cur).map_err(|e| e.to_string())?.is_none(), || "cocycle route rejects a valid state".into())?;
                out.push(cur.clone());
                if cur.order == 3 {
                    break;
                }
                match extend_order(&cur).map_err(|e| e.to_string())? {
                    Extension::Extended(next) => cur = next,
                    Extension::Obstructed(_) => break,
                }
            }
        }
    }
    Ok(out)
}

fn criterion_6() -> Outcome {
    let states = accepted_states()?;
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut corrupted = 0;
    for s in &states {
        let field = s.field();
        let model = CochainModel::category(s.source().clone());
        let space = model.space(3);
        let at = rng.gen_range(1..=s.order);
        let mut bad = s.clone();
        let v = add(space.dim, field, &[(1, space.vector(&bad.alpha[at - 1]).unwrap()), (1, random_vector(&mut rng, field, space.dim))]);
        bad.alpha[at - 1] = space.to_cochain(&v).unwrap();
        let direct = match check_deformation(&bad) {
            Ok(_) => None,
            Err(DeformationError::CoherenceFailure { order, .. }) => Some(order),
            Err(e) => return Err(e.to_string()),
        };
        let dual = first_failing_condition(&bad).map_err(|e| e.to_string())?;
        ensure(direct == dual, || format!("routes disagree: coherence {direct:?}, cocycle {dual:?}"))?;
        corrupted += usize::from(direct.is_some());
    }
    let orders: Vec<usize> = states.iter().map(|s| s.order).collect();
    Ok(format!("20 order-1 states closed; {} states up to order {}, {corrupted} perturbations caught by both routes", states.len(), orders.iter().max().unwrap()))
}

fn criterion_7() -> Outcome {
    let states = accepted_states()?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut gauged = 0;
    for s in &states {
        let field = s.field();
        let mut nu = random_vector(&mut rng, field, s.order);
        if let Some(first) = nu.first_mut() {
            if first.is_zero() {
                *first = field.one();
            }
            gauged += 1;
        }
        for gauge in [vec![], nu] {
            let u = unit_transport(s, &gauge).map_err(|e| e.to_string())?;
            ensure(u.triangle && u.bigon, || format!("order {}: {:?}", s.order, u.failures))?;
        }
    }
    Ok(format!("{} states, {gauged} with nonzero first-order gauge", states.len()))
}

fn criterion_8() -> Outcome {
    let c = Arc::new(vec_zn(gf(2), 2));
    let built = build_complex(&ComplexSpec::Fibred(FunctorData::identity(&c)), 3).map_err(|e| e.to_string())?;
    let cone = built.cone.as_ref().unwrap();
    let report = les_rank_check(&cone.map, 1..=3).map_err(|e| e.to_string())?;
    ensure(report.exact(), || format!("{:?}", report.degrees))?;
    let (a, b) = (cone.map.source(), cone.map.target());
    for n in built.complex.lo()..=built.complex.hi() {
        let want = b.dim(n) + a.dim(n + 1);
        ensure(built.complex.dim(n) == want, || format!("cone dim {n}: {} != {want}", built.complex.dim(n)))?;
        let closed_form = if n < 0 { 1 } else { 3 << n };
        ensure(built.complex.dim(n) == closed_form, || format!("cone dim {n} is {}, want {closed_form}", built.complex.dim(n)))?;
    }
    Ok("exact in degrees 1..3, cone dims B^n + A^(n+1) = 3 * 2^n".into())
}

fn criterion_9() -> Outcome {
    let started = Instant::now();
    for (name, a, top) in oracle_algebras() {
        let top = if name.starts_with("M2") { 2 } else { top };
        let r = bimodule_subcomplex_exactness(&a, &AlgebraBimodule::regular(&a), top).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.claim_a && r.claim_b, || format!("{name}: {:?}", r.failures))?;
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(secs <= 300.0, || format!("took {secs:.1}s"))?;
    Ok(format!("claims hold for 4 algebras in {secs:.1}s"))
}

fn criterion_10() -> Outcome {
    for (label, extra) in [("first run", &[][..]), ("second run", &[][..]), ("--threads 1", &["--threads", "1"][..]), ("--threads 4", &["--threads", "4"][..])] {
        let bad = common::golden_mismatches(extra);
        ensure(bad.is_empty(), || format!("{label}: {bad:?}"))?;
    }
    Ok(format!("{} golden cases identical across 2 runs and threads 1/4", common::CASES.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("coherence suite", criterion_1),
        ("d^2 = 0 on random cochains", criterion_2),
        ("group cohomology oracle", criterion_3),
        ("Hochschild comparison", criterion_4),
        ("pre-Lie identity", criterion_5),
        ("obstruction closedness and dual routes", criterion_6),
        ("unit transport", criterion_7),
        ("cone long exact sequence", criterion_8),
        ("bimodule subcomplex claims", criterion_9),
        ("CLI determinism", criterion_10),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({detail}; {secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
