//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

mod common;

use std::time::{Duration, Instant};

use common::corpus::{instance, mixed_corpus, multiplicity_product, Instance, Shape};
use common::fixtures::fixture;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tropicorr::complexes::*;
use tropicorr::counting::{correspondence_count, elliptic_count, CountError};
use tropicorr::exactla::*;
use tropicorr::fanmodel::{cone_complex, gamma_tr, ramification, refine_to_fan, Cone, ToricModelConfig};
use tropicorr::stacky::{compatible, is_dm, stacky_data};
use tropicorr::tropgraph::{Length, ModifyStep};

type Outcome = Result<String, String>;
type Criterion = fn(&[Instance]) -> Outcome;

const FIELDS: [u64; 4] = [0, 2, 3, 5];

fn main() {
    let general = mixed_corpus(1000, 240);
    let criteria: Vec<(&str, Criterion)> = vec![
        ("line through two points", c1),
        ("doubled line", c2),
        ("six-term ledger", c3),
        ("rank formula", c4),
        ("subdivision and contraction transport", c5),
        ("fan axioms and refinement idempotence", c6),
        ("Smith normal form oracle", c7),
        ("stacky consistency", c8),
        ("elliptic identity", c9),
        ("k* order law", c10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = std::panic::catch_unwind(|| f(&general)).unwrap_or_else(|_| Err("panicked".into()));
        let ms = t.elapsed().as_millis();
        match r {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{ms} ms]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{ms} ms]", i + 1)
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn c1(_: &[Instance]) -> Outcome {
    let t = Instant::now();
    let l = fixture("line2pts");
    let a = l.constraints.as_ref().unwrap();
    let r = correspondence_count(&l.curve, a, 0).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure(r.count == big(1), || format!("count {}", r.count))?;
    ensure(r.factorization == Some((big(1), big(1))), || format!("factorization {:?}", r.factorization))?;
    ensure(r.cross_checks.len() >= 3, || "missing cross-checks".into())?;
    let q = quotient_form_matrix(&l.curve, Some(a)).map_err(|e| e.to_string())?;
    let snf = smith_normal_form(&q);
    ensure(q.rows() == 6 && q.cols() == 6 && snf.divisors == vec![big(1); 6], || "6x6 matrix not unimodular".into())?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("count 1 = 1 x 1, {} cross-checks, {elapsed:?}", r.cross_checks.len()))
}

fn c2(_: &[Instance]) -> Outcome {
    let l = fixture("dblline");
    let a = l.constraints.as_ref().unwrap();
    for p in [0, 3] {
        let t = Instant::now();
        let r = correspondence_count(&l.curve, a, p).map_err(|e| e.to_string())?;
        ensure(r.count == big(4), || format!("char {p}: count {}", r.count))?;
        ensure(t.elapsed() < Duration::from_secs(1), || format!("char {p} took {:?}", t.elapsed()))?;
    }
    let ce2 = complex_report(&l.curve, &ComplexSpec::new(Variant::Beta).constrained(Some(a))).map_err(|e| e.to_string())?.e2;
    ensure(ce2 == FGAbelianGroup::from_cyclic_orders(0, &[big(2), big(2)]), || format!("CE2 = {ce2}"))?;
    match correspondence_count(&l.curve, a, 2) {
        Err(e @ CountError::HypothesisFailed { .. }) => ensure(e.code() == "HypothesisFailed:char_ok", || e.code())?,
        other => return Err(format!("char 2 gave {other:?}")),
    }
    Ok("count 4 at char 0 and 3, CE2 = Z/2 + Z/2, char 2 rejected".into())
}

fn c3(corpus: &[Instance]) -> Outcome {
    let mut cases = 0;
    for inst in corpus {
        for p in FIELDS {
            let l = six_term_check(&inst.curve, Some(&inst.constraints), CoeffGroup::FieldOfChar(p))
                .map_err(|e| format!("seed {}: {e}", inst.seed))?;
            ensure(l.alternating_sum() == 0, || format!("seed {} char {p}: {l:?}", inst.seed))?;
            cases += 1;
        }
    }
    ensure(corpus.len() >= 200, || "corpus too small".into())?;
    Ok(format!("{} curves, {cases} ledgers sum to 0", corpus.len()))
}

fn c4(corpus: &[Instance]) -> Outcome {
    for inst in corpus {
        let p = &inst.curve;
        let lhs = p.rank().map_err(|e| e.to_string())? as i64;
        let rhs = p.rank_formula().map_err(|e| e.to_string())?;
        ensure(lhs == rhs, || format!("seed {}: {lhs} != {rhs}", inst.seed))?;
    }
    Ok(format!("{} curves", corpus.len()))
}

fn random_subdivision(rng: &mut ChaCha8Rng, inst: &Instance) -> Vec<ModifyStep> {
    let p = &inst.curve;
    let mut edges: Vec<_> = p.curve.edges.iter().filter(|e| !p.has_zero_slope(e)).collect();
    edges.sort_by(|a, b| a.id.cmp(&b.id));
    let mut steps = Vec::new();
    if edges.is_empty() {
        return steps;
    }
    for _ in 0..rng.gen_range(1..=2) {
        let e = edges[rng.gen_range(0..edges.len())];
        if steps.iter().any(|s| matches!(s, ModifyStep::SubdivideBounded { edge, .. } | ModifyStep::SubdivideUnbounded { edge, .. } if *edge == e.id)) {
            continue;
        }
        let k = rng.gen_range(1..=2);
        match &e.length {
            Length::Finite(len) => {
                let mut ts: Vec<Rat> = (1..=k).map(|i| len * rat(i, k + 1)).collect();
                ts.dedup();
                steps.push(ModifyStep::SubdivideBounded { edge: e.id.clone(), distances: ts });
            }
            Length::Infinite => {
                let ts = (1..=k).map(|i| rat(i, 2)).collect();
                steps.push(ModifyStep::SubdivideUnbounded { edge: e.id.clone(), distances: ts });
            }
        }
    }
    steps
}

fn c5(corpus: &[Instance]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pairs = 0;
    let mut contractions = 0;
    for inst in corpus {
        let steps = random_subdivision(&mut rng, inst);
        if steps.is_empty() {
            continue;
        }
        let sub = inst.curve.extend_parameterization(&steps).map_err(|e| format!("seed {}: {e}", inst.seed))?;
        let rep = subdivision_transport(&inst.curve, &sub, Some(&inst.constraints)).map_err(|e| format!("seed {}: {e}", inst.seed))?;
        ensure(rep.holds(), || format!("seed {}: {:?}", inst.seed, rep.checks))?;
        pairs += 1;
        if inst.curve.zero_slope_bounded_count() > 0 {
            let rep = contraction_transport(&inst.curve, Some(&inst.constraints)).map_err(|e| format!("seed {}: {e}", inst.seed))?;
            ensure(rep.holds(), || format!("seed {} contraction: {:?}", inst.seed, rep.checks))?;
            contractions += 1;
        }
    }
    ensure(pairs >= 100, || format!("only {pairs} pairs"))?;
    ensure(contractions > 0, || "no contraction cases".into())?;
    Ok(format!("{pairs} subdivision pairs, {contractions} contractions"))
}

/// Coefficients `(α, β)` with `u = α a + β b`, if `u` lies in the span.
fn coords(a: &[BigInt], b: &[BigInt], u: &[BigInt]) -> Option<(Rat, Rat)> {
    let dot = |x: &[BigInt], y: &[BigInt]| Rat::from_integer(x.iter().zip(y).map(|(p, q)| p * q).sum());
    let (aa, ab, bb, au, bu) = (dot(a, a), dot(a, b), dot(b, b), dot(a, u), dot(b, u));
    let det = &aa * &bb - &ab * &ab;
    let alpha = (&bb * &au - &ab * &bu) / &det;
    let beta = (&aa * &bu - &ab * &au) / &det;
    let ok = a.iter().zip(b).zip(u).all(|((x, y), z)| {
        &alpha * Rat::from_integer(x.clone()) + &beta * Rat::from_integer(y.clone()) == Rat::from_integer(z.clone())
    });
    ok.then_some((alpha, beta))
}

fn in_open_cone(a: &[BigInt], b: &[BigInt], u: &[BigInt]) -> bool {
    coords(a, b, u).is_some_and(|(x, y)| x.is_positive() && y.is_positive())
}

fn in_closed_cone(a: &[BigInt], b: &[BigInt], u: &[BigInt]) -> bool {
    coords(a, b, u).is_some_and(|(x, y)| !x.is_negative() && !y.is_negative())
}

/// Pairwise face check on 2-cones plus rays.
fn check_fan(rays: &[Vec<BigInt>], cones: &[[usize; 2]]) -> Result<(), String> {
    for (i, [a, b]) in cones.iter().enumerate() {
        let (ra, rb) = (&rays[*a], &rays[*b]);
        for (k, r) in rays.iter().enumerate() {
            ensure(!in_open_cone(ra, rb, r), || format!("ray {k} inside cone {i}"))?;
        }
        for (j, [c, d]) in cones.iter().enumerate().skip(i + 1) {
            let (rc, rd) = (&rays[*c], &rays[*d]);
            let coplanar = coords(ra, rb, rc).is_some() && coords(ra, rb, rd).is_some();
            if coplanar {
                // Two planar cones overlap in their interiors iff one has a generator
                // strictly inside the other, or they coincide.
                ensure(!(in_open_cone(ra, rb, rc) || in_open_cone(ra, rb, rd) || in_open_cone(rc, rd, ra) || in_open_cone(rc, rd, rb)), || format!("cones {i} and {j} overlap"))?;
                ensure([a, b] != [c, d], || format!("cones {i} and {j} repeat"))?;
            } else {
                // The planes meet in at most a line; it must not pass through the interior of either cone.
                let m = IntMatrix::from_rows(4, &(0..ra.len()).map(|k| vec![ra[k].clone(), rb[k].clone(), -rc[k].clone(), -rd[k].clone()]).collect::<Vec<_>>());
                let ker = kernel_lattice(&m);
                for r in 0..ker.rank() {
                    let c4 = ker.basis().row(r);
                    let u: Vec<BigInt> = (0..ra.len()).map(|k| &c4[0] * &ra[k] + &c4[1] * &rb[k]).collect();
                    for s in [u.clone(), u.iter().map(|x| -x).collect()] {
                        if s.iter().all(Zero::is_zero) {
                            continue;
                        }
                        let inside = (in_closed_cone(ra, rb, &s) && in_closed_cone(rc, rd, &s))
                            && (in_open_cone(ra, rb, &s) || in_open_cone(rc, rd, &s));
                        ensure(!inside, || format!("cones {i} and {j} cross"))?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn c6(corpus: &[Instance]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    let mut curves: Vec<_> = corpus.iter().take(120).map(|i| i.curve.clone()).collect();
    curves.push(fixture("xconfig").curve);
    for (idx, p) in curves.iter().enumerate() {
        let cones: Vec<Cone> = cone_complex(p).into_iter().map(|t| t.cone).collect();
        let fan = refine_to_fan(&cones);
        check_fan(&fan.rays, &fan.cones).map_err(|e| format!("curve {idx}: {e}"))?;
        // Support sampling: random points of each original 2-cone lie in some refined cone.
        for c in cones.iter().filter(|c| c.dim() == 2) {
            let (a, b) = (&c.generators[0], &c.generators[1]);
            for _ in 0..4 {
                let (x, y) = (rng.gen_range(0..5i64), rng.gen_range(1..5i64));
                let u: Vec<BigInt> = a.iter().zip(b).map(|(p, q)| p * x + q * y).collect();
                let hit = fan.cones.iter().any(|[i, j]| in_closed_cone(&fan.rays[*i], &fan.rays[*j], &u));
                ensure(hit, || format!("curve {idx}: point outside refined support"))?;
            }
        }
        let t1 = gamma_tr(p).map_err(|e| format!("curve {idx}: {e}"))?;
        let t2 = gamma_tr(&t1).map_err(|e| format!("curve {idx}: {e}"))?;
        ensure(t1 == t2, || format!("curve {idx}: gamma_tr not idempotent"))?;
        checked += 1;
    }
    let x = fixture("xconfig").curve;
    let t = gamma_tr(&x).map_err(|e| e.to_string())?;
    let new: Vec<_> = t.curve.finite_vertices.iter().filter(|v| !x.h.contains_key(*v)).collect();
    ensure(new.len() == 2, || format!("{} new vertices", new.len()))?;
    ensure(new.iter().all(|v| t.h[*v] == vec![rat(1, 1), rat(1, 1)]), || "new vertices not at (1,1)".into())?;
    Ok(format!("{checked} curves incl. X fixture"))
}

fn c7(_: &[Instance]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let t = Instant::now();
    let trials = 1200;
    for k in 0..trials {
        let (r, c) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let rows: Vec<Vec<BigInt>> = (0..r).map(|_| (0..c).map(|_| big(rng.gen_range(-10..=10))).collect()).collect();
        let a = IntMatrix::from_rows(c, &rows);
        let s = smith_normal_form(&a);
        ensure(s.u.mul(&a).mul(&s.v) == s.d, || format!("matrix {k}: UAV != D"))?;
        ensure(det_bareiss(&s.u).abs().is_one() && det_bareiss(&s.v).abs().is_one(), || format!("matrix {k}: not unimodular"))?;
        for i in 0..r {
            for j in 0..c {
                let expect = if i == j && i < s.divisors.len() { s.divisors[i].clone() } else { BigInt::zero() };
                ensure(*s.d.get(i, j) == expect, || format!("matrix {k}: D not diagonal"))?;
            }
        }
        ensure(s.divisors.iter().all(|d| d.is_positive()), || format!("matrix {k}: nonpositive divisor"))?;
        ensure(s.divisors.windows(2).all(|w| w[1].is_multiple_of(&w[0])), || format!("matrix {k}: chain broken"))?;
        ensure(s.divisors.len() == rank_over_rationals(&a), || format!("matrix {k}: rank mismatch"))?;
    }
    let elapsed = t.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{trials} matrices, {elapsed:?}"))
}

fn c8(corpus: &[Instance]) -> Outcome {
    let mut checked = 0;
    for inst in corpus {
        let p = &inst.curve;
        let st = if p.curve.is_stabilizable() { p.stabilize().map_err(|e| e.to_string())? } else { p.clone() };
        let t = gamma_tr(&st).map_err(|e| format!("seed {}: {e}", inst.seed))?;
        let a = ramification(&t, &ToricModelConfig::new(1).unwrap()).minimal_a;
        let sigma = stacky_data(&t, &ToricModelConfig::new(a).unwrap()).map_err(|e| format!("seed {}: {e}", inst.seed))?;
        ensure(compatible(&sigma), || format!("seed {}: incompatible lattices", inst.seed))?;
        for q in [2u64, 3, 5] {
            let dm = is_dm(p, q).map_err(|e| e.to_string())?;
            let expect = sigma.all_orders().all(|o| !o.is_multiple_of(&BigInt::from(q)));
            ensure(dm == expect, || format!("seed {} char {q}: is_dm {dm}, orders say {expect}", inst.seed))?;
        }
        checked += 1;
    }
    Ok(format!("{checked} curves over chars 2, 3, 5"))
}

fn c9(_: &[Instance]) -> Outcome {
    let mut found = Vec::new();
    let mut seed = 50_000;
    while found.len() < 60 {
        let inst = instance(seed, &Shape::elliptic(2 + (seed as usize % 2)));
        seed += 1;
        if inst.curve.genus() == 1 {
            found.push(inst);
        }
    }
    let mut counted = 0;
    for inst in &found {
        for p in [0, 5] {
            let l = elliptic_ledger(&inst.curve, Some(&inst.constraints), CoeffGroup::FieldOfChar(p))
                .map_err(|e| format!("seed {}: {e}", inst.seed))?;
            ensure(l.alternating_sum() == 0, || format!("seed {} char {p}: {l:?}", inst.seed))?;
        }
        match elliptic_count(&inst.curve, &inst.constraints, 0) {
            Ok(_) => counted += 1,
            Err(CountError::HypothesisFailed { .. }) => {}
            Err(e) => return Err(format!("seed {}: {e}", inst.seed)),
        }
    }
    let t = fixture("triangle");
    let r = elliptic_count(&t.curve, t.constraints.as_ref().unwrap(), 0).map_err(|e| e.to_string())?;
    ensure(r.count == big(9), || format!("triangle count {}", r.count))?;
    Ok(format!("{} genus-one curves, {counted} counts cross-checked", found.len()))
}

fn c10(corpus: &[Instance]) -> Outcome {
    let mut checked = 0;
    let mut counts = 0;
    for inst in corpus {
        let p = &inst.curve;
        let a = Some(&inst.constraints);
        let prod = multiplicity_product(p);
        let ce = complex_report(p, &ComplexSpec::new(Variant::Beta).constrained(a)).map_err(|e| e.to_string())?;
        let e = complex_report(p, &ComplexSpec::new(Variant::B).constrained(a)).map_err(|e| e.to_string())?;
        for q in FIELDS {
            if q != 0 && prod.is_multiple_of(&BigInt::from(q)) {
                continue;
            }
            let g = CoeffGroup::UnitsAlgClosed(q);
            let (ce1, _) = sizes_over(&ce, g).map_err(|e| e.to_string())?;
            let (e1, _) = sizes_over(&e, g).map_err(|e| e.to_string())?;
            if let (Some(x), Some(y)) = (ce1.finite_order(), e1.finite_order()) {
                ensure(x == &y * &prod, || format!("seed {} char {q}: {x} != {y} * {prod}", inst.seed))?;
                checked += 1;
            }
            match correspondence_count(p, &inst.constraints, q) {
                Ok(_) => counts += 1,
                Err(CountError::HypothesisFailed { .. }) => {}
                Err(err) => return Err(format!("seed {} char {q}: {err}", inst.seed)),
            }
        }
    }
    ensure(checked > 0, || "no finite cases".into())?;
    Ok(format!("{checked} finite cases, {counts} counts cross-checked"))
}
