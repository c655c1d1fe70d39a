//! Seeded random corpus of balanced parameterized tropical curves with constraints.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tropicorr::exactla::{primitive_part, rat, Rat, Sublattice};
use tropicorr::paramcurve::{AffineConstraint, AffineConstraintSet, ParamTropicalCurve};
use tropicorr::tropgraph::{Edge, Length, TropicalCurve};

#[derive(Clone, Debug)]
pub struct Shape {
    pub n: usize,
    pub max_finite: usize,
    pub max_l: i64,
    /// Number of extra bounded edges beyond a spanning tree.
    pub extra_edges: std::ops::RangeInclusive<usize>,
    /// Probability that a new bounded edge has zero slope.
    pub zero_slope: f64,
    pub max_marked: usize,
    /// Target constraint codimension: `rank - codim_offset` when reachable.
    pub codim_offset: usize,
    /// Keep finite vertices trivalent where balancing allows it.
    pub trivalent: bool,
}

impl Shape {
    pub fn general(n: usize) -> Self {
        Shape { n, max_finite: 6, max_l: 4, extra_edges: 0..=1, zero_slope: 0.15, max_marked: 3, codim_offset: 0, trivalent: false }
    }

    pub fn trivalent(n: usize) -> Self {
        Shape { trivalent: true, zero_slope: 0.0, ..Shape::general(n) }
    }

    /// Genus one, every bounded edge of nonzero slope.
    pub fn elliptic(n: usize) -> Self {
        Shape { n, max_finite: 5, max_l: 3, extra_edges: 1..=1, zero_slope: 0.0, max_marked: 5, codim_offset: 1, trivalent: true }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub curve: ParamTropicalCurve,
    pub constraints: AffineConstraintSet,
}

fn int(x: i64) -> BigInt {
    BigInt::from(x)
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<BigInt> {
    loop {
        let v: Vec<BigInt> = (0..n).map(|_| int(rng.gen_range(-2..=2))).collect();
        if let Some((prim, _)) = primitive_part(&v) {
            return prim;
        }
    }
}

fn random_length(rng: &mut ChaCha8Rng) -> Rat {
    rat(rng.gen_range(1..=6), rng.gen_range(1..=2))
}

fn scale(v: &[BigInt], l: i64) -> Vec<BigInt> {
    v.iter().map(|x| x * l).collect()
}

struct Builder {
    n: usize,
    finite: Vec<String>,
    infinite: Vec<String>,
    edges: Vec<Edge>,
    h: BTreeMap<String, Vec<Rat>>,
    /// Sum of outgoing slopes at each finite vertex.
    out: BTreeMap<String, Vec<BigInt>>,
    next: usize,
}

impl Builder {
    fn id(&mut self, prefix: &str) -> String {
        self.next += 1;
        format!("{prefix}{}", self.next)
    }

    fn add_bounded(&mut self, a: &str, b: &str, slope_ab: &[BigInt], length: Rat) {
        let id = self.id("e");
        self.edges.push(Edge::new(id, a, b, Length::Finite(length)));
        for (x, s) in self.out.get_mut(a).unwrap().iter_mut().zip(slope_ab) {
            *x += s;
        }
        for (x, s) in self.out.get_mut(b).unwrap().iter_mut().zip(slope_ab) {
            *x -= s;
        }
    }

    fn add_leg(&mut self, v: &str, slope: Vec<BigInt>, marked: bool) {
        let inf = self.id(if marked { "m" } else { "r" });
        let id = self.id("l");
        self.edges.push(Edge::new(id, v, inf.clone(), Length::Infinite));
        for (x, s) in self.out.get_mut(v).unwrap().iter_mut().zip(&slope) {
            *x += s;
        }
        self.h.insert(inf.clone(), slope.iter().map(|x| Rat::from_integer(x.clone())).collect());
        self.infinite.push(inf);
    }

    fn valency(&self, v: &str) -> usize {
        self.edges.iter().map(|e| e.ends.iter().filter(|x| *x == v).count()).sum()
    }
}

/// Balance `v` with exactly `3 - valency` legs; false if that is impossible.
fn close_trivalent(rng: &mut ChaCha8Rng, b: &mut Builder, v: &str, max_l: i64) -> bool {
    let n = b.n;
    let deficit = 3usize.saturating_sub(b.valency(v));
    let s: Vec<BigInt> = b.out[v].iter().map(|x| -x).collect();
    let zero = s.iter().all(Zero::is_zero);
    if deficit == 0 {
        return zero;
    }
    if deficit == 1 {
        if zero {
            return false;
        }
        b.add_leg(v, s, false);
        return true;
    }
    // Pick deficit - 1 random legs, then close with the remainder.
    for _ in 0..20 {
        let legs: Vec<Vec<BigInt>> =
            (0..deficit - 1).map(|_| scale(&random_direction(rng, n), rng.gen_range(1..=max_l))).collect();
        let last: Vec<BigInt> = (0..n).map(|k| &s[k] - legs.iter().map(|w| &w[k]).sum::<BigInt>()).collect();
        if last.iter().all(Zero::is_zero) {
            continue;
        }
        for w in legs {
            b.add_leg(v, w, false);
        }
        b.add_leg(v, last, false);
        return true;
    }
    false
}

/// Put a new trivalent vertex carrying a marked leg inside a random edge of nonzero slope.
fn split_for_marked_point(rng: &mut ChaCha8Rng, b: &mut Builder) -> bool {
    let n = b.n;
    let candidates: Vec<usize> = (0..b.edges.len())
        .filter(|&i| {
            let e = &b.edges[i];
            let zero = |v: &String| b.h[v].iter().all(Zero::is_zero);
            match &e.length {
                Length::Finite(_) => b.h[&e.ends[0]] != b.h[&e.ends[1]],
                Length::Infinite => !zero(&e.ends[1]),
            }
        })
        .collect();
    let Some(&i) = candidates.choose(rng) else { return false };
    let e = b.edges.remove(i);
    let a = e.ends[0].clone();
    let (slope, t, far_length): (Vec<Rat>, Rat, Length) = match &e.length {
        Length::Finite(len) => {
            let slope = b.h[&e.ends[1]].iter().zip(&b.h[&a]).map(|(x, y)| (x - y) / len).collect();
            let t = len * rat(rng.gen_range(1..=3), 4);
            let rest = Length::Finite(len - &t);
            (slope, t, rest)
        }
        Length::Infinite => (b.h[&e.ends[1]].clone(), rat(rng.gen_range(1..=4), 2), Length::Infinite),
    };
    let w = b.id("w");
    let pos = b.h[&a].iter().zip(&slope).map(|(x, s)| x + &t * s).collect();
    b.h.insert(w.clone(), pos);
    b.finite.push(w.clone());
    b.out.insert(w.clone(), vec![BigInt::zero(); n]);
    let first = b.id("e");
    b.edges.push(Edge::new(first, a, w.clone(), Length::Finite(t)));
    b.edges.push(Edge::new(e.id, w.clone(), e.ends[1].clone(), far_length));
    b.add_leg(&w, vec![BigInt::zero(); n], true);
    true
}

/// Random balanced curve with marked legs listed first among the infinite vertices.
pub fn random_curve(rng: &mut ChaCha8Rng, shape: &Shape) -> (ParamTropicalCurve, usize) {
    let n = shape.n;
    let k = rng.gen_range(1..=shape.max_finite);
    let mut b =
        Builder { n, finite: Vec::new(), infinite: Vec::new(), edges: Vec::new(), h: BTreeMap::new(), out: BTreeMap::new(), next: 0 };
    for i in 0..k {
        let v = format!("v{i}");
        b.out.insert(v.clone(), vec![BigInt::zero(); n]);
        if i == 0 {
            b.h.insert(v.clone(), (0..n).map(|_| rat(rng.gen_range(-4..=4), rng.gen_range(1..=2))).collect());
            b.finite.push(v);
            continue;
        }
        let open: Vec<String> = b.finite.iter().filter(|u| !shape.trivalent || b.valency(u) < 2).cloned().collect();
        let Some(parent) = open.choose(rng).cloned() else { break };
        let t = random_length(rng);
        let slope = if rng.gen_bool(shape.zero_slope) {
            vec![BigInt::zero(); n]
        } else {
            scale(&random_direction(rng, n), rng.gen_range(1..=shape.max_l))
        };
        let pos = b.h[&parent].iter().zip(&slope).map(|(x, s)| x + &t * Rat::from_integer(s.clone())).collect();
        b.h.insert(v.clone(), pos);
        b.finite.push(v.clone());
        b.add_bounded(&parent, &v, &slope, t);
    }
    let extra = rng.gen_range(shape.extra_edges.clone());
    let mut added = 0;
    let mut attempts = 0;
    while added < extra && attempts < 50 {
        attempts += 1;
        let u = b.finite.choose(rng).unwrap().clone();
        let v = b.finite.choose(rng).unwrap().clone();
        if u == v || (shape.trivalent && (b.valency(&u) >= 2 || b.valency(&v) >= 2)) {
            continue;
        }
        let diff: Vec<Rat> = b.h[&v].iter().zip(&b.h[&u]).map(|(x, y)| x - y).collect();
        if diff.iter().all(Zero::is_zero) {
            if shape.zero_slope == 0.0 {
                continue;
            }
            b.add_bounded(&u, &v, &vec![BigInt::zero(); n], random_length(rng));
        } else {
            let den = diff.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let ints: Vec<BigInt> = diff.iter().map(|x| (x * Rat::from_integer(den.clone())).to_integer()).collect();
            let (prim, g) = primitive_part(&ints).unwrap();
            let l = rng.gen_range(1..=shape.max_l);
            let length = Rat::new(g, den * l);
            b.add_bounded(&u, &v, &scale(&prim, l), length);
        }
        added += 1;
    }
    let marked = rng.gen_range(0..=shape.max_marked);
    let mut marked_added = 0;
    if !shape.trivalent {
        for _ in 0..marked {
            let v = b.finite.choose(rng).unwrap().clone();
            b.add_leg(&v, vec![BigInt::zero(); n], true);
            marked_added += 1;
        }
    }
    for v in b.finite.clone() {
        if shape.trivalent && close_trivalent(rng, &mut b, &v, shape.max_l) {
            continue;
        }
        let s: Vec<BigInt> = b.out[&v].iter().map(|x| -x).collect();
        if s.iter().any(|x| !x.is_zero()) {
            b.add_leg(&v, s, false);
        }
        while b.valency(&v) < 3 || rng.gen_bool(0.1) {
            let w = scale(&random_direction(rng, n), rng.gen_range(1..=shape.max_l));
            let neg: Vec<BigInt> = w.iter().map(|x| -x).collect();
            b.add_leg(&v, w, false);
            b.add_leg(&v, neg, false);
        }
    }
    if shape.trivalent {
        for _ in 0..marked {
            if split_for_marked_point(rng, &mut b) {
                marked_added += 1;
            }
        }
    }
    let marked = marked_added;
    // Marked legs come first so that constraint i binds to marked point i.
    b.infinite.sort_by_key(|v| !v.starts_with('m'));
    let curve = TropicalCurve::new(b.finite, b.infinite, b.edges);
    let p = ParamTropicalCurve::new(curve, b.n, b.h).expect("generated curve is valid");
    (p, marked)
}

/// Constraint through the `i`-th marked point of corank `c`.
fn constraint_for(rng: &mut ChaCha8Rng, p: &ParamTropicalCurve, i: usize, c: usize) -> AffineConstraint {
    let n = p.lattice_rank;
    let inf = &p.curve.infinite_vertices[i];
    let w = p.curve.leg(inf).unwrap().other_end(inf).to_string();
    let mut point = p.h[&w].clone();
    let gens: Vec<Vec<BigInt>> = match n - c {
        0 => vec![],
        1 => vec![random_direction(rng, n)],
        _ => unreachable!("coranks stay at least n - 1"),
    };
    for g in &gens {
        let t = rat(rng.gen_range(-3..=3), 2);
        for (x, y) in point.iter_mut().zip(g) {
            *x += &t * Rat::from_integer(y.clone());
        }
    }
    AffineConstraint::new(Sublattice::from_vectors(n, &gens), point).expect("constraint lattice is saturated")
}

/// Coranks in `[max(2, n - 1), n]` summing to `target`, if any.
fn split_codim(rng: &mut ChaCha8Rng, m: usize, n: usize, target: i64) -> Option<Vec<usize>> {
    let lo = 2.max(n - 1);
    if target < (lo * m) as i64 || target > (n * m) as i64 {
        return None;
    }
    let mut c = vec![lo; m];
    let mut rest = target as usize - lo * m;
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(rng);
    for i in idx {
        let take = rest.min(n - lo);
        c[i] += take;
        rest -= take;
    }
    Some(c)
}

pub fn instance(seed: u64, shape: &Shape) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (curve, marked) = random_curve(&mut rng, shape);
    let n = shape.n;
    let target = curve.rank().map(|r| r as i64 - shape.codim_offset as i64).unwrap_or(-1);
    let coranks = split_codim(&mut rng, marked, n, target)
        .unwrap_or_else(|| (0..marked).map(|_| rng.gen_range(2.max(n - 1)..=n)).collect());
    let items = coranks.iter().enumerate().map(|(i, &c)| constraint_for(&mut rng, &curve, i, c)).collect();
    Instance { seed, curve, constraints: AffineConstraintSet::new(items) }
}

/// `count` instances alternating between lattice ranks 2 and 3.
pub fn corpus(base_seed: u64, count: usize, make: impl Fn(usize) -> Shape) -> Vec<Instance> {
    (0..count).map(|i| instance(base_seed + i as u64, &make(2 + i % 2))).collect()
}

/// Mixed corpus: general curves interleaved with trivalent ones.
pub fn mixed_corpus(base_seed: u64, count: usize) -> Vec<Instance> {
    (0..count)
        .map(|i| {
            let n = 2 + i % 2;
            let shape = if i % 4 < 2 { Shape::general(n) } else { Shape::trivalent(n) };
            instance(base_seed + i as u64, &shape)
        })
        .collect()
}

/// Product of `l(e)` over bounded edges of nonzero slope.
pub fn multiplicity_product(p: &ParamTropicalCurve) -> BigInt {
    p.curve
        .bounded_edges()
        .iter()
        .map(|e| p.edge_geometry(&e.id).unwrap())
        .filter(|g| g.slope.is_some())
        .fold(BigInt::one(), |acc, g| acc * g.multiplicity.abs())
}
