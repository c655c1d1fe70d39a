//! Fans in `N_R ⊕ R` built from parameterized curves: the cone complex of the
//! curve, its refinement to a fan, the induced subdivision of the curve, cone
//! multiplicities, reducedness for a base change of order `a`, and local data
//! at vertex rays.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};
use thiserror::Error;

use crate::exactla::{kernel_lattice, primitive_direction, primitive_part, IntMatrix, Rat};
use crate::paramcurve::{ParamError, ParamTropicalCurve};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FanError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("the cone complex of this curve is not a fan; refine the curve first")]
    NotRefined,
    #[error("no ray with index {0}")]
    UnknownRay(usize),
    #[error("ray {0} lies in N_R x {{0}}, expected a vertex ray")]
    EtaRay(usize),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("ramification index must be positive, got {0}")]
    BadRamification(BigInt),
}

/// Base change of order `a`: the last coordinate carries the lattice `aZ`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToricModelConfig {
    #[serde_as(as = "DisplayFromStr")]
    pub a: BigInt,
}

impl ToricModelConfig {
    pub fn new(a: impl Into<BigInt>) -> Result<Self, FanError> {
        let a = a.into();
        if !a.is_positive() {
            return Err(FanError::BadRamification(a));
        }
        Ok(ToricModelConfig { a })
    }
}

/// Cone of dimension at most 2, given by primitive generators in sorted order.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cone {
    #[serde_as(as = "Vec<Vec<DisplayFromStr>>")]
    pub generators: Vec<Vec<BigInt>>,
}

impl Cone {
    fn new(mut gens: Vec<Vec<BigInt>>) -> Self {
        gens.sort();
        gens.dedup();
        Cone { generators: gens }
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }
}

/// Where a cone of the cone complex comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeSource {
    Vertex(String),
    Edge(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedCone {
    pub cone: Cone,
    pub source: ConeSource,
}

fn lift(x: &[Rat], last: i64) -> Vec<BigRational> {
    let mut v = x.to_vec();
    v.push(BigRational::from_integer(last.into()));
    v
}

/// Primitive generator of the ray through `(h(v), 1)` or `(h(v), 0)`; `None` for the origin.
pub fn vertex_ray(p: &ParamTropicalCurve, v: &str) -> Option<Vec<BigInt>> {
    let last = if p.curve.is_finite_vertex(v) { 1 } else { 0 };
    primitive_direction(&lift(&p.h[v], last))
}

/// Cone spanned by the images of an edge's ends, `None` when the edge has zero slope.
pub fn edge_cone(p: &ParamTropicalCurve, edge: &str) -> Option<Cone> {
    let e = p.curve.edge(edge)?;
    if p.has_zero_slope(e) {
        return None;
    }
    Some(Cone::new(vec![vertex_ray(p, &e.ends[0])?, vertex_ray(p, &e.ends[1])?]))
}

/// Distinct primitive rays `R_+ h(v)` over infinite vertices with nonzero image.
pub fn fan_eta(p: &ParamTropicalCurve) -> Vec<Vec<BigInt>> {
    let set: BTreeSet<Vec<BigInt>> = p
        .curve
        .infinite_vertices
        .iter()
        .filter_map(|v| primitive_direction(&p.h[v]))
        .collect();
    set.into_iter().collect()
}

/// The cone complex `K_Γ`: vertex rays and edge cones (zero cone left implicit).
pub fn cone_complex(p: &ParamTropicalCurve) -> Vec<TaggedCone> {
    let mut out = Vec::new();
    for v in p.curve.vertices() {
        if let Some(r) = vertex_ray(p, v) {
            out.push(TaggedCone { cone: Cone::new(vec![r]), source: ConeSource::Vertex(v.clone()) });
        }
    }
    for e in &p.curve.edges {
        if let Some(c) = edge_cone(p, &e.id) {
            out.push(TaggedCone { cone: c, source: ConeSource::Edge(e.id.clone()) });
        }
    }
    out
}

/// Coefficients `(α, β)` with `r = α u + β w`, if `r` is in the span of `u, w`.
fn plane_coords(r: &[BigInt], u: &[BigInt], w: &[BigInt]) -> Option<(Rat, Rat)> {
    let m = r.len();
    for i in 0..m {
        for j in i + 1..m {
            let d = &u[i] * &w[j] - &u[j] * &w[i];
            if d.is_zero() {
                continue;
            }
            let a = BigRational::new(&r[i] * &w[j] - &r[j] * &w[i], d.clone());
            let b = BigRational::new(&u[i] * &r[j] - &u[j] * &r[i], d);
            let ok = (0..m).all(|k| {
                &a * BigRational::from_integer(u[k].clone()) + &b * BigRational::from_integer(w[k].clone())
                    == BigRational::from_integer(r[k].clone())
            });
            return ok.then_some((a, b));
        }
    }
    None
}

/// Whether `r` lies in the relative interior of the 2-cone spanned by `u, w`.
fn in_open_cone(r: &[BigInt], u: &[BigInt], w: &[BigInt]) -> Option<Rat> {
    let (a, b) = plane_coords(r, u, w)?;
    (a.is_positive() && b.is_positive()).then(|| b / a)
}

/// The ray `σ ∩ τ` of two 2-cones spanning different planes, if that intersection is a ray.
fn crossing_ray(s: &Cone, t: &Cone) -> Option<Vec<BigInt>> {
    let m = s.generators[0].len();
    let cols = [&s.generators[0], &s.generators[1], &t.generators[0], &t.generators[1]];
    let mut a = IntMatrix::zeros(m, 4);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..m {
            let x = if j < 2 { c[i].clone() } else { -c[i].clone() };
            a.set(i, j, x);
        }
    }
    let ker = kernel_lattice(&a);
    if ker.rank() != 1 {
        return None;
    }
    let mut k = ker.basis().row(0).to_vec();
    if k.iter().any(|x| x.is_negative()) {
        k = k.iter().map(|x| -x).collect();
    }
    if k.iter().any(|x| x.is_negative()) {
        return None;
    }
    let dir: Vec<BigInt> = (0..m).map(|i| &k[0] * &cols[0][i] + &k[1] * &cols[1][i]).collect();
    primitive_part(&dir).map(|(p, _)| p)
}

/// Rays and 2-cones of a fan, with 2-cones as index pairs into `rays`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinedFan {
    #[serde_as(as = "Vec<Vec<DisplayFromStr>>")]
    pub rays: Vec<Vec<BigInt>>,
    pub cones: Vec<[usize; 2]>,
}

/// Rays of the refinement: every 1-dimensional pairwise intersection of cones.
fn refinement_rays(cones: &[Cone]) -> BTreeSet<Vec<BigInt>> {
    let mut w: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    let planes: Vec<&Cone> = cones.iter().filter(|c| c.dim() == 2).collect();
    for c in cones {
        if c.dim() == 1 {
            w.insert(c.generators[0].clone());
        } else {
            w.extend(c.generators.iter().cloned());
        }
    }
    for (i, s) in planes.iter().enumerate() {
        for t in &planes[i + 1..] {
            if let Some(r) = crossing_ray(s, t) {
                w.insert(r);
            }
        }
    }
    w
}

/// Subdivide the 2-cones of a cone complex at all rays of pairwise intersections.
pub fn refine_to_fan(cones: &[Cone]) -> RefinedFan {
    let w = refinement_rays(cones);
    let rays: Vec<Vec<BigInt>> = w.into_iter().collect();
    let index = |r: &Vec<BigInt>| rays.binary_search(r).expect("refinement ray");
    let mut out: BTreeSet<[usize; 2]> = BTreeSet::new();
    for c in cones.iter().filter(|c| c.dim() == 2) {
        let (u, v) = (&c.generators[0], &c.generators[1]);
        let mut chain: Vec<(Rat, &Vec<BigInt>)> =
            rays.iter().filter_map(|r| in_open_cone(r, u, v).map(|t| (t, r))).collect();
        chain.sort();
        let mut seq = vec![u];
        seq.extend(chain.into_iter().map(|(_, r)| r));
        seq.push(v);
        for pair in seq.windows(2) {
            let (a, b) = (index(pair[0]), index(pair[1]));
            out.insert([a.min(b), a.max(b)]);
        }
    }
    RefinedFan { rays, cones: out.into_iter().collect() }
}

/// Refinement of the curve: each nonzero-slope edge is subdivided at the rays of the
/// refined fan meeting its cone's interior. Idempotent.
pub fn gamma_tr(p: &ParamTropicalCurve) -> Result<ParamTropicalCurve, FanError> {
    p.require_balanced()?;
    let k: Vec<Cone> = cone_complex(p).into_iter().map(|t| t.cone).collect();
    let w = refinement_rays(&k);
    let n = p.lattice_rank;
    let mut cur = p.clone();
    for e in &p.curve.edges {
        let Some(c) = edge_cone(p, &e.id) else { continue };
        let (u, v) = (&c.generators[0], &c.generators[1]);
        let (base, dir) = if p.curve.is_bounded(e) {
            let b = p.h[&e.ends[0]].clone();
            let d: Vec<Rat> = p.h[&e.ends[1]].iter().zip(&b).map(|(x, y)| x - y).collect();
            (b, d)
        } else {
            let (f, i) = p.curve.unbounded_ends(e).unwrap();
            (p.h[f].clone(), p.h[i].clone())
        };
        let k0 = dir.iter().position(|x| !x.is_zero()).expect("nonzero slope");
        let mut pts: Vec<(Rat, Vec<Rat>)> = w
            .iter()
            .filter(|r| in_open_cone(r, u, v).is_some())
            .map(|r| {
                let t = BigRational::from_integer(r[n].clone());
                let x: Vec<Rat> = r[..n].iter().map(|y| BigRational::from_integer(y.clone()) / &t).collect();
                ((&x[k0] - &base[k0]) / &dir[k0], x)
            })
            .collect();
        if pts.is_empty() {
            continue;
        }
        pts.sort();
        let points: Vec<Vec<Rat>> = pts.into_iter().map(|(_, x)| x).collect();
        cur = cur.lengths_from_positions(&e.id, &points)?;
    }
    Ok(cur)
}

/// The fan `Σ_Γ` of a refined curve with its vertex and edge labels.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanModel {
    pub lattice_rank: usize,
    /// Primitive generators in `Z^{n+1}`, sorted lexicographically.
    #[serde_as(as = "Vec<Vec<DisplayFromStr>>")]
    pub rays: Vec<Vec<BigInt>>,
    /// 2-cones as sorted index pairs into `rays`.
    pub cones: Vec<[usize; 2]>,
    /// Rays lying in `N_R × {0}`.
    pub eta: Vec<bool>,
    pub ray_vertices: Vec<Vec<String>>,
    pub cone_edges: Vec<Vec<String>>,
    /// `l(ρ)` for rays in `N_R × {0}`.
    #[serde_as(as = "Vec<Option<DisplayFromStr>>")]
    pub ray_multiplicity: Vec<Option<BigInt>>,
    /// `l(σ)` for 2-cones.
    #[serde_as(as = "Vec<DisplayFromStr>")]
    pub cone_multiplicity: Vec<BigInt>,
}

impl FanModel {
    /// Fan of a curve whose cone complex is already a fan (e.g. the output of [`gamma_tr`]).
    pub fn for_refined_curve(p: &ParamTropicalCurve) -> Result<FanModel, FanError> {
        p.require_balanced()?;
        let k: Vec<Cone> = cone_complex(p).into_iter().map(|t| t.cone).collect();
        let fan = refine_to_fan(&k);
        let own: BTreeSet<Vec<Vec<BigInt>>> =
            k.iter().filter(|c| c.dim() == 2).map(|c| c.generators.clone()).collect();
        let refined: BTreeSet<Vec<Vec<BigInt>>> =
            fan.cones.iter().map(|[a, b]| vec![fan.rays[*a].clone(), fan.rays[*b].clone()]).collect();
        if own != refined {
            return Err(FanError::NotRefined);
        }
        let n = p.lattice_rank;
        let nr = fan.rays.len();
        let mut ray_vertices = vec![Vec::new(); nr];
        let mut ray_mult: Vec<Option<BigInt>> = vec![None; nr];
        for v in p.curve.vertices() {
            let Some(r) = vertex_ray(p, v) else { continue };
            let i = fan.rays.binary_search(&r).expect("vertex ray in fan");
            ray_vertices[i].push(v.clone());
            if p.curve.is_infinite_vertex(v) {
                let geo = p.edge_geometry(&p.curve.leg(v).unwrap().id)?;
                let l = ray_mult[i].take().map_or(geo.multiplicity.clone(), |x| x.lcm(&geo.multiplicity));
                ray_mult[i] = Some(l);
            }
        }
        let mut cone_edges = vec![Vec::new(); fan.cones.len()];
        let mut cone_mult = vec![BigInt::one(); fan.cones.len()];
        for e in &p.curve.edges {
            let Some(c) = edge_cone(p, &e.id) else { continue };
            let pair = {
                let a = fan.rays.binary_search(&c.generators[0]).unwrap();
                let b = fan.rays.binary_search(&c.generators[1]).unwrap();
                [a.min(b), a.max(b)]
            };
            let i = fan.cones.binary_search(&pair).expect("edge cone in fan");
            cone_edges[i].push(e.id.clone());
            cone_mult[i] = cone_mult[i].lcm(&p.edge_geometry(&e.id)?.multiplicity);
        }
        for l in ray_vertices.iter_mut().chain(cone_edges.iter_mut()) {
            l.sort();
        }
        Ok(FanModel {
            lattice_rank: n,
            eta: fan.rays.iter().map(|r| r[n].is_zero()).collect(),
            rays: fan.rays,
            cones: fan.cones,
            ray_vertices,
            cone_edges,
            ray_multiplicity: ray_mult,
            cone_multiplicity: cone_mult,
        })
    }

    /// Position `n_ρ ∈ N_Q` of a non-η ray.
    pub fn ray_point(&self, i: usize) -> Vec<Rat> {
        let n = self.lattice_rank;
        let t = BigRational::from_integer(self.rays[i][n].clone());
        self.rays[i][..n].iter().map(|x| BigRational::from_integer(x.clone()) / &t).collect()
    }

    /// Nodes (non-η rays) and edges (2-cones between two non-η rays) of the
    /// dual graph of the central fiber.
    pub fn component_adjacency(&self) -> (Vec<usize>, Vec<(usize, usize)>) {
        let nodes = (0..self.rays.len()).filter(|&i| !self.eta[i]).collect();
        let edges =
            self.cones.iter().filter(|[a, b]| !self.eta[*a] && !self.eta[*b]).map(|[a, b]| (*a, *b)).collect();
        (nodes, edges)
    }

    /// Rays of the star of the non-η ray `i`, as primitive vectors in `N`.
    pub fn star_fan(&self, i: usize) -> Result<Vec<Vec<BigInt>>, FanError> {
        if i >= self.rays.len() {
            return Err(FanError::UnknownRay(i));
        }
        if self.eta[i] {
            return Err(FanError::EtaRay(i));
        }
        let n = self.lattice_rank;
        let here = self.ray_point(i);
        let mut out = BTreeSet::new();
        for [a, b] in &self.cones {
            let other = if *a == i {
                *b
            } else if *b == i {
                *a
            } else {
                continue;
            };
            let dir = if self.eta[other] {
                self.rays[other][..n].to_vec()
            } else {
                let there = self.ray_point(other);
                primitive_direction(&there.iter().zip(&here).map(|(x, y)| x - y).collect::<Vec<_>>())
                    .expect("distinct rays")
            };
            out.insert(dir);
        }
        Ok(out.into_iter().collect())
    }

    /// Index of a ray by generator.
    pub fn ray_index(&self, r: &[BigInt]) -> Option<usize> {
        self.rays.binary_search(&r.to_vec()).ok()
    }
}

/// Fan of `gamma_tr(p)`.
pub fn fan_model(p: &ParamTropicalCurve) -> Result<FanModel, FanError> {
    FanModel::for_refined_curve(&gamma_tr(p)?)
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ramification {
    #[serde_as(as = "DisplayFromStr")]
    pub a: BigInt,
    pub reduced: bool,
    /// Least `a` making `a h(v)` integral for finite `v` and `a |e|` integral for bounded `e`.
    #[serde_as(as = "DisplayFromStr")]
    pub minimal_a: BigInt,
}

pub fn ramification(p: &ParamTropicalCurve, config: &ToricModelConfig) -> Ramification {
    let a = &config.a;
    let mut m = BigInt::one();
    for v in &p.curve.finite_vertices {
        for x in &p.h[v] {
            m = m.lcm(x.denom());
        }
    }
    for e in p.curve.bounded_edges() {
        m = m.lcm(e.length.finite().unwrap().denom());
    }
    Ramification { a: a.clone(), reduced: a.is_positive() && a.is_multiple_of(&m), minimal_a: m }
}

/// Local fan `X_v`: primitive directions of the edges at a finite vertex.
pub fn vertex_star(p: &ParamTropicalCurve, v: &str) -> Result<Vec<Vec<BigInt>>, FanError> {
    if !p.curve.is_finite_vertex(v) {
        return Err(FanError::UnknownVertex(v.to_string()));
    }
    let mut out = BTreeSet::new();
    for e in p.curve.incident_edges(v) {
        if let Some(d) = primitive_direction(&p.outgoing_slope(e, v)) {
            out.insert(d);
        }
    }
    Ok(out.into_iter().collect())
}

/// One entry per edge end at `v`: the slope pointing away from `v`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionExponent {
    pub edge: String,
    #[serde_as(as = "Vec<DisplayFromStr>")]
    pub exponent: Vec<BigInt>,
}

pub fn reduction_exponents(p: &ParamTropicalCurve, v: &str) -> Result<Vec<ReductionExponent>, FanError> {
    if !p.curve.is_finite_vertex(v) {
        return Err(FanError::UnknownVertex(v.to_string()));
    }
    let mut out = Vec::new();
    for e in p.curve.incident_edges(v) {
        let ends = if e.is_loop() { 2 } else { 1 };
        let s: Vec<BigInt> = p.outgoing_slope(e, v).iter().map(|x| x.to_integer()).collect();
        for _ in 0..ends {
            out.push(ReductionExponent { edge: e.id.clone(), exponent: s.clone() });
        }
    }
    Ok(out)
}

/// Reduction exponent tables for every finite vertex.
pub fn all_reduction_exponents(p: &ParamTropicalCurve) -> Result<BTreeMap<String, Vec<ReductionExponent>>, FanError> {
    p.curve.finite_vertices.iter().map(|v| Ok((v.clone(), reduction_exponents(p, v)?))).collect()
}

impl FanError {
    /// Stable machine-readable code.
    pub fn code(&self) -> String {
        match self {
            FanError::Param(p) => return p.code(),
            FanError::NotRefined => "NotRefined",
            FanError::UnknownRay(_) => "UnknownRay",
            FanError::EtaRay(_) => "EtaRay",
            FanError::UnknownVertex(_) => "UnknownVertex",
            FanError::BadRamification(_) => "BadRamification",
        }
        .into()
    }
}
