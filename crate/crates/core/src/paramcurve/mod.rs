//! Parameterized tropical curves `h : Γ → N_Q`: edge geometry, balancing,
//! degree, modifications with their induced parameterizations, and genus-one data.

mod constraint;

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};
use thiserror::Error;

use crate::exactla::{integral_vector, primitive_part, Rat};
use crate::tropgraph::{Edge, Length, ModifyStep, TropGraphError, TropicalCurve, VertexOrigin};

pub use constraint::{AffineConstraint, AffineConstraintSet, ConstraintReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error(transparent)]
    Graph(#[from] TropGraphError),
    #[error("vertex {0} has no position")]
    MissingPosition(String),
    #[error("position of vertex {0} has the wrong dimension")]
    WrongDimension(String),
    #[error("position given for unknown vertex {0}")]
    UnknownVertex(String),
    #[error("infinite vertex {0} must map to an integral vector")]
    NonIntegralInfinite(String),
    #[error("edge {0} has a non-integral slope")]
    NonIntegralSlope(String),
    #[error("balancing fails at {}", .0.join(", "))]
    NotBalanced(Vec<String>),
    #[error("unknown edge {0}")]
    UnknownEdge(String),
    #[error("points are not strictly ordered along edge {0}")]
    NonCollinear(String),
    #[error("curve has genus {0}, expected genus one")]
    GenusNotOne(i64),
    #[error("{constraints} constraints but only {infinite} infinite vertices")]
    ConstraintCountMismatch { constraints: usize, infinite: usize },
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("orientation does not cover bounded edge {0}")]
    BadOrientation(String),
}

/// A tropical curve with a map of its vertices to `N_Q = Q^n`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamTropicalCurve {
    pub curve: TropicalCurve,
    pub lattice_rank: usize,
    #[serde_as(as = "BTreeMap<_, Vec<DisplayFromStr>>")]
    pub h: BTreeMap<String, Vec<Rat>>,
}

/// Orientation of bounded edges: edge id to (initial, terminal) vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orientation(pub BTreeMap<String, (String, String)>);

impl Orientation {
    /// Each bounded edge points from the lexicographically smaller vertex id to the larger.
    pub fn default_for(c: &TropicalCurve) -> Self {
        let mut m = BTreeMap::new();
        for e in c.bounded_edges() {
            let (a, b) = (&e.ends[0], &e.ends[1]);
            let pair = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
            m.insert(e.id.clone(), pair);
        }
        Orientation(m)
    }

    pub fn ends(&self, edge: &str) -> Option<(&str, &str)> {
        self.0.get(edge).map(|(a, b)| (a.as_str(), b.as_str()))
    }
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeGeometry {
    /// Primitive generator of the slope lattice `N_e`, `None` when `N_e = 0`.
    #[serde_as(as = "Option<Vec<DisplayFromStr>>")]
    pub slope: Option<Vec<BigInt>>,
    /// Integral length of the edge's slope vector; zero when the slope is zero.
    #[serde_as(as = "DisplayFromStr")]
    pub multiplicity: BigInt,
    /// True when the generator's sign comes from an edge orientation (bounded edges).
    pub oriented: bool,
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceReport {
    /// Finite vertices with nonzero balancing sum, with that sum.
    #[serde_as(as = "Vec<(_, Vec<DisplayFromStr>)>")]
    pub defects: Vec<(String, Vec<Rat>)>,
}

impl BalanceReport {
    pub fn is_balanced(&self) -> bool {
        self.defects.is_empty()
    }
}

/// Multiset of (primitive direction, multiplicity) over unbounded edges with nonzero slope.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degree(#[serde_as(as = "Vec<(Vec<DisplayFromStr>, DisplayFromStr)>")] pub Vec<(Vec<BigInt>, BigInt)>);

fn sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn scale(a: &[Rat], k: &Rat) -> Vec<Rat> {
    a.iter().map(|x| x * k).collect()
}

fn add(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

impl ParamTropicalCurve {
    pub fn new(curve: TropicalCurve, lattice_rank: usize, h: BTreeMap<String, Vec<Rat>>) -> Result<Self, ParamError> {
        curve.require_valid()?;
        for k in h.keys() {
            if curve.vertex_kind(k).is_none() {
                return Err(ParamError::UnknownVertex(k.clone()));
            }
        }
        for v in curve.vertices() {
            let x = h.get(v).ok_or_else(|| ParamError::MissingPosition(v.clone()))?;
            if x.len() != lattice_rank {
                return Err(ParamError::WrongDimension(v.clone()));
            }
        }
        for v in &curve.infinite_vertices {
            if integral_vector(&h[v]).is_none() {
                return Err(ParamError::NonIntegralInfinite(v.clone()));
            }
        }
        let p = ParamTropicalCurve { curve, lattice_rank, h };
        for e in p.curve.bounded_edges() {
            let len = e.length.finite().expect("bounded edges have finite length");
            let d = sub(&p.h[&e.ends[1]], &p.h[&e.ends[0]]);
            if integral_vector(&scale(&d, &len.recip())).is_none() {
                return Err(ParamError::NonIntegralSlope(e.id.clone()));
            }
        }
        Ok(p)
    }

    pub fn pos(&self, v: &str) -> &[Rat] {
        &self.h[v]
    }

    pub fn genus(&self) -> i64 {
        self.curve.genus()
    }

    fn edge_or_err(&self, id: &str) -> Result<&Edge, ParamError> {
        self.curve.edge(id).ok_or_else(|| ParamError::UnknownEdge(id.to_string()))
    }

    /// Integer slope vector: `(h(t) - h(i)) / |e|` for bounded edges oriented `i → t`,
    /// `h(v)` at the infinite vertex for unbounded edges.
    pub fn slope_vector(&self, e: &Edge, orientation: &Orientation) -> Result<Vec<BigInt>, ParamError> {
        let v = if self.curve.is_bounded(e) {
            let (i, t) = orientation.ends(&e.id).ok_or_else(|| ParamError::BadOrientation(e.id.clone()))?;
            let len = e.length.finite().unwrap();
            scale(&sub(&self.h[t], &self.h[i]), &len.recip())
        } else {
            let (_, inf) = self.curve.unbounded_ends(e).unwrap();
            self.h[inf].clone()
        };
        Ok(integral_vector(&v).expect("slopes are integral by construction"))
    }

    pub fn edge_geometry(&self, edge: &str) -> Result<EdgeGeometry, ParamError> {
        let e = self.edge_or_err(edge)?;
        let sv = self.slope_vector(e, &Orientation::default_for(&self.curve))?;
        let oriented = self.curve.is_bounded(e);
        Ok(match primitive_part(&sv) {
            Some((n, l)) => EdgeGeometry { slope: Some(n), multiplicity: l, oriented },
            None => EdgeGeometry { slope: None, multiplicity: BigInt::zero(), oriented },
        })
    }

    /// Slope of `e` pointing away from its end `v`. Zero for loops.
    pub fn outgoing_slope(&self, e: &Edge, v: &str) -> Vec<Rat> {
        if self.curve.is_bounded(e) {
            let len = e.length.finite().unwrap();
            scale(&sub(&self.h[e.other_end(v)], &self.h[v]), &len.recip())
        } else {
            let (_, inf) = self.curve.unbounded_ends(e).unwrap();
            self.h[inf].clone()
        }
    }

    pub fn check_balancing(&self) -> BalanceReport {
        let mut defects = Vec::new();
        for v in &self.curve.finite_vertices {
            let mut sum = vec![BigRational::zero(); self.lattice_rank];
            for e in self.curve.incident_edges(v) {
                if e.is_loop() {
                    continue;
                }
                sum = add(&sum, &self.outgoing_slope(e, v));
            }
            if sum.iter().any(|x| !x.is_zero()) {
                defects.push((v.clone(), sum));
            }
        }
        BalanceReport { defects }
    }

    pub fn require_balanced(&self) -> Result<(), ParamError> {
        let rep = self.check_balancing();
        if rep.is_balanced() {
            Ok(())
        } else {
            Err(ParamError::NotBalanced(rep.defects.into_iter().map(|(v, _)| v).collect()))
        }
    }

    pub fn degree(&self) -> Degree {
        let mut pairs: Vec<(Vec<BigInt>, BigInt)> = self
            .curve
            .unbounded_edges()
            .into_iter()
            .filter_map(|e| {
                let (_, inf) = self.curve.unbounded_ends(e)?;
                primitive_part(&integral_vector(&self.h[inf])?)
            })
            .collect();
        pairs.sort();
        Degree(pairs)
    }

    /// Number of bounded edges with zero slope.
    pub fn zero_slope_bounded_count(&self) -> usize {
        self.curve.bounded_edges().iter().filter(|e| self.h[&e.ends[0]] == self.h[&e.ends[1]]).count()
    }

    pub fn has_zero_slope(&self, e: &Edge) -> bool {
        if self.curve.is_bounded(e) {
            self.h[&e.ends[0]] == self.h[&e.ends[1]]
        } else {
            let (_, inf) = self.curve.unbounded_ends(e).unwrap();
            self.h[inf].iter().all(Zero::is_zero)
        }
    }

    /// `Σ (val(v) - 3)` over finite vertices; 2-valent vertices contribute -1.
    pub fn overvalence(&self) -> i64 {
        self.curve.finite_vertices.iter().map(|v| self.curve.valency(v) as i64 - 3).sum()
    }

    /// Apply modifications and extend `h` to the new vertices: linearly along
    /// subdivided edges, constantly on attached trees, with new infinite vertices at 0.
    pub fn extend_parameterization(&self, steps: &[ModifyStep]) -> Result<ParamTropicalCurve, ParamError> {
        let (curve, log) = self.curve.modify(steps)?;
        let mut h = self.h.clone();
        for nv in log {
            let x = match &nv.origin {
                VertexOrigin::Subdivision { from, to, distance, edge_length, .. } => match edge_length {
                    Length::Finite(total) => {
                        add(&h[from], &scale(&sub(&h[to], &h[from]), &(distance / total)))
                    }
                    Length::Infinite => add(&h[from], &scale(&h[to], distance)),
                },
                VertexOrigin::Tree { root } => {
                    if curve.is_infinite_vertex(&nv.id) {
                        vec![BigRational::zero(); self.lattice_rank]
                    } else {
                        h[root].clone()
                    }
                }
            };
            h.insert(nv.id, x);
        }
        ParamTropicalCurve::new(curve, self.lattice_rank, h)
    }

    /// Subdivide `edge` at points of its image, given in order along the edge
    /// (from `ends[0]` for bounded edges, from the finite end otherwise).
    pub fn lengths_from_positions(&self, edge: &str, points: &[Vec<Rat>]) -> Result<ParamTropicalCurve, ParamError> {
        let e = self.edge_or_err(edge)?.clone();
        let bounded = self.curve.is_bounded(&e);
        let (base, dir) = if bounded {
            (self.h[&e.ends[0]].clone(), sub(&self.h[&e.ends[1]], &self.h[&e.ends[0]]))
        } else {
            let (f, inf) = self.curve.unbounded_ends(&e).unwrap();
            (self.h[f].clone(), self.h[inf].clone())
        };
        let noncollinear = || ParamError::NonCollinear(edge.to_string());
        let k = dir.iter().position(|x| !x.is_zero()).ok_or_else(noncollinear)?;
        let mut lambdas = Vec::with_capacity(points.len());
        for x in points {
            if x.len() != self.lattice_rank {
                return Err(noncollinear());
            }
            let lam = (&x[k] - &base[k]) / &dir[k];
            if add(&base, &scale(&dir, &lam)) != *x {
                return Err(noncollinear());
            }
            lambdas.push(lam);
        }
        let mut prev = BigRational::zero();
        for lam in &lambdas {
            if lam <= &prev || (bounded && lam >= &BigRational::from_integer(1.into())) {
                return Err(noncollinear());
            }
            prev = lam.clone();
        }
        let step = match &e.length {
            Length::Finite(total) => ModifyStep::SubdivideBounded {
                edge: edge.to_string(),
                distances: lambdas.iter().map(|l| l * total).collect(),
            },
            Length::Infinite => ModifyStep::SubdivideUnbounded { edge: edge.to_string(), distances: lambdas },
        };
        self.extend_parameterization(&[step])
    }

    /// Contract all bounded edges of zero slope. Returns the contracted curve and
    /// the vertex map; each class is named after its smallest vertex id.
    pub fn contract_zero_slope(&self) -> Result<(ParamTropicalCurve, BTreeMap<String, String>), ParamError> {
        let mut parent: HashMap<String, String> =
            self.curve.vertices().map(|v| (v.clone(), v.clone())).collect();
        fn find(parent: &mut HashMap<String, String>, v: &str) -> String {
            let p = parent[v].clone();
            if p == v {
                return p;
            }
            let r = find(parent, &p);
            parent.insert(v.to_string(), r.clone());
            r
        }
        let zero: Vec<&Edge> =
            self.curve.bounded_edges().into_iter().filter(|e| self.has_zero_slope(e)).collect();
        for e in &zero {
            let (a, b) = (find(&mut parent, &e.ends[0]), find(&mut parent, &e.ends[1]));
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent.insert(hi, lo);
            }
        }
        let map: BTreeMap<String, String> =
            self.curve.vertices().map(|v| (v.clone(), find(&mut parent, v))).collect();
        let finite: Vec<String> =
            self.curve.finite_vertices.iter().filter(|v| &map[*v] == *v).cloned().collect();
        let edges: Vec<Edge> = self
            .curve
            .edges
            .iter()
            .filter(|e| !zero.iter().any(|z| z.id == e.id))
            .map(|e| Edge::new(e.id.clone(), map[&e.ends[0]].clone(), map[&e.ends[1]].clone(), e.length.clone()))
            .collect();
        let curve = TropicalCurve::new(finite, self.curve.infinite_vertices.clone(), edges);
        let h = curve.vertices().map(|v| (v.clone(), self.h[v].clone())).collect();
        Ok((ParamTropicalCurve::new(curve, self.lattice_rank, h)?, map))
    }

    /// Stabilization of the underlying curve with `h` restricted to it.
    pub fn stabilize(&self) -> Result<ParamTropicalCurve, ParamError> {
        let st = self.curve.stabilize()?;
        let h = st.vertices().map(|v| (v.clone(), self.h[v].clone())).collect();
        ParamTropicalCurve::new(st, self.lattice_rank, h)
    }

    /// Edges of the unique cycle of a genus-one curve, in traversal order,
    /// each with the vertex it is entered from and left to.
    pub fn cycle(&self) -> Result<Vec<(String, String, String)>, ParamError> {
        let g = self.genus();
        if g != 1 {
            return Err(ParamError::GenusNotOne(g));
        }
        let mut edges: Vec<&Edge> = self.curve.edges.iter().collect();
        loop {
            let mut val: HashMap<&str, usize> = HashMap::new();
            for e in &edges {
                *val.entry(&e.ends[0]).or_default() += 1;
                *val.entry(&e.ends[1]).or_default() += 1;
            }
            let before = edges.len();
            edges.retain(|e| val[e.ends[0].as_str()] > 1 && val[e.ends[1].as_str()] > 1);
            if edges.len() == before {
                break;
            }
        }
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        let first = edges[0];
        let mut out = vec![(first.id.clone(), first.ends[0].clone(), first.ends[1].clone())];
        let mut at = first.ends[1].clone();
        let start = first.ends[0].clone();
        let mut used = vec![first.id.clone()];
        while at != start {
            let next = edges
                .iter()
                .find(|e| !used.contains(&e.id) && e.touches(&at))
                .expect("pruned genus-one graph is a cycle");
            let to = next.other_end(&at).to_string();
            out.push((next.id.clone(), at.clone(), to.clone()));
            used.push(next.id.clone());
            at = to;
        }
        Ok(out)
    }

    /// Tropical j-invariant: total length of the cycle of a genus-one curve.
    pub fn tropical_j(&self) -> Result<Rat, ParamError> {
        let cyc = self.cycle()?;
        Ok(cyc
            .iter()
            .map(|(id, _, _)| self.curve.edge(id).unwrap().length.finite().cloned().unwrap())
            .fold(BigRational::zero(), |a, b| a + b))
    }

    /// Dimension of the deformation space: zero-slope bounded edges plus `rank E¹`.
    pub fn rank(&self) -> Result<usize, ParamError> {
        crate::complexes::deformation_rank(self)
    }

    /// `(n - 3) χ + |E_unbounded| - overvalence + rank E²`, which must equal [`Self::rank`].
    pub fn rank_formula(&self) -> Result<i64, ParamError> {
        let chi = self.curve.finite_vertices.len() as i64 - self.curve.bounded_edges().len() as i64;
        let e2 = crate::complexes::obstruction_rank(self)? as i64;
        Ok((self.lattice_rank as i64 - 3) * chi + self.curve.unbounded_edges().len() as i64 - self.overvalence() + e2)
    }

    /// Check an affine constraint bound to the first infinite vertices.
    pub fn check_constraint(&self, a: &AffineConstraintSet) -> Result<ConstraintReport, ParamError> {
        constraint::check(self, a)
    }
}

/// Consecutive piece lengths for an edge split at parameters `lambdas` (including endpoints).
pub fn lengths_from_lambdas(lambdas: &[Rat], length: &Length) -> Vec<Rat> {
    lambdas
        .windows(2)
        .map(|w| {
            let d = &w[1] - &w[0];
            match length {
                Length::Finite(l) => d * l,
                Length::Infinite => d,
            }
        })
        .collect()
}

/// Infinite vertex carrying the i-th marked leg and the finite vertex it is attached to.
pub fn attachment_vertex_of(p: &ParamTropicalCurve, i: usize) -> (String, String) {
    constraint::attachment_vertex(p, i)
}

impl ParamError {
    /// Stable machine-readable code.
    pub fn code(&self) -> String {
        match self {
            ParamError::Graph(g) => return g.code(),
            ParamError::MissingPosition(_) => "MissingPosition",
            ParamError::WrongDimension(_) => "WrongDimension",
            ParamError::UnknownVertex(_) => "UnknownVertex",
            ParamError::NonIntegralInfinite(_) => "NonIntegralInfinite",
            ParamError::NonIntegralSlope(_) => "NonIntegralSlope",
            ParamError::NotBalanced(_) => "NotBalanced",
            ParamError::UnknownEdge(_) => "UnknownEdge",
            ParamError::NonCollinear(_) => "NonCollinear",
            ParamError::GenusNotOne(_) => "GenusNotOne",
            ParamError::ConstraintCountMismatch { .. } => "ConstraintCountMismatch",
            ParamError::InvalidConstraint(_) => "InvalidConstraint",
            ParamError::BadOrientation(_) => "BadOrientation",
        }
        .into()
    }
}
