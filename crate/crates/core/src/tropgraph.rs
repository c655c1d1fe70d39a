//! Abstract tropical curves: metric graphs with finite and ordered infinite
//! vertices, their modifications, stabilization and isomorphism.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DeserializeFromStr, DisplayFromStr, SerializeDisplay};
use thiserror::Error;


use crate::exactla::Rat;

/// Edge length; serialized as `"inf"` or a rational string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, SerializeDisplay, DeserializeFromStr)]
pub enum Length {
    Finite(Rat),
    Infinite,
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Length::Finite(x) => write!(f, "{x}"),
            Length::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Length {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "inf" {
            return Ok(Length::Infinite);
        }
        crate::exactla::parse_rational(s).map(Length::Finite).ok_or_else(|| format!("bad length {s:?}"))
    }
}

impl Length {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Length::Finite(x) => Some(x),
            Length::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Length::Infinite)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub ends: [String; 2],
    pub length: Length,
}

impl Edge {
    pub fn new(id: impl Into<String>, a: impl Into<String>, b: impl Into<String>, length: Length) -> Self {
        Edge { id: id.into(), ends: [a.into(), b.into()], length }
    }

    pub fn is_loop(&self) -> bool {
        self.ends[0] == self.ends[1]
    }

    pub fn touches(&self, v: &str) -> bool {
        self.ends[0] == v || self.ends[1] == v
    }

    /// The other endpoint. For loops this is `v` itself.
    pub fn other_end(&self, v: &str) -> &str {
        if self.ends[0] == v {
            &self.ends[1]
        } else {
            &self.ends[0]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    Finite,
    Infinite,
}

/// A tropical curve. Infinite vertices are ordered; they are the marked ends.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TropicalCurve {
    pub finite_vertices: Vec<String>,
    pub infinite_vertices: Vec<String>,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Stable code: `duplicate_id`, `unknown_vertex`, `p2`, `p3`, `disconnected`, `empty`.
    pub code: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, code: &str, message: String) {
        self.violations.push(Violation { code: code.to_string(), message });
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TropGraphError {
    #[error("invalid curve: {}", .0.violations.iter().map(|v| format!("{} ({})", v.message, v.code)).collect::<Vec<_>>().join("; "))]
    Invalid(ValidationReport),
    #[error("unknown edge {0}")]
    UnknownEdge(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("identifier {0} already in use")]
    DuplicateId(String),
    #[error("edge {0} has the wrong kind for this subdivision")]
    WrongEdgeKind(String),
    #[error("subdivision points on edge {0} must be strictly increasing inside the edge")]
    BadSubdivision(String),
    #[error("attached graph is not a metric tree: {0}")]
    BadTree(String),
    #[error("curve is not stabilizable: need 2g + |V_inf| >= 3, have g = {genus}, |V_inf| = {infinite}")]
    NotStabilizable { genus: i64, infinite: usize },
}

impl TropicalCurve {
    pub fn new(finite_vertices: Vec<String>, infinite_vertices: Vec<String>, edges: Vec<Edge>) -> Self {
        TropicalCurve { finite_vertices, infinite_vertices, edges }
    }

    pub fn vertex_kind(&self, v: &str) -> Option<VertexKind> {
        if self.finite_vertices.iter().any(|x| x == v) {
            Some(VertexKind::Finite)
        } else if self.infinite_vertices.iter().any(|x| x == v) {
            Some(VertexKind::Infinite)
        } else {
            None
        }
    }

    pub fn is_finite_vertex(&self, v: &str) -> bool {
        self.vertex_kind(v) == Some(VertexKind::Finite)
    }

    pub fn is_infinite_vertex(&self, v: &str) -> bool {
        self.vertex_kind(v) == Some(VertexKind::Infinite)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &String> {
        self.finite_vertices.iter().chain(self.infinite_vertices.iter())
    }

    /// Edge ends at `v`, loops counted twice.
    pub fn valency(&self, v: &str) -> usize {
        self.edges.iter().map(|e| e.ends.iter().filter(|x| *x == v).count()).sum()
    }

    pub fn incident_edges(&self, v: &str) -> Vec<&Edge> {
        self.edges.iter().filter(|e| e.touches(v)).collect()
    }

    /// An edge is bounded when both ends are finite vertices.
    pub fn is_bounded(&self, e: &Edge) -> bool {
        self.is_finite_vertex(&e.ends[0]) && self.is_finite_vertex(&e.ends[1])
    }

    pub fn bounded_edges(&self) -> Vec<&Edge> {
        self.edges.iter().filter(|e| self.is_bounded(e)).collect()
    }

    pub fn unbounded_edges(&self) -> Vec<&Edge> {
        self.edges.iter().filter(|e| !self.is_bounded(e)).collect()
    }

    /// For an unbounded edge: (finite end, infinite end).
    pub fn unbounded_ends<'a>(&self, e: &'a Edge) -> Option<(&'a str, &'a str)> {
        if self.is_infinite_vertex(&e.ends[1]) && self.is_finite_vertex(&e.ends[0]) {
            Some((&e.ends[0], &e.ends[1]))
        } else if self.is_infinite_vertex(&e.ends[0]) && self.is_finite_vertex(&e.ends[1]) {
            Some((&e.ends[1], &e.ends[0]))
        } else {
            None
        }
    }

    /// The edge at an infinite vertex.
    pub fn leg(&self, infinite: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.touches(infinite))
    }

    /// `1 - |V| + |E|` with infinite vertices and unbounded edges included.
    pub fn genus(&self) -> i64 {
        let v = (self.finite_vertices.len() + self.infinite_vertices.len()) as i64;
        1 - v + self.edges.len() as i64
    }

    pub fn is_connected(&self) -> bool {
        let all: Vec<&String> = self.vertices().collect();
        let Some(start) = all.first() else { return true };
        let mut seen: HashSet<&str> = HashSet::new();
        let mut stack = vec![start.as_str()];
        let adj = self.adjacency();
        while let Some(v) = stack.pop() {
            if !seen.insert(v) {
                continue;
            }
            if let Some(ns) = adj.get(v) {
                stack.extend(ns.iter().copied());
            }
        }
        all.iter().all(|v| seen.contains(v.as_str()))
    }

    fn adjacency(&self) -> HashMap<&str, Vec<&str>> {
        let mut adj: HashMap<&str, Vec<&str>> = HashMap::new();
        for e in &self.edges {
            adj.entry(&e.ends[0]).or_default().push(&e.ends[1]);
            adj.entry(&e.ends[1]).or_default().push(&e.ends[0]);
        }
        adj
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let mut ids = HashSet::new();
        for v in self.vertices() {
            if !ids.insert(v.as_str()) {
                rep.push("duplicate_id", format!("vertex {v} listed twice"));
            }
        }
        let mut eids = HashSet::new();
        for e in &self.edges {
            if !eids.insert(e.id.as_str()) {
                rep.push("duplicate_id", format!("edge {} listed twice", e.id));
            }
        }
        if self.finite_vertices.is_empty() {
            rep.push("empty", "curve has no finite vertex".to_string());
        }
        for e in &self.edges {
            let mut known = true;
            for end in &e.ends {
                if self.vertex_kind(end).is_none() {
                    rep.push("unknown_vertex", format!("edge {} ends at unknown vertex {end}", e.id));
                    known = false;
                }
            }
            if !known {
                continue;
            }
            let inf_ends = e.ends.iter().filter(|x| self.is_infinite_vertex(x)).count();
            match (inf_ends, &e.length) {
                (0, Length::Finite(l)) if !l.is_positive() => {
                    rep.push("p3", format!("bounded edge {} has non-positive length {l}", e.id))
                }
                (0, Length::Infinite) => rep.push("p3", format!("bounded edge {} has infinite length", e.id)),
                (1, Length::Finite(_)) => rep.push("p3", format!("unbounded edge {} has finite length", e.id)),
                (2, _) => rep.push("p2", format!("edge {} joins two infinite vertices", e.id)),
                _ => {}
            }
        }
        for v in &self.infinite_vertices {
            let val = self.valency(v);
            if val != 1 {
                rep.push("p2", format!("infinite vertex {v} has valency {val}"));
            }
        }
        if !self.is_connected() {
            rep.push("disconnected", "curve is disconnected".to_string());
        }
        rep
    }

    pub fn require_valid(&self) -> Result<(), TropGraphError> {
        let rep = self.validate();
        if rep.is_valid() {
            Ok(())
        } else {
            Err(TropGraphError::Invalid(rep))
        }
    }

    pub fn is_stable(&self) -> bool {
        self.finite_vertices.iter().all(|v| self.valency(v) >= 3)
    }

    pub fn is_stabilizable(&self) -> bool {
        2 * self.genus() + self.infinite_vertices.len() as i64 >= 3
    }

    /// Apply subdivisions and tree attachments in order.
    pub fn modify(&self, steps: &[ModifyStep]) -> Result<(TropicalCurve, Vec<NewVertex>), TropGraphError> {
        self.require_valid()?;
        let mut cur = self.clone();
        let mut log = Vec::new();
        for step in steps {
            match step {
                ModifyStep::SubdivideBounded { edge, distances } => cur.subdivide(edge, distances, true, &mut log)?,
                ModifyStep::SubdivideUnbounded { edge, distances } => cur.subdivide(edge, distances, false, &mut log)?,
                ModifyStep::Attach(t) => cur.attach(t, &mut log)?,
            }
        }
        Ok((cur, log))
    }

    fn fresh_vertex_id(&self, base: String) -> String {
        fresh(base, |s| self.vertex_kind(s).is_some())
    }

    fn subdivide(
        &mut self,
        edge_id: &str,
        distances: &[Rat],
        bounded: bool,
        log: &mut Vec<NewVertex>,
    ) -> Result<(), TropGraphError> {
        let idx = self
            .edges
            .iter()
            .position(|e| e.id == edge_id)
            .ok_or_else(|| TropGraphError::UnknownEdge(edge_id.to_string()))?;
        let e = self.edges[idx].clone();
        if self.is_bounded(&e) != bounded {
            return Err(TropGraphError::WrongEdgeKind(edge_id.to_string()));
        }
        let (start, end) = if bounded {
            (e.ends[0].clone(), e.ends[1].clone())
        } else {
            let (f, i) = self.unbounded_ends(&e).expect("valid unbounded edge");
            (f.to_string(), i.to_string())
        };
        let total = e.length.finite().cloned();
        let mut prev = BigRational::zero();
        for d in distances {
            let inside = d > &prev && total.as_ref().is_none_or(|t| d < t);
            if !inside {
                return Err(TropGraphError::BadSubdivision(edge_id.to_string()));
            }
            prev = d.clone();
        }
        if distances.is_empty() {
            return Ok(());
        }
        let mut new_vs = Vec::new();
        for k in 1..=distances.len() {
            let id = self.fresh_vertex_id(format!("{edge_id}.v{k}"));
            self.finite_vertices.push(id.clone());
            new_vs.push(id);
        }
        let mut chain = vec![start.clone()];
        chain.extend(new_vs.iter().cloned());
        chain.push(end);
        let mut pieces = Vec::new();
        let mut last = BigRational::zero();
        for k in 0..chain.len() - 1 {
            let len = if k < distances.len() {
                let l = &distances[k] - &last;
                last = distances[k].clone();
                Length::Finite(l)
            } else {
                match &total {
                    Some(t) => Length::Finite(t - &last),
                    None => Length::Infinite,
                }
            };
            let id = if k == 0 {
                edge_id.to_string()
            } else {
                fresh(format!("{edge_id}.{k}"), |x| self.edge(x).is_some() || pieces.iter().any(|p: &Edge| p.id == x))
            };
            pieces.push(Edge::new(id, chain[k].clone(), chain[k + 1].clone(), len));
        }
        self.edges[idx] = pieces[0].clone();
        self.edges.extend(pieces[1..].iter().cloned());
        for (k, v) in new_vs.into_iter().enumerate() {
            log.push(NewVertex {
                id: v,
                origin: VertexOrigin::Subdivision {
                    edge: edge_id.to_string(),
                    from: start.clone(),
                    to: chain.last().cloned().unwrap(),
                    distance: distances[k].clone(),
                    edge_length: e.length.clone(),
                },
            });
        }
        Ok(())
    }

    fn attach(&mut self, t: &TreeAttachment, log: &mut Vec<NewVertex>) -> Result<(), TropGraphError> {
        if !self.is_finite_vertex(&t.root) {
            return Err(TropGraphError::UnknownVertex(t.root.clone()));
        }
        let tree = &t.tree;
        if !tree.is_finite_vertex(&t.tree_root) {
            return Err(TropGraphError::BadTree(format!("root {} is not a finite vertex of the tree", t.tree_root)));
        }
        let rep = tree.validate();
        if let Some(v) = rep.violations.first() {
            return Err(TropGraphError::BadTree(v.message.clone()));
        }
        if tree.genus() != 0 {
            return Err(TropGraphError::BadTree("attached graph has a cycle".to_string()));
        }
        for v in tree.vertices() {
            if v != &t.tree_root && self.vertex_kind(v).is_some() {
                return Err(TropGraphError::DuplicateId(v.clone()));
            }
        }
        for e in &tree.edges {
            if self.edge(&e.id).is_some() {
                return Err(TropGraphError::DuplicateId(e.id.clone()));
            }
        }
        let rename = |v: &String| if v == &t.tree_root { t.root.clone() } else { v.clone() };
        for v in &tree.finite_vertices {
            if v != &t.tree_root {
                self.finite_vertices.push(v.clone());
                log.push(NewVertex { id: v.clone(), origin: VertexOrigin::Tree { root: t.root.clone() } });
            }
        }
        for v in &tree.infinite_vertices {
            self.infinite_vertices.push(v.clone());
            log.push(NewVertex { id: v.clone(), origin: VertexOrigin::Tree { root: t.root.clone() } });
        }
        for e in &tree.edges {
            self.edges.push(Edge::new(e.id.clone(), rename(&e.ends[0]), rename(&e.ends[1]), e.length.clone()));
        }
        Ok(())
    }

    /// Stabilization: remove trees hanging off finite leaves, then smooth
    /// 2-valent finite vertices. Also returns, for each smoothed edge, the
    /// list of original edges it was merged from.
    pub fn stabilize_with_map(&self) -> Result<(TropicalCurve, BTreeMap<String, Vec<String>>), TropGraphError> {
        self.require_valid()?;
        if !self.is_stabilizable() {
            return Err(TropGraphError::NotStabilizable { genus: self.genus(), infinite: self.infinite_vertices.len() });
        }
        let mut c = self.clone();
        let mut merged: BTreeMap<String, Vec<String>> =
            c.edges.iter().map(|e| (e.id.clone(), vec![e.id.clone()])).collect();
        loop {
            let mut leaves: Vec<String> =
                c.finite_vertices.iter().filter(|v| c.valency(v) <= 1).cloned().collect();
            if leaves.is_empty() {
                break;
            }
            leaves.sort();
            let v = &leaves[0];
            c.finite_vertices.retain(|x| x != v);
            c.edges.retain(|e| !e.touches(v));
        }
        loop {
            let mut cands: Vec<String> = c
                .finite_vertices
                .iter()
                .filter(|v| c.valency(v) == 2 && c.incident_edges(v).len() == 2)
                .cloned()
                .collect();
            if cands.is_empty() {
                break;
            }
            cands.sort();
            let v = cands[0].clone();
            let inc: Vec<Edge> = c.incident_edges(&v).into_iter().cloned().collect();
            let (e1, e2) = if inc[0].id <= inc[1].id { (&inc[0], &inc[1]) } else { (&inc[1], &inc[0]) };
            let a = e1.other_end(&v).to_string();
            let b = e2.other_end(&v).to_string();
            let length = match (&e1.length, &e2.length) {
                (Length::Finite(x), Length::Finite(y)) => Length::Finite(x + y),
                _ => Length::Infinite,
            };
            let new_edge = Edge::new(e1.id.clone(), a, b, length);
            let mut parts = merged.remove(&e1.id).unwrap_or_default();
            let mut second = merged.remove(&e2.id).unwrap_or_default();
            // Keep parts ordered along the new edge.
            parts.reverse();
            parts.append(&mut second);
            merged.insert(e1.id.clone(), parts);
            let pos = c.edges.iter().position(|e| e.id == e1.id).unwrap();
            c.edges[pos] = new_edge;
            c.edges.retain(|e| e.id != e2.id);
            c.finite_vertices.retain(|x| x != &v);
        }
        merged.retain(|k, _| c.edge(k).is_some());
        Ok((c, merged))
    }

    pub fn stabilize(&self) -> Result<TropicalCurve, TropGraphError> {
        self.stabilize_with_map().map(|(c, _)| c)
    }

    /// Isomorphism preserving edge lengths and the order of infinite vertices.
    pub fn is_isomorphic(&self, other: &TropicalCurve) -> bool {
        if self.finite_vertices.len() != other.finite_vertices.len()
            || self.infinite_vertices.len() != other.infinite_vertices.len()
            || self.edges.len() != other.edges.len()
        {
            return false;
        }
        let a = Indexed::new(self);
        let b = Indexed::new(other);
        let mut ca = a.colors.clone();
        let mut cb = b.colors.clone();
        ca.sort_unstable();
        cb.sort_unstable();
        if ca != cb {
            return false;
        }
        let n = a.n;
        let mut map: Vec<Option<usize>> = vec![None; n];
        let mut used = vec![false; n];
        for i in 0..self.infinite_vertices.len() {
            let (x, y) = (a.n_fin + i, b.n_fin + i);
            if a.colors[x] != b.colors[y] {
                return false;
            }
            map[x] = Some(y);
            used[y] = true;
        }
        backtrack(&a, &b, &mut map, &mut used, 0)
    }
}

fn fresh(base: String, taken: impl Fn(&str) -> bool) -> String {
    if !taken(&base) {
        return base;
    }
    (1..).map(|j| format!("{base}_{j}")).find(|s| !taken(s)).unwrap()
}

/// Vertex-indexed form used by the isomorphism search.
struct Indexed {
    n: usize,
    n_fin: usize,
    /// Multiset of edge lengths between each ordered pair (loops on the diagonal).
    between: HashMap<(usize, usize), Vec<Length>>,
    colors: Vec<u64>,
}

impl Indexed {
    fn new(c: &TropicalCurve) -> Self {
        let ids: Vec<&String> = c.vertices().collect();
        let pos: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let n = ids.len();
        let n_fin = c.finite_vertices.len();
        let mut between: HashMap<(usize, usize), Vec<Length>> = HashMap::new();
        let mut incident: Vec<Vec<String>> = vec![Vec::new(); n];
        for e in &c.edges {
            let (x, y) = (pos[e.ends[0].as_str()], pos[e.ends[1].as_str()]);
            between.entry((x, y)).or_default().push(e.length.clone());
            if x != y {
                between.entry((y, x)).or_default().push(e.length.clone());
            }
            let tag = format!("{:?}", e.length);
            incident[x].push(tag.clone());
            incident[y].push(tag);
        }
        for v in between.values_mut() {
            v.sort_by_key(|l| format!("{l:?}"));
        }
        // Initial colors from kind, order of infinite vertices, and incident lengths;
        // then a few rounds of neighborhood refinement.
        let mut labels: Vec<String> = (0..n)
            .map(|i| {
                let mut inc = incident[i].clone();
                inc.sort();
                if i < n_fin {
                    format!("F|{}", inc.join(","))
                } else {
                    format!("I{}|{}", i - n_fin, inc.join(","))
                }
            })
            .collect();
        for _ in 0..n {
            let next: Vec<String> = (0..n)
                .map(|i| {
                    let mut ns: Vec<String> = (0..n)
                        .filter_map(|j| between.get(&(i, j)).map(|ls| format!("{}:{:?}", labels[j], ls)))
                        .collect();
                    ns.sort();
                    format!("{}[{}]", labels[i], ns.join(";"))
                })
                .collect();
            let distinct = |v: &Vec<String>| v.iter().collect::<BTreeSet<_>>().len();
            let stop = distinct(&next) == distinct(&labels);
            labels = next;
            if stop {
                break;
            }
        }
        let colors = labels.iter().map(|s| hash_str(s)).collect();
        Indexed { n, n_fin, between, colors }
    }
}

fn hash_str(s: &str) -> u64 {
    // FNV-1a, stable across runs.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn backtrack(a: &Indexed, b: &Indexed, map: &mut Vec<Option<usize>>, used: &mut Vec<bool>, i: usize) -> bool {
    if i == a.n_fin {
        return (0..a.n).all(|x| {
            (0..a.n).all(|y| a.between.get(&(x, y)) == b.between.get(&(map[x].unwrap(), map[y].unwrap())))
        });
    }
    for cand in 0..b.n_fin {
        if used[cand] || a.colors[i] != b.colors[cand] {
            continue;
        }
        map[i] = Some(cand);
        let consistent = (0..a.n).all(|x| match map[x] {
            Some(y) => a.between.get(&(i, x)) == b.between.get(&(cand, y)),
            None => true,
        });
        if consistent {
            used[cand] = true;
            if backtrack(a, b, map, used, i + 1) {
                return true;
            }
            used[cand] = false;
        }
        map[i] = None;
    }
    false
}

/// A metric tree glued to a finite vertex. The tree's `tree_root` vertex is
/// identified with `root`; its infinite vertices become new infinite vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeAttachment {
    pub root: String,
    pub tree_root: String,
    pub tree: TropicalCurve,
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModifyStep {
    /// Insert vertices at the given distances from `ends[0]`.
    SubdivideBounded {
        edge: String,
        #[serde_as(as = "Vec<DisplayFromStr>")]
        distances: Vec<Rat>,
    },
    /// Insert vertices at the given distances from the finite end.
    SubdivideUnbounded {
        edge: String,
        #[serde_as(as = "Vec<DisplayFromStr>")]
        distances: Vec<Rat>,
    },
    Attach(TreeAttachment),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexOrigin {
    /// `distance` is measured from `from` along an edge of length `edge_length` ending at `to`.
    Subdivision { edge: String, from: String, to: String, distance: Rat, edge_length: Length },
    Tree { root: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewVertex {
    pub id: String,
    pub origin: VertexOrigin,
}

impl TropGraphError {
    /// Stable machine-readable code.
    pub fn code(&self) -> String {
        match self {
            TropGraphError::Invalid(_) => "InvalidCurve",
            TropGraphError::UnknownEdge(_) => "UnknownEdge",
            TropGraphError::UnknownVertex(_) => "UnknownVertex",
            TropGraphError::DuplicateId(_) => "DuplicateId",
            TropGraphError::WrongEdgeKind(_) => "WrongEdgeKind",
            TropGraphError::BadSubdivision(_) => "BadSubdivision",
            TropGraphError::BadTree(_) => "BadTree",
            TropGraphError::NotStabilizable { .. } => "NotStabilizable",
        }
        .into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::{int_rat, rat};

    fn s(x: &str) -> String {
        x.to_string()
    }

    fn fin(l: i64) -> Length {
        Length::Finite(int_rat(l))
    }

    /// Loop at `a` split into arcs, plus one leg.
    fn subdivided_loop() -> TropicalCurve {
        TropicalCurve::new(
            vec![s("a"), s("b"), s("c")],
            vec![s("x")],
            vec![
                Edge::new("e1", "a", "b", Length::Finite(rat(1, 3))),
                Edge::new("e2", "b", "c", Length::Finite(rat(1, 3))),
                Edge::new("e3", "c", "a", Length::Finite(rat(1, 3))),
                Edge::new("leg", "a", "x", Length::Infinite),
            ],
        )
    }

    #[test]
    fn genus_counts_loops_once() {
        let c = TropicalCurve::new(vec![s("v")], vec![s("x")], vec![
            Edge::new("l", "v", "v", fin(1)),
            Edge::new("leg", "v", "x", Length::Infinite),
        ]);
        assert_eq!(c.genus(), 1);
        assert_eq!(c.valency("v"), 3);
        assert!(c.validate().is_valid());
    }

    #[test]
    fn infinite_vertex_of_valency_two_flagged() {
        let c = TropicalCurve::new(vec![s("v"), s("w")], vec![s("x")], vec![
            Edge::new("a", "v", "x", Length::Infinite),
            Edge::new("b", "w", "x", Length::Infinite),
            Edge::new("c", "v", "w", fin(1)),
        ]);
        let rep = c.validate();
        assert!(rep.violations.iter().any(|v| v.code == "p2"));
    }

    #[test]
    fn bad_lengths_flagged() {
        let c = TropicalCurve::new(vec![s("v"), s("w")], vec![], vec![Edge::new("c", "v", "w", fin(0))]);
        assert!(c.validate().violations.iter().any(|v| v.code == "p3"));
        let d = TropicalCurve::new(vec![s("v"), s("w")], vec![], vec![]);
        assert!(d.validate().violations.iter().any(|v| v.code == "disconnected"));
    }

    #[test]
    fn stabilize_collapses_subdivided_loop() {
        let st = subdivided_loop().stabilize().unwrap();
        assert_eq!(st.finite_vertices, vec![s("a")]);
        assert_eq!(st.edges.len(), 2);
        let lp = st.edges.iter().find(|e| e.is_loop()).unwrap();
        assert_eq!(lp.length, fin(1));
        assert_eq!(st.stabilize().unwrap(), st);
    }

    #[test]
    fn stabilize_refuses_single_leg_tree() {
        let c = TropicalCurve::new(vec![s("v")], vec![s("x")], vec![Edge::new("leg", "v", "x", Length::Infinite)]);
        assert!(matches!(c.stabilize(), Err(TropGraphError::NotStabilizable { .. })));
    }

    #[test]
    fn subdivision_then_stabilize_is_isomorphic() {
        let st = subdivided_loop().stabilize().unwrap();
        let steps = vec![ModifyStep::SubdivideBounded { edge: st.edges[0].id.clone(), distances: vec![rat(1, 4)] }];
        let (m, log) = st.modify(&steps).unwrap();
        assert_eq!(log.len(), 1);
        assert!(!m.is_stable());
        assert!(m.stabilize().unwrap().is_isomorphic(&st));
        assert!(subdivided_loop().is_isomorphic(&subdivided_loop()));
    }

    #[test]
    fn attach_tree_appends_infinite_vertices() {
        let st = subdivided_loop();
        let tree = TropicalCurve::new(vec![s("r"), s("t")], vec![s("y"), s("z")], vec![
            Edge::new("t1", "r", "t", fin(2)),
            Edge::new("t2", "t", "y", Length::Infinite),
            Edge::new("t3", "t", "z", Length::Infinite),
        ]);
        let (m, _) = st
            .modify(&[ModifyStep::Attach(TreeAttachment { root: s("b"), tree_root: s("r"), tree })])
            .unwrap();
        assert_eq!(m.infinite_vertices, vec![s("x"), s("y"), s("z")]);
        assert!(m.validate().is_valid());
        assert_eq!(m.genus(), 1);
    }

    #[test]
    fn rejects_out_of_range_subdivision() {
        let st = subdivided_loop();
        let steps = vec![ModifyStep::SubdivideBounded { edge: s("e1"), distances: vec![rat(1, 2)] }];
        assert!(matches!(st.modify(&steps), Err(TropGraphError::BadSubdivision(_))));
    }

    #[test]
    fn unbounded_subdivision_keeps_last_piece_infinite() {
        let c = subdivided_loop();
        let steps = vec![ModifyStep::SubdivideUnbounded { edge: s("leg"), distances: vec![int_rat(1), int_rat(3)] }];
        let (m, _) = c.modify(&steps).unwrap();
        let leg = m.leg("x").unwrap();
        assert!(leg.length.is_infinite());
        assert_eq!(m.edge("leg").unwrap().length, fin(1));
        assert_eq!(m.edges.len(), 6);
    }
}
