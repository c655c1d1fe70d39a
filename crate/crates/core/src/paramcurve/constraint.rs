use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use super::{ParamError, ParamTropicalCurve};
use crate::exactla::{Rat, Sublattice};

/// Affine subspace `a + L_Q` with `L` a saturated sublattice of corank at least 2.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineConstraint {
    pub lattice: Sublattice,
    #[serde_as(as = "Vec<DisplayFromStr>")]
    pub point: Vec<Rat>,
}

impl AffineConstraint {
    pub fn new(lattice: Sublattice, point: Vec<Rat>) -> Result<Self, ParamError> {
        if point.len() != lattice.ambient_rank() {
            return Err(ParamError::InvalidConstraint("point has the wrong dimension".into()));
        }
        if !lattice.is_saturated() {
            return Err(ParamError::InvalidConstraint("lattice is not saturated".into()));
        }
        if lattice.corank() < 2 {
            return Err(ParamError::InvalidConstraint("lattice has corank below 2".into()));
        }
        Ok(AffineConstraint { lattice, point })
    }

    /// A point constraint `L = 0`.
    pub fn point(point: Vec<Rat>) -> Result<Self, ParamError> {
        Self::new(Sublattice::zero(point.len()), point)
    }
}

/// Ordered list of constraints; the i-th one applies to the i-th infinite vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineConstraintSet {
    pub items: Vec<AffineConstraint>,
}

impl AffineConstraintSet {
    pub fn new(items: Vec<AffineConstraint>) -> Self {
        AffineConstraintSet { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Sum of coranks.
    pub fn codim(&self) -> usize {
        self.items.iter().map(|c| c.lattice.corank()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub satisfies: bool,
    pub simple: bool,
    pub codim: usize,
    /// Human-readable reasons for failures of either property.
    pub notes: Vec<String>,
}

/// Finite vertex carrying the i-th marked leg.
pub(crate) fn attachment_vertex(p: &ParamTropicalCurve, i: usize) -> (String, String) {
    let inf = &p.curve.infinite_vertices[i];
    let leg = p.curve.leg(inf).expect("infinite vertices have one edge");
    (inf.clone(), leg.other_end(inf).to_string())
}

pub(super) fn check(p: &ParamTropicalCurve, a: &AffineConstraintSet) -> Result<ConstraintReport, ParamError> {
    let k = a.len();
    let infinite = p.curve.infinite_vertices.len();
    if k > infinite {
        return Err(ParamError::ConstraintCountMismatch { constraints: k, infinite });
    }
    let mut satisfies = true;
    let mut simple = true;
    let mut notes = Vec::new();
    for (i, c) in a.items.iter().enumerate() {
        if c.lattice.ambient_rank() != p.lattice_rank {
            return Err(ParamError::InvalidConstraint(format!("constraint {i} has the wrong ambient rank")));
        }
        let (v, w) = attachment_vertex(p, i);
        if p.h[&v].iter().any(|x| !x.is_zero()) {
            satisfies = false;
            notes.push(format!("infinite vertex {v} is not a contracted marked point"));
        }
        let diff: Vec<Rat> = p.h[&w].iter().zip(&c.point).map(|(x, y)| x - y).collect();
        if !c.lattice.span_contains(&diff) {
            satisfies = false;
            notes.push(format!("vertex {w} does not lie on constraint {i}"));
        }
        if p.curve.valency(&w) != 3 {
            simple = false;
            notes.push(format!("vertex {w} is not trivalent"));
            continue;
        }
        let leg = p.curve.leg(&v).unwrap().id.clone();
        let other = p.curve.incident_edges(&w).into_iter().find(|e| e.id != leg).unwrap();
        let dir: Vec<Rat> = p.outgoing_slope(other, &w);
        if other.is_loop() || dir.iter().all(Zero::is_zero) {
            simple = false;
            notes.push(format!("edge {} at vertex {w} has zero slope", other.id));
            continue;
        }
        let scaled: Vec<BigInt> = crate::exactla::primitive_direction(&dir).unwrap();
        if c.lattice.span_contains_int(&scaled) {
            simple = false;
            notes.push(format!("slope at vertex {w} meets constraint {i}"));
        }
    }
    Ok(ConstraintReport { satisfies, simple, codim: a.codim(), notes })
}
