//! Toric stacky data on the fan of a refined curve: sublattices `N'_σ ⊆ N_σ`,
//! stabilizer orders, the Deligne–Mumford criterion and node stabilizers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};
use thiserror::Error;

use crate::exactla::{primitive_part, LinAlgError, Sublattice};
use crate::fanmodel::{ramification, FanError, FanModel, ToricModelConfig};
use crate::paramcurve::{ParamError, ParamTropicalCurve};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StackyError {
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error("base change of order {a} is not reduced; need a multiple of {minimal}")]
    NotReduced { a: BigInt, minimal: BigInt },
    #[error("integral length {length} of the cone direction is not divisible by l(σ) = {l}")]
    DivisibilityViolated { length: BigInt, l: BigInt },
    #[error("sublattices fail to restrict to their faces")]
    Incompatible,
}

impl From<ParamError> for StackyError {
    fn from(e: ParamError) -> Self {
        StackyError::Fan(FanError::Param(e))
    }
}

/// Sublattice data on one cone, in coordinates of `N ⊕ aZ` (last coordinate divided by `a`).
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeLattices {
    /// Ray indices into the fan; empty for the zero cone.
    pub rays: Vec<usize>,
    /// `N_σ`: lattice points in the span of the cone.
    pub full: Sublattice,
    /// `N'_σ`.
    pub stacky: Sublattice,
    /// `|N_σ / N'_σ|`.
    #[serde_as(as = "DisplayFromStr")]
    pub stabilizer_order: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackySigma {
    pub fan: FanModel,
    pub config: ToricModelConfig,
    /// One entry per ray, in fan order.
    pub rays: Vec<ConeLattices>,
    /// One entry per 2-cone, in fan order.
    pub cones: Vec<ConeLattices>,
}

impl StackySigma {
    pub fn all_orders(&self) -> impl Iterator<Item = &BigInt> {
        self.rays.iter().chain(self.cones.iter()).map(|c| &c.stabilizer_order)
    }
}

/// Ray generator in `N ⊕ aZ` coordinates.
fn scaled_generator(fan: &FanModel, i: usize, a: &BigInt) -> Vec<BigInt> {
    let n = fan.lattice_rank;
    if fan.eta[i] {
        return fan.rays[i].clone();
    }
    let mut v: Vec<BigInt> = fan.ray_point(i).iter().map(|x| (x * a).to_integer()).collect();
    v.push(BigInt::one());
    debug_assert_eq!(v.len(), n + 1);
    v
}

pub fn stacky_data(p_tr: &ParamTropicalCurve, config: &ToricModelConfig) -> Result<StackySigma, StackyError> {
    let fan = FanModel::for_refined_curve(p_tr)?;
    let ram = ramification(p_tr, config);
    if !ram.reduced {
        return Err(StackyError::NotReduced { a: config.a.clone(), minimal: ram.minimal_a });
    }
    let a = &config.a;
    let n = fan.lattice_rank;
    let gens: Vec<Vec<BigInt>> = (0..fan.rays.len()).map(|i| scaled_generator(&fan, i, a)).collect();
    let mut rays = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        let full = Sublattice::from_vectors(n + 1, std::slice::from_ref(g)).saturation();
        let stacky = if fan.eta[i] {
            let l = fan.ray_multiplicity[i].clone().unwrap_or_else(BigInt::one);
            Sublattice::from_vectors(n + 1, &[g.iter().map(|x| x * &l).collect()])
        } else {
            full.clone()
        };
        let stabilizer_order = full.index_of(&stacky)?;
        rays.push(ConeLattices { rays: vec![i], full, stacky, stabilizer_order });
    }
    let mut cones = Vec::new();
    for (c, &[r1, r2]) in fan.cones.iter().enumerate() {
        let full = Sublattice::from_vectors(n + 1, &[gens[r1].clone(), gens[r2].clone()]).saturation();
        let stacky = if fan.eta[r1] || fan.eta[r2] {
            rays[r1].stacky.sum(&rays[r2].stacky)
        } else {
            let l = &fan.cone_multiplicity[c];
            let diff: Vec<BigInt> = (0..n).map(|k| &gens[r2][k] - &gens[r1][k]).collect();
            let (prim, length) = primitive_part(&diff).expect("distinct non-η rays");
            if !length.is_multiple_of(l) {
                return Err(StackyError::DivisibilityViolated { length, l: l.clone() });
            }
            let mut horizontal: Vec<BigInt> = prim.iter().map(|x| x * l).collect();
            horizontal.push(BigInt::zero());
            Sublattice::from_vectors(n + 1, &[gens[r1].clone(), horizontal])
        };
        let stabilizer_order = full.index_of(&stacky)?;
        cones.push(ConeLattices { rays: vec![r1, r2], full, stacky, stabilizer_order });
    }
    let out = StackySigma { fan, config: config.clone(), rays, cones };
    if !compatible(&out) {
        return Err(StackyError::Incompatible);
    }
    Ok(out)
}

/// `N'_σ ∩ span(ρ) = N'_ρ` for every facet `ρ` of every 2-cone. In a fan every
/// other intersection of cones is the zero cone, where the condition is empty.
pub fn compatible(s: &StackySigma) -> bool {
    s.cones.iter().all(|c| {
        c.rays.iter().all(|&r| {
            let ray = &s.rays[r];
            c.stacky.intersect(&ray.full) == ray.stacky
        })
    })
}

/// Deligne–Mumford criterion: the characteristic divides no multiplicity of a
/// nonzero-slope edge of the stabilization (of the curve itself if it has none).
pub fn is_dm(p: &ParamTropicalCurve, char_p: u64) -> Result<bool, StackyError> {
    p.require_balanced()?;
    if char_p == 0 {
        return Ok(true);
    }
    let st = if p.curve.is_stabilizable() { p.stabilize()? } else { p.clone() };
    let pb = BigInt::from(char_p);
    for e in &st.curve.edges {
        let g = st.edge_geometry(&e.id)?;
        if g.slope.is_some() && g.multiplicity.is_multiple_of(&pb) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeStackData {
    /// Bounded edge id to `l(σ_e) / l(e)`.
    #[serde_as(as = "Vec<(_, DisplayFromStr)>")]
    pub edges: Vec<(String, BigInt)>,
    /// Infinite vertex id to `l(ρ) / l(v)`.
    #[serde_as(as = "Vec<(_, DisplayFromStr)>")]
    pub legs: Vec<(String, BigInt)>,
}

pub fn node_stack(p_tr: &ParamTropicalCurve) -> Result<NodeStackData, StackyError> {
    let fan = FanModel::for_refined_curve(p_tr)?;
    let mut edges = Vec::new();
    for (c, ids) in fan.cone_edges.iter().enumerate() {
        for id in ids {
            if !p_tr.curve.is_bounded(p_tr.curve.edge(id).unwrap()) {
                continue;
            }
            let l = p_tr.edge_geometry(id)?.multiplicity;
            edges.push((id.clone(), &fan.cone_multiplicity[c] / l));
        }
    }
    let mut legs = Vec::new();
    for (r, ids) in fan.ray_vertices.iter().enumerate() {
        let Some(lr) = &fan.ray_multiplicity[r] else { continue };
        for v in ids {
            let l = p_tr.edge_geometry(&p_tr.curve.leg(v).unwrap().id)?.multiplicity;
            legs.push((v.clone(), lr / l));
        }
    }
    edges.sort();
    legs.sort();
    Ok(NodeStackData { edges, legs })
}

impl StackyError {
    /// Stable machine-readable code.
    pub fn code(&self) -> String {
        match self {
            StackyError::Fan(f) => f.code(),
            StackyError::LinAlg(l) => l.code(),
            StackyError::NotReduced { .. } => "NotReduced".into(),
            StackyError::DivisibilityViolated { .. } => "DivisibilityViolated".into(),
            StackyError::Incompatible => "Incompatible".into(),
        }
    }
}
