//! Enumerative layer: moduli dimensions, torsor sizes for tropical reductions,
//! stacky multipliers, and correspondence counts with full hypothesis checks.
//! All counts are computed on the stabilization of the input curve.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};
use thiserror::Error;

use crate::complexes::{build_matrix, complex_report, compute, sizes_over, ComplexError, ComplexSpec, Variant};
use crate::exactla::{det_bareiss, CoeffGroup, GroupSize, LinAlgError};
use crate::paramcurve::{AffineConstraintSet, ParamError, ParamTropicalCurve};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("hypothesis {flag} fails")]
    HypothesisFailed { flag: String, hypotheses: Box<CountHypotheses> },
    #[error("obstruction group over k* is nontrivial: {0}")]
    ObstructionNonzero(GroupSize),
    #[error("curve has {0} bounded edges of zero slope")]
    ZeroSlopeEdges(usize),
    #[error("internal cross-check failed: {0}")]
    CrossCheckFailed(String),
}

impl From<ParamError> for CountError {
    fn from(e: ParamError) -> Self {
        CountError::Complex(ComplexError::Param(e))
    }
}

impl From<LinAlgError> for CountError {
    fn from(e: LinAlgError) -> Self {
        CountError::Complex(ComplexError::LinAlg(e))
    }
}

impl CountError {
    /// Stable machine-readable code such as `HypothesisFailed:char_ok`.
    pub fn code(&self) -> String {
        match self {
            CountError::Complex(c) => c.code(),
            CountError::HypothesisFailed { flag, .. } => format!("HypothesisFailed:{flag}"),
            CountError::ObstructionNonzero(_) => "ObstructionNonzero".into(),
            CountError::ZeroSlopeEdges(_) => "ZeroSlopeEdges".into(),
            CountError::CrossCheckFailed(_) => "CrossCheckFailed".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountHypotheses {
    pub trivalent: bool,
    pub satisfies_a: bool,
    pub regular: bool,
    pub codim_match: bool,
    pub no_zero_slope_bounded: bool,
    pub char_ok: bool,
    pub elliptic_regular: Option<bool>,
}

impl CountHypotheses {
    /// First failing flag, in reporting order.
    fn first_failure(&self) -> Option<&'static str> {
        let regular = self.elliptic_regular.unwrap_or(self.regular);
        let regular_name = if self.elliptic_regular.is_some() { "elliptic_regular" } else { "regular" };
        [
            (self.trivalent, "trivalent"),
            (self.satisfies_a, "satisfies_A"),
            (self.char_ok, "char_ok"),
            (self.no_zero_slope_bounded, "no_zero_slope_bounded"),
            (regular, regular_name),
            (self.codim_match, "codim_match"),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, name)| name)
    }
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountResult {
    #[serde_as(as = "DisplayFromStr")]
    pub count: BigInt,
    /// `(|E¹_{k*}(Γ, A)|, ∏ l(e))`; absent for elliptic counts.
    #[serde_as(as = "Option<(DisplayFromStr, DisplayFromStr)>")]
    pub factorization: Option<(BigInt, BigInt)>,
    pub cross_checks: Vec<String>,
    pub hypotheses: CountHypotheses,
}

fn stabilized(p: &ParamTropicalCurve) -> Result<ParamTropicalCurve, CountError> {
    p.require_balanced()?;
    Ok(p.stabilize()?)
}

/// `Σ max(val(v) - 3, 0)` over finite vertices of the stabilization.
pub fn moduli_dimension(p: &ParamTropicalCurve) -> Result<usize, CountError> {
    p.require_balanced()?;
    let s = if p.curve.is_stabilizable() { p.stabilize()? } else { p.clone() };
    Ok(s.curve.finite_vertices.iter().map(|v| s.curve.valency(v).saturating_sub(3)).sum())
}

/// Size of the group `E¹_{k*}(Γ^st[, A])` acting on tropical reductions.
pub fn reduction_torsor(
    p: &ParamTropicalCurve,
    a: Option<&AffineConstraintSet>,
    char_p: u64,
) -> Result<GroupSize, CountError> {
    let c = p.zero_slope_bounded_count();
    if c > 0 {
        return Err(CountError::ZeroSlopeEdges(c));
    }
    let s = stabilized(p)?;
    let k = compute(&s, &ComplexSpec::new(Variant::B).constrained(a), CoeffGroup::UnitsAlgClosed(char_p))?;
    if !k.e2.is_trivial() {
        return Err(CountError::ObstructionNonzero(k.e2));
    }
    Ok(k.e1)
}

fn bounded_multiplicity_product(s: &ParamTropicalCurve) -> Result<BigInt, CountError> {
    let mut prod = BigInt::one();
    for e in s.curve.bounded_edges() {
        prod *= s.edge_geometry(&e.id)?.multiplicity;
    }
    Ok(prod)
}

/// `∏ l(e)` over bounded edges of the stabilization.
pub fn stacky_multiplier(p: &ParamTropicalCurve) -> Result<BigInt, CountError> {
    bounded_multiplicity_product(&stabilized(p)?)
}

fn char_ok(s: &ParamTropicalCurve, char_p: u64) -> Result<bool, CountError> {
    if char_p == 0 {
        return Ok(true);
    }
    let pb = BigInt::from(char_p);
    for e in &s.curve.edges {
        let g = s.edge_geometry(&e.id)?;
        if g.slope.is_some() && g.multiplicity.is_multiple_of(&pb) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn hypotheses(
    s: &ParamTropicalCurve,
    a: &AffineConstraintSet,
    char_p: u64,
    elliptic: bool,
) -> Result<CountHypotheses, CountError> {
    let field = CoeffGroup::FieldOfChar(char_p);
    field.check()?;
    let trivalent = s.curve.finite_vertices.iter().all(|v| s.curve.valency(v) == 3);
    let rep = s.check_constraint(a)?;
    let no_zero = s.zero_slope_bounded_count() == 0;
    let spec = ComplexSpec::new(Variant::Beta).constrained(Some(a));
    let regular = rep.satisfies && rep.simple && compute(s, &spec, field)?.e2.is_trivial();
    let elliptic_regular = if elliptic {
        let ok = rep.satisfies
            && rep.simple
            && match compute(s, &spec.clone().elliptic(true), field) {
                Ok(c) => c.e2.is_trivial(),
                Err(ComplexError::ZeroSlopeCycleEdge(_)) => false,
                Err(e) => return Err(e.into()),
            };
        Some(ok)
    } else {
        None
    };
    let rank = s.rank()?;
    let codim_match = a.codim() + usize::from(elliptic) == rank;
    Ok(CountHypotheses {
        trivalent,
        satisfies_a: rep.satisfies,
        regular,
        codim_match,
        no_zero_slope_bounded: no_zero,
        char_ok: char_ok(s, char_p)?,
        elliptic_regular,
    })
}

fn require(h: CountHypotheses) -> Result<CountHypotheses, CountError> {
    match h.first_failure() {
        Some(flag) => Err(CountError::HypothesisFailed { flag: flag.to_string(), hypotheses: Box::new(h) }),
        None => Ok(h),
    }
}

fn finite(g: &GroupSize, what: &str) -> Result<BigInt, CountError> {
    g.finite_order().ok_or_else(|| CountError::CrossCheckFailed(format!("{what} is infinite")))
}

fn check(checks: &mut Vec<String>, name: &str, lhs: &BigInt, rhs: &BigInt) -> Result<(), CountError> {
    if lhs != rhs {
        return Err(CountError::CrossCheckFailed(format!("{name}: {lhs} != {rhs}")));
    }
    checks.push(format!("{name} ({lhs})"));
    Ok(())
}

/// Number of curves through the constraints, with the tropical multiplicity
/// `|CE²(Γ, A)| = |E²(Γ, A)| · ∏ l(e)`.
pub fn correspondence_count(
    p: &ParamTropicalCurve,
    a: &AffineConstraintSet,
    char_p: u64,
) -> Result<CountResult, CountError> {
    let s = stabilized(p)?;
    let h = require(hypotheses(&s, a, char_p, false)?)?;
    let kstar = CoeffGroup::UnitsAlgClosed(char_p);
    let beta = ComplexSpec::new(Variant::Beta).constrained(Some(a));
    let b = ComplexSpec::new(Variant::B).constrained(Some(a));
    let ce = complex_report(&s, &beta)?;
    let e = complex_report(&s, &b)?;
    let count = finite(&GroupSize { free_rank: ce.e2.rank, torsion_order: ce.e2.torsion_order(), kdim: 0 }, "CE2")?;
    let e2_order = e.e2.order().ok_or_else(|| CountError::CrossCheckFailed("E2 is infinite".into()))?;
    let prod = bounded_multiplicity_product(&s)?;
    let (ce1_k, _) = sizes_over(&ce, kstar)?;
    let (e1_k, _) = sizes_over(&e, kstar)?;
    let e1_k_order = finite(&e1_k, "E1 over k*")?;
    let mut checks = Vec::new();
    check(&mut checks, "|CE2(G,A)| = |E2(G,A)| * prod l(e)", &count, &(&e2_order * &prod))?;
    if ce.matrix.rows() == ce.matrix.cols() {
        check(&mut checks, "|CE2(G,A)| = |det(beta x gamma)|", &count, &det_bareiss(&ce.matrix).abs())?;
    }
    check(&mut checks, "|CE1_k*(G,A)| = |CE2(G,A)|", &finite(&ce1_k, "CE1 over k*")?, &count)?;
    check(&mut checks, "|E1_k*(G,A)| = |E2(G,A)|", &e1_k_order, &e2_order)?;
    Ok(CountResult { count, factorization: Some((e1_k_order, prod)), cross_checks: checks, hypotheses: h })
}

/// Number of genus-one curves through the constraints with fixed j-invariant: `|CE²(Γ, A, j)|`.
pub fn elliptic_count(p: &ParamTropicalCurve, a: &AffineConstraintSet, char_p: u64) -> Result<CountResult, CountError> {
    let s = stabilized(p)?;
    if s.genus() != 1 {
        return Err(ParamError::GenusNotOne(s.genus()).into());
    }
    let h = require(hypotheses(&s, a, char_p, true)?)?;
    let spec = ComplexSpec::new(Variant::Beta).constrained(Some(a)).elliptic(true);
    let ce = complex_report(&s, &spec)?;
    let count = ce.e2.order().ok_or_else(|| CountError::CrossCheckFailed("CE2(j) is infinite".into()))?;
    let mut checks = Vec::new();
    let m = build_matrix(&s, &spec)?.matrix;
    if m.rows() == m.cols() {
        check(&mut checks, "|CE2(G,A,j)| = |det(beta x gamma x delta)|", &count, &det_bareiss(&m).abs())?;
    }
    let (ce1_k, _) = sizes_over(&ce, CoeffGroup::UnitsAlgClosed(char_p))?;
    check(&mut checks, "|CE1_k*(G,A,j)| = |CE2(G,A,j)|", &finite(&ce1_k, "CE1(j) over k*")?, &count)?;
    Ok(CountResult { count, factorization: None, cross_checks: checks, hypotheses: h })
}
