//! Deformation and obstruction complexes of parameterized tropical curves:
//! the maps `b` and `β` with optional constraint and j-invariant augmentations,
//! their kernels and cokernels over `Z`, and base change to other coefficients.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactla::{
    base_change, cokernel_group, kernel_lattice, primitive_part, quotient_size, rank_over_field,
    roots_of_unity_size, BaseChangeMode, CoeffGroup, FGAbelianGroup, GroupSize, IntMatrix, LinAlgError, Sublattice,
};
use crate::paramcurve::{AffineConstraintSet, Orientation, ParamError, ParamTropicalCurve};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error("curve does not satisfy the constraint: {0}")]
    ConstraintUnsatisfied(String),
    #[error("cycle edge {0} has zero slope")]
    ZeroSlopeCycleEdge(String),
    #[error("coefficient group {0} is not a field")]
    NotAField(CoeffGroup),
    #[error("not a subdivision: {0}")]
    NotASubdivision(String),
}

impl ComplexError {
    /// Stable machine-readable code.
    pub fn code(&self) -> String {
        match self {
            ComplexError::Param(p) => p.code(),
            ComplexError::LinAlg(l) => l.code(),
            ComplexError::ConstraintUnsatisfied(_) => "ConstraintUnsatisfied".into(),
            ComplexError::ZeroSlopeCycleEdge(_) => "ZeroSlopeCycleEdge".into(),
            ComplexError::NotAField(_) => "NotAField".into(),
            ComplexError::NotASubdivision(_) => "NotASubdivision".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Edge columns map `x_e ↦ x_e n_e`.
    B,
    /// Edge columns map `x_e ↦ l(e) x_e n_e`.
    Beta,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexSpec {
    pub variant: Variant,
    pub constraints: Option<AffineConstraintSet>,
    pub elliptic: bool,
    /// Defaults to [`Orientation::default_for`].
    pub orientation: Option<Orientation>,
}

impl ComplexSpec {
    pub fn new(variant: Variant) -> Self {
        ComplexSpec { variant, constraints: None, elliptic: false, orientation: None }
    }

    pub fn constrained(mut self, a: Option<&AffineConstraintSet>) -> Self {
        self.constraints = a.cloned();
        self
    }

    pub fn elliptic(mut self, on: bool) -> Self {
        self.elliptic = on;
        self
    }

    pub fn oriented(mut self, o: Orientation) -> Self {
        self.orientation = Some(o);
        self
    }
}

/// Assembled matrix with labels for its columns and rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuiltComplex {
    pub matrix: IntMatrix,
    pub columns: Vec<String>,
    pub rows: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexReport {
    pub matrix: IntMatrix,
    pub e1_rank: usize,
    pub e1_lattice: Sublattice,
    pub e2: FGAbelianGroup,
    pub c_gamma: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexOverGroup {
    pub report: ComplexReport,
    pub group: CoeffGroup,
    pub e1: GroupSize,
    pub e2: GroupSize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularityVerdict {
    /// `CE²_G(Γ, A) = 0`.
    pub g_regular: bool,
    /// `CE²_G(Γ, A, j) = 0`, when requested.
    pub elliptically_regular: Option<bool>,
    /// Size of `CE²_G(Γ, A)`.
    pub obstruction: GroupSize,
    /// Size of `CE²_G(Γ, A, j)`, when requested.
    pub elliptic_obstruction: Option<GroupSize>,
    /// Whether the constraint is simple, when one is given.
    pub simple_constraint: Option<bool>,
}

fn ensure_preconditions(p: &ParamTropicalCurve, spec: &ComplexSpec) -> Result<(), ComplexError> {
    p.require_balanced()?;
    if let Some(a) = &spec.constraints {
        let rep = p.check_constraint(a)?;
        if !rep.satisfies {
            return Err(ComplexError::ConstraintUnsatisfied(rep.notes.join("; ")));
        }
    }
    if spec.elliptic && p.genus() != 1 {
        return Err(ParamError::GenusNotOne(p.genus()).into());
    }
    Ok(())
}

pub fn build_matrix(p: &ParamTropicalCurve, spec: &ComplexSpec) -> Result<BuiltComplex, ComplexError> {
    ensure_preconditions(p, spec)?;
    let n = p.lattice_rank;
    let curve = &p.curve;
    let orientation = spec.orientation.clone().unwrap_or_else(|| Orientation::default_for(curve));
    let bounded = curve.bounded_edges();

    let mut columns = Vec::new();
    for v in &curve.finite_vertices {
        for k in 0..n {
            columns.push(format!("v:{v}[{k}]"));
        }
    }
    // (edge index among bounded edges, slope vector) for edges with nonzero slope
    let mut edge_cols = Vec::new();
    for (i, e) in bounded.iter().enumerate() {
        let sv = p.slope_vector(e, &orientation)?;
        if let Some((prim, l)) = primitive_part(&sv) {
            columns.push(format!("e:{}", e.id));
            let weight = match spec.variant {
                Variant::B => prim,
                Variant::Beta => prim.iter().map(|x| x * &l).collect(),
            };
            edge_cols.push((i, weight));
        }
    }
    let mut rows = Vec::new();
    for e in &bounded {
        for k in 0..n {
            rows.push(format!("e:{}[{k}]", e.id));
        }
    }
    let projections: Vec<IntMatrix> = spec
        .constraints
        .as_ref()
        .map(|a| a.items.iter().map(|c| c.lattice.quotient_projection()).collect())
        .unwrap_or_default();
    for (i, pr) in projections.iter().enumerate() {
        for k in 0..pr.rows() {
            rows.push(format!("c{i}[{k}]"));
        }
    }
    if spec.elliptic {
        rows.push("j".to_string());
    }

    let mut m = IntMatrix::zeros(rows.len(), columns.len());
    let vcol = |v: &str| curve.finite_vertices.iter().position(|x| x == v).expect("finite vertex") * n;
    for (i, e) in bounded.iter().enumerate() {
        if e.is_loop() {
            continue;
        }
        let (init, term) = orientation.ends(&e.id).ok_or_else(|| ParamError::BadOrientation(e.id.clone()))?;
        for k in 0..n {
            m.set(i * n + k, vcol(init) + k, BigInt::from(-1));
            m.set(i * n + k, vcol(term) + k, BigInt::one());
        }
    }
    let first_edge_col = curve.finite_vertices.len() * n;
    for (c, (i, w)) in edge_cols.iter().enumerate() {
        for (k, x) in w.iter().enumerate() {
            m.set(i * n + k, first_edge_col + c, x.clone());
        }
    }
    let mut row = bounded.len() * n;
    for (i, pr) in projections.iter().enumerate() {
        let (_, w) = crate::paramcurve::attachment_vertex_of(p, i);
        for r in 0..pr.rows() {
            for k in 0..n {
                m.set(row + r, vcol(&w) + k, pr.get(r, k).clone());
            }
        }
        row += pr.rows();
    }
    if spec.elliptic {
        // The edge coordinate is taken against the oriented generator of N_e, so it
        // does not depend on the orientation; every cycle edge gets +1.
        for (eid, _, _) in p.cycle()? {
            let c = edge_cols
                .iter()
                .position(|(i, _)| bounded[*i].id == eid)
                .ok_or_else(|| ComplexError::ZeroSlopeCycleEdge(eid.clone()))?;
            m.set(row, first_edge_col + c, BigInt::one());
        }
    }
    Ok(BuiltComplex { matrix: m, columns, rows })
}

pub fn complex_report(p: &ParamTropicalCurve, spec: &ComplexSpec) -> Result<ComplexReport, ComplexError> {
    let built = build_matrix(p, spec)?;
    let ker = kernel_lattice(&built.matrix);
    Ok(ComplexReport {
        e1_rank: ker.rank(),
        e1_lattice: ker,
        e2: cokernel_group(&built.matrix),
        matrix: built.matrix,
        c_gamma: p.zero_slope_bounded_count(),
    })
}

/// Sizes of the kernel and cokernel over `G`, via the universal coefficient sequence.
pub fn sizes_over(report: &ComplexReport, g: CoeffGroup) -> Result<(GroupSize, GroupSize), ComplexError> {
    let e1_free = FGAbelianGroup::free(report.e1_rank);
    let e1 = base_change(&e1_free, g, BaseChangeMode::Tensor)?
        .extend(&base_change(&report.e2, g, BaseChangeMode::Tor)?);
    let e2 = base_change(&report.e2, g, BaseChangeMode::Tensor)?;
    Ok((e1, e2))
}

pub fn compute(p: &ParamTropicalCurve, spec: &ComplexSpec, g: CoeffGroup) -> Result<ComplexOverGroup, ComplexError> {
    g.check()?;
    let report = complex_report(p, spec)?;
    let (e1, e2) = sizes_over(&report, g)?;
    Ok(ComplexOverGroup { report, group: g, e1, e2 })
}

/// Kernel and cokernel dimensions over a field, by direct elimination.
pub fn field_dims(p: &ParamTropicalCurve, spec: &ComplexSpec, g: CoeffGroup) -> Result<(usize, usize), ComplexError> {
    let ch = g.field_char().ok_or(ComplexError::NotAField(g))?;
    g.check()?;
    let m = build_matrix(p, spec)?.matrix;
    let r = rank_over_field(&m, ch);
    Ok((m.cols() - r, m.rows() - r))
}

pub fn regularity(
    p: &ParamTropicalCurve,
    a: Option<&AffineConstraintSet>,
    g: CoeffGroup,
    elliptic: bool,
) -> Result<RegularityVerdict, ComplexError> {
    let spec = ComplexSpec::new(Variant::Beta).constrained(a);
    let ce = compute(p, &spec, g)?;
    let (ell_reg, ell_obs) = if elliptic {
        let ej = compute(p, &spec.clone().elliptic(true), g)?;
        (Some(ej.e2.is_trivial()), Some(ej.e2))
    } else {
        (None, None)
    };
    let simple = match a {
        Some(a) => Some(p.check_constraint(a)?.simple),
        None => None,
    };
    Ok(RegularityVerdict {
        g_regular: ce.e2.is_trivial(),
        elliptically_regular: ell_reg,
        obstruction: ce.e2,
        elliptic_obstruction: ell_obs,
        simple_constraint: simple,
    })
}

/// `rank(Γ) = c(Γ) + rank E¹(Γ)`.
pub fn deformation_rank(p: &ParamTropicalCurve) -> Result<usize, ParamError> {
    let rep = complex_report(p, &ComplexSpec::new(Variant::B)).map_err(|e| match e {
        ComplexError::Param(pe) => pe,
        other => unreachable!("unconstrained complex cannot fail with {other}"),
    })?;
    Ok(rep.c_gamma + rep.e1_rank)
}

pub(crate) fn obstruction_rank(p: &ParamTropicalCurve) -> Result<usize, ParamError> {
    let rep = complex_report(p, &ComplexSpec::new(Variant::B)).map_err(|e| match e {
        ComplexError::Param(pe) => pe,
        other => unreachable!("unconstrained complex cannot fail with {other}"),
    })?;
    Ok(rep.e2.rank)
}

/// Dimensions in the six-term sequence relating the `b` and `β` complexes over a field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SixTermLedger {
    pub roots_of_unity: usize,
    pub ce1: usize,
    pub e1: usize,
    pub quotients: usize,
    pub ce2: usize,
    pub e2: usize,
}

impl SixTermLedger {
    pub fn alternating_sum(&self) -> i64 {
        self.roots_of_unity as i64 - self.ce1 as i64 + self.e1 as i64 - self.quotients as i64 + self.ce2 as i64
            - self.e2 as i64
    }
}

fn multiplicities(p: &ParamTropicalCurve) -> Vec<BigInt> {
    p.curve
        .bounded_edges()
        .into_iter()
        .filter_map(|e| p.edge_geometry(&e.id).ok())
        .filter(|g| g.slope.is_some())
        .map(|g| g.multiplicity)
        .collect()
}

pub fn six_term_check(
    p: &ParamTropicalCurve,
    a: Option<&AffineConstraintSet>,
    g: CoeffGroup,
) -> Result<SixTermLedger, ComplexError> {
    g.field_char().ok_or(ComplexError::NotAField(g))?;
    let (ce1, ce2) = field_dims(p, &ComplexSpec::new(Variant::Beta).constrained(a), g)?;
    let (e1, e2) = field_dims(p, &ComplexSpec::new(Variant::B).constrained(a), g)?;
    let ls = multiplicities(p);
    Ok(SixTermLedger {
        roots_of_unity: ls.iter().map(|l| roots_of_unity_size(l, g).kdim).sum(),
        ce1,
        e1,
        quotients: ls.iter().map(|l| quotient_size(l, g).kdim).sum(),
        ce2,
        e2,
    })
}

/// Dimensions in the sequence `0 → CE¹(A,j) → CE¹(A) → G → CE²(A,j) → CE²(A) → 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipticLedger {
    pub ce1_j: usize,
    pub ce1: usize,
    pub ce2_j: usize,
    pub ce2: usize,
}

impl EllipticLedger {
    pub fn alternating_sum(&self) -> i64 {
        self.ce1_j as i64 - self.ce1 as i64 + 1 - self.ce2_j as i64 + self.ce2 as i64
    }
}

pub fn elliptic_ledger(
    p: &ParamTropicalCurve,
    a: Option<&AffineConstraintSet>,
    g: CoeffGroup,
) -> Result<EllipticLedger, ComplexError> {
    let spec = ComplexSpec::new(Variant::Beta).constrained(a);
    let (ce1, ce2) = field_dims(p, &spec, g)?;
    let (ce1_j, ce2_j) = field_dims(p, &spec.elliptic(true), g)?;
    Ok(EllipticLedger { ce1_j, ce1, ce2_j, ce2 })
}

/// The `b` complex in quotient form `⊕_v N → ⊕_e N/N_e ⊕ ⊕_i N/L_i`.
pub fn quotient_form_matrix(p: &ParamTropicalCurve, a: Option<&AffineConstraintSet>) -> Result<IntMatrix, ComplexError> {
    ensure_preconditions(p, &ComplexSpec::new(Variant::B).constrained(a))?;
    let n = p.lattice_rank;
    let curve = &p.curve;
    let orientation = Orientation::default_for(curve);
    let mut blocks: Vec<(Vec<(String, i64)>, IntMatrix)> = Vec::new();
    for e in curve.bounded_edges() {
        let sv = p.slope_vector(e, &orientation)?;
        let proj = match primitive_part(&sv) {
            Some((prim, _)) => Sublattice::from_vectors(n, &[prim]).quotient_projection(),
            None => IntMatrix::identity(n),
        };
        let coeffs = if e.is_loop() {
            vec![]
        } else {
            let (i, t) = orientation.ends(&e.id).unwrap();
            vec![(i.to_string(), -1), (t.to_string(), 1)]
        };
        blocks.push((coeffs, proj));
    }
    if let Some(a) = a {
        for (i, c) in a.items.iter().enumerate() {
            let (_, w) = crate::paramcurve::attachment_vertex_of(p, i);
            blocks.push((vec![(w, 1)], c.lattice.quotient_projection()));
        }
    }
    let rows: usize = blocks.iter().map(|(_, pr)| pr.rows()).sum();
    let mut m = IntMatrix::zeros(rows, curve.finite_vertices.len() * n);
    let mut r0 = 0;
    for (coeffs, pr) in &blocks {
        for (v, s) in coeffs {
            let c0 = curve.finite_vertices.iter().position(|x| x == v).unwrap() * n;
            for r in 0..pr.rows() {
                for k in 0..n {
                    let x = pr.get(r, k) * BigInt::from(*s);
                    *m.get_mut(r0 + r, c0 + k) += x;
                }
            }
        }
        r0 += pr.rows();
    }
    Ok(m)
}

/// Named comparison between two computed quantities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportCheck {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportReport {
    pub checks: Vec<TransportCheck>,
}

impl TransportReport {
    fn push(&mut self, name: &str, lhs: impl ToString, rhs: impl ToString) {
        let (lhs, rhs) = (lhs.to_string(), rhs.to_string());
        self.checks.push(TransportCheck { name: name.to_string(), holds: lhs == rhs, lhs, rhs });
    }

    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Structural check that `sub` arises from `p` by subdividing nonzero-slope edges.
/// Returns the number of new finite vertices.
fn subdivision_vertex_count(p: &ParamTropicalCurve, sub: &ParamTropicalCurve) -> Result<usize, ComplexError> {
    let fail = |m: &str| ComplexError::NotASubdivision(m.to_string());
    if p.lattice_rank != sub.lattice_rank || p.curve.infinite_vertices != sub.curve.infinite_vertices {
        return Err(fail("infinite vertices differ"));
    }
    for v in p.curve.vertices() {
        if sub.h.get(v) != Some(&p.h[v]) {
            return Err(fail(&format!("vertex {v} is missing or moved")));
        }
    }
    let new: Vec<&String> = sub.curve.finite_vertices.iter().filter(|v| !p.h.contains_key(*v)).collect();
    let mut smoothed = sub.curve.clone();
    for v in &new {
        let inc: Vec<_> = smoothed.incident_edges(v).into_iter().cloned().collect();
        if inc.len() != 2 || inc.iter().any(|e| e.is_loop()) || inc.iter().any(|e| sub.has_zero_slope(e)) {
            return Err(fail(&format!("vertex {v} is not an interior point of a nonzero-slope edge")));
        }
        let (a, b) = (inc[0].other_end(v).to_string(), inc[1].other_end(v).to_string());
        let length = match (&inc[0].length, &inc[1].length) {
            (crate::tropgraph::Length::Finite(x), crate::tropgraph::Length::Finite(y)) => {
                crate::tropgraph::Length::Finite(x + y)
            }
            _ => crate::tropgraph::Length::Infinite,
        };
        smoothed.edges.retain(|e| e.id != inc[0].id && e.id != inc[1].id);
        smoothed.edges.push(crate::tropgraph::Edge::new(inc[0].id.clone(), a, b, length));
        smoothed.finite_vertices.retain(|x| x != *v);
    }
    let key = |c: &crate::tropgraph::TropicalCurve| {
        let mut ks: Vec<String> = c
            .edges
            .iter()
            .map(|e| {
                let mut ends = e.ends.clone();
                ends.sort();
                format!("{}|{}|{:?}", ends[0], ends[1], e.length)
            })
            .collect();
        ks.sort();
        ks
    };
    if key(&smoothed) != key(&p.curve) {
        return Err(fail("smoothing new vertices does not recover the original curve"));
    }
    Ok(new.len())
}

pub fn subdivision_transport(
    p: &ParamTropicalCurve,
    sub: &ParamTropicalCurve,
    a: Option<&AffineConstraintSet>,
) -> Result<TransportReport, ComplexError> {
    let added = subdivision_vertex_count(p, sub)?;
    let mut rep = TransportReport::default();
    let mut specs = vec![
        ("E", ComplexSpec::new(Variant::B).constrained(a)),
        ("CE", ComplexSpec::new(Variant::Beta).constrained(a)),
    ];
    if p.genus() == 1 {
        specs.push(("CE_j", ComplexSpec::new(Variant::Beta).constrained(a).elliptic(true)));
    }
    for (name, spec) in specs {
        if name == "CE_j" && p.cycle().ok().is_none_or(|c| c.iter().any(|(e, _, _)| p.has_zero_slope(p.curve.edge(e).unwrap()))) {
            continue;
        }
        let r = complex_report(p, &spec)?;
        let s = complex_report(sub, &spec)?;
        rep.push(&format!("{name}2 equal"), &s.e2, &r.e2);
        rep.push(&format!("{name}1 rank grows by new vertices"), s.e1_rank, r.e1_rank + added);
    }
    Ok(rep)
}

pub fn contraction_transport(
    p: &ParamTropicalCurve,
    a: Option<&AffineConstraintSet>,
) -> Result<TransportReport, ComplexError> {
    p.require_balanced()?;
    let (bar, _) = p.contract_zero_slope()?;
    let n = p.lattice_rank;
    let (g, gbar) = (p.genus(), bar.genus());
    let mut rep = TransportReport::default();
    let spec = ComplexSpec::new(Variant::B).constrained(a);
    let r = complex_report(p, &spec)?;
    let s = complex_report(&bar, &spec)?;
    rep.push("E1 rank equal", r.e1_rank, s.e1_rank);
    rep.push("E2 rank shift", r.e2.rank, s.e2.rank + n * (g - gbar) as usize);
    rep.push("E2 torsion equal", format!("{:?}", r.e2.torsion), format!("{:?}", s.e2.torsion));
    if g == 1 && gbar == 1 {
        let spec = ComplexSpec::new(Variant::Beta).constrained(a).elliptic(true);
        if let (Ok(r), Ok(s)) = (complex_report(p, &spec), complex_report(&bar, &spec)) {
            rep.push("CE1_j rank equal", r.e1_rank, s.e1_rank);
            rep.push("CE2_j equal", &r.e2, &s.e2);
        }
    }
    Ok(rep)
}

/// Whether `E¹(Γ, A)` equals the kernel of `E¹(Γ) → ⊕ N/L_i`, as sublattices of the domain.
pub fn constrained_kernel_matches(p: &ParamTropicalCurve, a: &AffineConstraintSet) -> Result<bool, ComplexError> {
    let full = build_matrix(p, &ComplexSpec::new(Variant::B).constrained(Some(a)))?.matrix;
    let plain = build_matrix(p, &ComplexSpec::new(Variant::B))?.matrix;
    let constrained = kernel_lattice(&full);
    let e1 = kernel_lattice(&plain);
    // Restrict the constraint rows to E¹(Γ).
    let extra = IntMatrix::from_rows(full.cols(), &full.to_rows()[plain.rows()..]);
    let images: Vec<Vec<BigInt>> = (0..e1.rank()).map(|i| extra.mul_vec(e1.basis().row(i))).collect();
    let restricted = IntMatrix::from_rows(extra.rows(), &images).transpose();
    let coeffs = kernel_lattice(&restricted);
    let gens: Vec<Vec<BigInt>> = (0..coeffs.rank())
        .map(|i| {
            let c = coeffs.basis().row(i);
            (0..full.cols()).map(|j| (0..e1.rank()).map(|t| &c[t] * e1.basis().get(t, j)).sum()).collect()
        })
        .collect();
    let via_e1 = Sublattice::from_vectors(full.cols(), &gens);
    Ok(via_e1 == constrained && !gens.iter().any(|g| g.iter().all(Zero::is_zero)))
}
