//! JSON curve file format (`tropicorr/1`).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exactla::{parse_rational, Rat, Sublattice};
use crate::paramcurve::{AffineConstraint, AffineConstraintSet, ParamError, ParamTropicalCurve};
use crate::tropgraph::{Edge, Length, TropicalCurve};

pub const SCHEMA: &str = "tropicorr/1";

/// Rational number written as `"p/q"`, an integer string, or a JSON integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatStr(pub Rat);

impl Serialize for RatStr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

struct RatVisitor;

impl<'de> Visitor<'de> for RatVisitor {
    type Value = RatStr;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a rational string \"p/q\" or an integer")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<RatStr, E> {
        Ok(RatStr(BigRational::from_integer(v.into())))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<RatStr, E> {
        Ok(RatStr(BigRational::from_integer(v.into())))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<RatStr, E> {
        parse_rational(v).map(RatStr).ok_or_else(|| E::custom(format!("invalid rational {v:?}")))
    }
}

impl<'de> Deserialize<'de> for RatStr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(RatVisitor)
    }
}

/// Edge length: a rational or the string `"inf"`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LengthStr(pub Length);

impl Serialize for LengthStr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match &self.0 {
            Length::Finite(x) => s.serialize_str(&x.to_string()),
            Length::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for LengthStr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = LengthStr;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a rational length or \"inf\"")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<LengthStr, E> {
                RatVisitor.visit_i64(v).map(|r| LengthStr(Length::Finite(r.0)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<LengthStr, E> {
                RatVisitor.visit_u64(v).map(|r| LengthStr(Length::Finite(r.0)))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<LengthStr, E> {
                if v.trim() == "inf" {
                    return Ok(LengthStr(Length::Infinite));
                }
                RatVisitor.visit_str(v).map(|r| LengthStr(Length::Finite(r.0)))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteVertexEntry {
    pub id: String,
    pub h: Vec<RatStr>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfiniteVertexEntry {
    pub id: String,
    pub h: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub id: String,
    pub ends: [String; 2],
    pub length: LengthStr,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintEntry {
    #[serde(rename = "L_basis")]
    pub l_basis: Vec<Vec<i64>>,
    pub point: Vec<RatStr>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub lattice_rank: usize,
    pub finite_vertices: Vec<FiniteVertexEntry>,
    pub infinite_vertices: Vec<InfiniteVertexEntry>,
    pub edges: Vec<EdgeEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<ConstraintEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char: Option<u64>,
}

#[derive(Debug, Error)]
pub enum CurveFileError {
    #[error("malformed curve file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema {0:?}")]
    Schema(String),
    #[error("vertex {0} has a position of the wrong dimension")]
    Dimension(String),
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// Loaded curve with its optional constraint and characteristic.
#[derive(Clone, Debug)]
pub struct LoadedCurve {
    pub curve: ParamTropicalCurve,
    pub constraints: Option<AffineConstraintSet>,
    pub char: Option<u64>,
}

impl CurveFile {
    pub fn parse(text: &str) -> Result<CurveFile, CurveFileError> {
        let f: CurveFile = serde_json::from_str(text)?;
        if let Some(s) = &f.schema {
            if s != SCHEMA {
                return Err(CurveFileError::Schema(s.clone()));
            }
        }
        Ok(f)
    }

    /// The underlying graph, without any validation.
    pub fn raw_curve(&self) -> TropicalCurve {
        TropicalCurve::new(
            self.finite_vertices.iter().map(|v| v.id.clone()).collect(),
            self.infinite_vertices.iter().map(|v| v.id.clone()).collect(),
            self.edges
                .iter()
                .map(|e| Edge::new(e.id.clone(), e.ends[0].clone(), e.ends[1].clone(), e.length.0.clone()))
                .collect(),
        )
    }

    pub fn load(&self) -> Result<LoadedCurve, CurveFileError> {
        let n = self.lattice_rank;
        let mut h: BTreeMap<String, Vec<Rat>> = BTreeMap::new();
        for v in &self.finite_vertices {
            if v.h.len() != n {
                return Err(CurveFileError::Dimension(v.id.clone()));
            }
            h.insert(v.id.clone(), v.h.iter().map(|x| x.0.clone()).collect());
        }
        for v in &self.infinite_vertices {
            if v.h.len() != n {
                return Err(CurveFileError::Dimension(v.id.clone()));
            }
            h.insert(v.id.clone(), v.h.iter().map(|&x| BigRational::from_integer(x.into())).collect());
        }
        let curve = ParamTropicalCurve::new(self.raw_curve(), n, h)?;
        let constraints = if self.constraints.is_empty() {
            None
        } else {
            let mut items = Vec::new();
            for c in &self.constraints {
                let rows: Vec<Vec<BigInt>> =
                    c.l_basis.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(ParamError::InvalidConstraint("basis vector of the wrong dimension".into()).into());
                }
                let lattice = Sublattice::from_vectors(n, &rows);
                items.push(AffineConstraint::new(lattice, c.point.iter().map(|x| x.0.clone()).collect())?);
            }
            Some(AffineConstraintSet::new(items))
        };
        Ok(LoadedCurve { curve, constraints, char: self.char })
    }

    pub fn from_curve(p: &ParamTropicalCurve, constraints: Option<&AffineConstraintSet>, char: Option<u64>) -> Self {
        let to_i64 = |x: &Rat| -> i64 {
            i64::try_from(x.to_integer()).expect("infinite-vertex coordinates fit in i64")
        };
        CurveFile {
            schema: Some(SCHEMA.to_string()),
            lattice_rank: p.lattice_rank,
            finite_vertices: p
                .curve
                .finite_vertices
                .iter()
                .map(|v| FiniteVertexEntry { id: v.clone(), h: p.h[v].iter().cloned().map(RatStr).collect() })
                .collect(),
            infinite_vertices: p
                .curve
                .infinite_vertices
                .iter()
                .map(|v| InfiniteVertexEntry { id: v.clone(), h: p.h[v].iter().map(to_i64).collect() })
                .collect(),
            edges: p
                .curve
                .edges
                .iter()
                .map(|e| EdgeEntry { id: e.id.clone(), ends: e.ends.clone(), length: LengthStr(e.length.clone()) })
                .collect(),
            constraints: constraints
                .map(|a| {
                    a.items
                        .iter()
                        .map(|c| ConstraintEntry {
                            l_basis: c
                                .lattice
                                .basis()
                                .to_rows()
                                .into_iter()
                                .map(|r| r.iter().map(|x| i64::try_from(x).expect("basis fits in i64")).collect())
                                .collect(),
                            point: c.point.iter().cloned().map(RatStr).collect(),
                        })
                        .collect()
                })
                .unwrap_or_default(),
            char,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve files serialize")
    }
}

impl CurveFileError {
    /// Stable machine-readable code.
    pub fn code(&self) -> String {
        match self {
            CurveFileError::Parse(_) => "ParseError".into(),
            CurveFileError::Schema(_) => "SchemaError".into(),
            CurveFileError::Dimension(_) => "DimensionError".into(),
            CurveFileError::Param(p) => p.code(),
        }
    }
}
