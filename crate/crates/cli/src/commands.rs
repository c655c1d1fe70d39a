//! One handler per subcommand. Handlers return the JSON result payload.

use serde::Serialize;
use serde_json::{json, Value};
use tropicorr::complexes::{complex_report, regularity, sizes_over, ComplexSpec, Variant};
use tropicorr::counting::{correspondence_count, elliptic_count, moduli_dimension, reduction_torsor};
use tropicorr::curvefile::{CurveFile, CurveFileError, LoadedCurve};
use tropicorr::exactla::CoeffGroup;
use tropicorr::fanmodel::{all_reduction_exponents, fan_model, gamma_tr, ramification, ToricModelConfig};
use tropicorr::paramcurve::{AffineConstraintSet, ParamTropicalCurve};
use tropicorr::stacky::{compatible, is_dm, stacky_data};

use crate::{Cli, Command, Failure, GroupArg, Outcome};

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("library types serialize")
}

macro_rules! domain {
    ($e:expr) => {
        $e.map_err(|e| Failure::domain(e.code(), &e))?
    };
}

fn load(file: &CurveFile) -> Result<LoadedCurve, Failure> {
    file.load().map_err(|e| match e {
        CurveFileError::Parse(_) | CurveFileError::Schema(_) => Failure::Parse(e.to_string()),
        other => Failure::domain(other.code(), &other),
    })
}

fn constraints(l: &LoadedCurve, needed: bool) -> Result<Option<&AffineConstraintSet>, Failure> {
    match (&l.constraints, needed) {
        (Some(a), true) => Ok(Some(a)),
        (None, true) => Err(Failure::domain("MissingConstraints", "the curve file has no constraints")),
        (_, false) => Ok(None),
    }
}

fn coeff_group(g: GroupArg, char_p: u64) -> CoeffGroup {
    match g {
        GroupArg::Z => CoeffGroup::Integers,
        GroupArg::Q => CoeffGroup::Rationals,
        GroupArg::Fp => CoeffGroup::FieldOfChar(char_p),
        GroupArg::Kstar => CoeffGroup::UnitsAlgClosed(char_p),
    }
}

fn curve_outcome(p: &ParamTropicalCurve, l: &LoadedCurve) -> Outcome {
    let file = CurveFile::from_curve(p, l.constraints.as_ref(), l.char);
    Outcome { result: to_value(&file), warnings: Vec::new(), curve_file: Some(file.to_json()) }
}

fn plain(result: Value) -> Outcome {
    Outcome { result, warnings: Vec::new(), curve_file: None }
}

pub fn run(cli: &Cli, text: &str) -> Result<Outcome, Failure> {
    let file = CurveFile::parse(text).map_err(|e| Failure::Parse(e.to_string()))?;
    if cli.command == Command::Validate {
        return validate(&file);
    }
    let l = load(&file)?;
    let char_p = cli.char_p.or(l.char).unwrap_or(0);
    let p = &l.curve;
    match cli.command {
        Command::Validate => unreachable!(),
        Command::Info => info(&l),
        Command::Stabilize => Ok(curve_outcome(&domain!(p.stabilize()), &l)),
        Command::Tr => Ok(curve_outcome(&domain!(gamma_tr(p)), &l)),
        Command::Fan => Ok(plain(to_value(&domain!(fan_model(p))))),
        Command::Complex => {
            let a = constraints(&l, cli.constrained)?;
            let g = coeff_group(cli.group.unwrap_or(GroupArg::Z), char_p);
            let mut out = serde_json::Map::new();
            for (name, variant) in [("E", Variant::B), ("CE", Variant::Beta)] {
                let spec = ComplexSpec::new(variant).constrained(a).elliptic(cli.elliptic);
                let rep = domain!(complex_report(p, &spec));
                let (e1, e2) = domain!(sizes_over(&rep, g));
                out.insert(name.into(), json!({ "integral": to_value(&rep), "e1_over_group": e1, "e2_over_group": e2 }));
            }
            out.insert("group".into(), to_value(&g));
            Ok(plain(Value::Object(out)))
        }
        Command::Regular => {
            let a = constraints(&l, cli.constrained)?;
            let g = coeff_group(cli.group.unwrap_or(GroupArg::Fp), char_p);
            Ok(plain(to_value(&domain!(regularity(p, a, g, cli.elliptic)))))
        }
        Command::Count => {
            let a = constraints(&l, true)?.expect("required");
            Ok(plain(to_value(&domain!(correspondence_count(p, a, char_p)))))
        }
        Command::CountElliptic => {
            let a = constraints(&l, true)?.expect("required");
            Ok(plain(to_value(&domain!(elliptic_count(p, a, char_p)))))
        }
        Command::Stacky => {
            let refined = domain!(gamma_tr(p));
            let minimal = ramification(&refined, &domain!(ToricModelConfig::new(1))).minimal_a;
            let config = match cli.a {
                Some(a) => domain!(ToricModelConfig::new(a)),
                None => domain!(ToricModelConfig::new(minimal)),
            };
            let sigma = domain!(stacky_data(&refined, &config));
            let dm = domain!(is_dm(p, char_p));
            Ok(plain(json!({ "sigma": sigma, "compatible": compatible(&sigma), "char": char_p, "dm": dm })))
        }
        Command::ReductionData => {
            let exps = domain!(all_reduction_exponents(p));
            let mut warnings = Vec::new();
            let torsor = match reduction_torsor(p, constraints(&l, cli.constrained)?, char_p) {
                Ok(g) => to_value(&g),
                Err(e) => {
                    warnings.push(format!("reduction torsor unavailable: {} ({e})", e.code()));
                    Value::Null
                }
            };
            Ok(Outcome { result: json!({ "exponents": exps, "torsor": torsor }), warnings, curve_file: None })
        }
    }
}

fn validate(file: &CurveFile) -> Result<Outcome, Failure> {
    let rep = file.raw_curve().validate();
    if !rep.violations.is_empty() {
        return Err(Failure::Domain {
            code: "InvalidCurve".into(),
            message: format!("{} violation(s)", rep.violations.len()),
            result: Some(to_value(&rep)),
        });
    }
    match file.load() {
        Ok(l) => {
            let mut warnings = Vec::new();
            let bal = l.curve.check_balancing();
            if !bal.defects.is_empty() {
                warnings.push(format!("curve is not balanced at {} vertex(es)", bal.defects.len()));
            }
            Ok(Outcome { result: to_value(&rep), warnings, curve_file: None })
        }
        Err(CurveFileError::Param(e)) => {
            Err(Failure::Domain { code: e.code(), message: e.to_string(), result: Some(to_value(&rep)) })
        }
        Err(e) => Err(Failure::Parse(e.to_string())),
    }
}

fn info(l: &LoadedCurve) -> Result<Outcome, Failure> {
    let p = &l.curve;
    let bal = p.check_balancing();
    let mut warnings = Vec::new();
    let mut result = json!({
        "genus": p.genus(),
        "degree": p.degree(),
        "c_gamma": p.zero_slope_bounded_count(),
        "overvalence": p.overvalence(),
        "balanced": bal.defects.is_empty(),
        "balancing": bal,
        "stable": p.curve.is_stable(),
        "infinite_vertex_order": p.curve.infinite_vertices,
    });
    if bal.defects.is_empty() {
        result["rank"] = json!(domain!(p.rank()));
        result["moduli_dimension"] = json!(domain!(moduli_dimension(p)));
        if p.genus() == 1 {
            match p.tropical_j() {
                Ok(j) => result["j"] = json!(j.to_string()),
                Err(e) => warnings.push(format!("tropical j unavailable: {e}")),
            }
        }
    } else {
        warnings.push("rank and moduli dimension need a balanced curve".into());
    }
    if let Some(a) = &l.constraints {
        result["constraint"] = to_value(&domain!(p.check_constraint(a)));
    }
    Ok(Outcome { result, warnings, curve_file: None })
}
