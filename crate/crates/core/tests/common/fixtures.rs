use tropicorr::curvefile::{CurveFile, LoadedCurve};

pub fn fixture(name: &str) -> LoadedCurve {
    let path = format!("{}/examples/{name}.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    CurveFile::parse(&text).unwrap().load().unwrap()
}
