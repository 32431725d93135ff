//! Shared helpers for the integration tests.
#![allow(dead_code)]

use eigs_core::*;

pub fn load(name: &str) -> IgsSpec {
    let path = format!("{}/../../fixtures/{}", env!("CARGO_MANIFEST_DIR"), name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {path}: {e}"));
    let spec = parse_spec(&text).expect("fixture parses");
    validate(&spec).expect("fixture is a valid system");
    spec
}

pub struct Analysis {
    pub spec: IgsSpec,
    pub family: ChoiceFamily,
    pub mass: IntMatrix,
    pub mass_form: FrobeniusForm,
    pub fractal: FractalAnalysis,
    pub degree_m: IntMatrix,
    pub degree: Result<DegreeAnalysis, DegreeError>,
}

pub fn analyze(name: &str) -> Analysis {
    let spec = load(name);
    let family = choice_family(&spec, 1 << 20).expect("path budget generous");
    let mass = mass_matrix(&spec);
    let mass_form = condensation(&mass);
    let fractal =
        fractal_analysis(&spec, &family, &mass, &mass_form, 1 << 20).expect("combo budget generous");
    let degree_m = degree_matrix(&spec);
    let degree_form = condensation(&degree_m);
    let degree = degree_analysis(&spec, &mass, &mass_form, &degree_m, &degree_form);
    Analysis {
        spec,
        family,
        mass,
        mass_form,
        fractal,
        degree_m,
        degree,
    }
}

pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: got {actual}, expected {expected} within {tol}"
    );
}

pub fn rows_of(m: &IntMatrix) -> Vec<Vec<u64>> {
    (0..m.side()).map(|i| m.row(i).to_vec()).collect()
}
