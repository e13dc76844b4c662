//! Fixed JSON schema for generator/model serialization:
//! {kind, name, dim, jumps: [{re, im, weight}], state: {re, im}, tags}
//! with row-major entry arrays at 17 significant digits.

use qpoincare_core::matcore::CMat;
use qpoincare_core::models::Model;
use qpoincare_core::qms::SymmetryTag;

use crate::runner::fmt_f64;

/// Row-major (re, im) nested arrays of a matrix.
fn entry_arrays(m: &CMat) -> (String, String) {
    let d = m.dim();
    let mut re = String::from("[");
    let mut im = String::from("[");
    for i in 0..d {
        if i > 0 {
            re.push(',');
            im.push(',');
        }
        re.push('[');
        im.push('[');
        for j in 0..d {
            if j > 0 {
                re.push(',');
                im.push(',');
            }
            re.push_str(&fmt_f64(m[(i, j)].re));
            im.push_str(&fmt_f64(m[(i, j)].im));
        }
        re.push(']');
        im.push(']');
    }
    re.push(']');
    im.push(']');
    (re, im)
}

fn matrix_json(m: &CMat) -> String {
    let (re, im) = entry_arrays(m);
    format!("{{\"re\":{re},\"im\":{im}}}")
}

fn kind_name(model: &Model) -> &'static str {
    use qpoincare_core::models::ModelKind;
    match model.kind {
        ModelKind::BirthDeath { .. } => "birth_death",
        ModelKind::Rademacher { .. } => "rademacher",
        ModelKind::Depolarizing { .. } => "depolarizing",
        ModelKind::RandomGnsDb { .. } => "random_gns_db",
        ModelKind::KmsOnly { .. } => "kms_only",
        ModelKind::Custom { .. } => "custom",
    }
}

fn tags(model: &Model) -> Vec<&'static str> {
    match model.generator.tag() {
        SymmetryTag::TauSymmetric => vec!["tau_symmetric"],
        SymmetryTag::GnsDb(_) => vec!["gns_db"],
        SymmetryTag::KmsDb(_) => vec!["kms_db"],
        SymmetryTag::None => vec![],
    }
}

/// Serialize the realized model: generator jumps, reference state, tags.
pub fn model_to_json(model: &Model) -> String {
    let mut jumps = String::from("[");
    for (k, j) in model.generator.jumps().iter().enumerate() {
        if k > 0 {
            jumps.push(',');
        }
        let (re, im) = entry_arrays(&j.operator);
        jumps.push_str(&format!(
            "{{\"re\":{re},\"im\":{im},\"weight\":{}}}",
            fmt_f64(j.weight)
        ));
    }
    jumps.push(']');
    let tag_list = tags(model)
        .iter()
        .map(|t| format!("\"{t}\""))
        .collect::<Vec<_>>()
        .join(",");
    format!(
        "{{\"kind\":\"{}\",\"name\":\"{}\",\"dim\":{},\"jumps\":{},\"state\":{},\"tags\":[{}]}}",
        kind_name(model),
        model.name,
        model.dim(),
        jumps,
        matrix_json(model.state.matrix()),
        tag_list
    )
}
