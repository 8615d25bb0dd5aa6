//! Physical feature identification and compressibility inference.

use indexmap::IndexMap;

use crate::foamdict::{ConfigNode, ConfigTree};

use super::model::{AuxTags, KbError, PhysicsFeatures};

/// Solvers whose flow regime is known a priori. Corpus path evidence, when
/// available, takes precedence over this table.
const COMPRESSIBILITY_TABLE: &[(&str, bool)] = &[
    ("simpleFoam", false),
    ("pimpleFoam", false),
    ("pisoFoam", false),
    ("icoFoam", false),
    ("rhoCentralFoam", true),
    ("sonicFoam", true),
    ("rhoSimpleFoam", true),
    ("rhoPimpleFoam", true),
];

/// Infer the compressibility flag for a solver.
///
/// Corpus case paths starting with `compressible/` or `incompressible/` are
/// direct evidence and win over the static table; conflicting evidence is an
/// error, and a solver with neither evidence nor table entry is unknown.
pub fn infer_compressibility(
    solver: &str,
    corpus_paths: Option<&IndexMap<String, Vec<String>>>,
) -> Result<bool, KbError> {
    if let Some(paths) = corpus_paths.and_then(|m| m.get(solver)) {
        let comp = paths.iter().any(|p| p.starts_with("compressible/"));
        let incomp = paths.iter().any(|p| p.starts_with("incompressible/"));
        match (comp, incomp) {
            (true, true) => return Err(KbError::ConflictingEvidence(solver.to_string())),
            (true, false) => return Ok(true),
            (false, true) => return Ok(false),
            (false, false) => {}
        }
    }
    COMPRESSIBILITY_TABLE
        .iter()
        .find(|(s, _)| *s == solver)
        .map(|(_, c)| *c)
        .ok_or_else(|| KbError::UnknownSolver(solver.to_string()))
}

/// Extract the physical feature tuple from a case's normalized files.
pub fn identify_features(
    files: &IndexMap<String, ConfigTree>,
    compressible: bool,
) -> Result<PhysicsFeatures, KbError> {
    let control = files
        .get("system/controlDict")
        .ok_or(KbError::MissingControlDict)?;
    let solver = control
        .word_at("application")
        .ok_or(KbError::MissingApplication)?
        .to_string();

    let turb = files.get("constant/turbulenceProperties");
    let turbulence_type = turb
        .and_then(|t| t.word_at("simulationType"))
        .unwrap_or("laminar")
        .to_string();
    let turbulence_model = match turbulence_type.as_str() {
        "RAS" => turb.and_then(|t| t.word_at("RAS/RASModel")),
        "LES" => turb.and_then(|t| t.word_at("LES/LESModel")),
        _ => None,
    }
    .unwrap_or("laminar")
    .to_string();

    let mut boundary_types: Vec<String> = Vec::new();
    for (path, tree) in files {
        if !is_field_file(path) {
            continue;
        }
        if let Some(ConfigNode::Dict(patches)) = tree.lookup("boundaryField") {
            for patch in patches.values() {
                if let ConfigNode::Dict(entries) = patch {
                    if let Some(t) = entries.get("type").and_then(node_word) {
                        if !boundary_types.contains(&t.to_string()) {
                            boundary_types.push(t.to_string());
                        }
                    }
                }
            }
        }
    }
    boundary_types.sort();

    let aux_tags = AuxTags {
        thermophysical_model: files
            .get("constant/thermophysicalProperties")
            .and_then(|t| t.word_at("thermoType/type"))
            .map(str::to_string),
        single_phase: files
            .get("constant/transportProperties")
            .and_then(|t| t.root.get("phases"))
            .is_none(),
        particle_flow: files.keys().any(|p| p.contains("CloudProperties")),
        reacting_flow: files.contains_key("constant/chemistryProperties")
            || files.contains_key("constant/combustionProperties"),
        ddt_scheme: files
            .get("system/fvSchemes")
            .and_then(|t| t.word_at("ddtSchemes/default"))
            .map(str::to_string),
    };

    Ok(PhysicsFeatures {
        solver,
        turbulence_model,
        compressible,
        turbulence_type,
        boundary_types,
        aux_tags,
    })
}

pub(crate) fn is_field_file(path: &str) -> bool {
    path.starts_with("0/")
}

fn node_word(node: &ConfigNode) -> Option<&str> {
    match node {
        ConfigNode::Scalar(crate::foamdict::Scalar::Word(w)) => Some(w),
        ConfigNode::Scalar(crate::foamdict::Scalar::Str(s)) => Some(s),
        ConfigNode::Raw(r) => Some(r),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foamdict::parse_dictionary;

    fn files(entries: &[(&str, &str)]) -> IndexMap<String, ConfigTree> {
        entries
            .iter()
            .map(|(p, text)| (p.to_string(), parse_dictionary(text).unwrap().0))
            .collect()
    }

    #[test]
    fn table_compressibility() {
        assert!(!infer_compressibility("simpleFoam", None).unwrap());
        assert!(infer_compressibility("rhoCentralFoam", None).unwrap());
        assert!(infer_compressibility("sonicFoam", None).unwrap());
        assert!(matches!(
            infer_compressibility("mysteryFoam", None),
            Err(KbError::UnknownSolver(_))
        ));
    }

    #[test]
    fn path_evidence_wins_over_table() {
        let mut paths = IndexMap::new();
        paths.insert(
            "simpleFoam".to_string(),
            vec!["compressible/simpleFoam/duct".to_string()],
        );
        assert!(infer_compressibility("simpleFoam", Some(&paths)).unwrap());
        paths.insert(
            "simpleFoam".to_string(),
            vec![
                "compressible/simpleFoam/duct".to_string(),
                "incompressible/simpleFoam/hill".to_string(),
            ],
        );
        assert!(matches!(
            infer_compressibility("simpleFoam", Some(&paths)),
            Err(KbError::ConflictingEvidence(_))
        ));
    }

    #[test]
    fn laminar_default_without_turbulence_properties() {
        let fs = files(&[("system/controlDict", "application icoFoam;")]);
        let features = identify_features(&fs, false).unwrap();
        assert_eq!(features.turbulence_model, "laminar");
        assert_eq!(features.turbulence_type, "laminar");
    }

    #[test]
    fn ras_model_and_boundary_types() {
        let fs = files(&[
            ("system/controlDict", "application simpleFoam;"),
            (
                "constant/turbulenceProperties",
                "simulationType RAS; RAS { RASModel SpalartAllmaras; turbulence on; }",
            ),
            (
                "0/U",
                "boundaryField { inlet { type fixedValue; value uniform (1 0 0); } walls { type noSlip; } }",
            ),
            (
                "0/p",
                "boundaryField { inlet { type zeroGradient; } walls { type zeroGradient; } }",
            ),
        ]);
        let features = identify_features(&fs, false).unwrap();
        assert_eq!(features.solver, "simpleFoam");
        assert_eq!(features.turbulence_model, "SpalartAllmaras");
        assert_eq!(features.turbulence_type, "RAS");
        assert_eq!(
            features.boundary_types,
            vec!["fixedValue", "noSlip", "zeroGradient"]
        );
    }

    #[test]
    fn missing_application_is_an_error() {
        let fs = files(&[("system/controlDict", "startTime 0;")]);
        assert!(matches!(
            identify_features(&fs, false),
            Err(KbError::MissingApplication)
        ));
    }
}
