//! Knowledge-base construction over the bundled mini-corpus.

use std::path::Path;

use phynikce_core::kb::build::{build_kb, load_guidance_dir};
use phynikce_core::kb::model::KnowledgeBase;

fn fixtures() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures"))
}

fn build() -> KnowledgeBase {
    let guidance = load_guidance_dir(&fixtures().join("guidance")).unwrap();
    let (kb, report) = build_kb(&fixtures().join("corpus"), &guidance).unwrap();
    assert!(report.skipped_cases.is_empty(), "{:?}", report.skipped_cases);
    kb
}

#[test]
fn corpus_builds_all_twelve_cases() {
    let kb = build();
    assert_eq!(kb.cases.len(), 12);
    let ids: Vec<&str> = kb.cases.iter().map(|c| c.case_id.as_str()).collect();
    assert!(ids.contains(&"periodicHill"));
    assert!(ids.contains(&"cavity"));
    // Sorted by case path, compressible solvers first.
    assert!(kb.cases[0].case_path.starts_with("compressible/"));
}

#[test]
fn grid_and_decomposition_dictionaries_are_excluded() {
    let guidance = load_guidance_dir(&fixtures().join("guidance")).unwrap();
    let (kb, report) = build_kb(&fixtures().join("corpus"), &guidance).unwrap();
    assert_eq!(report.excluded_files.len(), 4);
    for case in &kb.cases {
        assert!(!case.files.contains_key("system/blockMeshDict"));
        assert!(!case.files.contains_key("system/decomposeParDict"));
    }
}

#[test]
fn orig_time_directory_maps_to_zero() {
    let kb = build();
    let bike = kb.cases.iter().find(|c| c.case_id == "motorBike").unwrap();
    assert!(bike.files.contains_key("0/U"));
    assert!(bike.files.keys().all(|k| !k.starts_with("0.orig/")));
}

#[test]
fn nonuniform_payloads_are_stripped() {
    let kb = build();
    let pitz = kb.cases.iter().find(|c| c.case_id == "pitzDaily").unwrap();
    let eps = &pitz.files["0/epsilon"];
    match eps.lookup("internalField").unwrap() {
        phynikce_core::foamdict::ConfigNode::Raw(text) => {
            assert_eq!(text, "nonuniform <omitted>")
        }
        other => panic!("unexpected internalField node: {other:?}"),
    }
}

#[test]
fn compressibility_uses_path_evidence_and_table() {
    let kb = build();
    for (solver, expected) in [
        ("icoFoam", false),
        ("simpleFoam", false),
        ("pimpleFoam", false),
        ("pisoFoam", false),
        ("rhoCentralFoam", true),
        ("rhoPimpleFoam", true),
        ("rhoSimpleFoam", true),
        ("sonicFoam", true),
    ] {
        assert_eq!(kb.solver_compressibility[solver], expected, "{solver}");
    }
}

#[test]
fn laminar_cases_default_turbulence_labels() {
    let kb = build();
    let cavity = kb.cases.iter().find(|c| c.case_id == "cavity").unwrap();
    assert_eq!(cavity.features.turbulence_model, "laminar");
    assert_eq!(cavity.features.turbulence_type, "laminar");
    let tube = kb.cases.iter().find(|c| c.case_id == "shockTube").unwrap();
    assert_eq!(tube.features.turbulence_model, "laminar");
}

#[test]
fn guidance_store_holds_all_four_types() {
    let kb = build();
    for ty in [
        "epsilonWallFunction",
        "kqRWallFunction",
        "nutUSpaldingWallFunction",
        "totalPressure",
    ] {
        assert!(kb.guidance.contains_key(ty), "{ty}");
    }
    let names: Vec<&str> = kb.guidance["totalPressure"]
        .required_parameters
        .iter()
        .map(|p| p.name.as_str())
        .collect();
    assert_eq!(names, vec!["p0", "gamma", "value"]);
}

#[test]
fn kb_json_round_trips() {
    let kb = build();
    let json = kb.to_json();
    let restored = KnowledgeBase::from_json(&json).unwrap();
    assert_eq!(restored.cases.len(), kb.cases.len());
    for (a, b) in kb.cases.iter().zip(restored.cases.iter()) {
        assert_eq!(a.case_id, b.case_id);
        assert_eq!(a.features, b.features);
        assert_eq!(a.files.len(), b.files.len(), "{}", a.case_id);
        for (path, tree) in &a.files {
            assert_eq!(tree, &b.files[path], "{} {path}", a.case_id);
        }
    }
    assert_eq!(restored.guidance, kb.guidance);
    assert_eq!(restored.solver_compressibility, kb.solver_compressibility);
    // Serialization itself is a fixed point.
    assert_eq!(
        serde_json::to_string(&json).unwrap(),
        serde_json::to_string(&restored.to_json()).unwrap()
    );
}
