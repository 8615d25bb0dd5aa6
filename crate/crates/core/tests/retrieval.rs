//! Retrieval strategies over the bundled mini-corpus.

mod common;

use std::fs;

use phynikce_core::retrieve::{
    all_model_retrieve, cascading_fallback, collapse_refine, compute_profile, dispatch,
    keyword_retrieve, merge_union_max, multi_source_retrieve, search, template_retrieve,
    DispatchTask, FeatureLabel, ProbabilityProfile, ReflectTarget, RetrievalQuery,
    RetrieveError, SetupDescriptor, Strategy, DEFAULT_N_MAX, DEFAULT_TAU,
};
use serde_json::json;

use common::{fixtures, kb};

fn file(path: &str) -> SetupDescriptor {
    SetupDescriptor::File(path.to_string())
}

#[test]
fn search_finds_periodic_hill_by_exact_features() {
    let mut q = RetrievalQuery::new(file("constant/turbulenceProperties"));
    q.solver = Some("simpleFoam".into());
    q.turbulence_model = Some("SpalartAllmaras".into());
    let hits = search(kb(), &q);
    assert!(hits.iter().any(|h| h.case_id == "periodicHill"));
    assert!(hits.iter().any(|h| h.case_id == "airFoil2D"));
    assert_eq!(hits.len(), 2);
}

#[test]
fn search_on_missing_combination_is_empty() {
    let mut q = RetrievalQuery::new(file("constant/turbulenceProperties"));
    q.solver = Some("rhoCentralFoam".into());
    q.turbulence_model = Some("kEpsilon".into());
    assert!(search(kb(), &q).is_empty());
}

#[test]
fn cascade_strict_match_stops_at_level_one() {
    let set = cascading_fallback(
        kb(),
        "simpleFoam",
        "kEpsilon",
        &file("system/fvSolution"),
        DEFAULT_N_MAX,
    )
    .unwrap();
    assert_eq!(set.origin.winning_level, Some(1));
    assert_eq!(set.origin.ladder.len(), 1);
    // Oracle: the strict query evaluated directly.
    let mut q = RetrievalQuery::new(file("system/fvSolution"));
    q.solver = Some("simpleFoam".into());
    q.turbulence_model = Some("kEpsilon".into());
    let direct = search(kb(), &q);
    assert_eq!(
        set.items.iter().map(|i| &i.case_id).collect::<Vec<_>>(),
        direct.iter().map(|i| &i.case_id).collect::<Vec<_>>()
    );
}

#[test]
fn cascade_relaxes_unseen_combination_to_solver_level() {
    // No case pairs rhoCentralFoam with kEpsilon; the solver-only level
    // still finds the shock tube.
    let set = cascading_fallback(
        kb(),
        "rhoCentralFoam",
        "kEpsilon",
        &file("constant/turbulenceProperties"),
        DEFAULT_N_MAX,
    )
    .unwrap();
    assert_eq!(set.origin.winning_level, Some(2));
    assert_eq!(set.items.len(), 1);
    assert_eq!(set.items[0].case_id, "shockTube");
    // Levels after the winner were never evaluated.
    assert_eq!(set.origin.ladder.len(), 2);
}

#[test]
fn cascade_unknown_solver_is_an_error() {
    let err = cascading_fallback(
        kb(),
        "mysteryFoam",
        "kEpsilon",
        &file("system/fvSolution"),
        DEFAULT_N_MAX,
    )
    .unwrap_err();
    assert!(matches!(err, RetrieveError::UnknownSolver(s) if s == "mysteryFoam"));
}

#[test]
fn cascade_miss_reports_no_winning_level() {
    let set = cascading_fallback(
        kb(),
        "simpleFoam",
        "kEpsilon",
        &file("system/noSuchDict"),
        DEFAULT_N_MAX,
    )
    .unwrap();
    assert!(set.items.is_empty());
    assert_eq!(set.origin.winning_level, None);
    assert_eq!(set.origin.ladder.len(), 6);
}

#[test]
fn all_model_strict_match_equals_cascade() {
    let a = all_model_retrieve(
        kb(),
        "simpleFoam",
        "kEpsilon",
        &file("system/fvSchemes"),
        DEFAULT_N_MAX,
    )
    .unwrap();
    let c = cascading_fallback(
        kb(),
        "simpleFoam",
        "kEpsilon",
        &file("system/fvSchemes"),
        DEFAULT_N_MAX,
    )
    .unwrap();
    assert_eq!(a.origin.result_case_ids, c.origin.result_case_ids);
}

#[test]
fn all_model_merges_solver_and_turbulence_branches() {
    // sonicFoam never runs kEpsilon in the corpus, so the two branches hit
    // disjoint case sets and the union covers both physics aspects.
    let set = all_model_retrieve(
        kb(),
        "sonicFoam",
        "kEpsilon",
        &file("system/fvSchemes"),
        DEFAULT_N_MAX,
    )
    .unwrap();
    let ids = &set.origin.result_case_ids;
    assert!(ids.iter().any(|id| id == "forwardStep" || id == "nozzleDuct"), "{ids:?}");
    assert!(ids.iter().any(|id| id == "TJunction" || id == "angledDuct"), "{ids:?}");
    assert!(set.items.len() <= DEFAULT_N_MAX);
    // Both branch ladders are on record.
    assert!(set.origin.notes.iter().any(|n| n.contains("solver-dominant")));
    assert!(set.origin.notes.iter().any(|n| n.contains("turbulence-dominant")));
}

#[test]
fn merged_full_corpus_profiles_match_union_max_by_hand() {
    // Feature profiles measured on the full tutorial corpus, merged by
    // union-max: each key keeps the entry of the profile that observed it
    // most often; ties keep the earlier (turbulence) profile.
    let load = |name: &str| {
        let text = fs::read_to_string(fixtures().join("profiles").join(name)).unwrap();
        ProbabilityProfile::from_summary_json(&serde_json::from_str(&text).unwrap()).unwrap()
    };
    let turb = load("turbulence_kEpsilon.json");
    let sol = load("solver_sonicFoam.json");
    let merged = merge_union_max(&[turb, sol]);
    let expected = [
        ("p", 0.53, "turbulence model=kEpsilon"),
        ("U", 1.0, "solver=sonicFoam"),
        ("k", 0.78, "turbulence model=kEpsilon"),
        ("epsilon", 0.78, "turbulence model=kEpsilon"),
        ("rho", 1.0, "solver=sonicFoam"),
        ("e", 1.0, "solver=sonicFoam"),
    ];
    assert_eq!(merged.rates.len(), expected.len());
    for (key, rate, source) in expected {
        assert!((merged.rates[key].rate - rate).abs() < 1e-9, "{key}");
        assert_eq!(merged.sources[key], source, "{key}");
    }
}

#[test]
fn profile_of_single_feature_counts_rates() {
    let profile = compute_profile(
        kb(),
        &FeatureLabel::Solver("sonicFoam".into()),
        &file("system/fvSolution"),
    )
    .unwrap();
    assert_eq!(profile.case_count, 2);
    for key in ["p", "rho", "U", "e"] {
        assert!((profile.rates[key].rate - 1.0).abs() < 1e-9, "{key}");
    }
    assert!((profile.rates["k"].rate - 0.5).abs() < 1e-9);
}

#[test]
fn profile_without_matching_cases_is_an_error() {
    let err = compute_profile(
        kb(),
        &FeatureLabel::Turbulence("kOmega".into()),
        &file("system/fvSolution"),
    )
    .unwrap_err();
    assert!(matches!(err, RetrieveError::NoMatchingCases(_)));
}

#[test]
fn template_spans_turbulence_and_compressibility_keys() {
    let template = template_retrieve(
        kb(),
        "sonicFoam",
        "kEpsilon",
        &file("system/fvSolution"),
        DEFAULT_TAU,
    )
    .unwrap();
    for key in ["solvers/k", "solvers/epsilon", "solvers/rho", "solvers/e"] {
        assert!(template.entries.contains_key(key), "{key} missing");
    }
    // Provenance: turbulence keys come from the turbulence profile,
    // compressible keys from the solver profile.
    assert_eq!(
        template.provenance["solvers/epsilon"].source_feature,
        "turbulence model=kEpsilon"
    );
    assert_eq!(template.provenance["solvers/rho"].source_feature, "solver=sonicFoam");
}

#[test]
fn template_atomic_blocks_are_winner_takes_all() {
    // Three of the four simpleFoam cases share one pressure-solver block;
    // the whole majority block is adopted, never a mix of fields.
    let template = template_retrieve(
        kb(),
        "simpleFoam",
        "noSuchModel",
        &file("system/fvSolution"),
        DEFAULT_TAU,
    )
    .unwrap();
    assert_eq!(
        template.entries["solvers/p"],
        json!({
            "solver": "GAMG",
            "smoother": "DICGaussSeidel",
            "tolerance": 1e-6,
            "relTol": 0.05
        })
    );
    assert!(template
        .origin
        .notes
        .iter()
        .any(|n| n.contains("matched no cases")));
}

#[test]
fn template_threshold_drops_rare_keys() {
    // The motorBike-only omega entry sits at rate 0.25 among the four
    // simpleFoam fvSolution files.
    let profile = compute_profile(
        kb(),
        &FeatureLabel::Solver("simpleFoam".into()),
        &file("system/fvSolution"),
    )
    .unwrap();
    assert!((profile.rates["omega"].rate - 0.25).abs() < 1e-9);
    let merged = merge_union_max(&[profile]);
    let (entries, _) = collapse_refine(&merged, 0.3).unwrap();
    assert!(!entries.contains_key("solvers/omega"));
    let (entries, _) = collapse_refine(&merged, 0.2).unwrap();
    assert!(entries.contains_key("solvers/omega"));
}

#[test]
fn template_collapse_can_come_up_empty() {
    // Every key sits below the threshold: rate 0.25 keys survive only the
    // turbulence/solver profiles that are themselves rare.
    let text = fixtures().join("profiles/solver_sonicFoam.json");
    let mut value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(text).unwrap()).unwrap();
    for (_, rate) in value["rates"]["solvers"].as_object_mut().unwrap() {
        *rate = json!(0.2);
    }
    let profile = ProbabilityProfile::from_summary_json(&value).unwrap();
    let merged = merge_union_max(&[profile]);
    assert!(matches!(
        collapse_refine(&merged, 0.3),
        Err(RetrieveError::EmptyTemplate)
    ));
}

#[test]
fn multi_source_attaches_guidance_and_examples() {
    let set = multi_source_retrieve(kb(), "sonicFoam", "kOmegaSST", "totalPressure", DEFAULT_N_MAX)
        .unwrap();
    assert!(set.items.iter().any(|i| i.case_id == "nozzleDuct"));
    let params: Vec<&str> = set.guidance[0]
        .required_parameters
        .iter()
        .map(|p| p.name.as_str())
        .collect();
    assert!(params.contains(&"p0"));
    assert!(params.contains(&"gamma"));
}

#[test]
fn multi_source_finds_wall_function_patches() {
    let set = multi_source_retrieve(
        kb(),
        "simpleFoam",
        "SpalartAllmaras",
        "nutUSpaldingWallFunction",
        DEFAULT_N_MAX,
    )
    .unwrap();
    assert!(set
        .items
        .iter()
        .any(|i| i.case_id == "periodicHill" && i.location.starts_with("0/nut/boundaryField/")));
    assert_eq!(set.guidance.len(), 1);
}

#[test]
fn multi_source_without_guidance_still_returns_examples() {
    let set =
        multi_source_retrieve(kb(), "simpleFoam", "kEpsilon", "noSlip", DEFAULT_N_MAX).unwrap();
    assert!(!set.items.is_empty());
    assert!(set.guidance.is_empty());
    assert!(set.origin.notes.iter().any(|n| n.contains("no guidance entry")));
}

#[test]
fn keyword_snippets_are_single_pair_maps() {
    let set = keyword_retrieve(
        kb(),
        "simpleFoam",
        "kOmegaSST",
        &file("system/fvSchemes"),
        "div(phi,epsilon)",
        DEFAULT_N_MAX,
    )
    .unwrap();
    assert_eq!(set.items.len(), 5);
    let snippets = set.to_snippets_json();
    let obj = snippets.as_object().unwrap();
    assert_eq!(obj.len(), 5);
    for entry in obj.values() {
        let pair = entry.as_object().unwrap();
        assert_eq!(pair.len(), 1);
        assert!(pair.contains_key("div(phi,epsilon)"));
    }
}

#[test]
fn keyword_quotes_are_stripped() {
    let plain = keyword_retrieve(
        kb(),
        "simpleFoam",
        "kOmegaSST",
        &file("system/fvSchemes"),
        "div(phi,epsilon)",
        DEFAULT_N_MAX,
    )
    .unwrap();
    let quoted = keyword_retrieve(
        kb(),
        "simpleFoam",
        "kOmegaSST",
        &file("system/fvSchemes"),
        "\"div(phi,epsilon)\"",
        DEFAULT_N_MAX,
    )
    .unwrap();
    assert_eq!(
        serde_json::to_string(&plain.to_snippets_json()).unwrap(),
        serde_json::to_string(&quoted.to_snippets_json()).unwrap()
    );
}

#[test]
fn keyword_absent_everywhere_is_empty() {
    let set = keyword_retrieve(
        kb(),
        "simpleFoam",
        "kEpsilon",
        &file("system/fvSchemes"),
        "div(phi,unobtainium)",
        DEFAULT_N_MAX,
    )
    .unwrap();
    assert!(set.items.is_empty());
    assert_eq!(set.origin.winning_level, None);
}

#[test]
fn dispatch_routes_every_target_kind() {
    let init_file = |p: &str| DispatchTask::Init(file(p));
    assert_eq!(dispatch(&init_file("system/fvSchemes")).unwrap(), Strategy::AllModel);
    assert_eq!(dispatch(&init_file("system/fvSolution")).unwrap(), Strategy::Template);
    assert_eq!(dispatch(&init_file("system/controlDict")).unwrap(), Strategy::Template);
    assert_eq!(
        dispatch(&init_file("constant/turbulenceProperties")).unwrap(),
        Strategy::Cascading
    );
    assert_eq!(dispatch(&init_file("0/U")).unwrap(), Strategy::Cascading);
    assert_eq!(
        dispatch(&DispatchTask::Init(SetupDescriptor::BoundaryType(
            "totalPressure".into()
        )))
        .unwrap(),
        Strategy::MultiSource
    );
    assert!(matches!(
        dispatch(&init_file("system/somethingElse")),
        Err(RetrieveError::UnroutableTarget(_))
    ));
    assert_eq!(
        dispatch(&DispatchTask::Reflect(ReflectTarget::IcBcs)).unwrap(),
        Strategy::MultiSource
    );
    assert_eq!(
        dispatch(&DispatchTask::Reflect(ReflectTarget::LinearSolvers)).unwrap(),
        Strategy::Template
    );
    assert_eq!(
        dispatch(&DispatchTask::Reflect(ReflectTarget::DiscretizationSchemes)).unwrap(),
        Strategy::Keyword
    );
}

#[test]
fn retrievers_are_deterministic() {
    let run = || {
        let set = all_model_retrieve(
            kb(),
            "sonicFoam",
            "kEpsilon",
            &file("system/fvSchemes"),
            DEFAULT_N_MAX,
        )
        .unwrap();
        let template = template_retrieve(
            kb(),
            "sonicFoam",
            "kEpsilon",
            &file("system/fvSolution"),
            DEFAULT_TAU,
        )
        .unwrap();
        (
            serde_json::to_string(&set.to_json()).unwrap(),
            serde_json::to_string(&template.to_json()).unwrap(),
        )
    };
    assert_eq!(run(), run());
}
