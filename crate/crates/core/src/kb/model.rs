//! Knowledge-base data model and its single-file JSON form.
//!
//! The KB file is one JSON document: a top-level map `case_id -> record`
//! plus the sibling `__guidance__` and `__solver_compressibility__` maps.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::foamdict::{from_json_value, tree_to_value, ConfigTree};

#[derive(Debug, Error)]
pub enum KbError {
    #[error("no cases survived normalization")]
    EmptyCorpus,
    #[error("case has no system/controlDict")]
    MissingControlDict,
    #[error("controlDict lacks an `application` entry")]
    MissingApplication,
    #[error("unknown solver `{0}`: no corpus evidence and no table entry")]
    UnknownSolver(String),
    #[error("conflicting compressibility evidence for solver `{0}`")]
    ConflictingEvidence(String),
    #[error("failed to parse {path}: {cause}")]
    ParseFailure { path: String, cause: String },
    #[error("malformed guidance document `{0}`")]
    MalformedGuidance(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed KB file: {0}")]
    MalformedKb(String),
}

/// The retrieval key of a case plus auxiliary tags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicsFeatures {
    pub solver: String,
    pub turbulence_model: String,
    pub compressible: bool,
    pub turbulence_type: String,
    pub boundary_types: Vec<String>,
    pub aux_tags: AuxTags,
}

/// Optional labels stored for future rule expansion; unused by retrieval.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuxTags {
    pub thermophysical_model: Option<String>,
    pub single_phase: bool,
    pub particle_flow: bool,
    pub reacting_flow: bool,
    pub ddt_scheme: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CaseRecord {
    pub case_id: String,
    pub case_path: String,
    pub files: IndexMap<String, ConfigTree>,
    pub features: PhysicsFeatures,
}

/// One entry of the boundary-condition guidance store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidanceEntry {
    pub boundary_type: String,
    pub required_parameters: Vec<GuidanceParameter>,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidanceParameter {
    pub name: String,
    pub condition: String,
    pub description: String,
}

/// Immutable indexed collection of case records plus the guidance store.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    pub cases: Vec<CaseRecord>,
    pub guidance: IndexMap<String, GuidanceEntry>,
    pub solver_compressibility: IndexMap<String, bool>,
    pub(crate) by_solver: IndexMap<String, Vec<usize>>,
    pub(crate) by_turbulence: IndexMap<String, Vec<usize>>,
    pub(crate) by_compressible: IndexMap<bool, Vec<usize>>,
    pub(crate) by_boundary_type: IndexMap<String, Vec<usize>>,
    pub(crate) by_file: IndexMap<String, Vec<usize>>,
}

impl KnowledgeBase {
    /// Assemble a KB from records; cases are sorted by `case_path` and the
    /// exact-match indexes rebuilt, so construction is deterministic.
    pub fn assemble(
        mut cases: Vec<CaseRecord>,
        guidance: IndexMap<String, GuidanceEntry>,
        solver_compressibility: IndexMap<String, bool>,
    ) -> Self {
        cases.sort_by(|a, b| a.case_path.cmp(&b.case_path));
        let mut kb = KnowledgeBase {
            cases,
            guidance,
            solver_compressibility,
            ..Default::default()
        };
        for (i, case) in kb.cases.iter().enumerate() {
            kb.by_solver
                .entry(case.features.solver.clone())
                .or_default()
                .push(i);
            kb.by_turbulence
                .entry(case.features.turbulence_model.clone())
                .or_default()
                .push(i);
            kb.by_compressible
                .entry(case.features.compressible)
                .or_default()
                .push(i);
            for bt in &case.features.boundary_types {
                kb.by_boundary_type.entry(bt.clone()).or_default().push(i);
            }
            for path in case.files.keys() {
                kb.by_file.entry(path.clone()).or_default().push(i);
            }
        }
        kb
    }

    pub fn case_ids_with_solver(&self, solver: &str) -> &[usize] {
        self.by_solver.get(solver).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Serialize to the KB JSON document.
    pub fn to_json(&self) -> String {
        let mut top = serde_json::Map::new();
        for case in &self.cases {
            top.insert(case.case_id.clone(), record_to_value(case));
        }
        let mut guidance = serde_json::Map::new();
        for (bt, entry) in &self.guidance {
            guidance.insert(bt.clone(), serde_json::to_value(entry).unwrap());
        }
        top.insert("__guidance__".into(), Value::Object(guidance));
        let mut comp = serde_json::Map::new();
        for (solver, c) in &self.solver_compressibility {
            comp.insert(solver.clone(), Value::Bool(*c));
        }
        top.insert("__solver_compressibility__".into(), Value::Object(comp));
        let mut text = serde_json::to_string_pretty(&Value::Object(top)).unwrap();
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, KbError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| KbError::MalformedKb(e.to_string()))?;
        let map = value
            .as_object()
            .ok_or_else(|| KbError::MalformedKb("top level is not an object".into()))?;
        let mut cases = Vec::new();
        let mut guidance = IndexMap::new();
        let mut solver_compressibility = IndexMap::new();
        for (key, entry) in map {
            match key.as_str() {
                "__guidance__" => {
                    let store: IndexMap<String, GuidanceEntry> =
                        serde_json::from_value(entry.clone())
                            .map_err(|e| KbError::MalformedKb(e.to_string()))?;
                    guidance = store;
                }
                "__solver_compressibility__" => {
                    let table: IndexMap<String, bool> = serde_json::from_value(entry.clone())
                        .map_err(|e| KbError::MalformedKb(e.to_string()))?;
                    solver_compressibility = table;
                }
                _ => cases.push(record_from_value(key, entry)?),
            }
        }
        Ok(Self::assemble(cases, guidance, solver_compressibility))
    }
}

fn record_to_value(case: &CaseRecord) -> Value {
    let mut files = serde_json::Map::new();
    for (path, tree) in &case.files {
        files.insert(path.clone(), tree_to_value(tree));
    }
    let tags = &case.features.aux_tags;
    let mut rec = serde_json::Map::new();
    rec.insert("case_path".into(), case.case_path.clone().into());
    rec.insert("configuration_files".into(), Value::Object(files));
    rec.insert("solver".into(), case.features.solver.clone().into());
    rec.insert(
        "turbulence_model".into(),
        case.features.turbulence_model.clone().into(),
    );
    rec.insert("compressible".into(), case.features.compressible.into());
    rec.insert(
        "turbulence_type".into(),
        case.features.turbulence_type.clone().into(),
    );
    rec.insert(
        "thermophysicalModel".into(),
        tags.thermophysical_model
            .clone()
            .map(Value::String)
            .unwrap_or(Value::Null),
    );
    rec.insert("singlePhase".into(), tags.single_phase.into());
    rec.insert("particle_flow".into(), tags.particle_flow.into());
    rec.insert("reacting_flow".into(), tags.reacting_flow.into());
    rec.insert(
        "ddtScheme".into(),
        tags.ddt_scheme.clone().map(Value::String).unwrap_or(Value::Null),
    );
    rec.insert(
        "boundary_type".into(),
        Value::Array(
            case.features
                .boundary_types
                .iter()
                .map(|b| Value::String(b.clone()))
                .collect(),
        ),
    );
    Value::Object(rec)
}

fn record_from_value(case_id: &str, value: &Value) -> Result<CaseRecord, KbError> {
    let obj = value
        .as_object()
        .ok_or_else(|| KbError::MalformedKb(format!("record {case_id} is not an object")))?;
    let str_field = |name: &str| -> Result<String, KbError> {
        obj.get(name)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| KbError::MalformedKb(format!("record {case_id} lacks `{name}`")))
    };
    let mut files = IndexMap::new();
    if let Some(Value::Object(file_map)) = obj.get("configuration_files") {
        for (path, tree) in file_map {
            files.insert(path.clone(), from_json_value(tree));
        }
    }
    let features = PhysicsFeatures {
        solver: str_field("solver")?,
        turbulence_model: str_field("turbulence_model")?,
        compressible: obj
            .get("compressible")
            .and_then(Value::as_bool)
            .unwrap_or(false),
        turbulence_type: str_field("turbulence_type")?,
        boundary_types: obj
            .get("boundary_type")
            .and_then(Value::as_array)
            .map(|a| {
                a.iter()
                    .filter_map(Value::as_str)
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_default(),
        aux_tags: AuxTags {
            thermophysical_model: obj
                .get("thermophysicalModel")
                .and_then(Value::as_str)
                .map(str::to_string),
            single_phase: obj
                .get("singlePhase")
                .and_then(Value::as_bool)
                .unwrap_or(true),
            particle_flow: obj
                .get("particle_flow")
                .and_then(Value::as_bool)
                .unwrap_or(false),
            reacting_flow: obj
                .get("reacting_flow")
                .and_then(Value::as_bool)
                .unwrap_or(false),
            ddt_scheme: obj
                .get("ddtScheme")
                .and_then(Value::as_str)
                .map(str::to_string),
        },
    };
    Ok(CaseRecord {
        case_id: case_id.to_string(),
        case_path: str_field("case_path")?,
        files,
        features,
    })
}
