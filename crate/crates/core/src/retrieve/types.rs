//! Query, result, and audit types shared by all retrieval strategies.

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::foamdict::{to_json_value, ConfigNode};
use crate::kb::model::GuidanceEntry;

#[derive(Debug, Error)]
pub enum RetrieveError {
    #[error("unknown solver `{0}`: compressibility cannot be inferred")]
    UnknownSolver(String),
    #[error("no cases match feature `{0}`")]
    NoMatchingCases(String),
    #[error("every profiled key fell below the collapse threshold")]
    EmptyTemplate,
    #[error("no retrieval strategy is routed for target `{0}`")]
    UnroutableTarget(String),
}

/// What a query is looking for: a whole configuration file or the usage of
/// one boundary-condition type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetupDescriptor {
    /// Corpus-relative path under `0/`, `constant/`, or `system/`.
    File(String),
    /// A boundary-condition type name, e.g. `totalPressure`.
    BoundaryType(String),
}

impl SetupDescriptor {
    pub fn target(&self) -> &str {
        match self {
            SetupDescriptor::File(t) | SetupDescriptor::BoundaryType(t) => t,
        }
    }

    pub fn render(&self) -> String {
        match self {
            SetupDescriptor::File(t) => format!("file:{t}"),
            SetupDescriptor::BoundaryType(t) => format!("boundary_type:{t}"),
        }
    }
}

/// One exact-match constraint set: every present feature must equal the
/// case's feature, and the case must contain the descriptor target.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalQuery {
    pub solver: Option<String>,
    pub turbulence_model: Option<String>,
    pub compressible: Option<bool>,
    pub keyword: Option<String>,
    pub descriptor: SetupDescriptor,
}

impl RetrievalQuery {
    pub fn new(descriptor: SetupDescriptor) -> Self {
        RetrievalQuery {
            solver: None,
            turbulence_model: None,
            compressible: None,
            keyword: None,
            descriptor,
        }
    }

    /// Stable one-line rendering used in audit ladders.
    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        if let Some(s) = &self.solver {
            parts.push(format!("solver={s}"));
        }
        if let Some(t) = &self.turbulence_model {
            parts.push(format!("turbulence_model={t}"));
        }
        if let Some(c) = self.compressible {
            parts.push(format!("compressible={c}"));
        }
        if let Some(k) = &self.keyword {
            parts.push(format!("keyword={k}"));
        }
        parts.push(format!("S={}", self.descriptor.render()));
        format!("{{{}}}", parts.join(", "))
    }
}

/// One retrieved example: a file tree or the smallest fragment that
/// answers the query, tagged with where it came from.
#[derive(Debug, Clone)]
pub struct ContextItem {
    pub case_id: String,
    pub target: String,
    /// Path of the fragment inside the case, e.g. `0/nut/boundaryField/inlet`;
    /// equal to `target` for whole-file items.
    pub location: String,
    pub content: ConfigNode,
}

/// One attempted ladder level of a retrieval strategy.
#[derive(Debug, Clone)]
pub struct LadderStep {
    pub query: String,
    pub hit_count: usize,
}

/// The machine-checkable account of how a result was produced.
#[derive(Debug, Clone)]
pub struct AuditRecord {
    pub strategy: String,
    pub ladder: Vec<LadderStep>,
    /// 1-based index of the first ladder level with hits; `None` when every
    /// level missed.
    pub winning_level: Option<usize>,
    pub result_case_ids: Vec<String>,
    pub notes: Vec<String>,
}

impl AuditRecord {
    pub fn new(strategy: &str) -> Self {
        AuditRecord {
            strategy: strategy.to_string(),
            ladder: Vec::new(),
            winning_level: None,
            result_case_ids: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        let ladder: Vec<Value> = self
            .ladder
            .iter()
            .map(|step| json!({"query": step.query, "hit_count": step.hit_count}))
            .collect();
        let winning = match self.winning_level {
            Some(level) => json!(level),
            None => json!("none"),
        };
        json!({
            "strategy": self.strategy,
            "ladder": ladder,
            "winning_level": winning,
            "result_case_ids": self.result_case_ids,
            "notes": self.notes,
        })
    }
}

/// The collection of configuration examples handed to the agent, plus any
/// boundary-condition guidance and the audit record that produced it.
#[derive(Debug, Clone)]
pub struct ContextSet {
    pub items: Vec<ContextItem>,
    pub guidance: Vec<GuidanceEntry>,
    pub origin: AuditRecord,
}

impl ContextSet {
    pub fn empty(origin: AuditRecord) -> Self {
        ContextSet {
            items: Vec::new(),
            guidance: Vec::new(),
            origin,
        }
    }

    pub fn to_json(&self) -> Value {
        let items: Vec<Value> = self
            .items
            .iter()
            .map(|item| {
                json!({
                    "case_id": item.case_id,
                    "target": item.target,
                    "location": item.location,
                    "content": to_json_value(&item.content),
                })
            })
            .collect();
        let guidance: Vec<Value> = self
            .guidance
            .iter()
            .map(|g| serde_json::to_value(g).expect("guidance serializes"))
            .collect();
        json!({
            "items": items,
            "guidance": guidance,
            "audit": self.origin.to_json(),
        })
    }

    /// Keyword-snippet form: numbered `sample_setup_i` entries, each the
    /// smallest fragment that contains the keyword.
    pub fn to_snippets_json(&self) -> Value {
        let mut map = Map::new();
        for (i, item) in self.items.iter().enumerate() {
            map.insert(format!("sample_setup_{i}"), to_json_value(&item.content));
        }
        Value::Object(map)
    }
}
