//! Structured case specification: the machine-readable stand-in for the
//! user's problem statement.

use indexmap::IndexMap;
use serde_json::Value;

use crate::kb::features::infer_compressibility;
use crate::retrieve::SetupDescriptor;

use super::AgentError;

/// Everything the agent needs to set up one case: the physics models, the
/// required initial and boundary conditions, material properties, the
/// files to generate, and the mesh patch names.
#[derive(Debug, Clone)]
pub struct CaseSpec {
    pub name: String,
    pub solver: String,
    pub turbulence_model: String,
    /// field -> patch -> condition entry (`type`, `value`, ...).
    pub ic_bc: IndexMap<String, IndexMap<String, Value>>,
    /// property name -> value with units.
    pub physical_properties: IndexMap<String, Value>,
    pub target_files: Vec<SetupDescriptor>,
    pub mesh_boundary_names: Vec<String>,
}

fn required<'a>(doc: &'a Value, field: &str) -> Result<&'a Value, AgentError> {
    doc.get(field)
        .ok_or_else(|| AgentError::SchemaViolation(field.to_string()))
}

fn required_str(doc: &Value, field: &str) -> Result<String, AgentError> {
    required(doc, field)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| AgentError::SchemaViolation(field.to_string()))
}

/// Validate a case-specification document. The solver must have known
/// compressibility, every IC/BC patch must exist on the mesh, and at
/// least one target file must be listed.
pub fn load_case_spec(doc: &Value) -> Result<CaseSpec, AgentError> {
    let name = required_str(doc, "name")?;
    let solver = required_str(doc, "solver")?;
    let turbulence_model = required_str(doc, "turbulence_model")?;
    infer_compressibility(&solver, None)
        .map_err(|_| AgentError::UnknownSolver(solver.clone()))?;

    let mesh_boundary_names: Vec<String> = required(doc, "mesh_boundary_names")?
        .as_array()
        .ok_or_else(|| AgentError::SchemaViolation("mesh_boundary_names".to_string()))?
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| AgentError::SchemaViolation("mesh_boundary_names".to_string()))
        })
        .collect::<Result<_, _>>()?;

    let mut ic_bc = IndexMap::new();
    let bc_doc = required(doc, "ic_bc")?
        .as_object()
        .ok_or_else(|| AgentError::SchemaViolation("ic_bc".to_string()))?;
    for (field, patches) in bc_doc {
        let patches = patches
            .as_object()
            .ok_or_else(|| AgentError::SchemaViolation(format!("ic_bc.{field}")))?;
        let mut per_patch = IndexMap::new();
        for (patch, entry) in patches {
            if patch != "internalField" && !mesh_boundary_names.contains(patch) {
                return Err(AgentError::SchemaViolation(format!(
                    "ic_bc.{field}.{patch}: patch not on the mesh"
                )));
            }
            per_patch.insert(patch.clone(), entry.clone());
        }
        ic_bc.insert(field.clone(), per_patch);
    }

    let mut physical_properties = IndexMap::new();
    if let Some(props) = doc.get("physical_properties") {
        let props = props
            .as_object()
            .ok_or_else(|| AgentError::SchemaViolation("physical_properties".to_string()))?;
        for (k, v) in props {
            physical_properties.insert(k.clone(), v.clone());
        }
    }

    let targets_doc = required(doc, "target_files")?
        .as_array()
        .ok_or_else(|| AgentError::SchemaViolation("target_files".to_string()))?;
    if targets_doc.is_empty() {
        return Err(AgentError::SchemaViolation("target_files: empty".to_string()));
    }
    let mut target_files = Vec::new();
    for entry in targets_doc {
        match entry {
            Value::String(path) => target_files.push(SetupDescriptor::File(path.clone())),
            Value::Object(obj) => {
                let kind = obj.get("kind").and_then(Value::as_str);
                let target = obj.get("target").and_then(Value::as_str);
                match (kind, target) {
                    (Some("file"), Some(t)) => {
                        target_files.push(SetupDescriptor::File(t.to_string()))
                    }
                    (Some("boundary_type"), Some(t)) => {
                        target_files.push(SetupDescriptor::BoundaryType(t.to_string()))
                    }
                    _ => return Err(AgentError::SchemaViolation("target_files".to_string())),
                }
            }
            _ => return Err(AgentError::SchemaViolation("target_files".to_string())),
        }
    }

    Ok(CaseSpec {
        name,
        solver,
        turbulence_model,
        ic_bc,
        physical_properties,
        target_files,
        mesh_boundary_names,
    })
}

impl CaseSpec {
    /// The `{case_ic_bc}` prompt slot.
    pub fn ic_bc_json(&self) -> String {
        let mut map = serde_json::Map::new();
        for (field, patches) in &self.ic_bc {
            let mut inner = serde_json::Map::new();
            for (patch, entry) in patches {
                inner.insert(patch.clone(), entry.clone());
            }
            map.insert(field.clone(), Value::Object(inner));
        }
        serde_json::to_string(&Value::Object(map)).expect("spec serializes")
    }

    /// The `{case_physical_properties}` prompt slot.
    pub fn physical_properties_json(&self) -> String {
        let mut map = serde_json::Map::new();
        for (k, v) in &self.physical_properties {
            map.insert(k.clone(), v.clone());
        }
        serde_json::to_string(&Value::Object(map)).expect("spec serializes")
    }
}
