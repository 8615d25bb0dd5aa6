//! Ingestion of pre-extracted boundary-condition guidance documents.

use indexmap::IndexMap;
use serde_json::Value;

use super::model::{GuidanceEntry, KbError};

/// Build the guidance store from structured JSON documents, keyed by
/// boundary type. Duplicate types merge `required_parameters` by union on
/// parameter name (the first occurrence of a name wins).
pub fn ingest_guidance(documents: &[(String, Value)]) -> Result<IndexMap<String, GuidanceEntry>, KbError> {
    let mut store: IndexMap<String, GuidanceEntry> = IndexMap::new();
    for (doc_id, value) in documents {
        let entry: GuidanceEntry = serde_json::from_value(value.clone())
            .map_err(|_| KbError::MalformedGuidance(doc_id.clone()))?;
        if entry.boundary_type.is_empty() {
            return Err(KbError::MalformedGuidance(doc_id.clone()));
        }
        match store.get_mut(&entry.boundary_type) {
            Some(existing) => {
                for param in entry.required_parameters {
                    if !existing.required_parameters.iter().any(|p| p.name == param.name) {
                        existing.required_parameters.push(param);
                    }
                }
            }
            None => {
                store.insert(entry.boundary_type.clone(), entry);
            }
        }
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn total_pressure_entry_is_retrievable() {
        let doc = json!({
            "boundary_type": "totalPressure",
            "required_parameters": [
                {"name": "p0", "condition": "always", "description": "total pressure"},
                {"name": "gamma", "condition": "compressible only", "description": "ratio of specific heats"}
            ],
            "source": "totalPressureFvPatchScalarField.H"
        });
        let store = ingest_guidance(&[("doc0".into(), doc)]).unwrap();
        let entry = &store["totalPressure"];
        assert_eq!(entry.required_parameters.len(), 2);
        assert_eq!(entry.required_parameters[1].name, "gamma");
    }

    #[test]
    fn empty_document_set_gives_empty_store() {
        assert!(ingest_guidance(&[]).unwrap().is_empty());
    }

    #[test]
    fn duplicate_types_union_parameters() {
        let a = json!({
            "boundary_type": "totalPressure",
            "required_parameters": [{"name": "p0", "condition": "always", "description": "x"}],
            "source": "a.H"
        });
        let b = json!({
            "boundary_type": "totalPressure",
            "required_parameters": [
                {"name": "p0", "condition": "always", "description": "y"},
                {"name": "gamma", "condition": "compressible only", "description": "z"}
            ],
            "source": "b.H"
        });
        let store = ingest_guidance(&[("a".into(), a), ("b".into(), b)]).unwrap();
        let names: Vec<_> = store["totalPressure"]
            .required_parameters
            .iter()
            .map(|p| p.name.as_str())
            .collect();
        assert_eq!(names, vec!["p0", "gamma"]);
    }

    #[test]
    fn malformed_document_is_rejected() {
        let doc = json!({"required_parameters": []});
        assert!(matches!(
            ingest_guidance(&[("bad".into(), doc)]),
            Err(KbError::MalformedGuidance(id)) if id == "bad"
        ));
    }
}
