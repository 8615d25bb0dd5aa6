//! Exact-match search over the knowledge-base indexes.

use indexmap::IndexMap;

use crate::foamdict::ConfigNode;
use crate::kb::model::{CaseRecord, KnowledgeBase};

use super::types::{ContextItem, RetrievalQuery, SetupDescriptor};

/// Evaluate one query: intersect the feature indexes, check the descriptor
/// target, and cut the matching fragments. Results are sorted by case id
/// (then by fragment location within a case). An empty list is a valid
/// result, never an error.
pub fn search(kb: &KnowledgeBase, q: &RetrievalQuery) -> Vec<ContextItem> {
    let mut candidates: Option<Vec<usize>> = None;
    let mut narrow = |index_hits: Option<&Vec<usize>>| {
        let hits = index_hits.cloned().unwrap_or_default();
        candidates = Some(match candidates.take() {
            Some(prev) => prev.into_iter().filter(|i| hits.contains(i)).collect(),
            None => hits,
        });
    };
    if let Some(s) = &q.solver {
        narrow(kb.by_solver.get(s));
    }
    if let Some(t) = &q.turbulence_model {
        narrow(kb.by_turbulence.get(t));
    }
    if let Some(c) = q.compressible {
        narrow(kb.by_compressible.get(&c));
    }
    match &q.descriptor {
        SetupDescriptor::File(path) => narrow(kb.by_file.get(path)),
        SetupDescriptor::BoundaryType(b) => narrow(kb.by_boundary_type.get(b)),
    }
    let candidates = candidates.unwrap_or_default();

    let mut items = Vec::new();
    for idx in candidates {
        let case = &kb.cases[idx];
        match &q.descriptor {
            SetupDescriptor::File(path) => {
                let tree = &case.files[path.as_str()];
                match &q.keyword {
                    Some(keyword) => {
                        if let Some((location, fragment)) =
                            keyword_fragment(&tree.root, path, keyword)
                        {
                            items.push(ContextItem {
                                case_id: case.case_id.clone(),
                                target: path.clone(),
                                location,
                                content: fragment,
                            });
                        }
                    }
                    None => items.push(ContextItem {
                        case_id: case.case_id.clone(),
                        target: path.clone(),
                        location: path.clone(),
                        content: ConfigNode::Dict(tree.root.clone()),
                    }),
                }
            }
            SetupDescriptor::BoundaryType(b) => items.extend(patch_fragments(case, b)),
        }
    }
    items.sort_by(|a, b| (&a.case_id, &a.location).cmp(&(&b.case_id, &b.location)));
    items
}

/// Keep the first `n_max` results; stable, deterministic, idempotent.
pub fn downsample(mut items: Vec<ContextItem>, n_max: usize) -> Vec<ContextItem> {
    items.truncate(n_max);
    items
}

/// The smallest self-contained block for a keyword hit: a single-pair map
/// from the keyword to its configured value.
fn keyword_fragment(
    dict: &IndexMap<String, ConfigNode>,
    prefix: &str,
    keyword: &str,
) -> Option<(String, ConfigNode)> {
    if let Some(value) = dict.get(keyword) {
        let mut pair = IndexMap::new();
        pair.insert(keyword.to_string(), value.clone());
        return Some((format!("{prefix}/{keyword}"), ConfigNode::Dict(pair)));
    }
    for (key, node) in dict {
        if let ConfigNode::Dict(child) = node {
            let found = keyword_fragment(child, &format!("{prefix}/{key}"), keyword);
            if found.is_some() {
                return found;
            }
        }
    }
    None
}

/// Every patch entry of type `b` across the case's initial-field files,
/// tagged with the field and patch it configures.
fn patch_fragments(case: &CaseRecord, b: &str) -> Vec<ContextItem> {
    let mut items = Vec::new();
    for (path, tree) in &case.files {
        if !path.starts_with("0/") {
            continue;
        }
        let Some(ConfigNode::Dict(boundary)) = tree.root.get("boundaryField") else {
            continue;
        };
        for (patch, entry) in boundary {
            let ConfigNode::Dict(fields) = entry else {
                continue;
            };
            let is_match = fields.get("type").and_then(ConfigNode::as_text) == Some(b);
            if is_match {
                items.push(ContextItem {
                    case_id: case.case_id.clone(),
                    target: b.to_string(),
                    location: format!("{path}/boundaryField/{patch}"),
                    content: entry.clone(),
                });
            }
        }
    }
    items
}
