//! Dual-path boundary-condition retrieval: exemplar patch entries from
//! the corpus plus the curated guidance entry for the type.

use crate::kb::model::KnowledgeBase;

use super::cascade::cascading_fallback;
use super::types::{ContextSet, RetrieveError, SetupDescriptor};

/// Retrieve both syntactic scaffolding (patch examples via the cascading
/// ladder) and theoretical constraints (the guidance entry) for boundary
/// type `b`. Either component may be empty.
pub fn multi_source_retrieve(
    kb: &KnowledgeBase,
    m_sol: &str,
    m_turb: &str,
    b: &str,
    n_max: usize,
) -> Result<ContextSet, RetrieveError> {
    let descriptor = SetupDescriptor::BoundaryType(b.to_string());
    let mut set = cascading_fallback(kb, m_sol, m_turb, &descriptor, n_max)?;
    set.origin.strategy = "multi_source".to_string();
    match kb.guidance.get(b) {
        Some(entry) => {
            set.guidance.push(entry.clone());
            set.origin
                .notes
                .push(format!("guidance entry attached for `{b}`"));
        }
        None => set
            .origin
            .notes
            .push(format!("no guidance entry for `{b}`")),
    }
    if set.items.is_empty() && set.guidance.is_empty() {
        set.origin
            .notes
            .push("both example and guidance components empty".to_string());
    }
    Ok(set)
}
