//! Heuristic keyword retrieval: normalize the failing keyword, then relax
//! feature constraints until some case configures exactly that key.

use crate::kb::model::KnowledgeBase;

use super::cascade::{run_ladder, solver_compressibility, Level};
use super::types::{
    AuditRecord, ContextSet, RetrievalQuery, RetrieveError, SetupDescriptor,
};

/// Keyword variants tried in order: as given, with surrounding quotes
/// stripped, and with internal spaces removed.
pub fn keyword_variants(k: &str) -> Vec<String> {
    let mut variants = vec![k.to_string()];
    let stripped = k
        .trim()
        .trim_matches(|c| c == '"' || c == '\'')
        .to_string();
    if stripped != variants[0] {
        variants.push(stripped.clone());
    }
    let despaced: String = stripped.chars().filter(|c| !c.is_whitespace()).collect();
    if despaced != stripped {
        variants.push(despaced);
    }
    variants
}

/// Find the smallest configuration blocks for keyword `k` inside the
/// target file, trying each keyword variant against a four-level
/// constraint ladder.
pub fn keyword_retrieve(
    kb: &KnowledgeBase,
    m_sol: &str,
    m_turb: &str,
    descriptor: &SetupDescriptor,
    k: &str,
    n_max: usize,
) -> Result<ContextSet, RetrieveError> {
    let compressible = solver_compressibility(kb, m_sol)?;
    let mut audit = AuditRecord::new("keyword");
    let mut items = Vec::new();
    for variant in keyword_variants(k) {
        if &variant != k {
            audit.notes.push(format!("trying normalized keyword `{variant}`"));
        }
        let with = |f: &dyn Fn(&mut RetrievalQuery)| {
            let mut q = RetrievalQuery::new(descriptor.clone());
            q.keyword = Some(variant.clone());
            f(&mut q);
            q
        };
        let levels = vec![
            Level {
                query: with(&|q| {
                    q.solver = Some(m_sol.to_string());
                    q.turbulence_model = Some(m_turb.to_string());
                }),
                note: None,
            },
            Level {
                query: with(&|q| {
                    q.compressible = Some(compressible);
                    q.turbulence_model = Some(m_turb.to_string());
                }),
                note: None,
            },
            Level {
                query: with(&|q| q.turbulence_model = Some(m_turb.to_string())),
                note: None,
            },
            Level { query: with(&|_| {}), note: None },
        ];
        items = run_ladder(kb, levels, n_max, &mut audit);
        if !items.is_empty() {
            break;
        }
    }
    audit.result_case_ids = items.iter().map(|i| i.case_id.clone()).collect();
    audit.result_case_ids.dedup();
    Ok(ContextSet {
        items,
        guidance: Vec::new(),
        origin: audit,
    })
}
