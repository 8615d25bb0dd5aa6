//! Constraint-relaxation retrieval: the cascading ladder and the
//! dual-branch variant used for numerical schemes.

use crate::kb::features::infer_compressibility;
use crate::kb::model::KnowledgeBase;

use super::search::{downsample, search};
use super::types::{
    AuditRecord, ContextItem, ContextSet, LadderStep, RetrievalQuery, RetrieveError,
    SetupDescriptor,
};

pub(crate) fn solver_compressibility(
    kb: &KnowledgeBase,
    m_sol: &str,
) -> Result<bool, RetrieveError> {
    if let Some(c) = kb.solver_compressibility.get(m_sol) {
        return Ok(*c);
    }
    infer_compressibility(m_sol, None).map_err(|_| RetrieveError::UnknownSolver(m_sol.to_string()))
}

fn base_query(descriptor: &SetupDescriptor) -> RetrievalQuery {
    RetrievalQuery::new(descriptor.clone())
}

/// One constraint set of a ladder plus the relaxation note it carries.
pub(crate) struct Level {
    pub query: RetrievalQuery,
    pub note: Option<&'static str>,
}

/// Evaluate ladder levels in order, recording every attempt, and stop at
/// the first level with hits.
pub(crate) fn run_ladder(
    kb: &KnowledgeBase,
    levels: Vec<Level>,
    n_max: usize,
    audit: &mut AuditRecord,
) -> Vec<ContextItem> {
    let offset = audit.ladder.len();
    for (i, level) in levels.into_iter().enumerate() {
        let hits = search(kb, &level.query);
        audit.ladder.push(LadderStep {
            query: level.query.render(),
            hit_count: hits.len(),
        });
        if !hits.is_empty() {
            if audit.winning_level.is_none() {
                audit.winning_level = Some(offset + i + 1);
            }
            if let Some(note) = level.note {
                audit.notes.push(note.to_string());
            }
            return downsample(hits, n_max);
        }
    }
    Vec::new()
}

pub(crate) fn cascade_levels(
    m_sol: &str,
    m_turb: &str,
    compressible: bool,
    descriptor: &SetupDescriptor,
) -> Vec<Level> {
    let mut q1 = base_query(descriptor);
    q1.solver = Some(m_sol.to_string());
    q1.turbulence_model = Some(m_turb.to_string());
    let mut q2 = base_query(descriptor);
    q2.solver = Some(m_sol.to_string());
    let mut q3 = base_query(descriptor);
    q3.turbulence_model = Some(m_turb.to_string());
    q3.compressible = Some(compressible);
    let mut q4 = base_query(descriptor);
    q4.turbulence_model = Some(m_turb.to_string());
    let mut q5 = base_query(descriptor);
    q5.compressible = Some(compressible);
    let q6 = base_query(descriptor);
    vec![
        Level { query: q1, note: None },
        Level { query: q2, note: None },
        Level { query: q3, note: None },
        Level {
            query: q4,
            note: Some("level 4: compressibility constraint relaxed"),
        },
        Level { query: q5, note: None },
        Level {
            query: q6,
            note: Some("level 6: compressibility constraint relaxed"),
        },
    ]
}

/// Relax constraints level by level — exact physics first, then solver
/// only, then turbulence with matching compressibility, and so on down to
/// the bare setup descriptor — returning the first non-empty result.
pub fn cascading_fallback(
    kb: &KnowledgeBase,
    m_sol: &str,
    m_turb: &str,
    descriptor: &SetupDescriptor,
    n_max: usize,
) -> Result<ContextSet, RetrieveError> {
    let compressible = solver_compressibility(kb, m_sol)?;
    let mut audit = AuditRecord::new("cascading_fallback");
    let items = run_ladder(
        kb,
        cascade_levels(m_sol, m_turb, compressible, descriptor),
        n_max,
        &mut audit,
    );
    audit.result_case_ids = items.iter().map(|i| i.case_id.clone()).collect();
    audit.result_case_ids.dedup();
    Ok(ContextSet {
        items,
        guidance: Vec::new(),
        origin: audit,
    })
}

/// Dual-branch retrieval for numerical schemes: on a strict miss, relax a
/// solver-dominant branch and a turbulence-dominant branch independently
/// and merge the two example sets.
pub fn all_model_retrieve(
    kb: &KnowledgeBase,
    m_sol: &str,
    m_turb: &str,
    descriptor: &SetupDescriptor,
    n_max: usize,
) -> Result<ContextSet, RetrieveError> {
    let compressible = solver_compressibility(kb, m_sol)?;
    let mut audit = AuditRecord::new("all_model");

    let mut strict = base_query(descriptor);
    strict.solver = Some(m_sol.to_string());
    strict.turbulence_model = Some(m_turb.to_string());
    let strict_items = run_ladder(
        kb,
        vec![Level { query: strict, note: None }],
        n_max,
        &mut audit,
    );
    if !strict_items.is_empty() {
        audit.result_case_ids = strict_items.iter().map(|i| i.case_id.clone()).collect();
        return Ok(ContextSet {
            items: strict_items,
            guidance: Vec::new(),
            origin: audit,
        });
    }

    audit.notes.push("solver-dominant branch".to_string());
    let mut q_sol = base_query(descriptor);
    q_sol.solver = Some(m_sol.to_string());
    let mut q_comp = base_query(descriptor);
    q_comp.compressible = Some(compressible);
    let solver_branch = run_ladder(
        kb,
        vec![
            Level { query: q_sol, note: None },
            Level { query: q_comp, note: None },
            Level {
                query: base_query(descriptor),
                note: Some("solver branch: compressibility constraint relaxed"),
            },
        ],
        n_max,
        &mut audit,
    );

    audit.notes.push("turbulence-dominant branch".to_string());
    let mut q_turb = base_query(descriptor);
    q_turb.turbulence_model = Some(m_turb.to_string());
    let turb_branch = run_ladder(
        kb,
        vec![
            Level { query: q_turb, note: None },
            Level {
                query: base_query(descriptor),
                note: Some("turbulence branch: compressibility constraint relaxed"),
            },
        ],
        n_max,
        &mut audit,
    );

    let mut items = solver_branch;
    for item in turb_branch {
        if !items.iter().any(|i| i.case_id == item.case_id) {
            items.push(item);
        }
    }
    items.sort_by(|a, b| (&a.case_id, &a.location).cmp(&(&b.case_id, &b.location)));
    if items.len() > n_max {
        audit
            .notes
            .push("branch union truncated to the cardinality bound".to_string());
        items = downsample(items, n_max);
    }
    audit.result_case_ids = items.iter().map(|i| i.case_id.clone()).collect();
    audit.result_case_ids.dedup();
    Ok(ContextSet {
        items,
        guidance: Vec::new(),
        origin: audit,
    })
}
