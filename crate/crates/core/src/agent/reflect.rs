//! Stage 3: the bounded error-reflection loop.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde_json::{json, Value};

use crate::foamdict::serialize_foam;
use crate::kb::model::KnowledgeBase;
use crate::retrieve::{
    dispatch, keyword_retrieve, multi_source_retrieve, template_retrieve, DispatchTask,
    ReflectTarget, SetupDescriptor, Strategy,
};

use super::classify::{classify_error, ComplexSubType, ErrorCategory, ErrorDiagnosis};
use super::generate::{generate_target, parse_llm_file, AgentOptions};
use super::ports::{ExecutionOutcome, ExecutorPort, LlmClientPort};
use super::prompts::{assemble_diagnostic_prompt, assemble_rewrite_prompt};
use super::spec::CaseSpec;
use super::trail::Trail;
use super::AgentError;

/// Maximum number of reflection rounds before the case is abandoned.
pub const DEFAULT_REFLECTION_CAP: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// The case ran past the step bar; candidate for physical review.
    AccurateCandidate { runs: usize },
    Failed { reason: String },
}

/// Mutable loop state: rounds used, how often each failure signature has
/// been seen, and which signatures already triggered a from-scratch
/// regeneration.
#[derive(Debug, Default, Clone)]
pub struct ReflectionState {
    pub round: usize,
    pub signature_counts: IndexMap<String, usize>,
    pub escalated: Vec<String>,
}

fn reflect_target(diagnosis: &ErrorDiagnosis) -> ReflectTarget {
    match diagnosis.category {
        ErrorCategory::Dimensional => ReflectTarget::Dimensional,
        _ => match diagnosis.sub_type {
            Some(ComplexSubType::IcBcs) => ReflectTarget::IcBcs,
            Some(ComplexSubType::LinearSolvers) => ReflectTarget::LinearSolvers,
            Some(ComplexSubType::DiscretizationSchemes) => ReflectTarget::DiscretizationSchemes,
            _ => ReflectTarget::SetupFormats,
        },
    }
}

/// Retrieve correction material for a diagnosis via the reflect dispatch
/// table.
fn retrieve_for_reflect(
    kb: &KnowledgeBase,
    spec: &CaseSpec,
    diagnosis: &ErrorDiagnosis,
    options: AgentOptions,
) -> Result<(Strategy, String, Value), AgentError> {
    let strategy = dispatch(&DispatchTask::Reflect(reflect_target(diagnosis)))?;
    let result = match strategy {
        Strategy::MultiSource => {
            let b = diagnosis.keyword.clone().unwrap_or_default();
            let set = multi_source_retrieve(
                kb,
                &spec.solver,
                &spec.turbulence_model,
                &b,
                options.n_max,
            )?;
            (
                strategy,
                serde_json::to_string(&set.to_json()).expect("context serializes"),
                set.origin.to_json(),
            )
        }
        Strategy::Template => {
            let descriptor = SetupDescriptor::File("system/fvSolution".to_string());
            let template = template_retrieve(
                kb,
                &spec.solver,
                &spec.turbulence_model,
                &descriptor,
                options.tau,
            )?;
            (
                strategy,
                serde_json::to_string(&template.to_json()).expect("template serializes"),
                template.origin.to_json(),
            )
        }
        _ => {
            let file = if diagnosis.file.is_empty() {
                "system/fvSchemes".to_string()
            } else {
                diagnosis.file.clone()
            };
            let descriptor = SetupDescriptor::File(file);
            let keyword = diagnosis.keyword.clone().unwrap_or_default();
            let set = keyword_retrieve(
                kb,
                &spec.solver,
                &spec.turbulence_model,
                &descriptor,
                &keyword,
                options.n_max,
            )?;
            (
                Strategy::Keyword,
                serde_json::to_string(&set.to_snippets_json()).expect("snippets serialize"),
                set.origin.to_json(),
            )
        }
    };
    Ok(result)
}

/// Diagnose via one LLM call, then apply the advice via a second call
/// that rewrites the implicated file.
#[allow(clippy::too_many_arguments)]
fn correct_file(
    spec: &CaseSpec,
    kb: &KnowledgeBase,
    llm: &mut dyn LlmClientPort,
    case_dir: &Path,
    diagnosis: &ErrorDiagnosis,
    log: &str,
    options: AgentOptions,
    trail: &mut Trail,
) -> Result<(), AgentError> {
    let file = if diagnosis.file.is_empty() {
        "system/controlDict".to_string()
    } else {
        diagnosis.file.clone()
    };
    let (strategy, contents, audit) = retrieve_for_reflect(kb, spec, diagnosis, options)?;
    let current = fs::read_to_string(case_dir.join(&file)).unwrap_or_else(|_| "{}".to_string());
    let advice_prompt = assemble_diagnostic_prompt(spec, &file, log, &current, &contents)?;
    let advice = llm.send(&advice_prompt)?;
    let rewrite_prompt = assemble_rewrite_prompt(&file, &advice, &current, &contents)?;
    let tree = parse_llm_file(llm, &rewrite_prompt, &file)?;
    let out = case_dir.join(&file);
    if let Some(parent) = out.parent() {
        fs::create_dir_all(parent)?;
    }
    let text = serialize_foam(&tree)
        .map_err(|e| AgentError::GenerationUnparseable(format!("{file}: {e}")))?;
    fs::write(&out, text)?;
    trail.push(json!({
        "event": "correction",
        "round": 0, // patched by caller
        "file": file,
        "strategy": strategy.name(),
        "audit": audit,
        "advice": advice,
    }));
    Ok(())
}

/// Run, classify, retrieve, and repair until the executor reports success
/// or the reflection cap is exhausted.
pub fn reflection_loop(
    case_dir: &Path,
    spec: &CaseSpec,
    kb: &KnowledgeBase,
    llm: &mut dyn LlmClientPort,
    executor: &mut dyn ExecutorPort,
    cap: usize,
    options: AgentOptions,
    trail: &mut Trail,
) -> Result<Outcome, AgentError> {
    let mut state = ReflectionState::default();
    let mut runs = 0usize;
    loop {
        runs += 1;
        match executor.run(case_dir)? {
            ExecutionOutcome::Success { steps } => {
                trail.push(json!({
                    "event": "execute",
                    "run": runs,
                    "result": "success",
                    "steps": steps,
                }));
                trail.push(json!({
                    "event": "outcome",
                    "result": "accurate-candidate",
                    "runs": runs,
                }));
                return Ok(Outcome::AccurateCandidate { runs });
            }
            ExecutionOutcome::Failure { log } => {
                if log.is_empty() {
                    return Err(AgentError::ExecutorUnavailable(
                        "failure with empty log".to_string(),
                    ));
                }
                let diagnosis = classify_error(&log, &state);
                trail.push(json!({
                    "event": "execute",
                    "run": runs,
                    "result": "failure",
                    "signature": diagnosis.signature,
                }));
                if state.round >= cap {
                    trail.push(json!({
                        "event": "outcome",
                        "result": "failed",
                        "reason": "ReflectionThresholdExceeded",
                        "rounds": state.round,
                    }));
                    return Ok(Outcome::Failed {
                        reason: "ReflectionThresholdExceeded".to_string(),
                    });
                }
                state.round += 1;
                *state
                    .signature_counts
                    .entry(diagnosis.signature.clone())
                    .or_default() += 1;
                let mut event = json!({
                    "event": "diagnosis",
                    "round": state.round,
                    "diagnosis": diagnosis.to_json(),
                });
                if diagnosis.category == ErrorCategory::Dimensional {
                    event["notes"] =
                        json!(["dimensional error routed to the generic correction path"]);
                }
                trail.push(event);

                match diagnosis.category {
                    ErrorCategory::FileMissing => {
                        let descriptor = SetupDescriptor::File(diagnosis.file.clone());
                        generate_target(spec, kb, llm, case_dir, &descriptor, options, trail)?;
                        patch_round(trail, state.round);
                    }
                    ErrorCategory::Persistent => {
                        if state.escalated.contains(&diagnosis.signature) {
                            trail.push(json!({
                                "event": "outcome",
                                "result": "failed",
                                "reason": "PersistentErrorUnresolved",
                                "rounds": state.round,
                            }));
                            return Ok(Outcome::Failed {
                                reason: "PersistentErrorUnresolved".to_string(),
                            });
                        }
                        state.escalated.push(diagnosis.signature.clone());
                        let descriptor = SetupDescriptor::File(diagnosis.file.clone());
                        generate_target(spec, kb, llm, case_dir, &descriptor, options, trail)?;
                        patch_round(trail, state.round);
                    }
                    _ => {
                        correct_file(
                            spec, kb, llm, case_dir, &diagnosis, &log, options, trail,
                        )?;
                        patch_round(trail, state.round);
                    }
                }
            }
        }
    }
}

/// Stamp the reflection round onto the event just appended for it.
fn patch_round(trail: &mut Trail, round: usize) {
    if let Some(event) = trail.events.last_mut() {
        if let Some(obj) = event.as_object_mut() {
            obj.insert("round".to_string(), json!(round));
        }
    }
}
