//! Stage 2: knowledge-grounded generation of the case files.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use crate::foamdict::{parse_dictionary, serialize_foam, ConfigTree};
use crate::kb::model::KnowledgeBase;
use crate::retrieve::{
    all_model_retrieve, cascading_fallback, dispatch, multi_source_retrieve, template_retrieve,
    DispatchTask, SetupDescriptor, Strategy,
};

use super::ports::LlmClientPort;
use super::prompts::{assemble_init_prompt, strip_code_fences};
use super::spec::CaseSpec;
use super::trail::Trail;
use super::AgentError;

/// Tuning knobs shared by generation and reflection.
#[derive(Debug, Clone, Copy)]
pub struct AgentOptions {
    pub n_max: usize,
    pub tau: f64,
}

impl Default for AgentOptions {
    fn default() -> Self {
        AgentOptions {
            n_max: crate::retrieve::DEFAULT_N_MAX,
            tau: crate::retrieve::DEFAULT_TAU,
        }
    }
}

/// The `{header}` slot: the FoamFile block the generated file must carry.
pub fn header_for(path: &str) -> String {
    let object = path.rsplit('/').next().unwrap_or(path);
    let class = if path.starts_with("0/") {
        if object == "U" {
            "volVectorField"
        } else {
            "volScalarField"
        }
    } else {
        "dictionary"
    };
    format!("FoamFile {{ version 2.0; format ascii; class {class}; object {object}; }}")
}

/// Run the dispatched retrieval strategy for an initialization target and
/// serialize the result for prompt injection.
pub(crate) fn retrieve_for_init(
    kb: &KnowledgeBase,
    spec: &CaseSpec,
    descriptor: &SetupDescriptor,
    options: AgentOptions,
) -> Result<(Strategy, String, Value, bool), AgentError> {
    let strategy = dispatch(&DispatchTask::Init(descriptor.clone()))?;
    let (contents, audit, empty) = match strategy {
        Strategy::Cascading => {
            let set = cascading_fallback(
                kb,
                &spec.solver,
                &spec.turbulence_model,
                descriptor,
                options.n_max,
            )?;
            let empty = set.items.is_empty();
            (
                serde_json::to_string(&set.to_json()).expect("context serializes"),
                set.origin.to_json(),
                empty,
            )
        }
        Strategy::AllModel => {
            let set = all_model_retrieve(
                kb,
                &spec.solver,
                &spec.turbulence_model,
                descriptor,
                options.n_max,
            )?;
            let empty = set.items.is_empty();
            (
                serde_json::to_string(&set.to_json()).expect("context serializes"),
                set.origin.to_json(),
                empty,
            )
        }
        Strategy::Template => {
            let template = template_retrieve(
                kb,
                &spec.solver,
                &spec.turbulence_model,
                descriptor,
                options.tau,
            )?;
            (
                serde_json::to_string(&template.to_json()).expect("template serializes"),
                template.origin.to_json(),
                false,
            )
        }
        Strategy::MultiSource => {
            let set = multi_source_retrieve(
                kb,
                &spec.solver,
                &spec.turbulence_model,
                descriptor.target(),
                options.n_max,
            )?;
            let empty = set.items.is_empty() && set.guidance.is_empty();
            (
                serde_json::to_string(&set.to_json()).expect("context serializes"),
                set.origin.to_json(),
                empty,
            )
        }
        Strategy::Keyword => {
            return Err(AgentError::Retrieve(
                crate::retrieve::RetrieveError::UnroutableTarget(descriptor.render()),
            ))
        }
    };
    let contents = if empty { "{}".to_string() } else { contents };
    Ok((strategy, contents, audit, empty))
}

/// Send a prompt and parse the response as a dictionary file, re-asking
/// once with the parse error appended before giving up.
pub(crate) fn parse_llm_file(
    llm: &mut dyn LlmClientPort,
    prompt: &str,
    file_name: &str,
) -> Result<ConfigTree, AgentError> {
    let response = llm.send(prompt)?;
    let body = strip_code_fences(&response);
    match parse_dictionary(&body) {
        Ok((tree, _)) => Ok(tree),
        Err(parse_error) => {
            let retry = format!(
                "{prompt}\nPREVIOUS_ATTEMPT_ERROR:\n \"The previous response failed to parse \
                 ({parse_error}). Return only the corrected complete file content.\"\n"
            );
            let response = llm.send(&retry)?;
            let body = strip_code_fences(&response);
            parse_dictionary(&body)
                .map(|(tree, _)| tree)
                .map_err(|_| AgentError::GenerationUnparseable(file_name.to_string()))
        }
    }
}

/// Generate one target file: dispatch, retrieve, prompt, parse, write.
pub(crate) fn generate_target(
    spec: &CaseSpec,
    kb: &KnowledgeBase,
    llm: &mut dyn LlmClientPort,
    case_dir: &Path,
    descriptor: &SetupDescriptor,
    options: AgentOptions,
    trail: &mut Trail,
) -> Result<(), AgentError> {
    let SetupDescriptor::File(path) = descriptor else {
        return Err(AgentError::Retrieve(
            crate::retrieve::RetrieveError::UnroutableTarget(descriptor.render()),
        ));
    };
    let (strategy, contents, audit, empty) = retrieve_for_init(kb, spec, descriptor, options)?;
    let prompt = assemble_init_prompt(spec, path, &contents, &header_for(path))?;
    let tree = parse_llm_file(llm, &prompt, path)?;
    let out = case_dir.join(path);
    if let Some(parent) = out.parent() {
        fs::create_dir_all(parent)?;
    }
    let text = serialize_foam(&tree)
        .map_err(|e| AgentError::GenerationUnparseable(format!("{path}: {e}")))?;
    fs::write(&out, text)?;
    let mut event = json!({
        "event": "generate",
        "file": path,
        "strategy": strategy.name(),
        "audit": audit,
    });
    if empty {
        event["notes"] = json!(["retrieval returned no context"]);
    }
    trail.push(event);
    Ok(())
}

/// Generate every target file of the specification, in order, into
/// `case_dir`, returning the audit trail of the run.
pub fn generate_case(
    spec: &CaseSpec,
    kb: &KnowledgeBase,
    llm: &mut dyn LlmClientPort,
    case_dir: &Path,
    options: AgentOptions,
) -> Result<Trail, AgentError> {
    let mut trail = Trail::default();
    fs::create_dir_all(case_dir)?;
    for descriptor in &spec.target_files {
        generate_target(spec, kb, llm, case_dir, descriptor, options, &mut trail)?;
    }
    Ok(trail)
}
