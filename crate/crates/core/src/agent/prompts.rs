//! Structured instruction protocols: rigid prompt templates with dynamic
//! constraint slots.

use super::spec::CaseSpec;
use super::AgentError;

fn slot(name: &str, value: &str) -> Result<String, AgentError> {
    if value.is_empty() {
        return Err(AgentError::MissingSlot(name.to_string()));
    }
    Ok(value.to_string())
}

/// The generation protocol: four fixed sections, with the physical
/// constraints and retrieved context injected as slots.
pub fn assemble_init_prompt(
    spec: &CaseSpec,
    file_name: &str,
    retrieval_contents: &str,
    header: &str,
) -> Result<String, AgentError> {
    let file_name = slot("file_name", file_name)?;
    let case_ic_bc = slot("case_ic_bc", &spec.ic_bc_json())?;
    let case_physical_properties =
        slot("case_physical_properties", &spec.physical_properties_json())?;
    let retrieval_contents = slot("retrieval_contents", retrieval_contents)?;
    let header = slot("header", header)?;
    Ok(format!(
        r#"SYSTEM_DEFINITION:
 "You are an Expert Computational Fluid Dynamics Engineer specializing in OpenFOAM. Your objective is to generate a syntactically correct and physically valid dictionary for the target file: '{file_name}'."

SYMBOLIC_CONTEXT_INJECTION:
 "The Symbolic Context Engine has extracted the following constraints. You must adhere to these rigid physical parameters:
  1. Initial & Boundary Conditions: {case_ic_bc}
  2. Physical Properties: {case_physical_properties}
  3. Validated Reference Samples or Guidelines: {retrieval_contents}"

INFERENCE_STRATEGY:
 "Follow this deterministic logic flow:
 1. Analyze Physical Relationships: Examine the boundary condition of fields (like U, p, T) and physical features to understand the simulation's physics.
 2. Consult Reference Samples: Use the provided reference files as a guide. Analyze common patterns, similar physical setups (e.g., RANS vs. LES, compressible vs. incompressible, solver).
 3. Make Logical Selections: Based on your analysis, determine the most suitable setups type."

OUTPUT_CONSTRAINTS:
 "- The final answer must properly include the header contents: {header}.
  - Output ONLY the complete file content inside a code block.
  - Do NOT include standard C++ decorated comments (e.g., the block starting with `/*-----...`).
  - Do NOT add explanations or reasoning text."
"#
    ))
}

/// The diagnostic protocol: the failure log and the erroneous file,
/// re-anchored to the original physical constraints and the retrieved
/// correction material.
pub fn assemble_diagnostic_prompt(
    spec: &CaseSpec,
    file_name: &str,
    running_error: &str,
    file_content: &str,
    retrieval_contents: &str,
) -> Result<String, AgentError> {
    let file_name = slot("file_name", file_name)?;
    let running_error = slot("running_error", running_error)?;
    let file_content = slot("file_content", file_content)?;
    let case_ic_bc = slot("case_ic_bc", &spec.ic_bc_json())?;
    let case_physical_properties =
        slot("case_physical_properties", &spec.physical_properties_json())?;
    let retrieval_contents = slot("retrieval_contents", retrieval_contents)?;
    Ok(format!(
        r#"SYSTEM_DEFINITION:
 "You are an Expert Computational Fluid Dynamics Engineer specializing in OpenFOAM. Your objective is to analyze the provided OpenFOAM Runtime Error and erroneous file contents, and give advice on correcting the file {file_name}."

SYMBOLIC_CONTEXT_INJECTION:
 "The Symbolic Context Engine has extracted the following constraints. You must adhere to these rigid physical parameters:
  1. Case Running Error: {running_error}
  2. Erroneous File Contents: {file_content}
  3. Initial & Boundary Conditions: {case_ic_bc}
  4. Physical Properties: {case_physical_properties}
  5. Validated Samples or Guidelines for Correction: {retrieval_contents}"

INFERENCE_STRATEGY:
 "Follow this deterministic logic flow:
 1. Provide a step-by-step fix. Ensure the advice addresses the error's technical cause. The advice must be a string.
 2. If the advice involves setting new values, the new values must be consistent with those in the Initial & Boundary Conditions and Physical Properties."

OUTPUT_CONSTRAINTS:
 " Absolutely AVOID any elements including but not limited to:
- Markdown code block markers (``` or ''')
- Extra comments or explanations
- Unnecessary empty lines or indentation"
"#
    ))
}

/// The secondary protocol that applies generated advice: rewrite the
/// implicated file in full, sharing the diagnostic protocol's output
/// constraints.
pub fn assemble_rewrite_prompt(
    file_name: &str,
    advice: &str,
    file_content: &str,
    retrieval_contents: &str,
) -> Result<String, AgentError> {
    let file_name = slot("file_name", file_name)?;
    let advice = slot("advice", advice)?;
    let file_content = slot("file_content", file_content)?;
    let retrieval_contents = slot("retrieval_contents", retrieval_contents)?;
    Ok(format!(
        r#"SYSTEM_DEFINITION:
 "You are an Expert Computational Fluid Dynamics Engineer specializing in OpenFOAM. Your objective is to apply the provided correction advice and rewrite the complete file {file_name}."

SYMBOLIC_CONTEXT_INJECTION:
 "The Symbolic Context Engine has extracted the following constraints. You must adhere to these rigid physical parameters:
  1. Correction Advice: {advice}
  2. Erroneous File Contents: {file_content}
  3. Validated Samples or Guidelines for Correction: {retrieval_contents}"

INFERENCE_STRATEGY:
 "Follow this deterministic logic flow:
 1. Rewrite the entire file, applying the correction advice exactly once.
 2. Preserve every entry the advice does not change."

OUTPUT_CONSTRAINTS:
 " Absolutely AVOID any elements including but not limited to:
- Markdown code block markers (``` or ''')
- Extra comments or explanations
- Unnecessary empty lines or indentation"
"#
    ))
}

/// Strip a single leading and trailing triple-backtick fence (with an
/// optional language tag) from an LLM response.
pub fn strip_code_fences(response: &str) -> String {
    let trimmed = response.trim();
    let Some(rest) = trimmed.strip_prefix("```") else {
        return format!("{trimmed}\n");
    };
    let rest = match rest.split_once('\n') {
        Some((_lang, body)) => body,
        None => rest,
    };
    let body = rest.strip_suffix("```").unwrap_or(rest);
    body.trim_end().to_string() + "\n"
}
