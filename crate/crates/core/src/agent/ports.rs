//! The two pluggable ports (LLM client and case executor) and their
//! deterministic mock implementations.

use std::path::Path;

use indexmap::IndexMap;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::foamdict::{parse_dictionary, serialize_foam, value_to_node, ConfigNode, ConfigTree};

use super::AgentError;

/// Minimum number of time steps for an execution to count as a success.
pub const SUCCESS_STEP_BAR: usize = 10;

/// Wire contract: one prompt string in, one response string out.
pub trait LlmClientPort {
    fn send(&mut self, prompt: &str) -> Result<String, AgentError>;
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExecutionOutcome {
    Success { steps: usize },
    Failure { log: String },
}

/// Runs a prepared case directory and reports success (at least
/// [`SUCCESS_STEP_BAR`] steps) or the failure log.
pub trait ExecutorPort {
    fn run(&mut self, case_dir: &Path) -> Result<ExecutionOutcome, AgentError>;
}

/// Replay mock: responses keyed by the SHA-256 of the prompt, with an
/// ordered overflow sequence for prompts not pinned by hash.
#[derive(Debug, Default)]
pub struct ReplayLlm {
    by_hash: IndexMap<String, String>,
    sequence: Vec<String>,
    next: usize,
}

impl ReplayLlm {
    pub fn new(by_hash: IndexMap<String, String>, sequence: Vec<String>) -> Self {
        ReplayLlm { by_hash, sequence, next: 0 }
    }

    /// Load from JSON: `{"by_hash": {<sha256>: response}, "sequence": [...]}`.
    pub fn from_json(value: &Value) -> Result<Self, AgentError> {
        let mut by_hash = IndexMap::new();
        if let Some(map) = value.get("by_hash").and_then(Value::as_object) {
            for (k, v) in map {
                let response = v
                    .as_str()
                    .ok_or_else(|| AgentError::SchemaViolation("by_hash".to_string()))?;
                by_hash.insert(k.clone(), response.to_string());
            }
        }
        let mut sequence = Vec::new();
        if let Some(list) = value.get("sequence").and_then(Value::as_array) {
            for v in list {
                let response = v
                    .as_str()
                    .ok_or_else(|| AgentError::SchemaViolation("sequence".to_string()))?;
                sequence.push(response.to_string());
            }
        }
        Ok(ReplayLlm { by_hash, sequence, next: 0 })
    }

    pub fn prompt_hash(prompt: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(prompt.as_bytes());
        format!("{:x}", hasher.finalize())
    }
}

impl LlmClientPort for ReplayLlm {
    fn send(&mut self, prompt: &str) -> Result<String, AgentError> {
        let hash = Self::prompt_hash(prompt);
        if let Some(response) = self.by_hash.get(&hash) {
            return Ok(response.clone());
        }
        if self.next < self.sequence.len() {
            let response = self.sequence[self.next].clone();
            self.next += 1;
            return Ok(response);
        }
        Err(AgentError::ReplayMiss(hash))
    }
}

/// Context-echo mock: reads the retrieval payload embedded in the prompt
/// and answers with it — the first example for generation prompts, a
/// fixed advice line for diagnostic prompts, and a mechanical merge of
/// the retrieved material for rewrite prompts.
#[derive(Debug, Default)]
pub struct EchoContextLlm;

const INIT_MARKER: &str = "3. Validated Reference Samples or Guidelines: ";
const CORRECTION_MARKER: &str = "Validated Samples or Guidelines for Correction: ";
const FILE_CONTENT_MARKER: &str = "2. Erroneous File Contents: ";

/// The balanced JSON object starting at the first `{` after `marker`.
fn extract_json_after(prompt: &str, marker: &str) -> Option<Value> {
    let at = prompt.find(marker)? + marker.len();
    let rest = &prompt[at..];
    let start = rest.find('{')?;
    let bytes = rest[start..].as_bytes();
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate() {
        if in_string {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    let text = &rest[start..=start + i];
                    return serde_json::from_str(text).ok();
                }
            }
            _ => {}
        }
    }
    None
}

/// The text between the erroneous-file slot and the next numbered slot.
fn extract_file_content(prompt: &str) -> Option<String> {
    let at = prompt.find(FILE_CONTENT_MARKER)? + FILE_CONTENT_MARKER.len();
    let rest = &prompt[at..];
    let end = rest.find("\n  3. ").unwrap_or(rest.len());
    Some(rest[..end].to_string())
}

fn first_item_tree(context: &Value) -> Option<ConfigTree> {
    let items = context.get("items")?.as_array()?;
    let content = items.first()?.get("content")?;
    match value_to_node(content) {
        ConfigNode::Dict(root) => Some(ConfigTree { root }),
        node => {
            let mut root = IndexMap::new();
            root.insert("value".to_string(), node);
            Some(ConfigTree { root })
        }
    }
}

fn template_tree(context: &Value) -> Option<ConfigTree> {
    let entries = context.get("entries")?.as_object()?;
    let mut root: IndexMap<String, ConfigNode> = IndexMap::new();
    for (path, value) in entries {
        let node = value_to_node(value);
        match path.split_once('/') {
            Some((head, tail)) => {
                let parent = root
                    .entry(head.to_string())
                    .or_insert_with(|| ConfigNode::Dict(IndexMap::new()));
                if let ConfigNode::Dict(d) = parent {
                    d.insert(tail.to_string(), node);
                }
            }
            None => {
                root.insert(path.clone(), node);
            }
        }
    }
    Some(ConfigTree { root })
}

fn replace_key(dict: &mut IndexMap<String, ConfigNode>, key: &str, value: &ConfigNode) -> bool {
    if let Some(slot) = dict.get_mut(key) {
        *slot = value.clone();
        return true;
    }
    for node in dict.values_mut() {
        if let ConfigNode::Dict(child) = node {
            if replace_key(child, key, value) {
                return true;
            }
        }
    }
    false
}

fn fenced(tree: &ConfigTree) -> Result<String, AgentError> {
    let body = serialize_foam(tree)
        .map_err(|e| AgentError::LlmUnavailable(format!("echo mock serialization: {e}")))?;
    Ok(format!("```\n{body}```\n"))
}

impl EchoContextLlm {
    fn rewrite(&self, prompt: &str) -> Result<String, AgentError> {
        let content = extract_file_content(prompt).unwrap_or_default();
        let (mut tree, _) = parse_dictionary(&content)
            .map_err(|e| AgentError::LlmUnavailable(format!("echo mock reparse: {e}")))?;
        let Some(context) = extract_json_after(prompt, CORRECTION_MARKER) else {
            return fenced(&tree);
        };
        if let Some(snippet) = context.get("sample_setup_0").and_then(Value::as_object) {
            for (key, value) in snippet {
                let node = value_to_node(value);
                if !replace_key(&mut tree.root, key, &node) {
                    tree.root.insert(key.clone(), node);
                }
            }
        } else if let Some(items) = context.get("items").and_then(Value::as_array) {
            if let Some(first) = items.first() {
                let target = first.get("target").and_then(Value::as_str).unwrap_or_default();
                let example = value_to_node(first.get("content").unwrap_or(&Value::Null));
                if let Some(ConfigNode::Dict(boundary)) = tree.root.get_mut("boundaryField") {
                    for patch in boundary.values_mut() {
                        let matches = matches!(
                            patch,
                            ConfigNode::Dict(d)
                                if d.get("type").and_then(ConfigNode::as_text) == Some(target)
                        );
                        if matches {
                            *patch = example.clone();
                        }
                    }
                }
            }
        } else if let Some(template) = template_tree(&context) {
            for (key, node) in template.root {
                tree.root.insert(key, node);
            }
        }
        fenced(&tree)
    }
}

impl LlmClientPort for EchoContextLlm {
    fn send(&mut self, prompt: &str) -> Result<String, AgentError> {
        if prompt.contains("give advice on correcting the file") {
            return Ok(
                "Apply the first validated sample from the retrieved context to the \
                 implicated entry, leaving all other entries unchanged."
                    .to_string(),
            );
        }
        if prompt.contains("apply the provided correction advice") {
            return self.rewrite(prompt);
        }
        let Some(context) = extract_json_after(prompt, INIT_MARKER) else {
            return Err(AgentError::LlmUnavailable(
                "echo mock found no retrieval payload in the prompt".to_string(),
            ));
        };
        let tree = first_item_tree(&context)
            .or_else(|| template_tree(&context))
            .unwrap_or_else(|| ConfigTree { root: IndexMap::new() });
        fenced(&tree)
    }
}

/// One scripted executor run.
#[derive(Debug, Clone)]
pub struct ScriptedRun {
    pub success: bool,
    pub steps: usize,
    pub log: String,
}

/// Executor mock driven by a fixed script; the `{round}` placeholder in a
/// failure log is replaced with the 1-based run index so scripts can
/// produce fresh signatures. The last entry repeats once the script runs
/// out.
#[derive(Debug, Default)]
pub struct ScriptedExecutor {
    runs: Vec<ScriptedRun>,
    next: usize,
}

impl ScriptedExecutor {
    pub fn new(runs: Vec<ScriptedRun>) -> Self {
        ScriptedExecutor { runs, next: 0 }
    }

    /// Load from JSON: a list of `{"result": "success", "steps": N}` or
    /// `{"result": "failure", "log": "..."}` entries.
    pub fn from_json(value: &Value) -> Result<Self, AgentError> {
        let list = value
            .as_array()
            .ok_or_else(|| AgentError::SchemaViolation("executor script".to_string()))?;
        let mut runs = Vec::new();
        for entry in list {
            match entry.get("result").and_then(Value::as_str) {
                Some("success") => runs.push(ScriptedRun {
                    success: true,
                    steps: entry
                        .get("steps")
                        .and_then(Value::as_u64)
                        .unwrap_or(SUCCESS_STEP_BAR as u64) as usize,
                    log: String::new(),
                }),
                Some("failure") => {
                    let log = entry
                        .get("log")
                        .and_then(Value::as_str)
                        .ok_or_else(|| AgentError::SchemaViolation("executor log".to_string()))?;
                    runs.push(ScriptedRun {
                        success: false,
                        steps: 0,
                        log: log.to_string(),
                    });
                }
                _ => return Err(AgentError::SchemaViolation("executor script".to_string())),
            }
        }
        Ok(ScriptedExecutor { runs, next: 0 })
    }
}

impl ExecutorPort for ScriptedExecutor {
    fn run(&mut self, _case_dir: &Path) -> Result<ExecutionOutcome, AgentError> {
        if self.runs.is_empty() {
            return Err(AgentError::ExecutorUnavailable("empty script".to_string()));
        }
        let index = self.next.min(self.runs.len() - 1);
        let round = self.next + 1;
        self.next += 1;
        let run = &self.runs[index];
        if run.success {
            Ok(ExecutionOutcome::Success { steps: run.steps })
        } else {
            Ok(ExecutionOutcome::Failure {
                log: run.log.replace("{round}", &round.to_string()),
            })
        }
    }
}
