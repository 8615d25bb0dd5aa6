//! Agent orchestration: case specification intake, knowledge-grounded
//! case-file generation, execution, error classification, and the bounded
//! reflection loop over pluggable LLM and executor ports.

pub mod classify;
pub mod generate;
pub mod ports;
pub mod prompts;
pub mod reflect;
pub mod spec;
pub mod trail;

use thiserror::Error;

pub use classify::{classify_error, ComplexSubType, ErrorCategory, ErrorDiagnosis};
pub use generate::{generate_case, AgentOptions};
pub use ports::{
    EchoContextLlm, ExecutionOutcome, ExecutorPort, LlmClientPort, ReplayLlm, ScriptedExecutor,
};
pub use prompts::{
    assemble_diagnostic_prompt, assemble_init_prompt, assemble_rewrite_prompt, strip_code_fences,
};
pub use reflect::{reflection_loop, Outcome, ReflectionState, DEFAULT_REFLECTION_CAP};
pub use spec::{load_case_spec, CaseSpec};
pub use trail::Trail;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("case specification violates the schema at `{0}`")]
    SchemaViolation(String),
    #[error("unknown solver `{0}`")]
    UnknownSolver(String),
    #[error("prompt slot `{0}` has no value")]
    MissingSlot(String),
    #[error("response for `{0}` is not a parseable dictionary after one re-ask")]
    GenerationUnparseable(String),
    #[error("executor unavailable: {0}")]
    ExecutorUnavailable(String),
    #[error("LLM client unavailable: {0}")]
    LlmUnavailable(String),
    #[error("no replayed response for prompt {0}")]
    ReplayMiss(String),
    #[error(transparent)]
    Retrieve(#[from] crate::retrieve::RetrieveError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}
