//! Command-line front end: build knowledge bases, query the retrievers,
//! run the agent against pluggable ports, and report on audit trails.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command as Subprocess, ExitCode, Stdio};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use phynikce_core::agent::{
    generate_case, load_case_spec, reflection_loop, AgentError, AgentOptions, EchoContextLlm,
    ExecutionOutcome, ExecutorPort, LlmClientPort, Outcome, ReplayLlm, ScriptedExecutor,
    DEFAULT_REFLECTION_CAP,
};
use phynikce_core::kb::build::{build_kb, load_guidance_dir};
use phynikce_core::kb::model::{KbError, KnowledgeBase};
use phynikce_core::retrieve::{
    all_model_retrieve, cascading_fallback, dispatch, keyword_retrieve, multi_source_retrieve,
    template_retrieve, DispatchTask, RetrieveError, SetupDescriptor, Strategy, DEFAULT_N_MAX,
    DEFAULT_TAU,
};

const EXIT_OK: u8 = 0;
const EXIT_ENVIRONMENT: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CASE_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "phynikce", version, about = "Physics-informed knowledge engine for OpenFOAM case setup")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Auto,
    Cascade,
    Allmodel,
    Template,
    Multisource,
    Keyword,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a tutorial corpus and write the knowledge-base JSON.
    BuildKb {
        /// Root directory of the tutorial cases.
        #[arg(long)]
        tutorials: PathBuf,
        /// Directory of boundary-condition guidance documents (*.json).
        #[arg(long)]
        guidance: Option<PathBuf>,
        /// Output path for the knowledge-base JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one retrieval strategy and print the result with its audit record.
    Query {
        /// Knowledge-base JSON (defaults to $PHYNIKCE_KB).
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long)]
        solver: String,
        #[arg(long)]
        turbulence: String,
        /// Case-relative file target, e.g. system/fvSolution.
        #[arg(long, conflicts_with = "boundary")]
        file: Option<String>,
        /// Boundary-condition type target, e.g. totalPressure.
        #[arg(long)]
        boundary: Option<String>,
        #[arg(long)]
        keyword: Option<String>,
        #[arg(long, value_enum, default_value = "auto")]
        strategy: StrategyArg,
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: usize,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
    },
    /// Generate a case from a specification and run the reflection loop.
    Run {
        /// Knowledge-base JSON (defaults to $PHYNIKCE_KB).
        #[arg(long)]
        kb: Option<PathBuf>,
        /// Case-specification JSON.
        #[arg(long)]
        spec: PathBuf,
        /// Directory the case files and trail.jsonl are written into.
        #[arg(long)]
        workdir: PathBuf,
        /// LLM backend: `echo`, `replay:FILE`, or `cmd:PROGRAM`.
        #[arg(long, default_value = "echo")]
        llm: String,
        /// Executor backend: `script:FILE` or `cmd:PROGRAM`.
        #[arg(long)]
        executor: String,
        #[arg(long, default_value_t = DEFAULT_REFLECTION_CAP)]
        max_reflections: usize,
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: usize,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
    },
    /// Summarize an audit trail as one decision line per file touched.
    Audit {
        /// Trail JSONL file written by `run`.
        #[arg(long)]
        trail: PathBuf,
        /// Only report entries touching this key, file, or keyword.
        #[arg(long)]
        param: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::BuildKb { tutorials, guidance, out } => cmd_build_kb(&tutorials, guidance.as_deref(), &out),
        Command::Query {
            kb,
            solver,
            turbulence,
            file,
            boundary,
            keyword,
            strategy,
            n_max,
            tau,
        } => cmd_query(kb, &solver, &turbulence, file, boundary, keyword, strategy, n_max, tau),
        Command::Run {
            kb,
            spec,
            workdir,
            llm,
            executor,
            max_reflections,
            n_max,
            tau,
        } => cmd_run(kb, &spec, &workdir, &llm, &executor, max_reflections, n_max, tau),
        Command::Audit { trail, param } => cmd_audit(&trail, param.as_deref()),
    };
    ExitCode::from(code)
}

fn fail(code: u8, message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    code
}

fn cmd_build_kb(tutorials: &Path, guidance: Option<&Path>, out: &Path) -> u8 {
    let guidance_docs = match guidance {
        Some(dir) => match load_guidance_dir(dir) {
            Ok(docs) => docs,
            Err(e) => return fail(EXIT_INPUT, e),
        },
        None => Vec::new(),
    };
    let (kb, report) = match build_kb(tutorials, &guidance_docs) {
        Ok(built) => built,
        Err(KbError::EmptyCorpus) => return fail(EXIT_INPUT, KbError::EmptyCorpus),
        Err(e) => return fail(EXIT_INPUT, e),
    };
    if let Err(e) = fs::write(out, kb.to_json()) {
        return fail(EXIT_ENVIRONMENT, format!("{}: {e}", out.display()));
    }
    println!("{} cases indexed", report.case_count);
    for excluded in &report.excluded_files {
        println!("excluded: {excluded}");
    }
    for (case, reason) in &report.skipped_cases {
        println!("skipped: {case} ({reason})");
    }
    EXIT_OK
}

fn resolve_kb(flag: Option<PathBuf>) -> Result<PathBuf, u8> {
    if let Some(path) = flag {
        return Ok(path);
    }
    match std::env::var_os("PHYNIKCE_KB") {
        Some(path) => Ok(PathBuf::from(path)),
        None => Err(fail(EXIT_INPUT, "no --kb flag and PHYNIKCE_KB is unset")),
    }
}

fn load_kb(flag: Option<PathBuf>) -> Result<KnowledgeBase, u8> {
    let path = resolve_kb(flag)?;
    let text = fs::read_to_string(&path)
        .map_err(|e| fail(EXIT_ENVIRONMENT, format!("{}: {e}", path.display())))?;
    KnowledgeBase::from_json(&text)
        .map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn retrieve_exit(e: RetrieveError) -> u8 {
    match e {
        RetrieveError::UnknownSolver(_) | RetrieveError::UnroutableTarget(_) => {
            fail(EXIT_INPUT, e)
        }
        other => fail(EXIT_INPUT, other),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_query(
    kb_flag: Option<PathBuf>,
    solver: &str,
    turbulence: &str,
    file: Option<String>,
    boundary: Option<String>,
    keyword: Option<String>,
    strategy: StrategyArg,
    n_max: usize,
    tau: f64,
) -> u8 {
    let kb = match load_kb(kb_flag) {
        Ok(kb) => kb,
        Err(code) => return code,
    };
    let descriptor = match (&file, &boundary) {
        (Some(path), None) => SetupDescriptor::File(path.clone()),
        (None, Some(b)) => SetupDescriptor::BoundaryType(b.clone()),
        _ => return fail(EXIT_INPUT, "exactly one of --file or --boundary is required"),
    };
    let strategy = match strategy {
        StrategyArg::Auto => match dispatch(&DispatchTask::Init(descriptor.clone())) {
            Ok(s) => s,
            Err(e) => return retrieve_exit(e),
        },
        StrategyArg::Cascade => Strategy::Cascading,
        StrategyArg::Allmodel => Strategy::AllModel,
        StrategyArg::Template => Strategy::Template,
        StrategyArg::Multisource => Strategy::MultiSource,
        StrategyArg::Keyword => Strategy::Keyword,
    };
    let output = match strategy {
        Strategy::Cascading => cascading_fallback(&kb, solver, turbulence, &descriptor, n_max)
            .map(|set| set.to_json()),
        Strategy::AllModel => all_model_retrieve(&kb, solver, turbulence, &descriptor, n_max)
            .map(|set| set.to_json()),
        Strategy::Template => {
            match template_retrieve(&kb, solver, turbulence, &descriptor, tau) {
                Ok(template) => Ok(template.to_json()),
                // an empty template is informative, not an input error
                Err(e @ (RetrieveError::NoMatchingCases(_) | RetrieveError::EmptyTemplate)) => {
                    Ok(json!({"entries": {}, "provenance": {}, "note": e.to_string()}))
                }
                Err(e) => Err(e),
            }
        }
        Strategy::MultiSource => {
            multi_source_retrieve(&kb, solver, turbulence, descriptor.target(), n_max)
                .map(|set| set.to_json())
        }
        Strategy::Keyword => {
            let Some(keyword) = keyword else {
                return fail(EXIT_INPUT, "--strategy keyword requires --keyword");
            };
            keyword_retrieve(&kb, solver, turbulence, &descriptor, &keyword, n_max).map(|set| {
                json!({
                    "snippets": set.to_snippets_json(),
                    "audit": set.origin.to_json(),
                })
            })
        }
    };
    match output {
        Ok(value) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("query output serializes"));
            EXIT_OK
        }
        Err(e) => retrieve_exit(e),
    }
}

/// LLM backend that pipes the prompt to a subprocess on stdin and returns
/// its stdout.
struct CommandLlm {
    program: String,
}

impl LlmClientPort for CommandLlm {
    fn send(&mut self, prompt: &str) -> Result<String, AgentError> {
        let mut child = Subprocess::new("sh")
            .arg("-c")
            .arg(&self.program)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| AgentError::LlmUnavailable(format!("{}: {e}", self.program)))?;
        child
            .stdin
            .as_mut()
            .expect("stdin piped")
            .write_all(prompt.as_bytes())
            .map_err(|e| AgentError::LlmUnavailable(e.to_string()))?;
        let output = child
            .wait_with_output()
            .map_err(|e| AgentError::LlmUnavailable(e.to_string()))?;
        if !output.status.success() {
            return Err(AgentError::LlmUnavailable(format!(
                "{} exited with {}",
                self.program, output.status
            )));
        }
        String::from_utf8(output.stdout).map_err(|e| AgentError::LlmUnavailable(e.to_string()))
    }
}

/// Executor backend that runs a subprocess with the case directory as its
/// argument and reads a JSON outcome from stdout.
struct CommandExecutor {
    program: String,
}

impl ExecutorPort for CommandExecutor {
    fn run(&mut self, case_dir: &Path) -> Result<ExecutionOutcome, AgentError> {
        let output = Subprocess::new("sh")
            .arg("-c")
            .arg(format!("{} \"$1\"", self.program))
            .arg("phynikce-executor")
            .arg(case_dir)
            .output()
            .map_err(|e| AgentError::ExecutorUnavailable(format!("{}: {e}", self.program)))?;
        let stdout = String::from_utf8_lossy(&output.stdout).to_string();
        if let Ok(value) = serde_json::from_str::<Value>(&stdout) {
            match value.get("result").and_then(Value::as_str) {
                Some("success") => {
                    let steps = value.get("steps").and_then(Value::as_u64).unwrap_or(0);
                    return Ok(ExecutionOutcome::Success { steps: steps as usize });
                }
                Some("failure") => {
                    let log = value
                        .get("log")
                        .and_then(Value::as_str)
                        .unwrap_or_default()
                        .to_string();
                    return Ok(ExecutionOutcome::Failure { log });
                }
                _ => {}
            }
        }
        if output.status.success() {
            Ok(ExecutionOutcome::Success {
                steps: phynikce_core::agent::ports::SUCCESS_STEP_BAR,
            })
        } else {
            let mut log = stdout;
            log.push_str(&String::from_utf8_lossy(&output.stderr));
            Ok(ExecutionOutcome::Failure { log })
        }
    }
}

fn make_llm(backend: &str) -> Result<Box<dyn LlmClientPort>, u8> {
    if backend == "echo" {
        return Ok(Box::new(EchoContextLlm));
    }
    if let Some(path) = backend.strip_prefix("replay:") {
        let text = fs::read_to_string(path)
            .map_err(|e| fail(EXIT_ENVIRONMENT, format!("{path}: {e}")))?;
        let doc: Value = serde_json::from_str(&text)
            .map_err(|e| fail(EXIT_ENVIRONMENT, format!("{path}: {e}")))?;
        let llm = ReplayLlm::from_json(&doc)
            .map_err(|e| fail(EXIT_ENVIRONMENT, format!("{path}: {e}")))?;
        return Ok(Box::new(llm));
    }
    if let Some(program) = backend.strip_prefix("cmd:") {
        return Ok(Box::new(CommandLlm { program: program.to_string() }));
    }
    Err(fail(
        EXIT_ENVIRONMENT,
        format!("unknown LLM backend `{backend}` (expected echo, replay:FILE, or cmd:PROGRAM)"),
    ))
}

fn make_executor(backend: &str) -> Result<Box<dyn ExecutorPort>, u8> {
    if let Some(path) = backend.strip_prefix("script:") {
        let text = fs::read_to_string(path)
            .map_err(|e| fail(EXIT_ENVIRONMENT, format!("{path}: {e}")))?;
        let doc: Value = serde_json::from_str(&text)
            .map_err(|e| fail(EXIT_ENVIRONMENT, format!("{path}: {e}")))?;
        let executor = ScriptedExecutor::from_json(&doc)
            .map_err(|e| fail(EXIT_ENVIRONMENT, format!("{path}: {e}")))?;
        return Ok(Box::new(executor));
    }
    if let Some(program) = backend.strip_prefix("cmd:") {
        return Ok(Box::new(CommandExecutor { program: program.to_string() }));
    }
    Err(fail(
        EXIT_ENVIRONMENT,
        format!("unknown executor backend `{backend}` (expected script:FILE or cmd:PROGRAM)"),
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    kb_flag: Option<PathBuf>,
    spec_path: &Path,
    workdir: &Path,
    llm_backend: &str,
    executor_backend: &str,
    max_reflections: usize,
    n_max: usize,
    tau: f64,
) -> u8 {
    let kb = match load_kb(kb_flag) {
        Ok(kb) => kb,
        Err(code) => return code,
    };
    let spec_text = match fs::read_to_string(spec_path) {
        Ok(text) => text,
        Err(e) => return fail(EXIT_ENVIRONMENT, format!("{}: {e}", spec_path.display())),
    };
    let spec_doc: Value = match serde_json::from_str(&spec_text) {
        Ok(doc) => doc,
        Err(e) => return fail(EXIT_INPUT, format!("{}: {e}", spec_path.display())),
    };
    let spec = match load_case_spec(&spec_doc) {
        Ok(spec) => spec,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let mut llm = match make_llm(llm_backend) {
        Ok(llm) => llm,
        Err(code) => return code,
    };
    let mut executor = match make_executor(executor_backend) {
        Ok(executor) => executor,
        Err(code) => return code,
    };
    let options = AgentOptions { n_max, tau };
    let mut trail = match generate_case(&spec, &kb, llm.as_mut(), workdir, options) {
        Ok(trail) => trail,
        Err(e) => return fail(EXIT_ENVIRONMENT, e),
    };
    let outcome = match reflection_loop(
        workdir,
        &spec,
        &kb,
        llm.as_mut(),
        executor.as_mut(),
        max_reflections,
        options,
        &mut trail,
    ) {
        Ok(outcome) => outcome,
        Err(e) => return fail(EXIT_ENVIRONMENT, e),
    };
    if let Err(e) = trail.write(&workdir.join("trail.jsonl")) {
        return fail(EXIT_ENVIRONMENT, e);
    }
    match outcome {
        Outcome::AccurateCandidate { runs } => {
            println!("accurate-candidate after {runs} run(s)");
            EXIT_OK
        }
        Outcome::Failed { reason } => {
            println!("failed: {reason}");
            EXIT_CASE_FAILED
        }
    }
}

fn level_text(audit: &Value) -> String {
    match &audit["winning_level"] {
        Value::Number(n) => format!("level {n}"),
        _ => "no winning level".to_string(),
    }
}

fn sources_text(audit: &Value) -> String {
    let ids: Vec<&str> = audit["result_case_ids"]
        .as_array()
        .map(|a| a.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    if ids.is_empty() {
        "no source cases".to_string()
    } else {
        format!("from [{}]", ids.join(", "))
    }
}

fn cmd_audit(trail_path: &Path, param: Option<&str>) -> u8 {
    let text = match fs::read_to_string(trail_path) {
        Ok(text) => text,
        Err(e) => return fail(EXIT_ENVIRONMENT, format!("{}: {e}", trail_path.display())),
    };
    let mut events = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Value>(line) {
            Ok(event) => events.push(event),
            Err(e) => {
                return fail(EXIT_INPUT, format!("malformed trail line {}: {e}", index + 1))
            }
        }
    }
    for event in &events {
        if let Some(key) = param {
            let rendered = serde_json::to_string(event).expect("trail event serializes");
            if !rendered.contains(key) {
                continue;
            }
        }
        match event["event"].as_str() {
            Some("generate") => println!(
                "generated {} via {} ({}, {})",
                event["file"].as_str().unwrap_or("?"),
                event["strategy"].as_str().unwrap_or("?"),
                level_text(&event["audit"]),
                sources_text(&event["audit"]),
            ),
            Some("correction") => println!(
                "corrected {} in round {} via {} ({}, {})",
                event["file"].as_str().unwrap_or("?"),
                event["round"],
                event["strategy"].as_str().unwrap_or("?"),
                level_text(&event["audit"]),
                sources_text(&event["audit"]),
            ),
            Some("outcome") => {
                if param.is_none() {
                    match event["result"].as_str() {
                        Some("accurate-candidate") => {
                            println!("outcome: accurate-candidate after {} run(s)", event["runs"])
                        }
                        _ => println!(
                            "outcome: failed ({})",
                            event["reason"].as_str().unwrap_or("?")
                        ),
                    }
                }
            }
            _ => {}
        }
    }
    EXIT_OK
}
