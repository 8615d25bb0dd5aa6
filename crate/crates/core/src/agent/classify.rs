//! Rule-based classification of execution failure logs.

use serde_json::{json, Value};

use super::reflect::ReflectionState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    FileMissing,
    Dimensional,
    Persistent,
    ComplexConfiguration,
}

impl ErrorCategory {
    pub fn name(&self) -> &'static str {
        match self {
            ErrorCategory::FileMissing => "FileMissing",
            ErrorCategory::Dimensional => "Dimensional",
            ErrorCategory::Persistent => "Persistent",
            ErrorCategory::ComplexConfiguration => "ComplexConfiguration",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexSubType {
    SetupFormats,
    IcBcs,
    DiscretizationSchemes,
    LinearSolvers,
}

impl ComplexSubType {
    pub fn name(&self) -> &'static str {
        match self {
            ComplexSubType::SetupFormats => "SetupFormats",
            ComplexSubType::IcBcs => "ICBCs",
            ComplexSubType::DiscretizationSchemes => "DiscretizationSchemes",
            ComplexSubType::LinearSolvers => "LinearSolvers",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDiagnosis {
    pub category: ErrorCategory,
    pub sub_type: Option<ComplexSubType>,
    pub file: String,
    pub keyword: Option<String>,
    pub signature: String,
    pub notes: Vec<String>,
}

impl ErrorDiagnosis {
    pub fn to_json(&self) -> Value {
        json!({
            "category": self.category.name(),
            "sub_type": self.sub_type.map(|s| s.name()),
            "file": self.file,
            "keyword": self.keyword,
            "signature": self.signature,
            "notes": self.notes,
        })
    }
}

/// The line a failure is summarized by: the first line mentioning an
/// error, else the first non-empty line.
fn error_line(log: &str) -> &str {
    log.lines()
        .find(|l| l.to_ascii_lowercase().contains("error"))
        .or_else(|| log.lines().find(|l| !l.trim().is_empty()))
        .unwrap_or("")
}

/// Normalized log fingerprint: the error line with every digit masked.
pub fn error_signature(log: &str) -> String {
    error_line(log)
        .trim()
        .chars()
        .map(|c| if c.is_ascii_digit() { '#' } else { c })
        .collect()
}

/// First token in the log that looks like a case-relative file path.
fn implicated_file(log: &str) -> Option<String> {
    for token in log.split_whitespace() {
        let token = token.trim_matches(|c: char| "\"':;,()".contains(c));
        for prefix in ["0/", "constant/", "system/"] {
            if let Some(at) = token.find(prefix) {
                return Some(token[at..].to_string());
            }
        }
    }
    None
}

/// The quoted token nearest the error line, else the first parenthesized
/// token (a scheme-like keyword such as `div(phi,epsilon)`).
fn extract_keyword(log: &str) -> Option<String> {
    let line = error_line(log);
    for source in [line, log] {
        let mut rest = source;
        while let Some(open) = rest.find('"') {
            let tail = &rest[open + 1..];
            if let Some(close) = tail.find('"') {
                let token = &tail[..close];
                if !token.is_empty() && !token.contains('\n') {
                    return Some(token.to_string());
                }
                rest = &tail[close + 1..];
            } else {
                break;
            }
        }
    }
    for source in [line, log] {
        for token in source.split_whitespace() {
            let token = token.trim_matches(|c: char| "\"':;,".contains(c));
            if token.contains('(') && token.ends_with(')') && !token.starts_with('(') {
                return Some(token.to_string());
            }
        }
    }
    None
}

fn complex_sub_type(log: &str) -> (ComplexSubType, Vec<String>) {
    let lower = log.to_ascii_lowercase();
    if log.contains("FoamFile") || lower.contains("expected") {
        return (ComplexSubType::SetupFormats, Vec::new());
    }
    if log.contains("0/") || lower.contains("boundaryfield") || lower.contains("patch") {
        return (ComplexSubType::IcBcs, Vec::new());
    }
    if log.contains("div(")
        || log.contains("grad(")
        || log.contains("laplacian(")
        || log.contains("fvSchemes")
    {
        return (ComplexSubType::DiscretizationSchemes, Vec::new());
    }
    if log.contains("fvSolution")
        || lower.contains("solver")
        || lower.contains("tolerance")
        || lower.contains("reltol")
        || lower.contains("preconditioner")
        || lower.contains("relaxation")
    {
        return (ComplexSubType::LinearSolvers, Vec::new());
    }
    (
        ComplexSubType::SetupFormats,
        vec!["unclassifiable log defaulted to SetupFormats".to_string()],
    )
}

/// Classify a failure log with a first-match rule table: missing files,
/// dimension mismatches, signatures seen three times, then the complex
/// configuration sub-types.
pub fn classify_error(log: &str, state: &ReflectionState) -> ErrorDiagnosis {
    let signature = error_signature(log);
    let lower = log.to_ascii_lowercase();
    let file = implicated_file(log).unwrap_or_default();
    let keyword = extract_keyword(log);

    if lower.contains("cannot find file") || lower.contains("cannot open file") {
        return ErrorDiagnosis {
            category: ErrorCategory::FileMissing,
            sub_type: None,
            file,
            keyword,
            signature,
            notes: Vec::new(),
        };
    }
    if lower.contains("different dimensions")
        || (lower.contains("dimension") && (lower.contains("mismatch") || lower.contains("inconsistent")))
    {
        return ErrorDiagnosis {
            category: ErrorCategory::Dimensional,
            sub_type: None,
            file,
            keyword,
            signature,
            notes: Vec::new(),
        };
    }
    if state.signature_counts.get(&signature).copied().unwrap_or(0) + 1 >= 3 {
        return ErrorDiagnosis {
            category: ErrorCategory::Persistent,
            sub_type: None,
            file,
            keyword,
            signature,
            notes: Vec::new(),
        };
    }
    let (sub_type, notes) = complex_sub_type(log);
    ErrorDiagnosis {
        category: ErrorCategory::ComplexConfiguration,
        sub_type: Some(sub_type),
        file,
        keyword,
        signature,
        notes,
    }
}
