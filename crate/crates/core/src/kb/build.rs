//! Stage 0: corpus ingestion and knowledge-base construction.

use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde_json::Value;
use walkdir::WalkDir;

use crate::foamdict::{parse_dictionary, ConfigNode, ConfigTree};

use super::features::{identify_features, infer_compressibility};
use super::guidance::ingest_guidance;
use super::model::{CaseRecord, KbError, KnowledgeBase};

/// File names excluded from the knowledge base: grid generation and
/// parallel decomposition dictionaries are not part of the physics setup.
const EXCLUDED_FILES: &[&str] = &["blockMeshDict", "decomposeParDict"];

const NONUNIFORM_PLACEHOLDER: &str = "nonuniform <omitted>";

/// What a case normalization left out, and why a case was skipped.
#[derive(Debug, Default, Clone)]
pub struct BuildReport {
    pub case_count: usize,
    pub excluded_files: Vec<String>,
    pub skipped_cases: Vec<(String, String)>,
}

/// Parse and clean one case directory.
///
/// Only files under `0/` (or `0.orig/` when `0/` is absent), `constant/`,
/// and `system/` are read. Excluded dictionaries are reported, and any
/// `nonuniform` field payload is replaced by a scalar placeholder.
pub fn normalize_case(
    case_dir: &Path,
) -> Result<(IndexMap<String, ConfigTree>, Vec<String>), KbError> {
    if !case_dir.join("system/controlDict").is_file() {
        return Err(KbError::MissingControlDict);
    }
    let zero_dir = if case_dir.join("0").is_dir() {
        Some("0")
    } else if case_dir.join("0.orig").is_dir() {
        Some("0.orig")
    } else {
        None
    };
    let mut files = IndexMap::new();
    let mut exclusions = Vec::new();
    let mut sections: Vec<&str> = Vec::new();
    if let Some(zero) = zero_dir {
        sections.push(zero);
    }
    sections.push("constant");
    sections.push("system");
    for section in sections {
        let dir = case_dir.join(section);
        if !dir.is_dir() {
            continue;
        }
        let mut paths: Vec<PathBuf> = WalkDir::new(&dir)
            .into_iter()
            .filter_map(Result::ok)
            .filter(|e| e.file_type().is_file())
            .map(|e| e.into_path())
            .collect();
        paths.sort();
        for path in paths {
            let name = path.file_name().unwrap().to_string_lossy().to_string();
            let rel = relative_path(case_dir, &path, section);
            if EXCLUDED_FILES.contains(&name.as_str()) {
                exclusions.push(rel);
                continue;
            }
            let bytes = fs::read(&path)?;
            let text = String::from_utf8(bytes).map_err(|_| KbError::ParseFailure {
                path: rel.clone(),
                cause: "not valid UTF-8".into(),
            })?;
            let (mut tree, _warnings) =
                parse_dictionary(&text).map_err(|e| KbError::ParseFailure {
                    path: rel.clone(),
                    cause: e.to_string(),
                })?;
            strip_nonuniform(&mut tree.root);
            files.insert(rel, tree);
        }
    }
    Ok((files, exclusions))
}

fn relative_path(case_dir: &Path, path: &Path, section: &str) -> String {
    let rel = path.strip_prefix(case_dir).unwrap().to_string_lossy().replace('\\', "/");
    if section == "0.orig" {
        // 0.orig/ stands in for 0/ in the knowledge base.
        rel.replacen("0.orig/", "0/", 1)
    } else {
        rel
    }
}

fn strip_nonuniform(dict: &mut IndexMap<String, ConfigNode>) {
    for node in dict.values_mut() {
        match node {
            ConfigNode::Raw(text) if text.starts_with("nonuniform") => {
                *text = NONUNIFORM_PLACEHOLDER.to_string();
            }
            ConfigNode::Dict(d) => strip_nonuniform(d),
            _ => {}
        }
    }
}

/// Build the knowledge base from a tutorial corpus plus guidance documents.
///
/// A case is any directory containing `system/controlDict`. Unparseable
/// cases are skipped and reported. The build is deterministic: cases are
/// sorted by corpus-relative path.
pub fn build_kb(
    corpus_root: &Path,
    guidance_docs: &[(String, Value)],
) -> Result<(KnowledgeBase, BuildReport), KbError> {
    let mut report = BuildReport::default();
    let mut case_dirs: Vec<PathBuf> = WalkDir::new(corpus_root)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_dir() && e.path().join("system/controlDict").is_file())
        .map(|e| e.into_path())
        .collect();
    case_dirs.sort();

    struct Prepared {
        case_path: String,
        dir_name: String,
        files: IndexMap<String, ConfigTree>,
        solver: String,
    }
    let mut prepared = Vec::new();
    let mut solver_paths: IndexMap<String, Vec<String>> = IndexMap::new();
    for dir in &case_dirs {
        let case_path = dir
            .strip_prefix(corpus_root)
            .unwrap_or(dir)
            .to_string_lossy()
            .replace('\\', "/");
        match normalize_case(dir) {
            Ok((files, exclusions)) => {
                for ex in exclusions {
                    report.excluded_files.push(format!("{case_path}/{ex}"));
                }
                let solver = files
                    .get("system/controlDict")
                    .and_then(|t| t.word_at("application"))
                    .map(str::to_string);
                match solver {
                    Some(solver) => {
                        solver_paths
                            .entry(solver.clone())
                            .or_default()
                            .push(case_path.clone());
                        prepared.push(Prepared {
                            case_path,
                            dir_name: dir
                                .file_name()
                                .unwrap()
                                .to_string_lossy()
                                .to_string(),
                            files,
                            solver,
                        });
                    }
                    None => report
                        .skipped_cases
                        .push((case_path, KbError::MissingApplication.to_string())),
                }
            }
            Err(e) => report.skipped_cases.push((case_path, e.to_string())),
        }
    }

    let mut solver_compressibility = IndexMap::new();
    let mut cases = Vec::new();
    for p in prepared {
        let compressible = match solver_compressibility.get(&p.solver) {
            Some(c) => Ok(*c),
            None => infer_compressibility(&p.solver, Some(&solver_paths)),
        };
        let compressible = match compressible {
            Ok(c) => {
                solver_compressibility.insert(p.solver.clone(), c);
                c
            }
            Err(e) => {
                report.skipped_cases.push((p.case_path, e.to_string()));
                continue;
            }
        };
        match identify_features(&p.files, compressible) {
            Ok(features) => cases.push(CaseRecord {
                case_id: p.dir_name,
                case_path: p.case_path,
                files: p.files,
                features,
            }),
            Err(e) => report.skipped_cases.push((p.case_path, e.to_string())),
        }
    }

    // Disambiguate colliding directory names with the parent path.
    let mut seen: IndexMap<String, usize> = IndexMap::new();
    for case in &cases {
        *seen.entry(case.case_id.clone()).or_default() += 1;
    }
    for case in &mut cases {
        if seen[&case.case_id] > 1 {
            let parent = case
                .case_path
                .rsplit_once('/')
                .map(|(head, _)| head.replace('/', "_"))
                .unwrap_or_default();
            case.case_id = format!("{}_{}", parent, case.case_id);
        }
    }

    if cases.is_empty() {
        return Err(KbError::EmptyCorpus);
    }
    report.case_count = cases.len();
    solver_compressibility.sort_keys();
    let guidance = ingest_guidance(guidance_docs)?;
    Ok((
        KnowledgeBase::assemble(cases, guidance, solver_compressibility),
        report,
    ))
}

/// Read every `*.json` guidance document in a directory, sorted by name.
pub fn load_guidance_dir(dir: &Path) -> Result<Vec<(String, Value)>, KbError> {
    let mut docs = Vec::new();
    if !dir.is_dir() {
        return Ok(docs);
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    for path in paths {
        let id = path.file_stem().unwrap().to_string_lossy().to_string();
        let text = fs::read_to_string(&path)?;
        let value: Value =
            serde_json::from_str(&text).map_err(|_| KbError::MalformedGuidance(id.clone()))?;
        docs.push((id, value));
    }
    Ok(docs)
}
