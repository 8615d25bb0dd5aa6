//! Data-driven template retrieval: per-feature key statistics, union-max
//! merging, and threshold collapse into a canonical setup template.

use indexmap::IndexMap;
use serde_json::{json, Map, Value};

use crate::foamdict::{to_json_value, value_to_node, ConfigNode, ConfigTree};
use crate::kb::model::KnowledgeBase;

use super::types::{AuditRecord, LadderStep, RetrieveError, SetupDescriptor};

/// A physical model to profile the corpus against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureLabel {
    Solver(String),
    Turbulence(String),
}

impl FeatureLabel {
    pub fn render(&self) -> String {
        match self {
            FeatureLabel::Solver(s) => format!("solver={s}"),
            FeatureLabel::Turbulence(t) => format!("turbulence model={t}"),
        }
    }
}

/// Frequency of one observed value, keyed in the stats map by its
/// canonical JSON rendering.
#[derive(Debug, Clone)]
pub struct ValueStats {
    pub value: Value,
    pub frequency: f64,
}

/// Occurrence statistics for one configuration key within a feature's
/// matching cases.
#[derive(Debug, Clone, Default)]
pub struct KeyStats {
    /// Section the key sits in: `solvers` for linear-solver blocks,
    /// `top` otherwise.
    pub section: String,
    pub rate: f64,
    /// Dictionary values treated as indivisible blocks.
    pub atomic: bool,
    /// Observed values for atomic and scalar keys.
    pub values: IndexMap<String, ValueStats>,
    /// Per-subkey statistics for compound (non-atomic) keys.
    pub subkeys: IndexMap<String, KeyStats>,
}

/// Key-frequency statistics for one feature over one setup file.
#[derive(Debug, Clone)]
pub struct ProbabilityProfile {
    pub feature: String,
    pub case_count: usize,
    pub rates: IndexMap<String, KeyStats>,
}

/// Union of profiles where each key's statistics come from the profile
/// that observed it most often.
#[derive(Debug, Clone, Default)]
pub struct MergedProfile {
    pub rates: IndexMap<String, KeyStats>,
    /// Which feature supplied each key.
    pub sources: IndexMap<String, String>,
}

/// Per-key origin of a template entry.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub source_feature: String,
    pub rate: f64,
}

/// The collapsed canonical template: entry keys are section-qualified
/// paths (`solvers/p`, `SIMPLE/nNonOrthogonalCorrectors`, `deltaT`).
#[derive(Debug, Clone)]
pub struct SetupTemplate {
    pub entries: IndexMap<String, Value>,
    pub provenance: IndexMap<String, Provenance>,
    pub origin: AuditRecord,
}

impl SetupTemplate {
    pub fn to_json(&self) -> Value {
        let mut entries = Map::new();
        for (k, v) in &self.entries {
            entries.insert(k.clone(), v.clone());
        }
        let mut provenance = Map::new();
        for (k, p) in &self.provenance {
            provenance.insert(
                k.clone(),
                json!({"source_feature": p.source_feature, "rate": p.rate}),
            );
        }
        json!({
            "entries": entries,
            "provenance": provenance,
            "audit": self.origin.to_json(),
        })
    }

    /// Reassemble the flat entries into a nested dictionary tree, ready to
    /// serialize as a configuration file.
    pub fn to_tree(&self) -> ConfigTree {
        let mut root: IndexMap<String, ConfigNode> = IndexMap::new();
        for (path, value) in &self.entries {
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
        ConfigTree { root }
    }
}

fn canonical(value: &Value) -> String {
    serde_json::to_string(value).expect("JSON value serializes")
}

/// The keys profiled for one case file, with their section and atomicity.
fn profiled_keys<'a>(
    path: &str,
    root: &'a IndexMap<String, ConfigNode>,
) -> Vec<(String, String, bool, &'a ConfigNode)> {
    let mut out = Vec::new();
    if path == "system/fvSolution" {
        if let Some(ConfigNode::Dict(solvers)) = root.get("solvers") {
            for (key, node) in solvers {
                out.push(("solvers".to_string(), key.clone(), true, node));
            }
        }
        for key in ["SIMPLE", "PIMPLE", "PISO", "relaxationFactors"] {
            if let Some(node) = root.get(key) {
                out.push(("top".to_string(), key.to_string(), false, node));
            }
        }
    } else {
        for (key, node) in root {
            if key == "FoamFile" || key.starts_with(crate::foamdict::RAW_KEY_PREFIX) {
                continue;
            }
            let atomic = !matches!(node, ConfigNode::Dict(_));
            out.push(("top".to_string(), key.clone(), atomic, node));
        }
    }
    out
}

fn observe_value(stats: &mut KeyStats, node: &ConfigNode, increment: f64) {
    let value = to_json_value(node);
    let key = canonical(&value);
    let entry = stats
        .values
        .entry(key)
        .or_insert_with(|| ValueStats { value, frequency: 0.0 });
    entry.frequency += increment;
}

/// Filter the cases matching `feature` that contain the file `descriptor`
/// and compute per-key occurrence rates and value frequencies, all with
/// the matching-case count as denominator.
pub fn compute_profile(
    kb: &KnowledgeBase,
    feature: &FeatureLabel,
    descriptor: &SetupDescriptor,
) -> Result<ProbabilityProfile, RetrieveError> {
    let SetupDescriptor::File(path) = descriptor else {
        return Err(RetrieveError::NoMatchingCases(feature.render()));
    };
    let matching: Vec<usize> = kb
        .cases
        .iter()
        .enumerate()
        .filter(|(_, c)| match feature {
            FeatureLabel::Solver(s) => &c.features.solver == s,
            FeatureLabel::Turbulence(t) => &c.features.turbulence_model == t,
        })
        .filter(|(_, c)| c.files.contains_key(path.as_str()))
        .map(|(i, _)| i)
        .collect();
    if matching.is_empty() {
        return Err(RetrieveError::NoMatchingCases(feature.render()));
    }
    let n = matching.len() as f64;
    let increment = 1.0 / n;

    let mut rates: IndexMap<String, KeyStats> = IndexMap::new();
    for idx in &matching {
        let case = &kb.cases[*idx];
        let root = &case.files[path.as_str()].root;
        for (section, key, atomic, node) in profiled_keys(path, root) {
            let stats = rates.entry(key).or_insert_with(|| KeyStats {
                section,
                atomic,
                ..Default::default()
            });
            stats.rate += increment;
            if stats.atomic {
                observe_value(stats, node, increment);
            } else if let ConfigNode::Dict(children) = node {
                for (subkey, subnode) in children {
                    let sub = stats.subkeys.entry(subkey.clone()).or_insert_with(|| {
                        KeyStats {
                            section: "sub".to_string(),
                            atomic: true,
                            ..Default::default()
                        }
                    });
                    sub.rate += increment;
                    observe_value(sub, subnode, increment);
                }
            }
        }
    }
    Ok(ProbabilityProfile {
        feature: feature.render(),
        case_count: matching.len(),
        rates,
    })
}

impl ProbabilityProfile {
    /// The summary JSON form: occurrence rates grouped by section.
    pub fn to_json(&self) -> Value {
        let mut sections: IndexMap<&str, Map<String, Value>> = IndexMap::new();
        for (key, stats) in &self.rates {
            sections
                .entry(stats.section.as_str())
                .or_default()
                .insert(key.clone(), json!(stats.rate));
        }
        let mut rates = Map::new();
        for (section, keys) in sections {
            rates.insert(section.to_string(), Value::Object(keys));
        }
        json!({
            "feature": self.feature,
            "case_count": self.case_count,
            "rates": rates,
        })
    }

    /// Parse the summary JSON form (rates only, no value statistics).
    pub fn from_summary_json(value: &Value) -> Option<ProbabilityProfile> {
        let feature = value.get("feature")?.as_str()?.to_string();
        let case_count = value.get("case_count")?.as_u64()? as usize;
        let mut rates = IndexMap::new();
        for (section, keys) in value.get("rates")?.as_object()? {
            for (key, rate) in keys.as_object()? {
                rates.insert(
                    key.clone(),
                    KeyStats {
                        section: section.clone(),
                        rate: rate.as_f64()?,
                        atomic: section == "solvers",
                        ..Default::default()
                    },
                );
            }
        }
        Some(ProbabilityProfile { feature, case_count, rates })
    }
}

/// Merge profiles key by key: the entry with the strictly greatest
/// occurrence rate wins; on a tie the earlier profile's entry is kept.
/// Keys absent from a profile count as rate zero.
pub fn merge_union_max(profiles: &[ProbabilityProfile]) -> MergedProfile {
    let mut merged = MergedProfile::default();
    for profile in profiles {
        for (key, stats) in &profile.rates {
            match merged.rates.get(key) {
                Some(existing) if existing.rate >= stats.rate => {}
                _ => {
                    merged.rates.insert(key.clone(), stats.clone());
                    merged.sources.insert(key.clone(), profile.feature.clone());
                }
            }
        }
    }
    merged
}

/// The most frequent value; frequency ties break toward the
/// lexicographically smallest canonical JSON rendering.
fn argmax_value(values: &IndexMap<String, ValueStats>) -> Option<Value> {
    let mut best: Option<(&String, &ValueStats)> = None;
    for (key, stats) in values {
        best = match best {
            Some((bk, bs))
                if stats.frequency < bs.frequency
                    || (stats.frequency == bs.frequency && key >= bk) =>
            {
                Some((bk, bs))
            }
            _ => Some((key, stats)),
        };
    }
    best.map(|(_, stats)| stats.value.clone())
}

fn entry_key(key: &str, stats: &KeyStats) -> String {
    if stats.section == "solvers" {
        format!("solvers/{key}")
    } else {
        key.to_string()
    }
}

/// Drop keys at or below the threshold and pick one value per survivor:
/// whole blocks for atomic keys, per-subkey winners for compound keys.
pub fn collapse_refine(
    merged: &MergedProfile,
    tau: f64,
) -> Result<(IndexMap<String, Value>, IndexMap<String, Provenance>), RetrieveError> {
    let mut entries = IndexMap::new();
    let mut provenance = IndexMap::new();
    for (key, stats) in &merged.rates {
        if stats.rate <= tau {
            continue;
        }
        let source = merged.sources.get(key).cloned().unwrap_or_default();
        if stats.atomic {
            if let Some(value) = argmax_value(&stats.values) {
                entries.insert(entry_key(key, stats), value);
                provenance.insert(
                    entry_key(key, stats),
                    Provenance { source_feature: source, rate: stats.rate },
                );
            }
        } else {
            for (subkey, sub) in &stats.subkeys {
                if sub.rate <= tau {
                    continue;
                }
                if let Some(value) = argmax_value(&sub.values) {
                    let path = format!("{key}/{subkey}");
                    entries.insert(path.clone(), value);
                    provenance.insert(
                        path,
                        Provenance {
                            source_feature: source.clone(),
                            rate: sub.rate,
                        },
                    );
                }
            }
        }
    }
    if entries.is_empty() {
        return Err(RetrieveError::EmptyTemplate);
    }
    Ok((entries, provenance))
}

/// Profile the turbulence model and the solver in that order, merge by
/// union-max, and collapse with threshold `tau` into one template.
pub fn template_retrieve(
    kb: &KnowledgeBase,
    m_sol: &str,
    m_turb: &str,
    descriptor: &SetupDescriptor,
    tau: f64,
) -> Result<SetupTemplate, RetrieveError> {
    let mut audit = AuditRecord::new("template");
    if descriptor == &SetupDescriptor::File("system/controlDict".to_string()) {
        audit
            .notes
            .push("solver-controls file profiled over all top-level keys".to_string());
    }
    let mut profiles = Vec::new();
    for feature in [
        FeatureLabel::Turbulence(m_turb.to_string()),
        FeatureLabel::Solver(m_sol.to_string()),
    ] {
        let query = format!("{{feature={}, S={}}}", feature.render(), descriptor.render());
        match compute_profile(kb, &feature, descriptor) {
            Ok(profile) => {
                audit.ladder.push(LadderStep {
                    query,
                    hit_count: profile.case_count,
                });
                profiles.push(profile);
            }
            Err(_) => {
                audit.ladder.push(LadderStep { query, hit_count: 0 });
                audit
                    .notes
                    .push(format!("feature {} matched no cases, skipped", feature.render()));
            }
        }
    }
    audit.winning_level = audit
        .ladder
        .iter()
        .position(|s| s.hit_count > 0)
        .map(|i| i + 1);
    if profiles.is_empty() {
        return Err(RetrieveError::NoMatchingCases(format!(
            "turbulence model={m_turb} | solver={m_sol}"
        )));
    }
    let merged = merge_union_max(&profiles);
    let (entries, provenance) = collapse_refine(&merged, tau)?;
    audit.result_case_ids = Vec::new();
    Ok(SetupTemplate { entries, provenance, origin: audit })
}
