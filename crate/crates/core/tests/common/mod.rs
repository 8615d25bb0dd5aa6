//! Shared helpers: build the mini-corpus knowledge base once per test
//! binary.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use phynikce_core::kb::build::{build_kb, load_guidance_dir};
use phynikce_core::kb::model::KnowledgeBase;

pub fn fixtures() -> PathBuf {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures")).to_path_buf()
}

pub fn kb() -> &'static KnowledgeBase {
    static KB: OnceLock<KnowledgeBase> = OnceLock::new();
    KB.get_or_init(|| {
        let guidance = load_guidance_dir(&fixtures().join("guidance")).unwrap();
        let (kb, report) = build_kb(&fixtures().join("corpus"), &guidance).unwrap();
        assert!(report.skipped_cases.is_empty(), "{:?}", report.skipped_cases);
        kb
    })
}
