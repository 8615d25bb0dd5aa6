//! Deterministic knowledge engine and agent harness for OpenFOAM case
//! configuration.
//!
//! The crate is organised around four subsystems:
//!
//! - [`foamdict`]: parsing OpenFOAM dictionary text into an ordered tree and
//!   serialising it back to dictionary syntax or canonical JSON.
//! - [`kb`]: building the immutable symbolic knowledge base from a tutorial
//!   corpus plus a boundary-condition guidance store.
//! - [`retrieve`]: the deterministic RAG engine — exact-match search, the
//!   five retrieval strategies, the dispatcher, and audit records.
//! - [`agent`]: staged orchestration — case generation, error
//!   classification, and the bounded reflection loop over pluggable LLM and
//!   executor ports.

pub mod agent;
pub mod foamdict;
pub mod kb;
pub mod retrieve;
