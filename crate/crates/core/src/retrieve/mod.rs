//! The deterministic retrieval engine: exact-match search over the
//! knowledge base, five rule-based strategies, and the dispatcher that
//! routes targets to strategies. Every result carries an audit record.

pub mod cascade;
pub mod dispatch;
pub mod keyword;
pub mod multi;
pub mod search;
pub mod template;
pub mod types;

pub use cascade::{all_model_retrieve, cascading_fallback};
pub use dispatch::{dispatch, DispatchTask, ReflectTarget, Strategy};
pub use keyword::keyword_retrieve;
pub use multi::multi_source_retrieve;
pub use search::{downsample, search};
pub use template::{
    collapse_refine, compute_profile, merge_union_max, template_retrieve, FeatureLabel,
    MergedProfile, ProbabilityProfile, SetupTemplate,
};
pub use types::{
    AuditRecord, ContextItem, ContextSet, LadderStep, RetrievalQuery, RetrieveError,
    SetupDescriptor,
};

/// Default cardinality bound on retrieved examples.
pub const DEFAULT_N_MAX: usize = 5;

/// Default collapse threshold for template retrieval.
pub const DEFAULT_TAU: f64 = 0.3;
