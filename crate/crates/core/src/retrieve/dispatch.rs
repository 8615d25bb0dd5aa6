//! Routing of generation targets and error diagnoses to retrieval
//! strategies.

use super::types::{RetrieveError, SetupDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Cascading,
    AllModel,
    Template,
    MultiSource,
    Keyword,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Cascading => "cascading_fallback",
            Strategy::AllModel => "all_model",
            Strategy::Template => "template",
            Strategy::MultiSource => "multi_source",
            Strategy::Keyword => "keyword",
        }
    }
}

/// The failure class an error-correction retrieval is answering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReflectTarget {
    IcBcs,
    LinearSolvers,
    DiscretizationSchemes,
    SetupFormats,
    Dimensional,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DispatchTask {
    Init(SetupDescriptor),
    Reflect(ReflectTarget),
}

/// The dispatch table. Initialization routes by what the target file
/// configures; reflection routes by the diagnosed failure class.
pub fn dispatch(task: &DispatchTask) -> Result<Strategy, RetrieveError> {
    match task {
        DispatchTask::Init(SetupDescriptor::File(path)) => match path.as_str() {
            "system/fvSchemes" => Ok(Strategy::AllModel),
            "system/fvSolution" | "system/controlDict" => Ok(Strategy::Template),
            p if p.starts_with("constant/") || p.starts_with("0/") => Ok(Strategy::Cascading),
            p => Err(RetrieveError::UnroutableTarget(p.to_string())),
        },
        DispatchTask::Init(SetupDescriptor::BoundaryType(_)) => Ok(Strategy::MultiSource),
        DispatchTask::Reflect(target) => match target {
            ReflectTarget::IcBcs => Ok(Strategy::MultiSource),
            ReflectTarget::LinearSolvers => Ok(Strategy::Template),
            ReflectTarget::DiscretizationSchemes
            | ReflectTarget::SetupFormats
            | ReflectTarget::Dimensional => Ok(Strategy::Keyword),
        },
    }
}
