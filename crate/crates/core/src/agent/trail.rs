//! The audit trail: an append-only sequence of JSON events, serialized as
//! JSON lines. Events carry no timestamps so identical runs produce
//! byte-identical trails.

use std::fs;
use std::path::Path;

use serde_json::Value;

use super::AgentError;

#[derive(Debug, Default, Clone)]
pub struct Trail {
    pub events: Vec<Value>,
}

impl Trail {
    pub fn push(&mut self, event: Value) {
        self.events.push(event);
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            out.push_str(&serde_json::to_string(event).expect("trail event serializes"));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), AgentError> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, self.to_jsonl())?;
        Ok(())
    }
}
