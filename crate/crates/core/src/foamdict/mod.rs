//! OpenFOAM dictionary parsing and serialisation.
//!
//! A dictionary file is parsed into a [`ConfigTree`]: an ordered key/value
//! tree whose leaves are scalars (numbers, words, quoted strings, dimension
//! vectors) or verbatim raw token runs. Comments are stripped; directives
//! such as `#include` are preserved as raw nodes. The tree serialises back
//! to OpenFOAM dictionary syntax and to a canonical JSON text form.

mod node;
mod parser;
mod serialize;

pub use node::{ConfigNode, ConfigTree, Scalar, RAW_KEY_PREFIX};
pub use parser::{parse_dictionary, ParseWarning};
pub use serialize::{
    from_json_value, serialize_foam, serialize_json, to_json_value, tree_to_value, value_to_node,
};

use thiserror::Error;

/// Errors raised while parsing or emitting dictionary text.
#[derive(Debug, Error)]
pub enum FoamError {
    #[error("unbalanced delimiters at byte {0}")]
    UnbalancedDelimiters(usize),
    #[error("entry without ';' or block at byte {0}")]
    MissingSemicolon(usize),
    #[error("input is not valid UTF-8")]
    InvalidEncoding,
    #[error("raw directive cannot be emitted inside a list")]
    RawEmissionConflict,
}
