use indexmap::IndexMap;

/// Reserved key prefix under which raw directive nodes are stored inside a
/// dictionary, both in the tree and in the JSON form.
pub const RAW_KEY_PREFIX: &str = "__raw__";

/// A scalar leaf of a dictionary entry.
#[derive(Debug, Clone)]
pub enum Scalar {
    Number(f64),
    Bool(bool),
    /// A bare word token, e.g. `GAMG` or `div(phi,U)`.
    Word(String),
    /// A double-quoted string, stored without the quotes.
    Str(String),
    /// A dimension set of 7 integers, e.g. `[0 2 -2 0 0 0 0]`.
    Dimensions([i64; 7]),
}

/// One node of a parsed dictionary.
#[derive(Debug, Clone)]
pub enum ConfigNode {
    Dict(IndexMap<String, ConfigNode>),
    List(Vec<ConfigNode>),
    Scalar(Scalar),
    /// A verbatim token run or directive that round-trips byte-identically.
    Raw(String),
}

/// A whole parsed dictionary file. The root behaves as a dictionary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigTree {
    pub root: IndexMap<String, ConfigNode>,
}

impl ConfigTree {
    /// Depth-first lookup of the first entry whose key equals `key`.
    pub fn find_key(&self, key: &str) -> Option<&ConfigNode> {
        fn walk<'a>(dict: &'a IndexMap<String, ConfigNode>, key: &str) -> Option<&'a ConfigNode> {
            for (k, v) in dict {
                if k == key {
                    return Some(v);
                }
                if let ConfigNode::Dict(d) = v {
                    if let Some(hit) = walk(d, key) {
                        return Some(hit);
                    }
                }
            }
            None
        }
        walk(&self.root, key)
    }

    /// Lookup by a `/`-separated path of exact keys from the root.
    pub fn lookup(&self, path: &str) -> Option<&ConfigNode> {
        let mut parts = path.split('/');
        let first = parts.next()?;
        let mut node = self.root.get(first)?;
        for part in parts {
            match node {
                ConfigNode::Dict(d) => node = d.get(part)?,
                _ => return None,
            }
        }
        Some(node)
    }

    /// The word value of an entry at `path`, if it is a word-like scalar.
    pub fn word_at(&self, path: &str) -> Option<&str> {
        match self.lookup(path)? {
            ConfigNode::Scalar(Scalar::Word(w)) | ConfigNode::Scalar(Scalar::Str(w)) => Some(w),
            ConfigNode::Raw(r) => Some(r),
            _ => None,
        }
    }
}

impl Scalar {
    /// The bare text of a word-like scalar (word or quoted string).
    pub fn text(&self) -> Option<&str> {
        match self {
            Scalar::Word(s) | Scalar::Str(s) => Some(s),
            _ => None,
        }
    }
}

// Equality is semantic: word-like scalars compare by text regardless of
// quoting, and a dimension set equals a list of the same seven integers.
// This keeps foam -> JSON -> foam round-trips fixed points even though the
// JSON form cannot record quoting.
impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Number(a), Scalar::Number(b)) => a == b,
            (Scalar::Bool(a), Scalar::Bool(b)) => a == b,
            (Scalar::Dimensions(a), Scalar::Dimensions(b)) => a == b,
            _ => match (self.text(), other.text()) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            },
        }
    }
}

impl ConfigNode {
    /// The bare text of a word-like or raw node.
    pub fn as_text(&self) -> Option<&str> {
        match self {
            ConfigNode::Scalar(s) => s.text(),
            ConfigNode::Raw(r) => Some(r),
            _ => None,
        }
    }

    fn dims_vs_list(dims: &[i64; 7], list: &[ConfigNode]) -> bool {
        list.len() == 7
            && dims.iter().zip(list).all(|(d, n)| {
                matches!(n, ConfigNode::Scalar(Scalar::Number(x)) if *x == *d as f64)
            })
    }
}

impl PartialEq for ConfigNode {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ConfigNode::Dict(a), ConfigNode::Dict(b)) => a == b,
            (ConfigNode::List(a), ConfigNode::List(b)) => a == b,
            (ConfigNode::Scalar(Scalar::Dimensions(d)), ConfigNode::List(l))
            | (ConfigNode::List(l), ConfigNode::Scalar(Scalar::Dimensions(d))) => {
                Self::dims_vs_list(d, l)
            }
            (ConfigNode::Scalar(a), ConfigNode::Scalar(b)) => a == b,
            _ => match (self.as_text(), other.as_text()) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            },
        }
    }
}
