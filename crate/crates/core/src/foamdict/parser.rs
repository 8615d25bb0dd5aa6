use indexmap::IndexMap;

use super::node::{ConfigNode, ConfigTree, Scalar, RAW_KEY_PREFIX};
use super::FoamError;

/// Non-fatal observations made during a parse.
#[derive(Debug, Clone, PartialEq)]
pub enum ParseWarning {
    /// A later sibling entry replaced an earlier one with the same key.
    DuplicateKey { key: String, position: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TokKind {
    Word,
    Quoted,
    Punct(u8),
}

#[derive(Debug, Clone, Copy)]
struct Token {
    kind: TokKind,
    start: usize,
    end: usize,
}

/// Parse OpenFOAM dictionary source into a [`ConfigTree`].
///
/// C and C++ comments are stripped. `#`-directives are preserved verbatim as
/// raw nodes under `__raw__N` keys. Duplicate sibling keys follow
/// last-writer-wins semantics and are reported as warnings.
pub fn parse_dictionary(text: &str) -> Result<(ConfigTree, Vec<ParseWarning>), FoamError> {
    let cleaned = strip_comments(text);
    let tokens = tokenize(&cleaned)?;
    let mut parser = Parser {
        src: &cleaned,
        tokens: &tokens,
        warnings: Vec::new(),
    };
    let (root, end) = parser.parse_dict_body(0, tokens.len(), true)?;
    debug_assert_eq!(end, tokens.len());
    Ok((ConfigTree { root }, parser.warnings))
}

/// Replace comments with whitespace, preserving byte offsets and newlines.
fn strip_comments(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = bytes.to_vec();
    let mut i = 0;
    let mut in_quote = false;
    while i < bytes.len() {
        let b = bytes[i];
        if in_quote {
            if b == b'"' {
                in_quote = false;
            }
            i += 1;
            continue;
        }
        match b {
            b'"' => {
                in_quote = true;
                i += 1;
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    out[i] = b' ';
                    i += 1;
                }
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'*' => {
                while i < bytes.len() {
                    if bytes[i] == b'*' && i + 1 < bytes.len() && bytes[i + 1] == b'/' {
                        out[i] = b' ';
                        out[i + 1] = b' ';
                        i += 2;
                        break;
                    }
                    if bytes[i] != b'\n' {
                        out[i] = b' ';
                    }
                    i += 1;
                }
            }
            _ => i += 1,
        }
    }
    // Comment bytes were replaced one-for-one, so this is still UTF-8 only
    // if multi-byte characters never appear inside comments; rebuild safely.
    String::from_utf8(out).unwrap_or_else(|e| {
        // Multi-byte char inside a comment: redo the replacement charwise.
        let mut s = String::from_utf8_lossy(e.as_bytes()).into_owned();
        s = s.replace('\u{fffd}', " ");
        s
    })
}

const PUNCT: &[u8] = b"{}();[]";

fn tokenize(src: &str) -> Result<Vec<Token>, FoamError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if PUNCT.contains(&b) {
            tokens.push(Token {
                kind: TokKind::Punct(b),
                start: i,
                end: i + 1,
            });
            i += 1;
            continue;
        }
        if b == b'"' {
            let start = i;
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' {
                i += 1;
            }
            if i >= bytes.len() {
                return Err(FoamError::UnbalancedDelimiters(start));
            }
            i += 1;
            tokens.push(Token {
                kind: TokKind::Quoted,
                start,
                end: i,
            });
            continue;
        }
        // Bare word. Balanced parentheses attached to the word (no space
        // before the opening one) are part of it, e.g. `div(phi,U)`, and
        // whitespace is permitted inside them, e.g. `4(1 2 3 4)`.
        let start = i;
        let mut depth: usize = 0;
        while i < bytes.len() {
            let c = bytes[i];
            if depth == 0 {
                if c.is_ascii_whitespace()
                    || c == b'{'
                    || c == b'}'
                    || c == b';'
                    || c == b'['
                    || c == b']'
                    || c == b'"'
                    || c == b')'
                {
                    break;
                }
                if c == b'(' {
                    depth = 1;
                }
            } else if c == b'(' {
                depth += 1;
            } else if c == b')' {
                depth -= 1;
            }
            i += 1;
        }
        if depth > 0 {
            return Err(FoamError::UnbalancedDelimiters(start));
        }
        tokens.push(Token {
            kind: TokKind::Word,
            start,
            end: i,
        });
    }
    Ok(tokens)
}

struct Parser<'a> {
    src: &'a str,
    tokens: &'a [Token],
    warnings: Vec<ParseWarning>,
}

impl<'a> Parser<'a> {
    fn text(&self, t: &Token) -> &'a str {
        &self.src[t.start..t.end]
    }

    /// Parse dictionary entries in `tokens[i..limit]`. Returns the body and
    /// the index one past the closing `}` (or `limit` at top level).
    fn parse_dict_body(
        &mut self,
        mut i: usize,
        limit: usize,
        top: bool,
    ) -> Result<(IndexMap<String, ConfigNode>, usize), FoamError> {
        let mut dict = IndexMap::new();
        while i < limit {
            let t = self.tokens[i];
            match t.kind {
                TokKind::Punct(b'}') => {
                    if top {
                        return Err(FoamError::UnbalancedDelimiters(t.start));
                    }
                    return Ok((dict, i + 1));
                }
                TokKind::Punct(b';') => {
                    i += 1;
                }
                TokKind::Word if self.text(&t).starts_with('#') => {
                    i = self.parse_directive(i, limit, &mut dict);
                }
                TokKind::Word | TokKind::Quoted => {
                    let key = self.text(&t).to_string();
                    i += 1;
                    let (node, next) = self.parse_entry_value(i, limit, t.start)?;
                    i = next;
                    self.insert(&mut dict, key, node, t.start);
                }
                TokKind::Punct(_) => return Err(FoamError::UnbalancedDelimiters(t.start)),
            }
        }
        if top {
            Ok((dict, limit))
        } else {
            Err(FoamError::UnbalancedDelimiters(
                self.src.len().saturating_sub(1),
            ))
        }
    }

    fn insert(
        &mut self,
        dict: &mut IndexMap<String, ConfigNode>,
        key: String,
        node: ConfigNode,
        position: usize,
    ) {
        if dict.insert(key.clone(), node).is_some() {
            self.warnings.push(ParseWarning::DuplicateKey { key, position });
        }
    }

    /// A directive spans from its `#token` to the end of the source line.
    fn parse_directive(
        &mut self,
        i: usize,
        limit: usize,
        dict: &mut IndexMap<String, ConfigNode>,
    ) -> usize {
        let start = self.tokens[i].start;
        let eol = self.src[start..]
            .find('\n')
            .map(|off| start + off)
            .unwrap_or(self.src.len());
        let raw = self.src[start..eol].trim_end().to_string();
        let n = dict.keys().filter(|k| k.starts_with(RAW_KEY_PREFIX)).count();
        dict.insert(format!("{RAW_KEY_PREFIX}{n}"), ConfigNode::Raw(raw));
        let mut j = i;
        while j < limit && self.tokens[j].start < eol {
            j += 1;
        }
        j
    }

    fn parse_entry_value(
        &mut self,
        i: usize,
        limit: usize,
        entry_pos: usize,
    ) -> Result<(ConfigNode, usize), FoamError> {
        if i < limit {
            if let TokKind::Punct(b'{') = self.tokens[i].kind {
                let (body, next) = self.parse_dict_body(i + 1, limit, false)?;
                return Ok((ConfigNode::Dict(body), next));
            }
        }
        // Gather value tokens up to the terminating ';' at zero depth.
        let mut j = i;
        let (mut p, mut b, mut k) = (0i32, 0i32, 0i32);
        while j < limit {
            match self.tokens[j].kind {
                TokKind::Punct(b';') if p == 0 && b == 0 && k == 0 => break,
                TokKind::Punct(b'}') if p == 0 && b == 0 && k == 0 => {
                    return Err(FoamError::MissingSemicolon(entry_pos));
                }
                TokKind::Punct(b'(') => p += 1,
                TokKind::Punct(b')') => p -= 1,
                TokKind::Punct(b'{') => b += 1,
                TokKind::Punct(b'}') => b -= 1,
                TokKind::Punct(b'[') => k += 1,
                TokKind::Punct(b']') => k -= 1,
                _ => {}
            }
            if p < 0 || b < 0 || k < 0 {
                return Err(FoamError::UnbalancedDelimiters(self.tokens[j].start));
            }
            j += 1;
        }
        if j >= limit {
            return Err(FoamError::MissingSemicolon(entry_pos));
        }
        let node = self.classify_value(i, j)?;
        Ok((node, j + 1))
    }

    fn classify_value(&mut self, start: usize, end: usize) -> Result<ConfigNode, FoamError> {
        let toks = &self.tokens[start..end];
        if toks.is_empty() {
            return Ok(ConfigNode::Raw(String::new()));
        }
        if let Some(dims) = self.try_dimensions(toks) {
            return Ok(ConfigNode::Scalar(Scalar::Dimensions(dims)));
        }
        if toks.len() == 1 {
            return Ok(ConfigNode::Scalar(self.classify_single(&toks[0])));
        }
        if let TokKind::Punct(b'(') = toks[0].kind {
            if self.matching_paren(start, end) == Some(end - 1) {
                return self.parse_list(start + 1, end - 1);
            }
        }
        let raw = self.src[toks[0].start..toks[toks.len() - 1].end].to_string();
        Ok(ConfigNode::Raw(raw))
    }

    fn try_dimensions(&self, toks: &[Token]) -> Option<[i64; 7]> {
        if toks.len() != 9 {
            return None;
        }
        if toks[0].kind != TokKind::Punct(b'[') || toks[8].kind != TokKind::Punct(b']') {
            return None;
        }
        let mut dims = [0i64; 7];
        for (slot, t) in dims.iter_mut().zip(&toks[1..8]) {
            if t.kind != TokKind::Word {
                return None;
            }
            *slot = self.text(t).parse().ok()?;
        }
        Some(dims)
    }

    fn classify_single(&self, t: &Token) -> Scalar {
        let text = self.text(t);
        if t.kind == TokKind::Quoted {
            return Scalar::Str(text[1..text.len() - 1].to_string());
        }
        match text {
            "true" => return Scalar::Bool(true),
            "false" => return Scalar::Bool(false),
            _ => {}
        }
        if text.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+' || c == '.') {
            if let Ok(n) = text.parse::<f64>() {
                if n.is_finite() {
                    return Scalar::Number(n);
                }
            }
        }
        Scalar::Word(text.to_string())
    }

    /// Index of the `)` matching the `(` at `start`, scanning `[start, end)`.
    fn matching_paren(&self, start: usize, end: usize) -> Option<usize> {
        let mut depth = 0i32;
        for j in start..end {
            match self.tokens[j].kind {
                TokKind::Punct(b'(') => depth += 1,
                TokKind::Punct(b')') => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(j);
                    }
                }
                _ => {}
            }
        }
        None
    }

    fn parse_list(&mut self, mut i: usize, end: usize) -> Result<ConfigNode, FoamError> {
        let mut items = Vec::new();
        while i < end {
            let t = self.tokens[i];
            match t.kind {
                TokKind::Word | TokKind::Quoted => {
                    items.push(ConfigNode::Scalar(self.classify_single(&t)));
                    i += 1;
                }
                TokKind::Punct(b'(') => {
                    let close = self
                        .matching_paren(i, end)
                        .ok_or(FoamError::UnbalancedDelimiters(t.start))?;
                    items.push(self.parse_list(i + 1, close)?);
                    i = close + 1;
                }
                TokKind::Punct(b'{') => {
                    let (body, next) = self.parse_dict_body(i + 1, end, false)?;
                    items.push(ConfigNode::Dict(body));
                    i = next;
                }
                TokKind::Punct(_) => return Err(FoamError::UnbalancedDelimiters(t.start)),
            }
        }
        Ok(ConfigNode::List(items))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ConfigTree {
        parse_dictionary(text).expect("parse").0
    }

    #[test]
    fn foamfile_header_entries() {
        let tree = parse(
            "FoamFile { version 2.0; format ascii; class dictionary; object fvSolution; }",
        );
        let ff = match &tree.root["FoamFile"] {
            ConfigNode::Dict(d) => d,
            other => panic!("expected dict, got {other:?}"),
        };
        assert_eq!(ff["version"], ConfigNode::Scalar(Scalar::Number(2.0)));
        assert_eq!(
            ff["format"],
            ConfigNode::Scalar(Scalar::Word("ascii".into()))
        );
        assert_eq!(
            ff["object"],
            ConfigNode::Scalar(Scalar::Word("fvSolution".into()))
        );
        assert_eq!(ff.len(), 4);
    }

    #[test]
    fn empty_dictionary() {
        let tree = parse("foo {}");
        assert_eq!(tree.root["foo"], ConfigNode::Dict(IndexMap::new()));
    }

    #[test]
    fn dimension_vector_leaf() {
        // Hand-parse oracle: seven integers in brackets.
        let tree = parse("dimensions [0 2 -2 0 0 0 0];");
        assert_eq!(
            tree.root["dimensions"],
            ConfigNode::Scalar(Scalar::Dimensions([0, 2, -2, 0, 0, 0, 0]))
        );
    }

    #[test]
    fn comments_are_stripped() {
        let tree = parse("/* banner */ a 1; // trailing\nb 2;");
        assert_eq!(tree.root.len(), 2);
    }

    #[test]
    fn token_run_is_raw_verbatim() {
        let tree = parse("internalField uniform (1 0 0);");
        assert_eq!(
            tree.root["internalField"],
            ConfigNode::Raw("uniform (1 0 0)".into())
        );
    }

    #[test]
    fn nonuniform_payload_is_raw() {
        let tree = parse("internalField nonuniform List<scalar> 4(1 2 3 4);");
        assert_eq!(
            tree.root["internalField"],
            ConfigNode::Raw("nonuniform List<scalar> 4(1 2 3 4)".into())
        );
    }

    #[test]
    fn scheme_keys_keep_parens() {
        let tree = parse("divSchemes { div(phi,U) Gauss upwind; default none; }");
        let div = match &tree.root["divSchemes"] {
            ConfigNode::Dict(d) => d,
            _ => panic!(),
        };
        assert_eq!(div["div(phi,U)"], ConfigNode::Raw("Gauss upwind".into()));
    }

    #[test]
    fn include_directive_preserved_raw() {
        let tree = parse("#include \"initialConditions\"\nfoo 1;");
        assert_eq!(
            tree.root["__raw__0"],
            ConfigNode::Raw("#include \"initialConditions\"".into())
        );
        assert!(tree.root.contains_key("foo"));
    }

    #[test]
    fn duplicate_key_last_wins_with_warning() {
        let (tree, warnings) = parse_dictionary("a 1; a 2;").unwrap();
        assert_eq!(tree.root["a"], ConfigNode::Scalar(Scalar::Number(2.0)));
        assert_eq!(warnings.len(), 1);
        assert!(matches!(
            &warnings[0],
            ParseWarning::DuplicateKey { key, .. } if key == "a"
        ));
    }

    #[test]
    fn missing_semicolon_is_an_error() {
        let err = parse_dictionary("a { b 1 }").unwrap_err();
        assert!(matches!(err, FoamError::MissingSemicolon(_)));
    }

    #[test]
    fn unbalanced_braces_are_an_error() {
        let err = parse_dictionary("a { b 1;").unwrap_err();
        assert!(matches!(err, FoamError::UnbalancedDelimiters(_)));
    }

    #[test]
    fn list_of_dicts() {
        let tree = parse("boundary ( inlet { type patch; } );");
        match &tree.root["boundary"] {
            ConfigNode::List(items) => {
                assert_eq!(items.len(), 2);
                assert!(matches!(items[1], ConfigNode::Dict(_)));
            }
            other => panic!("expected list, got {other:?}"),
        }
    }
}
