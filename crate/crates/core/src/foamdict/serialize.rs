use std::fmt::Write as _;

use indexmap::IndexMap;
use serde_json::Value;

use super::node::{ConfigNode, ConfigTree, Scalar, RAW_KEY_PREFIX};
use super::FoamError;

const INDENT: &str = "    ";

fn fmt_number(n: f64) -> String {
    // Shortest round-trip decimal; integral values drop the fraction.
    format!("{n}")
}

fn scalar_text(s: &Scalar) -> String {
    match s {
        Scalar::Number(n) => fmt_number(*n),
        Scalar::Bool(b) => b.to_string(),
        Scalar::Word(w) => w.clone(),
        Scalar::Str(q) => format!("\"{q}\""),
        Scalar::Dimensions(d) => {
            let inner: Vec<String> = d.iter().map(|v| v.to_string()).collect();
            format!("[{}]", inner.join(" "))
        }
    }
}

/// Emit OpenFOAM dictionary text: 4-space indent, one entry per line, no
/// decorative comment banner. `parse(serialize_foam(t))` equals `t` modulo
/// whitespace.
pub fn serialize_foam(tree: &ConfigTree) -> Result<String, FoamError> {
    let mut out = String::new();
    write_dict_body(&mut out, &tree.root, 0)?;
    Ok(out)
}

fn write_dict_body(
    out: &mut String,
    dict: &IndexMap<String, ConfigNode>,
    depth: usize,
) -> Result<(), FoamError> {
    let ind = INDENT.repeat(depth);
    for (key, node) in dict {
        if key.starts_with(RAW_KEY_PREFIX) {
            if let ConfigNode::Raw(text) = node {
                let _ = writeln!(out, "{ind}{text}");
                continue;
            }
        }
        match node {
            ConfigNode::Dict(d) => {
                let _ = writeln!(out, "{ind}{key}\n{ind}{{");
                write_dict_body(out, d, depth + 1)?;
                let _ = writeln!(out, "{ind}}}");
            }
            ConfigNode::List(items) => write_list_entry(out, key, items, depth)?,
            ConfigNode::Scalar(s) => {
                let _ = writeln!(out, "{ind}{key} {};", scalar_text(s));
            }
            ConfigNode::Raw(text) => {
                if text.is_empty() {
                    let _ = writeln!(out, "{ind}{key};");
                } else {
                    let _ = writeln!(out, "{ind}{key} {text};");
                }
            }
        }
    }
    Ok(())
}

fn write_list_entry(
    out: &mut String,
    key: &str,
    items: &[ConfigNode],
    depth: usize,
) -> Result<(), FoamError> {
    let ind = INDENT.repeat(depth);
    if items.iter().all(|n| matches!(n, ConfigNode::Scalar(_))) {
        let rendered: Vec<String> = items
            .iter()
            .map(|n| match n {
                ConfigNode::Scalar(s) => scalar_text(s),
                _ => unreachable!(),
            })
            .collect();
        let _ = writeln!(out, "{ind}{key} ({});", rendered.join(" "));
        return Ok(());
    }
    let _ = writeln!(out, "{ind}{key}\n{ind}(");
    write_list_items(out, items, depth + 1)?;
    let _ = writeln!(out, "{ind});");
    Ok(())
}

fn write_list_items(
    out: &mut String,
    items: &[ConfigNode],
    depth: usize,
) -> Result<(), FoamError> {
    let ind = INDENT.repeat(depth);
    for item in items {
        match item {
            ConfigNode::Scalar(s) => {
                let _ = writeln!(out, "{ind}{}", scalar_text(s));
            }
            ConfigNode::Dict(d) => {
                let _ = writeln!(out, "{ind}{{");
                write_dict_body(out, d, depth + 1)?;
                let _ = writeln!(out, "{ind}}}");
            }
            ConfigNode::List(nested) => {
                let _ = writeln!(out, "{ind}(");
                write_list_items(out, nested, depth + 1)?;
                let _ = writeln!(out, "{ind})");
            }
            ConfigNode::Raw(text) => {
                // A directive has no legal placement inside a list.
                if text.starts_with('#') {
                    return Err(FoamError::RawEmissionConflict);
                }
                let _ = writeln!(out, "{ind}{text}");
            }
        }
    }
    Ok(())
}

/// Canonical JSON text for a tree: dict order preserved, shortest lossless
/// numbers, dimension vectors as arrays, raw nodes as strings. Equal trees
/// yield byte-identical output.
pub fn serialize_json(tree: &ConfigTree) -> String {
    let mut text = serde_json::to_string_pretty(&tree_to_value(tree)).expect("tree is valid JSON");
    text.push('\n');
    text
}

pub fn tree_to_value(tree: &ConfigTree) -> Value {
    dict_to_value(&tree.root)
}

fn dict_to_value(dict: &IndexMap<String, ConfigNode>) -> Value {
    let mut map = serde_json::Map::new();
    for (k, v) in dict {
        map.insert(k.clone(), to_json_value(v));
    }
    Value::Object(map)
}

/// JSON form of a single node.
pub fn to_json_value(node: &ConfigNode) -> Value {
    match node {
        ConfigNode::Dict(d) => dict_to_value(d),
        ConfigNode::List(items) => Value::Array(items.iter().map(to_json_value).collect()),
        ConfigNode::Raw(text) => Value::String(text.clone()),
        ConfigNode::Scalar(s) => match s {
            Scalar::Number(n) => serde_json::Number::from_f64(*n)
                .map(Value::Number)
                .unwrap_or_else(|| Value::String(fmt_number(*n))),
            Scalar::Bool(b) => Value::Bool(*b),
            Scalar::Word(w) => Value::String(w.clone()),
            Scalar::Str(q) => Value::String(q.clone()),
            Scalar::Dimensions(d) => {
                Value::Array(d.iter().map(|v| Value::Number((*v).into())).collect())
            }
        },
    }
}

/// Rebuild a tree from its canonical JSON form. Arrays of exactly seven
/// integers are read back as dimension vectors; strings containing
/// whitespace or delimiter characters become raw nodes.
pub fn from_json_value(value: &Value) -> ConfigTree {
    match value {
        Value::Object(map) => ConfigTree {
            root: map_to_dict(map),
        },
        _ => ConfigTree::default(),
    }
}

fn map_to_dict(map: &serde_json::Map<String, Value>) -> IndexMap<String, ConfigNode> {
    let mut dict = IndexMap::new();
    for (k, v) in map {
        let node = if k.starts_with(RAW_KEY_PREFIX) {
            ConfigNode::Raw(v.as_str().unwrap_or_default().to_string())
        } else {
            value_to_node(v)
        };
        dict.insert(k.clone(), node);
    }
    dict
}

pub fn value_to_node(value: &Value) -> ConfigNode {
    match value {
        Value::Object(map) => ConfigNode::Dict(map_to_dict(map)),
        Value::Array(items) => {
            if items.len() == 7 && items.iter().all(|v| v.as_i64().is_some()) {
                let mut dims = [0i64; 7];
                for (slot, v) in dims.iter_mut().zip(items) {
                    *slot = v.as_i64().unwrap();
                }
                ConfigNode::Scalar(Scalar::Dimensions(dims))
            } else {
                ConfigNode::List(items.iter().map(value_to_node).collect())
            }
        }
        Value::Number(n) => ConfigNode::Scalar(Scalar::Number(n.as_f64().unwrap_or(0.0))),
        Value::Bool(b) => ConfigNode::Scalar(Scalar::Bool(*b)),
        Value::String(s) => {
            let wordlike = !s.is_empty()
                && !s.contains(|c: char| {
                    c.is_whitespace() || matches!(c, '{' | '}' | ';' | '"' | '[' | ']' | '$' | '#')
                });
            if wordlike {
                ConfigNode::Scalar(Scalar::Word(s.clone()))
            } else {
                ConfigNode::Raw(s.clone())
            }
        }
        Value::Null => ConfigNode::Raw(String::new()),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_dictionary;
    use super::*;

    fn parse(text: &str) -> ConfigTree {
        parse_dictionary(text).unwrap().0
    }

    const FV_SOLUTION_FRAGMENT: &str = r#"
        solvers
        {
            p
            {
                solver GAMG;
                smoother DICGaussSeidel;
                tolerance 1e-06;
                relTol 0.05;
            }
        }
    "#;

    #[test]
    fn json_of_fv_solution_fragment() {
        let tree = parse(FV_SOLUTION_FRAGMENT);
        let json = serialize_json(&tree);
        let value: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["solvers"]["p"]["solver"], "GAMG");
        assert_eq!(value["solvers"]["p"]["smoother"], "DICGaussSeidel");
        assert_eq!(value["solvers"]["p"]["tolerance"], 1e-6);
        assert_eq!(value["solvers"]["p"]["relTol"], 0.05);
    }

    #[test]
    fn empty_tree_gives_empty_object() {
        assert_eq!(serialize_json(&ConfigTree::default()), "{}\n");
    }

    #[test]
    fn json_is_deterministic() {
        let tree = parse(FV_SOLUTION_FRAGMENT);
        assert_eq!(serialize_json(&tree), serialize_json(&tree.clone()));
    }

    #[test]
    fn json_reparses_to_equal_tree() {
        let tree = parse(
            "dimensions [0 2 -2 0 0 0 0];\ninternalField uniform (1 0 0);\nfoo { bar 1.5; name \"x y\"; }",
        );
        let value: Value = serde_json::from_str(&serialize_json(&tree)).unwrap();
        let back = from_json_value(&value);
        assert_eq!(tree, back);
    }

    #[test]
    fn foam_round_trip_fixed_point() {
        let tree = parse(FV_SOLUTION_FRAGMENT);
        let text = serialize_foam(&tree).unwrap();
        let again = parse(&text);
        assert_eq!(tree, again);
        // Single-entry formatting, whitespace-insensitive.
        let small = parse("p { solver GAMG; }");
        assert_eq!(serialize_foam(&small).unwrap(), "p\n{\n    solver GAMG;\n}\n");
    }

    #[test]
    fn dimension_vector_emits_brackets() {
        let tree = parse("dimensions [0 2 -2 0 0 0 0];");
        assert_eq!(
            serialize_foam(&tree).unwrap(),
            "dimensions [0 2 -2 0 0 0 0];\n"
        );
    }

    #[test]
    fn directive_round_trips_verbatim() {
        let tree = parse("#include \"initialConditions\"\nfoo 1;");
        let text = serialize_foam(&tree).unwrap();
        assert!(text.contains("#include \"initialConditions\""));
        assert_eq!(parse(&text), tree);
    }

    #[test]
    fn directive_inside_list_is_a_conflict() {
        let mut tree = ConfigTree::default();
        tree.root.insert(
            "xs".into(),
            ConfigNode::List(vec![ConfigNode::Raw("#include \"x\"".into())]),
        );
        assert!(matches!(
            serialize_foam(&tree),
            Err(FoamError::RawEmissionConflict)
        ));
    }

    #[test]
    fn comment_erasure() {
        let tree = parse("/* header */ a 1; // note\n");
        let text = serialize_foam(&tree).unwrap();
        assert!(!text.contains("/*") && !text.contains("//"));
    }
}
