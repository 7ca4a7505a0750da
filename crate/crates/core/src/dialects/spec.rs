//! Line-oriented dialect spec format: loader and serializer.
//!
//! ```text
//! dialect arith
//! op addf "Floating point addition."
//!   operand lhs AnyFloat
//!   operand rhs same(0)
//!   result res same(0)
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use super::definition::{
    AttrKind, AttrSpec, DialectDefinition, OpDefinition, SuccessorCount, TypeConstraint, ValueSpec,
};
use crate::ir::{IrType, INT_WIDTHS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate op `{name}`")]
    DuplicateOp { line: usize, name: String },
    #[error("line {line}: `{constraint}` on `{value}` refers to an operand that is not available")]
    DanglingReference { line: usize, value: String, constraint: String },
}

fn syntax(line: usize, message: impl Into<String>) -> SpecError {
    SpecError::Syntax { line, message: message.into() }
}

fn parse_index_arg(text: &str, prefix: &str) -> Option<usize> {
    text.strip_prefix(prefix)?.strip_suffix(')')?.trim().parse().ok()
}

pub(crate) fn parse_constraint(text: &str) -> Option<TypeConstraint> {
    let c = match text {
        "f32" => TypeConstraint::Exact(IrType::Float32),
        "f64" => TypeConstraint::Exact(IrType::Float64),
        "index" => TypeConstraint::Exact(IrType::Index),
        "AnyFloat" => TypeConstraint::AnyFloat,
        "AnyInteger" => TypeConstraint::AnyInteger,
        "AnyTensor" => TypeConstraint::AnyTensor,
        "AnyMemRef" => TypeConstraint::AnyMemRef,
        "Any" => TypeConstraint::Any,
        _ => {
            if let Some(k) = parse_index_arg(text, "same(") {
                TypeConstraint::SameAs(k)
            } else if let Some(k) = parse_index_arg(text, "elem(") {
                TypeConstraint::ElementOf(k)
            } else if let Some(a) = text.strip_prefix("attrtype(").and_then(|t| t.strip_suffix(')')) {
                TypeConstraint::AttrType(a.trim().to_string())
            } else {
                let w: u32 = text.strip_prefix('i')?.parse().ok()?;
                if !INT_WIDTHS.contains(&w) {
                    return None;
                }
                TypeConstraint::Exact(IrType::Int(w))
            }
        }
    };
    Some(c)
}

fn parse_attr_kind(text: &str) -> Option<AttrKind> {
    Some(match text {
        "float" => AttrKind::Float,
        "int" => AttrKind::Int,
        "number" => AttrKind::Number,
        "string" => AttrKind::String,
        "array" => AttrKind::Array,
        "index_map" => AttrKind::IndexMap,
        "symbol" => AttrKind::Symbol,
        "type" => AttrKind::Type,
        _ => {
            let inner = text.strip_prefix("enum(")?.strip_suffix(')')?;
            let cases: Vec<String> = inner.split('|').map(|s| s.trim().to_string()).collect();
            if cases.iter().any(|c| c.is_empty()) {
                return None;
            }
            AttrKind::Enum(cases)
        }
    })
}

/// Splits `op <name> "doc"`, handling `\"` and `\\` escapes in the docstring.
fn parse_op_header(rest: &str, line: usize) -> Result<(String, String), SpecError> {
    let rest = rest.trim();
    let (name, tail) = match rest.find(char::is_whitespace) {
        Some(i) => (&rest[..i], rest[i..].trim()),
        None => (rest, ""),
    };
    if name.is_empty() {
        return Err(syntax(line, "op without a name"));
    }
    if tail.is_empty() {
        return Ok((name.to_string(), String::new()));
    }
    let body = tail
        .strip_prefix('"')
        .ok_or_else(|| syntax(line, "docstring must be double-quoted"))?;
    let mut doc = String::new();
    let mut chars = body.chars();
    loop {
        match chars.next() {
            None => return Err(syntax(line, "unterminated docstring")),
            Some('"') => break,
            Some('\\') => match chars.next() {
                Some(c @ ('"' | '\\')) => doc.push(c),
                Some('n') => doc.push('\n'),
                Some(c) => {
                    doc.push('\\');
                    doc.push(c);
                }
                None => return Err(syntax(line, "unterminated docstring")),
            },
            Some(c) => doc.push(c),
        }
    }
    if !chars.as_str().trim().is_empty() {
        return Err(syntax(line, "unexpected text after docstring"));
    }
    Ok((name.to_string(), doc))
}

fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct PendingOp {
    def: OpDefinition,
    line: usize,
}

fn finish_op(dialect: &mut DialectDefinition, pending: PendingOp) -> Result<(), SpecError> {
    let PendingOp { def, line } = pending;
    let dangling = |value: &ValueSpec| SpecError::DanglingReference {
        line,
        value: value.name.clone(),
        constraint: value.constraint.to_string(),
    };
    for (i, v) in def.operands.iter().enumerate() {
        match &v.constraint {
            TypeConstraint::SameAs(k) if *k >= i => return Err(dangling(v)),
            TypeConstraint::ElementOf(k) if *k == i || *k >= def.operands.len() => {
                return Err(dangling(v))
            }
            TypeConstraint::AttrType(_) => return Err(dangling(v)),
            _ => {}
        }
    }
    for v in &def.results {
        match &v.constraint {
            TypeConstraint::SameAs(k) | TypeConstraint::ElementOf(k) if *k >= def.operands.len() => {
                return Err(dangling(v))
            }
            TypeConstraint::AttrType(a) if def.attribute(a).is_none() => return Err(dangling(v)),
            _ => {}
        }
    }
    for list in [&def.operands, &def.results] {
        if list.iter().rev().skip(1).any(|v| v.variadic) {
            return Err(syntax(line, format!("only the last value of `{}` may be variadic", def.name)));
        }
    }
    if dialect.ops.contains_key(&def.name) {
        return Err(SpecError::DuplicateOp { line, name: def.name });
    }
    dialect.ops.insert(def.name.clone(), def);
    Ok(())
}

/// Parses one dialect definition from spec text.
pub fn load_dialect_spec(text: &str) -> Result<DialectDefinition, SpecError> {
    let mut dialect: Option<DialectDefinition> = None;
    let mut pending: Option<PendingOp> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (keyword, rest) = match trimmed.find(char::is_whitespace) {
            Some(i) => (&trimmed[..i], trimmed[i..].trim()),
            None => (trimmed, ""),
        };
        let words: Vec<&str> = rest.split_whitespace().collect();
        if keyword == "dialect" {
            if dialect.is_some() {
                return Err(syntax(line, "only one `dialect` header is allowed"));
            }
            if words.len() != 1 || !is_identifier(words[0]) {
                return Err(syntax(line, "expected `dialect <name>`"));
            }
            dialect = Some(DialectDefinition::new(words[0]));
            continue;
        }
        let d = dialect
            .as_mut()
            .ok_or_else(|| syntax(line, "expected `dialect <name>` header first"))?;
        if keyword == "op" {
            if let Some(p) = pending.take() {
                finish_op(d, p)?;
            }
            let (name, doc) = parse_op_header(rest, line)?;
            if !is_identifier(&name) {
                return Err(syntax(line, format!("invalid op name `{name}`")));
            }
            let mut def = OpDefinition::new(name);
            def.doc = doc;
            pending = Some(PendingOp { def, line });
            continue;
        }
        let op = &mut pending
            .as_mut()
            .ok_or_else(|| syntax(line, format!("`{keyword}` outside of an op")))?
            .def;
        match keyword {
            "operand" | "result" => {
                let (name, constraint, variadic) = match words.as_slice() {
                    [n, c] => (*n, *c, false),
                    [n, c, "variadic"] => (*n, *c, true),
                    _ => return Err(syntax(line, format!("expected `{keyword} <name> <constraint> [variadic]`"))),
                };
                let constraint = parse_constraint(constraint)
                    .ok_or_else(|| syntax(line, format!("unknown constraint `{constraint}`")))?;
                let spec = ValueSpec { name: name.to_string(), constraint, variadic };
                if keyword == "operand" {
                    op.operands.push(spec);
                } else {
                    op.results.push(spec);
                }
            }
            "attr" => {
                let (name, kind, required) = match words.as_slice() {
                    [n, k] => (*n, *k, false),
                    [n, k, "required"] => (*n, *k, true),
                    _ => return Err(syntax(line, "expected `attr <name> <kind> [required]`")),
                };
                let kind = parse_attr_kind(kind)
                    .ok_or_else(|| syntax(line, format!("unknown attribute kind `{kind}`")))?;
                op.attributes.push(AttrSpec { name: name.to_string(), kind, required });
            }
            "regions" => {
                op.regions = match words.as_slice() {
                    [n] => n.parse().map_err(|_| syntax(line, "region count must be an integer"))?,
                    _ => return Err(syntax(line, "expected `regions <n>`")),
                };
            }
            "terminator" => {
                op.terminator = true;
                op.successors = match words.as_slice() {
                    [] => SuccessorCount::Fixed(0),
                    ["successors", "variadic"] => SuccessorCount::Variadic,
                    ["successors", n] => SuccessorCount::Fixed(
                        n.parse().map_err(|_| syntax(line, "successor count must be an integer"))?,
                    ),
                    _ => return Err(syntax(line, "expected `terminator [successors <n|variadic>]`")),
                };
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }
    let mut d = dialect.ok_or_else(|| syntax(1, "missing `dialect <name>` header"))?;
    if let Some(p) = pending.take() {
        finish_op(&mut d, p)?;
    }
    Ok(d)
}

fn escape_doc(doc: &str) -> String {
    let mut out = String::with_capacity(doc.len());
    for c in doc.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

fn constraint_text(c: &TypeConstraint) -> String {
    c.to_string()
}

/// Writes a definition back out in spec format.
pub fn serialize_dialect(def: &DialectDefinition) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dialect {}", def.name);
    for op in def.ops.values() {
        let _ = writeln!(out);
        let _ = writeln!(out, "op {} \"{}\"", op.name, escape_doc(&op.doc));
        for (kw, list) in [("operand", &op.operands), ("result", &op.results)] {
            for v in list {
                let _ = write!(out, "  {kw} {} {}", v.name, constraint_text(&v.constraint));
                if v.variadic {
                    out.push_str(" variadic");
                }
                out.push('\n');
            }
        }
        for a in &op.attributes {
            let _ = write!(out, "  attr {} {}", a.name, a.kind);
            if a.required {
                out.push_str(" required");
            }
            out.push('\n');
        }
        if op.regions > 0 {
            let _ = writeln!(out, "  regions {}", op.regions);
        }
        if op.terminator {
            match op.successors {
                SuccessorCount::Fixed(0) => out.push_str("  terminator\n"),
                SuccessorCount::Fixed(n) => {
                    let _ = writeln!(out, "  terminator successors {n}");
                }
                SuccessorCount::Variadic => out.push_str("  terminator successors variadic\n"),
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const ADDF: &str = r#"
# comment
dialect arith
op addf "Adds two floats."
  operand lhs AnyFloat
  operand rhs same(0)
  result res same(0)
"#;

    #[test]
    fn loads_addf() {
        let d = load_dialect_spec(ADDF).unwrap();
        let op = d.op("addf").unwrap();
        assert_eq!(op.operands.len(), 2);
        assert_eq!(op.results.len(), 1);
        assert_eq!(op.doc, "Adds two floats.");
        assert_eq!(op.operands[1].constraint, TypeConstraint::SameAs(0));
    }

    #[test]
    fn round_trip_equivalent() {
        let d = load_dialect_spec(ADDF).unwrap();
        let again = load_dialect_spec(&serialize_dialect(&d)).unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn empty_dialect() {
        let d = load_dialect_spec("dialect empty\n").unwrap();
        assert!(d.ops.is_empty());
    }

    #[test]
    fn duplicate_op() {
        let err = load_dialect_spec("dialect a\nop addf\nop addf\n").unwrap_err();
        assert_eq!(err, SpecError::DuplicateOp { line: 3, name: "addf".into() });
    }

    #[test]
    fn dangling_same() {
        let err = load_dialect_spec("dialect a\nop f\n  operand x same(0)\n").unwrap_err();
        assert!(matches!(err, SpecError::DanglingReference { .. }));
        let err = load_dialect_spec("dialect a\nop f\n  operand x f32\n  result r same(3)\n").unwrap_err();
        assert!(matches!(err, SpecError::DanglingReference { .. }));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = load_dialect_spec("dialect a\nop f\n  operand x Bogus\n").unwrap_err();
        assert!(matches!(err, SpecError::Syntax { line: 3, .. }));
        let err = load_dialect_spec("op f\n").unwrap_err();
        assert!(matches!(err, SpecError::Syntax { line: 1, .. }));
        let err = load_dialect_spec("dialect a\nop f \"open\n").unwrap_err();
        assert!(matches!(err, SpecError::Syntax { line: 2, .. }));
    }

    #[test]
    fn docstring_escapes_survive() {
        let text = "dialect a\nop f \"say \\\"hi\\\" # not a comment\"\n  terminator successors variadic\n";
        let d = load_dialect_spec(text).unwrap();
        assert_eq!(d.op("f").unwrap().doc, "say \"hi\" # not a comment");
        assert_eq!(load_dialect_spec(&serialize_dialect(&d)).unwrap(), d);
    }
}
