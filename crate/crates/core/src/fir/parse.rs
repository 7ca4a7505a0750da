//! Parser for FIR text.
//!
//! ```text
//! fn max(_1: i64, _2: i64)
//! 1:
//!   %1 = invoke >=(_1, _2) :: i1
//!   goto #3 ifnot %1
//! 2:
//!   goto #4
//! 3:
//!   nothing
//! 4:
//!   %6 = phi (#2 => _1, #3 => _2) :: i64
//!   return %6
//! ```

use std::collections::HashSet;

use thiserror::Error;

use super::ast::{FirArg, FirBlock, FirFunction, FirProgram, Literal, Statement, StatementKind};
use super::types::{split_top_level, TypeLattice};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FirParseError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}: reference to undefined SSA value %{id}")]
    UndefinedSsa { line: usize, id: u32 },
    #[error("{line}: reference to undefined parameter _{index}")]
    UndefinedParam { line: usize, index: usize },
    #[error("{line}: reference to undefined block #{block}")]
    UndefinedBlock { line: usize, block: usize },
    #[error("{line}: function `{name}` is defined twice")]
    DuplicateFunction { line: usize, name: String },
}

struct Line<'a> {
    number: usize,
    raw: &'a str,
    text: &'a str,
}

impl Line<'_> {
    fn err(&self, at: &str, message: impl Into<String>) -> FirParseError {
        let column = if at.is_empty() {
            self.raw.len() + 1
        } else {
            self.raw.find(at).map_or(1, |c| c + 1)
        };
        FirParseError::Syntax { line: self.number, column, message: message.into() }
    }
}

/// References that can only be resolved once the whole function is read.
struct PendingRefs {
    ssa: Vec<(usize, u32)>,
    params: Vec<(usize, usize)>,
    blocks: Vec<(usize, usize)>,
}

struct FunctionBuilder {
    func: FirFunction,
    line: usize,
    refs: PendingRefs,
}

/// Parses a FIR program with the default type lattice.
pub fn parse_program(text: &str) -> Result<FirProgram, FirParseError> {
    parse_program_with(text, &TypeLattice::default())
}

pub fn parse_program_with(text: &str, lattice: &TypeLattice) -> Result<FirProgram, FirParseError> {
    let mut program = FirProgram::default();
    let mut current: Option<FunctionBuilder> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = Line { number: idx + 1, raw, text: raw.trim() };
        if line.text.is_empty() || line.text.starts_with('#') || line.text.starts_with("//") {
            continue;
        }
        if let Some(rest) = line.text.strip_prefix("fn ") {
            if let Some(done) = current.take() {
                finish(&mut program, done)?;
            }
            current = Some(FunctionBuilder {
                func: parse_header(rest, &line, lattice)?,
                line: line.number,
                refs: PendingRefs { ssa: Vec::new(), params: Vec::new(), blocks: Vec::new() },
            });
            continue;
        }
        let fb = current.as_mut().ok_or_else(|| line.err(line.text, "expected `fn <name>(...)`"))?;
        if let Some(num) = line.text.strip_suffix(':') {
            let n: usize = num.trim().parse().map_err(|_| line.err(line.text, "expected a block header `<k>:`"))?;
            if n != fb.func.blocks.len() + 1 {
                return Err(line.err(num, format!("expected block {}, found {n}", fb.func.blocks.len() + 1)));
            }
            fb.func.blocks.push(FirBlock::default());
            continue;
        }
        if fb.func.blocks.is_empty() {
            return Err(line.err(line.text, "statement before the first block header"));
        }
        let stmt = parse_statement(&line, lattice, &mut fb.refs)?;
        fb.func.blocks.last_mut().expect("checked").statements.push(stmt);
    }
    if let Some(done) = current.take() {
        finish(&mut program, done)?;
    }
    Ok(program)
}

fn finish(program: &mut FirProgram, fb: FunctionBuilder) -> Result<(), FirParseError> {
    let f = fb.func;
    let defined: HashSet<u32> = f.statements().filter_map(|s| s.result).collect();
    if let Some(&(line, id)) = fb.refs.ssa.iter().find(|(_, id)| !defined.contains(id)) {
        return Err(FirParseError::UndefinedSsa { line, id });
    }
    if let Some(&(line, index)) = fb.refs.params.iter().find(|(_, k)| *k == 0 || *k > f.params.len()) {
        return Err(FirParseError::UndefinedParam { line, index });
    }
    if let Some(&(line, block)) = fb.refs.blocks.iter().find(|(_, b)| *b == 0 || *b > f.blocks.len()) {
        return Err(FirParseError::UndefinedBlock { line, block });
    }
    if program.functions.contains_key(&f.name) {
        return Err(FirParseError::DuplicateFunction { line: fb.line, name: f.name });
    }
    program.insert(f);
    Ok(())
}

fn parse_header(rest: &str, line: &Line<'_>, lattice: &TypeLattice) -> Result<FirFunction, FirParseError> {
    let open = rest.find('(').ok_or_else(|| line.err(rest, "expected `(` after function name"))?;
    let name = rest[..open].trim();
    if name.is_empty() {
        return Err(line.err(rest, "missing function name"));
    }
    let close = rest.rfind(')').ok_or_else(|| line.err("", "expected `)`"))?;
    if !rest[close + 1..].trim().is_empty() {
        return Err(line.err(&rest[close + 1..], "unexpected text after parameter list"));
    }
    let mut params = Vec::new();
    for (i, p) in split_top_level(&rest[open + 1..close]).into_iter().enumerate() {
        let (pname, ty) = p.split_once(':').ok_or_else(|| line.err(p, "expected `_k: <type>`"))?;
        if pname.trim() != format!("_{}", i + 1) {
            return Err(line.err(pname.trim(), format!("parameter {} must be named `_{}`", i + 1, i + 1)));
        }
        params.push(lattice.parse_type(ty).map_err(|m| line.err(ty.trim(), m))?);
    }
    Ok(FirFunction::new(name, params))
}

fn parse_block_ref(text: &str, line: &Line<'_>, refs: &mut PendingRefs) -> Result<usize, FirParseError> {
    let n: usize = text
        .trim()
        .strip_prefix('#')
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| line.err(text.trim(), "expected a block reference `#k`"))?;
    refs.blocks.push((line.number, n));
    Ok(n)
}

fn parse_arg(text: &str, line: &Line<'_>, refs: &mut PendingRefs) -> Result<FirArg, FirParseError> {
    let t = text.trim();
    if let Some(n) = t.strip_prefix('%') {
        let id: u32 = n.parse().map_err(|_| line.err(t, "bad SSA reference"))?;
        refs.ssa.push((line.number, id));
        return Ok(FirArg::Ssa(id));
    }
    if let Some(k) = t.strip_prefix('_') {
        let k: usize = k.parse().map_err(|_| line.err(t, "bad parameter reference"))?;
        refs.params.push((line.number, k));
        return Ok(FirArg::Param(k));
    }
    match t {
        "true" => return Ok(FirArg::Literal(Literal::Bool(true))),
        "false" => return Ok(FirArg::Literal(Literal::Bool(false))),
        _ => {}
    }
    if let Ok(n) = t.parse::<i64>() {
        return Ok(FirArg::Literal(Literal::Int(n)));
    }
    if t.contains(['.', 'e', 'E']) || t.contains("inf") || t.contains("NaN") {
        if let Ok(x) = t.parse::<f64>() {
            return Ok(FirArg::Literal(Literal::Float(x)));
        }
    }
    Err(line.err(t, format!("cannot parse argument `{t}`")))
}

fn parse_type_suffix<'a>(
    text: &'a str,
    line: &Line<'_>,
    lattice: &TypeLattice,
) -> Result<(&'a str, super::types::FrontendType), FirParseError> {
    let (body, ty) = text.rsplit_once("::").ok_or_else(|| line.err("", "expected `:: <type>`"))?;
    let ty = lattice.parse_type(ty).map_err(|m| line.err(ty.trim(), m))?;
    Ok((body.trim(), ty))
}

fn parse_statement(line: &Line<'_>, lattice: &TypeLattice, refs: &mut PendingRefs) -> Result<Statement, FirParseError> {
    let mut text = line.text;
    let mut result = None;
    if text.starts_with('%') {
        let (lhs, rhs) = text.split_once('=').ok_or_else(|| line.err(text, "expected `%n = ...`"))?;
        let id: u32 = lhs
            .trim()
            .strip_prefix('%')
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| line.err(lhs.trim(), "bad SSA id"))?;
        result = Some(id);
        text = rhs.trim();
    }

    let kind = if let Some(rest) = text.strip_prefix("invoke ") {
        let (body, ty) = parse_type_suffix(rest, line, lattice)?;
        let open = body.find('(').ok_or_else(|| line.err(body, "expected `(`"))?;
        let target = body[..open].trim();
        if target.is_empty() {
            return Err(line.err(body, "missing invoke target"));
        }
        let inner = body[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| line.err(body, "expected `)` closing the argument list"))?;
        let args = split_top_level(inner)
            .into_iter()
            .map(|a| parse_arg(a, line, refs))
            .collect::<Result<_, _>>()?;
        StatementKind::Invoke { target: target.to_string(), args, ty }
    } else if let Some(rest) = text.strip_prefix("phi") {
        let (body, ty) = parse_type_suffix(rest, line, lattice)?;
        let inner = body
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(|| line.err(body, "expected `(#p => arg, ...)`"))?;
        let mut incomings = Vec::new();
        for part in split_top_level(inner) {
            let (pred, arg) = part.split_once("=>").ok_or_else(|| line.err(part.trim(), "expected `#p => arg`"))?;
            incomings.push((parse_block_ref(pred, line, refs)?, parse_arg(arg, line, refs)?));
        }
        StatementKind::Phi { incomings, ty }
    } else if let Some(rest) = text.strip_prefix("goto") {
        let rest = rest.trim();
        let (target, cond) = if let Some((t, c)) = rest.split_once("ifnot") {
            (t, Some(c))
        } else if let Some((t, c)) = rest.split_once("if not") {
            (t, Some(c))
        } else {
            (rest, None)
        };
        let target = parse_block_ref(target, line, refs)?;
        match cond {
            Some(c) => StatementKind::GotoIfNot { cond: parse_arg(c, line, refs)?, target },
            None => StatementKind::Goto(target),
        }
    } else if text == "return" {
        StatementKind::Return(None)
    } else if let Some(rest) = text.strip_prefix("return ") {
        StatementKind::Return(Some(parse_arg(rest, line, refs)?))
    } else if text == "nothing" || text == "nothing::Nothing" {
        StatementKind::Nothing
    } else {
        return Err(line.err(text, format!("unknown statement `{text}`")));
    };

    let needs_result = matches!(kind, StatementKind::Phi { .. });
    let allows_result = matches!(kind, StatementKind::Invoke { .. } | StatementKind::Phi { .. });
    if result.is_some() && !allows_result {
        return Err(line.err(line.text, "only invoke and phi statements define values"));
    }
    if result.is_none() && needs_result {
        return Err(line.err(line.text, "phi statements must define a value"));
    }
    Ok(Statement::new(result, kind))
}
