//! Forced inlining of every non-intrinsic call.

use std::collections::HashMap;

use thiserror::Error;

use super::ast::{FirArg, FirBlock, FirFunction, FirProgram, Statement, StatementKind};
use super::types::FrontendType;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InlineError {
    #[error("entry function `{0}` is not defined")]
    UnknownEntry(String),
    #[error("`{caller}` invokes `{target}({})`, which is neither an intrinsic nor a defined function", fmt_types(.arg_types))]
    UnresolvedTarget { caller: String, target: String, arg_types: Vec<FrontendType> },
    #[error("recursive call cycle: {}", .cycle.join(" -> "))]
    Recursion { cycle: Vec<String> },
    #[error("`{caller}` calls `{callee}` with {given} arguments, expected {expected}")]
    Arity { caller: String, callee: String, given: usize, expected: usize },
}

fn fmt_types(ts: &[FrontendType]) -> String {
    ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
}

/// Returns a copy of `entry` with every call to a program-defined function spliced in.
///
/// Targets accepted by `is_intrinsic` are left alone even if the program defines them.
pub fn inline_calls<P>(program: &FirProgram, entry: &str, is_intrinsic: P) -> Result<FirFunction, InlineError>
where
    P: Fn(&str, &[FrontendType]) -> bool,
{
    let f = program.get(entry).ok_or_else(|| InlineError::UnknownEntry(entry.to_string()))?;
    let mut inliner = Inliner { program, is_intrinsic: &is_intrinsic, done: HashMap::new(), stack: Vec::new() };
    inliner.inline(f)
}

struct Inliner<'a, P> {
    program: &'a FirProgram,
    is_intrinsic: &'a P,
    done: HashMap<String, FirFunction>,
    stack: Vec<String>,
}

/// A statement that calls a program-defined function.
struct CallSite {
    block: usize,
    index: usize,
    callee: String,
}

impl<P> Inliner<'_, P>
where
    P: Fn(&str, &[FrontendType]) -> bool,
{
    fn inline(&mut self, f: &FirFunction) -> Result<FirFunction, InlineError> {
        if let Some(done) = self.done.get(&f.name) {
            return Ok(done.clone());
        }
        if let Some(pos) = self.stack.iter().position(|n| *n == f.name) {
            return Err(InlineError::Recursion { cycle: self.stack[pos..].to_vec() });
        }
        self.stack.push(f.name.clone());

        // Resolve every callee first so errors surface in call-graph order.
        for site in self.call_sites(f)? {
            let callee = &self.program.functions[&site.callee];
            self.inline(callee)?;
        }

        let mut out = f.clone();
        let mut changed = false;
        while let Some(site) = self.call_sites(&out)?.into_iter().next() {
            let callee = self.done[&site.callee].clone();
            splice(&mut out, &site, &callee)?;
            changed = true;
        }
        if changed {
            out.renumber_ssa();
        }
        self.stack.pop();
        self.done.insert(f.name.clone(), out.clone());
        Ok(out)
    }

    fn call_sites(&self, f: &FirFunction) -> Result<Vec<CallSite>, InlineError> {
        let types = f.ssa_types();
        let mut sites = Vec::new();
        for (bi, block) in f.blocks.iter().enumerate() {
            for (si, s) in block.statements.iter().enumerate() {
                let StatementKind::Invoke { target, args, .. } = &s.kind else { continue };
                let arg_types: Vec<FrontendType> =
                    args.iter().map(|a| f.arg_type(a, &types).unwrap_or(FrontendType::Any)).collect();
                if (self.is_intrinsic)(target, &arg_types) {
                    continue;
                }
                if !self.program.functions.contains_key(target) {
                    return Err(InlineError::UnresolvedTarget {
                        caller: f.name.clone(),
                        target: target.clone(),
                        arg_types,
                    });
                }
                sites.push(CallSite { block: bi + 1, index: si, callee: target.clone() });
            }
        }
        Ok(sites)
    }
}

/// Replaces the call at `site` by the blocks of `callee`.
///
/// Layout after splicing: `[pre][callee blocks][continuation]`, so the pre block falls
/// through into the callee entry and every callee return jumps to the continuation.
fn splice(f: &mut FirFunction, site: &CallSite, callee: &FirFunction) -> Result<(), InlineError> {
    let b = site.block;
    let m = callee.num_blocks();
    let cont = b + m + 1;
    let call = f.block(b).statements[site.index].clone();
    let StatementKind::Invoke { args: call_args, ty: call_ty, .. } = &call.kind else {
        unreachable!("call sites are invokes")
    };
    if call_args.len() != callee.params.len() {
        return Err(InlineError::Arity {
            caller: f.name.clone(),
            callee: callee.name.clone(),
            given: call_args.len(),
            expected: callee.params.len(),
        });
    }

    // Caller blocks after `b` shift by the callee size plus the continuation.
    let shift_target = |t: usize| if t > b { t + m + 1 } else { t };
    let shift_pred = |p: usize| if p > b { p + m + 1 } else if p == b { cont } else { p };
    for (bi, block) in f.blocks.iter_mut().enumerate() {
        let number = bi + 1;
        for s in &mut block.statements {
            match &mut s.kind {
                StatementKind::Goto(t) | StatementKind::GotoIfNot { target: t, .. } => *t = shift_target(*t),
                StatementKind::Phi { incomings, .. } if number != b => {
                    for (p, _) in incomings.iter_mut() {
                        *p = shift_pred(*p);
                    }
                }
                _ => {}
            }
        }
    }

    let base = f.max_ssa_id();
    let map_arg = |a: &FirArg| match a {
        FirArg::Ssa(n) => FirArg::Ssa(n + base),
        FirArg::Param(k) => call_args[k - 1],
        FirArg::Literal(l) => FirArg::Literal(*l),
    };
    let mut returns: Vec<(usize, Option<FirArg>)> = Vec::new();
    let mut body: Vec<FirBlock> = Vec::with_capacity(m);
    for (ci, cblock) in callee.blocks.iter().enumerate() {
        let number = b + ci + 1;
        let mut stmts = Vec::with_capacity(cblock.statements.len());
        for s in &cblock.statements {
            let kind = match &s.kind {
                StatementKind::Invoke { target, args, ty } => StatementKind::Invoke {
                    target: target.clone(),
                    args: args.iter().map(map_arg).collect(),
                    ty: ty.clone(),
                },
                StatementKind::Phi { incomings, ty } => StatementKind::Phi {
                    incomings: incomings.iter().map(|(p, a)| (p + b, map_arg(a))).collect(),
                    ty: ty.clone(),
                },
                StatementKind::Goto(t) => StatementKind::Goto(t + b),
                StatementKind::GotoIfNot { cond, target } => {
                    StatementKind::GotoIfNot { cond: map_arg(cond), target: target + b }
                }
                StatementKind::Return(a) => {
                    returns.push((number, a.as_ref().map(map_arg)));
                    StatementKind::Goto(cont)
                }
                StatementKind::Nothing => StatementKind::Nothing,
            };
            stmts.push(Statement::new(s.result.map(|r| r + base), kind));
        }
        body.push(FirBlock { statements: stmts });
    }

    let mut pre = std::mem::take(&mut f.block_mut(b).statements);
    let rest = pre.split_off(site.index + 1);
    pre.pop();
    let mut continuation = Vec::with_capacity(rest.len() + 1);
    let mut substitute = None;
    if let Some(r) = call.result {
        let values: Vec<(usize, FirArg)> = returns.iter().filter_map(|(p, a)| Some((*p, (*a)?))).collect();
        match values.as_slice() {
            [(_, only)] if returns.len() == 1 => substitute = Some((r, *only)),
            [] => {}
            _ => continuation.push(Statement::new(
                Some(r),
                StatementKind::Phi { incomings: values, ty: call_ty.clone() },
            )),
        }
    }
    continuation.extend(rest);
    f.block_mut(b).statements = pre;
    let tail = f.blocks.split_off(b);
    f.blocks.extend(body);
    f.blocks.push(FirBlock { statements: continuation });
    f.blocks.extend(tail);

    if let Some((r, value)) = substitute {
        for s in f.statements_mut() {
            for a in s.args_mut() {
                if *a == FirArg::Ssa(r) {
                    *a = value;
                }
            }
        }
    }
    Ok(())
}
