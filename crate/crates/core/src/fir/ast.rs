use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};

use super::types::FrontendType;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl Literal {
    /// Type a literal has before any promotion.
    pub fn natural_type(&self) -> FrontendType {
        match self {
            Literal::Int(_) => FrontendType::i64(),
            Literal::Float(_) => FrontendType::f64(),
            Literal::Bool(_) => FrontendType::bool(),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(n) => write!(f, "{n}"),
            Literal::Float(x) => {
                let s = format!("{x:?}");
                write!(f, "{s}")
            }
            Literal::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Operand of a FIR statement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FirArg {
    /// `%n`
    Ssa(u32),
    /// `_k`, 1-based.
    Param(usize),
    Literal(Literal),
}

impl fmt::Display for FirArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FirArg::Ssa(n) => write!(f, "%{n}"),
            FirArg::Param(k) => write!(f, "_{k}"),
            FirArg::Literal(l) => write!(f, "{l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatementKind {
    Invoke { target: String, args: Vec<FirArg>, ty: FrontendType },
    /// Incoming values keyed by 1-based predecessor block number.
    Phi { incomings: Vec<(usize, FirArg)>, ty: FrontendType },
    Goto(usize),
    /// Falls through to the next block when `cond` holds, else jumps to `target`.
    GotoIfNot { cond: FirArg, target: usize },
    Return(Option<FirArg>),
    Nothing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    /// SSA id defined by this statement, if any.
    pub result: Option<u32>,
    pub kind: StatementKind,
}

impl Statement {
    pub fn new(result: Option<u32>, kind: StatementKind) -> Self {
        Statement { result, kind }
    }

    pub fn is_terminator(&self) -> bool {
        matches!(self.kind, StatementKind::Goto(_) | StatementKind::GotoIfNot { .. } | StatementKind::Return(_))
    }

    pub fn is_phi(&self) -> bool {
        matches!(self.kind, StatementKind::Phi { .. })
    }

    /// Declared result type of an Invoke or Phi.
    pub fn result_type(&self) -> Option<&FrontendType> {
        match &self.kind {
            StatementKind::Invoke { ty, .. } | StatementKind::Phi { ty, .. } => Some(ty),
            _ => None,
        }
    }

    /// All operands read by this statement, phi incomings included.
    pub fn args(&self) -> Vec<FirArg> {
        match &self.kind {
            StatementKind::Invoke { args, .. } => args.clone(),
            StatementKind::Phi { incomings, .. } => incomings.iter().map(|(_, a)| *a).collect(),
            StatementKind::GotoIfNot { cond, .. } => vec![*cond],
            StatementKind::Return(Some(a)) => vec![*a],
            _ => Vec::new(),
        }
    }

    pub fn args_mut(&mut self) -> Vec<&mut FirArg> {
        match &mut self.kind {
            StatementKind::Invoke { args, .. } => args.iter_mut().collect(),
            StatementKind::Phi { incomings, .. } => incomings.iter_mut().map(|(_, a)| a).collect(),
            StatementKind::GotoIfNot { cond, .. } => vec![cond],
            StatementKind::Return(Some(a)) => vec![a],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FirBlock {
    pub statements: Vec<Statement>,
}

/// A typed SSA function with 1-based numbered blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFunction {
    pub name: String,
    pub params: Vec<FrontendType>,
    pub blocks: Vec<FirBlock>,
}

impl FirFunction {
    pub fn new(name: impl Into<String>, params: Vec<FrontendType>) -> Self {
        FirFunction { name: name.into(), params, blocks: Vec::new() }
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block by 1-based number.
    pub fn block(&self, number: usize) -> &FirBlock {
        &self.blocks[number - 1]
    }

    pub fn block_mut(&mut self, number: usize) -> &mut FirBlock {
        &mut self.blocks[number - 1]
    }

    /// Control-flow successors of a block, true edge first for `GotoIfNot`.
    pub fn successors(&self, number: usize) -> Vec<usize> {
        match self.block(number).statements.iter().rev().find(|s| s.is_terminator()).map(|s| &s.kind) {
            Some(StatementKind::Goto(t)) => vec![*t],
            Some(StatementKind::GotoIfNot { target, .. }) => vec![number + 1, *target],
            Some(StatementKind::Return(_)) => vec![],
            _ => vec![number + 1],
        }
    }

    /// Direct predecessors of every block, indexed by block number (index 0 unused).
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.blocks.len() + 1];
        for b in 1..=self.blocks.len() {
            for s in self.successors(b) {
                if s >= 1 && s <= self.blocks.len() && !preds[s].contains(&b) {
                    preds[s].push(b);
                }
            }
        }
        preds
    }

    /// Blocks reachable from block 1, in ascending order.
    pub fn reachable_blocks(&self) -> Vec<usize> {
        let n = self.blocks.len();
        if n == 0 {
            return Vec::new();
        }
        let mut seen = vec![false; n + 1];
        let mut stack = vec![1];
        seen[1] = true;
        while let Some(b) = stack.pop() {
            for s in self.successors(b) {
                if s >= 1 && s <= n && !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        (1..=n).filter(|&b| seen[b]).collect()
    }

    pub fn statements(&self) -> impl Iterator<Item = &Statement> {
        self.blocks.iter().flat_map(|b| &b.statements)
    }

    pub fn statements_mut(&mut self) -> impl Iterator<Item = &mut Statement> {
        self.blocks.iter_mut().flat_map(|b| &mut b.statements)
    }

    /// Declared type of every SSA id.
    pub fn ssa_types(&self) -> HashMap<u32, FrontendType> {
        self.statements()
            .filter_map(|s| Some((s.result?, s.result_type()?.clone())))
            .collect()
    }

    /// Static type of an argument, if it is defined.
    pub fn arg_type(&self, arg: &FirArg, ssa_types: &HashMap<u32, FrontendType>) -> Option<FrontendType> {
        match arg {
            FirArg::Ssa(n) => ssa_types.get(n).cloned(),
            FirArg::Param(k) => self.params.get(k.wrapping_sub(1)).cloned(),
            FirArg::Literal(l) => Some(l.natural_type()),
        }
    }

    pub fn max_ssa_id(&self) -> u32 {
        self.statements().filter_map(|s| s.result).max().unwrap_or(0)
    }

    /// Types returned by this function (`None` for a bare `return`), in statement order.
    pub fn return_types(&self) -> Vec<Option<FrontendType>> {
        let types = self.ssa_types();
        self.statements()
            .filter_map(|s| match &s.kind {
                StatementKind::Return(a) => Some(a.as_ref().and_then(|a| self.arg_type(a, &types))),
                _ => None,
            })
            .collect()
    }

    /// Renumbers SSA ids to their 1-based global statement positions.
    pub fn renumber_ssa(&mut self) {
        let mut map = HashMap::new();
        let mut pos = 0u32;
        for s in self.statements() {
            pos += 1;
            if let Some(r) = s.result {
                map.insert(r, pos);
            }
        }
        for s in self.statements_mut() {
            if let Some(r) = s.result.as_mut() {
                *r = map[r];
            }
            for a in s.args_mut() {
                if let FirArg::Ssa(n) = a {
                    if let Some(&m) = map.get(n) {
                        *n = m;
                    }
                }
            }
        }
    }

    /// Names of all invoked targets.
    pub fn invoked_targets(&self) -> HashSet<&str> {
        self.statements()
            .filter_map(|s| match &s.kind {
                StatementKind::Invoke { target, .. } => Some(target.as_str()),
                _ => None,
            })
            .collect()
    }
}

/// Functions by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FirProgram {
    pub functions: BTreeMap<String, FirFunction>,
}

impl FirProgram {
    pub fn get(&self, name: &str) -> Option<&FirFunction> {
        self.functions.get(name)
    }

    pub fn insert(&mut self, f: FirFunction) -> Option<FirFunction> {
        self.functions.insert(f.name.clone(), f)
    }
}

fn write_args(out: &mut String, args: &[FirArg]) {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{a}");
    }
}

/// Serializes a function back to FIR text.
pub fn print_fir(f: &FirFunction) -> String {
    let mut out = String::new();
    let params: Vec<String> = f.params.iter().enumerate().map(|(i, t)| format!("_{}: {t}", i + 1)).collect();
    let _ = writeln!(out, "fn {}({})", f.name, params.join(", "));
    for (i, block) in f.blocks.iter().enumerate() {
        let _ = writeln!(out, "{}:", i + 1);
        for s in &block.statements {
            out.push_str("  ");
            if let Some(r) = s.result {
                let _ = write!(out, "%{r} = ");
            }
            match &s.kind {
                StatementKind::Invoke { target, args, ty } => {
                    let _ = write!(out, "invoke {target}(");
                    write_args(&mut out, args);
                    let _ = write!(out, ") :: {ty}");
                }
                StatementKind::Phi { incomings, ty } => {
                    let parts: Vec<String> = incomings.iter().map(|(p, a)| format!("#{p} => {a}")).collect();
                    let _ = write!(out, "phi ({}) :: {ty}", parts.join(", "));
                }
                StatementKind::Goto(t) => {
                    let _ = write!(out, "goto #{t}");
                }
                StatementKind::GotoIfNot { cond, target } => {
                    let _ = write!(out, "goto #{target} ifnot {cond}");
                }
                StatementKind::Return(Some(a)) => {
                    let _ = write!(out, "return {a}");
                }
                StatementKind::Return(None) => out.push_str("return"),
                StatementKind::Nothing => out.push_str("nothing"),
            }
            out.push('\n');
        }
    }
    out
}

pub fn print_program(p: &FirProgram) -> String {
    p.functions.values().map(print_fir).collect::<Vec<_>>().join("\n")
}
