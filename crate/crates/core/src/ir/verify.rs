//! Structural verifier. Collects every violation instead of stopping at the first.

use std::collections::{HashMap, HashSet};
use std::fmt;

use super::dominance::Dominance;
use super::module::{BlockId, IrModule, OpId, RegionId, ValueId, ValueOrigin};
use super::types::IrType;
use crate::dialects::{DialectRegistry, ViolationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    MissingTerminator,
    MisplacedTerminator,
    UnknownOp,
    ArityMismatch,
    TypeMismatch,
    MissingAttribute,
    AttributeKind,
    RegionCount,
    SuccessorCount,
    BadSuccessor,
    Dominance,
    InvalidReference,
    DuplicateSymbol,
}

impl DiagnosticKind {
    pub fn code(self) -> &'static str {
        match self {
            DiagnosticKind::MissingTerminator => "missing-terminator",
            DiagnosticKind::MisplacedTerminator => "misplaced-terminator",
            DiagnosticKind::UnknownOp => "unknown-op",
            DiagnosticKind::ArityMismatch => "arity-mismatch",
            DiagnosticKind::TypeMismatch => "type-mismatch",
            DiagnosticKind::MissingAttribute => "missing-attribute",
            DiagnosticKind::AttributeKind => "attribute-kind",
            DiagnosticKind::RegionCount => "region-count",
            DiagnosticKind::SuccessorCount => "successor-count",
            DiagnosticKind::BadSuccessor => "bad-successor",
            DiagnosticKind::Dominance => "dominance",
            DiagnosticKind::InvalidReference => "invalid-reference",
            DiagnosticKind::DuplicateSymbol => "duplicate-symbol",
        }
    }
}

impl From<ViolationKind> for DiagnosticKind {
    fn from(k: ViolationKind) -> Self {
        match k {
            ViolationKind::Arity => DiagnosticKind::ArityMismatch,
            ViolationKind::Type => DiagnosticKind::TypeMismatch,
            ViolationKind::MissingAttribute => DiagnosticKind::MissingAttribute,
            ViolationKind::AttributeKind => DiagnosticKind::AttributeKind,
            ViolationKind::RegionCount => DiagnosticKind::RegionCount,
            ViolationKind::SuccessorCount => DiagnosticKind::SuccessorCount,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub op: Option<String>,
    pub block: Option<BlockId>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]", self.kind.code())?;
        if let Some(b) = self.block {
            write!(f, " in block #{}", b.0)?;
        }
        if let Some(op) = &self.op {
            write!(f, " at `{op}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl VerificationReport {
    pub fn is_ok(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn has(&self, kind: DiagnosticKind) -> bool {
        self.diagnostics.iter().any(|d| d.kind == kind)
    }

    pub fn kinds(&self) -> Vec<DiagnosticKind> {
        self.diagnostics.iter().map(|d| d.kind).collect()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for d in &self.diagnostics {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Terminators recognised when no registry is supplied.
const FALLBACK_TERMINATORS: [&str; 4] = ["cf.br", "cf.cond_br", "func.return", "linalg.yield"];

struct Verifier<'a> {
    module: &'a IrModule,
    registry: Option<&'a DialectRegistry>,
    report: VerificationReport,
    doms: HashMap<RegionId, Dominance>,
}

/// Verifies `module`. With a registry, every op must be registered and match its definition.
pub fn verify_module(module: &IrModule, registry: Option<&DialectRegistry>) -> VerificationReport {
    let mut v = Verifier { module, registry, report: VerificationReport::default(), doms: HashMap::new() };
    v.run();
    v.report
}

impl<'a> Verifier<'a> {
    fn push(&mut self, kind: DiagnosticKind, op: Option<OpId>, block: Option<BlockId>, message: String) {
        let op = op.map(|o| self.module.op(o).name.clone());
        self.report.diagnostics.push(Diagnostic { kind, op, block, message });
    }

    fn run(&mut self) {
        let m = self.module;
        let mut seen = HashSet::new();
        for op in m.symbols() {
            if let Some(name) = m.op(op).attr("sym_name").and_then(|a| a.as_str()) {
                if !seen.insert(name.to_string()) {
                    self.push(
                        DiagnosticKind::DuplicateSymbol,
                        Some(op),
                        Some(m.body_block()),
                        format!("symbol @{name} is defined more than once"),
                    );
                }
            }
        }
        self.verify_region(m.body(), false);
    }

    fn is_terminator(&self, op: OpId) -> bool {
        let o = self.module.op(op);
        if let Some(def) = self.registry.and_then(|r| r.lookup(&o.name)) {
            return def.terminator;
        }
        !o.successors.is_empty() || FALLBACK_TERMINATORS.contains(&o.name.as_str())
    }

    fn verify_region(&mut self, region: RegionId, needs_terminators: bool) {
        let m = self.module;
        for &b in &m.region(region).blocks {
            let ops = &m.block(b).operations;
            if needs_terminators {
                match ops.last() {
                    Some(&last) if self.is_terminator(last) => {}
                    Some(&last) => self.push(
                        DiagnosticKind::MissingTerminator,
                        Some(last),
                        Some(b),
                        "block does not end with a terminator".into(),
                    ),
                    None => self.push(DiagnosticKind::MissingTerminator, None, Some(b), "empty block".into()),
                }
                for &op in ops.iter().rev().skip(1) {
                    if self.is_terminator(op) {
                        self.push(
                            DiagnosticKind::MisplacedTerminator,
                            Some(op),
                            Some(b),
                            "terminator is not the last operation of its block".into(),
                        );
                    }
                }
            }
            for &op in ops {
                self.verify_op(op, b, region);
                for &r in &m.op(op).regions {
                    if m.has_region(r) {
                        self.verify_region(r, true);
                    } else {
                        self.push(DiagnosticKind::InvalidReference, Some(op), Some(b), format!("region #{} does not exist", r.0));
                    }
                }
            }
        }
    }

    fn check_value(&mut self, v: ValueId, op: OpId, block: BlockId) -> bool {
        if !self.module.owns_value(v) {
            self.push(
                DiagnosticKind::InvalidReference,
                Some(op),
                Some(block),
                format!("operand %{} does not belong to this module", v.index),
            );
            return false;
        }
        true
    }

    fn verify_op(&mut self, op: OpId, block: BlockId, region: RegionId) {
        let m = self.module;
        let o = m.op(op);

        for (i, &r) in o.results.iter().enumerate() {
            let back = m.owns_value(r) && m.value_origin(r) == ValueOrigin::OpResult { op, index: i as u32 };
            if !back {
                self.push(DiagnosticKind::InvalidReference, Some(op), Some(block), format!("result #{i} does not point back to its op"));
            }
        }

        let uses: Vec<ValueId> =
            o.operands.iter().chain(o.successors.iter().flat_map(|s| &s.args)).copied().collect();
        let mut refs_ok = true;
        for &v in &uses {
            refs_ok &= self.check_value(v, op, block);
        }
        if !refs_ok {
            return;
        }

        if let Some(registry) = self.registry {
            match registry.lookup(&o.name) {
                None => self.push(
                    DiagnosticKind::UnknownOp,
                    Some(op),
                    Some(block),
                    format!("`{}` is not registered", o.name),
                ),
                Some(def) => {
                    let operand_types: Vec<IrType> = o.operands.iter().map(|&v| m.value_type(v).clone()).collect();
                    let result_types: Vec<IrType> = o.results.iter().map(|&v| m.value_type(v).clone()).collect();
                    for viol in def.check(&operand_types, &result_types, &o.attributes, o.regions.len(), o.successors.len()) {
                        self.push(viol.kind.into(), Some(op), Some(block), viol.message);
                    }
                }
            }
        }

        for (i, s) in o.successors.iter().enumerate() {
            if !m.has_block(s.block) {
                self.push(DiagnosticKind::BadSuccessor, Some(op), Some(block), format!("successor #{i} refers to missing block #{}", s.block.0));
                continue;
            }
            if m.block(s.block).parent != region {
                self.push(
                    DiagnosticKind::BadSuccessor,
                    Some(op),
                    Some(block),
                    format!("successor #{i} (block #{}) is in a different region", s.block.0),
                );
                continue;
            }
            let expected: Vec<&IrType> = m.block(s.block).arguments.iter().map(|&a| m.value_type(a)).collect();
            let passed: Vec<&IrType> = s.args.iter().map(|&a| m.value_type(a)).collect();
            if expected != passed {
                self.push(
                    DiagnosticKind::BadSuccessor,
                    Some(op),
                    Some(block),
                    format!(
                        "successor #{i} passes ({}) but block #{} takes ({})",
                        join(&passed),
                        s.block.0,
                        join(&expected)
                    ),
                );
            }
        }

        self.verify_function_types(op, block);

        for &v in &uses {
            if !self.dominates_use(v, op) {
                self.push(
                    DiagnosticKind::Dominance,
                    Some(op),
                    Some(block),
                    format!("operand %{} does not dominate this use", v.index),
                );
            }
        }
    }

    fn verify_function_types(&mut self, op: OpId, block: BlockId) {
        let m = self.module;
        let o = m.op(op);
        match o.name.as_str() {
            "func.func" => {
                let Some(IrType::Function { inputs, .. }) = o.attr("function_type").and_then(|a| a.typed_value_type()) else {
                    return;
                };
                let Some(entry) = o.regions.first().filter(|r| m.has_region(**r)).and_then(|&r| m.region(r).entry()) else {
                    return;
                };
                let args: Vec<&IrType> = m.block(entry).arguments.iter().map(|&a| m.value_type(a)).collect();
                if args != inputs.iter().collect::<Vec<_>>() {
                    self.push(
                        DiagnosticKind::TypeMismatch,
                        Some(op),
                        Some(block),
                        format!("entry block takes ({}) but the signature declares ({})", join(&args), join(&inputs.iter().collect::<Vec<_>>())),
                    );
                }
            }
            "func.return" => {
                let Some(func) = m.parent_op_of_block(block) else { return };
                if m.op(func).name != "func.func" {
                    return;
                }
                let Some(IrType::Function { results, .. }) = m.op(func).attr("function_type").and_then(|a| a.typed_value_type()) else {
                    return;
                };
                let got: Vec<&IrType> = o.operands.iter().map(|&v| m.value_type(v)).collect();
                if got != results.iter().collect::<Vec<_>>() {
                    self.push(
                        DiagnosticKind::TypeMismatch,
                        Some(op),
                        Some(block),
                        format!("returns ({}) but the function declares ({})", join(&got), join(&results.iter().collect::<Vec<_>>())),
                    );
                }
            }
            _ => {}
        }
    }

    fn dominance(&mut self, region: RegionId) -> &Dominance {
        let module = self.module;
        self.doms.entry(region).or_insert_with(|| Dominance::compute(module, region))
    }

    fn dominates_use(&mut self, v: ValueId, user: OpId) -> bool {
        let m = self.module;
        let (def_block, def_pos) = match m.value_origin(v) {
            ValueOrigin::BlockArgument { block, .. } => (block, None),
            ValueOrigin::OpResult { op, .. } => match (m.op(op).parent, m.op_position(op)) {
                (Some(b), Some(p)) => (b, Some(p)),
                _ => return false,
            },
        };
        let def_region = m.block(def_block).parent;
        let mut op = user;
        loop {
            let Some(block) = m.op(op).parent else { return false };
            let region = m.block(block).parent;
            if region == def_region {
                if block == def_block {
                    return match def_pos {
                        None => true,
                        Some(p) => m.op_position(op).is_some_and(|q| p < q),
                    };
                }
                let dom = self.dominance(region);
                return !dom.is_reachable(block) || dom.dominates(def_block, block);
            }
            match m.region(region).parent {
                Some(parent) => op = parent,
                None => return false,
            }
        }
    }
}

fn join(types: &[&IrType]) -> String {
    types.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
}
