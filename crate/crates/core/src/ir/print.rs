//! Deterministic textual form of a module.
//!
//! Names are assigned per top-level symbol: entry-block arguments of every
//! region become `%argN`, constants `%cst`, `%cst_0`, ..., and every other
//! value `%N` in definition order.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::module::{BlockId, IrModule, OpId, RegionId, Successor, ValueId};
use super::types::{write_type_list, IrAttribute, IrType};

/// Prints the whole module wrapped in `module { ... }`.
pub fn print_module(module: &IrModule) -> String {
    let mut out = String::from("module {\n");
    for op in module.symbols() {
        let mut p = Printer::new(module);
        p.name_op(op);
        p.print_op(op, 2);
        out.push_str(&p.out);
    }
    out.push_str("}\n");
    out
}

/// Prints a single top-level op without the module wrapper.
pub fn print_symbol(module: &IrModule, op: OpId) -> String {
    let mut p = Printer::new(module);
    p.name_op(op);
    p.print_op(op, 0);
    p.out
}

struct Printer<'a> {
    m: &'a IrModule,
    names: HashMap<ValueId, String>,
    next_value: usize,
    next_arg: usize,
    next_cst: Option<usize>,
    out: String,
}

const BINARY_OPS: [&str; 7] =
    ["arith.addf", "arith.subf", "arith.mulf", "arith.divf", "arith.addi", "arith.subi", "arith.muli"];
const UNARY_OPS: [&str; 2] = ["arith.negf", "math.exp"];

impl<'a> Printer<'a> {
    fn new(m: &'a IrModule) -> Self {
        Printer { m, names: HashMap::new(), next_value: 0, next_arg: 0, next_cst: None, out: String::new() }
    }

    // ---- naming ----

    fn name_op(&mut self, op: OpId) {
        let o = self.m.op(op);
        if o.name == "arith.constant" && o.results.len() == 1 {
            let name = match self.next_cst {
                None => "%cst".to_string(),
                Some(k) => format!("%cst_{k}"),
            };
            self.next_cst = Some(self.next_cst.map_or(0, |k| k + 1));
            self.names.insert(o.results[0], name);
        } else if o.results.len() == 1 {
            self.names.insert(o.results[0], format!("%{}", self.next_value));
            self.next_value += 1;
        } else if o.results.len() > 1 {
            for (i, &r) in o.results.iter().enumerate() {
                self.names.insert(r, format!("%{}#{i}", self.next_value));
            }
            self.next_value += 1;
        }
        for &r in &o.regions {
            self.name_region(r);
        }
    }

    fn name_region(&mut self, region: RegionId) {
        if !self.m.has_region(region) {
            return;
        }
        for (i, &b) in self.m.region(region).blocks.iter().enumerate() {
            for &a in &self.m.block(b).arguments {
                let name = if i == 0 {
                    self.next_arg += 1;
                    format!("%arg{}", self.next_arg - 1)
                } else {
                    self.next_value += 1;
                    format!("%{}", self.next_value - 1)
                };
                self.names.insert(a, name);
            }
            for &op in &self.m.block(b).operations {
                self.name_op(op);
            }
        }
    }

    fn v(&self, v: ValueId) -> String {
        self.names.get(&v).cloned().unwrap_or_else(|| format!("%v{}", v.index))
    }

    fn vs(&self, vals: &[ValueId]) -> String {
        vals.iter().map(|&v| self.v(v)).collect::<Vec<_>>().join(", ")
    }

    fn ty(&self, v: ValueId) -> String {
        if self.m.owns_value(v) {
            self.m.value_type(v).to_string()
        } else {
            "<invalid>".into()
        }
    }

    fn tys(&self, vals: &[ValueId]) -> String {
        vals.iter().map(|&v| self.ty(v)).collect::<Vec<_>>().join(", ")
    }

    fn label(&self, b: BlockId) -> String {
        if self.m.has_block(b) {
            let region = self.m.region(self.m.block(b).parent);
            if let Some(pos) = region.blocks.iter().position(|&x| x == b) {
                return format!("^bb{pos}");
            }
        }
        format!("^invalid{}", b.0)
    }

    fn successor(&self, s: &Successor) -> String {
        if s.args.is_empty() {
            self.label(s.block)
        } else {
            format!("{}({} : {})", self.label(s.block), self.vs(&s.args), self.tys(&s.args))
        }
    }

    // ---- printing ----

    fn indent(&mut self, n: usize) {
        self.out.extend(std::iter::repeat_n(' ', n));
    }

    fn results_prefix(&self, op: OpId) -> String {
        let o = self.m.op(op);
        match o.results.len() {
            0 => String::new(),
            1 => format!("{} = ", self.v(o.results[0])),
            n => {
                let first = self.v(o.results[0]);
                let base = first.split('#').next().unwrap_or(&first).to_string();
                format!("{base}:{n} = ")
            }
        }
    }

    fn print_op(&mut self, op: OpId, indent: usize) {
        self.indent(indent);
        let text = self.op_text(op, indent);
        self.out.push_str(&text);
        self.out.push('\n');
    }

    fn op_text(&mut self, op: OpId, indent: usize) -> String {
        let m = self.m;
        let o = m.op(op);
        let prefix = self.results_prefix(op);
        let nres = o.results.len();
        let nops = o.operands.len();
        let name = o.name.as_str();
        let attr_str = |k: &str| o.attr(k).and_then(|a| a.as_str()).map(str::to_string);

        match name {
            "func.func" if o.regions.len() == 1 && m.has_region(o.regions[0]) => {
                let sym = attr_str("sym_name").unwrap_or_default();
                let results = match o.attr("function_type").and_then(|a| a.typed_value_type()) {
                    Some(IrType::Function { results, .. }) => results.clone(),
                    _ => Vec::new(),
                };
                let region = o.regions[0];
                let args = m.region(region).entry().map(|e| m.block(e).arguments.clone()).unwrap_or_default();
                let params = args.iter().map(|&a| format!("{}: {}", self.v(a), self.ty(a))).collect::<Vec<_>>().join(", ");
                let mut s = format!("func.func @{sym}({params})");
                match results.len() {
                    0 => {}
                    1 => {
                        let _ = write!(s, " -> {}", results[0]);
                    }
                    _ => {
                        s.push_str(" -> (");
                        let _ = write_type_list(&mut s, &results);
                        s.push(')');
                    }
                }
                s.push_str(" {\n");
                s.push_str(&self.region_text(region, indent, false));
                s.push_str(&" ".repeat(indent));
                s.push('}');
                s
            }
            "arith.constant" if nres == 1 && nops == 0 => match o.attr("value") {
                Some(IrAttribute::Int { value, ty }) if *ty == IrType::i1() => {
                    format!("{prefix}arith.constant {}", *value != 0)
                }
                Some(a) => format!("{prefix}arith.constant {a}"),
                None => self.generic_text(op, indent),
            },
            _ if BINARY_OPS.contains(&name) && nops == 2 && nres == 1 => {
                format!("{prefix}{name} {} : {}", self.vs(&o.operands), self.ty(o.results[0]))
            }
            _ if UNARY_OPS.contains(&name) && nops == 1 && nres == 1 => {
                format!("{prefix}{name} {} : {}", self.v(o.operands[0]), self.ty(o.results[0]))
            }
            "arith.cmpi" if nops == 2 && nres == 1 && attr_str("predicate").is_some() => {
                format!(
                    "{prefix}arith.cmpi {}, {} : {}",
                    attr_str("predicate").unwrap_or_default(),
                    self.vs(&o.operands),
                    self.ty(o.operands[0])
                )
            }
            "arith.index_cast" if nops == 1 && nres == 1 => format!(
                "{prefix}arith.index_cast {} : {} to {}",
                self.v(o.operands[0]),
                self.ty(o.operands[0]),
                self.ty(o.results[0])
            ),
            "cf.br" if nops == 0 && o.successors.len() == 1 => {
                format!("cf.br {}", self.successor(&o.successors[0]))
            }
            "cf.cond_br" if nops == 1 && o.successors.len() == 2 => format!(
                "cf.cond_br {}, {}, {}",
                self.v(o.operands[0]),
                self.successor(&o.successors[0]),
                self.successor(&o.successors[1])
            ),
            "func.return" | "linalg.yield" if nres == 0 && o.successors.is_empty() => {
                let kw = if name == "func.return" { "return" } else { "linalg.yield" };
                if nops == 0 {
                    kw.to_string()
                } else {
                    format!("{kw} {} : {}", self.vs(&o.operands), self.tys(&o.operands))
                }
            }
            "func.call" if attr_str("callee").is_some() => format!(
                "{prefix}call @{}({}) : ({}) -> ({})",
                attr_str("callee").unwrap_or_default(),
                self.vs(&o.operands),
                self.tys(&o.operands),
                self.tys(&o.results)
            ),
            "gpu.thread_id" | "gpu.block_id" | "gpu.block_dim" if nops == 0 && nres == 1 && attr_str("dimension").is_some() => {
                format!("{prefix}{name} {}", attr_str("dimension").unwrap_or_default())
            }
            "memref.load" if nops >= 1 && nres == 1 => format!(
                "{prefix}memref.load {}[{}] : {}",
                self.v(o.operands[0]),
                self.vs(&o.operands[1..]),
                self.ty(o.operands[0])
            ),
            "memref.store" if nops >= 2 && nres == 0 => format!(
                "memref.store {}, {}[{}] : {}",
                self.v(o.operands[0]),
                self.v(o.operands[1]),
                self.vs(&o.operands[2..]),
                self.ty(o.operands[1])
            ),
            "linalg.generic"
                if nops >= 1 && nres == 1 && o.regions.len() == 1 && m.has_region(o.regions[0]) =>
            {
                let (ins, outs) = o.operands.split_at(nops - 1);
                let mut s = format!("{prefix}linalg.generic {}", self.attr_dict(op));
                if !ins.is_empty() {
                    let _ = write!(s, " ins({} : {})", self.vs(ins), self.tys(ins));
                }
                let _ = writeln!(s, " outs({} : {}) {{", self.vs(outs), self.tys(outs));
                s.push_str(&self.region_text(o.regions[0], indent, true));
                s.push_str(&" ".repeat(indent));
                let _ = write!(s, "}} -> {}", self.ty(o.results[0]));
                s
            }
            _ => self.generic_text(op, indent),
        }
    }

    fn attr_dict(&self, op: OpId) -> String {
        let o = self.m.op(op);
        let items: Vec<String> = o
            .attributes
            .iter()
            .map(|(k, v)| match v {
                IrAttribute::Array(xs) if xs.iter().all(|x| matches!(x, IrAttribute::String(_))) => {
                    let inner: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                    format!("{k} = [{}]", inner.join(", "))
                }
                _ => format!("{k} = {v}"),
            })
            .collect();
        format!("{{{}}}", items.join(", "))
    }

    fn generic_text(&mut self, op: OpId, indent: usize) -> String {
        let o = self.m.op(op);
        let mut s = format!("{}\"{}\"({})", self.results_prefix(op), o.name, self.vs(&o.operands));
        if !o.successors.is_empty() {
            let succ: Vec<String> = o.successors.iter().map(|x| self.successor(x)).collect();
            let _ = write!(s, "[{}]", succ.join(", "));
        }
        if !o.regions.is_empty() {
            s.push_str(" (");
            for (i, &r) in o.regions.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                s.push_str("{\n");
                if self.m.has_region(r) {
                    s.push_str(&self.region_text(r, indent, true));
                }
                s.push_str(&" ".repeat(indent));
                s.push('}');
            }
            s.push(')');
        }
        if !o.attributes.is_empty() {
            let _ = write!(s, " {}", self.attr_dict(op));
        }
        let _ = write!(s, " : ({}) -> ", self.tys(&o.operands));
        if o.results.len() == 1 {
            s.push_str(&self.ty(o.results[0]));
        } else {
            let _ = write!(s, "({})", self.tys(&o.results));
        }
        s
    }

    /// Region body. `entry_args_inline` prints the entry block's arguments on its label.
    fn region_text(&mut self, region: RegionId, indent: usize, entry_args_inline: bool) -> String {
        let saved = std::mem::take(&mut self.out);
        let blocks = self.m.region(region).blocks.clone();
        let preds = self.predecessors(region);
        for (i, &b) in blocks.iter().enumerate() {
            let args = self.m.block(b).arguments.clone();
            let show_label = blocks.len() > 1 || (i == 0 && entry_args_inline && !args.is_empty());
            if show_label {
                self.indent(indent);
                let _ = write!(self.out, "^bb{i}");
                if !args.is_empty() && (i > 0 || entry_args_inline) {
                    let list: Vec<String> = args.iter().map(|&a| format!("{}: {}", self.v(a), self.ty(a))).collect();
                    let _ = write!(self.out, "({})", list.join(", "));
                }
                self.out.push(':');
                if i > 0 {
                    let p = &preds[i];
                    let labels: Vec<String> = p.iter().map(|k| format!("^bb{k}")).collect();
                    match p.len() {
                        0 => self.out.push_str(" // no predecessors"),
                        1 => {
                            let _ = write!(self.out, " // pred: {}", labels[0]);
                        }
                        n => {
                            let _ = write!(self.out, " // {n} preds: {}", labels.join(", "));
                        }
                    }
                }
                self.out.push('\n');
            }
            for op in self.m.block(b).operations.clone() {
                self.print_op(op, indent + 2);
            }
        }
        std::mem::replace(&mut self.out, saved)
    }

    fn predecessors(&self, region: RegionId) -> Vec<Vec<usize>> {
        let blocks = &self.m.region(region).blocks;
        let mut preds = vec![Vec::new(); blocks.len()];
        for (i, &b) in blocks.iter().enumerate() {
            for &op in &self.m.block(b).operations {
                for s in &self.m.op(op).successors {
                    if let Some(j) = blocks.iter().position(|&x| x == s.block) {
                        if !preds[j].contains(&i) {
                            preds[j].push(i);
                        }
                    }
                }
            }
        }
        for p in &mut preds {
            p.sort_unstable();
        }
        preds
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::OperationState;

    #[test]
    fn empty_module() {
        assert_eq!(print_module(&IrModule::new()), "module {\n}\n");
    }

    #[test]
    fn generic_fallback_for_unknown_ops() {
        let mut m = IrModule::new();
        let r = m.new_region();
        let b = m.append_block(r, &[IrType::Float32]);
        m.create_op(
            OperationState::new("func.func")
                .attr("sym_name", IrAttribute::string("f"))
                .attr("function_type", IrAttribute::Type(IrType::Function { inputs: vec![IrType::Float32], results: vec![] }))
                .region(r),
        )
        .unwrap();
        m.set_insertion_block(b);
        let a = m.block(b).arguments[0];
        m.create_op(OperationState::new("foo.bar").operands([a]).results([IrType::i64()])).unwrap();
        m.create_op(OperationState::new("func.return")).unwrap();
        let text = print_module(&m);
        assert!(text.contains("%0 = \"foo.bar\"(%arg0) : (f32) -> i64"), "{text}");
        assert!(text.contains("    return\n"), "{text}");
    }
}
