//! A corpus of deliberately broken modules, one per verifier diagnostic
//! category. Used by the verifier tests and the CLI `verify` checks.

use super::{BlockId, ValueId, DiagnosticKind, InsertPoint, IrAttribute, IrModule, IrType, OpId, OperationState, RegionId};

pub struct MalformedCase {
    pub name: &'static str,
    pub expected: DiagnosticKind,
    pub module: IrModule,
}

struct Func {
    module: IrModule,
    region: RegionId,
    entry: BlockId,
}

impl Func {
    /// `func.func @f(f32) -> f32` with an empty entry block.
    fn new() -> Self {
        Self::with_signature(vec![IrType::Float32], vec![IrType::Float32])
    }

    fn with_signature(inputs: Vec<IrType>, results: Vec<IrType>) -> Self {
        let mut module = IrModule::new();
        let region = module.new_region();
        let entry = module.append_block(region, &inputs);
        let body = module.body_block();
        module
            .insert_op(
                InsertPoint::End(body),
                OperationState::new("func.func")
                    .attr("sym_name", IrAttribute::string("f"))
                    .attr("function_type", IrAttribute::Type(IrType::Function { inputs, results }))
                    .region(region),
            )
            .expect("fresh region");
        Func { module, region, entry }
    }

    fn push(&mut self, block: BlockId, state: OperationState) -> OpId {
        self.module.insert_op(InsertPoint::End(block), state).expect("operands come from this module")
    }

    fn arg(&self) -> ValueId {
        self.module.block(self.entry).arguments[0]
    }

    fn ret(&mut self, block: BlockId, v: ValueId) {
        self.push(block, OperationState::new("func.return").operands([v]));
    }

    fn done(self, name: &'static str, expected: DiagnosticKind) -> MalformedCase {
        MalformedCase { name, expected, module: self.module }
    }
}

fn negf(f: &mut Func, block: BlockId, v: ValueId) -> ValueId {
    let op = f.push(block, OperationState::new("arith.negf").operands([v]).results([IrType::Float32]));
    f.module.result(op, 0).unwrap()
}

pub fn malformed_modules() -> Vec<MalformedCase> {
    let mut cases = Vec::new();

    let mut f = Func::new();
    let (e, x) = (f.entry, f.arg());
    negf(&mut f, e, x);
    cases.push(f.done("missing terminator", DiagnosticKind::MissingTerminator));

    let mut f = Func::new();
    let (e, x) = (f.entry, f.arg());
    f.module.append_block(f.region, &[]);
    f.ret(e, x);
    cases.push(f.done("empty block", DiagnosticKind::MissingTerminator));

    let mut f = Func::new();
    let (e, x) = (f.entry, f.arg());
    f.ret(e, x);
    negf(&mut f, e, x);
    f.ret(e, x);
    cases.push(f.done("terminator mid-block", DiagnosticKind::MisplacedTerminator));

    // %1 is used by the op inserted in front of its definition.
    let mut f = Func::new();
    let (e, x) = (f.entry, f.arg());
    let late = negf(&mut f, e, x);
    f.module
        .insert_op(InsertPoint::At(e, 0), OperationState::new("arith.negf").operands([late]).results([IrType::Float32]))
        .unwrap();
    f.ret(e, late);
    cases.push(f.done("use before definition", DiagnosticKind::Dominance));

    // A value defined on one arm of a diamond is used after the join.
    let mut f = Func::with_signature(vec![IrType::Float32, IrType::i1()], vec![IrType::Float32]);
    let e = f.entry;
    let (x, c) = (f.module.block(e).arguments[0], f.module.block(e).arguments[1]);
    let (l, r, j) =
        (f.module.append_block(f.region, &[]), f.module.append_block(f.region, &[]), f.module.append_block(f.region, &[]));
    f.push(e, OperationState::new("cf.cond_br").operands([c]).successor(l, vec![]).successor(r, vec![]));
    let y = negf(&mut f, l, x);
    f.push(l, OperationState::new("cf.br").successor(j, vec![]));
    f.push(r, OperationState::new("cf.br").successor(j, vec![]));
    f.ret(j, y);
    cases.push(f.done("definition does not dominate join", DiagnosticKind::Dominance));

    let mut f = Func::new();
    let (e, x) = (f.entry, f.arg());
    let op = f.push(e, OperationState::new("arith.addf").operands([x]).results([IrType::Float32]));
    let y = f.module.result(op, 0).unwrap();
    f.ret(e, y);
    cases.push(f.done("binary op with one operand", DiagnosticKind::ArityMismatch));

    let mut f = Func::with_signature(vec![IrType::Float32, IrType::i64()], vec![IrType::Float32]);
    let e = f.entry;
    let args = f.module.block(e).arguments.clone();
    let op = f.push(e, OperationState::new("arith.addf").operands(args).results([IrType::Float32]));
    let y = f.module.result(op, 0).unwrap();
    f.ret(e, y);
    cases.push(f.done("mixed operand types", DiagnosticKind::TypeMismatch));

    let mut f = Func::new();
    let (e, x) = (f.entry, f.arg());
    let op = f.push(e, OperationState::new("arith.frobnicate").operands([x]).results([IrType::Float32]));
    let y = f.module.result(op, 0).unwrap();
    f.ret(e, y);
    cases.push(f.done("unknown op", DiagnosticKind::UnknownOp));

    let mut f = Func::new();
    let (e, x) = (f.entry, f.arg());
    let elsewhere = f.module.new_region();
    let stray = f.module.append_block(elsewhere, &[]);
    f.push(e, OperationState::new("cf.br").successor(stray, vec![]));
    f.ret(stray, x);
    cases.push(f.done("branch into another region", DiagnosticKind::BadSuccessor));

    let mut f = Func::new();
    let e = f.entry;
    let next = f.module.append_block(f.region, &[IrType::Float32]);
    f.push(e, OperationState::new("cf.br").successor(next, vec![]));
    let a = f.module.block(next).arguments[0];
    f.ret(next, a);
    cases.push(f.done("branch without block arguments", DiagnosticKind::BadSuccessor));

    let mut f = Func::new();
    let e = f.entry;
    f.push(e, OperationState::new("cf.br").successor(BlockId(999), vec![]));
    cases.push(f.done("branch to missing block", DiagnosticKind::BadSuccessor));

    let mut f = Func::with_signature(vec![IrType::Float32, IrType::i1()], vec![IrType::Float32]);
    let e = f.entry;
    let (x, c) = (f.module.block(e).arguments[0], f.module.block(e).arguments[1]);
    let t = f.module.append_block(f.region, &[]);
    f.push(e, OperationState::new("cf.cond_br").operands([c]).successor(t, vec![]));
    f.ret(t, x);
    cases.push(f.done("conditional branch with one target", DiagnosticKind::SuccessorCount));

    let mut f = Func::new();
    let (e, x) = (f.entry, f.arg());
    f.push(e, OperationState::new("arith.constant").results([IrType::Float32]));
    f.ret(e, x);
    cases.push(f.done("constant without value", DiagnosticKind::MissingAttribute));

    let mut f = Func::new();
    let (e, x) = (f.entry, f.arg());
    f.push(e, OperationState::new("arith.cmpi").operands([x, x]).results([IrType::i1()]));
    f.ret(e, x);
    cases.push(f.done("cmpi without predicate", DiagnosticKind::MissingAttribute));

    let mut f = Func::with_signature(vec![IrType::Float32], vec![IrType::i64()]);
    let (e, x) = (f.entry, f.arg());
    f.ret(e, x);
    cases.push(f.done("return type differs from signature", DiagnosticKind::TypeMismatch));

    let mut f = Func::new();
    let (e, x) = (f.entry, f.arg());
    f.ret(e, x);
    let dup_region = f.module.new_region();
    let dup_entry = f.module.append_block(dup_region, &[IrType::Float32]);
    let y = f.module.block(dup_entry).arguments[0];
    f.ret(dup_entry, y);
    let body = f.module.body_block();
    f.push(
        body,
        OperationState::new("func.func")
            .attr("sym_name", IrAttribute::string("f"))
            .attr(
                "function_type",
                IrAttribute::Type(IrType::Function { inputs: vec![IrType::Float32], results: vec![IrType::Float32] }),
            )
            .region(dup_region),
    );
    cases.push(f.done("duplicate symbol", DiagnosticKind::DuplicateSymbol));

    let mut f = Func::new();
    let (e, x) = (f.entry, f.arg());
    f.ret(e, x);
    let body = f.module.body_block();
    f.push(
        body,
        OperationState::new("func.func").attr("sym_name", IrAttribute::string("g")).attr(
            "function_type",
            IrAttribute::Type(IrType::Function { inputs: vec![], results: vec![] }),
        ),
    );
    cases.push(f.done("function without body", DiagnosticKind::RegionCount));

    cases
}
