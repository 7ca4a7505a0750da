use std::collections::{BTreeMap, HashMap};

use super::error::CodegenError;
use super::registry::{promote_literal, IntrinsicCall, IntrinsicRegistry, PromotedLiteral, ReturnHook};
use crate::fir::{FirArg, FirFunction, FrontendType, Literal, StatementKind, BOOL_CONVERSION};
use crate::ir::{
    BlockId, InsertPoint, IrAttribute, IrModule, IrType, OpId, OperationState, RegionId, Successor, ValueId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum ConstKey {
    Int(i64),
    /// Bit pattern, so that `0.0` and `-0.0` stay distinct.
    Float(u64),
}

/// Per-function (or per-region) translation state.
#[derive(Default)]
struct Frame {
    params: Vec<Vec<ValueId>>,
    param_types: Vec<FrontendType>,
    blocks: BTreeMap<usize, BlockId>,
    values: HashMap<u32, Vec<ValueId>>,
    ssa_types: HashMap<u32, FrontendType>,
    return_hook: Option<ReturnHook>,
}

/// Result of translating one FIR function.
#[derive(Debug, Clone)]
pub struct Translation {
    pub module: IrModule,
    pub func: OpId,
    /// IR block of every translated FIR block.
    pub blocks: BTreeMap<usize, BlockId>,
    /// IR values bound to every FIR SSA id.
    pub values: HashMap<u32, Vec<ValueId>>,
}

/// Mutable state threaded through intrinsic builders and control-flow hooks.
pub struct BuilderContext<'r> {
    registry: &'r IntrinsicRegistry,
    module: IrModule,
    const_block: Option<BlockId>,
    constants: HashMap<(BlockId, ConstKey, IrType), ValueId>,
    const_counts: HashMap<BlockId, usize>,
    frame: Frame,
}

impl<'r> BuilderContext<'r> {
    pub fn new(registry: &'r IntrinsicRegistry) -> Self {
        Self::with_module(registry, IrModule::new())
    }

    pub fn with_module(registry: &'r IntrinsicRegistry, module: IrModule) -> Self {
        BuilderContext {
            registry,
            module,
            const_block: None,
            constants: HashMap::new(),
            const_counts: HashMap::new(),
            frame: Frame::default(),
        }
    }

    pub fn registry(&self) -> &'r IntrinsicRegistry {
        self.registry
    }

    pub fn module(&self) -> &IrModule {
        &self.module
    }

    pub fn module_mut(&mut self) -> &mut IrModule {
        &mut self.module
    }

    pub fn into_module(self) -> IrModule {
        self.module
    }

    pub fn insertion_block(&self) -> Option<BlockId> {
        self.module.insertion_block()
    }

    pub fn set_insertion_block(&mut self, block: BlockId) {
        self.module.set_insertion_block(block);
    }

    pub fn value_type(&self, v: ValueId) -> &IrType {
        self.module.value_type(v)
    }

    /// Builds a checked op at the insertion block.
    pub fn build(&mut self, state: OperationState) -> Result<OpId, CodegenError> {
        Ok(self.registry.dialects().build_op(&mut self.module, state)?)
    }

    /// Builds a checked op and returns all its results.
    pub fn build_values(&mut self, state: OperationState) -> Result<Vec<ValueId>, CodegenError> {
        let op = self.build(state)?;
        Ok(self.module.op(op).results.clone())
    }

    /// Builds a checked single-result op and returns that result.
    pub fn build_value(&mut self, state: OperationState) -> Result<ValueId, CodegenError> {
        let op = self.build(state)?;
        Ok(self.module.result(op, 0)?)
    }

    pub fn map_type(&self, ty: &FrontendType) -> Result<Vec<IrType>, CodegenError> {
        self.registry.map_type(ty)
    }

    /// An `arith.constant` for `literal` promoted to `target`, shared with every earlier
    /// request for the same promoted value and type.
    pub fn materialize_constant(&mut self, literal: Literal, target: &FrontendType) -> Result<ValueId, CodegenError> {
        let promoted = promote_literal(literal, target).map_err(CodegenError::Literal)?;
        let ty = match self.map_type(target)?.as_slice() {
            [t] if t.is_scalar() => t.clone(),
            _ => return Err(CodegenError::Literal(format!("`{target}` is not a scalar type"))),
        };
        let (key, attr) = match promoted {
            PromotedLiteral::Int(v) => (ConstKey::Int(v), IrAttribute::int(v, ty.clone())),
            PromotedLiteral::Float(x) => (ConstKey::Float(x.to_bits()), IrAttribute::float(x, ty.clone())),
        };
        if ty.is_float() != matches!(key, ConstKey::Float(_)) {
            return Err(CodegenError::Literal(format!("literal {literal} does not match IR type {ty}")));
        }
        let block = match self.const_block.or(self.insertion_block()) {
            Some(b) => b,
            None => return Err(crate::ir::IrError::NoInsertionPoint.into()),
        };
        if let Some(&v) = self.constants.get(&(block, key, ty.clone())) {
            return Ok(v);
        }
        let count = self.const_counts.entry(block).or_insert(0);
        let op = self.registry.dialects().build_op_at(
            &mut self.module,
            InsertPoint::At(block, *count),
            OperationState::new("arith.constant").attr("value", attr).results([ty.clone()]),
        )?;
        *count += 1;
        let v = self.module.result(op, 0)?;
        self.constants.insert((block, key, ty), v);
        Ok(v)
    }

    /// Translates `f` into a new `func.func` named after it and returns that op.
    pub fn generate_function(&mut self, f: &FirFunction, arg_types: &[FrontendType]) -> Result<OpId, CodegenError> {
        self.emit_function(f, arg_types).map(|(op, _)| op)
    }

    fn emit_function(&mut self, f: &FirFunction, arg_types: &[FrontendType]) -> Result<(OpId, Frame), CodegenError> {
        let input_types = self.flat_types(arg_types)?;
        let result_types = self.return_types(f, arg_types)?;
        let region = self.module.new_region();
        let entry = self.module.append_block(region, &input_types);

        let saved_frame = std::mem::take(&mut self.frame);
        let saved_const = self.const_block.replace(entry);
        let saved_insertion = self.insertion_block();
        let outcome = self.translate_body(f, arg_types, region, entry, None);
        self.const_block = saved_const;
        let frame = std::mem::replace(&mut self.frame, saved_frame);
        let body = self.module.body_block();
        self.set_insertion_block(saved_insertion.unwrap_or(body));
        outcome?;

        let state = OperationState::new("func.func")
            .attr("sym_name", IrAttribute::string(f.name.clone()))
            .attr("function_type", IrAttribute::Type(IrType::Function { inputs: input_types, results: result_types }))
            .region(region);
        let op = self.registry.dialects().build_op_at(&mut self.module, InsertPoint::End(body), state)?;
        Ok((op, frame))
    }

    /// Translates `f` into a fresh, detached region whose entry arguments come from `arg_types`.
    ///
    /// Returns become calls to `terminator` instead of the registry's return hook; the caller
    /// attaches the region to the op it builds.
    pub fn generate_region(
        &mut self,
        f: &FirFunction,
        arg_types: &[FrontendType],
        terminator: ReturnHook,
    ) -> Result<RegionId, CodegenError> {
        let input_types = self.flat_types(arg_types)?;
        let region = self.module.new_region();
        let entry = self.module.append_block(region, &input_types);
        let saved_frame = std::mem::take(&mut self.frame);
        let saved_const = self.const_block;
        if self.const_block.is_none() {
            self.const_block = Some(entry);
        }
        let saved_insertion = self.insertion_block();
        let outcome = self.translate_body(f, arg_types, region, entry, Some(terminator));
        self.const_block = saved_const;
        self.frame = saved_frame;
        if let Some(b) = saved_insertion {
            self.set_insertion_block(b);
        }
        outcome.map(|_| region)
    }

    fn flat_types(&self, types: &[FrontendType]) -> Result<Vec<IrType>, CodegenError> {
        let mut out = Vec::new();
        for t in types {
            out.extend(self.map_type(t)?);
        }
        Ok(out)
    }

    fn return_types(&self, f: &FirFunction, arg_types: &[FrontendType]) -> Result<Vec<IrType>, CodegenError> {
        let types = f.ssa_types();
        let mut found: Option<Vec<IrType>> = None;
        for b in f.reachable_blocks() {
            for s in &f.block(b).statements {
                let StatementKind::Return(arg) = &s.kind else { continue };
                let t = match arg {
                    None => Vec::new(),
                    Some(FirArg::Param(k)) => self.map_type(param_type(arg_types, *k)?)?,
                    Some(a) => self.map_type(&f.arg_type(a, &types).ok_or_else(|| undefined(a))?)?,
                };
                match &found {
                    Some(prev) if *prev != t => {
                        return Err(CodegenError::InvalidFir(format!(
                            "returns disagree on type: [{}] vs [{}]",
                            fmt_ir(prev),
                            fmt_ir(&t)
                        )))
                    }
                    _ => found = Some(t),
                }
            }
        }
        Ok(found.unwrap_or_default())
    }

    fn translate_body(
        &mut self,
        f: &FirFunction,
        arg_types: &[FrontendType],
        region: RegionId,
        entry: BlockId,
        return_hook: Option<ReturnHook>,
    ) -> Result<(), CodegenError> {
        if arg_types.len() != f.params.len() {
            return Err(CodegenError::Arity { expected: f.params.len(), given: arg_types.len() });
        }
        let lattice = self.registry.lattice();
        for (given, declared) in arg_types.iter().zip(&f.params) {
            if !lattice.is_subtype(given, declared) {
                return Err(CodegenError::ArgumentType { given: given.to_string(), declared: declared.to_string() });
            }
        }
        if f.num_blocks() == 0 {
            return Err(CodegenError::InvalidFir(format!("`{}` has no blocks", f.name)));
        }

        let args = self.module.block(entry).arguments.clone();
        let mut params = Vec::with_capacity(arg_types.len());
        let mut at = 0;
        for t in arg_types {
            let n = self.map_type(t)?.len();
            params.push(args[at..at + n].to_vec());
            at += n;
        }
        self.frame = Frame {
            params,
            param_types: arg_types.to_vec(),
            blocks: BTreeMap::new(),
            values: HashMap::new(),
            ssa_types: f.ssa_types(),
            return_hook,
        };

        // Mirror every reachable FIR block; phis become block arguments.
        let reachable = f.reachable_blocks();
        for &b in &reachable {
            let block = if b == 1 {
                entry
            } else {
                let block = self.module.append_block(region, &[]);
                for s in f.block(b).statements.iter().take_while(|s| s.is_phi()) {
                    let ty = s.result_type().cloned().unwrap_or(FrontendType::Any);
                    let mut vals = Vec::new();
                    for t in self.map_type(&ty).map_err(|e| at_stmt(b, 0, s.result, e))? {
                        vals.push(self.module.add_block_argument(block, t));
                    }
                    if let Some(r) = s.result {
                        self.frame.values.insert(r, vals);
                    }
                }
                block
            };
            self.frame.blocks.insert(b, block);
        }

        for &b in &reachable {
            let block = self.frame.blocks[&b];
            self.set_insertion_block(block);
            let stmts = &f.block(b).statements;
            for (i, s) in stmts.iter().enumerate() {
                self.translate_statement(f, b, s).map_err(|e| at_stmt(b, i, s.result, e))?;
            }
            if !stmts.last().is_some_and(|s| s.is_terminator()) {
                if b >= f.num_blocks() {
                    return Err(CodegenError::InvalidFir(format!("block #{b} falls off the end of `{}`", f.name)));
                }
                let dest = self.successor(f, b, b + 1).map_err(|e| at_stmt(b, stmts.len(), None, e))?;
                let hook = self.registry.goto.clone();
                hook(self, dest).map_err(|e| at_stmt(b, stmts.len(), None, e))?;
            }
        }
        Ok(())
    }

    fn translate_statement(&mut self, f: &FirFunction, b: usize, s: &crate::fir::Statement) -> Result<(), CodegenError> {
        match &s.kind {
            StatementKind::Nothing | StatementKind::Phi { .. } => Ok(()),
            StatementKind::Invoke { target, args, ty } if target == BOOL_CONVERSION => {
                let [arg] = args.as_slice() else {
                    return Err(CodegenError::InvalidFir(format!("`{BOOL_CONVERSION}` takes one argument")));
                };
                let arg_ty = self.static_type(arg)?;
                let vals = self.arg_values(arg, &arg_ty)?;
                let converted = match self.registry.bool_conversion(&arg_ty) {
                    Some(conv) => vec![conv(self, &vals)?],
                    None if self.map_type(&arg_ty)? == [IrType::i1()] => vals,
                    None => return Err(CodegenError::MissingBoolConversion(arg_ty.to_string())),
                };
                if self.map_type(ty)? != [IrType::i1()] {
                    return Err(CodegenError::InvalidFir(format!("`{BOOL_CONVERSION}` must produce a Bool, not `{ty}`")));
                }
                if let Some(r) = s.result {
                    self.frame.values.insert(r, converted);
                }
                Ok(())
            }
            StatementKind::Invoke { target, args, ty } => {
                let mut typed = Vec::with_capacity(args.len());
                for a in args {
                    let lit = match a {
                        FirArg::Literal(l) => Some(*l),
                        _ => None,
                    };
                    typed.push((self.static_type(a)?, lit));
                }
                let method = self.registry.resolve_call(target, &typed)?;
                let (sig, builder) = (method.signature, method.builder);
                let lattice = self.registry.lattice();
                let mut arg_types = Vec::with_capacity(args.len());
                let mut values = Vec::with_capacity(args.len());
                for ((a, (natural, _)), p) in args.iter().zip(&typed).zip(&sig.params) {
                    let t = if matches!(a, FirArg::Literal(_)) && !lattice.is_subtype(natural, p) {
                        p.clone()
                    } else {
                        natural.clone()
                    };
                    values.push(self.arg_values(a, &t)?);
                    arg_types.push(t);
                }
                let call = IntrinsicCall { args: &values, arg_types: &arg_types, result_type: ty };
                let results = builder(self, &call)?;
                if let Some(r) = s.result {
                    let expected = self.map_type(ty)?;
                    let got: Vec<IrType> = results.iter().map(|&v| self.module.value_type(v).clone()).collect();
                    if got != expected {
                        return Err(CodegenError::ResultMismatch {
                            target: target.clone(),
                            expected: fmt_ir(&expected),
                            got: fmt_ir(&got),
                        });
                    }
                    self.frame.values.insert(r, results);
                }
                Ok(())
            }
            StatementKind::Goto(t) => {
                let dest = self.successor(f, b, *t)?;
                let hook = self.registry.goto.clone();
                hook(self, dest)
            }
            StatementKind::GotoIfNot { cond, target } => {
                let cond_ty = self.static_type(cond)?;
                let cond = match self.arg_values(cond, &cond_ty)?.as_slice() {
                    [v] if *self.module.value_type(*v) == IrType::i1() => *v,
                    _ => return Err(CodegenError::MissingBoolConversion(cond_ty.to_string())),
                };
                let on_true = self.successor(f, b, b + 1)?;
                let on_false = self.successor(f, b, *target)?;
                let hook = self.registry.gotoifnot.clone();
                hook(self, cond, on_true, on_false)
            }
            StatementKind::Return(arg) => {
                let values = match arg {
                    Some(a) => {
                        let t = self.static_type(a)?;
                        self.arg_values(a, &t)?
                    }
                    None => Vec::new(),
                };
                let hook = self.frame.return_hook.clone().unwrap_or_else(|| self.registry.ret.clone());
                hook(self, &values)
            }
        }
    }

    /// Branch target `to` from FIR block `from`, carrying the incoming values of its phis.
    fn successor(&mut self, f: &FirFunction, from: usize, to: usize) -> Result<Successor, CodegenError> {
        let block = *self
            .frame
            .blocks
            .get(&to)
            .ok_or_else(|| CodegenError::InvalidFir(format!("branch to missing block #{to}")))?;
        let mut args = Vec::new();
        for s in f.block(to).statements.iter().take_while(|s| s.is_phi()) {
            let StatementKind::Phi { incomings, ty } = &s.kind else { unreachable!() };
            let (_, arg) = incomings.iter().find(|(p, _)| *p == from).ok_or_else(|| {
                CodegenError::InvalidFir(format!("phi in block #{to} has no value for predecessor #{from}"))
            })?;
            let arg_ty = match arg {
                FirArg::Literal(_) => ty.clone(),
                a => self.static_type(a)?,
            };
            args.extend(self.arg_values(arg, &arg_ty)?);
        }
        Ok(Successor::new(block, args))
    }

    /// Static type of an argument, with literals at their natural type.
    fn static_type(&self, a: &FirArg) -> Result<FrontendType, CodegenError> {
        match a {
            FirArg::Ssa(n) => self.frame.ssa_types.get(n).cloned().ok_or_else(|| undefined(a)),
            FirArg::Param(k) => param_type(&self.frame.param_types, *k).cloned(),
            FirArg::Literal(l) => Ok(l.natural_type()),
        }
    }

    fn arg_values(&mut self, a: &FirArg, ty: &FrontendType) -> Result<Vec<ValueId>, CodegenError> {
        match a {
            FirArg::Ssa(n) => self.frame.values.get(n).cloned().ok_or_else(|| undefined(a)),
            FirArg::Param(k) => self.frame.params.get(k.wrapping_sub(1)).cloned().ok_or_else(|| undefined(a)),
            FirArg::Literal(l) => Ok(vec![self.materialize_constant(*l, ty)?]),
        }
    }
}

fn param_type(types: &[FrontendType], k: usize) -> Result<&FrontendType, CodegenError> {
    types.get(k.wrapping_sub(1)).ok_or_else(|| undefined(&FirArg::Param(k)))
}

fn undefined(a: &FirArg) -> CodegenError {
    CodegenError::InvalidFir(format!("`{a}` is not defined"))
}

fn at_stmt(block: usize, index: usize, ssa: Option<u32>, e: CodegenError) -> CodegenError {
    match e {
        e @ CodegenError::At { .. } => e,
        e => CodegenError::At { block, index, ssa, source: Box::new(e) },
    }
}

fn fmt_ir(ts: &[IrType]) -> String {
    ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
}

/// Translates `f` for `arg_types` into a new module holding one `func.func`.
pub fn generate(
    registry: &IntrinsicRegistry,
    f: &FirFunction,
    arg_types: &[FrontendType],
) -> Result<IrModule, CodegenError> {
    translate(registry, f, arg_types).map(|t| t.module)
}

/// Like [`generate`], also returning the FIR-to-IR block and value maps.
pub fn translate(
    registry: &IntrinsicRegistry,
    f: &FirFunction,
    arg_types: &[FrontendType],
) -> Result<Translation, CodegenError> {
    let mut ctx = BuilderContext::new(registry);
    let (func, frame) = ctx.emit_function(f, arg_types)?;
    Ok(Translation { module: ctx.module, func, blocks: frame.blocks, values: frame.values })
}
