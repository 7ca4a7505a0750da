//! Einsum specifications lowered to `linalg.generic`.
//!
//! Iteration axes are ordered output indices first, then the indices that only appear
//! in inputs, in first-appearance order. Operands are passed inputs first, output last.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::codegen::{BuilderContext, CodegenError, IntrinsicRegistry, IntrinsicSignature};
use crate::fir::{FirArg, FirBlock, FirFunction, FrontendType, Statement, StatementKind};
use crate::ir::{IndexMap, IrAttribute, IrModule, IrType, OpId, OperationState, ValueId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EinsumError {
    #[error("malformed einsum `{text}`: {message}")]
    Syntax { text: String, message: String },
    #[error("output index `{0}` does not appear in any input")]
    MissingOutputIndex(String),
    #[error("index `{index}` is repeated within operand {operand}")]
    RepeatedIndex { index: String, operand: usize },
    #[error("expected {expected} operands, got {given}")]
    OperandCount { expected: usize, given: usize },
    #[error("operand {operand} has rank {given}, the spec expects {expected}")]
    RankMismatch { operand: usize, expected: usize, given: usize },
    #[error("operand {operand} has type {ty}; every operand must be a float tensor of element type {expected}")]
    ElementType { operand: usize, ty: String, expected: String },
}

impl From<EinsumError> for CodegenError {
    fn from(e: EinsumError) -> Self {
        CodegenError::Builder(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EinsumSpec {
    pub inputs: Vec<Vec<String>>,
    pub output: Vec<String>,
    /// Iteration-space axes `d0, d1, ...` by index name.
    pub axes: Vec<String>,
}

impl EinsumSpec {
    pub fn axis(&self, index: &str) -> Option<usize> {
        self.axes.iter().position(|a| a == index)
    }
}

impl fmt::Display for EinsumSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tuple = |t: &[String]| format!("({})", t.join(","));
        let inputs: Vec<String> = self.inputs.iter().map(|t| tuple(t)).collect();
        write!(f, "{}->{}", inputs.join(","), tuple(&self.output))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IteratorType {
    Parallel,
    Reduction,
}

impl IteratorType {
    pub fn as_str(self) -> &'static str {
        match self {
            IteratorType::Parallel => "parallel",
            IteratorType::Reduction => "reduction",
        }
    }
}

impl fmt::Display for IteratorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parses `(i,k),(k,j)->(i,j)`.
pub fn parse_einsum(text: &str) -> Result<EinsumSpec, EinsumError> {
    let syntax = |message: &str| EinsumError::Syntax { text: text.to_string(), message: message.to_string() };
    let (lhs, rhs) = text.split_once("->").ok_or_else(|| syntax("missing `->`"))?;
    let inputs = parse_tuples(lhs).map_err(|m| syntax(&m))?;
    let outputs = parse_tuples(rhs).map_err(|m| syntax(&m))?;
    if inputs.is_empty() {
        return Err(syntax("no input operands"));
    }
    let [output] = <[Vec<String>; 1]>::try_from(outputs).map_err(|_| syntax("expected exactly one output tuple"))?;

    for (operand, tuple) in inputs.iter().chain(std::iter::once(&output)).enumerate() {
        for (i, idx) in tuple.iter().enumerate() {
            if tuple[..i].contains(idx) {
                return Err(EinsumError::RepeatedIndex { index: idx.clone(), operand });
            }
        }
    }
    let mut axes = Vec::new();
    for idx in &output {
        if !inputs.iter().any(|t| t.contains(idx)) {
            return Err(EinsumError::MissingOutputIndex(idx.clone()));
        }
        axes.push(idx.clone());
    }
    for idx in inputs.iter().flatten() {
        if !axes.contains(idx) {
            axes.push(idx.clone());
        }
    }
    Ok(EinsumSpec { inputs, output, axes })
}

fn parse_tuples(text: &str) -> Result<Vec<Vec<String>>, String> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let inner_start = rest.strip_prefix('(').ok_or_else(|| format!("expected `(` at `{rest}`"))?;
        let close = inner_start.find(')').ok_or("unclosed `(`")?;
        let inner = inner_start[..close].trim();
        let tuple: Vec<String> = if inner.is_empty() {
            Vec::new()
        } else {
            inner.split(',').map(|s| s.trim().trim_start_matches(':').to_string()).collect()
        };
        for idx in &tuple {
            let valid = idx.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
                && idx.chars().all(|c| c.is_alphanumeric() || c == '_');
            if !valid {
                return Err(format!("`{idx}` is not an index name"));
            }
        }
        out.push(tuple);
        rest = inner_start[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
            if rest.is_empty() {
                return Err("trailing `,`".into());
            }
        } else if !rest.is_empty() {
            return Err(format!("expected `,` before `{rest}`"));
        }
    }
    Ok(out)
}

/// Indexing maps (inputs, then output) and per-axis iterator types.
pub fn derive_maps(spec: &EinsumSpec) -> (Vec<IndexMap>, Vec<IteratorType>) {
    let n = spec.axes.len();
    let map = |t: &[String]| IndexMap::new(n, t.iter().map(|i| spec.axis(i).expect("indices are axes")).collect());
    let maps = spec.inputs.iter().map(|t| map(t)).chain(std::iter::once(map(&spec.output))).collect();
    let iterators = spec
        .axes
        .iter()
        .map(|a| if spec.output.contains(a) { IteratorType::Parallel } else { IteratorType::Reduction })
        .collect();
    (maps, iterators)
}

/// Scalar body of the generic op over element type `elem`: parameters are the input
/// elements followed by the output element.
pub fn body_function(spec: &EinsumSpec, elem: FrontendType) -> FirFunction {
    let n = spec.inputs.len();
    let mut f = FirFunction::new("einsum_body", vec![elem.clone(); n + 1]);
    let (_, iterators) = derive_maps(spec);
    let mut stmts = Vec::new();
    let invoke = |target: &str, args: Vec<FirArg>| StatementKind::Invoke {
        target: target.to_string(),
        args,
        ty: elem.clone(),
    };
    if n == 1 && iterators.iter().all(|&t| t == IteratorType::Parallel) {
        stmts.push(Statement::new(None, StatementKind::Return(Some(FirArg::Param(1)))));
    } else {
        let mut acc = FirArg::Param(1);
        let mut id = 0;
        for k in 2..=n {
            id += 1;
            stmts.push(Statement::new(Some(id), invoke("*", vec![acc, FirArg::Param(k)])));
            acc = FirArg::Ssa(id);
        }
        id += 1;
        stmts.push(Statement::new(Some(id), invoke("+", vec![acc, FirArg::Param(n + 1)])));
        stmts.push(Statement::new(None, StatementKind::Return(Some(FirArg::Ssa(id)))));
    }
    f.blocks.push(FirBlock { statements: stmts });
    f
}

/// Emits one `linalg.generic` for `spec` over `operands` (inputs then output).
pub fn build_generic(ctx: &mut BuilderContext<'_>, spec: &EinsumSpec, operands: &[ValueId]) -> Result<OpId, CodegenError> {
    let expected = spec.inputs.len() + 1;
    if operands.len() != expected {
        return Err(EinsumError::OperandCount { expected, given: operands.len() }.into());
    }
    let types: Vec<IrType> = operands.iter().map(|&v| ctx.value_type(v).clone()).collect();
    let elem = types[0].element_type().cloned().unwrap_or(IrType::Index);
    let tuples = spec.inputs.iter().chain(std::iter::once(&spec.output));
    for (i, (ty, tuple)) in types.iter().zip(tuples).enumerate() {
        if !ty.is_tensor() || ty.element_type() != Some(&elem) || !elem.is_float() {
            return Err(EinsumError::ElementType { operand: i, ty: ty.to_string(), expected: elem.to_string() }.into());
        }
        let rank = ty.rank().unwrap_or(0);
        if rank != tuple.len() {
            return Err(EinsumError::RankMismatch { operand: i, expected: tuple.len(), given: rank }.into());
        }
    }
    let elem_ft = match elem {
        IrType::Float32 => FrontendType::f32(),
        _ => FrontendType::f64(),
    };
    let body = body_function(spec, elem_ft.clone());
    let region = ctx.generate_region(
        &body,
        &vec![elem_ft; expected],
        Arc::new(|ctx, values| {
            ctx.build(OperationState::new("linalg.yield").operands(values.iter().copied()))?;
            Ok(())
        }),
    )?;
    let (maps, iterators) = derive_maps(spec);
    let state = OperationState::new("linalg.generic")
        .operands(operands.iter().copied())
        .results([types[expected - 1].clone()])
        .attr("indexing_maps", IrAttribute::Array(maps.into_iter().map(IrAttribute::IndexMap).collect()))
        .attr(
            "iterator_types",
            IrAttribute::Array(iterators.iter().map(|t| IrAttribute::string(t.as_str())).collect()),
        )
        .region(region);
    ctx.build(state)
}

/// Registers `name(tensor{T,r1}, ..., tensor{T,r_out})` building the generic op for `spec`.
pub fn register_einsum_intrinsic(
    registry: &mut IntrinsicRegistry,
    name: &str,
    spec: &EinsumSpec,
    elem: FrontendType,
) -> Result<(), CodegenError> {
    let params = operand_types(spec, &elem);
    let spec = spec.clone();
    registry.register_intrinsic(IntrinsicSignature::new(name, params), move |ctx, call| {
        let operands = (0..call.args.len()).map(|i| call.scalar(i)).collect::<Result<Vec<_>, _>>()?;
        let op = build_generic(ctx, &spec, &operands)?;
        Ok(ctx.module().op(op).results.clone())
    })
}

/// Frontend types of the operands of `spec`: inputs, then output.
pub fn operand_types(spec: &EinsumSpec, elem: &FrontendType) -> Vec<FrontendType> {
    spec.inputs
        .iter()
        .chain(std::iter::once(&spec.output))
        .map(|t| FrontendType::tensor(elem.clone(), t.len() as i64))
        .collect()
}

/// A function `name(inputs..., output)` whose body is one call to the einsum intrinsic `callee`.
pub fn wrapper_function(name: &str, callee: &str, spec: &EinsumSpec, elem: &FrontendType) -> FirFunction {
    let params = operand_types(spec, elem);
    let out_ty = params.last().cloned().unwrap_or(FrontendType::Any);
    let args = (1..=params.len()).map(FirArg::Param).collect();
    let mut f = FirFunction::new(name, params);
    f.blocks.push(FirBlock {
        statements: vec![
            Statement::new(Some(1), StatementKind::Invoke { target: callee.to_string(), args, ty: out_ty }),
            Statement::new(None, StatementKind::Return(Some(FirArg::Ssa(1)))),
        ],
    });
    f
}

/// Module with one function `einsum(inputs..., output) -> output` computing `spec`.
pub fn generate_einsum(registry: &IntrinsicRegistry, spec: &EinsumSpec, elem: FrontendType) -> Result<IrModule, CodegenError> {
    let mut registry = registry.clone();
    let callee = "einsum_intrinsic";
    register_einsum_intrinsic(&mut registry, callee, spec, elem.clone())?;
    let wrapper = wrapper_function("einsum", callee, spec, &elem);
    let types = wrapper.params.clone();
    crate::codegen::generate(&registry, &wrapper, &types)
}
