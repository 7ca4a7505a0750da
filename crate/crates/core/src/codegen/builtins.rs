//! Scalar arithmetic intrinsics over the `arith` and `math` dialects.

use super::error::CodegenError;
use super::registry::{IntrinsicCall, IntrinsicRegistry, IntrinsicSignature};
use super::context::BuilderContext;
use crate::fir::FrontendType;
use crate::ir::{IrAttribute, OperationState};

const FLOAT_TYPES: [&str; 2] = ["f32", "f64"];
const INT_TYPES: [&str; 4] = ["i8", "i16", "i32", "i64"];

fn unary(op: &'static str) -> impl Fn(&mut BuilderContext<'_>, &IntrinsicCall<'_>) -> Result<Vec<crate::ir::ValueId>, CodegenError> {
    move |ctx, call| {
        let x = call.scalar(0)?;
        Ok(vec![ctx.build_value(OperationState::new(op).operands([x]))?])
    }
}

fn binary(op: &'static str) -> impl Fn(&mut BuilderContext<'_>, &IntrinsicCall<'_>) -> Result<Vec<crate::ir::ValueId>, CodegenError> {
    move |ctx, call| {
        let (a, b) = (call.scalar(0)?, call.scalar(1)?);
        Ok(vec![ctx.build_value(OperationState::new(op).operands([a, b]))?])
    }
}

fn compare(predicate: &'static str) -> impl Fn(&mut BuilderContext<'_>, &IntrinsicCall<'_>) -> Result<Vec<crate::ir::ValueId>, CodegenError> {
    move |ctx, call| {
        let (a, b) = (call.scalar(0)?, call.scalar(1)?);
        Ok(vec![ctx.build_value(
            OperationState::new("arith.cmpi").operands([a, b]).attr("predicate", IrAttribute::string(predicate)),
        )?])
    }
}

/// Registers `+ - * /`, unary `-` and `exp` on floats, and `+ - *` plus the six
/// signed comparisons on fixed-width integers.
pub fn register_arith_intrinsics(registry: &mut IntrinsicRegistry) -> Result<(), CodegenError> {
    for t in FLOAT_TYPES {
        let ty = FrontendType::concrete(t);
        let two = vec![ty.clone(), ty.clone()];
        for (name, op) in [("+", "arith.addf"), ("-", "arith.subf"), ("*", "arith.mulf"), ("/", "arith.divf")] {
            registry.register_intrinsic(IntrinsicSignature::new(name, two.clone()), binary(op))?;
        }
        registry.register_intrinsic(IntrinsicSignature::new("-", vec![ty.clone()]), unary("arith.negf"))?;
        registry.register_intrinsic(IntrinsicSignature::new("exp", vec![ty.clone()]), unary("math.exp"))?;
    }
    for t in INT_TYPES {
        register_integer_ops(registry, FrontendType::concrete(t))?;
    }
    Ok(())
}

/// Registers `+ - *` and the six signed comparisons for one integer-like type.
pub fn register_integer_ops(registry: &mut IntrinsicRegistry, ty: FrontendType) -> Result<(), CodegenError> {
    let two = vec![ty.clone(), ty];
    for (name, op) in [("+", "arith.addi"), ("-", "arith.subi"), ("*", "arith.muli")] {
        registry.register_intrinsic(IntrinsicSignature::new(name, two.clone()), binary(op))?;
    }
    for (name, pred) in [("==", "eq"), ("!=", "ne"), ("<", "slt"), ("<=", "sle"), (">", "sgt"), (">=", "sge")] {
        registry.register_intrinsic(IntrinsicSignature::new(name, two.clone()), compare(pred))?;
    }
    Ok(())
}

/// Builtin dialects plus the scalar arithmetic intrinsics.
pub fn default_registry() -> IntrinsicRegistry {
    let mut registry = IntrinsicRegistry::default();
    register_arith_intrinsics(&mut registry).expect("builtin intrinsics are distinct");
    registry
}
