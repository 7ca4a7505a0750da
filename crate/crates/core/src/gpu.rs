//! Thread-indexing and memory intrinsics for writing GPU-style kernels.
//!
//! Ids are 0-based: `block_idx_x() * block_dim_x() + thread_idx_x()` is the global index.

use crate::codegen::{register_integer_ops, CodegenError, IntrinsicRegistry, IntrinsicSignature};
use crate::fir::FrontendType;
use crate::ir::{IrAttribute, OperationState};

pub const DIMENSIONS: [&str; 3] = ["x", "y", "z"];

/// Intrinsic name prefixes and the op each one builds.
pub const ID_INTRINSICS: [(&str, &str); 3] =
    [("thread_idx", "gpu.thread_id"), ("block_idx", "gpu.block_id"), ("block_dim", "gpu.block_dim")];

/// Registers `thread_idx_{x,y,z}`, `block_idx_{x,y,z}`, `block_dim_{x,y,z}`, `load(a, i)`,
/// `store(v, a, i)` and `+ - *` plus comparisons on `index`.
pub fn register_gpu_intrinsics(registry: &mut IntrinsicRegistry) -> Result<(), CodegenError> {
    for (prefix, op) in ID_INTRINSICS {
        for dim in DIMENSIONS {
            registry.register_intrinsic(IntrinsicSignature::new(format!("{prefix}_{dim}"), vec![]), move |ctx, _| {
                Ok(vec![ctx.build_value(
                    OperationState::new(op).results([crate::ir::IrType::Index]).attr("dimension", IrAttribute::string(dim)),
                )?])
            })?;
        }
    }
    registry.register_intrinsic(
        IntrinsicSignature::new("load", vec![FrontendType::Any, FrontendType::index()]),
        |ctx, call| {
            let (array, i) = (call.scalar(0)?, call.scalar(1)?);
            Ok(vec![ctx.build_value(OperationState::new("memref.load").operands([array, i]))?])
        },
    )?;
    registry.register_intrinsic(
        IntrinsicSignature::new("store", vec![FrontendType::Any, FrontendType::Any, FrontendType::index()]),
        |ctx, call| {
            let (value, array, i) = (call.scalar(0)?, call.scalar(1)?, call.scalar(2)?);
            ctx.build(OperationState::new("memref.store").operands([value, array, i]))?;
            Ok(vec![])
        },
    )?;
    register_integer_ops(registry, FrontendType::index())
}
