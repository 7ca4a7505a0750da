//! The end-to-end path from FIR to verified IR: validate, inline, insert bool
//! conversions, generate, verify.

use thiserror::Error;

use crate::codegen::{default_registry, generate, CodegenError, IntrinsicRegistry};
use crate::fir::{inline_calls, insert_bool_conversions, validate_fir, FirFunction, FirProgram, FirReport, FrontendType, InlineError};
use crate::gpu::register_gpu_intrinsics;
use crate::ir::{verify_module, IrModule, VerificationReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("no function `{0}` in the input")]
    UnknownEntry(String),
    #[error("`{entry}` takes {expected} arguments, but {given} types were given")]
    Arity { entry: String, expected: usize, given: usize },
    #[error("invalid function `{function}`:\n{report}")]
    Invalid { function: String, report: FirReport },
    #[error(transparent)]
    Inline(#[from] InlineError),
    #[error(transparent)]
    Codegen(#[from] CodegenError),
    #[error("generated module failed verification:\n{0}")]
    Verify(VerificationReport),
}

/// Scalar arithmetic plus the GPU indexing and memory intrinsics.
pub fn standard_registry() -> IntrinsicRegistry {
    let mut registry = default_registry();
    register_gpu_intrinsics(&mut registry).expect("gpu intrinsics do not clash with the arithmetic ones");
    registry
}

pub fn is_frontend_bool(t: &FrontendType) -> bool {
    *t == FrontendType::bool()
}

/// Inlines and bool-converts `entry`, validating before and after.
pub fn prepare(registry: &IntrinsicRegistry, program: &FirProgram, entry: &str) -> Result<FirFunction, PipelineError> {
    let f = program.get(entry).ok_or_else(|| PipelineError::UnknownEntry(entry.to_string()))?;
    for g in program.functions.values() {
        let report = validate_fir(g);
        if !report.is_ok() {
            return Err(PipelineError::Invalid { function: g.name.clone(), report });
        }
    }
    let inlined = inline_calls(program, &f.name, |name, types| registry.is_intrinsic(name, types))?;
    let converted = insert_bool_conversions(&inlined, is_frontend_bool);
    let report = validate_fir(&converted);
    if !report.is_ok() {
        return Err(PipelineError::Invalid { function: converted.name.clone(), report });
    }
    Ok(converted)
}

/// Full pipeline for `entry` specialised to `arg_types`; the result always verifies.
pub fn compile(
    registry: &IntrinsicRegistry,
    program: &FirProgram,
    entry: &str,
    arg_types: &[FrontendType],
) -> Result<IrModule, PipelineError> {
    let f = program.get(entry).ok_or_else(|| PipelineError::UnknownEntry(entry.to_string()))?;
    if f.params.len() != arg_types.len() {
        return Err(PipelineError::Arity { entry: entry.to_string(), expected: f.params.len(), given: arg_types.len() });
    }
    let f = prepare(registry, program, entry)?;
    let module = generate(registry, &f, arg_types)?;
    let report = verify_module(&module, Some(registry.dialects()));
    if !report.is_ok() {
        return Err(PipelineError::Verify(report));
    }
    Ok(module)
}
