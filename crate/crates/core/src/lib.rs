//! Translation of a typed SSA frontend IR into a multi-level, dialect-based IR.
//!
//! Frontend functions are parsed, inlined and lowered by abstract interpretation: every
//! call resolves by multiple dispatch to an intrinsic that builds IR operations, control
//! flow is mirrored block for block, and phi nodes become block arguments.

pub mod codegen;
pub mod dialects;
pub mod einsum;
pub mod fir;
pub mod gpu;
pub mod interp;
pub mod ir;
pub mod pipeline;

pub use codegen::{default_registry, generate, CodegenError, IntrinsicRegistry, IntrinsicSignature};
pub use dialects::{builtin_registry, DialectRegistry};
pub use fir::{parse_program, FirFunction, FirProgram, FrontendType};
pub use interp::{run_function, run_kernel, LaunchConfig, RuntimeValue};
pub use ir::{print_module, verify_module, IrModule, IrType};
