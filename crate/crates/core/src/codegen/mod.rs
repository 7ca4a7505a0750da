//! Translation of frontend functions into IR by abstract interpretation, driven by a
//! registry of intrinsic builders resolved through multiple dispatch.

mod builtins;
mod context;
mod error;
mod registry;

pub use builtins::{default_registry, register_arith_intrinsics, register_integer_ops};
pub use context::{generate, translate, BuilderContext, Translation};
pub use error::CodegenError;
pub use registry::{
    promote_literal, BoolConversion, FieldType, GotoHook, GotoIfNotHook, IntrinsicBuilder, IntrinsicCall,
    IntrinsicRegistry, IntrinsicSignature, Method, PromotedLiteral, ReturnHook, TypeMapping,
};
