use thiserror::Error;

use crate::dialects::DialectError;
use crate::ir::IrError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodegenError {
    #[error("no method `{name}` matching ({arg_types})")]
    NoMethod { name: String, arg_types: String },
    #[error("call to `{name}({arg_types})` is ambiguous between {}", .candidates.join(" and "))]
    Ambiguous { name: String, arg_types: String, candidates: Vec<String> },
    #[error("method `{0}` is already registered")]
    DuplicateSignature(String),
    #[error("type `{0}` has no IR mapping")]
    UnmappedType(String),
    #[error("type `{0}` is not concrete")]
    NotConcrete(String),
    #[error("cannot materialize literal: {0}")]
    Literal(String),
    #[error("no bool conversion is registered for condition type `{0}`")]
    MissingBoolConversion(String),
    #[error("expected {expected} argument types, got {given}")]
    Arity { expected: usize, given: usize },
    #[error("argument type `{given}` is not a subtype of parameter type `{declared}`")]
    ArgumentType { given: String, declared: String },
    #[error("`{target}` produced values of types [{got}], but the statement declares [{expected}]")]
    ResultMismatch { target: String, expected: String, got: String },
    #[error("malformed function: {0}")]
    InvalidFir(String),
    #[error("{0}")]
    Builder(String),
    #[error("in block #{block}, statement {}: {source}", .ssa.map(|n| format!("%{n}")).unwrap_or_else(|| format!("#{}", .index + 1)))]
    At { block: usize, index: usize, ssa: Option<u32>, source: Box<CodegenError> },
    #[error(transparent)]
    Dialect(#[from] DialectError),
    #[error(transparent)]
    Ir(#[from] IrError),
}

impl CodegenError {
    /// The error without statement-location wrappers.
    pub fn root(&self) -> &CodegenError {
        match self {
            CodegenError::At { source, .. } => source.root(),
            other => other,
        }
    }
}
