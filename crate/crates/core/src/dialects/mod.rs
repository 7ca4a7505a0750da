//! Declarative dialect definitions and the registry of buildable ops.

mod definition;
mod registry;
mod spec;

pub use definition::{
    AttrKind, AttrSpec, DialectDefinition, OpDefinition, SuccessorCount, TypeConstraint, ValueSpec,
    Violation, ViolationKind,
};
pub use registry::{builtin_registry, builtin_spec, DialectError, DialectRegistry};
pub use spec::{load_dialect_spec, serialize_dialect, SpecError};
