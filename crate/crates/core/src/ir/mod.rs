//! In-memory multi-level IR: types, attributes, values, operations, blocks,
//! regions and modules, plus the verifier and printer.

mod dominance;
pub mod malformed;
mod module;
mod print;
mod types;
mod verify;

pub use dominance::Dominance;
pub use module::{
    Block, BlockId, InsertPoint, IrError, IrModule, ModuleTag, OpId, Operation, OperationState, Region,
    RegionId, Successor, ValueData, ValueId, ValueOrigin,
};
pub use print::{print_module, print_symbol};
pub use types::{format_float, Dim, IndexMap, IrAttribute, IrType, INT_WIDTHS};
pub use verify::{verify_module, Diagnostic, DiagnosticKind, VerificationReport};
