//! Frontend IR: a typed SSA form with numbered blocks, gotos and phi nodes,
//! plus its text parser and the passes run before translation.

mod ast;
mod boolconv;
mod inline;
pub(crate) mod parse;
mod types;
mod validate;

pub use ast::{print_fir, print_program, FirArg, FirBlock, FirFunction, FirProgram, Literal, Statement, StatementKind};
pub use boolconv::{insert_bool_conversions, BOOL_CONVERSION};
pub use inline::{inline_calls, InlineError};
pub use parse::{parse_program, parse_program_with, FirParseError};
pub use types::{split_top_level, ConcreteType, FrontendType, TypeLattice, TypeParam};
pub use validate::{validate_fir, FirIssue, FirReport};
