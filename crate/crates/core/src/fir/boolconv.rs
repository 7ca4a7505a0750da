use super::ast::{FirFunction, Statement, StatementKind};
use super::types::FrontendType;

/// Name of the conversion call inserted in front of non-Bool branch conditions.
pub const BOOL_CONVERSION: &str = "bool_conversion_intrinsic";

/// Inserts a `bool_conversion_intrinsic` call before every conditional branch whose
/// condition is not a frontend Bool, and rewires the branch to the converted value.
pub fn insert_bool_conversions<P>(f: &FirFunction, is_frontend_bool: P) -> FirFunction
where
    P: Fn(&FrontendType) -> bool,
{
    let types = f.ssa_types();
    let mut out = f.clone();
    let mut next = f.max_ssa_id();
    for block in &mut out.blocks {
        let Some(last) = block.statements.last_mut() else { continue };
        let StatementKind::GotoIfNot { cond, .. } = &mut last.kind else { continue };
        let ty = f.arg_type(cond, &types).unwrap_or(FrontendType::Any);
        if is_frontend_bool(&ty) {
            continue;
        }
        next += 1;
        let original = *cond;
        *cond = super::ast::FirArg::Ssa(next);
        let pos = block.statements.len() - 1;
        block.statements.insert(
            pos,
            Statement::new(
                Some(next),
                StatementKind::Invoke { target: BOOL_CONVERSION.into(), args: vec![original], ty: FrontendType::bool() },
            ),
        );
    }
    out
}
