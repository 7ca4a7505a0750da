use std::collections::BTreeMap;

use thiserror::Error;

use super::definition::{DialectDefinition, OpDefinition, Violation, ViolationKind};
use super::spec::{load_dialect_spec, SpecError};
use crate::ir::{InsertPoint, IrError, IrModule, IrType, OpId, OperationState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DialectError {
    #[error("dialect `{0}` is already registered")]
    DuplicateDialect(String),
    #[error("unknown op `{0}`")]
    UnknownOp(String),
    #[error("invalid `{op}`: {message}")]
    Invalid { op: String, kind: ViolationKind, message: String },
    #[error("cannot infer the result types of `{0}`; pass them explicitly")]
    CannotInferResults(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Ir(#[from] IrError),
}

/// All dialects known to a translation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DialectRegistry {
    dialects: BTreeMap<String, DialectDefinition>,
}

impl DialectRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_dialect(&mut self, def: DialectDefinition) -> Result<(), DialectError> {
        if self.dialects.contains_key(&def.name) {
            return Err(DialectError::DuplicateDialect(def.name));
        }
        self.dialects.insert(def.name.clone(), def);
        Ok(())
    }

    /// Parses spec text and registers the resulting dialect.
    pub fn load_and_register(&mut self, text: &str) -> Result<(), DialectError> {
        self.register_dialect(load_dialect_spec(text)?)
    }

    pub fn dialect(&self, name: &str) -> Option<&DialectDefinition> {
        self.dialects.get(name)
    }

    pub fn dialects(&self) -> impl Iterator<Item = &DialectDefinition> {
        self.dialects.values()
    }

    /// Looks up a qualified op name such as `arith.addf`.
    pub fn lookup(&self, qualified: &str) -> Option<&OpDefinition> {
        let (dialect, op) = qualified.split_once('.')?;
        self.dialects.get(dialect)?.op(op)
    }

    pub fn docstring(&self, qualified: &str) -> Option<&str> {
        self.lookup(qualified).map(|d| d.doc.as_str())
    }

    /// Checks `state`, resolves result types when left empty, and creates the op
    /// at the module's insertion block.
    pub fn build_op(&self, module: &mut IrModule, state: OperationState) -> Result<OpId, DialectError> {
        let block = module.insertion_block().ok_or(IrError::NoInsertionPoint)?;
        self.build_op_at(module, InsertPoint::End(block), state)
    }

    pub fn build_op_at(
        &self,
        module: &mut IrModule,
        at: InsertPoint,
        mut state: OperationState,
    ) -> Result<OpId, DialectError> {
        let def = self.lookup(&state.name).ok_or_else(|| DialectError::UnknownOp(state.name.clone()))?;
        for &v in state.operands.iter().chain(state.successors.iter().flat_map(|s| &s.args)) {
            if !module.owns_value(v) {
                return Err(IrError::ForeignValue(v).into());
            }
        }
        let operand_types: Vec<IrType> =
            state.operands.iter().map(|&v| module.value_type(v).clone()).collect();
        if state.result_types.is_empty() && !def.results.is_empty() {
            state.result_types = def
                .infer_result_types(&operand_types, &state.attributes)
                .ok_or_else(|| DialectError::CannotInferResults(state.name.clone()))?;
        }
        let violations = def.check(
            &operand_types,
            &state.result_types,
            &state.attributes,
            state.regions.len(),
            state.successors.len(),
        );
        if let Some(Violation { kind, message }) = violations.into_iter().next() {
            return Err(DialectError::Invalid { op: state.name, kind, message });
        }
        Ok(module.insert_op(at, state)?)
    }
}

const BUILTIN_SPECS: [&str; 7] = [
    include_str!("specs/arith.dialect"),
    include_str!("specs/math.dialect"),
    include_str!("specs/cf.dialect"),
    include_str!("specs/func.dialect"),
    include_str!("specs/linalg.dialect"),
    include_str!("specs/gpu.dialect"),
    include_str!("specs/memref.dialect"),
];

/// Spec text of a builtin dialect, by name.
pub fn builtin_spec(name: &str) -> Option<&'static str> {
    BUILTIN_SPECS
        .iter()
        .copied()
        .find(|text| text.lines().any(|l| l.trim() == format!("dialect {name}")))
}

/// Registry preloaded with the builtin `arith`, `math`, `cf`, `func`, `linalg`,
/// `gpu` and `memref` subsets.
pub fn builtin_registry() -> DialectRegistry {
    let mut registry = DialectRegistry::new();
    for text in BUILTIN_SPECS {
        registry.load_and_register(text).expect("builtin dialect specs are well-formed");
    }
    registry
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialects::{serialize_dialect, TypeConstraint};
    use crate::ir::{IrAttribute, Successor};

    fn func_block(m: &mut IrModule, args: &[IrType]) -> Vec<crate::ir::ValueId> {
        let r = m.new_region();
        let b = m.append_block(r, args);
        m.create_op(OperationState::new("func.func").region(r)).unwrap();
        m.set_insertion_block(b);
        m.block(b).arguments.clone()
    }

    #[test]
    fn builds_addf_with_inferred_result() {
        let reg = builtin_registry();
        let mut m = IrModule::new();
        let a = func_block(&mut m, &[IrType::Float32, IrType::Float32]);
        let op = reg.build_op(&mut m, OperationState::new("arith.addf").operands(a)).unwrap();
        let r = m.result(op, 0).unwrap();
        assert_eq!(m.value_type(r), &IrType::Float32);
        assert!(reg.docstring(&m.op(op).name).unwrap().contains("addition"));
    }

    #[test]
    fn rejects_integer_addf() {
        let reg = builtin_registry();
        let mut m = IrModule::new();
        let a = func_block(&mut m, &[IrType::i64(), IrType::i64()]);
        let err = reg.build_op(&mut m, OperationState::new("arith.addf").operands(a)).unwrap_err();
        match err {
            DialectError::Invalid { kind: ViolationKind::Type, message, .. } => {
                assert!(message.contains("lhs"), "{message}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cond_br_with_two_successors() {
        let reg = builtin_registry();
        let mut m = IrModule::new();
        let r = m.new_region();
        let b0 = m.append_block(r, &[IrType::i1()]);
        let b1 = m.append_block(r, &[]);
        let b2 = m.append_block(r, &[]);
        m.create_op(OperationState::new("func.func").region(r)).unwrap();
        m.set_insertion_block(b0);
        let c = m.block(b0).arguments[0];
        let op = reg
            .build_op(
                &mut m,
                OperationState {
                    name: "cf.cond_br".into(),
                    operands: vec![c],
                    successors: vec![Successor::new(b1, vec![]), Successor::new(b2, vec![])],
                    ..Default::default()
                },
            )
            .unwrap();
        assert_eq!(m.op(op).successors.len(), 2);
        assert!(m.op(op).results.is_empty());
    }

    #[test]
    fn duplicate_and_unknown() {
        let mut reg = builtin_registry();
        let arith = reg.dialect("arith").unwrap().clone();
        assert_eq!(reg.register_dialect(arith), Err(DialectError::DuplicateDialect("arith".into())));
        let mut m = IrModule::new();
        func_block(&mut m, &[]);
        assert_eq!(
            reg.build_op(&mut m, OperationState::new("tosa.add")),
            Err(DialectError::UnknownOp("tosa.add".into()))
        );
    }

    #[test]
    fn builtin_lookups() {
        let reg = builtin_registry();
        let exp = reg.lookup("math.exp").unwrap();
        assert_eq!(exp.operands.len(), 1);
        assert_eq!(exp.operands[0].constraint, TypeConstraint::AnyFloat);
        assert_eq!(exp.results[0].constraint, TypeConstraint::SameAs(0));
        let tid = reg.lookup("gpu.thread_id").unwrap();
        assert!(tid.operands.is_empty());
        assert_eq!(tid.results[0].constraint, TypeConstraint::Exact(IrType::Index));
        let cmpi = reg.lookup("arith.cmpi").unwrap();
        assert_eq!(cmpi.operands.len(), 2);
        assert_eq!(cmpi.results[0].constraint, TypeConstraint::Exact(IrType::i1()));
        assert!(cmpi.attribute("predicate").unwrap().required);
    }

    #[test]
    fn missing_required_attribute() {
        let reg = builtin_registry();
        let mut m = IrModule::new();
        let a = func_block(&mut m, &[IrType::i64(), IrType::i64()]);
        let err = reg.build_op(&mut m, OperationState::new("arith.cmpi").operands(a.clone())).unwrap_err();
        assert!(matches!(err, DialectError::Invalid { kind: ViolationKind::MissingAttribute, .. }));
        let ok = reg.build_op(
            &mut m,
            OperationState::new("arith.cmpi").operands(a).attr("predicate", IrAttribute::string("sge")),
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn constant_result_from_attribute() {
        let reg = builtin_registry();
        let mut m = IrModule::new();
        func_block(&mut m, &[]);
        let op = reg
            .build_op(
                &mut m,
                OperationState::new("arith.constant").attr("value", IrAttribute::int(3, IrType::i64())),
            )
            .unwrap();
        assert_eq!(m.value_type(m.result(op, 0).unwrap()), &IrType::i64());
    }

    #[test]
    fn store_element_mismatch() {
        let reg = builtin_registry();
        let mut m = IrModule::new();
        let a = func_block(
            &mut m,
            &[IrType::Float32, IrType::dyn_memref(IrType::Float64, 1), IrType::Index],
        );
        let err = reg.build_op(&mut m, OperationState::new("memref.store").operands(a)).unwrap_err();
        assert!(matches!(err, DialectError::Invalid { kind: ViolationKind::Type, .. }));
    }

    #[test]
    fn builtin_specs_round_trip() {
        let reg = builtin_registry();
        for d in reg.dialects() {
            let text = serialize_dialect(d);
            assert_eq!(&load_dialect_spec(&text).unwrap(), d, "{}", d.name);
        }
        assert!(builtin_spec("arith").unwrap().contains("op addf"));
        assert!(builtin_spec("nope").is_none());
    }
}
