//! Arena storage for operations, blocks, regions and SSA values.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU32, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::types::{IrAttribute, IrType};

static NEXT_MODULE_TAG: AtomicU32 = AtomicU32::new(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModuleTag(pub u32);

/// Handle to an SSA value. Carries the tag of the module that owns it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ValueId {
    pub module: ModuleTag,
    pub index: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OpId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RegionId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValueOrigin {
    OpResult { op: OpId, index: u32 },
    BlockArgument { block: BlockId, index: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueData {
    pub ty: IrType,
    pub origin: ValueOrigin,
}

/// A branch target: destination block plus the values bound to its arguments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Successor {
    pub block: BlockId,
    pub args: Vec<ValueId>,
}

impl Successor {
    pub fn new(block: BlockId, args: Vec<ValueId>) -> Self {
        Successor { block, args }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Operation {
    pub name: String,
    pub operands: Vec<ValueId>,
    pub results: Vec<ValueId>,
    pub attributes: BTreeMap<String, IrAttribute>,
    pub regions: Vec<RegionId>,
    pub successors: Vec<Successor>,
    pub parent: Option<BlockId>,
}

impl Operation {
    pub fn attr(&self, name: &str) -> Option<&IrAttribute> {
        self.attributes.get(name)
    }

    pub fn dialect(&self) -> &str {
        self.name.split_once('.').map_or("", |(d, _)| d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub arguments: Vec<ValueId>,
    pub operations: Vec<OpId>,
    pub parent: RegionId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub blocks: Vec<BlockId>,
    pub parent: Option<OpId>,
}

impl Region {
    pub fn entry(&self) -> Option<BlockId> {
        self.blocks.first().copied()
    }
}

/// Everything needed to create one operation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OperationState {
    pub name: String,
    pub operands: Vec<ValueId>,
    pub result_types: Vec<IrType>,
    pub attributes: BTreeMap<String, IrAttribute>,
    pub regions: Vec<RegionId>,
    pub successors: Vec<Successor>,
}

impl OperationState {
    pub fn new(name: impl Into<String>) -> Self {
        OperationState { name: name.into(), ..Default::default() }
    }

    pub fn operands(mut self, operands: impl IntoIterator<Item = ValueId>) -> Self {
        self.operands.extend(operands);
        self
    }

    pub fn results(mut self, types: impl IntoIterator<Item = IrType>) -> Self {
        self.result_types.extend(types);
        self
    }

    pub fn attr(mut self, name: impl Into<String>, value: IrAttribute) -> Self {
        self.attributes.insert(name.into(), value);
        self
    }

    pub fn region(mut self, region: RegionId) -> Self {
        self.regions.push(region);
        self
    }

    pub fn successor(mut self, block: BlockId, args: Vec<ValueId>) -> Self {
        self.successors.push(Successor { block, args });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IrError {
    #[error("value {0:?} does not belong to this module")]
    ForeignValue(ValueId),
    #[error("no insertion block is set")]
    NoInsertionPoint,
    #[error("region {0:?} is already attached to an operation")]
    RegionAlreadyAttached(RegionId),
    #[error("op `{name}` has {count} results, index {index} is out of range")]
    ResultOutOfRange { name: String, index: usize, count: usize },
    #[error("insertion position {position} is past the end of block {block:?}")]
    BadPosition { block: BlockId, position: usize },
}

/// Where a new operation goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertPoint {
    End(BlockId),
    At(BlockId, usize),
}

/// An IR module: a top-level region with one block of symbol-defining ops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrModule {
    tag: ModuleTag,
    values: Vec<ValueData>,
    ops: Vec<Operation>,
    blocks: Vec<Block>,
    regions: Vec<Region>,
    body: RegionId,
    #[serde(skip)]
    insertion: Option<BlockId>,
}

impl Default for IrModule {
    fn default() -> Self {
        Self::new()
    }
}

impl IrModule {
    pub fn new() -> Self {
        let tag = ModuleTag(NEXT_MODULE_TAG.fetch_add(1, Ordering::Relaxed));
        let mut module = IrModule {
            tag,
            values: Vec::new(),
            ops: Vec::new(),
            blocks: Vec::new(),
            regions: Vec::new(),
            body: RegionId(0),
            insertion: None,
        };
        let body = module.new_region();
        module.body = body;
        let block = module.append_block(body, &[]);
        module.insertion = Some(block);
        module
    }

    pub fn tag(&self) -> ModuleTag {
        self.tag
    }

    pub fn body(&self) -> RegionId {
        self.body
    }

    /// The single block holding top-level symbol ops.
    pub fn body_block(&self) -> BlockId {
        self.regions[self.body.0 as usize].blocks[0]
    }

    pub fn value(&self, v: ValueId) -> &ValueData {
        &self.values[v.index as usize]
    }

    pub fn value_type(&self, v: ValueId) -> &IrType {
        &self.value(v).ty
    }

    pub fn value_origin(&self, v: ValueId) -> ValueOrigin {
        self.value(v).origin
    }

    /// Whether `v` is a valid handle into this module.
    pub fn owns_value(&self, v: ValueId) -> bool {
        v.module == self.tag && (v.index as usize) < self.values.len()
    }

    pub fn num_values(&self) -> usize {
        self.values.len()
    }

    pub fn op(&self, id: OpId) -> &Operation {
        &self.ops[id.0 as usize]
    }

    pub fn op_mut(&mut self, id: OpId) -> &mut Operation {
        &mut self.ops[id.0 as usize]
    }

    pub fn has_op(&self, id: OpId) -> bool {
        (id.0 as usize) < self.ops.len()
    }

    pub fn num_ops(&self) -> usize {
        self.ops.len()
    }

    pub fn block(&self, id: BlockId) -> &Block {
        &self.blocks[id.0 as usize]
    }

    pub fn has_block(&self, id: BlockId) -> bool {
        (id.0 as usize) < self.blocks.len()
    }

    pub fn region(&self, id: RegionId) -> &Region {
        &self.regions[id.0 as usize]
    }

    pub fn has_region(&self, id: RegionId) -> bool {
        (id.0 as usize) < self.regions.len()
    }

    /// Creates a detached region; attach it by listing it in an [`OperationState`].
    pub fn new_region(&mut self) -> RegionId {
        let id = RegionId(self.regions.len() as u32);
        self.regions.push(Region { blocks: Vec::new(), parent: None });
        id
    }

    /// Appends a block whose arguments have the given types.
    pub fn append_block(&mut self, region: RegionId, arg_types: &[IrType]) -> BlockId {
        let id = BlockId(self.blocks.len() as u32);
        let arguments = arg_types
            .iter()
            .enumerate()
            .map(|(i, ty)| {
                self.push_value(ty.clone(), ValueOrigin::BlockArgument { block: id, index: i as u32 })
            })
            .collect();
        self.blocks.push(Block { arguments, operations: Vec::new(), parent: region });
        self.regions[region.0 as usize].blocks.push(id);
        id
    }

    /// Adds one more argument to an existing block.
    pub fn add_block_argument(&mut self, block: BlockId, ty: IrType) -> ValueId {
        let index = self.blocks[block.0 as usize].arguments.len() as u32;
        let v = self.push_value(ty, ValueOrigin::BlockArgument { block, index });
        self.blocks[block.0 as usize].arguments.push(v);
        v
    }

    fn push_value(&mut self, ty: IrType, origin: ValueOrigin) -> ValueId {
        let v = ValueId { module: self.tag, index: self.values.len() as u32 };
        self.values.push(ValueData { ty, origin });
        v
    }

    pub fn insertion_block(&self) -> Option<BlockId> {
        self.insertion
    }

    pub fn set_insertion_block(&mut self, block: BlockId) {
        self.insertion = Some(block);
    }

    /// Creates an operation at the end of the current insertion block.
    pub fn create_op(&mut self, state: OperationState) -> Result<OpId, IrError> {
        let block = self.insertion.ok_or(IrError::NoInsertionPoint)?;
        self.insert_op(InsertPoint::End(block), state)
    }

    pub fn insert_op(&mut self, at: InsertPoint, state: OperationState) -> Result<OpId, IrError> {
        for &v in state.operands.iter().chain(state.successors.iter().flat_map(|s| &s.args)) {
            if !self.owns_value(v) {
                return Err(IrError::ForeignValue(v));
            }
        }
        for &r in &state.regions {
            if self.regions[r.0 as usize].parent.is_some() || r == self.body {
                return Err(IrError::RegionAlreadyAttached(r));
            }
        }
        let (block, position) = match at {
            InsertPoint::End(b) => (b, self.blocks[b.0 as usize].operations.len()),
            InsertPoint::At(b, p) => {
                if p > self.blocks[b.0 as usize].operations.len() {
                    return Err(IrError::BadPosition { block: b, position: p });
                }
                (b, p)
            }
        };
        let id = OpId(self.ops.len() as u32);
        let results = state
            .result_types
            .into_iter()
            .enumerate()
            .map(|(i, ty)| self.push_value(ty, ValueOrigin::OpResult { op: id, index: i as u32 }))
            .collect();
        for &r in &state.regions {
            self.regions[r.0 as usize].parent = Some(id);
        }
        self.ops.push(Operation {
            name: state.name,
            operands: state.operands,
            results,
            attributes: state.attributes,
            regions: state.regions,
            successors: state.successors,
            parent: Some(block),
        });
        self.blocks[block.0 as usize].operations.insert(position, id);
        Ok(id)
    }

    /// Result `index` of `op`.
    pub fn result(&self, op: OpId, index: usize) -> Result<ValueId, IrError> {
        let o = self.op(op);
        o.results.get(index).copied().ok_or_else(|| IrError::ResultOutOfRange {
            name: o.name.clone(),
            index,
            count: o.results.len(),
        })
    }

    /// Block that contains the definition of `v`.
    pub fn defining_block(&self, v: ValueId) -> Option<BlockId> {
        match self.value_origin(v) {
            ValueOrigin::BlockArgument { block, .. } => Some(block),
            ValueOrigin::OpResult { op, .. } => self.op(op).parent,
        }
    }

    /// Op that owns the region containing `block`, if any.
    pub fn parent_op_of_block(&self, block: BlockId) -> Option<OpId> {
        self.region(self.block(block).parent).parent
    }

    /// Position of `op` within its parent block.
    pub fn op_position(&self, op: OpId) -> Option<usize> {
        let parent = self.op(op).parent?;
        self.block(parent).operations.iter().position(|&o| o == op)
    }

    /// Top-level ops in the module body.
    pub fn symbols(&self) -> impl Iterator<Item = OpId> + '_ {
        self.block(self.body_block()).operations.iter().copied()
    }

    /// Finds a top-level op by its `sym_name` attribute.
    pub fn lookup_symbol(&self, name: &str) -> Option<OpId> {
        self.symbols().find(|&op| self.op(op).attr("sym_name").and_then(|a| a.as_str()) == Some(name))
    }

    /// Every op in the module in pre-order (block order, then nested regions).
    pub fn walk(&self) -> Vec<OpId> {
        let mut out = Vec::new();
        self.walk_region(self.body, &mut out);
        out
    }

    pub fn walk_region(&self, region: RegionId, out: &mut Vec<OpId>) {
        for &b in &self.region(region).blocks {
            for &op in &self.block(b).operations {
                out.push(op);
                for &r in &self.op(op).regions {
                    self.walk_region(r, out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn func_with_entry(m: &mut IrModule, args: &[IrType]) -> (OpId, BlockId) {
        let region = m.new_region();
        let entry = m.append_block(region, args);
        let f = m
            .create_op(
                OperationState::new("func.func")
                    .attr("sym_name", IrAttribute::string("f"))
                    .region(region),
            )
            .unwrap();
        (f, entry)
    }

    #[test]
    fn create_op_allocates_results() {
        let mut m = IrModule::new();
        let (_, entry) = func_with_entry(&mut m, &[IrType::Float32, IrType::Float32]);
        let args = m.block(entry).arguments.clone();
        m.set_insertion_block(entry);
        let add = m
            .create_op(OperationState::new("arith.addf").operands(args).results([IrType::Float32]))
            .unwrap();
        let r = m.result(add, 0).unwrap();
        assert_eq!(m.value_type(r), &IrType::Float32);
        assert_eq!(m.value_origin(r), ValueOrigin::OpResult { op: add, index: 0 });
        let ret = m.create_op(OperationState::new("func.return").operands([r])).unwrap();
        assert!(m.op(ret).results.is_empty());
        assert!(matches!(m.result(ret, 0), Err(IrError::ResultOutOfRange { count: 0, .. })));
    }

    #[test]
    fn constant_state() {
        let mut m = IrModule::new();
        let (_, entry) = func_with_entry(&mut m, &[]);
        m.set_insertion_block(entry);
        let c = m
            .create_op(
                OperationState::new("arith.constant")
                    .attr("value", IrAttribute::float(1.0, IrType::Float32))
                    .results([IrType::Float32]),
            )
            .unwrap();
        assert_eq!(m.op(c).attr("value"), Some(&IrAttribute::float(1.0, IrType::Float32)));
    }

    #[test]
    fn foreign_operands_are_rejected() {
        let mut a = IrModule::new();
        let (_, ea) = func_with_entry(&mut a, &[IrType::Float32]);
        let foreign = a.block(ea).arguments[0];
        let mut b = IrModule::new();
        let (_, eb) = func_with_entry(&mut b, &[]);
        b.set_insertion_block(eb);
        let err = b
            .create_op(OperationState::new("arith.negf").operands([foreign]).results([IrType::Float32]))
            .unwrap_err();
        assert_eq!(err, IrError::ForeignValue(foreign));
    }

    #[test]
    fn blocks_append_in_order() {
        let mut m = IrModule::new();
        let r = m.new_region();
        let b0 = m.append_block(r, &[IrType::i64()]);
        let b1 = m.append_block(r, &[]);
        assert_eq!(m.region(r).blocks, vec![b0, b1]);
        assert_eq!(m.block(b0).arguments.len(), 1);
        let a = m.block(b0).arguments[0];
        assert_eq!(m.value_origin(a), ValueOrigin::BlockArgument { block: b0, index: 0 });
        assert!(m.block(b1).arguments.is_empty());
    }

    #[test]
    fn insert_at_front() {
        let mut m = IrModule::new();
        let (_, entry) = func_with_entry(&mut m, &[]);
        m.set_insertion_block(entry);
        let a = m.create_op(OperationState::new("x.a")).unwrap();
        let b = m.insert_op(InsertPoint::At(entry, 0), OperationState::new("x.b")).unwrap();
        assert_eq!(m.block(entry).operations, vec![b, a]);
        assert!(m.insert_op(InsertPoint::At(entry, 9), OperationState::new("x.c")).is_err());
    }

    #[test]
    fn regions_attach_once() {
        let mut m = IrModule::new();
        let r = m.new_region();
        m.append_block(r, &[]);
        m.create_op(OperationState::new("x.a").region(r)).unwrap();
        assert_eq!(
            m.create_op(OperationState::new("x.b").region(r)),
            Err(IrError::RegionAlreadyAttached(r))
        );
    }
}
