use std::collections::HashMap;

use thiserror::Error;

use super::value::{wrap, Buffer, RuntimeValue};
use crate::ir::{BlockId, IrAttribute, IrModule, IrType, OpId, RegionId, ValueId};

pub const DEFAULT_STEP_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterpError {
    #[error("no function `@{0}` in the module")]
    UnknownSymbol(String),
    #[error("`@{symbol}` takes {expected} arguments, got {given}")]
    Arity { symbol: String, expected: usize, given: usize },
    #[error("argument {index} of `@{symbol}` should have type {expected}, got {given}")]
    ArgumentType { symbol: String, index: usize, expected: String, given: String },
    #[error("unsupported op `{0}`")]
    UnsupportedOp(String),
    #[error("step limit of {0} exceeded")]
    StepLimit(u64),
    #[error("missing launch config: `{0}` needs a thread grid")]
    MissingLaunch(String),
    #[error("launch extents must all be at least 1")]
    BadLaunch,
    #[error("out-of-bounds access at index {index:?} of a buffer with dims {dims:?}{}", fmt_coord(.coord))]
    OutOfBounds { index: Vec<i64>, dims: Vec<usize>, coord: Option<ThreadCoord> },
    #[error("inconsistent extents for axis d{axis}: {first} vs {second}")]
    InconsistentExtents { axis: usize, first: usize, second: usize },
    #[error("axis d{0} is not read by any operand, so its extent is unknown")]
    UnboundAxis(usize),
    #[error("malformed `{op}`: {message}")]
    Malformed { op: String, message: String },
    #[error("block fell through without a terminator")]
    NoTerminator,
}

fn fmt_coord(c: &Option<ThreadCoord>) -> String {
    match c {
        Some(c) => format!(" (block {:?}, thread {:?})", c.block, c.thread),
        None => String::new(),
    }
}

/// Grid and block extents for a simulated kernel launch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LaunchConfig {
    pub grid: [u64; 3],
    pub block: [u64; 3],
}

impl LaunchConfig {
    pub fn new(grid: [u64; 3], block: [u64; 3]) -> Self {
        LaunchConfig { grid, block }
    }

    pub fn is_valid(&self) -> bool {
        self.grid.iter().chain(&self.block).all(|&e| e >= 1)
    }
}

/// Block and thread index of one simulated thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThreadCoord {
    pub block: [u64; 3],
    pub thread: [u64; 3],
}

/// Order in which simulated threads run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThreadOrder {
    /// Blocks then threads, `x` fastest.
    #[default]
    Forward,
    Reverse,
}

#[derive(Debug, Clone)]
enum Val {
    Scalar(RuntimeValue),
    Tensor(Buffer),
    /// Index into the interpreter's memref slots.
    MemRef(usize),
}

/// Reference evaluator for modules built from the builtin dialects.
#[derive(Debug)]
pub struct Interpreter<'m> {
    module: &'m IrModule,
    step_limit: u64,
    steps: u64,
    slots: Vec<Buffer>,
    launch: Option<(LaunchConfig, ThreadCoord)>,
}

impl<'m> Interpreter<'m> {
    pub fn new(module: &'m IrModule) -> Self {
        Interpreter { module, step_limit: DEFAULT_STEP_LIMIT, steps: 0, slots: Vec::new(), launch: None }
    }

    pub fn with_step_limit(mut self, limit: u64) -> Self {
        self.step_limit = limit;
        self
    }

    /// Calls `symbol` once and returns its results.
    pub fn run_function(&mut self, symbol: &str, inputs: &[RuntimeValue]) -> Result<Vec<RuntimeValue>, InterpError> {
        let (func, args) = self.prepare(symbol, inputs)?;
        let results = self.call(func, args)?;
        Ok(results.into_iter().map(|v| self.export(v)).collect())
    }

    /// Runs `symbol` once per simulated thread and returns the inputs after mutation.
    pub fn run_kernel(
        &mut self,
        symbol: &str,
        launch: LaunchConfig,
        inputs: &[RuntimeValue],
        order: ThreadOrder,
    ) -> Result<Vec<RuntimeValue>, InterpError> {
        if !launch.is_valid() {
            return Err(InterpError::BadLaunch);
        }
        let (func, args) = self.prepare(symbol, inputs)?;
        let mut coords = Vec::new();
        for bz in 0..launch.grid[2] {
            for by in 0..launch.grid[1] {
                for bx in 0..launch.grid[0] {
                    for tz in 0..launch.block[2] {
                        for ty in 0..launch.block[1] {
                            for tx in 0..launch.block[0] {
                                coords.push(ThreadCoord { block: [bx, by, bz], thread: [tx, ty, tz] });
                            }
                        }
                    }
                }
            }
        }
        if order == ThreadOrder::Reverse {
            coords.reverse();
        }
        for coord in coords {
            self.launch = Some((launch, coord));
            let outcome = self.call(func, args.clone());
            self.launch = None;
            outcome?;
        }
        Ok(args.into_iter().map(|v| self.export(v)).collect())
    }

    fn prepare(&mut self, symbol: &str, inputs: &[RuntimeValue]) -> Result<(OpId, Vec<Val>), InterpError> {
        let func = self
            .module
            .lookup_symbol(symbol)
            .filter(|&op| self.module.op(op).name == "func.func")
            .ok_or_else(|| InterpError::UnknownSymbol(symbol.to_string()))?;
        let inputs_ty = match self.module.op(func).attr("function_type") {
            Some(IrAttribute::Type(IrType::Function { inputs, .. })) => inputs.clone(),
            _ => return Err(malformed("func.func", "missing function_type")),
        };
        if inputs.len() != inputs_ty.len() {
            return Err(InterpError::Arity { symbol: symbol.to_string(), expected: inputs_ty.len(), given: inputs.len() });
        }
        self.slots.clear();
        let mut args = Vec::with_capacity(inputs.len());
        for (i, (v, ty)) in inputs.iter().zip(&inputs_ty).enumerate() {
            if !v.matches_type(ty) {
                return Err(InterpError::ArgumentType {
                    symbol: symbol.to_string(),
                    index: i + 1,
                    expected: ty.to_string(),
                    given: describe(v),
                });
            }
            args.push(self.import(v.clone()));
        }
        Ok((func, args))
    }

    fn import(&mut self, v: RuntimeValue) -> Val {
        match v {
            RuntimeValue::Tensor(b) => Val::Tensor(b),
            RuntimeValue::MemRef(b) => {
                self.slots.push(b);
                Val::MemRef(self.slots.len() - 1)
            }
            s => Val::Scalar(s),
        }
    }

    fn export(&self, v: Val) -> RuntimeValue {
        match v {
            Val::Scalar(s) => s,
            Val::Tensor(b) => RuntimeValue::Tensor(b),
            Val::MemRef(slot) => RuntimeValue::MemRef(self.slots[slot].clone()),
        }
    }

    fn call(&mut self, func: OpId, args: Vec<Val>) -> Result<Vec<Val>, InterpError> {
        let region = *self.module.op(func).regions.first().ok_or_else(|| malformed("func.func", "no body"))?;
        let mut env = HashMap::new();
        self.run_region(region, args, &mut env)
    }

    /// Runs a region from its entry block until a `func.return` or `linalg.yield`.
    fn run_region(
        &mut self,
        region: RegionId,
        args: Vec<Val>,
        env: &mut HashMap<ValueId, Val>,
    ) -> Result<Vec<Val>, InterpError> {
        let m = self.module;
        let mut block = m.region(region).entry().ok_or_else(|| malformed("region", "no blocks"))?;
        let mut args = args;
        loop {
            bind_args(m, block, args, env)?;
            match self.run_block(block, env)? {
                Flow::Branch(next, next_args) => {
                    block = next;
                    args = next_args;
                }
                Flow::Return(values) => return Ok(values),
            }
        }
    }

    fn run_block(&mut self, block: BlockId, env: &mut HashMap<ValueId, Val>) -> Result<Flow, InterpError> {
        let m = self.module;
        for &op in &m.block(block).operations {
            self.steps += 1;
            if self.steps > self.step_limit {
                return Err(InterpError::StepLimit(self.step_limit));
            }
            if let Some(flow) = self.run_op(op, env)? {
                return Ok(flow);
            }
        }
        Err(InterpError::NoTerminator)
    }

    fn run_op(&mut self, op: OpId, env: &mut HashMap<ValueId, Val>) -> Result<Option<Flow>, InterpError> {
        let m = self.module;
        let o = m.op(op);
        let name = o.name.as_str();
        let get = |env: &HashMap<ValueId, Val>, i: usize| -> Result<Val, InterpError> {
            let v = o.operands.get(i).ok_or_else(|| malformed(name, "missing operand"))?;
            env.get(v).cloned().ok_or_else(|| malformed(name, "operand used before definition"))
        };
        let scalar = |env: &HashMap<ValueId, Val>, i: usize| -> Result<RuntimeValue, InterpError> {
            match get(env, i)? {
                Val::Scalar(s) => Ok(s),
                _ => Err(malformed(name, "expected a scalar operand")),
            }
        };
        let result: Option<Val> = match name {
            "arith.constant" => Some(Val::Scalar(match o.attr("value") {
                Some(IrAttribute::Float { value, ty: IrType::Float32 }) => RuntimeValue::F32(*value as f32),
                Some(IrAttribute::Float { value, .. }) => RuntimeValue::F64(*value),
                Some(IrAttribute::Int { value, ty: IrType::Int(w) }) => RuntimeValue::int(*w, *value),
                Some(IrAttribute::Int { value, .. }) => RuntimeValue::Index(*value),
                _ => return Err(malformed(name, "missing value")),
            })),
            "arith.addf" | "arith.subf" | "arith.mulf" | "arith.divf" => {
                let (a, b) = (scalar(env, 0)?, scalar(env, 1)?);
                Some(Val::Scalar(match (a, b) {
                    (RuntimeValue::F32(a), RuntimeValue::F32(b)) => RuntimeValue::F32(float_op(name, a, b)),
                    (RuntimeValue::F64(a), RuntimeValue::F64(b)) => RuntimeValue::F64(float_op(name, a, b)),
                    _ => return Err(malformed(name, "operands are not floats of one type")),
                }))
            }
            "arith.negf" | "math.exp" => Some(Val::Scalar(match scalar(env, 0)? {
                RuntimeValue::F32(x) => RuntimeValue::F32(if name == "math.exp" { x.exp() } else { -x }),
                RuntimeValue::F64(x) => RuntimeValue::F64(if name == "math.exp" { x.exp() } else { -x }),
                _ => return Err(malformed(name, "operand is not a float")),
            })),
            "arith.addi" | "arith.subi" | "arith.muli" => {
                let (a, b) = (scalar(env, 0)?, scalar(env, 1)?);
                let f = match name {
                    "arith.addi" => i64::wrapping_add,
                    "arith.subi" => i64::wrapping_sub,
                    _ => i64::wrapping_mul,
                };
                Some(Val::Scalar(match (a, b) {
                    (RuntimeValue::Int { width, value: a }, RuntimeValue::Int { value: b, .. }) => {
                        RuntimeValue::int(width, f(a, b))
                    }
                    (RuntimeValue::Index(a), RuntimeValue::Index(b)) => RuntimeValue::Index(f(a, b)),
                    _ => return Err(malformed(name, "operands are not integers of one type")),
                }))
            }
            "arith.cmpi" => {
                let (a, b) = (scalar(env, 0)?, scalar(env, 1)?);
                let (a, b) = (signed(&a).ok_or_else(|| malformed(name, "bad lhs"))?, signed(&b).ok_or_else(|| malformed(name, "bad rhs"))?);
                let pred = o.attr("predicate").and_then(|p| p.as_str()).unwrap_or("");
                let r = match pred {
                    "eq" => a == b,
                    "ne" => a != b,
                    "slt" => a < b,
                    "sle" => a <= b,
                    "sgt" => a > b,
                    "sge" => a >= b,
                    other => return Err(malformed(name, &format!("unknown predicate `{other}`"))),
                };
                Some(Val::Scalar(RuntimeValue::bool(r)))
            }
            "arith.index_cast" => {
                let v = scalar(env, 0)?.as_i64().ok_or_else(|| malformed(name, "operand is not an integer"))?;
                let ty = o.results.first().map(|&r| m.value_type(r)).ok_or_else(|| malformed(name, "no result"))?;
                Some(Val::Scalar(match ty {
                    IrType::Int(w) => RuntimeValue::int(*w, v),
                    _ => RuntimeValue::Index(v),
                }))
            }
            "gpu.thread_id" | "gpu.block_id" | "gpu.block_dim" => {
                let (launch, coord) = self.launch.ok_or_else(|| InterpError::MissingLaunch(name.to_string()))?;
                let dim = match o.attr("dimension").and_then(|d| d.as_str()) {
                    Some("x") => 0,
                    Some("y") => 1,
                    Some("z") => 2,
                    _ => return Err(malformed(name, "bad dimension")),
                };
                let v = match name {
                    "gpu.thread_id" => coord.thread[dim],
                    "gpu.block_id" => coord.block[dim],
                    _ => launch.block[dim],
                };
                Some(Val::Scalar(RuntimeValue::Index(v as i64)))
            }
            "memref.load" | "memref.store" => {
                let (value_pos, mem_pos) = if name == "memref.load" { (None, 0) } else { (Some(0), 1) };
                let Val::MemRef(slot) = get(env, mem_pos)? else { return Err(malformed(name, "not a memref")) };
                let mut index = Vec::new();
                for i in mem_pos + 1..o.operands.len() {
                    index.push(scalar(env, i)?.as_i64().ok_or_else(|| malformed(name, "index is not an integer"))?);
                }
                let buf = &self.slots[slot];
                let off = buf.offset(&index).ok_or_else(|| InterpError::OutOfBounds {
                    index: index.clone(),
                    dims: buf.dims.clone(),
                    coord: self.launch.map(|(_, c)| c),
                })?;
                match value_pos {
                    None => Some(Val::Scalar(buf.data[off].clone())),
                    Some(p) => {
                        let v = scalar(env, p)?;
                        self.slots[slot].data[off] = v;
                        None
                    }
                }
            }
            "linalg.generic" => Some(self.run_generic(op, env)?),
            "func.call" => {
                let callee = o.attr("callee").and_then(|c| c.as_str()).unwrap_or("");
                let func = m.lookup_symbol(callee).ok_or_else(|| InterpError::UnknownSymbol(callee.to_string()))?;
                let args = (0..o.operands.len()).map(|i| get(env, i)).collect::<Result<Vec<_>, _>>()?;
                let results = self.call(func, args)?;
                for (&r, v) in o.results.iter().zip(results) {
                    env.insert(r, v);
                }
                return Ok(None);
            }
            "cf.br" | "cf.cond_br" => {
                let taken = if name == "cf.br" {
                    0
                } else {
                    match scalar(env, 0)? {
                        RuntimeValue::Int { value, .. } if value != 0 => 0,
                        RuntimeValue::Int { .. } => 1,
                        _ => return Err(malformed(name, "condition is not an i1")),
                    }
                };
                let s = o.successors.get(taken).ok_or_else(|| malformed(name, "missing successor"))?;
                let args = s
                    .args
                    .iter()
                    .map(|v| env.get(v).cloned().ok_or_else(|| malformed(name, "undefined branch argument")))
                    .collect::<Result<Vec<_>, _>>()?;
                return Ok(Some(Flow::Branch(s.block, args)));
            }
            "func.return" | "linalg.yield" => {
                let values = (0..o.operands.len()).map(|i| get(env, i)).collect::<Result<Vec<_>, _>>()?;
                return Ok(Some(Flow::Return(values)));
            }
            other => return Err(InterpError::UnsupportedOp(other.to_string())),
        };
        if let (Some(v), Some(&r)) = (result, o.results.first()) {
            env.insert(r, v);
        }
        Ok(None)
    }

    /// Executes the full loop nest of a `linalg.generic` in lexicographic axis order.
    fn run_generic(&mut self, op: OpId, env: &mut HashMap<ValueId, Val>) -> Result<Val, InterpError> {
        let m = self.module;
        let o = m.op(op);
        let name = "linalg.generic";
        let maps: Vec<&crate::ir::IndexMap> = match o.attr("indexing_maps") {
            Some(IrAttribute::Array(items)) => items
                .iter()
                .map(|a| match a {
                    IrAttribute::IndexMap(map) => Ok(map),
                    _ => Err(malformed(name, "indexing_maps holds a non-map")),
                })
                .collect::<Result<_, _>>()?,
            _ => return Err(malformed(name, "missing indexing_maps")),
        };
        if maps.len() != o.operands.len() || maps.is_empty() {
            return Err(malformed(name, "one indexing map per operand is required"));
        }
        let mut buffers = Vec::with_capacity(o.operands.len());
        for v in &o.operands {
            match env.get(v) {
                Some(Val::Tensor(b)) => buffers.push(b.clone()),
                Some(Val::MemRef(slot)) => buffers.push(self.slots[*slot].clone()),
                _ => return Err(malformed(name, "operands must be shaped values")),
            }
        }
        let num_axes = maps[0].num_axes;
        let mut extents: Vec<Option<usize>> = vec![None; num_axes];
        for (map, buf) in maps.iter().zip(&buffers) {
            if map.num_axes != num_axes || map.positions.len() != buf.dims.len() {
                return Err(malformed(name, "indexing map does not fit its operand"));
            }
            for (&axis, &dim) in map.positions.iter().zip(&buf.dims) {
                match extents.get(axis).copied().flatten() {
                    Some(e) if e != dim => {
                        return Err(InterpError::InconsistentExtents { axis, first: e, second: dim })
                    }
                    _ if axis >= num_axes => return Err(malformed(name, "map position out of range")),
                    _ => extents[axis] = Some(dim),
                }
            }
        }
        let extents: Vec<usize> = extents
            .iter()
            .enumerate()
            .map(|(i, e)| e.ok_or(InterpError::UnboundAxis(i)))
            .collect::<Result<_, _>>()?;
        let region = *o.regions.first().ok_or_else(|| malformed(name, "no body region"))?;
        let (inputs, output) = buffers.split_at(buffers.len() - 1);
        let mut out = output[0].clone();
        let out_map = maps[maps.len() - 1];

        if extents.contains(&0) {
            return Ok(Val::Tensor(out));
        }
        let mut point = vec![0usize; num_axes];
        loop {
            let at = |map: &crate::ir::IndexMap| -> Vec<i64> { map.positions.iter().map(|&a| point[a] as i64).collect() };
            let mut args = Vec::with_capacity(buffers.len());
            for (buf, map) in inputs.iter().zip(&maps) {
                let off = buf.offset(&at(map)).ok_or_else(|| malformed(name, "input index out of range"))?;
                args.push(Val::Scalar(buf.data[off].clone()));
            }
            let out_off = out.offset(&at(out_map)).ok_or_else(|| malformed(name, "output index out of range"))?;
            args.push(Val::Scalar(out.data[out_off].clone()));
            let yielded = self.run_region(region, args, env)?;
            match yielded.as_slice() {
                [Val::Scalar(v)] => out.data[out_off] = v.clone(),
                _ => return Err(malformed(name, "body must yield one scalar")),
            }

            // Advance the odometer, last axis fastest.
            let mut axis = num_axes;
            loop {
                if axis == 0 {
                    return Ok(Val::Tensor(out));
                }
                axis -= 1;
                point[axis] += 1;
                if point[axis] < extents[axis] {
                    break;
                }
                point[axis] = 0;
            }
        }
    }
}

enum Flow {
    Branch(BlockId, Vec<Val>),
    Return(Vec<Val>),
}

fn bind_args(m: &IrModule, block: BlockId, args: Vec<Val>, env: &mut HashMap<ValueId, Val>) -> Result<(), InterpError> {
    let params = &m.block(block).arguments;
    if params.len() != args.len() {
        return Err(malformed("block", "argument count mismatch"));
    }
    for (&p, v) in params.iter().zip(args) {
        env.insert(p, v);
    }
    Ok(())
}

fn float_op<T: std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<Output = T> + std::ops::Div<Output = T>>(
    name: &str,
    a: T,
    b: T,
) -> T {
    match name {
        "arith.addf" => a + b,
        "arith.subf" => a - b,
        "arith.mulf" => a * b,
        _ => a / b,
    }
}

fn signed(v: &RuntimeValue) -> Option<i64> {
    match v {
        // i1 values compare as signed: `true` is -1.
        RuntimeValue::Int { width: 1, value } => Some(-*value),
        RuntimeValue::Int { width, value } => Some(wrap(*width, *value)),
        RuntimeValue::Index(v) => Some(*v),
        _ => None,
    }
}

fn malformed(op: &str, message: &str) -> InterpError {
    InterpError::Malformed { op: op.to_string(), message: message.to_string() }
}

fn describe(v: &RuntimeValue) -> String {
    match v {
        RuntimeValue::F32(_) => "f32".into(),
        RuntimeValue::F64(_) => "f64".into(),
        RuntimeValue::Int { width, .. } => format!("i{width}"),
        RuntimeValue::Index(_) => "index".into(),
        RuntimeValue::Tensor(b) => format!("tensor of {} with dims {:?}", b.elem, b.dims),
        RuntimeValue::MemRef(b) => format!("memref of {} with dims {:?}", b.elem, b.dims),
    }
}

/// Calls `symbol` in `module` with the default step limit.
pub fn run_function(module: &IrModule, symbol: &str, inputs: &[RuntimeValue]) -> Result<Vec<RuntimeValue>, InterpError> {
    Interpreter::new(module).run_function(symbol, inputs)
}

/// Runs kernel `symbol` over `launch` in forward thread order with the default step limit.
pub fn run_kernel(
    module: &IrModule,
    symbol: &str,
    launch: LaunchConfig,
    inputs: &[RuntimeValue],
) -> Result<Vec<RuntimeValue>, InterpError> {
    Interpreter::new(module).run_kernel(symbol, launch, inputs, ThreadOrder::Forward)
}
