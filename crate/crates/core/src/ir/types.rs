//! IR types, attributes and affine-style indexing maps.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Extent of one dimension of a shaped type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dim {
    Static(u64),
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IrType {
    Float32,
    Float64,
    /// Signless integer of the given bit width.
    Int(u32),
    Index,
    RankedTensor { elem: Box<IrType>, dims: Vec<Dim> },
    MemRef { elem: Box<IrType>, dims: Vec<Dim> },
    Function { inputs: Vec<IrType>, results: Vec<IrType> },
}

pub const INT_WIDTHS: [u32; 5] = [1, 8, 16, 32, 64];

impl IrType {
    pub fn i1() -> Self {
        IrType::Int(1)
    }

    pub fn i64() -> Self {
        IrType::Int(64)
    }

    /// Tensor of the given rank with every dimension dynamic.
    pub fn dyn_tensor(elem: IrType, rank: usize) -> Self {
        IrType::RankedTensor { elem: Box::new(elem), dims: vec![Dim::Dynamic; rank] }
    }

    pub fn dyn_memref(elem: IrType, rank: usize) -> Self {
        IrType::MemRef { elem: Box::new(elem), dims: vec![Dim::Dynamic; rank] }
    }

    pub fn is_float(&self) -> bool {
        matches!(self, IrType::Float32 | IrType::Float64)
    }

    /// Integer types and `index`.
    pub fn is_integer_like(&self) -> bool {
        matches!(self, IrType::Int(_) | IrType::Index)
    }

    pub fn is_scalar(&self) -> bool {
        self.is_float() || self.is_integer_like()
    }

    pub fn is_tensor(&self) -> bool {
        matches!(self, IrType::RankedTensor { .. })
    }

    pub fn is_memref(&self) -> bool {
        matches!(self, IrType::MemRef { .. })
    }

    /// Element type of a tensor or memref.
    pub fn element_type(&self) -> Option<&IrType> {
        match self {
            IrType::RankedTensor { elem, .. } | IrType::MemRef { elem, .. } => Some(elem),
            _ => None,
        }
    }

    pub fn rank(&self) -> Option<usize> {
        match self {
            IrType::RankedTensor { dims, .. } | IrType::MemRef { dims, .. } => Some(dims.len()),
            _ => None,
        }
    }

    /// Checks the structural invariants (legal integer widths, recursively).
    pub fn is_well_formed(&self) -> bool {
        match self {
            IrType::Int(w) => INT_WIDTHS.contains(w),
            IrType::RankedTensor { elem, .. } | IrType::MemRef { elem, .. } => {
                elem.is_scalar() && elem.is_well_formed()
            }
            IrType::Function { inputs, results } => {
                inputs.iter().chain(results).all(IrType::is_well_formed)
            }
            _ => true,
        }
    }
}

fn write_shape(f: &mut fmt::Formatter<'_>, dims: &[Dim], elem: &IrType) -> fmt::Result {
    for d in dims {
        match d {
            Dim::Static(n) => write!(f, "{n}x")?,
            Dim::Dynamic => write!(f, "?x")?,
        }
    }
    write!(f, "{elem}")
}

impl fmt::Display for IrType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrType::Float32 => write!(f, "f32"),
            IrType::Float64 => write!(f, "f64"),
            IrType::Int(w) => write!(f, "i{w}"),
            IrType::Index => write!(f, "index"),
            IrType::RankedTensor { elem, dims } => {
                write!(f, "tensor<")?;
                write_shape(f, dims, elem)?;
                write!(f, ">")
            }
            IrType::MemRef { elem, dims } => {
                write!(f, "memref<")?;
                write_shape(f, dims, elem)?;
                write!(f, ">")
            }
            IrType::Function { inputs, results } => {
                write!(f, "(")?;
                write_type_list(f, inputs)?;
                write!(f, ") -> ")?;
                if results.len() == 1 && !matches!(results[0], IrType::Function { .. }) {
                    write!(f, "{}", results[0])
                } else {
                    write!(f, "(")?;
                    write_type_list(f, results)?;
                    write!(f, ")")
                }
            }
        }
    }
}

pub(crate) fn write_type_list(f: &mut impl fmt::Write, types: &[IrType]) -> fmt::Result {
    for (i, t) in types.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}

/// Maps iteration-space axes onto the dimensions of one operand.
///
/// Operand dimension `d` is read from axis `positions[d]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexMap {
    pub num_axes: usize,
    pub positions: Vec<usize>,
}

impl IndexMap {
    pub fn new(num_axes: usize, positions: Vec<usize>) -> Self {
        IndexMap { num_axes, positions }
    }

    pub fn is_well_formed(&self) -> bool {
        self.positions.iter().all(|&p| p < self.num_axes)
    }
}

impl fmt::Display for IndexMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "affine_map<(")?;
        for i in 0..self.num_axes {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "d{i}")?;
        }
        write!(f, ") -> (")?;
        for (i, p) in self.positions.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "d{p}")?;
        }
        write!(f, ")>")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IrAttribute {
    Float { value: f64, ty: IrType },
    Int { value: i64, ty: IrType },
    String(String),
    Array(Vec<IrAttribute>),
    IndexMap(IndexMap),
    Symbol(String),
    Type(IrType),
}

impl IrAttribute {
    pub fn float(value: f64, ty: IrType) -> Self {
        IrAttribute::Float { value, ty }
    }

    pub fn int(value: i64, ty: IrType) -> Self {
        IrAttribute::Int { value, ty }
    }

    pub fn string(s: impl Into<String>) -> Self {
        IrAttribute::String(s.into())
    }

    /// Type carried by a typed (numeric or type) attribute.
    pub fn typed_value_type(&self) -> Option<&IrType> {
        match self {
            IrAttribute::Float { ty, .. } | IrAttribute::Int { ty, .. } => Some(ty),
            IrAttribute::Type(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            IrAttribute::String(s) | IrAttribute::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_well_formed(&self) -> bool {
        match self {
            IrAttribute::Float { ty, .. } => ty.is_float(),
            IrAttribute::Int { ty, .. } => ty.is_integer_like(),
            IrAttribute::Array(items) => items.iter().all(IrAttribute::is_well_formed),
            IrAttribute::IndexMap(m) => m.is_well_formed(),
            IrAttribute::Type(t) => t.is_well_formed(),
            IrAttribute::String(_) | IrAttribute::Symbol(_) => true,
        }
    }
}

/// Shortest decimal that round-trips, always carrying a fractional part.
pub fn format_float(value: f64, ty: &IrType) -> String {
    if value.is_nan() {
        return "0x7FC00000".to_string();
    }
    if value.is_infinite() {
        return if value > 0.0 { "0x7F800000" } else { "0xFF800000" }.to_string();
    }
    let mut s = if *ty == IrType::Float32 {
        format!("{}", value as f32)
    } else {
        format!("{value}")
    };
    if !s.contains('.') {
        s.push_str(".0");
    }
    s
}

impl fmt::Display for IrAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrAttribute::Float { value, ty } => write!(f, "{} : {ty}", format_float(*value, ty)),
            IrAttribute::Int { value, ty } => {
                if *ty == IrType::Int(1) {
                    write!(f, "{}", *value != 0)
                } else {
                    write!(f, "{value} : {ty}")
                }
            }
            IrAttribute::String(s) => write!(f, "{s:?}"),
            IrAttribute::Array(items) => {
                write!(f, "[")?;
                for (i, a) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "]")
            }
            IrAttribute::IndexMap(m) => write!(f, "{m}"),
            IrAttribute::Symbol(s) => write!(f, "@{s}"),
            IrAttribute::Type(t) => write!(f, "{t}"),
        }
    }
}
