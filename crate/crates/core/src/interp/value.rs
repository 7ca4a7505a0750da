use std::fmt;

use thiserror::Error;

use crate::ir::IrType;

/// A runtime value: a scalar, an immutable tensor or a mutable memref buffer.
#[derive(Debug, Clone, PartialEq)]
pub enum RuntimeValue {
    F32(f32),
    F64(f64),
    /// Two's complement value of the given width, kept sign-extended.
    Int { width: u32, value: i64 },
    Index(i64),
    Tensor(Buffer),
    MemRef(Buffer),
}

/// Row-major shaped data whose elements are scalar runtime values.
#[derive(Debug, Clone, PartialEq)]
pub struct Buffer {
    pub elem: IrType,
    pub dims: Vec<usize>,
    pub data: Vec<RuntimeValue>,
}

impl Buffer {
    pub fn new(elem: IrType, dims: Vec<usize>, data: Vec<RuntimeValue>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        Buffer { elem, dims, data }
    }

    pub fn zeros(elem: IrType, dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        let zero = RuntimeValue::zero(&elem);
        Buffer { elem, dims, data: vec![zero; n] }
    }

    /// Row-major offset of `index`, or `None` when out of bounds.
    pub fn offset(&self, index: &[i64]) -> Option<usize> {
        if index.len() != self.dims.len() {
            return None;
        }
        let mut off = 0usize;
        for (&i, &d) in index.iter().zip(&self.dims) {
            if i < 0 || i as usize >= d {
                return None;
            }
            off = off * d + i as usize;
        }
        Some(off)
    }
}

impl RuntimeValue {
    pub fn int(width: u32, value: i64) -> Self {
        RuntimeValue::Int { width, value: wrap(width, value) }
    }

    pub fn bool(b: bool) -> Self {
        RuntimeValue::Int { width: 1, value: b as i64 }
    }

    pub fn zero(ty: &IrType) -> Self {
        match ty {
            IrType::Float32 => RuntimeValue::F32(0.0),
            IrType::Float64 => RuntimeValue::F64(0.0),
            IrType::Int(w) => RuntimeValue::Int { width: *w, value: 0 },
            _ => RuntimeValue::Index(0),
        }
    }

    /// Whether this value can stand for an IR value of type `ty`.
    pub fn matches_type(&self, ty: &IrType) -> bool {
        match (self, ty) {
            (RuntimeValue::F32(_), IrType::Float32) | (RuntimeValue::F64(_), IrType::Float64) => true,
            (RuntimeValue::Int { width, .. }, IrType::Int(w)) => width == w,
            (RuntimeValue::Index(_), IrType::Index) => true,
            (RuntimeValue::Tensor(b), IrType::RankedTensor { elem, dims })
            | (RuntimeValue::MemRef(b), IrType::MemRef { elem, dims }) => {
                **elem == b.elem
                    && dims.len() == b.dims.len()
                    && dims.iter().zip(&b.dims).all(|(d, &n)| match d {
                        crate::ir::Dim::Static(s) => *s as usize == n,
                        crate::ir::Dim::Dynamic => true,
                    })
            }
            _ => false,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            RuntimeValue::F32(x) => Some(*x as f64),
            RuntimeValue::F64(x) => Some(*x),
            RuntimeValue::Int { value, .. } | RuntimeValue::Index(value) => Some(*value as f64),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            RuntimeValue::Int { value, .. } | RuntimeValue::Index(value) => Some(*value),
            _ => None,
        }
    }

    pub fn buffer(&self) -> Option<&Buffer> {
        match self {
            RuntimeValue::Tensor(b) | RuntimeValue::MemRef(b) => Some(b),
            _ => None,
        }
    }
}

/// Reduces `value` modulo 2^width and sign-extends it.
pub fn wrap(width: u32, value: i64) -> i64 {
    if width >= 64 || width == 0 {
        return value;
    }
    if width == 1 {
        return value & 1;
    }
    let shift = 64 - width;
    (value << shift) >> shift
}

impl fmt::Display for RuntimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuntimeValue::F32(x) => write!(f, "{x}"),
            RuntimeValue::F64(x) => write!(f, "{x}"),
            RuntimeValue::Int { width: 1, value } => write!(f, "{}", *value != 0),
            RuntimeValue::Int { value, .. } | RuntimeValue::Index(value) => write!(f, "{value}"),
            RuntimeValue::Tensor(b) | RuntimeValue::MemRef(b) => write_nested(f, &b.dims, &b.data),
        }
    }
}

fn write_nested(f: &mut fmt::Formatter<'_>, dims: &[usize], data: &[RuntimeValue]) -> fmt::Result {
    write!(f, "[")?;
    match dims {
        [] => write!(f, "{}", data.first().map(|v| v.to_string()).unwrap_or_default())?,
        [_] => {
            for (i, v) in data.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
        }
        [n, rest @ ..] => {
            let stride: usize = rest.iter().product();
            for i in 0..*n {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_nested(f, rest, &data[i * stride..(i + 1) * stride])?;
            }
        }
    }
    write!(f, "]")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad input `{text}`: {message}")]
pub struct InputError {
    pub text: String,
    pub message: String,
}

/// Parses a command-line input literal as a value of type `expected`.
///
/// Scalars: `2.0`, `-3`, `true`. Arrays: `[1,2,3]`, nested `[[1,2],[3,4]]`, ranges `[1..8]`
/// and `[10,20..80]`, repetition `[0x8]`; an optional `:f32` suffix names the element type.
pub fn parse_input(text: &str, expected: &IrType) -> Result<RuntimeValue, InputError> {
    let err = |message: String| InputError { text: text.to_string(), message };
    let (body, suffix) = match text.rfind(':') {
        Some(i) if text[i..].chars().skip(1).all(|c| c.is_ascii_alphanumeric()) => (&text[..i], Some(&text[i + 1..])),
        _ => (text, None),
    };
    let body = body.trim();
    let elem = expected.element_type().unwrap_or(expected).clone();
    if let Some(s) = suffix {
        if s != elem.to_string() {
            return Err(err(format!("element type `{s}` does not match the parameter type {expected}")));
        }
    }
    let make = |x: f64| scalar(x, &elem).map_err(&err);
    match expected {
        IrType::RankedTensor { dims, .. } | IrType::MemRef { dims, .. } => {
            let (shape, values) = parse_array(body).map_err(err)?;
            if shape.len() != dims.len() {
                return Err(err(format!("rank {} does not match the parameter type {expected}", shape.len())));
            }
            let data = values.into_iter().map(make).collect::<Result<Vec<_>, _>>()?;
            let buffer = Buffer::new(elem.clone(), shape, data);
            let v = if expected.is_tensor() { RuntimeValue::Tensor(buffer) } else { RuntimeValue::MemRef(buffer) };
            if !v.matches_type(expected) {
                return Err(err(format!("shape does not match the parameter type {expected}")));
            }
            Ok(v)
        }
        _ => {
            let x = match body {
                "true" => 1.0,
                "false" => 0.0,
                _ => body.parse::<f64>().map_err(|_| err("expected a number".into()))?,
            };
            make(x)
        }
    }
}

fn scalar(x: f64, ty: &IrType) -> Result<RuntimeValue, String> {
    let integral = || {
        if x.fract() == 0.0 && x.abs() < 9.3e18 {
            Ok(x as i64)
        } else {
            Err(format!("{x} is not an integer"))
        }
    };
    Ok(match ty {
        IrType::Float32 => RuntimeValue::F32(x as f32),
        IrType::Float64 => RuntimeValue::F64(x),
        IrType::Int(w) => RuntimeValue::int(*w, integral()?),
        IrType::Index => RuntimeValue::Index(integral()?),
        other => return Err(format!("cannot build a value of type {other}")),
    })
}

/// Shape and row-major values of a bracketed literal.
fn parse_array(text: &str) -> Result<(Vec<usize>, Vec<f64>), String> {
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| "expected `[...]`".to_string())?
        .trim();
    if inner.starts_with('[') {
        let mut rows = Vec::new();
        for part in crate::fir::split_top_level(inner) {
            rows.push(parse_array(part.trim())?);
        }
        let first = rows.first().map(|r| r.0.clone()).unwrap_or_default();
        if rows.iter().any(|r| r.0 != first) {
            return Err("ragged nested array".into());
        }
        let mut shape = vec![rows.len()];
        shape.extend(first);
        return Ok((shape, rows.into_iter().flat_map(|r| r.1).collect()));
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", s.trim()));
    let values = if inner.is_empty() {
        Vec::new()
    } else if let Some((lhs, hi)) = inner.split_once("..") {
        let hi = num(hi)?;
        let (lo, step) = match lhs.split_once(',') {
            Some((a, b)) => {
                let a = num(a)?;
                (a, num(b)? - a)
            }
            None => (num(lhs)?, 1.0),
        };
        if step <= 0.0 {
            return Err("range step must be positive".into());
        }
        let count = ((hi - lo) / step).floor() as i64 + 1;
        (0..count.max(0)).map(|k| lo + step * k as f64).collect()
    } else if let Some((v, n)) = inner.split_once(['x', '×']).filter(|_| !inner.contains(',')) {
        let n: usize = n.trim().parse().map_err(|_| format!("`{}` is not a count", n.trim()))?;
        vec![num(v)?; n]
    } else {
        inner.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    Ok((vec![values.len()], values))
}
