//! Declarative op definitions and the constraint checks shared by builders and the verifier.

use std::collections::BTreeMap;
use std::fmt;

use crate::ir::{IrAttribute, IrType};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeConstraint {
    Exact(IrType),
    AnyFloat,
    /// Any signless integer or `index`.
    AnyInteger,
    AnyTensor,
    AnyMemRef,
    Any,
    /// Same type as operand `k`.
    SameAs(usize),
    /// Element type of the shaped operand `k`.
    ElementOf(usize),
    /// Type carried by the named typed attribute (results only).
    AttrType(String),
}

impl TypeConstraint {
    /// Checks the parts of the constraint that do not depend on other operands.
    pub fn admits_standalone(&self, ty: &IrType) -> bool {
        match self {
            TypeConstraint::Exact(t) => t == ty,
            TypeConstraint::AnyFloat => ty.is_float(),
            TypeConstraint::AnyInteger => ty.is_integer_like(),
            TypeConstraint::AnyTensor => ty.is_tensor(),
            TypeConstraint::AnyMemRef => ty.is_memref(),
            TypeConstraint::Any
            | TypeConstraint::SameAs(_)
            | TypeConstraint::ElementOf(_)
            | TypeConstraint::AttrType(_) => true,
        }
    }
}

impl fmt::Display for TypeConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeConstraint::Exact(t) => write!(f, "{t}"),
            TypeConstraint::AnyFloat => write!(f, "AnyFloat"),
            TypeConstraint::AnyInteger => write!(f, "AnyInteger"),
            TypeConstraint::AnyTensor => write!(f, "AnyTensor"),
            TypeConstraint::AnyMemRef => write!(f, "AnyMemRef"),
            TypeConstraint::Any => write!(f, "Any"),
            TypeConstraint::SameAs(k) => write!(f, "same({k})"),
            TypeConstraint::ElementOf(k) => write!(f, "elem({k})"),
            TypeConstraint::AttrType(a) => write!(f, "attrtype({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueSpec {
    pub name: String,
    pub constraint: TypeConstraint,
    pub variadic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttrKind {
    Float,
    Int,
    /// Float or integer.
    Number,
    String,
    Array,
    IndexMap,
    Symbol,
    Type,
    /// String attribute restricted to a closed set of cases.
    Enum(Vec<String>),
}

impl AttrKind {
    pub fn admits(&self, attr: &IrAttribute) -> bool {
        match (self, attr) {
            (AttrKind::Float, IrAttribute::Float { .. })
            | (AttrKind::Int, IrAttribute::Int { .. })
            | (AttrKind::Number, IrAttribute::Float { .. } | IrAttribute::Int { .. })
            | (AttrKind::String, IrAttribute::String(_))
            | (AttrKind::Array, IrAttribute::Array(_))
            | (AttrKind::IndexMap, IrAttribute::IndexMap(_))
            | (AttrKind::Symbol, IrAttribute::Symbol(_) | IrAttribute::String(_))
            | (AttrKind::Type, IrAttribute::Type(_)) => true,
            (AttrKind::Enum(cases), IrAttribute::String(s)) => cases.iter().any(|c| c == s),
            _ => false,
        }
    }
}

impl fmt::Display for AttrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrKind::Float => write!(f, "float"),
            AttrKind::Int => write!(f, "int"),
            AttrKind::Number => write!(f, "number"),
            AttrKind::String => write!(f, "string"),
            AttrKind::Array => write!(f, "array"),
            AttrKind::IndexMap => write!(f, "index_map"),
            AttrKind::Symbol => write!(f, "symbol"),
            AttrKind::Type => write!(f, "type"),
            AttrKind::Enum(cases) => write!(f, "enum({})", cases.join("|")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrSpec {
    pub name: String,
    pub kind: AttrKind,
    pub required: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuccessorCount {
    Fixed(usize),
    Variadic,
}

impl SuccessorCount {
    pub fn admits(self, n: usize) -> bool {
        match self {
            SuccessorCount::Fixed(k) => k == n,
            SuccessorCount::Variadic => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpDefinition {
    /// Short name, without the dialect prefix.
    pub name: String,
    pub doc: String,
    pub operands: Vec<ValueSpec>,
    pub results: Vec<ValueSpec>,
    pub attributes: Vec<AttrSpec>,
    pub regions: usize,
    pub terminator: bool,
    pub successors: SuccessorCount,
}

impl OpDefinition {
    pub fn new(name: impl Into<String>) -> Self {
        OpDefinition {
            name: name.into(),
            doc: String::new(),
            operands: Vec::new(),
            results: Vec::new(),
            attributes: Vec::new(),
            regions: 0,
            terminator: false,
            successors: SuccessorCount::Fixed(0),
        }
    }

    pub fn attribute(&self, name: &str) -> Option<&AttrSpec> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

/// Which check an op failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    Arity,
    Type,
    MissingAttribute,
    AttributeKind,
    RegionCount,
    SuccessorCount,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

fn violation(kind: ViolationKind, message: String) -> Violation {
    Violation { kind, message }
}

/// Spec governing position `i` in a value list, honoring a trailing variadic spec.
fn spec_for(specs: &[ValueSpec], i: usize) -> Option<&ValueSpec> {
    match specs.last() {
        Some(last) if last.variadic && i + 1 >= specs.len() => Some(last),
        _ => specs.get(i),
    }
}

fn arity_ok(specs: &[ValueSpec], n: usize) -> bool {
    match specs.last() {
        Some(last) if last.variadic => n + 1 >= specs.len(),
        _ => n == specs.len(),
    }
}

fn arity_text(specs: &[ValueSpec]) -> String {
    match specs.last() {
        Some(last) if last.variadic => format!("at least {}", specs.len() - 1),
        _ => specs.len().to_string(),
    }
}

impl OpDefinition {
    fn attr_type<'a>(&self, attributes: &'a BTreeMap<String, IrAttribute>, name: &str) -> Option<&'a IrType> {
        attributes.get(name).and_then(IrAttribute::typed_value_type)
    }

    /// Result type implied by a constraint, when it is fully determined.
    fn implied_type(
        &self,
        constraint: &TypeConstraint,
        operands: &[IrType],
        attributes: &BTreeMap<String, IrAttribute>,
    ) -> Option<IrType> {
        match constraint {
            TypeConstraint::Exact(t) => Some(t.clone()),
            TypeConstraint::SameAs(k) => operands.get(*k).cloned(),
            TypeConstraint::ElementOf(k) => operands.get(*k).and_then(|t| t.element_type()).cloned(),
            TypeConstraint::AttrType(a) => self.attr_type(attributes, a).cloned(),
            _ => None,
        }
    }

    /// Infers result types from the constraints. `None` if some result is not determined.
    pub fn infer_result_types(
        &self,
        operands: &[IrType],
        attributes: &BTreeMap<String, IrAttribute>,
    ) -> Option<Vec<IrType>> {
        self.results
            .iter()
            .filter(|r| !r.variadic)
            .map(|r| self.implied_type(&r.constraint, operands, attributes))
            .collect()
    }

    fn check_value(
        &self,
        role: &str,
        index: usize,
        spec: &ValueSpec,
        ty: &IrType,
        operands: &[IrType],
        attributes: &BTreeMap<String, IrAttribute>,
    ) -> Option<Violation> {
        let ok = spec.constraint.admits_standalone(ty)
            && match &spec.constraint {
                TypeConstraint::SameAs(_)
                | TypeConstraint::ElementOf(_)
                | TypeConstraint::AttrType(_) => {
                    match self.implied_type(&spec.constraint, operands, attributes) {
                        Some(expected) => &expected == ty,
                        None => false,
                    }
                }
                _ => true,
            };
        if ok {
            None
        } else {
            Some(violation(
                ViolationKind::Type,
                format!(
                    "{role} #{index} `{}` of `{}` has type {ty}, which does not satisfy {}",
                    spec.name, self.name, spec.constraint
                ),
            ))
        }
    }

    /// Checks a fully formed op against this definition; reports every violation.
    pub fn check(
        &self,
        operands: &[IrType],
        results: &[IrType],
        attributes: &BTreeMap<String, IrAttribute>,
        regions: usize,
        successors: usize,
    ) -> Vec<Violation> {
        let mut out = Vec::new();
        if !arity_ok(&self.operands, operands.len()) {
            out.push(violation(
                ViolationKind::Arity,
                format!(
                    "`{}` expects {} operands, got {}",
                    self.name,
                    arity_text(&self.operands),
                    operands.len()
                ),
            ));
        } else {
            for (i, ty) in operands.iter().enumerate() {
                let spec = spec_for(&self.operands, i).expect("arity checked");
                out.extend(self.check_value("operand", i, spec, ty, operands, attributes));
            }
        }
        if !arity_ok(&self.results, results.len()) {
            out.push(violation(
                ViolationKind::Arity,
                format!(
                    "`{}` produces {} results, got {}",
                    self.name,
                    arity_text(&self.results),
                    results.len()
                ),
            ));
        } else if arity_ok(&self.operands, operands.len()) {
            for (i, ty) in results.iter().enumerate() {
                let spec = spec_for(&self.results, i).expect("arity checked");
                out.extend(self.check_value("result", i, spec, ty, operands, attributes));
            }
        }
        for spec in &self.attributes {
            match attributes.get(&spec.name) {
                None if spec.required => out.push(violation(
                    ViolationKind::MissingAttribute,
                    format!("`{}` requires attribute `{}`", self.name, spec.name),
                )),
                Some(a) if !spec.kind.admits(a) => out.push(violation(
                    ViolationKind::AttributeKind,
                    format!("attribute `{}` of `{}` must be {}, got {a}", spec.name, self.name, spec.kind),
                )),
                _ => {}
            }
        }
        if regions != self.regions {
            out.push(violation(
                ViolationKind::RegionCount,
                format!("`{}` expects {} regions, got {regions}", self.name, self.regions),
            ));
        }
        if !self.successors.admits(successors) {
            out.push(violation(
                ViolationKind::SuccessorCount,
                format!("`{}` expects {:?} successors, got {successors}", self.name, self.successors),
            ));
        }
        out
    }
}

/// A named collection of op definitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialectDefinition {
    pub name: String,
    pub ops: BTreeMap<String, OpDefinition>,
}

impl DialectDefinition {
    pub fn new(name: impl Into<String>) -> Self {
        DialectDefinition { name: name.into(), ops: BTreeMap::new() }
    }

    pub fn op(&self, short_name: &str) -> Option<&OpDefinition> {
        self.ops.get(short_name)
    }
}
