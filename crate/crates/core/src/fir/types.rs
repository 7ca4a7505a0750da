//! Frontend type lattice used for dispatch and for mapping onto IR types.

use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeParam {
    Type(FrontendType),
    Int(i64),
}

impl fmt::Display for TypeParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeParam::Type(t) => write!(f, "{t}"),
            TypeParam::Int(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConcreteType {
    pub name: String,
    pub params: Vec<TypeParam>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrontendType {
    Concrete(ConcreteType),
    Abstract(String),
    Any,
}

impl FrontendType {
    pub fn concrete(name: impl Into<String>) -> Self {
        FrontendType::Concrete(ConcreteType { name: name.into(), params: Vec::new() })
    }

    pub fn parametric(name: impl Into<String>, params: Vec<TypeParam>) -> Self {
        FrontendType::Concrete(ConcreteType { name: name.into(), params })
    }

    pub fn abstract_(name: impl Into<String>) -> Self {
        FrontendType::Abstract(name.into())
    }

    pub fn f32() -> Self {
        Self::concrete("f32")
    }

    pub fn f64() -> Self {
        Self::concrete("f64")
    }

    pub fn i64() -> Self {
        Self::concrete("i64")
    }

    pub fn i1() -> Self {
        Self::concrete("i1")
    }

    pub fn index() -> Self {
        Self::concrete("index")
    }

    pub fn bool() -> Self {
        Self::concrete("Bool")
    }

    pub fn nothing() -> Self {
        Self::concrete("Nothing")
    }

    pub fn tensor(elem: FrontendType, rank: i64) -> Self {
        Self::parametric("tensor", vec![TypeParam::Type(elem), TypeParam::Int(rank)])
    }

    pub fn memref(elem: FrontendType, rank: i64) -> Self {
        Self::parametric("memref", vec![TypeParam::Type(elem), TypeParam::Int(rank)])
    }

    pub fn complex(elem: FrontendType) -> Self {
        Self::parametric("Complex", vec![TypeParam::Type(elem)])
    }

    pub fn is_concrete(&self) -> bool {
        matches!(self, FrontendType::Concrete(_))
    }

    pub fn as_concrete(&self) -> Option<&ConcreteType> {
        match self {
            FrontendType::Concrete(c) => Some(c),
            _ => None,
        }
    }

    /// Name without parameters (`Any` for the top type).
    pub fn head(&self) -> &str {
        match self {
            FrontendType::Concrete(c) => &c.name,
            FrontendType::Abstract(n) => n,
            FrontendType::Any => "Any",
        }
    }
}

impl fmt::Display for FrontendType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrontendType::Concrete(c) => {
                write!(f, "{}", c.name)?;
                if !c.params.is_empty() {
                    write!(f, "{{")?;
                    for (i, p) in c.params.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{p}")?;
                    }
                    write!(f, "}}")?;
                }
                Ok(())
            }
            FrontendType::Abstract(n) => write!(f, "{n}"),
            FrontendType::Any => write!(f, "Any"),
        }
    }
}

/// Declared abstract types and the parent of every concrete type head.
///
/// `Any` is the top element; concrete types have no subtypes besides themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeLattice {
    abstract_parents: HashMap<String, Option<String>>,
    concrete_parents: HashMap<String, String>,
}

impl Default for TypeLattice {
    fn default() -> Self {
        let mut l = TypeLattice::empty();
        l.declare_abstract("Number", None);
        l.declare_abstract("Real", Some("Number"));
        l.declare_abstract("AbstractFloat", Some("Real"));
        l.declare_abstract("Integer", Some("Real"));
        for f in ["f32", "f64"] {
            l.declare_concrete(f, "AbstractFloat");
        }
        for i in ["i1", "i8", "i16", "i32", "i64", "index", "Bool"] {
            l.declare_concrete(i, "Integer");
        }
        l.declare_concrete("Complex", "Number");
        l
    }
}

impl TypeLattice {
    /// A lattice containing only `Any`.
    pub fn empty() -> Self {
        TypeLattice { abstract_parents: HashMap::new(), concrete_parents: HashMap::new() }
    }

    /// Declares an abstract type; `None` parent means directly below `Any`.
    pub fn declare_abstract(&mut self, name: &str, parent: Option<&str>) {
        self.abstract_parents.insert(name.to_string(), parent.map(str::to_string));
    }

    /// Declares the abstract parent of a concrete type head.
    pub fn declare_concrete(&mut self, name: &str, parent: &str) {
        self.concrete_parents.insert(name.to_string(), parent.to_string());
    }

    pub fn is_abstract_name(&self, name: &str) -> bool {
        self.abstract_parents.contains_key(name)
    }

    /// Immediate supertype; `None` only for `Any`.
    pub fn parent(&self, t: &FrontendType) -> Option<FrontendType> {
        let abstract_or_any = |p: Option<&String>| match p {
            Some(p) => FrontendType::Abstract(p.clone()),
            None => FrontendType::Any,
        };
        match t {
            FrontendType::Any => None,
            FrontendType::Abstract(n) => Some(abstract_or_any(self.abstract_parents.get(n).and_then(|p| p.as_ref()))),
            FrontendType::Concrete(c) => Some(abstract_or_any(self.concrete_parents.get(&c.name))),
        }
    }

    /// `sub <: sup`.
    pub fn is_subtype(&self, sub: &FrontendType, sup: &FrontendType) -> bool {
        if *sup == FrontendType::Any || sub == sup {
            return true;
        }
        if sup.is_concrete() {
            return false;
        }
        let mut cur = self.parent(sub);
        let mut steps = 0;
        while let Some(t) = cur {
            if &t == sup {
                return true;
            }
            steps += 1;
            if steps > 64 {
                return false;
            }
            cur = self.parent(&t);
        }
        false
    }

    /// Parses a type written as in FIR text (`f32`, `tensor{f32,2}`, `AbstractFloat`, `Any`).
    pub fn parse_type(&self, text: &str) -> Result<FrontendType, String> {
        let text = text.trim();
        let (t, rest) = self.parse_type_prefix(text)?;
        if !rest.trim().is_empty() {
            return Err(format!("unexpected `{}` after type", rest.trim()));
        }
        Ok(t)
    }

    fn parse_type_prefix<'t>(&self, text: &'t str) -> Result<(FrontendType, &'t str), String> {
        let text = text.trim_start();
        let end = text
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(text.len());
        let name = &text[..end];
        if name.is_empty() || name.starts_with(|c: char| c.is_ascii_digit()) {
            return Err(format!("expected a type name, found `{text}`"));
        }
        let mut rest = &text[end..];
        let mut params = Vec::new();
        if let Some(r) = rest.trim_start().strip_prefix('{') {
            rest = r;
            loop {
                let trimmed = rest.trim_start();
                let num_end = trimmed
                    .find(|c: char| !(c.is_ascii_digit() || c == '-'))
                    .unwrap_or(trimmed.len());
                if num_end > 0 {
                    let n: i64 = trimmed[..num_end].parse().map_err(|_| format!("bad integer parameter in `{text}`"))?;
                    params.push(TypeParam::Int(n));
                    rest = &trimmed[num_end..];
                } else {
                    let (t, r) = self.parse_type_prefix(trimmed)?;
                    params.push(TypeParam::Type(t));
                    rest = r;
                }
                let trimmed = rest.trim_start();
                if let Some(r) = trimmed.strip_prefix(',') {
                    rest = r;
                } else if let Some(r) = trimmed.strip_prefix('}') {
                    rest = r;
                    break;
                } else {
                    return Err(format!("unterminated type parameters in `{text}`"));
                }
            }
        }
        let t = if name == "Any" && params.is_empty() {
            FrontendType::Any
        } else if params.is_empty() && self.is_abstract_name(name) {
            FrontendType::Abstract(name.to_string())
        } else {
            FrontendType::Concrete(ConcreteType { name: name.to_string(), params })
        };
        Ok((t, rest))
    }
}

/// Splits on commas that are not nested inside `{}` or `()`.
pub fn split_top_level(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '{' | '(' | '[' => depth += 1,
            '}' | ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if !text[start..].trim().is_empty() || !out.is_empty() {
        out.push(&text[start..]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_types() {
        let l = TypeLattice::default();
        assert_eq!(l.parse_type("f32").unwrap(), FrontendType::f32());
        assert_eq!(l.parse_type("tensor{f32, 2}").unwrap(), FrontendType::tensor(FrontendType::f32(), 2));
        assert_eq!(l.parse_type("Complex{f64}").unwrap(), FrontendType::complex(FrontendType::f64()));
        assert_eq!(l.parse_type("AbstractFloat").unwrap(), FrontendType::abstract_("AbstractFloat"));
        assert_eq!(l.parse_type("Any").unwrap(), FrontendType::Any);
        assert!(l.parse_type("tensor{f32,2").is_err());
        assert!(l.parse_type("f32 f64").is_err());
    }

    #[test]
    fn display_round_trips() {
        let l = TypeLattice::default();
        for s in ["f32", "memref{f32,1}", "Complex{f32}", "Integer", "Any"] {
            assert_eq!(l.parse_type(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn subtyping() {
        let l = TypeLattice::default();
        let af = FrontendType::abstract_("AbstractFloat");
        assert!(l.is_subtype(&FrontendType::f32(), &af));
        assert!(l.is_subtype(&FrontendType::f32(), &FrontendType::abstract_("Number")));
        assert!(l.is_subtype(&af, &FrontendType::Any));
        assert!(!l.is_subtype(&FrontendType::i64(), &af));
        assert!(!l.is_subtype(&af, &FrontendType::f32()));
        assert!(!l.is_subtype(&FrontendType::f32(), &FrontendType::f64()));
        assert!(l.is_subtype(&FrontendType::memref(FrontendType::f32(), 1), &FrontendType::Any));
    }

    #[test]
    fn splits_respecting_braces() {
        assert_eq!(split_top_level("memref{f32,1},index"), vec!["memref{f32,1}", "index"]);
        assert!(split_top_level("").is_empty());
        assert_eq!(split_top_level("a"), vec!["a"]);
    }
}
