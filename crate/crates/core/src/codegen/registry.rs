use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use super::context::BuilderContext;
use super::error::CodegenError;
use crate::dialects::{builtin_registry, DialectRegistry};
use crate::fir::{FrontendType, Literal, TypeLattice, TypeParam};
use crate::ir::{IrType, OperationState, Successor, ValueId};

/// One intrinsic method: a name and its parameter types.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntrinsicSignature {
    pub name: String,
    pub params: Vec<FrontendType>,
}

impl IntrinsicSignature {
    pub fn new(name: impl Into<String>, params: Vec<FrontendType>) -> Self {
        IntrinsicSignature { name: name.into(), params }
    }
}

impl fmt::Display for IntrinsicSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
        write!(f, "{}({})", self.name, params.join(", "))
    }
}

/// Arguments handed to an intrinsic builder.
#[derive(Debug, Clone)]
pub struct IntrinsicCall<'a> {
    /// One value group per argument; structured types contribute several values.
    pub args: &'a [Vec<ValueId>],
    /// Static argument types after literal promotion.
    pub arg_types: &'a [FrontendType],
    /// Declared result type of the invoking statement.
    pub result_type: &'a FrontendType,
}

impl IntrinsicCall<'_> {
    /// The single value of argument `i`.
    pub fn scalar(&self, i: usize) -> Result<ValueId, CodegenError> {
        match self.args.get(i).map(Vec::as_slice) {
            Some([v]) => Ok(*v),
            _ => Err(CodegenError::Builder(format!("argument {} is not a single IR value", i + 1))),
        }
    }
}

pub type IntrinsicBuilder =
    Arc<dyn Fn(&mut BuilderContext<'_>, &IntrinsicCall<'_>) -> Result<Vec<ValueId>, CodegenError> + Send + Sync>;
pub type GotoHook = Arc<dyn Fn(&mut BuilderContext<'_>, Successor) -> Result<(), CodegenError> + Send + Sync>;
pub type GotoIfNotHook =
    Arc<dyn Fn(&mut BuilderContext<'_>, ValueId, Successor, Successor) -> Result<(), CodegenError> + Send + Sync>;
pub type ReturnHook = Arc<dyn Fn(&mut BuilderContext<'_>, &[ValueId]) -> Result<(), CodegenError> + Send + Sync>;
pub type BoolConversion =
    Arc<dyn Fn(&mut BuilderContext<'_>, &[ValueId]) -> Result<ValueId, CodegenError> + Send + Sync>;

/// How a concrete frontend type head maps onto IR types.
#[derive(Debug, Clone, PartialEq)]
pub enum TypeMapping {
    Primitive(IrType),
    /// `tensor{T,r}`: ranked tensor of `T` with `r` dynamic dims.
    Tensor,
    /// `memref{T,r}`: ranked memref of `T` with `r` dynamic dims.
    MemRef,
    /// Unpacked into its fields, in declaration order.
    Struct(Vec<FieldType>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldType {
    /// The type parameter at this position.
    Param(usize),
    Fixed(FrontendType),
}

/// A resolved method: the winning signature and its builder.
#[derive(Clone)]
pub struct Method<'a> {
    pub signature: &'a IntrinsicSignature,
    pub builder: IntrinsicBuilder,
}

impl fmt::Debug for Method<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Method({})", self.signature)
    }
}

/// Intrinsic methods, type mappings and control-flow hooks for one translation target.
#[derive(Clone)]
pub struct IntrinsicRegistry {
    dialects: Arc<DialectRegistry>,
    lattice: TypeLattice,
    methods: BTreeMap<String, Vec<(IntrinsicSignature, IntrinsicBuilder)>>,
    types: HashMap<String, TypeMapping>,
    bool_conversions: HashMap<FrontendType, BoolConversion>,
    pub(crate) goto: GotoHook,
    pub(crate) gotoifnot: GotoIfNotHook,
    pub(crate) ret: ReturnHook,
}

impl fmt::Debug for IntrinsicRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sigs: Vec<String> = self.signatures().map(|s| s.to_string()).collect();
        f.debug_struct("IntrinsicRegistry").field("signatures", &sigs).finish_non_exhaustive()
    }
}

impl Default for IntrinsicRegistry {
    fn default() -> Self {
        Self::new(builtin_registry())
    }
}

impl IntrinsicRegistry {
    /// An empty method table over `dialects` with the default type table and `cf`/`func` hooks.
    pub fn new(dialects: DialectRegistry) -> Self {
        Self::with_lattice(dialects, TypeLattice::default())
    }

    pub fn with_lattice(dialects: DialectRegistry, lattice: TypeLattice) -> Self {
        let mut types = HashMap::new();
        for (name, ty) in [
            ("f32", IrType::Float32),
            ("f64", IrType::Float64),
            ("index", IrType::Index),
            ("Bool", IrType::i1()),
            ("i1", IrType::Int(1)),
            ("i8", IrType::Int(8)),
            ("i16", IrType::Int(16)),
            ("i32", IrType::Int(32)),
            ("i64", IrType::Int(64)),
        ] {
            types.insert(name.to_string(), TypeMapping::Primitive(ty));
        }
        types.insert("tensor".into(), TypeMapping::Tensor);
        types.insert("memref".into(), TypeMapping::MemRef);
        types.insert("Complex".into(), TypeMapping::Struct(vec![FieldType::Param(0), FieldType::Param(0)]));
        types.insert("Nothing".into(), TypeMapping::Struct(Vec::new()));

        IntrinsicRegistry {
            dialects: Arc::new(dialects),
            lattice,
            methods: BTreeMap::new(),
            types,
            bool_conversions: HashMap::new(),
            goto: Arc::new(|ctx, dest| {
                ctx.build(OperationState::new("cf.br").successor(dest.block, dest.args))?;
                Ok(())
            }),
            gotoifnot: Arc::new(|ctx, cond, on_true, on_false| {
                ctx.build(
                    OperationState::new("cf.cond_br")
                        .operands([cond])
                        .successor(on_true.block, on_true.args)
                        .successor(on_false.block, on_false.args),
                )?;
                Ok(())
            }),
            ret: Arc::new(|ctx, values| {
                ctx.build(OperationState::new("func.return").operands(values.iter().copied()))?;
                Ok(())
            }),
        }
    }

    pub fn dialects(&self) -> &DialectRegistry {
        &self.dialects
    }

    /// For loading extra dialect specs after construction.
    pub fn dialects_mut(&mut self) -> &mut DialectRegistry {
        Arc::make_mut(&mut self.dialects)
    }

    pub fn lattice(&self) -> &TypeLattice {
        &self.lattice
    }

    pub fn register_intrinsic<F>(&mut self, signature: IntrinsicSignature, builder: F) -> Result<(), CodegenError>
    where
        F: Fn(&mut BuilderContext<'_>, &IntrinsicCall<'_>) -> Result<Vec<ValueId>, CodegenError> + Send + Sync + 'static,
    {
        let entries = self.methods.entry(signature.name.clone()).or_default();
        if entries.iter().any(|(s, _)| *s == signature) {
            return Err(CodegenError::DuplicateSignature(signature.to_string()));
        }
        entries.push((signature, Arc::new(builder)));
        Ok(())
    }

    pub fn register_type(&mut self, head: impl Into<String>, mapping: TypeMapping) {
        self.types.insert(head.into(), mapping);
    }

    pub fn register_bool_conversion<F>(&mut self, ty: FrontendType, conversion: F)
    where
        F: Fn(&mut BuilderContext<'_>, &[ValueId]) -> Result<ValueId, CodegenError> + Send + Sync + 'static,
    {
        self.bool_conversions.insert(ty, Arc::new(conversion));
    }

    pub(crate) fn bool_conversion(&self, ty: &FrontendType) -> Option<BoolConversion> {
        self.bool_conversions.get(ty).cloned()
    }

    pub fn set_goto_hook(&mut self, hook: GotoHook) {
        self.goto = hook;
    }

    pub fn set_gotoifnot_hook(&mut self, hook: GotoIfNotHook) {
        self.gotoifnot = hook;
    }

    pub fn set_return_hook(&mut self, hook: ReturnHook) {
        self.ret = hook;
    }

    pub fn signatures(&self) -> impl Iterator<Item = &IntrinsicSignature> {
        self.methods.values().flatten().map(|(s, _)| s)
    }

    pub fn has_method(&self, name: &str) -> bool {
        self.methods.contains_key(name)
    }

    /// Whether a call with these argument types would resolve, counting literal promotion as
    /// possible wherever an argument's type is a literal's natural type.
    pub fn is_intrinsic(&self, name: &str, arg_types: &[FrontendType]) -> bool {
        name == crate::fir::BOOL_CONVERSION
            || self.methods.get(name).is_some_and(|ms| ms.iter().any(|(s, _)| s.params.len() == arg_types.len()))
    }

    /// Most specific method applicable to `arg_types`.
    pub fn resolve_method(
        &self,
        name: &str,
        arg_types: &[FrontendType],
    ) -> Result<Method<'_>, CodegenError> {
        self.select(name, arg_types, |sig| {
            sig.params.len() == arg_types.len()
                && arg_types.iter().zip(&sig.params).all(|(a, p)| self.lattice.is_subtype(a, p))
        })
    }

    /// Resolution for a call whose arguments may be literals (`None` type slots hold the literal).
    ///
    /// Literals first take their natural type; if nothing applies, each literal position also
    /// accepts any concrete parameter type the literal is representable in.
    pub fn resolve_call(
        &self,
        name: &str,
        args: &[(FrontendType, Option<Literal>)],
    ) -> Result<Method<'_>, CodegenError> {
        let natural: Vec<FrontendType> = args.iter().map(|(t, _)| t.clone()).collect();
        match self.resolve_method(name, &natural) {
            Err(CodegenError::NoMethod { .. }) if args.iter().any(|(_, l)| l.is_some()) => {}
            other => return other,
        }
        self.select(name, &natural, |sig| {
            sig.params.len() == args.len()
                && args.iter().zip(&sig.params).all(|((t, lit), p)| {
                    self.lattice.is_subtype(t, p)
                        || lit.is_some_and(|l| p.is_concrete() && promote_literal(l, p).is_ok())
                })
        })
    }

    fn select(
        &self,
        name: &str,
        arg_types: &[FrontendType],
        applicable: impl Fn(&IntrinsicSignature) -> bool,
    ) -> Result<Method<'_>, CodegenError> {
        let candidates: Vec<&(IntrinsicSignature, IntrinsicBuilder)> =
            self.methods.get(name).into_iter().flatten().filter(|(s, _)| applicable(s)).collect();
        if candidates.is_empty() {
            return Err(CodegenError::NoMethod { name: name.to_string(), arg_types: fmt_types(arg_types) });
        }
        let below = |a: &IntrinsicSignature, b: &IntrinsicSignature| {
            a.params.iter().zip(&b.params).all(|(x, y)| self.lattice.is_subtype(x, y))
        };
        let minimal: Vec<_> = candidates
            .iter()
            .filter(|(s, _)| !candidates.iter().any(|(o, _)| o != s && below(o, s) && !below(s, o)))
            .collect();
        match minimal.as_slice() {
            [(signature, builder)] => Ok(Method { signature, builder: builder.clone() }),
            _ => Err(CodegenError::Ambiguous {
                name: name.to_string(),
                arg_types: fmt_types(arg_types),
                candidates: minimal.iter().map(|(s, _)| s.to_string()).collect(),
            }),
        }
    }

    /// IR types of a concrete frontend type, with structured types unpacked.
    pub fn map_type(&self, ty: &FrontendType) -> Result<Vec<IrType>, CodegenError> {
        let c = ty.as_concrete().ok_or_else(|| CodegenError::NotConcrete(ty.to_string()))?;
        let unmapped = || CodegenError::UnmappedType(ty.to_string());
        let param_type = |i: usize| match c.params.get(i) {
            Some(TypeParam::Type(t)) => Ok(t),
            _ => Err(unmapped()),
        };
        match self.types.get(&c.name).ok_or_else(unmapped)? {
            TypeMapping::Primitive(t) if c.params.is_empty() => Ok(vec![t.clone()]),
            TypeMapping::Primitive(_) => Err(unmapped()),
            TypeMapping::Tensor | TypeMapping::MemRef => {
                let elem = match self.map_type(param_type(0)?)?.as_slice() {
                    [e] if e.is_scalar() => e.clone(),
                    _ => return Err(unmapped()),
                };
                let rank = match c.params.get(1) {
                    Some(TypeParam::Int(r)) if *r >= 0 => *r as usize,
                    _ => return Err(unmapped()),
                };
                Ok(vec![if self.types[&c.name] == TypeMapping::Tensor {
                    IrType::dyn_tensor(elem, rank)
                } else {
                    IrType::dyn_memref(elem, rank)
                }])
            }
            TypeMapping::Struct(fields) => {
                let mut out = Vec::new();
                for field in fields {
                    let t = match field {
                        FieldType::Param(i) => param_type(*i)?,
                        FieldType::Fixed(t) => t,
                    };
                    out.extend(self.map_type(t)?);
                }
                Ok(out)
            }
        }
    }
}

fn fmt_types(ts: &[FrontendType]) -> String {
    ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
}

/// Numeric value of a literal after promotion to a concrete type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PromotedLiteral {
    Int(i64),
    Float(f64),
}

/// Promotes a literal to `target`, failing when it is not exactly representable there.
///
/// Integers widen to `f32` only up to 2^24 and to `f64` up to 2^53; floats never become integers.
pub fn promote_literal(lit: Literal, target: &FrontendType) -> Result<PromotedLiteral, String> {
    let head = target.head();
    let int_range = |bits: u32| -> (i128, i128) { (-(1i128 << (bits - 1)), (1i128 << (bits - 1)) - 1) };
    match (lit, head) {
        (Literal::Bool(b), "Bool" | "i1") => Ok(PromotedLiteral::Int(b as i64)),
        (Literal::Bool(_), _) => Err(format!("boolean literal cannot become {target}")),
        (Literal::Int(v), "f32") if v.unsigned_abs() <= 1 << 24 => Ok(PromotedLiteral::Float(v as f32 as f64)),
        (Literal::Int(v), "f64") if v.unsigned_abs() <= 1 << 53 => Ok(PromotedLiteral::Float(v as f64)),
        (Literal::Int(v), "f32" | "f64") => Err(format!("{v} is not exactly representable in {target}")),
        (Literal::Int(v), "i64" | "index") => Ok(PromotedLiteral::Int(v)),
        (Literal::Int(v), "i1" | "Bool") if v == 0 || v == 1 => Ok(PromotedLiteral::Int(v)),
        (Literal::Int(v), "i8" | "i16" | "i32") => {
            let bits: u32 = head[1..].parse().unwrap_or(64);
            let (lo, hi) = int_range(bits);
            if (lo..=hi).contains(&(v as i128)) {
                Ok(PromotedLiteral::Int(v))
            } else {
                Err(format!("{v} does not fit in {target}"))
            }
        }
        (Literal::Float(x), "f32") if x.is_finite() && x.abs() <= f32::MAX as f64 => {
            Ok(PromotedLiteral::Float(x as f32 as f64))
        }
        (Literal::Float(x), "f64") => Ok(PromotedLiteral::Float(x)),
        (l, _) => Err(format!("literal {l} cannot become {target}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noop(_: &mut BuilderContext<'_>, _: &IntrinsicCall<'_>) -> Result<Vec<ValueId>, CodegenError> {
        Ok(vec![])
    }

    fn af() -> FrontendType {
        FrontendType::abstract_("AbstractFloat")
    }

    #[test]
    fn most_specific_wins() {
        let mut r = IntrinsicRegistry::default();
        r.register_intrinsic(IntrinsicSignature::new("+", vec![af(), af()]), noop).unwrap();
        r.register_intrinsic(IntrinsicSignature::new("+", vec![FrontendType::f32(), FrontendType::f32()]), noop)
            .unwrap();
        let sig = r.resolve_method("+", &[FrontendType::f32(), FrontendType::f32()]).unwrap().signature;
        assert_eq!(sig.params, vec![FrontendType::f32(), FrontendType::f32()]);
        let sig = r.resolve_method("+", &[FrontendType::f64(), FrontendType::f32()]).unwrap().signature;
        assert_eq!(sig.params, vec![af(), af()]);
    }

    #[test]
    fn duplicate_signature() {
        let mut r = IntrinsicRegistry::default();
        let sig = IntrinsicSignature::new("+", vec![FrontendType::f32(), FrontendType::f32()]);
        r.register_intrinsic(sig.clone(), noop).unwrap();
        assert!(matches!(r.register_intrinsic(sig, noop), Err(CodegenError::DuplicateSignature(_))));
    }

    #[test]
    fn no_method_and_ambiguity() {
        let mut r = IntrinsicRegistry::default();
        r.register_intrinsic(IntrinsicSignature::new("+", vec![FrontendType::f32(), FrontendType::f32()]), noop)
            .unwrap();
        assert!(matches!(
            r.resolve_method("+", &[FrontendType::f32(), FrontendType::f64()]),
            Err(CodegenError::NoMethod { .. })
        ));
        let mut r = IntrinsicRegistry::default();
        r.register_intrinsic(IntrinsicSignature::new("g", vec![FrontendType::f32(), af()]), noop).unwrap();
        r.register_intrinsic(IntrinsicSignature::new("g", vec![af(), FrontendType::f32()]), noop).unwrap();
        let err = r.resolve_method("g", &[FrontendType::f32(), FrontendType::f32()]).unwrap_err();
        let CodegenError::Ambiguous { candidates, .. } = err else { panic!("{err}") };
        assert_eq!(candidates.len(), 2);
    }

    #[test]
    fn literal_retry() {
        let mut r = IntrinsicRegistry::default();
        r.register_intrinsic(IntrinsicSignature::new("+", vec![FrontendType::f32(), FrontendType::f32()]), noop)
            .unwrap();
        let args = [(FrontendType::f32(), None), (FrontendType::i64(), Some(Literal::Int(1)))];
        assert!(r.resolve_call("+", &args).is_ok());
        let args = [(FrontendType::f32(), None), (FrontendType::i64(), Some(Literal::Int((1 << 24) + 1)))];
        assert!(r.resolve_call("+", &args).is_err());
    }

    #[test]
    fn maps_types() {
        let r = IntrinsicRegistry::default();
        assert_eq!(r.map_type(&FrontendType::f32()).unwrap(), vec![IrType::Float32]);
        assert_eq!(
            r.map_type(&FrontendType::complex(FrontendType::f32())).unwrap(),
            vec![IrType::Float32, IrType::Float32]
        );
        assert_eq!(
            r.map_type(&FrontendType::tensor(FrontendType::f32(), 2)).unwrap(),
            vec![IrType::dyn_tensor(IrType::Float32, 2)]
        );
        assert_eq!(r.map_type(&FrontendType::nothing()).unwrap(), vec![]);
        assert!(matches!(r.map_type(&af()), Err(CodegenError::NotConcrete(_))));
        assert!(matches!(r.map_type(&FrontendType::concrete("Widget")), Err(CodegenError::UnmappedType(_))));
    }

    #[test]
    fn promotion_rules() {
        assert_eq!(promote_literal(Literal::Int(1), &FrontendType::f32()), Ok(PromotedLiteral::Float(1.0)));
        assert!(promote_literal(Literal::Int(1 << 24), &FrontendType::f32()).is_ok());
        assert!(promote_literal(Literal::Int((1 << 24) + 1), &FrontendType::f32()).is_err());
        assert!(promote_literal(Literal::Int((1 << 53) + 1), &FrontendType::f64()).is_err());
        assert!(promote_literal(Literal::Float(1.0), &FrontendType::i64()).is_err());
        assert!(promote_literal(Literal::Int(300), &FrontendType::concrete("i8")).is_err());
    }
}
