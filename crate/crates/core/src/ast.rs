//! Types, expressions and the functional context shared by every stage.
//!
//! Equality is purely syntactic: identifiers compare literally and source
//! spans never take part in comparisons or hashing.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use indexmap::IndexMap;
use thiserror::Error;

pub type Ident = String;

/// 1-based source position. `0:0` means "synthesized, no source location".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }

    pub fn is_known(&self) -> bool {
        self.line > 0
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AstError {
    #[error("a propertied type cannot be the base of another propertied type")]
    PropertiedBase,
    #[error("duplicate property `{0}`")]
    DuplicateProperty(Ident),
    #[error("property `{0}` carries a propertied payload type")]
    PropertiedPayload(Ident),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Unit,
    Arrow(Box<Type>, Box<Type>),
    Propertied(PropType),
}

/// `[base]⟨p₁ ↪ e₁[P₁], …⟩`. Fields are private so the base/name invariants
/// can only be established through [`Type::propertied`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PropType {
    base: Box<Type>,
    props: Vec<Property>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Property {
    pub name: Ident,
    pub expr: Expr,
    pub ty: Type,
}

impl Property {
    pub fn new(name: impl Into<Ident>, expr: Expr, ty: Type) -> Self {
        Property {
            name: name.into(),
            expr,
            ty,
        }
    }
}

impl Type {
    pub fn arrow(domain: Type, codomain: Type) -> Type {
        Type::Arrow(Box::new(domain), Box::new(codomain))
    }

    pub fn propertied(base: Type, props: Vec<Property>) -> Result<Type, AstError> {
        if base.is_propertied() {
            return Err(AstError::PropertiedBase);
        }
        let mut seen = BTreeSet::new();
        for p in &props {
            if !seen.insert(p.name.as_str()) {
                return Err(AstError::DuplicateProperty(p.name.clone()));
            }
            if p.ty.is_propertied() {
                return Err(AstError::PropertiedPayload(p.name.clone()));
            }
        }
        Ok(Type::Propertied(PropType {
            base: Box::new(base),
            props,
        }))
    }

    /// `[base]⟨⟩`.
    pub fn empty_propertied(base: Type) -> Result<Type, AstError> {
        Type::propertied(base, Vec::new())
    }

    pub fn is_propertied(&self) -> bool {
        matches!(self, Type::Propertied(_))
    }

    pub fn is_arrow(&self) -> bool {
        matches!(self, Type::Arrow(..))
    }

    pub fn as_propertied(&self) -> Option<&PropType> {
        match self {
            Type::Propertied(p) => Some(p),
            _ => None,
        }
    }

    /// The type itself, or the base of a propertied type.
    pub fn strip(&self) -> &Type {
        match self {
            Type::Propertied(p) => &p.base,
            t => t,
        }
    }

    /// Equality ignoring the payload expressions of properties.
    pub fn same_shape(&self, other: &Type) -> bool {
        match (self, other) {
            (Type::Int, Type::Int) | (Type::Unit, Type::Unit) => true,
            (Type::Arrow(a1, b1), Type::Arrow(a2, b2)) => a1.same_shape(a2) && b1.same_shape(b2),
            (Type::Propertied(p), Type::Propertied(q)) => {
                p.base.same_shape(&q.base)
                    && p.props.len() == q.props.len()
                    && p.props
                        .iter()
                        .zip(&q.props)
                        .all(|(a, b)| a.name == b.name && a.ty.same_shape(&b.ty))
            }
            _ => false,
        }
    }

    /// Every propertied type inside replaced by its base.
    pub fn erase_properties(&self) -> Type {
        match self {
            Type::Int | Type::Unit => self.clone(),
            Type::Arrow(a, b) => Type::arrow(a.erase_properties(), b.erase_properties()),
            Type::Propertied(p) => p.base.erase_properties(),
        }
    }

    /// True when no propertied type occurs anywhere inside.
    pub fn is_property_free(&self) -> bool {
        match self {
            Type::Int | Type::Unit => true,
            Type::Arrow(a, b) => a.is_property_free() && b.is_property_free(),
            Type::Propertied(_) => false,
        }
    }
}

impl PropType {
    pub fn base(&self) -> &Type {
        &self.base
    }

    pub fn props(&self) -> &[Property] {
        &self.props
    }

    pub fn get(&self, name: &str) -> Option<&Property> {
        self.props.iter().find(|p| p.name == name)
    }

    pub fn has(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    /// Appends a fresh property or updates an existing one in place.
    pub fn with(&self, prop: Property) -> Result<Type, AstError> {
        let mut props = self.props.clone();
        match props.iter_mut().find(|p| p.name == prop.name) {
            Some(slot) => *slot = prop,
            None => props.push(prop),
        }
        Type::propertied((*self.base).clone(), props)
    }

    /// Removes `name`, keeping the order of the remaining properties.
    pub fn without(&self, name: &str) -> Type {
        Type::Propertied(PropType {
            base: self.base.clone(),
            props: self.props.iter().filter(|p| p.name != name).cloned().collect(),
        })
    }
}

/// An expression together with the position the parser found it at.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind.hash(state)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExprKind {
    Int(i64),
    Unit,
    Var(Ident),
    Func {
        name: Ident,
        param: Ident,
        param_ty: Type,
        body: Box<Expr>,
        cont: Box<Expr>,
    },
    Let {
        name: Ident,
        bound: Box<Expr>,
        body: Box<Expr>,
    },
    IfHas {
        scrutinee: Ident,
        prop: Ident,
        prop_ty: Type,
        bind_as: Ident,
        then_branch: Box<Expr>,
        else_branch: Box<Expr>,
    },
    Set {
        target: Box<Expr>,
        prop: Ident,
        value: Box<Expr>,
    },
    Get {
        target: Box<Expr>,
        prop: Ident,
    },
    Erase {
        target: Box<Expr>,
        prop: Ident,
    },
    Extract(Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    Plus(Box<Expr>, Box<Expr>),
    Minus(Box<Expr>, Box<Expr>),
    // Internal nodes below never come out of the parser.
    /// `propertied[M]`
    Propertied(Box<Expr>),
    /// `f[n]`
    MonoRef(Ident, u32),
    /// `drop x after e`
    DropAfter(Ident, Box<Expr>),
    /// `retrieve x = v after e`
    RetrieveAfter(Ident, Box<Expr>, Box<Expr>),
}

impl From<ExprKind> for Expr {
    fn from(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }
}

fn bx(e: Expr) -> Box<Expr> {
    Box::new(e)
}

/// Builders for synthesized expressions (no span).
impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn int(n: i64) -> Expr {
        ExprKind::Int(n).into()
    }

    pub fn unit() -> Expr {
        ExprKind::Unit.into()
    }

    pub fn var(name: impl Into<Ident>) -> Expr {
        ExprKind::Var(name.into()).into()
    }

    pub fn func(
        name: impl Into<Ident>,
        param: impl Into<Ident>,
        param_ty: Type,
        body: Expr,
        cont: Expr,
    ) -> Expr {
        ExprKind::Func {
            name: name.into(),
            param: param.into(),
            param_ty,
            body: bx(body),
            cont: bx(cont),
        }
        .into()
    }

    pub fn let_in(name: impl Into<Ident>, bound: Expr, body: Expr) -> Expr {
        ExprKind::Let {
            name: name.into(),
            bound: bx(bound),
            body: bx(body),
        }
        .into()
    }

    pub fn if_has(
        scrutinee: impl Into<Ident>,
        prop: impl Into<Ident>,
        prop_ty: Type,
        bind_as: impl Into<Ident>,
        then_branch: Expr,
        else_branch: Expr,
    ) -> Expr {
        ExprKind::IfHas {
            scrutinee: scrutinee.into(),
            prop: prop.into(),
            prop_ty,
            bind_as: bind_as.into(),
            then_branch: bx(then_branch),
            else_branch: bx(else_branch),
        }
        .into()
    }

    pub fn set(target: Expr, prop: impl Into<Ident>, value: Expr) -> Expr {
        ExprKind::Set {
            target: bx(target),
            prop: prop.into(),
            value: bx(value),
        }
        .into()
    }

    pub fn get(target: Expr, prop: impl Into<Ident>) -> Expr {
        ExprKind::Get {
            target: bx(target),
            prop: prop.into(),
        }
        .into()
    }

    pub fn erase(target: Expr, prop: impl Into<Ident>) -> Expr {
        ExprKind::Erase {
            target: bx(target),
            prop: prop.into(),
        }
        .into()
    }

    pub fn extract(target: Expr) -> Expr {
        ExprKind::Extract(bx(target)).into()
    }

    pub fn app(callee: Expr, arg: Expr) -> Expr {
        ExprKind::App(bx(callee), bx(arg)).into()
    }

    pub fn plus(l: Expr, r: Expr) -> Expr {
        ExprKind::Plus(bx(l), bx(r)).into()
    }

    pub fn minus(l: Expr, r: Expr) -> Expr {
        ExprKind::Minus(bx(l), bx(r)).into()
    }

    pub fn propertied(underlying: Expr) -> Expr {
        ExprKind::Propertied(bx(underlying)).into()
    }

    pub fn mono(name: impl Into<Ident>, index: u32) -> Expr {
        ExprKind::MonoRef(name.into(), index).into()
    }

    pub fn drop_after(name: impl Into<Ident>, body: Expr) -> Expr {
        ExprKind::DropAfter(name.into(), bx(body)).into()
    }

    pub fn retrieve_after(name: impl Into<Ident>, saved: Expr, body: Expr) -> Expr {
        ExprKind::RetrieveAfter(name.into(), bx(saved), bx(body)).into()
    }

    pub fn with_span(mut self, span: Span) -> Expr {
        self.span = span;
        self
    }

    /// Direct subexpressions, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        use ExprKind::*;
        match &self.kind {
            Int(_) | Unit | Var(_) | MonoRef(..) => vec![],
            Func { body, cont, .. } => vec![body, cont],
            Let { bound, body, .. } => vec![bound, body],
            IfHas {
                then_branch,
                else_branch,
                ..
            } => vec![then_branch, else_branch],
            Set { target, value, .. } => vec![target, value],
            Get { target, .. } | Erase { target, .. } => vec![target],
            Extract(e) | Propertied(e) | DropAfter(_, e) => vec![e],
            App(a, b) | Plus(a, b) | Minus(a, b) | RetrieveAfter(_, a, b) => vec![a, b],
        }
    }

    /// Whether this is one of the nodes that only the transformer/runtime create.
    pub fn is_internal(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Propertied(_)
                | ExprKind::MonoRef(..)
                | ExprKind::DropAfter(..)
                | ExprKind::RetrieveAfter(..)
        )
    }

    /// Pre-order walk over the expression and every subexpression.
    pub fn any(&self, pred: &mut impl FnMut(&Expr) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }

    /// Whether any node carries a propertied value or a propertied type
    /// annotation (binders' annotations and if-has property types).
    pub fn mentions_properties(&self) -> bool {
        self.any(&mut |e| match &e.kind {
            ExprKind::Propertied(_) => true,
            ExprKind::Func { param_ty, .. } => !param_ty.is_property_free(),
            ExprKind::IfHas { prop_ty, .. } => !prop_ty.is_property_free(),
            _ => false,
        })
    }

    /// Every identifier spelled anywhere in the expression (binders included).
    pub fn identifiers(&self, out: &mut BTreeSet<Ident>) {
        use ExprKind::*;
        match &self.kind {
            Var(x) => {
                out.insert(x.clone());
            }
            Func { name, param, .. } => {
                out.insert(name.clone());
                out.insert(param.clone());
            }
            Let { name, .. } | DropAfter(name, _) | RetrieveAfter(name, ..) => {
                out.insert(name.clone());
            }
            IfHas {
                scrutinee, bind_as, ..
            } => {
                out.insert(scrutinee.clone());
                out.insert(bind_as.clone());
            }
            MonoRef(f, _) => {
                out.insert(f.clone());
            }
            _ => {}
        }
        for c in self.children() {
            c.identifiers(out);
        }
    }
}

pub fn type_equal(a: &Type, b: &Type) -> bool {
    a == b
}

pub fn expr_equal(a: &Expr, b: &Expr) -> bool {
    a == b
}

/// Free variables. `MonoRef` contributes nothing; `func` binds its parameter
/// in the body and its name in the continuation.
pub fn free_vars(e: &Expr) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    collect_free(e, &mut Vec::new(), &mut out);
    out
}

fn collect_free(e: &Expr, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
    use ExprKind::*;
    fn under(
        name: &str,
        body: &Expr,
        bound: &mut Vec<Ident>,
        out: &mut BTreeSet<Ident>,
    ) {
        bound.push(name.to_string());
        collect_free(body, bound, out);
        bound.pop();
    }
    match &e.kind {
        Int(_) | Unit | MonoRef(..) => {}
        Var(x) => {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.clone());
            }
        }
        Func {
            name,
            param,
            body,
            cont,
            ..
        } => {
            under(param, body, bound, out);
            under(name, cont, bound, out);
        }
        Let { name, bound: b, body } => {
            collect_free(b, bound, out);
            under(name, body, bound, out);
        }
        IfHas {
            scrutinee,
            bind_as,
            then_branch,
            else_branch,
            ..
        } => {
            if !bound.iter().any(|b| b == scrutinee) {
                out.insert(scrutinee.clone());
            }
            under(bind_as, then_branch, bound, out);
            collect_free(else_branch, bound, out);
        }
        DropAfter(name, body) => under(name, body, bound, out),
        RetrieveAfter(name, saved, body) => {
            collect_free(saved, bound, out);
            under(name, body, bound, out);
        }
        _ => {
            for c in e.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

/// A raw (not yet transformed) function: `f :: x : T₁ . M : T₂`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawFunc {
    pub param: Ident,
    pub param_ty: Type,
    pub body: Expr,
    pub result_ty: Type,
}

/// A monomorphization: `f[n] ▷ x : T₁ . M′ : T₂`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mono {
    pub param: Ident,
    pub param_ty: Type,
    pub body: Expr,
    pub result_ty: Type,
}

/// What determines the body of a monomorphization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MonoKey {
    /// Applied to a plain or propertied non-function value of this type.
    ByArgType { func: Ident, arg_ty: Type },
    /// Applied to a (possibly propertied) function.
    ByArgFunc {
        func: Ident,
        passed: Expr,
        arg_ty: Type,
    },
}

impl MonoKey {
    pub fn func(&self) -> &str {
        match self {
            MonoKey::ByArgType { func, .. } | MonoKey::ByArgFunc { func, .. } => func,
        }
    }
}

/// The functional context Δ.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FuncCtx {
    pub raw: IndexMap<Ident, RawFunc>,
    pub monos: IndexMap<(Ident, u32), Mono>,
    pub cache: IndexMap<MonoKey, (Ident, u32)>,
}

impl FuncCtx {
    pub fn new() -> Self {
        Self::default()
    }

    /// Smallest index ≥ 1 not yet used by a monomorphization of `f`.
    pub fn fresh_index(&self, f: &str) -> u32 {
        (1..)
            .find(|k| !self.monos.contains_key(&(f.to_string(), *k)))
            .expect("u32 indices exhausted")
    }

    pub fn mono_lookup(&self, key: &MonoKey) -> Option<(Ident, u32)> {
        self.cache.get(key).cloned()
    }

    pub fn monos_of<'a>(&'a self, f: &'a str) -> impl Iterator<Item = (u32, &'a Mono)> + 'a {
        self.monos
            .iter()
            .filter(move |((g, _), _)| g == f)
            .map(|((_, k), m)| (*k, m))
    }
}
