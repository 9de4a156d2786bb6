//! Compile-time transformation: evaluates every property construct and
//! monomorphizes functions into the functional context.
//!
//! Functions never survive as definitions. Each `func` becomes a raw entry in
//! Δ, and each application compiles (or reuses) a specialization `f[n]` whose
//! body was transformed for the shape of the argument it receives.
//!
//! The runtime looks variables up dynamically, so every runtime binder gets a
//! name that is unique across the program: the first binder keeps its source
//! name and later ones get `name_1`, `name_2`, ...

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::ast::{
    free_vars, Expr, ExprKind, FuncCtx, Ident, Mono, MonoKey, Property, RawFunc, Span, Type,
};
use crate::scope::Scope;
use crate::typecheck::{self, TypeEnv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformErrorCode {
    NoProp,
    UnknownFunc,
    SpliceScope,
    Internal,
}

impl TransformErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            TransformErrorCode::NoProp => "T-NO-PROP",
            TransformErrorCode::UnknownFunc => "T-UNKNOWN-FUNC",
            TransformErrorCode::SpliceScope => "T-SPLICE-SCOPE",
            TransformErrorCode::Internal => "T-INTERNAL",
        }
    }
}

impl fmt::Display for TransformErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("error[{code}]: {message} at {span}")]
pub struct TransformError {
    pub code: TransformErrorCode,
    pub message: String,
    pub span: Span,
}

fn err<T>(
    code: TransformErrorCode,
    span: Span,
    message: impl Into<String>,
) -> Result<T, TransformError> {
    Err(TransformError {
        code,
        message: message.into(),
        span,
    })
}

/// What a source variable stands for during transformation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    /// A runtime variable, possibly renamed.
    Plain { var: Ident, ty: Type },
    /// Replaced wherever it occurs: propertied values, function references.
    Rewrite { expr: Expr, ty: Type },
}

impl Binding {
    pub fn ty(&self) -> &Type {
        match self {
            Binding::Plain { ty, .. } | Binding::Rewrite { ty, .. } => ty,
        }
    }

    fn resolve(&self) -> (Expr, Type) {
        match self {
            Binding::Plain { var, ty } => (Expr::var(var.clone()), ty.clone()),
            Binding::Rewrite { expr, ty } => (expr.clone(), ty.clone()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct TransformEnv {
    pub scope: Scope<Binding>,
    /// Runtime names that are live at the call site of the function being
    /// compiled. Spliced property expressions may refer to them.
    pub inherited: Rc<BTreeSet<Ident>>,
}

impl TransformEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&self, name: impl Into<Ident>, b: Binding) -> Self {
        TransformEnv {
            scope: self.scope.extend(name, b),
            inherited: self.inherited.clone(),
        }
    }

    /// The plain typing environment the checker sees.
    pub fn types(&self) -> TypeEnv {
        self.scope.map(|_, b| b.ty().clone())
    }

    /// Runtime names bound around the current point, shadowed ones included.
    pub fn live(&self) -> BTreeSet<Ident> {
        let mut out: BTreeSet<Ident> = (*self.inherited).clone();
        for (_, b) in self.scope.iter() {
            match b {
                Binding::Plain { var, .. } => {
                    out.insert(var.clone());
                }
                Binding::Rewrite { expr, .. } => out.extend(free_vars(expr)),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformResult {
    pub delta: FuncCtx,
    pub expr: Expr,
    pub ty: Type,
}

/// How often each rule fired during one transformation.
pub type RuleStats = BTreeMap<&'static str, usize>;

pub fn transform_program(e: &Expr) -> Result<TransformResult, TransformError> {
    transform(&TransformEnv::new(), &FuncCtx::new(), e)
}

pub fn transform_program_with_stats(
    e: &Expr,
) -> Result<(TransformResult, RuleStats), TransformError> {
    let mut t = Transformer::new(&TransformEnv::new(), &FuncCtx::new(), e);
    let (expr, ty) = t.tr(&TransformEnv::new(), e)?;
    let stats = std::mem::take(&mut t.stats);
    Ok((
        TransformResult {
            delta: t.delta,
            expr,
            ty,
        },
        stats,
    ))
}

/// Transforms `e` under `env`, extending `delta`.
pub fn transform(
    env: &TransformEnv,
    delta: &FuncCtx,
    e: &Expr,
) -> Result<TransformResult, TransformError> {
    let mut t = Transformer::new(env, delta, e);
    let (expr, ty) = t.tr(env, e)?;
    Ok(TransformResult {
        delta: t.delta,
        expr,
        ty,
    })
}

#[derive(Debug, Default)]
struct NameSupply {
    reserved: BTreeSet<Ident>,
    taken: BTreeSet<Ident>,
}

impl NameSupply {
    fn fresh(&mut self, base: &str) -> Ident {
        if self.taken.insert(base.to_string()) {
            return base.to_string();
        }
        let name = (1..)
            .map(|n| format!("{base}_{n}"))
            .find(|c| !self.reserved.contains(c) && !self.taken.contains(c))
            .expect("unbounded supply");
        self.taken.insert(name.clone());
        name
    }
}

struct Transformer {
    delta: FuncCtx,
    def_envs: HashMap<Ident, TransformEnv>,
    names: NameSupply,
    stats: RuleStats,
    /// Raw functions whose body is being compiled right now.
    compiling: Vec<Ident>,
}

enum ArgShape {
    Plain,
    Prop,
    Func,
    PropFunc,
}

impl Transformer {
    fn new(env: &TransformEnv, delta: &FuncCtx, e: &Expr) -> Self {
        let mut reserved = BTreeSet::new();
        e.identifiers(&mut reserved);
        let mut taken = BTreeSet::new();
        taken.extend(env.live());
        taken.extend(delta.raw.keys().cloned());
        for ((_, _), m) in &delta.monos {
            taken.insert(m.param.clone());
            m.body.identifiers(&mut taken);
        }
        reserved.extend(taken.iter().cloned());
        Transformer {
            delta: delta.clone(),
            def_envs: HashMap::new(),
            names: NameSupply { reserved, taken },
            stats: RuleStats::new(),
            compiling: Vec::new(),
        }
    }

    fn fire(&mut self, rule: &'static str) {
        *self.stats.entry(rule).or_default() += 1;
    }

    fn tr(&mut self, env: &TransformEnv, e: &Expr) -> Result<(Expr, Type), TransformError> {
        use ExprKind::*;
        let span = e.span;
        match &e.kind {
            Int(_) => {
                self.fire("R-V-Int");
                Ok((e.clone(), Type::Int))
            }
            Unit => {
                self.fire("R-V-Unit");
                Ok((e.clone(), Type::Unit))
            }
            Var(x) => match env.scope.lookup(x) {
                Some(b) => {
                    self.fire("R-S-Var");
                    let (expr, ty) = b.resolve();
                    Ok((expr.with_span(span), ty))
                }
                None => err(
                    TransformErrorCode::Internal,
                    span,
                    format!("variable `{x}` is not bound"),
                ),
            },
            MonoRef(f, n) => match self.delta.monos.get(&(f.clone(), *n)) {
                Some(m) => {
                    let ty = Type::arrow(m.param_ty.clone(), m.result_ty.clone());
                    self.fire("R-V-Func");
                    Ok((e.clone(), ty))
                }
                None => err(
                    TransformErrorCode::UnknownFunc,
                    span,
                    format!("no monomorphization `{f}[{n}]`"),
                ),
            },
            Func {
                name,
                param,
                param_ty,
                body,
                cont,
            } => {
                self.fire("R-Func");
                let body_env = env.types().extend(param.clone(), param_ty.clone());
                let result_ty = typecheck::infer(&body_env, body).or_else(|te| {
                    err(
                        TransformErrorCode::Internal,
                        te.span,
                        format!("cannot infer the result type of `{name}`: {}", te.message),
                    )
                })?;
                let key = self.names.fresh(name);
                self.delta.raw.insert(
                    key.clone(),
                    RawFunc {
                        param: param.clone(),
                        param_ty: param_ty.clone(),
                        body: (**body).clone(),
                        result_ty: result_ty.clone(),
                    },
                );
                self.def_envs.insert(key.clone(), env.clone());
                let reference = Binding::Rewrite {
                    expr: Expr::var(key),
                    ty: Type::arrow(param_ty.clone(), result_ty),
                };
                self.tr(&env.bind(name.clone(), reference), cont)
            }
            Let { name, bound, body } => self.tr_let(env, name, bound, body, span),
            IfHas {
                scrutinee,
                prop,
                prop_ty,
                bind_as,
                then_branch,
                else_branch,
            } => {
                let Some(binding) = env.scope.lookup(scrutinee) else {
                    return err(
                        TransformErrorCode::Internal,
                        span,
                        format!("if-has scrutinee `{scrutinee}` is not bound"),
                    );
                };
                let (scrutinee_expr, scrutinee_ty) = binding.resolve();
                let Some(pt) = scrutinee_ty.as_propertied() else {
                    self.fire("R-If-Has-1");
                    let empty = Type::empty_propertied(scrutinee_ty.clone())
                        .or_else(|e| err(TransformErrorCode::Internal, span, e.to_string()))?;
                    let rebound = Binding::Rewrite {
                        expr: Expr::propertied(scrutinee_expr),
                        ty: empty,
                    };
                    return self.tr(&env.bind(scrutinee.clone(), rebound), else_branch);
                };
                let Some(property) = pt.get(prop) else {
                    self.fire("R-If-Has-2");
                    return self.tr(env, else_branch);
                };
                if &property.ty != prop_ty {
                    self.fire("R-If-Has-3");
                    // The else branch sees the scrutinee without `p`, as in
                    // the typing rule.
                    let rebound = Binding::Rewrite {
                        expr: scrutinee_expr,
                        ty: pt.without(prop),
                    };
                    return self.tr(&env.bind(scrutinee.clone(), rebound), else_branch);
                }
                let payload = property.expr.clone();
                // In the then branch `p` moves last, and the scrutinee shadows
                // a bind-as of the same name, again as in the typing rule.
                let moved = match pt.without(prop) {
                    Type::Propertied(rest) => rest.with(property.clone()),
                    other => Ok(other),
                }
                .or_else(|e| err(TransformErrorCode::Internal, span, e.to_string()))?;
                let scrutinee_then = Binding::Rewrite {
                    expr: scrutinee_expr,
                    ty: moved,
                };
                self.check_splice(env, &payload, span)?;
                let (then_ty, _) =
                    typecheck::if_has_branch_types(&scrutinee_ty, prop, prop_ty, bind_as)
                        .or_else(|e| err(TransformErrorCode::Internal, span, e.to_string()))?;
                let then_env = env
                    .types()
                    .extend(bind_as.clone(), prop_ty.clone())
                    .extend(scrutinee.clone(), then_ty);
                let branch_ty = typecheck::infer(&then_env, then_branch).or_else(|te| {
                    err(
                        TransformErrorCode::Internal,
                        te.span,
                        format!("cannot type the then branch: {}", te.message),
                    )
                })?;
                if prop_ty.is_arrow() || branch_ty.is_arrow() || branch_ty.is_propertied() {
                    self.fire("R-If-Has-5");
                    let b = Binding::Rewrite {
                        expr: payload,
                        ty: prop_ty.clone(),
                    };
                    let env = env
                        .bind(bind_as.clone(), b)
                        .bind(scrutinee.clone(), scrutinee_then);
                    self.tr(&env, then_branch)
                } else {
                    self.fire("R-If-Has-4");
                    let var = self.names.fresh(bind_as);
                    let b = Binding::Plain {
                        var: var.clone(),
                        ty: prop_ty.clone(),
                    };
                    let env = env
                        .bind(bind_as.clone(), b)
                        .bind(scrutinee.clone(), scrutinee_then);
                    let (then_expr, ty) = self.tr(&env, then_branch)?;
                    Ok((Expr::let_in(var, payload, then_expr).with_span(span), ty))
                }
            }
            Set {
                target,
                prop,
                value,
            } => {
                let (target_expr, target_ty) = self.tr(env, target)?;
                let (value_expr, value_ty) = self.tr(env, value)?;
                if value_ty.is_propertied() {
                    return err(
                        TransformErrorCode::Internal,
                        value.span,
                        format!("property `{prop}` would hold a propertied value"),
                    );
                }
                let property = Property::new(prop.clone(), value_expr, value_ty);
                let (expr, ty) = match target_ty.as_propertied() {
                    None => {
                        self.fire("R-Set-1");
                        (
                            Expr::propertied(target_expr).with_span(span),
                            Type::propertied(target_ty.clone(), vec![property]),
                        )
                    }
                    Some(pt) => {
                        self.fire(if pt.has(prop) { "R-Set-3" } else { "R-Set-2" });
                        (target_expr, pt.with(property))
                    }
                };
                let ty = ty.or_else(|e| err(TransformErrorCode::Internal, span, e.to_string()))?;
                Ok((expr, ty))
            }
            Get { target, prop } => {
                let (_, target_ty) = self.tr(env, target)?;
                let Some(property) = target_ty.as_propertied().and_then(|p| p.get(prop)) else {
                    return err(
                        TransformErrorCode::NoProp,
                        span,
                        format!("`{target_ty}` has no property `{prop}`"),
                    );
                };
                let property = property.clone();
                self.check_splice(env, &property.expr, span)?;
                self.fire("R-Get");
                Ok((property.expr, property.ty))
            }
            Extract(target) => {
                let (target_expr, target_ty) = self.tr(env, target)?;
                self.fire("R-Ext");
                let underlying = underlying(target_expr, span)?;
                Ok((underlying, target_ty.strip().clone()))
            }
            Erase { target, prop } => {
                let (target_expr, target_ty) = self.tr(env, target)?;
                match target_ty.as_propertied() {
                    Some(pt) if pt.has(prop) => {
                        self.fire("R-Erase");
                        Ok((target_expr, pt.without(prop)))
                    }
                    _ => err(
                        TransformErrorCode::NoProp,
                        span,
                        format!("`{target_ty}` has no property `{prop}`"),
                    ),
                }
            }
            Plus(l, r) | Minus(l, r) => {
                let plus = matches!(e.kind, Plus(..));
                let (l_expr, l_ty) = self.tr(env, l)?;
                let (r_expr, r_ty) = self.tr(env, r)?;
                let suffix = match (l_ty.is_propertied(), r_ty.is_propertied()) {
                    (false, false) => "",
                    (true, true) => "-1",
                    (true, false) => "-2",
                    (false, true) => "-3",
                };
                self.fire(rule_name(plus, suffix));
                let l_expr = if l_ty.is_propertied() {
                    underlying(l_expr, span)?
                } else {
                    l_expr
                };
                let r_expr = if r_ty.is_propertied() {
                    underlying(r_expr, span)?
                } else {
                    r_expr
                };
                let out = if plus {
                    Expr::plus(l_expr, r_expr)
                } else {
                    Expr::minus(l_expr, r_expr)
                };
                Ok((out.with_span(span), Type::Int))
            }
            App(callee, arg) => {
                let (callee_expr, _) = self.tr(env, callee)?;
                match &callee_expr.kind {
                    MonoRef(f, n) => {
                        let Some(mono) = self.delta.monos.get(&(f.clone(), *n)).cloned() else {
                            return err(
                                TransformErrorCode::UnknownFunc,
                                callee.span,
                                format!("no monomorphization `{f}[{n}]`"),
                            );
                        };
                        self.fire("R-App-Compiled");
                        let (arg_expr, arg_ty) = self.tr(env, arg)?;
                        let arg_expr = if arg_ty.is_propertied() {
                            underlying(arg_expr, span)?
                        } else {
                            arg_expr
                        };
                        Ok((
                            Expr::app(callee_expr, arg_expr).with_span(span),
                            mono.result_ty,
                        ))
                    }
                    Var(k) if self.delta.raw.contains_key(k) => {
                        let k = k.clone();
                        self.apply_raw(env, &k, arg, span)
                    }
                    _ => err(
                        TransformErrorCode::UnknownFunc,
                        callee.span,
                        format!("`{callee_expr}` does not name a known function"),
                    ),
                }
            }
            Propertied(_) | DropAfter(..) | RetrieveAfter(..) => err(
                TransformErrorCode::Internal,
                span,
                format!("`{e}` cannot appear in a source program"),
            ),
        }
    }

    fn tr_let(
        &mut self,
        env: &TransformEnv,
        name: &Ident,
        bound: &Expr,
        body: &Expr,
        span: Span,
    ) -> Result<(Expr, Type), TransformError> {
        let (bound_expr, bound_ty) = self.tr(env, bound)?;
        if bound_ty.is_arrow() || bound_ty.strip().is_arrow() {
            self.fire(if bound_ty.is_propertied() {
                "R-Let-Prop-2"
            } else {
                "R-Let-Func"
            });
            let b = Binding::Rewrite {
                expr: bound_expr,
                ty: bound_ty,
            };
            return self.tr(&env.bind(name.clone(), b), body);
        }
        let var = self.names.fresh(name);
        let (value, b) = if bound_ty.is_propertied() {
            self.fire("R-Let-Prop-1");
            let value = underlying(bound_expr, span)?;
            let b = Binding::Rewrite {
                expr: Expr::propertied(Expr::var(var.clone())),
                ty: bound_ty,
            };
            (value, b)
        } else {
            self.fire("R-P-Let");
            let b = Binding::Plain {
                var: var.clone(),
                ty: bound_ty,
            };
            (bound_expr, b)
        };
        let (body_expr, body_ty) = self.tr(&env.bind(name.clone(), b), body)?;
        Ok((Expr::let_in(var, value, body_expr).with_span(span), body_ty))
    }

    fn apply_raw(
        &mut self,
        env: &TransformEnv,
        k: &Ident,
        arg: &Expr,
        span: Span,
    ) -> Result<(Expr, Type), TransformError> {
        let raw = self.delta.raw[k].clone();
        let (arg_expr, arg_ty) = self.tr(env, arg)?;

        let (shape, key) = if raw.param_ty.is_arrow() {
            let shape = if arg_ty.is_propertied() {
                ArgShape::PropFunc
            } else {
                ArgShape::Func
            };
            let key = MonoKey::ByArgFunc {
                func: k.clone(),
                passed: arg_expr.clone(),
                arg_ty: arg_ty.clone(),
            };
            (shape, key)
        } else {
            let shape = if arg_ty.is_propertied() {
                ArgShape::Prop
            } else {
                ArgShape::Plain
            };
            let key = MonoKey::ByArgType {
                func: k.clone(),
                arg_ty: arg_ty.clone(),
            };
            (shape, key)
        };
        let family = match shape {
            ArgShape::Plain => "",
            ArgShape::Prop => "-Prop-1",
            ArgShape::PropFunc => "-Prop-2",
            ArgShape::Func => "-Func",
        };

        let (f, n) = match self.delta.mono_lookup(&key) {
            Some(hit) => {
                self.fire(app_rule("Ready", family));
                hit
            }
            None => {
                self.fire(app_rule("Compile", family));
                let (runtime_param, binding) = match shape {
                    ArgShape::Plain => {
                        let var = self.names.fresh(&raw.param);
                        let b = Binding::Plain {
                            var: var.clone(),
                            ty: arg_ty.clone(),
                        };
                        (var, b)
                    }
                    ArgShape::Prop => {
                        let var = self.names.fresh(&raw.param);
                        let b = Binding::Rewrite {
                            expr: Expr::propertied(Expr::var(var.clone())),
                            ty: arg_ty.clone(),
                        };
                        (var, b)
                    }
                    // Bound to nothing at runtime: the body was specialized
                    // to the passed function.
                    ArgShape::Func | ArgShape::PropFunc => (
                        raw.param.clone(),
                        Binding::Rewrite {
                            expr: arg_expr.clone(),
                            ty: arg_ty.clone(),
                        },
                    ),
                };
                self.compile(env, k, &raw, runtime_param, binding, key)?
            }
        };
        let result_ty = self.delta.monos[&(f.clone(), n)].result_ty.clone();

        let emitted = match shape {
            ArgShape::Plain => arg_expr,
            ArgShape::Prop => underlying(arg_expr, span)?,
            ArgShape::Func | ArgShape::PropFunc => {
                let passed = match &arg_expr.kind {
                    ExprKind::Propertied(inner) => inner.as_ref(),
                    _ => &arg_expr,
                };
                let ExprKind::Var(g) = &passed.kind else {
                    return err(
                        TransformErrorCode::UnknownFunc,
                        arg.span,
                        format!("`{passed}` does not name a known function"),
                    );
                };
                let g = g.clone();
                self.witness(env, &g, arg.span)?
            }
        };
        Ok((
            Expr::app(Expr::mono(f, n).with_span(span), emitted).with_span(span),
            result_ty,
        ))
    }

    /// The runtime stand-in for a function passed as an argument: its
    /// specialization at its declared parameter type. The callee's body
    /// never invokes it, since it was compiled against the function itself.
    fn witness(&mut self, env: &TransformEnv, g: &Ident, span: Span) -> Result<Expr, TransformError> {
        let Some(raw) = self.delta.raw.get(g).cloned() else {
            return err(
                TransformErrorCode::UnknownFunc,
                span,
                format!("`{g}` does not name a known function"),
            );
        };
        let key = MonoKey::ByArgType {
            func: g.clone(),
            arg_ty: raw.param_ty.clone(),
        };
        let (f, n) = match self.delta.mono_lookup(&key) {
            Some(hit) => hit,
            None => {
                let var = self.names.fresh(&raw.param);
                let b = Binding::Plain {
                    var: var.clone(),
                    ty: raw.param_ty.clone(),
                };
                self.compile(env, g, &raw, var, b, key)?
            }
        };
        Ok(Expr::mono(f, n).with_span(span))
    }

    fn compile(
        &mut self,
        caller: &TransformEnv,
        k: &Ident,
        raw: &RawFunc,
        runtime_param: Ident,
        binding: Binding,
        key: MonoKey,
    ) -> Result<(Ident, u32), TransformError> {
        if self.compiling.contains(k) {
            // Reached through a property payload; the specialization would
            // need itself to exist first.
            return err(
                TransformErrorCode::UnknownFunc,
                raw.body.span,
                format!("`{k}` is applied inside its own body through a property"),
            );
        }
        let def = self.def_envs.get(k).cloned().unwrap_or_default();
        let mut inherited = (*def.inherited).clone();
        inherited.extend(caller.live());
        let body_env = TransformEnv {
            scope: def.scope.extend(raw.param.clone(), binding),
            inherited: Rc::new(inherited),
        };
        self.compiling.push(k.clone());
        let body = self.tr(&body_env, &raw.body);
        self.compiling.pop();
        let (body, result_ty) = body?;
        let n = self.delta.fresh_index(k);
        self.delta.monos.insert(
            (k.clone(), n),
            Mono {
                param: runtime_param,
                param_ty: raw.param_ty.erase_properties(),
                body,
                result_ty: result_ty.erase_properties(),
            },
        );
        self.delta.cache.insert(key, (k.clone(), n));
        Ok((k.clone(), n))
    }

    /// A property expression is spliced where it is consumed; every variable
    /// it mentions must still be bound there.
    fn check_splice(&self, env: &TransformEnv, e: &Expr, span: Span) -> Result<(), TransformError> {
        let live = env.live();
        for x in free_vars(e) {
            if !live.contains(&x) && !self.delta.raw.contains_key(&x) {
                return err(
                    TransformErrorCode::SpliceScope,
                    span,
                    format!("property expression `{e}` mentions `{x}`, which is not in scope here"),
                );
            }
        }
        Ok(())
    }
}

fn underlying(e: Expr, span: Span) -> Result<Expr, TransformError> {
    match e.kind {
        ExprKind::Propertied(inner) => Ok(*inner),
        _ => err(
            TransformErrorCode::Internal,
            span,
            format!("expected a propertied value, found `{e}`"),
        ),
    }
}

fn rule_name(plus: bool, suffix: &str) -> &'static str {
    match (plus, suffix) {
        (true, "") => "R-P-Plus",
        (true, "-1") => "R-P-Plus-1",
        (true, "-2") => "R-P-Plus-2",
        (true, _) => "R-P-Plus-3",
        (false, "") => "R-P-Minus",
        (false, "-1") => "R-P-Minus-1",
        (false, "-2") => "R-P-Minus-2",
        (false, _) => "R-P-Minus-3",
    }
}

fn app_rule(stage: &str, family: &str) -> &'static str {
    match (stage, family) {
        ("Compile", "") => "R-App-Compile",
        ("Compile", "-Prop-1") => "R-App-Compile-Prop-1",
        ("Compile", "-Prop-2") => "R-App-Compile-Prop-2",
        ("Compile", _) => "R-App-Compile-Func",
        (_, "") => "R-App-Ready",
        (_, "-Prop-1") => "R-App-Ready-Prop-1",
        (_, "-Prop-2") => "R-App-Ready-Prop-2",
        _ => "R-App-Ready-Func",
    }
}

/// Every rule name the transformer can report.
pub const RULES: &[&str] = &[
    "R-V-Int",
    "R-V-Unit",
    "R-V-Func",
    "R-S-Var",
    "R-Func",
    "R-Set-1",
    "R-Set-2",
    "R-Set-3",
    "R-Get",
    "R-Ext",
    "R-Erase",
    "R-If-Has-1",
    "R-If-Has-2",
    "R-If-Has-3",
    "R-If-Has-4",
    "R-If-Has-5",
    "R-App-Compile",
    "R-App-Ready",
    "R-App-Compile-Prop-1",
    "R-App-Ready-Prop-1",
    "R-App-Compile-Prop-2",
    "R-App-Ready-Prop-2",
    "R-App-Compile-Func",
    "R-App-Ready-Func",
    "R-App-Compiled",
    "R-Let-Prop-1",
    "R-Let-Prop-2",
    "R-Let-Func",
    "R-P-Let",
    "R-P-Plus",
    "R-P-Plus-1",
    "R-P-Plus-2",
    "R-P-Plus-3",
    "R-P-Minus",
    "R-P-Minus-1",
    "R-P-Minus-2",
    "R-P-Minus-3",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;
    use crate::pretty::delta_lines;

    const CLOSURE: &str = "let y = 5 in\n  func f x : int with\n    x + y in\n  f 1\n";
    const DISPATCH: &str = "func f x : int with
    if-has x c : int bind-as c in
        c + 1
    else extract(x) in
  let y = set(5, c, 5) in
  f y";

    fn run(src: &str) -> Result<TransformResult, TransformError> {
        transform_program(&parse_program(src).unwrap())
    }

    #[test]
    fn closure_example() {
        let r = run(CLOSURE).unwrap();
        assert_eq!(r.expr.to_string(), "let y = 5 in f[1] 1");
        assert_eq!(r.ty, Type::Int);
        assert_eq!(
            delta_lines(&r.delta),
            ["f :: x : int . x + y : int", "f[1] ▷ x : int . x + y : int"]
        );
    }

    #[test]
    fn dispatch_example() {
        let r = run(DISPATCH).unwrap();
        assert_eq!(r.expr.to_string(), "let y = 5 in f[1] y");
        let m = &r.delta.monos[&("f".to_string(), 1)];
        assert_eq!(m.body.to_string(), "let c = 5 in c + 1");
        assert_eq!(m.result_ty, Type::Int);
        assert_eq!(r.delta.monos.len(), 1);
    }

    #[test]
    fn set_on_a_literal() {
        let r = run("set(5, c, 5)").unwrap();
        assert_eq!(r.expr, Expr::propertied(Expr::int(5)));
        let expected =
            Type::propertied(Type::Int, vec![Property::new("c", Expr::int(5), Type::Int)]).unwrap();
        assert_eq!(r.ty, expected);
    }

    #[test]
    fn literals_transform_to_themselves() {
        let r = run("7").unwrap();
        assert_eq!((r.expr, r.ty), (Expr::int(7), Type::Int));
        assert!(r.delta.raw.is_empty() && r.delta.monos.is_empty());
    }

    #[test]
    fn get_splices_the_stored_expression_unevaluated() {
        let r = run("get(set(1, p, 3 + 4), p)").unwrap();
        assert_eq!(r.expr.to_string(), "3 + 4");
    }

    #[test]
    fn equal_propertied_arguments_share_a_monomorphization() {
        let src = "func f x : int with x + 1 in
            let a = set(1, c, 5) in let b = set(2, c, 5) in f a + f b";
        let r = run(src).unwrap();
        assert_eq!(r.delta.monos_of("f").count(), 1);
        let src = "func f x : int with x + 1 in
            let a = set(1, c, 5) in let b = set(2, c, 6) in f a + f b";
        let r = run(src).unwrap();
        assert_eq!(r.delta.monos_of("f").count(), 2);
    }

    #[test]
    fn later_binders_are_renamed_apart() {
        let src = "let y = 5 in func f x : int with x + y in let y = 10 in f 1";
        let r = run(src).unwrap();
        assert_eq!(r.expr.to_string(), "let y = 5 in let y_1 = 10 in f[1] 1");
        let src = "func f x : int with x in func f x : int with x + 1 in f 2";
        let r = run(src).unwrap();
        assert_eq!(r.expr.to_string(), "f_1[1] 2");
        assert_eq!(r.delta.raw.len(), 2);
    }

    #[test]
    fn if_has_on_a_plain_value_takes_the_else_branch() {
        let r = run("let v = 3 in if-has v p : int bind-as b in b else extract(v) + 1").unwrap();
        assert_eq!(r.expr.to_string(), "let v = 3 in v + 1");
    }

    #[test]
    fn if_has_with_the_wrong_property_type_takes_the_else_branch() {
        let r = run("let v = set(3, p, ()) in if-has v p : int bind-as b in b else extract(v)")
            .unwrap();
        assert_eq!(r.expr.to_string(), "let v = 3 in v");
    }

    #[test]
    fn the_scrutinee_shadows_a_bind_as_of_the_same_name() {
        let src = "let v = set(set(3, p, 1), q, 2) in
            if-has v p : int bind-as v in extract(v) + get(v, p) else 0";
        let e = parse_program(src).unwrap();
        let r = transform_program(&e).unwrap();
        assert_eq!(r.expr.to_string(), "let v = 3 in let v_1 = 1 in v + 1");
        let src = "let v = set(set(3, p, 1), q, 2) in
            get(if-has v p : int bind-as b in set(erase(v, p), r, 0) else set(v, r, 0), q)";
        let e = parse_program(src).unwrap();
        assert!(crate::typecheck::check_program(&e).is_ok());
        let r = transform_program(&e).unwrap();
        assert_eq!(r.expr.to_string(), "let v = 3 in 2");
    }

    #[test]
    fn function_payloads_are_rewritten_not_bound() {
        let src = "func inc y : int with y + 1 in
            let v = set(3, op, inc) in
            if-has v op : int -> int bind-as g in g 10 else 0";
        let r = run(src).unwrap();
        assert_eq!(r.expr.to_string(), "let v = 3 in inc[1] 10");
    }

    #[test]
    fn function_arguments_specialize_the_callee() {
        let src = "func inc y : int with y + 1 in
            func twice h : int -> int with h (h 0) in
            twice inc";
        let r = run(src).unwrap();
        assert_eq!(r.expr.to_string(), "twice[1] inc[1]");
        let m = &r.delta.monos[&("twice".to_string(), 1)];
        assert_eq!(m.body.to_string(), "inc[1] (inc[1] 0)");
    }

    #[test]
    fn propertied_functions_flow_through_lets_and_calls() {
        let src = "func inc y : int with y + 1 in
            func apply h : int -> int with
              if-has h n : int bind-as k in extract(h) k else extract(h) 0 in
            let pf = set(inc, n, 41) in
            apply pf";
        let (r, stats) = transform_program_with_stats(&parse_program(src).unwrap()).unwrap();
        assert_eq!(r.expr.to_string(), "apply[1] inc[1]");
        let m = &r.delta.monos[&("apply".to_string(), 1)];
        assert_eq!(m.body.to_string(), "let k = 41 in inc[1] k");
        assert_eq!(stats["R-Let-Prop-2"], 1);
        assert_eq!(stats["R-App-Compile-Prop-2"], 1);
    }

    #[test]
    fn plus_variants_unwrap_propertied_operands() {
        let src = "let a = set(1, p, 0) in let b = set(2, p, 0) in a + b + 3 - b";
        let (r, stats) = transform_program_with_stats(&parse_program(src).unwrap()).unwrap();
        assert_eq!(r.expr.to_string(), "let a = 1 in let b = 2 in a + b + 3 - b");
        assert_eq!(stats["R-P-Plus-1"], 1);
        assert_eq!(stats["R-P-Plus"], 1);
        assert_eq!(stats["R-P-Minus-3"], 1);
    }

    #[test]
    fn erase_and_update_keep_the_underlying_value() {
        let r = run("let v = set(set(7, p, 1), q, 2) in get(set(erase(v, p), q, 9), q) + extract(v)")
            .unwrap();
        assert_eq!(r.expr.to_string(), "let v = 7 in 9 + v");
    }

    #[test]
    fn out_of_scope_splices_are_rejected() {
        let env = TransformEnv::new().bind(
            "v",
            Binding::Rewrite {
                expr: Expr::propertied(Expr::int(1)),
                ty: Type::propertied(
                    Type::Int,
                    vec![Property::new("p", Expr::var("gone"), Type::Int)],
                )
                .unwrap(),
            },
        );
        let e = parse_program("get(v, p)").unwrap();
        let err = transform(&env, &FuncCtx::new(), &e).unwrap_err();
        assert_eq!(err.code, TransformErrorCode::SpliceScope);
    }

    #[test]
    fn compiled_references_transform_their_argument_only() {
        let r = run(CLOSURE).unwrap();
        let e = Expr::app(Expr::mono("f", 1), Expr::get(Expr::set(Expr::int(1), "p", Expr::int(4)), "p"));
        let env = TransformEnv::new().bind(
            "y",
            Binding::Plain {
                var: "y".into(),
                ty: Type::Int,
            },
        );
        let out = transform(&env, &r.delta, &e).unwrap();
        assert_eq!(out.expr.to_string(), "f[1] 4");
        assert_eq!(out.delta.monos.len(), 1);
    }

    #[test]
    fn self_application_through_a_property_is_rejected() {
        let src = "func h x : int with
              if-has x p : int -> int bind-as k in k x else 0 in
            h (set(6, p, h))";
        let e = parse_program(src).unwrap();
        assert!(crate::typecheck::check_program(&e).is_ok());
        assert_eq!(
            transform_program(&e).unwrap_err().code,
            TransformErrorCode::UnknownFunc
        );
    }

    #[test]
    fn unknown_callees_are_reported() {
        let env = TransformEnv::new().bind(
            "h",
            Binding::Plain {
                var: "h".into(),
                ty: Type::arrow(Type::Int, Type::Int),
            },
        );
        let err = transform(&env, &FuncCtx::new(), &parse_program("h 1").unwrap()).unwrap_err();
        assert_eq!(err.code, TransformErrorCode::UnknownFunc);
    }

    #[test]
    fn deterministic() {
        let e = parse_program(DISPATCH).unwrap();
        assert_eq!(transform_program(&e), transform_program(&e));
    }
}
