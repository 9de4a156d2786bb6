//! Small-step execution of transformed programs.
//!
//! A configuration is a store σ and an expression. Function bodies are looked
//! up in Φ, the type-erased view of Δ's monomorphizations. Variables resolve
//! dynamically against σ, most recent binding first.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::ast::{free_vars, Expr, ExprKind, FuncCtx, Ident, Type};
use crate::scope::Scope;
use crate::transform::TransformResult;
use crate::typecheck::{self, TypeError};

pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuntimeErrorCode {
    Stuck,
    Overflow,
    MaxSteps,
    Unready,
}

impl RuntimeErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            RuntimeErrorCode::Stuck => "R-STUCK",
            RuntimeErrorCode::Overflow => "R-OVERFLOW",
            RuntimeErrorCode::MaxSteps => "R-MAX-STEPS",
            RuntimeErrorCode::Unready => "R-UNREADY",
        }
    }
}

impl fmt::Display for RuntimeErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("error[{code}]: {message}")]
pub struct RuntimeError {
    pub code: RuntimeErrorCode,
    pub message: String,
}

fn fail<T>(code: RuntimeErrorCode, message: impl Into<String>) -> Result<T, RuntimeError> {
    Err(RuntimeError {
        code,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Unit,
    Func(Ident, u32),
}

impl Value {
    pub fn to_expr(&self) -> Expr {
        match self {
            Value::Int(n) => Expr::int(*n),
            Value::Unit => Expr::unit(),
            Value::Func(f, n) => Expr::mono(f.clone(), *n),
        }
    }

    pub fn ty(&self, delta: &FuncCtx) -> Option<Type> {
        match self {
            Value::Int(_) => Some(Type::Int),
            Value::Unit => Some(Type::Unit),
            Value::Func(f, n) => delta
                .monos
                .get(&(f.clone(), *n))
                .map(|m| Type::arrow(m.param_ty.clone(), m.result_ty.clone())),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Unit => f.write_str("()"),
            Value::Func(g, n) => write!(f, "{g}[{n}]"),
        }
    }
}

/// Φ: `f[n] :: x ⊗ M` for every monomorphization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuntimeCtx {
    funcs: HashMap<(Ident, u32), (Ident, Expr)>,
}

impl RuntimeCtx {
    pub fn from_delta(delta: &FuncCtx) -> Self {
        let funcs = delta
            .monos
            .iter()
            .map(|(k, m)| (k.clone(), (m.param.clone(), m.body.clone())))
            .collect();
        RuntimeCtx { funcs }
    }

    pub fn get(&self, f: &str, n: u32) -> Option<(&Ident, &Expr)> {
        self.funcs.get(&(f.to_string(), n)).map(|(x, b)| (x, b))
    }

    pub fn contains(&self, f: &str, n: u32) -> bool {
        self.get(f, n).is_some()
    }

    pub fn len(&self) -> usize {
        self.funcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.funcs.is_empty()
    }
}

/// σ, oldest binding first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Store {
    entries: Vec<(Ident, Value)>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lookup(&self, x: &str) -> Option<&Value> {
        self.entries.iter().rev().find(|(n, _)| n == x).map(|(_, v)| v)
    }

    pub fn push(&mut self, x: impl Into<Ident>, v: Value) {
        self.entries.push((x.into(), v));
    }

    /// Replaces the most recent binding of `x`, returning the old value.
    pub fn rebind(&mut self, x: &str, v: Value) -> Option<Value> {
        let slot = self.entries.iter_mut().rev().find(|(n, _)| n == x)?;
        Some(std::mem::replace(&mut slot.1, v))
    }

    /// Removes the most recent binding of `x`.
    pub fn remove(&mut self, x: &str) -> Option<Value> {
        let i = self.entries.iter().rposition(|(n, _)| n == x)?;
        Some(self.entries.remove(i).1)
    }

    pub fn entries(&self) -> &[(Ident, Value)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

impl fmt::Display for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("⟨")?;
        for (i, (x, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} ↪ {v}")?;
        }
        f.write_str("⟩")
    }
}

/// The Ready gate: only property-free, first-order results run.
pub fn ready(tr: &TransformResult) -> Result<(RuntimeCtx, Expr), RuntimeError> {
    if tr.ty.is_propertied() {
        return fail(
            RuntimeErrorCode::Unready,
            format!("program has propertied type `{}`", tr.ty),
        );
    }
    if tr.ty.is_arrow() {
        return fail(
            RuntimeErrorCode::Unready,
            format!("program has function type `{}`", tr.ty),
        );
    }
    let phi = RuntimeCtx::from_delta(&tr.delta);
    check_runtime_form(&phi, &tr.expr)?;
    for ((f, n), m) in &tr.delta.monos {
        check_runtime_form(&phi, &m.body).map_err(|e| RuntimeError {
            message: format!("in {f}[{n}]: {}", e.message),
            ..e
        })?;
    }
    if let Some(x) = free_vars(&tr.expr).into_iter().next() {
        return fail(
            RuntimeErrorCode::Unready,
            format!("`{x}` is not bound by the program"),
        );
    }
    Ok((phi, tr.expr.clone()))
}

fn check_runtime_form(phi: &RuntimeCtx, e: &Expr) -> Result<(), RuntimeError> {
    use ExprKind::*;
    match &e.kind {
        Int(_) | Unit | Var(_) => {}
        MonoRef(f, n) => {
            if !phi.contains(f, *n) {
                return fail(RuntimeErrorCode::Unready, format!("`{f}[{n}]` is not in Φ"));
            }
        }
        App(..) | Plus(..) | Minus(..) | Let { .. } | DropAfter(..) | RetrieveAfter(..) => {}
        _ => {
            return fail(
                RuntimeErrorCode::Unready,
                format!("`{e}` is not a runtime expression"),
            )
        }
    }
    e.children()
        .into_iter()
        .try_for_each(|c| check_runtime_form(phi, c))
}

pub fn is_value(phi: &RuntimeCtx, e: &Expr) -> bool {
    as_value(phi, e).is_some()
}

pub fn as_value(phi: &RuntimeCtx, e: &Expr) -> Option<Value> {
    match &e.kind {
        ExprKind::Int(n) => Some(Value::Int(*n)),
        ExprKind::Unit => Some(Value::Unit),
        ExprKind::MonoRef(f, n) if phi.contains(f, *n) => Some(Value::Func(f.clone(), *n)),
        _ => None,
    }
}

/// One transition. Returns the successor and the name of the rule that
/// fired at the redex.
pub fn step(
    phi: &RuntimeCtx,
    sigma: &mut Store,
    e: &Expr,
) -> Result<(Expr, &'static str), RuntimeError> {
    use ExprKind::*;
    let span = e.span;
    let rebuild = |kind: ExprKind| Expr::new(kind, span);
    match &e.kind {
        Var(x) => match sigma.lookup(x) {
            Some(v) => Ok((v.to_expr(), "Var")),
            None => fail(RuntimeErrorCode::Stuck, format!("`{x}` is not in the store")),
        },
        App(callee, arg) => {
            if !is_value(phi, callee) {
                let (c, rule) = step(phi, sigma, callee)?;
                return Ok((rebuild(App(Box::new(c), arg.clone())), rule));
            }
            if !is_value(phi, arg) {
                let (a, rule) = step(phi, sigma, arg)?;
                return Ok((rebuild(App(callee.clone(), Box::new(a))), rule));
            }
            let MonoRef(f, n) = &callee.kind else {
                return fail(RuntimeErrorCode::Stuck, format!("`{callee}` is not a function"));
            };
            let (param, body) = phi.get(f, *n).expect("callee is a value");
            let v = as_value(phi, arg).expect("argument is a value");
            if let Value::Func(..) = v {
                return Ok((body.clone(), "App-With-Func"));
            }
            bind(sigma, param, v, body.clone(), "App-1", "App-2")
        }
        Plus(l, r) | Minus(l, r) => {
            let plus = matches!(e.kind, Plus(..));
            if !is_value(phi, l) {
                let (l2, rule) = step(phi, sigma, l)?;
                let kind = if plus {
                    Plus(Box::new(l2), r.clone())
                } else {
                    Minus(Box::new(l2), r.clone())
                };
                return Ok((rebuild(kind), rule));
            }
            if !is_value(phi, r) {
                let (r2, rule) = step(phi, sigma, r)?;
                let kind = if plus {
                    Plus(l.clone(), Box::new(r2))
                } else {
                    Minus(l.clone(), Box::new(r2))
                };
                return Ok((rebuild(kind), rule));
            }
            let (Int(a), Int(b)) = (&l.kind, &r.kind) else {
                return fail(RuntimeErrorCode::Stuck, format!("`{e}` adds non-integers"));
            };
            let (out, rule) = if plus {
                (a.checked_add(*b), "Plus")
            } else {
                (a.checked_sub(*b), "Minus")
            };
            match out {
                Some(n) => Ok((Expr::int(n).with_span(span), rule)),
                None => fail(
                    RuntimeErrorCode::Overflow,
                    format!("`{e}` overflows 64-bit integers"),
                ),
            }
        }
        Let { name, bound, body } => {
            if !is_value(phi, bound) {
                let (b, rule) = step(phi, sigma, bound)?;
                return Ok((
                    rebuild(Let {
                        name: name.clone(),
                        bound: Box::new(b),
                        body: body.clone(),
                    }),
                    rule,
                ));
            }
            let v = as_value(phi, bound).expect("bound is a value");
            bind(sigma, name, v, (**body).clone(), "Let-1", "Let-2")
        }
        DropAfter(x, body) => {
            if !is_value(phi, body) {
                let (b, rule) = step(phi, sigma, body)?;
                return Ok((rebuild(DropAfter(x.clone(), Box::new(b))), rule));
            }
            match sigma.remove(x) {
                Some(_) => Ok(((**body).clone(), "Drop-After-2")),
                None => fail(RuntimeErrorCode::Stuck, format!("cannot drop unbound `{x}`")),
            }
        }
        RetrieveAfter(x, saved, body) => {
            if !is_value(phi, body) {
                let (b, rule) = step(phi, sigma, body)?;
                return Ok((
                    rebuild(RetrieveAfter(x.clone(), saved.clone(), Box::new(b))),
                    rule,
                ));
            }
            let Some(v) = as_value(phi, saved) else {
                return fail(RuntimeErrorCode::Stuck, format!("`{saved}` is not a value"));
            };
            match sigma.rebind(x, v) {
                Some(_) => Ok(((**body).clone(), "Retrieve-After-2")),
                None => fail(
                    RuntimeErrorCode::Stuck,
                    format!("cannot restore unbound `{x}`"),
                ),
            }
        }
        Int(_) | Unit | MonoRef(..) => fail(
            RuntimeErrorCode::Stuck,
            format!("`{e}` is not a value and cannot step"),
        ),
        _ => fail(
            RuntimeErrorCode::Stuck,
            format!("`{e}` is not a runtime expression"),
        ),
    }
}

fn bind(
    sigma: &mut Store,
    x: &Ident,
    v: Value,
    body: Expr,
    fresh_rule: &'static str,
    shadow_rule: &'static str,
) -> Result<(Expr, &'static str), RuntimeError> {
    match sigma.rebind(x, v.clone()) {
        None => {
            sigma.push(x.clone(), v);
            Ok((Expr::drop_after(x.clone(), body), fresh_rule))
        }
        Some(prev) => Ok((
            Expr::retrieve_after(x.clone(), prev.to_expr(), body),
            shadow_rule,
        )),
    }
}

/// One executed transition, as observed by a trace.
#[derive(Debug, Clone)]
pub struct Transition<'a> {
    pub before: &'a Store,
    pub from: &'a Expr,
    pub rule: &'static str,
    pub after: &'a Store,
    pub to: &'a Expr,
}

impl fmt::Display for Transition<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ; {}  --{}-->  {} ; {}",
            self.before, self.from, self.rule, self.after, self.to
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub value: Value,
    pub steps: usize,
}

/// Steps `e` to a value, calling `observe` after every transition.
pub fn run_observed(
    phi: &RuntimeCtx,
    e: &Expr,
    max_steps: usize,
    mut observe: impl FnMut(&Transition<'_>),
) -> Result<Outcome, RuntimeError> {
    let mut sigma = Store::new();
    let mut cur = e.clone();
    let mut steps = 0;
    while !is_value(phi, &cur) {
        if steps >= max_steps {
            return fail(
                RuntimeErrorCode::MaxSteps,
                format!("no value after {max_steps} steps"),
            );
        }
        let before = sigma.clone();
        let (next, rule) = step(phi, &mut sigma, &cur)?;
        observe(&Transition {
            before: &before,
            from: &cur,
            rule,
            after: &sigma,
            to: &next,
        });
        cur = next;
        steps += 1;
    }
    if !sigma.is_empty() {
        return fail(
            RuntimeErrorCode::Stuck,
            format!("store {sigma} is not empty at the end of the run"),
        );
    }
    let value = as_value(phi, &cur).expect("loop ends on a value");
    Ok(Outcome { value, steps })
}

pub fn run(phi: &RuntimeCtx, e: &Expr, max_steps: usize) -> Result<Value, RuntimeError> {
    run_observed(phi, e, max_steps, |_| {}).map(|o| o.value)
}

/// Types a configuration: the store supplies the variable types and Δ the
/// signatures of monomorphizations.
pub fn config_type(delta: &FuncCtx, sigma: &Store, e: &Expr) -> Result<Type, TypeError> {
    let env: Scope<Type> = sigma
        .entries()
        .iter()
        .filter_map(|(x, v)| v.ty(delta).map(|t| (x.clone(), t)))
        .collect();
    typecheck::infer_runtime(&env, delta, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Mono;

    fn closure_delta() -> FuncCtx {
        let mut d = FuncCtx::new();
        d.monos.insert(
            ("f".into(), 1),
            Mono {
                param: "x".into(),
                param_ty: Type::Int,
                body: Expr::plus(Expr::var("x"), Expr::var("y")),
                result_ty: Type::Int,
            },
        );
        d
    }

    fn closure_program() -> Expr {
        Expr::let_in("y", Expr::int(5), Expr::app(Expr::mono("f", 1), Expr::int(1)))
    }

    #[test]
    fn application_binds_the_parameter() {
        let phi = RuntimeCtx::from_delta(&closure_delta());
        let mut sigma = Store::new();
        sigma.push("y", Value::Int(5));
        let (e, rule) = step(&phi, &mut sigma, &Expr::app(Expr::mono("f", 1), Expr::int(1))).unwrap();
        assert_eq!(rule, "App-1");
        assert_eq!(e.to_string(), "drop x after x + y");
        assert_eq!(sigma.to_string(), "⟨y ↪ 5, x ↪ 1⟩");
    }

    #[test]
    fn drop_removes_the_binding() {
        let phi = RuntimeCtx::default();
        let mut sigma = Store::new();
        sigma.push("y", Value::Int(5));
        sigma.push("x", Value::Int(1));
        let (e, rule) = step(&phi, &mut sigma, &Expr::drop_after("x", Expr::int(6))).unwrap();
        assert_eq!((e, rule), (Expr::int(6), "Drop-After-2"));
        assert_eq!(sigma.to_string(), "⟨y ↪ 5⟩");
    }

    #[test]
    fn addition_of_literals() {
        let phi = RuntimeCtx::default();
        let mut sigma = Store::new();
        let (e, rule) = step(&phi, &mut sigma, &Expr::plus(Expr::int(1), Expr::int(5))).unwrap();
        assert_eq!((e, rule), (Expr::int(6), "Plus"));
        assert!(sigma.is_empty());
    }

    #[test]
    fn retrieve_restores_the_saved_value() {
        let phi = RuntimeCtx::default();
        let mut sigma = Store::new();
        sigma.push("x", Value::Int(1));
        let e = Expr::retrieve_after("x", Expr::int(9), Expr::int(2));
        let (e, rule) = step(&phi, &mut sigma, &e).unwrap();
        assert_eq!((e, rule), (Expr::int(2), "Retrieve-After-2"));
        assert_eq!(sigma.lookup("x"), Some(&Value::Int(9)));
    }

    #[test]
    fn shadowing_let_saves_and_restores() {
        let phi = RuntimeCtx::default();
        let e = Expr::let_in(
            "x",
            Expr::int(1),
            Expr::plus(Expr::let_in("x", Expr::int(2), Expr::var("x")), Expr::var("x")),
        );
        let mut rules = Vec::new();
        let out = run_observed(&phi, &e, 100, |t| rules.push(t.rule)).unwrap();
        assert_eq!(out.value, Value::Int(3));
        assert!(rules.contains(&"Let-2") && rules.contains(&"Retrieve-After-2"));
    }

    #[test]
    fn closure_program_runs_to_six() {
        let phi = RuntimeCtx::from_delta(&closure_delta());
        assert_eq!(run(&phi, &closure_program(), 100), Ok(Value::Int(6)));
    }

    #[test]
    fn values() {
        let phi = RuntimeCtx::from_delta(&closure_delta());
        assert!(is_value(&phi, &Expr::int(6)));
        assert!(is_value(&phi, &Expr::unit()));
        assert!(is_value(&phi, &Expr::mono("f", 1)));
        assert!(!is_value(&phi, &Expr::mono("f", 2)));
        assert!(!is_value(&phi, &Expr::var("x")));
    }

    #[test]
    fn function_arguments_bind_nothing() {
        let mut d = closure_delta();
        d.monos.insert(
            ("g".into(), 1),
            Mono {
                param: "h".into(),
                param_ty: Type::arrow(Type::Int, Type::Int),
                body: Expr::app(Expr::mono("f", 1), Expr::int(2)),
                result_ty: Type::Int,
            },
        );
        let phi = RuntimeCtx::from_delta(&d);
        let mut sigma = Store::new();
        let e = Expr::app(Expr::mono("g", 1), Expr::mono("f", 1));
        let (next, rule) = step(&phi, &mut sigma, &e).unwrap();
        assert_eq!(rule, "App-With-Func");
        assert_eq!(next.to_string(), "f[1] 2");
        assert!(sigma.is_empty());
    }

    #[test]
    fn errors() {
        let phi = RuntimeCtx::default();
        let big = Expr::plus(Expr::int(i64::MAX), Expr::int(1));
        assert_eq!(run(&phi, &big, 10).unwrap_err().code, RuntimeErrorCode::Overflow);
        let small = Expr::minus(Expr::int(i64::MIN), Expr::int(1));
        assert_eq!(run(&phi, &small, 10).unwrap_err().code, RuntimeErrorCode::Overflow);
        let open = Expr::var("nowhere");
        assert_eq!(run(&phi, &open, 10).unwrap_err().code, RuntimeErrorCode::Stuck);
        let long = Expr::plus(Expr::plus(Expr::int(1), Expr::int(1)), Expr::int(1));
        assert_eq!(run(&phi, &long, 1).unwrap_err().code, RuntimeErrorCode::MaxSteps);
        assert_eq!(run(&phi, &Expr::unit(), 0), Ok(Value::Unit));
    }

    #[test]
    fn ready_rejects_propertied_and_unknown_references() {
        let tr = TransformResult {
            delta: FuncCtx::new(),
            expr: Expr::propertied(Expr::int(5)),
            ty: Type::propertied(Type::Int, vec![]).unwrap(),
        };
        assert_eq!(ready(&tr).unwrap_err().code, RuntimeErrorCode::Unready);
        let tr = TransformResult {
            delta: FuncCtx::new(),
            expr: Expr::app(Expr::mono("f", 1), Expr::int(1)),
            ty: Type::Int,
        };
        assert_eq!(ready(&tr).unwrap_err().code, RuntimeErrorCode::Unready);
        let tr = TransformResult {
            delta: closure_delta(),
            expr: closure_program(),
            ty: Type::Int,
        };
        let (phi, e) = ready(&tr).unwrap();
        assert_eq!(phi.len(), 1);
        assert_eq!(e, closure_program());
    }

    #[test]
    fn every_step_keeps_the_configuration_type() {
        let delta = closure_delta();
        let phi = RuntimeCtx::from_delta(&delta);
        let mut types = Vec::new();
        run_observed(&phi, &closure_program(), 100, |t| {
            types.push(config_type(&delta, t.after, t.to).unwrap());
        })
        .unwrap();
        assert!(types.iter().all(|t| *t == Type::Int));
    }
}
