//! Reference evaluator for transformed programs.
//!
//! Big-step and substitution based: a `let` substitutes its value into the
//! body, and applying `f[n]` substitutes the argument into the body fetched
//! from Δ. Free variables of monomorphization bodies refer to whatever binding
//! is active at the call, so every binding is also pushed on a dynamic stack
//! for the duration of its body.

use thiserror::Error;

use crate::ast::{Expr, ExprKind, FuncCtx, Ident};
use crate::runtime::Value;
use crate::transform::TransformResult;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("arithmetic overflow")]
    Overflow,
    #[error("unbound variable `{0}`")]
    Unbound(Ident),
    #[error("`{0}` is not a function")]
    NotAFunction(String),
    #[error("operand `{0}` is not an integer")]
    NotAnInteger(String),
    #[error("`{0}` is not part of the runtime language")]
    Unsupported(String),
}

pub fn oracle_eval(tr: &TransformResult) -> Result<Value, OracleError> {
    Oracle {
        delta: &tr.delta,
        dynamic: Vec::new(),
    }
    .eval(&tr.expr)
}

struct Oracle<'a> {
    delta: &'a FuncCtx,
    dynamic: Vec<(Ident, Value)>,
}

impl Oracle<'_> {
    fn eval(&mut self, e: &Expr) -> Result<Value, OracleError> {
        use ExprKind::*;
        match &e.kind {
            Int(n) => Ok(Value::Int(*n)),
            Unit => Ok(Value::Unit),
            MonoRef(f, n) if self.delta.monos.contains_key(&(f.clone(), *n)) => {
                Ok(Value::Func(f.clone(), *n))
            }
            Var(x) => self
                .dynamic
                .iter()
                .rev()
                .find(|(y, _)| y == x)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| OracleError::Unbound(x.clone())),
            Plus(l, r) | Minus(l, r) => {
                let a = self.int(l)?;
                let b = self.int(r)?;
                let out = if matches!(e.kind, Plus(..)) {
                    a.checked_add(b)
                } else {
                    a.checked_sub(b)
                };
                out.map(Value::Int).ok_or(OracleError::Overflow)
            }
            Let { name, bound, body } => {
                let v = self.eval(bound)?;
                let body = subst(body, name, &v);
                self.scoped(name, v, &body)
            }
            App(callee, arg) => {
                let f = self.eval(callee)?;
                let a = self.eval(arg)?;
                let Value::Func(g, n) = f else {
                    return Err(OracleError::NotAFunction(callee.to_string()));
                };
                let mono = &self.delta.monos[&(g, n)];
                if let Value::Func(..) = a {
                    return self.eval(&mono.body);
                }
                let body = subst(&mono.body, &mono.param, &a);
                let param = mono.param.clone();
                self.scoped(&param, a, &body)
            }
            DropAfter(_, body) => self.eval(body),
            RetrieveAfter(_, _, body) => self.eval(body),
            _ => Err(OracleError::Unsupported(e.to_string())),
        }
    }

    fn int(&mut self, e: &Expr) -> Result<i64, OracleError> {
        match self.eval(e)? {
            Value::Int(n) => Ok(n),
            _ => Err(OracleError::NotAnInteger(e.to_string())),
        }
    }

    fn scoped(&mut self, x: &Ident, v: Value, body: &Expr) -> Result<Value, OracleError> {
        self.dynamic.push((x.clone(), v));
        let out = self.eval(body);
        self.dynamic.pop();
        out
    }
}

fn value_expr(v: &Value) -> Expr {
    match v {
        Value::Int(n) => Expr::int(*n),
        Value::Unit => Expr::unit(),
        Value::Func(f, n) => Expr::mono(f.clone(), *n),
    }
}

/// `e[v/x]`. Values are closed, so nothing can be captured.
fn subst(e: &Expr, x: &str, v: &Value) -> Expr {
    use ExprKind::*;
    let s = |e: &Expr| Box::new(subst(e, x, v));
    let kind = match &e.kind {
        Var(y) if y == x => return value_expr(v),
        Int(_) | Unit | Var(_) | MonoRef(..) => return e.clone(),
        Plus(l, r) => Plus(s(l), s(r)),
        Minus(l, r) => Minus(s(l), s(r)),
        App(f, a) => App(s(f), s(a)),
        Let { name, bound, body } => Let {
            name: name.clone(),
            bound: s(bound),
            body: if name == x { body.clone() } else { s(body) },
        },
        DropAfter(y, body) => DropAfter(y.clone(), s(body)),
        RetrieveAfter(y, saved, body) => RetrieveAfter(y.clone(), s(saved), s(body)),
        _ => return e.clone(),
    };
    Expr::new(kind, e.span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Mono, Type};

    fn program(expr: Expr, delta: FuncCtx) -> TransformResult {
        TransformResult {
            delta,
            expr,
            ty: Type::Int,
        }
    }

    #[test]
    fn closure_program() {
        let mut delta = FuncCtx::new();
        delta.monos.insert(
            ("f".into(), 1),
            Mono {
                param: "x".into(),
                param_ty: Type::Int,
                body: Expr::plus(Expr::var("x"), Expr::var("y")),
                result_ty: Type::Int,
            },
        );
        let e = Expr::let_in("y", Expr::int(5), Expr::app(Expr::mono("f", 1), Expr::int(1)));
        assert_eq!(oracle_eval(&program(e, delta)), Ok(Value::Int(6)));
    }

    #[test]
    fn literals_and_arithmetic() {
        let sum = Expr::plus(Expr::int(1), Expr::int(5));
        assert_eq!(oracle_eval(&program(sum, FuncCtx::new())), Ok(Value::Int(6)));
        assert_eq!(oracle_eval(&program(Expr::unit(), FuncCtx::new())), Ok(Value::Unit));
        let big = Expr::minus(Expr::int(i64::MIN), Expr::int(1));
        assert_eq!(oracle_eval(&program(big, FuncCtx::new())), Err(OracleError::Overflow));
    }

    #[test]
    fn inner_lets_shadow() {
        let e = Expr::let_in(
            "x",
            Expr::int(1),
            Expr::plus(Expr::let_in("x", Expr::int(2), Expr::var("x")), Expr::var("x")),
        );
        assert_eq!(oracle_eval(&program(e, FuncCtx::new())), Ok(Value::Int(3)));
    }
}
