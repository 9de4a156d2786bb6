//! Syntax-directed type inference.
//!
//! Functions are checked twice, once with the parameter at its declared type
//! and once at the empty propertied type over it, and both passes must agree.
//! Arguments of a propertied type are accepted wherever their base type is.

use std::fmt;

use thiserror::Error;

use crate::ast::{Expr, ExprKind, FuncCtx, Property, Span, Type};
use crate::scope::Scope;

pub type TypeEnv = Scope<Type>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeErrorCode {
    UndefVar,
    Mismatch,
    NotFunc,
    NotPropertied,
    NoProp,
    DupProp,
    RetPropertied,
    RetFunc,
    IfHasScrutinee,
}

impl TypeErrorCode {
    pub const ALL: [TypeErrorCode; 9] = [
        TypeErrorCode::UndefVar,
        TypeErrorCode::Mismatch,
        TypeErrorCode::NotFunc,
        TypeErrorCode::NotPropertied,
        TypeErrorCode::NoProp,
        TypeErrorCode::DupProp,
        TypeErrorCode::RetPropertied,
        TypeErrorCode::RetFunc,
        TypeErrorCode::IfHasScrutinee,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TypeErrorCode::UndefVar => "E-UNDEF-VAR",
            TypeErrorCode::Mismatch => "E-MISMATCH",
            TypeErrorCode::NotFunc => "E-NOT-FUNC",
            TypeErrorCode::NotPropertied => "E-NOT-PROPERTIED",
            TypeErrorCode::NoProp => "E-NO-PROP",
            TypeErrorCode::DupProp => "E-DUP-PROP",
            TypeErrorCode::RetPropertied => "E-RET-PROPERTIED",
            TypeErrorCode::RetFunc => "E-RET-FUNC",
            TypeErrorCode::IfHasScrutinee => "E-IFHAS-SCRUTINEE",
        }
    }
}

impl fmt::Display for TypeErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("error[{code}]: {message} at {span}")]
pub struct TypeError {
    pub code: TypeErrorCode,
    pub message: String,
    pub span: Span,
}

fn err<T>(code: TypeErrorCode, span: Span, message: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError {
        code,
        message: message.into(),
        span,
    })
}

pub fn check_program(e: &Expr) -> Result<Type, TypeError> {
    infer(&TypeEnv::new(), e)
}

/// Infers the type of a surface expression. Internal nodes are rejected.
pub fn infer(env: &TypeEnv, e: &Expr) -> Result<Type, TypeError> {
    Checker { delta: None }.infer(env, e)
}

/// Inference extended to transformed programs: `f[n]` takes its signature from
/// `delta`, and `drop`/`retrieve` nodes have the type of their body.
pub fn infer_runtime(env: &TypeEnv, delta: &FuncCtx, e: &Expr) -> Result<Type, TypeError> {
    Checker { delta: Some(delta) }.infer(env, e)
}

/// Well-formedness of a type: distinct property names, and every payload
/// expression inhabits its declared type.
pub fn wf_type(env: &TypeEnv, t: &Type) -> Result<(), TypeError> {
    Checker { delta: None }.wf_type(env, t, Span::default())
}

/// Scrutinee types inside the two branches of `if-has L p : Tx bind-as x`,
/// given `L : scrutinee`. Returns `(then, else)`.
pub fn if_has_branch_types(
    scrutinee: &Type,
    prop: &str,
    prop_ty: &Type,
    bind_as: &str,
) -> Result<(Type, Type), crate::ast::AstError> {
    let remaining = match scrutinee.as_propertied() {
        Some(p) => p.without(prop),
        None => Type::empty_propertied(scrutinee.clone())?,
    };
    let then_ty = remaining
        .as_propertied()
        .expect("remaining is propertied")
        .with(Property::new(prop, Expr::var(bind_as), prop_ty.clone()))?;
    Ok((then_ty, remaining))
}

struct Checker<'a> {
    delta: Option<&'a FuncCtx>,
}

impl Checker<'_> {
    fn wf_type(&self, env: &TypeEnv, t: &Type, span: Span) -> Result<(), TypeError> {
        match t {
            Type::Int | Type::Unit => Ok(()),
            Type::Arrow(a, b) => {
                self.wf_type(env, a, span)?;
                self.wf_type(env, b, span)
            }
            Type::Propertied(p) => {
                if p.base().is_propertied() {
                    return err(
                        TypeErrorCode::Mismatch,
                        span,
                        "a propertied type cannot be the base of another",
                    );
                }
                self.wf_type(env, p.base(), span)?;
                for (i, prop) in p.props().iter().enumerate() {
                    if p.props()[..i].iter().any(|q| q.name == prop.name) {
                        return err(
                            TypeErrorCode::DupProp,
                            span,
                            format!("property `{}` is set twice", prop.name),
                        );
                    }
                    let actual = self.infer(env, &prop.expr)?;
                    if actual != prop.ty {
                        return err(
                            TypeErrorCode::Mismatch,
                            span,
                            format!(
                                "property `{}` is declared `{}` but its expression has type `{actual}`",
                                prop.name, prop.ty
                            ),
                        );
                    }
                }
                Ok(())
            }
        }
    }

    fn infer(&self, env: &TypeEnv, e: &Expr) -> Result<Type, TypeError> {
        use ExprKind::*;
        let span = e.span;
        match &e.kind {
            Int(_) => Ok(Type::Int),
            Unit => Ok(Type::Unit),
            Var(x) => match env.lookup(x) {
                Some(t) => Ok(t.clone()),
                None => err(
                    TypeErrorCode::UndefVar,
                    span,
                    format!("undefined variable `{x}`"),
                ),
            },
            Func {
                name,
                param,
                param_ty,
                body,
                cont,
            } => {
                self.wf_type(env, param_ty, span)?;
                let result = self.infer(&env.extend(param.clone(), param_ty.clone()), body)?;
                let empty = Type::empty_propertied(param_ty.clone()).or_else(|_| {
                    err(
                        TypeErrorCode::Mismatch,
                        span,
                        "parameter types cannot be propertied",
                    )
                })?;
                let result_prop = self.infer(&env.extend(param.clone(), empty.clone()), body)?;
                if result != result_prop {
                    return err(
                        TypeErrorCode::Mismatch,
                        body.span,
                        format!(
                            "body of `{name}` has type `{result}` when `{param}` is `{param_ty}` \
                             but `{result_prop}` when `{param}` is `{empty}`"
                        ),
                    );
                }
                no_propertied_or_arrow(&result, body.span, &format!("function `{name}`"))?;
                self.infer(
                    &env.extend(name.clone(), Type::arrow(param_ty.clone(), result)),
                    cont,
                )
            }
            Let { name, bound, body } => {
                let bound_ty = self.infer(env, bound)?;
                let result = self.infer(&env.extend(name.clone(), bound_ty), body)?;
                no_propertied_or_arrow(&result, body.span, &format!("`let {name}`"))?;
                Ok(result)
            }
            IfHas {
                scrutinee,
                prop,
                prop_ty,
                bind_as,
                then_branch,
                else_branch,
            } => {
                let Some(scrutinee_ty) = env.lookup(scrutinee) else {
                    return err(
                        TypeErrorCode::IfHasScrutinee,
                        span,
                        format!("if-has scrutinee `{scrutinee}` is not bound"),
                    );
                };
                self.wf_type(env, prop_ty, span)?;
                let (then_ty, else_ty) =
                    if_has_branch_types(scrutinee_ty, prop, prop_ty, bind_as).or_else(|e| {
                        err(TypeErrorCode::Mismatch, span, e.to_string())
                    })?;
                let else_env = env.extend(scrutinee.clone(), else_ty);
                let then_env = env
                    .extend(bind_as.clone(), prop_ty.clone())
                    .extend(scrutinee.clone(), then_ty);
                let then_result = self.infer(&then_env, then_branch)?;
                let else_result = self.infer(&else_env, else_branch)?;
                if then_result != else_result {
                    return err(
                        TypeErrorCode::Mismatch,
                        else_branch.span,
                        format!(
                            "if-has branches disagree: then has type `{then_result}`, else has type `{else_result}`"
                        ),
                    );
                }
                Ok(then_result)
            }
            Set {
                target,
                prop,
                value,
            } => {
                let target_ty = self.infer(env, target)?;
                let value_ty = self.infer(env, value)?;
                if value_ty.is_propertied() {
                    return err(
                        TypeErrorCode::Mismatch,
                        value.span,
                        format!("property `{prop}` cannot hold a value of propertied type `{value_ty}`"),
                    );
                }
                let property = Property::new(prop.clone(), (**value).clone(), value_ty);
                let result = match target_ty.as_propertied() {
                    Some(p) => p.with(property),
                    None => Type::propertied(target_ty.clone(), vec![property]),
                };
                result.or_else(|e| err(TypeErrorCode::Mismatch, span, e.to_string()))
            }
            Get { target, prop } => {
                let target_ty = self.infer(env, target)?;
                let p = expect_propertied(&target_ty, target.span, "get")?;
                match p.get(prop) {
                    Some(property) => Ok(property.ty.clone()),
                    None => err(
                        TypeErrorCode::NoProp,
                        span,
                        format!("type `{target_ty}` has no property `{prop}`"),
                    ),
                }
            }
            Erase { target, prop } => {
                let target_ty = self.infer(env, target)?;
                let p = expect_propertied(&target_ty, target.span, "erase")?;
                if !p.has(prop) {
                    return err(
                        TypeErrorCode::NoProp,
                        span,
                        format!("type `{target_ty}` has no property `{prop}`"),
                    );
                }
                Ok(p.without(prop))
            }
            Extract(target) => {
                let target_ty = self.infer(env, target)?;
                let p = expect_propertied(&target_ty, target.span, "extract")?;
                Ok(p.base().clone())
            }
            App(callee, arg) => {
                let callee_ty = self.infer(env, callee)?;
                let Type::Arrow(domain, codomain) = &callee_ty else {
                    return err(
                        TypeErrorCode::NotFunc,
                        callee.span,
                        format!("expression of type `{callee_ty}` is applied but is not a function"),
                    );
                };
                let arg_ty = self.infer(env, arg)?;
                if &arg_ty == domain.as_ref() || arg_ty.strip() == domain.as_ref() {
                    Ok((**codomain).clone())
                } else {
                    err(
                        TypeErrorCode::Mismatch,
                        arg.span,
                        format!("expected an argument of type `{domain}`, found `{arg_ty}`"),
                    )
                }
            }
            Plus(l, r) | Minus(l, r) => {
                for side in [l, r] {
                    let t = self.infer(env, side)?;
                    if t.strip() != &Type::Int {
                        let op = if matches!(e.kind, Plus(..)) { "+" } else { "-" };
                        return err(
                            TypeErrorCode::Mismatch,
                            side.span,
                            format!("operand of `{op}` has type `{t}`, expected `int`"),
                        );
                    }
                }
                Ok(Type::Int)
            }
            MonoRef(f, n) if self.delta.is_some() => {
                match self.delta.and_then(|d| d.monos.get(&(f.clone(), *n))) {
                    Some(m) => Ok(Type::arrow(m.param_ty.clone(), m.result_ty.clone())),
                    None => err(
                        TypeErrorCode::UndefVar,
                        span,
                        format!("no monomorphization `{f}[{n}]`"),
                    ),
                }
            }
            DropAfter(_, body) if self.delta.is_some() => self.infer(env, body),
            RetrieveAfter(_, saved, body) if self.delta.is_some() => {
                self.infer(env, saved)?;
                self.infer(env, body)
            }
            Propertied(_) | MonoRef(..) | DropAfter(..) | RetrieveAfter(..) => err(
                TypeErrorCode::Mismatch,
                span,
                format!("internal form `{e}` cannot be type-checked"),
            ),
        }
    }
}

fn expect_propertied<'t>(
    t: &'t Type,
    span: Span,
    what: &str,
) -> Result<&'t crate::ast::PropType, TypeError> {
    t.as_propertied().map_or_else(
        || {
            err(
                TypeErrorCode::NotPropertied,
                span,
                format!("`{what}` needs a value of propertied type, found `{t}`"),
            )
        },
        Ok,
    )
}

fn no_propertied_or_arrow(t: &Type, span: Span, what: &str) -> Result<(), TypeError> {
    if t.is_propertied() {
        return err(
            TypeErrorCode::RetPropertied,
            span,
            format!("{what} would produce a value of propertied type `{t}`"),
        );
    }
    if t.is_arrow() {
        return err(
            TypeErrorCode::RetFunc,
            span,
            format!("{what} would produce a function of type `{t}`"),
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    const CLOSURE: &str = "let y = 5 in\n  func f x : int with\n    x + y in\n  f 1\n";
    const DISPATCH: &str = "func f x : int with
    if-has x c : int bind-as c in
        c + 1
    else extract(x) in
  let y = set(5, c, 5) in
  f y";

    fn check(src: &str) -> Result<Type, TypeError> {
        check_program(&parse_program(src).unwrap())
    }

    fn code(src: &str) -> TypeErrorCode {
        check(src).unwrap_err().code
    }

    #[test]
    fn worked_examples_are_int() {
        assert_eq!(check(CLOSURE), Ok(Type::Int));
        assert_eq!(check(DISPATCH), Ok(Type::Int));
        assert_eq!(check("5"), Ok(Type::Int));
        assert_eq!(check("()"), Ok(Type::Unit));
    }

    #[test]
    fn body_of_the_closure_example() {
        let env = TypeEnv::new().extend("y", Type::Int).extend("x", Type::Int);
        let e = parse_program("x + y").unwrap();
        assert_eq!(infer(&env, &e), Ok(Type::Int));
    }

    #[test]
    fn error_codes() {
        assert_eq!(code("x"), TypeErrorCode::UndefVar);
        assert_eq!(code("1 2"), TypeErrorCode::NotFunc);
        assert_eq!(code("1 + ()"), TypeErrorCode::Mismatch);
        assert_eq!(code("extract(1)"), TypeErrorCode::NotPropertied);
        assert_eq!(code("get(1, p)"), TypeErrorCode::NotPropertied);
        assert_eq!(code("erase(5, p)"), TypeErrorCode::NotPropertied);
        assert_eq!(code("get(set(1, p, 2), q)"), TypeErrorCode::NoProp);
        assert_eq!(code("erase(set(1, p, 2), q)"), TypeErrorCode::NoProp);
        assert_eq!(
            code("func f x : int with set(x, p, 1) in 0"),
            TypeErrorCode::RetPropertied
        );
        assert_eq!(
            code("func g y : int with y + 0 in func f x : int with g in 0"),
            TypeErrorCode::RetFunc
        );
        assert_eq!(code("let a = 1 in set(a, p, 1)"), TypeErrorCode::RetPropertied);
        assert_eq!(
            code("if-has z p : int bind-as b in 1 else 2"),
            TypeErrorCode::IfHasScrutinee
        );
        assert_eq!(code("set(1, p, set(2, q, 3))"), TypeErrorCode::Mismatch);
        assert_eq!(
            code("func f x : int with 1 in f ()"),
            TypeErrorCode::Mismatch
        );
    }

    #[test]
    fn rendering() {
        let e = check("let a = 1 in\n  b").unwrap_err();
        assert_eq!(e.to_string(), "error[E-UNDEF-VAR]: undefined variable `b` at 2:3");
    }

    #[test]
    fn well_formedness() {
        let env = TypeEnv::new();
        assert!(wf_type(&env, &Type::Int).is_ok());
        let c5 = Type::propertied(Type::Int, vec![Property::new("c", Expr::int(5), Type::Int)])
            .unwrap();
        assert!(wf_type(&env, &c5).is_ok());
        let wrong = Type::propertied(Type::Int, vec![Property::new("c", Expr::unit(), Type::Int)])
            .unwrap();
        assert_eq!(wf_type(&env, &wrong).unwrap_err().code, TypeErrorCode::Mismatch);
    }

    #[test]
    fn duplicate_properties_are_rejected_by_well_formedness() {
        // The constructor refuses duplicates, so build the offending type by
        // updating one name into another's slot.
        let t = Type::propertied(
            Type::Int,
            vec![
                Property::new("c", Expr::int(5), Type::Int),
                Property::new("d", Expr::int(6), Type::Int),
            ],
        )
        .unwrap();
        assert!(wf_type(&TypeEnv::new(), &t).is_ok());
        assert!(Type::propertied(
            Type::Int,
            vec![
                Property::new("c", Expr::int(5), Type::Int),
                Property::new("c", Expr::int(6), Type::Int),
            ],
        )
        .is_err());
    }

    #[test]
    fn set_appends_and_updates_in_order() {
        let t = check("extract(set(set(set(1, a, 1), b, ()), a, 3))").unwrap();
        assert_eq!(t, Type::Int);
        let env = TypeEnv::new();
        let e = parse_program("set(set(set(1, a, 1), b, ()), a, 3)").unwrap();
        let t = infer(&env, &e).unwrap();
        let names: Vec<_> = t
            .as_propertied()
            .unwrap()
            .props()
            .iter()
            .map(|p| (p.name.clone(), p.expr.to_string()))
            .collect();
        assert_eq!(
            names,
            [("a".into(), "3".into()), ("b".into(), "()".into())]
        );
    }

    #[test]
    fn propertied_arguments_are_accepted_at_their_base() {
        assert_eq!(
            check("func f x : int with x + 1 in f (set(2, p, ()))"),
            Ok(Type::Int)
        );
        assert_eq!(
            check("func g y : int with y + 0 in func h k : int -> int with 0 in h (set(g, p, 1))"),
            Ok(Type::Int)
        );
    }

    #[test]
    fn twin_body_check_rejects_bodies_that_depend_on_propertiedness() {
        // Under `x : [int]⟨⟩` the if-has else branch sees a propertied `x`.
        assert_eq!(
            code("func f x : int with if-has x p : int bind-as b in b else erase(x, p) in 0"),
            TypeErrorCode::NoProp
        );
        assert_eq!(
            code("func f x : int with extract(x) in 0"),
            TypeErrorCode::NotPropertied
        );
    }

    #[test]
    fn if_has_rebinds_the_scrutinee_per_branch() {
        let src = "let v = set(1, p, 2) in
            if-has v p : int bind-as b in get(v, p) + b else extract(v)";
        assert_eq!(check(src), Ok(Type::Int));
        let src = "let v = set(1, p, 2) in
            if-has v p : int bind-as b in 0 else get(v, p)";
        assert_eq!(code(src), TypeErrorCode::NoProp);
        let src = "let v = 1 in if-has v p : int bind-as b in 0 else extract(v)";
        assert_eq!(check(src), Ok(Type::Int));
        let src = "let v = 1 in if-has v p : int bind-as b in 0 else ()";
        assert_eq!(code(src), TypeErrorCode::Mismatch);
    }

    #[test]
    fn function_valued_lets_are_allowed() {
        assert_eq!(
            check("func g y : int with y + 1 in let h = g in h 2"),
            Ok(Type::Int)
        );
    }

    #[test]
    fn deterministic() {
        let e = parse_program(DISPATCH).unwrap();
        assert_eq!(check_program(&e), check_program(&e));
    }
}
