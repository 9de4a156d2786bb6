//! Concrete-syntax printing. Surface expressions print in a form the parser
//! reads back to an equal tree.

use std::fmt::{self, Display, Formatter, Write};

use crate::ast::{Expr, ExprKind, FuncCtx, Mono, RawFunc, Type};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pos {
    /// Anywhere a full expression is allowed.
    Top,
    /// Left operand of `+`/`-`.
    Left,
    /// Right operand of `+`/`-`, or the callee of an application.
    App,
    /// Argument of an application.
    Arg,
}

pub fn pretty(e: &Expr) -> String {
    e.to_string()
}

pub fn pretty_type(t: &Type) -> String {
    t.to_string()
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_expr(f, self, Pos::Top)
    }
}

impl Display for Type {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Unit => f.write_str("unit"),
            Type::Arrow(a, b) => {
                if a.is_arrow() {
                    write!(f, "({a}) -> {b}")
                } else {
                    write!(f, "{a} -> {b}")
                }
            }
            Type::Propertied(p) => {
                write!(f, "[{}]⟨", p.base())?;
                for (i, prop) in p.props().iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{} ↪ {}[{}]", prop.name, prop.expr, prop.ty)?;
                }
                f.write_char('⟩')
            }
        }
    }
}

fn needs_parens(e: &Expr, pos: Pos) -> bool {
    use ExprKind::*;
    match &e.kind {
        Func { .. } | Let { .. } | IfHas { .. } | DropAfter(..) | RetrieveAfter(..) => {
            pos != Pos::Top
        }
        Plus(..) | Minus(..) => matches!(pos, Pos::App | Pos::Arg),
        App(..) => pos == Pos::Arg,
        Int(n) => *n < 0 && pos == Pos::Arg,
        _ => false,
    }
}

fn write_expr(f: &mut Formatter<'_>, e: &Expr, pos: Pos) -> fmt::Result {
    if needs_parens(e, pos) {
        f.write_char('(')?;
        write_expr(f, e, Pos::Top)?;
        return f.write_char(')');
    }
    use ExprKind::*;
    match &e.kind {
        Int(n) => write!(f, "{n}"),
        Unit => f.write_str("()"),
        Var(x) => f.write_str(x),
        Func {
            name,
            param,
            param_ty,
            body,
            cont,
        } => write!(f, "func {name} {param} : {param_ty} with {body} in {cont}"),
        Let { name, bound, body } => write!(f, "let {name} = {bound} in {body}"),
        IfHas {
            scrutinee,
            prop,
            prop_ty,
            bind_as,
            then_branch,
            else_branch,
        } => write!(
            f,
            "if-has {scrutinee} {prop} : {prop_ty} bind-as {bind_as} in {then_branch} else {else_branch}"
        ),
        Set {
            target,
            prop,
            value,
        } => write!(f, "set({target}, {prop}, {value})"),
        Get { target, prop } => write!(f, "get({target}, {prop})"),
        Erase { target, prop } => write!(f, "erase({target}, {prop})"),
        Extract(t) => write!(f, "extract({t})"),
        App(callee, arg) => {
            write_expr(f, callee, Pos::App)?;
            f.write_char(' ')?;
            write_expr(f, arg, Pos::Arg)
        }
        Plus(l, r) | Minus(l, r) => {
            write_expr(f, l, Pos::Left)?;
            f.write_str(if matches!(e.kind, Plus(..)) { " + " } else { " - " })?;
            write_expr(f, r, Pos::App)
        }
        Propertied(m) => write!(f, "propertied[{m}]"),
        MonoRef(name, k) => write!(f, "{name}[{k}]"),
        DropAfter(x, body) => write!(f, "drop {x} after {body}"),
        RetrieveAfter(x, saved, body) => write!(f, "retrieve {x} = {saved} after {body}"),
    }
}

/// `f :: x : T₁ . M : T₂`
pub fn raw_entry(name: &str, raw: &RawFunc) -> String {
    format!(
        "{name} :: {} : {} . {} : {}",
        raw.param, raw.param_ty, raw.body, raw.result_ty
    )
}

/// `f[n] ▷ x : T₁ . M : T₂`
pub fn mono_entry(name: &str, index: u32, mono: &Mono) -> String {
    format!(
        "{name}[{index}] ▷ {} : {} . {} : {}",
        mono.param, mono.param_ty, mono.body, mono.result_ty
    )
}

/// One line per entry: raw functions first, then monomorphizations, each in
/// the order they were added.
pub fn delta_lines(delta: &FuncCtx) -> Vec<String> {
    delta
        .raw
        .iter()
        .map(|(name, raw)| raw_entry(name, raw))
        .chain(
            delta
                .monos
                .iter()
                .map(|((name, k), mono)| mono_entry(name, *k, mono)),
        )
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Property;

    #[test]
    fn prints_monomorphized_call() {
        let e = Expr::let_in(
            "y",
            Expr::int(5),
            Expr::app(Expr::mono("f", 1), Expr::int(1)),
        );
        assert_eq!(pretty(&e), "let y = 5 in f[1] 1");
        assert_eq!(pretty(&Expr::int(6)), "6");
    }

    #[test]
    fn prints_types() {
        assert_eq!(pretty_type(&Type::arrow(Type::Int, Type::Int)), "int -> int");
        let hof = Type::arrow(Type::arrow(Type::Int, Type::Unit), Type::Int);
        assert_eq!(pretty_type(&hof), "(int -> unit) -> int");
        let c5 =
            Type::propertied(Type::Int, vec![Property::new("c", Expr::int(5), Type::Int)]).unwrap();
        assert_eq!(pretty_type(&c5), "[int]⟨c ↪ 5[int]⟩");
    }

    #[test]
    fn parenthesizes_where_the_grammar_needs_it() {
        let e = Expr::app(
            Expr::var("f"),
            Expr::app(Expr::var("g"), Expr::int(-2)),
        );
        assert_eq!(pretty(&e), "f (g (-2))");
        let e = Expr::minus(Expr::int(1), Expr::minus(Expr::int(2), Expr::int(3)));
        assert_eq!(pretty(&e), "1 - (2 - 3)");
        let e = Expr::plus(Expr::let_in("x", Expr::int(1), Expr::var("x")), Expr::int(2));
        assert_eq!(pretty(&e), "(let x = 1 in x) + 2");
    }

    #[test]
    fn prints_internal_nodes() {
        let e = Expr::retrieve_after(
            "x",
            Expr::int(9),
            Expr::drop_after("y", Expr::propertied(Expr::var("y"))),
        );
        assert_eq!(pretty(&e), "retrieve x = 9 after drop y after propertied[y]");
    }
}
