//! JSON interchange format for transformed programs.
//!
//! Only runtime forms can be encoded: a document never carries properties,
//! raw functions, or surface constructs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{Expr, ExprKind, FuncCtx, Mono, Type};
use crate::transform::TransformResult;

pub const IR_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IrError {
    #[error("cannot encode `{0}`: only runtime forms have an IR encoding")]
    NotRuntime(String),
    #[error("unsupported IR version {found} (expected {IR_VERSION})")]
    Version { found: u32 },
    #[error("duplicate monomorphization {0}[{1}]")]
    DuplicateMono(String, u32),
    #[error("malformed IR: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "k", rename_all = "lowercase")]
pub enum IrExpr {
    Int {
        value: i64,
    },
    Unit,
    Var {
        name: String,
    },
    App {
        callee: Box<IrExpr>,
        arg: Box<IrExpr>,
    },
    Plus {
        left: Box<IrExpr>,
        right: Box<IrExpr>,
    },
    Minus {
        left: Box<IrExpr>,
        right: Box<IrExpr>,
    },
    Let {
        name: String,
        bound: Box<IrExpr>,
        body: Box<IrExpr>,
    },
    Mono {
        name: String,
        index: u32,
    },
    Drop {
        name: String,
        body: Box<IrExpr>,
    },
    Retrieve {
        name: String,
        saved: Box<IrExpr>,
        body: Box<IrExpr>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "k", rename_all = "lowercase")]
pub enum IrType {
    Int,
    Unit,
    Arrow {
        domain: Box<IrType>,
        codomain: Box<IrType>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrMono {
    pub name: String,
    pub index: u32,
    pub param: String,
    pub param_type: IrType,
    pub body: IrExpr,
    pub result_type: IrType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrDocument {
    pub version: u32,
    pub expr: IrExpr,
    pub monos: Vec<IrMono>,
    pub program_type: IrType,
}

pub fn encode_expr(e: &Expr) -> Result<IrExpr, IrError> {
    let b = |e: &Expr| encode_expr(e).map(Box::new);
    Ok(match &e.kind {
        ExprKind::Int(n) => IrExpr::Int { value: *n },
        ExprKind::Unit => IrExpr::Unit,
        ExprKind::Var(x) => IrExpr::Var { name: x.clone() },
        ExprKind::App(f, a) => IrExpr::App {
            callee: b(f)?,
            arg: b(a)?,
        },
        ExprKind::Plus(l, r) => IrExpr::Plus {
            left: b(l)?,
            right: b(r)?,
        },
        ExprKind::Minus(l, r) => IrExpr::Minus {
            left: b(l)?,
            right: b(r)?,
        },
        ExprKind::Let { name, bound, body } => IrExpr::Let {
            name: name.clone(),
            bound: b(bound)?,
            body: b(body)?,
        },
        ExprKind::MonoRef(f, n) => IrExpr::Mono {
            name: f.clone(),
            index: *n,
        },
        ExprKind::DropAfter(x, body) => IrExpr::Drop {
            name: x.clone(),
            body: b(body)?,
        },
        ExprKind::RetrieveAfter(x, saved, body) => IrExpr::Retrieve {
            name: x.clone(),
            saved: b(saved)?,
            body: b(body)?,
        },
        _ => return Err(IrError::NotRuntime(e.to_string())),
    })
}

pub fn decode_expr(ir: &IrExpr) -> Expr {
    match ir {
        IrExpr::Int { value } => Expr::int(*value),
        IrExpr::Unit => Expr::unit(),
        IrExpr::Var { name } => Expr::var(name.clone()),
        IrExpr::App { callee, arg } => Expr::app(decode_expr(callee), decode_expr(arg)),
        IrExpr::Plus { left, right } => Expr::plus(decode_expr(left), decode_expr(right)),
        IrExpr::Minus { left, right } => Expr::minus(decode_expr(left), decode_expr(right)),
        IrExpr::Let { name, bound, body } => {
            Expr::let_in(name.clone(), decode_expr(bound), decode_expr(body))
        }
        IrExpr::Mono { name, index } => Expr::mono(name.clone(), *index),
        IrExpr::Drop { name, body } => Expr::drop_after(name.clone(), decode_expr(body)),
        IrExpr::Retrieve { name, saved, body } => {
            Expr::retrieve_after(name.clone(), decode_expr(saved), decode_expr(body))
        }
    }
}

pub fn encode_type(t: &Type) -> Result<IrType, IrError> {
    Ok(match t {
        Type::Int => IrType::Int,
        Type::Unit => IrType::Unit,
        Type::Arrow(a, b) => IrType::Arrow {
            domain: Box::new(encode_type(a)?),
            codomain: Box::new(encode_type(b)?),
        },
        Type::Propertied(_) => return Err(IrError::NotRuntime(t.to_string())),
    })
}

pub fn decode_type(t: &IrType) -> Type {
    match t {
        IrType::Int => Type::Int,
        IrType::Unit => Type::Unit,
        IrType::Arrow { domain, codomain } => {
            Type::arrow(decode_type(domain), decode_type(codomain))
        }
    }
}

pub fn encode(tr: &TransformResult) -> Result<IrDocument, IrError> {
    let monos = tr
        .delta
        .monos
        .iter()
        .map(|((f, n), m)| {
            Ok(IrMono {
                name: f.clone(),
                index: *n,
                param: m.param.clone(),
                param_type: encode_type(&m.param_ty)?,
                body: encode_expr(&m.body)?,
                result_type: encode_type(&m.result_ty)?,
            })
        })
        .collect::<Result<_, IrError>>()?;
    Ok(IrDocument {
        version: IR_VERSION,
        expr: encode_expr(&tr.expr)?,
        monos,
        program_type: encode_type(&tr.ty)?,
    })
}

/// Rebuilds a transformation result. Raw definitions are not part of the
/// format, so the decoded Δ holds monomorphizations only.
pub fn decode(doc: &IrDocument) -> Result<TransformResult, IrError> {
    if doc.version != IR_VERSION {
        return Err(IrError::Version { found: doc.version });
    }
    let mut delta = FuncCtx::new();
    for m in &doc.monos {
        let mono = Mono {
            param: m.param.clone(),
            param_ty: decode_type(&m.param_type),
            body: decode_expr(&m.body),
            result_ty: decode_type(&m.result_type),
        };
        if delta.monos.insert((m.name.clone(), m.index), mono).is_some() {
            return Err(IrError::DuplicateMono(m.name.clone(), m.index));
        }
    }
    Ok(TransformResult {
        delta,
        expr: decode_expr(&doc.expr),
        ty: decode_type(&doc.program_type),
    })
}

pub fn to_json(doc: &IrDocument) -> String {
    serde_json::to_string_pretty(doc).expect("IR documents always serialize")
}

pub fn from_json(text: &str) -> Result<IrDocument, IrError> {
    let doc: IrDocument = serde_json::from_str(text)?;
    if doc.version != IR_VERSION {
        return Err(IrError::Version { found: doc.version });
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;
    use crate::transform::transform_program;

    fn closure() -> TransformResult {
        let src = "let y = 5 in func f x : int with x + y in f 1";
        transform_program(&parse_program(src).unwrap()).unwrap()
    }

    #[test]
    fn round_trip() {
        let tr = closure();
        let doc = encode(&tr).unwrap();
        let back = from_json(&to_json(&doc)).unwrap();
        assert_eq!(back, doc);
        let decoded = decode(&back).unwrap();
        assert_eq!(decoded.expr, tr.expr);
        assert_eq!(decoded.delta.monos, tr.delta.monos);
        assert_eq!(decoded.ty, tr.ty);
    }

    #[test]
    fn tags() {
        let doc = encode(&closure()).unwrap();
        let json: serde_json::Value = serde_json::from_str(&to_json(&doc)).unwrap();
        assert_eq!(json["version"], 1);
        assert_eq!(json["expr"]["k"], "let");
        assert_eq!(json["expr"]["body"]["callee"]["k"], "mono");
        assert_eq!(json["monos"][0]["body"]["k"], "plus");
        assert_eq!(json["program_type"]["k"], "int");
        let internal = Expr::retrieve_after("x", Expr::unit(), Expr::drop_after("y", Expr::var("y")));
        let ir = encode_expr(&internal).unwrap();
        assert_eq!(decode_expr(&ir), internal);
    }

    #[test]
    fn literal_program_has_no_monos() {
        let tr = transform_program(&parse_program("5").unwrap()).unwrap();
        let doc = encode(&tr).unwrap();
        assert!(doc.monos.is_empty());
        assert_eq!(doc.expr, IrExpr::Int { value: 5 });
    }

    #[test]
    fn rejects_properties_and_other_versions() {
        let tr = transform_program(&parse_program("set(5, c, 5)").unwrap()).unwrap();
        assert!(matches!(encode(&tr), Err(IrError::NotRuntime(_))));
        let mut doc = encode(&closure()).unwrap();
        doc.version = 2;
        assert!(matches!(from_json(&to_json(&doc)), Err(IrError::Version { found: 2 })));
        assert!(matches!(decode(&doc), Err(IrError::Version { found: 2 })));
        assert!(matches!(from_json("{"), Err(IrError::Json(_))));
    }
}
