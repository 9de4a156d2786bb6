//! Lexer and recursive-descent parser for `.lrp` source.
//!
//! ```text
//! expr   := func IDENT IDENT ":" type with expr in expr
//!         | let IDENT "=" expr in expr
//!         | if-has IDENT IDENT ":" type bind-as IDENT in expr else expr
//!         | arith
//! arith  := app (("+" | "-") app)*
//! app    := atom atom*
//! atom   := INT | "-" INT | "()" | IDENT | "(" expr ")"
//!         | extract(expr) | set(expr, IDENT, expr) | get(expr, IDENT) | erase(expr, IDENT)
//! type   := ("int" | "unit" | "(" type ")") ("->" type)?
//! ```

use std::fmt;

use thiserror::Error;

use crate::ast::{Expr, ExprKind, Span, Type};

const KEYWORDS: &[&str] = &[
    "func", "with", "in", "let", "if-has", "bind-as", "else", "extract", "set", "get", "erase",
    "int", "unit",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Ident,
    Int,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at {line}:{col}")]
pub struct ParseError {
    pub message: String,
    pub line: u32,
    pub col: u32,
}

impl ParseError {
    fn at(span: Span, message: impl Into<String>) -> Self {
        ParseError {
            message: message.into(),
            line: span.line,
            col: span.col,
        }
    }

    pub fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let kind = if is_ident_start(c) {
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            // `if-has` and `bind-as` are single keywords.
            let word: String = chars[start..i].iter().collect();
            let suffix = match word.as_str() {
                "if" => Some("-has"),
                "bind" => Some("-as"),
                _ => None,
            };
            if let Some(suffix) = suffix {
                let end = i + suffix.len();
                if end <= chars.len()
                    && chars[i..end].iter().copied().eq(suffix.chars())
                    && !chars.get(end).is_some_and(|&c| is_ident_char(c))
                {
                    i = end;
                }
            }
            let word: String = chars[start..i].iter().collect();
            if KEYWORDS.contains(&word.as_str()) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            }
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            TokenKind::Int
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            i += 2;
            TokenKind::Punct
        } else if "(),:=+-".contains(c) {
            i += 1;
            TokenKind::Punct
        } else {
            return Err(ParseError::at(span, format!("unexpected character `{c}`")));
        };
        col += (i - start) as u32;
        tokens.push(Token {
            kind,
            text: chars[start..i].iter().collect(),
            span,
        });
    }
    Ok(tokens)
}

pub fn parse_program(source: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(source)?;
    let eof = end_span(source);
    let mut p = Parser {
        tokens,
        pos: 0,
        eof,
    };
    let e = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(ParseError::at(
            t.span,
            format!("unexpected `{}` after end of expression", t.text),
        ));
    }
    Ok(e)
}

pub fn parse_type(source: &str) -> Result<Type, ParseError> {
    let tokens = tokenize(source)?;
    let eof = end_span(source);
    let mut p = Parser {
        tokens,
        pos: 0,
        eof,
    };
    let t = p.ty()?;
    if let Some(t) = p.peek() {
        return Err(ParseError::at(t.span, format!("unexpected `{}`", t.text)));
    }
    Ok(t)
}

/// Position of the last character, so end-of-input errors still point inside
/// the source.
fn end_span(source: &str) -> Span {
    let mut span = Span::new(1, 1);
    let mut last = span;
    for c in source.chars() {
        last = span;
        if c == '\n' {
            span = Span::new(span.line + 1, 1);
        } else {
            span.col += 1;
        }
    }
    last
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof: Span,
}

enum Expected<'a> {
    Kw(&'a str),
    Punct(&'a str),
}

impl fmt::Display for Expected<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expected::Kw(s) | Expected::Punct(s) => write!(f, "`{s}`"),
        }
    }
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> Span {
        self.peek().map_or(self.eof, |t| t.span)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is(TokenKind::Keyword, kw))
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is(TokenKind::Punct, p))
    }

    fn describe_here(&self) -> String {
        match self.peek() {
            Some(t) => format!("`{}`", t.text),
            None => "end of input".to_string(),
        }
    }

    fn expect(&mut self, what: Expected<'_>) -> Result<Span, ParseError> {
        let ok = match what {
            Expected::Kw(k) => self.at_kw(k),
            Expected::Punct(p) => self.at_punct(p),
        };
        if ok {
            Ok(self.bump().unwrap().span)
        } else {
            Err(ParseError::at(
                self.here(),
                format!("expected {what}, found {}", self.describe_here()),
            ))
        }
    }

    fn ident(&mut self, role: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => Ok(self.bump().unwrap().text),
            _ => Err(ParseError::at(
                self.here(),
                format!("expected {role}, found {}", self.describe_here()),
            )),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let span = self.here();
        if self.at_kw("func") {
            self.bump();
            let name = self.ident("function name")?;
            let param = self.ident("parameter name")?;
            self.expect(Expected::Punct(":"))?;
            let param_ty = self.ty()?;
            self.expect(Expected::Kw("with"))?;
            let body = self.expr()?;
            self.expect(Expected::Kw("in"))?;
            let cont = self.expr()?;
            return Ok(Expr::func(name, param, param_ty, body, cont).with_span(span));
        }
        if self.at_kw("let") {
            self.bump();
            let name = self.ident("variable name")?;
            self.expect(Expected::Punct("="))?;
            let bound = self.expr()?;
            self.expect(Expected::Kw("in"))?;
            let body = self.expr()?;
            return Ok(Expr::let_in(name, bound, body).with_span(span));
        }
        if self.at_kw("if-has") {
            self.bump();
            let scrutinee = self.ident("a variable as the if-has scrutinee")?;
            let prop = self.ident("property name")?;
            self.expect(Expected::Punct(":"))?;
            let prop_ty = self.ty()?;
            self.expect(Expected::Kw("bind-as"))?;
            let bind_as = self.ident("binder name")?;
            self.expect(Expected::Kw("in"))?;
            let then_branch = self.expr()?;
            self.expect(Expected::Kw("else"))?;
            let else_branch = self.expr()?;
            return Ok(
                Expr::if_has(scrutinee, prop, prop_ty, bind_as, then_branch, else_branch)
                    .with_span(span),
            );
        }
        self.arith()
    }

    fn arith(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.app()?;
        loop {
            let plus = self.at_punct("+");
            if !plus && !self.at_punct("-") {
                return Ok(lhs);
            }
            let span = self.bump().unwrap().span;
            let rhs = self.app()?;
            let kind = if plus {
                ExprKind::Plus(Box::new(lhs), Box::new(rhs))
            } else {
                ExprKind::Minus(Box::new(lhs), Box::new(rhs))
            };
            lhs = Expr::new(kind, span);
        }
    }

    fn app(&mut self) -> Result<Expr, ParseError> {
        let mut callee = self.atom(true)?;
        while self.starts_atom() {
            let span = callee.span;
            let arg = self.atom(false)?;
            callee = Expr::app(callee, arg).with_span(span);
        }
        Ok(callee)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Some(t) => match t.kind {
                TokenKind::Int | TokenKind::Ident => true,
                TokenKind::Punct => t.text == "(",
                TokenKind::Keyword => {
                    matches!(t.text.as_str(), "extract" | "set" | "get" | "erase")
                }
            },
            None => false,
        }
    }

    fn int_literal(&mut self, negative: bool, span: Span) -> Result<Expr, ParseError> {
        let t = self.bump().unwrap();
        let magnitude: i128 = t
            .text
            .parse()
            .map_err(|_| ParseError::at(t.span, "integer literal out of range"))?;
        let value = if negative { -magnitude } else { magnitude };
        let value = i64::try_from(value)
            .map_err(|_| ParseError::at(t.span, "integer literal out of range"))?;
        Ok(Expr::int(value).with_span(span))
    }

    /// `leading` allows a negative literal, which is only unambiguous at the
    /// start of an application.
    fn atom(&mut self, leading: bool) -> Result<Expr, ParseError> {
        let span = self.here();
        let Some(tok) = self.peek().cloned() else {
            return Err(ParseError::at(span, "expected an expression, found end of input"));
        };
        match tok.kind {
            TokenKind::Int => self.int_literal(false, span),
            TokenKind::Ident => {
                self.bump();
                Ok(Expr::var(tok.text).with_span(span))
            }
            TokenKind::Punct if tok.text == "-" && leading => {
                self.bump();
                if self.peek().is_some_and(|t| t.kind == TokenKind::Int) {
                    self.int_literal(true, span)
                } else {
                    Err(ParseError::at(
                        self.here(),
                        format!(
                            "expected an integer after unary `-`, found {}",
                            self.describe_here()
                        ),
                    ))
                }
            }
            TokenKind::Punct if tok.text == "(" => {
                self.bump();
                if self.at_punct(")") {
                    self.bump();
                    return Ok(Expr::unit().with_span(span));
                }
                let inner = self.expr()?;
                self.expect(Expected::Punct(")"))?;
                Ok(inner)
            }
            TokenKind::Keyword if tok.text == "extract" => {
                self.bump();
                self.expect(Expected::Punct("("))?;
                let target = self.expr()?;
                self.expect(Expected::Punct(")"))?;
                Ok(Expr::extract(target).with_span(span))
            }
            TokenKind::Keyword if tok.text == "set" => {
                self.bump();
                self.expect(Expected::Punct("("))?;
                let target = self.expr()?;
                self.expect(Expected::Punct(","))?;
                let prop = self.ident("property name")?;
                self.expect(Expected::Punct(","))?;
                let value = self.expr()?;
                self.expect(Expected::Punct(")"))?;
                Ok(Expr::set(target, prop, value).with_span(span))
            }
            TokenKind::Keyword if tok.text == "get" || tok.text == "erase" => {
                self.bump();
                self.expect(Expected::Punct("("))?;
                let target = self.expr()?;
                self.expect(Expected::Punct(","))?;
                let prop = self.ident("property name")?;
                self.expect(Expected::Punct(")"))?;
                Ok(if tok.text == "get" {
                    Expr::get(target, prop)
                } else {
                    Expr::erase(target, prop)
                }
                .with_span(span))
            }
            _ => Err(ParseError::at(
                span,
                format!("expected an expression, found `{}`", tok.text),
            )),
        }
    }

    fn ty(&mut self) -> Result<Type, ParseError> {
        let lhs = if self.at_kw("int") {
            self.bump();
            Type::Int
        } else if self.at_kw("unit") {
            self.bump();
            Type::Unit
        } else if self.at_punct("(") {
            self.bump();
            let t = self.ty()?;
            self.expect(Expected::Punct(")"))?;
            t
        } else {
            return Err(ParseError::at(
                self.here(),
                format!("expected a type, found {}", self.describe_here()),
            ));
        };
        if self.at_punct("->") {
            self.bump();
            Ok(Type::arrow(lhs, self.ty()?))
        } else {
            Ok(lhs)
        }
    }
}
