//! The stages strung together: source → type → transformed program → value.

use crate::ast::{Expr, Type};
use crate::error::Error;
use crate::parser::parse_program;
use crate::runtime::{self, Outcome, Transition, Value};
use crate::transform::{transform_program, TransformResult};
use crate::typecheck::check_program;

#[derive(Debug, Clone)]
pub struct Compiled {
    pub source: Expr,
    pub checked: Type,
    pub transformed: TransformResult,
}

pub fn check(src: &str) -> Result<Type, Error> {
    let e = parse_program(src)?;
    Ok(check_program(&e)?)
}

pub fn compile(src: &str) -> Result<Compiled, Error> {
    let source = parse_program(src)?;
    let checked = check_program(&source)?;
    let transformed = transform_program(&source)?;
    Ok(Compiled {
        source,
        checked,
        transformed,
    })
}

/// Passes `tr` through the Ready gate and runs it.
pub fn execute(
    tr: &TransformResult,
    max_steps: usize,
    observe: impl FnMut(&Transition<'_>),
) -> Result<Outcome, Error> {
    let (phi, e) = runtime::ready(tr)?;
    Ok(runtime::run_observed(&phi, &e, max_steps, observe)?)
}

pub fn run_source(src: &str) -> Result<Value, Error> {
    let c = compile(src)?;
    Ok(execute(&c.transformed, runtime::DEFAULT_MAX_STEPS, |_| {})?.value)
}
