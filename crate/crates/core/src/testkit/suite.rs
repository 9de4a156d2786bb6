//! Per-program checks shared by the property tests and the acceptance run.
//! Each returns `Err` with a readable description of the violation.

use crate::ast::{Expr, ExprKind, Type};
use crate::ir;
use crate::parser::parse_program;
use crate::runtime::{self, Value, DEFAULT_MAX_STEPS};
use crate::testkit::gen::{gen_well_typed, GenConfig};
use crate::testkit::oracle::oracle_eval;
use crate::transform::{transform_program, TransformResult};
use crate::typecheck::check_program;

/// A generated program with everything the checks need.
#[derive(Debug, Clone)]
pub struct Case {
    pub seed: u64,
    pub source: Expr,
    pub checked: Type,
    pub transformed: TransformResult,
}

pub fn case(seed: u64) -> Result<Case, String> {
    let source = gen_well_typed(&GenConfig::with_seed(seed));
    let checked = check_program(&source).map_err(|e| format!("seed {seed}: {e}\n  {source}"))?;
    let transformed =
        transform_program(&source).map_err(|e| format!("seed {seed}: {e}\n  {source}"))?;
    Ok(Case {
        seed,
        source,
        checked,
        transformed,
    })
}

/// Seeds `0..n`.
pub fn corpus(n: u64) -> Result<Vec<Case>, String> {
    (0..n).map(case).collect()
}

fn surface_or_propertied(e: &Expr) -> bool {
    e.any(&mut |n| {
        matches!(
            n.kind,
            ExprKind::Propertied(_)
                | ExprKind::Func { .. }
                | ExprKind::IfHas { .. }
                | ExprKind::Set { .. }
                | ExprKind::Get { .. }
                | ExprKind::Erase { .. }
                | ExprKind::Extract(_)
        )
    })
}

/// A program of non-propertied type transforms to a property-free one,
/// monomorphizations included.
pub fn property_free(c: &Case) -> Result<(), String> {
    let tr = &c.transformed;
    if tr.ty.is_propertied() {
        return Ok(());
    }
    if !tr.ty.is_property_free() {
        return Err(format!("seed {}: result type `{}`", c.seed, tr.ty));
    }
    if surface_or_propertied(&tr.expr) || tr.expr.mentions_properties() {
        return Err(format!("seed {}: properties left in `{}`", c.seed, tr.expr));
    }
    for ((f, n), m) in &tr.delta.monos {
        if surface_or_propertied(&m.body) || m.body.mentions_properties() {
            return Err(format!("seed {}: properties left in {f}[{n}]: `{}`", c.seed, m.body));
        }
        if !m.param_ty.is_property_free() || !m.result_ty.is_property_free() {
            return Err(format!("seed {}: propertied signature on {f}[{n}]", c.seed));
        }
    }
    Ok(())
}

/// The transformer type agrees with the checker's.
pub fn types_agree(c: &Case) -> Result<(), String> {
    if c.transformed.ty.same_shape(&c.checked) {
        Ok(())
    } else {
        Err(format!(
            "seed {}: checker says `{}`, transformer `{}`",
            c.seed, c.checked, c.transformed.ty
        ))
    }
}

/// Transforming twice gives byte-identical IR.
pub fn deterministic(c: &Case) -> Result<(), String> {
    let again = transform_program(&c.source).map_err(|e| format!("seed {}: {e}", c.seed))?;
    let a = ir_json(c.seed, &c.transformed)?;
    let b = ir_json(c.seed, &again)?;
    if a == b {
        Ok(())
    } else {
        Err(format!("seed {}: two transformations differ", c.seed))
    }
}

fn ir_json(seed: u64, tr: &TransformResult) -> Result<String, String> {
    ir::encode(tr)
        .map(|d| ir::to_json(&d))
        .map_err(|e| format!("seed {seed}: {e}"))
}

/// Runs the program, requiring that every configuration keeps the program's
/// type and that the store ends empty.
pub fn sound_run(c: &Case) -> Result<Value, String> {
    let tr = &c.transformed;
    let (phi, e) = runtime::ready(tr).map_err(|e| format!("seed {}: {e}", c.seed))?;
    let start = runtime::config_type(&tr.delta, &runtime::Store::new(), &e)
        .map_err(|err| format!("seed {}: initial configuration: {err}", c.seed))?;
    if start != tr.ty {
        return Err(format!(
            "seed {}: initial configuration has type `{start}`, program `{}`",
            c.seed, tr.ty
        ));
    }
    let mut broken = None;
    let outcome = runtime::run_observed(&phi, &e, DEFAULT_MAX_STEPS, |t| {
        if broken.is_some() {
            return;
        }
        match runtime::config_type(&tr.delta, t.after, t.to) {
            Ok(ty) if ty == start => {}
            Ok(ty) => broken = Some(format!("`{t}` changes the type to `{ty}`")),
            Err(err) => broken = Some(format!("`{t}` leaves an ill-typed configuration: {err}")),
        }
    })
    .map_err(|e| format!("seed {}: {e}", c.seed))?;
    if let Some(msg) = broken {
        return Err(format!("seed {}: {msg}", c.seed));
    }
    Ok(outcome.value)
}

pub fn oracle_agrees(c: &Case) -> Result<(), String> {
    let ran = sound_run(c)?;
    let expected = oracle_eval(&c.transformed).map_err(|e| format!("seed {}: oracle: {e}", c.seed))?;
    if ran == expected {
        Ok(())
    } else {
        Err(format!("seed {}: runtime gives {ran}, oracle {expected}", c.seed))
    }
}

pub fn parse_round_trip(c: &Case) -> Result<(), String> {
    let text = c.source.to_string();
    match parse_program(&text) {
        Ok(back) if back == c.source => Ok(()),
        Ok(back) => Err(format!("seed {}: `{text}` reparses as `{back}`", c.seed)),
        Err(e) => Err(format!("seed {}: `{text}` does not reparse: {e}", c.seed)),
    }
}

pub fn ir_round_trip(c: &Case) -> Result<(), String> {
    let doc = ir::encode(&c.transformed).map_err(|e| format!("seed {}: {e}", c.seed))?;
    let back = ir::from_json(&ir::to_json(&doc))
        .and_then(|d| ir::decode(&d))
        .map_err(|e| format!("seed {}: {e}", c.seed))?;
    let tr = &c.transformed;
    if back.expr == tr.expr && back.delta.monos == tr.delta.monos && back.ty == tr.ty {
        Ok(())
    } else {
        Err(format!("seed {}: IR decode differs from the original", c.seed))
    }
}
