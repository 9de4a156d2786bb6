//! The generator has to reach every surface form and every rule the
//! transformer and runtime can fire on surface programs.

use std::collections::BTreeMap;

use lrp::ast::{Expr, ExprKind};
use lrp::pipeline;
use lrp::testkit::gen::{gen_well_typed, GenConfig};
use lrp::transform::{transform_program_with_stats, RULES};

const SEEDS: u64 = 1000;

// Both need a `f[n]` in the input program, which the parser cannot produce.
const UNREACHABLE: [&str; 2] = ["R-V-Func", "R-App-Compiled"];

const SURFACE: [&str; 13] = [
    "int", "unit", "var", "func", "let", "if-has", "set", "get", "erase", "extract", "app",
    "plus", "minus",
];

// Binders are renamed apart at transform time, so a binding is never
// shadowed at runtime and App-2, Let-2 and Retrieve-After-2 stay idle here.
const STEPS: [&str; 7] = [
    "Var",
    "App-1",
    "App-With-Func",
    "Plus",
    "Minus",
    "Let-1",
    "Drop-After-2",
];

fn surface_name(e: &Expr) -> &'static str {
    use ExprKind::*;
    match e.kind {
        Int(_) => "int",
        Unit => "unit",
        Var(_) => "var",
        Func { .. } => "func",
        Let { .. } => "let",
        IfHas { .. } => "if-has",
        Set { .. } => "set",
        Get { .. } => "get",
        Erase { .. } => "erase",
        Extract(_) => "extract",
        App(..) => "app",
        Plus(..) => "plus",
        Minus(..) => "minus",
        _ => "internal",
    }
}

#[test]
fn generator_reaches_every_form_and_rule() {
    let mut forms: BTreeMap<&str, usize> = BTreeMap::new();
    let mut rules: BTreeMap<&str, usize> = BTreeMap::new();
    let mut steps: BTreeMap<&str, usize> = BTreeMap::new();
    for seed in 0..SEEDS {
        let e = gen_well_typed(&GenConfig::with_seed(seed));
        e.any(&mut |n| {
            *forms.entry(surface_name(n)).or_default() += 1;
            false
        });
        let (tr, stats) = transform_program_with_stats(&e).unwrap();
        for (rule, n) in stats {
            *rules.entry(rule).or_default() += n;
        }
        pipeline::execute(&tr, lrp::runtime::DEFAULT_MAX_STEPS, |t| {
            *steps.entry(t.rule).or_default() += 1;
        })
        .unwrap();
    }
    assert_eq!(forms.get("internal"), None);
    for f in SURFACE {
        assert!(forms.contains_key(f), "no `{f}` in {SEEDS} programs");
    }
    for r in RULES.iter().filter(|r| !UNREACHABLE.contains(r)) {
        assert!(rules.contains_key(r), "{r} never fired: {rules:?}");
    }
    for s in STEPS {
        assert!(steps.contains_key(s), "step {s} never taken: {steps:?}");
    }
    for s in ["App-2", "Let-2", "Retrieve-After-2"] {
        assert!(!steps.contains_key(s), "{s} taken on a renamed program");
    }
}
