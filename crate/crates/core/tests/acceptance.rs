//! One line per acceptance criterion; exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use lrp::ast::Type;
use lrp::pipeline::{compile, run_source};
use lrp::pretty::delta_lines;
use lrp::runtime::Value;
use lrp::testkit::suite::{self, Case};

const SEEDS: u64 = 1000;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let corpus = suite::corpus(SEEDS);
    let criteria: Vec<Criterion> = vec![
        ("closure/offset_add golden", Box::new(offset_add)),
        ("const_property/dispatch golden", Box::new(dispatch)),
        (
            "property-free transformation",
            Box::new(|| over(&corpus, suite::property_free)),
        ),
        (
            "deterministic transformation",
            Box::new(|| over(&corpus, suite::deterministic)),
        ),
        (
            "progress, preservation and empty final store",
            Box::new(|| over(&corpus, |c| suite::sound_run(c).map(|_| ()))),
        ),
        (
            "runtime agrees with oracle",
            Box::new(|| over(&corpus, suite::oracle_agrees)),
        ),
        (
            "parse/pretty and IR round trips",
            Box::new(|| {
                over(&corpus, |c| {
                    suite::parse_round_trip(c)?;
                    suite::ir_round_trip(c)
                })
            }),
        ),
        ("monomorphization reuse", Box::new(mono_reuse)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn over(
    corpus: &Result<Vec<Case>, String>,
    check: impl Fn(&Case) -> Result<(), String>,
) -> Outcome {
    let cases = corpus.as_ref().map_err(Clone::clone)?;
    let failures: Vec<String> = cases.iter().filter_map(|c| check(c).err()).collect();
    match failures.first() {
        None => Ok(format!("{} programs", cases.len())),
        Some(first) => Err(format!("{} violations, first: {first}", failures.len())),
    }
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, want {want:?}"))
    }
}

fn offset_add() -> Outcome {
    let src = include_str!("../programs/offset_add.lrp");
    let start = Instant::now();
    let c = compile(src).map_err(|e| e.to_string())?;
    expect("type", &c.checked, &Type::Int)?;
    expect("expr", c.transformed.expr.to_string().as_str(), "let y = 5 in f[1] 1")?;
    expect(
        "delta",
        delta_lines(&c.transformed.delta),
        vec![
            "f :: x : int . x + y : int".to_string(),
            "f[1] ▷ x : int . x + y : int".to_string(),
        ],
    )?;
    expect("value", run_source(src).map_err(|e| e.to_string())?, Value::Int(6))?;
    let took = start.elapsed();
    if took >= Duration::from_secs(1) {
        return Err(format!("took {took:?}"));
    }
    Ok(format!("{took:?}"))
}

fn dispatch() -> Outcome {
    let src = include_str!("../programs/dispatch.lrp");
    let c = compile(src).map_err(|e| e.to_string())?;
    expect("type", &c.checked, &Type::Int)?;
    expect("expr", c.transformed.expr.to_string().as_str(), "let y = 5 in f[1] y")?;
    let monos: Vec<_> = c.transformed.delta.monos.values().collect();
    expect("monomorphizations", monos.len(), 1)?;
    expect("mono body", monos[0].body.to_string().as_str(), "let c = 5 in c + 1")?;
    expect("mono type", &monos[0].result_ty, &Type::Int)?;
    expect("value", run_source(src).map_err(|e| e.to_string())?, Value::Int(6))?;
    Ok("exact".into())
}

fn mono_reuse() -> Outcome {
    let count = |args: (&str, &str)| -> Result<usize, String> {
        let src = format!(
            "func f x : int with if-has x c : int bind-as k in k + 1 else extract(x) in \
             f ({}) + f ({})",
            args.0, args.1
        );
        let c = compile(&src).map_err(|e| e.to_string())?;
        Ok(c.transformed.delta.monos.len())
    };
    expect("equal payloads", count(("set(1, c, 5)", "set(2, c, 5)"))?, 1)?;
    expect("different payloads", count(("set(1, c, 5)", "set(1, c, 6)"))?, 2)?;
    Ok("1 and 2 monomorphizations".into())
}
