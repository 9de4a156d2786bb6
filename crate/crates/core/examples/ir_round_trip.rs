//! Save a transformed program as JSON and run it after loading it back.

use lrp::ir;
use lrp::pipeline::{compile, execute};
use lrp::runtime::DEFAULT_MAX_STEPS;

const SOURCE: &str = "let base = 40 in func add x : int with x + base in add 2";

pub fn run() -> String {
    let tr = compile(SOURCE).expect("compiles").transformed;
    let json = ir::to_json(&ir::encode(&tr).expect("property-free"));
    let loaded = ir::from_json(&json).and_then(|d| ir::decode(&d)).expect("loads");
    let value = execute(&loaded, DEFAULT_MAX_STEPS, |_| {}).expect("runs").value;
    format!("{} bytes of IR, value {value}", json.len())
}

fn main() {
    println!("{}", run());
}
