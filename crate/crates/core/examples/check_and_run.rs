//! Parse, type-check, transform and evaluate a program in one go.

use lrp::pipeline;

const SOURCE: &str = "
let y = 5 in
func f x : int with
  x + y in
f 1
";

pub fn run() -> String {
    let ty = pipeline::check(SOURCE).expect("well-typed");
    let value = pipeline::run_source(SOURCE).expect("runs");
    format!("type {ty}, value {value}")
}

fn main() {
    println!("{}", run());
}
