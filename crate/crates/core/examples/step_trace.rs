//! Every small step of a run, with the store before and after.

use lrp::pipeline::{compile, execute};
use lrp::runtime::DEFAULT_MAX_STEPS;

const SOURCE: &str = "
func f x : int with
  if-has x c : int bind-as c in
      c + 1
  else extract(x) in
let y = set(5, c, 5) in
f y
";

pub fn run() -> String {
    let c = compile(SOURCE).expect("compiles");
    let mut lines = Vec::new();
    let outcome = execute(&c.transformed, DEFAULT_MAX_STEPS, |t| lines.push(t.to_string()))
        .expect("runs");
    lines.push(format!("{} after {} steps", outcome.value, outcome.steps));
    lines.join("\n")
}

fn main() {
    println!("{}", run());
}
