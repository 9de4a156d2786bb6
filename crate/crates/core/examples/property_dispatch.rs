//! `if-has` picks a branch at compile time from the argument's type, so one
//! function yields a specialization per property shape it is called with.

use lrp::pipeline::{compile, run_source};
use lrp::pretty::delta_lines;

const SOURCE: &str = "
func price x : int with
  if-has x discount : int bind-as d in
    extract(x) - d
  else extract(x) in
price 100 + price (set(100, discount, 15))
";

pub fn run() -> String {
    let c = compile(SOURCE).expect("compiles");
    let mut out = vec![c.transformed.expr.to_string()];
    out.extend(delta_lines(&c.transformed.delta));
    out.push(format!("= {}", run_source(SOURCE).expect("runs")));
    out.join("\n")
}

fn main() {
    println!("{}", run());
}
