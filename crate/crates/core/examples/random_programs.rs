//! Generate well-typed programs and compare the runtime against the oracle.

use lrp::testkit::gen::{gen_well_typed, GenConfig};
use lrp::testkit::suite;

pub fn run() -> String {
    let mut lines = Vec::new();
    for seed in 0..5 {
        let program = gen_well_typed(&GenConfig::with_seed(seed));
        let case = suite::case(seed).expect("generated programs compile");
        suite::oracle_agrees(&case).expect("runtime and oracle agree");
        let value = suite::sound_run(&case).expect("runs");
        lines.push(format!("{seed}: {program}  ⇒  {value}"));
    }
    lines.join("\n")
}

fn main() {
    println!("{}", run());
}
