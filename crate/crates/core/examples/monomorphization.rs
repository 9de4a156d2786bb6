//! Calls with the same argument shape share a specialization; a different
//! property payload gets its own.

use lrp::pipeline::compile;

fn monos(args: [&str; 2]) -> usize {
    let src = format!(
        "func f x : int with if-has x c : int bind-as k in k + 1 else extract(x) in f ({}) + f ({})",
        args[0], args[1]
    );
    compile(&src).expect("compiles").transformed.delta.monos.len()
}

pub fn run() -> String {
    let same = monos(["set(1, c, 5)", "set(2, c, 5)"]);
    let different = monos(["set(1, c, 5)", "set(1, c, 6)"]);
    let higher = compile(
        "func inc n : int with n + 1 in \
         func twice g : int -> int with \
         if-has g step : int bind-as s in s else extract(g) (extract(g) 0) in \
         twice inc + twice inc",
    )
    .expect("compiles");
    format!(
        "same payload: {same}, different payloads: {different}, higher-order: {}",
        higher.transformed.expr
    )
}

fn main() {
    println!("{}", run());
}
