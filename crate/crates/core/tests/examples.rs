#[allow(dead_code)]
#[path = "../examples/check_and_run.rs"]
mod check_and_run;
#[allow(dead_code)]
#[path = "../examples/property_dispatch.rs"]
mod property_dispatch;
#[allow(dead_code)]
#[path = "../examples/monomorphization.rs"]
mod monomorphization;
#[allow(dead_code)]
#[path = "../examples/step_trace.rs"]
mod step_trace;
#[allow(dead_code)]
#[path = "../examples/ir_round_trip.rs"]
mod ir_round_trip;
#[allow(dead_code)]
#[path = "../examples/random_programs.rs"]
mod random_programs;

#[test]
fn check_and_run_example() {
    assert_eq!(check_and_run::run(), "type int, value 6");
}

#[test]
fn property_dispatch_example() {
    let out = property_dispatch::run();
    assert!(out.ends_with("= 185"), "{out}");
    assert_eq!(out.lines().filter(|l| l.contains('▷')).count(), 2);
}

#[test]
fn monomorphization_example() {
    let out = monomorphization::run();
    assert!(out.starts_with("same payload: 1, different payloads: 2"), "{out}");
}

#[test]
fn step_trace_example() {
    let out = step_trace::run();
    assert!(out.ends_with("6 after 9 steps"), "{out}");
}

#[test]
fn ir_round_trip_example() {
    assert!(ir_round_trip::run().ends_with("value 42"));
}

#[test]
fn random_programs_example() {
    assert_eq!(random_programs::run().lines().count(), 5);
}
