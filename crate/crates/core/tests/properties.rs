mod props;

use proptest::test_runner::{Config, TestRunner};

fn check(suite: fn(&mut TestRunner) -> Result<(), String>) {
    let mut runner = TestRunner::new(Config { failure_persistence: None, ..Config::with_cases(100) });
    if let Err(e) = suite(&mut runner) {
        panic!("{e}");
    }
}

#[test]
fn duality() {
    check(props::duality_laws);
}

#[test]
fn flatten() {
    check(props::flatten_laws);
}

#[test]
fn frobenius_and_trace() {
    check(props::frobenius_trace_laws);
}

#[test]
fn grassmann() {
    check(props::grassmann_laws);
}

#[test]
fn macwilliams_biduality() {
    check(props::macwilliams_biduality);
}
