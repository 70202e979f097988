//! Property suites shared by the `properties` and `acceptance` targets.

pub mod cells;
pub mod equality;
pub mod numeric;
pub mod recomposition;

use std::fmt::Debug;

use proptest::strategy::Strategy;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub struct Prop {
    pub name: &'static str,
    pub run: fn(u32) -> Result<(), String>,
}

pub fn check<S>(cases: u32, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S: Strategy,
    S::Value: Debug,
{
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&s, f).map_err(|e| e.to_string())
}

pub fn suites() -> Vec<(&'static str, Vec<Prop>)> {
    vec![
        ("recomposition", recomposition::props()),
        ("numeric", numeric::props()),
        ("equality", equality::props()),
        ("cells", cells::props()),
    ]
}
