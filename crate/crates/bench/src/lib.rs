//! Shared inputs for the benchmarks.

use cfbt_core::generators::{fixture, random_formula, random_model, GenParams, FIXTURES};
use cfbt_core::{BtModel, Formula};

/// Every fixture paired with `count` random formulas over its atoms.
pub fn fixture_workload(count: u64, depth: usize) -> Vec<(&'static str, BtModel, Vec<Formula>)> {
    FIXTURES
        .iter()
        .map(|&name| {
            let model = fixture(name).expect("known fixture");
            let atoms: Vec<&str> = model.valuation().keys().map(String::as_str).collect();
            let formulas = (0..count)
                .map(|k| random_formula(k, depth, &atoms).expect("depth within cap"))
                .collect();
            (name, model, formulas)
        })
        .collect()
}

/// Random models of the largest generated size.
pub fn large_models(count: u64) -> Vec<BtModel> {
    (0..count)
        .map(|seed| random_model(seed, &GenParams::default()).expect("default params"))
        .collect()
}
