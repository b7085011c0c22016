mod support;

use cfbt_core::generators::{fixture, formula_from, random_model, GenParams, FIXTURES};
use cfbt_core::{BtModel, Evaluator, Policy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::naive::{naive_eval, points};

fn policies(model: &BtModel) -> Vec<Policy> {
    Policy::ALL
        .into_iter()
        .filter(|&p| p != Policy::CoPresent || model.instants().is_some())
        .collect()
}

fn agree(model: &BtModel, label: &str, formulas: usize, seed: u64) {
    let atoms: Vec<&str> = model.valuation().keys().map(String::as_str).collect();
    let atoms = if atoms.is_empty() { vec!["p"] } else { atoms };
    assert_eq!(points(model), model.points());
    for policy in policies(model) {
        let ev = Evaluator::new(model, policy).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..formulas {
            let f = formula_from(&mut rng, 1 + k % 4, &atoms);
            let ext = ev.extension(&f);
            for (i, &p) in model.points().iter().enumerate() {
                assert_eq!(
                    ext.contains(i),
                    naive_eval(model, p, &f, policy),
                    "{label}, {policy}, {} at {}",
                    f,
                    model.point_ref(p)
                );
            }
        }
    }
}

#[test]
fn fixtures_agree_with_naive_evaluator() {
    for name in FIXTURES {
        agree(&fixture(name).unwrap(), name, 200, 5);
    }
}

#[test]
fn random_models_agree_with_naive_evaluator() {
    let params = GenParams {
        max_moments: 6,
        ..GenParams::default()
    };
    for seed in 0..40 {
        let ranks = GenParams {
            similarity: cfbt_core::generators::SimilarityKind::Pairs,
            ..params
        };
        let m = random_model(seed, if seed % 2 == 0 { &params } else { &ranks }).unwrap();
        agree(&m, &format!("seed {seed}"), 25, seed);
    }
}
