//! Slow reference implementations used as test oracles.
//!
//! Nothing here calls the library's history computation, candidate sets,
//! closest-set selection or evaluator.

#![allow(dead_code)]

use std::collections::BTreeSet;

use cfbt_core::model::{BtModel, HistoryId, MomentId, Point, Policy};
use cfbt_core::Formula;

/// Maximal chains of the relation `precedes` over `n` moments, found by
/// trying every subset.
pub fn histories_by_subsets(
    n: usize,
    precedes: impl Fn(usize, usize) -> bool,
) -> BTreeSet<BTreeSet<usize>> {
    assert!(n <= 16, "subset enumeration is exponential");
    let comparable = |a: usize, b: usize| a == b || precedes(a, b) || precedes(b, a);
    let is_chain = |mask: u32| {
        (0..n).all(|a| mask >> a & 1 == 0 || (0..n).all(|b| mask >> b & 1 == 0 || comparable(a, b)))
    };
    let chains: Vec<u32> = (1u32..1 << n).filter(|&m| is_chain(m)).collect();
    let chain_set: BTreeSet<u32> = chains.iter().copied().collect();
    chains
        .iter()
        .filter(|&&m| (0..n).all(|x| m >> x & 1 == 1 || !chain_set.contains(&(m | 1 << x))))
        .map(|&m| (0..n).filter(|x| m >> x & 1 == 1).collect())
        .collect()
}

/// History index of the model whose moments are exactly `set`.
fn history_with(model: &BtModel, set: &BTreeSet<usize>) -> HistoryId {
    let found = (0..model.histories().len()).find(|&h| {
        let moments: BTreeSet<usize> = model
            .history(HistoryId(h))
            .moments()
            .iter()
            .map(|m| m.0)
            .collect();
        &moments == set
    });
    HistoryId(found.expect("oracle history is one of the model's histories"))
}

fn moments_of(model: &BtModel, h: HistoryId) -> BTreeSet<usize> {
    model.history(h).moments().iter().map(|m| m.0).collect()
}

fn all_points(model: &BtModel) -> Vec<Point> {
    let mut out = Vec::new();
    for h in 0..model.histories().len() {
        for m in moments_of(model, HistoryId(h)) {
            out.push(Point::new(MomentId(m), HistoryId(h)));
        }
    }
    out.sort();
    out
}

fn candidates(model: &BtModel, base: Point, policy: Policy) -> Vec<Point> {
    let order = model.similarity_at(base);
    let in_scope = |p: &Point| match order.and_then(|o| o.scope()) {
        Some(scope) => scope.contains(p),
        None => true,
    };
    let same_instant = |p: &Point| {
        let blocks = model.instants().expect("copresent needs instants").blocks();
        blocks
            .iter()
            .any(|b| b.contains(&base.moment) && b.contains(&p.moment))
    };
    all_points(model)
        .into_iter()
        .filter(|p| {
            *p == base
                || (in_scope(p)
                    && match policy {
                        Policy::Unrestricted => true,
                        Policy::CoPresent => same_instant(p),
                        Policy::HistAccessible => p.moment == base.moment,
                    })
        })
        .collect()
}

/// Direct recursive reading of the satisfaction clauses.
pub fn naive_eval(model: &BtModel, i: Point, f: &Formula, policy: Policy) -> bool {
    let prec = |a: usize, b: usize| model.precedence().precedes(MomentId(a), MomentId(b));
    match f {
        Formula::Atom(name) => model.valuation().get(name).is_some_and(|s| s.contains(&i)),
        Formula::Not(g) => !naive_eval(model, i, g, policy),
        Formula::Or(a, b) => naive_eval(model, i, a, policy) || naive_eval(model, i, b, policy),
        Formula::AllFuture(g) => moments_of(model, i.history)
            .into_iter()
            .filter(|&m| prec(i.moment.0, m))
            .all(|m| naive_eval(model, Point::new(MomentId(m), i.history), g, policy)),
        Formula::AllPast(g) => moments_of(model, i.history)
            .into_iter()
            .filter(|&m| prec(m, i.moment.0))
            .all(|m| naive_eval(model, Point::new(MomentId(m), i.history), g, policy)),
        Formula::HistNec(g) => {
            let n = model.moment_count();
            histories_by_subsets(n, prec)
                .iter()
                .filter(|h| h.contains(&i.moment.0))
                .all(|h| {
                    naive_eval(
                        model,
                        Point::new(i.moment, history_with(model, h)),
                        g,
                        policy,
                    )
                })
        }
        Formula::Counterfactual(a, b) => {
            let live: Vec<Point> = candidates(model, i, policy)
                .into_iter()
                .filter(|&c| naive_eval(model, c, a, policy))
                .collect();
            let closer = |x: Point, y: Point| {
                model
                    .similarity_at(i)
                    .is_some_and(|o| o.pairs().contains(&(x, y)))
            };
            live.iter()
                .filter(|&&y| !live.iter().any(|&x| closer(x, y)))
                .all(|&v| naive_eval(model, v, b, policy))
        }
    }
}

/// Every point of the model, from the oracle's own enumeration.
pub fn points(model: &BtModel) -> Vec<Point> {
    all_points(model)
}
