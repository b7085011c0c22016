//! Search for models where a counterfactual survives but its strengthened
//! form does not: `p => r` true and `p & q => r` false at the same point.

use thiserror::Error;

use crate::formula::Formula;
use crate::generators::{random_model, GenParams, SimilarityKind};
use crate::model::{BtModel, Point, Policy};
use crate::semantics::Evaluator;

/// Random models tried per seed before giving up.
pub const SEARCH_BOUND: u64 = 256;

#[derive(Debug, Clone)]
pub struct Witness {
    pub model: BtModel,
    pub point: Point,
    pub weak: Formula,
    pub strong: Formula,
    pub policy: Policy,
    /// Offset from the starting seed of the model that produced the hit.
    pub attempt: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("no counterexample among {0} generated models")]
    SearchExhausted(u64),
}

/// `p => r` and `p & q => r`.
pub fn strengthening_pair() -> (Formula, Formula) {
    let (p, q, r) = (Formula::atom("p"), Formula::atom("q"), Formula::atom("r"));
    (
        Formula::cf(p.clone(), r.clone()),
        Formula::cf(Formula::and(p, q), r),
    )
}

/// First point of `model`, in point order, where the weak counterfactual
/// holds and the strengthened one fails.
pub fn witness_point(model: &BtModel, policy: Policy) -> Option<Point> {
    let (weak, strong) = strengthening_pair();
    let ev = Evaluator::new(model, policy).ok()?;
    let w = ev.extension(&weak);
    let s = ev.extension(&strong);
    (0..model.points().len())
        .find(|&i| w.contains(i) && !s.contains(i))
        .map(|i| model.points()[i])
}

/// Deterministic search over small random models derived from `seed`,
/// under the unrestricted policy.
pub fn find_strengthening_counterexample(seed: u64) -> Result<Witness, SearchError> {
    let params = GenParams {
        max_moments: 4,
        branching: 2,
        atoms: 3,
        similarity: SimilarityKind::Ranks,
        with_instants: true,
    };
    let (weak, strong) = strengthening_pair();
    for attempt in 0..SEARCH_BOUND {
        let model = random_model(seed.wrapping_add(attempt), &params).expect("params within caps");
        if let Some(point) = witness_point(&model, Policy::Unrestricted) {
            return Ok(Witness {
                model,
                point,
                weak,
                strong,
                policy: Policy::Unrestricted,
                attempt,
            });
        }
    }
    Err(SearchError::SearchExhausted(SEARCH_BOUND))
}
