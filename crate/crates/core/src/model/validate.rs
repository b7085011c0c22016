use std::collections::BTreeSet;
use std::fmt;

use super::{compute_histories, BtModel, HistoryId, MomentId, Point};

/// One frame-condition breach, with the witness that shows it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    ReflexivePrecedence {
        moment: MomentId,
    },
    NonTransitive {
        a: MomentId,
        b: MomentId,
        c: MomentId,
    },
    /// `m1 ≻ m3` and `m2 ≻ m3` with `m1`, `m2` distinct and incomparable.
    BackwardBranching {
        m1: MomentId,
        m2: MomentId,
        m3: MomentId,
    },
    EmptyModel,
    HistoryNotChain {
        history: HistoryId,
        earlier: MomentId,
        later: MomentId,
    },
    HistoryNotMaximal {
        history: HistoryId,
        extension: MomentId,
    },
    DuplicateHistory {
        history: HistoryId,
        first: HistoryId,
    },
    /// The declared history list differs from the maximal chains.
    HistoryMismatch {
        missing: Vec<Vec<MomentId>>,
        unexpected: Vec<HistoryId>,
    },
    IllFormedValuationPoint {
        atom: String,
        point: Point,
    },
    MissingSimilarity {
        base: Point,
    },
    IllFormedSimilarityPoint {
        base: Point,
        point: Point,
    },
    SimilarityReflexive {
        base: Point,
        point: Point,
    },
    SimilarityNonTransitive {
        base: Point,
        x: Point,
        y: Point,
        z: Point,
    },
    InstantEmpty {
        block: usize,
    },
    InstantOverlap {
        moment: MomentId,
    },
    InstantUncovered {
        moment: MomentId,
    },
    InstantMeetsHistoryTwice {
        block: usize,
        history: HistoryId,
        m1: MomentId,
        m2: MomentId,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    /// One line per violation, using moment names.
    pub fn render(&self, model: &BtModel) -> String {
        self.violations
            .iter()
            .map(|v| format!("{}\n", Describe(model, v)))
            .collect()
    }
}

struct Describe<'a>(&'a BtModel, &'a Violation);

impl fmt::Display for Describe<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let model = self.0;
        let m = |id: &MomentId| {
            if id.0 < model.moment_count() {
                model.moment_name(*id).to_string()
            } else {
                format!("#{}", id.0)
            }
        };
        let p = |pt: &Point| format!("{}@{}", m(&pt.moment), pt.history.0);
        match self.1 {
            Violation::ReflexivePrecedence { moment } => {
                write!(f, "precedence is reflexive at {}", m(moment))
            }
            Violation::NonTransitive { a, b, c } => write!(
                f,
                "precedence not transitive: {} < {} < {} but not {} < {}",
                m(a),
                m(b),
                m(c),
                m(a),
                m(c)
            ),
            Violation::BackwardBranching { m1, m2, m3 } => write!(
                f,
                "backward branching: {} and {} both precede {} but are incomparable",
                m(m1),
                m(m2),
                m(m3)
            ),
            Violation::EmptyModel => write!(f, "model has no moments"),
            Violation::HistoryNotChain {
                history,
                earlier,
                later,
            } => write!(
                f,
                "history {} is not a chain: {} is listed before {} but does not precede it",
                history.0,
                m(earlier),
                m(later)
            ),
            Violation::HistoryNotMaximal { history, extension } => write!(
                f,
                "history {} is not maximal: {} is comparable with all of its moments",
                history.0,
                m(extension)
            ),
            Violation::DuplicateHistory { history, first } => {
                write!(f, "history {} duplicates history {}", history.0, first.0)
            }
            Violation::HistoryMismatch {
                missing,
                unexpected,
            } => {
                let missing: Vec<String> = missing
                    .iter()
                    .map(|h| format!("[{}]", h.iter().map(&m).collect::<Vec<_>>().join(", ")))
                    .collect();
                let unexpected: Vec<String> = unexpected.iter().map(|h| h.0.to_string()).collect();
                write!(
                    f,
                    "declared histories differ from the maximal chains: missing {{{}}}, not maximal chains {{{}}}",
                    missing.join(", "),
                    unexpected.join(", ")
                )
            }
            Violation::IllFormedValuationPoint { atom, point } => {
                write!(f, "valuation of `{atom}` names non-point {}", p(point))
            }
            Violation::MissingSimilarity { base } => {
                write!(f, "no similarity order for point {}", p(base))
            }
            Violation::IllFormedSimilarityPoint { base, point } => write!(
                f,
                "similarity order of {} mentions non-point {}",
                p(base),
                p(point)
            ),
            Violation::SimilarityReflexive { base, point } => write!(
                f,
                "similarity order of {} is reflexive at {}",
                p(base),
                p(point)
            ),
            Violation::SimilarityNonTransitive { base, x, y, z } => write!(
                f,
                "similarity order of {} not transitive: {} < {} < {} but not {} < {}",
                p(base),
                p(x),
                p(y),
                p(z),
                p(x),
                p(z)
            ),
            Violation::InstantEmpty { block } => write!(f, "instant {block} is empty"),
            Violation::InstantOverlap { moment } => {
                write!(f, "moment {} lies in more than one instant", m(moment))
            }
            Violation::InstantUncovered { moment } => {
                write!(f, "moment {} lies in no instant", m(moment))
            }
            Violation::InstantMeetsHistoryTwice {
                block,
                history,
                m1,
                m2,
            } => write!(
                f,
                "instant {block} meets history {} twice ({} and {})",
                history.0,
                m(m1),
                m(m2)
            ),
        }
    }
}

/// Check every frame condition and well-formedness invariant of `model`.
pub fn validate(model: &BtModel) -> ValidationReport {
    let mut out = Vec::new();
    if model.moment_count() == 0 {
        out.push(Violation::EmptyModel);
    }
    check_precedence(model, &mut out);
    check_histories(model, &mut out);
    check_valuation(model, &mut out);
    check_similarity(model, &mut out);
    check_instants(model, &mut out);
    ValidationReport { violations: out }
}

fn check_precedence(model: &BtModel, out: &mut Vec<Violation>) {
    let prec = model.precedence();
    let ms: Vec<MomentId> = model.moments().collect();
    for &a in &ms {
        if prec.precedes(a, a) {
            out.push(Violation::ReflexivePrecedence { moment: a });
        }
    }
    for &a in &ms {
        for b in prec.successors(a) {
            if a == b {
                continue;
            }
            for c in prec.successors(b) {
                if c != b && !prec.precedes(a, c) {
                    out.push(Violation::NonTransitive { a, b, c });
                }
            }
        }
    }
    for &m3 in &ms {
        let past: Vec<MomentId> = ms
            .iter()
            .copied()
            .filter(|&x| x != m3 && prec.precedes(x, m3))
            .collect();
        for (i, &m1) in past.iter().enumerate() {
            for &m2 in &past[i + 1..] {
                if !prec.comparable(m1, m2) {
                    out.push(Violation::BackwardBranching { m1, m2, m3 });
                }
            }
        }
    }
}

fn check_histories(model: &BtModel, out: &mut Vec<Violation>) {
    let prec = model.precedence();
    let n = model.moment_count();
    for (i, h) in model.histories().iter().enumerate() {
        let hid = HistoryId(i);
        let ms = h.moments();
        for (j, &a) in ms.iter().enumerate() {
            for &b in &ms[j + 1..] {
                if !prec.precedes(a, b) {
                    out.push(Violation::HistoryNotChain {
                        history: hid,
                        earlier: a,
                        later: b,
                    });
                }
            }
        }
        for x in (0..n).map(MomentId) {
            if !h.contains(x) && ms.iter().all(|&y| prec.comparable(x, y)) {
                out.push(Violation::HistoryNotMaximal {
                    history: hid,
                    extension: x,
                });
            }
        }
        if let Some(first) = model.histories()[..i]
            .iter()
            .position(|g| moment_set(g.moments()) == moment_set(ms))
        {
            out.push(Violation::DuplicateHistory {
                history: hid,
                first: HistoryId(first),
            });
        }
    }

    let computed: BTreeSet<BTreeSet<MomentId>> = compute_histories(prec)
        .iter()
        .map(|h| moment_set(h.moments()))
        .collect();
    let declared: Vec<BTreeSet<MomentId>> = model
        .histories()
        .iter()
        .map(|h| moment_set(h.moments()))
        .collect();
    let missing: Vec<Vec<MomentId>> = computed
        .iter()
        .filter(|c| !declared.contains(c))
        .map(|c| c.iter().copied().collect())
        .collect();
    let unexpected: Vec<HistoryId> = declared
        .iter()
        .enumerate()
        .filter(|(_, d)| !computed.contains(*d))
        .map(|(i, _)| HistoryId(i))
        .collect();
    if !missing.is_empty() || !unexpected.is_empty() {
        out.push(Violation::HistoryMismatch {
            missing,
            unexpected,
        });
    }
}

fn moment_set(ms: &[MomentId]) -> BTreeSet<MomentId> {
    ms.iter().copied().collect()
}

fn check_valuation(model: &BtModel, out: &mut Vec<Violation>) {
    for (atom, pts) in model.valuation() {
        for &point in pts {
            if !model.is_point(point) {
                out.push(Violation::IllFormedValuationPoint {
                    atom: atom.clone(),
                    point,
                });
            }
        }
    }
}

fn check_similarity(model: &BtModel, out: &mut Vec<Violation>) {
    for &base in model.points() {
        if model.similarity_at(base).is_none() {
            out.push(Violation::MissingSimilarity { base });
        }
    }
    for (&base, order) in model.similarity() {
        if !model.is_point(base) {
            out.push(Violation::IllFormedSimilarityPoint { base, point: base });
            continue;
        }
        let mentioned: BTreeSet<Point> = order
            .pairs()
            .iter()
            .flat_map(|&(x, y)| [x, y])
            .chain(order.scope().into_iter().flatten().copied())
            .collect();
        for &point in &mentioned {
            if !model.is_point(point) {
                out.push(Violation::IllFormedSimilarityPoint { base, point });
            }
        }
        for &(x, y) in order.pairs() {
            if x == y {
                out.push(Violation::SimilarityReflexive { base, point: x });
            }
        }
        for &(x, y) in order.pairs() {
            for &(y2, z) in order
                .pairs()
                .range((y, Point::new(MomentId(0), HistoryId(0)))..)
            {
                if y2 != y {
                    break;
                }
                if x != y && y != z && !order.closer(x, z) {
                    out.push(Violation::SimilarityNonTransitive { base, x, y, z });
                }
            }
        }
    }
}

fn check_instants(model: &BtModel, out: &mut Vec<Violation>) {
    let Some(instants) = model.instants() else {
        return;
    };
    let mut seen = BTreeSet::new();
    for (i, block) in instants.blocks().iter().enumerate() {
        if block.is_empty() {
            out.push(Violation::InstantEmpty { block: i });
        }
        for &m in block {
            if !seen.insert(m) {
                out.push(Violation::InstantOverlap { moment: m });
            }
        }
        for (h, hist) in model.histories().iter().enumerate() {
            let on: Vec<MomentId> = block
                .iter()
                .copied()
                .filter(|&m| hist.contains(m))
                .collect();
            if on.len() > 1 {
                out.push(Violation::InstantMeetsHistoryTwice {
                    block: i,
                    history: HistoryId(h),
                    m1: on[0],
                    m2: on[1],
                });
            }
        }
    }
    for m in model.moments() {
        if !seen.contains(&m) {
            out.push(Violation::InstantUncovered { moment: m });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{History, InstantPartition, Precedence, SimilarityOrder};

    fn chain() -> BtModel {
        BtModel::from_edges(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap()
    }

    #[test]
    fn clean_models_validate() {
        assert!(validate(&chain()).is_valid());
        let fork = BtModel::from_edges(&["r", "x", "y"], &[("r", "x"), ("r", "y")]).unwrap();
        assert!(validate(&fork).is_valid());
    }

    #[test]
    fn reflexive_edge_is_flagged_once() {
        let mut m = chain();
        let mut prec = m.precedence().clone();
        prec.add(MomentId(1), MomentId(1));
        m.replace_precedence(prec);
        let report = validate(&m);
        let reflexive: Vec<_> = report
            .violations
            .iter()
            .filter(|v| matches!(v, Violation::ReflexivePrecedence { .. }))
            .collect();
        assert_eq!(
            reflexive,
            [&Violation::ReflexivePrecedence {
                moment: MomentId(1)
            }]
        );
    }

    #[test]
    fn v_shape_breaks_backward_linearity() {
        // x and y both precede z, and are incomparable.
        let mut prec = Precedence::new(3);
        prec.add(MomentId(0), MomentId(2));
        prec.add(MomentId(1), MomentId(2));
        let m = BtModel::from_frame(vec!["x".into(), "y".into(), "z".into()], prec);
        let report = validate(&m);
        assert!(report.violations.contains(&Violation::BackwardBranching {
            m1: MomentId(0),
            m2: MomentId(1),
            m3: MomentId(2)
        }));
    }

    #[test]
    fn broken_transitivity_and_declared_chain() {
        let mut m = chain();
        let mut prec = m.precedence().clone();
        prec.remove(MomentId(0), MomentId(2));
        m.replace_precedence(prec);
        let report = validate(&m);
        assert!(report.violations.contains(&Violation::NonTransitive {
            a: MomentId(0),
            b: MomentId(1),
            c: MomentId(2)
        }));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::HistoryNotChain { .. })));
    }

    #[test]
    fn non_maximal_history() {
        let mut m = chain();
        let mut hs = m.histories().to_vec();
        hs.push(History::new(vec![MomentId(0), MomentId(1)]));
        m.replace_histories(hs);
        let report = validate(&m);
        assert!(report.violations.contains(&Violation::HistoryNotMaximal {
            history: HistoryId(1),
            extension: MomentId(2)
        }));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::HistoryMismatch { .. })));
    }

    #[test]
    fn similarity_breaches() {
        let mut m = chain();
        let p = m.points().to_vec();
        m.set_similarity(p[0], SimilarityOrder::from_pairs([(p[1], p[1])]));
        m.set_similarity(
            p[1],
            SimilarityOrder::from_pairs([(p[0], p[1]), (p[1], p[2])]),
        );
        let report = validate(&m);
        assert!(report.violations.contains(&Violation::SimilarityReflexive {
            base: p[0],
            point: p[1]
        }));
        assert!(report
            .violations
            .contains(&Violation::SimilarityNonTransitive {
                base: p[1],
                x: p[0],
                y: p[1],
                z: p[2]
            }));
        m.remove_similarity(p[2]);
        assert!(validate(&m)
            .violations
            .contains(&Violation::MissingSimilarity { base: p[2] }));
    }

    #[test]
    fn ill_formed_valuation_point() {
        let mut m = BtModel::from_edges(&["r", "x", "y"], &[("r", "x"), ("r", "y")]).unwrap();
        let bad = Point::new(MomentId(1), HistoryId(1));
        m.set_atom("p", [bad]);
        assert_eq!(
            validate(&m).violations,
            [Violation::IllFormedValuationPoint {
                atom: "p".into(),
                point: bad
            }]
        );
    }

    #[test]
    fn instant_meeting_history_twice() {
        let mut m = chain();
        m.set_instants(Some(InstantPartition::new(vec![
            vec![MomentId(0), MomentId(1)],
            vec![MomentId(2)],
        ])));
        assert!(validate(&m)
            .violations
            .iter()
            .any(|v| matches!(v, Violation::InstantMeetsHistoryTwice { block: 0, .. })));
    }
}
