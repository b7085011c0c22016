//! Seeded random models and formulas, named fixtures, and invalid mutants.
//!
//! Everything here is a pure function of its seed and parameters.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::Formula;
use crate::model::{
    BtModel, History, HistoryId, InstantPartition, MomentId, Point, Precedence, SimilarityOrder,
};

pub const ATOM_NAMES: [&str; 4] = ["p", "q", "r", "s"];

pub const MAX_MOMENTS: usize = 12;
pub const MAX_BRANCHING: usize = 3;
pub const MAX_FORMULA_DEPTH: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityKind {
    Ranks,
    Pairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub max_moments: usize,
    pub branching: usize,
    pub atoms: usize,
    pub similarity: SimilarityKind,
    pub with_instants: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            max_moments: MAX_MOMENTS,
            branching: MAX_BRANCHING,
            atoms: 3,
            similarity: SimilarityKind::Ranks,
            with_instants: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("generator parameter `{0}` out of range")]
    OutOfRange(&'static str),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random rooted tree of at most `max_moments` moments (at least one),
/// with random valuation and similarity.
pub fn random_model(seed: u64, params: &GenParams) -> Result<BtModel, GenError> {
    if params.max_moments == 0 || params.max_moments > MAX_MOMENTS {
        return Err(GenError::OutOfRange("max_moments"));
    }
    if params.branching == 0 || params.branching > MAX_BRANCHING {
        return Err(GenError::OutOfRange("branching"));
    }
    if params.atoms > ATOM_NAMES.len() {
        return Err(GenError::OutOfRange("atoms"));
    }
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=params.max_moments);

    // parent[i] < i, so moment 0 is the root and depth is well defined.
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut children = vec![0usize; n];
    for i in 1..n {
        let open: Vec<usize> = (0..i).filter(|&j| children[j] < params.branching).collect();
        let &p = open
            .choose(&mut rng)
            .expect("the newest moment is always open");
        children[p] += 1;
        parent.push(Some(p));
    }
    let mut prec = Precedence::new(n);
    for (i, p) in parent.iter().enumerate() {
        if let Some(p) = p {
            prec.add(MomentId(*p), MomentId(i));
        }
    }
    let names = (0..n).map(|i| format!("m{i}")).collect();
    let mut model = BtModel::from_frame(names, prec.transitive_closure());

    let points = model.points().to_vec();
    for name in &ATOM_NAMES[..params.atoms] {
        let pts: Vec<Point> = points
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(0.5))
            .collect();
        model.set_atom(*name, pts);
    }

    for &base in &points {
        let order = match params.similarity {
            SimilarityKind::Ranks => {
                let levels = rng.gen_range(1..=points.len().max(1) as i64);
                let ranks: BTreeMap<Point, i64> = points
                    .iter()
                    .map(|&p| (p, rng.gen_range(0..levels)))
                    .collect();
                SimilarityOrder::from_ranks(&ranks)
            }
            SimilarityKind::Pairs => random_pairs(&mut rng, &points),
        };
        let scope = if rng.gen_ratio(1, 4) {
            let mut s: BTreeSet<Point> = points
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.6))
                .collect();
            s.insert(base);
            Some(s)
        } else {
            None
        };
        model.set_similarity(base, order.with_scope(scope));
    }

    if params.with_instants {
        let mut depth = vec![0usize; n];
        for i in 1..n {
            depth[i] = depth[parent[i].expect("non-root")] + 1;
        }
        let levels = depth.iter().max().copied().unwrap_or(0) + 1;
        let blocks = (0..levels)
            .map(|d| (0..n).filter(|&i| depth[i] == d).map(MomentId).collect())
            .collect();
        model.set_instants(Some(InstantPartition::new(blocks)));
    }
    Ok(model)
}

// Pairs consistent with a random linear extension, then closed, so the
// result is a strict partial order.
#[allow(clippy::needless_range_loop)]
fn random_pairs(rng: &mut ChaCha8Rng, points: &[Point]) -> SimilarityOrder {
    let mut perm = points.to_vec();
    perm.shuffle(rng);
    let density = rng.gen_range(0.1..0.7);
    let k = perm.len();
    let mut rel = vec![vec![false; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            rel[i][j] = rng.gen_bool(density);
        }
    }
    for m in 0..k {
        for i in 0..k {
            if rel[i][m] {
                for j in 0..k {
                    if rel[m][j] {
                        rel[i][j] = true;
                    }
                }
            }
        }
    }
    SimilarityOrder::from_pairs(
        (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .filter(|&(i, j)| rel[i][j])
            .map(|(i, j)| (perm[i], perm[j]))
            .collect::<Vec<_>>(),
    )
}

#[derive(Clone, Copy)]
enum Node {
    Atom,
    Top,
    Bot,
    Not,
    Or,
    And,
    Implies,
    Iff,
    Cf,
    G,
    H,
    F,
    P,
    Nec,
    Poss,
}

const NODES: [Node; 15] = [
    Node::Atom,
    Node::Top,
    Node::Bot,
    Node::Not,
    Node::Or,
    Node::And,
    Node::Implies,
    Node::Iff,
    Node::Cf,
    Node::G,
    Node::H,
    Node::F,
    Node::P,
    Node::Nec,
    Node::Poss,
];

/// A random formula of depth at most `depth` (in connectives) over `atoms`.
pub fn random_formula(seed: u64, depth: usize, atoms: &[&str]) -> Result<Formula, GenError> {
    if depth > MAX_FORMULA_DEPTH {
        return Err(GenError::OutOfRange("depth"));
    }
    if atoms.is_empty() {
        return Err(GenError::OutOfRange("atoms"));
    }
    Ok(formula_from(&mut rng(seed), depth, atoms))
}

/// Same as [`random_formula`] but drawing from a caller's generator.
pub fn formula_from(rng: &mut impl Rng, depth: usize, atoms: &[&str]) -> Formula {
    let pick_atom = |rng: &mut dyn rand::RngCore| Formula::atom(*atoms.choose(rng).expect("atoms"));
    if depth == 0 {
        return pick_atom(rng);
    }
    let sub = |rng: &mut _| formula_from(rng, depth - 1, atoms);
    match NODES[rng.gen_range(0..NODES.len())] {
        Node::Atom => pick_atom(rng),
        Node::Top => Formula::top(),
        Node::Bot => Formula::bot(),
        Node::Not => Formula::not(sub(rng)),
        Node::Or => Formula::or(sub(rng), sub(rng)),
        Node::And => Formula::and(sub(rng), sub(rng)),
        Node::Implies => Formula::implies(sub(rng), sub(rng)),
        Node::Iff => Formula::iff(sub(rng), sub(rng)),
        Node::Cf => Formula::cf(sub(rng), sub(rng)),
        Node::G => Formula::all_future(sub(rng)),
        Node::H => Formula::all_past(sub(rng)),
        Node::F => Formula::some_future(sub(rng)),
        Node::P => Formula::some_past(sub(rng)),
        Node::Nec => Formula::nec(sub(rng)),
        Node::Poss => Formula::poss(sub(rng)),
    }
}

pub const FIXTURES: [&str; 4] = ["tournament", "tournament_anti_stoic", "wine", "simple_fork"];

pub fn fixture(name: &str) -> Result<BtModel, GenError> {
    match name {
        "tournament" => Ok(tournament(Stance::Stoic)),
        "tournament_anti_stoic" => Ok(tournament(Stance::AntiStoic)),
        "wine" => Ok(wine()),
        "simple_fork" => Ok(simple_fork()),
        _ => Err(GenError::UnknownFixture(name.to_string())),
    }
}

/// Which semifinal point is most similar to `a_vs_c@2` among those where
/// Chrysippus debates Berkeley.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stance {
    /// `b_vs_c@1` (Chrysippus wins there) is closer than `b_vs_c@0`.
    Stoic,
    /// `b_vs_c@0` (Berkeley wins there) is closer.
    AntiStoic,
}

fn pt(model: &BtModel, r: &str) -> Point {
    model
        .resolve_point(r)
        .expect("fixture references are well-formed")
}

/// The philosophers' tournament: Aristotle meets Berkeley, the winner meets
/// Chrysippus. Histories are numbered 0..3:
/// Berkeley beats Aristotle on 0 and 1, Aristotle wins on 2 and 3;
/// Chrysippus loses on 0 and 2 and wins on 1 and 3.
///
/// Winner atoms hold at a match moment on the histories where that player
/// wins the match, and at the outcome leaf.
pub fn tournament(stance: Stance) -> BtModel {
    let moments = [
        "a_vs_b",
        "b_vs_c",
        "a_vs_c",
        "b_beats_c",
        "c_beats_b",
        "a_beats_c",
        "c_beats_a",
    ];
    let mut m = BtModel::from_edges(
        &moments,
        &[
            ("a_vs_b", "b_vs_c"),
            ("a_vs_b", "a_vs_c"),
            ("b_vs_c", "b_beats_c"),
            ("b_vs_c", "c_beats_b"),
            ("a_vs_c", "a_beats_c"),
            ("a_vs_c", "c_beats_a"),
        ],
    )
    .expect("fixture frame is well-formed");
    let refs = |m: &BtModel, rs: &[&str]| -> Vec<Point> {
        rs.iter()
            .flat_map(|r| m.resolve_ref(r).expect("fixture ref"))
            .collect()
    };
    m.set_atom("aristotle_vs_berkeley", refs(&m, &["a_vs_b"]));
    m.set_atom("chrysippus_vs_berkeley", refs(&m, &["b_vs_c"]));
    m.set_atom("chrysippus_vs_aristotle", refs(&m, &["a_vs_c"]));
    m.set_atom(
        "berkeley_wins",
        refs(&m, &["a_vs_b@0", "a_vs_b@1", "b_vs_c@0", "b_beats_c"]),
    );
    m.set_atom(
        "aristotle_wins",
        refs(&m, &["a_vs_b@2", "a_vs_b@3", "a_vs_c@2", "a_beats_c"]),
    );
    m.set_atom(
        "chrysippus_wins",
        refs(&m, &["b_vs_c@1", "a_vs_c@3", "c_beats_b", "c_beats_a"]),
    );

    let instants = vec![
        vec![MomentId(0)],
        vec![MomentId(1), MomentId(2)],
        vec![MomentId(3), MomentId(4), MomentId(5), MomentId(6)],
    ];
    m.set_instants(Some(InstantPartition::new(instants)));

    // Default closeness: the point itself, then its moment on other
    // histories, then its instant, then everything else.
    let points = m.points().to_vec();
    for &base in &points {
        let ranks = points
            .iter()
            .map(|&p| (p, generic_rank(&m, base, p)))
            .collect();
        m.set_similarity(base, SimilarityOrder::from_ranks(&ranks));
    }
    let base = pt(&m, "a_vs_c@2");
    let (near, far) = match stance {
        Stance::Stoic => (pt(&m, "b_vs_c@1"), pt(&m, "b_vs_c@0")),
        Stance::AntiStoic => (pt(&m, "b_vs_c@0"), pt(&m, "b_vs_c@1")),
    };
    let mut ranks: BTreeMap<Point, i64> = points
        .iter()
        .map(|&p| (p, generic_rank(&m, base, p) + 1))
        .collect();
    ranks.insert(base, 0);
    ranks.insert(near, 2);
    ranks.insert(far, 3);
    m.set_similarity(base, SimilarityOrder::from_ranks(&ranks));
    m
}

fn generic_rank(m: &BtModel, base: Point, p: Point) -> i64 {
    let same_instant = m
        .instants()
        .map(|i| i.block_of(base.moment) == i.block_of(p.moment))
        .unwrap_or(false);
    if p == base {
        0
    } else if p.moment == base.moment {
        1
    } else if same_instant {
        2
    } else {
        3
    }
}

/// The bottle of wine: `m1` precedes `m2` on history 0 and `m4` on history 1;
/// `m2` and `m4` are simultaneous. At `m1@0` and `m4@1` the speaker is 17.
pub fn wine() -> BtModel {
    let mut m = BtModel::from_edges(&["m1", "m2", "m4"], &[("m1", "m2"), ("m1", "m4")])
        .expect("fixture frame is well-formed");
    let seventeen = [pt(&m, "m1@0"), pt(&m, "m4@1")];
    let can_buy = [pt(&m, "m2@0")];
    m.set_atom("seventeen", seventeen);
    m.set_atom("can_buy_wine", can_buy);
    m.set_instants(Some(InstantPartition::new(vec![
        vec![MomentId(0)],
        vec![MomentId(1), MomentId(2)],
    ])));
    // From m2@0 the actual past is closer than the deviant co-present point.
    let base = pt(&m, "m2@0");
    let ranks = BTreeMap::from([
        (base, 0),
        (pt(&m, "m1@0"), 1),
        (pt(&m, "m4@1"), 2),
        (pt(&m, "m1@1"), 3),
    ]);
    m.set_similarity(base, SimilarityOrder::from_ranks(&ranks));
    m
}

/// A root with two successors: the smallest branching frame.
pub fn simple_fork() -> BtModel {
    let mut m = BtModel::from_edges(
        &["root", "left", "right"],
        &[("root", "left"), ("root", "right")],
    )
    .expect("fixture frame is well-formed");
    let p = [pt(&m, "left"), pt(&m, "root@0")];
    m.set_atom("p", p);
    m.set_instants(Some(InstantPartition::new(vec![
        vec![MomentId(0)],
        vec![MomentId(1), MomentId(2)],
    ])));
    m
}

/// Kinds of deliberately broken models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutant {
    /// Some moment precedes itself.
    ReflexiveEdge,
    /// One `a ≻ c` implied by `a ≻ b ≻ c` is dropped; declared histories kept.
    BrokenTransitivity,
    /// A proper initial segment of a history is added as a history.
    NonMaximalHistory,
    /// Some similarity order ranks a point closer than itself.
    ReflexiveSimilarity,
}

impl Mutant {
    pub const ALL: [Mutant; 4] = [
        Mutant::ReflexiveEdge,
        Mutant::BrokenTransitivity,
        Mutant::NonMaximalHistory,
        Mutant::ReflexiveSimilarity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutant::ReflexiveEdge => "reflexive-edge",
            Mutant::BrokenTransitivity => "broken-transitivity",
            Mutant::NonMaximalHistory => "non-maximal-history",
            Mutant::ReflexiveSimilarity => "reflexive-similarity",
        }
    }
}

/// Break `model` in the requested way. `None` when the model lacks the
/// structure needed (e.g. no chain of three moments for broken transitivity).
pub fn mutate(model: &BtModel, kind: Mutant) -> Option<BtModel> {
    let mut m = model.clone();
    match kind {
        Mutant::ReflexiveEdge => {
            let mut prec = m.precedence().clone();
            let target = m.moments().last()?;
            prec.add(target, target);
            m.replace_precedence(prec);
        }
        Mutant::BrokenTransitivity => {
            let h = m.histories().iter().find(|h| h.len() >= 3)?.clone();
            let (a, c) = (h.moments()[0], h.moments()[2]);
            let mut prec = m.precedence().clone();
            prec.remove(a, c);
            m.replace_precedence(prec);
        }
        Mutant::NonMaximalHistory => {
            let h = m.histories().iter().find(|h| h.len() >= 2)?.clone();
            let prefix = History::new(h.moments()[..h.len() - 1].to_vec());
            let mut hs = m.histories().to_vec();
            hs.push(prefix);
            m.replace_histories(hs);
        }
        Mutant::ReflexiveSimilarity => {
            let base = *m.points().first()?;
            let order = m.similarity_mut(base)?;
            order.pairs_mut().insert((base, base));
        }
    }
    Some(m)
}

/// Point with the given history index at the first moment of that history.
pub fn history_start(model: &BtModel, h: usize) -> Point {
    Point::new(model.history(HistoryId(h)).moments()[0], HistoryId(h))
}
