//! Finite Ockhamist branching-time models with per-point similarity orders.

mod file;
mod precedence;
mod validate;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use file::{
    load_model, load_model_with, model_to_file, save_model, LoadOptions, ModelFile, ModelFileError,
    SimilarityEntry,
};
pub use precedence::{compute_histories, Precedence};
pub use validate::{validate, ValidationReport, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MomentId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HistoryId(pub usize);

/// A moment/history pair. Ordered by moment, then history.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub moment: MomentId,
    pub history: HistoryId,
}

impl Point {
    pub fn new(moment: MomentId, history: HistoryId) -> Self {
        Point { moment, history }
    }
}

/// Moments of one course of events, earliest first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct History(Vec<MomentId>);

impl History {
    pub fn new(moments: Vec<MomentId>) -> Self {
        History(moments)
    }

    pub fn moments(&self) -> &[MomentId] {
        &self.0
    }

    pub fn contains(&self, m: MomentId) -> bool {
        self.0.contains(&m)
    }

    pub fn last(&self) -> Option<MomentId> {
        self.0.last().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Comparative similarity for one base point: `closer(x, y)` means `x` is
/// more similar to the base than `y`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimilarityOrder {
    pairs: BTreeSet<(Point, Point)>,
    /// `None` means every point of the model is comparable.
    scope: Option<BTreeSet<Point>>,
}

impl SimilarityOrder {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Point, Point)>) -> Self {
        SimilarityOrder {
            pairs: pairs.into_iter().collect(),
            scope: None,
        }
    }

    /// Lower rank is closer. Unranked points are incomparable to everything.
    pub fn from_ranks(ranks: &BTreeMap<Point, i64>) -> Self {
        let pairs = ranks
            .iter()
            .flat_map(|(x, rx)| {
                ranks
                    .iter()
                    .filter(move |(_, ry)| rx < *ry)
                    .map(move |(y, _)| (*x, *y))
            })
            .collect();
        SimilarityOrder { pairs, scope: None }
    }

    pub fn with_scope(mut self, scope: Option<BTreeSet<Point>>) -> Self {
        self.scope = scope;
        self
    }

    pub fn closer(&self, x: Point, y: Point) -> bool {
        self.pairs.contains(&(x, y))
    }

    pub fn pairs(&self) -> &BTreeSet<(Point, Point)> {
        &self.pairs
    }

    pub fn pairs_mut(&mut self) -> &mut BTreeSet<(Point, Point)> {
        &mut self.pairs
    }

    pub fn scope(&self) -> Option<&BTreeSet<Point>> {
        self.scope.as_ref()
    }

    pub fn in_scope(&self, p: Point) -> bool {
        self.scope.as_ref().is_none_or(|s| s.contains(&p))
    }
}

/// Moments grouped into instants: blocks of simultaneous moments across histories.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstantPartition {
    blocks: Vec<Vec<MomentId>>,
}

impl InstantPartition {
    pub fn new(blocks: Vec<Vec<MomentId>>) -> Self {
        InstantPartition { blocks }
    }

    pub fn blocks(&self) -> &[Vec<MomentId>] {
        &self.blocks
    }

    pub fn block_of(&self, m: MomentId) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&m))
    }
}

/// Which points may be compared with a base point when evaluating `=>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    Unrestricted,
    CoPresent,
    HistAccessible,
}

impl Policy {
    pub const ALL: [Policy; 3] = [
        Policy::Unrestricted,
        Policy::CoPresent,
        Policy::HistAccessible,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Unrestricted => "unrestricted",
            Policy::CoPresent => "copresent",
            Policy::HistAccessible => "hist",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "unrestricted" | "none" => Ok(Policy::Unrestricted),
            "copresent" | "copresence" => Ok(Policy::CoPresent),
            "hist" | "histaccessible" | "historical" => Ok(Policy::HistAccessible),
            _ => Err(format!(
                "unknown policy `{s}` (expected unrestricted, copresent or hist)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("policy `{0}` needs an instant partition, and the model has none")]
    PolicyUnsupported(Policy),
    #[error("unknown moment `{0}`")]
    UnknownMoment(String),
    #[error("bad point reference `{0}`: {1}")]
    BadPointRef(String, String),
    #[error("duplicate moment `{0}`")]
    DuplicateMoment(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BtModel {
    moments: Vec<String>,
    index: HashMap<String, MomentId>,
    precedence: Precedence,
    histories: Vec<History>,
    points: Vec<Point>,
    valuation: BTreeMap<String, BTreeSet<Point>>,
    similarity: BTreeMap<Point, SimilarityOrder>,
    instants: Option<InstantPartition>,
}

impl BtModel {
    /// Assemble a model from its parts without any checking beyond index
    /// bounds; run [`validate`] before trusting it. Every point gets the
    /// empty similarity order.
    pub fn new(moments: Vec<String>, precedence: Precedence, histories: Vec<History>) -> Self {
        assert_eq!(
            moments.len(),
            precedence.len(),
            "one precedence row per moment"
        );
        let index = moments
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), MomentId(i)))
            .collect();
        let mut model = BtModel {
            moments,
            index,
            precedence,
            histories: Vec::new(),
            points: Vec::new(),
            valuation: BTreeMap::new(),
            similarity: BTreeMap::new(),
            instants: None,
        };
        model.replace_histories(histories);
        model
    }

    /// Histories are computed as the maximal chains of `precedence`.
    pub fn from_frame(moments: Vec<String>, precedence: Precedence) -> Self {
        let histories = compute_histories(&precedence);
        Self::new(moments, precedence, histories)
    }

    /// Build from named moments and `(earlier, later)` edges; the edges are
    /// closed transitively.
    pub fn from_edges(moments: &[&str], edges: &[(&str, &str)]) -> Result<Self, ModelError> {
        let names: Vec<String> = moments.iter().map(|s| s.to_string()).collect();
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n) {
                return Err(ModelError::DuplicateMoment(n.clone()));
            }
        }
        let find = |name: &str| {
            names
                .iter()
                .position(|n| n == name)
                .map(MomentId)
                .ok_or_else(|| ModelError::UnknownMoment(name.to_string()))
        };
        let mut precedence = Precedence::new(names.len());
        for (a, b) in edges {
            precedence.add(find(a)?, find(b)?);
        }
        Ok(Self::from_frame(names, precedence.transitive_closure()))
    }

    /// Swap in a new history list. Points are recomputed; valuation and
    /// similarity entries are kept as they are, and points that had no
    /// similarity order get the empty one.
    pub fn replace_histories(&mut self, histories: Vec<History>) {
        self.histories = histories;
        let mut points: Vec<Point> = self
            .histories
            .iter()
            .enumerate()
            .flat_map(|(h, hist)| {
                hist.moments()
                    .iter()
                    .map(move |&m| Point::new(m, HistoryId(h)))
            })
            .collect();
        points.sort();
        points.dedup();
        for p in &points {
            self.similarity.entry(*p).or_default();
        }
        self.points = points;
    }

    pub fn replace_precedence(&mut self, precedence: Precedence) {
        assert_eq!(precedence.len(), self.moments.len());
        self.precedence = precedence;
    }

    pub fn set_atom(&mut self, atom: impl Into<String>, points: impl IntoIterator<Item = Point>) {
        self.valuation
            .insert(atom.into(), points.into_iter().collect());
    }

    pub fn set_similarity(&mut self, base: Point, order: SimilarityOrder) {
        self.similarity.insert(base, order);
    }

    pub fn remove_similarity(&mut self, base: Point) -> Option<SimilarityOrder> {
        self.similarity.remove(&base)
    }

    pub fn similarity_mut(&mut self, base: Point) -> Option<&mut SimilarityOrder> {
        self.similarity.get_mut(&base)
    }

    pub fn set_instants(&mut self, instants: Option<InstantPartition>) {
        self.instants = instants;
    }

    pub fn moments(&self) -> impl Iterator<Item = MomentId> {
        (0..self.moments.len()).map(MomentId)
    }

    pub fn moment_count(&self) -> usize {
        self.moments.len()
    }

    pub fn moment_name(&self, m: MomentId) -> &str {
        &self.moments[m.0]
    }

    pub fn moment_id(&self, name: &str) -> Option<MomentId> {
        self.index.get(name).copied()
    }

    pub fn precedence(&self) -> &Precedence {
        &self.precedence
    }

    pub fn histories(&self) -> &[History] {
        &self.histories
    }

    pub fn history(&self, h: HistoryId) -> &History {
        &self.histories[h.0]
    }

    /// `H_m`: histories running through `m`.
    pub fn histories_through(&self, m: MomentId) -> Vec<HistoryId> {
        (0..self.histories.len())
            .map(HistoryId)
            .filter(|h| self.histories[h.0].contains(m))
            .collect()
    }

    /// All moment/history pairs with the moment on the history, by moment then history.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point_index(&self, p: Point) -> Option<usize> {
        self.points.binary_search(&p).ok()
    }

    pub fn is_point(&self, p: Point) -> bool {
        p.history.0 < self.histories.len()
            && p.moment.0 < self.moments.len()
            && self.histories[p.history.0].contains(p.moment)
    }

    pub fn valuation(&self) -> &BTreeMap<String, BTreeSet<Point>> {
        &self.valuation
    }

    pub fn atom_holds(&self, atom: &str, p: Point) -> bool {
        self.valuation.get(atom).is_some_and(|s| s.contains(&p))
    }

    pub fn similarity(&self) -> &BTreeMap<Point, SimilarityOrder> {
        &self.similarity
    }

    pub fn similarity_at(&self, base: Point) -> Option<&SimilarityOrder> {
        self.similarity.get(&base)
    }

    pub fn instants(&self) -> Option<&InstantPartition> {
        self.instants.as_ref()
    }

    /// Points sharing `p`'s moment: the equivalence class of `p` under the
    /// historical-necessity accessibility relation.
    pub fn r_box_class(&self, p: Point) -> BTreeSet<Point> {
        self.histories_through(p.moment)
            .into_iter()
            .map(|h| Point::new(p.moment, h))
            .collect()
    }

    /// Points comparable with `base` under `policy`. Always contains `base`.
    pub fn candidates(&self, base: Point, policy: Policy) -> Result<BTreeSet<Point>, ModelError> {
        let order = self.similarity.get(&base);
        let in_scope = |p: Point| order.is_none_or(|o| o.in_scope(p));
        let mut out: BTreeSet<Point> = match policy {
            Policy::Unrestricted => self
                .points
                .iter()
                .copied()
                .filter(|p| in_scope(*p))
                .collect(),
            Policy::CoPresent => {
                let instants = self
                    .instants
                    .as_ref()
                    .ok_or(ModelError::PolicyUnsupported(policy))?;
                let block = instants.block_of(base.moment);
                self.points
                    .iter()
                    .copied()
                    .filter(|p| in_scope(*p))
                    .filter(|p| block.is_some() && instants.block_of(p.moment) == block)
                    .collect()
            }
            Policy::HistAccessible => self
                .r_box_class(base)
                .into_iter()
                .filter(|p| in_scope(*p))
                .collect(),
        };
        out.insert(base);
        Ok(out)
    }

    /// Members of `set` with no strictly more similar competitor in `set`.
    pub fn closest(&self, base: Point, set: &BTreeSet<Point>) -> BTreeSet<Point> {
        let Some(order) = self.similarity.get(&base) else {
            return set.clone();
        };
        set.iter()
            .copied()
            .filter(|v| !set.iter().any(|w| order.closer(*w, *v)))
            .collect()
    }

    /// `moment@historyIndex`.
    pub fn point_ref(&self, p: Point) -> String {
        format!("{}@{}", self.moment_name(p.moment), p.history.0)
    }

    /// Resolve `moment@historyIndex` to one pair, or a bare `moment` to
    /// every point at that moment.
    pub fn resolve_ref(&self, text: &str) -> Result<Vec<Point>, ModelError> {
        let bad = |why: &str| ModelError::BadPointRef(text.to_string(), why.to_string());
        match text.split_once('@') {
            Some((name, idx)) => {
                let m = self
                    .moment_id(name)
                    .ok_or_else(|| ModelError::UnknownMoment(name.to_string()))?;
                let h: usize = idx
                    .parse()
                    .map_err(|_| bad("history index is not a number"))?;
                if h >= self.histories.len() {
                    return Err(bad("history index out of range"));
                }
                let p = Point::new(m, HistoryId(h));
                if !self.is_point(p) {
                    return Err(bad("moment does not lie on that history"));
                }
                Ok(vec![p])
            }
            None => {
                let m = self
                    .moment_id(text)
                    .ok_or_else(|| ModelError::UnknownMoment(text.to_string()))?;
                Ok(self
                    .points
                    .iter()
                    .copied()
                    .filter(|p| p.moment == m)
                    .collect())
            }
        }
    }

    /// Resolve a reference that must name a single well-formed point.
    pub fn resolve_point(&self, text: &str) -> Result<Point, ModelError> {
        let pts = self.resolve_ref(text)?;
        match pts.as_slice() {
            [p] => Ok(*p),
            _ => Err(ModelError::BadPointRef(
                text.to_string(),
                "ambiguous: the moment lies on several histories, use moment@history".into(),
            )),
        }
    }
}
