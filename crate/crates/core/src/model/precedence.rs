use fixedbitset::FixedBitSet;

use super::{History, MomentId};

/// The precedence relation `≻`: `precedes(a, b)` means `a` comes earlier than `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Precedence {
    // later[a] = { b : a ≻ b }
    later: Vec<FixedBitSet>,
}

impl Precedence {
    pub fn new(moments: usize) -> Self {
        Precedence {
            later: vec![FixedBitSet::with_capacity(moments); moments],
        }
    }

    pub fn len(&self) -> usize {
        self.later.len()
    }

    pub fn is_empty(&self) -> bool {
        self.later.is_empty()
    }

    pub fn add(&mut self, earlier: MomentId, later: MomentId) {
        self.later[earlier.0].insert(later.0);
    }

    pub fn remove(&mut self, earlier: MomentId, later: MomentId) {
        self.later[earlier.0].set(later.0, false);
    }

    pub fn precedes(&self, earlier: MomentId, later: MomentId) -> bool {
        self.later[earlier.0].contains(later.0)
    }

    pub fn comparable(&self, a: MomentId, b: MomentId) -> bool {
        self.precedes(a, b) || self.precedes(b, a)
    }

    /// Moments strictly later than `m`.
    pub fn successors(&self, m: MomentId) -> impl Iterator<Item = MomentId> + '_ {
        self.later[m.0].ones().map(MomentId)
    }

    /// All `(earlier, later)` pairs in index order.
    pub fn pairs(&self) -> impl Iterator<Item = (MomentId, MomentId)> + '_ {
        self.later
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.ones().map(move |b| (MomentId(a), MomentId(b))))
    }

    /// Warshall closure.
    pub fn transitive_closure(&self) -> Precedence {
        let mut later = self.later.clone();
        let n = later.len();
        for k in 0..n {
            let row_k = later[k].clone();
            for row in later.iter_mut() {
                if row.contains(k) {
                    row.union_with(&row_k);
                }
            }
        }
        Precedence { later }
    }

    pub fn is_transitively_closed(&self) -> bool {
        self.transitive_closure() == *self
    }

    pub fn is_irreflexive(&self) -> bool {
        self.later
            .iter()
            .enumerate()
            .all(|(a, row)| !row.contains(a))
    }

    /// Pairs `a ≻ b` with no `c` such that `a ≻ c ≻ b` (the Hasse edges).
    pub fn covering_pairs(&self) -> Vec<(MomentId, MomentId)> {
        self.pairs()
            .filter(|&(a, b)| {
                !self.later[a.0]
                    .ones()
                    .any(|c| c != b.0 && c != a.0 && self.later[c].contains(b.0))
            })
            .collect()
    }
}

/// Every maximal chain of the comparability graph, each sorted earliest
/// first, listed in lexicographic order of member indices.
///
/// Maximal chains are the maximal cliques of the comparability graph, which
/// Bron–Kerbosch with pivoting enumerates exactly once each.
pub fn compute_histories(precedence: &Precedence) -> Vec<History> {
    let n = precedence.len();
    if n == 0 {
        return Vec::new();
    }
    let mut adjacent = vec![FixedBitSet::with_capacity(n); n];
    for (a, row) in adjacent.iter_mut().enumerate() {
        for b in 0..n {
            if a != b && precedence.comparable(MomentId(a), MomentId(b)) {
                row.insert(b);
            }
        }
    }
    let mut cliques = Vec::new();
    let mut all = FixedBitSet::with_capacity(n);
    all.insert_range(..);
    bron_kerbosch(
        &adjacent,
        &mut Vec::new(),
        all,
        FixedBitSet::with_capacity(n),
        &mut cliques,
    );
    let mut histories: Vec<History> = cliques
        .into_iter()
        .map(|members| sort_chain(precedence, members))
        .collect();
    histories.sort_by(|a, b| a.moments().cmp(b.moments()));
    histories
}

fn bron_kerbosch(
    adjacent: &[FixedBitSet],
    current: &mut Vec<usize>,
    mut candidates: FixedBitSet,
    mut excluded: FixedBitSet,
    out: &mut Vec<Vec<usize>>,
) {
    if candidates.is_clear() && excluded.is_clear() {
        out.push(current.clone());
        return;
    }
    let pivot = candidates
        .ones()
        .chain(excluded.ones())
        .max_by_key(|&u| adjacent[u].intersection(&candidates).count())
        .expect("candidates or excluded is nonempty");
    let mut branch = candidates.clone();
    branch.difference_with(&adjacent[pivot]);
    for v in branch.ones() {
        current.push(v);
        let mut next_candidates = candidates.clone();
        next_candidates.intersect_with(&adjacent[v]);
        let mut next_excluded = excluded.clone();
        next_excluded.intersect_with(&adjacent[v]);
        bron_kerbosch(adjacent, current, next_candidates, next_excluded, out);
        current.pop();
        candidates.set(v, false);
        excluded.insert(v);
    }
}

// Earliest first: more successors inside the chain means earlier.
fn sort_chain(precedence: &Precedence, members: Vec<usize>) -> History {
    let mut keyed: Vec<(usize, usize)> = members
        .iter()
        .map(|&m| {
            let later = members
                .iter()
                .filter(|&&x| precedence.precedes(MomentId(m), MomentId(x)))
                .count();
            (later, m)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    History::new(keyed.into_iter().map(|(_, m)| MomentId(m)).collect())
}
