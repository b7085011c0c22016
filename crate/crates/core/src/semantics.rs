//! Satisfaction of formulas at points, under a comparability policy.
//!
//! The evaluator computes the extension of each subformula once, as a bit
//! set over the model's points, and answers point queries from it.

use std::collections::{BTreeSet, HashMap};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::formula::Formula;
use crate::model::{BtModel, ModelError, Point, Policy};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0:?} is not a point of the model")]
    NotAPoint(Point),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    AllPointsTrue,
    /// The first point, in model order, where the formula fails.
    Falsified(Point),
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::AllPointsTrue
    }
}

/// Precomputed accessibility data for one model under one policy.
pub struct Evaluator<'m> {
    model: &'m BtModel,
    policy: Policy,
    n: usize,
    future: Vec<FixedBitSet>,
    past: Vec<FixedBitSet>,
    same_moment: Vec<FixedBitSet>,
    candidates: Vec<FixedBitSet>,
    // better[base][y] = points strictly more similar to `base` than `y`
    better: Vec<Vec<FixedBitSet>>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m BtModel, policy: Policy) -> Result<Self, EvalError> {
        let points = model.points();
        let n = points.len();
        let empty = FixedBitSet::with_capacity(n);
        let prec = model.precedence();
        let mut future = vec![empty.clone(); n];
        let mut past = vec![empty.clone(); n];
        let mut same_moment = vec![empty.clone(); n];
        for (i, p) in points.iter().enumerate() {
            for (j, q) in points.iter().enumerate() {
                if p.history == q.history {
                    if prec.precedes(p.moment, q.moment) {
                        future[i].insert(j);
                    }
                    if prec.precedes(q.moment, p.moment) {
                        past[i].insert(j);
                    }
                }
                if p.moment == q.moment {
                    same_moment[i].insert(j);
                }
            }
        }

        let mut candidates = Vec::with_capacity(n);
        let mut better = Vec::with_capacity(n);
        for &base in points {
            let mut c = empty.clone();
            for p in model.candidates(base, policy)? {
                if let Some(i) = model.point_index(p) {
                    c.insert(i);
                }
            }
            candidates.push(c);
            let mut b = vec![empty.clone(); n];
            if let Some(order) = model.similarity_at(base) {
                for &(x, y) in order.pairs() {
                    if let (Some(xi), Some(yi)) = (model.point_index(x), model.point_index(y)) {
                        b[yi].insert(xi);
                    }
                }
            }
            better.push(b);
        }
        Ok(Evaluator {
            model,
            policy,
            n,
            future,
            past,
            same_moment,
            candidates,
            better,
        })
    }

    pub fn model(&self) -> &'m BtModel {
        self.model
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    /// Set of point indices where `f` holds.
    pub fn extension(&self, f: &Formula) -> FixedBitSet {
        let mut memo = Memo::default();
        let id = self.ext(f, &mut memo);
        memo.exts.swap_remove(id)
    }

    /// Extensions of several formulas, sharing work on common subformulas.
    pub fn extensions(&self, fs: &[Formula]) -> Vec<FixedBitSet> {
        let mut memo = Memo::default();
        let ids: Vec<usize> = fs.iter().map(|f| self.ext(f, &mut memo)).collect();
        ids.into_iter().map(|id| memo.exts[id].clone()).collect()
    }

    /// Extension of `f` with the atom `name` read as true exactly on the
    /// points in `atom_ext`, whatever the model's valuation says.
    pub fn extension_with_atom(
        &self,
        f: &Formula,
        name: &str,
        atom_ext: FixedBitSet,
    ) -> FixedBitSet {
        let mut memo = Memo::default();
        let id = memo.push(atom_ext);
        memo.atoms.insert(name.to_string(), id);
        let id = self.ext(f, &mut memo);
        memo.exts.swap_remove(id)
    }

    // Returns the memo id of `f`'s extension.
    fn ext(&self, f: &Formula, memo: &mut Memo) -> usize {
        let node = match f {
            Formula::Atom(name) => {
                if let Some(&id) = memo.atoms.get(name.as_str()) {
                    return id;
                }
                let id = memo.push(self.atom_ext(name));
                memo.atoms.insert(name.clone(), id);
                return id;
            }
            Formula::Not(g) => Node::Not(self.ext(g, memo)),
            Formula::Or(a, b) => Node::Or(self.ext(a, memo), self.ext(b, memo)),
            Formula::Counterfactual(a, b) => {
                Node::Counterfactual(self.ext(a, memo), self.ext(b, memo))
            }
            Formula::AllFuture(g) => Node::AllFuture(self.ext(g, memo)),
            Formula::AllPast(g) => Node::AllPast(self.ext(g, memo)),
            Formula::HistNec(g) => Node::HistNec(self.ext(g, memo)),
        };
        if let Some(&id) = memo.table.get(&node) {
            return id;
        }
        let s = self.compute(&node, &memo.exts);
        let id = memo.push(s);
        memo.table.insert(node, id);
        id
    }

    fn atom_ext(&self, name: &str) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.n);
        if let Some(pts) = self.model.valuation().get(name) {
            for &p in pts {
                if let Some(i) = self.model.point_index(p) {
                    s.insert(i);
                }
            }
        }
        s
    }

    fn compute(&self, node: &Node, exts: &[FixedBitSet]) -> FixedBitSet {
        let n = self.n;
        match *node {
            Node::Not(g) => {
                let mut s = exts[g].clone();
                s.toggle_range(..);
                s
            }
            Node::Or(a, b) => {
                let mut s = exts[a].clone();
                s.union_with(&exts[b]);
                s
            }
            Node::AllFuture(g) => universal(&self.future, &exts[g]),
            Node::AllPast(g) => universal(&self.past, &exts[g]),
            Node::HistNec(g) => universal(&self.same_moment, &exts[g]),
            Node::Counterfactual(a, b) => {
                let (ante, cons) = (&exts[a], &exts[b]);
                let mut s = FixedBitSet::with_capacity(n);
                for base in 0..n {
                    let mut live = self.candidates[base].clone();
                    live.intersect_with(ante);
                    let holds = live
                        .ones()
                        .filter(|&y| self.better[base][y].is_disjoint(&live))
                        .all(|y| cons.contains(y));
                    s.set(base, holds);
                }
                s
            }
        }
    }

    pub fn holds(&self, p: Point, f: &Formula) -> Result<bool, EvalError> {
        let i = self.index(p)?;
        Ok(self.extension(f).contains(i))
    }

    pub fn valid(&self, f: &Formula) -> Verdict {
        let ext = self.extension(f);
        match (0..self.n).find(|&i| !ext.contains(i)) {
            None => Verdict::AllPointsTrue,
            Some(i) => Verdict::Falsified(self.model.points()[i]),
        }
    }

    fn index(&self, p: Point) -> Result<usize, EvalError> {
        self.model.point_index(p).ok_or(EvalError::NotAPoint(p))
    }

    /// Points where `f` holds, as a set.
    pub fn satisfying(&self, f: &Formula) -> BTreeSet<Point> {
        self.extension(f)
            .ones()
            .map(|i| self.model.points()[i])
            .collect()
    }
}

// A formula node whose children are replaced by memo ids, so structurally
// equal subformulas share one entry and hashing a node is constant work.
#[derive(PartialEq, Eq, Hash)]
enum Node {
    Not(usize),
    Or(usize, usize),
    Counterfactual(usize, usize),
    AllFuture(usize),
    AllPast(usize),
    HistNec(usize),
}

#[derive(Default)]
struct Memo {
    atoms: HashMap<String, usize>,
    table: HashMap<Node, usize>,
    exts: Vec<FixedBitSet>,
}

impl Memo {
    fn push(&mut self, ext: FixedBitSet) -> usize {
        self.exts.push(ext);
        self.exts.len() - 1
    }
}

// { i : access[i] ⊆ target }
fn universal(access: &[FixedBitSet], target: &FixedBitSet) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(access.len());
    for (i, reach) in access.iter().enumerate() {
        s.set(i, reach.is_subset(target));
    }
    s
}

/// Truth of `f` at `point`.
pub fn eval(model: &BtModel, point: Point, f: &Formula, policy: Policy) -> Result<bool, EvalError> {
    Evaluator::new(model, policy)?.holds(point, f)
}

/// Truth of `f` at every point of the model.
pub fn valid_in_model(model: &BtModel, f: &Formula, policy: Policy) -> Result<Verdict, EvalError> {
    Ok(Evaluator::new(model, policy)?.valid(f))
}

/// A recursion trace of one evaluation, for `--explain`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub formula: Formula,
    pub point: Point,
    pub value: bool,
    pub detail: TraceDetail,
    pub children: Vec<Trace>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceDetail {
    Leaf,
    Boolean,
    /// Points a quantified operator ranges over.
    Range(BTreeSet<Point>),
    Counterfactual {
        candidates: BTreeSet<Point>,
        antecedent: BTreeSet<Point>,
        closest: BTreeSet<Point>,
    },
}

/// Trace the evaluation of `f` at `point`. Counterfactual nodes record the
/// candidate set, the candidates satisfying the antecedent and the closest
/// of those; their children are the consequent at each closest point.
pub fn explain(
    model: &BtModel,
    point: Point,
    f: &Formula,
    policy: Policy,
) -> Result<Trace, EvalError> {
    let ev = Evaluator::new(model, policy)?;
    ev.index(point)?;
    Ok(trace(&ev, point, f))
}

fn trace(ev: &Evaluator<'_>, point: Point, f: &Formula) -> Trace {
    let model = ev.model;
    let value = ev
        .holds(point, f)
        .expect("traced points belong to the model");
    let range = |pts: BTreeSet<Point>, g: &Formula| {
        let children = pts.iter().map(|&q| trace(ev, q, g)).collect();
        (TraceDetail::Range(pts), children)
    };
    let (detail, children) = match f {
        Formula::Atom(_) => (TraceDetail::Leaf, vec![]),
        Formula::Not(g) => (TraceDetail::Boolean, vec![trace(ev, point, g)]),
        Formula::Or(a, b) => (
            TraceDetail::Boolean,
            vec![trace(ev, point, a), trace(ev, point, b)],
        ),
        Formula::AllFuture(g) => range(
            on_history(model, point, |q| {
                model.precedence().precedes(point.moment, q.moment)
            }),
            g,
        ),
        Formula::AllPast(g) => range(
            on_history(model, point, |q| {
                model.precedence().precedes(q.moment, point.moment)
            }),
            g,
        ),
        Formula::HistNec(g) => range(model.r_box_class(point), g),
        Formula::Counterfactual(a, b) => {
            let candidates = model
                .candidates(point, ev.policy)
                .expect("policy was checked when the evaluator was built");
            let sat_a = ev.satisfying(a);
            let antecedent: BTreeSet<Point> = candidates.intersection(&sat_a).copied().collect();
            let closest = model.closest(point, &antecedent);
            let children = closest.iter().map(|&q| trace(ev, q, b)).collect();
            (
                TraceDetail::Counterfactual {
                    candidates,
                    antecedent,
                    closest,
                },
                children,
            )
        }
    };
    Trace {
        formula: f.clone(),
        point,
        value,
        detail,
        children,
    }
}

fn on_history(model: &BtModel, point: Point, keep: impl Fn(Point) -> bool) -> BTreeSet<Point> {
    model
        .points()
        .iter()
        .copied()
        .filter(|q| q.history == point.history && keep(*q))
        .collect()
}

impl Trace {
    /// Indented text rendering, one line per node plus set lines for `=>`.
    pub fn render(&self, model: &BtModel) -> String {
        let mut out = String::new();
        self.render_into(model, 0, &mut out);
        out
    }

    fn render_into(&self, model: &BtModel, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        let set = |s: &BTreeSet<Point>| {
            let items: Vec<String> = s.iter().map(|&p| model.point_ref(p)).collect();
            format!("{{{}}}", items.join(", "))
        };
        out.push_str(&format!(
            "{pad}{} ⊨ {} : {}\n",
            model.point_ref(self.point),
            self.formula,
            self.value
        ));
        match &self.detail {
            TraceDetail::Counterfactual {
                candidates,
                antecedent,
                closest,
            } => {
                out.push_str(&format!("{pad}  candidates: {}\n", set(candidates)));
                out.push_str(&format!("{pad}  antecedent: {}\n", set(antecedent)));
                out.push_str(&format!("{pad}  closest: {}\n", set(closest)));
                if closest.is_empty() {
                    out.push_str(&format!("{pad}  vacuous\n"));
                }
            }
            TraceDetail::Range(pts) => {
                out.push_str(&format!("{pad}  over: {}\n", set(pts)));
            }
            TraceDetail::Leaf | TraceDetail::Boolean => {}
        }
        for c in &self.children {
            c.render_into(model, depth + 1, out);
        }
    }
}
