//! Abstract syntax of the fused counterfactual / branching-time language.
//!
//! Only seven node kinds exist. Every other connective (`&`, `->`, `<->`,
//! `F`, `P`, `<>`, `true`, `false`) is a constructor that expands into them,
//! so the evaluator and the schema machinery never see sugar.

use std::collections::BTreeSet;
use std::fmt;

/// Atom used to build the propositional constants. `true` expands to
/// `top | ~top`, whose truth does not depend on the valuation of `top`.
pub const TOP_ATOM: &str = "top";

/// Names that can never be atoms.
pub const RESERVED: [&str; 6] = ["true", "false", "G", "H", "F", "P"];

/// Single capital letters used as metavariables in axiom schemas.
pub const METAVARIABLES: [&str; 3] = ["A", "B", "C"];

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// `antecedent => consequent`
    Counterfactual(Box<Formula>, Box<Formula>),
    /// `G`: at every later moment of the current history.
    AllFuture(Box<Formula>),
    /// `H`: at every earlier moment.
    AllPast(Box<Formula>),
    /// `[]`: at the current moment on every history through it.
    HistNec(Box<Formula>),
}

/// `[a-z][a-zA-Z0-9_]*`, excluding reserved words.
pub fn is_atom_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !RESERVED.contains(&name)
}

pub fn is_metavariable(name: &str) -> bool {
    METAVARIABLES.contains(&name)
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn cf(antecedent: Formula, consequent: Formula) -> Self {
        Formula::Counterfactual(Box::new(antecedent), Box::new(consequent))
    }

    pub fn all_future(f: Formula) -> Self {
        Formula::AllFuture(Box::new(f))
    }

    pub fn all_past(f: Formula) -> Self {
        Formula::AllPast(Box::new(f))
    }

    pub fn nec(f: Formula) -> Self {
        Formula::HistNec(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::or(Formula::not(a), Formula::not(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(Formula::not(a), b)
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }

    /// `F φ ≡ ¬G¬φ`
    pub fn some_future(f: Formula) -> Self {
        Formula::not(Formula::all_future(Formula::not(f)))
    }

    /// `P φ ≡ ¬H¬φ`
    pub fn some_past(f: Formula) -> Self {
        Formula::not(Formula::all_past(Formula::not(f)))
    }

    /// `◇φ ≡ ¬□¬φ`
    pub fn poss(f: Formula) -> Self {
        Formula::not(Formula::nec(Formula::not(f)))
    }

    pub fn top() -> Self {
        Formula::or(
            Formula::atom(TOP_ATOM),
            Formula::not(Formula::atom(TOP_ATOM)),
        )
    }

    pub fn bot() -> Self {
        Formula::not(Formula::top())
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Formula::Or(a, b)
            if matches!(a.as_ref(), Formula::Atom(n) if n == TOP_ATOM)
            && matches!(b.as_ref(), Formula::Not(x) if matches!(x.as_ref(), Formula::Atom(n) if n == TOP_ATOM)))
    }

    pub fn is_bot(&self) -> bool {
        matches!(self, Formula::Not(x) if x.is_top())
    }

    /// Immediate subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) => vec![],
            Formula::Not(f) | Formula::AllFuture(f) | Formula::AllPast(f) | Formula::HistNec(f) => {
                vec![f]
            }
            Formula::Or(a, b) | Formula::Counterfactual(a, b) => vec![a, b],
        }
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::depth)
            .max()
            .unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::size)
            .sum::<usize>()
    }

    /// Distinct atom names occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::Atom(name) => {
                out.insert(name.as_str());
            }
            _ => self
                .children()
                .into_iter()
                .for_each(|c| c.collect_atoms(out)),
        }
    }

    pub fn contains_atom(&self, name: &str) -> bool {
        match self {
            Formula::Atom(n) => n == name,
            _ => self.children().into_iter().any(|c| c.contains_atom(name)),
        }
    }

    /// All distinct subtrees in post-order (children before parents,
    /// first occurrence wins). The formula itself comes last.
    pub fn subformulas(&self) -> Vec<&Formula> {
        let mut out: Vec<&Formula> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        self.post_order(&mut |f| {
            if seen.insert(f) {
                out.push(f);
            }
        });
        out
    }

    fn post_order<'a>(&'a self, visit: &mut impl FnMut(&'a Formula)) {
        for c in self.children() {
            c.post_order(visit);
        }
        visit(self);
    }

    /// Replace atoms simultaneously. Atoms without an image are kept.
    pub fn substitute(&self, image: &impl Fn(&str) -> Option<Formula>) -> Formula {
        match self {
            Formula::Atom(name) => image(name).unwrap_or_else(|| self.clone()),
            Formula::Not(f) => Formula::not(f.substitute(image)),
            Formula::Or(a, b) => Formula::or(a.substitute(image), b.substitute(image)),
            Formula::Counterfactual(a, b) => Formula::cf(a.substitute(image), b.substitute(image)),
            Formula::AllFuture(f) => Formula::all_future(f.substitute(image)),
            Formula::AllPast(f) => Formula::all_past(f.substitute(image)),
            Formula::HistNec(f) => Formula::nec(f.substitute(image)),
        }
    }
}

// Binding power of rendered operators; higher binds tighter.
const BP_IMPLIES: u8 = 2;
const BP_CF: u8 = 3;
const BP_OR: u8 = 4;
const BP_AND: u8 = 5;
const BP_UNARY: u8 = 6;

/// How a primitive tree is shown. `&` and `->` are recovered from their
/// expansions; unary duals (`F`, `P`, `<>`) are not.
enum View<'a> {
    Atom(&'a str),
    Const(bool),
    Unary(&'static str, &'a Formula),
    Binary(&'static str, u8, bool, &'a Formula, &'a Formula),
}

fn view(f: &Formula) -> View<'_> {
    if f.is_top() {
        return View::Const(true);
    }
    if f.is_bot() {
        return View::Const(false);
    }
    match f {
        Formula::Atom(name) => View::Atom(name),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Or(a, b) => match (a.as_ref(), b.as_ref()) {
                (Formula::Not(x), Formula::Not(y)) => View::Binary("&", BP_AND, false, x, y),
                _ => View::Unary("~", inner),
            },
            _ => View::Unary("~", inner),
        },
        Formula::Or(a, b) => match a.as_ref() {
            Formula::Not(x) => View::Binary("->", BP_IMPLIES, true, x, b),
            _ => View::Binary("|", BP_OR, false, a, b),
        },
        Formula::Counterfactual(a, b) => View::Binary("=>", BP_CF, true, a, b),
        Formula::AllFuture(g) => View::Unary("G", g),
        Formula::AllPast(g) => View::Unary("H", g),
        Formula::HistNec(g) => View::Unary("[]", g),
    }
}

fn render_into(f: &Formula, min_bp: u8, out: &mut String) {
    match view(f) {
        View::Atom(name) => out.push_str(name),
        View::Const(true) => out.push_str("true"),
        View::Const(false) => out.push_str("false"),
        View::Unary(op, operand) => {
            out.push_str(op);
            let mut body = String::new();
            render_into(operand, BP_UNARY, &mut body);
            let glued = matches!(op, "~" | "[]") || body.starts_with(['~', '(', '[', '<']);
            if !glued {
                out.push(' ');
            }
            out.push_str(&body);
        }
        View::Binary(op, bp, right_assoc, lhs, rhs) => {
            let parens = bp < min_bp;
            if parens {
                out.push('(');
            }
            let (lbp, rbp) = if right_assoc {
                (bp + 1, bp)
            } else {
                (bp, bp + 1)
            };
            render_into(lhs, lbp, out);
            out.push(' ');
            out.push_str(op);
            out.push(' ');
            render_into(rhs, rbp, out);
            if parens {
                out.push(')');
            }
        }
    }
}

impl Formula {
    /// Concrete syntax with minimal parentheses; `parse(render(f)) == f`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        render_into(self, 0, &mut out);
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
