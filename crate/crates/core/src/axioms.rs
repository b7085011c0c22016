//! Axiom schemas and inference rules of the fused logic, and empirical
//! soundness checking over concrete and generated models.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::formula::Formula;
use crate::generators::{formula_from, random_model, GenParams, SimilarityKind};
use crate::model::{BtModel, Point, Policy};
use crate::schema::{AxiomSchema, Substitution};
use crate::semantics::{EvalError, Evaluator, Verdict};

/// Counterfactual schemas followed by the branching-time schemas.
pub const REGISTRY: [(&str, &str); 20] = [
    ("CI", "A => A"),
    ("CC", "(A => B) & (A => C) -> (A => B & C)"),
    ("CW", "(A => B) -> (A => B | C)"),
    ("SA", "(A => B) & (B => C) -> (A & B => C)"),
    ("AD", "(A => C) & (B => C) -> (A | B => C)"),
    ("K_G", "G(A -> B) -> (G A -> G B)"),
    ("4_G", "G A -> G G A"),
    ("K_H", "H(A -> B) -> (H A -> H B)"),
    ("4_H", "H A -> H H A"),
    ("K_□", "[](A -> B) -> ([]A -> []B)"),
    ("T_□", "[]A -> A"),
    ("5_□", "<>A -> []<>A"),
    ("L1", "A -> G P A"),
    ("L1′", "A -> H F A"),
    ("L2", "F A -> G(F A | A | P A)"),
    ("L2′", "P A -> H(P A | A | F A)"),
    ("L3", "[]H A <-> H[]A"),
    ("L4", "P[]A -> []P A"),
    ("L5", "[]G A -> G[]A"),
    ("L6", "G false -> []G false"),
];

pub const RULES: [&str; 7] = ["MP", "RN_□", "RN_G", "RN_H", "REA", "REC", "IRR"];

/// Largest model (in points) on which IRR is checked over every valuation
/// of the fresh atom.
pub const IRR_POINT_CAP: usize = 12;

/// Each valid corpus formula is paired, for modus ponens, with itself and
/// the formulas that follow it in the corpus, up to this many.
pub const MP_WINDOW: usize = 8;

pub const TAUTOLOGY_ATOM_CAP: usize = 20;

const FRESH_ATOM: &str = "fresh";

pub fn registry() -> Vec<AxiomSchema> {
    REGISTRY
        .iter()
        .map(|(name, text)| AxiomSchema::parse(name, text).expect("registry schemas parse"))
        .collect()
}

/// Look up a schema by name. ASCII spellings are accepted: `K_box`, `L1'`.
pub fn find_schema(name: &str) -> Option<AxiomSchema> {
    let canonical = name.replace("box", "□").replace('\'', "′");
    registry().into_iter().find(|s| s.name == canonical)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TautologyError {
    #[error("{0} opaque atoms exceed the truth-table cap of {TAUTOLOGY_ATOM_CAP}")]
    TooManyAtoms(usize),
}

/// Truth-table check treating every maximal non-Boolean subformula (atoms,
/// counterfactuals, `G`, `H`, `[]`) as an opaque propositional letter.
pub fn check_tautology(f: &Formula) -> Result<bool, TautologyError> {
    let mut letters: Vec<&Formula> = Vec::new();
    collect_letters(f, &mut letters);
    let n = letters.len();
    if n > TAUTOLOGY_ATOM_CAP {
        return Err(TautologyError::TooManyAtoms(n));
    }
    let index: HashMap<&Formula, usize> =
        letters.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    Ok((0u32..1 << n).all(|row| truth(f, &index, row)))
}

fn collect_letters<'f>(f: &'f Formula, out: &mut Vec<&'f Formula>) {
    match f {
        Formula::Not(g) => collect_letters(g, out),
        Formula::Or(a, b) => {
            collect_letters(a, out);
            collect_letters(b, out);
        }
        _ => {
            if !out.contains(&f) {
                out.push(f);
            }
        }
    }
}

fn truth(f: &Formula, index: &HashMap<&Formula, usize>, row: u32) -> bool {
    match f {
        Formula::Not(g) => !truth(g, index, row),
        Formula::Or(a, b) => truth(a, index, row) || truth(b, index, row),
        _ => row >> index[f] & 1 == 1,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub model: String,
    pub policy: String,
    pub point: String,
    pub substitution: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemaReport {
    pub name: String,
    pub template: String,
    pub tried: usize,
    pub failures: Vec<Failure>,
}

impl SchemaReport {
    fn new(name: &str, template: String) -> Self {
        SchemaReport {
            name: name.to_string(),
            template,
            tried: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SoundnessReport {
    pub schemas: Vec<SchemaReport>,
}

impl SoundnessReport {
    pub fn get(&self, name: &str) -> Option<&SchemaReport> {
        self.schemas.iter().find(|s| s.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &SchemaReport> {
        self.schemas.iter().filter(|s| !s.passed())
    }

    fn merge(&mut self, other: SoundnessReport) {
        for entry in other.schemas {
            match self.schemas.iter_mut().find(|s| s.name == entry.name) {
                Some(mine) => {
                    mine.tried += entry.tried;
                    mine.failures.extend(entry.failures);
                }
                None => self.schemas.push(entry),
            }
        }
    }
}

/// Instantiate `schema` with each substitution and check validity in the
/// model under `policy`.
pub fn check_schema(
    model: &BtModel,
    model_id: &str,
    schema: &AxiomSchema,
    substitutions: &[Substitution],
    policy: Policy,
) -> Result<SchemaReport, EvalError> {
    let ev = Evaluator::new(model, policy)?;
    Ok(check_schema_with(&ev, model_id, schema, substitutions))
}

fn check_schema_with(
    ev: &Evaluator<'_>,
    model_id: &str,
    schema: &AxiomSchema,
    substitutions: &[Substitution],
) -> SchemaReport {
    let mut report = SchemaReport::new(&schema.name, schema.template.render());
    for subst in substitutions {
        let f = schema
            .instantiate(subst)
            .expect("substitutions cover the schema's metavariables");
        report.tried += 1;
        if let Verdict::Falsified(p) = ev.valid(&f) {
            report.failures.push(failure(ev, model_id, p, subst));
        }
    }
    report
}

fn failure(ev: &Evaluator<'_>, model_id: &str, p: Point, subst: &Substitution) -> Failure {
    Failure {
        model: model_id.to_string(),
        policy: ev.policy().name().to_string(),
        point: ev.model().point_ref(p),
        substitution: subst.iter().map(|(k, v)| (k.clone(), v.render())).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleFailure {
    pub model: String,
    pub policy: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleEntry {
    pub name: String,
    /// Rule applications whose premises held, so the conclusion was checked.
    pub checked: usize,
    /// Applications not attempted because the model exceeded a cap.
    pub skipped: usize,
    pub failures: Vec<RuleFailure>,
}

impl RuleEntry {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleReport {
    pub irr_point_cap: usize,
    pub rules: Vec<RuleEntry>,
}

impl Default for RuleReport {
    fn default() -> Self {
        RuleReport {
            irr_point_cap: IRR_POINT_CAP,
            rules: RULES
                .iter()
                .map(|r| RuleEntry {
                    name: r.to_string(),
                    checked: 0,
                    skipped: 0,
                    failures: Vec::new(),
                })
                .collect(),
        }
    }
}

impl RuleReport {
    pub fn get(&self, name: &str) -> Option<&RuleEntry> {
        self.rules.iter().find(|r| r.name == name)
    }

    fn entry(&mut self, name: &str) -> &mut RuleEntry {
        self.rules
            .iter_mut()
            .find(|r| r.name == name)
            .expect("known rule")
    }

    fn merge(&mut self, other: RuleReport) {
        for entry in other.rules {
            let mine = self.entry(&entry.name);
            mine.checked += entry.checked;
            mine.skipped += entry.skipped;
            mine.failures.extend(entry.failures);
        }
    }
}

/// Empirical validity preservation of every rule on one model.
pub fn check_rules(
    model: &BtModel,
    model_id: &str,
    corpus: &[Formula],
    policy: Policy,
) -> Result<RuleReport, EvalError> {
    let ev = Evaluator::new(model, policy)?;
    Ok(check_rules_with(&ev, model_id, corpus))
}

fn check_rules_with(ev: &Evaluator<'_>, model_id: &str, corpus: &[Formula]) -> RuleReport {
    let mut report = RuleReport::default();
    let fail = |detail: String| RuleFailure {
        model: model_id.to_string(),
        policy: ev.policy().name().to_string(),
        detail,
    };
    let full = |ext: &fixedbitset::FixedBitSet| ext.count_ones(..) == ext.len();
    let valid: Vec<bool> = ev.extensions(corpus).iter().map(full).collect();

    for (i, phi) in corpus.iter().enumerate() {
        if !valid[i] {
            continue;
        }
        let window: Vec<usize> = (0..MP_WINDOW.min(corpus.len()))
            .map(|k| (i + k) % corpus.len())
            .collect();
        let imps: Vec<Formula> = window
            .iter()
            .map(|&j| Formula::implies(phi.clone(), corpus[j].clone()))
            .collect();
        for (imp_ext, (&j, imp)) in ev.extensions(&imps).iter().zip(window.iter().zip(&imps)) {
            if full(imp_ext) {
                let e = report.entry("MP");
                e.checked += 1;
                if !valid[j] {
                    e.failures.push(fail(format!("from {phi} and {imp}")));
                }
            }
        }
        for (rule, concl) in [
            ("RN_□", Formula::nec(phi.clone())),
            ("RN_G", Formula::all_future(phi.clone())),
            ("RN_H", Formula::all_past(phi.clone())),
        ] {
            let e = report.entry(rule);
            e.checked += 1;
            if !ev.valid(&concl).holds() {
                e.failures
                    .push(fail(format!("{phi} valid but {concl} is not")));
            }
        }
    }

    let mut congruence = Vec::new();
    for (i, phi) in corpus.iter().enumerate() {
        let chi = &corpus[(i + 1) % corpus.len()];
        for psi in equivalents(phi) {
            if check_tautology(&Formula::iff(phi.clone(), psi.clone())) != Ok(true) {
                continue;
            }
            congruence.push((
                "REA",
                Formula::iff(
                    Formula::cf(phi.clone(), chi.clone()),
                    Formula::cf(psi.clone(), chi.clone()),
                ),
            ));
            congruence.push((
                "REC",
                Formula::iff(
                    Formula::cf(chi.clone(), phi.clone()),
                    Formula::cf(chi.clone(), psi),
                ),
            ));
        }
    }
    let formulas: Vec<Formula> = congruence.iter().map(|(_, f)| f.clone()).collect();
    for ((rule, f), ext) in congruence.iter().zip(ev.extensions(&formulas)) {
        let e = report.entry(rule);
        e.checked += 1;
        if !full(&ext) {
            e.failures.push(fail(format!("{f}")));
        }
    }

    for phi in corpus {
        match irr_holds(ev, phi) {
            None => report.entry("IRR").skipped += 1,
            Some(true) => report.entry("IRR").checked += 1,
            Some(false) => {
                let e = report.entry("IRR");
                e.checked += 1;
                e.failures.push(fail(format!(
                    "premise valid for every valuation of `{FRESH_ATOM}` but {phi} is not"
                )));
            }
        }
    }
    report
}

// Variants of `f` that ought to be propositionally equivalent to it.
fn equivalents(f: &Formula) -> Vec<Formula> {
    let mut out = vec![
        Formula::not(Formula::not(f.clone())),
        Formula::or(f.clone(), f.clone()),
        Formula::and(f.clone(), f.clone()),
    ];
    match f {
        Formula::Or(a, b) => {
            out.push(Formula::or((**b).clone(), (**a).clone()));
            out.push(Formula::not(Formula::and(
                Formula::not((**a).clone()),
                Formula::not((**b).clone()),
            )));
        }
        Formula::Not(g) => {
            if let Formula::Or(a, b) = g.as_ref() {
                out.push(Formula::not(Formula::or((**b).clone(), (**a).clone())));
            }
        }
        _ => {}
    }
    out
}

/// `Some(true)` when IRR is respected for `phi` on this model, `Some(false)`
/// when it is violated, `None` when the model is over the size cap.
///
/// Valuations of the fresh atom are tried smallest first; the first one that
/// falsifies the premise settles the question.
fn irr_holds(ev: &Evaluator<'_>, phi: &Formula) -> Option<bool> {
    let model = ev.model();
    let n = model.points().len();
    if ev.valid(phi).holds() {
        return Some(true);
    }
    if n > IRR_POINT_CAP {
        return None;
    }
    let mut fresh = FRESH_ATOM.to_string();
    while phi.contains_atom(&fresh) {
        fresh.push('_');
    }
    let p = Formula::atom(fresh.as_str());
    let premise = Formula::implies(
        Formula::and(p.clone(), Formula::all_past(Formula::not(p))),
        phi.clone(),
    );
    let mut masks: Vec<u32> = (0..1u32 << n).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let mut atom_ext = fixedbitset::FixedBitSet::with_capacity(n);
        for i in (0..n).filter(|i| mask >> i & 1 == 1) {
            atom_ext.insert(i);
        }
        let ext = ev.extension_with_atom(&premise, &fresh, atom_ext);
        if ext.count_ones(..) < n {
            return Some(true);
        }
    }
    Some(false)
}

/// Knobs for a soundness run.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub schemas: Vec<AxiomSchema>,
    pub policies: Vec<Policy>,
    pub substitutions: usize,
    pub depth: usize,
    /// Atoms used in substitutions; empty means the model's own atoms.
    pub atoms: Vec<String>,
    /// Random formulas in the rule corpus, on top of schema instances.
    pub corpus: usize,
    pub rules: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            schemas: registry(),
            policies: Policy::ALL.to_vec(),
            substitutions: 20,
            depth: 4,
            atoms: vec!["p".into(), "q".into(), "r".into()],
            corpus: 8,
            rules: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub models: usize,
    pub soundness: SoundnessReport,
    /// Propositional tautologies (confirmed by the truth-table checker)
    /// that must hold at every point.
    pub tautologies: SchemaReport,
    pub rules: RuleReport,
}

impl Default for SchemaReport {
    fn default() -> Self {
        SchemaReport::new("PL", String::from("propositional tautologies"))
    }
}

impl SuiteReport {
    pub fn is_clean(&self) -> bool {
        self.soundness.schemas.iter().all(SchemaReport::passed)
            && self.tautologies.passed()
            && self.rules.rules.iter().all(RuleEntry::passed)
    }

    fn merge(&mut self, other: SuiteReport) {
        self.models += other.models;
        self.soundness.merge(other.soundness);
        self.tautologies.tried += other.tautologies.tried;
        self.tautologies.failures.extend(other.tautologies.failures);
        self.rules.merge(other.rules);
    }

    /// One line per schema and per rule.
    pub fn render_text(&self) -> String {
        let mut out = format!("models checked: {}\n", self.models);
        let line = |s: &SchemaReport| {
            let mut l = format!(
                "{:<5} tried {:>6}  failed {:>5}",
                s.name,
                s.tried,
                s.failures.len()
            );
            if let Some(f) = s.failures.first() {
                let subst: Vec<String> = f
                    .substitution
                    .iter()
                    .map(|(k, v)| format!("{k}:={v}"))
                    .collect();
                l.push_str(&format!(
                    "  e.g. {} at {} ({}) with {}",
                    f.model,
                    f.point,
                    f.policy,
                    subst.join(", ")
                ));
            }
            l
        };
        for s in &self.soundness.schemas {
            out.push_str(&line(s));
            out.push('\n');
        }
        out.push_str(&line(&self.tautologies));
        out.push('\n');
        for r in &self.rules.rules {
            out.push_str(&format!(
                "{:<5} checked {:>5}  skipped {:>4}  failed {:>3}",
                r.name,
                r.checked,
                r.skipped,
                r.failures.len()
            ));
            if let Some(f) = r.failures.first() {
                out.push_str(&format!("  e.g. {} ({}): {}", f.model, f.policy, f.detail));
            }
            out.push('\n');
        }
        out.push_str(if self.is_clean() {
            "result: sound\n"
        } else {
            "result: FAILURES\n"
        });
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Substitutions for `schema`: every assignment of plain atoms first (up to
/// half the budget), then random formulas.
pub fn substitutions(
    schema: &AxiomSchema,
    atoms: &[&str],
    budget: usize,
    depth: usize,
    rng: &mut impl Rng,
) -> Vec<Substitution> {
    let vars = schema.metavariables();
    let k = vars.len();
    let mut out = Vec::with_capacity(budget);
    let combos = atoms.len().checked_pow(k as u32).unwrap_or(usize::MAX);
    for code in 0..combos.min(budget / 2).max(budget.min(1)) {
        let mut c = code;
        let mut s = Substitution::new();
        for v in vars {
            s.insert(v.clone(), Formula::atom(atoms[c % atoms.len()]));
            c /= atoms.len();
        }
        out.push(s);
    }
    while out.len() < budget {
        out.push(
            vars.iter()
                .map(|v| (v.clone(), formula_from(rng, depth, atoms)))
                .collect(),
        );
    }
    out
}

/// Run every configured schema and rule on one model.
pub fn check_model(
    model: &BtModel,
    model_id: &str,
    seed: u64,
    cfg: &SuiteConfig,
) -> Result<SuiteReport, EvalError> {
    let model_atoms: Vec<String>;
    let atoms: Vec<&str> = if cfg.atoms.is_empty() {
        model_atoms = model.valuation().keys().cloned().collect();
        if model_atoms.is_empty() {
            vec!["p"]
        } else {
            model_atoms.iter().map(String::as_str).collect()
        }
    } else {
        cfg.atoms.iter().map(String::as_str).collect()
    };

    let mut report = SuiteReport {
        models: 1,
        ..SuiteReport::default()
    };
    for s in &cfg.schemas {
        report
            .soundness
            .schemas
            .push(SchemaReport::new(&s.name, s.template.render()));
    }
    for &policy in &cfg.policies {
        if policy == Policy::CoPresent && model.instants().is_none() {
            continue;
        }
        let ev = Evaluator::new(model, policy)?;
        let mut corpus = Vec::new();
        for (i, schema) in cfg.schemas.iter().enumerate() {
            let mut rng = stream(seed, i as u64 + 1);
            let subs = substitutions(schema, &atoms, cfg.substitutions, cfg.depth, &mut rng);
            if let Some(sample) = subs.first() {
                corpus.push(schema.instantiate(sample).expect("covered"));
            }
            let entry = check_schema_with(&ev, model_id, schema, &subs);
            report.soundness.merge(SoundnessReport {
                schemas: vec![entry],
            });
        }

        let mut rng = stream(seed, 0);
        for _ in 0..cfg.substitutions {
            let a = formula_from(&mut rng, cfg.depth.min(3), &atoms);
            let b = formula_from(&mut rng, cfg.depth.min(3), &atoms);
            let taut = match rng.gen_range(0..4) {
                0 => Formula::or(a.clone(), Formula::not(a)),
                1 => Formula::implies(a.clone(), a),
                2 => Formula::implies(Formula::and(Formula::implies(a.clone(), b.clone()), a), b),
                _ => Formula::implies(a, b),
            };
            if check_tautology(&taut) != Ok(true) {
                continue;
            }
            report.tautologies.tried += 1;
            if let Verdict::Falsified(p) = ev.valid(&taut) {
                let subst = Substitution::from([("A".to_string(), taut)]);
                report
                    .tautologies
                    .failures
                    .push(failure(&ev, model_id, p, &subst));
            }
        }

        if cfg.rules {
            for _ in 0..cfg.corpus {
                corpus.push(formula_from(&mut rng, cfg.depth.min(3), &atoms));
            }
            corpus.push(Formula::or(
                Formula::atom(atoms[0]),
                Formula::not(Formula::atom(atoms[0])),
            ));
            report.rules.merge(check_rules_with(&ev, model_id, &corpus));
        }
    }
    Ok(report)
}

/// Parameters of the `i`-th fuzz model. Similarity kinds alternate and every
/// fourth model has no instants.
pub fn fuzz_params(i: usize) -> GenParams {
    GenParams {
        similarity: if i.is_multiple_of(2) {
            SimilarityKind::Ranks
        } else {
            SimilarityKind::Pairs
        },
        with_instants: i % 4 != 3,
        ..GenParams::default()
    }
}

/// Seed of the `i`-th fuzz model for a run seeded with `seed`.
pub fn fuzz_model_seed(seed: u64, i: usize) -> u64 {
    stream(seed, u64::MAX).gen::<u64>() ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Check `count` random models in parallel. The result does not depend on
/// thread scheduling.
pub fn fuzz(seed: u64, count: usize, cfg: &SuiteConfig) -> SuiteReport {
    let parts: Vec<SuiteReport> = (0..count)
        .into_par_iter()
        .map(|i| {
            let model_seed = fuzz_model_seed(seed, i);
            let model = random_model(model_seed, &fuzz_params(i)).expect("params within caps");
            check_model(
                &model,
                &format!("model#{i} (seed {model_seed})"),
                model_seed,
                cfg,
            )
            .expect("generated models support every applicable policy")
        })
        .collect();
    let mut total = SuiteReport::default();
    for s in &cfg.schemas {
        total
            .soundness
            .schemas
            .push(SchemaReport::new(&s.name, s.template.render()));
    }
    for part in parts {
        total.merge(part);
    }
    total
}
