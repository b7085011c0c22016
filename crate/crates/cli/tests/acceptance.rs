//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criterion 2 is known to be red: two registry schemas are falsified by
//! small models, which the harness prints alongside the verdict. The process
//! exits non-zero only when the outcome differs from that known state, or
//! on any FAIL when `ACCEPTANCE_STRICT=1`.

#[path = "../../core/tests/support/naive.rs"]
mod naive;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use cfbt_core::axioms::{
    check_model, check_schema, find_schema, fuzz, fuzz_model_seed, fuzz_params, registry,
    substitutions, SuiteConfig,
};
use cfbt_core::generators::{
    fixture, mutate, random_formula, random_model, rng, tournament, GenParams, Mutant, Stance,
    FIXTURES,
};
use cfbt_core::model::{compute_histories, MomentId, SimilarityOrder};
use cfbt_core::{
    eval, load_model, parse, validate, AxiomSchema, BtModel, Evaluator, Formula, Policy,
};

const FUZZ_SEED: u64 = 7;
const KNOWN_RED: &[u32] = &[2];

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    summary: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Outcome {
            pass,
            summary: summary.into(),
            notes: Vec::new(),
        }
    }
}

fn policies(model: &BtModel) -> Vec<Policy> {
    Policy::ALL
        .into_iter()
        .filter(|&p| p != Policy::CoPresent || model.instants().is_some())
        .collect()
}

fn f(s: &str) -> Formula {
    parse(s).unwrap()
}

fn holds(m: &BtModel, point: &str, formula: &str, policy: Policy) -> bool {
    eval(m, m.resolve_point(point).unwrap(), &f(formula), policy).unwrap()
}

fn c1_fixtures() -> Outcome {
    let start = Instant::now();
    let stoic = tournament(Stance::Stoic);
    let anti = tournament(Stance::AntiStoic);
    let cf = "chrysippus_vs_berkeley => chrysippus_wins";
    let checks = [
        (
            "berkeley won and will win",
            holds(
                &stoic,
                "b_vs_c@0",
                "P berkeley_wins & F berkeley_wins",
                Policy::Unrestricted,
            ),
            true,
        ),
        (
            "hist-accessible vacuous",
            holds(&stoic, "a_vs_c@2", cf, Policy::HistAccessible),
            true,
        ),
        (
            "hist-accessible antecedent unreachable",
            holds(
                &stoic,
                "a_vs_c@2",
                "chrysippus_vs_berkeley => false",
                Policy::HistAccessible,
            ),
            true,
        ),
        (
            "copresent stoic",
            holds(&stoic, "a_vs_c@2", cf, Policy::CoPresent),
            true,
        ),
        (
            "copresent anti-stoic",
            holds(&anti, "a_vs_c@2", cf, Policy::CoPresent),
            false,
        ),
    ];
    let elapsed = start.elapsed();
    let wrong: Vec<&str> = checks.iter().filter(|c| c.1 != c.2).map(|c| c.0).collect();
    let pass = wrong.is_empty() && elapsed < Duration::from_secs(1);
    let mut o = Outcome::new(
        pass,
        format!("{}/5 booleans match in {elapsed:.2?}", 5 - wrong.len()),
    );
    o.notes
        .extend(wrong.iter().map(|w| format!("mismatch: {w}")));
    o
}

fn soundness_config() -> SuiteConfig {
    SuiteConfig {
        substitutions: 20,
        ..SuiteConfig::default()
    }
}

// A three-world model with u closer to w than v. Returns whether `schema`
// falsifies at w with A at v, B at u and v, C at u.
fn sa_probe(schema: &AxiomSchema) -> bool {
    let mut m = BtModel::from_edges(&["w", "u", "v"], &[]).unwrap();
    let [w, u, v] = ["w", "u", "v"].map(|r| m.resolve_point(r).unwrap());
    m.set_atom("a", [v]);
    m.set_atom("b", [u, v]);
    m.set_atom("c", [u]);
    m.set_similarity(
        w,
        SimilarityOrder::from_ranks(&BTreeMap::from([(w, 0), (u, 1), (v, 2)])),
    );
    let inst = schema
        .instantiate(
            &[("A", "a"), ("B", "b"), ("C", "c")]
                .iter()
                .map(|(k, v)| (k.to_string(), f(v)))
                .collect(),
        )
        .unwrap();
    !eval(&m, w, &inst, Policy::Unrestricted).unwrap()
}

fn c2_soundness() -> Outcome {
    let start = Instant::now();
    let cfg = soundness_config();
    let report = fuzz(FUZZ_SEED, 100, &cfg);
    let elapsed = start.elapsed();
    let failed: Vec<String> = report.soundness.failed().map(|s| s.name.clone()).collect();
    let pass = failed.is_empty()
        && report.soundness.schemas.len() == 20
        && elapsed < Duration::from_secs(60);
    let tried: usize = report.soundness.schemas.iter().map(|s| s.tried).sum();
    let mut o = Outcome::new(
        pass,
        format!(
            "{} schemas, {tried} instances over 100 models in {elapsed:.2?}; failing: [{}]",
            report.soundness.schemas.len(),
            failed.join(", ")
        ),
    );
    for s in report.soundness.failed() {
        let first = &s.failures[0];
        o.notes.push(format!(
            "{}: {} of {} instances falsified; first at {} {} under {} with {:?}",
            s.name,
            s.failures.len(),
            s.tried,
            first.model,
            first.point,
            first.policy,
            first.substitution
        ));
    }
    if failed.iter().any(|n| n == "SA") {
        let sa = find_schema("SA").unwrap();
        let cm = AxiomSchema::parse("CM", "(A => B) & (A => C) -> (A & B => C)").unwrap();
        let cm_report = fuzz(
            FUZZ_SEED,
            100,
            &SuiteConfig {
                schemas: vec![cm.clone()],
                rules: false,
                ..cfg.clone()
            },
        );
        o.notes.push(format!(
            "SA `{}` is falsified by the three-world probe: {}; CM `{}` on the same corpus: {} failures, probe: {}",
            sa.template.render(),
            sa_probe(&sa),
            cm.template.render(),
            cm_report.soundness.schemas[0].failures.len(),
            sa_probe(&cm)
        ));
    }
    if failed.iter().any(|n| n == "L3") {
        let mut m = BtModel::from_edges(&["r", "a", "b"], &[("r", "a"), ("r", "b")]).unwrap();
        m.set_atom("p", [m.resolve_point("r@0").unwrap()]);
        let a0 = m.resolve_point("a@0").unwrap();
        let ev = Evaluator::new(&m, Policy::Unrestricted).unwrap();
        let forward = AxiomSchema::parse("L3>", "H[]A -> []H A").unwrap();
        let fwd = fuzz(
            FUZZ_SEED,
            100,
            &SuiteConfig {
                schemas: vec![forward],
                rules: false,
                ..cfg.clone()
            },
        );
        o.notes.push(format!(
            "L3 on the fork r->a, r->b with p only at r@0: at a@0 []H p = {}, H[]p = {}; \
             atoms vary across histories at a shared moment, so H[]A holds only where the past is settled for A",
            ev.holds(a0, &f("[]H p")).unwrap(),
            ev.holds(a0, &f("H[]p")).unwrap()
        ));
        o.notes.push(format!(
            "L3 direction H[]A -> []H A on the same corpus: {} failures",
            fwd.soundness.schemas[0].failures.len()
        ));
    }
    o
}

fn c3_rules() -> Outcome {
    let cfg = soundness_config();
    let report = fuzz(FUZZ_SEED, 100, &cfg);
    let mut bad: Vec<String> = report
        .rules
        .rules
        .iter()
        .filter(|r| !r.passed() || r.checked == 0)
        .map(|r| r.name.clone())
        .collect();
    // IRR must run without skips on every model within the point cap.
    let rules_only = SuiteConfig {
        schemas: registry(),
        ..cfg
    };
    let mut small = 0;
    let mut skipped_small = 0;
    for i in 0..100 {
        let seed = fuzz_model_seed(FUZZ_SEED, i);
        let model = random_model(seed, &fuzz_params(i)).unwrap();
        if model.points().len() > 12 {
            continue;
        }
        small += 1;
        let r = check_model(&model, "m", seed, &rules_only).unwrap();
        let irr = r.rules.get("IRR").unwrap();
        skipped_small += irr.skipped;
        if !irr.passed() {
            bad.push(format!("IRR on model#{i}"));
        }
    }
    if skipped_small > 0 {
        bad.push(format!("IRR skipped {skipped_small} on small models"));
    }
    let counts: Vec<String> = report
        .rules
        .rules
        .iter()
        .map(|r| format!("{} {}/{}", r.name, r.checked - r.failures.len(), r.checked))
        .collect();
    let mut o = Outcome::new(
        bad.is_empty(),
        format!(
            "{}; IRR exhaustive on {small} models with at most 12 points",
            counts.join(", ")
        ),
    );
    o.notes
        .extend(bad.into_iter().map(|b| format!("problem: {b}")));
    o
}

fn c4_counterexample() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let mut ok = 0;
    let mut models = BTreeSet::new();
    let mut notes = Vec::new();
    for k in 0..20u64 {
        let seed = k * 1000;
        let path = dir.path().join(format!("w{seed}.json"));
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = cfbt_cli::run(
            [
                "cfbt",
                "counterexample",
                "--seed",
                &seed.to_string(),
                "--out",
                path.to_str().unwrap(),
            ],
            &mut out,
            &mut err,
        );
        let out = String::from_utf8(out).unwrap();
        let point = out
            .lines()
            .find_map(|l| l.strip_prefix("point: "))
            .map(str::to_string);
        let policy = out
            .lines()
            .find_map(|l| l.strip_prefix("policy: "))
            .map(|p| p.parse::<Policy>());
        let (Some(point), Some(Ok(policy))) = (point, policy) else {
            notes.push(format!(
                "seed {seed}: exit {code}, {}",
                String::from_utf8_lossy(&err)
            ));
            continue;
        };
        let text = std::fs::read_to_string(&path).unwrap();
        let model = load_model(&text).unwrap();
        let p = model.resolve_point(&point).unwrap();
        let weak = eval(&model, p, &f("p => r"), policy).unwrap();
        let strong = eval(&model, p, &f("p & q => r"), policy).unwrap();
        let again = load_model(&cfbt_core::save_model(&model)).unwrap();
        let stable = again == model
            && eval(&again, p, &f("p => r"), policy).unwrap() == weak
            && eval(&again, p, &f("p & q => r"), policy).unwrap() == strong;
        if code == 0 && validate(&model).is_valid() && weak && !strong && stable {
            ok += 1;
            models.insert(text);
        } else {
            notes.push(format!("seed {seed}: witness did not reproduce"));
        }
    }
    let mut o = Outcome::new(
        ok == 20 && models.len() >= 20,
        format!(
            "{ok}/20 seeds reproduce after reload, {} distinct witness models",
            models.len()
        ),
    );
    o.notes = notes;
    o
}

fn c5_histories() -> Outcome {
    let params = GenParams {
        max_moments: 10,
        ..GenParams::default()
    };
    let mut mismatches = 0;
    for seed in 0..200 {
        let m = random_model(seed, &params).unwrap();
        let prec = m.precedence();
        let fast: BTreeSet<BTreeSet<usize>> = compute_histories(prec)
            .iter()
            .map(|h| h.moments().iter().map(|x| x.0).collect())
            .collect();
        let slow =
            naive::histories_by_subsets(prec.len(), |a, b| prec.precedes(MomentId(a), MomentId(b)));
        mismatches += (fast != slow) as usize;
    }
    Outcome::new(
        mismatches == 0,
        format!("{mismatches} mismatches on 200 frames with at most 10 moments"),
    )
}

fn c6_evaluator() -> Outcome {
    let mut compared = 0usize;
    let mut disagreements = Vec::new();
    for name in FIXTURES {
        let model = fixture(name).unwrap();
        let atoms: Vec<&str> = model.valuation().keys().map(String::as_str).collect();
        for policy in policies(&model) {
            let ev = Evaluator::new(&model, policy).unwrap();
            for k in 0..200u64 {
                let g = random_formula(k, 1 + (k as usize) % 5, &atoms).unwrap();
                let ext = ev.extension(&g);
                for (i, &p) in model.points().iter().enumerate() {
                    compared += 1;
                    if ext.contains(i) != naive::naive_eval(&model, p, &g, policy) {
                        disagreements.push(format!("{name} {policy} {} : {g}", model.point_ref(p)));
                    }
                }
            }
        }
    }
    let mut o = Outcome::new(
        disagreements.is_empty(),
        format!(
            "{} disagreements in {compared} point evaluations",
            disagreements.len()
        ),
    );
    o.notes.extend(disagreements.into_iter().take(5));
    o
}

fn c7_last_moments() -> Outcome {
    let params = GenParams {
        max_moments: 12,
        ..GenParams::default()
    };
    let l6 = find_schema("L6").unwrap();
    let mut violations = 0;
    let mut l6_failures = 0;
    let mut l6_tried = 0;
    for seed in 0..500 {
        let m = random_model(seed, &params).unwrap();
        for moment in m.moments() {
            let last: BTreeSet<bool> = m
                .histories_through(moment)
                .iter()
                .map(|&h| m.history(h).last() == Some(moment))
                .collect();
            violations += (last.len() > 1) as usize;
        }
        let atoms: Vec<&str> = m.valuation().keys().map(String::as_str).collect();
        let subs = substitutions(&l6, &atoms, 4, 3, &mut rng(seed));
        for policy in policies(&m) {
            let r = check_schema(&m, "frame", &l6, &subs, policy).unwrap();
            l6_tried += r.tried;
            l6_failures += r.failures.len();
        }
    }
    Outcome::new(
        violations == 0 && l6_failures == 0,
        format!("{violations} last-moment violations on 500 frames; L6 {l6_failures} failures in {l6_tried} instances"),
    )
}

fn c8_mutants() -> Outcome {
    let schemas = registry();
    let mut silent = Vec::new();
    let mut per_kind: BTreeMap<&str, (usize, usize, usize)> = BTreeMap::new();
    let mut bases: Vec<(String, BtModel)> = FIXTURES
        .iter()
        .map(|n| (n.to_string(), fixture(n).unwrap()))
        .collect();
    for seed in 0..20 {
        bases.push((
            format!("seed {seed}"),
            random_model(
                seed,
                &GenParams {
                    max_moments: 8,
                    ..GenParams::default()
                },
            )
            .unwrap(),
        ));
    }
    for (label, base) in &bases {
        for kind in Mutant::ALL {
            let Some(bad) = mutate(base, kind) else {
                continue;
            };
            let entry = per_kind.entry(kind.name()).or_default();
            entry.0 += 1;
            let flagged = !validate(&bad).is_valid();
            entry.1 += flagged as usize;
            let atoms: Vec<&str> = bad.valuation().keys().map(String::as_str).collect();
            let atoms = if atoms.is_empty() { vec!["p"] } else { atoms };
            let schema_fails = schemas.iter().any(|s| {
                let subs = substitutions(s, &atoms, 6, 2, &mut rng(1));
                policies(&bad).into_iter().any(|policy| {
                    check_schema(&bad, label, s, &subs, policy)
                        .map(|r| !r.passed())
                        .unwrap_or(true)
                })
            });
            entry.2 += schema_fails as usize;
            if !flagged && !schema_fails {
                silent.push(format!("{label}: {}", kind.name()));
            }
        }
    }
    let counts: Vec<String> = per_kind
        .iter()
        .map(|(k, (n, v, s))| {
            format!("{k} {n} mutants, {v} flagged by validate, {s} with a failing schema")
        })
        .collect();
    let mut o = Outcome::new(
        silent.is_empty() && per_kind.len() == Mutant::ALL.len(),
        format!("{} silent mutants", silent.len()),
    );
    o.notes = counts;
    o.notes.extend(silent);
    o
}

fn c9_round_trip() -> Outcome {
    let atoms = ["p", "q", "r", "s"];
    let mut broken = 0;
    for seed in 0..10_000u64 {
        let g = random_formula(seed, (seed % 6) as usize, &atoms).unwrap();
        broken += (parse(&g.render()).ok() != Some(g)) as usize;
    }
    let (a, b, c) = (Formula::atom("A"), Formula::atom("B"), Formula::atom("C"));
    let cc = Formula::implies(
        Formula::and(
            Formula::cf(a.clone(), b.clone()),
            Formula::cf(a.clone(), c.clone()),
        ),
        Formula::cf(a, Formula::and(b, c)),
    );
    let examples = parse("p => p").ok()
        == Some(Formula::cf(Formula::atom("p"), Formula::atom("p")))
        && parse("(A => B) & (A => C) -> (A => (B & C))").ok() == Some(cc);
    Outcome::new(
        broken == 0 && examples,
        format!(
            "{broken}/10000 round-trip failures; precedence examples {}",
            if examples { "ok" } else { "wrong" }
        ),
    )
}

fn main() {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let criteria: [Criterion; 9] = [
        (1, "fixture fidelity", c1_fixtures),
        (2, "fusion soundness fuzz", c2_soundness),
        (3, "rule soundness", c3_rules),
        (4, "strengthening counterexample", c4_counterexample),
        (5, "history oracle", c5_histories),
        (6, "evaluator oracle", c6_evaluator),
        (7, "last-moment property and L6", c7_last_moments),
        (8, "mutation sensitivity", c8_mutants),
        (9, "parser round-trip", c9_round_trip),
    ];
    let mut unexpected = Vec::new();
    let mut red = 0;
    for (n, name, run) in criteria {
        let o = run();
        println!(
            "criterion {n} {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.summary
        );
        for note in &o.notes {
            println!("    {note}");
        }
        red += !o.pass as usize;
        if o.pass == KNOWN_RED.contains(&n) || (strict && !o.pass) {
            unexpected.push(n);
        }
    }
    println!("{} of 9 criteria pass", 9 - red);
    if !unexpected.is_empty() {
        println!("outcome differs from the recorded state for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
