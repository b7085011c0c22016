//! Command implementations behind the `cfbt` binary.
//!
//! Every command writes to the given streams and returns its exit status,
//! so the binary and the tests drive the same code.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use cfbt_core::axioms::{self, check_model, find_schema, SuiteConfig, SuiteReport};
use cfbt_core::counterexample::find_strengthening_counterexample;
use cfbt_core::dot::to_dot;
use cfbt_core::generators::fixture;
use cfbt_core::model::{load_model_with, LoadOptions};
use cfbt_core::semantics::explain;
use cfbt_core::{parse, save_model, validate, BtModel, Evaluator, Policy};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cfbt", version, about = "Counterfactuals over branching time")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a formula at a point of a model.
    Eval {
        model: PathBuf,
        /// `moment@history`, or a bare moment when every history agrees.
        point: String,
        formula: String,
        #[arg(long, default_value = "unrestricted")]
        policy: Policy,
        /// Print the recursion trace.
        #[arg(long)]
        explain: bool,
        #[command(flatten)]
        load: LoadFlags,
    },
    /// Check a model file against the frame and similarity conditions.
    Validate {
        model: PathBuf,
        #[command(flatten)]
        load: LoadFlags,
    },
    /// Check axiom schemas and rules on a model or on random models.
    Axioms {
        /// Model file to check; omit when fuzzing.
        model: Option<PathBuf>,
        /// Check COUNT random models derived from SEED.
        #[arg(long, num_args = 2, value_names = ["SEED", "COUNT"], conflicts_with = "model")]
        fuzz: Option<Vec<u64>>,
        /// Comma-separated schema names (e.g. `CI,4_G,K_box`); all by default.
        #[arg(long, value_delimiter = ',')]
        schemas: Option<Vec<String>>,
        /// Restrict to one policy; all applicable policies by default.
        #[arg(long)]
        policy: Option<Policy>,
        /// Substitutions per schema, per model and policy.
        #[arg(long, default_value_t = 20)]
        substitutions: usize,
        /// Seed for substitutions when checking a model file.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip the inference-rule checks.
        #[arg(long)]
        no_rules: bool,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        load: LoadFlags,
    },
    /// Print the frame as Graphviz DOT.
    ExportDot {
        model: PathBuf,
        #[arg(long)]
        highlight: Option<String>,
    },
    /// Find a model where `p => r` holds but `p & q => r` fails.
    Counterexample {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the witness model here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a built-in model (tournament, tournament_anti_stoic, wine, simple_fork).
    Fixture {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Clone, Copy)]
pub struct LoadFlags {
    /// Take the file literally: no transitive closure and no validation gate.
    #[arg(long)]
    pub unchecked: bool,
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Eval {
            model,
            point,
            formula,
            policy,
            explain,
            load,
        } => cmd_eval(&model, &point, &formula, policy, explain, load, out),
        Command::Validate { model, load } => cmd_validate(&model, load, out),
        Command::Axioms {
            model,
            fuzz,
            schemas,
            policy,
            substitutions,
            seed,
            no_rules,
            json,
            load,
        } => {
            let target = match (model, fuzz) {
                (Some(path), None) => Target::File(path, seed),
                (None, Some(f)) => Target::Fuzz(f[0], f[1] as usize),
                _ => {
                    let _ = writeln!(err, "error: give a model file or --fuzz SEED COUNT");
                    return EXIT_ERROR;
                }
            };
            cmd_axioms(
                target,
                schemas.as_deref(),
                policy,
                substitutions,
                !no_rules,
                json,
                load,
                out,
            )
        }
        Command::ExportDot { model, highlight } => {
            cmd_export_dot(&model, highlight.as_deref(), out)
        }
        Command::Counterexample { seed, out: path } => {
            cmd_counterexample(seed, path.as_deref(), out)
        }
        Command::Fixture { name, out: path } => cmd_fixture(&name, path.as_deref(), out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

/// A failure that ends a command with exit status 2.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct CliError(String);

fn fail(msg: impl Into<String>) -> CliError {
    CliError(msg.into())
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        fail(e.to_string())
    }
}

type CmdResult = Result<i32, CliError>;

/// Read a model file; unless `unchecked`, close the precedence relation and
/// refuse models that fail validation.
pub fn read_model(path: &Path, load: LoadFlags) -> Result<BtModel, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    let opts = LoadOptions {
        close_precedence: !load.unchecked,
    };
    let model =
        load_model_with(&text, opts).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    if !load.unchecked {
        let report = validate(&model);
        if !report.is_valid() {
            return Err(fail(format!(
                "{} is not a valid model:\n{}",
                path.display(),
                report.render(&model).trim_end()
            )));
        }
    }
    Ok(model)
}

pub fn cmd_eval(
    path: &Path,
    point: &str,
    formula: &str,
    policy: Policy,
    show_trace: bool,
    load: LoadFlags,
    out: &mut dyn Write,
) -> CmdResult {
    let model = read_model(path, load)?;
    let f = parse(formula).map_err(|e| fail(format!("formula: {e}")))?;
    let points = model.resolve_ref(point).map_err(|e| fail(e.to_string()))?;
    let ev = Evaluator::new(&model, policy).map_err(|e| fail(e.to_string()))?;
    let ext = ev.extension(&f);
    let values: Vec<bool> = points
        .iter()
        .map(|&p| ext.contains(model.point_index(p).expect("resolved points exist")))
        .collect();
    if values.iter().any(|&v| v != values[0]) {
        let detail: Vec<String> = points
            .iter()
            .zip(&values)
            .map(|(&p, v)| format!("{}={v}", model.point_ref(p)))
            .collect();
        return Err(fail(format!(
            "`{point}` is ambiguous: the formula differs across histories ({}); name a point as moment@history",
            detail.join(", ")
        )));
    }
    if show_trace {
        for &p in &points {
            let trace = explain(&model, p, &f, policy).map_err(|e| fail(e.to_string()))?;
            write!(out, "{}", trace.render(&model))?;
        }
    }
    writeln!(out, "{}", values[0])?;
    Ok(if values[0] { EXIT_OK } else { EXIT_FALSE })
}

pub fn cmd_validate(path: &Path, load: LoadFlags, out: &mut dyn Write) -> CmdResult {
    let text =
        std::fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    let opts = LoadOptions {
        close_precedence: !load.unchecked,
    };
    let model =
        load_model_with(&text, opts).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    let report = validate(&model);
    if report.is_valid() {
        writeln!(out, "valid")?;
        Ok(EXIT_OK)
    } else {
        write!(out, "{}", report.render(&model))?;
        Ok(EXIT_ERROR)
    }
}

pub enum Target {
    File(PathBuf, u64),
    Fuzz(u64, usize),
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_axioms(
    target: Target,
    schemas: Option<&[String]>,
    policy: Option<Policy>,
    substitutions: usize,
    rules: bool,
    json: bool,
    load: LoadFlags,
    out: &mut dyn Write,
) -> CmdResult {
    let selected = match schemas {
        None => axioms::registry(),
        Some(names) => names
            .iter()
            .map(|n| find_schema(n.trim()).ok_or_else(|| fail(format!("unknown schema `{n}`"))))
            .collect::<Result<Vec<_>, _>>()?,
    };
    let mut cfg = SuiteConfig {
        schemas: selected,
        policies: policy.map_or(Policy::ALL.to_vec(), |p| vec![p]),
        substitutions,
        rules,
        ..SuiteConfig::default()
    };
    let report: SuiteReport = match target {
        Target::Fuzz(seed, count) => axioms::fuzz(seed, count, &cfg),
        Target::File(path, seed) => {
            let model = read_model(&path, load)?;
            if policy == Some(Policy::CoPresent) && model.instants().is_none() {
                return Err(fail("policy copresent needs instants in the model"));
            }
            cfg.atoms = Vec::new();
            check_model(&model, &path.display().to_string(), seed, &cfg)
                .map_err(|e| fail(e.to_string()))?
        }
    };
    if json {
        writeln!(out, "{}", report.to_json())?;
    } else {
        write!(out, "{}", report.render_text())?;
    }
    Ok(if report.is_clean() {
        EXIT_OK
    } else {
        EXIT_FALSE
    })
}

pub fn cmd_export_dot(path: &Path, highlight: Option<&str>, out: &mut dyn Write) -> CmdResult {
    let model = read_model(path, LoadFlags { unchecked: false })?;
    let point = highlight
        .map(|r| model.resolve_point(r).map_err(|e| fail(e.to_string())))
        .transpose()?;
    write!(out, "{}", to_dot(&model, point))?;
    Ok(EXIT_OK)
}

pub fn cmd_counterexample(seed: u64, path: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let hit = match find_strengthening_counterexample(seed) {
        Ok(hit) => hit,
        Err(e) => {
            writeln!(out, "seed {seed}: {e}")?;
            return Ok(EXIT_FALSE);
        }
    };
    let ev = Evaluator::new(&hit.model, hit.policy).map_err(|e| fail(e.to_string()))?;
    let weak = ev
        .holds(hit.point, &hit.weak)
        .map_err(|e| fail(e.to_string()))?;
    let strong = ev
        .holds(hit.point, &hit.strong)
        .map_err(|e| fail(e.to_string()))?;
    writeln!(
        out,
        "seed: {seed} (model {} of the search)",
        hit.attempt + 1
    )?;
    writeln!(out, "policy: {}", hit.policy)?;
    writeln!(out, "point: {}", hit.model.point_ref(hit.point))?;
    writeln!(out, "{} : {weak}", hit.weak)?;
    writeln!(out, "{} : {strong}", hit.strong)?;
    let text = save_model(&hit.model);
    match path {
        Some(p) => {
            std::fs::write(p, text + "\n").map_err(|e| fail(format!("{}: {e}", p.display())))?;
            writeln!(out, "model written to {}", p.display())?;
        }
        None => writeln!(out, "{text}")?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_fixture(name: &str, path: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let model = fixture(name).map_err(|e| fail(e.to_string()))?;
    let text = save_model(&model) + "\n";
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| fail(format!("{}: {e}", p.display())))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}
