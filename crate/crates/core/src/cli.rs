//! The `normrev` command line.
//!
//! Every command builds a [`Report`] that is printed either as text or, with
//! `--json`, as one JSON document. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success; for `classify`, a relaxation |
//! | 1 | invalid input or defects found |
//! | 2 | `classify`: strengthening |
//! | 3 | `classify`: equivalent |
//! | 4 | `classify`: incomparable |
//! | 5 | `classify`: transition relation not total |

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rust_decimal::Decimal;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dsl::{
    parse_formula, parse_model, parse_norms, parse_path_file, parse_scenario, render_norm, render_runlog, DslError,
    PathFile,
};
use crate::model::{ModelError, TransitionSystem};
use crate::norms::{lint, run_trace, EventKind, MonitorMode, NormSet, Semantics, TieBreak, LASSO_UNROLL_CYCLES};
use crate::revision::{
    generate_candidates, oracle_compare, syntactic_classify, CandidatePool, Classifier, Relation, RevisionDirection,
    RevisionError, RevisionVerdict,
};
use crate::supervision::{run_episode, supervise, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_STRENGTHENING: i32 = 2;
pub const EXIT_EQUIVALENT: i32 = 3;
pub const EXIT_INCOMPARABLE: i32 = 4;
pub const EXIT_NOT_TOTAL: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "normrev", version, about = "Monitor, classify and supervise conditional norms")]
pub struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Path,
    Event,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieArg {
    TargetFirst,
    DeadlineFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Relax,
    Strengthen,
    Alter,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a model (or scenario) and norm files, and lint the norms.
    Check {
        /// `.ts.json` model or `.scenario.json` scenario
        model: PathBuf,
        /// `.norm` files checked against the model vocabulary
        norms: Vec<PathBuf>,
    },
    /// Classify the replacement of one norm set by another.
    Classify {
        model: PathBuf,
        before: PathBuf,
        after: PathBuf,
        /// Also report the syntactic verdict for norms matched by id.
        #[arg(long)]
        syntactic: bool,
        /// Judge formula strictness by logical implication instead of over
        /// the model's reachable states.
        #[arg(long)]
        logical: bool,
        /// Add self-loops to deadlock states instead of failing.
        #[arg(long)]
        complete_selfloops: bool,
        /// Cross-check with the brute-force oracle; disagreement is an error.
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_enum, default_value = "target-first")]
        tie_break: TieArg,
    },
    /// Run norm monitors over a path, a label trace, or sampled paths.
    Monitor {
        model: PathBuf,
        norms: PathBuf,
        /// Path file: `{"states"}`, `{"stem","cycle"}` or `{"labels"}`.
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "event")]
        mode: Mode,
        /// Number of sampled paths when no path file is given.
        #[arg(long, default_value_t = 1)]
        samples: usize,
        /// States per sampled path.
        #[arg(long, default_value_t = 10)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "target-first")]
        tie_break: TieArg,
    },
    /// Run a scenario, optionally with the norm-update supervisor.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        supervise: bool,
        /// Write the run log (`.runlog.jsonl`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace the scenario's seed.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// List single-component edits of a norm in a given direction.
    ReviseCandidates {
        model: PathBuf,
        norms: PathBuf,
        /// Id of the norm to edit.
        #[arg(long)]
        norm: String,
        #[arg(long, value_enum)]
        direction: DirectionArg,
        /// Pool formula (repeatable).
        #[arg(long = "formula")]
        formulas: Vec<String>,
        /// Pool sanction amount (repeatable).
        #[arg(long = "sanction")]
        sanctions: Vec<String>,
        /// Judge formula strictness by logical implication.
        #[arg(long)]
        logical: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

/// Outcome of one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub inputs: Vec<InputFile>,
    pub result: Value,
    pub witnesses: Vec<Value>,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
    pub exit_code: i32,
    #[serde(skip)]
    text: Vec<String>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
            result: Value::Null,
            witnesses: Vec::new(),
            warnings: Vec::new(),
            errors: Vec::new(),
            exit_code: EXIT_OK,
            text: Vec::new(),
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }

    fn fail(mut self, errors: impl IntoIterator<Item = String>) -> Self {
        self.errors.extend(errors);
        self.exit_code = EXIT_ERROR;
        self
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for l in &self.text {
            out.push_str(l);
            out.push('\n');
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        for e in &self.errors {
            out.push_str(&format!("error: {e}\n"));
        }
        out
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, Error)]
enum InputError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Dsl(String),
}

fn display(p: &FsPath) -> String {
    p.display().to_string()
}

fn read(report: &mut Report, path: &FsPath) -> Result<String, InputError> {
    let bytes = fs::read(path).map_err(|source| InputError::Io { path: display(path), source })?;
    report.inputs.push(InputFile { path: display(path), sha256: format!("{:x}", Sha256::digest(&bytes)) });
    String::from_utf8(bytes).map_err(|_| InputError::Dsl(format!("{}: not valid UTF-8", display(path))))
}

fn dsl_errors(path: &FsPath, errors: Vec<DslError>) -> Vec<String> {
    errors.into_iter().map(|e| e.in_file(&display(path)).to_string()).collect()
}

fn load<T>(
    report: &mut Report,
    path: &FsPath,
    parse: impl Fn(&str) -> Result<T, Vec<DslError>>,
) -> Result<T, Vec<String>> {
    let text = read(report, path).map_err(|e| vec![e.to_string()])?;
    parse(&text).map_err(|e| dsl_errors(path, e))
}

fn is_scenario(path: &FsPath) -> bool {
    path.to_string_lossy().ends_with(".scenario.json")
}

fn semantics(t: TieArg) -> Semantics {
    Semantics {
        tie_break: match t {
            TieArg::TargetFirst => TieBreak::TargetFirst,
            TieArg::DeadlineFirst => TieBreak::DeadlineFirst,
        },
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// the report to `out`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = write!(out, "{}", e.render());
            return code;
        }
    };
    let report = execute(&cli.command);
    let text = if cli.json { report.render_json() } else { report.render_text() };
    let _ = out.write_all(text.as_bytes());
    report.exit_code
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run(std::env::args_os(), &mut lock)
}

pub fn execute(command: &Command) -> Report {
    match command {
        Command::Check { model, norms } => cmd_check(model, norms),
        Command::Classify { model, before, after, syntactic, logical, complete_selfloops, oracle, tie_break } => {
            let options = ClassifyOptions {
                syntactic: *syntactic,
                logical: *logical,
                complete_selfloops: *complete_selfloops,
                oracle: *oracle,
                semantics: semantics(*tie_break),
            };
            cmd_classify(model, before, after, options)
        }
        Command::Monitor { model, norms, path, mode, samples, length, seed, tie_break } => {
            let mode = match mode {
                Mode::Path => MonitorMode::Path,
                Mode::Event => MonitorMode::Event,
            };
            cmd_monitor(model, norms, path.as_deref(), mode, *samples, *length, *seed, semantics(*tie_break))
        }
        Command::Simulate { scenario, supervise, out, seed_override } => {
            cmd_simulate(scenario, *supervise, out.as_deref(), *seed_override)
        }
        Command::ReviseCandidates { model, norms, norm, direction, formulas, sanctions, logical } => {
            let direction = match direction {
                DirectionArg::Relax => RevisionDirection::Relax,
                DirectionArg::Strengthen => RevisionDirection::Strengthen,
                DirectionArg::Alter => RevisionDirection::Alter,
            };
            cmd_revise_candidates(model, norms, norm, direction, formulas, sanctions, *logical)
        }
    }
}

/// Loads a model file, or the world of a scenario file.
fn load_model(report: &mut Report, path: &FsPath) -> Result<TransitionSystem, Vec<String>> {
    if is_scenario(path) {
        load(report, path, parse_scenario).map(|s| s.world)
    } else {
        load(report, path, parse_model)
    }
}

pub fn cmd_check(model_path: &FsPath, norm_paths: &[PathBuf]) -> Report {
    let mut report = Report::new("check");
    let mut errors = Vec::new();
    let mut sets: Vec<NormSet> = Vec::new();
    let mut vocabulary = None;
    if is_scenario(model_path) {
        match load(&mut report, model_path, parse_scenario) {
            Ok(s) => {
                report.line(format!("{}: scenario `{}` ok", display(model_path), s.name));
                vocabulary = Some(s.vocabulary());
                sets.push(s.norms.clone());
            }
            Err(e) => errors.extend(e),
        }
    } else {
        match load(&mut report, model_path, parse_model) {
            Ok(m) => {
                report.line(format!(
                    "{}: {} states, {} edges, {} atoms",
                    display(model_path),
                    m.num_states(),
                    m.num_edges(),
                    m.atoms().len()
                ));
                if let Some(s) = m.deadlock() {
                    report.warnings.push(format!("state `{}` has no successor", m.state_id(s)));
                }
                vocabulary = Some(m.atoms().clone());
            }
            Err(e) => errors.extend(e),
        }
    }
    for p in norm_paths {
        match load(&mut report, p, parse_norms) {
            Ok(set) => {
                if let Some(v) = &vocabulary {
                    for (norm, atom) in set.unknown_atoms(v) {
                        errors.push(format!("{}: norm {norm} uses unknown atom `{atom}`", display(p)));
                    }
                }
                report.line(format!("{}: set {} with {} norm(s)", display(p), set.id, set.len()));
                sets.push(set);
            }
            Err(e) => errors.extend(e),
        }
    }
    for set in &sets {
        report.warnings.extend(lint(set).iter().map(|l| format!("set {}: {l}", set.id)));
    }
    report.result = json!({ "valid": errors.is_empty() });
    if errors.is_empty() {
        report.line("ok");
        report
    } else {
        report.fail(errors)
    }
}

fn verdict_code(r: Relation) -> i32 {
    match r {
        Relation::Relaxation => EXIT_OK,
        Relation::Strengthening => EXIT_STRENGTHENING,
        Relation::Equivalent => EXIT_EQUIVALENT,
        Relation::Incomparable => EXIT_INCOMPARABLE,
    }
}

fn witness_value(label: &str, v: &RevisionVerdict) -> Vec<Value> {
    let mut out = Vec::new();
    if let Some(p) = &v.witness_in_original_not_revised {
        out.push(json!({"kind": "violates_original_only", "source": label, "lasso": p.to_lasso_doc()}));
    }
    if let Some(p) = &v.witness_in_revised_not_original {
        out.push(json!({"kind": "violates_revised_only", "source": label, "lasso": p.to_lasso_doc()}));
    }
    out
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ClassifyOptions {
    pub syntactic: bool,
    /// Model-independent strictness for the syntactic verdict.
    pub logical: bool,
    pub complete_selfloops: bool,
    pub oracle: bool,
    pub semantics: Semantics,
}

pub fn cmd_classify(
    model_path: &FsPath,
    before_path: &FsPath,
    after_path: &FsPath,
    options: ClassifyOptions,
) -> Report {
    let ClassifyOptions { syntactic, logical, complete_selfloops, oracle, semantics } = options;
    let mut report = Report::new("classify");
    let model = load_model(&mut report, model_path);
    let before = load(&mut report, before_path, parse_norms);
    let after = load(&mut report, after_path, parse_norms);
    let (mut model, before, after) = match (model, before, after) {
        (Ok(m), Ok(b), Ok(a)) => (m, b, a),
        (m, b, a) => {
            let errs = [m.err(), b.err(), a.err()].into_iter().flatten().flatten();
            return report.fail(errs.collect::<Vec<_>>());
        }
    };
    if complete_selfloops && !model.is_total() {
        report.warnings.push("added self-loops to deadlock states".into());
        model = model.complete_total();
    }
    report.warnings.extend(lint(&before).iter().chain(lint(&after).iter()).map(|l| l.to_string()));
    let verdict = match Classifier::new(&model).with_semantics(semantics).classify(&before, &after) {
        Ok(v) => v,
        Err(e @ RevisionError::NotTotal(_)) => {
            let mut r = report.fail([format!("{e} (use --complete-selfloops)")]);
            r.exit_code = EXIT_NOT_TOTAL;
            return r;
        }
        Err(e) => return report.fail([e.to_string()]),
    };
    report.line(format!("{} -> {}: {}", before.id, after.id, verdict.relation));
    report.line(format!("sanctions: {:?}", verdict.sanction_change));
    if let Some(p) = &verdict.witness_in_original_not_revised {
        report.line(format!("violates {} only: {p}", before.id));
    }
    if let Some(p) = &verdict.witness_in_revised_not_original {
        report.line(format!("violates {} only: {p}", after.id));
    }
    report.witnesses = witness_value("classifier", &verdict);
    let mut result = json!({
        "original": before.id,
        "revised": after.id,
        "relation": verdict.relation,
        "sanction_change": verdict.sanction_change,
    });

    if syntactic {
        let mut rows = Vec::new();
        for n in before.norms() {
            let Some(r) = after.get(&n.id) else {
                report.warnings.push(format!("norm {} has no counterpart in {}", n.id, after.id));
                continue;
            };
            let v = syntactic_classify(n, r, (!logical).then_some(&model));
            report.line(format!("syntactic {}: {:?} {:?}", n.id, v.direction, v.fired_cases));
            if v.deviation {
                report
                    .warnings
                    .push(format!("norm {}: obligation deadline change read with reversed polarity (deviation)", n.id));
            }
            rows.push(json!({"norm": n.id, "verdict": v}));
        }
        result["syntactic"] = Value::Array(rows);
    }

    if oracle {
        match oracle_compare(&model, &before, &after, None) {
            Ok(o) => {
                report.line(format!("oracle: {}", o.relation));
                result["oracle"] = json!(o.relation);
                if o.relation != verdict.relation {
                    report.result = result;
                    return report.fail([format!(
                        "oracle disagrees with the classifier: {} vs {}",
                        o.relation, verdict.relation
                    )]);
                }
            }
            Err(e) => {
                report.result = result;
                return report.fail([format!("oracle: {e}")]);
            }
        }
    }
    report.result = result;
    report.exit_code = verdict_code(verdict.relation);
    report
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_monitor(
    model_path: &FsPath,
    norms_path: &FsPath,
    path_file: Option<&FsPath>,
    mode: MonitorMode,
    samples: usize,
    length: usize,
    seed: u64,
    semantics: Semantics,
) -> Report {
    let mut report = Report::new("monitor");
    let model = load_model(&mut report, model_path);
    let norms = load(&mut report, norms_path, parse_norms);
    let path = path_file.map(|p| load(&mut report, p, parse_path_file));
    let (model, norms) = match (model, norms) {
        (Ok(m), Ok(n)) => (m, n),
        (m, n) => {
            let errs = [m.err(), n.err()].into_iter().flatten().flatten().collect::<Vec<_>>();
            return report.fail(errs);
        }
    };
    let traces: Vec<(String, Vec<crate::formula::Labels>)> = match path {
        Some(Err(e)) => return report.fail(e),
        Some(Ok(PathFile::Trace(t))) => vec![("trace".into(), t)],
        Some(Ok(PathFile::Run(p))) => match model.path_labels(&p, LASSO_UNROLL_CYCLES) {
            Ok(l) => vec![(p.to_string(), l)],
            Err(e) => return report.fail([format!("path is not a run of the model: {e}")]),
        },
        None => {
            let mut out = Vec::new();
            for i in 0..samples {
                let sampled: Result<_, ModelError> = model
                    .sample_path(length, seed.wrapping_add(i as u64))
                    .and_then(|p| Ok((p.to_string(), model.path_labels(&p, 0)?)));
                match sampled {
                    Ok(x) => out.push(x),
                    Err(e) => return report.fail([e.to_string()]),
                }
            }
            out
        }
    };
    let mut runs = Vec::new();
    let mut total = Decimal::ZERO;
    for (name, trace) in &traces {
        let outcome = run_trace(&norms, trace, mode, semantics);
        report.line(format!("run: {name}"));
        for e in &outcome.events {
            let extra = if e.kind == EventKind::Violated { format!(" sanction {}", e.sanction) } else { String::new() };
            report.line(format!("  step {} {} {:?}{extra}", e.step, e.norm, e.kind));
        }
        report.line(format!("  violations {}, total {}", outcome.violations(), outcome.ledger.total));
        total += outcome.ledger.total;
        runs.push(json!({
            "run": name,
            "events": outcome.events,
            "violations": outcome.violations(),
            "total": outcome.ledger.total,
        }));
    }
    report.line(format!("ledger total: {total}"));
    report.result = json!({"mode": format!("{mode:?}").to_lowercase(), "runs": runs, "total": total});
    report
}

pub fn cmd_simulate(scenario_path: &FsPath, supervised: bool, out: Option<&FsPath>, seed: Option<u64>) -> Report {
    let mut report = Report::new("simulate");
    let mut scenario: Scenario = match load(&mut report, scenario_path, parse_scenario) {
        Ok(s) => s,
        Err(e) => return report.fail(e),
    };
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let (log, revisions) = if supervised {
        let run = supervise(&scenario);
        (run.log, run.revisions)
    } else {
        (run_episode(&scenario, &scenario.norms), Vec::new())
    };
    let summary = log.summary.clone().expect("runs are summarised");
    report.line(format!("scenario {} seed {} horizon {}", scenario.name, scenario.seed, scenario.horizon));
    for (id, rate) in &summary.objective_rates {
        report.line(format!("objective {id}: {rate:.4}"));
    }
    for w in &summary.window_scores {
        report.line(format!(
            "window {} (steps {}..={}): {:.4} {:?}",
            w.window, w.first_step, w.last_step, w.score, w.status
        ));
    }
    for r in &revisions {
        report.line(format!("revision at step {} ({:?}): {} => {}", r.step, r.direction, r.before, r.after));
        if let Some(v) = &r.verdict {
            report.line(format!("  verdict {} sanctions {:?}", v.relation, v.sanction_change));
        }
        if r.syntactic.deviation {
            report.warnings.push(format!(
                "revision at step {}: syntactic verdict relies on the reversed obligation deadline rule",
                r.step
            ));
        }
        if let Some(e) = &r.verdict_error {
            report.warnings.push(format!("revision at step {}: no verdict: {e}", r.step));
        }
    }
    report.line(format!(
        "violations {}, sanctions {}, deadlocks {}, final set {}",
        log.violations(),
        summary.ledger.total,
        summary.deadlocks,
        summary.final_norm_set
    ));
    report.result = json!({
        "scenario": scenario.name,
        "seed": scenario.seed,
        "supervised": supervised,
        "objective_rates": summary.objective_rates,
        "window_scores": summary.window_scores,
        "violations": log.violations(),
        "sanction_total": summary.ledger.total,
        "deadlocks": summary.deadlocks,
        "revisions": revisions,
        "final_norm_set": summary.norm_sets.get(&summary.final_norm_set),
    });
    if let Some(path) = out {
        if let Err(e) = fs::write(path, render_runlog(&log)) {
            return report.fail([format!("{}: {e}", display(path))]);
        }
        report.line(format!("run log written to {}", display(path)));
    }
    report
}

pub fn cmd_revise_candidates(
    model_path: &FsPath,
    norms_path: &FsPath,
    norm_id: &str,
    direction: RevisionDirection,
    formulas: &[String],
    sanctions: &[String],
    logical: bool,
) -> Report {
    let mut report = Report::new("revise-candidates");
    let model = load_model(&mut report, model_path);
    let norms = load(&mut report, norms_path, parse_norms);
    let mut errors = Vec::new();
    let mut pool = CandidatePool::default();
    for f in formulas {
        match parse_formula(f) {
            Ok(x) => pool.formulas.push(x),
            Err(e) => errors.push(format!("--formula `{f}`: {e}")),
        }
    }
    for s in sanctions {
        match s.parse::<Decimal>() {
            Ok(d) => pool.sanctions.push(d),
            Err(e) => errors.push(format!("--sanction `{s}`: {e}")),
        }
    }
    let (model, norms) = match (model, norms) {
        (Ok(m), Ok(n)) if errors.is_empty() => (m, n),
        (m, n) => {
            errors.extend([m.err(), n.err()].into_iter().flatten().flatten());
            return report.fail(errors);
        }
    };
    let Some(norm) = norms.get(norm_id) else {
        return report.fail([format!("set {} has no norm `{norm_id}`", norms.id)]);
    };
    let candidates = generate_candidates(norm, &pool, direction, (!logical).then_some(&model));
    report.line(format!("{} candidate(s) for {} ({direction:?})", candidates.len(), norm.id));
    let mut rows = Vec::new();
    for c in &candidates {
        report.line(format!("  {c}{}", if c.deviation { "  [deviation]" } else { "" }));
        rows.push(json!({
            "component": c.component,
            "edit": c.edit,
            "deviation": c.deviation,
            "norm": render_norm(&c.norm),
        }));
    }
    report.result = json!({"norm": norm.id, "direction": direction, "candidates": rows});
    report
}
