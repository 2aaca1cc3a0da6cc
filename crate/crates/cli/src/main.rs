//! `ambilogic` command-line front end.
//!
//! Exit codes: 0 success, 1 a check, validation or transform precondition
//! failed, 2 usage, parse or I/O error, 3 internal error.

use ambilogic::campaign::{self, Campaign, CampaignError};
use ambilogic::formula::{ProbGe, Term};
use ambilogic::generate::Bounds;
use ambilogic::rational::format_rational;
use ambilogic::transforms::{self, TransformError};
use ambilogic::translation::{self, Scheme, TranslationError};
use ambilogic::{parse, AgentId, Checker, EvalMode, Formula, Structure, SurfaceFormula};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser, Debug)]
#[command(name = "ambilogic", version, about = "Model checker for probabilistic epistemic logic with ambiguous propositions")]
struct Cli {
    /// Structure file (JSON).
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check assumptions A1-A6 and print the report.
    Validate,
    /// Evaluate a formula at a state for an agent.
    Eval {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        state: String,
        #[arg(long)]
        agent: u32,
        #[arg(long, default_value = "common")]
        mode: String,
        /// Also print the left-hand side of a top-level probability formula.
        #[arg(long)]
        show_value: bool,
    },
    /// Build a transformed structure.
    Transform {
        #[arg(value_enum)]
        kind: TransformKind,
        #[arg(long)]
        agent: Option<u32>,
        #[arg(long)]
        state: Option<String>,
        /// Where to write the state map or fresh-proposition table.
        /// Defaults to `<out>.sidecar.json` when `--out` is given.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Translate an ambiguous formula into the indexed language.
    Translate {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        agent: u32,
        #[arg(long, value_enum, default_value = "in")]
        mode: TranslateMode,
    },
    /// Run a seeded randomized verification campaign.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 5)]
        max_states: usize,
        #[arg(long, default_value_t = 3)]
        max_agents: usize,
        #[arg(long, default_value_t = 3)]
        max_props: usize,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
        /// Comma-separated check names, or `all`.
        #[arg(long, default_value = "all")]
        checks: String,
        /// Formulas per trial.
        #[arg(long, default_value_t = 4)]
        corpus_size: usize,
        /// Mutation hook: verify thm2-in against the unsound CB clause.
        #[arg(long, hide = true)]
        naive_translation: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TransformKind {
    FixInterpretation,
    DisjointCopies,
    LabelPartitions,
    GeneratePriors,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TranslateMode {
    In,
    Ou,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn failed(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Validate => validate(cli),
        Command::Eval {
            formula,
            state,
            agent,
            mode,
            show_value,
        } => eval(cli, formula, state, *agent, mode, *show_value),
        Command::Transform {
            kind,
            agent,
            state,
            sidecar,
        } => transform(cli, *kind, *agent, state.as_deref(), sidecar.as_deref()),
        Command::Translate { formula, agent, mode } => translate(cli, formula, *agent, *mode),
        Command::Check {
            seed,
            trials,
            max_states,
            max_agents,
            max_props,
            max_depth,
            checks,
            corpus_size,
            naive_translation,
        } => {
            let campaign = Campaign {
                seed: *seed,
                trials: *trials,
                bounds: Bounds {
                    max_states: *max_states,
                    max_agents: *max_agents,
                    max_props: *max_props,
                    max_depth: *max_depth,
                },
                checks: campaign::parse_checks(checks).map_err(|e| Failure::usage(format!("{e}")))?,
                corpus_size: *corpus_size,
                naive_translation: *naive_translation,
            };
            check(cli, &campaign)
        }
    }
}

fn load_model(cli: &Cli) -> Result<Structure, Failure> {
    let path = cli
        .model
        .as_ref()
        .ok_or_else(|| Failure::usage("this command needs --model PATH"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    Structure::from_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

/// Writes `text` to `--out` or stdout.
fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => write_file(path, &format!("{text}\n")),
        None => {
            say(text);
            Ok(())
        }
    }
}

/// Prints to stdout, ignoring a closed pipe.
fn say(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn agent_id(n: u32) -> Result<AgentId, Failure> {
    AgentId::new(n).ok_or_else(|| Failure::usage("agents are numbered from 1"))
}

fn validate(cli: &Cli) -> CmdResult {
    let m = load_model(cli)?;
    let mut report = m.validate_core();
    let mut errors = Vec::new();
    if m.signals().is_some() {
        match m.validate_signals() {
            Ok(r) => report.extend(r),
            Err(e) => errors.push(e.to_string()),
        }
    }
    let ok = report.is_ok() && errors.is_empty();
    let out = json!({
        "ok": ok,
        "violations": report.violations,
        "errors": errors,
    });
    emit(cli, &serde_json::to_string_pretty(&out).expect("reports serialize"))?;
    Ok(if ok { 0 } else { 1 })
}

fn eval(cli: &Cli, text: &str, state: &str, agent: u32, mode: &str, show_value: bool) -> CmdResult {
    let m = load_model(cli)?;
    let mode: EvalMode = mode.parse().map_err(|e: String| Failure::usage(e))?;
    let surface = parse(text).map_err(|e| Failure::usage(format!("{e}")))?;
    let atom = m.designated_atom();
    let f = surface.expand(&atom);
    let agent = agent_id(agent)?;
    let s = m
        .state_index(state)
        .ok_or_else(|| Failure::usage(format!("unknown state `{state}`")))?;
    let checker = Checker::new(&m, mode).map_err(|e| Failure::usage(format!("{e}")))?;
    let value = checker.eval(&f, s, agent).map_err(|e| Failure::usage(format!("{e}")))?;
    let lhs = if show_value {
        let p = top_probability(&surface, &atom).ok_or_else(|| {
            Failure::usage("--show-value needs a probability or belief formula at the top level")
        })?;
        let v = checker.prob_value(&p, s, agent).map_err(|e| Failure::usage(format!("{e}")))?;
        Some(format_rational(&v))
    } else {
        None
    };
    let mut out = String::new();
    if cli.json {
        out = json!({ "value": value, "lhs": lhs }).to_string();
    } else {
        out.push_str(if value { "true" } else { "false" });
        if let Some(lhs) = lhs {
            out.push_str(&format!("\nvalue {lhs}"));
        }
    }
    emit(cli, &out)?;
    Ok(0)
}

/// The left-hand side of a top-level `Pr` or `B` formula, as a core term list.
fn top_probability(f: &SurfaceFormula, atom: &ambilogic::formula::Atom) -> Option<ProbGe> {
    match f {
        SurfaceFormula::Prob(p) => Some(ProbGe {
            agent: p.agent,
            terms: p
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff.clone(),
                    arg: Arc::new(t.arg.expand(atom)),
                })
                .collect(),
            bound: p.bound.clone(),
        }),
        SurfaceFormula::B(j, arg) => match Formula::believes(*j, arg.expand(atom)) {
            Formula::Prob(p) => Some(p),
            _ => None,
        },
        _ => None,
    }
}

fn transform(
    cli: &Cli,
    kind: TransformKind,
    agent: Option<u32>,
    state: Option<&str>,
    sidecar: Option<&Path>,
) -> CmdResult {
    let m = load_model(cli)?;
    let precondition = |e: TransformError| match e {
        TransformError::UnknownState(_) | TransformError::UnknownAgent(_) => Failure::usage(format!("{e}")),
        _ => Failure::failed(e.to_string()),
    };
    let (out, side) = match kind {
        TransformKind::FixInterpretation => {
            let i = agent.ok_or_else(|| Failure::usage("fix-interpretation needs --agent"))?;
            (transforms::fix_interpretation(&m, agent_id(i)?).map_err(precondition)?, None)
        }
        TransformKind::DisjointCopies => {
            let (m2, map) = transforms::disjoint_copies(&m).map_err(precondition)?;
            (m2, Some(serde_json::to_string_pretty(&map).expect("maps serialize")))
        }
        TransformKind::LabelPartitions => {
            let root = state.ok_or_else(|| Failure::usage("label-partitions needs --state"))?;
            let (m2, lab) = transforms::label_partitions(&m, root).map_err(precondition)?;
            (m2, Some(serde_json::to_string_pretty(&lab).expect("labellings serialize")))
        }
        TransformKind::GeneratePriors => {
            let priors = m.generate_priors().map_err(|e| Failure::failed(e.to_string()))?;
            let m2 = m
                .with_priors(Some(priors))
                .map_err(|e| Failure::failed(e.to_string()))?;
            (m2, None)
        }
    };
    emit(cli, &out.to_json())?;
    if let Some(side) = side {
        let path = sidecar
            .map(Path::to_path_buf)
            .or_else(|| cli.out.as_ref().map(|o| PathBuf::from(format!("{}.sidecar.json", o.display()))));
        match path {
            Some(p) => write_file(&p, &format!("{side}\n"))?,
            None => eprintln!("note: state map not written; pass --sidecar PATH or --out PATH"),
        }
    }
    Ok(0)
}

fn translate(cli: &Cli, text: &str, agent: u32, mode: TranslateMode) -> CmdResult {
    let surface = parse(text).map_err(|e| Failure::usage(format!("{e}")))?;
    let atom = match &cli.model {
        Some(_) => load_model(cli)?.designated_atom(),
        None => surface
            .first_atom()
            .unwrap_or_else(|| ambilogic::formula::Atom::parse("p").expect("p is a proposition")),
    };
    let f = surface.expand(&atom);
    let scheme = match mode {
        TranslateMode::In => Scheme::Innermost,
        TranslateMode::Ou => Scheme::Outermost,
    };
    let out = translation::translate(&f, agent_id(agent)?, scheme).map_err(|e| match e {
        TranslationError::AlreadyIndexed(_) => Failure::failed(e.to_string()),
        _ => Failure {
            code: 3,
            message: e.to_string(),
        },
    })?;
    let text = if cli.json {
        json!({ "formula": out.to_string() }).to_string()
    } else {
        out.to_string()
    };
    emit(cli, &text)?;
    Ok(0)
}

fn check(cli: &Cli, campaign: &Campaign) -> CmdResult {
    let report = campaign.run().map_err(|e| match e {
        CampaignError::Invalid(_) => Failure::usage(format!("{e}")),
        CampaignError::Internal { .. } => Failure {
            code: 3,
            message: e.to_string(),
        },
    })?;
    let full = serde_json::to_string_pretty(&report).expect("reports serialize");
    if let Some(path) = &cli.out {
        write_file(path, &format!("{full}\n"))?;
    }
    if cli.json {
        if cli.out.is_none() {
            say(&full);
        }
    } else {
        for c in &report.checks {
            say(&format!(
                "{:<15} {} passed {} failed {} comparisons {} ms",
                c.check.name(),
                c.passed,
                c.failed,
                c.comparisons,
                c.elapsed_ms
            ));
            if let Some(cex) = &c.counterexample {
                say(&format!("  first counterexample (trial {}): {}", cex.trial, cex.detail));
                for q in &cex.queries {
                    say(&format!(
                        "    {} at {} agent {} [{}] = {}",
                        q.formula, q.state, q.agent, q.mode, q.value
                    ));
                }
            }
        }
    }
    Ok(if report.is_ok() { 0 } else { 1 })
}
