use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pga_core::proof::CheckOptions;
use pga_core::{
    check_proof_with, extract, holds, normalize, parse_asserted, parse_family, parse_formula,
    parse_proof, parse_sequence, strongest_post, Algebra, AlgebraConfig, CanonicalSequence,
    CheckResult, Len, Outcome, PostError, Program, SequenceTerm, Verdict,
};
use serde_json::{json, Value};

const SUCCESS: u8 = 0;
const FAILURE: u8 = 1;
const UNDECIDED: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "pga",
    version,
    about = "Instruction sequences, their threads and asserted-sequence logic"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Service algebra states are drawn from.
    #[arg(long, global = true, default_value = "counter")]
    algebra: Algebra,
    /// Largest counter content enumerated; also scales the step budget.
    #[arg(long, global = true, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    bound: u64,
    /// Range 0..=Q of free natural-number variables and of deeply nested quantifiers.
    #[arg(long, global = true, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    qbound: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    /// One JSON object on stdout.
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Print the canonical form and length of a sequence.
    Normalize {
        #[arg(allow_hyphen_values = true)]
        seq: String,
    },
    /// Print the thread extracted from a sequence.
    Thread {
        #[arg(allow_hyphen_values = true)]
        seq: String,
    },
    /// Run a segment from an entry point on a service family.
    Run {
        #[arg(allow_hyphen_values = true)]
        seq: String,
        /// Entry point (1-based).
        #[arg(long, default_value_t = 1)]
        entry: u64,
        /// Family literal, e.g. `{c = counter(3)}`.
        #[arg(long, default_value = "{}")]
        state: String,
    },
    /// Decide an asserted sequence `{b | P} S {e | Q}` by enumeration.
    Holds { asserted: String },
    /// Strongest post-condition for exit `e` from entry `b` under `P`.
    Sp {
        #[arg(allow_hyphen_values = true)]
        seq: String,
        #[arg(long, default_value = "true")]
        pre: String,
        #[arg(long, default_value_t = 1)]
        entry: u64,
        #[arg(long, default_value_t = 0)]
        exit: u64,
    },
    /// Check a proof file.
    Check {
        path: PathBuf,
        /// Reject consequence obligations that are only valid up to the bounds.
        #[arg(long)]
        strict: bool,
    },
}

struct Report {
    status: u8,
    text: String,
    structured: Value,
}

impl Report {
    fn new(status: u8, text: impl Into<String>, structured: Value) -> Self {
        Report {
            status,
            text: text.into(),
            structured,
        }
    }
}

fn usage(e: impl Display) -> Report {
    let msg = e.to_string();
    Report::new(USAGE, format!("error: {msg}"), json!({ "error": msg }))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { SUCCESS });
        }
    };
    let report = run(&cli).unwrap_or_else(|r| r);
    match (cli.format, report.status) {
        (Format::Structured, _) => println!("{}", report.structured),
        (Format::Text, USAGE) => eprintln!("{}", report.text),
        (Format::Text, _) => println!("{}", report.text),
    }
    ExitCode::from(report.status)
}

fn sequence(text: &str) -> Result<SequenceTerm, Report> {
    parse_sequence(text).map_err(usage)
}

fn instrs(xs: &[impl Display]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ; ")
}

fn run(cli: &Cli) -> Result<Report, Report> {
    let cfg = AlgebraConfig::new(cli.algebra, cli.bound, cli.qbound).map_err(usage)?;
    Ok(match &cli.command {
        Command::Normalize { seq } => normalize_report(&normalize(&sequence(seq)?)),
        Command::Thread { seq } => {
            let t = extract(&normalize(&sequence(seq)?)).minimize();
            let dump = t.to_string();
            let lines: Vec<&str> = dump.lines().collect();
            Report::new(SUCCESS, dump.trim_end(), json!({ "nodes": lines }))
        }
        Command::Run { seq, entry, state } => {
            let program = Program::from_term(&sequence(seq)?);
            let u = parse_family(state).map_err(usage)?;
            let outcome = program.run(*entry, &u, cfg.bound).map_err(usage)?;
            outcome_report(&outcome)
        }
        Command::Holds { asserted } => {
            let phi = parse_asserted(asserted).map_err(usage)?;
            verdict_report(&holds(&phi, &cfg).map_err(usage)?)
        }
        Command::Sp {
            seq,
            pre,
            entry,
            exit,
        } => {
            let s = sequence(seq)?;
            let pre = parse_formula(pre).map_err(usage)?;
            match strongest_post(&pre, &s, *entry, *exit, &cfg) {
                Ok(sp) => {
                    let states: Vec<String> = sp.states.iter().map(|u| u.to_string()).collect();
                    let mut text = format!("post: {}\ncoverage: {}", sp.formula, sp.coverage);
                    for u in &states {
                        text.push_str(&format!("\nstate: {u}"));
                    }
                    Report::new(
                        SUCCESS,
                        text,
                        json!({
                            "post": sp.formula.to_string(),
                            "states": states,
                            "coverage": sp.coverage.to_string(),
                        }),
                    )
                }
                Err(e @ PostError::NoPostCondition(_)) => Report::new(
                    FAILURE,
                    format!("NONE: {e}"),
                    json!({ "none": e.to_string() }),
                ),
                Err(e @ PostError::Undecided(_)) => Report::new(
                    UNDECIDED,
                    format!("UNKNOWN: {e}"),
                    json!({ "unknown": e.to_string() }),
                ),
                Err(e @ PostError::Holds(_)) => usage(e),
            }
        }
        Command::Check { path, strict } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            let proof = parse_proof(&text).map_err(usage)?;
            check_report(&check_proof_with(
                &proof,
                &cfg,
                CheckOptions { strict: *strict },
            ))
        }
    })
}

fn normalize_report(c: &CanonicalSequence) -> Report {
    let len = match c.len() {
        Len::Finite(n) => json!(n),
        Len::Omega => json!("omega"),
    };
    let mut text = format!("canonical: {c}\n");
    if !c.prefix().is_empty() || c.period().is_none() {
        text.push_str(&format!("prefix: {}\n", instrs(c.prefix())));
    }
    if let Some(p) = c.period() {
        text.push_str(&format!("period: {}\n", instrs(p)));
    }
    text.push_str(&format!("len: {}", c.len()));
    let structured = json!({
        "canonical": c.to_string(),
        "prefix": c.prefix().iter().map(|i| i.to_string()).collect::<Vec<_>>(),
        "period": c.period().map(|p| p.iter().map(|i| i.to_string()).collect::<Vec<_>>()),
        "len": len,
    });
    Report::new(SUCCESS, text, structured)
}

fn outcome_report(o: &Outcome) -> Report {
    let (status, structured) = match o {
        Outcome::Halted(u) => (
            SUCCESS,
            json!({ "outcome": "halted", "state": u.to_string() }),
        ),
        Outcome::Exited(e, u) => (
            SUCCESS,
            json!({ "outcome": "exited", "exit": e, "state": u.to_string() }),
        ),
        Outcome::Inactive => (SUCCESS, json!({ "outcome": "inactive" })),
        Outcome::BudgetExhausted(n) => (
            UNDECIDED,
            json!({ "outcome": "budget_exhausted", "steps": n }),
        ),
    };
    Report::new(status, o.to_string(), structured)
}

fn verdict_report(v: &Verdict) -> Report {
    let (status, structured) = match v {
        Verdict::Holds(c) => (
            SUCCESS,
            json!({ "verdict": "holds", "coverage": c.to_string() }),
        ),
        Verdict::Fails(w) => (
            FAILURE,
            json!({ "verdict": "fails", "reason": w.to_string() }),
        ),
        Verdict::Unknown(why) => (UNDECIDED, json!({ "verdict": "unknown", "reason": why })),
    };
    Report::new(status, v.to_string(), structured)
}

fn check_report(r: &CheckResult) -> Report {
    let n = r.assumptions.len();
    let mut text = if r.accepted {
        format!(
            "ACCEPTED, {n} bounded entailment assumption{}",
            if n == 1 { "" } else { "s" }
        )
    } else {
        format!(
            "REJECTED, {} failing node{}",
            r.failures.len(),
            if r.failures.len() == 1 { "" } else { "s" }
        )
    };
    for (path, why) in &r.failures {
        text.push_str(&format!("\n  {path}: {why}"));
    }
    for a in &r.assumptions {
        text.push_str(&format!(
            "\n  assumed at {} (bound {}): {}",
            a.path, a.bound, a.obligation
        ));
    }
    let structured = json!({
        "accepted": r.accepted,
        "failures": r.failures.iter().map(|(p, w)| json!({ "path": p, "reason": w })).collect::<Vec<_>>(),
        "assumptions": serde_json::to_value(&r.assumptions).expect("assumptions serialize"),
    });
    Report::new(if r.accepted { SUCCESS } else { FAILURE }, text, structured)
}
