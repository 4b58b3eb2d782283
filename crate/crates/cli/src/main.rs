//! `roc`: queries, grammar export and validation for ω-restricted
//! one-counter automata.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use roc_core::checks::{self, CheckOptions, Comparison, CHECK_NAMES};
use roc_core::grammar::{count_finite_derivations, export_grammar, triple_pair_construct, DEFAULT_SEGMENT_BOUND};
use roc_core::omega::{behavior_omega_member, check_behavior_lasso, find_behavior_lasso, BehaviorLasso};
use roc_core::oracle::{oracle_count_runs, RunBounds, RunReport, RunWitness};
use roc_core::{RocAutomaton, UPWord, Word};

#[derive(Parser)]
#[command(name = "roc", version, about = "Weighted ω-restricted one-counter automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Automaton file.
    #[arg(long, value_name = "FILE")]
    automaton: PathBuf,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct UpArgs {
    /// Prefix `u` of `u·v^ω` (`""` for none).
    #[arg(long, value_name = "U", allow_hyphen_values = true)]
    prefix: String,
    /// Period `v` of `u·v^ω`, nonempty.
    #[arg(long, value_name = "V")]
    period: String,
}

#[derive(Args)]
struct OracleArgs {
    /// Counter cap of the brute-force search.
    #[arg(long)]
    counter_bound: Option<usize>,
    /// Step cap of the brute-force search.
    #[arg(long)]
    step_bound: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Coefficient of a finite word in the behavior.
    Weight {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "W")]
        word: String,
    },
    /// Support membership of a finite word, or of `u·v^ω` with --prefix/--period.
    Member {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "W", conflicts_with_all = ["prefix", "period"], required_unless_present = "period")]
        word: Option<String>,
        #[arg(long, value_name = "U", requires = "period")]
        prefix: Option<String>,
        #[arg(long, value_name = "V")]
        period: Option<String>,
    },
    /// ω-membership of `u·v^ω`.
    Omega {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        up: UpArgs,
        /// Print a lasso-shaped accepting run.
        #[arg(long)]
        witness: bool,
    },
    /// Export the triple-pair grammar.
    Grammar {
        #[command(flatten)]
        common: Common,
    },
    /// Number of grammar derivations of a finite word.
    Count {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "W")]
        word: String,
        /// Also count runs by brute force and print up to N of them.
        #[arg(long, value_name = "N")]
        witnesses: Option<usize>,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Run the property checks on one automaton.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "L", default_value_t = 8)]
        max_len: usize,
        #[arg(long, value_name = "B", default_value_t = DEFAULT_SEGMENT_BOUND)]
        segment_bound: usize,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Grammar versus automaton membership, up to bounds.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "L", default_value_t = 8)]
        max_len: usize,
        #[arg(long, value_name = "B", default_value_t = DEFAULT_SEGMENT_BOUND)]
        segment_bound: usize,
        /// Seed of the random ω-words.
        #[arg(long, value_name = "S", default_value_t = 0)]
        seed: u64,
    },
}

/// Result of one command: lines for text mode, a value for `--json`.
struct Output {
    text: Vec<String>,
    json: Value,
    ok: bool,
}

impl Output {
    fn ok(text: Vec<String>, json: Value) -> Self {
        Output { text, json, ok: true }
    }
}

fn load(common: &Common) -> Result<RocAutomaton> {
    let text = std::fs::read_to_string(&common.automaton).with_context(|| format!("cannot read {}", common.automaton.display()))?;
    RocAutomaton::parse(&text).with_context(|| format!("in {}", common.automaton.display()))
}

fn word(aut: &RocAutomaton, text: &str) -> Result<Word> {
    Ok(aut.alphabet().parse_word(text)?)
}

fn up_word(aut: &RocAutomaton, prefix: &str, period: &str) -> Result<UPWord> {
    Ok(UPWord::new(word(aut, prefix)?, word(aut, period)?)?)
}

fn moves_line(aut: &RocAutomaton, moves: &[roc_core::Move]) -> String {
    if moves.is_empty() {
        "(empty)".into()
    } else {
        moves.iter().map(|m| aut.format_move(m)).collect::<Vec<_>>().join(", ")
    }
}

fn lasso_lines(aut: &RocAutomaton, cert: &BehaviorLasso) -> Vec<String> {
    let l = &cert.lasso;
    vec![
        format!("initial {} {}", l.start + 1, aut.label_token(cert.initial_label)),
        format!("stem: {}", moves_line(aut, &l.stem)),
        format!("cycle: {}", moves_line(aut, &l.cycle)),
        format!("drift: {}", l.drift),
    ]
}

fn lasso_json(aut: &RocAutomaton, cert: &BehaviorLasso) -> Value {
    let l = &cert.lasso;
    let moves = |ms: &[roc_core::Move]| ms.iter().map(|m| aut.format_move(m)).collect::<Vec<_>>();
    json!({
        "initial": { "state": l.start + 1, "label": aut.label_token(cert.initial_label) },
        "stem": moves(&l.stem),
        "cycle": moves(&l.cycle),
        "drift": l.drift,
    })
}

fn run_line(aut: &RocAutomaton, run: &RunWitness) -> String {
    format!(
        "run: initial {} {}; {}; final {} {}",
        run.start + 1,
        aut.label_token(run.initial_label),
        moves_line(aut, &run.moves),
        run.end + 1,
        aut.label_token(run.final_label)
    )
}

fn oracle_lines(aut: &RocAutomaton, report: &RunReport) -> Vec<String> {
    let mut out = vec![format!("oracle {} {}", report.count, if report.complete { "complete" } else { "incomplete" })];
    out.extend(report.witnesses.iter().map(|r| run_line(aut, r)));
    out
}

fn oracle_json(aut: &RocAutomaton, report: &RunReport) -> Value {
    json!({
        "count": report.count,
        "complete": report.complete,
        "runs": report.witnesses.iter().map(|r| run_line(aut, r)).collect::<Vec<_>>(),
    })
}

fn verdict(b: bool) -> &'static str {
    if b {
        "accept"
    } else {
        "reject"
    }
}

fn execute(command: &Command) -> Result<Output> {
    match command {
        Command::Weight { common, word: w } => {
            let aut = load(common)?;
            let w = word(&aut, w)?;
            let c = roc_core::weight_of_word(&aut, &w)?;
            Ok(Output::ok(vec![c.to_string()], json!({ "word": fmt(&aut, &w), "weight": c.to_string() })))
        }
        Command::Member { common, word: w, prefix, period } => {
            let aut = load(common)?;
            match (w, period) {
                (Some(w), _) => {
                    let w = word(&aut, w)?;
                    let b = !roc_core::weight_of_word(&aut, &w)?.is_zero();
                    Ok(Output::ok(vec![verdict(b).into()], json!({ "word": fmt(&aut, &w), "accepted": b })))
                }
                (None, Some(v)) => {
                    let up = up_word(&aut, prefix.as_deref().unwrap_or(""), v)?;
                    let b = behavior_omega_member(&aut, &up)?;
                    Ok(Output::ok(
                        vec![verdict(b).into()],
                        json!({ "prefix": fmt(&aut, up.prefix()), "period": fmt(&aut, up.period()), "accepted": b }),
                    ))
                }
                (None, None) => unreachable!("clap requires --word or --period"),
            }
        }
        Command::Omega { common, up, witness } => {
            let aut = load(common)?;
            let w = up_word(&aut, &up.prefix, &up.period)?;
            let accepted = behavior_omega_member(&aut, &w)?;
            let mut text = vec![verdict(accepted).to_string()];
            let mut cert = Value::Null;
            if *witness && accepted {
                let lasso = find_behavior_lasso(&aut, &w)?.context("no lasso found within the counter cap")?;
                anyhow::ensure!(check_behavior_lasso(&aut, &w, &lasso), "internal error: certificate does not replay");
                text.extend(lasso_lines(&aut, &lasso));
                cert = lasso_json(&aut, &lasso);
            }
            let mut j = json!({ "prefix": fmt(&aut, w.prefix()), "period": fmt(&aut, w.period()), "accepted": accepted });
            if *witness {
                j["certificate"] = cert;
            }
            Ok(Output::ok(text, j))
        }
        Command::Grammar { common } => {
            let aut = load(common)?;
            let text = export_grammar(&triple_pair_construct(&aut));
            let j: Value = serde_json::from_str(&text)?;
            Ok(Output::ok(text.lines().map(str::to_string).collect(), j))
        }
        Command::Count { common, word: w, witnesses, oracle } => {
            let aut = load(common)?;
            let w = word(&aut, w)?;
            let d = count_finite_derivations(&triple_pair_construct(&aut), &w)?;
            let mut text = vec![d.to_string()];
            let mut j = json!({ "word": fmt(&aut, &w), "derivations": d });
            if witnesses.is_some() || oracle.counter_bound.is_some() || oracle.step_bound.is_some() {
                let bounds = RunBounds {
                    counter: oracle.counter_bound,
                    steps: oracle.step_bound,
                    witnesses: witnesses.unwrap_or(0),
                    ..RunBounds::default()
                };
                let report = oracle_count_runs(&aut, &w, bounds)?;
                text.extend(oracle_lines(&aut, &report));
                j["oracle"] = oracle_json(&aut, &report);
            }
            Ok(Output::ok(text, j))
        }
        Command::Validate { common, max_len, segment_bound, oracle } => {
            let aut = load(common)?;
            let opts = CheckOptions {
                max_len: *max_len,
                segment_bound: *segment_bound,
                bounds: RunBounds { counter: oracle.counter_bound, steps: oracle.step_bound, ..CheckOptions::default().bounds },
                ..CheckOptions::default()
            };
            let results = checks::run_checks(&aut, &opts, &CHECK_NAMES)?;
            let ok = results.iter().all(|r| r.passed());
            let mut text = Vec::new();
            for r in &results {
                let status = if r.passed() { "PASS" } else { "FAIL" };
                text.push(format!("{status} {} cases={} skipped={} failed={}", r.name, r.cases, r.skipped, r.failed));
                text.extend(r.failures.iter().map(|f| format!("  {f}")));
            }
            Ok(Output { text, json: json!({ "passed": ok, "checks": results }), ok })
        }
        Command::Compare { common, max_len, segment_bound, seed } => {
            let aut = load(common)?;
            let opts = CheckOptions { max_len: *max_len, segment_bound: *segment_bound, ..CheckOptions::default() };
            let cmp = checks::compare(&aut, &opts, *seed)?;
            let (line, ok) = match &cmp {
                Comparison::Equivalent { .. } => ("equivalent up to bounds".to_string(), true),
                Comparison::Disagreement { query, grammar, automaton } => {
                    (format!("disagreement on {query}: grammar {}, automaton {}", verdict(*grammar), verdict(*automaton)), false)
                }
            };
            Ok(Output { text: vec![line], json: serde_json::to_value(&cmp)?, ok })
        }
    }
}

/// Word text for JSON, where ε is the empty string rather than `""`.
fn fmt(aut: &RocAutomaton, w: &[usize]) -> String {
    if w.is_empty() {
        String::new()
    } else {
        aut.alphabet().format_word(w)
    }
}

fn json_flag(command: &Command) -> bool {
    match command {
        Command::Weight { common, .. }
        | Command::Member { common, .. }
        | Command::Omega { common, .. }
        | Command::Grammar { common }
        | Command::Count { common, .. }
        | Command::Validate { common, .. }
        | Command::Compare { common, .. } => common.json,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(out) => {
            if json_flag(&cli.command) {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("JSON values serialize"));
            } else {
                for line in &out.text {
                    println!("{line}");
                }
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
