use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use docalc::bn::{configurations, load_cpts, term_bindings, term_oracle, Assignment, DiscreteBN, Evaluator};
use docalc::expr::parse_query;
use docalc::identify::{
    explain_outcome, identify_with_stats, IdentifyOutcome, MoveClass, SearchConfig, StepRecord,
};
use docalc::policy::{identify_policy, load_policy, symbolic_policy_value, Policy};
use docalc::selftest::{self, DEFAULT_SEED};
use docalc::{parse_graph, CausalGraph, Error, ProbExpr, ProbTerm, VarId};

const EXIT_ERROR: u8 = 1;
const EXIT_NOT_IDENTIFIED: u8 = 2;
const EXIT_CAPS: u8 = 3;

const TOLERANCE: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "docalc", version, about = "Identify interventional queries on causal graphs by do-calculus search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive an observational formula for a query.
    Identify(QueryArgs),
    /// Derive a formula and evaluate it against a network, next to the direct value.
    Eval(QueryArgs),
    /// Evaluate a conditional policy from observational data.
    Policy(PolicyArgs),
    /// Run the bundled acceptance checks.
    Selftest {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 16)]
    max_depth: usize,
    #[arg(long, default_value_t = 200_000)]
    max_states: usize,
    /// Comma-separated move classes, e.g. `r3-delete,r2-forward,expand-sum`.
    #[arg(long)]
    move_order: Option<String>,
    /// Search trace on stderr: 1 per depth, 2 per state.
    #[arg(long, default_value_t = 0)]
    trace: u8,
}

impl SearchArgs {
    fn config(&self) -> Result<SearchConfig, Error> {
        let mut c = SearchConfig { max_depth: self.max_depth, max_states: self.max_states, trace: self.trace, ..Default::default() };
        if let Some(order) = &self.move_order {
            c.move_order = MoveClass::parse_list(order)?;
        }
        Ok(c)
    }
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    graph: PathBuf,
    /// e.g. `P(y | do(x))`
    #[arg(long)]
    query: String,
    /// Interventional distributions available as measured inputs. Repeatable.
    #[arg(long)]
    known: Vec<String>,
    #[arg(long)]
    cpts: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Unused by identification; accepted for a uniform interface.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct PolicyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    cpts: PathBuf,
    #[arg(long)]
    policy: PathBuf,
    /// Outcome distribution, e.g. `P(y)`.
    #[arg(long)]
    query: String,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Serialize)]
struct Report {
    schema: u32,
    query: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    known: Vec<String>,
    outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    formula: Option<String>,
    steps: Vec<StepRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    states: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    numeric: Option<Vec<NumericRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleSummary>,
}

#[derive(Serialize)]
struct NumericRow {
    assignment: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    formula: Option<f64>,
    oracle: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    equal: Option<bool>,
}

#[derive(Serialize)]
struct OracleSummary {
    tolerance: f64,
    max_abs_diff: f64,
    agree: bool,
}

/// Failure with its exit status.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded(_) | Error::Resource(_) => EXIT_CAPS,
            _ => EXIT_ERROR,
        };
        Failure(code, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(EXIT_ERROR, format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<CausalGraph, Failure> {
    parse_graph(&read(path)?).map_err(|e| Failure(EXIT_ERROR, format!("{}: {e}", path.display())))
}

fn load_bn(g: &CausalGraph, path: &Path) -> Result<DiscreteBN, Failure> {
    let (bn, warnings) = load_cpts(g, &read(path)?).map_err(|e| Failure(EXIT_ERROR, format!("{}: {e}", path.display())))?;
    for w in warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(bn)
}

fn query_term(g: &CausalGraph, s: &str) -> Result<ProbTerm, Failure> {
    let e = parse_query(s)?.bind(g)?;
    e.as_term().cloned().ok_or_else(|| Failure(EXIT_ERROR, format!("`{s}` is not a single probability term")))
}

fn named(g: &CausalGraph, a: &Assignment) -> BTreeMap<String, usize> {
    a.iter().map(|(v, x)| (g.name(v).to_string(), x)).collect()
}

fn exit_for(out: &IdentifyOutcome) -> u8 {
    match out {
        IdentifyOutcome::Identified(_) => 0,
        IdentifyOutcome::NonIdentifiedAtDepth { .. } => EXIT_NOT_IDENTIFIED,
        IdentifyOutcome::Aborted { .. } => EXIT_CAPS,
    }
}

fn base_report(g: &CausalGraph, query: &ProbExpr, known: &[String], out: &IdentifyOutcome, states: usize) -> Report {
    let mut r = Report {
        schema: 1,
        query: query.render_with(g),
        known: known.to_vec(),
        outcome: out.label(),
        formula: None,
        steps: Vec::new(),
        depth: None,
        note: None,
        states,
        numeric: None,
        oracle: None,
    };
    match out {
        IdentifyOutcome::Identified(d) => {
            let rec = d.to_record(g);
            r.query = rec.query;
            r.known = rec.known;
            r.formula = Some(rec.formula);
            r.steps = rec.steps;
        }
        IdentifyOutcome::NonIdentifiedAtDepth { depth, .. } => {
            r.depth = Some(*depth);
            r.note = Some("not a proof that the query is unidentifiable".into());
        }
        IdentifyOutcome::Aborted { reason } => r.note = Some(reason.clone()),
    }
    r
}

fn numeric_rows(bn: &DiscreteBN, q: &ProbTerm, formula: Option<&ProbExpr>) -> Result<(Vec<NumericRow>, f64), Failure> {
    let mut ev = Evaluator::new(bn);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for b in term_bindings(bn, q) {
        let oracle = term_oracle(bn, q, &b)?;
        let value = formula.map(|f| ev.eval(f, &b)).transpose()?;
        if let Some(v) = value {
            worst = worst.max((v - oracle).abs());
        }
        rows.push(NumericRow {
            assignment: named(bn.graph(), &b),
            formula: value,
            oracle,
            equal: value.map(|v| (v - oracle).abs() <= TOLERANCE),
        });
    }
    Ok((rows, worst))
}

fn print_report(r: &Report, text: String, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(r).expect("report serializes")),
        Format::Text => print!("{text}"),
    }
}

fn text_numeric(rows: &[NumericRow]) -> String {
    let mut out = String::new();
    for row in rows {
        let cfg: Vec<String> = row.assignment.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let cfg = if cfg.is_empty() { "()".to_string() } else { cfg.join(", ") };
        match (row.formula, row.equal) {
            (Some(f), Some(eq)) => out.push_str(&format!(
                "  {cfg}: formula {f:.12} oracle {:.12} {}\n",
                row.oracle,
                if eq { "equal" } else { "UNEQUAL" }
            )),
            _ => out.push_str(&format!("  {cfg}: oracle {:.12}\n", row.oracle)),
        }
    }
    out
}

fn run_query(args: &QueryArgs, need_cpts: bool) -> Result<u8, Failure> {
    let g = load_graph(&args.graph)?;
    let config = args.search.config()?;
    let q = query_term(&g, &args.query)?;
    let known = args.known.iter().map(|k| query_term(&g, k)).collect::<Result<Vec<_>, _>>()?;
    let bn = match &args.cpts {
        Some(p) => Some(load_bn(&g, p)?),
        None if need_cpts => return Err(Failure(EXIT_ERROR, "eval needs --cpts".into())),
        None => None,
    };
    let query = ProbExpr::Term(q.clone());
    let (out, stats) = identify_with_stats(&g, &query, &known, &config)?;
    for line in &stats.trace {
        eprintln!("{line}");
    }
    let known_text: Vec<String> = known.iter().map(|k| k.render(&g)).collect();
    let mut report = base_report(&g, &query, &known_text, &out, stats.states);
    let mut text = explain_outcome(&out, &g);
    if let Some(f) = &report.formula {
        text.push_str(&format!("formula: {f}\n"));
    }
    if let Some(bn) = &bn {
        if !known.is_empty() {
            text.push_str("numeric values use the network for the measured inputs as well\n");
        }
        let formula = out.derivation().map(|d| &d.final_expr);
        let (rows, worst) = numeric_rows(bn, &q, formula)?;
        text.push_str("values:\n");
        text.push_str(&text_numeric(&rows));
        if formula.is_some() {
            let agree = worst <= TOLERANCE;
            text.push_str(&format!(
                "oracle check: max |formula - oracle| = {worst:.3e} ({})\n",
                if agree { "equal within 1e-9" } else { "NOT equal within 1e-9" }
            ));
            report.oracle = Some(OracleSummary { tolerance: TOLERANCE, max_abs_diff: worst, agree });
        }
        report.numeric = Some(rows);
    }
    print_report(&report, text, args.format);
    Ok(exit_for(&out))
}

fn run_policy(args: &PolicyArgs) -> Result<u8, Failure> {
    let g = load_graph(&args.graph)?;
    let config = args.search.config()?;
    let bn = load_bn(&g, &args.cpts)?;
    let pol: Policy = load_policy(&bn, &read(&args.policy)?)?;
    let outcome = query_term(&g, &args.query)?;
    if !outcome.conditions.is_empty() {
        return Err(Failure(EXIT_ERROR, "policy outcome must be unconditional, e.g. `P(y)`".into()));
    }
    let y = outcome.target_set();
    let x = pol.action();
    let out = identify_policy(&g, x, pol.inputs(), &y, &config)?;
    let q = out.derivation().map(|d| d.initial.clone());
    let query = q.unwrap_or_else(|| ProbExpr::Term(outcome.clone()));
    let mut report = base_report(&g, &query, &[], &out, 0);
    let mut text = format!(
        "policy on {} with inputs {{{}}}\n",
        g.name(x),
        g.names(pol.inputs()).join(",")
    );
    text.push_str(&explain_outcome(&out, &g));
    if let Some(f) = &report.formula {
        text.push_str(&format!("formula: {f}\n"));
    }
    let stoch = pol.to_stochastic(&bn);
    let yv: Vec<VarId> = y.iter().collect();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for ya in configurations(&yv, bn.cards()) {
        let oracle = pol.eval(&bn, &ya)?;
        let value = out.derivation().map(|d| symbolic_policy_value(&bn, &d.final_expr, &stoch, &ya)).transpose()?;
        if let Some(v) = value {
            worst = worst.max((v - oracle).abs());
        }
        rows.push(NumericRow {
            assignment: named(&g, &ya),
            formula: value,
            oracle,
            equal: value.map(|v| (v - oracle).abs() <= TOLERANCE),
        });
    }
    text.push_str("policy values:\n");
    text.push_str(&text_numeric(&rows));
    if out.is_identified() {
        let agree = worst <= TOLERANCE;
        text.push_str(&format!(
            "oracle check: max |formula - oracle| = {worst:.3e} ({})\n",
            if agree { "equal within 1e-9" } else { "NOT equal within 1e-9" }
        ));
        report.oracle = Some(OracleSummary { tolerance: TOLERANCE, max_abs_diff: worst, agree });
    }
    report.numeric = Some(rows);
    print_report(&report, text, args.format);
    Ok(exit_for(&out))
}

#[derive(Serialize)]
struct SelftestReport {
    schema: u32,
    seed: u64,
    criteria: Vec<CriterionRow>,
    loader_warnings: Vec<String>,
    passed: bool,
}

#[derive(Serialize)]
struct CriterionRow {
    id: u8,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn run_selftest(seed: u64, format: Format) -> u8 {
    let reports = selftest::run_all(seed);
    let warnings = selftest::loader_warning_check();
    let mut passed = reports.iter().all(|r| r.passed);
    let mut text: String = reports.iter().map(|r| format!("{r}\n")).collect();
    let loader_warnings = match warnings {
        Ok(w) => {
            text.push_str(&format!("PASS loader warning surfaced: {}\n", w.join("; ")));
            w
        }
        Err(e) => {
            passed = false;
            text.push_str(&format!("FAIL loader warning: {e}\n"));
            Vec::new()
        }
    };
    for r in &reports {
        eprintln!("criterion {}: {:.2?}", r.id, r.elapsed);
    }
    match format {
        Format::Text => print!("{text}"),
        Format::Json => {
            let criteria = reports
                .into_iter()
                .map(|r| CriterionRow { id: r.id, name: r.name, passed: r.passed, detail: r.detail })
                .collect();
            let rep = SelftestReport { schema: 1, seed, criteria, loader_warnings, passed };
            println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
        }
    }
    if passed {
        0
    } else {
        EXIT_ERROR
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Identify(a) => run_query(a, false),
        Command::Eval(a) => run_query(a, true),
        Command::Policy(a) => run_policy(a),
        Command::Selftest { seed, format } => Ok(run_selftest(*seed, *format)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
