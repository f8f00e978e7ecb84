//! Command-line front end. Every subcommand reads one JSON document from
//! `--file` or stdin and answers in JSON (`--format json`) or as indented text.

use std::ffi::OsString;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Map, Value};

use ranksched::dynamics::{build_profile_graph, posink_of, GraphMode};
use ranksched::instances::{
    generate, matching_profile, normalize, reduce_3dm, solve_3dm_bruteforce, Family, FamilySpec,
    OccurrenceMode,
};
use ranksched::io::{instance_json, parse_instance, parse_profile, parse_threedm};
use ranksched::oracle::{assignment_json, cap_from_env, enumerate_ne, opt_makespan, report};
use ranksched::rational::{big_to_f64, format_big, format_f64};
use ranksched::solvers::{
    decide_global_q2, decide_global_unit, solve_inversed, solve_p2_unit, solve_q2_unit,
    SolveResult, Verdict,
};
use ranksched::{
    brd_run, format_rational, parse_rational, sink_analysis, Analysis, CompetitionStructure,
    DeviatorRule, Error, Game, Profile, Rational,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_NO_NE: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(
    name = "ranksched",
    version,
    about = "Equilibria of scheduling games where jobs compete for rank"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Add a 6-significant-digit decimal next to rationals in text output.
    #[arg(long, global = true)]
    decimal: bool,
    /// Worker threads for the exhaustive scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Input document; stdin when absent or `-`.
    #[arg(long, global = true)]
    file: Option<PathBuf>,
    /// Enumerate even when m^n exceeds the profile cap.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Inversed,
    GlobalUnit,
    P2Unit,
    Q2Unit,
    GlobalQ2,
    Oracle,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Export {
    Dot,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test whether a profile is a Nash equilibrium.
    Check {
        /// Profile file: {"assignment": {"job": "machine", ...}}.
        #[arg(long)]
        profile: PathBuf,
    },
    /// Decide whether a pure Nash equilibrium exists and construct one.
    Solve {
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Run best-response dynamics from a start profile.
    Brd {
        /// priority | lowest-id | highest-rank | uniform
        #[arg(long, default_value = "priority", value_parser = parse_rule)]
        rule: DeviatorRule,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
        /// Start profile file; every job on the first machine when absent.
        #[arg(long)]
        start: Option<PathBuf>,
    },
    /// Sink equilibria of the rule-restricted best-response graph.
    Sinks {
        #[arg(long, default_value = "priority", value_parser = parse_rule)]
        rule: DeviatorRule,
        /// Print the whole profile graph instead of the sinks.
        #[arg(long, value_enum)]
        export: Option<Export>,
    },
    /// Price of anarchy and stability by exhaustive enumeration.
    Poa {
        /// Drop competition: every job is its own set.
        #[arg(long)]
        cost_only: bool,
    },
    /// Generate a named instance family.
    Gen {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_parser = parse_rat)]
        r: Option<Rational>,
        #[arg(long, value_parser = parse_rat)]
        epsilon: Option<Rational>,
    },
    /// Build the scheduling game of a 3-dimensional matching instance.
    Reduce3dm {
        /// Accept any occurrence counts instead of two or three per element.
        #[arg(long)]
        relaxed: bool,
        /// Remove single-occurrence elements first.
        #[arg(long)]
        normalize: bool,
        /// Print a matching (brute force) and its profile instead of the game.
        #[arg(long)]
        matching: bool,
    },
}

fn parse_rule(s: &str) -> Result<DeviatorRule, String> {
    DeviatorRule::parse(s)
        .ok_or_else(|| format!("unknown rule `{s}` (priority, lowest-id, highest-rank, uniform)"))
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_rat(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_USAGE,
            Failure::Core(Error::Validation { .. } | Error::Contract(_)) => EXIT_USAGE,
            Failure::Core(Error::CapExceeded { .. }) => EXIT_CAP,
            Failure::Core(Error::NoEquilibrium | Error::Invariant(_)) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Input(m) => m.clone(),
        }
    }
}

/// What a subcommand produced.
enum Reply {
    /// Structured result, rendered per `--format`.
    Data { value: Value, code: i32 },
    /// A document printed verbatim (instances, DOT graphs).
    Raw(String),
}

fn data(value: Value) -> Reply {
    Reply::Data {
        value,
        code: EXIT_OK,
    }
}

struct Context<'a> {
    common: &'a Common,
    input: Option<String>,
    cap: u128,
    notes: Vec<String>,
}

fn read_input(common: &Common, stdin: &mut dyn Read) -> Result<String, Failure> {
    match common.file.as_deref() {
        Some(p) if p != Path::new("-") => read_file(p),
        _ => {
            let mut text = String::new();
            stdin
                .read_to_string(&mut text)
                .map_err(|e| Failure::Input(format!("reading stdin: {e}")))?;
            Ok(text)
        }
    }
}

impl Context<'_> {
    fn input(&mut self) -> Result<String, Failure> {
        self.input
            .take()
            .ok_or_else(|| Failure::Input("this command reads no input".into()))
    }

    fn game(&mut self) -> Result<Game, Failure> {
        let text = self.input()?;
        Ok(parse_instance(&text)?)
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Parses `argv` (program name first) and runs the subcommand. Never exits the
/// process; `stdin` is read only when the command needs input and no file is
/// given.
pub fn run_command<I, T>(argv: I, stdin: &mut dyn Read) -> CommandOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CommandOutput {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => CommandOutput {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let input = match cli.command {
        Command::Gen { .. } => Ok(None),
        _ => read_input(&cli.common, stdin).map(Some),
    };
    let mut ctx = Context {
        common: &cli.common,
        input: None,
        cap: cap_from_env(),
        notes: Vec::new(),
    };
    let result = match input {
        Err(f) => Err(f),
        Ok(input) => {
            ctx.input = input;
            run_pooled(&cli.command, &mut ctx)
        }
    };
    let mut stderr: String = ctx.notes.iter().map(|n| format!("{n}\n")).collect();
    match result {
        Ok(Reply::Raw(text)) => CommandOutput {
            code: EXIT_OK,
            stdout: text,
            stderr,
        },
        Ok(Reply::Data { value, code }) => CommandOutput {
            code,
            stdout: match cli.common.format {
                Format::Json => serde_json::to_string_pretty(&value).expect("json output") + "\n",
                Format::Text => render_text(&value, cli.common.decimal),
            },
            stderr,
        },
        Err(f) => {
            stderr.push_str(&format!("error: {}\n", f.message()));
            CommandOutput {
                code: f.code(),
                stdout: String::new(),
                stderr,
            }
        }
    }
}

fn run_pooled(command: &Command, ctx: &mut Context<'_>) -> Result<Reply, Failure> {
    match ctx.common.threads {
        Some(0) => Err(Failure::Input("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(command, ctx)),
            Err(e) => Err(Failure::Input(format!("thread pool: {e}"))),
        },
        None => execute(command, ctx),
    }
}

fn execute(command: &Command, ctx: &mut Context<'_>) -> Result<Reply, Failure> {
    match command {
        Command::Check { profile } => check(ctx, profile),
        Command::Solve { method } => solve(ctx, *method),
        Command::Brd {
            rule,
            seed,
            max_steps,
            start,
        } => brd(ctx, *rule, *seed, *max_steps, start.as_deref()),
        Command::Sinks { rule, export } => sinks(ctx, *rule, *export),
        Command::Poa { cost_only } => poa(ctx, *cost_only),
        Command::Gen {
            family,
            m,
            k,
            r,
            epsilon,
        } => {
            let spec = FamilySpec {
                family: *family,
                m: *m,
                k: *k,
                r: *r,
                epsilon: *epsilon,
            };
            Ok(Reply::Raw(pretty(&instance_json(&generate(&spec)?))))
        }
        Command::Reduce3dm {
            relaxed,
            normalize,
            matching,
        } => reduce(ctx, *relaxed, *normalize, *matching),
    }
}

fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("json output") + "\n"
}

fn rational(value: &Rational) -> Value {
    Value::String(format_rational(value))
}

fn job_id(game: &Game, j: usize) -> Value {
    Value::String(game.jobs()[j].id.clone())
}

fn machine_id(game: &Game, i: usize) -> Value {
    Value::String(game.machines()[i].id.clone())
}

fn check(ctx: &mut Context<'_>, profile: &Path) -> Result<Reply, Failure> {
    let game = ctx.game()?;
    let p = parse_profile(&game, &read_file(profile)?)?;
    let a = Analysis::new(&game, p)?;
    let witness = match a.check().witness() {
        Some(d) => json!({ "job": job_id(&game, d.job), "target": machine_id(&game, d.target) }),
        None => Value::Null,
    };
    let jobs: Vec<Value> = (0..game.n())
        .map(|j| {
            json!({
                "job": job_id(&game, j),
                "machine": machine_id(&game, a.profile().machine_of(j)),
                "completion": rational(&a.schedule().completion[j]),
                "rank": rational(&a.rank(j)),
            })
        })
        .collect();
    Ok(data(json!({
        "ne": a.is_ne(),
        "witness": witness,
        "suboptimal": a.suboptimal_jobs().into_iter().map(|j| job_id(&game, j)).collect::<Vec<_>>(),
        "makespan": rational(&a.makespan()),
        "jobs": jobs,
    })))
}

fn reversed_lists(game: &Game) -> bool {
    game.m() == 2 && game.order(0).iter().rev().eq(game.order(1).iter())
}

fn auto_method(game: &Game) -> Method {
    if reversed_lists(game) && game.identical_rates() {
        return Method::Inversed;
    }
    if game.sets().len() == 1 && game.all_unit() {
        if game.identical_rates() && game.is_global() {
            return Method::GlobalUnit;
        }
        if game.m() == 2 {
            return match (game.identical_rates(), game.is_global()) {
                (true, _) => Method::P2Unit,
                (false, true) => Method::GlobalQ2,
                (false, false) => Method::Q2Unit,
            };
        }
    }
    Method::Oracle
}

fn method_name(method: Method) -> String {
    method
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

fn solve(ctx: &mut Context<'_>, method: Method) -> Result<Reply, Failure> {
    let game = ctx.game()?;
    let chosen = match method {
        Method::Auto => auto_method(&game),
        m => m,
    };
    let result = match chosen {
        Method::Inversed => solve_inversed(&game)?,
        Method::GlobalUnit => decide_global_unit(&game)?,
        Method::P2Unit => solve_p2_unit(&game)?,
        Method::Q2Unit => solve_q2_unit(&game)?,
        Method::GlobalQ2 => decide_global_q2(&game)?,
        Method::Oracle | Method::Auto => {
            let ne = enumerate_ne(&game, ctx.cap, ctx.common.force)?;
            SolveResult {
                verdict: if ne.is_empty() {
                    Verdict::NoNe
                } else {
                    Verdict::NeExists
                },
                steps: game.profile_count().min(usize::MAX as u128) as usize,
                witness: ne.into_iter().next(),
            }
        }
    };
    let value = json!({
        "method": method_name(chosen),
        "verdict": if result.has_ne() { "NE-exists" } else { "no-NE" },
        "witness": result.witness.as_ref().map(|p| assignment_json(&game, p)),
        "steps": result.steps,
    });
    Ok(Reply::Data {
        value,
        code: if result.has_ne() { EXIT_OK } else { EXIT_NO_NE },
    })
}

fn brd(
    ctx: &mut Context<'_>,
    rule: DeviatorRule,
    seed: u64,
    max_steps: usize,
    start: Option<&Path>,
) -> Result<Reply, Failure> {
    let game = ctx.game()?;
    let start = match start {
        Some(path) => parse_profile(&game, &read_file(path)?)?,
        None => Profile::uniform(game.n(), 0),
    };
    let trace = brd_run(&game, &start, rule, max_steps, seed)?;
    let end = trace.final_profile();
    let a = Analysis::new(&game, end.clone())?;
    let moves: Vec<Value> = trace
        .steps
        .iter()
        .map(|s| json!({ "job": job_id(&game, s.deviator), "to": machine_id(&game, s.target) }))
        .collect();
    Ok(data(json!({
        "rule": rule.name(),
        "seed": seed,
        "termination": trace.termination.name(),
        "steps": trace.steps.len(),
        "final": assignment_json(&game, &end),
        "final_is_ne": a.is_ne(),
        "final_makespan": rational(&a.makespan()),
        "moves": moves,
    })))
}

fn sinks(
    ctx: &mut Context<'_>,
    rule: DeviatorRule,
    export: Option<Export>,
) -> Result<Reply, Failure> {
    let game = ctx.game()?;
    let (cap, force) = (ctx.cap, ctx.common.force);
    if let Some(export) = export {
        let graph = build_profile_graph(&game, GraphMode::RuleRestricted(rule), None, cap, force)?;
        return Ok(Reply::Raw(match export {
            Export::Dot => graph.to_dot(),
            Export::Json => pretty(&graph.to_json()),
        }));
    }
    let found = sink_analysis(&game, rule, None, cap, force)?;
    let (opt, _) = opt_makespan(&game, cap, force)?;
    let list: Vec<Value> = found
        .iter()
        .map(|s| {
            json!({
                "size": s.members.len(),
                "exact": s.exact,
                "social_cost": format_big(&s.social_cost),
                "members": s.members.iter().zip(&s.distribution).map(|(p, f)| json!({
                    "probability": format_big(f),
                    "profile": assignment_json(&game, p),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let worst = posink_of(&found, &opt)?;
    if found.iter().any(|s| !s.exact) {
        ctx.notes.push(
            "note: some sinks exceed the exact-solve limit; their values are estimates".into(),
        );
    }
    Ok(data(json!({
        "rule": rule.name(),
        "sink_count": found.len(),
        "opt_makespan": rational(&opt),
        "posink": format_big(&worst),
        "sinks": list,
    })))
}

fn poa(ctx: &mut Context<'_>, cost_only: bool) -> Result<Reply, Failure> {
    let mut game = ctx.game()?;
    if cost_only {
        game = game.with_competition(CompetitionStructure::Singletons)?;
    }
    let r = report(&game, ctx.cap, ctx.common.force)?;
    let mut value = Map::new();
    value.insert("cost_only".into(), Value::Bool(cost_only));
    if let Value::Object(fields) = r.to_json(&game) {
        value.extend(fields);
    }
    Ok(data(Value::Object(value)))
}

fn reduce(
    ctx: &mut Context<'_>,
    relaxed: bool,
    normalized: bool,
    matching: bool,
) -> Result<Reply, Failure> {
    let mut t = parse_threedm(&ctx.input()?)?;
    if normalized {
        let n = normalize(&t)?;
        if !n.forced.is_empty() {
            let forced: Vec<String> = n.forced.iter().map(|l| format!("t{l}")).collect();
            ctx.notes
                .push(format!("forced triples: {}", forced.join(", ")));
        }
        t = n.instance;
    }
    let mode = if relaxed {
        OccurrenceMode::Relaxed
    } else {
        OccurrenceMode::Strict
    };
    let game = reduce_3dm(&t, mode)?;
    if !matching {
        return Ok(Reply::Raw(pretty(&instance_json(&game))));
    }
    let value = match solve_3dm_bruteforce(&t)? {
        Some(m) => {
            let p = matching_profile(&t, &m)?;
            json!({
                "matching": m,
                "profile": assignment_json(&game, &p),
                "ne": Analysis::new(&game, p)?.is_ne(),
            })
        }
        None => json!({ "matching": Value::Null }),
    };
    Ok(data(value))
}

/// Keys whose string values are exact rationals.
const RATIONAL_KEYS: [&str; 12] = [
    "completion",
    "rank",
    "makespan",
    "final_makespan",
    "opt_makespan",
    "poa",
    "pos",
    "posink",
    "social_cost",
    "probability",
    "W",
    "rate",
];

fn scalar(key: &str, v: &Value, decimal: bool) -> String {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    };
    if !decimal || !RATIONAL_KEYS.contains(&key) {
        return text;
    }
    match text.parse::<BigRational>() {
        Ok(q) if !q.is_integer() => format!("{text} ({})", format_f64(big_to_f64(&q))),
        _ => text,
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Object(_) | Value::Array(_))
}

fn render_into(out: &mut String, key: &str, v: &Value, indent: usize, decimal: bool) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) if map.values().all(is_scalar) && !map.is_empty() => {
            let parts: Vec<String> = map
                .iter()
                .map(|(k, x)| format!("{k}={}", scalar(k, x, decimal)))
                .collect();
            out.push_str(&format!("{pad}{key}: {}\n", parts.join(" ")));
        }
        Value::Object(map) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for (k, x) in map {
                render_into(out, k, x, indent + 1, decimal);
            }
        }
        Value::Array(items) if items.iter().all(is_scalar) => {
            let parts: Vec<String> = items.iter().map(|x| scalar(key, x, decimal)).collect();
            out.push_str(&format!("{pad}{key}: [{}]\n", parts.join(", ")));
        }
        Value::Array(items) => {
            out.push_str(&format!("{pad}{key}: {} entries\n", items.len()));
            for (i, x) in items.iter().enumerate() {
                render_into(out, &format!("[{}]", i + 1), x, indent + 1, decimal);
            }
        }
        scalar_value => {
            out.push_str(&format!(
                "{pad}{key}: {}\n",
                scalar(key, scalar_value, decimal)
            ));
        }
    }
}

fn render_text(value: &Value, decimal: bool) -> String {
    let mut out = String::new();
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                render_into(&mut out, k, v, 0, decimal);
            }
        }
        other => render_into(&mut out, "result", other, 0, decimal),
    }
    out
}
