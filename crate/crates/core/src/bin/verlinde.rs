use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use verlinde::error::{QueryError, VerlindeError};
use verlinde::query::{self, ComputeOutput, Mode, QuerySpec};
use verlinde::selfcheck::{self, Suite};
use verlinde::verlinde::Admissibility;

const EXIT_OTHER: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INADMISSIBLE: u8 = 3;
const EXIT_SELFCHECK: u8 = 4;

/// `writeln!` to stdout inside a function returning `Result<_, Failure>`.
macro_rules! out {
    ($($arg:tt)*) => {
        writeln!(io::stdout(), $($arg)*).map_err(write_failure)?
    };
}

#[derive(Parser)]
#[command(name = "verlinde", version, about = "Exact Verlinde-type indices for compact groups and their central quotients")]
struct Cli {
    /// Worker threads for the lambda sums (default: all cores).
    #[arg(long, global = true, env = "VERLINDE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Table,
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Emit JSON.
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV.
    #[arg(long)]
    csv: bool,
}

impl OutputArgs {
    fn format(&self) -> Format {
        match (self.json, self.csv) {
            (true, _) => Format::Json,
            (_, true) => Format::Csv,
            _ => Format::Table,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one index.
    Compute(ComputeArgs),
    /// Minimal admissible levels.
    Levels(LevelsArgs),
    /// Run the property suites.
    Selfcheck(SelfcheckArgs),
    /// Evaluate a grid of queries read from a TOML file.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ComputeArgs {
    /// Group, e.g. `SU(3)`, `SO(3)`, `E7'`, `SU(2)xPSU(3)`.
    #[arg(long)]
    group: String,
    /// Level, or one level per simple factor (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    level: Vec<u32>,
    #[arg(long, default_value_t = 0)]
    genus: u32,
    /// Markings in fundamental-weight coordinates, e.g. `1,0;0,1`.
    #[arg(long, allow_hyphen_values = true)]
    markings: Option<String>,
    /// Center generators replacing the ones implied by the group name, e.g. `1,1`.
    #[arg(long)]
    center: Option<String>,
    /// Character exponents, one row per slot (`2h` rows), e.g. `1;0`.
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// sc, ns, conjclass or closed (default: ns for quotients, else sc or closed).
    #[arg(long)]
    mode: Option<String>,
    /// Level condition: strict, weak or unchecked.
    #[arg(long, default_value = "strict")]
    rule: String,
    /// Print the contribution of every lambda.
    #[arg(long)]
    breakdown: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct LevelsArgs {
    /// Report the minimal levels of this group instead of the adjoint table.
    #[arg(long)]
    group: Option<String>,
    #[arg(long, default_value = "strict")]
    rule: String,
    /// Largest classical rank in the adjoint table.
    #[arg(long, default_value_t = 8)]
    max_rank: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SelfcheckArgs {
    #[arg(value_enum, default_value = "fast")]
    suite: SuiteArg,
    /// Level condition used by the integrality sweep.
    #[arg(long, default_value = "strict")]
    rule: String,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Also write the JSON report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file describing the grid.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `groups` from the file.
    #[arg(long)]
    group: Option<String>,
    /// Overrides `levels` from the file (comma separated).
    #[arg(long, value_delimiter = ',')]
    level: Option<Vec<u32>>,
    /// Overrides `genus` from the file (comma separated).
    #[arg(long, value_delimiter = ',')]
    genus: Option<Vec<u32>>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    rule: Option<String>,
    #[command(flatten)]
    out: OutputArgs,
}

/// Sweep file layout.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    #[serde(default)]
    group: Option<String>,
    #[serde(default)]
    groups: Vec<String>,
    #[serde(default)]
    levels: Vec<LevelEntry>,
    #[serde(default)]
    genus: Vec<u32>,
    #[serde(default)]
    mode: Option<Mode>,
    #[serde(default)]
    rule: Option<Admissibility>,
    #[serde(default)]
    markings: Option<MarkingSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum LevelEntry {
    One(u32),
    Many(Vec<u32>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MarkingSpec {
    /// `"all"`: every level weight as a single marking; `"none"`: no marking.
    Keyword(String),
    List(Vec<Vec<i64>>),
}

#[derive(Serialize)]
struct SweepRow {
    group: String,
    levels: Vec<u32>,
    genus: u32,
    mode: Option<Mode>,
    marking: Option<Vec<i64>>,
    value: Option<String>,
    error: Option<String>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<QueryError> for Failure {
    fn from(e: QueryError) -> Self {
        let code = match &e {
            QueryError::Parse { .. } | QueryError::Center(_) => EXIT_PARSE,
            QueryError::Verlinde(VerlindeError::InadmissibleLevel { .. }) => EXIT_INADMISSIBLE,
            QueryError::Verlinde(VerlindeError::InvalidMarking(_) | VerlindeError::LevelCount { .. }) => EXIT_PARSE,
            QueryError::Verlinde(VerlindeError::Center(_) | VerlindeError::TooManyMarkings) => EXIT_PARSE,
            QueryError::Verlinde(_) => EXIT_OTHER,
        };
        Failure { code, message: e.to_string() }
    }
}

fn parse_failure(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_PARSE, message: msg.into() }
}

/// A reader that closes the pipe early is not an error.
fn write_failure(e: io::Error) -> Failure {
    if e.kind() == io::ErrorKind::BrokenPipe {
        Failure { code: 0, message: String::new() }
    } else {
        io_failure(e)
    }
}

fn csv_failure(e: csv::Error) -> Failure {
    match e.kind() {
        csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe => Failure { code: 0, message: String::new() },
        _ => io_failure(e),
    }
}

fn io_failure(e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_OTHER, message: e.to_string() }
}

fn parse_rule(s: &str) -> Result<Admissibility, Failure> {
    s.parse().map_err(parse_failure)
}

fn spec_from_args(a: &ComputeArgs) -> Result<QuerySpec, Failure> {
    let named = query::parse_group(&a.group)?;
    let markings = match &a.markings {
        Some(m) => query::parse_markings(named.group.rank(), m)?,
        None => Vec::new(),
    };
    let center = match &a.center {
        Some(c) => Some(query::parse_center_generators(&named.group, c)?.into_iter().map(|e| e.0).collect()),
        None => None,
    };
    let phi = match &a.phi {
        Some(p) => Some(query::parse_int_rows("phi", p)?),
        None => None,
    };
    let mode = match &a.mode {
        Some(m) => Some(m.parse::<Mode>()?),
        None => None,
    };
    Ok(QuerySpec {
        group: a.group.clone(),
        level: a.level.clone(),
        genus: a.genus,
        markings,
        center,
        phi,
        mode,
        rule: parse_rule(&a.rule)?,
    })
}

fn csv_writer() -> csv::Writer<io::Stdout> {
    csv::Writer::from_writer(io::stdout())
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

fn print_compute(out: &ComputeOutput, format: Format, breakdown: bool) -> Result<(), Failure> {
    match format {
        Format::Json => {
            let s = serde_json::to_string_pretty(out).map_err(io_failure)?;
            out!("{s}");
        }
        Format::Csv => {
            let mut w = csv_writer();
            if breakdown {
                w.write_record(["lambda", "contribution", "approx"]).map_err(csv_failure)?;
                for t in &out.result.per_lambda {
                    w.write_record([t.lambda.to_string(), t.contribution.to_string(), t.contribution.approx().re.to_string()])
                        .map_err(csv_failure)?;
                }
            } else {
                w.write_record(["group", "levels", "genus", "mode", "markings", "value"]).map_err(csv_failure)?;
                let marks = join(&out.markings, ";");
                w.write_record([
                    out.group.clone(),
                    join(&out.levels, ";"),
                    out.genus.to_string(),
                    out.mode.to_string(),
                    marks,
                    out.result.value.to_string(),
                ])
                .map_err(csv_failure)?;
            }
            w.flush().map_err(write_failure)?;
        }
        Format::Table => {
            let mut s = String::new();
            s.push_str(&format!("group    {} (cover {}, |Gamma| = {})\n", out.group, out.cover, out.center_subgroup_order));
            s.push_str(&format!("level    {}\n", join(&out.levels, ", ")));
            s.push_str(&format!("genus    {}\n", out.genus));
            s.push_str(&format!("mode     {}\n", out.mode));
            if !out.markings.is_empty() {
                s.push_str(&format!("markings {}\n", join(&out.markings, " ")));
            }
            s.push_str(&format!("value    {}\n", out.result.value));
            if breakdown {
                let width = out.result.per_lambda.iter().map(|t| t.lambda.to_string().len()).max().unwrap_or(6).max(6);
                s.push_str(&format!("\n{:<width$}  {:>14}  exact\n", "lambda", "approx"));
                for t in &out.result.per_lambda {
                    s.push_str(&format!(
                        "{:<width$}  {:>14.6}  {}\n",
                        t.lambda.to_string(),
                        t.contribution.approx().re,
                        t.contribution
                    ));
                }
            }
            write!(io::stdout(), "{s}").map_err(write_failure)?;
        }
    }
    Ok(())
}

fn cmd_compute(a: &ComputeArgs) -> Result<(), Failure> {
    let spec = spec_from_args(a)?;
    let out = query::compute(&spec)?;
    print_compute(&out, a.out.format(), a.breakdown)
}

fn cmd_levels(a: &LevelsArgs) -> Result<(), Failure> {
    let rule = parse_rule(&a.rule)?;
    if let Some(g) = &a.group {
        let named = query::parse_group(g)?;
        let rows = query::group_min_levels(&named, rule);
        match a.out.format() {
            Format::Json => {
                #[derive(Serialize)]
                struct Row<'a> {
                    factor: &'a str,
                    min_level: u32,
                }
                let v: Vec<Row> = rows.iter().map(|(f, l)| Row { factor: f, min_level: *l }).collect();
                out!("{}", serde_json::to_string_pretty(&v).map_err(io_failure)?);
            }
            Format::Csv => {
                let mut w = csv_writer();
                w.write_record(["factor", "min_level"]).map_err(csv_failure)?;
                for (f, l) in &rows {
                    w.write_record([f.clone(), l.to_string()]).map_err(csv_failure)?;
                }
                w.flush().map_err(write_failure)?;
            }
            Format::Table => {
                for (f, l) in &rows {
                    out!("{f:<6} {l}");
                }
            }
        }
        return Ok(());
    }
    let rows = query::adjoint_level_table(a.max_rank);
    match a.out.format() {
        Format::Json => out!("{}", serde_json::to_string_pretty(&rows).map_err(io_failure)?),
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(["type", "center_order", "l0", "tabulated"]).map_err(csv_failure)?;
            for r in &rows {
                let tab = r.tabulated.map(|x| x.to_string()).unwrap_or_default();
                w.write_record([r.lie_type.clone(), r.center_order.to_string(), r.computed.to_string(), tab])
                    .map_err(csv_failure)?;
            }
            w.flush().map_err(write_failure)?;
        }
        Format::Table => {
            out!("{:<6} {:>6} {:>4} {:>10}", "type", "#Z(G)", "l0", "tabulated");
            for r in &rows {
                let tab = r.tabulated.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
                let mark = if r.agrees() { "" } else { "  MISMATCH" };
                out!("{:<6} {:>6} {:>4} {:>10}{mark}", format!("{}'", r.lie_type), r.center_order, r.computed, tab);
            }
        }
    }
    Ok(())
}

fn cmd_selfcheck(a: &SelfcheckArgs) -> Result<(), Failure> {
    let suite = match a.suite {
        SuiteArg::Fast => Suite::Fast,
        SuiteArg::Full => Suite::Full,
    };
    let report = selfcheck::run_selfcheck(suite, parse_rule(&a.rule)?, a.seed);
    let json = serde_json::to_string_pretty(&report).map_err(io_failure)?;
    if let Some(path) = &a.report {
        fs::write(path, &json).map_err(io_failure)?;
    }
    if a.json {
        out!("{json}");
    } else {
        for c in &report.checks {
            let tag = if c.passed() { "PASS" } else { "FAIL" };
            out!("{tag}  {:<58} {:>9} cases {:>5} failed {:>8.2}s", c.name, c.cases, c.failures, c.seconds);
            if !c.passed() {
                for n in &c.notes {
                    out!("      {n}");
                }
            }
        }
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure { code: EXIT_SELFCHECK, message: "selfcheck failed".into() })
    }
}

fn sweep_markings(spec: &Option<MarkingSpec>, group: &verlinde::group::Group, levels: &[u32]) -> Result<Vec<Option<Vec<i64>>>, Failure> {
    match spec {
        None => Ok(vec![None]),
        Some(MarkingSpec::Keyword(k)) if k == "none" => Ok(vec![None]),
        Some(MarkingSpec::Keyword(k)) if k == "all" => {
            Ok(group.level_weights(levels).into_iter().map(|w| Some(w.0)).collect())
        }
        Some(MarkingSpec::Keyword(k)) => Err(parse_failure(format!("markings must be \"all\", \"none\" or a list, got `{k}`"))),
        Some(MarkingSpec::List(l)) => Ok(l.iter().cloned().map(Some).collect()),
    }
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.config).map_err(|e| parse_failure(format!("{}: {e}", a.config.display())))?;
    let mut cfg: SweepConfig = toml::from_str(&text).map_err(|e| parse_failure(format!("{}: {e}", a.config.display())))?;
    if let Some(g) = &a.group {
        cfg.groups = vec![g.clone()];
        cfg.group = None;
    }
    if let Some(l) = &a.level {
        cfg.levels = l.iter().map(|&x| LevelEntry::One(x)).collect();
    }
    if let Some(h) = &a.genus {
        cfg.genus = h.clone();
    }
    if let Some(m) = &a.mode {
        cfg.mode = Some(m.parse::<Mode>()?);
    }
    if let Some(r) = &a.rule {
        cfg.rule = Some(parse_rule(r)?);
    }
    let mut groups = cfg.groups.clone();
    if let Some(g) = &cfg.group {
        groups.insert(0, g.clone());
    }
    if groups.is_empty() || cfg.levels.is_empty() || cfg.genus.is_empty() {
        return Err(parse_failure("a sweep needs groups, levels and genus"));
    }
    let mut rows = Vec::new();
    for g in &groups {
        let named = query::parse_group(g)?;
        for entry in &cfg.levels {
            let level = match entry {
                LevelEntry::One(k) => vec![*k],
                LevelEntry::Many(ks) => ks.clone(),
            };
            let full_levels =
                if level.len() == 1 { vec![level[0]; named.group.num_factors()] } else { level.clone() };
            if full_levels.len() != named.group.num_factors() {
                return Err(parse_failure(format!("{g}: {} levels for {} factors", level.len(), named.group.num_factors())));
            }
            let marks = sweep_markings(&cfg.markings, &named.group, &full_levels)?;
            for &h in &cfg.genus {
                for m in &marks {
                    let spec = QuerySpec {
                        group: g.clone(),
                        level: full_levels.clone(),
                        genus: h,
                        markings: m.iter().cloned().collect(),
                        center: None,
                        phi: None,
                        mode: cfg.mode,
                        rule: cfg.rule.unwrap_or_default(),
                    };
                    let (value, error, mode) = match query::compute(&spec) {
                        Ok(o) => (Some(o.result.value.to_string()), None, Some(o.mode)),
                        Err(e) => (None, Some(e.to_string()), spec.mode),
                    };
                    rows.push(SweepRow { group: g.clone(), levels: full_levels.clone(), genus: h, mode, marking: m.clone(), value, error });
                }
            }
        }
    }
    match a.out.format() {
        Format::Json => out!("{}", serde_json::to_string_pretty(&rows).map_err(io_failure)?),
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(["group", "levels", "genus", "mode", "marking", "value", "error"]).map_err(csv_failure)?;
            for r in &rows {
                w.write_record([
                    r.group.clone(),
                    join(&r.levels, ";"),
                    r.genus.to_string(),
                    r.mode.map(|m| m.to_string()).unwrap_or_default(),
                    r.marking.as_ref().map(|m| join(m, ";")).unwrap_or_default(),
                    r.value.clone().unwrap_or_default(),
                    r.error.clone().unwrap_or_default(),
                ])
                .map_err(csv_failure)?;
            }
            w.flush().map_err(write_failure)?;
        }
        Format::Table => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            for r in &rows {
                let marking = r.marking.as_ref().map(|m| format!("[{}]", join(m, ", "))).unwrap_or_else(|| "-".into());
                let mode = r.mode.map(|m| m.to_string()).unwrap_or_else(|| "auto".into());
                let result = match (&r.value, &r.error) {
                    (Some(v), _) => v.clone(),
                    (None, Some(e)) => format!("error: {e}"),
                    _ => String::new(),
                };
                writeln!(lock, "{:<12} k={:<8} h={:<2} {:<9} {:<14} {result}", r.group, join(&r.levels, ","), r.genus, mode, marking)
                    .map_err(write_failure)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_OTHER);
        }
    }
    let res = match &cli.command {
        Command::Compute(a) => cmd_compute(a),
        Command::Levels(a) => cmd_levels(a),
        Command::Selfcheck(a) => cmd_selfcheck(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if f.code == 0 => ExitCode::SUCCESS,
        Err(f) => {
            if f.code != EXIT_SELFCHECK {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
