//! The `mechkit` command line.
//!
//! Exit codes: 0 success, 1 invalid input, 2 negative cycle (the rule is not
//! SE/affine), 3 capacity exceeded, 4 internal invariant failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::audit::{self, AuditOptions, AuditReport};
use crate::error::{MechError, Result};
use crate::experiments::{
    self, ExperimentConfig, ExperimentRun, SizeSpec, SweepParam, SweepPoint,
};
use crate::json;
use crate::model::{Environment, MechanismOutcome, TypeProfile};
use crate::rules::{AffineWeights, OptionRule, TieBreak};
use crate::spm::{self, PaymentMode, PaymentRule};
use crate::value::Value;
use crate::vcg::WeightedPivot;

#[derive(Debug, Parser)]
#[command(name = "mechkit", version, about = "Budget-optimal payments for justified mechanisms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select the option and compute payments at one profile.
    Run(RunArgs),
    /// Exhaustively check SE, DSIC and IR of a mechanism.
    Audit(AuditArgs),
    /// Random-instance budget comparisons, sweeps and demos.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct MechanismArgs {
    /// Environment JSON document.
    #[arg(long)]
    pub env: PathBuf,
    /// Option rule: se:lowest, se:highest, affine (unit weights),
    /// affine:<file>, table:<file>, or env (the document's own rule).
    /// Defaults to the document's rule, else se:lowest.
    #[arg(long)]
    pub rule: Option<String>,
    /// Payments: proposed[:full|:contracted|:auto], clarke, vcg-budget, ama,
    /// ama-budget or zero.
    #[arg(long, default_value = "proposed")]
    pub payment: String,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub mechanism: MechanismArgs,
    /// Reported type indices, comma separated (e.g. 0,1).
    #[arg(long, allow_hyphen_values = true)]
    pub profile: String,
    /// Also audit the whole mechanism and warn about violations.
    #[arg(long)]
    pub audit: bool,
    /// Write each agent's type graph as Graphviz DOT into this directory.
    #[arg(long, value_name = "DIR")]
    pub dump_graph: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub mechanism: MechanismArgs,
    /// Compare proposed payments with the path-enumeration oracle where
    /// domains have at most 8 types.
    #[arg(long)]
    pub oracle: bool,
    /// Include the dominance report against VCG-budget (tabular SE rules).
    #[arg(long)]
    pub dominance: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    Vickrey,
    Venue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    N,
    M,
    D,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Agents: a count or an inclusive range lo:hi drawn per instance.
    #[arg(long)]
    pub n: Option<String>,
    /// Options: a count or a range lo:hi.
    #[arg(long)]
    pub m: Option<String>,
    /// Types per agent: a count or a range lo:hi.
    #[arg(long)]
    pub d: Option<String>,
    /// Inclusive value range lo:hi.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    #[arg(long)]
    pub instances: Option<usize>,
    /// Seed; falls back to MECHKIT_SEED, then the configuration, then 0.
    #[arg(long, env = "MECHKIT_SEED")]
    pub seed: Option<u64>,
    /// Audit every k-th instance exhaustively (0 disables).
    #[arg(long)]
    pub audit_every: Option<usize>,
    /// Sweep one size parameter over --from..=--to.
    #[arg(long, value_enum)]
    pub sweep: Option<SweepArg>,
    #[arg(long, default_value_t = 1)]
    pub from: usize,
    #[arg(long)]
    pub to: Option<usize>,
    /// Run a demo instance end to end instead of an experiment.
    #[arg(long, value_enum)]
    pub demo: Option<Demo>,
    /// Vickrey demo price ladder, strictly decreasing.
    #[arg(long, default_value = "5,4,3,2,1")]
    pub prices: String,
    /// Vickrey demo bids as price indices, one per agent.
    #[arg(long, default_value = "0,2,4")]
    pub bids: String,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Per-instance CSV output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON output file (also printed to standard output).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io_err = |e: std::io::Error| MechError::input(format!("writing {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| MechError::input(format!("reading {}: {e}", path.display())))
}

/// Parses a rule spec against the environment document's own rule.
pub fn parse_rule_spec(spec: Option<&str>, doc_rule: Option<OptionRule>) -> Result<OptionRule> {
    let Some(spec) = spec else {
        return Ok(doc_rule.unwrap_or_else(OptionRule::se_lowest));
    };
    let (kind, arg) = match spec.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (spec, None),
    };
    match (kind, arg) {
        ("se", None | Some("lowest")) => Ok(OptionRule::se_lowest()),
        ("se", Some("highest")) => Ok(OptionRule::social_welfare(TieBreak::HighestIndex)),
        ("env", None) => doc_rule.ok_or_else(|| MechError::input("the environment document has no rule")),
        ("affine", Some(file)) | ("table", Some(file)) => {
            let rule = json::parse_rule(&read_file(Path::new(file))?)?;
            let ok = if kind == "affine" {
                rule.affine_weights().is_some()
            } else {
                matches!(rule.family(), crate::rules::RuleFamily::Table(_))
            };
            if ok {
                Ok(rule)
            } else {
                Err(MechError::input(format!("{file} does not hold a {kind} rule")))
            }
        }
        ("affine", None) => Err(MechError::input("`affine` needs the environment; use `resolve_rule`")),
        _ => Err(MechError::input(format!("unknown rule spec `{spec}`"))),
    }
}

/// Like [`parse_rule_spec`], also accepting `affine` (unit weights sized to `env`).
pub fn resolve_rule(spec: Option<&str>, env: &Environment, doc_rule: Option<OptionRule>) -> Result<OptionRule> {
    if spec == Some("affine") {
        let m = env
            .option_count()
            .ok_or_else(|| MechError::Unsupported("affine rules need a tabular environment".into()))?;
        return OptionRule::affine(AffineWeights::unit(env.agent_count(), m), TieBreak::LowestIndex);
    }
    parse_rule_spec(spec, doc_rule)
}

pub fn parse_payment_spec(spec: &str, rule: &OptionRule) -> Result<PaymentRule> {
    let weighted = |pivot| {
        rule.affine_weights()
            .map(|w| PaymentRule::WeightedVcg {
                weights: w.clone(),
                pivot,
            })
            .ok_or_else(|| MechError::input(format!("payment `{spec}` needs an affine rule")))
    };
    match spec {
        "proposed" | "proposed:auto" => Ok(PaymentRule::Proposed(PaymentMode::Auto)),
        "proposed:full" => Ok(PaymentRule::Proposed(PaymentMode::Full)),
        "proposed:contracted" => Ok(PaymentRule::Proposed(PaymentMode::Contracted)),
        "clarke" => Ok(PaymentRule::Clarke),
        "vcg-budget" => Ok(PaymentRule::VcgBudget),
        "ama" => weighted(WeightedPivot::Ama),
        "ama-budget" => weighted(WeightedPivot::BudgetAnalog),
        "zero" => Ok(PaymentRule::Zero),
        other => Err(MechError::input(format!("unknown payment spec `{other}`"))),
    }
}

fn load_mechanism(args: &MechanismArgs) -> Result<(Environment, OptionRule, PaymentRule)> {
    let (env, doc_rule) = json::parse_environment(&read_file(&args.env)?)?;
    let rule = resolve_rule(args.rule.as_deref(), &env, doc_rule)?;
    let payment = parse_payment_spec(&args.payment, &rule)?;
    Ok((env, rule, payment))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports always serialize")
}

#[derive(Serialize)]
struct RunReport {
    #[serde(flatten)]
    outcome: MechanismOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    audit: Option<AuditReport>,
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let (env, rule, payment) = load_mechanism(&args.mechanism)?;
    let profile: TypeProfile = args.profile.parse()?;
    env.check_profile(&profile)?;
    if let Some(dir) = &args.dump_graph {
        fs::create_dir_all(dir).map_err(|e| MechError::input(format!("creating {}: {e}", dir.display())))?;
        for i in 0..env.agent_count() {
            let g = spm::build_type_graph(&env, &rule, i, &profile)?;
            let name = format!("G_{i}");
            write_atomic(&dir.join(format!("{name}.dot")), g.to_digraph().to_dot(&name).as_bytes())?;
        }
    }
    let outcome = spm::run_mechanism(&env, &rule, &profile, &payment)?;
    let audit = if args.audit {
        let report = audit::audit_mechanism(&env, &rule, &payment, AuditOptions::default())?;
        for (what, list) in [("SE", &report.se), ("DSIC", &report.dsic), ("IR", &report.ir)] {
            if !list.is_empty() {
                let _ = writeln!(err, "warning: {} {what} violation(s)", list.len());
            }
        }
        Some(report)
    } else {
        None
    };
    let _ = writeln!(out, "{}", to_json(&RunReport { outcome, audit }));
    Ok(())
}

fn cmd_audit(args: &AuditArgs, out: &mut dyn Write) -> Result<()> {
    let (env, rule, payment) = load_mechanism(&args.mechanism)?;
    let report = audit::audit_mechanism(
        &env,
        &rule,
        &payment,
        AuditOptions {
            dominance: args.dominance,
            oracle: args.oracle,
        },
    )?;
    let _ = writeln!(out, "{}", to_json(&report));
    Ok(())
}

fn parse_size(s: &str, what: &str) -> Result<SizeSpec> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| MechError::input(format!("--{what}: `{s}` is not a count or lo:hi range")))
    };
    match s.split_once(':') {
        Some((lo, hi)) => Ok(SizeSpec::Uniform {
            lo: num(lo)?,
            hi: num(hi)?,
        }),
        None => Ok(SizeSpec::Fixed(num(s)?)),
    }
}

fn parse_range(s: &str) -> Result<(i64, i64)> {
    let bad = || MechError::input(format!("--range: `{s}` is not lo:hi"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| MechError::input(format!("--{what}: bad entry `{t}`"))))
        .collect()
}

fn experiment_config(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut c = match &args.config {
        Some(path) => serde_json::from_str(&read_file(path)?)
            .map_err(|e| MechError::input(format!("experiment config: {e}")))?,
        None => ExperimentConfig::default(),
    };
    if let Some(n) = &args.n {
        c.agents = parse_size(n, "n")?;
    }
    if let Some(m) = &args.m {
        c.options = parse_size(m, "m")?;
    }
    if let Some(d) = &args.d {
        c.domain_size = parse_size(d, "d")?;
    }
    if let Some(r) = &args.range {
        c.value_range = parse_range(r)?;
    }
    if let Some(k) = args.instances {
        c.instances = k;
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if let Some(a) = args.audit_every {
        c.audit_every = a;
    }
    c.validate()?;
    Ok(c)
}

#[derive(Serialize)]
struct DemoReport {
    demo: &'static str,
    environment: json::EnvDocument,
    profile: TypeProfile,
    #[serde(flatten)]
    outcome: MechanismOutcome,
    dsic_violations: usize,
    ir_violations: usize,
}

fn demo_instance(args: &ExperimentArgs, demo: Demo) -> Result<(Environment, TypeProfile)> {
    match demo {
        Demo::Vickrey => {
            let prices: Vec<Value> = parse_list(&args.prices, "prices")?;
            let bids: Vec<usize> = parse_list(&args.bids, "bids")?;
            experiments::vickrey_instance(&prices, &bids)
        }
        Demo::Venue => {
            let t = |a: i64, b: i64, c: i64| (Value::from_integer(a), Value::from_integer(b), Value::from_integer(c));
            let env = experiments::venue_instance(
                vec![
                    vec![t(1, 2, 0), t(1, 5, 0)],
                    vec![t(2, 6, 1), t(1, 9, 0)],
                    vec![t(1, 1, 0), t(3, 4, 2)],
                ],
                Value::zero(),
                Value::from_integer(10),
            )?;
            Ok((env, TypeProfile::new(vec![0, 1, 1])))
        }
    }
}

fn cmd_demo(args: &ExperimentArgs, demo: Demo, out: &mut dyn Write) -> Result<()> {
    let (env, profile) = demo_instance(args, demo)?;
    let rule = OptionRule::se_lowest();
    let payment = PaymentRule::proposed();
    let outcome = spm::run_mechanism(&env, &rule, &profile, &payment)?;
    let report = DemoReport {
        demo: match demo {
            Demo::Vickrey => "vickrey",
            Demo::Venue => "venue",
        },
        environment: json::EnvDocument::from_env(&env, None),
        profile,
        outcome,
        dsic_violations: audit::check_dsic(&env, &rule, &payment)?.len(),
        ir_violations: audit::check_ir(&env, &rule, &payment)?.len(),
    };
    let text = to_json(&report);
    if let Some(path) = &args.summary {
        write_atomic(path, format!("{text}\n").as_bytes())?;
    }
    let _ = writeln!(out, "{text}");
    Ok(())
}

fn csv_bytes(runs: &[&ExperimentRun]) -> Result<Vec<u8>> {
    let records: Vec<_> = runs.iter().flat_map(|r| r.records.iter().cloned()).collect();
    let mut buf = Vec::new();
    experiments::write_records_csv(&records, &mut buf)?;
    Ok(buf)
}

fn cmd_experiment(args: &ExperimentArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(demo) = args.demo {
        return cmd_demo(args, demo, out);
    }
    let config = experiment_config(args)?;
    let (summary, csv) = match args.sweep {
        Some(which) => {
            let (param, default_to) = match which {
                SweepArg::N => (SweepParam::Agents, 32),
                SweepArg::M => (SweepParam::Options, 256),
                SweepArg::D => (SweepParam::DomainSize, 16),
            };
            let points = experiments::run_sweep(&config, param, args.from, args.to.unwrap_or(default_to))?;
            let runs: Vec<&ExperimentRun> = points.iter().map(|(_, r)| r).collect();
            let summary: Vec<&SweepPoint> = points.iter().map(|(p, _)| p).collect();
            (to_json(&summary), csv_bytes(&runs)?)
        }
        None => {
            let run = experiments::run_experiment(&config)?;
            let x = match config.agents {
                SizeSpec::Fixed(n) => n,
                SizeSpec::Uniform { .. } => 0,
            };
            (to_json(&SweepPoint::new(x, &run.stats)), csv_bytes(&[&run])?)
        }
    };
    match &args.out {
        Some(path) => write_atomic(path, &csv)?,
        None if args.summary.is_none() => {
            let _ = out.write_all(&csv);
        }
        None => {}
    }
    if let Some(path) = &args.summary {
        write_atomic(path, format!("{summary}\n").as_bytes())?;
    }
    if args.out.is_some() || args.summary.is_some() {
        let _ = writeln!(out, "{summary}");
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a, out, err),
        Command::Audit(a) => cmd_audit(a, out),
        Command::Experiment(a) => {
            let jobs = a.jobs.unwrap_or(0);
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| MechError::input(format!("--jobs: {e}")))?;
            let mut buf = Vec::new();
            let result = pool.install(|| cmd_experiment(a, &mut buf));
            let _ = out.write_all(&buf);
            result
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
