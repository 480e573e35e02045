//! Subcommands, their flags, and how results are written.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lmax_core::evolve::{TraceWriter, DEFAULT_GLOBAL_EXPONENT};
use lmax_core::io::{emit_instance, InstanceFormat};
use lmax_core::jackson::DEFAULT_ENUMERATION_CAP;
use lmax_core::oracle::{
    absorption_experiment, enum_ptas_with, exact_optimum_with, hitting_experiment, AbsorptionConfig, PlacementChoice,
    DEFAULT_EXACT_CAP,
};
use lmax_core::{run_ea, EaConfig, Epsilon, Init, Placement, Schedule, StepTrace, Time};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bench::{bench_row, row_seed, rows_to_csv, run_bench, summary_table, BenchSettings};
use crate::error::{CliError, Result};
use crate::gen::{generate, GenSpec};
use crate::manifest::{InstanceRecord, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "lmax", version, about = "Single-machine scheduling with release and delivery times")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Evaluate one schedule.
    Eval(EvalArgs),
    /// Exact optimum by branch and bound.
    Exact(ExactArgs),
    /// Best greedy Jackson schedule over all placements of the long jobs.
    EnumPtas(PtasArgs),
    /// Run the hybrid 2+2 EA.
    Ea(EaArgs),
    /// Local-only absorption experiment.
    Absorb(AbsorbArgs),
    /// Time for the EA to first reach a target placement.
    Hit(HitArgs),
    /// Seeded EA replicas judged against the exact optimum.
    Bench(BenchArgs),
    /// Re-run the command recorded in a manifest or result file.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// JSON result object with an embedded manifest.
    #[default]
    Object,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Write to this file instead of stdout. CSV output gets its manifest
    /// next to it as `<out>.manifest`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitArg {
    Random,
    Identity,
}

impl From<InitArg> for Init {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::Random => Init::Random,
            InitArg::Identity => Init::Identity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct EaTuning {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Stop after this many steps if the theoretical budget is larger.
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Multiplier of the theoretical budget.
    #[arg(long, default_value_t = 1)]
    pub lambda: u64,
    /// Global mutation happens with probability n^-G.
    #[arg(long, default_value_t = DEFAULT_GLOBAL_EXPONENT)]
    pub global_exponent: u32,
    #[arg(long, value_enum, default_value_t = InitArg::Random)]
    pub init: InitArg,
}

impl EaTuning {
    fn config(&self, eps: Epsilon) -> EaConfig {
        let mut cfg = EaConfig::new(eps, self.seed)
            .with_lambda(self.lambda)
            .with_global_exponent(self.global_exponent)
            .with_init(self.init.into());
        cfg.max_steps = self.max_steps;
        cfg
    }
}

fn parse_eps(s: &str) -> std::result::Result<Epsilon, String> {
    s.parse().map_err(|e: lmax_core::Error| e.to_string())
}

fn parse_placement(s: &str) -> std::result::Result<Placement, String> {
    serde_json::from_str(s).map_err(|e| format!("expected 1-based pairs like [[1,1],[3,2]]: {e}"))
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    /// Largest release time (default 3n).
    #[arg(long)]
    pub r_max: Option<Time>,
    #[arg(long, default_value_t = 10)]
    pub p_max: Time,
    /// Largest delivery time (default 10n).
    #[arg(long)]
    pub q_max: Option<Time>,
    /// Allow repeated delivery times.
    #[arg(long)]
    pub allow_ties: bool,
    /// Fail instead of spreading delivery times when they cannot be drawn distinct.
    #[arg(long)]
    pub no_fallback: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

impl GenArgs {
    pub fn spec(&self) -> GenSpec {
        let base = GenSpec::new(self.n, self.seed);
        GenSpec {
            r_max: self.r_max.unwrap_or(base.r_max),
            p_max: self.p_max,
            q_max: self.q_max.unwrap_or(base.q_max),
            enforce_generic: !self.allow_ties,
            fallback: !self.no_fallback,
            ..base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Comma-separated 1-based job indices, e.g. 1,3,2.
    #[arg(long)]
    pub schedule: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct ExactArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Largest n searched exhaustively.
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    pub cap: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct PtasArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_parser = parse_eps)]
    pub eps: Epsilon,
    /// Largest number of placements enumerated.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u128,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct EaArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_parser = parse_eps)]
    pub eps: Epsilon,
    #[command(flatten)]
    pub tuning: EaTuning,
    /// Record the first step at which the best lateness is at most this.
    #[arg(long)]
    pub target: Option<Time>,
    /// Per-step CSV trace. Not rewritten on replay.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct AbsorbArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_parser = parse_eps)]
    pub eps: Epsilon,
    #[arg(long, default_value_t = 200)]
    pub runs: usize,
    /// Local steps per run (default n^4).
    #[arg(long)]
    pub step_cap: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Placement as 1-based [position, job] pairs (default: best valid placement).
    #[arg(long, value_parser = parse_placement)]
    pub placement: Option<Placement>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct HitArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_parser = parse_eps)]
    pub eps: Epsilon,
    #[arg(long, default_value_t = 50)]
    pub runs: usize,
    /// Placement as 1-based [position, job] pairs (default: the enum-ptas placement).
    #[arg(long, value_parser = parse_placement)]
    pub target_placement: Option<Placement>,
    #[command(flatten)]
    pub tuning: EaTuning,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct BenchArgs {
    /// Instance file or glob pattern.
    #[arg(long)]
    pub instances: String,
    /// Comma-separated list, e.g. 1,1/2.
    #[arg(long, value_parser = parse_eps, value_delimiter = ',', required = true)]
    pub eps: Vec<Epsilon>,
    #[arg(long, default_value_t = 100)]
    pub replicas: u64,
    #[command(flatten)]
    pub tuning: EaTuning,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl BenchArgs {
    pub fn settings(&self) -> BenchSettings {
        BenchSettings {
            replicas: self.replicas,
            max_steps: self.tuning.max_steps,
            lambda: self.tuning.lambda,
            global_exponent: self.tuning.global_exponent,
            init: self.tuning.init.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest file, or a result object that embeds one.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Re-run only this 0-based bench row and print it as CSV.
    #[arg(long)]
    pub row: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Gen(a) => Some(a.seed),
            Command::Ea(a) => Some(a.tuning.seed),
            Command::Absorb(a) => Some(a.seed),
            Command::Hit(a) => Some(a.tuning.seed),
            Command::Bench(a) => Some(a.tuning.seed),
            Command::Eval(_) | Command::Exact(_) | Command::EnumPtas(_) | Command::Replay(_) => None,
        }
    }

    fn output(&self) -> OutputArgs {
        match self {
            Command::Gen(a) => OutputArgs { out: a.out.clone(), format: a.format },
            Command::Eval(a) => a.output.clone(),
            Command::Exact(a) => a.output.clone(),
            Command::EnumPtas(a) => a.output.clone(),
            Command::Ea(a) => a.output.clone(),
            Command::Absorb(a) => a.output.clone(),
            Command::Hit(a) => a.output.clone(),
            Command::Bench(a) => a.output.clone(),
            Command::Replay(a) => OutputArgs { out: a.out.clone(), format: Format::Object },
        }
    }

    fn load_instances(&self) -> Result<Vec<InstanceRecord>> {
        let single = |p: &PathBuf| Ok(vec![InstanceRecord::load(p)?]);
        match self {
            Command::Gen(_) | Command::Replay(_) => Ok(Vec::new()),
            Command::Eval(a) => single(&a.instance),
            Command::Exact(a) => single(&a.instance),
            Command::EnumPtas(a) => single(&a.instance),
            Command::Ea(a) => single(&a.instance),
            Command::Absorb(a) => single(&a.instance),
            Command::Hit(a) => single(&a.instance),
            Command::Bench(a) => expand_instances(&a.instances)?.iter().map(InstanceRecord::load).collect(),
        }
    }
}

/// Matching paths in sorted order.
pub fn expand_instances(pattern: &str) -> Result<Vec<PathBuf>> {
    let mut paths = glob::glob(pattern)
        .map_err(|e| CliError::Usage(format!("bad pattern {pattern:?}: {e}")))?
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Usage(format!("no instance files match {pattern:?}")));
    }
    Ok(paths)
}

/// What a command produced, in both output formats.
pub struct Report {
    pub object: serde_json::Value,
    pub csv: String,
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("CSV output is UTF-8")
}

#[derive(Serialize)]
struct EvalRow {
    position: usize,
    job: usize,
    start: Time,
    completion: Time,
    delivered: Time,
}

#[derive(Serialize)]
struct RunRow {
    run: usize,
    seed: u64,
    outcome: &'static str,
    steps: Option<u64>,
}

/// Runs a solver or experiment command on already loaded instances.
pub fn execute(command: &Command, instances: &[InstanceRecord]) -> Result<Report> {
    let first = || &instances[0].instance;
    match command {
        Command::Gen(_) | Command::Replay(_) => unreachable!("handled by run"),
        Command::Eval(a) => {
            let schedule = Schedule::parse_one_based(&a.schedule)?;
            let report = first().evaluate(&schedule)?;
            let rows: Vec<EvalRow> = (0..schedule.len())
                .map(|i| EvalRow {
                    position: i + 1,
                    job: schedule.order()[i] + 1,
                    start: report.starts[i],
                    completion: report.completions[i],
                    delivered: report.delivered[i],
                })
                .collect();
            let csv = to_csv(&rows);
            let object = json!({ "schedule": schedule, "lateness": report.max_lateness, "positions": rows });
            Ok(Report { object, csv })
        }
        Command::Exact(a) => {
            let r = exact_optimum_with(first(), a.cap, true)?;
            let csv = format!("optimum,witness,explored\n{}", to_csv([(r.optimum, r.witness.to_string(), r.explored)]));
            Ok(Report { object: serde_json::to_value(&r).expect("serializable"), csv })
        }
        Command::EnumPtas(a) => {
            let r = enum_ptas_with(first(), a.eps, a.cap)?;
            let csv = format!(
                "lateness,schedule,phi,valid,placements_total,placements_valid,best_valid_lateness\n{}",
                to_csv([(
                    r.lateness,
                    r.schedule.to_string(),
                    serde_json::to_string(&r.placement).expect("serializable"),
                    r.valid,
                    r.placements_total.to_string(),
                    r.placements_valid.to_string(),
                    r.best_valid.lateness,
                )])
            );
            let mut object = serde_json::to_value(&r).expect("serializable");
            object["phi"] = object["placement"].clone();
            Ok(Report { object, csv })
        }
        Command::Ea(a) => {
            let cfg = a.tuning.config(a.eps);
            let r = match &a.trace {
                Some(path) => {
                    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
                    let mut writer = TraceWriter::new(BufWriter::new(file));
                    let mut sink = |t: &StepTrace| writer.write(t);
                    let r = run_ea(first(), &cfg, a.target, Some(&mut sink))?;
                    writer.finish()?;
                    r
                }
                None => run_ea(first(), &cfg, a.target, None)?,
            };
            let csv = format!(
                "lateness,schedule,steps,first_success_step,seed\n{}",
                to_csv([(r.lateness, r.schedule.to_string(), r.steps, r.first_success_step, r.seed)])
            );
            Ok(Report { object: serde_json::to_value(&r).expect("serializable"), csv })
        }
        Command::Absorb(a) => {
            let cfg = AbsorptionConfig {
                eps: a.eps,
                runs: a.runs,
                step_cap: a.step_cap,
                seed: a.seed,
                placement: a.placement.clone().map_or(PlacementChoice::BestPtas, PlacementChoice::Fixed),
            };
            let stats = absorption_experiment(first(), &cfg)?;
            let csv = to_csv(stats.records.iter().map(|r| RunRow {
                run: r.run,
                seed: r.seed,
                outcome: if r.absorbed { "absorbed" } else { "capped" },
                steps: Some(r.steps),
            }));
            Ok(Report { object: serde_json::to_value(&stats).expect("serializable"), csv })
        }
        Command::Hit(a) => {
            let cfg = a.tuning.config(a.eps);
            let target = match &a.target_placement {
                Some(p) => p.clone(),
                None => enum_ptas_with(first(), a.eps, DEFAULT_ENUMERATION_CAP)?.placement,
            };
            let stats = hitting_experiment(first(), &cfg, a.runs, &target)?;
            let csv = to_csv(stats.records.iter().map(|r| RunRow {
                run: r.run,
                seed: r.seed,
                outcome: if r.first_hit_step.is_some() { "hit" } else { "miss" },
                steps: r.first_hit_step,
            }));
            Ok(Report { object: serde_json::to_value(&stats).expect("serializable"), csv })
        }
        Command::Bench(a) => {
            let rows = run_bench(instances, &a.eps, a.tuning.seed, &a.settings())?;
            eprint!("{}", summary_table(&rows));
            Ok(Report { object: json!({ "rows": rows }), csv: rows_to_csv(&rows) })
        }
    }
}

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

/// Writes `text` to the output. JSON result objects embed their manifest;
/// anything else gets a sidecar manifest when written to a file.
fn emit(manifest: &RunManifest, text: &str, embedded: bool, out: Option<&Path>) -> Result<()> {
    if let (Some(path), false) = (out, embedded) {
        write_text(Some(&manifest_path(path)), &pretty(manifest))?;
    }
    write_text(out, text)
}

fn emit_report(manifest: RunManifest, report: Report, output: &OutputArgs) -> Result<()> {
    match output.format {
        Format::Object => {
            let text = pretty(&json!({ "manifest": manifest, "result": report.object }));
            emit(&manifest, &text, true, output.out.as_deref())
        }
        Format::Csv => emit(&manifest, &report.csv, false, output.out.as_deref()),
    }
}

fn generate_text(a: &GenArgs) -> Result<String> {
    let format = match a.format {
        Format::Object => InstanceFormat::Object,
        Format::Csv => InstanceFormat::Csv,
    };
    Ok(emit_instance(&generate(&a.spec())?, format))
}

pub fn run(command: Command) -> Result<()> {
    let output = command.output();
    match command {
        Command::Replay(args) => replay(&args),
        Command::Gen(ref a) => {
            let text = generate_text(a)?;
            emit(&RunManifest::new(command.clone(), Vec::new()), &text, false, output.out.as_deref())
        }
        command => {
            let instances = command.load_instances()?;
            let report = execute(&command, &instances)?;
            emit_report(RunManifest::new(command, instances), report, &output)
        }
    }
}

/// Re-runs a recorded command from the manifest's inline instances and
/// writes to the replay's own `--out` (stdout by default). Traces are not
/// rewritten.
pub fn replay(args: &ReplayArgs) -> Result<()> {
    let recorded = RunManifest::read(&args.manifest)?;
    let command = recorded.command;
    if let Some(row) = args.row {
        let Command::Bench(bench) = &command else {
            return Err(CliError::Manifest("--row only applies to bench manifests".into()));
        };
        let n_eps = bench.eps.len();
        let record = recorded
            .instances
            .get(row / n_eps)
            .ok_or_else(|| CliError::Manifest(format!("row {row} is out of range")))?;
        let settings = bench.settings();
        let seed = row_seed(bench.tuning.seed, row, settings.replicas);
        let r = bench_row(&record.path, &record.instance, bench.eps[row % n_eps], seed, &settings)?;
        return write_text(args.out.as_deref(), &rows_to_csv(&[r]));
    }
    let mut output = command.output();
    output.out = args.out.clone();
    match &command {
        Command::Replay(_) => Err(CliError::Manifest("a replay cannot be replayed".into())),
        Command::Gen(a) => write_text(output.out.as_deref(), &generate_text(a)?),
        _ => {
            let mut untraced = command.clone();
            if let Command::Ea(a) = &mut untraced {
                a.trace = None;
            }
            let report = execute(&untraced, &recorded.instances)?;
            emit_report(RunManifest::new(command, recorded.instances), report, &output)
        }
    }
}
