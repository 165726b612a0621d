//! Command-line front end: one subcommand per scenario, tables or JSON on stdout.

mod render;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bell::{self, AngleQuad, BellReport, ErasedVsKept, ScanResult};
use crate::bohm::{self, CouplingKind, FoliationReport, MonteCarloReport, TrajectorySet, TransportCoupling};
use crate::epistemic::{self, AxiomSet, TraceOptions, TraceReport};
use crate::hardy::{context_table, MeasurementContext};
use crate::memory::{self, DefiniteOutcomeFlag, Friend, ProtocolSummary};
use crate::qcore::OutcomeDistribution;

const TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Table,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum FoliationChoice {
    #[value(name = "F")]
    F,
    #[value(name = "Fprime", alias = "F'")]
    #[serde(rename = "Fprime")]
    FPrime,
    #[value(name = "both")]
    #[serde(rename = "both")]
    Both,
}

impl FoliationChoice {
    fn foliations(self) -> Vec<bohm::Foliation> {
        match self {
            FoliationChoice::F => vec![bohm::Foliation::F],
            FoliationChoice::FPrime => vec![bohm::Foliation::FPrime],
            FoliationChoice::Both => bohm::Foliation::both().to_vec(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hardy-lab", version, about = "Hardy-state contexts, Bohmian paths, friends' memories and CHSH bounds")]
pub struct Cli {
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for Monte-Carlo sampling; required together with --samples.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of sampled trajectories (bohm only).
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    /// JSON scenario file; command-line values take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Born tables of the four measurement contexts.
    Contexts,
    /// Hidden-variable trajectories for one or both foliations.
    Bohm(BohmArgs),
    /// The agents' reasoning trace.
    Agents(AgentsArgs),
    /// Erased versus kept memory records.
    Memory(MemoryArgs),
    /// CHSH values for the singlet and the local model.
    Chsh(ChshArgs),
}

#[derive(Debug, Args)]
pub struct BohmArgs {
    #[arg(long, value_enum)]
    pub foliation: Option<FoliationChoice>,
    #[arg(long)]
    pub coupling: Option<CouplingKind>,
}

#[derive(Debug, Args)]
pub struct AgentsArgs {
    /// Disallow composing statements made in different contexts.
    #[arg(long)]
    pub forbid_counterfactual: bool,
    /// Switch an axiom off (Q, C or S); repeatable.
    #[arg(long = "without", value_name = "AXIOM")]
    pub without: Vec<String>,
}

#[derive(Debug, Args)]
pub struct MemoryArgs {
    /// Friends whose records are kept (F, Fbar); repeatable or comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub kept: Vec<Friend>,
}

#[derive(Debug, Args)]
pub struct ChshArgs {
    /// Four angles in radians: a,a',b,b'.
    #[arg(long, allow_hyphen_values = true)]
    pub quad: Option<AngleQuad>,
    /// Maximize S over the angle grid for both models.
    #[arg(long)]
    pub scan: bool,
    /// Compare erased and kept friend records on the singlet.
    #[arg(long)]
    pub erased_vs_kept: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Contexts,
    Bohm,
    Agents,
    Memory,
    Chsh,
}

/// Everything a run needs, loadable from a JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub foliation: Option<FoliationChoice>,
    #[serde(default)]
    pub coupling: Option<CouplingKind>,
    #[serde(default)]
    pub erased: Option<Vec<Friend>>,
    #[serde(default)]
    pub kept: Option<Vec<Friend>>,
    #[serde(default)]
    pub quad: Option<AngleQuad>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<u64>,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        ScenarioConfig {
            scenario,
            foliation: None,
            coupling: None,
            erased: None,
            kept: None,
            quad: None,
            format: None,
            seed: None,
            samples: None,
        }
    }

    /// Seed and sample count come together, and sampling is a bohm feature.
    pub fn validate(&self) -> Result<(), String> {
        match (self.seed, self.samples) {
            (Some(_), None) => return Err("--seed needs --samples".into()),
            (None, Some(_)) => return Err("--samples needs --seed".into()),
            (Some(_), Some(0)) => return Err("--samples must be positive".into()),
            _ => {}
        }
        if self.samples.is_some() && self.scenario != Scenario::Bohm {
            return Err("--samples only applies to bohm".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BohmOutput {
    pub sets: Vec<TrajectorySet>,
    pub comparison: Option<FoliationReport>,
    pub monte_carlo: Vec<MonteCarloReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryOutput {
    pub erased: ProtocolSummary,
    pub flag: DefiniteOutcomeFlag,
    pub compared: ProtocolSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshOutput {
    #[serde(flatten)]
    pub report: BellReport,
    pub quantum_scan: Option<ScanResult>,
    pub erased_vs_kept: Option<ErasedVsKept>,
}

/// Why a run stopped.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Invariant(String),
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Invariant(e.to_string())
    }
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(Failure::Invariant(what()))
    }
}

fn load_config(path: &PathBuf) -> Result<ScenarioConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Merges the command line over the optional config file.
fn resolve(cli: Cli) -> Result<(ScenarioConfig, AgentsArgs, bool, bool), Failure> {
    let file = cli.config.as_ref().map(load_config).transpose()?;
    let scenario = match (&cli.command, &file) {
        (Some(Command::Contexts), _) => Scenario::Contexts,
        (Some(Command::Bohm(_)), _) => Scenario::Bohm,
        (Some(Command::Agents(_)), _) => Scenario::Agents,
        (Some(Command::Memory(_)), _) => Scenario::Memory,
        (Some(Command::Chsh(_)), _) => Scenario::Chsh,
        (None, Some(f)) => f.scenario,
        (None, None) => return Err(Failure::Usage("a subcommand or --config is required".into())),
    };
    let mut config = match file {
        Some(f) if f.scenario == scenario => f,
        _ => ScenarioConfig::new(scenario),
    };
    config.format = cli.format.or(config.format);
    config.seed = cli.seed.or(config.seed);
    config.samples = cli.samples.or(config.samples);
    let mut agents = AgentsArgs { forbid_counterfactual: false, without: Vec::new() };
    let (mut scan, mut erased_vs_kept) = (false, false);
    match cli.command {
        Some(Command::Bohm(a)) => {
            config.foliation = a.foliation.or(config.foliation);
            config.coupling = a.coupling.or(config.coupling);
        }
        Some(Command::Agents(a)) => agents = a,
        Some(Command::Memory(a)) if !a.kept.is_empty() => config.kept = Some(a.kept),
        Some(Command::Chsh(a)) => {
            config.quad = a.quad.or(config.quad);
            scan = a.scan;
            erased_vs_kept = a.erased_vs_kept;
        }
        _ => {}
    }
    config.validate().map_err(Failure::Usage)?;
    Ok((config, agents, scan, erased_vs_kept))
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Invariant(e.to_string()))?;
    write_text(out, &format!("{text}\n"))
}

fn write_text(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    match out.write_all(text.as_bytes()) {
        // a closed pipe (`| head`) is not our failure
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other.map_err(|e| Failure::Invariant(e.to_string())),
    }
}

fn cmd_contexts(format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let tables: Vec<(MeasurementContext, OutcomeDistribution)> =
        MeasurementContext::all().into_iter().map(|c| (c, context_table(c))).collect();
    for (c, t) in &tables {
        check((t.total() - 1.0).abs() < TOLERANCE, || format!("{c} table sums to {}", t.total()))?;
    }
    match format {
        Format::Json => {
            let map: std::collections::BTreeMap<String, &OutcomeDistribution> =
                tables.iter().map(|(c, t)| (c.to_string(), t)).collect();
            emit_json(out, &map)
        }
        Format::Table => write_text(out, &render::contexts(&tables)),
    }
}

fn cmd_bohm(config: &ScenarioConfig, out: &mut dyn Write) -> Result<(), Failure> {
    let choice = config.foliation.unwrap_or(FoliationChoice::Both);
    let coupling = TransportCoupling::new(config.coupling.unwrap_or(CouplingKind::Monotone));
    let born = context_table(MeasurementContext::WBAR_W);
    let mut sets = Vec::new();
    for foliation in choice.foliations() {
        let set = bohm::evolve(foliation, coupling)?;
        let gap = set.final_marginal().max_abs_diff(&born).unwrap_or(f64::INFINITY);
        check(gap < TOLERANCE, || format!("{foliation}: final marginal off Born table by {gap}"))?;
        sets.push(set);
    }
    let comparison = match choice {
        FoliationChoice::Both => Some(bohm::compare_foliations(coupling)?),
        _ => None,
    };
    let mut monte_carlo = Vec::new();
    if let (Some(seed), Some(runs)) = (config.seed, config.samples) {
        for set in &sets {
            monte_carlo.push(bohm::monte_carlo_check(set, runs, seed)?);
        }
    }
    let output = BohmOutput { sets, comparison, monte_carlo };
    match config.format.unwrap_or_default() {
        Format::Json => emit_json(out, &output),
        Format::Table => write_text(out, &render::bohm(&output)?),
    }
}

fn parse_axioms(without: &[String]) -> Result<AxiomSet, Failure> {
    let mut axioms = AxiomSet::all();
    for name in without {
        match name.as_str() {
            "Q" => axioms.Q = false,
            "C" => axioms.C = false,
            "S" => axioms.S = false,
            other => return Err(Failure::Usage(format!("unknown axiom '{other}' (expected Q, C or S)"))),
        }
    }
    Ok(axioms)
}

fn cmd_agents(format: Format, args: &AgentsArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let axioms = parse_axioms(&args.without)?;
    let options = TraceOptions { counterfactual_composition: !args.forbid_counterfactual, admitted: None };
    let report: TraceReport = epistemic::run_trace_with(axioms, &options)?;
    if let Some(c) = &report.contradiction {
        check(c.certificate.is_valid(), || "contradiction witness is not a valid certificate".into())?;
    }
    match format {
        Format::Json => emit_json(out, &report),
        Format::Table => write_text(out, &render::agents(&report)),
    }
}

fn cmd_memory(config: &ScenarioConfig, out: &mut dyn Write) -> Result<(), Failure> {
    let state = crate::hardy::hardy_state();
    let everyone = [Friend::Fbar, Friend::F];
    let erased_by = config.erased.clone().unwrap_or_else(|| everyone.to_vec());
    let kept = config.kept.clone().unwrap_or_default();
    let erased_run = memory::run_protocol(&state, &erased_by, &[])?;
    let flag = memory::definite_outcome_flag(&erased_run)?;
    for (ctx, table) in erased_run.hardy_tables()? {
        let gap = table.max_abs_diff(&context_table(ctx)).unwrap_or(f64::INFINITY);
        check(gap < TOLERANCE, || format!("erasure changed the {ctx} table by {gap}"))?;
    }
    let still_erased: Vec<Friend> = erased_by.iter().filter(|f| !kept.contains(f)).copied().collect();
    let compared = memory::run_protocol(&state, &still_erased, &kept)?;
    let output = MemoryOutput { erased: erased_run.summary()?, flag, compared: compared.summary()? };
    match config.format.unwrap_or_default() {
        Format::Json => emit_json(out, &output),
        Format::Table => write_text(out, &render::memory(&output)),
    }
}

fn cmd_chsh(config: &ScenarioConfig, scan: bool, erased_vs_kept: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let quad = config.quad.unwrap_or_else(AngleQuad::tsirelson);
    let report = bell::bell_report(quad);
    let tsirelson = 2.0 * std::f64::consts::SQRT_2;
    check(report.s_quantum <= tsirelson + 1e-9, || format!("S_quantum = {} above 2√2", report.s_quantum))?;
    check(report.s_lhv_max <= 2.0 + 1e-9, || format!("S_lhv_max = {} above 2", report.s_lhv_max))?;
    let quantum_scan = scan.then(|| bell::scan_chsh(bell::quantum_correlation, bell::GRID_RESOLUTION));
    if let Some(s) = &quantum_scan {
        check(s.max <= tsirelson + 1e-9, || format!("quantum scan found S = {} above 2√2", s.max))?;
    }
    let evk = if erased_vs_kept { Some(bell::erased_vs_kept_chsh()?) } else { None };
    if let Some(r) = &evk {
        check(r.kept_vs_lhv_gap < TOLERANCE, || format!("kept records deviate from the local model by {}", r.kept_vs_lhv_gap))?;
    }
    let output = ChshOutput { report, quantum_scan, erased_vs_kept: evk };
    match config.format.unwrap_or_default() {
        Format::Json => emit_json(out, &output),
        Format::Table => write_text(out, &render::chsh(&output)),
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let (config, agents, scan, erased_vs_kept) = resolve(cli)?;
    let format = config.format.unwrap_or_default();
    match config.scenario {
        Scenario::Contexts => cmd_contexts(format, out),
        Scenario::Bohm => cmd_bohm(&config, out),
        Scenario::Agents => cmd_agents(format, &agents, out),
        Scenario::Memory => cmd_memory(&config, out),
        Scenario::Chsh => cmd_chsh(&config, scan, erased_vs_kept, out),
    }
}

/// Runs the command line `args` (program name first) and returns the exit code:
/// 0 on success, 2 on a usage error, 1 when a computed invariant fails.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Invariant(msg)) => {
            let _ = writeln!(err, "invariant violated: {msg}");
            1
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
