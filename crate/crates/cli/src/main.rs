//! `ants-sim`: batch front end for the ANTS simulator.

mod error;
mod manifest;
mod ranges;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ants_core::engine::{default_cap, Placement, TrialConfig};
use ants_core::experiments::{
    advice_audit, competitive_sweep, estimate_tau, ring_coverage, write_audit_csv, PhiModel, RingSpec, Sweep,
    SweepSpec,
};
use ants_core::protocols::{AgentCount, AgentProgram, OracleSpec};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::CliError;
use crate::manifest::{write_with_manifest, Clock};

const KNOWN_K_NOTE: &str =
    "known-k is a reconstructed O(1)-competitive baseline (the guessing loop fed an exact power-of-two estimate of k)";
const WORST_OF_SET_NOTE: &str =
    "worst-of-set reports the slowest of 8 fixed treasure positions at distance D; a conservative stand-in for an adversary";

#[derive(Parser, Debug)]
#[command(name = "ants-sim", version, about = "Monte-Carlo simulator for collaborative treasure search with advice")]
struct Cli {
    /// Worker threads (0 = available parallelism). Output does not depend on it.
    #[arg(long, global = true, env = "ANTS_SIM_WORKERS", default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the mean hitting time for one (k, D) pair.
    Simulate(SimulateArgs),
    /// Competitive-ratio sweep over a grid of k and D values.
    Sweep(SweepArgs),
    /// Ring coverage diagnostic: how much of B(d_i) \ B(d_{i-1}) 2^i agents cover by time 2T.
    RingCoverage(RingArgs),
    /// Maximum advice length per k.
    AuditAdvice(AuditArgs),
}

#[derive(Args, Debug)]
struct ProtocolArgs {
    /// alg-a, known-k, spiral or walk.
    #[arg(long, value_parser = parse_with::<AgentProgram>)]
    protocol: AgentProgram,

    /// logloglog, two-approx or null. Defaults to the protocol's own oracle.
    #[arg(long, value_parser = parse_with::<OracleSpec>)]
    oracle: Option<OracleSpec>,
}

impl ProtocolArgs {
    fn oracle(&self) -> OracleSpec {
        self.oracle.unwrap_or(self.protocol.default_oracle())
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,

    /// Number of agents (decimal or 2^e).
    #[arg(long, value_parser = parse_with::<AgentCount>)]
    k: AgentCount,

    /// Manhattan distance of the treasure.
    #[arg(long)]
    d: u64,

    #[arg(long, default_value_t = 100)]
    trials: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Per-agent time budget. Default: 64 · max(1, log2 k) · (D + D²/k).
    #[arg(long)]
    cap: Option<u64>,

    /// axis-e, axis-n, diagonal, random-angle or worst-of-set.
    #[arg(long, default_value = "axis-e", value_parser = parse_with::<Placement>)]
    placement: Placement,

    /// Also write the record as CSV (with a manifest beside it).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,

    /// Agent counts, e.g. `2^4..2^12` or `16,64,100`.
    #[arg(long)]
    ks: String,

    /// Treasure distances, e.g. `32,128,512`.
    #[arg(long)]
    ds: String,

    #[arg(long, default_value_t = 200)]
    trials: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long)]
    cap: Option<u64>,

    #[arg(long, default_value = "worst-of-set", value_parser = parse_with::<Placement>)]
    placement: Placement,

    /// Output CSV; printed to stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Write a gnuplot script plotting ratio against log2 k (needs --csv).
    #[arg(long, requires = "csv")]
    gnuplot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RingArgs {
    /// Group size exponent: the run uses k_i = 2^i agents.
    #[arg(long)]
    i: u32,

    /// Time parameter T; agents run for 2T. Must satisfy 2^i <= sqrt(T).
    #[arg(long)]
    t: u64,

    #[arg(long, default_value_t = 200)]
    trials: u64,

    /// fit (slope from --sweep-csv), fit:C, logk or const:C.
    #[arg(long, default_value = "fit")]
    phi: String,

    /// Sweep CSV whose fit row supplies the slope for `--phi fit`.
    #[arg(long)]
    sweep_csv: Option<PathBuf>,

    #[arg(long, default_value = "alg-a", value_parser = parse_with::<AgentProgram>)]
    protocol: AgentProgram,

    #[arg(long, value_parser = parse_with::<OracleSpec>)]
    oracle: Option<OracleSpec>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AuditArgs {
    /// Agent counts, e.g. `2^2..2^64` or `2^256`.
    #[arg(long)]
    ks: String,

    #[arg(long, default_value = "logloglog", value_parser = parse_with::<OracleSpec>)]
    oracle: OracleSpec,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_with<T>(s: &str) -> Result<T, String>
where
    T: std::str::FromStr<Err = ants_core::Error>,
{
    s.parse::<T>().map_err(|e| e.to_string())
}

/// Writes `content` to `path` with a manifest, or to stdout.
fn emit(
    path: Option<&Path>,
    content: &[u8],
    command: &str,
    seed: u64,
    config: serde_json::Value,
    notes: Vec<String>,
    clock: &Clock,
) -> Result<(), CliError> {
    match path {
        Some(p) => write_with_manifest(p, content, command, seed, config, notes, clock),
        None => std::io::stdout().write_all(content).map_err(|e| CliError::io("stdout", e)),
    }
}

fn notes_for(program: AgentProgram, placement: Option<Placement>) -> Vec<String> {
    let mut notes = Vec::new();
    if program == AgentProgram::KnownK {
        notes.push(KNOWN_K_NOTE.to_string());
    }
    if placement == Some(Placement::WorstOfSet) {
        notes.push(WORST_OF_SET_NOTE.to_string());
    }
    notes
}

fn simulate(args: SimulateArgs, workers: usize) -> Result<(), CliError> {
    let clock = Clock::start();
    let program = args.protocol.protocol;
    let k = args.k.as_u64().ok_or_else(|| CliError::Usage(format!("k = {} is too large to simulate", args.k)))?;
    let cfg = TrialConfig {
        k,
        d: args.d,
        placement: args.placement,
        cap: args.cap.unwrap_or_else(|| default_cap(k, args.d)),
        master_seed: args.seed,
        program,
        oracle: args.protocol.oracle(),
        record_per_agent: false,
    };
    cfg.validate()?;
    let rec = estimate_tau(&cfg, args.trials, workers)?;

    let label = if program == AgentProgram::KnownK { " (reconstructed baseline)" } else { "" };
    println!("protocol            {program}{label}");
    println!("oracle              {} ({} advice bits)", cfg.oracle, rec.advice_bits);
    println!("k                   {}", cfg.k);
    println!("D                   {}", cfg.d);
    println!("placement           {}", cfg.placement);
    println!("cap                 {}", cfg.cap);
    println!("trials              {}", rec.trials);
    println!("mean_time           {}", rec.mean_time);
    match rec.mean_time_uncapped {
        Some(m) => println!("mean_time_uncapped  {m}"),
        None => println!("mean_time_uncapped  -"),
    }
    println!("std_err             {}", rec.std_err);
    println!("ratio               {}", rec.ratio);
    println!("capped_fraction     {}", rec.capped_fraction);
    if rec.unreliable() {
        println!("warning: more than half of the trials hit the cap; the mean is unreliable");
    }

    if let Some(path) = &args.csv {
        let sweep = Sweep { records: vec![rec], slope: None };
        let text = sweep.to_csv_string()?;
        let config = serde_json::to_value(&cfg)?;
        let notes = notes_for(program, Some(cfg.placement));
        write_with_manifest(path, text.as_bytes(), "simulate", cfg.master_seed, config, notes, &clock)?;
    }
    Ok(())
}

fn gnuplot_script(csv: &Path, program: AgentProgram) -> String {
    format!(
        "# ratio against log2 k, one curve per D\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'log2 k'\n\
         set ylabel 'mean time / (D + D^2/k)'\n\
         set title '{program}'\n\
         plot for [d in system(\"awk -F, 'NR>1 && $1!=\\\"fit\\\" {{print $4}}' {path} | sort -un\")] \\\n\
         \x20   '{path}' using (strcol(4) eq d && strcol(1) ne 'fit' ? log($3)/log(2) : 1/0):10 with linespoints title 'D='.d\n",
        path = csv.display()
    )
}

fn sweep(args: SweepArgs, workers: usize) -> Result<(), CliError> {
    let clock = Clock::start();
    let program = args.protocol.protocol;
    let spec = SweepSpec {
        program,
        oracle: args.protocol.oracle(),
        placement: args.placement,
        ks: ranges::parse_integers(&args.ks)?,
        ds: ranges::parse_integers(&args.ds)?,
        trials: args.trials,
        master_seed: args.seed,
        cap: args.cap,
    };
    let result = competitive_sweep(&spec, workers)?;
    let text = result.to_csv_string()?;
    let config = serde_json::to_value(&spec)?;
    emit(args.csv.as_deref(), text.as_bytes(), "sweep", spec.master_seed, config, notes_for(program, Some(spec.placement)), &clock)?;
    if let (Some(script), Some(csv)) = (&args.gnuplot, &args.csv) {
        std::fs::write(script, gnuplot_script(csv, program)).map_err(|e| CliError::io(script.display().to_string(), e))?;
    }
    if let Some(path) = &args.csv {
        let unreliable = result.records.iter().filter(|r| r.unreliable()).count();
        eprintln!("wrote {} records to {}", result.records.len(), path.display());
        if unreliable > 0 {
            eprintln!("warning: {unreliable} cells had more than half of their trials capped");
        }
    }
    Ok(())
}

fn resolve_phi(args: &RingArgs) -> Result<PhiModel, CliError> {
    if args.phi != "fit" {
        return Ok(args.phi.parse()?);
    }
    let path = args
        .sweep_csv
        .as_ref()
        .ok_or_else(|| CliError::Usage("--phi fit needs --sweep-csv (or use fit:C)".into()))?;
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    let sweep = Sweep::read_csv(file)?;
    let slope = sweep
        .slope
        .ok_or_else(|| CliError::Usage(format!("{} has no fitted slope", path.display())))?;
    Ok(PhiModel::Fitted { slope })
}

fn ring(args: RingArgs, workers: usize) -> Result<(), CliError> {
    let clock = Clock::start();
    let phi = resolve_phi(&args)?;
    let spec = RingSpec {
        program: args.protocol,
        oracle: args.oracle.unwrap_or(args.protocol.default_oracle()),
        i: args.i,
        t: args.t,
        trials: args.trials,
        master_seed: args.seed,
    };
    let rec = ring_coverage(&spec, &phi, workers)?;
    let mut buf = Vec::new();
    rec.write_csv(&mut buf)?;
    let config = json!({ "spec": spec, "phi": phi.to_string() });
    emit(args.csv.as_deref(), &buf, "ring-coverage", spec.master_seed, config, notes_for(spec.program, None), &clock)
}

fn audit(args: AuditArgs) -> Result<(), CliError> {
    let clock = Clock::start();
    let ks = ranges::parse_counts(&args.ks)?;
    let rows = advice_audit(&args.oracle, &ks, args.seed)?;
    let mut buf = Vec::new();
    write_audit_csv(&rows, &mut buf)?;
    let config = json!({ "oracle": args.oracle, "ks": args.ks });
    emit(args.csv.as_deref(), &buf, "audit-advice", args.seed, config, Vec::new(), &clock)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => simulate(a, cli.workers),
        Command::Sweep(a) => sweep(a, cli.workers),
        Command::RingCoverage(a) => ring(a, cli.workers),
        Command::AuditAdvice(a) => audit(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
