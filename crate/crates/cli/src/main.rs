use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adaptive_ftec::build_hex_color_code;
use adaptive_ftec::diffvec::{find_usable, DifferenceVector};
use adaptive_ftec::harness::{
    estimate_pseudothreshold, estimate_strata, sample_fault_pairs, single_fault_scenarios, sweep_single_faults,
    DirectCurve, Experiment, ExperimentConfig, ExperimentStats, FaultSweepReport, OutputFormat, Pseudothreshold,
    ScenarioCheck, StratifiedPlan,
};
use adaptive_ftec::worstcase::{oracle_sweep, oracle_usable_runs, verify_round_bounds, Regime};
use adaptive_ftec::DecoderKind;
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

const VERIFICATION_FAILED: u8 = 2;
const USAGE_ERROR: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "ftec", version, about = "Adaptive Shor-style error correction on hexagonal color codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo logical error rates and round counts.
    Simulate(SimulateArgs),
    /// Rate where the logical error rate crosses 2p/3.
    Pseudothreshold(PseudothresholdArgs),
    /// Maximum round counts from closed forms, exhaustive search and the reference table.
    VerifyBounds(VerifyBoundsArgs),
    /// Usable-run detection against the brute-force fault oracle.
    OracleCheck(OracleCheckArgs),
    /// Generators and logical operators of a color code as JSON.
    DumpCode(DumpCodeArgs),
    /// Deterministic fault injection.
    FaultEnum(FaultEnumArgs),
}

#[derive(Args, Debug, Clone)]
struct ExperimentArgs {
    /// JSON experiment configuration; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_parser = parse_decoder)]
    decoder: Option<DecoderKind>,
    #[arg(long)]
    css_two_stage: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for cached lookup tables.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Physical error rates, comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    stop_after_errors: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Method {
    /// Sample failure rates conditioned on the number of faults.
    #[default]
    Stratified,
    /// Fresh direct Monte Carlo at every probe.
    Direct,
}

#[derive(Args, Debug)]
struct PseudothresholdArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[arg(long, default_value_t = 1e-5)]
    p_low: f64,
    #[arg(long, default_value_t = 5e-3)]
    p_high: f64,
    /// Total shots for the stratified method, shots per probe for the direct one.
    #[arg(long, default_value_t = 1_000_000)]
    shots: u64,
    #[arg(long, value_enum, default_value_t = Method::Stratified)]
    method: Method,
    #[arg(long, default_value_t = 30)]
    iterations: usize,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyBoundsArgs {
    #[arg(long, default_value_t = 5)]
    t_max: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct OracleCheckArgs {
    #[arg(long, default_value_t = 10)]
    max_len: usize,
    #[arg(long, default_value_t = 3)]
    t_max: usize,
    /// Check a single difference vector instead of sweeping.
    #[arg(long, requires = "t")]
    delta: Option<String>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct DumpCodeArgs {
    #[arg(long, default_value_t = 3)]
    d: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FaultMode {
    Single,
    Pairs,
}

#[derive(Args, Debug)]
struct FaultEnumArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[arg(long, value_enum, default_value_t = FaultMode::Single)]
    mode: FaultMode,
    /// Number of sampled pairs in pair mode.
    #[arg(long, default_value_t = 100_000)]
    pairs: u64,
    #[arg(long)]
    json: bool,
}

fn parse_decoder(s: &str) -> Result<DecoderKind, String> {
    s.parse::<DecoderKind>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_workers() {
        eprintln!("error: {e:#}");
        return ExitCode::from(USAGE_ERROR);
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(VERIFICATION_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}

fn configure_workers() -> Result<()> {
    if let Ok(v) = std::env::var("FTEC_WORKERS") {
        let n: usize = v.parse().with_context(|| format!("FTEC_WORKERS={v} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

/// `Ok(false)` reports a failed verification.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Pseudothreshold(a) => pseudothreshold(a),
        Command::VerifyBounds(a) => verify_bounds(a),
        Command::OracleCheck(a) => oracle_check(a),
        Command::DumpCode(a) => dump_code(a),
        Command::FaultEnum(a) => fault_enum(a),
    }
}

fn load_config(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("malformed config {}", path.display()))?
        }
        None => ExperimentConfig::new(3, DecoderKind::Strong, Vec::new(), 10_000, 0),
    };
    if let Some(d) = args.d {
        config.d = d;
    }
    if let Some(k) = args.decoder {
        config.decoder = k;
    }
    config.css_two_stage |= args.css_two_stage;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(dir) = &args.cache_dir {
        config.cache_dir = Some(dir.clone());
    }
    Ok(config)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn simulate(a: SimulateArgs) -> Result<bool> {
    let mut config = load_config(&a.experiment)?;
    if !a.p.is_empty() {
        config.p_values = a.p.clone();
    }
    if let Some(shots) = a.shots {
        config.shots = shots;
    }
    if a.stop_after_errors.is_some() {
        config.stop_after_errors = a.stop_after_errors;
    }
    if let Some(f) = a.format {
        config.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    if a.output.is_some() {
        config.output = a.output.clone();
    }
    if config.p_values.is_empty() {
        bail!("no error rates given; pass --p or p_values in the config");
    }
    let experiment = Experiment::new(config.clone())?;
    let results = experiment.run_all()?;
    let out = open_output(config.output.as_deref())?;
    match config.format {
        OutputFormat::Csv => write_csv(out, &config, &results)?,
        OutputFormat::Json => write_json(out, &json!({ "seed": config.seed, "config": config, "results": results }))?,
    }
    Ok(true)
}

fn write_csv(mut out: Box<dyn Write>, config: &ExperimentConfig, results: &[ExperimentStats]) -> Result<()> {
    writeln!(
        out,
        "# seed={} d={} decoder={} shots={}",
        config.seed,
        config.d,
        config.decoder_label(),
        config.shots
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ExperimentStats::CSV_HEADER)?;
    for r in results {
        w.write_record(r.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(mut out: Box<dyn Write>, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn pseudothreshold(a: PseudothresholdArgs) -> Result<bool> {
    let mut config = load_config(&a.experiment)?;
    config.shots = a.shots;
    let experiment = Experiment::new(config.clone())?;
    let result: Pseudothreshold<f64> = match a.method {
        Method::Stratified => {
            let runner = experiment.runner()?;
            let plan = StratifiedPlan::new(a.shots, a.p_low, a.p_high, config.seed);
            let estimate = estimate_strata(&runner, config.noise(0.0), &plan)?;
            estimate_pseudothreshold(&estimate, a.p_low, a.p_high, a.iterations)?
        }
        Method::Direct => {
            let curve = DirectCurve {
                experiment: &experiment,
            };
            estimate_pseudothreshold(&curve, a.p_low, a.p_high, a.iterations)?
        }
    };
    let mut out = open_output(a.output.as_deref())?;
    if a.json {
        write_json(
            out,
            &json!({
                "seed": config.seed,
                "d": config.d,
                "decoder": config.decoder_label(),
                "method": format!("{:?}", a.method).to_lowercase(),
                "p_th": result.p_th,
                "low": result.low,
                "high": result.high,
                "samples": result.samples,
            }),
        )?;
    } else {
        writeln!(out, "# seed={} d={} decoder={}", config.seed, config.d, config.decoder_label())?;
        writeln!(out, "p_th={:e} interval=[{:e}, {:e}]", result.p_th, result.low, result.high)?;
    }
    Ok(true)
}

fn verify_bounds(a: VerifyBoundsArgs) -> Result<bool> {
    let report = verify_round_bounds(a.t_max)?;
    let mut out = io::stdout().lock();
    if a.json {
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
    } else {
        writeln!(out, "{:<8} {:<13} {:>2} {:>8} {:>8} {:>6}  ok", "decoder", "s1", "t", "formula", "searched", "table")?;
        for r in &report.rows {
            let table = r.table.map_or_else(|| "-".to_string(), |v| v.to_string());
            writeln!(
                out,
                "{:<8} {:<13} {:>2} {:>8} {:>8} {:>6}  {}",
                r.kind.name(),
                format!("{:?}", r.branch),
                r.t,
                r.formula,
                r.searched,
                table,
                if r.ok { "yes" } else { "NO" }
            )?;
        }
        for c in &report.counterexamples {
            writeln!(out, "counterexample: {c}")?;
        }
    }
    Ok(report.ok)
}

fn oracle_check(a: OracleCheckArgs) -> Result<bool> {
    let regime = Regime::default();
    let mut out = io::stdout().lock();
    if let Some(bits) = &a.delta {
        let t = a.t.expect("clap enforces --t with --delta");
        let delta: DifferenceVector = bits.parse()?;
        let runs = |v: Vec<_>| -> Vec<(usize, usize)> {
            v.into_iter()
                .map(|z: adaptive_ftec::diffvec::ZeroSubstring| (z.start, z.end))
                .collect()
        };
        let algorithm = runs(find_usable(t, &delta));
        let oracle = runs(oracle_usable_runs(&delta, t, &regime)?);
        let agree = algorithm == oracle;
        if a.json {
            serde_json::to_writer_pretty(
                &mut out,
                &json!({ "delta": bits, "t": t, "algorithm": algorithm, "oracle": oracle, "agree": agree }),
            )?;
            writeln!(out)?;
        } else {
            writeln!(out, "delta={bits} t={t} algorithm={algorithm:?} oracle={oracle:?} agree={agree}")?;
        }
        return Ok(agree);
    }
    let (checked, mismatches) = oracle_sweep(a.max_len, a.t_max, &regime)?;
    if a.json {
        serde_json::to_writer_pretty(
            &mut out,
            &json!({ "max_len": a.max_len, "t_max": a.t_max, "checked": checked, "mismatches": mismatches }),
        )?;
        writeln!(out)?;
    } else {
        writeln!(out, "checked {checked} cases, {} mismatches", mismatches.len())?;
        for m in &mismatches {
            writeln!(out, "delta={} t={} algorithm={:?} oracle={:?}", m.delta, m.t, m.algorithm, m.oracle)?;
        }
    }
    Ok(mismatches.is_empty())
}

fn dump_code(a: DumpCodeArgs) -> Result<bool> {
    let code = build_hex_color_code(a.d)?;
    let strings = |ops: &[adaptive_ftec::PauliOperator]| ops.iter().map(|g| g.to_string()).collect::<Vec<_>>();
    let value = json!({
        "n": code.n(),
        "k": code.k(),
        "d": code.distance(),
        "css": code.is_css(),
        "generators": strings(code.generators()),
        "logical_x": strings(code.logical_x()),
        "logical_z": strings(code.logical_z()),
    });
    write_json(open_output(None)?, &value)?;
    Ok(true)
}

fn fault_enum(a: FaultEnumArgs) -> Result<bool> {
    let config = load_config(&a.experiment)?;
    let experiment = Experiment::new(ExperimentConfig {
        p_values: vec![0.0],
        ..config.clone()
    })?;
    let runner = experiment.runner()?;
    let report: FaultSweepReport = match a.mode {
        FaultMode::Single => sweep_single_faults(&runner)?,
        FaultMode::Pairs => sample_fault_pairs(&runner, a.pairs, config.seed)?,
    };
    let scenarios: Vec<ScenarioCheck> = if matches!(a.mode, FaultMode::Single)
        && config.decoder == DecoderKind::Strong
        && config.t() == 1
        && !config.css_two_stage
    {
        single_fault_scenarios(&runner)?
    } else {
        Vec::new()
    };
    let ok = report.ok() && scenarios.iter().all(ScenarioCheck::ok);
    let mut out = io::stdout().lock();
    if a.json {
        serde_json::to_writer_pretty(
            &mut out,
            &json!({
                "seed": config.seed,
                "d": config.d,
                "decoder": config.decoder_label(),
                "mode": a.mode.to_possible_value().unwrap().get_name(),
                "report": report,
                "scenarios": scenarios,
                "ok": ok,
            }),
        )?;
        writeln!(out)?;
    } else {
        writeln!(
            out,
            "# seed={} d={} decoder={} mode={}",
            config.seed,
            config.d,
            config.decoder_label(),
            a.mode.to_possible_value().unwrap().get_name()
        )?;
        writeln!(
            out,
            "cases={} logical_errors={} weight_violations={} weights_checked={}",
            report.cases, report.logical_errors, report.weight_violations, report.weights_checked
        )?;
        if let Some(f) = &report.first_failure {
            writeln!(out, "first failure: {f}")?;
        }
        for s in &scenarios {
            writeln!(
                out,
                "{:<12} delta={:<4} expected=s{} chosen={} {}",
                s.label,
                s.delta,
                s.expected_round,
                s.chosen_round.map_or_else(|| "none".to_string(), |r| format!("s{r}")),
                if s.ok() { "ok" } else { "MISMATCH" }
            )?;
        }
    }
    Ok(ok)
}
