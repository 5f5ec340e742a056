use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use skewcomp::experiment::{self, ErrorSign, ExperimentConfig, OutputFormat, Readout};
use skewcomp::verify::{self, VerifyOptions};
use skewcomp::{
    compensate, CompensationParams, Convention, FpFormat, QuotientOrder, RatioEstimate,
    RoundingMode, TieRule, WindowParams,
};

mod numeric;

use numeric::{parse_count, parse_count_list, parse_positive};

#[derive(Parser)]
#[command(name = "skewcomp", version, about = "Integer-only clock skew compensation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compensate one hardware-clock reading.
    Compensate(CompensateArgs),
    /// Regenerate the compensation-error table.
    Bench(BenchArgs),
    /// Run the exhaustive and randomized property suites.
    Verify(VerifyArgs),
    /// Accumulated drift of recursive logical-clock updates.
    Drift(DriftArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FpModeArg {
    Binary32,
    Binary64,
}

impl From<FpModeArg> for FpFormat {
    fn from(v: FpModeArg) -> Self {
        match v {
            FpModeArg::Binary32 => FpFormat::Binary32,
            FpModeArg::Binary64 => FpFormat::Binary64,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    ClosedForm,
    Td,
}

impl From<ConventionArg> for Convention {
    fn from(v: ConventionArg) -> Self {
        match v {
            ConventionArg::ClosedForm => Convention::ClosedForm,
            ConventionArg::Td => Convention::TdConsistent,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RoundingArg {
    Floor,
    Nearest,
    Ceil,
}

impl From<RoundingArg> for RoundingMode {
    fn from(v: RoundingArg) -> Self {
        match v {
            RoundingArg::Floor => RoundingMode::Floor,
            RoundingArg::Nearest => RoundingMode::NearestHalfUp,
            RoundingArg::Ceil => RoundingMode::Ceil,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    DivideFirst,
    MultiplyFirst,
}

impl From<OrderArg> for QuotientOrder {
    fn from(v: OrderArg) -> Self {
        match v {
            OrderArg::DivideFirst => QuotientOrder::DivideFirst,
            OrderArg::MultiplyFirst => QuotientOrder::MultiplyFirst,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ErrorSignArg {
    RefMinusAlg,
    AlgMinusRef,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mutant {
    /// Zero decision variable moves horizontally.
    FlipTie,
}

#[derive(Args)]
struct CompensateArgs {
    /// Hardware clock ticks since the last sync.
    #[arg(long = "i", value_parser = parse_count)]
    i: u64,
    /// Interdeparture ticks.
    #[arg(long = "d", value_parser = parse_positive)]
    d: u64,
    /// Interarrival ticks.
    #[arg(long = "a", value_parser = parse_positive)]
    a: u64,
    #[arg(long, default_value_t = 1e-7)]
    eps: f64,
    #[arg(long, value_enum, default_value = "binary64")]
    fp_mode: FpModeArg,
    #[arg(long, value_enum, default_value = "td")]
    convention: ConventionArg,
    /// Also print the candidate window, start point and walk length.
    #[arg(long)]
    trace: bool,
}

#[derive(Clone)]
struct ClockList(Vec<u64>);

fn parse_clocks(raw: &str) -> Result<ClockList, String> {
    parse_count_list(raw).map(ClockList)
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long = "d", default_value = "1000000", value_parser = parse_positive)]
    d: u64,
    #[arg(long, default_value = "1000000", value_parser = parse_positive)]
    samples: u64,
    #[arg(long, default_value_t = 100.0)]
    skew_ppm: f64,
    #[arg(long, default_value_t = 1e-7)]
    eps: f64,
    /// Comma-separated hardware clock values.
    #[arg(long, default_value = "1e6,1e7,1e8,1e9", value_parser = parse_clocks)]
    clocks: ClockList,
    #[arg(long, default_value_t = experiment::DEFAULT_SEED, value_parser = parse_count)]
    seed: u64,
    #[arg(long, value_enum, default_value = "floor")]
    rounding: RoundingArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Decision-variable convention of the proposed algorithm.
    #[arg(long, value_enum, default_value = "td")]
    convention: ConventionArg,
    /// Format of the proposed algorithm's bracketing quotient.
    #[arg(long, value_enum, default_value = "binary64")]
    fp_mode: FpModeArg,
    /// Expression tree of the floating-point baseline and reference.
    #[arg(long, value_enum, default_value = "multiply-first")]
    order: OrderArg,
    #[arg(long, value_enum, default_value = "ref-minus-alg")]
    error_sign: ErrorSignArg,
    /// Read the proposed result one decision past the target column.
    #[arg(long)]
    overshoot: bool,
    /// Shorthand for `--convention closed-form --overshoot`.
    #[arg(long)]
    replica: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "64", value_parser = parse_positive)]
    max_a: u64,
    #[arg(long, default_value = "100000", value_parser = parse_count)]
    random_trials: u64,
    #[arg(long, default_value = "1", value_parser = parse_count)]
    seed: u64,
    /// Plant a known defect in the compensator under test.
    #[arg(long, value_enum, hide = true)]
    mutant: Option<Mutant>,
}

#[derive(Args)]
struct DriftArgs {
    #[arg(long, default_value = "1000", value_parser = parse_positive)]
    rounds: u64,
    /// Hardware ticks between synchronizations.
    #[arg(long, default_value = "1e6", value_parser = parse_count)]
    interval: u64,
    #[arg(long, default_value_t = experiment::DEFAULT_SEED, value_parser = parse_count)]
    seed: u64,
    #[arg(long = "d", default_value = "1000000", value_parser = parse_positive)]
    d: u64,
    #[arg(long, default_value_t = 100.0)]
    skew_ppm: f64,
    #[arg(long, default_value_t = 1e-7)]
    eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run_compensate(args: CompensateArgs) -> anyhow::Result<ExitCode> {
    let ratio = RatioEstimate::new(args.d, args.a)?;
    let params = CompensationParams {
        window: WindowParams {
            epsilon: args.eps,
            fp_mode: args.fp_mode.into(),
        },
        convention: args.convention.into(),
        tie: TieRule::Diagonal,
    };
    let out = compensate(args.i, &ratio, &params)?;
    println!("{}", out.j);
    if args.trace {
        let (x, y) = out.start_point(args.i);
        println!("case: {}", out.case_used);
        println!(
            "candidates: {}..={} ({} values)",
            out.candidate_lo,
            out.candidate_lo + out.candidate_count - 1,
            out.candidate_count
        );
        println!("start: ({x}, {y})");
        println!("walk steps: {}", out.walk_steps);
    }
    Ok(ExitCode::SUCCESS)
}

fn thread_pool(threads: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn run_bench(args: BenchArgs) -> anyhow::Result<ExitCode> {
    let convention = if args.replica {
        Convention::ClosedForm
    } else {
        args.convention.into()
    };
    let config = ExperimentConfig {
        d: args.d,
        sample_count: usize::try_from(args.samples)?,
        skew_ppm: args.skew_ppm,
        epsilon: args.eps,
        clocks: args.clocks.0,
        seed: args.seed,
        rounding: args.rounding.into(),
        convention,
        fp_window_mode: args.fp_mode.into(),
        baseline_format: FpFormat::Binary32,
        baseline_order: args.order.into(),
        readout: if args.overshoot || args.replica {
            Readout::AfterFinalDecision
        } else {
            Readout::AtTarget
        },
        error_sign: match args.error_sign {
            ErrorSignArg::RefMinusAlg => ErrorSign::ReferenceMinusAlgorithm,
            ErrorSignArg::AlgMinusRef => ErrorSign::AlgorithmMinusReference,
        },
    };
    let format = match args.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Markdown => OutputFormat::Markdown,
    };
    let table = thread_pool(args.threads)?.install(|| {
        experiment::run_table_with_progress(&config, |row| {
            eprintln!(
                "{} clock={} max={} min={} avg={}",
                row.label,
                row.clock,
                row.stats.max,
                row.stats.min,
                experiment::format_significant(row.stats.avg)
            );
        })
    })?;
    write_output(args.out.as_deref(), &experiment::emit(&table, format))?;
    Ok(ExitCode::SUCCESS)
}

fn run_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let opts = VerifyOptions {
        max_a: args.max_a,
        random_trials: args.random_trials,
        seed: args.seed,
        tie: match args.mutant {
            Some(Mutant::FlipTie) => TieRule::Horizontal,
            None => TieRule::Diagonal,
        },
    };
    let reports = verify::run_all_with_progress(&opts, |r| println!("{r}"));
    Ok(if reports.iter().all(|r| r.passed()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn run_drift(args: DriftArgs) -> anyhow::Result<ExitCode> {
    let config = ExperimentConfig {
        d: args.d,
        skew_ppm: args.skew_ppm,
        epsilon: args.eps,
        seed: args.seed,
        ..ExperimentConfig::default()
    };
    let rows = experiment::run_drift(&config, args.rounds, args.interval)?;
    let (proposed, single) = experiment::max_abs_drift(&rows);
    eprintln!("max |drift|: proposed={proposed} binary32={single}");
    write_output(args.out.as_deref(), &experiment::emit_drift_csv(&rows))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compensate(args) => run_compensate(args),
        Command::Bench(args) => run_bench(args),
        Command::Verify(args) => run_verify(args),
        Command::Drift(args) => run_drift(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
