use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use perfchar_core::hwmodel::{Mode, Precision};
use perfchar_core::metrics::CompareMetric;
use perfchar_core::microbench::Pinning;
use perfchar_core::roofline::RoofScope;

mod commands;
mod output;

use output::{Format, Output};

/// Performance characterization of HPC platforms: theoretical peaks, micro-benchmarks,
/// roofline placement, energy metrics, scaling-law fits and network weak links.
#[derive(Parser)]
#[command(name = "perfchar", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect platform specs.
    #[command(subcommand, arg_required_else_help = true)]
    Spec(SpecCmd),
    /// Run micro-benchmarks on this host.
    #[command(subcommand, arg_required_else_help = true)]
    Bench(BenchCmd),
    /// Analyze measurement files.
    #[command(subcommand, arg_required_else_help = true)]
    Analyze(AnalyzeCmd),
    /// Cross-platform reports.
    #[command(subcommand, arg_required_else_help = true)]
    Report(ReportCmd),
}

#[derive(Args, Clone)]
pub struct OutputArgs {
    /// Directory for data files and the metadata sidecar.
    #[arg(long)]
    out: Option<PathBuf>,
    /// text: tables on stdout; csv: data files only; all: both. Defaults to all with --out.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Emit a gnuplot script next to every plot-data file.
    #[arg(long)]
    gnuplot: bool,
}

impl OutputArgs {
    fn output(&self) -> Output {
        Output::new(self.format, self.out.clone(), self.gnuplot)
    }
}

#[derive(Subcommand)]
enum SpecCmd {
    /// Theoretical peaks, bandwidth and STREAM sizing of one or more platform specs.
    Show {
        #[arg(required = true)]
        specs: Vec<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Multithreaded STREAM triad.
    Mem(MemArgs),
    /// Sustained FMA throughput.
    Flops(FlopsArgs),
}

#[derive(Args)]
pub struct MemArgs {
    /// Elements per array; defaults to the sizing minimum of --spec (or 10,000,000).
    #[arg(long)]
    elements: Option<usize>,
    /// Thread counts, comma-separated; defaults to every usable hardware thread.
    #[arg(long, value_delimiter = ',')]
    threads: Vec<usize>,
    #[arg(long, default_value_t = perfchar_core::microbench::DEFAULT_REPETITIONS)]
    reps: u32,
    #[arg(long, default_value = "interleaved")]
    pin: Pinning,
    /// Platform spec used for sizing checks and percent-of-peak.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
pub struct FlopsArgs {
    #[arg(long, value_delimiter = ',', default_value = "double")]
    precision: Vec<Precision>,
    #[arg(long, value_delimiter = ',', default_value = "vector")]
    mode: Vec<Mode>,
    /// Seconds per measurement.
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    /// Vector register width in bits; defaults to the widest the host supports.
    #[arg(long)]
    width: Option<u32>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value = "compact")]
    pin: Pinning,
    /// Platform spec used for percent-of-peak.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// Roofline curve of a platform and placement of kernels under it.
    Roofline(RooflineArgs),
    /// Amdahl, Gustafson or MPI-share fits with projections.
    Scaling(ScalingArgs),
    /// Energy-to-solution, EDP and work per joule.
    Energy(EnergyArgs),
    /// Pairwise bandwidth matrices and weak links.
    Network(NetworkArgs),
}

#[derive(Args)]
pub struct RooflineArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Kernel table `label,intensity[,gflops][,time_share]`.
    #[arg(long)]
    kernels: Option<PathBuf>,
    #[arg(long, default_value = "node")]
    scope: RoofScope,
    #[arg(long, default_value = "double")]
    precision: Precision,
    /// Intensity range of the curve, Flop/Byte.
    #[arg(long, default_value_t = 0.01)]
    lo: f64,
    #[arg(long, default_value_t = 100.0)]
    hi: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalingModelArg {
    Amdahl,
    Gustafson,
    MpiShares,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitsArg {
    Nodes,
    Ranks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    Relative,
    Uniform,
}

#[derive(Args)]
pub struct ScalingArgs {
    #[arg(long, value_enum)]
    model: ScalingModelArg,
    /// Runs, speedup or MPI-decomposition CSV (detected from the header).
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "app,platform,compiler")]
    group: String,
    /// Unit count used for run files.
    #[arg(long, value_enum, default_value = "nodes")]
    units: UnitsArg,
    #[arg(long, value_enum, default_value = "relative")]
    weighting: WeightingArg,
    /// Projection unit counts, comma-separated; defaults to powers of two up to --project-max.
    #[arg(long, value_delimiter = ',')]
    project: Vec<f64>,
    #[arg(long, default_value_t = 1024.0)]
    project_max: f64,
    /// MPI share (percent) defining the critical unit count.
    #[arg(long, default_value_t = 100.0)]
    threshold: f64,
    /// Per-unit cells `x,y,z` for weak-scaling sizing.
    #[arg(long)]
    cells: Option<String>,
    /// Rank decomposition `x,y,z`; repeat for several layouts.
    #[arg(long, requires = "cells")]
    decomposition: Vec<String>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
pub struct EnergyArgs {
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
pub struct NetworkArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Deficit fraction below the row median that marks a weak link.
    #[arg(long, default_value_t = perfchar_core::ingest::DEFAULT_WEAK_LINK_THRESHOLD)]
    threshold: f64,
    /// Restrict to one message size in bytes.
    #[arg(long)]
    msg_bytes: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Rank platform/compiler groups per application.
    Compare(CompareArgs),
}

#[derive(Args)]
pub struct CompareArgs {
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "time")]
    metric: CompareMetric,
    #[command(flatten)]
    out: OutputArgs,
}

fn run(cli: Cli) -> perfchar_core::Result<()> {
    match cli.command {
        Command::Spec(SpecCmd::Show { specs, out }) => commands::spec::show(&specs, out.output()),
        Command::Bench(BenchCmd::Mem(a)) => commands::bench::mem(&a, a.out.output()),
        Command::Bench(BenchCmd::Flops(a)) => commands::bench::flops(&a, a.out.output()),
        Command::Analyze(AnalyzeCmd::Roofline(a)) => commands::roofline::run(&a, a.out.output()),
        Command::Analyze(AnalyzeCmd::Scaling(a)) => commands::scaling::run(&a, a.out.output()),
        Command::Analyze(AnalyzeCmd::Energy(a)) => commands::energy::run(&a, a.out.output()),
        Command::Analyze(AnalyzeCmd::Network(a)) => commands::network::run(&a, a.out.output()),
        Command::Report(ReportCmd::Compare(a)) => commands::compare::run(&a, a.out.output()),
    }
}

fn one_line(s: &str) -> String {
    s.split('\n')
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("; ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = e.print();
                    ExitCode::from(2)
                }
                _ => {
                    let msg = e.render().to_string();
                    let first = msg.lines().next().unwrap_or("invalid arguments");
                    let first = first.strip_prefix("error: ").unwrap_or(first);
                    eprintln!("perfchar: error[usage]: {}", one_line(first));
                    ExitCode::from(2)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "perfchar: error[{}]: {}",
                e.kind(),
                one_line(&e.to_string())
            );
            ExitCode::from(1)
        }
    }
}
