use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use disentangle_bench::experiments::{
    run_single, run_table1, run_trunc_curve, run_wave, SingleConfig, TensorSpec, TrialsConfig, WaveConfig,
};
use disentangle_bench::report::{Format, Report};
use disentangle_bench::BenchError;
use tensor_disentangle::descent::DescentConfig;
use tensor_disentangle::generators::SpectrumKind;
use tensor_disentangle::wavefunction::SweepMethod;
use tensor_disentangle::{Dims, DisentangleOptions};

#[derive(Parser)]
#[command(name = "disentangle-bench", version, about = "Benchmarks for fast tensor disentangling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fast vs minimal vs random entropy ratios, truncation errors and timings per trial.
    Table1(TrialArgs),
    /// Truncation error against kept bond dimension for fast, min-S and identity.
    TruncCurve(TrialArgs),
    /// Layered sweeps of two-qubit disentanglers on random qubit chains.
    Wave(WaveArgs),
    /// One tensor, one disentangler, full cut spectra.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Gaussian,
    LambdaInverse,
    LambdaExp,
    MuInverse,
    Ansatz,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Fast,
    Descent,
    FastThenDescent,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct TensorArgs {
    #[arg(long)]
    chi1: Option<usize>,
    #[arg(long)]
    chi2: Option<usize>,
    #[arg(long)]
    chi3: Option<usize>,
    #[arg(long)]
    chi4: Option<usize>,
    #[arg(long, value_enum, default_value = "gaussian")]
    kind: KindArg,
    /// Rank of the middle factor for `--kind ansatz` (full rank if omitted).
    #[arg(long)]
    m3_rank: Option<usize>,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report entropies in bits instead of nats.
    #[arg(long)]
    bits: bool,
}

#[derive(Args)]
struct TrialArgs {
    #[command(flatten)]
    tensor: TensorArgs,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Descent restarts for the minimal-entropy estimate.
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 3000)]
    max_iters: usize,
    /// Leave wall-clock columns empty so output is reproducible byte for byte.
    #[arg(long)]
    no_timings: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct WaveArgs {
    #[arg(long, default_value_t = 10)]
    qubits: usize,
    #[arg(long, default_value_t = 100)]
    layers: usize,
    #[arg(long, value_enum, default_value = "fast")]
    method: MethodArg,
    /// Number of random initial states.
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Best-of attempts of the fast method per gate.
    #[arg(long, default_value_t = 1)]
    fast_trials: usize,
    /// Descent iterations per gate.
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long)]
    no_timings: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    tensor: TensorArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Best-of attempts of the fast algorithm.
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[command(flatten)]
    output: OutputArgs,
}

impl TensorArgs {
    fn spec(&self, default_chi: usize) -> Result<TensorSpec, BenchError> {
        let chi = |v: Option<usize>| v.unwrap_or(default_chi);
        let dims = Dims::new(chi(self.chi1), chi(self.chi2), chi(self.chi3), chi(self.chi4))
            .map_err(|e| BenchError::Config(e.to_string()))?;
        if self.m3_rank.is_some() && !matches!(self.kind, KindArg::Ansatz) {
            return Err(BenchError::Config("--m3-rank applies to --kind ansatz only".into()));
        }
        let kind = match self.kind {
            KindArg::Gaussian => SpectrumKind::Gaussian,
            KindArg::LambdaInverse => SpectrumKind::InverseSpectrum,
            KindArg::LambdaExp => SpectrumKind::ExponentialSpectrum,
            KindArg::MuInverse => SpectrumKind::InverseOuter,
            KindArg::Ansatz => SpectrumKind::Ansatz { m3_rank: self.m3_rank },
        };
        let spec = TensorSpec { kind, dims };
        spec.validate()?;
        Ok(spec)
    }
}

impl TrialArgs {
    fn config(&self, default_chi: usize) -> Result<TrialsConfig, BenchError> {
        let descent = DescentConfig { restarts: self.restarts, max_iters: self.max_iters, ..DescentConfig::default() };
        let cfg = TrialsConfig {
            trials: self.trials,
            seed: self.seed,
            descent,
            timings: !self.no_timings,
            bits: self.output.bits,
            ..TrialsConfig::new(self.tensor.spec(default_chi)?)
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl WaveArgs {
    fn config(&self) -> Result<WaveConfig, BenchError> {
        let method = match self.method {
            MethodArg::Fast => SweepMethod::Fast,
            MethodArg::Descent => SweepMethod::Descent,
            MethodArg::FastThenDescent => SweepMethod::FastThenDescent,
        };
        let mut cfg = WaveConfig::new(self.qubits, self.layers, method);
        cfg.trials = self.trials;
        cfg.seed = self.seed;
        cfg.sweep.fast = DisentangleOptions { trials: self.fast_trials, ..DisentangleOptions::default() };
        cfg.sweep.descent.max_iters = self.max_iters;
        cfg.timings = !self.no_timings;
        cfg.bits = self.output.bits;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Opened before any computation so an unwritable path fails fast.
enum Sink {
    Stdout,
    File(File),
}

impl OutputArgs {
    fn open(&self) -> Result<(Sink, Format), BenchError> {
        let format = match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
        let sink = match &self.out {
            None => Sink::Stdout,
            Some(path) => Sink::File(
                File::create(path).map_err(|e| BenchError::Config(format!("cannot write {}: {e}", path.display())))?,
            ),
        };
        Ok((sink, format))
    }
}

fn emit(report: &Report, sink: Sink, format: Format) -> Result<(), BenchError> {
    match sink {
        Sink::Stdout => {
            report.write(io::stdout().lock(), format)?;
            eprint!("{}", report.summary_text());
        }
        Sink::File(file) => {
            let mut w = io::BufWriter::new(file);
            report.write(&mut w, format)?;
            w.flush()?;
            print!("{}", report.summary_text());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Table1(args) => {
            let cfg = args.config(2)?;
            let (sink, format) = args.output.open()?;
            emit(&run_table1(&cfg)?, sink, format)
        }
        Command::TruncCurve(args) => {
            let cfg = args.config(4)?;
            let (sink, format) = args.output.open()?;
            emit(&run_trunc_curve(&cfg)?, sink, format)
        }
        Command::Wave(args) => {
            let cfg = args.config()?;
            let (sink, format) = args.output.open()?;
            emit(&run_wave(&cfg)?, sink, format)
        }
        Command::Run(args) => {
            let cfg =
                SingleConfig { tensor: args.tensor.spec(2)?, seed: args.seed, attempts: args.trials, bits: args.output.bits };
            let (sink, format) = args.output.open()?;
            emit(&run_single(&cfg)?, sink, format)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
