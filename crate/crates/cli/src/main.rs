#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use blindsync::dither::{check_frequencies, generate_frequencies};
use blindsync::dynamics::averaging_residual;
use blindsync::experiment::fixture::format_real;
use blindsync::experiment::{
    load_config_file, run, ultimate_bound, write_csv, ExperimentConfig, Mode, DEFAULT_TAIL_FRACTION,
};
use blindsync::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_INTEGRITY: u8 = 2;
const EXIT_FREQUENCIES: u8 = 3;
const EXIT_PROPERTY: u8 = 4;

/// Extremum-seeking synchronization of blind agents on SO(3) and SE(3).
#[derive(Parser)]
#[command(name = "blindsync", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write its CSV record.
    Simulate(SimulateArgs),
    /// Run the decentralized gradient flow (SO(3) only) and write its CSV record.
    GradientFlow(RunArgs),
    /// Generate or validate dither frequency multipliers.
    Freqs(FreqsArgs),
    /// Check that the averaging residual shrinks with the fourth power of the amplitude.
    AverageCheck(AverageCheckArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Replace the initial states with random ones drawn from this seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Base dither frequency.
    #[arg(long)]
    omega: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Es,
    Gradient,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct FreqsArgs {
    /// Print this many valid multipliers.
    #[arg(long)]
    count: Option<usize>,
    /// Check a space- or comma-separated list of multipliers.
    #[arg(long)]
    validate: Option<String>,
}

#[derive(Args)]
struct AverageCheckArgs {
    #[arg(long)]
    config: PathBuf,
    /// Strictly decreasing amplitudes, e.g. "0.2 0.1 0.05".
    #[arg(long)]
    amplitudes: String,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Integrity(_) => EXIT_INTEGRITY,
            Error::Frequency(_) => EXIT_FREQUENCIES,
            _ => EXIT_CONFIG,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::GradientFlow(args) => simulate(SimulateArgs {
            run: args,
            mode: Some(ModeArg::Gradient),
            omega: None,
        }),
        Command::Freqs(args) => freqs(args),
        Command::AverageCheck(args) => average_check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn read_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    load_config_file(path).map_err(|err| match err {
        Error::Io(e) => usage(format!("cannot read {}: {e}", path.display())),
        other => other.into(),
    })
}

fn load(
    run: &RunArgs,
    mode: Option<ModeArg>,
    omega: Option<f64>,
) -> Result<ExperimentConfig, Failure> {
    let mut cfg = read_config(&run.config)?;
    if let Some(mode) = mode {
        cfg = cfg.with_mode(match mode {
            ModeArg::Es => Mode::ExtremumSeeking,
            ModeArg::Gradient => Mode::GradientFlow,
        })?;
    }
    if let Some(omega) = omega {
        cfg = cfg.with_omega(omega)?;
    }
    if let Some(seed) = run.seed {
        cfg = cfg.with_seed(seed);
    }
    Ok(cfg)
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let cfg = load(&args.run, args.mode, args.omega)?;
    let record = run(&cfg)?;
    let file = File::create(&args.run.out)
        .map_err(|e| usage(format!("cannot create {}: {e}", args.run.out.display())))?;
    write_csv(&record, BufWriter::new(file))?;

    let initial = record.initial_cost().unwrap_or(f64::NAN);
    let last = record.final_cost().unwrap_or(f64::NAN);
    let dispersion = record.final_dispersion().unwrap_or(f64::NAN);
    let bound = ultimate_bound(&record, DEFAULT_TAIL_FRACTION)?;
    println!("initial_J={}", format_real(initial));
    println!("final_J={}", format_real(last));
    println!("final_dispersion={}", format_real(dispersion));
    println!("ultimate_bound={}", format_real(bound));
    println!("samples={}", record.len());
    Ok(())
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, Failure> {
    let items: Vec<&str> = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(usage(format!("empty {what} list")));
    }
    items
        .into_iter()
        .map(|s| {
            s.parse()
                .map_err(|_| usage(format!("`{s}` is not a valid {what}")))
        })
        .collect()
}

fn freqs(args: FreqsArgs) -> Result<(), Failure> {
    if let Some(count) = args.count {
        if count == 0 {
            return Err(usage("--count must be at least 1"));
        }
        let list: Vec<String> = generate_frequencies(count)
            .iter()
            .map(u64::to_string)
            .collect();
        println!("{}", list.join(" "));
        return Ok(());
    }
    let list: Vec<u64> = parse_list(args.validate.as_deref().unwrap_or_default(), "multiplier")?;
    let report = check_frequencies(&list);
    println!("{report}");
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_FREQUENCIES,
            message: String::new(),
        })
    }
}

fn average_check(args: AverageCheckArgs) -> Result<(), Failure> {
    let amplitudes: Vec<f64> = parse_list(&args.amplitudes, "amplitude")?;
    if amplitudes.len() < 2 {
        return Err(usage("need at least two amplitudes"));
    }
    if amplitudes.iter().any(|&a| !(a > 0.0)) {
        return Err(usage("amplitudes must be positive"));
    }
    if amplitudes.windows(2).any(|w| w[1] >= w[0]) {
        return Err(usage("amplitudes must be strictly decreasing"));
    }
    let cfg = read_config(&args.config)?;
    let states = cfg.initial_configuration()?;

    let schedules = amplitudes
        .iter()
        .map(|&a| cfg.schedule.with_uniform_amplitude(a))
        .collect::<blindsync::Result<Vec<_>>>()?;

    println!("amplitude,residual,ratio");
    let mut prev: Option<f64> = None;
    let mut all_held = true;
    for (&a, schedule) in amplitudes.iter().zip(&schedules) {
        let r = averaging_residual(&cfg.net, &states, schedule);
        let ratio = match prev {
            Some(p) => {
                let q = p / r;
                all_held &= (8.0..=32.0).contains(&q);
                format_real(q)
            }
            None => "-".to_string(),
        };
        println!("{},{},{ratio}", format_real(a), format_real(r));
        prev = Some(r);
    }
    if all_held {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_PROPERTY,
            message: "a residual ratio fell outside [8, 32]".to_string(),
        })
    }
}
