use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use seqfisher::{emit, load_config, run, CliError, ExperimentKind, OutputFormat, CODE_VERSION};

#[derive(Parser)]
#[command(name = "seqfisher", version, about = "Fisher information of sequential quantum measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    #[command(name = "fisher_mc", alias = "fisher-mc")]
    FisherMc(RunArgs),
    #[command(name = "fisher_exact", alias = "fisher-exact")]
    FisherExact(RunArgs),
    #[command(name = "memory_loss", alias = "memory-loss")]
    MemoryLoss(RunArgs),
    #[command(name = "rank_collapse", alias = "rank-collapse")]
    RankCollapse(RunArgs),
    Gain(RunArgs),
    #[command(name = "time_budget", alias = "time-budget")]
    TimeBudget(RunArgs),
    #[command(name = "jc_filter", alias = "jc-filter")]
    JcFilter(RunArgs),
    Wigner(RunArgs),
    /// Check a configuration file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the code version.
    Version,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn env_threads() -> Result<Option<usize>, CliError> {
    match std::env::var("SEQFISHER_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("SEQFISHER_THREADS={v:?} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn execute(kind: ExperimentKind, args: RunArgs) -> Result<(), CliError> {
    let mut config = load_config(&args.config, Some(kind))?;
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    if let Some(t) = args.threads {
        config.threads = Some(t);
    }
    if config.threads.is_none() {
        config.threads = env_threads()?;
    }
    if let Some(out) = args.out {
        config.output = Some(out);
    }
    if let Some(f) = args.format {
        config.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    config.validate()?;
    let envelope = run(&config)?;
    eprintln!(
        "{}: finished in {:.3} s ({} aborted, {} excluded)",
        kind.name(),
        envelope.duration.as_secs_f64(),
        envelope.aborted,
        envelope.excluded
    );
    emit(&envelope, config.format, config.output.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::FisherMc(a) => execute(ExperimentKind::FisherMc, a),
        Command::FisherExact(a) => execute(ExperimentKind::FisherExact, a),
        Command::MemoryLoss(a) => execute(ExperimentKind::MemoryLoss, a),
        Command::RankCollapse(a) => execute(ExperimentKind::RankCollapse, a),
        Command::Gain(a) => execute(ExperimentKind::Gain, a),
        Command::TimeBudget(a) => execute(ExperimentKind::TimeBudget, a),
        Command::JcFilter(a) => execute(ExperimentKind::JcFilter, a),
        Command::Wigner(a) => execute(ExperimentKind::Wigner, a),
        Command::Validate { config } => load_config(&config, None).map(|c| {
            println!("{}: ok", c.kind().map(|k| k.name()).unwrap_or("config"));
        }),
        Command::Version => {
            println!("{CODE_VERSION}");
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("seqfisher: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
