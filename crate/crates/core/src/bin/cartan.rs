use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cartan_core::runner::{self, Command, Format, RunConfig};

#[derive(Parser)]
#[command(name = "cartan", version, about = "Character sums, explicit bounds and the j-invariant sieve")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Exclusive bound M on the primes of the constant scan.
    #[arg(long, global = true, default_value_t = 10_000)]
    max_prime: u64,

    /// Residue classes mod 9 to scan, comma separated.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = [2u64, 5])]
    classes: Vec<u64>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Largest witness prime tried by the sieve.
    #[arg(long, global = true, default_value_t = 500)]
    ell_max: u64,

    /// Bound on |log|q|| used to enumerate candidates.
    #[arg(long, global = true, default_value_t = 39.0)]
    x_bound: f64,

    /// Output directory.
    #[arg(long, global = true, default_value = "reports")]
    out: PathBuf,

    /// Cache directory for per-prime constants.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    /// Format of summary reports.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scan C(M) and C_gamma(M) over primes p = 2, 5 mod 9 below M.
    Constants,
    /// Solve the chained analytic bounds.
    Bounds,
    /// Sweep |log|R|| against its bound and check the structure of U.
    Units,
    /// Enumerate candidates j = p^d c^3 and look for witness primes.
    Sieve,
    /// Dump c(m) and c_gamma(m) for one prime.
    Csum {
        #[arg(long)]
        prime: u64,
    },
    /// Constants, then bounds, then the sieve.
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (command, prime) = match cli.command {
        Cmd::Constants => (Command::Constants, None),
        Cmd::Bounds => (Command::Bounds, None),
        Cmd::Units => (Command::Units, None),
        Cmd::Sieve => (Command::Sieve, None),
        Cmd::Csum { prime } => (Command::Csum, Some(prime)),
        Cmd::All => (Command::All, None),
    };
    let cfg = RunConfig {
        command,
        max_prime: cli.max_prime,
        classes: cli.classes,
        threads: cli.threads.unwrap_or_else(runner::default_threads),
        ell_max: cli.ell_max,
        x_bound: cli.x_bound,
        out: cli.out,
        cache: cli.cache,
        format: match cli.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
        prime,
    };
    match runner::run(&cfg) {
        Ok(files) => {
            for f in files {
                log::info!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
