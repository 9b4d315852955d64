use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use xconvex::cli::{self, Format, ProblemFile, EXIT_FALSIFIED, EXIT_INPUT, EXIT_OK};
use xconvex::error::Result;

#[derive(Parser)]
#[command(name = "xconvex", version, about = "Sampled X-convexity checks, theorem harnesses and the example corpus")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(clap::Args)]
struct Output {
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the sampling seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks of a problem file.
    Run {
        problem: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Run the built-in example corpus and print the agreement table.
    Corpus {
        #[command(flatten)]
        output: Output,
    },
    /// Run the built-in theorem-harness problems.
    Suite {
        #[command(flatten)]
        output: Output,
    },
    /// Re-check every falsifying witness of one case in a JSON report.
    VerifyWitness {
        report: PathBuf,
        #[arg(long = "case")]
        case: String,
    },
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("XCONVEX_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| xconvex::error::Error::Input(format!("XCONVEX_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| xconvex::error::Error::Input(e.to_string()))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".into())
}

fn execute(command: Command) -> Result<i32> {
    configure_threads()?;
    match command {
        Command::Run { problem, output } => {
            let mut p = ProblemFile::load(&problem)?;
            if let Some(seed) = output.seed {
                p.plan.seed = seed;
            }
            let report = cli::run(&stem(&problem), &p)?;
            cli::emit(&report, output.format.into(), output.out.as_deref())?;
            Ok(report.exit_code)
        }
        Command::Corpus { output } => {
            let report = cli::run_corpus(output.seed)?;
            cli::emit(&report, output.format.into(), output.out.as_deref())?;
            if let Some(table) = &report.corpus {
                eprintln!("{} AGREE, {} DISAGREE", table.agree, table.disagree);
            }
            Ok(report.exit_code)
        }
        Command::Suite { output } => {
            let report = cli::run_suite(output.seed)?;
            cli::emit(&report, output.format.into(), output.out.as_deref())?;
            Ok(report.exit_code)
        }
        Command::VerifyWitness { report, case } => {
            let text = std::fs::read_to_string(&report)?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let checks = cli::verify_report(&value, &case)?;
            println!("{}", serde_json::to_string_pretty(&checks)?);
            Ok(if checks.iter().all(|c| c.verified) {
                EXIT_OK
            } else {
                EXIT_FALSIFIED
            })
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
