use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use confdirac::harness::{emit_report, find_suite, run_scenario, suites, Format, ScenarioConfig};

#[derive(Parser)]
#[command(name = "confdirac", version, about = "Run conformal Dirac power scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML file.
    Run {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
        /// Replace the seed given in the file.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the available suites.
    ListSuites,
    /// Print the identities a suite checks.
    Describe { suite: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

fn run(config: PathBuf, format: OutputFormat, seed: Option<u64>, out: Option<PathBuf>) -> confdirac::Result<bool> {
    let mut cfg = ScenarioConfig::load(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = run_scenario(&cfg)?;
    let format = match format {
        OutputFormat::Json => Format::Json,
        OutputFormat::Text => Format::Text,
    };
    let mut text = emit_report(&report, format)?;
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            format,
            seed,
            out,
        } => match run(config, format, seed, out) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::ListSuites => {
            for s in suites() {
                println!("{:<22} {}", s.id, s.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Describe { suite } => match find_suite(&suite) {
            Ok(s) => {
                println!("{}: {}", s.id, s.summary);
                for (check, anchor) in s.anchors {
                    println!("  {check:<26} {anchor}");
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
    }
}
