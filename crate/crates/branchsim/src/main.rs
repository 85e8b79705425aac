use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use branchsim::{exit, parse_config, CliError, Format, Overrides};
use branchsim_core::experiments::CheckStatus;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "branchsim", version, about = "Measurement-chain simulator and invariant checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config
    config: PathBuf,
    /// Report only this check (repeatable)
    #[arg(long = "check", value_name = "NAME")]
    checks: Vec<String>,
    /// Report format
    #[arg(long, value_name = "json|text")]
    format: Option<Format>,
    /// Write the report here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed for random coefficient draws
    #[arg(long)]
    seed: Option<u64>,
    /// Check tolerance, overriding the config
    #[arg(long)]
    tolerance: Option<f64>,
    /// Corrupt the perception unitary so it writes the mixed-state record
    #[arg(long, hide = true)]
    negative_control: bool,
}

fn run(args: RunArgs) -> Result<i32, CliError> {
    let mut config = parse_config(&args.config)?;
    Overrides {
        checks: args.checks,
        format: args.format,
        out: args.out,
        seed: args.seed,
        tolerance: args.tolerance,
        negative_control: args.negative_control,
    }
    .apply(&mut config)?;

    let execution = branchsim::execute(&config)?;
    if config.output.path.is_none() {
        let mut stdout = std::io::stdout().lock();
        let _ = stdout.write_all(execution.rendered.as_bytes());
    }
    for p in &execution.outcome.points {
        for c in p.report.checks().iter().filter(|c| c.status == CheckStatus::Failed) {
            eprintln!(
                "branchsim: point {}: check {} failed (residual {:e} > tolerance {:e})",
                p.point.index, c.name, c.residual, c.tolerance
            );
        }
    }
    Ok(execution.exit_code)
}

fn main() -> ExitCode {
    let Cli { command: Command::Run(args) } = Cli::parse();
    let code = match run(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("branchsim: {e}");
            e.exit_code()
        }
    };
    debug_assert!((exit::PASS..=exit::CAPACITY).contains(&code));
    ExitCode::from(code as u8)
}
