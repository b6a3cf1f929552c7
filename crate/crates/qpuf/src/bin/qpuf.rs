use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qpuf::commands::{self, Command, Overrides, Scenario};
use qpuf::{ExperimentConfig, EXIT_TAMPER};

#[derive(Parser)]
#[command(
    name = "qpuf",
    version,
    about = "q-ary polar wiretap key generation for an enclosure PUF"
)]
struct Cli {
    /// Experiment configuration (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Device, channel, construction, FER or attack-run count of the command.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run a single field order.
    #[arg(long, global = true)]
    q: Option<usize>,
    /// Run a single analog helper data mode.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    with_helper_data: Option<bool>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate enrollment responses and write them as CSV.
    Generate,
    /// Estimate legitimate, attacker and evaluation channel models.
    Estimate,
    /// Construct wiretap codes over the d sweep and write the report.
    Construct,
    /// Measure frame error rates of the constructed codes.
    Fer,
    /// Enroll a device and reproduce its key under benign, hot and attacked
    /// measurements.
    Demo {
        #[arg(long, value_enum, default_value_t = DemoScenario::Benign)]
        scenario: DemoScenario,
    },
    /// Construct with every nonzero kernel parameter.
    SweepAlpha,
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoScenario {
    Benign,
    Hot,
    Attack,
    All,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let command = match cli.command {
        Cmd::Generate => Command::Generate,
        Cmd::Estimate => Command::Estimate,
        Cmd::Construct => Command::Construct,
        Cmd::Fer => Command::Fer,
        Cmd::Demo { scenario } => Command::Demo(match scenario {
            DemoScenario::Benign => Scenario::Benign,
            DemoScenario::Hot => Scenario::Hot,
            DemoScenario::Attack => Scenario::Attack,
            DemoScenario::All => Scenario::All,
        }),
        Cmd::SweepAlpha => Command::SweepAlpha,
    };
    let overrides = Overrides {
        seed: cli.seed,
        trials: cli.trials,
        out: cli.out,
        q: cli.q,
        with_helper_data: cli.with_helper_data,
    };
    let result = cli
        .config
        .as_deref()
        .map_or_else(|| Ok(ExperimentConfig::default()), ExperimentConfig::load)
        .and_then(|cfg| commands::resolve(cfg, &overrides, command))
        .and_then(|cfg| commands::run(&cfg, command));
    match result {
        Ok(outcome) => {
            let s = outcome.summary.trim_end();
            if !s.is_empty() {
                println!("{s}");
            }
            if outcome.tamper_detected {
                ExitCode::from(EXIT_TAMPER as u8)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
