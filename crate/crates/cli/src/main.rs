//! `jdsim`: Monte-Carlo BER runs, operation-count tables and self-checks
//! for the block-FFT joint detector and its reference detectors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use jdsim_cli::config_file::ScenarioSettings;
use jdsim_cli::output::{ber_csv, complexity_csv, complexity_table, write_run};
use jdsim_cli::scenario::run_scenario;
use jdsim_cli::selftest;
use jdsim_cli::{CliError, Result};
use jdsim_core::detector::JdfftOptions;
use jdsim_core::SlotConfig;

#[derive(Parser)]
#[command(name = "jdsim", version, about = "Joint-detection simulator for short-code CDMA bursts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a bit-error-rate scenario over an SNR grid.
    Ber(BerArgs),
    /// Print the per-detector operation-count model.
    Complexity(ComplexityArgs),
    /// Run the built-in numerical self-checks.
    Selftest,
}

#[derive(Args)]
struct BerArgs {
    /// Scenario file; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for ber.csv and manifest.txt.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed for channel, data and noise streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of timeslots to simulate.
    #[arg(long)]
    slots: Option<usize>,
    /// SNR grid in dB: start:stop[:step] or a comma list.
    #[arg(long)]
    snr: Option<String>,
    /// Comma list from: jdfft, jdchol, sdchol, sdfft, mf, oracle.
    #[arg(long)]
    detectors: Option<String>,
    /// Channel profile: case1, case2, case2mod or case3.
    #[arg(long)]
    channel: Option<String>,
    /// Processing length in symbols (61 = exact, 64 = radix-2).
    #[arg(long)]
    p: Option<usize>,
    /// Received phases per chip.
    #[arg(long)]
    oversample: Option<usize>,
    /// Evolve one fading process across slots instead of redrawing.
    #[arg(long)]
    correlated: bool,
    /// Number of active codes.
    #[arg(long)]
    codes: Option<usize>,
}

#[derive(Args)]
struct ComplexityArgs {
    /// Number of active codes.
    #[arg(long, default_value_t = 8)]
    codes: usize,
    /// Processing length in symbols.
    #[arg(long, default_value_t = 61)]
    p: usize,
    /// Emit CSV instead of aligned tables.
    #[arg(long)]
    csv: bool,
}

impl BerArgs {
    fn settings(&self) -> Result<ScenarioSettings> {
        let mut s = match &self.config {
            Some(path) => ScenarioSettings::load(path)?,
            None => ScenarioSettings::default(),
        };
        if let Some(seed) = self.seed {
            s.set("seed", &seed.to_string())?;
        }
        if let Some(slots) = self.slots {
            s.set("slots", &slots.to_string())?;
        }
        if let Some(snr) = &self.snr {
            s.set("snr", snr)?;
        }
        if let Some(detectors) = &self.detectors {
            s.set("detectors", detectors)?;
        }
        if let Some(channel) = &self.channel {
            s.set("channel", channel)?;
        }
        if let Some(p) = self.p {
            s.set("p", &p.to_string())?;
        }
        if let Some(oversample) = self.oversample {
            s.set("oversample", &oversample.to_string())?;
        }
        if self.correlated {
            s.set("correlated", "true")?;
        }
        if let Some(codes) = self.codes {
            s.set("codes", &codes.to_string())?;
        }
        Ok(s)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ber(args) => {
            let settings = args.settings()?;
            let cfg = settings.build()?;
            let result = run_scenario(&cfg)?;
            print!("{}", ber_csv(&result));
            if let Some(dir) = &args.out {
                write_run(dir, &settings, &result)?;
            }
            Ok(())
        }
        Command::Complexity(args) => {
            let cfg = SlotConfig::new(16, args.codes, 61, 57, 1, (0..args.codes).collect())?;
            let opts = JdfftOptions::standard(args.p);
            if args.csv {
                print!("{}", complexity_csv(&cfg, opts));
            } else {
                print!("{}", complexity_table(&cfg, opts));
            }
            Ok(())
        }
        Command::Selftest => {
            let mut failures = 0;
            for (name, outcome) in selftest::run_all() {
                match outcome {
                    Ok(()) => println!("{name}: ok"),
                    Err(why) => {
                        failures += 1;
                        println!("{name}: FAIL ({why})");
                    }
                }
            }
            if failures > 0 {
                Err(CliError::Numeric(format!("{failures} self-check(s) failed")))
            } else {
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors by default; route those to 1 so
    // exit code 2 stays reserved for numeric failures.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jdsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
