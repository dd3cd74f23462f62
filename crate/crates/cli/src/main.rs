use std::path::PathBuf;
use std::process::ExitCode;

use bfmimo_cli::{run_and_write, verify, CliError, CliResult, Command, DecorrPacking, Overrides, ScenarioConfig, SnrPreset};
use clap::{Parser, Subcommand};

/// Beamforming versus MIMO experiments: spectra, outage capacity sweeps and
/// headline numbers, written as CSV/JSON with checksummed manifests.
#[derive(Parser)]
#[command(name = "bfmimo", version)]
struct Cli {
    /// Scenario config (JSON). Missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Channel draws per search round (and per envelope candidate).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Fresh candidates per search round.
    #[arg(long, global = true)]
    candidates: Option<usize>,
    /// Outage probability, e.g. 0.01 for 1%-tiles.
    #[arg(long, global = true)]
    outage: Option<f64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// APOD spectrum sweep of figure 4, 5, 6, 7 or 9.
    Spectrum {
        #[arg(long)]
        figure: u8,
        /// Bind the abstract sweep to the configured carrier and spread so λ/2 caps apply.
        #[arg(long)]
        physical: bool,
    },
    /// Eigenvectors and beam patterns of the configured array.
    Modes,
    /// Two-mode MISO enveloping over power splits.
    Envelope,
    /// MIMO vs BF across angular spread on a fixed physical array.
    CapacityVsSpread,
    /// MIMO vs BF across aperture length.
    CapacityVsDecorr {
        #[arg(long, value_enum, default_value = "half-lambda")]
        packing: DecorrPacking,
    },
    /// MIMO vs BF across SNR.
    CapacityVsSnr {
        #[arg(long, value_enum, default_value = "fig12")]
        preset: SnrPreset,
    },
    /// Headline capacities at the configured aperture and twice it.
    Headline,
    /// Correlation versus separation and angular spectrum shapes.
    Propagation,
    /// Re-run a manifest and compare checksums.
    Verify { manifest: PathBuf },
}

fn run(cli: Cli) -> CliResult<()> {
    let command = match cli.command {
        Cmd::Verify { manifest } => {
            let report = verify(&manifest)?;
            if !report.ok() {
                return Err(CliError::Validation(format!("checksum mismatch: {}", report.mismatches.join(", "))));
            }
            println!("verified {} output(s)", report.checked);
            return Ok(());
        }
        Cmd::Spectrum { figure, physical } => Command::Spectrum { figure, physical },
        Cmd::Modes => Command::Modes,
        Cmd::Envelope => Command::Envelope,
        Cmd::CapacityVsSpread => Command::CapacityVsSpread,
        Cmd::CapacityVsDecorr { packing } => Command::CapacityVsDecorr { packing },
        Cmd::CapacityVsSnr { preset } => Command::CapacityVsSnr { preset },
        Cmd::Headline => Command::Headline,
        Cmd::Propagation => Command::Propagation,
    };
    let mut config = match &cli.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    config.apply(&Overrides { seed: cli.seed, trials: cli.trials, candidates: cli.candidates, outage: cli.outage });
    config.validate()?;
    let manifest = run_and_write(&command, &config, &cli.out)?;
    for o in &manifest.outputs {
        println!("{}  {}", o.sha256, cli.out.join(&o.file).display());
    }
    Ok(())
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
