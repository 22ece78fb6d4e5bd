use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use so6chain::bethe::Sector;
use so6chain::commands::{run_bae, run_compare, run_spectrum, with_boundary, CommandError, DEFAULT_RESTARTS};
use so6chain::config::{BoundaryKind, ConfigError, RunConfig};
use so6chain::report::{to_json, VerificationReport};
use so6chain::verify::{run_verify, Suite};

#[derive(Parser, Debug)]
#[command(name = "so6chain", version, about = "Checks and spectra for the so(6) spin chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report path. Data dumps go next to it. Without it the report goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the boundary kind of the configuration.
    #[arg(long, global = true)]
    boundary: Option<BoundaryKind>,
    /// Overrides the seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Random Newton starts per sector.
    #[arg(long, global = true, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Runs an invariant suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
    },
    /// Computes the joint eigencurves and checks their relations.
    Spectrum,
    /// Solves the Bethe equations in one sector and matches the states.
    Bae {
        /// L1,L2,L3; defaults to the empty periodic sector or L1 = N when open.
        #[arg(long)]
        sector: Option<Sector>,
    },
    /// Spectrum, a sector sweep of Bethe states and the match report.
    Compare,
}

fn load_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| ConfigError::new("<file>", format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    cfg = with_boundary(&cfg, cli.boundary);
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `report.json` becomes `report.<kind>.json`.
fn data_path(report: &Path, kind: &str) -> PathBuf {
    let stem = report.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    report.with_file_name(format!("{stem}.{kind}.json"))
}

fn emit<T: Serialize>(out: Option<&Path>, report: &VerificationReport, data: Option<(&str, &T)>) -> Result<(), String> {
    match out {
        Some(path) => {
            fs::write(path, to_json(report)).map_err(|e| format!("{}: {e}", path.display()))?;
            if let Some((kind, data)) = data {
                let p = data_path(path, kind);
                fs::write(&p, to_json(data)).map_err(|e| format!("{}: {e}", p.display()))?;
            }
        }
        None => print!("{}", to_json(report)),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<VerificationReport, CommandError> {
    let cfg = load_config(cli)?;
    let out = cli.out.clone().or_else(|| cfg.output_path.as_ref().map(PathBuf::from));
    let out = out.as_deref();
    let report = match &cli.command {
        Command::Verify { suite } => {
            let report = run_verify(*suite, &cfg)?;
            emit::<()>(out, &report, None).map_err(CommandError::Failed)?;
            report
        }
        Command::Spectrum => {
            let (report, dump) = run_spectrum(&cfg)?;
            emit(out, &report, Some(("curves", &dump))).map_err(CommandError::Failed)?;
            report
        }
        Command::Bae { sector } => {
            let sector = sector.unwrap_or(match cfg.boundary {
                BoundaryKind::Periodic => Sector::new(0, 0, 0),
                BoundaryKind::Open => Sector::new(cfg.n_sites, 0, 0),
            });
            let (report, dump) = run_bae(&cfg, sector, cli.restarts)?;
            emit(out, &report, Some(("states", &dump))).map_err(CommandError::Failed)?;
            report
        }
        Command::Compare => {
            let (report, dump) = run_compare(&cfg, cli.restarts)?;
            emit(out, &report, Some(("compare", &dump))).map_err(CommandError::Failed)?;
            report
        }
    };
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let s = &report.summary;
            eprintln!("{}: {} entries, {} failed", report.command, s.n_entries, s.n_failed);
            for e in report.entries.iter().filter(|e| !e.pass) {
                eprintln!("  FAIL {} ({:e} vs {:e})", e.check_id, e.max_residual, e.tolerance);
            }
            ExitCode::from(if s.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
