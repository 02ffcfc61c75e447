use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lpspec_cli::config::ExperimentConfig;
use lpspec_cli::run::{self, Artifact, RunError, Status};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "lpspec", version, about = "L^p spectral regions on conformally compact model collars")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (key = value lines; repeated keys form lists).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for JSON reports and figures.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the JSON report on stdout (the default when --out is absent).
    #[arg(long, global = true)]
    json: bool,
    /// Write SVG figures (region and report).
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Region parameters and figures.
    Region,
    /// Quasimode residual sweep.
    Quasimode,
    /// Volume growth rate and comparison bound.
    Volume,
    /// Discrete spectral bottom and resolvent probes.
    Bottom,
    /// Runs everything into one output directory.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Region => "region",
            Command::Quasimode => "quasimode",
            Command::Volume => "volume",
            Command::Bottom => "bottom",
            Command::Report => "report",
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), RunError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

/// Emits one report according to the output flags.
fn emit<T: Serialize>(cli: &Cli, name: &str, report: &T, artifacts: &[Artifact]) -> Result<(), RunError> {
    let json = run::to_json(report);
    if cli.json || cli.out.is_none() {
        print!("{json}");
    }
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    if let Some(out) = &cli.out {
        write_file(out, &format!("{name}.json"), &json)?;
    }
    for a in artifacts {
        write_file(&dir, &a.name, &a.contents)?;
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Summary {
    seed: u64,
    sections: Vec<SectionStatus>,
    exit_code: i32,
}

#[derive(Serialize)]
struct SectionStatus {
    name: &'static str,
    status: Status,
    error: Option<String>,
}

fn report(cfg: &ExperimentConfig, out: &Path) -> Result<Status, RunError> {
    let figures = out.join("figures");
    let mut sections = Vec::new();
    let mut record = |name: &'static str, result: Result<Status, RunError>| -> Result<Status, RunError> {
        let (status, error) = match result {
            Ok(s) => (s, None),
            Err(RunError::Numerical(m)) => (Status::NumericalFailure, Some(m)),
            Err(e) => return Err(e),
        };
        sections.push(SectionStatus { name, status, error });
        Ok(status)
    };

    let mut worst = Status::Ok;
    let region = run::run_region(cfg, true).and_then(|(r, arts)| {
        write_file(out, "region.json", &run::to_json(&r))?;
        for a in &arts {
            write_file(&figures, &a.name, &a.contents)?;
        }
        Ok(Status::Ok)
    });
    worst = worst.max(record("region", region)?);
    let quasimode = run::run_quasimode(cfg).and_then(|(t, status)| {
        write_file(out, "quasimode.json", &run::to_json(&t))?;
        write_file(out, "quasimode.csv", &run::quasimode_csv(&t))?;
        Ok(status)
    });
    worst = worst.max(record("quasimode", quasimode)?);
    let volume = run::run_volume(cfg).and_then(|v| {
        write_file(out, "volume.json", &run::to_json(&v))?;
        Ok(Status::Ok)
    });
    worst = worst.max(record("volume", volume)?);
    let bottom = run::run_bottom(cfg).and_then(|b| {
        write_file(out, "bottom.json", &run::to_json(&b))?;
        Ok(Status::Ok)
    });
    worst = worst.max(record("bottom", bottom)?);

    let summary = Summary { seed: cfg.seed, sections, exit_code: worst.exit_code() };
    write_file(out, "summary.json", &run::to_json(&summary))?;
    Ok(worst)
}

fn execute(cli: &Cli) -> Result<Status, RunError> {
    let path = cli.config.as_ref().ok_or_else(|| {
        RunError::Config(lpspec_cli::ConfigError::Key {
            key: "--config".into(),
            message: "a config file is required".into(),
        })
    })?;
    let mut cfg = ExperimentConfig::from_path(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match cli.command {
        Command::Region => {
            let (r, arts) = run::run_region(&cfg, cli.svg)?;
            emit(cli, "region", &r, &arts)?;
            Ok(Status::Ok)
        }
        Command::Quasimode => {
            let (t, status) = run::run_quasimode(&cfg)?;
            emit(cli, "quasimode", &t, &[])?;
            if let Some(out) = &cli.out {
                write_file(out, "quasimode.csv", &run::quasimode_csv(&t))?;
            }
            Ok(status)
        }
        Command::Volume => {
            emit(cli, "volume", &run::run_volume(&cfg)?, &[])?;
            Ok(Status::Ok)
        }
        Command::Bottom => {
            emit(cli, "bottom", &run::run_bottom(&cfg)?, &[])?;
            Ok(Status::Ok)
        }
        Command::Report => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("lpspec-report"));
            report(&cfg, &out)
        }
    }
}

fn init_threads() {
    if let Some(n) = std::env::var("LPSPEC_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // Fails only if a pool already exists, which cannot happen this early.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    match execute(&cli) {
        Ok(status) => {
            if status != Status::Ok {
                eprintln!("lpspec {}: {:?}", cli.command.name(), status);
            }
            ExitCode::from(status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("lpspec {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
