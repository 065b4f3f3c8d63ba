//! Command-line surface: parses a problem config, runs one experiment stage
//! and writes its artifacts plus a run manifest.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use shadowrate::model::ProblemConfig;
use shadowrate::ratefit::{QuantityFit, RateRow};
use shadowrate::sweep::{self, Check, Outcome, SweepConfig};
use shadowrate::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "shadowrate", version, about = "Convergence-rate experiments for localized large diffusion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Problem configuration (JSON).
    #[arg(long, global = true, default_value = "crates/cli/configs/default.json")]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Comma-separated eps values, e.g. 0.1,0.01.
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
    /// Mesh size for every stage (defaults: 2048 static, 1024 dynamics).
    #[arg(long, global = true)]
    pub mesh_n: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Also write every attractor sample as CSV.
    #[arg(long, global = true)]
    pub dump_clouds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Admissibility of the diffusion profile over the sweep.
    Check,
    /// Leading eigenvalues and the gap profile.
    Spectrum,
    EllipticRate,
    EigenRate,
    EquilibriaRate,
    SemigroupRate,
    ManifoldRate,
    AttractorRate,
    /// Every stage.
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Spectrum => "spectrum",
            Command::EllipticRate => "elliptic-rate",
            Command::EigenRate => "eigen-rate",
            Command::EquilibriaRate => "equilibria-rate",
            Command::SemigroupRate => "semigroup-rate",
            Command::ManifoldRate => "manifold-rate",
            Command::AttractorRate => "attractor-rate",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub config_sha: String,
    pub subcommand: String,
    pub versions: Versions,
    pub rows: Vec<RateRow>,
    pub fits: Vec<QuantityFit>,
    pub checks: Vec<Check>,
    pub wall_seconds: f64,
    pub pass: bool,
    pub error: Option<ErrorPayload>,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub shadowrate: &'static str,
    pub cli: &'static str,
}

#[derive(Debug, Serialize)]
pub struct ErrorPayload {
    pub kind: &'static str,
    pub message: String,
}

/// Parse a config, reporting line, column and offending key on failure.
pub fn parse_config(text: &str) -> Result<ProblemConfig, String> {
    let cfg = ProblemConfig::from_json(text).map_err(|e| {
        let key = e
            .to_string()
            .split('`')
            .nth(1)
            .map(|k| format!(" (key `{k}`)"))
            .unwrap_or_default();
        format!("config line {} column {}{key}: {e}", e.line(), e.column())
    })?;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn sweep_config(common: &Common) -> SweepConfig {
    let mut s = SweepConfig {
        seed: common.seed,
        ..SweepConfig::default()
    };
    if let Some(list) = &common.eps_list {
        s.eps_list = list.clone();
    }
    if let Some(n) = common.mesh_n {
        s.n_static = n;
        s.n_dynamics = n;
    }
    s
}

pub fn execute(command: Command, config: &ProblemConfig, common: &Common) -> shadowrate::Result<Outcome> {
    let sweep = sweep_config(common);
    match command {
        Command::Check => sweep::check(config, &sweep).map(|(_, o)| o),
        Command::Spectrum => sweep::spectrum(config, &sweep),
        Command::EllipticRate => sweep::elliptic_rate(config, &sweep),
        Command::EigenRate => sweep::eigen_rate(config, &sweep),
        Command::EquilibriaRate => sweep::equilibria_rate(config, &sweep),
        Command::SemigroupRate => sweep::semigroup_rate(config, &sweep),
        Command::ManifoldRate => sweep::manifold_rate(config, &sweep),
        Command::AttractorRate => {
            let cells = sweep::attractor_cells(config, &sweep)?;
            sweep::attractor_outcome(&cells, &sweep, common.dump_clouds)
        }
        Command::All => sweep::all(config, &sweep),
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Config(_) => "config",
        Error::Io(_) => "io",
        Error::FitRejected { .. } => "fit",
        _ => "numerical",
    }
}

fn write_manifest(out: &Path, manifest: &Manifest) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(manifest).expect("serializable") + "\n";
    fs::write(out.join("manifest.json"), text)
}

/// Run one parsed invocation; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let start = Instant::now();
    let common = &cli.common;
    if let Err(e) = fs::create_dir_all(&common.out) {
        eprintln!("cannot create {}: {e}", common.out.display());
        return EXIT_NUMERICAL;
    }
    let text = fs::read_to_string(&common.config);
    let config_sha = text
        .as_ref()
        .map(|t| format!("{:x}", Sha256::digest(t.as_bytes())))
        .unwrap_or_default();
    let mut manifest = Manifest {
        config_sha,
        subcommand: cli.command.name().into(),
        versions: Versions {
            shadowrate: env!("CARGO_PKG_VERSION"),
            cli: env!("CARGO_PKG_VERSION"),
        },
        rows: Vec::new(),
        fits: Vec::new(),
        checks: Vec::new(),
        wall_seconds: 0.0,
        pass: false,
        error: None,
    };
    let finish = |manifest: &mut Manifest, code: i32| -> i32 {
        manifest.wall_seconds = start.elapsed().as_secs_f64();
        if let Err(e) = write_manifest(&common.out, manifest) {
            eprintln!("cannot write manifest: {e}");
            return EXIT_NUMERICAL;
        }
        code
    };
    let parsed = match text {
        Err(e) => Err(format!("cannot read {}: {e}", common.config.display())),
        Ok(t) => parse_config(&t),
    };
    let config = match parsed {
        Ok(c) => c,
        Err(message) => {
            eprintln!("{message}");
            manifest.error = Some(ErrorPayload { kind: "config", message });
            return finish(&mut manifest, EXIT_CONFIG);
        }
    };
    match execute(cli.command, &config, common) {
        Err(e) => {
            let kind = error_kind(&e);
            eprintln!("{}: {kind} error: {e}", cli.command.name());
            manifest.error = Some(ErrorPayload {
                kind,
                message: format!("{}: {e}", cli.command.name()),
            });
            let code = if kind == "config" { EXIT_CONFIG } else { EXIT_NUMERICAL };
            finish(&mut manifest, code)
        }
        Ok(outcome) => {
            for (name, body) in &outcome.artifacts {
                if let Err(e) = fs::write(common.out.join(name), body) {
                    eprintln!("cannot write {name}: {e}");
                    return finish(&mut manifest, EXIT_NUMERICAL);
                }
            }
            for f in &outcome.report.fits {
                println!(
                    "{:<20} slope {:>7.3} vs {:?} (min {:.2}, R2 {:.3})  {}",
                    f.quantity,
                    f.slope,
                    f.model,
                    f.min_slope,
                    f.r2,
                    if f.pass { "PASS" } else { "FAIL" }
                );
            }
            for c in &outcome.checks {
                println!(
                    "{:<32} {:>11.4e} limit {:.3e}  {}",
                    c.name,
                    c.value,
                    c.limit,
                    if c.pass { "PASS" } else { "FAIL" }
                );
            }
            manifest.pass = outcome.pass();
            manifest.rows = outcome.report.rows;
            manifest.fits = outcome.report.fits;
            manifest.checks = outcome.checks;
            let code = if manifest.pass { EXIT_PASS } else { EXIT_FAIL };
            finish(&mut manifest, code)
        }
    }
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            code
        }
    }
}
