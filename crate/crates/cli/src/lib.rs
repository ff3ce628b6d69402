//! `shrinklab` command-line front end.
//!
//! A run is described by a [`RunConfig`], built from an optional JSON file
//! and command-line flags (flags win). Each run writes `<command>.json`
//! and CSV detail files into the output directory and exits with 0 when
//! every check passes, 1 when a check fails and 2 on a usage error.

pub mod commands;
pub mod config;
pub mod criteria;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, FromArgMatches, Parser};
use serde::Serialize;
use shrinklab_core::report::Record;

pub use config::{parse_config, parse_config_str, Command, RunConfig, Surface, UsageError};
use criteria::CriterionReport;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(#[from] UsageError),
    #[error(transparent)]
    Core(#[from] shrinklab_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => EXIT_USAGE,
            _ => EXIT_CHECK_FAILED,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "shrinklab",
    version,
    about = "Numerical experiments on self-shrinkers of mean curvature flow"
)]
pub struct Cli {
    /// Experiment to run (may instead come from the config file).
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Flat JSON config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// plane, sphere, cylinder or a path to an OFF file.
    #[arg(long)]
    pub surface: Option<String>,
    /// Refinement level of canonical meshes (1 to 8).
    #[arg(long)]
    pub resolution: Option<u32>,
    /// Tolerance override NAME=VALUE; repeatable.
    #[arg(long = "tolerance", value_name = "NAME=VALUE")]
    pub tolerances: Vec<String>,
    /// Output directory (else $OUTPUT_DIR, else ./shrinklab-out).
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Cutoff radius for certify.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Dimension n for conformal.
    #[arg(long)]
    pub dimension: Option<u32>,
    /// Fourier modes for spectrum, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub modes: Option<Vec<u32>>,
    /// Number of eigenvalues per mode for spectrum.
    #[arg(long)]
    pub count: Option<usize>,
    /// Truncation height Z for spectrum.
    #[arg(long)]
    pub truncation: Option<f64>,
    /// Final time for flow, in (-1, 0).
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    /// Base seed for random variation fields.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Base point x,y,z for the mesh certificate.
    #[arg(
        long,
        value_delimiter = ',',
        num_args = 1,
        allow_negative_numbers = true
    )]
    pub base_point: Option<Vec<f64>>,
}

impl Cli {
    /// Parses arguments; help and version requests come back as `Err` with
    /// exit status 0.
    pub fn parse_args<I, T>(args: I) -> Result<Cli, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let matches = Cli::command()
            .after_help(config::tolerance_help())
            .try_get_matches_from(args)?;
        Cli::from_arg_matches(&matches)
    }

    /// Config file (if any) overlaid with the flags.
    pub fn to_config(&self) -> Result<RunConfig, UsageError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let mut c = parse_config(path)?;
                if let Some(cmd) = self.command {
                    c.command = cmd;
                }
                c
            }
            None => RunConfig::new(self.command.ok_or_else(|| {
                UsageError(
                    "no command given: pass one as the first argument or via --config".into(),
                )
            })?),
        };
        if let Some(s) = &self.surface {
            cfg.surface = s.parse()?;
        }
        if let Some(r) = self.resolution {
            cfg.resolution = Some(r);
        }
        for t in &self.tolerances {
            let (name, value) = config::parse_tolerance_flag(t)?;
            cfg.tolerances.insert(name, value);
        }
        if let Some(d) = &self.output_dir {
            cfg.output_dir = Some(d.clone());
        }
        cfg.radius = self.radius.or(cfg.radius);
        cfg.dimension = self.dimension.or(cfg.dimension);
        cfg.modes = self.modes.clone().or(cfg.modes.take());
        cfg.count = self.count.or(cfg.count);
        cfg.truncation = self.truncation.or(cfg.truncation);
        cfg.t_end = self.t_end.or(cfg.t_end);
        cfg.seed = self.seed.or(cfg.seed);
        if let Some(p) = &self.base_point {
            let p: [f64; 3] = p
                .as_slice()
                .try_into()
                .map_err(|_| UsageError(format!("--base-point needs 3 values, got {}", p.len())))?;
            cfg.base_point = Some(p);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Serialize)]
struct Document<'a, T: Serialize> {
    command: Command,
    config: &'a RunConfig,
    passed: bool,
    failures: usize,
    records: &'a [Record],
    result: T,
}

/// Outcome of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report_path: PathBuf,
    pub records: Vec<Record>,
    /// One entry per criterion for `report-all`.
    pub criteria: Vec<CriterionReport>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.passed) && self.criteria.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Record> {
        self.records.iter().filter(|r| !r.passed).collect()
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Runs the configured experiment and writes its reports.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    cfg.validate()?;
    let out = cfg.resolved_output_dir();
    std::fs::create_dir_all(&out)?;
    let report_path = out.join(format!("{}.json", cfg.command.name()));

    if cfg.command == Command::ReportAll {
        let criteria = criteria::report_all(cfg)?;
        let records: Vec<Record> = criteria
            .iter()
            .flat_map(|c| c.records.iter().cloned())
            .collect();
        let doc = Document {
            command: cfg.command,
            config: cfg,
            passed: criteria.iter().all(|c| c.passed),
            failures: records.iter().filter(|r| !r.passed).count(),
            records: &[],
            result: &criteria,
        };
        write_json(&report_path, &doc)?;
        return Ok(RunOutcome {
            report_path,
            records,
            criteria,
        });
    }

    let output = match cfg.command {
        Command::Residual => commands::run_residual(cfg, &out)?,
        Command::Functional => commands::run_functional(cfg, &out)?,
        Command::VariationCheck => commands::run_variation(cfg, &out)?,
        Command::Conformal => commands::run_conformal(cfg, &out)?,
        Command::Spectrum => commands::run_spectrum(cfg, &out)?,
        Command::Certify => commands::run_certify(cfg, &out)?,
        Command::Flow => commands::run_flow(cfg, &out)?,
        Command::ShootTorus => commands::run_shoot_torus(cfg, &out)?,
        Command::ReportAll => unreachable!("handled above"),
    };
    let failures = output.records.iter().filter(|r| !r.passed).count();
    let doc = Document {
        command: cfg.command,
        config: cfg,
        passed: failures == 0,
        failures,
        records: &output.records,
        result: &output.result,
    };
    write_json(&report_path, &doc)?;
    Ok(RunOutcome {
        report_path,
        records: output.records,
        criteria: Vec::new(),
    })
}

/// Entry point behind `main`; returns the exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::parse_args(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let cfg = match cli.to_config() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "usage error: {e}");
            return EXIT_USAGE;
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            for c in &outcome.criteria {
                let _ = writeln!(stdout, "{}", c.line());
            }
            let _ = writeln!(stdout, "report: {}", outcome.report_path.display());
            if outcome.passed() {
                EXIT_PASS
            } else {
                let _ = writeln!(stderr, "failed checks:");
                for r in outcome.failures() {
                    let _ = writeln!(
                        stderr,
                        "  {} on {}: {:e} (required {} {:e})",
                        r.quantity, r.mesh_id, r.value, r.relation, r.tolerance
                    );
                }
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            let code = e.exit_code();
            let prefix = if code == EXIT_USAGE {
                "usage error"
            } else {
                "error"
            };
            let _ = writeln!(stderr, "{prefix}: {e}");
            code
        }
    }
}
