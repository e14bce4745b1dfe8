//! Command-line front end: `lucas-modes <subcommand> --config <path> --out <dir>`.
//!
//! Exit status: 0 success, 2 invalid input, 3 numerical failure, 4 a
//! `reproduce` check failed. Every error prints one JSON line on stderr.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::analyze;
use crate::error::{Error, Result};
use crate::figures::{self, Figure, Options};
use crate::lattice::LatticeFamily;
use crate::spectral::{check_nhph, eigendecompose, sweep, zero_crossings};
use config::{parse_config, Analysis, GridSpec, ScenarioConfig};
use output::{json_file, mode_csv, read_mode_csv, spectrum_csv, sweep_csv, write_all, OutputFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_ACCEPTANCE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "lucas-modes",
    version,
    about = "Zero modes of gain/loss tight-binding lattices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario configuration (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Energy tolerance for zero-mode roots.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Sweep grid `lo:hi:step`.
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues at one coupling.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long = "t-prime")]
        t_prime: Option<f64>,
    },
    /// Tracked branches and events over a grid in t'.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Zero modes inside the configured bracket.
    FindZero {
        #[command(flatten)]
        common: Common,
    },
    /// Diagnostics for a saved mode profile, or for the zero modes in the bracket.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Mode profile written by an earlier run.
        #[arg(long)]
        mode: Option<PathBuf>,
        #[arg(long = "t-prime")]
        t_prime: Option<f64>,
    },
    /// Regenerates a figure and checks it against the expected values.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        #[command(flatten)]
        common: Common,
    },
}

/// Runs the tool on `args` (including the program name) and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let message = e.to_string();
            let first = message
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            emit(&Diagnostic {
                error: "usage",
                message: first.to_string(),
                exit: EXIT_VALIDATION,
                line: None,
                column: None,
                key: None,
            });
            return EXIT_VALIDATION;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code(&e);
            let (line, column, key) = match &e {
                Error::Syntax { line, column, .. } => (Some(*line), Some(*column), None),
                Error::Semantic { key, .. } => (None, None, Some(key.clone())),
                _ => (None, None, None),
            };
            emit(&Diagnostic {
                error: e.kind(),
                message: e.to_string(),
                exit: code,
                line,
                column,
                key,
            });
            code
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NumericalFailure { .. }
        | Error::TrackingAmbiguity { .. }
        | Error::EpInterference { .. }
        | Error::SymmetryViolation { .. }
        | Error::Geometry(_)
        | Error::Overflow { .. } => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}

#[derive(Serialize)]
struct Diagnostic {
    error: &'static str,
    message: String,
    exit: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    column: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    key: Option<String>,
}

fn emit(d: &Diagnostic) {
    eprintln!(
        "{}",
        serde_json::to_string(d).expect("diagnostic serializes")
    );
}

struct Context {
    config: Option<ScenarioConfig>,
    out: PathBuf,
    tol: f64,
    grid: Option<Vec<f64>>,
}

fn context(common: &Common, config_required: bool) -> Result<Context> {
    let config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            Some(parse_config(&text)?)
        }
        None if config_required => return Err(Error::semantic("config", "--config is required")),
        None => None,
    };
    let out = common
        .out
        .clone()
        .or_else(|| config.as_ref().and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let tol = match common.tol {
        Some(t) if !(t.is_finite() && t > 0.0) => {
            return Err(Error::semantic("tol", format!("must be positive, got {t}")))
        }
        Some(t) => t,
        None => config
            .as_ref()
            .map_or(figures::TOL_E, |c| c.tolerances.energy),
    };
    let grid = match &common.grid {
        Some(text) => Some(GridSpec::parse(text)?.points()?),
        None => None,
    };
    Ok(Context {
        config,
        out,
        tol,
        grid,
    })
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Reproduce { figure, common } => {
            let ctx = context(&common, false)?;
            let result = figures::reproduce(
                figure,
                &Options {
                    tol_e: ctx.tol,
                    grid: ctx.grid,
                },
            )?;
            write_all(&ctx.out, &result.files)?;
            for c in &result.checks {
                println!(
                    "{} {}: {} (target {})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.target
                );
            }
            for n in &result.notes {
                println!("note: {n}");
            }
            Ok(if result.passed() {
                EXIT_OK
            } else {
                EXIT_ACCEPTANCE
            })
        }
        Command::Spectrum { common, t_prime } => {
            let ctx = context(&common, true)?;
            let files = spectrum_files(&ctx, t_prime)?;
            finish(&ctx, files)
        }
        Command::Sweep { common } => {
            let ctx = context(&common, true)?;
            let files = sweep_files(&ctx)?;
            finish(&ctx, files)
        }
        Command::FindZero { common } => {
            let ctx = context(&common, true)?;
            let files = zero_files(&ctx)?;
            finish(&ctx, files)
        }
        Command::Analyze {
            common,
            mode,
            t_prime,
        } => {
            let ctx = context(&common, true)?;
            let files = match mode {
                Some(path) => analyze_file(&ctx, &path, t_prime)?,
                None => zero_files(&ctx)?,
            };
            finish(&ctx, files)
        }
    }
}

fn finish(ctx: &Context, files: Vec<OutputFile>) -> Result<i32> {
    write_all(&ctx.out, &files)?;
    Ok(EXIT_OK)
}

fn cfg(ctx: &Context) -> &ScenarioConfig {
    ctx.config
        .as_ref()
        .expect("config required for this command")
}

fn t_prime_of(ctx: &Context, flag: Option<f64>) -> Result<f64> {
    let t = flag
        .or(cfg(ctx).t_prime)
        .ok_or_else(|| Error::semantic("t_prime", "needed: set `t_prime` or pass --t-prime"))?;
    if !t.is_finite() {
        return Err(Error::semantic("t_prime", "must be finite"));
    }
    Ok(t)
}

fn spectrum_files(ctx: &Context, flag: Option<f64>) -> Result<Vec<OutputFile>> {
    let c = cfg(ctx);
    let t = t_prime_of(ctx, flag)?;
    let modes = eigendecompose(&c.family()?.build(t)?.to_matrix())?;
    let pairing = check_nhph(&modes, c.tolerances.nhph)?;
    Ok(vec![
        spectrum_csv(t, &modes)?,
        json_file("events.json", &serde_json::json!({ "nhph": pairing }))?,
    ])
}

fn sweep_files(ctx: &Context) -> Result<Vec<OutputFile>> {
    let c = cfg(ctx);
    let grid = match &ctx.grid {
        Some(g) => g.clone(),
        None => c.grid()?,
    };
    let traj = sweep(&c.family()?, &grid)?;
    Ok(vec![
        sweep_csv(&traj)?,
        json_file(
            "events.json",
            &serde_json::json!({ "sweep_events": traj.events }),
        )?,
    ])
}

fn zero_files(ctx: &Context) -> Result<Vec<OutputFile>> {
    let c = cfg(ctx);
    let [lo, hi] = c
        .bracket
        .ok_or_else(|| Error::semantic("bracket", "needed: set `bracket` to [lo, hi]"))?;
    let family = c.family()?;
    let roots = zero_crossings(&family, (lo, hi), ctx.tol)?;
    let mut files = Vec::new();
    let mut records = Vec::new();
    for (k, z) in roots.iter().enumerate() {
        let id = format!("zero_{}", k + 1);
        let g = family.build(z.t_prime)?;
        files.push(mode_csv(&id, &z.mode, &g)?);
        if c.analyses.is_empty() || c.analyses.contains(&Analysis::Analyze) {
            files.push(json_file(
                &format!("report_{id}.json"),
                &analyze(&z.mode, &g, Some(z.t_prime), family.gamma(), 1.0)?,
            )?);
        }
        records.push(serde_json::json!({
            "id": id,
            "t_prime": z.t_prime,
            "branch_id": z.branch_id,
            "re_energy": z.mode.energy.re,
            "im_energy": z.mode.energy.im,
        }));
    }
    files.push(json_file(
        "events.json",
        &serde_json::json!({ "zero_modes": records }),
    )?);
    Ok(files)
}

fn analyze_file(ctx: &Context, path: &Path, flag: Option<f64>) -> Result<Vec<OutputFile>> {
    let c = cfg(ctx);
    let t = t_prime_of(ctx, flag)?;
    let family = c.family()?;
    let g = family.build(t)?;
    let mode = read_mode_csv(path, &g)?;
    let report = analyze(&mode, &g, Some(t), family.gamma(), 1.0)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .map(|s| s.strip_prefix("mode_").unwrap_or(s).to_string())
        .unwrap_or_else(|| "mode".into());
    Ok(vec![json_file(&format!("report_{stem}.json"), &report)?])
}
