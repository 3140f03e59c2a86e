//! The `dioph` command line: one subcommand per experiment, seeded and
//! reproducible, with JSON or CSV output.

pub mod commands;
pub mod config;
pub mod params;

use std::ffi::OsString;
use std::io::Write;

use clap::{Arg, ArgAction, Command};
use serde::Serialize;

use dioph_core::numeric::{PrecisionPolicy, PRECISION_ENV};

use crate::config::{Format, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}", .0.join("\n"))]
    Validation(Vec<String>),
    #[error(transparent)]
    Core(#[from] dioph_core::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Core(e) if e.is_ambiguity() => 3,
            CliError::Core(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

fn global_args() -> Vec<Arg> {
    let value = |name: &'static str, help: &'static str| Arg::new(name).long(name).global(true).help(help);
    vec![
        value("config", "JSON config file; flags override its values"),
        value("seed", "master seed [default: 0]"),
        value("precision-bits", "starting working precision in bits [default: 128]"),
        value("max-precision-bits", "precision cap in bits [env: DIOPH_PRECISION_BITS, default: 4096]"),
        value("format", "json or csv [default: json]"),
        value("output", "write the report here instead of standard output"),
        value("jobs", "worker threads (does not change the output)"),
    ]
}

pub fn cli() -> Command {
    let mut cmd = Command::new("dioph")
        .version(VERSION)
        .about("Perturbed Khintchine systems, lattice counts, discrepancy and Piatetski-Shapiro experiments")
        .subcommand_required(true)
        .args(global_args());
    for c in params::commands() {
        let mut sub = Command::new(c.name).about(c.about);
        for p in &c.params {
            let mut arg = Arg::new(p.name).long(p.name).help(p.help);
            arg = match p.kind {
                params::ParamKind::Flag => arg.action(ArgAction::SetTrue),
                params::ParamKind::Value => arg.allow_hyphen_values(true),
            };
            if let Some(d) = p.default {
                arg = arg.help(format!("{} [default: {d}]", p.help));
            }
            sub = sub.arg(arg);
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    result: &'a serde_json::Value,
}

fn render(cfg: &RunConfig, report: &commands::Report) -> Result<Vec<u8>, CliError> {
    match cfg.format {
        Format::Json => {
            let env = Envelope { tool: "dioph", version: VERSION, config: cfg, result: &report.result };
            let mut out = serde_json::to_vec_pretty(&env).map_err(|e| CliError::Io(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            // the run's identity goes in a trailing column of the first row
            let echo = serde_json::to_string(&serde_json::json!({ "tool": "dioph", "version": VERSION, "config": cfg }))
                .map_err(|e| CliError::Io(e.to_string()))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Io(e.to_string());
            w.write_record(report.header.iter().copied().chain(["config"])).map_err(io)?;
            for (i, row) in report.rows.iter().enumerate() {
                let last = if i == 0 { echo.as_str() } else { "" };
                w.write_record(row.iter().map(String::as_str).chain([last])).map_err(io)?;
            }
            if report.rows.is_empty() {
                let blanks = vec![""; report.header.len()];
                w.write_record(blanks.into_iter().chain([echo.as_str()])).map_err(io)?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn execute(matches: &clap::ArgMatches) -> Result<(RunConfig, Vec<u8>), CliError> {
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let specs = params::commands().into_iter().find(|c| c.name == name).expect("known subcommand").params;
    let cfg = config::resolve(name, &specs, sub, sub, std::env::var(PRECISION_ENV).ok())?;
    let policy = PrecisionPolicy { start_bits: cfg.precision_bits, cap_bits: cfg.max_precision_bits };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| CliError::Io(e.to_string()))?;
    let report = pool.install(|| commands::run(&cfg, &policy))?;
    let bytes = render(&cfg, &report)?;
    Ok((cfg, bytes))
}

/// Runs one invocation and returns its exit code: 0 on success, 2 on invalid
/// input or a failed precondition, 3 when a decision stays ambiguous at the
/// precision cap, 1 on I/O failure.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = execute(&matches).and_then(|(cfg, bytes)| match &cfg.output {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => stdout.write_all(&bytes).map_err(|e| CliError::Io(e.to_string())),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
