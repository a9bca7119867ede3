//! Argument parsing and dispatch for the `sweepjt` command.

use std::path::{Path, PathBuf};

use clap::{ArgGroup, CommandFactory, Parser};

use sweepjt_core::backend;
use sweepjt_core::config::ConfigTable;
use sweepjt_core::console::Console;
use sweepjt_core::error::{Error, ExitCode, Result};
use sweepjt_core::grammar::{load_parameter_file, load_template_appendix, TemplateAppendix};
use sweepjt_core::jobs::{InfoMode, JobManager};
use sweepjt_core::template::{create_templates, Selector};
use sweepjt_core::value::SweepRng;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const LICENSE: &str = "sweepjt is distributed under the Apache License, Version 2.0.\n\
See https://www.apache.org/licenses/LICENSE-2.0 for the full text.";

#[derive(Debug, Parser)]
#[command(
    name = "sweepjt",
    about = "Compose parameter-sweep job templates and manage their jobs",
    override_usage = "sweepjt [OPTION] SUBCOMMAND ARG(S)",
    disable_help_flag = true,
    disable_version_flag = true,
    group(ArgGroup::new("subcommand").required(true).multiple(false).args([
        "create", "delete", "submit", "purge", "kill", "info", "version", "license", "help",
    ])),
)]
struct Args {
    /// Create templates from a parameter file
    #[arg(short = 'c', long, value_name = "PARAMETER_FILE")]
    create: Option<PathBuf>,

    /// Delete templates: all|[un]submitted|[un]finished|[un]successful|FROM-TO
    #[arg(short = 'd', long, value_name = "SELECTOR")]
    delete: Option<String>,

    /// Submit the jobs from templates: all|[un]submitted|[un]finished|[un]successful|FROM-TO
    #[arg(short = 's', long, value_name = "SELECTOR")]
    submit: Option<String>,

    /// Purge the existing jobs from templates: all|[un]finished|[un]successful|FROM-TO
    #[arg(short = 'p', long, value_name = "SELECTOR")]
    purge: Option<String>,

    /// Kill the existing jobs from templates: all|[un]finished|[un]successful|FROM-TO
    #[arg(short = 'k', long, value_name = "SELECTOR")]
    kill: Option<String>,

    /// Information about the submitted jobs: history|now|evolution
    #[arg(short = 'i', long, alias = "i", value_name = "MODE")]
    info: Option<String>,

    /// Version number of the program
    #[arg(short = 'v', long)]
    version: bool,

    /// Credits and license
    #[arg(short = 'l', long)]
    license: bool,

    /// Print help
    #[arg(short = 'h', long)]
    help: bool,

    /// Worker executable run once per template (with --create)
    #[arg(short = 'w', long, value_name = "WORKER_FILE")]
    worker: Option<String>,

    /// File of extra lines appended to every template (with --create)
    #[arg(short = 't', long, value_name = "TEMPLATE_FILE")]
    template: Option<PathBuf>,

    /// Signal passed to the kill command (with --kill)
    #[arg(long, value_name = "SIG")]
    signal: Option<String>,

    /// Show debugging information on standard error
    #[arg(long)]
    debug: bool,

    /// Assign a configuration setting; repeatable, last one wins
    #[arg(long, value_name = "KEY=VALUE")]
    config: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Create {
        parameter_file: PathBuf,
        worker: Option<String>,
        template: Option<PathBuf>,
    },
    Delete(Selector),
    Submit(Selector),
    Purge(Selector),
    Kill {
        selector: Selector,
        signal: Option<String>,
    },
    Info(InfoMode),
    Version,
    License,
    Help,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub command: Command,
    pub debug: bool,
    pub config: Vec<String>,
}

/// A rejected command line, with the text to show on standard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

pub fn usage() -> String {
    Args::command().render_help().to_string()
}

fn selector(raw: &str, allow_submitted: bool, flag: &str) -> Result<Selector, UsageError> {
    let sel: Selector = raw.parse().map_err(|e: String| UsageError(e))?;
    if !allow_submitted && matches!(sel, Selector::Submitted | Selector::Unsubmitted) {
        return Err(UsageError(format!("`{raw}` is not a valid selector for {flag}")));
    }
    Ok(sel)
}

pub fn parse_argv<I, T>(argv: I) -> Result<Invocation, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| UsageError(e.render().to_string()))?;
    let command = if let Some(parameter_file) = args.create {
        Command::Create {
            parameter_file,
            worker: args.worker.clone(),
            template: args.template.clone(),
        }
    } else if let Some(s) = &args.delete {
        Command::Delete(selector(s, true, "--delete")?)
    } else if let Some(s) = &args.submit {
        Command::Submit(selector(s, true, "--submit")?)
    } else if let Some(s) = &args.purge {
        Command::Purge(selector(s, false, "--purge")?)
    } else if let Some(s) = &args.kill {
        Command::Kill {
            selector: selector(s, false, "--kill")?,
            signal: args.signal.clone(),
        }
    } else if let Some(m) = &args.info {
        Command::Info(m.parse().map_err(UsageError)?)
    } else if args.version {
        Command::Version
    } else if args.license {
        Command::License
    } else {
        Command::Help
    };
    let is_create = matches!(command, Command::Create { .. });
    if !is_create && (args.worker.is_some() || args.template.is_some()) {
        return Err(UsageError("--worker and --template only apply to --create".into()));
    }
    if !matches!(command, Command::Kill { .. }) && args.signal.is_some() {
        return Err(UsageError("--signal only applies to --kill".into()));
    }
    Ok(Invocation {
        command,
        debug: args.debug,
        config: args.config,
    })
}

pub fn build_config(overrides: &[String]) -> Result<ConfigTable> {
    let mut cfg = ConfigTable::load_defaults();
    for o in overrides {
        cfg.apply_override(o)?;
    }
    Ok(cfg)
}

fn create(
    dir: &Path,
    cfg: &ConfigTable,
    parameter_file: &Path,
    worker: Option<&str>,
    template: Option<&Path>,
    console: &mut dyn Console,
) -> Result<u64> {
    let spec = load_parameter_file(&dir.join(parameter_file), cfg)?;
    let appendix = match template {
        Some(t) => load_template_appendix(&dir.join(t), cfg)?,
        None => TemplateAppendix::default(),
    };
    let worker = worker.ok_or_else(|| Error::Requirement("a worker file is needed (-w)".into()))?;
    let mut rng = SweepRng::new(cfg.rng_seed);
    create_templates(dir, &spec, worker, &appendix, cfg, &mut rng, console)
}

fn dispatch(inv: &Invocation, dir: &Path, console: &mut dyn Console) -> Result<()> {
    let cfg = build_config(&inv.config)?;
    let backend = backend::open(cfg.backend, dir, &cfg)?;
    if let Some(w) = backend.warning() {
        console.warn(&w);
    }
    let mut manager = JobManager::with_backend(dir, &cfg, backend);
    match &inv.command {
        Command::Create {
            parameter_file,
            worker,
            template,
        } => create(dir, &cfg, parameter_file, worker.as_deref(), template.as_deref(), console).map(drop),
        Command::Delete(sel) => manager.delete(*sel, console).map(drop),
        Command::Submit(sel) => manager.submit(*sel, console).map(drop),
        Command::Purge(sel) => manager.purge(*sel, console).map(drop),
        Command::Kill { selector, signal } => manager.kill(*selector, signal.as_deref(), console).map(drop),
        Command::Info(mode) => manager.info(*mode, console),
        Command::Version | Command::License | Command::Help => unreachable!("handled by run"),
    }
}

/// Executes `inv` against the working directory `dir` and returns the exit
/// status.
pub fn run(inv: &Invocation, dir: &Path, console: &mut dyn Console) -> i32 {
    match inv.command {
        Command::Version => {
            console.line(&format!("sweepjt {VERSION}"));
            return ExitCode::Success.code();
        }
        Command::License => {
            console.line(LICENSE);
            return ExitCode::Success.code();
        }
        Command::Help => {
            console.write_out(&usage());
            return ExitCode::Success.code();
        }
        _ => {}
    }
    match dispatch(inv, dir, console) {
        Ok(()) => ExitCode::Success.code(),
        Err(e) => {
            console.warn(&format!("error: {e}"));
            e.exit_code().code()
        }
    }
}

/// Parses and runs a full command line.
pub fn main_with<I, T>(argv: I, dir: &Path, console: &mut dyn Console) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse_argv(argv) {
        Ok(inv) => run(&inv, dir, console),
        Err(UsageError(msg)) => {
            console.warn(msg.trim_end());
            console.warn("Try `sweepjt --help` for more information.");
            ExitCode::CommandLine.code()
        }
    }
}
