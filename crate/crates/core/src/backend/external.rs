//! Hands templates to site-provided scheduler commands.

use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use super::{Backend, Submission};
use crate::config::{BackendKind, ConfigTable};
use crate::console::Console;
use crate::error::{Error, Result};
use crate::jobs::event::{now_epoch, parse_event, JobEvent, INFO_HEADER};
use crate::jobs::registry::RegistryEntry;

pub const LOCATION_WARNING: &str = "WARNING: scheduler location not set up.\n\
This means that the usability of this tool is limited to create and delete\n\
job templates. Please identify the scheduler installation directory and set the\n\
parameter to that value with \"--config gridway_dir_var=value\".";

/// Finds `cmd` under `<location>/bin` when a location is configured, as a
/// path when it contains `/`, or on `PATH` otherwise.
pub fn find_command(cmd: &str, location: &str) -> Option<PathBuf> {
    if cmd.is_empty() {
        return None;
    }
    if !location.is_empty() {
        let p = Path::new(location).join("bin").join(cmd);
        if p.is_file() {
            return Some(p);
        }
    }
    if cmd.contains('/') {
        let p = PathBuf::from(cmd);
        return p.is_file().then_some(p);
    }
    std::env::var_os("PATH").and_then(|paths| {
        std::env::split_paths(&paths)
            .map(|d| d.join(cmd))
            .find(|p| p.is_file())
    })
}

pub struct ExternalBackend {
    dir: PathBuf,
    cfg: ConfigTable,
}

impl ExternalBackend {
    pub fn new(dir: &Path, cfg: &ConfigTable) -> Self {
        ExternalBackend {
            dir: dir.to_path_buf(),
            cfg: cfg.clone(),
        }
    }

    fn command(&self, cmd: &str) -> Option<Command> {
        let path = find_command(cmd, &self.cfg.gridway_dir_var)?;
        let mut c = Command::new(path);
        c.current_dir(&self.dir).stdin(Stdio::null());
        Some(c)
    }

    fn run(&self, name: &str, mut cmd: Command) -> Result<Output> {
        let out = cmd
            .output()
            .map_err(|e| Error::Execution(format!("cannot run `{name}`: {e}")))?;
        if !out.status.success() {
            return Err(Error::Execution(format!("`{name}` failed with {}", out.status)));
        }
        Ok(out)
    }

    fn required(&self, cmd: &str) -> Result<Command> {
        self.command(cmd)
            .ok_or_else(|| Error::Requirement(format!("scheduler command `{cmd}` not found")))
    }
}

/// Parses a status listing in the event CSV format, skipping blank lines
/// and the header.
pub fn parse_listing(text: &str, source: &str) -> Result<Vec<JobEvent>> {
    let mut events = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() || line == INFO_HEADER {
            continue;
        }
        events.push(parse_event(line).map_err(|message| Error::InternalParse {
            path: PathBuf::from(source),
            line: idx + 1,
            message,
        })?);
    }
    Ok(events)
}

impl Backend for ExternalBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::External
    }

    fn tracks_state(&self) -> bool {
        false
    }

    fn warning(&self) -> Option<String> {
        self.cfg
            .gridway_dir_var
            .is_empty()
            .then(|| LOCATION_WARNING.to_string())
    }

    fn submit_job(&mut self, template: &str, _job_name: &str, console: &mut dyn Console) -> Result<Submission> {
        let name = &self.cfg.gridway_submit;
        let mut cmd = self
            .command(name)
            .ok_or_else(|| Error::Execution(format!("submission command `{name}` not found")))?;
        if !self.cfg.gridway_submit_flag.is_empty() {
            cmd.arg(&self.cfg.gridway_submit_flag);
        }
        cmd.arg(template);
        let out = cmd
            .output()
            .map_err(|e| Error::Execution(format!("cannot run `{name}`: {e}")))?;
        console.write_out(&String::from_utf8_lossy(&out.stdout));
        console.write_err(&String::from_utf8_lossy(&out.stderr));
        if !out.status.success() {
            return Err(Error::Execution(format!(
                "`{name}` failed on {template} with {}",
                out.status
            )));
        }
        Ok(Submission {
            job_id: template.to_string(),
            submitted_at: now_epoch(),
        })
    }

    fn events(&mut self, entry: &RegistryEntry) -> Result<Vec<JobEvent>> {
        let name = self.cfg.gridway_ps.clone();
        let mut cmd = self.required(&name)?;
        cmd.arg(&entry.job_id);
        let out = self.run(&name, cmd)?;
        parse_listing(&String::from_utf8_lossy(&out.stdout), &name)
    }

    fn kill_job(&mut self, entry: &RegistryEntry, signal: Option<&str>) -> Result<()> {
        let name = self.cfg.gridway_kill.clone();
        let mut cmd = self.required(&name)?;
        if let Some(sig) = signal {
            cmd.arg(sig);
        }
        cmd.arg(&entry.job_id);
        self.run(&name, cmd).map(drop)
    }

    fn purge_job(&mut self, _: &RegistryEntry) -> Result<()> {
        Ok(())
    }

    fn wait_jobs(&mut self, entries: &[RegistryEntry], _: &mut dyn Console) -> Result<()> {
        let name = self.cfg.gridway_wait.clone();
        match self.command(&name) {
            Some(mut cmd) if !entries.is_empty() => {
                cmd.args(entries.iter().map(|e| &e.job_id));
                self.run(&name, cmd).map(drop)
            }
            _ => Ok(()),
        }
    }

    fn settle(&mut self, _: &mut dyn Console) -> Result<()> {
        Ok(())
    }
}
