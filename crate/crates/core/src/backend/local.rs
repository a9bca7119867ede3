//! Runs templates as child processes on this machine.

use std::collections::{HashMap, VecDeque};
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::Mutex;

use super::{hostname, join_events, Backend, Submission};
use crate::config::{BackendKind, ConfigTable, TemplateKeywords};
use crate::console::Console;
use crate::error::{Error, Result};
use crate::jobs::event::{now_epoch, EventLog, JobEvent, JobStatus, Manager};
use crate::jobs::registry::RegistryEntry;

pub const LOCAL_QUEUE: &str = "local";

/// Fields a template must provide to be run locally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalJob {
    pub executable: String,
    pub arguments: Vec<String>,
    pub stdout_file: String,
    pub stderr_file: String,
}

fn unwrap_value<'a>(raw: &'a str, keys: &TemplateKeywords) -> &'a str {
    let mut v = raw.trim();
    if !keys.end_of_line.is_empty() {
        v = v.strip_suffix(keys.end_of_line.as_str()).unwrap_or(v).trim_end();
    }
    if !keys.encloser.is_empty() {
        if let Some(inner) = v
            .strip_prefix(keys.encloser.as_str())
            .and_then(|s| s.strip_suffix(keys.encloser.as_str()))
        {
            v = inner;
        }
    }
    v
}

/// Splits on `sep`, treating double-quoted stretches as part of one argument
/// and dropping the quotes.
pub fn split_arguments(s: &str, sep: char) -> Vec<String> {
    let mut args = Vec::new();
    let mut current = String::new();
    let mut quoted = false;
    let mut started = false;
    for c in s.chars() {
        if c == '"' {
            quoted = !quoted;
            started = true;
        } else if c == sep && !quoted {
            if started {
                args.push(std::mem::take(&mut current));
                started = false;
            }
        } else {
            current.push(c);
            started = true;
        }
    }
    if started {
        args.push(current);
    }
    args
}

pub fn parse_local_job(text: &str, cfg: &ConfigTable) -> Result<LocalJob, String> {
    let keys = &cfg.template;
    let mut fields: HashMap<&str, &str> = HashMap::new();
    for line in text.lines() {
        if let Some((key, value)) = line.split_once('=') {
            fields.entry(key.trim()).or_insert(value);
        }
    }
    let get = |key: &str| {
        fields
            .get(key)
            .map(|v| unwrap_value(v, keys).to_string())
            .ok_or_else(|| format!("template lacks `{key}`"))
    };
    Ok(LocalJob {
        executable: get(&keys.executable)?,
        arguments: split_arguments(&get(&keys.arguments)?, cfg.separation_char_cli),
        stdout_file: get(&keys.stdout_file)?,
        stderr_file: get(&keys.stderr_file)?,
    })
}

#[derive(Debug, Clone)]
struct Queued {
    template: String,
    job_name: String,
}

pub struct LocalBackend {
    dir: PathBuf,
    cfg: ConfigTable,
    log: EventLog,
    host: String,
    queue: Vec<Queued>,
}

impl LocalBackend {
    pub fn new(dir: &Path, cfg: &ConfigTable) -> Self {
        LocalBackend {
            dir: dir.to_path_buf(),
            cfg: cfg.clone(),
            log: EventLog::in_dir(dir),
            host: hostname(),
            queue: Vec::new(),
        }
    }

    fn event(&self, job: &str, status: JobStatus, exit: Option<i32>) -> JobEvent {
        let (q, h) = match status {
            JobStatus::Pending => ("", ""),
            _ => (LOCAL_QUEUE, self.host.as_str()),
        };
        JobEvent::new(job, now_epoch(), Manager::Dispatch, status, q, h, exit)
    }

    fn resolve_executable(&self, exe: &str) -> PathBuf {
        let local = self.dir.join(exe);
        if exe.contains('/') || local.is_file() {
            local
        } else {
            PathBuf::from(exe)
        }
    }

    fn create_output(&self, name: &str) -> std::io::Result<File> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        File::create(path)
    }

    /// Runs one job to completion, logging its events.
    fn run(&self, job: &Queued) -> Result<()> {
        let text = match std::fs::read_to_string(self.dir.join(&job.template)) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("{}: {e}", job.template);
                return self.log.append(&[self.event(&job.job_name, JobStatus::Failed, None)]);
            }
        };
        let spec = match parse_local_job(&text, &self.cfg) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("{}: {e}", job.template);
                return self.log.append(&[self.event(&job.job_name, JobStatus::Failed, None)]);
            }
        };
        let spawned = (|| -> std::io::Result<std::process::Child> {
            let stdout = self.create_output(&spec.stdout_file)?;
            let stderr = self.create_output(&spec.stderr_file)?;
            Command::new(self.resolve_executable(&spec.executable))
                .args(&spec.arguments)
                .current_dir(&self.dir)
                .stdin(Stdio::null())
                .stdout(stdout)
                .stderr(stderr)
                .spawn()
        })();
        let mut child = match spawned {
            Ok(c) => c,
            Err(e) => {
                log::warn!("{}: cannot start `{}`: {e}", job.template, spec.executable);
                return self.log.append(&[self.event(&job.job_name, JobStatus::Failed, None)]);
            }
        };
        self.log.append(&[self.event(&job.job_name, JobStatus::Active, None)])?;
        let terminal = match child.wait() {
            Ok(status) => match status.code() {
                Some(code) => self.event(&job.job_name, JobStatus::Done, Some(code)),
                None => self.event(&job.job_name, JobStatus::Failed, None),
            },
            Err(e) => {
                log::warn!("{}: {e}", job.template);
                self.event(&job.job_name, JobStatus::Failed, None)
            }
        };
        self.log.append(&[terminal])
    }
}

impl Backend for LocalBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Local
    }

    fn tracks_state(&self) -> bool {
        true
    }

    fn submit_job(&mut self, template: &str, job_name: &str, _: &mut dyn Console) -> Result<Submission> {
        let pending = self.event(job_name, JobStatus::Pending, None);
        let submitted_at = pending.time;
        self.log.append(&[pending])?;
        self.queue.push(Queued {
            template: template.to_string(),
            job_name: job_name.to_string(),
        });
        Ok(Submission {
            job_id: job_name.to_string(),
            submitted_at,
        })
    }

    fn events(&mut self, entry: &RegistryEntry) -> Result<Vec<JobEvent>> {
        self.log.events_for(&entry.job_name, entry.submitted_at)
    }

    fn events_many(&mut self, entries: &[RegistryEntry]) -> Result<HashMap<String, Vec<JobEvent>>> {
        Ok(join_events(self.log.read_all()?, entries))
    }

    fn kill_job(&mut self, entry: &RegistryEntry, signal: Option<&str>) -> Result<()> {
        log::debug!("kill {} signal {:?}", entry.job_name, signal);
        self.queue.retain(|q| q.template != entry.template);
        self.log
            .append(&[self.event(&entry.job_name, JobStatus::Failed, None)])
    }

    fn purge_job(&mut self, _: &RegistryEntry) -> Result<()> {
        Ok(())
    }

    fn wait_jobs(&mut self, _: &[RegistryEntry], console: &mut dyn Console) -> Result<()> {
        self.settle(console)
    }

    fn settle(&mut self, _: &mut dyn Console) -> Result<()> {
        if self.queue.is_empty() {
            return Ok(());
        }
        let work: Mutex<VecDeque<Queued>> = Mutex::new(std::mem::take(&mut self.queue).into());
        let failure: Mutex<Option<Error>> = Mutex::new(None);
        let workers = self.cfg.max_parallel.max(1);
        let this = &*self;
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let Some(job) = work.lock().expect("queue lock").pop_front() else {
                        break;
                    };
                    if let Err(e) = this.run(&job) {
                        failure.lock().expect("failure lock").get_or_insert(e);
                    }
                });
            }
        });
        match failure.into_inner().expect("failure lock") {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::console::BufferConsole;
    use crate::jobs::event::JobState;

    #[test]
    fn argument_splitting() {
        assert_eq!(split_arguments("\"Hello world!\"", ' '), ["Hello world!"]);
        assert_eq!(split_arguments("Exact 1000  5.txt", ' '), ["Exact", "1000", "5.txt"]);
        assert_eq!(split_arguments("a \"\" b", ' '), ["a", "", "b"]);
        assert_eq!(split_arguments("x;y|z", ' '), ["x;y|z"]);
        assert!(split_arguments("", ' ').is_empty());
    }

    #[test]
    fn parses_plain_and_dialect_templates() {
        let cfg = ConfigTable::default();
        let job = parse_local_job(
            "NAME = 0_echo\nEXECUTABLE = /bin/echo\nARGUMENTS = \"Hello world!\"\n\
             STDOUT_FILE = 0_echo_Hello_world!.out\nSTDERR_FILE = 0_echo_Hello_world!.err\n",
            &cfg,
        )
        .unwrap();
        assert_eq!(job.executable, "/bin/echo");
        assert_eq!(job.arguments, ["Hello world!"]);
        assert_eq!(job.stdout_file, "0_echo_Hello_world!.out");

        let mut cfg = ConfigTable::default();
        for a in ["Template_encloser_char=\"", "Template_end_of_line=;", "Template_arguments=Arguments"] {
            cfg.apply_override(a).unwrap();
        }
        let job = parse_local_job(
            "NAME = \"0_env\";\nEXECUTABLE = \"/usr/bin/env\";\nArguments = \"ps\";\n\
             STDOUT_FILE = \"o\";\nSTDERR_FILE = \"e\";\n",
            &cfg,
        )
        .unwrap();
        assert_eq!(job.executable, "/usr/bin/env");
        assert_eq!(job.arguments, ["ps"]);
        assert!(parse_local_job("NAME = x\n", &cfg).is_err());
    }

    fn write_template(dir: &Path, name: &str, exe: &str, args: &str) {
        std::fs::write(
            dir.join(name),
            format!(
                "NAME = j\nEXECUTABLE = {exe}\nARGUMENTS = {args}\nSTDOUT_FILE = {name}.out\nSTDERR_FILE = {name}.err\n"
            ),
        )
        .unwrap();
    }

    fn entry(template: &str, name: &str, s: &Submission) -> RegistryEntry {
        RegistryEntry {
            template: template.into(),
            job_name: name.into(),
            job_id: s.job_id.clone(),
            submitted_at: s.submitted_at,
            purged: false,
        }
    }

    #[test]
    fn runs_jobs_and_records_exit_status() {
        let dir = tempfile::tempdir().unwrap();
        write_template(dir.path(), "0_sh.jt", "/bin/sh", "-c \"echo hi; exit 3\"");
        write_template(dir.path(), "1_echo.jt", "/bin/echo", "\"Hello world!\"");
        write_template(dir.path(), "2_missing.jt", "/nonexistent/worker", "x");
        let mut b = LocalBackend::new(dir.path(), &ConfigTable::default());
        let mut c = BufferConsole::default();
        let names = [("0_sh.jt", "0_sh"), ("1_echo.jt", "1_echo"), ("2_missing.jt", "2_missing")];
        let subs: Vec<_> = names
            .iter()
            .map(|(t, n)| b.submit_job(t, n, &mut c).unwrap())
            .collect();
        b.settle(&mut c).unwrap();
        let entries: Vec<_> = names.iter().zip(&subs).map(|((t, n), s)| entry(t, n, s)).collect();
        let ev = b.events_many(&entries).unwrap();
        let last = |t: &str| ev[t].last().unwrap().clone();
        assert_eq!(last("0_sh.jt").exit_status, Some(3));
        assert_eq!(last("0_sh.jt").state(), JobState::Failed);
        assert_eq!(last("1_echo.jt").state(), JobState::Succeeded);
        assert_eq!(last("2_missing.jt").status, JobStatus::Failed);
        assert_eq!(last("2_missing.jt").exit_status, None);
        assert_eq!(
            std::fs::read_to_string(dir.path().join("1_echo.jt.out")).unwrap(),
            "Hello world!\n"
        );
        assert_eq!(std::fs::read_to_string(dir.path().join("0_sh.jt.out")).unwrap(), "hi\n");
        let states: Vec<_> = ev["1_echo.jt"].iter().map(|e| e.status).collect();
        assert_eq!(states, [JobStatus::Pending, JobStatus::Active, JobStatus::Done]);
    }

    #[test]
    fn kill_before_run_cancels() {
        let dir = tempfile::tempdir().unwrap();
        write_template(dir.path(), "0_echo.jt", "/bin/echo", "x");
        let mut b = LocalBackend::new(dir.path(), &ConfigTable::default());
        let mut c = BufferConsole::default();
        let s = b.submit_job("0_echo.jt", "0_echo", &mut c).unwrap();
        let e = entry("0_echo.jt", "0_echo", &s);
        b.kill_job(&e, Some("9")).unwrap();
        b.settle(&mut c).unwrap();
        let ev = b.events(&e).unwrap();
        assert_eq!(ev.last().unwrap().state(), JobState::Failed);
        assert!(!dir.path().join("0_echo.jt.out").exists());
    }
}
