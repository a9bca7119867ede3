//! Job lifecycle over the template population: submit, purge, kill, info.

pub mod event;
pub mod registry;

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use crate::backend::{self, Backend};
use crate::config::ConfigTable;
use crate::console::Console;
use crate::error::{Error, Result};
use crate::template::{delete_templates, discover_templates, resolve_selector, Selector, TemplateFile};

use event::{format_event, JobEvent, JobState, INFO_HEADER};
use registry::{JobRegistry, RegistryEntry, RegistryFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfoMode {
    Now,
    History,
    Evolution,
}

impl FromStr for InfoMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "now" => Ok(InfoMode::Now),
            "history" => Ok(InfoMode::History),
            "evolution" => Ok(InfoMode::Evolution),
            _ => Err(format!("unknown info mode `{s}`")),
        }
    }
}

impl fmt::Display for InfoMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InfoMode::Now => "now",
            InfoMode::History => "history",
            InfoMode::Evolution => "evolution",
        })
    }
}

/// State of a job from its events. A job without events counts as live.
pub fn job_state(events: &[JobEvent]) -> JobState {
    events.last().map(JobEvent::state).unwrap_or(JobState::Live)
}

/// Drives one working directory through a backend.
pub struct JobManager {
    dir: PathBuf,
    cfg: ConfigTable,
    backend: Box<dyn Backend>,
    registry: RegistryFile,
    auto_settle: bool,
}

impl JobManager {
    pub fn open(dir: &Path, cfg: &ConfigTable) -> Result<Self> {
        let backend = backend::open(cfg.backend, dir, cfg)?;
        Ok(JobManager::with_backend(dir, cfg, backend))
    }

    pub fn with_backend(dir: &Path, cfg: &ConfigTable, backend: Box<dyn Backend>) -> Self {
        JobManager {
            dir: dir.to_path_buf(),
            cfg: cfg.clone(),
            backend,
            registry: RegistryFile::in_dir(dir),
            auto_settle: true,
        }
    }

    /// When off, submitted jobs stay queued in the backend until
    /// [`JobManager::settle`] is called.
    pub fn set_auto_settle(&mut self, on: bool) {
        self.auto_settle = on;
    }

    pub fn settle(&mut self, console: &mut dyn Console) -> Result<()> {
        self.backend.settle(console)
    }

    pub fn backend(&self) -> &dyn Backend {
        self.backend.as_ref()
    }

    pub fn registry(&self) -> Result<JobRegistry> {
        self.registry.load()
    }

    pub fn templates(&self) -> Result<Vec<TemplateFile>> {
        discover_templates(&self.dir, &self.cfg)
    }

    fn live_entries(&self, registry: &JobRegistry, templates: &[TemplateFile]) -> Vec<RegistryEntry> {
        templates
            .iter()
            .filter_map(|t| registry.live(&t.filename).cloned())
            .collect()
    }

    /// States of the live jobs behind `templates`, or `None` when the backend
    /// does not report them.
    fn states(
        &mut self,
        registry: &JobRegistry,
        templates: &[TemplateFile],
    ) -> Result<Option<HashMap<String, JobState>>> {
        if !self.backend.tracks_state() {
            return Ok(None);
        }
        let entries = self.live_entries(registry, templates);
        let events = self.backend.events_many(&entries)?;
        Ok(Some(
            events
                .into_iter()
                .map(|(t, ev)| (t, job_state(&ev)))
                .collect(),
        ))
    }

    pub fn select(&mut self, sel: Selector, console: &mut dyn Console) -> Result<Vec<TemplateFile>> {
        let templates = self.templates()?;
        let registry = self.registry.load()?;
        let states = if sel.is_state() {
            self.states(&registry, &templates)?
        } else {
            None
        };
        if sel.is_state() && states.is_none() {
            console.warn(&format!(
                "WARNING: the {} backend does not report job states; `{sel}` matches nothing.",
                self.backend.kind()
            ));
        }
        resolve_selector(sel, &templates, &registry, states.as_ref())
    }

    pub fn delete(&mut self, sel: Selector, console: &mut dyn Console) -> Result<usize> {
        let matched = self.select(sel, console)?;
        if matched.is_empty() && sel.is_state() {
            return Err(Error::NoJob);
        }
        delete_templates(&self.dir, &matched, console)
    }

    pub fn submit(&mut self, sel: Selector, console: &mut dyn Console) -> Result<usize> {
        let matched = self.select(sel, console)?;
        if matched.is_empty() {
            return Err(Error::NoJob);
        }
        let mut accepted = Vec::with_capacity(matched.len());
        let mut failure = None;
        for t in &matched {
            let job_name = t.job_name(&self.cfg);
            match self.backend.submit_job(&t.filename, &job_name, console) {
                Ok(s) => accepted.push(RegistryEntry {
                    template: t.filename.clone(),
                    job_name,
                    job_id: s.job_id,
                    submitted_at: s.submitted_at,
                    purged: false,
                }),
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        let count = accepted.len();
        self.registry.update(|r| {
            for e in accepted {
                r.record(e);
            }
            Ok(())
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        if self.auto_settle {
            self.backend.settle(console)?;
        }
        console.line(&format!("Submitted {count} jobs from templates"));
        Ok(count)
    }

    fn matched_live(&mut self, sel: Selector, console: &mut dyn Console) -> Result<Vec<RegistryEntry>> {
        let matched = self.select(sel, console)?;
        let registry = self.registry.load()?;
        Ok(self.live_entries(&registry, &matched))
    }

    /// Waits for the matched jobs, then drops them from accounting.
    pub fn purge(&mut self, sel: Selector, console: &mut dyn Console) -> Result<usize> {
        let entries = self.matched_live(sel, console)?;
        if entries.is_empty() {
            return Err(Error::NoJob);
        }
        self.backend.wait_jobs(&entries, console)?;
        for e in &entries {
            self.backend.purge_job(e)?;
        }
        self.registry.update(|r| {
            for e in &entries {
                r.mark_purged(&e.template);
            }
            Ok(())
        })?;
        console.line(&format!("Purged {} jobs from templates", entries.len()));
        Ok(entries.len())
    }

    /// Kills matched jobs that have not reached a terminal state.
    pub fn kill(&mut self, sel: Selector, signal: Option<&str>, console: &mut dyn Console) -> Result<usize> {
        let mut entries = self.matched_live(sel, console)?;
        if self.backend.tracks_state() {
            let events = self.backend.events_many(&entries)?;
            entries.retain(|e| !job_state(&events[&e.template]).is_terminal());
        }
        if entries.is_empty() {
            return Err(Error::NoJob);
        }
        for e in &entries {
            self.backend.kill_job(e, signal)?;
        }
        console.line(&format!("Killed {} jobs from templates", entries.len()));
        Ok(entries.len())
    }

    /// Unpurged jobs whose template is still present, in label order, with
    /// their events.
    fn reported(&mut self) -> Result<Vec<(RegistryEntry, Vec<JobEvent>)>> {
        let templates = self.templates()?;
        let registry = self.registry.load()?;
        let entries = self.live_entries(&registry, &templates);
        let mut events = self.backend.events_many(&entries)?;
        Ok(entries
            .into_iter()
            .map(|e| {
                let mut ev = events.remove(&e.template).unwrap_or_default();
                ev.sort_by_key(|x| x.time);
                (e, ev)
            })
            .collect())
    }

    fn snapshot(&mut self, console: &mut dyn Console) -> Result<bool> {
        let jobs = self.reported()?;
        console.line(INFO_HEADER);
        let mut all_terminal = true;
        for (_, ev) in &jobs {
            all_terminal &= job_state(ev).is_terminal();
            if let Some(last) = ev.last() {
                console.line(&format_event(last));
            }
        }
        Ok(all_terminal)
    }

    pub fn info(&mut self, mode: InfoMode, console: &mut dyn Console) -> Result<()> {
        match mode {
            InfoMode::Now => self.snapshot(console).map(drop),
            InfoMode::History => {
                let jobs = self.reported()?;
                console.line(INFO_HEADER);
                for (_, ev) in &jobs {
                    for e in ev {
                        console.line(&format_event(e));
                    }
                }
                Ok(())
            }
            InfoMode::Evolution => loop {
                if self.snapshot(console)? {
                    return Ok(());
                }
                std::thread::sleep(Duration::from_secs(self.cfg.info_poll_seconds));
                self.backend.settle(console)?;
                console.line("");
            },
        }
    }
}
