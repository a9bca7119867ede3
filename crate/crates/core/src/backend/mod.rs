//! Scheduler contract and its implementations.

pub mod external;
pub mod local;
pub mod sim;

use std::collections::HashMap;
use std::path::Path;

use crate::config::{BackendKind, ConfigTable};
use crate::console::Console;
use crate::error::Result;
use crate::jobs::event::JobEvent;
use crate::jobs::registry::RegistryEntry;

pub use external::ExternalBackend;
pub use local::LocalBackend;
pub use sim::{SimBackend, SimHost};

/// What a backend hands back for one accepted template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Submission {
    pub job_id: String,
    pub submitted_at: i64,
}

pub trait Backend {
    fn kind(&self) -> BackendKind;

    /// Whether job states can be observed, which state selectors need.
    fn tracks_state(&self) -> bool;

    /// A notice to print before any command runs, if the backend is only
    /// partly usable.
    fn warning(&self) -> Option<String> {
        None
    }

    fn submit_job(
        &mut self,
        template: &str,
        job_name: &str,
        console: &mut dyn Console,
    ) -> Result<Submission>;

    /// Events of one job in time order.
    fn events(&mut self, entry: &RegistryEntry) -> Result<Vec<JobEvent>>;

    /// Events of many jobs keyed by template filename.
    fn events_many(&mut self, entries: &[RegistryEntry]) -> Result<HashMap<String, Vec<JobEvent>>> {
        let mut out = HashMap::new();
        for e in entries {
            out.insert(e.template.clone(), self.events(e)?);
        }
        Ok(out)
    }

    fn kill_job(&mut self, entry: &RegistryEntry, signal: Option<&str>) -> Result<()>;

    fn purge_job(&mut self, entry: &RegistryEntry) -> Result<()>;

    /// Blocks until every listed job has a terminal event.
    fn wait_jobs(&mut self, entries: &[RegistryEntry], console: &mut dyn Console) -> Result<()>;

    /// Drives accepted jobs forward. Backends that execute in-process run
    /// them to completion here.
    fn settle(&mut self, console: &mut dyn Console) -> Result<()>;
}

pub fn open(kind: BackendKind, dir: &Path, cfg: &ConfigTable) -> Result<Box<dyn Backend>> {
    Ok(match kind {
        BackendKind::Local => Box::new(LocalBackend::new(dir, cfg)),
        BackendKind::Simulated => Box::new(SimBackend::new(dir, cfg)?),
        BackendKind::External => Box::new(ExternalBackend::new(dir, cfg)),
    })
}

/// Groups log events by the registry entry they belong to: same job name and
/// at or after the submission time.
pub(crate) fn join_events(
    log: Vec<JobEvent>,
    entries: &[RegistryEntry],
) -> HashMap<String, Vec<JobEvent>> {
    let mut by_name: HashMap<&str, Vec<&RegistryEntry>> = HashMap::new();
    for e in entries {
        by_name.entry(e.job_name.as_str()).or_default().push(e);
    }
    let mut out: HashMap<String, Vec<JobEvent>> =
        entries.iter().map(|e| (e.template.clone(), Vec::new())).collect();
    for ev in log {
        if let Some(candidates) = by_name.get(ev.job_name.as_str()) {
            let owner = candidates
                .iter()
                .filter(|c| ev.time >= c.submitted_at)
                .max_by_key(|c| c.submitted_at);
            if let Some(owner) = owner {
                out.get_mut(&owner.template).expect("seeded").push(ev);
            }
        }
    }
    out
}

pub fn hostname() -> String {
    let mut buf = [0u8; 256];
    // SAFETY: the buffer is valid for `buf.len()` bytes.
    let rc = unsafe { libc::gethostname(buf.as_mut_ptr().cast(), buf.len()) };
    if rc != 0 {
        return "localhost".into();
    }
    let end = buf.iter().position(|&b| b == 0).unwrap_or(buf.len());
    String::from_utf8_lossy(&buf[..end]).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jobs::event::{JobStatus, Manager};

    fn entry(template: &str, name: &str, at: i64) -> RegistryEntry {
        RegistryEntry {
            template: template.into(),
            job_name: name.into(),
            job_id: name.into(),
            submitted_at: at,
            purged: false,
        }
    }

    #[test]
    fn join_respects_submission_time() {
        let ev = |name: &str, t| JobEvent::new(name, t, Manager::Dispatch, JobStatus::Pending, "", "", None);
        let log = vec![ev("0_a", 5), ev("1_a", 6), ev("0_a", 10), ev("0_b", 11)];
        let joined = join_events(log, &[entry("0_a_x.jt", "0_a", 8), entry("1_a_y.jt", "1_a", 1)]);
        assert_eq!(joined["0_a_x.jt"].len(), 1);
        assert_eq!(joined["0_a_x.jt"][0].time, 10);
        assert_eq!(joined["1_a_y.jt"].len(), 1);
    }

    #[test]
    fn hostname_is_nonempty() {
        assert!(!hostname().is_empty());
    }
}
