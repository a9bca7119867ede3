//! Deterministic discrete-event model of a metascheduler dispatching jobs to
//! remote hosts, some of which refuse to run them.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{join_events, Backend, Submission};
use crate::config::{BackendKind, ConfigTable};
use crate::console::Console;
use crate::error::{Error, Result};
use crate::jobs::event::{EventLog, JobEvent, JobStatus, Manager};
use crate::jobs::registry::RegistryEntry;

/// Largest random pause, in seconds, between consecutive transitions.
const MAX_STEP: u64 = 9;

/// One remote resource.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimHost {
    pub name: String,
    pub queue: String,
    pub permits_execution: bool,
    /// Extra seconds spent on the host before it answers.
    pub service_delay: u64,
    /// Minus the number of failures seen on the host. Higher is preferred.
    pub rank: i64,
}

impl SimHost {
    /// Parses `queue@host:allow|deny[:delay]`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let mut parts = s.trim().split(':');
        let location = parts.next().unwrap_or_default();
        let (queue, name) = location
            .split_once('@')
            .filter(|(q, h)| !q.is_empty() && !h.is_empty())
            .ok_or_else(|| format!("host `{s}` must look like queue@host:allow"))?;
        let permits_execution = match parts.next() {
            Some("allow") => true,
            Some("deny") => false,
            _ => return Err(format!("host `{s}` needs `:allow` or `:deny`")),
        };
        let service_delay = match parts.next() {
            None => 0,
            Some(d) => d.parse().map_err(|_| format!("bad delay `{d}` in `{s}`"))?,
        };
        if parts.next().is_some() {
            return Err(format!("trailing fields in host `{s}`"));
        }
        Ok(SimHost {
            name: name.to_string(),
            queue: queue.to_string(),
            permits_execution,
            service_delay,
            rank: 0,
        })
    }

    pub fn parse_list(s: &str) -> Result<Vec<Self>, String> {
        let hosts = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(SimHost::parse)
            .collect::<Result<Vec<_>, _>>()?;
        if hosts.is_empty() {
            return Err("at least one simulated host is required".into());
        }
        Ok(hosts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Step {
    Prolog,
    Wrapper,
    Fail,
    ExecPending,
    Active,
    Done,
    Epilog,
    Final,
}

#[derive(Debug, Clone)]
struct SimJob {
    name: String,
    host: Option<usize>,
    failures: u32,
    /// Failures of this job on each host.
    failed_on: Vec<i64>,
    finished: bool,
}

pub struct SimBackend {
    log: EventLog,
    hosts: Vec<SimHost>,
    retry_cap: u32,
    epoch: i64,
    rng: ChaCha8Rng,
    /// Submission time shared by every job accepted in this session.
    clock: Option<i64>,
    jobs: Vec<SimJob>,
}

impl SimBackend {
    pub fn new(dir: &Path, cfg: &ConfigTable) -> Result<Self> {
        if cfg.sim_hosts.is_empty() {
            return Err(Error::Requirement("the simulated grid has no hosts".into()));
        }
        Ok(SimBackend {
            log: EventLog::in_dir(dir),
            hosts: cfg.sim_hosts.clone(),
            retry_cap: cfg.sim_retry_cap.max(1),
            epoch: cfg.sim_epoch,
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed.unwrap_or(0)),
            clock: None,
            jobs: Vec::new(),
        })
    }

    pub fn hosts(&self) -> &[SimHost] {
        &self.hosts
    }

    fn now(&mut self) -> Result<i64> {
        if let Some(t) = self.clock {
            return Ok(t);
        }
        let log = self.log.read_all()?;
        let last = log.iter().map(|e| e.time + 1).max().unwrap_or(self.epoch);
        for host in self.hosts.iter_mut() {
            host.rank = -(log
                .iter()
                .filter(|e| {
                    e.manager == Manager::Execution
                        && e.status == JobStatus::Failed
                        && e.host_name == host.name
                })
                .count() as i64);
        }
        let t = last.max(self.epoch);
        self.clock = Some(t);
        Ok(t)
    }

    fn pause(&mut self, extra: u64) -> i64 {
        (self.rng.random_range(0..=MAX_STEP) + extra) as i64
    }

    /// Highest score wins; ties go to the earliest declared host. A job's
    /// score for a host is the host's rank when the batch started minus the
    /// job's own failures there, so jobs dispatched together learn only from
    /// their own attempts.
    fn pick_host(&self, job: usize, batch_rank: &[i64]) -> usize {
        let score = |i: usize| batch_rank[i] - self.jobs[job].failed_on[i];
        let mut best = 0;
        for i in 1..self.hosts.len() {
            if score(i) > score(best) {
                best = i;
            }
        }
        best
    }

    fn event(&self, job: usize, t: i64, m: Manager, s: JobStatus, exit: Option<i32>) -> JobEvent {
        let (q, h) = match self.jobs[job].host {
            Some(i) => (self.hosts[i].queue.as_str(), self.hosts[i].name.as_str()),
            None => ("", ""),
        };
        JobEvent::new(&self.jobs[job].name, t, m, s, q, h, exit)
    }

    /// Runs the event loop until every job of this session is terminal.
    fn simulate(&mut self) -> Result<()> {
        let mut heap: BinaryHeap<Reverse<(i64, u64, usize, Step)>> = BinaryHeap::new();
        let mut seq = 0u64;
        let start = self.now()?;
        let batch_rank: Vec<i64> = self.hosts.iter().map(|h| h.rank).collect();
        for j in 0..self.jobs.len() {
            if !self.jobs[j].finished {
                let t = start + self.pause(0);
                heap.push(Reverse((t, seq, j, Step::Prolog)));
                seq += 1;
            }
        }
        let mut out = Vec::new();
        while let Some(Reverse((t, _, j, step))) = heap.pop() {
            use JobStatus::*;
            use Manager::{Dispatch, Execution};
            let next = match step {
                Step::Prolog => {
                    self.jobs[j].host = None;
                    out.push(self.event(j, t, Dispatch, Prolog, None));
                    Some((self.pause(0), Step::Wrapper))
                }
                Step::Wrapper => {
                    let h = self.pick_host(j, &batch_rank);
                    self.jobs[j].host = Some(h);
                    out.push(self.event(j, t, Dispatch, Wrapper, None));
                    let delay = self.pause(self.hosts[h].service_delay);
                    if self.hosts[h].permits_execution {
                        Some((0, Step::ExecPending))
                    } else {
                        Some((delay, Step::Fail))
                    }
                }
                Step::Fail => {
                    let h = self.jobs[j].host.expect("host picked");
                    self.hosts[h].rank -= 1;
                    self.jobs[j].failures += 1;
                    self.jobs[j].failed_on[h] += 1;
                    out.push(self.event(j, t, Execution, Failed, None));
                    out.push(self.event(j, t, Dispatch, EpilogFail, None));
                    if self.jobs[j].failures >= self.retry_cap {
                        out.push(self.event(j, t, Dispatch, Failed, None));
                        self.jobs[j].finished = true;
                        None
                    } else {
                        self.jobs[j].host = None;
                        out.push(self.event(j, t, Dispatch, Pending, None));
                        Some((self.pause(0), Step::Prolog))
                    }
                }
                Step::ExecPending => {
                    out.push(self.event(j, t, Execution, Pending, None));
                    Some((self.pause(0), Step::Active))
                }
                Step::Active => {
                    out.push(self.event(j, t, Execution, Active, None));
                    Some((self.pause(0), Step::Done))
                }
                Step::Done => {
                    out.push(self.event(j, t, Execution, Done, None));
                    out.push(self.event(j, t, Dispatch, EpilogStd, None));
                    Some((self.pause(0), Step::Epilog))
                }
                Step::Epilog => {
                    out.push(self.event(j, t, Dispatch, Epilog, None));
                    Some((self.pause(0), Step::Final))
                }
                Step::Final => {
                    out.push(self.event(j, t, Dispatch, Done, Some(0)));
                    self.jobs[j].finished = true;
                    None
                }
            };
            if let Some((dt, s)) = next {
                heap.push(Reverse((t + dt, seq, j, s)));
                seq += 1;
            }
        }
        self.log.append(&out)
    }
}

impl Backend for SimBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Simulated
    }

    fn tracks_state(&self) -> bool {
        true
    }

    fn submit_job(&mut self, _template: &str, job_name: &str, _: &mut dyn Console) -> Result<Submission> {
        let t = self.now()?;
        self.jobs.push(SimJob {
            name: job_name.to_string(),
            host: None,
            failures: 0,
            failed_on: vec![0; self.hosts.len()],
            finished: false,
        });
        let pending = self.event(self.jobs.len() - 1, t, Manager::Dispatch, JobStatus::Pending, None);
        self.log.append(&[pending])?;
        Ok(Submission {
            job_id: job_name.to_string(),
            submitted_at: t,
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
        let t = self.now()?;
        let event = JobEvent::new(&entry.job_name, t, Manager::Dispatch, JobStatus::Failed, "", "", None);
        for job in self.jobs.iter_mut().filter(|j| j.name == entry.job_name) {
            job.finished = true;
        }
        self.log.append(&[event])
    }

    fn purge_job(&mut self, _: &RegistryEntry) -> Result<()> {
        Ok(())
    }

    fn wait_jobs(&mut self, _: &[RegistryEntry], _: &mut dyn Console) -> Result<()> {
        self.simulate()
    }

    fn settle(&mut self, _: &mut dyn Console) -> Result<()> {
        self.simulate()
    }
}
