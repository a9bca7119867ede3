//! Job status events, their CSV line format, and the append-only event log.

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{Local, TimeZone};

use crate::error::{Error, Result};

pub const EVENT_LOG: &str = ".sweep_events";

pub const INFO_HEADER: &str = "JOB_NAME,LOCALTIME,TIME,MANAGER,STATUS,QUEUE_NAME,HOST_NAME,EXIT_STATUS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Manager {
    Dispatch,
    Execution,
}

impl Manager {
    pub fn as_str(self) -> &'static str {
        match self {
            Manager::Dispatch => "DISPATCH",
            Manager::Execution => "EXECUTION",
        }
    }
}

impl FromStr for Manager {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "DISPATCH" => Ok(Manager::Dispatch),
            "EXECUTION" => Ok(Manager::Execution),
            _ => Err(format!("unknown manager `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JobStatus {
    Pending,
    Prolog,
    Wrapper,
    Active,
    Done,
    Failed,
    Epilog,
    EpilogStd,
    EpilogFail,
}

impl JobStatus {
    pub const ALL: [JobStatus; 9] = [
        JobStatus::Pending,
        JobStatus::Prolog,
        JobStatus::Wrapper,
        JobStatus::Active,
        JobStatus::Done,
        JobStatus::Failed,
        JobStatus::Epilog,
        JobStatus::EpilogStd,
        JobStatus::EpilogFail,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            JobStatus::Pending => "PENDING",
            JobStatus::Prolog => "PROLOG",
            JobStatus::Wrapper => "WRAPPER",
            JobStatus::Active => "ACTIVE",
            JobStatus::Done => "DONE",
            JobStatus::Failed => "FAILED",
            JobStatus::Epilog => "EPILOG",
            JobStatus::EpilogStd => "EPILOG_STD",
            JobStatus::EpilogFail => "EPILOG_FAIL",
        }
    }
}

impl FromStr for JobStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JobStatus::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown status `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobEvent {
    pub job_name: String,
    pub localtime: String,
    pub time: i64,
    pub manager: Manager,
    pub status: JobStatus,
    pub queue_name: String,
    pub host_name: String,
    pub exit_status: Option<i32>,
}

/// C-locale `asctime` rendering in local time, e.g. `Wed Feb 24 12:33:35 2010`.
pub fn format_localtime(epoch: i64) -> String {
    match Local.timestamp_opt(epoch, 0).single() {
        Some(t) => t.format("%a %b %e %H:%M:%S %Y").to_string(),
        None => String::new(),
    }
}

pub fn now_epoch() -> i64 {
    chrono::Utc::now().timestamp()
}

/// Where a job has got to, as seen from its latest event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JobState {
    Live,
    Succeeded,
    Failed,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        !matches!(self, JobState::Live)
    }
}

impl JobEvent {
    pub fn new(
        job_name: impl Into<String>,
        time: i64,
        manager: Manager,
        status: JobStatus,
        queue_name: impl Into<String>,
        host_name: impl Into<String>,
        exit_status: Option<i32>,
    ) -> Self {
        JobEvent {
            job_name: job_name.into(),
            localtime: format_localtime(time),
            time,
            manager,
            status,
            queue_name: queue_name.into(),
            host_name: host_name.into(),
            exit_status,
        }
    }

    /// Final dispatch `DONE` (carrying the exit status) or final dispatch
    /// `FAILED`.
    pub fn is_terminal(&self) -> bool {
        self.manager == Manager::Dispatch
            && matches!(self.status, JobStatus::Done | JobStatus::Failed)
    }

    pub fn state(&self) -> JobState {
        match (self.is_terminal(), self.status, self.exit_status) {
            (false, _, _) => JobState::Live,
            (true, JobStatus::Done, Some(0)) => JobState::Succeeded,
            _ => JobState::Failed,
        }
    }

    pub fn to_csv(&self) -> String {
        format_event(self)
    }
}

impl fmt::Display for JobEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_event(self))
    }
}

pub fn format_event(e: &JobEvent) -> String {
    let exit = e.exit_status.map(|c| c.to_string()).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{}",
        e.job_name,
        e.localtime,
        e.time,
        e.manager.as_str(),
        e.status.as_str(),
        e.queue_name,
        e.host_name,
        exit
    )
}

pub fn parse_event(line: &str) -> Result<JobEvent, String> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 8 {
        return Err(format!("expected 8 fields, found {}", fields.len()));
    }
    let time = fields[2]
        .parse()
        .map_err(|_| format!("bad TIME `{}`", fields[2]))?;
    let exit_status = if fields[7].is_empty() {
        None
    } else {
        Some(
            fields[7]
                .parse()
                .map_err(|_| format!("bad EXIT_STATUS `{}`", fields[7]))?,
        )
    };
    if fields[0].is_empty() {
        return Err("empty JOB_NAME".into());
    }
    Ok(JobEvent {
        job_name: fields[0].to_string(),
        localtime: fields[1].to_string(),
        time,
        manager: fields[3].parse()?,
        status: fields[4].parse()?,
        queue_name: fields[5].to_string(),
        host_name: fields[6].to_string(),
        exit_status,
    })
}

/// Append-only text log of events, one CSV line each.
#[derive(Debug, Clone)]
pub struct EventLog {
    path: PathBuf,
}

impl EventLog {
    pub fn in_dir(dir: &Path) -> Self {
        EventLog {
            path: dir.join(EVENT_LOG),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, events: &[JobEvent]) -> Result<()> {
        if events.is_empty() {
            return Ok(());
        }
        let open_err = |source| Error::Open {
            path: self.path.clone(),
            source,
        };
        let close_err = |source| Error::Close {
            path: self.path.clone(),
            source,
        };
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(open_err)?;
        file.lock().map_err(open_err)?;
        let mut buf = String::new();
        for e in events {
            buf.push_str(&format_event(e));
            buf.push('\n');
        }
        file.write_all(buf.as_bytes()).map_err(close_err)?;
        file.flush().map_err(close_err)?;
        file.unlock().map_err(close_err)
    }

    pub fn read_all(&self) -> Result<Vec<JobEvent>> {
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(source) => {
                return Err(Error::Open {
                    path: self.path.clone(),
                    source,
                })
            }
        };
        file.lock_shared().map_err(|source| Error::Open {
            path: self.path.clone(),
            source,
        })?;
        let mut events = Vec::new();
        for (idx, line) in BufReader::new(&file).lines().enumerate() {
            let line = line.map_err(|e| self.corrupt(idx + 1, e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            events.push(parse_event(&line).map_err(|m| self.corrupt(idx + 1, m))?);
        }
        Ok(events)
    }

    fn corrupt(&self, line: usize, message: String) -> Error {
        Error::InternalParse {
            path: self.path.clone(),
            line,
            message,
        }
    }

    /// Events of one job submitted at `since` or later, in log order.
    pub fn events_for(&self, job_name: &str, since: i64) -> Result<Vec<JobEvent>> {
        Ok(self
            .read_all()?
            .into_iter()
            .filter(|e| e.job_name == job_name && e.time >= since)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn event(status: JobStatus, manager: Manager, q: &str, h: &str, exit: Option<i32>) -> JobEvent {
        JobEvent {
            job_name: "0_square".into(),
            localtime: "Wed Feb 24 12:33:35 2010".into(),
            time: 1267011215,
            manager,
            status,
            queue_name: q.into(),
            host_name: h.into(),
            exit_status: exit,
        }
    }

    #[test]
    fn csv_lines() {
        let e = event(JobStatus::Pending, Manager::Dispatch, "", "", None);
        assert_eq!(
            format_event(&e),
            "0_square,Wed Feb 24 12:33:35 2010,1267011215,DISPATCH,PENDING,,,"
        );
        let e = event(JobStatus::Done, Manager::Dispatch, "default", "gridway.org", Some(0));
        let line = format_event(&e);
        assert!(line.ends_with(",DISPATCH,DONE,default,gridway.org,0"), "{line}");
        assert_eq!(line.matches(',').count(), 7);
        assert_eq!(parse_event(&line).unwrap(), e);
    }

    #[test]
    fn header_has_eight_columns() {
        assert_eq!(INFO_HEADER.split(',').count(), 8);
    }

    #[test]
    fn localtime_is_asctime_shaped() {
        let s = format_localtime(1267011215);
        assert_eq!(s.len(), 24, "{s}");
        assert!(s.ends_with(" 2010"), "{s}");
        let day = format_localtime(1267011215 - 20 * 86400);
        assert_eq!(day.len(), 24, "{day}");
    }

    #[test]
    fn terminal_states() {
        assert_eq!(event(JobStatus::Done, Manager::Dispatch, "", "", Some(0)).state(), JobState::Succeeded);
        assert_eq!(event(JobStatus::Done, Manager::Dispatch, "", "", Some(3)).state(), JobState::Failed);
        assert_eq!(event(JobStatus::Failed, Manager::Dispatch, "", "", None).state(), JobState::Failed);
        assert_eq!(event(JobStatus::Failed, Manager::Execution, "", "", None).state(), JobState::Live);
        assert_eq!(event(JobStatus::Done, Manager::Execution, "", "", None).state(), JobState::Live);
    }

    #[test]
    fn bad_lines_are_rejected() {
        for line in [
            "a,b,c",
            "0_x,t,notanumber,DISPATCH,DONE,,,0",
            "0_x,t,1,SCHEDULER,DONE,,,0",
            "0_x,t,1,DISPATCH,FINISHED,,,0",
            "0_x,t,1,DISPATCH,DONE,,,zero",
            ",t,1,DISPATCH,DONE,,,0",
        ] {
            assert!(parse_event(line).is_err(), "{line}");
        }
    }

    #[test]
    fn log_round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let log = EventLog::in_dir(dir.path());
        assert!(log.read_all().unwrap().is_empty());
        let a = event(JobStatus::Pending, Manager::Dispatch, "", "", None);
        let mut b = event(JobStatus::Done, Manager::Dispatch, "q", "h", Some(0));
        b.time += 5;
        log.append(std::slice::from_ref(&a)).unwrap();
        log.append(&[b.clone()]).unwrap();
        assert_eq!(log.read_all().unwrap(), vec![a.clone(), b.clone()]);
        assert_eq!(log.events_for("0_square", a.time + 1).unwrap(), vec![b]);
        std::fs::write(log.path(), "garbage\n").unwrap();
        assert_eq!(log.read_all().unwrap_err().exit_code().code(), 9);
    }
}
