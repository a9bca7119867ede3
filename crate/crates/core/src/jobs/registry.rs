//! Persistent association between template files and submitted jobs.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const REGISTRY_FILE: &str = ".sweep_registry";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistryEntry {
    pub template: String,
    pub job_name: String,
    pub job_id: String,
    pub submitted_at: i64,
    pub purged: bool,
}

impl RegistryEntry {
    fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.template,
            self.job_name,
            self.job_id,
            self.submitted_at,
            u8::from(self.purged)
        )
    }

    fn parse(line: &str) -> Result<Self, String> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(format!("expected 5 fields, found {}", fields.len()));
        }
        if fields[0].is_empty() {
            return Err("empty template name".into());
        }
        let submitted_at = fields[3]
            .parse()
            .map_err(|_| format!("bad submission time `{}`", fields[3]))?;
        let purged = match fields[4] {
            "0" => false,
            "1" => true,
            other => return Err(format!("bad purged flag `{other}`")),
        };
        Ok(RegistryEntry {
            template: fields[0].to_string(),
            job_name: fields[1].to_string(),
            job_id: fields[2].to_string(),
            submitted_at,
            purged,
        })
    }
}

/// Entries in submission order. At most one unpurged entry per template.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JobRegistry {
    pub entries: Vec<RegistryEntry>,
}

impl JobRegistry {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let entry = RegistryEntry::parse(line).map_err(|message| Error::InternalParse {
                path: path.to_path_buf(),
                line: idx + 1,
                message,
            })?;
            entries.push(entry);
        }
        Ok(JobRegistry { entries })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&e.to_line());
            out.push('\n');
        }
        out
    }

    /// The unpurged entry of a template, if any.
    pub fn live(&self, template: &str) -> Option<&RegistryEntry> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.template == template && !e.purged)
    }

    pub fn is_submitted(&self, template: &str) -> bool {
        self.live(template).is_some()
    }

    /// Records a new submission, retiring any earlier live entry of the same
    /// template.
    pub fn record(&mut self, entry: RegistryEntry) {
        for e in self.entries.iter_mut() {
            if e.template == entry.template {
                e.purged = true;
            }
        }
        self.entries.push(entry);
    }

    pub fn mark_purged(&mut self, template: &str) {
        for e in self.entries.iter_mut() {
            if e.template == template {
                e.purged = true;
            }
        }
    }

    pub fn unpurged(&self) -> impl Iterator<Item = &RegistryEntry> {
        self.entries.iter().filter(|e| !e.purged)
    }
}

/// The registry file in a working directory, read and rewritten under an
/// exclusive lock.
#[derive(Debug, Clone)]
pub struct RegistryFile {
    path: PathBuf,
}

impl RegistryFile {
    pub fn in_dir(dir: &Path) -> Self {
        RegistryFile {
            path: dir.join(REGISTRY_FILE),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn load(&self) -> Result<JobRegistry> {
        match File::open(&self.path) {
            Ok(mut file) => {
                file.lock_shared().map_err(|e| self.open_err(e))?;
                let mut text = String::new();
                file.read_to_string(&mut text).map_err(|e| self.open_err(e))?;
                JobRegistry::parse(&text, &self.path)
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(JobRegistry::default()),
            Err(e) => Err(self.open_err(e)),
        }
    }

    /// Loads, applies `f`, and writes back while holding the lock.
    pub fn update<T>(&self, f: impl FnOnce(&mut JobRegistry) -> Result<T>) -> Result<T> {
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(&self.path)
            .map_err(|e| self.open_err(e))?;
        file.lock().map_err(|e| self.open_err(e))?;
        let mut text = String::new();
        file.read_to_string(&mut text).map_err(|e| self.open_err(e))?;
        let mut registry = JobRegistry::parse(&text, &self.path)?;
        let out = f(&mut registry)?;
        let close_err = |source| Error::Close {
            path: self.path.clone(),
            source,
        };
        file.seek(SeekFrom::Start(0)).map_err(close_err)?;
        file.set_len(0).map_err(close_err)?;
        file.write_all(registry.render().as_bytes())
            .map_err(close_err)?;
        file.flush().map_err(close_err)?;
        file.unlock().map_err(close_err)?;
        Ok(out)
    }

    fn open_err(&self, source: std::io::Error) -> Error {
        Error::Open {
            path: self.path.clone(),
            source,
        }
    }
}
