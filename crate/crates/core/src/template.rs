//! Job-template rendering, naming, discovery and deletion.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::config::ConfigTable;
use crate::console::Console;
use crate::enumerator::{Sweep, SweepPoint};
use crate::error::{Error, Result};
use crate::grammar::{ParameterSpec, TemplateAppendix};
use crate::jobs::event::JobState;
use crate::jobs::registry::JobRegistry;
use crate::value::SweepRng;
use crate::wildcard::{substitute, SubstitutionContext};

/// One rendered template: the five core lines followed by appendix lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobTemplate {
    pub label: String,
    pub filename: String,
    pub job_name: String,
    pub lines: Vec<String>,
}

impl JobTemplate {
    pub fn content(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

/// Final path component of the worker, e.g. `echo` for `/bin/echo`.
pub fn worker_basename(worker: &str) -> &str {
    worker.rsplit('/').next().unwrap_or(worker)
}

fn filename_argument(coordinate: &str, sep: char) -> String {
    let bare = coordinate
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(coordinate);
    let mut out = String::with_capacity(bare.len());
    let mut in_run = false;
    for c in bare.chars() {
        if c.is_whitespace() || c == '/' {
            if !in_run {
                out.push(sep);
            }
            in_run = true;
        } else {
            out.push(c);
            in_run = false;
        }
    }
    out
}

pub fn job_name(label: &str, worker_basename: &str, cfg: &ConfigTable) -> String {
    format!("{label}{}{worker_basename}", cfg.jt_id_to_arg_separation)
}

/// `label`, separator, worker basename, then each argument with its
/// surrounding quotes stripped and whitespace runs collapsed to the filename
/// separator.
pub fn template_stem(point: &SweepPoint, worker_basename: &str, cfg: &ConfigTable) -> String {
    let mut stem = job_name(&point.label, worker_basename, cfg);
    for coordinate in &point.coordinates {
        stem.push(cfg.separation_char_filename);
        stem.push_str(&filename_argument(coordinate, cfg.separation_char_filename));
    }
    stem
}

pub fn template_filename(stem: &str, cfg: &ConfigTable) -> String {
    format!("{}{stem}{}", cfg.job_template_prefix, cfg.job_template_suffix)
}

fn output_path(dir: &Path, name: String) -> String {
    if dir == Path::new(".") || dir.as_os_str().is_empty() {
        name
    } else {
        dir.join(name).to_string_lossy().into_owned()
    }
}

pub fn render_template(
    point: &SweepPoint,
    worker_path: &str,
    appendix: &TemplateAppendix,
    cfg: &ConfigTable,
) -> JobTemplate {
    let base = worker_basename(worker_path);
    let stem = template_stem(point, base, cfg);
    let name = job_name(&point.label, base, cfg);
    let keys = &cfg.template;
    let core = [
        (&keys.job_name, name.clone()),
        (&keys.executable, worker_path.to_string()),
        (
            &keys.arguments,
            point.coordinates.join(&cfg.separation_char_cli.to_string()),
        ),
        (&keys.stdout_file, output_path(&cfg.std_output_dir, format!("{stem}.out"))),
        (&keys.stderr_file, output_path(&cfg.std_error_dir, format!("{stem}.err"))),
    ];
    let mut lines: Vec<String> = core
        .iter()
        .map(|(key, value)| {
            format!(
                "{key} = {enc}{value}{enc}{eol}",
                enc = keys.encloser,
                eol = keys.end_of_line
            )
        })
        .collect();
    let ctx = SubstitutionContext::new(
        &point.coordinates,
        Some(&point.label),
        &cfg.job_template_wildcard,
    );
    lines.extend(appendix.lines.iter().map(|l| substitute(l, &ctx)));
    JobTemplate {
        label: point.label.clone(),
        filename: template_filename(&stem, cfg),
        job_name: name,
        lines,
    }
}

pub fn write_template(dir: &Path, template: &JobTemplate) -> Result<PathBuf> {
    let path = dir.join(&template.filename);
    if path.exists() {
        log::debug!("overwriting {}", path.display());
    }
    let mut file = File::create(&path).map_err(|source| Error::Open {
        path: path.clone(),
        source,
    })?;
    let close_err = |source| Error::Close {
        path: path.clone(),
        source,
    };
    file.write_all(template.content().as_bytes())
        .map_err(close_err)?;
    file.flush().map_err(close_err)?;
    file.sync_all().map_err(close_err)?;
    Ok(path)
}

/// Writes one template per sweep point into `dir`, in index order.
pub fn create_templates(
    dir: &Path,
    spec: &ParameterSpec,
    worker: &str,
    appendix: &TemplateAppendix,
    cfg: &ConfigTable,
    rng: &mut SweepRng,
    console: &mut dyn Console,
) -> Result<u64> {
    if worker.is_empty() || !dir.join(worker).is_file() {
        return Err(Error::FileNotFound(PathBuf::from(worker)));
    }
    let sweep = Sweep::build(spec, cfg, rng)?;
    if sweep.total > cfg.huge_number_points {
        console.warn(&format!(
            "WARNING: composing {} job templates will take about {} kB of disk space.",
            sweep.total,
            sweep.total.saturating_mul(cfg.inode_size_kb)
        ));
    }
    let mut written = 0;
    for point in sweep.points(cfg, rng) {
        let template = render_template(&point?, worker, appendix, cfg);
        write_template(dir, &template)?;
        written += 1;
    }
    console.line(&format!("Composed {written} job templates"));
    Ok(written)
}

/// A template file found on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateFile {
    pub filename: String,
    pub label: String,
    pub index: u64,
}

impl TemplateFile {
    /// Job name recorded for this template: label, separator and the first
    /// stem segment (the worker basename).
    pub fn job_name(&self, cfg: &ConfigTable) -> String {
        let stem = self
            .filename
            .strip_prefix(cfg.job_template_prefix.as_str())
            .and_then(|s| s.strip_suffix(cfg.job_template_suffix.as_str()))
            .unwrap_or(&self.filename);
        let after = &stem[self.label.len() + cfg.jt_id_to_arg_separation.len_utf8()..];
        let worker = after
            .split(cfg.separation_char_filename)
            .next()
            .unwrap_or(after);
        job_name(&self.label, worker, cfg)
    }
}

/// Recognizes `<prefix><digits><jt sep>...<suffix>`.
pub fn match_template_name(filename: &str, cfg: &ConfigTable) -> Option<TemplateFile> {
    let stem = filename
        .strip_prefix(cfg.job_template_prefix.as_str())?
        .strip_suffix(cfg.job_template_suffix.as_str())?;
    let digits = stem.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let (label, rest) = stem.split_at(digits);
    if !rest.starts_with(cfg.jt_id_to_arg_separation) {
        return None;
    }
    Some(TemplateFile {
        filename: filename.to_string(),
        label: label.to_string(),
        index: label.parse().ok()?,
    })
}

/// Templates in `dir`, sorted by index.
pub fn discover_templates(dir: &Path, cfg: &ConfigTable) -> Result<Vec<TemplateFile>> {
    let entries = std::fs::read_dir(dir).map_err(|source| Error::Open {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut found = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| Error::Open {
            path: dir.to_path_buf(),
            source,
        })?;
        if !entry.file_type().map(|t| t.is_file()).unwrap_or(false) {
            continue;
        }
        if let Some(name) = entry.file_name().to_str() {
            if let Some(t) = match_template_name(name, cfg) {
                found.push(t);
            }
        }
    }
    found.sort_by(|a, b| a.index.cmp(&b.index).then_with(|| a.filename.cmp(&b.filename)));
    Ok(found)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    All,
    Submitted,
    Unsubmitted,
    Finished,
    Unfinished,
    Successful,
    Unsuccessful,
    Range(u64, u64),
}

impl Selector {
    /// Needs live job states from the backend.
    pub fn is_state(self) -> bool {
        matches!(
            self,
            Selector::Finished | Selector::Unfinished | Selector::Successful | Selector::Unsuccessful
        )
    }

    fn matches_state(self, state: JobState) -> bool {
        match self {
            Selector::Finished => state.is_terminal(),
            Selector::Unfinished => !state.is_terminal(),
            Selector::Successful => state == JobState::Succeeded,
            Selector::Unsuccessful => state == JobState::Failed,
            _ => false,
        }
    }
}

impl FromStr for Selector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "all" => Selector::All,
            "submitted" => Selector::Submitted,
            "unsubmitted" => Selector::Unsubmitted,
            "finished" => Selector::Finished,
            "unfinished" => Selector::Unfinished,
            "successful" => Selector::Successful,
            "unsuccessful" => Selector::Unsuccessful,
            _ => {
                let (from, to) = s
                    .split_once('-')
                    .ok_or_else(|| format!("unknown selector `{s}`"))?;
                let parse = |t: &str| {
                    if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                        Err(format!("bad range bound `{t}` in `{s}`"))
                    } else {
                        t.parse::<u64>().map_err(|e| e.to_string())
                    }
                };
                let (from, to) = (parse(from)?, parse(to)?);
                if from > to {
                    return Err(format!("empty range `{s}`"));
                }
                Selector::Range(from, to)
            }
        })
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::All => f.write_str("all"),
            Selector::Submitted => f.write_str("submitted"),
            Selector::Unsubmitted => f.write_str("unsubmitted"),
            Selector::Finished => f.write_str("finished"),
            Selector::Unfinished => f.write_str("unfinished"),
            Selector::Successful => f.write_str("successful"),
            Selector::Unsuccessful => f.write_str("unsuccessful"),
            Selector::Range(a, b) => write!(f, "{a}-{b}"),
        }
    }
}

/// Filters `templates` by `sel`. `states` maps template filenames of live,
/// unpurged jobs to their state; it is `None` when the backend cannot report
/// states.
pub fn resolve_selector(
    sel: Selector,
    templates: &[TemplateFile],
    registry: &JobRegistry,
    states: Option<&HashMap<String, JobState>>,
) -> Result<Vec<TemplateFile>> {
    if sel.is_state() && states.is_none() {
        return Err(Error::NoJob);
    }
    Ok(templates
        .iter()
        .filter(|t| match sel {
            Selector::All => true,
            Selector::Range(a, b) => (a..=b).contains(&t.index),
            Selector::Submitted => registry.is_submitted(&t.filename),
            Selector::Unsubmitted => !registry.is_submitted(&t.filename),
            _ => states
                .and_then(|s| s.get(&t.filename))
                .is_some_and(|st| sel.matches_state(*st)),
        })
        .cloned()
        .collect())
}

/// Removes `templates` from `dir` and reports the count.
pub fn delete_templates(dir: &Path, templates: &[TemplateFile], console: &mut dyn Console) -> Result<usize> {
    for t in templates {
        let path = dir.join(&t.filename);
        std::fs::remove_file(&path).map_err(|source| Error::Open { path, source })?;
    }
    console.line(&format!("Deleted {} job templates", templates.len()));
    Ok(templates.len())
}
