//! Tunable parameters with their compiled-in defaults and `KEY=VALUE`
//! overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::backend::sim::SimHost;
use crate::error::{Error, Result};

/// Which scheduler implementation drives submitted jobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackendKind {
    /// Runs every job as a child process of the submitting invocation.
    #[default]
    Local,
    /// Deterministic discrete-event model of a grid metascheduler.
    Simulated,
    /// Hands templates to user-configured commands (`gridway_submit` and co).
    External,
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" => Ok(BackendKind::Local),
            "simulated" | "sim" => Ok(BackendKind::Simulated),
            "external" => Ok(BackendKind::External),
            other => Err(format!(
                "unknown backend `{other}` (expected local, simulated or external)"
            )),
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Local => "local",
            BackendKind::Simulated => "simulated",
            BackendKind::External => "external",
        })
    }
}

/// Key names and formatting used when writing the core template lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateKeywords {
    pub executable: String,
    pub arguments: String,
    pub stdout_file: String,
    pub stderr_file: String,
    pub job_name: String,
    pub encloser: String,
    pub end_of_line: String,
}

impl Default for TemplateKeywords {
    fn default() -> Self {
        TemplateKeywords {
            executable: "EXECUTABLE".into(),
            arguments: "ARGUMENTS".into(),
            stdout_file: "STDOUT_FILE".into(),
            stderr_file: "STDERR_FILE".into(),
            job_name: "NAME".into(),
            encloser: String::new(),
            end_of_line: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigTable {
    pub job_template_wildcard: String,
    pub job_template_prefix: String,
    pub job_template_suffix: String,
    pub std_output_dir: PathBuf,
    pub std_error_dir: PathBuf,
    pub input_file_default_suffix: String,
    pub comment_char: char,
    pub keyassignment_char: char,
    pub separation_char: char,
    pub separation_char_cli: char,
    pub separation_char_filename: char,
    pub jt_id_to_arg_separation: char,
    pub unix_operators: String,
    pub gridway_submit: String,
    pub gridway_submit_flag: String,
    pub gridway_ps: String,
    pub gridway_kill: String,
    pub gridway_wait: String,
    pub gridway_dir_var: String,
    pub use_bignum: bool,
    pub huge_number_points: u64,
    pub inode_size_kb: u64,
    pub template: TemplateKeywords,
    pub backend: BackendKind,
    pub rng_seed: Option<u64>,
    pub info_poll_seconds: u64,
    pub max_parallel: usize,
    pub sim_hosts: Vec<SimHost>,
    pub sim_retry_cap: u32,
    pub sim_epoch: i64,
}

/// Every key accepted by [`ConfigTable::apply_override`].
pub const CONFIG_KEYS: &[&str] = &[
    "job_template_wildcard",
    "job_template_prefix",
    "job_template_suffix",
    "std_output_dir",
    "std_error_dir",
    "input_file_default_suffix",
    "comment_char",
    "keyassignment_char",
    "separation_char",
    "separation_char_cli",
    "separation_char_filename",
    "jt_id_to_arg_separation",
    "unix_operators",
    "gridway_submit",
    "gridway_submit_flag",
    "gridway_ps",
    "gridway_kill",
    "gridway_wait",
    "gridway_dir_var",
    "use_bignum",
    "huge_number_points",
    "inode_size_kB",
    "Template_executable",
    "Template_arguments",
    "Template_stdout_file",
    "Template_stderr_file",
    "Template_job_name",
    "Template_encloser_char",
    "Template_end_of_line",
    "backend",
    "rng_seed",
    "info_poll_seconds",
    "max_parallel",
    "sim_hosts",
    "sim_retry_cap",
    "sim_epoch",
];

/// Host list of the simulated grid: two resources that refuse execution
/// followed by one that accepts it.
pub const DEFAULT_SIM_HOSTS: &str =
    "prod@egee.srce.hr:deny,gilda@grid.acad.bg:deny,default@gridway.org:allow";

impl Default for ConfigTable {
    fn default() -> Self {
        ConfigTable::load_defaults()
    }
}

impl ConfigTable {
    pub fn load_defaults() -> Self {
        ConfigTable {
            job_template_wildcard: "${JT_ID}".into(),
            job_template_prefix: String::new(),
            job_template_suffix: ".jt".into(),
            std_output_dir: PathBuf::from("."),
            std_error_dir: PathBuf::from("."),
            input_file_default_suffix: ".in".into(),
            comment_char: '#',
            keyassignment_char: '=',
            separation_char: ',',
            separation_char_cli: ' ',
            separation_char_filename: '_',
            jt_id_to_arg_separation: '_',
            unix_operators: "&|<>;()`".into(),
            gridway_submit: "gwsubmit".into(),
            gridway_submit_flag: String::new(),
            gridway_ps: "gwps".into(),
            gridway_kill: "gwkill".into(),
            gridway_wait: "gwwait".into(),
            gridway_dir_var: String::new(),
            use_bignum: false,
            huge_number_points: 10000,
            inode_size_kb: 4,
            template: TemplateKeywords::default(),
            backend: BackendKind::Local,
            rng_seed: None,
            info_poll_seconds: 10,
            max_parallel: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            sim_hosts: SimHost::parse_list(DEFAULT_SIM_HOSTS)
                .expect("default host list parses"),
            sim_retry_cap: 5,
            sim_epoch: 1_267_011_215,
        }
    }

    /// Applies one `KEY=VALUE` assignment in place.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| {
            Error::CommandLine(format!(
                "malformed --config assignment `{assignment}` (expected KEY=VALUE)"
            ))
        })?;
        self.set(key.trim(), value)
    }

    /// Consuming variant of [`apply_override`](Self::apply_override).
    pub fn with_override(mut self, assignment: &str) -> Result<Self> {
        self.apply_override(assignment)?;
        Ok(self)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "job_template_wildcard" => self.job_template_wildcard = non_empty(key, value)?,
            "job_template_prefix" => self.job_template_prefix = value.into(),
            "job_template_suffix" => self.job_template_suffix = value.into(),
            "std_output_dir" => self.std_output_dir = PathBuf::from(non_empty(key, value)?),
            "std_error_dir" => self.std_error_dir = PathBuf::from(non_empty(key, value)?),
            "input_file_default_suffix" => self.input_file_default_suffix = value.into(),
            "comment_char" => self.comment_char = single_char(key, value)?,
            "keyassignment_char" => self.keyassignment_char = single_char(key, value)?,
            "separation_char" => self.separation_char = single_char(key, value)?,
            "separation_char_cli" => self.separation_char_cli = single_char(key, value)?,
            "separation_char_filename" => {
                self.separation_char_filename = single_char(key, value)?
            }
            "jt_id_to_arg_separation" => self.jt_id_to_arg_separation = single_char(key, value)?,
            "unix_operators" => self.unix_operators = value.into(),
            "gridway_submit" => self.gridway_submit = value.into(),
            "gridway_submit_flag" => self.gridway_submit_flag = value.into(),
            "gridway_ps" => self.gridway_ps = value.into(),
            "gridway_kill" => self.gridway_kill = value.into(),
            "gridway_wait" => self.gridway_wait = value.into(),
            "gridway_dir_var" => self.gridway_dir_var = value.into(),
            "use_bignum" => self.use_bignum = flag(key, value)?,
            "huge_number_points" => self.huge_number_points = number(key, value)?,
            "inode_size_kB" => self.inode_size_kb = number(key, value)?,
            "Template_executable" => self.template.executable = value.into(),
            "Template_arguments" => self.template.arguments = value.into(),
            "Template_stdout_file" => self.template.stdout_file = value.into(),
            "Template_stderr_file" => self.template.stderr_file = value.into(),
            "Template_job_name" => self.template.job_name = value.into(),
            "Template_encloser_char" => self.template.encloser = value.into(),
            "Template_end_of_line" => self.template.end_of_line = value.into(),
            "backend" => {
                self.backend = value
                    .parse()
                    .map_err(|e: String| Error::CommandLine(e))?
            }
            "rng_seed" => {
                self.rng_seed = if value.is_empty() {
                    None
                } else {
                    Some(number(key, value)?)
                }
            }
            "info_poll_seconds" => self.info_poll_seconds = number(key, value)?,
            "max_parallel" => {
                let n: usize = number(key, value)?;
                if n == 0 {
                    return Err(Error::CommandLine("max_parallel must be at least 1".into()));
                }
                self.max_parallel = n;
            }
            "sim_hosts" => {
                self.sim_hosts = SimHost::parse_list(value).map_err(Error::CommandLine)?
            }
            "sim_retry_cap" => self.sim_retry_cap = number(key, value)?,
            "sim_epoch" => self.sim_epoch = number(key, value)?,
            _ => {
                return Err(Error::CommandLine(format!(
                    "unknown configuration key `{key}`"
                )))
            }
        }
        Ok(())
    }
}

fn non_empty(key: &str, value: &str) -> Result<String> {
    if value.is_empty() {
        Err(Error::CommandLine(format!("`{key}` may not be empty")))
    } else {
        Ok(value.to_string())
    }
}

fn single_char(key: &str, value: &str) -> Result<char> {
    let mut chars = value.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::CommandLine(format!(
            "`{key}` takes a single character, got `{value}`"
        ))),
    }
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::CommandLine(format!(
            "`{key}` takes 0 or 1, got `{value}`"
        ))),
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::CommandLine(format!("`{key}` takes an integer, got `{value}`")))
}
