//! Parameter-file and template-appendix parsing.
//!
//! A parameter file holds one sentence per dimension. Each sentence is a
//! list of `KEY=VALUE` words separated by the configured separation
//! character and/or whitespace; the first word must be `LOOPTYPE`. A
//! backslash ending a physical line continues the sentence on the next one.

use std::fmt;
use std::path::Path;

use crate::config::ConfigTable;
use crate::error::{read_text, Error, Result};
use crate::value::Transform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoopType {
    List,
    Range,
    ExpRange,
}

impl LoopType {
    pub fn keyword(self) -> &'static str {
        match self {
            LoopType::List => "LIST",
            LoopType::Range => "RANGE",
            LoopType::ExpRange => "EXPRANGE",
        }
    }
}

impl fmt::Display for LoopType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Parsed form of one sentence, i.e. one sweep dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSpec {
    pub loop_type: LoopType,
    /// `VALUE=` tokens, LIST only.
    pub values: Vec<String>,
    pub start: Option<String>,
    pub end: Option<String>,
    pub step: Option<String>,
    pub points: Option<u64>,
    pub skips: Vec<String>,
    pub function_chain: Vec<Transform>,
    pub line_number: usize,
}

impl SetSpec {
    fn empty(loop_type: LoopType, line_number: usize) -> Self {
        SetSpec {
            loop_type,
            values: Vec::new(),
            start: None,
            end: None,
            step: None,
            points: None,
            skips: Vec::new(),
            function_chain: Vec::new(),
            line_number,
        }
    }

    /// Serializes back into a single sentence that parses to an equal spec
    /// (line number aside).
    pub fn to_sentence(&self, cfg: &ConfigTable) -> String {
        let eq = cfg.keyassignment_char;
        let mut words = vec![format!("LOOPTYPE{eq}{}", self.loop_type)];
        words.extend(self.values.iter().map(|v| format!("VALUE{eq}{v}")));
        let optional = [
            ("START", &self.start),
            ("END", &self.end),
            ("STEP", &self.step),
        ];
        for (key, value) in optional {
            if let Some(value) = value {
                words.push(format!("{key}{eq}{value}"));
            }
        }
        if let Some(points) = self.points {
            words.push(format!("POINTS{eq}{points}"));
        }
        words.extend(self.skips.iter().map(|s| format!("SKIP{eq}{s}")));
        if !self.function_chain.is_empty() {
            let chain: Vec<&str> = self.function_chain.iter().map(|t| t.name()).collect();
            words.push(format!("FUNCTION{eq}{}", chain.join(" ")));
        }
        words.join(&format!("{} ", cfg.separation_char))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterSpec {
    pub sets: Vec<SetSpec>,
}

impl ParameterSpec {
    pub fn dimensions(&self) -> usize {
        self.sets.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemplateAppendix {
    pub lines: Vec<String>,
}

/// Physical lines joined across trailing backslashes, tagged with the line
/// number where each logical line starts.
fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut pending: Option<(usize, String)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim_end();
        let (body, continues) = match trimmed.strip_suffix('\\') {
            Some(body) => (body, true),
            None => (line, false),
        };
        let entry = match pending.take() {
            Some((start, mut acc)) => {
                acc.push(' ');
                acc.push_str(body);
                (start, acc)
            }
            None => (idx + 1, body.to_string()),
        };
        if continues {
            pending = Some(entry);
        } else {
            out.push(entry);
        }
    }
    out.extend(pending);
    out
}

fn is_skipped(line: &str, comment: char) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with(comment)
}

/// Splits a sentence into words on the separator and on whitespace runs;
/// double-quoted stretches are kept intact, quotes included.
fn split_words(sentence: &str, separator: char) -> Vec<String> {
    let mut words = Vec::new();
    let mut current = String::new();
    let mut quoted = false;
    for c in sentence.chars() {
        if c == '"' {
            quoted = !quoted;
            current.push(c);
        } else if !quoted && (c == separator || c.is_whitespace()) {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
        } else {
            current.push(c);
        }
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
}

/// Groups words into key/value pairs. A word without an assignment character
/// continues the value of the previous pair, so `FUNCTION=int rand` yields
/// the value `int rand`.
fn pair_words(words: Vec<String>, assign: char, line: usize) -> Result<Vec<(String, String)>> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for word in words {
        match word.split_once(assign) {
            Some((key, value)) if !key.is_empty() && !key.contains('"') => {
                pairs.push((key.to_string(), value.to_string()))
            }
            _ => match pairs.last_mut() {
                Some((_, value)) => {
                    value.push(' ');
                    value.push_str(&word);
                }
                None => {
                    return Err(Error::syntax(
                        line,
                        format!("expected KEY{assign}VALUE, found `{word}`"),
                    ))
                }
            },
        }
    }
    Ok(pairs)
}

fn parse_sentence(sentence: &str, line: usize, cfg: &ConfigTable) -> Result<SetSpec> {
    let pairs = pair_words(
        split_words(sentence, cfg.separation_char),
        cfg.keyassignment_char,
        line,
    )?;
    let mut pairs = pairs.into_iter();
    let loop_type = match pairs.next() {
        Some((key, value)) if key == "LOOPTYPE" => match value.as_str() {
            "LIST" => LoopType::List,
            "RANGE" => LoopType::Range,
            "EXPRANGE" => LoopType::ExpRange,
            other => {
                return Err(Error::syntax(line, format!("unknown LOOPTYPE `{other}`")));
            }
        },
        Some((key, _)) => {
            return Err(Error::syntax(
                line,
                format!("sentence must start with LOOPTYPE, found `{key}`"),
            ))
        }
        None => return Err(Error::syntax(line, "empty sentence")),
    };

    let mut spec = SetSpec::empty(loop_type, line);
    let mut function_seen = false;
    for (key, value) in pairs {
        if value.is_empty() {
            return Err(Error::syntax(line, format!("`{key}` has an empty value")));
        }
        let is_list = loop_type == LoopType::List;
        let slot = match key.as_str() {
            "VALUE" if is_list => {
                spec.values.push(value);
                continue;
            }
            "SKIP" => {
                spec.skips.push(value);
                continue;
            }
            "FUNCTION" => {
                if function_seen {
                    return Err(Error::syntax(line, "FUNCTION given more than once"));
                }
                function_seen = true;
                spec.function_chain = value
                    .split_whitespace()
                    .map(|name| name.parse::<Transform>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| Error::syntax(line, e))?;
                continue;
            }
            "POINTS" if !is_list => {
                if spec.points.is_some() {
                    return Err(Error::syntax(line, "POINTS given more than once"));
                }
                match value.parse::<u64>() {
                    Ok(n) if n > 0 => spec.points = Some(n),
                    _ => {
                        return Err(Error::syntax(
                            line,
                            format!("POINTS must be a positive integer, got `{value}`"),
                        ))
                    }
                }
                continue;
            }
            "START" if !is_list => &mut spec.start,
            "END" if !is_list => &mut spec.end,
            "STEP" if !is_list => &mut spec.step,
            "LOOPTYPE" => return Err(Error::syntax(line, "LOOPTYPE given more than once")),
            _ => {
                return Err(Error::syntax(
                    line,
                    format!("key `{key}` is not valid for LOOPTYPE={loop_type}"),
                ))
            }
        };
        if slot.is_some() {
            return Err(Error::syntax(line, format!("{key} given more than once")));
        }
        *slot = Some(value);
    }

    match loop_type {
        LoopType::List => {
            if spec.values.is_empty() {
                return Err(Error::syntax(line, "LOOPTYPE=LIST needs at least one VALUE"));
            }
        }
        LoopType::Range | LoopType::ExpRange => {
            if spec.start.is_none() || spec.end.is_none() {
                return Err(Error::syntax(
                    line,
                    format!("LOOPTYPE={loop_type} needs both START and END"),
                ));
            }
            match (&spec.step, spec.points) {
                (Some(_), Some(_)) => {
                    return Err(Error::syntax(line, "STEP and POINTS are mutually exclusive"))
                }
                (None, None) => {
                    return Err(Error::syntax(
                        line,
                        format!("LOOPTYPE={loop_type} needs either STEP or POINTS"),
                    ))
                }
                _ => {}
            }
        }
    }
    Ok(spec)
}

pub fn parse_parameter_file(text: &str, cfg: &ConfigTable) -> Result<ParameterSpec> {
    let mut sets = Vec::new();
    for (line, sentence) in logical_lines(text) {
        if is_skipped(&sentence, cfg.comment_char) {
            continue;
        }
        sets.push(parse_sentence(&sentence, line, cfg)?);
    }
    if sets.is_empty() {
        return Err(Error::syntax(0, "parameter file declares no sets"));
    }
    Ok(ParameterSpec { sets })
}

pub fn parse_template_appendix(text: &str, cfg: &ConfigTable) -> TemplateAppendix {
    let lines = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .filter(|l| !is_skipped(l, cfg.comment_char))
        .map(str::to_string)
        .collect();
    TemplateAppendix { lines }
}

/// Resolves the parameter-file argument, falling back to the name with the
/// configured default suffix appended.
pub fn resolve_input_path(path: &Path, cfg: &ConfigTable) -> std::path::PathBuf {
    if path.exists() || cfg.input_file_default_suffix.is_empty() {
        return path.to_path_buf();
    }
    let mut with_suffix = path.as_os_str().to_owned();
    with_suffix.push(&cfg.input_file_default_suffix);
    let candidate = std::path::PathBuf::from(with_suffix);
    if candidate.exists() {
        candidate
    } else {
        path.to_path_buf()
    }
}

pub fn load_parameter_file(path: &Path, cfg: &ConfigTable) -> Result<ParameterSpec> {
    let text = read_text(&resolve_input_path(path, cfg))?;
    parse_parameter_file(&text, cfg)
}

pub fn load_template_appendix(path: &Path, cfg: &ConfigTable) -> Result<TemplateAppendix> {
    let text = read_text(&resolve_input_path(path, cfg))?;
    Ok(parse_template_appendix(&text, cfg))
}
