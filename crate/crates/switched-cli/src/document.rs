//! The on-disk system document: a TOML file carrying a subsystem family
//! and a switching signal.
//!
//! Parsing is two-staged: TOML syntax and field types first (errors carry
//! line/column from the parser), then semantic conversion into model types
//! with messages that point at the offending segment or subsystem. The
//! canonical writer emits a fixed layout so normalized documents round-trip
//! byte-identically.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use switched::linalg::Matrix;
use switched::model::{
    ContinuousSignal, DiscreteSignal, HybridSignal, HybridSystem, Segment, SwitchedSystem,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug)]
pub struct DocError(pub String);

impl std::fmt::Display for DocError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DocError {}

fn doc_err<T>(message: impl Into<String>) -> Result<T, DocError> {
    Err(DocError(message.into()))
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl Metadata {
    fn is_empty(&self) -> bool {
        self.name.is_none() && self.description.is_none()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
enum RawMode {
    Continuous,
    Discrete,
    Hybrid,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubsystem {
    matrix: Vec<Vec<f64>>,
}

/// One signal step: a bare index in discrete mode, an `{ index, duration }`
/// table in continuous mode.
#[derive(Deserialize)]
#[serde(untagged)]
enum RawStep {
    Index(usize),
    Segment { index: usize, duration: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSignal {
    #[serde(default)]
    prefix: Vec<RawStep>,
    tail: Vec<RawStep>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHalf {
    subsystem: Vec<RawSubsystem>,
    signal: RawSignal,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    format_version: u32,
    mode: RawMode,
    #[serde(default)]
    metadata: Metadata,
    #[serde(default)]
    subsystem: Vec<RawSubsystem>,
    #[serde(default)]
    signal: Option<RawSignal>,
    #[serde(default)]
    flow: Option<RawHalf>,
    #[serde(default)]
    jump: Option<RawHalf>,
}

/// Parsed document content, by mode.
#[derive(Clone, Debug)]
pub enum Content {
    Continuous { system: SwitchedSystem, signal: ContinuousSignal },
    Discrete { system: SwitchedSystem, signal: DiscreteSignal },
    Hybrid { system: HybridSystem, signal: HybridSignal },
}

impl Content {
    pub fn mode(&self) -> &'static str {
        match self {
            Content::Continuous { .. } => "continuous",
            Content::Discrete { .. } => "discrete",
            Content::Hybrid { .. } => "hybrid",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Document {
    pub metadata: Metadata,
    pub content: Content,
}

fn matrices(raw: &[RawSubsystem], what: &str) -> Result<Vec<Matrix>, DocError> {
    if raw.is_empty() {
        return doc_err(format!("document defines no {what}subsystems"));
    }
    raw.iter()
        .enumerate()
        .map(|(pos, s)| {
            Matrix::from_rows(&s.matrix)
                .map_err(|e| DocError(format!("{what}subsystem {}: {e}", pos + 1)))
        })
        .collect()
}

/// Converts raw steps to continuous segments, numbering prefix and tail
/// segments consecutively from 1 for error messages.
fn segments(raw: &RawSignal, what: &str) -> Result<(Vec<Segment>, Vec<Segment>), DocError> {
    let mut count = 0usize;
    let mut convert = |steps: &[RawStep]| -> Result<Vec<Segment>, DocError> {
        steps
            .iter()
            .map(|step| {
                count += 1;
                match *step {
                    RawStep::Segment { index, duration } => {
                        if index == 0 {
                            return doc_err(format!(
                                "subsystem index 0 at {what}segment {count}; indices are 1-based"
                            ));
                        }
                        if !(duration > 0.0) {
                            return doc_err(format!(
                                "non-positive duration at {what}segment {count}"
                            ));
                        }
                        if !duration.is_finite() {
                            return doc_err(format!(
                                "non-finite duration at {what}segment {count}"
                            ));
                        }
                        Segment::new(index, duration)
                            .map_err(|e| DocError(format!("{what}segment {count}: {e}")))
                    }
                    RawStep::Index(_) => doc_err(format!(
                        "{what}segment {count} must be a {{ index = i, duration = d }} table \
                         in continuous mode"
                    )),
                }
            })
            .collect()
    };
    let prefix = convert(&raw.prefix)?;
    let tail = convert(&raw.tail)?;
    Ok((prefix, tail))
}

/// Converts raw steps to a discrete index list, one shared numbering.
fn steps(raw: &RawSignal, what: &str) -> Result<(Vec<usize>, Vec<usize>), DocError> {
    let mut count = 0usize;
    let mut convert = |steps: &[RawStep]| -> Result<Vec<usize>, DocError> {
        steps
            .iter()
            .map(|step| {
                count += 1;
                match *step {
                    RawStep::Index(0) => doc_err(format!(
                        "subsystem index 0 at {what}step {count}; indices are 1-based"
                    )),
                    RawStep::Index(i) => Ok(i),
                    RawStep::Segment { .. } => doc_err(format!(
                        "{what}step {count} must be a bare subsystem index in discrete mode"
                    )),
                }
            })
            .collect()
    };
    let prefix = convert(&raw.prefix)?;
    let tail = convert(&raw.tail)?;
    Ok((prefix, tail))
}

fn continuous_half(
    subsystems: &[RawSubsystem],
    signal: &RawSignal,
    what: &str,
) -> Result<(SwitchedSystem, ContinuousSignal), DocError> {
    let system = SwitchedSystem::continuous(matrices(subsystems, what)?)
        .map_err(|e| DocError(e.to_string()))?;
    let (prefix, tail) = segments(signal, what)?;
    let signal =
        ContinuousSignal::new(prefix, tail).map_err(|e| DocError(format!("{what}signal: {e}")))?;
    Ok((system, signal))
}

fn discrete_half(
    subsystems: &[RawSubsystem],
    signal: &RawSignal,
    what: &str,
) -> Result<(SwitchedSystem, DiscreteSignal), DocError> {
    let system = SwitchedSystem::discrete(matrices(subsystems, what)?)
        .map_err(|e| DocError(e.to_string()))?;
    let (prefix, tail) = steps(signal, what)?;
    let signal =
        DiscreteSignal::new(prefix, tail).map_err(|e| DocError(format!("{what}signal: {e}")))?;
    Ok((system, signal))
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, DocError> {
        let raw: RawDocument = toml::from_str(text).map_err(|e| DocError(e.to_string()))?;
        if raw.format_version != FORMAT_VERSION {
            return doc_err(format!(
                "unsupported format_version {}; this tool reads version {FORMAT_VERSION}",
                raw.format_version
            ));
        }
        let content = match raw.mode {
            RawMode::Continuous | RawMode::Discrete => {
                if raw.flow.is_some() || raw.jump.is_some() {
                    return doc_err(format!(
                        "[flow] and [jump] tables belong to hybrid documents, not mode \"{}\"",
                        if matches!(raw.mode, RawMode::Continuous) { "continuous" } else { "discrete" },
                    ));
                }
                let Some(signal) = &raw.signal else {
                    return doc_err("document has no [signal] table");
                };
                match raw.mode {
                    RawMode::Continuous => {
                        let (system, signal) = continuous_half(&raw.subsystem, signal, "")?;
                        Content::Continuous { system, signal }
                    }
                    _ => {
                        let (system, signal) = discrete_half(&raw.subsystem, signal, "")?;
                        Content::Discrete { system, signal }
                    }
                }
            }
            RawMode::Hybrid => {
                if !raw.subsystem.is_empty() || raw.signal.is_some() {
                    return doc_err(
                        "hybrid documents nest subsystems and signals under [flow] and [jump]",
                    );
                }
                let (Some(flow), Some(jump)) = (&raw.flow, &raw.jump) else {
                    return doc_err("hybrid documents need both [flow] and [jump] tables");
                };
                let (flow_system, sigma1) =
                    continuous_half(&flow.subsystem, &flow.signal, "flow ")?;
                let (jump_system, sigma2) = discrete_half(&jump.subsystem, &jump.signal, "jump ")?;
                let system = HybridSystem::new(flow_system, jump_system)
                    .map_err(|e| DocError(e.to_string()))?;
                Content::Hybrid { system, signal: HybridSignal::new(sigma1, sigma2) }
            }
        };
        Ok(Document { metadata: raw.metadata, content })
    }

    /// Canonical text form. Parsing the output reproduces this document,
    /// and re-writing it reproduces the bytes.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format_version = {FORMAT_VERSION}");
        let _ = writeln!(out, "mode = \"{}\"", self.content.mode());
        if !self.metadata.is_empty() {
            let _ = writeln!(out, "\n[metadata]");
            if let Some(name) = &self.metadata.name {
                let _ = writeln!(out, "name = {}", toml_string(name));
            }
            if let Some(desc) = &self.metadata.description {
                let _ = writeln!(out, "description = {}", toml_string(desc));
            }
        }
        match &self.content {
            Content::Continuous { system, signal } => {
                write_subsystems(&mut out, system, "subsystem");
                write_continuous_signal(&mut out, signal, "signal");
            }
            Content::Discrete { system, signal } => {
                write_subsystems(&mut out, system, "subsystem");
                write_discrete_signal(&mut out, signal, "signal");
            }
            Content::Hybrid { system, signal } => {
                write_subsystems(&mut out, system.flow(), "flow.subsystem");
                write_continuous_signal(&mut out, &signal.sigma1, "flow.signal");
                write_subsystems(&mut out, system.jump(), "jump.subsystem");
                write_discrete_signal(&mut out, &signal.sigma2, "jump.signal");
            }
        }
        out
    }
}

/// TOML basic string with the escapes the writer can produce.
fn toml_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Shortest float literal that round-trips; always carries a decimal point
/// or exponent so TOML keeps the value a float.
fn toml_float(x: f64) -> String {
    format!("{x:?}")
}

fn write_subsystems(out: &mut String, system: &SwitchedSystem, table: &str) {
    for m in system.matrices() {
        let _ = writeln!(out, "\n[[{table}]]");
        let _ = writeln!(out, "matrix = [");
        for row in m.rows() {
            let entries: Vec<String> = row.iter().map(|&v| toml_float(v)).collect();
            let _ = writeln!(out, "    [{}],", entries.join(", "));
        }
        let _ = writeln!(out, "]");
    }
}

fn write_segment_list(out: &mut String, key: &str, segments: &[Segment]) {
    if segments.is_empty() {
        let _ = writeln!(out, "{key} = []");
        return;
    }
    let _ = writeln!(out, "{key} = [");
    for seg in segments {
        let _ = writeln!(
            out,
            "    {{ index = {}, duration = {} }},",
            seg.index,
            toml_float(seg.duration)
        );
    }
    let _ = writeln!(out, "]");
}

fn write_continuous_signal(out: &mut String, signal: &ContinuousSignal, table: &str) {
    let _ = writeln!(out, "\n[{table}]");
    write_segment_list(out, "prefix", signal.prefix());
    write_segment_list(out, "tail", signal.tail());
}

fn write_discrete_signal(out: &mut String, signal: &DiscreteSignal, table: &str) {
    let _ = writeln!(out, "\n[{table}]");
    let join = |steps: &[usize]| {
        steps.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
    };
    let _ = writeln!(out, "prefix = [{}]", join(signal.prefix()));
    let _ = writeln!(out, "tail = [{}]", join(signal.tail()));
}
