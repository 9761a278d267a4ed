//! Elimination traces and their JSON / Markdown renderings.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::canon::CanonicalForm;
use crate::filters::Witness;
use crate::pair::PairId;
use crate::rules::RuleId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Eliminated(RuleId),
    Survivor,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Eliminated(r) => write!(f, "{r}"),
            Outcome::Survivor => f.write_str("SURVIVOR"),
        }
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("SURVIVOR") {
            Ok(Outcome::Survivor)
        } else {
            s.parse().map(Outcome::Eliminated)
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        String::deserialize(de)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfigKey {
    pub s: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ws: Vec<u32>,
    pub wt: Vec<u32>,
    #[serde(default)]
    pub case_tags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordVerdict {
    pub rule: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Ids of the surviving pairs of this configuration.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub survivors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub id: String,
    pub config: ConfigKey,
    pub verdict: RecordVerdict,
    /// Pairs examined (zero for decision-tree records).
    #[serde(default)]
    pub pairs: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SurvivorRecord {
    pub id: String,
    pub encoding: CanonicalForm,
    pub ws: Vec<u32>,
    pub wt: Vec<u32>,
    /// A concrete pair with this encoding.
    pub representative: PairId,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub enumerated: usize,
    pub eliminated_by_rule: BTreeMap<String, usize>,
    pub survivors: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage_gaps: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EliminationTrace {
    pub kind: String,
    pub s_values: Vec<u32>,
    pub symmetry: bool,
    #[serde(default)]
    pub disabled_rules: Vec<RuleId>,
    pub records: Vec<TraceRecord>,
    pub survivors: Vec<SurvivorRecord>,
    pub summary: Summary,
}

impl EliminationTrace {
    pub fn summarize(&mut self) {
        let mut hist = BTreeMap::new();
        for r in &self.records {
            if let Outcome::Eliminated(rule) = r.verdict.rule {
                *hist.entry(rule.to_string()).or_insert(0) += 1;
            }
        }
        self.summary.enumerated = self.records.len();
        self.summary.eliminated_by_rule = hist;
        self.summary.survivors = self.survivors.len();
    }

    pub fn fired_rules(&self) -> Vec<String> {
        self.summary.eliminated_by_rule.keys().cloned().collect()
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("unknown trace format {0:?} (expected json or md)")]
    UnknownFormat(String),
    #[error("corrupt trace at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceFormat {
    Json,
    Markdown,
}

impl FromStr for TraceFormat {
    type Err = TraceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(TraceFormat::Json),
            "md" | "markdown" => Ok(TraceFormat::Markdown),
            _ => Err(TraceError::UnknownFormat(s.to_string())),
        }
    }
}

pub fn emit_trace(trace: &EliminationTrace, format: TraceFormat) -> String {
    match format {
        TraceFormat::Json => to_json(trace),
        TraceFormat::Markdown => to_markdown(trace),
    }
}

pub fn to_json(trace: &EliminationTrace) -> String {
    let mut s = serde_json::to_string_pretty(trace).expect("trace serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<EliminationTrace, TraceError> {
    serde_json::from_str(text).map_err(|e| TraceError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// One section per rule that eliminated something, then the survivors.
pub fn to_markdown(trace: &EliminationTrace) -> String {
    let mut out = String::new();
    let title = if trace.kind.is_empty() { "trace" } else { &trace.kind };
    out.push_str(&format!("# Elimination trace: {title}\n\n"));
    if !trace.s_values.is_empty() {
        let s: Vec<String> = trace.s_values.iter().map(u32::to_string).collect();
        out.push_str(&format!("s = {}\n\n", s.join(", ")));
    }
    out.push_str(&format!(
        "{} configurations, {} survivors.\n\n",
        trace.summary.enumerated, trace.summary.survivors
    ));
    for (rule, count) in &trace.summary.eliminated_by_rule {
        out.push_str(&format!("## {rule}\n\n{count} configurations.\n\n"));
        for r in trace.records.iter().filter(|r| r.verdict.rule.to_string() == *rule) {
            out.push_str(&format!("- `{}`", r.id));
            if let Some(w) = &r.verdict.witness {
                if !w.note.is_empty() {
                    out.push_str(&format!(": {}", w.note));
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    if !trace.survivors.is_empty() {
        out.push_str("## Survivors\n\n");
        for s in &trace.survivors {
            out.push_str(&format!("- `{}` ws={:?} wt={:?}\n", s.id, s.ws, s.wt));
        }
        out.push('\n');
    }
    out
}
