//! Checked-in transcriptions: a concrete graph pair and a table of `G_T`
//! candidates with their expected verdicts.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::LabelledGraph;
use crate::pair::{AssembleError, EdgeMatch, GraphPair};
use crate::search::config_id;
use crate::template::TorusTemplate;
use crate::trace::{EliminationTrace, Outcome};
use crate::weights::{Side, WeightVector};

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("malformed file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown {side} edge {name:?}")]
    UnknownEdge { side: &'static str, name: String },
    #[error("G_S edge {0} is not matched")]
    Unmatched(String),
    #[error(transparent)]
    Assemble(#[from] AssembleError),
}

/// A graph pair written with edge names, e.g. `"L1.1": "E2.0x"` where the
/// trailing `x` marks a crossed match.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairFile {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub template: String,
    pub ws: Vec<u32>,
    pub wt: Vec<u32>,
    pub phases_s: Vec<u32>,
    pub phases_t: Vec<u32>,
    pub matching: BTreeMap<String, String>,
}

impl PairFile {
    pub fn parse(text: &str) -> Result<PairFile, CaseError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn weights(&self) -> (WeightVector, WeightVector) {
        // Both graphs have two vertices at s = 2.
        (WeightVector::new(2, self.ws.clone()), WeightVector::new(2, self.wt.clone()))
    }

    pub fn to_pair(&self, template: &Arc<TorusTemplate>) -> Result<GraphPair, CaseError> {
        let (ws, wt) = self.weights();
        let gs = LabelledGraph::build(template.clone(), Side::S, ws, self.phases_s.clone()).map_err(AssembleError::Graph)?;
        let gt = LabelledGraph::build(template.clone(), Side::T, wt, self.phases_t.clone()).map_err(AssembleError::Graph)?;
        let mut matching = vec![None; gs.edges.len()];
        for (from, to) in &self.matching {
            let e = gs.edge_by_name(from).ok_or_else(|| CaseError::UnknownEdge {
                side: "G_S",
                name: from.clone(),
            })?;
            let (name, crossed) = match to.strip_suffix('x') {
                Some(n) => (n, true),
                None => (to.as_str(), false),
            };
            let f = gt.edge_by_name(name).ok_or_else(|| CaseError::UnknownEdge {
                side: "G_T",
                name: to.clone(),
            })?;
            matching[e] = Some(EdgeMatch { edge: f, crossed });
        }
        let matching = matching
            .into_iter()
            .enumerate()
            .map(|(e, m)| m.ok_or_else(|| CaseError::Unmatched(gs.edge_name(e))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GraphPair::new(Arc::new(gs), Arc::new(gt), matching)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub case: u32,
    /// The weight vectors making up the case (one per symmetric variant).
    pub wt: Vec<Vec<u32>>,
    pub expect: Outcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseTable {
    #[serde(default)]
    pub name: String,
    pub s: u32,
    pub ws: Vec<u32>,
    pub cases: Vec<Case>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseMismatch {
    pub case: u32,
    pub record: String,
    pub expected: Outcome,
    /// `None` when the trace has no record for the configuration.
    pub found: Option<Outcome>,
}

impl CaseTable {
    pub fn parse(text: &str) -> Result<CaseTable, CaseError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Compare every case against the matching records of an `s = 2` trace.
    pub fn check(&self, trace: &EliminationTrace) -> Vec<CaseMismatch> {
        let ws = WeightVector::new(2, self.ws.clone());
        let mut out = Vec::new();
        for c in &self.cases {
            for wt in &c.wt {
                let id = config_id(&ws, &WeightVector::new(2, wt.clone()));
                let found = trace.records.iter().find(|r| r.id == id).map(|r| r.verdict.rule);
                if found != Some(c.expect) {
                    out.push(CaseMismatch {
                        case: c.case,
                        record: id,
                        expected: c.expect,
                        found,
                    });
                }
            }
        }
        out
    }
}
