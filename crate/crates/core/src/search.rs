//! The complete `s = 2` search.
//!
//! A configuration is a pair of weight vectors `(ws, wt)`. Inside it every
//! phase choice and every type-respecting edge matching is assembled and run
//! through the filters. The configuration's verdict is `SURVIVOR` if any pair
//! passes; otherwise it is the failing rule that ranks latest in the filter
//! order among all its pairs (the first pair attaining it supplies the
//! witness).

use std::collections::BTreeMap;
use std::ops::ControlFlow;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::{canonical_form, labelled_form, CanonicalForm};
use crate::filters::{check_duality, check_parity_graph, FilterSet, Verdict};
use crate::graph::LabelledGraph;
use crate::pair::{all_phases, for_each_matching, GraphPair, PairId};
use crate::rules::RuleId;
use crate::template::TorusTemplate;
use crate::trace::{ConfigKey, EliminationTrace, Outcome, RecordVerdict, SurvivorRecord, TraceRecord};
use crate::weights::{enumerate_weight_vectors_with, Side, WeightBounds, WeightError, WeightVector};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchConfig {
    pub s_values: Vec<u32>,
    pub filters: FilterSet,
    pub symmetry: bool,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Configurations per checkpoint chunk.
    #[serde(default)]
    pub checkpoint_every: Option<usize>,
    #[serde(default)]
    pub checkpoint_path: Option<PathBuf>,
    /// Stop with a partial trace once this many pairs have been examined.
    #[serde(default)]
    pub max_pairs: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            s_values: vec![2],
            filters: FilterSet::default(),
            symmetry: true,
            workers: 0,
            out_dir: None,
            checkpoint_every: None,
            checkpoint_path: None,
            max_pairs: None,
        }
    }
}

/// Resumable search state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Checkpoint {
    pub next_config: usize,
    pub total_configs: usize,
    pub pairs: u64,
    pub records: Vec<TraceRecord>,
    pub survivors: Vec<SurvivorRecord>,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("search requires s = 2, got {0:?}")]
    NotS2(Vec<u32>),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error("pair budget of {budget} exceeded after {done} of {total} configurations; resumable checkpoint kept")]
    Budget {
        budget: u64,
        done: usize,
        total: usize,
        checkpoint: Box<Checkpoint>,
    },
    #[error("checkpoint does not match this search ({0})")]
    BadCheckpoint(String),
    #[error("cannot write checkpoint: {0}")]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// All weight-vector pairs of the `s = 2` search domain, lexicographic.
pub fn s2_configs(filters: &FilterSet) -> Result<Vec<(WeightVector, WeightVector)>, WeightError> {
    let enabled = |r: RuleId| filters.enabled(r);
    let ws = enumerate_weight_vectors_with(2, Side::S, WeightBounds::for_side(2, Side::S, &enabled))?;
    let wt = enumerate_weight_vectors_with(2, Side::T, WeightBounds::for_side(2, Side::T, &enabled))?;
    let mut out = Vec::with_capacity(ws.len() * wt.len());
    for a in &ws {
        for b in &wt {
            out.push((a.clone(), b.clone()));
        }
    }
    Ok(out)
}

pub fn config_id(ws: &WeightVector, wt: &WeightVector) -> String {
    format!("s2/S{ws}/T{wt}")
}

/// Result of examining one configuration.
#[derive(Clone, Debug)]
pub struct ConfigResult {
    pub record: TraceRecord,
    pub survivors: Vec<(CanonicalForm, PairId)>,
}

struct Best {
    rank: usize,
    verdict: Verdict,
}

/// Examine every pair of one configuration.
pub fn evaluate_config(
    template: &Arc<TorusTemplate>,
    ws: &WeightVector,
    wt: &WeightVector,
    filters: &FilterSet,
    symmetry: bool,
) -> ConfigResult {
    let mut best: Option<Best> = None;
    let consider = |v: Verdict, best: &mut Option<Best>| {
        let rank = filters.rank(v.rule);
        if best.as_ref().map_or(true, |b| rank > b.rank) {
            *best = Some(Best { rank, verdict: v });
        }
    };
    let mut survivors: BTreeMap<CanonicalForm, PairId> = BTreeMap::new();
    let mut pairs = 0u64;
    let parity_on = filters.enabled(RuleId::L2_5_2);

    for ps in all_phases(template.vertices, ws.t) {
        let gs = match LabelledGraph::build(template.clone(), Side::S, ws.clone(), ps) {
            Ok(g) => Arc::new(g),
            Err(_) => continue,
        };
        let gs_parity = check_parity_graph(&gs);
        for pt in all_phases(template.vertices, wt.t) {
            if parity_on && gs_parity.failed() {
                consider(gs_parity.clone(), &mut best);
                continue;
            }
            let gt = match LabelledGraph::build(template.clone(), Side::T, wt.clone(), pt) {
                Ok(g) => Arc::new(g),
                Err(_) => continue,
            };
            if parity_on {
                let v = check_parity_graph(&gt);
                if v.failed() {
                    consider(v, &mut best);
                    continue;
                }
            }
            let dual = check_duality(&gs, &gt);
            if dual.failed() {
                consider(dual, &mut best);
                continue;
            }
            let _ = for_each_matching(&gs, &gt, |m| {
                pairs += 1;
                let p = GraphPair::new(gs.clone(), gt.clone(), m.to_vec()).expect("typed matching");
                match filters.first_failure(&p) {
                    Some(v) => consider(v, &mut best),
                    None => {
                        let form = if symmetry { canonical_form(&p) } else { labelled_form(&p) };
                        survivors.entry(form).or_insert_with(|| p.id());
                    }
                }
                ControlFlow::Continue(())
            });
        }
    }

    let verdict = if !survivors.is_empty() {
        RecordVerdict {
            rule: Outcome::Survivor,
            witness: None,
            survivors: survivors.keys().map(CanonicalForm::id).collect(),
        }
    } else {
        let v = best.map(|b| b.verdict).unwrap_or_else(|| {
            // Every graph failed to build: nothing to match.
            Verdict::fail(
                RuleId::Dual,
                crate::filters::Witness {
                    note: "no labelled graphs for these weights".into(),
                    ..Default::default()
                },
            )
        });
        RecordVerdict {
            rule: Outcome::Eliminated(v.rule),
            witness: v.witness,
            survivors: Vec::new(),
        }
    };
    ConfigResult {
        record: TraceRecord {
            id: config_id(ws, wt),
            config: ConfigKey {
                s: 2,
                ws: ws.x.clone(),
                wt: wt.x.clone(),
                case_tags: vec![format!("p1={}", ws.loops()), format!("q1={}", wt.loops())],
            },
            verdict,
            pairs,
        },
        survivors: survivors.into_iter().collect(),
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, SearchError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SearchError::Pool(e.to_string()))
}

/// Run the full `s = 2` search, optionally resuming from a checkpoint.
pub fn search_s2_from(
    template: &Arc<TorusTemplate>,
    cfg: &SearchConfig,
    resume: Option<Checkpoint>,
) -> Result<EliminationTrace, SearchError> {
    if cfg.s_values != [2] {
        return Err(SearchError::NotS2(cfg.s_values.clone()));
    }
    let configs = s2_configs(&cfg.filters)?;
    let mut state = match resume {
        Some(c) => {
            if c.total_configs != configs.len() || c.next_config > configs.len() {
                return Err(SearchError::BadCheckpoint(format!(
                    "{} configurations recorded, {} expected",
                    c.total_configs,
                    configs.len()
                )));
            }
            c
        }
        None => Checkpoint {
            next_config: 0,
            total_configs: configs.len(),
            pairs: 0,
            records: Vec::new(),
            survivors: Vec::new(),
        },
    };
    let pool = pool(cfg.workers)?;
    // A pair budget is checked between chunks, so budgeted runs use small ones.
    let default_chunk = if cfg.max_pairs.is_some() {
        pool.current_num_threads()
    } else {
        configs.len()
    };
    let chunk = cfg.checkpoint_every.unwrap_or(default_chunk).max(1);
    let mut seen: BTreeMap<CanonicalForm, usize> = state
        .survivors
        .iter()
        .enumerate()
        .map(|(i, s)| (s.encoding.clone(), i))
        .collect();

    while state.next_config < configs.len() {
        let end = (state.next_config + chunk).min(configs.len());
        let slice = &configs[state.next_config..end];
        let results: Vec<ConfigResult> = pool.install(|| {
            slice
                .par_iter()
                .map(|(ws, wt)| evaluate_config(template, ws, wt, &cfg.filters, cfg.symmetry))
                .collect()
        });
        for ((ws, wt), r) in slice.iter().zip(results) {
            state.pairs += r.record.pairs;
            for (form, id) in r.survivors {
                if !seen.contains_key(&form) {
                    seen.insert(form.clone(), state.survivors.len());
                    state.survivors.push(SurvivorRecord {
                        id: form.id(),
                        encoding: form,
                        ws: ws.x.clone(),
                        wt: wt.x.clone(),
                        representative: id,
                    });
                }
            }
            state.records.push(r.record);
        }
        state.next_config = end;
        if let Some(path) = &cfg.checkpoint_path {
            write_checkpoint(path, &state)?;
        }
        if let Some(budget) = cfg.max_pairs {
            if state.pairs > budget && state.next_config < configs.len() {
                return Err(SearchError::Budget {
                    budget,
                    done: state.next_config,
                    total: configs.len(),
                    checkpoint: Box::new(state),
                });
            }
        }
    }

    Ok(finish(state, cfg))
}

pub fn search_s2(template: &Arc<TorusTemplate>, cfg: &SearchConfig) -> Result<EliminationTrace, SearchError> {
    search_s2_from(template, cfg, None)
}

/// Trace built from a (possibly partial) checkpoint.
pub fn finish(state: Checkpoint, cfg: &SearchConfig) -> EliminationTrace {
    let mut survivors = state.survivors;
    survivors.sort_by(|a, b| a.encoding.cmp(&b.encoding));
    let mut trace = EliminationTrace {
        kind: "s2-search".into(),
        s_values: vec![2],
        symmetry: cfg.symmetry,
        disabled_rules: cfg.filters.disabled.clone(),
        records: state.records,
        survivors,
        summary: Default::default(),
    };
    trace.summarize();
    trace
}

pub fn write_checkpoint(path: &std::path::Path, state: &Checkpoint) -> Result<(), SearchError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_vec(state).expect("checkpoint serializes"))?;
    std::fs::rename(tmp, path)?;
    Ok(())
}

pub fn read_checkpoint(path: &std::path::Path) -> Result<Checkpoint, SearchError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| SearchError::BadCheckpoint(e.to_string()))
}
