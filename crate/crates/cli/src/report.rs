//! Markdown and merged-JSON reports over trace files.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use tw_core::rules::{registry_table, RuleId};
use tw_core::trace::{EliminationTrace, Outcome};

fn histogram<'a>(records: impl Iterator<Item = &'a tw_core::trace::TraceRecord>) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for r in records {
        *h.entry(r.verdict.rule.to_string()).or_insert(0) += 1;
    }
    h
}

fn rule_name(id: &str) -> &'static str {
    match id.parse::<RuleId>() {
        Ok(r) => r.info().name,
        Err(_) => "",
    }
}

fn table(out: &mut String, h: &BTreeMap<String, usize>) {
    out.push_str("| rule | name | configurations |\n|---|---|---|\n");
    for (rule, n) in h {
        let name = if rule == "SURVIVOR" { "passes every rule" } else { rule_name(rule) };
        out.push_str(&format!("| {rule} | {name} | {n} |\n"));
    }
    out.push('\n');
}

/// Markdown report over any number of traces: a merged summary, one
/// section per `s` value, and the rule table. Pure in its input.
pub fn render_report(traces: &[EliminationTrace]) -> String {
    let mut out = String::from("# Elimination report\n\n");
    let all: Vec<_> = traces.iter().flat_map(|t| t.records.iter()).collect();
    let survivors: usize = traces.iter().map(|t| t.summary.survivors).sum();
    let gaps: usize = traces.iter().filter_map(|t| t.summary.coverage_gaps).sum();
    out.push_str(&format!(
        "{} trace(s), {} configurations, {} survivor(s), {} coverage gap(s).\n\n",
        traces.len(),
        all.len(),
        survivors,
        gaps
    ));
    if !all.is_empty() {
        out.push_str("## Summary\n\n");
        table(&mut out, &histogram(all.iter().copied()));
    }

    for t in traces {
        let s_values: BTreeSet<u32> = t.records.iter().map(|r| r.config.s).collect();
        for s in s_values {
            let recs: Vec<_> = t.records.iter().filter(|r| r.config.s == s).collect();
            out.push_str(&format!("## s = {s} ({})\n\n", t.kind));
            if !t.disabled_rules.is_empty() {
                let d: Vec<String> = t.disabled_rules.iter().map(|r| r.to_string()).collect();
                out.push_str(&format!("Disabled rules: {}.\n\n", d.join(", ")));
            }
            table(&mut out, &histogram(recs.iter().copied()));
            let open: Vec<_> = recs.iter().filter(|r| r.verdict.rule == Outcome::Survivor).collect();
            if !open.is_empty() {
                out.push_str("Configurations with survivors:\n\n");
                for r in open {
                    out.push_str(&format!("- `{}` {}\n", r.id, r.verdict.survivors.join(" ")));
                }
                out.push('\n');
            }
        }
        if !t.survivors.is_empty() {
            out.push_str(&format!("### Surviving pairs ({})\n\n", t.survivors.len()));
            for s in &t.survivors {
                out.push_str(&format!("- `{}` ws={:?} wt={:?}\n  `{}`\n", s.id, s.ws, s.wt, s.encoding));
            }
            out.push('\n');
        }
    }

    out.push_str("## Rules\n\n");
    out.push_str(&registry_table());
    out
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct MergedSummary<'a> {
    traces: Vec<TraceSummary<'a>>,
    enumerated: usize,
    eliminated_by_rule: BTreeMap<String, usize>,
    survivors: usize,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct TraceSummary<'a> {
    kind: &'a str,
    s_values: &'a [u32],
    summary: &'a tw_core::trace::Summary,
}

pub fn render_json(traces: &[EliminationTrace]) -> String {
    let mut hist = BTreeMap::new();
    for t in traces {
        for (k, v) in &t.summary.eliminated_by_rule {
            *hist.entry(k.clone()).or_insert(0) += v;
        }
    }
    let m = MergedSummary {
        traces: traces
            .iter()
            .map(|t| TraceSummary {
                kind: &t.kind,
                s_values: &t.s_values,
                summary: &t.summary,
            })
            .collect(),
        enumerated: traces.iter().map(|t| t.summary.enumerated).sum(),
        eliminated_by_rule: hist,
        survivors: traces.iter().map(|t| t.summary.survivors).sum(),
    };
    serde_json::to_string_pretty(&m).expect("summary serializes") + "\n"
}
