//! Executable elimination predicates.
//!
//! Every check returns a [`Verdict`] tagged with a stable [`RuleId`]. A
//! failing verdict carries a witness naming the graph, phases or pair, and
//! the offending edges; [`replay`] rebuilds that configuration and runs the
//! same predicate again.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{find_scycles, LabelledGraph, SCycle, SlotRef};
use crate::pair::{type_mismatch, AssembleError, GraphPair, PairId};
use crate::rules::RuleId;
use crate::template::{End, TorusTemplate};
use crate::weights::{Side, WeightVector};

pub use crate::graph::{associated_permutation, AssociatedPermutation, PermutationError};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub graph: Option<Side>,
    /// Phases of `graph` for single-graph checks.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub phases: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pair: Option<PairId>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub edges: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub vertices: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub labels: Vec<u32>,
    pub note: String,
}

impl Witness {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty() && self.vertices.is_empty() && self.labels.is_empty() && self.note.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub rule: RuleId,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn pass(rule: RuleId) -> Self {
        Verdict {
            rule,
            passed: true,
            witness: None,
        }
    }

    pub fn fail(rule: RuleId, witness: Witness) -> Self {
        Verdict {
            rule,
            passed: false,
            witness: Some(witness),
        }
    }

    pub fn failed(&self) -> bool {
        !self.passed
    }
}

fn vname(side: Side, v: usize) -> String {
    match side {
        Side::S => format!("u{}", v + 1),
        Side::T => format!("v{}", v + 1),
    }
}

fn graph_witness(g: &LabelledGraph) -> Witness {
    Witness {
        graph: Some(g.side),
        phases: Some(g.phases.clone()),
        ..Witness::default()
    }
}

fn pair_witness(p: &GraphPair) -> Witness {
    Witness {
        pair: Some(p.id()),
        ..Witness::default()
    }
}

/// Single-graph parity: an edge's sign here equals the sign its labels force
/// in the partner graph.
pub fn check_parity_graph(g: &LabelledGraph) -> Verdict {
    match g.parity_violation() {
        None => Verdict::pass(RuleId::L2_5_2),
        Some(e) => {
            let [a, b] = g.edges[e].ends;
            let sign = if g.is_positive(e) { "positive" } else { "negative" };
            Verdict::fail(
                RuleId::L2_5_2,
                Witness {
                    edges: vec![g.edge_name(e)],
                    vertices: vec![vname(g.side, a.vertex), vname(g.side, b.vertex)],
                    labels: g.edge_labels(e).to_vec(),
                    note: format!("edge is {sign} in G_{} and in the partner graph", g.side),
                    ..graph_witness(g)
                },
            )
        }
    }
}

pub fn check_parity(p: &GraphPair) -> Verdict {
    for e in 0..p.gs.edges.len() {
        let f = p.matching[e].edge;
        if p.gs.is_positive(e) == p.gt.is_positive(f) {
            let sign = if p.gs.is_positive(e) { "positive" } else { "negative" };
            return Verdict::fail(
                RuleId::L2_5_2,
                Witness {
                    edges: vec![p.gs.edge_name(e), p.gt.edge_name(f)],
                    labels: p.gs.edge_labels(e).to_vec(),
                    note: format!("edge is {sign} in both graphs"),
                    ..pair_witness(p)
                },
            );
        }
    }
    Verdict::pass(RuleId::L2_5_2)
}

/// Edge correspondence: the endpoint types of `G_S` and `G_T` agree.
pub fn check_duality(gs: &LabelledGraph, gt: &LabelledGraph) -> Verdict {
    match type_mismatch(gs, gt) {
        None => Verdict::pass(RuleId::Dual),
        Some((((ua, va), (ub, vb)), ns, nt)) => Verdict::fail(
            RuleId::Dual,
            Witness {
                pair: Some(PairId {
                    phases_s: gs.phases.clone(),
                    phases_t: gt.phases.clone(),
                    matching: Vec::new(),
                }),
                vertices: vec![
                    format!("u{}/v{}", ua + 1, va + 1),
                    format!("u{}/v{}", ub + 1, vb + 1),
                ],
                note: format!("{ns} edges of this point type in G_S, {nt} in G_T"),
                ..Witness::default()
            },
        ),
    }
}

/// Family-size bounds; in `G_T` with `s >= 4` a maximal positive family needs
/// an S-cycle at one end.
pub fn check_family_bounds(g: &LabelledGraph) -> Verdict {
    family_bounds(g, &|_| true)
}

fn family_bounds(g: &LabelledGraph, enabled: &dyn Fn(RuleId) -> bool) -> Verdict {
    let s = g.t();
    let scycles = find_scycles(g);
    let is_scycle = |a: usize, b: usize| {
        let key = if a < b { [a, b] } else { [b, a] };
        scycles.iter().any(|c| c.edges == key)
    };
    for f in &g.families {
        let n = f.edges.len() as u32;
        let (rule, bound) = match (g.side, f.positive) {
            (Side::S, true) => (RuleId::L2_6_1, 3),
            (Side::S, false) => (RuleId::L2_6_2, 2),
            (Side::T, true) if s >= 4 => (RuleId::L2_7_2, s / 2 + 1),
            (Side::T, true) => continue,
            (Side::T, false) => (RuleId::L2_7_3, s),
        };
        if !enabled(rule) {
            continue;
        }
        let names = || f.edges.iter().map(|&e| g.edge_name(e)).collect::<Vec<_>>();
        if n > bound {
            return Verdict::fail(
                rule,
                Witness {
                    edges: names(),
                    note: format!("family of {n} parallel edges exceeds {bound}"),
                    ..graph_witness(g)
                },
            );
        }
        if rule == RuleId::L2_7_2 && n == bound {
            let e = &f.edges;
            let k = e.len();
            if !(is_scycle(e[0], e[1]) || is_scycle(e[k - 2], e[k - 1])) {
                return Verdict::fail(
                    rule,
                    Witness {
                        edges: names(),
                        note: format!("family of {n} positive edges has no S-cycle at either end"),
                        ..graph_witness(g)
                    },
                );
            }
        }
    }
    Verdict::pass(RuleId::L2_6_1)
}

pub fn check_no_double_parallel(p: &GraphPair) -> Verdict {
    let n = p.gs.edges.len();
    for e1 in 0..n {
        for e2 in e1 + 1..n {
            if p.gs.family_of[e1] != p.gs.family_of[e2] {
                continue;
            }
            let (f1, f2) = (p.matching[e1].edge, p.matching[e2].edge);
            if p.gt.family_of[f1] == p.gt.family_of[f2] {
                return Verdict::fail(
                    RuleId::L2_5_1,
                    Witness {
                        edges: vec![
                            p.gs.edge_name(e1),
                            p.gs.edge_name(e2),
                            p.gt.edge_name(f1),
                            p.gt.edge_name(f2),
                        ],
                        note: "edges parallel in both graphs".into(),
                        ..pair_witness(p)
                    },
                );
            }
        }
    }
    Verdict::pass(RuleId::L2_5_1)
}

/// Points adjacent in `u`'s order are never adjacent in `v`'s order.
/// `v_order[r]` is the `u`-index of the `r`-th point around `v`.
pub fn jump_pattern_ok(v_order: &[usize]) -> bool {
    let n = v_order.len();
    if n < 3 {
        return false;
    }
    (0..n).all(|r| {
        let (a, b) = (v_order[r], v_order[(r + 1) % n]);
        let d = (a + n - b) % n;
        d != 1 && d != n - 1
    })
}

pub fn check_jumping(p: &GraphPair) -> Verdict {
    let pts = p.points();
    for u in 0..p.gs.vertex_count() {
        for v in 0..p.gt.vertex_count() {
            let shared: Vec<_> = pts.iter().filter(|q| q.s.vertex == u && q.t.vertex == v).collect();
            let mut v_order: Vec<usize> = (0..shared.len()).collect();
            v_order.sort_by_key(|&r| shared[r].t.pos);
            if !jump_pattern_ok(&v_order) {
                return Verdict::fail(
                    RuleId::L2_4,
                    Witness {
                        vertices: vec![vname(Side::S, u), vname(Side::T, v)],
                        edges: v_order.iter().map(|&r| p.gs.edge_name(shared[r].s_edge)).collect(),
                        note: format!(
                            "points in v order read {:?} in u order",
                            v_order.iter().map(|r| r + 1).collect::<Vec<_>>()
                        ),
                        ..pair_witness(p)
                    },
                );
            }
        }
    }
    Verdict::pass(RuleId::L2_4)
}

/// Displacement of the other-graph image of S-cycle edge `e`, traversed from
/// the point whose label is `i`.
fn image_displacement(p: &GraphPair, side: Side, e: usize, i: u32) -> [i64; 2] {
    let g = p.graph(side);
    let o = p.graph(side.other());
    let end = if g.slot(g.end_slot(e, End::A)).label == i {
        End::A
    } else {
        End::B
    };
    let r = p.across(side, g.end_slot(e, end));
    o.tag_from(o.slot(r).edge, o.slot(r).end)
}

fn scycle_witness(p: &GraphPair, side: Side, cycles: &[&SCycle], note: String) -> Witness {
    let g = p.graph(side);
    Witness {
        graph: Some(side),
        edges: cycles.iter().flat_map(|c| c.edges.iter().map(|&e| g.edge_name(e))).collect(),
        labels: cycles.iter().flat_map(|c| c.labels()).collect(),
        note,
        ..pair_witness(p)
    }
}

fn cyclic_equal(a: &[usize], b: &[usize]) -> bool {
    let n = a.len();
    if n != b.len() {
        return false;
    }
    if n <= 2 {
        return true;
    }
    let Some(i) = b.iter().position(|&x| x == a[0]) else {
        return false;
    };
    (0..n).all(|r| b[(i + r) % n] == a[r])
}

/// S-cycle constraints in the order L2.5.3, L2.7.1, L2.7.4, SC-CONN.
pub fn check_scycle_constraints(p: &GraphPair) -> Verdict {
    scycle_constraints(p, &|_| true)
}

fn scycle_constraints(p: &GraphPair, enabled: &dyn Fn(RuleId) -> bool) -> Verdict {
    let by_side = [(Side::S, find_scycles(&p.gs)), (Side::T, find_scycles(&p.gt))];

    if enabled(RuleId::L2_5_3) {
        for (side, cycles) in &by_side {
            for c in cycles {
                let i = c.label_pair.0;
                let d1 = image_displacement(p, *side, c.edges[0], i);
                let d2 = image_displacement(p, *side, c.edges[1], i);
                if d1 == d2 {
                    return Verdict::fail(
                        RuleId::L2_5_3,
                        scycle_witness(p, *side, &[c], "image cycle is null-homologous".into()),
                    );
                }
            }
        }
    }

    let t_cycles = &by_side[1].1;
    let s = p.gt.t();
    for (a, c1) in t_cycles.iter().enumerate() {
        for c2 in &t_cycles[a + 1..] {
            if !c1.disjoint_labels(c2) {
                continue;
            }
            if s == 4 && enabled(RuleId::L2_7_1) {
                return Verdict::fail(
                    RuleId::L2_7_1,
                    scycle_witness(p, Side::T, &[c1, c2], "disjoint label pairs with s = 4".into()),
                );
            }
            if c1.face_side != c2.face_side && enabled(RuleId::L2_7_4) {
                return Verdict::fail(
                    RuleId::L2_7_4,
                    scycle_witness(p, Side::T, &[c1, c2], "disjoint label pairs on opposite sides".into()),
                );
            }
        }
    }

    if enabled(RuleId::ScConn) {
        for (side, cycles) in &by_side {
            if let Some(v) = connection_violation(p, *side, cycles) {
                return v;
            }
        }
    }
    Verdict::pass(RuleId::L2_5_3)
}

fn connection_violation(p: &GraphPair, side: Side, cycles: &[SCycle]) -> Option<Verdict> {
    let g = p.graph(side);
    // (face side, lower partner vertex, upper partner vertex) -> arcs
    let mut groups: BTreeMap<(u8, usize, usize), Vec<(SlotRef, SlotRef, usize)>> = BTreeMap::new();
    for (k, c) in cycles.iter().enumerate() {
        for &corner in &c.corners {
            let x = p.across(side, corner);
            let y = p.across(side, g.next_ccw(corner));
            let (a, b) = if x.vertex <= y.vertex { (x, y) } else { (y, x) };
            groups
                .entry((g.corner_side(corner), a.vertex, b.vertex))
                .or_default()
                .push((a, b, k));
        }
    }
    for ((face, va, vb), arcs) in groups {
        let mut at_a: Vec<usize> = (0..arcs.len()).collect();
        at_a.sort_by_key(|&r| arcs[r].0.pos);
        let mut at_b: Vec<usize> = (0..arcs.len()).collect();
        at_b.sort_by_key(|&r| std::cmp::Reverse(arcs[r].1.pos));
        if !cyclic_equal(&at_a, &at_b) {
            let mut ks: Vec<usize> = arcs.iter().map(|a| a.2).collect();
            ks.dedup();
            let involved: Vec<&SCycle> = ks.iter().map(|&k| &cycles[k]).collect();
            let other = side.other();
            let mut w = scycle_witness(
                p,
                side,
                &involved,
                format!("corner arcs on side {face} cannot be joined disjointly"),
            );
            w.vertices = vec![vname(other, va), vname(other, vb)];
            return Some(Verdict::fail(RuleId::ScConn, w));
        }
    }
    None
}

/// Pair-level filter stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    Parity,
    Bounds,
    DoubleParallel,
    SCycle,
    Jumping,
}

impl Stage {
    pub const DEFAULT_ORDER: [Stage; 5] = [
        Stage::Parity,
        Stage::Bounds,
        Stage::DoubleParallel,
        Stage::SCycle,
        Stage::Jumping,
    ];

    pub fn rules(self) -> &'static [RuleId] {
        match self {
            Stage::Parity => &[RuleId::L2_5_2],
            Stage::Bounds => &[RuleId::L2_6_1, RuleId::L2_6_2, RuleId::L2_7_2, RuleId::L2_7_3],
            Stage::DoubleParallel => &[RuleId::L2_5_1],
            Stage::SCycle => &[RuleId::L2_5_3, RuleId::L2_7_1, RuleId::L2_7_4, RuleId::ScConn],
            Stage::Jumping => &[RuleId::L2_4],
        }
    }

    pub fn of(rule: RuleId) -> Option<Stage> {
        Stage::DEFAULT_ORDER.into_iter().find(|s| s.rules().contains(&rule))
    }
}

/// Enabled rules and the order in which stages run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterSet {
    pub disabled: Vec<RuleId>,
    pub order: Vec<Stage>,
}

impl Default for FilterSet {
    fn default() -> Self {
        FilterSet {
            disabled: Vec::new(),
            order: Stage::DEFAULT_ORDER.to_vec(),
        }
    }
}

impl FilterSet {
    pub fn without(rules: &[RuleId]) -> Self {
        let mut disabled = rules.to_vec();
        disabled.sort();
        disabled.dedup();
        FilterSet {
            disabled,
            ..FilterSet::default()
        }
    }

    pub fn enabled(&self, rule: RuleId) -> bool {
        !self.disabled.contains(&rule)
    }

    /// Position of a rule in the evaluation order; later rules rank higher.
    pub fn rank(&self, rule: RuleId) -> usize {
        match Stage::of(rule) {
            None => 0,
            Some(stage) => {
                let si = self.order.iter().position(|&s| s == stage).unwrap_or(0);
                let ri = stage.rules().iter().position(|&r| r == rule).unwrap_or(0);
                1 + si * 8 + ri
            }
        }
    }

    /// Run one stage; disabled rules are skipped (a failure of a disabled
    /// rule is ignored and later rules of the stage still run).
    pub fn run_stage(&self, stage: Stage, p: &GraphPair) -> Option<Verdict> {
        let keep = |v: Verdict| (v.failed() && self.enabled(v.rule)).then_some(v);
        match stage {
            Stage::Parity => keep(check_parity(p)),
            Stage::Bounds => {
                let mut out = None;
                for g in [&p.gs, &p.gt] {
                    out = out.or_else(|| keep(family_bounds(g, &|r| self.enabled(r))));
                }
                out
            }
            Stage::DoubleParallel => keep(check_no_double_parallel(p)),
            Stage::SCycle => keep(scycle_constraints(p, &|r| self.enabled(r))),
            Stage::Jumping => keep(check_jumping(p)),
        }
    }

    /// First failing enabled rule for the pair, following `order`.
    pub fn first_failure(&self, p: &GraphPair) -> Option<Verdict> {
        self.order.iter().find_map(|&s| self.run_stage(s, p))
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("verdict has no witness")]
    NoWitness,
    #[error("witness names neither a pair nor a graph")]
    Incomplete,
    #[error("rule {0} has no replayable predicate")]
    NotReplayable(RuleId),
    #[error(transparent)]
    Assemble(#[from] AssembleError),
}

/// Rebuild the configuration named by a failing verdict's witness and run
/// the predicate for its rule again.
pub fn replay(
    template: &Arc<TorusTemplate>,
    ws: &WeightVector,
    wt: &WeightVector,
    verdict: &Verdict,
) -> Result<Verdict, ReplayError> {
    let w = verdict.witness.as_ref().ok_or(ReplayError::NoWitness)?;
    let rule = verdict.rule;
    if let (Some(side), Some(phases)) = (w.graph, &w.phases) {
        let weights = match side {
            Side::S => ws,
            Side::T => wt,
        };
        let g = LabelledGraph::build(template.clone(), side, weights.clone(), phases.clone())
            .map_err(AssembleError::from)?;
        return match rule {
            RuleId::L2_5_2 => Ok(check_parity_graph(&g)),
            RuleId::L2_6_1 | RuleId::L2_6_2 | RuleId::L2_7_2 | RuleId::L2_7_3 => {
                Ok(family_bounds(&g, &|r| r == rule))
            }
            other => Err(ReplayError::NotReplayable(other)),
        };
    }
    let id = w.pair.as_ref().ok_or(ReplayError::Incomplete)?;
    if rule == RuleId::Dual {
        let gs = LabelledGraph::build(template.clone(), Side::S, ws.clone(), id.phases_s.clone())
            .map_err(AssembleError::from)?;
        let gt = LabelledGraph::build(template.clone(), Side::T, wt.clone(), id.phases_t.clone())
            .map_err(AssembleError::from)?;
        return Ok(check_duality(&gs, &gt));
    }
    let p = GraphPair::from_id(template, ws, wt, id)?;
    match Stage::of(rule) {
        Some(Stage::Parity) => Ok(check_parity(&p)),
        Some(Stage::DoubleParallel) => Ok(check_no_double_parallel(&p)),
        Some(Stage::Jumping) => Ok(check_jumping(&p)),
        Some(Stage::SCycle) => Ok(scycle_constraints(&p, &|r| r == rule)),
        Some(Stage::Bounds) | None => Err(ReplayError::NotReplayable(rule)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jump_patterns() {
        assert!(jump_pattern_ok(&[0, 2, 4, 1, 3]));
        assert!(!jump_pattern_ok(&[0, 1, 2, 3, 4]));
        assert!(jump_pattern_ok(&[0, 3, 1, 4, 2]));
    }

    #[test]
    fn cyclic_comparison() {
        assert!(cyclic_equal(&[0, 1, 2, 3], &[2, 3, 0, 1]));
        assert!(!cyclic_equal(&[0, 1, 2, 3], &[0, 2, 1, 3]));
    }
}
