//! Matched pairs `(G_S, G_T)` and their point bijection.
//!
//! A `G_S` endpoint at vertex `u_i` with label `j` is the same intersection
//! point as a `G_T` endpoint at `v_j` with label `i`. An edge of `G_S` is an
//! edge of `G_T`, so a pair is fixed by the two labelled graphs and an edge
//! matching that sends endpoints to endpoints of the same point type.

use std::collections::BTreeMap;
use std::ops::ControlFlow;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, LabelledGraph, SlotRef};
use crate::template::{End, TorusTemplate};
use crate::weights::{Side, WeightVector};

/// Image of one `G_S` edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeMatch {
    /// `G_T` edge.
    pub edge: usize,
    /// The `A` end of the `G_S` edge is the `B` end of the `G_T` edge.
    pub crossed: bool,
}

/// Everything needed to rebuild a pair from its weight vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairId {
    pub phases_s: Vec<u32>,
    pub phases_t: Vec<u32>,
    pub matching: Vec<EdgeMatch>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Point {
    pub s: SlotRef,
    pub t: SlotRef,
    pub s_edge: usize,
    pub t_edge: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssembleError {
    #[error("incompatible edge counts: G_S has {s_edges} edges, G_T has {t_edges}, expected {expected}")]
    Incompatible {
        s_edges: u32,
        t_edges: u32,
        expected: u32,
    },
    #[error("vertex counts do not match label ranges: G_S {s_vertices} vertices / G_T labels {t_labels}, G_T {t_vertices} vertices / G_S labels {s_labels}")]
    LabelRange {
        s_vertices: usize,
        t_labels: u32,
        t_vertices: usize,
        s_labels: u32,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("matching does not respect point types at G_S edge {0}")]
    BadMatching(usize),
}

#[derive(Clone, Debug)]
pub struct GraphPair {
    pub gs: Arc<LabelledGraph>,
    pub gt: Arc<LabelledGraph>,
    pub matching: Vec<EdgeMatch>,
    s_to_t: Vec<Vec<SlotRef>>,
    t_to_s: Vec<Vec<SlotRef>>,
}

/// Point type of an endpoint in `G_S` coordinates: `(G_S vertex, G_T vertex)`.
fn type_s(g: &LabelledGraph, r: SlotRef) -> (usize, usize) {
    (r.vertex, g.slot(r).label as usize - 1)
}

fn type_t(g: &LabelledGraph, r: SlotRef) -> (usize, usize) {
    (g.slot(r).label as usize - 1, r.vertex)
}

fn check_ranges(gs: &LabelledGraph, gt: &LabelledGraph) -> Result<(), AssembleError> {
    if gs.vertex_count() != gt.t() as usize || gt.vertex_count() != gs.t() as usize {
        return Err(AssembleError::LabelRange {
            s_vertices: gs.vertex_count(),
            t_labels: gt.t(),
            t_vertices: gt.vertex_count(),
            s_labels: gs.t(),
        });
    }
    Ok(())
}

impl GraphPair {
    pub fn new(
        gs: Arc<LabelledGraph>,
        gt: Arc<LabelledGraph>,
        matching: Vec<EdgeMatch>,
    ) -> Result<Self, AssembleError> {
        check_ranges(&gs, &gt)?;
        if matching.len() != gs.edges.len() || gs.edges.len() != gt.edges.len() {
            return Err(AssembleError::Incompatible {
                s_edges: gs.edges.len() as u32,
                t_edges: gt.edges.len() as u32,
                expected: matching.len() as u32,
            });
        }
        let mut s_to_t: Vec<Vec<SlotRef>> =
            gs.slots.iter().map(|v| vec![SlotRef { vertex: 0, pos: 0 }; v.len()]).collect();
        let mut t_to_s: Vec<Vec<SlotRef>> =
            gt.slots.iter().map(|v| vec![SlotRef { vertex: 0, pos: 0 }; v.len()]).collect();
        let mut used = vec![false; gt.edges.len()];
        for (e, m) in matching.iter().enumerate() {
            if m.edge >= used.len() || used[m.edge] {
                return Err(AssembleError::BadMatching(e));
            }
            used[m.edge] = true;
            for end in [End::A, End::B] {
                let sr = gs.end_slot(e, end);
                let tend = if m.crossed { end.other() } else { end };
                let tr = gt.end_slot(m.edge, tend);
                if type_s(&gs, sr) != type_t(&gt, tr) {
                    return Err(AssembleError::BadMatching(e));
                }
                s_to_t[sr.vertex][sr.pos] = tr;
                t_to_s[tr.vertex][tr.pos] = sr;
            }
        }
        Ok(GraphPair {
            gs,
            gt,
            matching,
            s_to_t,
            t_to_s,
        })
    }

    /// Rebuild a pair from weight vectors and a [`PairId`].
    pub fn from_id(
        template: &Arc<TorusTemplate>,
        ws: &WeightVector,
        wt: &WeightVector,
        id: &PairId,
    ) -> Result<Self, AssembleError> {
        let gs = LabelledGraph::build(template.clone(), Side::S, ws.clone(), id.phases_s.clone())?;
        let gt = LabelledGraph::build(template.clone(), Side::T, wt.clone(), id.phases_t.clone())?;
        GraphPair::new(Arc::new(gs), Arc::new(gt), id.matching.clone())
    }

    pub fn id(&self) -> PairId {
        PairId {
            phases_s: self.gs.phases.clone(),
            phases_t: self.gt.phases.clone(),
            matching: self.matching.clone(),
        }
    }

    pub fn graph(&self, side: Side) -> &LabelledGraph {
        match side {
            Side::S => &self.gs,
            Side::T => &self.gt,
        }
    }

    /// The point of `side` at slot `r`, seen from the other graph.
    pub fn across(&self, side: Side, r: SlotRef) -> SlotRef {
        match side {
            Side::S => self.s_to_t[r.vertex][r.pos],
            Side::T => self.t_to_s[r.vertex][r.pos],
        }
    }

    /// Edge of the other graph that is the same arc as edge `e` of `side`.
    pub fn image(&self, side: Side, e: usize) -> usize {
        match side {
            Side::S => self.matching[e].edge,
            Side::T => {
                let r = self.gt.end_slot(e, End::A);
                self.gs.slot(self.across(Side::T, r)).edge
            }
        }
    }

    /// All intersection points in `G_S` slot order.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for (u, slots) in self.gs.slots.iter().enumerate() {
            for (pos, slot) in slots.iter().enumerate() {
                let s = SlotRef { vertex: u, pos };
                let t = self.across(Side::S, s);
                out.push(Point {
                    s,
                    t,
                    s_edge: slot.edge,
                    t_edge: self.gt.slot(t).edge,
                });
            }
        }
        out
    }

    /// The five points shared by `u` (in `G_S`) and `v` (in `G_T`), in `u`'s
    /// ccw order.
    pub fn shared_points(&self, u: usize, v: usize) -> Vec<Point> {
        self.points()
            .into_iter()
            .filter(|p| p.s.vertex == u && p.t.vertex == v)
            .collect()
    }
}

/// Per-edge classification in both graphs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeClassification {
    pub s_edge: String,
    pub t_edge: String,
    pub positive_in_s: bool,
    pub positive_in_t: bool,
    pub labels_in_s: [u32; 2],
    pub labels_in_t: [u32; 2],
}

pub fn classify_edges(p: &GraphPair) -> Vec<EdgeClassification> {
    (0..p.gs.edges.len())
        .map(|e| {
            let f = p.matching[e].edge;
            EdgeClassification {
                s_edge: p.gs.edge_name(e),
                t_edge: p.gt.edge_name(f),
                positive_in_s: p.gs.is_positive(e),
                positive_in_t: p.gt.is_positive(f),
                labels_in_s: p.gs.edge_labels(e),
                labels_in_t: p.gt.edge_labels(f),
            }
        })
        .collect()
}

type EdgeType = ((usize, usize), (usize, usize));

fn unordered(t: EdgeType) -> EdgeType {
    if t.0 <= t.1 {
        t
    } else {
        (t.1, t.0)
    }
}

/// First unordered endpoint-type pair whose multiplicity differs between the
/// graphs, if any. When this is `Some` no matching exists.
pub fn type_mismatch(gs: &LabelledGraph, gt: &LabelledGraph) -> Option<(EdgeType, usize, usize)> {
    let mut counts: BTreeMap<EdgeType, (usize, usize)> = BTreeMap::new();
    for e in 0..gs.edges.len() {
        let [a, b] = gs.edges[e].ends;
        counts.entry(unordered((type_s(gs, a), type_s(gs, b)))).or_default().0 += 1;
    }
    for f in 0..gt.edges.len() {
        let [a, b] = gt.edges[f].ends;
        counts.entry(unordered((type_t(gt, a), type_t(gt, b)))).or_default().1 += 1;
    }
    counts.into_iter().find(|(_, (x, y))| x != y).map(|(k, (x, y))| (k, x, y))
}

/// Calls `f` on every edge matching compatible with point types, in
/// lexicographic order of `(edge, crossed)` per `G_S` edge.
pub fn for_each_matching<F>(gs: &LabelledGraph, gt: &LabelledGraph, mut f: F) -> ControlFlow<()>
where
    F: FnMut(&[EdgeMatch]) -> ControlFlow<()>,
{
    if gs.edges.len() != gt.edges.len() || type_mismatch(gs, gt).is_some() {
        return ControlFlow::Continue(());
    }
    let candidates: Vec<Vec<EdgeMatch>> = (0..gs.edges.len())
        .map(|e| {
            let [a, b] = gs.edges[e].ends;
            let (ka, kb) = (type_s(gs, a), type_s(gs, b));
            let mut c = Vec::new();
            for fe in 0..gt.edges.len() {
                let [x, y] = gt.edges[fe].ends;
                let (kx, ky) = (type_t(gt, x), type_t(gt, y));
                if (ka, kb) == (kx, ky) {
                    c.push(EdgeMatch {
                        edge: fe,
                        crossed: false,
                    });
                }
                if (ka, kb) == (ky, kx) {
                    c.push(EdgeMatch {
                        edge: fe,
                        crossed: true,
                    });
                }
            }
            c
        })
        .collect();
    let mut used = vec![false; gt.edges.len()];
    let mut current = Vec::with_capacity(gs.edges.len());
    recurse(&candidates, &mut used, &mut current, &mut f)
}

fn recurse<F>(
    candidates: &[Vec<EdgeMatch>],
    used: &mut [bool],
    current: &mut Vec<EdgeMatch>,
    f: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[EdgeMatch]) -> ControlFlow<()>,
{
    let i = current.len();
    if i == candidates.len() {
        return f(current);
    }
    for &m in &candidates[i] {
        if used[m.edge] {
            continue;
        }
        used[m.edge] = true;
        current.push(m);
        let r = recurse(candidates, used, current, f);
        current.pop();
        used[m.edge] = false;
        r?;
    }
    ControlFlow::Continue(())
}

/// All phase vectors for a graph with `vertices` vertices and `t` labels.
pub fn all_phases(vertices: usize, t: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..vertices {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..t).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Every pair with the given weight vectors: all phase choices, all
/// type-respecting edge matchings, no symmetry reduction.
///
/// All-zero weight vectors yield no pairs; mismatched edge totals are an
/// error.
pub fn assemble_pairs(
    template: &Arc<TorusTemplate>,
    ws: &WeightVector,
    wt: &WeightVector,
) -> Result<Vec<GraphPair>, AssembleError> {
    if ws.x.iter().all(|&x| x == 0) && wt.x.iter().all(|&x| x == 0) {
        return Ok(Vec::new());
    }
    let s_vertices = template.vertices;
    let expected = 5 * wt.t * s_vertices as u32 / 2;
    let (se, te) = (edge_total(template, ws), edge_total(template, wt));
    if se != te || se != expected {
        return Err(AssembleError::Incompatible {
            s_edges: se,
            t_edges: te,
            expected,
        });
    }
    let mut out = Vec::new();
    for ps in all_phases(template.vertices, ws.t) {
        let gs = Arc::new(LabelledGraph::build(template.clone(), Side::S, ws.clone(), ps)?);
        for pt in all_phases(template.vertices, wt.t) {
            let gt = Arc::new(LabelledGraph::build(template.clone(), Side::T, wt.clone(), pt)?);
            check_ranges(&gs, &gt)?;
            let _ = for_each_matching(&gs, &gt, |m| {
                out.push(GraphPair::new(gs.clone(), gt.clone(), m.to_vec()).expect("typed matching"));
                ControlFlow::Continue(())
            });
        }
    }
    Ok(out)
}

/// Number of edges of a graph with weight vector `w` on `template`.
pub fn edge_total(template: &TorusTemplate, w: &WeightVector) -> u32 {
    template
        .classes
        .iter()
        .map(|c| w.x.get(c.weight_index - 1).copied().unwrap_or(0))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::load_template;

    fn fig2() -> Arc<TorusTemplate> {
        Arc::new(load_template(include_str!("../../../data/figure2.template")).unwrap())
    }

    fn wv(t: u32, x: [u32; 5]) -> WeightVector {
        WeightVector::new(t, x.to_vec())
    }

    #[test]
    fn zero_weights_give_nothing() {
        let z = wv(2, [0; 5]);
        assert!(assemble_pairs(&fig2(), &z, &z).unwrap().is_empty());
    }

    #[test]
    fn mismatched_totals_flagged() {
        let r = assemble_pairs(&fig2(), &wv(2, [2, 2, 2, 2, 0]), &wv(2, [3, 2, 2, 0, 1]));
        assert!(matches!(r, Err(AssembleError::Incompatible { .. })));
    }

    #[test]
    fn pairs_satisfy_duality() {
        let pairs = assemble_pairs(&fig2(), &wv(2, [2, 2, 2, 2, 0]), &wv(2, [3, 2, 2, 0, 0])).unwrap();
        assert!(!pairs.is_empty());
        for p in &pairs {
            let pts = p.points();
            assert_eq!(pts.len(), 20);
            for q in &pts {
                assert_eq!(p.gs.slot(q.s).label as usize - 1, q.t.vertex);
                assert_eq!(p.gt.slot(q.t).label as usize - 1, q.s.vertex);
                assert_eq!(p.across(Side::T, q.t), q.s);
            }
            for u in 0..2 {
                for v in 0..2 {
                    assert_eq!(p.shared_points(u, v).len(), 5);
                }
            }
        }
    }

    #[test]
    fn classification_of_valid_pair() {
        let pairs = assemble_pairs(&fig2(), &wv(2, [2, 2, 2, 2, 0]), &wv(2, [3, 2, 2, 0, 0])).unwrap();
        let p = pairs
            .iter()
            .find(|p| p.gs.parity_violation().is_none())
            .expect("a parity-valid pair");
        for c in classify_edges(p) {
            assert_ne!(c.positive_in_s, c.positive_in_t);
            if c.t_edge.starts_with('L') {
                assert!(c.positive_in_t);
            }
        }
    }
}
