//! Labelled fat-vertex graphs built from a template, a weight vector and
//! per-vertex label phases.
//!
//! Vertex `k` (0-based) is named `k+1` in witnesses. Around an odd vertex
//! labels increase ccw, around an even vertex they decrease: vertices of
//! opposite parity carry opposite orientations, so their label sequences run
//! in opposite directions. The phase of a vertex is the offset of the label
//! at its first slot.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fatgraph::FatGraph;
use crate::rules::RuleId;
use crate::template::{End, TorusTemplate};
use crate::weights::{Side, WeightVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("weight vector has {got} entries, template needs {want}")]
    WeightLength { got: usize, want: usize },
    #[error("{0} violates the valence identity 2 x1 + x2 + ... + x5 = 5 t")]
    Valence(String),
    #[error("need one phase per vertex ({want}), got {got}")]
    PhaseCount { got: usize, want: usize },
    #[error("all weights are zero")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlotRef {
    pub vertex: usize,
    pub pos: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    pub edge: usize,
    pub end: End,
    pub label: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub class: usize,
    /// Transverse position inside the class band.
    pub index: usize,
    /// Slot of the `A` end and of the `B` end.
    pub ends: [SlotRef; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    /// Edges in transverse order; consecutive edges bound a bigon.
    pub edges: Vec<usize>,
    pub positive: bool,
}

/// A disk face bounded by two edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bigon {
    pub edges: [usize; 2],
    /// Each corner is a ccw-consecutive slot pair `(pos, pos + 1)` at a vertex.
    pub corners: [SlotRef; 2],
}

#[derive(Clone, Debug)]
pub struct LabelledGraph {
    pub template: Arc<TorusTemplate>,
    pub side: Side,
    pub weights: WeightVector,
    pub phases: Vec<u32>,
    pub slots: Vec<Vec<Slot>>,
    pub edges: Vec<Edge>,
    pub families: Vec<Family>,
    pub family_of: Vec<usize>,
    pub bigons: Vec<Bigon>,
    pub fat: FatGraph,
    offsets: Vec<usize>,
}

impl LabelledGraph {
    pub fn build(
        template: Arc<TorusTemplate>,
        side: Side,
        weights: WeightVector,
        phases: Vec<u32>,
    ) -> Result<Self, GraphError> {
        let want = template.weight_len();
        if weights.x.len() != want {
            return Err(GraphError::WeightLength {
                got: weights.x.len(),
                want,
            });
        }
        if !weights.satisfies_valence() {
            return Err(GraphError::Valence(weights.to_string()));
        }
        if phases.len() != template.vertices {
            return Err(GraphError::PhaseCount {
                got: phases.len(),
                want: template.vertices,
            });
        }
        let mult: Vec<usize> = template
            .classes
            .iter()
            .map(|c| weights.x[c.weight_index - 1] as usize)
            .collect();
        if mult.iter().all(|&m| m == 0) {
            return Err(GraphError::Empty);
        }
        let t = weights.t;

        let mut first_edge = Vec::with_capacity(mult.len());
        let mut edges = Vec::new();
        for (c, &m) in mult.iter().enumerate() {
            first_edge.push(edges.len());
            for index in 0..m {
                edges.push(Edge {
                    class: c,
                    index,
                    ends: [SlotRef { vertex: 0, pos: 0 }; 2],
                });
            }
        }

        let mut slots = Vec::with_capacity(template.vertices);
        for (v, word) in template.corner_words.iter().enumerate() {
            let mut vs = Vec::new();
            for corner in word {
                let m = mult[corner.class];
                let order: Vec<usize> = match corner.end {
                    End::A => (0..m).collect(),
                    End::B => (0..m).rev().collect(),
                };
                for i in order {
                    let e = first_edge[corner.class] + i;
                    let pos = vs.len();
                    edges[e].ends[usize::from(corner.end == End::B)] = SlotRef { vertex: v, pos };
                    vs.push(Slot {
                        edge: e,
                        end: corner.end,
                        label: label_at(v, pos, phases[v], t),
                    });
                }
            }
            slots.push(vs);
        }

        let mut offsets = Vec::with_capacity(slots.len());
        let mut total = 0;
        for vs in &slots {
            offsets.push(total);
            total += vs.len();
        }
        let rotations: Vec<Vec<usize>> = slots
            .iter()
            .enumerate()
            .map(|(v, vs)| (0..vs.len()).map(|p| offsets[v] + p).collect())
            .collect();
        let dart = |r: SlotRef| offsets[r.vertex] + r.pos;
        let pairs: Vec<(usize, usize)> = edges
            .iter()
            .map(|e| (dart(e.ends[0]), dart(e.ends[1])))
            .collect();
        let fat = FatGraph::from_rotations(&rotations, &pairs);

        let mut g = LabelledGraph {
            template,
            side,
            weights,
            phases,
            slots,
            edges,
            families: Vec::new(),
            family_of: Vec::new(),
            bigons: Vec::new(),
            fat,
            offsets,
        };
        g.bigons = g.find_bigons();
        g.build_families();
        Ok(g)
    }

    pub fn t(&self) -> u32 {
        self.weights.t
    }

    pub fn vertex_count(&self) -> usize {
        self.slots.len()
    }

    pub fn slot(&self, r: SlotRef) -> &Slot {
        &self.slots[r.vertex][r.pos]
    }

    pub fn dart(&self, r: SlotRef) -> usize {
        self.offsets[r.vertex] + r.pos
    }

    pub fn slot_of_dart(&self, d: usize) -> SlotRef {
        let vertex = self.fat.vertex[d];
        SlotRef {
            vertex,
            pos: d - self.offsets[vertex],
        }
    }

    /// Next slot ccw around the same vertex.
    pub fn next_ccw(&self, r: SlotRef) -> SlotRef {
        SlotRef {
            vertex: r.vertex,
            pos: (r.pos + 1) % self.slots[r.vertex].len(),
        }
    }

    pub fn edge_name(&self, e: usize) -> String {
        let edge = &self.edges[e];
        format!("{}.{}", self.template.classes[edge.class].id, edge.index)
    }

    pub fn edge_by_name(&self, name: &str) -> Option<usize> {
        (0..self.edges.len()).find(|&e| self.edge_name(e) == name)
    }

    pub fn end_slot(&self, e: usize, end: End) -> SlotRef {
        self.edges[e].ends[usize::from(end == End::B)]
    }

    /// Labels at the `A` and `B` ends.
    pub fn edge_labels(&self, e: usize) -> [u32; 2] {
        let [a, b] = self.edges[e].ends;
        [self.slot(a).label, self.slot(b).label]
    }

    /// Positive iff the endpoints are vertices of the same parity.
    pub fn is_positive(&self, e: usize) -> bool {
        let [a, b] = self.edges[e].ends;
        a.vertex % 2 == b.vertex % 2
    }

    pub fn is_loop(&self, e: usize) -> bool {
        let [a, b] = self.edges[e].ends;
        a.vertex == b.vertex
    }

    /// Sign this edge must have in the partner graph, read from its labels.
    pub fn partner_positive(&self, e: usize) -> bool {
        let [a, b] = self.edge_labels(e);
        a % 2 == b % 2
    }

    /// Homology displacement of the edge traversed from the given end.
    pub fn tag_from(&self, e: usize, from: End) -> [i64; 2] {
        let tag = self.template.classes[self.edges[e].class].tag;
        match from {
            End::A => tag,
            End::B => [-tag[0], -tag[1]],
        }
    }

    /// Single-graph form of the parity rule: every edge's sign here must
    /// differ from the sign its labels force in the partner graph. Returns
    /// the first offending edge.
    pub fn parity_violation(&self) -> Option<usize> {
        (0..self.edges.len()).find(|&e| self.is_positive(e) == self.partner_positive(e))
    }

    /// Label sequence around a vertex is `(1..t)` repeated five times, up to
    /// rotation and direction.
    pub fn label_word_ok(&self, v: usize) -> bool {
        let t = self.t();
        let labels: Vec<u32> = self.slots[v].iter().map(|s| s.label).collect();
        if labels.len() as u32 != 5 * t {
            return false;
        }
        let step = |a: u32, b: u32| (b + t - a) % t;
        let first = step(labels[0], labels[1 % labels.len()]);
        if t > 2 && first != 1 && first != t - 1 {
            return false;
        }
        (0..labels.len()).all(|i| step(labels[i], labels[(i + 1) % labels.len()]) == first % t)
            && (1..=t).all(|l| labels.iter().filter(|&&x| x == l).count() == 5)
    }

    /// Side of the face at a corner: with label pair `{i, i+1}` the side is
    /// `i mod 2`. At an odd vertex `i` is the first label of the ccw corner,
    /// at an even vertex the second.
    pub fn corner_side(&self, c: SlotRef) -> u8 {
        let l1 = self.slot(c).label;
        let l2 = self.slot(self.next_ccw(c)).label;
        let i = if c.vertex % 2 == 0 { l1 } else { l2 };
        (i % 2) as u8
    }

    /// Label pair `(i, i+1)` of a corner, oriented as in [`corner_side`].
    pub fn corner_pair(&self, c: SlotRef) -> (u32, u32) {
        let l1 = self.slot(c).label;
        let l2 = self.slot(self.next_ccw(c)).label;
        if c.vertex % 2 == 0 {
            (l1, l2)
        } else {
            (l2, l1)
        }
    }

    fn find_bigons(&self) -> Vec<Bigon> {
        let mut out = Vec::new();
        for walk in self.fat.faces() {
            if walk.len() != 2 {
                continue;
            }
            let (d1, d2) = (walk[0], walk[1]);
            let s1 = self.slot_of_dart(d1);
            let s2 = self.slot_of_dart(d2);
            let (e1, e2) = (self.slot(s1).edge, self.slot(s2).edge);
            if e1 == e2 {
                continue;
            }
            let t1 = self.tag_from(e1, self.slot(s1).end);
            let t2 = self.tag_from(e2, self.slot(s2).end);
            if t1[0] + t2[0] != 0 || t1[1] + t2[1] != 0 {
                continue;
            }
            let c1 = self.slot_of_dart(self.fat.mate[d1]);
            let c2 = self.slot_of_dart(self.fat.mate[d2]);
            let (a, b) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            out.push(Bigon {
                edges: [a, b],
                corners: [c1, c2],
            });
        }
        out.sort_by_key(|b| b.edges);
        out
    }

    fn build_families(&mut self) {
        let n = self.edges.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for b in &self.bigons {
            adj[b.edges[0]].push(b.edges[1]);
            adj[b.edges[1]].push(b.edges[0]);
        }
        let mut family_of = vec![usize::MAX; n];
        let mut families = Vec::new();
        for start in 0..n {
            if family_of[start] != usize::MAX {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut stack = vec![start];
            while let Some(e) = stack.pop() {
                if comp.insert(e) {
                    stack.extend(adj[e].iter().copied());
                }
            }
            // Walk the chain of bigons from an end (or from the smallest edge
            // if the chain closes up).
            let first = comp
                .iter()
                .copied()
                .find(|&e| adj[e].len() <= 1)
                .unwrap_or(start);
            let mut order = vec![first];
            let mut prev = usize::MAX;
            let mut cur = first;
            while order.len() < comp.len() {
                let next = adj[cur].iter().copied().find(|&x| x != prev && !order.contains(&x));
                match next {
                    Some(x) => {
                        order.push(x);
                        prev = cur;
                        cur = x;
                    }
                    None => break,
                }
            }
            // Anything not on the walk (branching chains) is appended in id order.
            for &e in &comp {
                if !order.contains(&e) {
                    order.push(e);
                }
            }
            let id = families.len();
            for &e in &order {
                family_of[e] = id;
            }
            let positive = self.is_positive(first);
            families.push(Family {
                edges: order,
                positive,
            });
        }
        self.families = families;
        self.family_of = family_of;
    }

    pub fn bigon_between(&self, e1: usize, e2: usize) -> Option<&Bigon> {
        let key = if e1 < e2 { [e1, e2] } else { [e2, e1] };
        self.bigons.iter().find(|b| b.edges == key)
    }
}

fn label_at(v: usize, pos: usize, phase: u32, t: u32) -> u32 {
    let p = (pos as u32) % t;
    if v % 2 == 0 {
        1 + (phase + p) % t
    } else {
        1 + (phase + t - p) % t
    }
}

/// An S-cycle: a disk bigon of positive edges whose labels are the same
/// consecutive pair `{i, i+1}` at both edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SCycle {
    pub graph: Side,
    pub edges: [usize; 2],
    /// `(i, i+1)` ordered by the corner direction convention.
    pub label_pair: (u32, u32),
    pub face_side: u8,
    pub corners: [SlotRef; 2],
    /// Both corners give the same side.
    pub consistent: bool,
}

impl SCycle {
    pub fn labels(&self) -> [u32; 2] {
        [self.label_pair.0, self.label_pair.1]
    }

    pub fn disjoint_labels(&self, other: &SCycle) -> bool {
        let a = self.labels();
        other.labels().iter().all(|l| !a.contains(l))
    }
}

pub fn find_scycles(g: &LabelledGraph) -> Vec<SCycle> {
    let t = g.t();
    let consecutive = |a: u32, b: u32| a != b && ((a % t) + 1 == b || (b % t) + 1 == a);
    let mut out = Vec::new();
    for b in &g.bigons {
        let [e1, e2] = b.edges;
        if !g.is_positive(e1) || !g.is_positive(e2) {
            continue;
        }
        let l1 = g.edge_labels(e1);
        let l2 = g.edge_labels(e2);
        if !consecutive(l1[0], l1[1]) {
            continue;
        }
        let mut s1 = l1;
        let mut s2 = l2;
        s1.sort_unstable();
        s2.sort_unstable();
        if s1 != s2 {
            continue;
        }
        let sides = [g.corner_side(b.corners[0]), g.corner_side(b.corners[1])];
        out.push(SCycle {
            graph: g.side,
            edges: b.edges,
            label_pair: g.corner_pair(b.corners[0]),
            face_side: sides[0],
            corners: b.corners,
            consistent: sides[0] == sides[1],
        });
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermutationError {
    #[error("class {class} edges do not all shift labels by the same amount")]
    NotAShift { class: String },
    #[error("class {class} shifts labels by odd k = {k}, violating {}", RuleId::L2_5_2)]
    OddShift { class: String, k: u32 },
    #[error("class {class} is not a family of negative edges between the two vertices")]
    NotNegative { class: String },
    #[error("class {class} has {weight} edges, need s or s - 2")]
    Weight { class: String, weight: u32 },
}

/// Label shift `sigma(j) = j + k (mod s)` of a negative family of `G_T`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociatedPermutation {
    pub s: u32,
    pub shift: u32,
    pub orbits: Vec<Vec<u32>>,
}

impl AssociatedPermutation {
    pub fn from_shift(s: u32, shift: u32) -> Self {
        let mut seen = vec![false; s as usize + 1];
        let mut orbits = Vec::new();
        for start in 1..=s {
            if seen[start as usize] {
                continue;
            }
            let mut orbit = Vec::new();
            let mut j = start;
            while !seen[j as usize] {
                seen[j as usize] = true;
                orbit.push(j);
                j = 1 + (j - 1 + shift) % s;
            }
            orbits.push(orbit);
        }
        AssociatedPermutation { s, shift, orbits }
    }

    pub fn apply(&self, j: u32) -> u32 {
        1 + (j - 1 + self.shift) % self.s
    }

    pub fn is_identity(&self) -> bool {
        self.shift == 0
    }

    pub fn is_involution(&self) -> bool {
        (2 * self.shift) % self.s == 0
    }

    pub fn orbit_of(&self, j: u32) -> &[u32] {
        self.orbits.iter().find(|o| o.contains(&j)).expect("j in 1..=s")
    }
}

/// Associated permutation of the non-loop class `class` of a `G_T` graph:
/// the label at the vertex-1 end maps to the label at the vertex-2 end.
pub fn associated_permutation(
    g: &LabelledGraph,
    class: usize,
) -> Result<AssociatedPermutation, PermutationError> {
    let c = &g.template.classes[class];
    let name = c.id.clone();
    let s = g.t();
    let members: Vec<usize> = (0..g.edges.len()).filter(|&e| g.edges[e].class == class).collect();
    let weight = members.len() as u32;
    if weight != s && weight + 2 != s {
        return Err(PermutationError::Weight { class: name, weight });
    }
    let mut shift = None;
    for &e in &members {
        if g.is_positive(e) {
            return Err(PermutationError::NotNegative { class: name });
        }
        let [la, lb] = g.edge_labels(e);
        let [a, _] = g.edges[e].ends;
        let (at1, at2) = if a.vertex == 0 { (la, lb) } else { (lb, la) };
        let k = (at2 + s - at1) % s;
        match shift {
            None => shift = Some(k),
            Some(prev) if prev != k => return Err(PermutationError::NotAShift { class: name }),
            _ => {}
        }
    }
    let k = shift.unwrap_or(0);
    if k % 2 == 1 {
        return Err(PermutationError::OddShift { class: name, k });
    }
    Ok(AssociatedPermutation::from_shift(s, k))
}
