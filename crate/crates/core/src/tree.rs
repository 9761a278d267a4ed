//! Elimination of `s >= 4` by a decision tree over `G_T` configurations.
//!
//! A configuration is an even `s >= 4`, a `G_T` weight vector within the
//! family bounds, and the label phases at `v1`, `v2`. Each configuration is
//! routed from the root through nodes whose preconditions partition their
//! parent; every terminal node names the rule that eliminates its
//! configurations and runs a machine check of the combinatorial facts the
//! elimination rests on. Where the elimination also needs an annulus-support
//! case split that is not re-derived here, the node records it as an axiom.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filters::{check_family_bounds, check_parity_graph, jump_pattern_ok, Witness};
use crate::graph::{find_scycles, LabelledGraph, SCycle};
use crate::pair::all_phases;
use crate::rules::RuleId;
use crate::template::TorusTemplate;
use crate::trace::{ConfigKey, EliminationTrace, Outcome, RecordVerdict, TraceRecord};
use crate::weights::{enumerate_weight_vectors, Side, WeightError, WeightVector};

/// Class ids in weight order `x2..x5`; `E2/E3` and `E4/E5` share a strip
/// between the two loop bundles.
const CLASSES: [&str; 4] = ["E2", "E3", "E4", "E5"];

fn strip_partner(i: usize) -> usize {
    i ^ 1
}

#[derive(Clone, Debug)]
pub struct HighSConfig {
    pub s: u32,
    pub w: WeightVector,
    pub phases: [u32; 2],
}

impl HighSConfig {
    pub fn id(&self) -> String {
        format!("s{}/T{}/phi{},{}", self.s, self.w, self.phases[0], self.phases[1])
    }
}

/// Derived data shared by node preconditions and checks.
pub struct Facts {
    pub cfg: HighSConfig,
    pub g: LabelledGraph,
    pub parity_ok: bool,
    /// Label shift of each non-loop class, if it is a shift.
    pub shifts: [Option<u32>; 4],
    pub scycles: Vec<SCycle>,
    pub rider_ok: bool,
}

impl Facts {
    pub fn new(template: &Arc<TorusTemplate>, cfg: HighSConfig) -> Facts {
        let g = LabelledGraph::build(template.clone(), Side::T, cfg.w.clone(), cfg.phases.to_vec())
            .expect("enumerated weights satisfy the valence identity");
        let parity_ok = check_parity_graph(&g).passed;
        let mut shifts = [None; 4];
        for (i, id) in CLASSES.iter().enumerate() {
            if let Some(c) = template.class_index(id) {
                shifts[i] = class_shift(&g, c);
            }
        }
        let scycles = find_scycles(&g);
        let bounds = check_family_bounds(&g);
        let rider_ok = bounds.passed || bounds.rule != RuleId::L2_7_2;
        Facts {
            cfg,
            g,
            parity_ok,
            shifts,
            scycles,
            rider_ok,
        }
    }

    pub fn s(&self) -> u32 {
        self.cfg.s
    }

    pub fn q1(&self) -> u32 {
        self.cfg.w.x[0]
    }

    fn q(&self, i: usize) -> u32 {
        self.cfg.w.x[i + 1]
    }

    /// Index of the class with weight `s - 2`, when the weights are a
    /// permutation of `(s, s, s, s - 2)`.
    pub fn deficient(&self) -> Option<usize> {
        let s = self.s();
        let short: Vec<usize> = (0..4).filter(|&i| self.q(i) != s).collect();
        match short.as_slice() {
            [d] if self.q(*d) + 2 == s => Some(*d),
            _ => None,
        }
    }

    /// Common shift of the classes carrying the associated permutation: all
    /// four when `q1 = s/2`, all but the strip partner of the deficient class
    /// when `q1 = s/2 + 1`.
    pub fn sigma(&self) -> Option<u32> {
        let skip = self.deficient().map(strip_partner);
        let ks: Vec<Option<u32>> = (0..4).filter(|&i| Some(i) != skip).map(|i| self.shifts[i]).collect();
        let first = ks[0]?;
        ks.iter().all(|&k| k == Some(first)).then_some(first)
    }

    /// Shift of the strip partner of the deficient class.
    pub fn tau(&self) -> Option<u32> {
        self.shifts[strip_partner(self.deficient()?)]
    }
}

/// Label shift `label(v2) - label(v1)` shared by every edge of a class.
fn class_shift(g: &LabelledGraph, class: usize) -> Option<u32> {
    let s = g.t();
    let mut k = None;
    for e in (0..g.edges.len()).filter(|&e| g.edges[e].class == class) {
        let [a, b] = g.edge_labels(e);
        let d = (b + s - a) % s;
        match k {
            None => k = Some(d),
            Some(x) if x != d => return None,
            _ => {}
        }
    }
    k
}

type Pred = fn(&Facts) -> bool;
type Check = fn(&Facts) -> Result<String, String>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conclusion {
    Branch,
    Eliminate(RuleId),
}

#[derive(Clone)]
pub struct TreeNode {
    pub id: &'static str,
    pub parent: Option<&'static str>,
    pub summary: &'static str,
    pub precondition: Pred,
    pub conclusion: Conclusion,
    /// Machine check run on every configuration reaching the node; `Ok`
    /// carries a short description of what was verified.
    pub check: Option<Check>,
    /// Case split taken as given.
    pub axiom: Option<&'static str>,
}

fn q_half(f: &Facts) -> bool {
    f.q1() == f.s() / 2
}

fn q_half_plus(f: &Facts) -> bool {
    f.q1() == f.s() / 2 + 1
}

fn odd_strip(f: &Facts) -> bool {
    (f.q(0) + f.q(1)) % 2 == 1
}

fn two_short(f: &Facts) -> bool {
    q_half_plus(f) && !odd_strip(f) && (0..4).filter(|&i| f.q(i) + 1 == f.s()).count() == 2
}

fn parity_fails(f: &Facts) -> Result<String, String> {
    if f.parity_ok {
        Err("labelled graph satisfies the parity rule".into())
    } else {
        Ok("parity rule fails for this labelling".into())
    }
}

fn shift_facts(f: &Facts) -> Result<String, String> {
    let k = f.sigma().ok_or("classes do not share one label shift")?;
    if k % 2 == 1 {
        return Err(format!("odd shift {k}"));
    }
    Ok(format!("sigma(j) = j + {k}"))
}

fn excess_facts(f: &Facts) -> Result<String, String> {
    let d = f.deficient().ok_or("weights are not a permutation of (s,s,s,s-2)")?;
    let k = f.sigma().ok_or("sigma classes disagree")?;
    let tau = f.tau().ok_or("partner class is not a shift")?;
    let s = f.s();
    let diff = (tau + s - k) % s;
    if diff != 2 && diff != s - 2 {
        return Err(format!("tau - sigma = {diff}, expected +-2"));
    }
    Ok(format!("deficient {}, sigma +{k}, tau +{tau}", CLASSES[d]))
}

/// For shifts of order at least three: the orbit of `i` has length >= 3 and
/// the edges `a`, `b` of two full classes carrying sigma with label `i` at
/// `v1` both join `u_i` to `u_r` with `sigma(r) != i`.
fn non_involution_facts(f: &Facts) -> Result<String, String> {
    let s = f.s();
    let k = f.sigma().ok_or("no common shift")?;
    let orbit = s / s.gcd(&k);
    if orbit < 3 {
        return Err(format!("orbit length {orbit}"));
    }
    let skip = f.deficient().map(strip_partner);
    let full: Vec<usize> = (0..4).filter(|&c| Some(c) != skip && f.q(c) == s).take(2).collect();
    if full.len() < 2 {
        return Err("fewer than two full sigma classes".into());
    }
    let i = 1;
    let r = 1 + (i - 1 + k) % s;
    let sigma_r = 1 + (r - 1 + k) % s;
    if sigma_r == i {
        return Err(format!("sigma({r}) = {i}"));
    }
    for &c in &full {
        let id = CLASSES[c];
        let ci = f.g.template.class_index(id).ok_or("class missing")?;
        let e = (0..f.g.edges.len())
            .find(|&e| f.g.edges[e].class == ci && f.g.edge_labels(e)[0] == i)
            .ok_or(format!("{id} has no edge labelled {i} at v1"))?;
        if f.g.edge_labels(e)[1] != r {
            return Err(format!("{id} edge does not end at label {r}"));
        }
    }
    Ok(format!(
        "orbit length {orbit}; {} and {} edges join u{i}-u{r}; sigma({r}) = {sigma_r}",
        CLASSES[full[0]], CLASSES[full[1]]
    ))
}

/// `G_S^+` (the negative edges of `G_T`) splits into components of two
/// vertices and eight edges.
fn involution_components(f: &Facts) -> Result<String, String> {
    let s = f.s() as usize;
    let mut parent: Vec<usize> = (0..s).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let mut edges = Vec::new();
    for e in 0..f.g.edges.len() {
        if f.g.is_positive(e) {
            continue;
        }
        let [a, b] = f.g.edge_labels(e);
        let (a, b) = (a as usize - 1, b as usize - 1);
        edges.push((a, b));
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let mut comps: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for v in 0..s {
        let r = find(&mut parent, v);
        comps.entry(r).or_default().0 += 1;
    }
    for (a, _) in edges {
        let r = find(&mut parent, a);
        comps.get_mut(&r).expect("root").1 += 1;
    }
    if comps.values().all(|&(v, e)| v == 2 && e == 8) {
        Ok(format!("{} components of 2 vertices and 8 edges", comps.len()))
    } else {
        Err(format!("component sizes {:?}", comps.values().collect::<Vec<_>>()))
    }
}

fn disjoint_scycles(f: &Facts) -> Result<String, String> {
    for (i, a) in f.scycles.iter().enumerate() {
        for b in &f.scycles[i + 1..] {
            if a.disjoint_labels(b) {
                return Ok(format!("S-cycles {:?} and {:?}", a.labels(), b.labels()));
            }
        }
    }
    Err("no two S-cycles with disjoint label pairs".into())
}

fn antipodal_scycles(f: &Facts) -> Result<String, String> {
    let s = f.s();
    let shift = |l: u32| 1 + (l - 1 + s / 2) % s;
    for a in &f.scycles {
        for b in &f.scycles {
            let mut moved = [shift(a.label_pair.0), shift(a.label_pair.1)];
            moved.sort_unstable();
            let mut lb = b.labels();
            lb.sort_unstable();
            if moved == lb {
                return Ok(format!("antipodal S-cycles {:?} and {:?}", a.labels(), b.labels()));
            }
        }
    }
    Err("no antipodal S-cycles".into())
}

fn trivial_loop_facts(f: &Facts) -> Result<String, String> {
    let s = f.s();
    let tau = f.tau().ok_or("no tau")?;
    let orbits = s.gcd(&tau);
    let len = s / orbits;
    if orbits != 2 || len < 3 {
        return Err(format!("tau has {orbits} orbits of length {len}"));
    }
    for j in 1..=s {
        let has_loop = (0..f.g.edges.len())
            .any(|e| !f.g.is_loop(e) && f.g.edge_labels(e) == [j, j]);
        if !has_loop {
            return Err(format!("u{j} has no loop"));
        }
    }
    Ok(format!("tau has 2 orbits of length {len}; every vertex of G_S has a loop"))
}

fn no_local_rotation(f: &Facts) -> Result<String, String> {
    for i in 1..=f.s() {
        let local = local_rotations(&f.g, i);
        if local.loops >= 3 && local.rotations == 0 {
            return Ok(format!(
                "u{i}: {} loops, {} other edges, no rotation meets the jumping order",
                local.loops, local.singles
            ));
        }
    }
    Err("every vertex admits a rotation".into())
}

fn rider_never(f: &Facts) -> Result<String, String> {
    if f.rider_ok {
        Err("rider holds".into())
    } else {
        Ok("maximal loop family without an end S-cycle".into())
    }
}

/// The transcribed tree, parents before children.
pub fn default_tree() -> Vec<TreeNode> {
    use Conclusion::*;
    vec![
        TreeNode {
            id: "root",
            parent: None,
            summary: "valence 2q1 + q2 + ... + q5 = 5s with the family bounds forces q1 = s/2 or s/2 + 1",
            precondition: |f| q_half(f) || q_half_plus(f),
            conclusion: Branch,
            check: None,
            axiom: None,
        },
        TreeNode {
            id: "parity/odd-strip",
            parent: Some("root"),
            summary: "q2 + q3 odd: labels across a strip have the wrong parity",
            precondition: odd_strip,
            conclusion: Eliminate(RuleId::L2_5_2),
            check: Some(parity_fails),
            axiom: None,
        },
        TreeNode {
            id: "parity/two-short",
            parent: Some("root"),
            summary: "G(s/2+1, s, s, s-1, s-1) up to order: the two short classes force opposite parities",
            precondition: two_short,
            conclusion: Eliminate(RuleId::L2_5_2),
            check: Some(parity_fails),
            axiom: None,
        },
        TreeNode {
            id: "parity/labelling",
            parent: Some("root"),
            summary: "remaining weights with a labelling that breaks the parity rule",
            precondition: |f| !odd_strip(f) && !two_short(f) && !f.parity_ok,
            conclusion: Eliminate(RuleId::L2_5_2),
            check: Some(parity_fails),
            axiom: None,
        },
        TreeNode {
            id: "half",
            parent: Some("root"),
            summary: "q1 = s/2, G_T = G(s/2, s, s, s, s); all four classes share sigma",
            precondition: |f| q_half(f) && !odd_strip(f) && f.parity_ok,
            conclusion: Branch,
            check: Some(shift_facts),
            axiom: None,
        },
        TreeNode {
            id: "half/identity",
            parent: Some("half"),
            summary: "sigma = id: at some u_i the loops and the jumping order admit no rotation",
            precondition: |f| f.sigma() == Some(0),
            conclusion: Eliminate(RuleId::L2_4),
            check: Some(no_local_rotation),
            axiom: Some("the loops at u_i are nested (the subgraph has an annulus support)"),
        },
        TreeNode {
            id: "half/non-involution",
            parent: Some("half"),
            summary: "sigma of order >= 3: orbit cycles through u1 are essential and force sigma^2 = id",
            precondition: |f| f.sigma().is_some_and(|k| (2 * k) % f.s() != 0),
            conclusion: Eliminate(RuleId::L2_8),
            check: Some(non_involution_facts),
            axiom: Some("L u b has an annulus support with exactly two placements of b"),
        },
        TreeNode {
            id: "half/involution",
            parent: Some("half"),
            summary: "sigma(i) = i + s/2: components of G_S^+ have 8 edges on 2 vertices, so 4 are parallel",
            precondition: |f| f.sigma().is_some_and(|k| k != 0 && (2 * k) % f.s() == 0),
            conclusion: Eliminate(RuleId::L2_6_1),
            check: Some(involution_components),
            axiom: Some("each component has an annulus support, so its edges fall in at most 2 parallel classes"),
        },
        TreeNode {
            id: "excess",
            parent: Some("root"),
            summary: "q1 = s/2 + 1, G_T = G(s/2+1, s, s, s, s-2) up to order; the partner class shifts by sigma +- 2",
            precondition: |f| q_half_plus(f) && !odd_strip(f) && !two_short(f) && f.parity_ok,
            conclusion: Branch,
            check: Some(excess_facts),
            axiom: None,
        },
        TreeNode {
            id: "excess/rider",
            parent: Some("excess"),
            summary: "a loop family of s/2 + 1 edges without an end S-cycle",
            precondition: |f| !f.rider_ok,
            conclusion: Eliminate(RuleId::L2_7_2),
            check: Some(rider_never),
            axiom: None,
        },
        TreeNode {
            id: "excess/s4-shift",
            parent: Some("excess"),
            summary: "s = 4, sigma != id: S-cycles with disjoint label pairs",
            precondition: |f| f.rider_ok && f.s() == 4 && f.sigma().is_some_and(|k| k != 0),
            conclusion: Eliminate(RuleId::L2_7_1),
            check: Some(disjoint_scycles),
            axiom: None,
        },
        TreeNode {
            id: "excess/antipodal",
            parent: Some("excess"),
            summary: "s > 4, sigma(i) = i + s/2: antipodal S-cycles cannot both be essential",
            precondition: |f| f.rider_ok && f.s() > 4 && f.sigma() == Some(f.s() / 2),
            conclusion: Eliminate(RuleId::L2_5_3),
            check: Some(antipodal_scycles),
            axiom: Some("the edges of the two antipodal S-cycles cannot be placed as essential cycles simultaneously"),
        },
        TreeNode {
            id: "excess/non-involution",
            parent: Some("excess"),
            summary: "s > 4, sigma of order >= 3: forced back to sigma^2 = id",
            precondition: |f| f.rider_ok && f.s() > 4 && f.sigma().is_some_and(|k| (2 * k) % f.s() != 0),
            conclusion: Eliminate(RuleId::L2_8),
            check: Some(non_involution_facts),
            axiom: Some("placements of b and c in the annulus support of L force parallel edges"),
        },
        TreeNode {
            id: "excess/identity-large",
            parent: Some("excess"),
            summary: "s > 4, sigma = id: tau-cycles have >= 3 vertices and every u_j has a loop, so a loop is trivial",
            precondition: |f| f.rider_ok && f.s() > 4 && f.sigma() == Some(0),
            conclusion: Eliminate(RuleId::Ntl),
            check: Some(trivial_loop_facts),
            axiom: Some("two essential tau-cycles through >= 3 vertices each leave no room for an essential loop"),
        },
        TreeNode {
            id: "excess/identity-s4",
            parent: Some("excess"),
            summary: "s = 4, sigma = id: at a vertex with 3 loops no rotation meets the jumping order",
            precondition: |f| f.rider_ok && f.s() == 4 && f.sigma() == Some(0),
            conclusion: Eliminate(RuleId::L2_4),
            check: Some(no_local_rotation),
            axiom: Some("the loops at u_i are nested (the subgraph has an annulus support)"),
        },
    ]
}

/// Local rotations at `u_i`: the points of `G_T` labelled `i`, arranged as a
/// nested bundle of loops with the other edges in the two gaps, keeping the
/// `G_S` labels alternating and matching the jumping order at `v1` and `v2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalRotations {
    pub loops: usize,
    pub singles: usize,
    pub rotations: usize,
}

pub fn local_rotations(g: &LabelledGraph, i: u32) -> LocalRotations {
    // (vertex, edge) in ccw order at v1 and at v2.
    let at = |v: usize| -> Vec<(usize, usize)> {
        g.slots[v]
            .iter()
            .filter(|s| s.label == i)
            .map(|s| (v, s.edge))
            .collect()
    };
    let n1 = at(0);
    let n2 = at(1);
    let e1: Vec<usize> = n1.iter().map(|x| x.1).collect();
    let loops: Vec<usize> = n2.iter().map(|x| x.1).filter(|e| e1.contains(e)).collect();
    let singles: Vec<(usize, usize)> = n1
        .iter()
        .chain(n2.iter())
        .copied()
        .filter(|x| !loops.contains(&x.1))
        .collect();

    let mut count = 0;
    let m = loops.len();
    for perm in permutations(&loops) {
        for tops in 0..(1u32 << m) {
            let top: Vec<(usize, usize)> = perm
                .iter()
                .enumerate()
                .map(|(k, &e)| (((tops >> k) & 1) as usize, e))
                .collect();
            let bottom: Vec<(usize, usize)> = top.iter().rev().map(|&(v, e)| (1 - v, e)).collect();
            for sp in permutations(&singles) {
                for cut in 0..=sp.len() {
                    let mut rot = top.clone();
                    rot.extend_from_slice(&sp[..cut]);
                    rot.extend_from_slice(&bottom);
                    rot.extend_from_slice(&sp[cut..]);
                    let n = rot.len();
                    if (0..n).any(|k| rot[k].0 == rot[(k + 1) % n].0) {
                        continue;
                    }
                    let ok = [(&n1, 0), (&n2, 1)].iter().all(|(order_v, v)| {
                        let at_u: Vec<(usize, usize)> = rot.iter().copied().filter(|x| x.0 == *v).collect();
                        let v_order: Vec<usize> = order_v
                            .iter()
                            .map(|x| at_u.iter().position(|y| y == x).expect("same points"))
                            .collect();
                        jump_pattern_ok(&v_order)
                    });
                    if ok {
                        count += 1;
                    }
                }
            }
        }
    }
    LocalRotations {
        loops: m,
        singles: singles.len(),
        rotations: count,
    }
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x.clone());
            out.push(p);
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("s = {0} is not an even number >= 4")]
    BadS(u32),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error("{} configuration(s) reach no terminal node: {}", .configs.len(), .configs.join("; "))]
    CoverageGap {
        configs: Vec<String>,
        trace: Box<EliminationTrace>,
    },
}

pub fn configurations(s: u32) -> Result<Vec<HighSConfig>, TreeError> {
    if s < 4 || s % 2 == 1 {
        return Err(TreeError::BadS(s));
    }
    let mut out = Vec::new();
    for w in enumerate_weight_vectors(s, Side::T)? {
        for ph in all_phases(2, s) {
            out.push(HighSConfig {
                s,
                w: w.clone(),
                phases: [ph[0], ph[1]],
            });
        }
    }
    Ok(out)
}

/// Where one configuration ended up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Routing {
    Terminal {
        node: &'static str,
        rule: RuleId,
        path: Vec<&'static str>,
        checked: Vec<String>,
    },
    /// No child of a branch node accepts the configuration.
    Gap { at: &'static str },
    /// More than one child accepts it.
    Overlap { at: &'static str, children: Vec<&'static str> },
    /// A machine check failed at a node on the path.
    Unverified { node: &'static str, reason: String },
}

pub fn route(tree: &[TreeNode], facts: &Facts) -> Routing {
    let Some(root) = tree.iter().find(|n| n.parent.is_none()) else {
        return Routing::Gap { at: "root" };
    };
    if !(root.precondition)(facts) {
        return Routing::Gap { at: root.id };
    }
    let mut node = root;
    let mut path = vec![root.id];
    let mut checked = Vec::new();
    loop {
        if let Some(check) = node.check {
            match check(facts) {
                Ok(msg) => checked.push(format!("{}: {msg}", node.id)),
                Err(reason) => return Routing::Unverified { node: node.id, reason },
            }
        }
        match node.conclusion {
            Conclusion::Eliminate(rule) => {
                return Routing::Terminal {
                    node: node.id,
                    rule,
                    path,
                    checked,
                }
            }
            Conclusion::Branch => {
                let kids: Vec<&TreeNode> = tree
                    .iter()
                    .filter(|n| n.parent == Some(node.id) && (n.precondition)(facts))
                    .collect();
                match kids.as_slice() {
                    [] => return Routing::Gap { at: node.id },
                    [one] => {
                        node = one;
                        path.push(one.id);
                    }
                    many => {
                        return Routing::Overlap {
                            at: node.id,
                            children: many.iter().map(|n| n.id).collect(),
                        }
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoverageReport {
    pub configurations: usize,
    pub by_node: BTreeMap<String, usize>,
    pub gaps: Vec<String>,
    pub overlaps: Vec<String>,
    pub unverified: Vec<String>,
}

impl CoverageReport {
    pub fn complete(&self) -> bool {
        self.gaps.is_empty() && self.overlaps.is_empty() && self.unverified.is_empty()
    }
}

pub fn coverage_check(template: &Arc<TorusTemplate>, tree: &[TreeNode], configs: &[HighSConfig]) -> CoverageReport {
    let mut report = CoverageReport {
        configurations: configs.len(),
        ..Default::default()
    };
    for c in configs {
        let f = Facts::new(template, c.clone());
        match route(tree, &f) {
            Routing::Terminal { node, .. } => *report.by_node.entry(node.to_string()).or_default() += 1,
            Routing::Gap { at } => report.gaps.push(format!("{} (at {at})", c.id())),
            Routing::Overlap { at, children } => {
                report.overlaps.push(format!("{} (at {at}: {})", c.id(), children.join(", ")))
            }
            Routing::Unverified { node, reason } => report.unverified.push(format!("{} ({node}: {reason})", c.id())),
        }
    }
    report
}

fn record(facts: &Facts, routing: &Routing) -> TraceRecord {
    let c = &facts.cfg;
    let mut tags = vec![format!("phi={},{}", c.phases[0], c.phases[1]), format!("q1={}", facts.q1())];
    if let Some(k) = facts.sigma() {
        tags.push(format!("k={k}"));
    }
    let (rule, note, edges) = match routing {
        Routing::Terminal {
            node, rule, path, checked, ..
        } => {
            tags.push(format!("node={node}"));
            (Outcome::Eliminated(*rule), checked.join("; "), path.iter().map(|s| s.to_string()).collect())
        }
        Routing::Gap { at } => {
            tags.push(format!("gap={at}"));
            (Outcome::Survivor, format!("no child of {at} applies"), Vec::new())
        }
        Routing::Overlap { at, children } => {
            tags.push(format!("overlap={at}"));
            (Outcome::Survivor, format!("children {} all apply", children.join(", ")), Vec::new())
        }
        Routing::Unverified { node, reason } => {
            tags.push(format!("unverified={node}"));
            (Outcome::Survivor, reason.clone(), Vec::new())
        }
    };
    TraceRecord {
        id: c.id(),
        config: ConfigKey {
            s: c.s,
            ws: Vec::new(),
            wt: c.w.x.clone(),
            case_tags: tags,
        },
        verdict: RecordVerdict {
            witness: match rule {
                Outcome::Eliminated(_) => Some(Witness {
                    graph: Some(Side::T),
                    phases: Some(c.phases.to_vec()),
                    vertices: edges,
                    note,
                    ..Default::default()
                }),
                Outcome::Survivor => Some(Witness {
                    note,
                    ..Default::default()
                }),
            },
            rule,
            survivors: Vec::new(),
        },
        pairs: 0,
    }
}

/// Route every configuration for each `s` through the tree. Configurations
/// that fall into a gap, an overlap or a failed check are recorded as
/// survivors and returned as a coverage-gap error carrying the full trace.
pub fn eliminate_high_s(
    template: &Arc<TorusTemplate>,
    tree: &[TreeNode],
    s_values: &[u32],
    workers: usize,
) -> Result<EliminationTrace, TreeError> {
    use rayon::prelude::*;
    let mut configs = Vec::new();
    for &s in s_values {
        configs.extend(configurations(s)?);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    let records: Vec<TraceRecord> = pool.install(|| {
        configs
            .par_iter()
            .map(|c| {
                let f = Facts::new(template, c.clone());
                let r = route(tree, &f);
                record(&f, &r)
            })
            .collect()
    });
    let gaps = records.iter().filter(|r| r.verdict.rule == Outcome::Survivor).count();
    let mut trace = EliminationTrace {
        kind: "high-s-tree".into(),
        s_values: s_values.to_vec(),
        symmetry: false,
        disabled_rules: Vec::new(),
        records,
        survivors: Vec::new(),
        summary: Default::default(),
    };
    trace.summarize();
    trace.summary.survivors = gaps;
    trace.summary.coverage_gaps = Some(gaps);
    if gaps > 0 {
        let configs = trace
            .records
            .iter()
            .filter(|r| r.verdict.rule == Outcome::Survivor)
            .map(|r| r.id.clone())
            .collect();
        return Err(TreeError::CoverageGap {
            configs,
            trace: Box::new(trace),
        });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::load_template;

    fn fig2() -> Arc<TorusTemplate> {
        Arc::new(load_template(include_str!("../../../data/figure2.template")).unwrap())
    }

    #[test]
    fn permutations_count() {
        assert_eq!(permutations(&[1, 2, 3, 4]).len(), 24);
        assert_eq!(permutations::<u8>(&[]).len(), 1);
    }

    #[test]
    fn odd_s_is_rejected() {
        assert!(matches!(configurations(5), Err(TreeError::BadS(5))));
        assert!(matches!(configurations(2), Err(TreeError::BadS(2))));
    }

    #[test]
    fn s4_full_coverage() {
        let t = fig2();
        let r = coverage_check(&t, &default_tree(), &configurations(4).unwrap());
        assert!(r.complete(), "{r:?}");
    }

    #[test]
    fn removing_the_involution_node_leaves_a_gap() {
        let t = fig2();
        let tree: Vec<TreeNode> = default_tree().into_iter().filter(|n| n.id != "half/involution").collect();
        let r = coverage_check(&t, &tree, &configurations(4).unwrap());
        assert_eq!(r.gaps.len(), 4);
        assert!(r.gaps.iter().all(|g| g.contains("TG(2,4,4,4,4)") && g.ends_with("(at half)")));
        match eliminate_high_s(&t, &tree, &[4], 1) {
            Err(TreeError::CoverageGap { configs, trace }) => {
                assert_eq!(configs.len(), 4);
                assert_eq!(trace.summary.coverage_gaps, Some(4));
            }
            other => panic!("{:?}", other.map(|t| t.summary)),
        }
    }

    #[test]
    fn rider_node_never_fires() {
        let t = fig2();
        for s in [4, 6, 8] {
            let r = coverage_check(&t, &default_tree(), &configurations(s).unwrap());
            assert!(!r.by_node.contains_key("excess/rider"));
        }
    }
}
