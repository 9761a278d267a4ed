//! Canonical encodings of graph pairs under the symmetry group.
//!
//! A pair is reduced to its intersection points with four structure maps:
//! ccw successor in `G_S`, ccw successor in `G_T`, and the mate along the
//! shared edge, plus the vertex of each point in both graphs. Labels are
//! implied (the `G_S` label of a point is its `G_T` vertex and vice versa),
//! so this abstract pair determines the labelled pair up to renaming.
//!
//! The encoding of a rooted abstract pair lists the points in breadth-first
//! order from the root. The canonical form minimises over roots and over
//! the symmetry group; the labelled form minimises over roots only.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::pair::GraphPair;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbstractPair {
    pub s_vertices: u32,
    pub t_vertices: u32,
    pub u: Vec<u32>,
    pub v: Vec<u32>,
    pub next_s: Vec<usize>,
    pub next_t: Vec<usize>,
    pub mate: Vec<usize>,
}

impl AbstractPair {
    pub fn from_pair(p: &GraphPair) -> AbstractPair {
        let pts = p.points();
        let s_index = |r: crate::graph::SlotRef| {
            pts.iter().position(|q| q.s == r).expect("every slot is a point")
        };
        let t_index = |r: crate::graph::SlotRef| {
            pts.iter().position(|q| q.t == r).expect("every slot is a point")
        };
        let mut mate = vec![0; pts.len()];
        for (i, q) in pts.iter().enumerate() {
            let e = q.s_edge;
            let other = pts
                .iter()
                .position(|r| r.s_edge == e && r.s != q.s)
                .expect("edges have two ends");
            mate[i] = other;
        }
        AbstractPair {
            s_vertices: p.gs.vertex_count() as u32,
            t_vertices: p.gt.vertex_count() as u32,
            u: pts.iter().map(|q| q.s.vertex as u32).collect(),
            v: pts.iter().map(|q| q.t.vertex as u32).collect(),
            next_s: pts.iter().map(|q| s_index(p.gs.next_ccw(q.s))).collect(),
            next_t: pts.iter().map(|q| t_index(p.gt.next_ccw(q.t))).collect(),
            mate,
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    fn encode_from(&self, start: usize) -> Option<Vec<[u32; 5]>> {
        let n = self.len();
        let mut pos = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        pos[start] = 0;
        order.push(start);
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            i += 1;
            for y in [self.next_s[x], self.next_t[x], self.mate[x]] {
                if pos[y] == usize::MAX {
                    pos[y] = order.len();
                    order.push(y);
                }
            }
        }
        if order.len() < n {
            return None;
        }
        Some(
            order
                .iter()
                .map(|&x| {
                    [
                        self.u[x],
                        self.v[x],
                        pos[self.next_s[x]] as u32,
                        pos[self.next_t[x]] as u32,
                        pos[self.mate[x]] as u32,
                    ]
                })
                .collect(),
        )
    }

    fn min_encoding(&self) -> Vec<[u32; 5]> {
        (0..self.len())
            .filter_map(|s| self.encode_from(s))
            .min()
            .unwrap_or_default()
    }
}

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut r = vec![0; perm.len()];
    for (i, &j) in perm.iter().enumerate() {
        r[j] = i;
    }
    r
}

/// Vertex relabelling `i -> sign * i + shift (mod n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relabel {
    pub reflect: bool,
    pub shift: u32,
}

impl Relabel {
    pub fn apply(self, i: u32, n: u32) -> u32 {
        let base = if self.reflect { (n - i) % n } else { i };
        (base + self.shift) % n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymmetryElement {
    pub relabel_s: Relabel,
    pub relabel_t: Relabel,
    pub reverse_s: bool,
    pub reverse_t: bool,
    /// Swap the roles of `G_S` and `G_T` (applied last).
    pub exchange: bool,
}

impl SymmetryElement {
    pub const IDENTITY: SymmetryElement = SymmetryElement {
        relabel_s: Relabel {
            reflect: false,
            shift: 0,
        },
        relabel_t: Relabel {
            reflect: false,
            shift: 0,
        },
        reverse_s: false,
        reverse_t: false,
        exchange: false,
    };

    pub fn apply(&self, a: &AbstractPair) -> AbstractPair {
        let u = a.u.iter().map(|&x| self.relabel_s.apply(x, a.s_vertices)).collect();
        let v = a.v.iter().map(|&x| self.relabel_t.apply(x, a.t_vertices)).collect();
        let next_s = if self.reverse_s { inverse(&a.next_s) } else { a.next_s.clone() };
        let next_t = if self.reverse_t { inverse(&a.next_t) } else { a.next_t.clone() };
        let b = AbstractPair {
            s_vertices: a.s_vertices,
            t_vertices: a.t_vertices,
            u,
            v,
            next_s,
            next_t,
            mate: a.mate.clone(),
        };
        if self.exchange {
            AbstractPair {
                s_vertices: b.t_vertices,
                t_vertices: b.s_vertices,
                u: b.v,
                v: b.u,
                next_s: b.next_t,
                next_t: b.next_s,
                mate: b.mate,
            }
        } else {
            b
        }
    }
}

fn relabels(n: u32) -> Vec<Relabel> {
    // With n <= 2 reflections coincide with shifts; keep one of each action.
    let mut out: Vec<Relabel> = Vec::new();
    for reflect in [false, true] {
        for shift in 0..n {
            let r = Relabel { reflect, shift };
            let acts = |x: &Relabel| (0..n).map(|i| x.apply(i, n)).collect::<Vec<_>>();
            if !out.iter().any(|o| acts(o) == acts(&r)) {
                out.push(r);
            }
        }
    }
    out
}

/// The symmetry group acting on pairs with the given vertex counts:
/// cyclic/dihedral vertex relabellings on both sides, independent
/// orientation reversals, and the exchange when the graphs have the same
/// number of vertices.
pub fn symmetry_group(s_vertices: u32, t_vertices: u32) -> Vec<SymmetryElement> {
    let mut out = Vec::new();
    let exchanges: &[bool] = if s_vertices == t_vertices { &[false, true] } else { &[false] };
    for &exchange in exchanges {
        for relabel_s in relabels(s_vertices) {
            for relabel_t in relabels(t_vertices) {
                for reverse_s in [false, true] {
                    for reverse_t in [false, true] {
                        out.push(SymmetryElement {
                            relabel_s,
                            relabel_t,
                            reverse_s,
                            reverse_t,
                            exchange,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Encoding of a pair: one `[u, v, next_s, next_t, mate]` row per point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    pub s_vertices: u32,
    pub t_vertices: u32,
    pub rows: Vec<[u32; 5]>,
}

impl CanonicalForm {
    /// Short stable identifier: the first 16 hex digits of the SHA-256 of
    /// the text form.
    pub fn id(&self) -> String {
        let digest = Sha256::digest(self.to_string().as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn decode(&self) -> AbstractPair {
        let col = |k: usize| self.rows.iter().map(|r| r[k]).collect::<Vec<u32>>();
        let idx = |k: usize| self.rows.iter().map(|r| r[k] as usize).collect::<Vec<usize>>();
        AbstractPair {
            s_vertices: self.s_vertices,
            t_vertices: self.t_vertices,
            u: col(0),
            v: col(1),
            next_s: idx(2),
            next_t: idx(3),
            mate: idx(4),
        }
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}:", self.s_vertices, self.t_vertices)?;
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| format!("{}.{}.{}.{}.{}", r[0], r[1], r[2], r[3], r[4]))
            .collect();
        f.write_str(&rows.join(","))
    }
}

impl FromStr for CanonicalForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("malformed pair encoding {s:?}");
        let (head, body) = s.split_once(':').ok_or_else(bad)?;
        let (a, b) = head.split_once('x').ok_or_else(bad)?;
        let s_vertices = a.parse().map_err(|_| bad())?;
        let t_vertices = b.parse().map_err(|_| bad())?;
        let mut rows = Vec::new();
        for chunk in body.split(',').filter(|c| !c.is_empty()) {
            let nums: Vec<u32> = chunk
                .split('.')
                .map(|x| x.parse().map_err(|_| bad()))
                .collect::<Result<_, _>>()?;
            let row: [u32; 5] = nums.try_into().map_err(|_| bad())?;
            rows.push(row);
        }
        let n = rows.len() as u32;
        if rows.iter().any(|r| r[0] >= s_vertices || r[1] >= t_vertices || r[2..].iter().any(|&x| x >= n)) {
            return Err(bad());
        }
        Ok(CanonicalForm {
            s_vertices,
            t_vertices,
            rows,
        })
    }
}

impl Serialize for CanonicalForm {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CanonicalForm {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        String::deserialize(de)?.parse().map_err(serde::de::Error::custom)
    }
}

fn form_of(a: &AbstractPair, rows: Vec<[u32; 5]>) -> CanonicalForm {
    CanonicalForm {
        s_vertices: a.s_vertices,
        t_vertices: a.t_vertices,
        rows,
    }
}

/// Encoding minimised over roots only (no symmetry).
pub fn labelled_form_abstract(a: &AbstractPair) -> CanonicalForm {
    form_of(a, a.min_encoding())
}

/// Encoding minimised over roots and the full symmetry group.
pub fn canonical_form_abstract(a: &AbstractPair) -> CanonicalForm {
    let group = symmetry_group(a.s_vertices, a.t_vertices);
    let best = group
        .iter()
        .map(|g| g.apply(a))
        .map(|b| {
            let rows = b.min_encoding();
            form_of(&b, rows)
        })
        .min()
        .expect("group is non-empty");
    best
}

pub fn canonical_form(p: &GraphPair) -> CanonicalForm {
    canonical_form_abstract(&AbstractPair::from_pair(p))
}

pub fn labelled_form(p: &GraphPair) -> CanonicalForm {
    labelled_form_abstract(&AbstractPair::from_pair(p))
}

/// Labelled forms of every image of `a` under the symmetry group.
pub fn orbit_labelled_forms(a: &AbstractPair) -> BTreeSet<CanonicalForm> {
    symmetry_group(a.s_vertices, a.t_vertices)
        .iter()
        .map(|g| labelled_form_abstract(&g.apply(a)))
        .collect()
}
