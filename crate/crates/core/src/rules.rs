//! Stable rule identifiers used in verdicts and traces.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    L2_4,
    L2_5_1,
    L2_5_2,
    L2_5_3,
    L2_6_1,
    L2_6_2,
    L2_7_1,
    L2_7_2,
    L2_7_3,
    L2_7_4,
    L2_8,
    ScConn,
    Ntl,
    Dual,
}

pub struct RuleInfo {
    pub id: RuleId,
    pub name: &'static str,
    pub statement: &'static str,
    pub modeling_note: Option<&'static str>,
}

pub const REGISTRY: &[RuleInfo] = &[
    RuleInfo {
        id: RuleId::L2_4,
        name: "jumping number two",
        statement: "For every vertex pair (u_i, v_j) the five shared points, read in u_i's \
                    cyclic order, appear around v_j in the order 1,3,5,2,4 up to rotation and \
                    direction: points adjacent on one circle are never adjacent on the other.",
        modeling_note: None,
    },
    RuleInfo {
        id: RuleId::L2_5_1,
        name: "no double parallel",
        statement: "No two edges are parallel in both G_S and G_T.",
        modeling_note: Some("Parallelism is membership in the same family, i.e. the two \
                             edges are joined by a chain of disk bigon faces."),
    },
    RuleInfo {
        id: RuleId::L2_5_2,
        name: "parity rule",
        statement: "An edge is positive in exactly one of G_S and G_T.",
        modeling_note: None,
    },
    RuleInfo {
        id: RuleId::L2_5_3,
        name: "S-cycle edges are essential in the other graph",
        statement: "The two edges of an S-cycle form a cycle in the other graph whose \
                    homology class is nontrivial.",
        modeling_note: Some("Essentiality is the sum of template homology tags."),
    },
    RuleInfo {
        id: RuleId::L2_6_1,
        name: "G_S positive family bound",
        statement: "A family of parallel positive edges of G_S has at most 3 edges.",
        modeling_note: None,
    },
    RuleInfo {
        id: RuleId::L2_6_2,
        name: "G_S negative family bound",
        statement: "A family of parallel negative edges of G_S has at most 2 edges.",
        modeling_note: None,
    },
    RuleInfo {
        id: RuleId::L2_7_1,
        name: "no disjoint S-cycles when s = 4",
        statement: "If s = 4, G_T has no two S-cycles with disjoint label pairs.",
        modeling_note: None,
    },
    RuleInfo {
        id: RuleId::L2_7_2,
        name: "G_T positive family bound",
        statement: "For s >= 4 a family of parallel positive edges of G_T has at most s/2+1 \
                    edges, and when it has exactly s/2+1 the two edges at one end form an \
                    S-cycle.",
        modeling_note: None,
    },
    RuleInfo {
        id: RuleId::L2_7_3,
        name: "G_T negative family bound",
        statement: "A family of parallel negative edges of G_T has at most s edges.",
        modeling_note: None,
    },
    RuleInfo {
        id: RuleId::L2_7_4,
        name: "disjoint S-cycles share a side",
        statement: "Faces of two S-cycles of G_T with disjoint label pairs lie on the same \
                    side of the other torus.",
        modeling_note: Some("Side of a face with label pair {i, i+1} is i mod 2. With two \
                             labels the pair is ordered by the corner direction: at an odd \
                             vertex i is the first label of the ccw corner, at an even \
                             vertex the second."),
    },
    RuleInfo {
        id: RuleId::L2_8,
        name: "essential orbit cycles",
        statement: "The cycles formed in G_S by a full negative family of G_T, one per orbit \
                    of its associated permutation, are essential.",
        modeling_note: Some("Used at decision-tree nodes whose contradiction is an \
                             annulus-support case split taken as given."),
    },
    RuleInfo {
        id: RuleId::ScConn,
        name: "S-cycle corner connection",
        statement: "Corners of S-cycle faces on the same side are disjoint arcs across one \
                    1-handle, so their endpoints on the two partner vertices must appear in \
                    the same cyclic order (ccw on one vertex, cw on the other).",
        modeling_note: Some("Checked whenever a side carries at least two S-cycle faces."),
    },
    RuleInfo {
        id: RuleId::Ntl,
        name: "no trivial loops",
        statement: "A reduced graph on an essential torus has no loop bounding a disk.",
        modeling_note: Some("Used at a decision-tree node whose conclusion is taken as given."),
    },
    RuleInfo {
        id: RuleId::Dual,
        name: "edge correspondence",
        statement: "Every edge of G_S is an edge of G_T: a G_S endpoint at u_i with label j \
                    is a G_T endpoint at v_j with label i.",
        modeling_note: Some("Structural: a configuration with no compatible correspondence \
                             produces no pairs."),
    },
];

impl RuleId {
    pub const ALL: [RuleId; 14] = [
        RuleId::L2_4,
        RuleId::L2_5_1,
        RuleId::L2_5_2,
        RuleId::L2_5_3,
        RuleId::L2_6_1,
        RuleId::L2_6_2,
        RuleId::L2_7_1,
        RuleId::L2_7_2,
        RuleId::L2_7_3,
        RuleId::L2_7_4,
        RuleId::L2_8,
        RuleId::ScConn,
        RuleId::Ntl,
        RuleId::Dual,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::L2_4 => "L2.4",
            RuleId::L2_5_1 => "L2.5.1",
            RuleId::L2_5_2 => "L2.5.2",
            RuleId::L2_5_3 => "L2.5.3",
            RuleId::L2_6_1 => "L2.6.1",
            RuleId::L2_6_2 => "L2.6.2",
            RuleId::L2_7_1 => "L2.7.1",
            RuleId::L2_7_2 => "L2.7.2",
            RuleId::L2_7_3 => "L2.7.3",
            RuleId::L2_7_4 => "L2.7.4",
            RuleId::L2_8 => "L2.8",
            RuleId::ScConn => "SC-CONN",
            RuleId::Ntl => "NTL",
            RuleId::Dual => "DUAL",
        }
    }

    pub fn info(self) -> &'static RuleInfo {
        REGISTRY.iter().find(|r| r.id == self).expect("every rule is registered")
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .iter()
            .copied()
            .find(|r| r.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown rule id {s:?}"))
    }
}

impl Serialize for RuleId {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RuleId {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        String::deserialize(de)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Markdown table of every rule: id, name, statement, modeling note.
pub fn registry_table() -> String {
    let mut out = String::from("| rule | name | statement | modeling note |\n|---|---|---|---|\n");
    for r in REGISTRY {
        out.push_str(&format!(
            "| {} | {} | {} | {} |\n",
            r.id,
            r.name,
            r.statement,
            r.modeling_note.unwrap_or("")
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for r in RuleId::ALL {
            assert_eq!(r.as_str().parse::<RuleId>().unwrap(), r);
            assert_eq!(r.info().id, r);
        }
        assert_eq!(REGISTRY.len(), RuleId::ALL.len());
        assert!("L9.9".parse::<RuleId>().is_err());
    }
}
