//! Weight vectors `G(x1, ..., x5)` of reduced graphs.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rules::RuleId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    S,
    T,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::S => Side::T,
            Side::T => Side::S,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::S => "S",
            Side::T => "T",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error("s = {0} is not an even number >= 2")]
    OddOrZero(u32),
    #[error("the two-vertex template describes G_S only when s = 2, got s = {0}")]
    SideSNeedsTwo(u32),
}

/// `x[0]` is the loop weight at each vertex, `x[1..]` the non-loop weights.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeightVector {
    /// Vertex count of the partner graph (the number of labels).
    pub t: u32,
    pub x: Vec<u32>,
}

impl WeightVector {
    pub fn new(t: u32, x: Vec<u32>) -> Self {
        WeightVector { t, x }
    }

    pub fn loops(&self) -> u32 {
        self.x[0]
    }

    /// Endpoints at each vertex, `2 x1 + x2 + ... + x5`.
    pub fn valence(&self) -> u32 {
        2 * self.x[0] + self.x[1..].iter().sum::<u32>()
    }

    pub fn satisfies_valence(&self) -> bool {
        self.valence() == 5 * self.t
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let xs: Vec<String> = self.x.iter().map(u32::to_string).collect();
        write!(f, "G({})", xs.join(","))
    }
}

/// Family-size caps used to bound the weight enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightBounds {
    pub loop_max: u32,
    pub other_max: u32,
}

impl WeightBounds {
    /// Caps implied by the enabled family-bound rules; a disabled rule falls
    /// back to the valence limit.
    pub fn for_side(s: u32, side: Side, enabled: &dyn Fn(RuleId) -> bool) -> WeightBounds {
        let valence = match side {
            Side::S => 10,
            Side::T => 5 * s,
        };
        match side {
            Side::S => WeightBounds {
                loop_max: if enabled(RuleId::L2_6_1) { 3 } else { valence / 2 },
                other_max: if enabled(RuleId::L2_6_2) { 2 } else { valence },
            },
            Side::T => WeightBounds {
                loop_max: if s >= 4 && enabled(RuleId::L2_7_2) {
                    s / 2 + 1
                } else {
                    valence / 2
                },
                other_max: if enabled(RuleId::L2_7_3) { s } else { valence },
            },
        }
    }
}

fn check_s(s: u32, side: Side) -> Result<(), WeightError> {
    if s < 2 || s % 2 == 1 {
        return Err(WeightError::OddOrZero(s));
    }
    if side == Side::S && s != 2 {
        return Err(WeightError::SideSNeedsTwo(s));
    }
    Ok(())
}

/// All weight vectors of the given side satisfying the valence identity and
/// every family bound, in lexicographic order.
pub fn enumerate_weight_vectors(s: u32, side: Side) -> Result<Vec<WeightVector>, WeightError> {
    enumerate_weight_vectors_with(s, side, WeightBounds::for_side(s, side, &|_| true))
}

pub fn enumerate_weight_vectors_with(
    s: u32,
    side: Side,
    bounds: WeightBounds,
) -> Result<Vec<WeightVector>, WeightError> {
    check_s(s, side)?;
    let t = match side {
        Side::S => 2,
        Side::T => s,
    };
    let total = 5 * t;
    let mut out = Vec::new();
    for x1 in 0..=bounds.loop_max.min(total / 2) {
        let rest = total - 2 * x1;
        let m = bounds.other_max;
        for x2 in 0..=m.min(rest) {
            for x3 in 0..=m.min(rest - x2) {
                for x4 in 0..=m.min(rest - x2 - x3) {
                    let x5 = rest - x2 - x3 - x4;
                    if x5 <= m {
                        out.push(WeightVector::new(t, vec![x1, x2, x3, x4, x5]));
                    }
                }
            }
        }
    }
    Ok(out)
}
