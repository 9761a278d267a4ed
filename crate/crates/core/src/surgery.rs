//! Surgery descriptions and Rolfsen twists.
//!
//! A description is a list of unknotted components with filling
//! coefficients, their linking matrix, and slopes tracked on the component
//! `K0` (the knot whose exterior is being described). One filling is the free
//! parameter `p/q`; it is stored as a unimodular map applied to `p/q`, so a
//! twist acts on it by composition.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::slope::{apply_framing, normalize, FramingMap, Slope, SlopeError};

#[derive(Debug, Error)]
pub enum SurgeryError {
    #[error("malformed surgery file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed coefficient {0:?}")]
    Coefficient(String),
    #[error(transparent)]
    Slope(#[from] SlopeError),
    #[error("linking matrix: {0}")]
    Linking(String),
    #[error("unknown component {0:?}")]
    UnknownComponent(String),
    #[error("illegal move: {0} is not unknotted")]
    IllegalMove(String),
    #[error("the filling parameter p/q must not be 0/1")]
    ExcludedParameter,
}

/// A filling coefficient: a fixed slope or `M(p/q)`.
#[derive(Clone, Debug)]
pub enum Coefficient {
    Fixed(Slope),
    Param(FramingMap),
}

impl Coefficient {
    pub fn transform(&self, m: &FramingMap) -> Coefficient {
        match self {
            Coefficient::Fixed(s) => Coefficient::Fixed(apply_framing(m, s)),
            Coefficient::Param(x) => Coefficient::Param(m.compose(x)),
        }
    }

    pub fn evaluate(&self, p: &BigInt, q: &BigInt) -> Result<Slope, SlopeError> {
        match self {
            Coefficient::Fixed(s) => Ok(s.clone()),
            Coefficient::Param(m) => {
                let (a, b) = m.apply_raw(p, q);
                normalize(a, b)
            }
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Coefficient::Fixed(s) if s.is_infinity())
    }

    /// Numerator of `M(p/q)` as the coefficients of `p` and `q`.
    pub fn numerator(&self) -> Option<(BigInt, BigInt)> {
        match self {
            Coefficient::Param(m) => Some((m.a.clone(), m.b.clone())),
            Coefficient::Fixed(_) => None,
        }
    }

    pub fn denominator(&self) -> Option<(BigInt, BigInt)> {
        match self {
            Coefficient::Param(m) => Some((m.c.clone(), m.d.clone())),
            Coefficient::Fixed(_) => None,
        }
    }
}

/// Parametric coefficients are equal as maps up to an overall sign.
impl PartialEq for Coefficient {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Coefficient::Fixed(a), Coefficient::Fixed(b)) => a == b,
            (Coefficient::Param(m), Coefficient::Param(n)) => {
                let neg = FramingMap {
                    a: -&n.a,
                    b: -&n.b,
                    c: -&n.c,
                    d: -&n.d,
                };
                m == n || *m == neg
            }
            _ => false,
        }
    }
}

impl Eq for Coefficient {}

fn linear(a: &BigInt, b: &BigInt) -> String {
    let mut out = String::new();
    for (k, v) in [(a, "p"), (b, "q")] {
        if k.is_zero() {
            continue;
        }
        let neg = *k < BigInt::zero();
        let mag = if neg { -k } else { k.clone() };
        if neg {
            out.push('-');
        } else if !out.is_empty() {
            out.push('+');
        }
        if !mag.is_one() {
            out.push_str(&mag.to_string());
        }
        out.push_str(v);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn is_single_term(a: &BigInt, b: &BigInt) -> bool {
    a.is_zero() || b.is_zero()
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Fixed(s) => write!(f, "{s}"),
            Coefficient::Param(m) => {
                // Keep the denominator's leading coefficient positive.
                let flip = m.c < BigInt::zero() || (m.c.is_zero() && m.d < BigInt::zero());
                let (a, b, c, d) = if flip {
                    (-&m.a, -&m.b, -&m.c, -&m.d)
                } else {
                    (m.a.clone(), m.b.clone(), m.c.clone(), m.d.clone())
                };
                let wrap = |x: &BigInt, y: &BigInt| {
                    let s = linear(x, y);
                    if is_single_term(x, y) {
                        s
                    } else {
                        format!("({s})")
                    }
                };
                write!(f, "{}/{}", wrap(&a, &b), wrap(&c, &d))
            }
        }
    }
}

/// Parse `a p + b q` (no constant term).
fn parse_linear(s: &str) -> Option<(BigInt, BigInt)> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let s = s.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(&s);
    if s.is_empty() {
        return None;
    }
    let (mut a, mut b) = (BigInt::zero(), BigInt::zero());
    let mut rest = s;
    while !rest.is_empty() {
        let (sign, body) = match rest.as_bytes()[0] {
            b'+' => (1, &rest[1..]),
            b'-' => (-1, &rest[1..]),
            _ => (1, rest),
        };
        let end = body.find(['+', '-']).unwrap_or(body.len());
        let term = &body[..end];
        rest = &body[end..];
        let (digits, var) = term.split_at(term.len().checked_sub(1)?);
        let k: BigInt = if digits.is_empty() { BigInt::one() } else { digits.parse().ok()? };
        let k = k * sign;
        match var {
            "p" => a += k,
            "q" => b += k,
            _ => return None,
        }
    }
    Some((a, b))
}

impl FromStr for Coefficient {
    type Err = SurgeryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SurgeryError::Coefficient(s.to_string());
        if !s.contains(['p', 'q']) {
            return Ok(Coefficient::Fixed(s.trim().parse().map_err(|_| bad())?));
        }
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        // A leading minus in front of a parenthesised fraction negates it.
        let (neg, t) = match t.strip_prefix("-(") {
            Some(r) if r.contains(")/") => (true, format!("({r}")),
            _ => (false, t),
        };
        let (num, den) = t.split_once('/').ok_or_else(bad)?;
        let (mut a, mut b) = parse_linear(num).ok_or_else(bad)?;
        let (c, d) = parse_linear(den).ok_or_else(bad)?;
        if neg {
            a = -a;
            b = -b;
        }
        Ok(Coefficient::Param(FramingMap::new(a, b, c, d).map_err(|_| bad())?))
    }
}

impl Serialize for Coefficient {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Coefficient {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        String::deserialize(de)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    /// `None` for the knot itself, which carries the tracked slopes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<Coefficient>,
    #[serde(default = "yes")]
    pub unknotted: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurgeryDescription {
    #[serde(default)]
    pub name: String,
    pub components: Vec<Component>,
    pub linking: Vec<Vec<i64>>,
    /// Slopes on the unfilled component (`alpha`, `beta`, `mu`).
    #[serde(default)]
    pub tracked: BTreeMap<String, Slope>,
}

impl SurgeryDescription {
    pub fn parse(text: &str) -> Result<SurgeryDescription, SurgeryError> {
        let d: SurgeryDescription = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), SurgeryError> {
        let n = self.components.len();
        if self.linking.len() != n || self.linking.iter().any(|r| r.len() != n) {
            return Err(SurgeryError::Linking(format!("expected a {n}x{n} matrix")));
        }
        for i in 0..n {
            if self.linking[i][i] != 0 {
                return Err(SurgeryError::Linking(format!("nonzero diagonal at {}", self.components[i].id)));
            }
            for j in 0..i {
                if self.linking[i][j] != self.linking[j][i] {
                    return Err(SurgeryError::Linking(format!(
                        "not symmetric at ({}, {})",
                        self.components[i].id, self.components[j].id
                    )));
                }
            }
        }
        if self.components.iter().filter(|c| c.coefficient.is_none()).count() != 1 {
            return Err(SurgeryError::Linking("exactly one component must be unfilled".into()));
        }
        Ok(())
    }

    pub fn index(&self, id: &str) -> Result<usize, SurgeryError> {
        self.components
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| SurgeryError::UnknownComponent(id.to_string()))
    }

    pub fn knot(&self) -> usize {
        self.components.iter().position(|c| c.coefficient.is_none()).expect("validated")
    }

    pub fn coefficient(&self, id: &str) -> Result<Option<&Coefficient>, SurgeryError> {
        Ok(self.components[self.index(id)?].coefficient.as_ref())
    }

    pub fn lk(&self, a: &str, b: &str) -> Result<i64, SurgeryError> {
        Ok(self.linking[self.index(a)?][self.index(b)?])
    }

    /// Components still filled with a finite coefficient, plus the knot.
    pub fn active(&self) -> Vec<usize> {
        (0..self.components.len())
            .filter(|&i| !self.components[i].coefficient.as_ref().is_some_and(Coefficient::is_infinity))
            .collect()
    }

    /// Substitute a concrete value for `p/q`.
    pub fn instantiate(&self, p: i64, q: i64) -> Result<SurgeryDescription, SurgeryError> {
        let (p, q) = (BigInt::from(p), BigInt::from(q));
        if p.is_zero() {
            return Err(SurgeryError::ExcludedParameter);
        }
        let mut d = self.clone();
        for c in &mut d.components {
            if let Some(k) = &c.coefficient {
                c.coefficient = Some(Coefficient::Fixed(k.evaluate(&p, &q)?));
            }
        }
        Ok(d)
    }
}

/// Ordered `(component, turns)` twists.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistScript(pub Vec<(String, i64)>);

impl TwistScript {
    /// The script undoing this one.
    pub fn inverse(&self) -> TwistScript {
        TwistScript(self.0.iter().rev().map(|(c, t)| (c.clone(), -t)).collect())
    }
}

/// One `t`-twist along the unknotted component `c`.
pub fn twist(d: &SurgeryDescription, c: &str, t: i64) -> Result<SurgeryDescription, SurgeryError> {
    let ci = d.index(c)?;
    if !d.components[ci].unknotted {
        return Err(SurgeryError::IllegalMove(c.to_string()));
    }
    let mut out = d.clone();
    let n = d.components.len();
    for x in 0..n {
        let m = if x == ci {
            FramingMap::self_twist(t)
        } else {
            let l = d.linking[x][ci];
            FramingMap::translation(t * l * l)
        };
        match &d.components[x].coefficient {
            Some(k) => out.components[x].coefficient = Some(k.transform(&m)),
            None => {
                for s in out.tracked.values_mut() {
                    *s = apply_framing(&m, s);
                }
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            if x != y && x != ci && y != ci {
                out.linking[x][y] = d.linking[x][y] + t * d.linking[x][ci] * d.linking[y][ci];
            }
        }
    }
    Ok(out)
}

pub fn run_twist_script(d: &SurgeryDescription, s: &TwistScript) -> Result<SurgeryDescription, SurgeryError> {
    let mut cur = d.clone();
    for (c, t) in &s.0 {
        cur = twist(&cur, c, *t)?;
    }
    Ok(cur)
}

/// Expected state after part of a script.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expectation {
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub tracked: BTreeMap<String, Slope>,
    #[serde(default)]
    pub coefficients: BTreeMap<String, Coefficient>,
    /// Unoriented linking numbers keyed `"A,B"`.
    #[serde(default)]
    pub linking: BTreeMap<String, i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Step {
    Twist { twist: String, turns: i64 },
    Expect { expect: Expectation },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptFile {
    #[serde(default)]
    pub name: String,
    pub steps: Vec<Step>,
}

impl ScriptFile {
    pub fn parse(text: &str) -> Result<ScriptFile, SurgeryError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn script(&self) -> TwistScript {
        TwistScript(
            self.steps
                .iter()
                .filter_map(|s| match s {
                    Step::Twist { twist, turns } => Some((twist.clone(), *turns)),
                    Step::Expect { .. } => None,
                })
                .collect(),
        )
    }
}

/// Outcome of comparing one expected quantity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointResult {
    pub name: String,
    pub expected: String,
    pub found: String,
    pub ok: bool,
}

pub fn compare(d: &SurgeryDescription, e: &Expectation) -> Vec<CheckpointResult> {
    let tag = |what: String| {
        if e.label.is_empty() {
            what
        } else {
            format!("{}: {what}", e.label)
        }
    };
    let mut out = Vec::new();
    for (k, v) in &e.tracked {
        let found = d.tracked.get(k);
        out.push(CheckpointResult {
            name: tag(k.clone()),
            expected: v.to_string(),
            found: found.map_or("-".into(), Slope::to_string),
            ok: found == Some(v),
        });
    }
    for (k, v) in &e.coefficients {
        let found = d.coefficient(k).ok().flatten();
        out.push(CheckpointResult {
            name: tag(format!("coefficient {k}")),
            expected: v.to_string(),
            found: found.map_or("-".into(), Coefficient::to_string),
            ok: found == Some(v),
        });
    }
    for (k, v) in &e.linking {
        let found = k.split_once(',').and_then(|(a, b)| d.lk(a.trim(), b.trim()).ok());
        out.push(CheckpointResult {
            name: tag(format!("lk({k})")),
            expected: v.abs().to_string(),
            found: found.map_or("-".into(), |x| x.abs().to_string()),
            ok: found.map(i64::abs) == Some(v.abs()),
        });
    }
    out
}

/// Run a script file, comparing every expectation on the way.
pub fn run_script_file(
    d: &SurgeryDescription,
    f: &ScriptFile,
) -> Result<(SurgeryDescription, Vec<CheckpointResult>), SurgeryError> {
    let mut cur = d.clone();
    let mut checks = Vec::new();
    for s in &f.steps {
        match s {
            Step::Twist { twist: c, turns } => cur = twist(&cur, c, *turns)?,
            Step::Expect { expect } => checks.extend(compare(&cur, expect)),
        }
    }
    Ok((cur, checks))
}

/// Whether `a` and `b` agree on their active components up to reorienting
/// components (which negates rows and columns of the linking matrix).
pub fn same_active_description(a: &SurgeryDescription, b: &SurgeryDescription) -> bool {
    let ia = a.active();
    let ib = b.active();
    if ia.len() != ib.len() || a.tracked != b.tracked {
        return false;
    }
    let ids_a: Vec<&str> = ia.iter().map(|&i| a.components[i].id.as_str()).collect();
    let ids_b: Vec<&str> = ib.iter().map(|&i| b.components[i].id.as_str()).collect();
    if ids_a != ids_b {
        return false;
    }
    if ia.iter().zip(&ib).any(|(&x, &y)| a.components[x].coefficient != b.components[y].coefficient) {
        return false;
    }
    let k = ia.len();
    (0..1u32 << k).any(|signs| {
        let sg = |i: usize| if (signs >> i) & 1 == 1 { -1 } else { 1 };
        (0..k).all(|i| (0..k).all(|j| sg(i) * sg(j) * a.linking[ia[i]][ia[j]] == b.linking[ib[i]][ib[j]]))
    })
}
