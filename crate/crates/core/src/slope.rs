//! Exact slope arithmetic.
//!
//! A slope is an unoriented isotopy class of curves on a torus, written as a
//! reduced fraction `p/q` with `q >= 0`; `1/0` is the meridian-like infinity
//! slope. All arithmetic is done over arbitrary-precision integers.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SlopeError {
    #[error("malformed slope: 0/0")]
    Malformed,
    #[error("cannot parse slope from {0:?}")]
    Parse(String),
    #[error("framing map ({a},{b};{c},{d}) has determinant {det}, expected +1 or -1")]
    Determinant {
        a: BigInt,
        b: BigInt,
        c: BigInt,
        d: BigInt,
        det: BigInt,
    },
    #[error("chain collapse hits a zero denominator at position {0}")]
    CollapseDegenerate(usize),
    #[error("chain collapse needs at least one coefficient")]
    EmptyChain,
}

/// Reduced rational slope `num/den`, `den >= 0`, with `1/0` for infinity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slope {
    num: BigInt,
    den: BigInt,
}

impl Slope {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, SlopeError> {
        normalize(num, den)
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        Slope {
            num: n.into(),
            den: BigInt::one(),
        }
    }

    pub fn infinity() -> Self {
        Slope {
            num: BigInt::one(),
            den: BigInt::zero(),
        }
    }

    pub fn num(&self) -> &BigInt {
        &self.num
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn is_infinity(&self) -> bool {
        self.den.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_half_integral(&self) -> bool {
        self.den == BigInt::from(2)
    }

    pub fn distance(&self, other: &Slope) -> BigUint {
        distance(self, other)
    }

    /// Sum of two finite slopes viewed as rationals. Infinity absorbs.
    pub fn add(&self, other: &Slope) -> Slope {
        if self.is_infinity() || other.is_infinity() {
            return Slope::infinity();
        }
        normalize(
            &self.num * &other.den + &other.num * &self.den,
            &self.den * &other.den,
        )
        .expect("denominators of finite slopes are positive")
    }

    pub fn neg(&self) -> Slope {
        if self.is_infinity() {
            return self.clone();
        }
        Slope {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    /// `1/self`, with `1/0 <-> 0/1`.
    pub fn recip(&self) -> Slope {
        normalize(self.den.clone(), self.num.clone()).expect("slope is never 0/0")
    }
}

/// Reduce `num/den` to lowest terms with a non-negative denominator.
pub fn normalize(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Slope, SlopeError> {
    let mut num = num.into();
    let mut den = den.into();
    if num.is_zero() && den.is_zero() {
        return Err(SlopeError::Malformed);
    }
    if den.is_zero() {
        return Ok(Slope::infinity());
    }
    let g = num.gcd(&den);
    num /= &g;
    den /= &g;
    if den.is_negative() {
        num = -num;
        den = -den;
    }
    Ok(Slope { num, den })
}

/// Geometric intersection number `|p1 q2 - p2 q1|`.
pub fn distance(a: &Slope, b: &Slope) -> BigUint {
    let d = &a.num * &b.den - &b.num * &a.den;
    d.magnitude().clone()
}

/// Integer matrix `(a,b;c,d)` with determinant ±1 acting on slopes by
/// `p/q -> (a p + b q)/(c p + d q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FramingMap {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl FramingMap {
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self, SlopeError> {
        let m = FramingMap {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        };
        let det = m.det();
        if det.abs().is_one() {
            Ok(m)
        } else {
            Err(SlopeError::Determinant {
                a: m.a,
                b: m.b,
                c: m.c,
                d: m.d,
                det,
            })
        }
    }

    pub fn identity() -> Self {
        FramingMap::new(1, 0, 0, 1).unwrap()
    }

    /// `p/q -> p/(q + t p)`.
    pub fn self_twist(t: impl Into<BigInt>) -> Self {
        FramingMap::new(1, 0, t, 1).unwrap()
    }

    /// `x -> x + k`.
    pub fn translation(k: impl Into<BigInt>) -> Self {
        FramingMap::new(1, k, 0, 1).unwrap()
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    /// Matrix product `self * other` (apply `other` first).
    pub fn compose(&self, other: &FramingMap) -> FramingMap {
        FramingMap {
            a: &self.a * &other.a + &self.b * &other.c,
            b: &self.a * &other.b + &self.b * &other.d,
            c: &self.c * &other.a + &self.d * &other.c,
            d: &self.c * &other.b + &self.d * &other.d,
        }
    }

    pub fn inverse(&self) -> FramingMap {
        let det = self.det();
        FramingMap {
            a: &self.d * &det,
            b: -&self.b * &det,
            c: -&self.c * &det,
            d: &self.a * &det,
        }
    }

    /// Image of the column vector `(p, q)` before reduction.
    pub fn apply_raw(&self, p: &BigInt, q: &BigInt) -> (BigInt, BigInt) {
        (&self.a * p + &self.b * q, &self.c * p + &self.d * q)
    }

    pub fn apply(&self, s: &Slope) -> Slope {
        apply_framing(self, s)
    }
}

impl fmt::Display for FramingMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{},{})", self.a, self.b, self.c, self.d)
    }
}

pub fn apply_framing(m: &FramingMap, s: &Slope) -> Slope {
    let (p, q) = m.apply_raw(&s.num, &s.den);
    normalize(p, q).expect("a unimodular map sends nonzero vectors to nonzero vectors")
}

/// Slope on an unknotted component after `t` twists along that component.
pub fn self_twist(s: &Slope, t: impl Into<BigInt>) -> Slope {
    apply_framing(&FramingMap::self_twist(t), s)
}

/// Slope on a component linking the twisted one `l` times: `s + t l^2`.
pub fn linked_twist(s: &Slope, t: impl Into<BigInt>, l: impl Into<BigInt>) -> Slope {
    let l = l.into();
    let shift = t.into() * &l * &l;
    apply_framing(&FramingMap::translation(shift), s)
}

/// Continued fraction `a1 - 1/(a2 - 1/(... - 1/an))`.
pub fn chain_collapse(coeffs: &[Slope]) -> Result<Slope, SlopeError> {
    let (last, rest) = coeffs.split_last().ok_or(SlopeError::EmptyChain)?;
    if last.is_infinity() {
        return Err(SlopeError::CollapseDegenerate(coeffs.len() - 1));
    }
    let mut acc = last.clone();
    for (i, a) in rest.iter().enumerate().rev() {
        if acc.num.is_zero() || a.is_infinity() {
            return Err(SlopeError::CollapseDegenerate(i));
        }
        acc = a.add(&acc.recip().neg());
    }
    Ok(acc)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("gcd({a}, {b}) = {g} != 1: a p + b q = ±1 has no solutions")]
    NoSolutionsPossible { a: i64, b: i64, g: i64 },
}

/// All `(p, q)` with `|p|, |q| <= bound` and `a p + b q = ±1`, sorted.
pub fn solve_pm1(a: i64, b: i64, bound: u64) -> Result<Vec<(i64, i64)>, SolveError> {
    let g = a.gcd(&b);
    if g != 1 {
        return Err(SolveError::NoSolutionsPossible { a, b, g });
    }
    let bound = bound as i64;
    let ext = a.extended_gcd(&b);
    // ext.x * a + ext.y * b = 1, so every solution of a p + b q = e is
    // (e x + k b, e y - k a).
    let mut out = Vec::new();
    for e in [1i64, -1] {
        let (p0, q0) = (e * ext.x, e * ext.y);
        if b == 0 || a == 0 {
            // One coordinate is pinned to ±1 and the other is free.
            for k in -bound..=bound {
                let (p, q) = if b == 0 { (p0, k) } else { (k, q0) };
                if p.abs() <= bound && q.abs() <= bound && a * p + b * q == e {
                    out.push((p, q));
                }
            }
            continue;
        }
        let (lo, hi) = k_range(p0, b, bound).intersect(k_range(q0, -a, bound));
        for k in lo..=hi {
            out.push((p0 + k * b, q0 - k * a));
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Copy)]
struct KRange(i64, i64);

impl KRange {
    fn intersect(self, o: KRange) -> (i64, i64) {
        (self.0.max(o.0), self.1.min(o.1))
    }
}

/// Values of `k` with `|x0 + k step| <= bound`, `step != 0`.
fn k_range(x0: i64, step: i64, bound: i64) -> KRange {
    let (lo, hi) = (-bound - x0, bound - x0);
    if step > 0 {
        KRange(Integer::div_ceil(&lo, &step), Integer::div_floor(&hi, &step))
    } else {
        let s = -step;
        KRange(Integer::div_ceil(&-hi, &s), Integer::div_floor(&-lo, &s))
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Slope {
    type Err = SlopeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().replace('\u{2212}', "-");
        let parse = |x: &str| {
            x.trim()
                .parse::<BigInt>()
                .map_err(|_| SlopeError::Parse(s.to_string()))
        };
        match t.split_once('/') {
            Some((n, d)) => normalize(parse(n)?, parse(d)?),
            None => Ok(Slope::integer(parse(&t)?)),
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Slope {
    fn from(n: i64) -> Self {
        Slope::integer(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Slope {
        x.parse().unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(2, 4).unwrap(), s("1/2"));
        assert_eq!(normalize(3, -2).unwrap(), s("-3/2"));
        assert_eq!(normalize(5, 0).unwrap(), Slope::infinity());
        assert_eq!(normalize(-1, 0).unwrap(), Slope::infinity());
        assert_eq!(normalize(0, 0), Err(SlopeError::Malformed));
        assert_eq!(normalize(0, -7).unwrap(), Slope::integer(0));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(&s("-4"), &s("4")), BigUint::from(8u32));
        assert_eq!(distance(&s("1/2"), &s("3")), BigUint::from(5u32));
        assert_eq!(distance(&s("-16"), &s("-37/2")), BigUint::from(5u32));
        assert_eq!(distance(&s("7/3"), &s("7/3")), BigUint::zero());
        assert_eq!(distance(&Slope::infinity(), &s("5/2")), BigUint::from(2u32));
    }

    #[test]
    fn framing_examples() {
        let m = FramingMap::new(1, 1, 0, 1).unwrap();
        assert_eq!(m.apply(&Slope::infinity()), Slope::infinity());
        assert_eq!(m.apply(&s("0")), s("1"));
        assert!(FramingMap::new(2, 0, 0, 1).is_err());
        assert_eq!(FramingMap::identity().apply(&s("-3/5")), s("-3/5"));
    }

    #[test]
    fn twist_examples() {
        assert_eq!(self_twist(&s("-3/5"), 1), s("-3/2"));
        assert_eq!(self_twist(&Slope::infinity(), 1), s("1"));
        assert_eq!(self_twist(&s("4/7"), 0), s("4/7"));
        assert_eq!(linked_twist(&s("-37/2"), 3, 5), s("113/2"));
        assert_eq!(linked_twist(&s("-16"), -2, 5), s("-66"));
        assert_eq!(linked_twist(&s("2/9"), 0, 17), s("2/9"));
    }

    #[test]
    fn chain_examples() {
        assert_eq!(chain_collapse(&[s("-2")]).unwrap(), s("-2"));
        assert_eq!(chain_collapse(&[s("2"), s("2")]).unwrap(), s("3/2"));
        assert_eq!(
            chain_collapse(&[s("-2"), s("3"), s("-2")]).unwrap(),
            s("-16/7")
        );
        assert_eq!(
            chain_collapse(&[s("1"), s("0")]),
            Err(SlopeError::CollapseDegenerate(0))
        );
        assert_eq!(chain_collapse(&[]), Err(SlopeError::EmptyChain));
    }

    #[test]
    fn solve_examples() {
        assert!(solve_pm1(4, 3, 5).unwrap().contains(&(1, -1)));
        assert!(solve_pm1(-3, 4, 5).unwrap().contains(&(1, 1)));
        assert!(matches!(
            solve_pm1(4, 2, 5),
            Err(SolveError::NoSolutionsPossible { g: 2, .. })
        ));
        assert_eq!(solve_pm1(1, 0, 2).unwrap().len(), 10);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(s("\u{2212}37/2").to_string(), "-37/2");
        assert_eq!(s("1/0").to_string(), "1/0");
        assert_eq!(s("-1/0"), Slope::infinity());
        assert!("x/2".parse::<Slope>().is_err());
        let j = serde_json::to_string(&s("25/2")).unwrap();
        assert_eq!(j, "\"25/2\"");
        assert_eq!(serde_json::from_str::<Slope>(&j).unwrap(), s("25/2"));
    }
}
