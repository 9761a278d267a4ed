use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use tw_core::slope::{
    apply_framing, chain_collapse, distance, linked_twist, normalize, self_twist, solve_pm1, FramingMap, Slope,
};

const CASES: u32 = 10_000;

fn slope() -> impl Strategy<Value = Slope> {
    (-10_000i64..=10_000, -10_000i64..=10_000)
        .prop_filter("not 0/0", |(p, q)| *p != 0 || *q != 0)
        .prop_map(|(p, q)| normalize(p, q).unwrap())
}

/// Products of elementary determinant ±1 matrices.
fn framing() -> impl Strategy<Value = FramingMap> {
    prop::collection::vec((0u8..4, -6i64..=6), 0..6).prop_map(|steps| {
        let mut m = FramingMap::identity();
        for (kind, k) in steps {
            let e = match kind {
                0 => FramingMap::translation(k),
                1 => FramingMap::self_twist(k),
                2 => FramingMap::new(0, 1, 1, 0).unwrap(),
                _ => FramingMap::new(-1, 0, 0, 1).unwrap(),
            };
            m = e.compose(&m);
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn framing_preserves_distance(m in framing(), a in slope(), b in slope()) {
        prop_assert!(m.det() == BigInt::from(1) || m.det() == BigInt::from(-1));
        prop_assert_eq!(distance(&apply_framing(&m, &a), &apply_framing(&m, &b)), distance(&a, &b));
    }

    #[test]
    fn framing_inverse(m in framing(), a in slope()) {
        prop_assert_eq!(apply_framing(&m.inverse(), &apply_framing(&m, &a)), a);
    }

    #[test]
    fn twists_invert(a in slope(), t in -1000i64..=1000) {
        prop_assert_eq!(self_twist(&self_twist(&a, t), -t), a.clone());
        prop_assert_eq!(linked_twist(&linked_twist(&a, t, 5), -t, 5), a);
    }

    #[test]
    fn normalize_idempotent(p in -10_000i64..=10_000, q in -10_000i64..=10_000) {
        prop_assume!(p != 0 || q != 0);
        let s = normalize(p, q).unwrap();
        prop_assert_eq!(normalize(s.num().clone(), s.den().clone()).unwrap(), s.clone());
        prop_assert!(s.den() >= &BigInt::zero());
    }

    #[test]
    fn distance_symmetric(a in slope(), b in slope()) {
        prop_assert_eq!(distance(&a, &b), distance(&b, &a));
        prop_assert!(distance(&a, &a).is_zero());
    }

    #[test]
    fn half_integers_meet_meridian_twice(k in -10_000i64..=10_000) {
        let s = normalize(2 * k + 1, 2).unwrap();
        prop_assert_eq!(distance(&Slope::infinity(), &s), 2u32.into());
    }
}

/// Möbius action of `(a,-1;1,0)` products on `1/0`, unreduced. Also reports
/// whether some suffix of the chain evaluates to zero.
fn mobius(chain: &[i64]) -> ((BigInt, BigInt), bool) {
    let (mut p, mut q) = (BigInt::from(1), BigInt::zero());
    let mut zero_suffix = false;
    for (i, &a) in chain.iter().enumerate().rev() {
        let np = BigInt::from(a) * &p - &q;
        q = p;
        p = np;
        if p.is_zero() && i > 0 {
            zero_suffix = true;
        }
    }
    ((p, q), zero_suffix)
}

#[test]
fn chain_collapse_matches_mobius_exhaustively() {
    let mut checked = 0;
    for len in 1..=5u32 {
        for code in 0..9i64.pow(len) {
            let mut c = code;
            let chain: Vec<i64> = (0..len)
                .map(|_| {
                    let a = c % 9 - 4;
                    c /= 9;
                    a
                })
                .collect();
            let slopes: Vec<Slope> = chain.iter().map(|&a| Slope::integer(a)).collect();
            let ((p, q), degenerate) = mobius(&chain);
            match chain_collapse(&slopes) {
                Ok(v) => {
                    assert!(!degenerate, "{chain:?}");
                    assert_eq!(v, normalize(p, q).unwrap(), "{chain:?}");
                }
                Err(_) => assert!(degenerate, "{chain:?}"),
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 9 + 81 + 729 + 6561 + 59049);
}

#[test]
fn solve_pm1_matches_brute_force() {
    for (a, b) in [(4, 3), (-3, 4), (1, 0), (5, 7), (2, -9)] {
        let bound = 30i64;
        let mut brute = Vec::new();
        for p in -bound..=bound {
            for q in -bound..=bound {
                if (a * p + b * q).abs() == 1 {
                    brute.push((p, q));
                }
            }
        }
        let mut got = solve_pm1(a, b, bound as u64).unwrap();
        got.sort();
        assert_eq!(got, brute, "{a} p + {b} q");
    }
    assert!(solve_pm1(4, 6, 10).is_err());
}
