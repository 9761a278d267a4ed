mod common;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use tw_core::canon::canonical_form;
use tw_core::identify::{
    final_slopes, framing_constraint, identify, initial_description, meridian_candidates, meridian_solve,
    toroidal_slope_set, CaseTag, IdentifyError, KnotData,
};
use tw_core::slope::{distance, Slope};
use tw_core::surgery::{run_twist_script, same_active_description, Coefficient, SurgeryError, TwistScript};

fn data() -> KnotData {
    KnotData::load_dir(&common::data_dir()).unwrap()
}

fn sl(s: &str) -> Slope {
    s.parse().unwrap()
}

fn coeff(s: &str) -> Coefficient {
    s.parse().unwrap()
}

fn script(steps: &[(&str, i64)]) -> TwistScript {
    TwistScript(steps.iter().map(|(c, t)| (c.to_string(), *t)).collect())
}

#[test]
fn initial_description_reads_back() {
    let d = data();
    let d10 = initial_description(&d);
    d10.validate().unwrap();
    for (id, c) in [("K1", "-2"), ("K1'", "3"), ("K2", "-2"), ("K2'", "p/q")] {
        assert_eq!(d10.coefficient(id).unwrap(), Some(&coeff(c)), "{id}");
    }
    assert_eq!(d10.tracked["alpha"], sl("-3/5"));
    assert_eq!(d10.tracked["beta"], Slope::infinity());
    assert!(matches!(d10.instantiate(0, 1), Err(SurgeryError::ExcludedParameter)));
    assert!(d10.instantiate(2, 3).is_ok());
}

#[test]
fn three_twists_reach_the_second_frame() {
    let d = data();
    let d10 = initial_description(&d);
    let out = run_twist_script(d10, &script(&[("K0", 1), ("K2", 1), ("K1", 1)])).unwrap();
    assert_eq!(out.tracked["alpha"], sl("1/2"));
    assert_eq!(out.tracked["beta"], sl("3"));
    assert_eq!(out.coefficient("K1'").unwrap(), Some(&coeff("4")));
    assert_eq!(out.coefficient("K2'").unwrap(), Some(&coeff("(p+q)/q")));
    assert!(out.coefficient("K1").unwrap().unwrap().is_infinity());
    assert!(out.coefficient("K2").unwrap().unwrap().is_infinity());
    assert!(same_active_description(&out, &d.figure12));
    assert_eq!(distance(&out.tracked["alpha"], &out.tracked["beta"]), 5u32.into());
}

#[test]
fn scripts_invert() {
    let d = data();
    let d10 = initial_description(&d);
    assert_eq!(run_twist_script(d10, &TwistScript(vec![])).unwrap(), *d10);
    // Inverting twists on K0 and K2' leaves every component unknotted.
    let s = script(&[("K0", 2), ("K2'", -3), ("K0", -1), ("K2'", 1)]);
    let there = run_twist_script(d10, &s).unwrap();
    assert_ne!(there, *d10);
    assert_eq!(run_twist_script(&there, &s.inverse()).unwrap(), *d10);
}

#[test]
fn meridians_are_unique() {
    let (alpha, beta) = (sl("1/2"), sl("3"));
    assert_eq!(meridian_solve(&alpha, &beta, CaseTag::A).unwrap(), Slope::infinity());
    assert_eq!(meridian_solve(&alpha, &beta, CaseTag::B).unwrap(), sl("1"));
    // Brute force over all m/n with signs, reduced to slopes.
    for case in CaseTag::BOTH {
        let (da, db) = case.meridian_distances();
        let mut brute = BTreeSet::new();
        for m in -10i64..=10 {
            for n in -10i64..=10 {
                if let Ok(mu) = Slope::new(m, n) {
                    if distance(&mu, &alpha) == da.into() && distance(&mu, &beta) == db.into() {
                        brute.insert(mu);
                    }
                }
            }
        }
        assert_eq!(brute, meridian_candidates(&alpha, &beta, da, db, 10), "{case}");
        assert_eq!(brute.len(), 1, "{case}");
    }
}

#[test]
fn framing_constraint_examples() {
    let n = |k: i64| BigInt::from(k);
    assert_eq!(framing_constraint(CaseTag::A, 1, -1), (true, n(1)));
    assert_eq!(framing_constraint(CaseTag::A, -1, 1), (true, n(1)));
    assert_eq!(framing_constraint(CaseTag::A, 2, -3), (true, n(0)));
    assert_eq!(framing_constraint(CaseTag::B, 1, 1), (true, n(1)));
    assert_eq!(framing_constraint(CaseTag::B, 5, 4), (true, n(2)));
    assert!(!framing_constraint(CaseTag::A, 2, 3).0);
}

#[test]
fn final_slopes_and_slope_set() {
    assert_eq!(final_slopes(&0.into(), CaseTag::A).unwrap(), (sl("-37/2"), sl("-16")));
    assert_eq!(final_slopes(&2.into(), CaseTag::B).unwrap(), (sl("34"), sl("63/2")));
    assert!(matches!(final_slopes(&1.into(), CaseTag::A), Err(IdentifyError::ExcludedFamily { .. })));
    for k in -50i64..=50 {
        let n = BigInt::from(k);
        if k != 1 {
            for case in CaseTag::BOTH {
                let (a, b) = final_slopes(&n, case).unwrap();
                assert_eq!(distance(&a, &b), 5u32.into(), "n = {k}");
            }
        }
        let t = toroidal_slope_set(&n);
        assert_eq!((t.distances[0][1], t.distances[0][2], t.distances[1][2]), (3, 4, 5), "n = {k}");
        // With s = 25n - 18 and r = s - 1/2 the set is {s - 2, r, s + 2}.
        let s = Slope::integer(25 * k - 18);
        let r = s.add(&sl("-1/2"));
        assert_eq!(t.slopes, [s.add(&sl("-2")), r, s.add(&sl("2"))]);
    }
    let t0 = toroidal_slope_set(&0.into());
    assert_eq!(t0.slopes, [sl("-20"), sl("-37/2"), sl("-16")]);
}

/// The framing sweep over `|p|, |q| <= 200`. With `4p + 3q = +-1` the value
/// `n` forces `|q| = |4n - 3|`, and likewise `|p| = |4n - 3|` in case B, so
/// the bound reaches `-49..=50` and misses `n = -50`.
#[test]
fn framing_sweep_range() {
    for case in CaseTag::BOTH {
        let mut hit = BTreeSet::new();
        for p in -200i64..=200 {
            for q in -200i64..=200 {
                if p == 0 {
                    continue;
                }
                let (ok, n) = framing_constraint(case, p, q);
                if ok {
                    hit.insert(n);
                }
            }
        }
        for k in -49i64..=50 {
            assert!(hit.contains(&BigInt::from(k)), "{case}: n = {k}");
        }
        assert!(!hit.contains(&BigInt::from(-50)), "{case}");
    }
    assert!(framing_constraint(CaseTag::A, -152, 203).0);
    assert_eq!(framing_constraint(CaseTag::A, -152, 203).1, BigInt::from(-50));
}

#[test]
fn identification_of_the_survivor() {
    let d = data();
    let fig8 = canonical_form(&common::figure8());
    let r = identify(&fig8, &fig8, &d).unwrap();
    assert_eq!(r.family, "k(2,-1,n,0)");
    assert!(r.checkpoints.iter().all(|c| c.ok));
    let a = r.cases.iter().find(|c| c.case == CaseTag::A).unwrap();
    let b = r.cases.iter().find(|c| c.case == CaseTag::B).unwrap();
    assert_eq!((a.alpha.to_string(), a.beta.to_string()), ("25n-37/2".into(), "25n-16".into()));
    assert_eq!((b.alpha.to_string(), b.beta.to_string()), ("25n-16".into(), "25n-37/2".into()));
    assert_eq!((a.meridian.clone(), b.meridian.clone()), (Slope::infinity(), sl("1")));
    assert_eq!(r.exclusions.iter().map(|e| e.n).collect::<Vec<_>>(), vec![1]);

    let t = common::template();
    let other = tw_core::pair::assemble_pairs(
        &t,
        &tw_core::weights::WeightVector::new(2, vec![2, 2, 2, 2, 0]),
        &tw_core::weights::WeightVector::new(2, vec![3, 1, 1, 1, 1]),
    )
    .unwrap();
    let wrong = canonical_form(&other[0]);
    assert!(matches!(identify(&wrong, &fig8, &d), Err(IdentifyError::NotSurvivor { .. })));
}
