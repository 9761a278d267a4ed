//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criterion 6 fails at a single value (see `KNOWN_FAILURES`); the run
//! still prints FAIL for it and exits non-zero if anything else fails or if
//! criterion 6 fails differently from what is recorded.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use tw_core::canon::{canonical_form, canonical_form_abstract, symmetry_group, AbstractPair};
use tw_core::cases::{CaseTable, PairFile};
use tw_core::filters::{jump_pattern_ok, FilterSet, Stage};
use tw_core::graph::LabelledGraph;
use tw_core::identify::{framing_constraint, initial_description, meridian_candidates, toroidal_slope_set, CaseTag, KnotData};
use tw_core::pair::{assemble_pairs, GraphPair};
use tw_core::search::s2_configs;
use tw_core::slope::{apply_framing, chain_collapse, distance, normalize, self_twist, FramingMap, Slope};
use tw_core::surgery::{run_twist_script, Coefficient, TwistScript};
use tw_core::template::{load_template, TorusTemplate};
use tw_core::trace::{from_json, EliminationTrace, Outcome, SurvivorRecord};
use tw_core::weights::{enumerate_weight_vectors, Side, WeightVector};

/// Criterion 6 detail expected to fail: with `|p|, |q| <= 200` the framing
/// sweep reaches n in -49..=50; n = -50 needs `|4n - 3| = 203`.
const KNOWN_FAILURES: &[(u32, &str)] = &[(6, "sweep misses n = [-50] in case A and [-50] in case B")];

const CASES: u32 = 10_000;

type Check = Result<String, String>;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn read(name: &str) -> String {
    std::fs::read_to_string(data_dir().join(name)).unwrap()
}

fn template() -> Arc<TorusTemplate> {
    Arc::new(load_template(&read("figure2.template")).unwrap())
}

fn tw(args: &[&str]) -> (i32, Duration, String) {
    let t0 = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_tw"))
        .args(args)
        .env_remove("TW_DATA_DIR")
        .output()
        .unwrap();
    let msg = format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    (o.status.code().unwrap_or(-1), t0.elapsed(), msg.trim().to_string())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn load_trace(p: &Path) -> EliminationTrace {
    from_json(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn criterion_1(dir: &Path) -> Check {
    let out = dir.join("c1");
    let (code, took, msg) = tw(&["--out", s(&out), "enumerate", "--s", "2"]);
    if code != 0 {
        return Err(format!("exit {code}: {msg}"));
    }
    let survivors: Vec<SurvivorRecord> =
        serde_json::from_str(&std::fs::read_to_string(out.join("survivors.json")).unwrap()).unwrap();
    let fig8 = PairFile::parse(&read("figure8.pair")).unwrap().to_pair(&template()).unwrap();
    let want = canonical_form(&fig8);
    if survivors.len() != 1 || survivors[0].encoding != want {
        return Err(format!("{} survivors, transcription {}", survivors.len(), want.id()));
    }
    if took > Duration::from_secs(600) {
        return Err(format!("took {took:.1?}"));
    }
    Ok(format!("1 survivor {} in {took:.1?}", survivors[0].id))
}

fn criterion_2(dir: &Path) -> Check {
    let trace = load_trace(&dir.join("c1/trace.json"));
    let p1: Vec<_> = trace.records.iter().filter(|r| r.config.ws.first() == Some(&1)).collect();
    if p1.is_empty() || p1.iter().any(|r| r.verdict.rule == Outcome::Survivor) {
        return Err("p1 = 1 branch not fully eliminated".into());
    }
    let table = CaseTable::parse(&read("figure9.cases")).unwrap();
    let bad = table.check(&trace);
    if !bad.is_empty() {
        return Err(format!("{} case mismatches, first {} {:?}", bad.len(), bad[0].record, bad[0].found));
    }
    let summary: Vec<String> = table.cases.iter().map(|c| format!("({}) {}", c.case, c.expect)).collect();
    Ok(format!("p1 = 1: {} configs eliminated; {}", p1.len(), summary.join(", ")))
}

fn criterion_3(dir: &Path) -> Check {
    let out = dir.join("c3");
    let (code, took, msg) = tw(&["--out", s(&out), "eliminate", "--max-s", "12"]);
    if code != 0 {
        return Err(format!("exit {code}: {msg}"));
    }
    let t = load_trace(&out.join("trace.json"));
    let gaps = t.summary.coverage_gaps.unwrap_or(0);
    if t.s_values != [4, 6, 8, 10, 12] || t.summary.survivors != 0 || gaps != 0 || took > Duration::from_secs(1800) {
        return Err(format!("s {:?}: {} survivors, {gaps} gaps, {took:.1?}", t.s_values, t.summary.survivors));
    }
    Ok(format!("{} configurations, 0 survivors, 0 gaps in {took:.1?}", t.summary.enumerated))
}

fn criterion_4() -> Check {
    let data = KnotData::load_dir(&data_dir()).map_err(|e| e.to_string())?;
    let d = initial_description(&data);
    let start = (d.tracked["alpha"].to_string(), d.tracked["beta"].to_string());
    if start != ("-3/5".to_string(), "1/0".to_string()) {
        return Err(format!("start {start:?}"));
    }
    let script = TwistScript(vec![("K0".into(), 1), ("K2".into(), 1), ("K1".into(), 1)]);
    let e = run_twist_script(d, &script).map_err(|e| e.to_string())?;
    let got = (
        e.tracked["alpha"].clone(),
        e.tracked["beta"].clone(),
        e.coefficient("K1'").unwrap().cloned(),
        e.coefficient("K2'").unwrap().cloned(),
    );
    let want = (
        "1/2".parse::<Slope>().unwrap(),
        Slope::integer(3),
        Some("4".parse::<Coefficient>().unwrap()),
        Some("(p+q)/q".parse::<Coefficient>().unwrap()),
    );
    if got != want {
        return Err(format!("got {got:?}"));
    }
    Ok("(-3/5, 1/0) -> (1/2, 3), fillings (4, (p+q)/q)".into())
}

fn criterion_5() -> Check {
    let (a, b) = ("1/2".parse::<Slope>().unwrap(), Slope::integer(3));
    let mut found = Vec::new();
    for (case, want) in [(CaseTag::A, Slope::infinity()), (CaseTag::B, Slope::integer(1))] {
        let (da, db) = case.meridian_distances();
        let sols = meridian_candidates(&a, &b, da, db, 100);
        if sols.len() != 1 || !sols.contains(&want) {
            return Err(format!("case {case}: {sols:?}"));
        }
        found.push(format!("{case} -> {want}"));
    }
    Ok(format!("{} (unique within |m|, |n| <= 100)", found.join(", ")))
}

fn criterion_6(dir: &Path) -> Check {
    let out = dir.join("c6");
    let (code, _, msg) = tw(&["--out", s(&out), "verify-slopes", "--n-range", "-50..50", "--pq-bound", "200"]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    let distance_ok = v["distanceFailures"].as_array().map_or(false, |a| a.is_empty());
    // Independent recount of the sweep.
    let mut missing = Vec::new();
    for case in CaseTag::BOTH {
        let mut hit = BTreeSet::new();
        for p in -200i64..=200 {
            for q in -200i64..=200 {
                if p != 0 {
                    let (ok, n) = framing_constraint(case, p, q);
                    if ok {
                        hit.insert(n);
                    }
                }
            }
        }
        let m: Vec<i64> = (-50i64..=50).filter(|&n| n != 1 && !hit.contains(&BigInt::from(n))).collect();
        missing.push(m);
    }
    if !distance_ok {
        return Err(format!("distance-5 failures: {}", v["distanceFailures"]));
    }
    if missing.iter().any(|m| !m.is_empty()) {
        return Err(format!(
            "distance 5 holds for all 100 n; sweep misses n = {:?} in case A and {:?} in case B",
            missing[0], missing[1]
        ));
    }
    if code != 0 {
        return Err(format!("exit {code}: {msg}"));
    }
    Ok("distance 5 for all 100 n; sweep attains every n".into())
}

fn criterion_7() -> Check {
    for k in -50i64..=50 {
        let d = toroidal_slope_set(&BigInt::from(k)).distances;
        if (d[0][1], d[0][2], d[1][2]) != (3, 4, 5) {
            return Err(format!("n = {k}: {d:?}"));
        }
    }
    Ok("distances (3, 4, 5) for n in -50..=50".into())
}

fn pool() -> Vec<GraphPair> {
    let t = template();
    let mut out = Vec::new();
    for (ws, wt) in s2_configs(&FilterSet::default()).unwrap() {
        if let Ok(ps) = assemble_pairs(&t, &ws, &wt) {
            out.extend(ps);
        }
    }
    out
}

fn slope() -> impl Strategy<Value = Slope> {
    (-10_000i64..=10_000, -10_000i64..=10_000)
        .prop_filter("0/0", |(p, q)| *p != 0 || *q != 0)
        .prop_map(|(p, q)| normalize(p, q).unwrap())
}

fn framing() -> impl Strategy<Value = FramingMap> {
    prop::collection::vec((0u8..3, -6i64..=6), 0..6).prop_map(|steps| {
        steps.into_iter().fold(FramingMap::identity(), |m, (kind, k)| {
            let e = match kind {
                0 => FramingMap::translation(k),
                1 => FramingMap::self_twist(k),
                _ => FramingMap::new(0, 1, 1, 0).unwrap(),
            };
            e.compose(&m)
        })
    })
}

fn err<T: std::fmt::Debug>(e: proptest::test_runner::TestError<T>) -> String {
    e.to_string()
}

fn criterion_8() -> Check {
    let runner = || TestRunner::new(Config { cases: CASES, failure_persistence: None, ..Config::default() });
    let mut passed = Vec::new();
    let mut check = |name: &str, r: Result<(), String>| -> Result<(), String> {
        r.map_err(|e| format!("{name}: {e}"))?;
        passed.push(name.to_string());
        Ok(())
    };

    check(
        "framing-distance invariance",
        runner()
            .run(&(framing(), slope(), slope()), |(m, a, b)| {
                prop_assert_eq!(distance(&apply_framing(&m, &a), &apply_framing(&m, &b)), distance(&a, &b));
                Ok(())
            })
            .map_err(err),
    )?;
    check(
        "twist inverses",
        runner()
            .run(&(slope(), -1000i64..=1000), |(a, t)| {
                prop_assert_eq!(self_twist(&self_twist(&a, t), -t), a);
                Ok(())
            })
            .map_err(err),
    )?;
    check(
        "continued fraction vs Moebius",
        runner()
            .run(&prop::collection::vec(-4i64..=4, 1..=5), |chain| {
                let (mut p, mut q) = (BigInt::from(1), BigInt::from(0));
                let mut zero = false;
                for (i, &a) in chain.iter().enumerate().rev() {
                    let np = BigInt::from(a) * &p - &q;
                    q = std::mem::replace(&mut p, np);
                    zero |= i > 0 && p == BigInt::from(0);
                }
                let slopes: Vec<Slope> = chain.iter().map(|&a| Slope::integer(a)).collect();
                match chain_collapse(&slopes) {
                    Ok(v) => prop_assert_eq!(v, normalize(p, q).unwrap()),
                    Err(_) => prop_assert!(zero),
                }
                Ok(())
            })
            .map_err(err),
    )?;

    let mut graphs = Vec::new();
    for w in enumerate_weight_vectors(2, Side::S).unwrap() {
        graphs.push((Side::S, w));
    }
    for s in [2, 4, 6, 8] {
        graphs.extend(enumerate_weight_vectors(s, Side::T).unwrap().into_iter().map(|w| (Side::T, w)));
    }
    let tpl = template();
    let build = |(side, w): (Side, WeightVector), seed: u64| {
        let t = w.t as u64;
        LabelledGraph::build(tpl.clone(), side, w, vec![(seed % t) as u32, ((seed / t) % t) as u32]).unwrap()
    };
    check(
        "valence identity",
        runner()
            .run(&(prop::sample::select(graphs.clone()), any::<u64>()), |(g, seed)| {
                let g = build(g, seed);
                prop_assert!(g.slots.iter().all(|v| v.len() as u32 == 5 * g.t()));
                Ok(())
            })
            .map_err(err),
    )?;
    check(
        "label words",
        runner()
            .run(&(prop::sample::select(graphs), any::<u64>()), |(g, seed)| {
                let g = build(g, seed);
                prop_assert!((0..g.vertex_count()).all(|v| g.label_word_ok(v)));
                Ok(())
            })
            .map_err(err),
    )?;

    let pairs = pool();
    let n = pairs.len();
    check(
        "canonical-form orbit constancy",
        runner()
            .run(&(0..n, 0usize..1000), |(i, k)| {
                let a = AbstractPair::from_pair(&pairs[i]);
                let group = symmetry_group(a.s_vertices, a.t_vertices);
                prop_assert_eq!(canonical_form_abstract(&group[k % group.len()].apply(&a)), canonical_form(&pairs[i]));
                Ok(())
            })
            .map_err(err),
    )?;
    check(
        "jumping rotation/reflection invariance",
        runner()
            .run(
                &((3usize..10).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle()), 0usize..10, 0usize..10),
                |(v, ku, kv)| {
                    let n = v.len();
                    let ok = jump_pattern_ok(&v);
                    let u_rot: Vec<usize> = v.iter().map(|&x| (x + ku) % n).collect();
                    let v_rot: Vec<usize> = (0..n).map(|i| v[(i + kv) % n]).collect();
                    let both: Vec<usize> = v.iter().rev().map(|&x| (n - x) % n).collect();
                    prop_assert_eq!(jump_pattern_ok(&u_rot), ok);
                    prop_assert_eq!(jump_pattern_ok(&v_rot), ok);
                    prop_assert_eq!(jump_pattern_ok(&both), ok);
                    Ok(())
                },
            )
            .map_err(err),
    )?;
    check(
        "filter-order independence",
        runner()
            .run(&(0..n, Just(Stage::DEFAULT_ORDER.to_vec()).prop_shuffle()), |(i, order)| {
                let f = FilterSet { order, ..FilterSet::default() };
                prop_assert_eq!(
                    f.first_failure(&pairs[i]).is_none(),
                    FilterSet::default().first_failure(&pairs[i]).is_none()
                );
                Ok(())
            })
            .map_err(err),
    )?;
    let rules: Vec<_> = Stage::DEFAULT_ORDER.iter().flat_map(|s| s.rules().iter().copied()).collect();
    check(
        "monotonicity under filter removal",
        runner()
            .run(&(0..n, prop::sample::subsequence(rules.clone(), 0..=rules.len())), |(i, off)| {
                if FilterSet::default().first_failure(&pairs[i]).is_none() {
                    prop_assert!(FilterSet::without(&off).first_failure(&pairs[i]).is_none());
                }
                Ok(())
            })
            .map_err(err),
    )?;
    Ok(format!("{} suites x {CASES} cases: {}", passed.len(), passed.join(", ")))
}

fn criterion_9(dir: &Path) -> Check {
    let mut same = Vec::new();
    for (cmd, extra, files) in [
        ("enumerate", vec!["--s", "2"], vec!["trace.json", "survivors.json"]),
        ("enumerate", vec!["--s", "2", "--no-symmetry"], vec!["trace.json", "survivors.json"]),
        ("eliminate", vec!["--max-s", "12"], vec!["trace.json"]),
    ] {
        let mut outs = Vec::new();
        for workers in ["1", "4"] {
            let out = dir.join(format!("c9-{cmd}-{}-{workers}", extra.len()));
            let mut args = vec!["--workers", workers, "--out", s(&out), cmd];
            args.extend(&extra);
            let (code, _, msg) = tw(&args);
            if code != 0 {
                return Err(format!("{cmd} with {workers} worker(s): exit {code}: {msg}"));
            }
            outs.push(out);
        }
        for f in files {
            if std::fs::read(outs[0].join(f)).unwrap() != std::fs::read(outs[1].join(f)).unwrap() {
                return Err(format!("{cmd} {extra:?}: {f} differs between 1 and 4 workers"));
            }
            same.push(format!("{cmd} {} {f}", extra.join(" ")));
        }
    }
    Ok(format!("byte-identical with 1 and 4 workers: {}", same.join(", ")))
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let results: Vec<(u32, &str, Check)> = vec![
        (1, "s = 2 uniqueness", criterion_1(d)),
        (2, "s = 2 sub-case fidelity", criterion_2(d)),
        (3, "s >= 4 elimination", criterion_3(d)),
        (4, "twist-script checkpoints", criterion_4()),
        (5, "meridian solutions", criterion_5()),
        (6, "final slopes", criterion_6(d)),
        (7, "toroidal slope set", criterion_7()),
        (8, "property suites", criterion_8()),
        (9, "determinism", criterion_9(d)),
    ];
    let mut unexpected = 0;
    for (n, name, r) in &results {
        match r {
            Ok(detail) => println!("criterion {n} ({name}): PASS - {detail}"),
            Err(detail) => {
                let known = KNOWN_FAILURES.iter().any(|(k, text)| k == n && detail.ends_with(text));
                println!(
                    "criterion {n} ({name}): FAIL - {detail}{}",
                    if known { " [known, documented]" } else { "" }
                );
                if !known {
                    unexpected += 1;
                }
            }
        }
    }
    let passed = results.iter().filter(|r| r.2.is_ok()).count();
    println!("{passed}/{} criteria pass, {unexpected} unexpected failure(s)", results.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
