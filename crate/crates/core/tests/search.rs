mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;

use tw_core::canon::{
    canonical_form, canonical_form_abstract, orbit_labelled_forms, symmetry_group, AbstractPair,
    CanonicalForm,
};
use tw_core::cases::CaseTable;
use tw_core::filters::{replay, FilterSet};
use tw_core::graph::{find_scycles, LabelledGraph};
use tw_core::pair::{all_phases, assemble_pairs, GraphPair};
use tw_core::rules::RuleId;
use tw_core::search::{search_s2, SearchConfig};
use tw_core::trace::{from_json, to_json, to_markdown, EliminationTrace, Outcome};
use tw_core::tree::{default_tree, eliminate_high_s};
use tw_core::weights::{Side, WeightVector};

fn run(cfg: SearchConfig) -> EliminationTrace {
    search_s2(&common::template(), &cfg).unwrap()
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Compare with a checked-in trace; `TW_BLESS=1` rewrites it.
fn golden(name: &str, trace: &EliminationTrace) {
    let path = fixture(name);
    let text = to_json(trace);
    if std::env::var_os("TW_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &text).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap();
    assert_eq!(from_json(&want).unwrap(), *trace, "{name} differs from the golden trace");
    assert_eq!(want, text);
}

#[test]
fn s2_has_one_survivor_equal_to_the_transcription() {
    let trace = run(SearchConfig::default());
    assert_eq!(trace.summary.enumerated, 1230);
    assert_eq!(trace.survivors.len(), 1);
    assert_eq!(trace.survivors[0].encoding, canonical_form(&common::figure8()));
    let h = &trace.summary.eliminated_by_rule;
    assert_eq!(h.get("L2.5.2"), Some(&1168));
    assert_eq!(h.get("SC-CONN"), Some(&34));
    assert_eq!(h.get("L2.4"), Some(&12));
    golden("trace_s2.json", &trace);
}

#[test]
fn s2_subcases_match_the_case_table() {
    let trace = run(SearchConfig::default());
    let table = CaseTable::parse(&common::read_data("figure9.cases")).unwrap();
    let bad = table.check(&trace);
    assert!(bad.is_empty(), "{bad:?}");
    // The p1 = 1 branch dies completely.
    let p1: Vec<_> = trace.records.iter().filter(|r| r.config.ws[0] == 1).collect();
    assert!(!p1.is_empty());
    assert!(p1.iter().all(|r| r.verdict.rule != Outcome::Survivor));
}

#[test]
fn witnesses_replay() {
    let t = common::template();
    let trace = run(SearchConfig::default());
    let mut replayed = 0;
    for r in &trace.records {
        let Outcome::Eliminated(rule) = r.verdict.rule else { continue };
        let Some(w) = &r.verdict.witness else { continue };
        let ws = WeightVector::new(2, r.config.ws.clone());
        let wt = WeightVector::new(2, r.config.wt.clone());
        let v = tw_core::filters::Verdict::fail(rule, w.clone());
        let again = replay(&t, &ws, &wt, &v).unwrap();
        assert!(again.failed(), "{} does not replay", r.id);
        assert_eq!(again.rule, rule, "{}", r.id);
        replayed += 1;
    }
    assert_eq!(replayed, trace.records.len() - trace.records.iter().filter(|r| r.verdict.rule == Outcome::Survivor).count());
}

#[test]
fn deterministic_across_worker_counts() {
    let one = run(SearchConfig { workers: 1, ..Default::default() });
    let many = run(SearchConfig { workers: 4, ..Default::default() });
    assert_eq!(to_json(&one), to_json(&many));
    let a = run(SearchConfig { workers: 1, symmetry: false, ..Default::default() });
    let b = run(SearchConfig { workers: 3, symmetry: false, ..Default::default() });
    assert_eq!(to_json(&a), to_json(&b));
}

#[test]
fn unreduced_survivors_are_the_orbit_expansion() {
    let t = common::template();
    let reduced = run(SearchConfig::default());
    let full = run(SearchConfig { symmetry: false, ..Default::default() });
    let got: BTreeSet<CanonicalForm> = full.survivors.iter().map(|s| s.encoding.clone()).collect();
    let mut expected = BTreeSet::new();
    for s in &reduced.survivors {
        let p = GraphPair::from_id(
            &t,
            &WeightVector::new(2, s.ws.clone()),
            &WeightVector::new(2, s.wt.clone()),
            &s.representative,
        )
        .unwrap();
        expected.extend(orbit_labelled_forms(&AbstractPair::from_pair(&p)));
    }
    assert_eq!(got, expected);
    // Each labelled survivor reduces to the one canonical class.
    for s in &full.survivors {
        assert_eq!(canonical_form_abstract(&s.encoding.decode()), reduced.survivors[0].encoding);
    }
}

#[test]
fn disabling_rules_only_grows_the_survivor_set() {
    let base: BTreeSet<_> = run(SearchConfig::default()).survivors.into_iter().map(|s| s.encoding).collect();
    let no_jump = run(SearchConfig { filters: FilterSet::without(&[RuleId::L2_4]), ..Default::default() });
    let forms: BTreeSet<_> = no_jump.survivors.iter().map(|s| s.encoding.clone()).collect();
    assert!(forms.is_superset(&base));
    assert!(forms.len() > base.len());
    for off in [RuleId::ScConn, RuleId::L2_5_2] {
        let r = run(SearchConfig { filters: FilterSet::without(&[off]), ..Default::default() });
        let f: BTreeSet<_> = r.survivors.into_iter().map(|s| s.encoding).collect();
        assert!(f.is_superset(&base), "{off}");
    }
}

#[test]
fn canonical_form_properties() {
    let fig8 = common::figure8();
    let form = canonical_form(&fig8);
    assert_eq!(canonical_form_abstract(&form.decode()), form);
    // Exchanging G_S and G_T (both have two vertices).
    let a = AbstractPair::from_pair(&fig8);
    for g in symmetry_group(2, 2).into_iter().filter(|g| g.exchange) {
        assert_eq!(canonical_form_abstract(&g.apply(&a)), form);
    }
    // Case (1) of the table differs from the surviving case (4).
    let t = common::template();
    let case1 = assemble_pairs(&t, &WeightVector::new(2, vec![2, 2, 2, 2, 0]), &WeightVector::new(2, vec![3, 1, 1, 1, 1]))
        .unwrap();
    assert!(!case1.is_empty());
    assert!(case1.iter().all(|p| canonical_form(p) != form));
}

#[test]
fn case_two_graph_has_two_scycles_on_one_side() {
    let t = common::template();
    let mut seen = 0;
    for ph in all_phases(2, 2) {
        let g = LabelledGraph::build(t.clone(), Side::S, WeightVector::new(2, vec![2, 2, 2, 2, 0]), ph).unwrap();
        if g.parity_violation().is_some() {
            continue;
        }
        let c = find_scycles(&g);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].face_side, c[1].face_side);
        seen += 1;
    }
    assert!(seen > 0);
}

#[test]
fn high_s_eliminated_without_gaps() {
    let trace = eliminate_high_s(&common::template(), &default_tree(), &[4, 6, 8, 10, 12], 0).unwrap();
    assert_eq!(trace.summary.survivors, 0);
    assert_eq!(trace.summary.coverage_gaps.unwrap_or(0), 0);
    assert_eq!(trace.summary.enumerated, 176 + 396 + 704 + 1100 + 1584);
    let s4 = eliminate_high_s(&common::template(), &default_tree(), &[4], 1).unwrap();
    assert_eq!(to_json(&s4), to_json(&eliminate_high_s(&common::template(), &default_tree(), &[4], 4).unwrap()));
    golden("trace_s4.json", &s4);
}

#[test]
fn markdown_has_a_section_per_fired_rule() {
    let trace = run(SearchConfig::default());
    let md = to_markdown(&trace);
    for rule in trace.fired_rules() {
        assert!(md.contains(&format!("## {rule}")), "{rule}");
    }
    let empty = to_markdown(&EliminationTrace::default());
    assert!(empty.contains("0 configurations"));
    assert_eq!(from_json(&to_json(&trace)).unwrap(), trace);
}
