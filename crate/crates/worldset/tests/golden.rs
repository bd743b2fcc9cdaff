//! Golden corpus checks: every file parses, printing is canonical, and the
//! documented examples behave as stated.

mod common;

use common::*;

use worldset::decide;
use worldset::fmt::{parse, print, Document};
use worldset::tables::{rep_enumerate_pool, shared_pool};
use worldset::translate::gwsd_to_x;
use worldset::tst::{inline_tabset, Tabset};
use worldset::value::tuple_to_string;
use worldset::wsd::rep_enumerate_wsd;

#[test]
fn every_golden_file_parses_and_prints_canonically() {
    let dir = format!("{}/tests/golden", env!("CARGO_MANIFEST_DIR"));
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let doc = parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        // Printing is a fixpoint of parse . print.
        let printed = print(&doc);
        let reparsed = parse(&printed).unwrap();
        assert_eq!(print(&reparsed), printed, "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 9, "expected the full corpus, found {seen} files");
}

#[test]
fn three_member_tabset_inlines_to_three_rows() {
    let ts = match golden_doc("three-members.gtabset") {
        Document::GTabset(ts) => ts,
        _ => panic!("tabset document"),
    };
    let wide = ts.wide_schema();
    assert_eq!(wide.width(), 9);
    let g = inline_tabset(&ts, &wide).unwrap();
    let rows: Vec<String> = g.rows.iter().map(|r| tuple_to_string(r)).collect();
    assert_eq!(
        rows,
        vec![
            "(a1, a2, a3, a4, _|_, _|_, a5, a6, _|_)",
            "(b1, b2, b3, b4, b5, b6, _|_, _|_, _|_)",
            "(c1, c2, _|_, _|_, _|_, _|_, c3, c4, c5)",
        ]
    );
    // Union semantics: three constant members, three worlds.
    let mut worlds = std::collections::BTreeSet::new();
    for m in &ts.members {
        worlds.extend(rep_enumerate_pool(&m.as_cmultitable(), &[], 1_000).unwrap());
    }
    assert_eq!(worlds.len(), 3);
    let _ = Tabset::new(ts.members.clone()).unwrap();
}

#[test]
fn three_member_tabset_wraps_as_one_component() {
    let ts = match golden_doc("three-members.gtabset") {
        Document::GTabset(ts) => ts,
        _ => panic!("tabset document"),
    };
    let wide = ts.wide_schema();
    let w = worldset::translate::gtabset_to_gwsd(&ts, &wide).unwrap();
    assert_eq!(w.components.len(), 1);
    assert_eq!(w.components[0].rows.len(), 3);
    assert_eq!(w.validate().class(), "wsd");
    // Same three worlds either way.
    let direct: std::collections::BTreeSet<_> = ts
        .members
        .iter()
        .flat_map(|m| rep_enumerate_pool(&m.as_cmultitable(), &[], 1_000).unwrap())
        .collect();
    let via_wsd = rep_enumerate_wsd(&w, &[], 1_000).unwrap();
    assert_eq!(direct, via_wsd);
}

#[test]
fn dnf_counterexample_world_has_empty_answer() {
    // For the three-clause formula, the assignment T,T,F,T picks component
    // rows (1, 1, 2, 1); the query answer in that world is empty, witnessing
    // that the formula is not a tautology.
    let clauses: Vec<decide::Clause3> = vec![
        [(1, true), (2, true), (3, true)],
        [(1, true), (2, false), (4, true)],
        [(1, false), (2, true), (4, false)],
    ];
    let red = decide::encode_3dnf(&clauses).unwrap();
    let w = &red.wsd;
    let positions = w.component_positions();
    let assembled = w.assemble(&[0, 0, 1, 0], &positions);
    let member = worldset::tst::inline_inverse_one(&w.wide, &assembled);
    let worlds = rep_enumerate_pool(&member.as_cmultitable(), &[], 1_000).unwrap();
    assert_eq!(worlds.len(), 1);
    let world = worlds.into_iter().next().unwrap();
    let expected = worldset::rel::Relation::from_strs(
        &["C", "P"],
        &[&["1", "1"], &["2", "1"], &["1", "2"], &["3", "2"], &["2", "3"]],
    );
    assert_eq!(world.relation("R").unwrap(), &expected);
    let answer =
        worldset::query::eval_on_world(red.query.as_ref().unwrap(), &world).unwrap();
    assert!(answer.is_empty());
}

#[test]
fn decision_example_translation_is_exact() {
    let w = golden_gwsd("decision.gwsd");
    let x = gwsd_to_x(&w).unwrap();
    // Mutex variables are named by component position: the singleton second
    // component consumes an index without allocating a variable.
    assert_eq!(x.mutex.mu("x1"), Some(1));
    assert_eq!(x.mutex.mu("x2"), None);
    assert_eq!(x.mutex.mu("x3"), Some(1));

    let r = x.table("R").unwrap();
    let rows: Vec<(String, String)> = r
        .rows
        .iter()
        .map(|row| (tuple_to_string(&row.tuple), row.local.to_string()))
        .collect();
    assert_eq!(
        rows,
        vec![
            ("(2)".to_string(), "x1 = 1".to_string()),
            ("(?y)".to_string(), "x1 = 1".to_string()),
            ("(2)".to_string(), "x1 != 1".to_string()),
            ("(1)".to_string(), "true".to_string()),
        ]
    );
    let s = x.table("S").unwrap();
    let rows: Vec<(String, String)> = s
        .rows
        .iter()
        .map(|row| (tuple_to_string(&row.tuple), row.local.to_string()))
        .collect();
    assert_eq!(
        rows,
        vec![
            ("(?z)".to_string(), "x1 = 1".to_string()),
            ("(2)".to_string(), "x1 != 1".to_string()),
            ("(1)".to_string(), "x3 = 1".to_string()),
            ("(2)".to_string(), "x3 != 1".to_string()),
        ]
    );

    // Equivalence under a shared pool.
    let pool = shared_pool(
        &[w.active_domain(), x.as_cmultitable().active_domain()],
        x.as_cmultitable().variables().len(),
    );
    let a = rep_enumerate_wsd(&w, &pool, 4_000_000).unwrap();
    let b = rep_enumerate_pool(&x.as_cmultitable(), &pool, 4_000_000).unwrap();
    assert_eq!(a, b);
}

#[test]
fn decision_example_verdicts() {
    let w = golden_gwsd("decision.gwsd");
    assert!(decide::tuple_possible(&w, "R", &row(&["1"])).unwrap().verdict);
    assert!(decide::tuple_certain(&w, "R", &row(&["1"])).unwrap().verdict);
    assert!(!decide::tuple_certain(&w, "S", &row(&["1"])).unwrap().verdict);
}

#[test]
fn cover_instance_is_possible_with_least_witness() {
    let w = golden_gwsd("cover-members.gwsd");
    let instance = match golden_doc("ground-set.worlds") {
        Document::Worlds(ws) => ws[0].clone(),
        _ => panic!("worlds document"),
    };
    let d = decide::instance_possible(&w, &instance).unwrap();
    assert!(d.verdict);
    assert_eq!(d.witness.unwrap().rows, vec![1, 3, 4]);
}

#[test]
fn four_worlds_membership_decisions() {
    let w = golden_gwsd("four-worlds.gwsd");
    let yes = worldset::tables::World::single(
        "R",
        worldset::rel::Relation::from_strs(&["A", "B"], &[&["1", "2"], &["5", "6"]]),
    );
    assert!(decide::instance_possible(&w, &yes).unwrap().verdict);
    let no = worldset::tables::World::single(
        "R",
        worldset::rel::Relation::from_strs(&["A", "B"], &[&["1", "2"], &["3", "4"]]),
    );
    assert!(!decide::instance_possible(&w, &no).unwrap().verdict);
    assert!(!decide::instance_certain(&w, &yes).unwrap().verdict);
    assert!(!decide::empty_world_possible(&w).unwrap().verdict);
}

#[test]
fn one_gwsd_tuple_possibility() {
    let w = golden_gwsd("one-gwsd.gwsd");
    // No world contains (1, 2): the second slot of the constant row pins z,
    // and z != 2 globally.
    assert!(!decide::tuple_possible(&w, "R", &row(&["1", "2"])).unwrap().verdict);
    // (1, 3) is possible via the constant row.
    assert!(decide::tuple_possible(&w, "R", &row(&["1", "3"])).unwrap().verdict);
    // Oracle agreement.
    let pool = shared_pool(&[w.active_domain()], 3);
    let worlds = rep_enumerate_wsd(&w, &pool, 4_000_000).unwrap();
    let oracle = worlds.iter().any(|a| {
        a.relation("R").is_some_and(|rel| rel.contains(&row(&["1", "2"])))
    });
    assert!(!oracle);
}

#[test]
fn census_translation_is_ground() {
    // Every census member is fully ground, so the conjoined global is empty
    // and the result is a plain variable-free decomposition.
    let c = golden_ctab("census.ctab");
    let (w, _) = worldset::translate::c_to_gwsd(&c, 16).unwrap();
    assert!(w.global.is_empty());
    assert!(!w.has_variables());
    assert_eq!(w.validate().class(), "wsd");
}
