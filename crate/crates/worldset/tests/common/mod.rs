//! Shared fixtures: the worked examples from the golden corpus built
//! programmatically, plus seeded random generators for the property suites.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use worldset::cond::{Atom, AtomOp, Condition, Conjunction, Term};
use worldset::query::Query;
use worldset::rel::{parse_cell, Relation, SelAtom, SelRhs};
use worldset::tables::{CMultitable, CTable, World};
use worldset::tst::WideSchema;
use worldset::value::{AttrName, Schema, Tuple, Value};
use worldset::wsd::{Component, Gwsd};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn row(cells: &[&str]) -> Tuple {
    cells.iter().map(|c| parse_cell(c)).collect()
}

pub fn golden(name: &str) -> String {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {path}: {e}"))
}

pub fn golden_doc(name: &str) -> worldset::fmt::Document {
    worldset::fmt::parse(&golden(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn golden_gwsd(name: &str) -> Gwsd {
    match golden_doc(name) {
        worldset::fmt::Document::Gwsd(w) => w,
        other => panic!("{name} is not a gwsd document: {other:?}"),
    }
}

pub fn golden_ctab(name: &str) -> CMultitable {
    match golden_doc(name) {
        worldset::fmt::Document::CMultitable(c) => c,
        other => panic!("{name} is not a cmultitable document: {other:?}"),
    }
}

/// The or-set census table with the uniqueness constraint as an explicit
/// disequality: (x in {185, 785}) & (z in {185, 186}) & x != z, plus the
/// marital-status or-sets.
pub fn census_orset_ctable() -> CMultitable {
    let atom = |v: &str, c: &str| Condition::Atom(Atom::eq(Term::var(v), Term::cons(c)));
    let or = |l: Condition, r: Condition| Condition::or(l, r);
    let and = |l: Condition, r: Condition| Condition::and(l, r);
    let global = and(
        and(
            and(
                or(atom("x", "185"), atom("x", "785")),
                or(atom("z", "185"), atom("z", "186")),
            ),
            Condition::Atom(Atom::neq(Term::var("x"), Term::var("z"))),
        ),
        and(
            or(atom("y", "1"), atom("y", "2")),
            or(or(atom("w", "1"), atom("w", "2")), or(atom("w", "3"), atom("w", "4"))),
        ),
    );
    let mut p = CTable::new("P", Schema::of(&["S", "N", "M"]));
    p.push(row(&["?x", "Smith", "?y"]), Condition::True).unwrap();
    p.push(row(&["?z", "Brown", "?w"]), Condition::True).unwrap();
    CMultitable::new(vec![p], global)
}

/// Census pool: the seven mentioned constants.
pub fn census_pool() -> Vec<String> {
    ["185", "785", "186", "1", "2", "3", "4"].iter().map(|s| s.to_string()).collect()
}

/// The four worlds of the two-component decomposition.
pub fn four_worlds() -> BTreeSet<World> {
    let mk = |rows: &[&[&str]]| World::single("R", Relation::from_strs(&["A", "B"], rows));
    [
        mk(&[&["1", "2"], &["5", "6"]]),
        mk(&[&["1", "2"]]),
        mk(&[&["3", "4"], &["5", "6"]]),
        mk(&[&["3", "4"]]),
    ]
    .into_iter()
    .collect()
}

/// The succinctness family: n unary components with two distinct values each.
pub fn binary_choice_family(n: usize) -> Gwsd {
    let wide = WideSchema::new(vec![("R".into(), Schema::of(&["A"]), n)]);
    let ws = wide.schema();
    let comps = (0..n)
        .map(|i| {
            Component::new(
                Schema::new(vec![ws.attrs()[i].clone()]).unwrap(),
                vec![row(&[&format!("a{}", i + 1)]), row(&[&format!("b{}", i + 1)])],
            )
            .unwrap()
        })
        .collect();
    Gwsd::new(wide, comps, Conjunction::empty()).unwrap()
}

/// The full product of `n` binary unary relations: 2^n rows, arity n.
pub fn full_binary_product(n: usize) -> Relation {
    let attrs: Vec<String> = (1..=n).map(|i| format!("A{i}")).collect();
    let names: Vec<&str> = attrs.iter().map(|s| s.as_str()).collect();
    let mut rel = Relation::empty(Schema::of(&names));
    for bits in 0u32..(1 << n) {
        let tuple: Tuple =
            (0..n).map(|i| Value::constant(((bits >> i) & 1).to_string())).collect();
        rel.insert(tuple).unwrap();
    }
    rel
}

// ---------------------------------------------------------------------------
// Random generators (all deterministic under the caller's seed)
// ---------------------------------------------------------------------------

/// Random relation with arity <= 5, <= 40 rows, values from a pool of 6.
/// Half the time the relation is a deliberate product of smaller blocks so
/// factorizable inputs are well represented.
pub fn rand_relation(rng: &mut ChaCha8Rng, tag: usize) -> Relation {
    let arity = rng.gen_range(1..=5usize);
    let names: Vec<String> = (0..arity).map(|i| format!("T{tag}A{i}")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let schema = Schema::of(&refs);

    if rng.gen_bool(0.5) && arity >= 2 {
        // Product of column blocks.
        let split = rng.gen_range(1..arity);
        let mut rel: Option<Relation> = None;
        for (lo, hi) in [(0, split), (split, arity)] {
            let attrs: Vec<AttrName> =
                schema.attrs()[lo..hi].to_vec();
            let block_schema = Schema::new(attrs).unwrap();
            let rows = rng.gen_range(1..=6usize);
            let mut block = Relation::empty(block_schema);
            for _ in 0..rows {
                let t: Tuple = (lo..hi)
                    .map(|_| Value::constant(rng.gen_range(0..6u8).to_string()))
                    .collect();
                block.insert(t).unwrap();
            }
            rel = Some(match rel {
                None => block,
                Some(r) => r.product(&block).unwrap(),
            });
        }
        let rel = rel.unwrap();
        if rel.len() <= 40 {
            return rel;
        }
    }
    let rows = rng.gen_range(1..=40usize);
    let mut rel = Relation::empty(schema);
    for _ in 0..rows {
        let t: Tuple =
            (0..arity).map(|_| Value::constant(rng.gen_range(0..6u8).to_string())).collect();
        rel.insert(t).unwrap();
    }
    rel
}

/// Random tuple-level decomposition: one binary relation with up to three
/// slots split across up to three components, up to three rows per component,
/// up to two variables, domain 1..=4, and up to two global disequalities.
pub fn rand_tuple_level_gwsd(rng: &mut ChaCha8Rng) -> Gwsd {
    let slots = rng.gen_range(1..=3usize);
    let arity = rng.gen_range(1..=2usize);
    let base_names: Vec<String> = (0..arity).map(|i| format!("A{i}")).collect();
    let refs: Vec<&str> = base_names.iter().map(|s| s.as_str()).collect();
    let wide = WideSchema::new(vec![("R".into(), Schema::of(&refs), slots)]);
    let ws = wide.schema();

    // Partition slot indices into component groups.
    let n_comps = rng.gen_range(1..=slots);
    let mut assignment: Vec<usize> = (0..slots).map(|_| rng.gen_range(0..n_comps)).collect();
    // Every component needs at least one slot; repair gaps.
    for c in 0..n_comps {
        if !assignment.contains(&c) {
            let idx = rng.gen_range(0..slots);
            assignment[idx] = c;
        }
    }
    let used: BTreeSet<usize> = assignment.iter().copied().collect();

    let vars = ["v1", "v2"];
    let mut comps = Vec::new();
    for c in used {
        let slot_ids: Vec<usize> =
            (0..slots).filter(|i| assignment[*i] == c).collect();
        let mut attrs = Vec::new();
        for &s in &slot_ids {
            for a in 0..arity {
                attrs.push(ws.attrs()[s * arity + a].clone());
            }
        }
        let mut comp = Component::new(Schema::new(attrs).unwrap(), vec![]).unwrap();
        let rows = if rng.gen_bool(0.05) { 0 } else { rng.gen_range(1..=3usize) };
        for _ in 0..rows {
            let mut r = Vec::new();
            for _ in &slot_ids {
                if rng.gen_bool(0.2) {
                    r.extend(vec![Value::Bottom; arity]);
                } else {
                    for _ in 0..arity {
                        if rng.gen_bool(0.25) {
                            r.push(Value::variable(vars[rng.gen_range(0..2)]));
                        } else {
                            r.push(Value::constant(rng.gen_range(1..=4u8).to_string()));
                        }
                    }
                }
            }
            comp.push(r).unwrap();
        }
        comps.push(comp);
    }
    let mut atoms = Vec::new();
    for _ in 0..rng.gen_range(0..=2usize) {
        let l = Term::var(vars[rng.gen_range(0..2)]);
        let r = if rng.gen_bool(0.5) {
            Term::cons(rng.gen_range(1..=4u8).to_string())
        } else {
            Term::var(vars[rng.gen_range(0..2)])
        };
        let a = Atom::new(l, AtomOp::Neq, r);
        if a.fixed_truth().is_none() {
            atoms.push(a);
        }
    }
    Gwsd::new(wide, comps, Conjunction::new(atoms)).unwrap()
}

/// Constant tuples over the decomposition's active domain, for decision
/// targets.
pub fn sample_tuples(rng: &mut ChaCha8Rng, w: &Gwsd, rel_arity: usize, n: usize) -> Vec<Tuple> {
    let mut adom: Vec<String> = w.active_domain().into_iter().collect();
    if adom.is_empty() {
        adom.push("1".into());
    }
    (0..n)
        .map(|_| {
            (0..rel_arity)
                .map(|_| Value::constant(adom[rng.gen_range(0..adom.len())].clone()))
                .collect()
        })
        .collect()
}

/// Random positive query of bounded depth over the given base relations.
/// Returns the query together with its schema.
pub fn rand_positive_query(
    rng: &mut ChaCha8Rng,
    bases: &[(String, Schema)],
    depth: usize,
) -> (Query, Schema) {
    if depth == 0 {
        let (name, schema) = &bases[rng.gen_range(0..bases.len())];
        return (Query::base(name.clone()), schema.clone());
    }
    match rng.gen_range(0..6u8) {
        0 => {
            let (q, s) = rand_positive_query(rng, bases, depth - 1);
            let attr = s.attrs()[rng.gen_range(0..s.arity())].clone();
            let atom = if s.arity() >= 2 && rng.gen_bool(0.4) {
                let other = s.attrs()[rng.gen_range(0..s.arity())].clone();
                SelAtom::eq_attr(attr, other)
            } else {
                SelAtom::eq_const(attr, Value::constant(rng.gen_range(1..=4u8).to_string()))
            };
            (Query::Select(Box::new(q), vec![atom]), s)
        }
        1 => {
            let (q, s) = rand_positive_query(rng, bases, depth - 1);
            let keep: Vec<AttrName> = s
                .attrs()
                .iter()
                .filter(|_| rng.gen_bool(0.6))
                .cloned()
                .collect();
            let keep = if keep.is_empty() { vec![s.attrs()[0].clone()] } else { keep };
            let out = Schema::new(keep.clone()).unwrap();
            (Query::Project(Box::new(q), keep), out)
        }
        2 => {
            let (l, ls) = rand_positive_query(rng, bases, depth - 1);
            let (r, rs) = rand_positive_query(rng, bases, depth - 1);
            // Rename both sides apart so the product schema is disjoint.
            let lp: Vec<(AttrName, AttrName)> = ls
                .attrs()
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), AttrName::simple(format!("L{depth}x{i}"))))
                .collect();
            let rp: Vec<(AttrName, AttrName)> = rs
                .attrs()
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), AttrName::simple(format!("R{depth}x{i}"))))
                .collect();
            let schema = Schema::new(
                lp.iter().chain(rp.iter()).map(|(_, b)| b.clone()).collect(),
            )
            .unwrap();
            (
                Query::Product(
                    Box::new(Query::Rename(Box::new(l), lp)),
                    Box::new(Query::Rename(Box::new(r), rp)),
                ),
                schema,
            )
        }
        3 => {
            let (q, s) = rand_positive_query(rng, bases, depth - 1);
            let attr = s.attrs()[rng.gen_range(0..s.arity())].clone();
            let filtered = Query::Select(
                Box::new(q.clone()),
                vec![SelAtom::eq_const(
                    attr,
                    Value::constant(rng.gen_range(1..=4u8).to_string()),
                )],
            );
            (Query::Union(Box::new(q), Box::new(filtered)), s)
        }
        4 => {
            let (q, _s) = rand_positive_query(rng, bases, depth - 1);
            (Query::ProjectEmpty(Box::new(q)), Schema::of(&[worldset::query::BOOL_ATTR]))
        }
        _ => rand_positive_query(rng, bases, depth - 1),
    }
}

/// Random conditional multitable with at most eight terms, for translation
/// round trips.
pub fn rand_ctable(rng: &mut ChaCha8Rng) -> CMultitable {
    let arity = rng.gen_range(1..=2usize);
    let names: Vec<String> = (0..arity).map(|i| format!("A{i}")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut table = CTable::new("R", Schema::of(&refs));
    let vars = ["x", "y"];
    let consts = ["1", "2"];
    let rand_atom = |rng: &mut ChaCha8Rng| {
        let l = Term::var(vars[rng.gen_range(0..2)]);
        let r = if rng.gen_bool(0.5) {
            Term::cons(consts[rng.gen_range(0..2)])
        } else {
            Term::var(vars[rng.gen_range(0..2)])
        };
        let op = if rng.gen_bool(0.5) { AtomOp::Eq } else { AtomOp::Neq };
        Condition::Atom(Atom::new(l, op, r))
    };
    let rows = rng.gen_range(1..=2usize);
    for _ in 0..rows {
        let tuple: Tuple = (0..arity)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    Value::variable(vars[rng.gen_range(0..2)])
                } else {
                    Value::constant(consts[rng.gen_range(0..2)])
                }
            })
            .collect();
        let local = if rng.gen_bool(0.5) { Condition::True } else { rand_atom(rng) };
        table.push(tuple, local).unwrap();
    }
    let global = match rng.gen_range(0..4u8) {
        0 => Condition::True,
        1 => rand_atom(rng),
        2 => Condition::and(rand_atom(rng), rand_atom(rng)),
        _ => Condition::or(rand_atom(rng), rand_atom(rng)),
    };
    CMultitable::new(vec![table], global)
}

/// Exhaustive exact-cover search for cross-checking the reduction verdicts.
pub fn has_exact_cover(ground: usize, triples: &[[usize; 3]]) -> bool {
    let q = ground / 3;
    fn go(q: usize, ground: usize, triples: &[[usize; 3]], chosen: &mut Vec<usize>) -> bool {
        if chosen.len() == q {
            let mut seen = vec![false; ground + 1];
            let mut count = 0;
            for &i in chosen.iter() {
                for &e in &triples[i] {
                    if seen[e] {
                        return false;
                    }
                    seen[e] = true;
                    count += 1;
                }
            }
            return count == ground;
        }
        let start = chosen.last().map_or(0, |&i| i + 1);
        for i in start..triples.len() {
            chosen.push(i);
            if go(q, ground, triples, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    go(q, ground, triples, &mut Vec::new())
}

/// Selection right-hand side helper used by query generators in tests.
pub fn rhs_const(v: &str) -> SelRhs {
    SelRhs::Const(Value::constant(v))
}
