//! Decision procedures for decompositions: tuple/instance possibility and
//! certainty, their query variants, the empty-world check, and generators for
//! the classical hardness-reduction instances.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::cond::{satisfiable_conjunction, Atom, Conjunction, Term, Valuation};
use crate::query::{eval_on_world, eval_positive_on_x, Query, QueryError, ANSWER_NAME, TRUE_CONST};
use crate::rel::{Relation, SelAtom};
use crate::tables::{TableError, World};
use crate::translate::{gwsd_to_x, TranslateError};
use crate::tst::{inline_inverse_one, WideSchema};
use crate::value::{AttrName, Schema, Tuple, Value};
use crate::wsd::{Component, Gwsd, Level, WsdError};

#[derive(Debug, Error)]
pub enum DecideError {
    #[error("certainty checks require a tuple-level decomposition")]
    Level,
    #[error("malformed reduction instance: {0}")]
    Instance(String),
    #[error("unknown relation: {0}")]
    UnknownRelation(String),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Wsd(#[from] WsdError),
    #[error(transparent)]
    Rel(#[from] crate::rel::RelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ptime,
    BruteForce,
}

/// Evidence for an existential verdict: the chosen component rows (1-based)
/// and a satisfying valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub rows: Vec<usize>,
    pub valuation: Valuation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub verdict: bool,
    pub method: Method,
    pub witness: Option<Witness>,
}

impl Decision {
    fn plain(verdict: bool, method: Method) -> Self {
        Decision { verdict, method, witness: None }
    }
}

fn constant_tuple(t: &[Value]) -> Result<Vec<String>, DecideError> {
    t.iter()
        .map(|v| {
            v.as_constant()
                .map(|c| c.to_string())
                .ok_or_else(|| DecideError::Instance("target tuple must be constant".into()))
        })
        .collect()
}

/// Tuple possibility, decided in polynomial time through the multitable
/// translation: the tuple is possible when some answer tuple unifies with it
/// under a satisfiable conjunction of the global and local conditions.
pub fn tuple_possible(w: &Gwsd, rel: &str, t: &[Value]) -> Result<Decision, DecideError> {
    let target = constant_tuple(t)?;
    let x = gwsd_to_x(w)?;
    let table = x.table(rel).ok_or_else(|| DecideError::UnknownRelation(rel.to_string()))?;
    if table.schema.arity() != t.len() {
        return Err(DecideError::Instance(format!(
            "tuple arity {} does not match relation {}",
            t.len(),
            rel
        )));
    }
    for row in &table.rows {
        let mut conj = x.global.and(&row.local);
        let mut ok = true;
        for (cell, want) in row.tuple.iter().zip(&target) {
            match cell {
                Value::Constant(c) => {
                    if c != want {
                        ok = false;
                        break;
                    }
                }
                Value::Variable(v) => {
                    conj.push(Atom::eq(Term::var(v.clone()), Term::cons(want.clone())));
                }
                Value::Bottom => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        if let Some(valuation) = satisfiable_conjunction(&conj) {
            // Witnesses are re-verified before being returned.
            let verified = crate::cond::eval_condition(&conj.to_condition(), &valuation)
                .unwrap_or(false);
            if !verified {
                continue;
            }
            return Ok(Decision {
                verdict: true,
                method: Method::Ptime,
                witness: Some(Witness { rows: Vec::new(), valuation }),
            });
        }
    }
    Ok(Decision::plain(false, Method::Ptime))
}

/// Slots of the given relation that lie fully inside a component, as position
/// lists relative to the component schema.
fn rel_slots_in_component(
    wide: &WideSchema,
    comp: &Component,
    rel: &str,
) -> Vec<Vec<usize>> {
    let wide_schema = wide.schema();
    let mut out = Vec::new();
    for (r, _, start, ar) in wide.slots() {
        if r != rel {
            continue;
        }
        let attrs = &wide_schema.attrs()[start..start + ar];
        let ps: Option<Vec<usize>> = attrs.iter().map(|a| comp.schema.position(a)).collect();
        if let Some(ps) = ps {
            out.push(ps);
        }
    }
    out
}

/// Tuple certainty for tuple-level decompositions: the tuple is certain when
/// the represented world-set is empty or some component carries it, without
/// variables, in every row.
pub fn tuple_certain(w: &Gwsd, rel: &str, t: &[Value]) -> Result<Decision, DecideError> {
    let report = w.validate();
    if report.level != Level::Tuple {
        return Err(DecideError::Level);
    }
    let target = constant_tuple(t)?;
    let want: Tuple = target.iter().map(Value::constant).collect();
    if satisfiable_conjunction(&w.global).is_none()
        || w.components.iter().any(|c| c.rows.is_empty())
    {
        return Ok(Decision::plain(true, Method::Ptime));
    }
    for comp in &w.components {
        let slots = rel_slots_in_component(&w.wide, comp, rel);
        if slots.is_empty() {
            continue;
        }
        let all_rows_carry = comp.rows.iter().all(|row| {
            slots.iter().any(|ps| {
                ps.len() == want.len() && ps.iter().zip(&want).all(|(&p, v)| row[p] == *v)
            })
        });
        if all_rows_carry {
            return Ok(Decision::plain(true, Method::Ptime));
        }
    }
    Ok(Decision::plain(false, Method::Ptime))
}

/// Calls `f` with every (choice, valuation, world) of the decomposition under
/// the pool; stops early when `f` returns true and reports the stopping point.
fn for_each_world(
    w: &Gwsd,
    pool: &[String],
    max_valuations: u64,
    mut f: impl FnMut(&[usize], &Valuation, &World) -> bool,
) -> Result<Option<(Vec<usize>, Valuation)>, DecideError> {
    let positions = w.component_positions();
    for choice in w.choices() {
        let row = w.assemble(&choice, &positions);
        let mut member = inline_inverse_one(&w.wide, &row);
        member.global = w.global.clone();
        let cm = member.as_cmultitable();
        // Walk the valuations directly so the witness can report the one
        // that succeeded.
        let vars: Vec<String> = cm.variables().into_iter().collect();
        let total = (pool.len() as u64).checked_pow(vars.len() as u32);
        if !matches!(total, Some(n) if n <= max_valuations) {
            return Err(TableError::Budget("world search exceeds valuation cap".into()).into());
        }
        let mut counters = vec![0usize; vars.len()];
        loop {
            let valuation: Valuation = vars
                .iter()
                .zip(&counters)
                .map(|(v, &i)| (v.clone(), pool[i].clone()))
                .collect();
            let sat = crate::cond::eval_condition(&cm.global, &valuation)
                .map_err(|e| TableError::Table(e.to_string()))?;
            if sat {
                let worlds = single_world(&cm, &valuation)?;
                if f(&choice, &valuation, &worlds) {
                    let rows = choice.iter().map(|&i| i + 1).collect();
                    return Ok(Some((rows, valuation)));
                }
            }
            let mut k = counters.len();
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                counters[k] += 1;
                if counters[k] < pool.len() {
                    break;
                }
                counters[k] = 0;
            }
            if counters.iter().all(|&c| c == 0) {
                break;
            }
        }
    }
    Ok(None)
}

fn single_world(
    cm: &crate::tables::CMultitable,
    valuation: &Valuation,
) -> Result<World, DecideError> {
    let mut rels = BTreeMap::new();
    for table in &cm.tables {
        let mut rel = Relation::empty(table.schema.clone());
        for row in &table.rows {
            let keep = crate::cond::eval_condition(&row.local, valuation)
                .map_err(|e| TableError::Table(e.to_string()))?;
            if keep {
                rel.insert(
                    row.tuple
                        .iter()
                        .map(|c| match c {
                            Value::Variable(x) => {
                                Value::constant(valuation.get(x).cloned().expect("total"))
                            }
                            other => other.clone(),
                        })
                        .collect(),
                )
                .map_err(|e| TableError::Table(e.to_string()))?;
            }
        }
        rels.insert(table.name.clone(), rel);
    }
    Ok(World::new(rels))
}

/// Pool and cap controls for the brute-force searches.
#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    /// Fresh constants beyond the active domain; defaults to one per
    /// variable.
    pub fresh: Option<usize>,
    pub max_valuations: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { fresh: None, max_valuations: 4_000_000 }
    }
}

/// Pool for decision brute force: decomposition active domain, instance and
/// query constants, and fresh constants per the budget.
fn decision_pool(w: &Gwsd, extra: &BTreeSet<String>, budget: &SearchBudget) -> Vec<String> {
    let mut adom = w.active_domain();
    adom.extend(extra.iter().cloned());
    crate::tables::shared_pool(&[adom], budget.fresh.unwrap_or_else(|| w.variables().len()))
}

/// Instance possibility by bounded search over one row per component plus a
/// matching valuation; returns the lexicographically least witness.
pub fn instance_possible(w: &Gwsd, instance: &World) -> Result<Decision, DecideError> {
    instance_possible_with(w, instance, &SearchBudget::default())
}

pub fn instance_possible_with(
    w: &Gwsd,
    instance: &World,
    budget: &SearchBudget,
) -> Result<Decision, DecideError> {
    let mut extra = BTreeSet::new();
    for (_, rel) in instance.relations() {
        extra.extend(rel.constants());
    }
    let pool = decision_pool(w, &extra, budget);
    let hit = for_each_world(w, &pool, budget.max_valuations, |_, _, world| {
        world_matches_instance(world, instance)
    })?;
    match hit {
        Some((rows, valuation)) => Ok(Decision {
            verdict: true,
            method: Method::BruteForce,
            witness: Some(Witness { rows, valuation }),
        }),
        None => Ok(Decision::plain(false, Method::BruteForce)),
    }
}

fn world_matches_instance(world: &World, instance: &World) -> bool {
    for (name, rel) in instance.relations() {
        match world.relation(name) {
            Some(r) if r == rel => {}
            _ => return false,
        }
    }
    // Relations of the world not mentioned by the instance must be empty.
    for (name, rel) in world.relations() {
        if instance.relation(name).is_none() && !rel.is_empty() {
            return false;
        }
    }
    true
}

/// Instance certainty for tuple-level decompositions, in polynomial time:
/// vacuously true on the empty world-set; otherwise variables forbid
/// certainty, every instance tuple must be certain, and no row may define a
/// present tuple outside the instance.
pub fn instance_certain(w: &Gwsd, instance: &World) -> Result<Decision, DecideError> {
    let report = w.validate();
    if report.level != Level::Tuple {
        return Err(DecideError::Level);
    }
    if satisfiable_conjunction(&w.global).is_none()
        || w.components.iter().any(|c| c.rows.is_empty())
    {
        return Ok(Decision::plain(true, Method::Ptime));
    }
    if w.has_table_variables() {
        return Ok(Decision::plain(false, Method::Ptime));
    }
    // (1) Every instance tuple is certain.
    for (name, rel) in instance.relations() {
        for t in rel.tuples() {
            if !tuple_certain(w, name, t)?.verdict {
                return Ok(Decision::plain(false, Method::Ptime));
            }
        }
    }
    // (2) No component row defines a present tuple outside the instance.
    for comp in &w.components {
        for g in &w.wide.groups {
            let slots = rel_slots_in_component(&w.wide, comp, &g.rel);
            let target = instance.relation(&g.rel);
            for row in &comp.rows {
                for ps in &slots {
                    let tuple: Tuple = ps.iter().map(|&p| row[p].clone()).collect();
                    if tuple.iter().any(Value::is_bottom) {
                        continue;
                    }
                    match target {
                        Some(rel) if rel.contains(&tuple) => {}
                        _ => return Ok(Decision::plain(false, Method::Ptime)),
                    }
                }
            }
        }
    }
    Ok(Decision::plain(true, Method::Ptime))
}

/// The eight query-variant decision problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QProblem {
    TupleQPossible,
    TupleQCertain,
    InstanceQPossible,
    InstanceQCertain,
}

/// Target of a query-variant decision: a tuple or an instance relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QTarget {
    Tuple(Tuple),
    Instance(Relation),
}

/// Decides a query-variant problem. Tuple q-possibility with a positive query
/// runs in polynomial time through closed evaluation; every other case is
/// bounded brute force over the represented worlds.
pub fn q_decide(
    problem: QProblem,
    w: &Gwsd,
    q: &Query,
    target: &QTarget,
) -> Result<Decision, DecideError> {
    q_decide_with(problem, w, q, target, &SearchBudget::default())
}

pub fn q_decide_with(
    problem: QProblem,
    w: &Gwsd,
    q: &Query,
    target: &QTarget,
    budget: &SearchBudget,
) -> Result<Decision, DecideError> {
    if problem == QProblem::TupleQPossible && q.is_positive() {
        let t = match target {
            QTarget::Tuple(t) => t,
            QTarget::Instance(_) => {
                return Err(DecideError::Instance("tuple problem needs a tuple target".into()))
            }
        };
        let x = gwsd_to_x(w)?;
        let ans = eval_positive_on_x(q, &x)?;
        // Same per-tuple satisfiability test as plain tuple possibility.
        let ans_w = x_as_trivial_gwsd_decision(&ans, t)?;
        return Ok(ans_w);
    }

    let mut extra: BTreeSet<String> = q.constants().into_iter().collect();
    match target {
        QTarget::Tuple(t) => {
            for v in t {
                if let Some(c) = v.as_constant() {
                    extra.insert(c.to_string());
                }
            }
        }
        QTarget::Instance(rel) => extra.extend(rel.constants()),
    }
    let pool = decision_pool(w, &extra, budget);

    let holds = |world: &World| -> Result<bool, DecideError> {
        let ans = eval_on_world(q, world)?;
        Ok(match target {
            QTarget::Tuple(t) => ans.contains(t),
            QTarget::Instance(rel) => {
                ans.schema().same_set(rel.schema()) && {
                    let aligned: BTreeSet<Tuple> = {
                        let attrs: Vec<AttrName> = ans.schema().attrs().to_vec();
                        rel.project(&attrs)?.tuples().cloned().collect()
                    };
                    let got: BTreeSet<Tuple> = ans.tuples().cloned().collect();
                    aligned == got
                }
            }
        })
    };

    let existential =
        matches!(problem, QProblem::TupleQPossible | QProblem::InstanceQPossible);
    let mut failure: Option<DecideError> = None;
    let hit = for_each_world(w, &pool, budget.max_valuations, |_, _, world| {
        match holds(world) {
            Ok(b) => {
                if existential {
                    b
                } else {
                    !b
                }
            }
            Err(e) => {
                failure = Some(e);
                true
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let verdict = if existential { hit.is_some() } else { hit.is_none() };
    let witness = if existential {
        hit.map(|(rows, valuation)| Witness { rows, valuation })
    } else {
        None
    };
    Ok(Decision { verdict, method: Method::BruteForce, witness })
}

/// Tuple-possibility test on an answer multitable (global and locals are
/// conjunctions, so satisfiability stays polynomial).
fn x_as_trivial_gwsd_decision(
    ans: &crate::tables::XMultitable,
    t: &[Value],
) -> Result<Decision, DecideError> {
    let target = constant_tuple(t)?;
    let table = ans
        .table(ANSWER_NAME)
        .ok_or_else(|| DecideError::UnknownRelation(ANSWER_NAME.into()))?;
    if table.schema.arity() != t.len() {
        return Err(DecideError::Instance(format!(
            "tuple arity {} does not match the answer schema {}",
            t.len(),
            table.schema
        )));
    }
    for row in &table.rows {
        let mut conj = ans.global.and(&row.local);
        let mut ok = true;
        for (cell, want) in row.tuple.iter().zip(&target) {
            match cell {
                Value::Constant(c) => {
                    if c != want {
                        ok = false;
                        break;
                    }
                }
                Value::Variable(v) => {
                    conj.push(Atom::eq(Term::var(v.clone()), Term::cons(want.clone())));
                }
                Value::Bottom => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        if let Some(valuation) = satisfiable_conjunction(&conj) {
            return Ok(Decision {
                verdict: true,
                method: Method::Ptime,
                witness: Some(Witness { rows: Vec::new(), valuation }),
            });
        }
    }
    Ok(Decision::plain(false, Method::Ptime))
}

/// Whether the empty world is representable: a choice of component rows whose
/// composition consists solely of absent slots, under a satisfiable global.
pub fn empty_world_possible(w: &Gwsd) -> Result<Decision, DecideError> {
    if satisfiable_conjunction(&w.global).is_none() {
        return Ok(Decision::plain(false, Method::BruteForce));
    }
    let positions = w.component_positions();
    let wide_slots = w.wide.slots();
    for choice in w.choices() {
        let row = w.assemble(&choice, &positions);
        let all_absent = wide_slots
            .iter()
            .all(|(_, _, start, ar)| row[*start..start + ar].iter().any(Value::is_bottom));
        if all_absent {
            let valuation = satisfiable_conjunction(&w.global).expect("checked above");
            return Ok(Decision {
                verdict: true,
                method: Method::BruteForce,
                witness: Some(Witness {
                    rows: choice.iter().map(|&i| i + 1).collect(),
                    valuation,
                }),
            });
        }
    }
    Ok(Decision::plain(false, Method::BruteForce))
}

/// A three-literal clause: variable index (1-based) and polarity per literal.
pub type Clause3 = [(usize, bool); 3];

/// Artifacts of a reduction encoding: the decomposition and, for the clause
/// encodings, the fixed companion query and target tuple.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub wsd: Gwsd,
    pub query: Option<Query>,
    pub target: Option<Tuple>,
}

/// Encodes an exact-cover-by-3-sets instance: the ground set `1..=3q` and a
/// collection of 3-element subsets. The empty world is representable exactly
/// when an exact cover exists.
pub fn encode_x3c(ground: usize, triples: &[[usize; 3]]) -> Result<Reduction, DecideError> {
    if ground == 0 || !ground.is_multiple_of(3) {
        return Err(DecideError::Instance(format!(
            "ground set size {ground} is not a positive multiple of 3"
        )));
    }
    let q = ground / 3;
    for t in triples {
        let mut seen = BTreeSet::new();
        for &e in t {
            if e == 0 || e > ground || !seen.insert(e) {
                return Err(DecideError::Instance(format!("bad triple {t:?}")));
            }
        }
    }
    let base = Schema::new((1..=q).map(|i| AttrName::simple(format!("A{i}"))).collect())
        .expect("non-empty");
    let wide = WideSchema::new(vec![("R".into(), base, ground)]);
    let wide_schema = wide.schema();
    let mut components = Vec::new();
    for i in 1..=q {
        let attrs: Vec<AttrName> = (1..=ground)
            .map(|j| AttrName::slot("R", &format!("d{j}"), &format!("A{i}")))
            .collect();
        debug_assert!(attrs.iter().all(|a| wide_schema.contains(a)));
        let mut comp = Component::new(Schema::new(attrs).expect("non-empty"), vec![])?;
        for t in triples {
            let row: Tuple = (1..=ground)
                .map(|j| {
                    if t.contains(&j) {
                        Value::Bottom
                    } else {
                        Value::constant("1")
                    }
                })
                .collect();
            comp.push(row)?;
        }
        components.push(comp);
    }
    let wsd = Gwsd::new(wide, components, Conjunction::empty())?;
    Ok(Reduction { wsd, query: None, target: None })
}

fn clause_vars(clauses: &[Clause3]) -> BTreeMap<usize, Vec<(usize, usize, bool)>> {
    // variable -> occurrences (clause 1-based, position 1-based, polarity)
    let mut occ: BTreeMap<usize, Vec<(usize, usize, bool)>> = BTreeMap::new();
    for (ci, clause) in clauses.iter().enumerate() {
        for (ki, &(var, pol)) in clause.iter().enumerate() {
            occ.entry(var).or_default().push((ci + 1, ki + 1, pol));
        }
    }
    occ
}

fn literal_id(clause: usize, pos: usize) -> String {
    // d-index of literal (i, k) in the row-major layout.
    format!("d{}", (clause - 1) * 3 + pos)
}

/// Encodes a 3CNF satisfiability instance. The formula is satisfiable exactly
/// when the tuple `(true)` is possible in the answer to
/// `{(true)} - project[]( S - R )`.
pub fn encode_3cnf(clauses: &[Clause3]) -> Result<Reduction, DecideError> {
    if clauses.is_empty() {
        return Err(DecideError::Instance("at least one clause required".into()));
    }
    let n = clauses.len();
    let occ = clause_vars(clauses);
    let wide = WideSchema::new(vec![
        ("R".into(), Schema::of(&["C"]), 3 * n),
        ("S".into(), Schema::of(&["C"]), n),
    ]);
    let mut components = Vec::new();
    for occurrences in occ.values() {
        let attrs: Vec<AttrName> = occurrences
            .iter()
            .map(|&(i, k, _)| AttrName::slot("R", &literal_id(i, k), "C"))
            .collect();
        let mut comp = Component::new(Schema::new(attrs).expect("non-empty"), vec![])?;
        let pos_row: Tuple = occurrences
            .iter()
            .map(|&(i, _, pol)| if pol { Value::constant(i.to_string()) } else { Value::Bottom })
            .collect();
        let neg_row: Tuple = occurrences
            .iter()
            .map(|&(i, _, pol)| if pol { Value::Bottom } else { Value::constant(i.to_string()) })
            .collect();
        comp.push(pos_row)?;
        comp.push(neg_row)?;
        components.push(comp);
    }
    // The S component pins S = {1..n} in every world.
    let s_attrs: Vec<AttrName> =
        (1..=n).map(|i| AttrName::slot("S", &format!("d{i}"), "C")).collect();
    let mut s_comp = Component::new(Schema::new(s_attrs).expect("non-empty"), vec![])?;
    s_comp.push((1..=n).map(|i| Value::constant(i.to_string())).collect())?;
    components.push(s_comp);

    let wsd = Gwsd::new(wide, components, Conjunction::empty())?;
    let query = Query::Difference(
        Box::new(Query::Unit),
        Box::new(Query::ProjectEmpty(Box::new(Query::Difference(
            Box::new(Query::base("S")),
            Box::new(Query::base("R")),
        )))),
    );
    Ok(Reduction {
        wsd,
        query: Some(query),
        target: Some(vec![Value::constant(TRUE_CONST)]),
    })
}

/// Encodes a 3DNF tautology instance. The formula is a tautology exactly when
/// `(true)` is certain in the answer to the fixed positive query joining the
/// three literal positions of a clause.
pub fn encode_3dnf(clauses: &[Clause3]) -> Result<Reduction, DecideError> {
    if clauses.is_empty() {
        return Err(DecideError::Instance("at least one clause required".into()));
    }
    let n = clauses.len();
    let occ = clause_vars(clauses);
    let wide = WideSchema::new(vec![("R".into(), Schema::of(&["C", "P"]), 3 * n)]);
    let mut components = Vec::new();
    for occurrences in occ.values() {
        let mut attrs = Vec::new();
        for &(i, k, _) in occurrences {
            attrs.push(AttrName::slot("R", &literal_id(i, k), "C"));
            attrs.push(AttrName::slot("R", &literal_id(i, k), "P"));
        }
        let mut comp = Component::new(Schema::new(attrs).expect("non-empty"), vec![])?;
        let mut pos_row = Vec::new();
        let mut neg_row = Vec::new();
        for &(i, k, pol) in occurrences {
            let (c, p) = (Value::constant(i.to_string()), Value::constant(k.to_string()));
            if pol {
                pos_row.extend([c, p]);
                neg_row.extend([Value::Bottom, Value::Bottom]);
            } else {
                pos_row.extend([Value::Bottom, Value::Bottom]);
                neg_row.extend([c, p]);
            }
        }
        comp.push(pos_row)?;
        comp.push(neg_row)?;
        components.push(comp);
    }
    let wsd = Gwsd::new(wide, components, Conjunction::empty())?;

    let rename_for = |i: usize| {
        Query::Rename(
            Box::new(Query::base("R")),
            vec![
                (AttrName::from("C"), AttrName::from(format!("r{i}.C").as_str())),
                (AttrName::from("P"), AttrName::from(format!("r{i}.P").as_str())),
            ],
        )
    };
    let product = Query::Product(
        Box::new(Query::Product(Box::new(rename_for(1)), Box::new(rename_for(2)))),
        Box::new(rename_for(3)),
    );
    let select = Query::Select(
        Box::new(product),
        vec![
            SelAtom::eq_attr("r1.C", "r2.C"),
            SelAtom::eq_attr("r1.C", "r3.C"),
            SelAtom::eq_const("r1.P", Value::constant("1")),
            SelAtom::eq_const("r2.P", Value::constant("2")),
            SelAtom::eq_const("r3.P", Value::constant("3")),
        ],
    );
    let query = Query::ProjectEmpty(Box::new(select));
    Ok(Reduction {
        wsd,
        query: Some(query),
        target: Some(vec![Value::constant(TRUE_CONST)]),
    })
}

/// Enumeration-oracle rep of a decomposition (exposed for tests and the CLI).
pub fn oracle_rep(w: &Gwsd, fresh: usize) -> Result<BTreeSet<World>, DecideError> {
    let pool = crate::wsd::wsd_pool(w, fresh);
    Ok(crate::wsd::rep_enumerate_wsd(w, &pool, SearchBudget::default().max_valuations)?)
}

/// Checks a 3CNF clause set against a truth assignment.
pub fn cnf_holds(clauses: &[Clause3], assignment: &[bool]) -> bool {
    clauses.iter().all(|c| c.iter().any(|&(v, pol)| assignment[v - 1] == pol))
}

/// Checks a 3DNF clause set against a truth assignment.
pub fn dnf_holds(clauses: &[Clause3], assignment: &[bool]) -> bool {
    clauses.iter().any(|c| c.iter().all(|&(v, pol)| assignment[v - 1] == pol))
}
