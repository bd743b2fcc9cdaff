//! Translations between the representation systems: decompositions into
//! mutex-conditioned multitables, conditional multitables into tabsets of
//! condition-free tables, tabsets into single-component decompositions, and a
//! best-effort simplifier for decompositions.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cond::{entails, Atom, AtomOp, Condition, Conjunction, ConstraintState, MutexSet, Term};
use crate::tables::{CMultitable, GMultitable, GTable, TableError, XMultitable, XTable};
use crate::tst::{inline_tabset, Tabset, TstError, WideSchema};
use crate::value::Value;
use crate::wsd::{rep_enumerate_wsd, Component, Gwsd, Level, WsdError};

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("term count {0} exceeds the atlas cap of {1}; raise the cap to translate")]
    AtlasCap(usize, usize),
    #[error("translation requires a tuple-level decomposition")]
    Level,
    #[error(transparent)]
    Tst(#[from] TstError),
    #[error(transparent)]
    Wsd(#[from] WsdError),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Translates a tuple-level decomposition into an equivalent mutex-conditioned
/// multitable: one mutex variable per multi-row component, one alternative per
/// component row, and each non-absent slot tuple copied with the selecting
/// alternative as its local condition.
pub fn gwsd_to_x(w: &Gwsd) -> Result<XMultitable, TranslateError> {
    let report = w.validate();
    if report.level != Level::Tuple || !report.partition_ok {
        return Err(TranslateError::Level);
    }

    let mut tables: Vec<XTable> = w
        .wide
        .groups
        .iter()
        .map(|g| XTable::new(g.rel.clone(), g.base.clone()))
        .collect();

    if w.components.iter().any(|c| c.rows.is_empty()) {
        // An empty component denotes the empty world-set.
        return Ok(XMultitable {
            tables,
            global: GMultitable::empty_world_set_marker(),
            mutex: MutexSet::empty(),
        });
    }

    // Fresh mutex variable names, indexed by component position.
    let used: BTreeSet<String> = w.variables();
    let var_for = |j: usize| {
        let mut name = format!("x{}", j + 1);
        while used.contains(&name) {
            name = format!("m{name}");
        }
        name
    };

    let mut mutex_entries = Vec::new();
    let wide_schema = w.wide.schema();
    for (j, comp) in w.components.iter().enumerate() {
        let mu = comp.rows.len() - 1;
        let var = var_for(j);
        if mu > 0 {
            mutex_entries.push((var.clone(), mu));
        }
        // Slot positions of this component, relative to its own schema.
        let mut slots: Vec<(String, Vec<usize>)> = Vec::new();
        for (rel, id, start, ar) in w.wide.slots() {
            let _ = id;
            let attrs = &wide_schema.attrs()[start..start + ar];
            if attrs.iter().all(|a| comp.schema.contains(a)) {
                let ps = attrs.iter().map(|a| comp.schema.position(a).unwrap()).collect();
                slots.push((rel, ps));
            }
        }
        for (i, row) in comp.rows.iter().enumerate() {
            let local = if mu == 0 {
                Conjunction::empty()
            } else if i < mu {
                Conjunction::new(vec![Atom::eq(Term::var(var.clone()), Term::cons((i + 1).to_string()))])
            } else {
                Conjunction::new(
                    (1..=mu)
                        .map(|l| Atom::neq(Term::var(var.clone()), Term::cons(l.to_string())))
                        .collect(),
                )
            };
            for (rel, ps) in &slots {
                let tuple: Vec<Value> = ps.iter().map(|&p| row[p].clone()).collect();
                if tuple.iter().any(Value::is_bottom) {
                    continue;
                }
                let table = tables.iter_mut().find(|t| t.name == *rel).expect("group table");
                table.push(tuple, local.clone());
            }
        }
    }

    let mutex = MutexSet::with_entries(mutex_entries).expect("positive bounds");
    Ok(XMultitable { tables, global: w.global.clone(), mutex })
}

/// The set of conjunctions produced for a conditional multitable; one
/// condition-free member table is emitted per entry.
#[derive(Debug, Clone)]
pub struct ThetaAtlas {
    pub thetas: Vec<Conjunction>,
}

/// Default cap on the number of terms the atlas enumeration will accept.
pub const DEFAULT_ATLAS_CAP: usize = 8;

struct AtlasSearch<'a> {
    global: &'a Condition,
    agenda: Vec<(Term, Term)>,
    out: Vec<Conjunction>,
}

/// Three-valued evaluation of a condition against a constraint state:
/// `Some(b)` when every completion agrees on `b`, `None` when open.
fn tri_eval(state: &mut ConstraintState, c: &Condition) -> Option<bool> {
    match c {
        Condition::True => Some(true),
        Condition::Atom(a) => state.relation(&a.left, &a.right).map(|eq| match a.op {
            AtomOp::Eq => eq,
            AtomOp::Neq => !eq,
        }),
        Condition::And(l, r) => match (tri_eval(state, l), tri_eval(state, r)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Condition::Or(l, r) => match (tri_eval(state, l), tri_eval(state, r)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        Condition::Not(inner) => tri_eval(state, inner).map(|b| !b),
    }
}

impl<'a> AtlasSearch<'a> {
    fn viable(&self, state: &mut ConstraintState) -> bool {
        state.consistent() && tri_eval(state, self.global) != Some(false)
    }

    fn emit(&mut self, state: &mut ConstraintState, atoms: &[Atom]) {
        if tri_eval(state, self.global) == Some(true) {
            self.out.push(Conjunction::new(atoms.to_vec()));
        }
    }

    /// Emits the generic completion of the current state: every remaining
    /// open pair is set to a disequality. The completion is consistent (the
    /// domain is infinite) and fixes every term pair.
    fn emit_completed(&mut self, state: &ConstraintState, atoms: &[Atom], from: usize) {
        let mut st = state.clone();
        let mut full = atoms.to_vec();
        for (a, b) in self.agenda[from..].iter().cloned() {
            if st.relation(&a, &b).is_none() {
                st.assert_neq(&a, &b);
                full.push(Atom::neq(a, b));
            }
        }
        self.emit(&mut st, &full);
    }

    fn search(&mut self, state: &ConstraintState, atoms: &mut Vec<Atom>, k: usize) {
        if k == self.agenda.len() {
            let mut st = state.clone();
            self.emit(&mut st, atoms);
            return;
        }
        let (a, b) = self.agenda[k].clone();
        {
            let mut st = state.clone();
            if st.relation(&a, &b).is_some() {
                // Forced by earlier decisions; nothing to branch on.
                self.search(state, atoms, k + 1);
                return;
            }
        }

        let mut eq_state = state.clone();
        let eq_ok = eq_state.assert_eq(&a, &b) && self.viable(&mut eq_state);
        let mut neq_state = state.clone();
        let neq_ok = neq_state.assert_neq(&a, &b) && self.viable(&mut neq_state);
        let real_branch = eq_ok && neq_ok;

        if eq_ok {
            atoms.push(Atom::eq(a.clone(), b.clone()));
            self.search(&eq_state, atoms, k + 1);
            atoms.pop();
        }
        if neq_ok {
            atoms.push(Atom::neq(a.clone(), b.clone()));
            // A genuine two-way split on a variable/constant pair whose
            // variable still has undecided constants ahead also records the
            // current negative branch as its own conjunction, completed
            // generically. The later splits re-derive its refinements, so the
            // atlas carries the same redundancy the construction describes.
            if real_branch && !b.is_var() && a.is_var() {
                let more_ahead = self.agenda[k + 1..].iter().any(|(u, v)| {
                    *u == a && !v.is_var() && {
                        let mut st = neq_state.clone();
                        st.relation(u, v) != Some(true)
                    }
                });
                if more_ahead {
                    self.emit_completed(&neq_state, atoms, k + 1);
                }
            }
            self.search(&neq_state, atoms, k + 1);
            atoms.pop();
        }
    }
}

/// Enumerates the consistent conjunctions over the table's terms that entail
/// the global condition, fixing the relation of every term pair (directly or
/// by derivation).
pub fn theta_atlas(t: &CMultitable, cap: usize) -> Result<ThetaAtlas, TranslateError> {
    let vars: Vec<String> = t.variables().into_iter().collect();
    let consts: Vec<String> = t.active_domain().into_iter().collect();
    let n_terms = vars.len() + consts.len();
    if n_terms > cap {
        return Err(TranslateError::AtlasCap(n_terms, cap));
    }

    let mut agenda: Vec<(Term, Term)> = Vec::new();
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            agenda.push((Term::var(vars[i].clone()), Term::var(vars[j].clone())));
        }
    }
    for v in &vars {
        for c in &consts {
            agenda.push((Term::var(v.clone()), Term::cons(c.clone())));
        }
    }

    let mut search = AtlasSearch { global: &t.global, agenda, out: Vec::new() };
    let state = ConstraintState::new();
    let mut atoms = Vec::new();
    search.search(&state, &mut atoms, 0);
    Ok(ThetaAtlas { thetas: search.out })
}

/// Builds one condition-free member per atlas entry: a tuple is kept when its
/// local condition is entailed, variables are replaced by forced constants or
/// class representatives, and the entry's surviving negated equalities become
/// the member's global condition.
pub fn c_to_gtabset(t: &CMultitable, cap: usize) -> Result<(Tabset, ThetaAtlas), TranslateError> {
    let atlas = theta_atlas(t, cap)?;
    let mut members = Vec::new();
    for theta in &atlas.thetas {
        let mut state = ConstraintState::new();
        for atom in theta.atoms() {
            let ok = state.assert_atom(atom);
            debug_assert!(ok, "atlas entries are consistent");
        }
        let mut tables = Vec::new();
        for table in &t.tables {
            let mut gt = GTable::new(table.name.clone(), table.schema.clone());
            for row in &table.rows {
                let keep = entails(theta, &row.local)
                    .map_err(|e| TableError::Table(e.to_string()))?;
                if !keep {
                    continue;
                }
                let image: Vec<Value> = row
                    .tuple
                    .iter()
                    .map(|cell| match cell {
                        Value::Variable(x) => match state.representative(&Term::var(x.clone())) {
                            Term::Const(c) => Value::constant(c),
                            Term::Var(y) => Value::variable(y),
                        },
                        other => other.clone(),
                    })
                    .collect();
                gt.push_with_id(row.id.clone(), image).map_err(TranslateError::Table)?;
            }
            tables.push(gt);
        }
        let mut global_atoms = Vec::new();
        for atom in theta.atoms() {
            if atom.op != AtomOp::Neq {
                continue;
            }
            let l = state.representative(&atom.left);
            let r = state.representative(&atom.right);
            let a = Atom::neq(l, r);
            match a.fixed_truth() {
                Some(true) => {}
                Some(false) => unreachable!("consistent entry"),
                None => global_atoms.push(a),
            }
        }
        members.push(GMultitable::new(tables, Conjunction::new(global_atoms)));
    }
    Ok((Tabset::new(members)?, atlas))
}

/// Wide schema matching a conditional multitable's own identifiers; every
/// relation gets at least one slot so the schema stays non-nullary.
pub fn wide_schema_for(t: &CMultitable) -> WideSchema {
    WideSchema::new(
        t.tables
            .iter()
            .map(|tab| (tab.name.clone(), tab.schema.clone(), tab.rows.len().max(1)))
            .collect(),
    )
}

/// Inlines a tabset into a single-component decomposition. Member global
/// conditions are conjoined as-is: members produced by [`c_to_gtabset`] share
/// variables deliberately, and each member's own atoms already confine its
/// row. Independent tabsets should first pass through
/// [`crate::tst::normalize_global`].
pub fn gtabset_to_gwsd(ts: &Tabset, wide: &WideSchema) -> Result<Gwsd, TranslateError> {
    let gtst = inline_tabset(ts, wide)?;
    let phi = gtst
        .lambda
        .iter()
        .fold(Conjunction::empty(), |acc, c| acc.and(c));
    let component = Component::new(wide.schema(), gtst.rows).map_err(TranslateError::Wsd)?;
    Gwsd::new(wide.clone(), vec![component], phi).map_err(TranslateError::Wsd)
}

/// Full pipeline: conditional multitable to an equivalent single-component
/// decomposition.
pub fn c_to_gwsd(t: &CMultitable, cap: usize) -> Result<(Gwsd, ThetaAtlas), TranslateError> {
    let (tabset, atlas) = c_to_gtabset(t, cap)?;
    let wide = wide_schema_for(t);
    let w = gtabset_to_gwsd(&tabset, &wide)?;
    Ok((w, atlas))
}

/// Budget guarding the verification enumerations inside the simplifier.
const SIMPLIFY_MAX_VALUATIONS: u64 = 200_000;

/// Best-effort simplification: drops component rows and global atoms whenever
/// bounded enumeration proves the representation unchanged. Inputs too large
/// to verify are returned untouched.
pub fn simplify_gwsd(w: &Gwsd) -> Gwsd {
    let pool = crate::wsd::wsd_pool(w, w.variables().len());
    let baseline = match rep_enumerate_wsd(w, &pool, SIMPLIFY_MAX_VALUATIONS) {
        Ok(b) => b,
        Err(_) => return w.clone(),
    };
    let mut current = w.clone();
    loop {
        let mut changed = false;

        // Try dropping a global atom; relaxations may merge rows into one
        // another, making rows removable below.
        let atoms = current.global.atoms().to_vec();
        for drop in 0..atoms.len() {
            let global = Conjunction::new(
                atoms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != drop)
                    .map(|(_, a)| a.clone())
                    .collect(),
            );
            let candidate = Gwsd { global, ..current.clone() };
            if let Ok(rep) = rep_enumerate_wsd(&candidate, &pool, SIMPLIFY_MAX_VALUATIONS) {
                if rep == baseline {
                    current = candidate;
                    changed = true;
                    break;
                }
            }
        }
        if changed {
            continue;
        }

        // Try removing a subsumed component row.
        'rows: for ci in 0..current.components.len() {
            for ri in 0..current.components[ci].rows.len() {
                let mut candidate = current.clone();
                candidate.components[ci].rows.remove(ri);
                if let Ok(rep) = rep_enumerate_wsd(&candidate, &pool, SIMPLIFY_MAX_VALUATIONS) {
                    if rep == baseline {
                        current = candidate;
                        changed = true;
                        break 'rows;
                    }
                }
            }
        }
        if !changed {
            return current;
        }
    }
}

/// Structural size bound used by tests: the translated multitable never holds
/// more tuples than the decomposition has slot occurrences.
pub fn slot_occurrences(w: &Gwsd) -> usize {
    w.components.iter().map(|c| c.rows.len()).sum::<usize>() * w.wide.slots().len()
}
