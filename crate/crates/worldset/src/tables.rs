//! Conditional multitables and their restrictions, with validity checks,
//! normal forms, and a bounded world-enumeration oracle for `rep`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::cond::{
    eval_condition, satisfiable_conjunction, Atom, AtomOp, Condition, Conjunction,
    ConstraintState, MutexSet, Term, Valuation,
};
use crate::rel::Relation;
use crate::value::{Schema, Tuple, Value};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("table error: {0}")]
    Table(String),
}

/// One row of a conditional table: a tuple with its identifier and local
/// condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CRow {
    pub id: String,
    pub tuple: Tuple,
    pub local: Condition,
}

/// A named table over constants and variables, rows in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CTable {
    pub name: String,
    pub schema: Schema,
    pub rows: Vec<CRow>,
}

impl CTable {
    pub fn new(name: impl Into<String>, schema: Schema) -> Self {
        CTable { name: name.into(), schema, rows: Vec::new() }
    }

    pub fn push(&mut self, tuple: Tuple, local: Condition) -> Result<(), TableError> {
        if tuple.len() != self.schema.arity() {
            return Err(TableError::Table(format!(
                "tuple arity {} does not match schema of {}",
                tuple.len(),
                self.name
            )));
        }
        if tuple.iter().any(Value::is_bottom) {
            return Err(TableError::Table(format!(
                "the bottom symbol cannot appear in conditional table {}",
                self.name
            )));
        }
        let id = format!("d{}", self.rows.len() + 1);
        self.rows.push(CRow { id, tuple, local });
        Ok(())
    }
}

/// A c-multitable: named tables plus a global condition and per-tuple local
/// conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CMultitable {
    pub tables: Vec<CTable>,
    pub global: Condition,
}

impl CMultitable {
    pub fn new(tables: Vec<CTable>, global: Condition) -> Self {
        CMultitable { tables, global }
    }

    pub fn table(&self, name: &str) -> Option<&CTable> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut vars = self.global.variables();
        for t in &self.tables {
            for row in &t.rows {
                vars.extend(row.local.variables());
                for v in &row.tuple {
                    if let Some(x) = v.as_variable() {
                        vars.insert(x.to_string());
                    }
                }
            }
        }
        vars
    }

    pub fn active_domain(&self) -> BTreeSet<String> {
        let mut cs = self.global.constants();
        for t in &self.tables {
            for row in &t.rows {
                cs.extend(row.local.constants());
                for v in &row.tuple {
                    if let Some(c) = v.as_constant() {
                        cs.insert(c.to_string());
                    }
                }
            }
        }
        cs
    }
}

/// A row of a condition-free table: tuple plus its identifier. Identifiers
/// fix the correspondence between tuples of different worlds and drive the
/// slot placement when tabsets are inlined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GRow {
    pub id: String,
    pub tuple: Tuple,
}

/// A table without local conditions, rows in input order and duplicate-free
/// as a tuple set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GTable {
    pub name: String,
    pub schema: Schema,
    pub rows: Vec<GRow>,
}

impl GTable {
    pub fn new(name: impl Into<String>, schema: Schema) -> Self {
        GTable { name: name.into(), schema, rows: Vec::new() }
    }

    pub fn push(&mut self, tuple: Tuple) -> Result<(), TableError> {
        let id = format!("d{}", self.rows.len() + 1);
        self.push_with_id(id, tuple)
    }

    pub fn push_with_id(&mut self, id: impl Into<String>, tuple: Tuple) -> Result<(), TableError> {
        if tuple.len() != self.schema.arity() {
            return Err(TableError::Table(format!(
                "tuple arity {} does not match schema of {}",
                tuple.len(),
                self.name
            )));
        }
        if !self.rows.iter().any(|r| r.tuple == tuple) {
            self.rows.push(GRow { id: id.into(), tuple });
        }
        Ok(())
    }

    pub fn tuples(&self) -> impl Iterator<Item = &Tuple> {
        self.rows.iter().map(|r| &r.tuple)
    }
}

/// A g-multitable: no local conditions, global condition a conjunction of
/// negated equalities (normal form).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GMultitable {
    pub tables: Vec<GTable>,
    pub global: Conjunction,
}

impl GMultitable {
    pub fn new(tables: Vec<GTable>, global: Conjunction) -> Self {
        GMultitable { tables, global }
    }

    /// The canonical unsatisfiable global marking the empty world-set.
    pub fn empty_world_set_marker() -> Conjunction {
        Conjunction::new(vec![Atom::neq(Term::var("x"), Term::var("x"))])
    }

    pub fn as_cmultitable(&self) -> CMultitable {
        let tables = self
            .tables
            .iter()
            .map(|t| {
                let mut ct = CTable::new(t.name.clone(), t.schema.clone());
                for row in &t.rows {
                    ct.push(row.tuple.clone(), Condition::True).expect("arity preserved");
                }
                ct
            })
            .collect();
        CMultitable::new(tables, self.global.to_condition())
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.as_cmultitable().variables()
    }
}

/// A v-multitable: relations only, no conditions anywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VMultitable {
    pub tables: Vec<GTable>,
}

impl VMultitable {
    pub fn as_gmultitable(&self) -> GMultitable {
        GMultitable::new(self.tables.clone(), Conjunction::empty())
    }
}

/// One row of a mutex-conditioned table: the local condition is a conjunction
/// of atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XRow {
    pub tuple: Tuple,
    pub local: Conjunction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XTable {
    pub name: String,
    pub schema: Schema,
    pub rows: Vec<XRow>,
}

impl XTable {
    pub fn new(name: impl Into<String>, schema: Schema) -> Self {
        XTable { name: name.into(), schema, rows: Vec::new() }
    }

    pub fn push(&mut self, tuple: Tuple, local: Conjunction) {
        let row = XRow { tuple, local };
        if !self.rows.contains(&row) {
            self.rows.push(row);
        }
    }
}

/// An x-multitable: a c-multitable whose global condition is a conjunction of
/// negated equalities and whose local conditions are conjunctions of mutex-set
/// formulas and equalities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XMultitable {
    pub tables: Vec<XTable>,
    pub global: Conjunction,
    pub mutex: MutexSet,
}

impl XMultitable {
    pub fn as_cmultitable(&self) -> CMultitable {
        let tables = self
            .tables
            .iter()
            .map(|t| {
                let mut ct = CTable::new(t.name.clone(), t.schema.clone());
                for row in &t.rows {
                    ct.push(row.tuple.clone(), row.local.to_condition())
                        .expect("arity preserved");
                }
                ct
            })
            .collect();
        CMultitable::new(tables, self.global.to_condition())
    }

    pub fn table(&self, name: &str) -> Option<&XTable> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Checks the three x-multitable clauses: negated-equality global, local
/// conditions built from mutex formulas plus equalities, and mutex variables
/// absent from tuples and the global condition.
pub fn validate_x(x: &XMultitable) -> bool {
    // Clause 1: global is a conjunction of negated equalities.
    if !x.global.only_neq() {
        return false;
    }
    // Clause 3: mutex variables occur in no relation and not in the global.
    for v in x.global.variables() {
        if x.mutex.contains_var(&v) {
            return false;
        }
    }
    for t in &x.tables {
        for row in &t.rows {
            for cell in &row.tuple {
                if let Some(v) = cell.as_variable() {
                    if x.mutex.contains_var(v) {
                        return false;
                    }
                }
            }
        }
    }
    // Clause 2: locals are conjunctions of mutex formulas and equalities.
    for t in &x.tables {
        for row in &t.rows {
            let mut per_var: BTreeMap<String, Vec<&Atom>> = BTreeMap::new();
            for atom in row.local.atoms() {
                let mutex_vars: Vec<&str> = atom
                    .terms()
                    .iter()
                    .filter_map(|t| match t {
                        Term::Var(v) if x.mutex.contains_var(v) => Some(v.as_str()),
                        _ => None,
                    })
                    .collect();
                match mutex_vars.len() {
                    0 => {
                        if atom.op != AtomOp::Eq {
                            return false;
                        }
                    }
                    1 => {
                        per_var.entry(mutex_vars[0].to_string()).or_default().push(atom);
                    }
                    _ => return false,
                }
            }
            for (v, atoms) in per_var {
                let mu = x.mutex.mu(&v).expect("mutex variable");
                // Each equality must be a mutex member formula; the negated
                // equalities, if any, must form exactly the full block (the
                // only negated member formula). Several member formulas may
                // be conjoined.
                let eq_ok = atoms.iter().filter(|a| a.op == AtomOp::Eq).all(|a| {
                    matches!(&a.right, Term::Const(c)
                        if c.parse::<usize>().is_ok_and(|i| i >= 1 && i <= mu))
                });
                let neqs: BTreeSet<&Atom> =
                    atoms.iter().copied().filter(|a| a.op == AtomOp::Neq).collect();
                let block = x.mutex.cond(&v, mu + 1).expect("bounds");
                let want: BTreeSet<&Atom> = block.atoms().iter().collect();
                let neq_ok = neqs.is_empty() || neqs == want;
                if !(eq_ok && neq_ok) {
                    return false;
                }
            }
        }
    }
    true
}

/// Normalizes a multitable with a mixed equality/inequality global into
/// g-multitable normal form: equalities are eliminated by substituting class
/// representatives into the relations; only negated equalities remain.
pub fn normalize_g(tables: &[GTable], global: &Conjunction) -> GMultitable {
    let mut state = ConstraintState::new();
    let mut consistent = true;
    for atom in global.atoms() {
        if !state.assert_atom(atom) {
            consistent = false;
            break;
        }
    }
    if consistent && !state.consistent() {
        consistent = false;
    }
    if !consistent {
        let emptied = tables
            .iter()
            .map(|t| GTable::new(t.name.clone(), t.schema.clone()))
            .collect();
        return GMultitable::new(emptied, GMultitable::empty_world_set_marker());
    }

    let mut subst = |v: &Value| -> Value {
        match v {
            Value::Variable(x) => match state.representative(&Term::var(x.clone())) {
                Term::Const(c) => Value::constant(c),
                Term::Var(y) => Value::variable(y),
            },
            other => other.clone(),
        }
    };
    let new_tables: Vec<GTable> = tables
        .iter()
        .map(|t| {
            let mut nt = GTable::new(t.name.clone(), t.schema.clone());
            for row in &t.rows {
                nt.push_with_id(row.id.clone(), row.tuple.iter().map(&mut subst).collect())
                    .expect("same arity");
            }
            nt
        })
        .collect();

    let mut atoms = Vec::new();
    for atom in global.atoms() {
        if atom.op == AtomOp::Eq {
            continue; // absorbed into the substitution
        }
        let l = state.representative(&atom.left);
        let r = state.representative(&atom.right);
        let a = Atom::neq(l, r);
        match a.fixed_truth() {
            Some(true) => {}
            Some(false) => unreachable!("state was consistent"),
            None => atoms.push(a),
        }
    }
    GMultitable::new(new_tables, Conjunction::new(atoms))
}

/// A concrete database: named relations over constants only.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct World {
    rels: BTreeMap<String, Relation>,
}

impl World {
    pub fn new(rels: BTreeMap<String, Relation>) -> Self {
        World { rels }
    }

    pub fn single(name: impl Into<String>, rel: Relation) -> Self {
        let mut rels = BTreeMap::new();
        rels.insert(name.into(), rel);
        World { rels }
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.rels.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&String, &Relation)> {
        self.rels.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.rels.values().all(Relation::is_empty)
    }
}

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "world {{")?;
        for (name, rel) in &self.rels {
            let mut rows: Vec<String> = rel
                .tuples()
                .map(|t| crate::value::tuple_to_string(t))
                .collect();
            rows.sort();
            writeln!(f, "  relation {} {} {{ {} }}", name, rel.schema(), rows.join(" "))?;
        }
        write!(f, "}}")
    }
}

/// Controls the constant pool used by bounded world enumeration.
#[derive(Debug, Clone)]
pub struct EnumBudget {
    /// Constants added to the active domain (for example query constants).
    pub extra: BTreeSet<String>,
    /// Number of fresh constants; defaults to the number of variables.
    pub fresh: Option<usize>,
    /// Hard cap on the number of valuations tried.
    pub max_valuations: u64,
}

impl Default for EnumBudget {
    fn default() -> Self {
        EnumBudget { extra: BTreeSet::new(), fresh: None, max_valuations: 4_000_000 }
    }
}

impl EnumBudget {
    pub fn with_fresh(k: usize) -> Self {
        EnumBudget { fresh: Some(k), ..EnumBudget::default() }
    }
}

/// Generates `k` fresh constants avoiding collisions with `used`.
pub fn fresh_constants(used: &BTreeSet<String>, k: usize) -> Vec<String> {
    (1..)
        .map(|i| format!("f{i}"))
        .filter(|c| !used.contains(c))
        .take(k)
        .collect()
}

/// The enumeration pool for a multitable under a budget: active domain plus
/// extra constants plus fresh constants.
pub fn enumeration_pool(t: &CMultitable, budget: &EnumBudget) -> Vec<String> {
    let mut pool = t.active_domain();
    pool.extend(budget.extra.iter().cloned());
    let k = budget.fresh.unwrap_or_else(|| t.variables().len());
    let fresh = fresh_constants(&pool, k);
    pool.extend(fresh);
    pool.into_iter().collect()
}

/// A shared pool across several structures, for rep-equivalence tests.
pub fn shared_pool(adoms: &[BTreeSet<String>], fresh: usize) -> Vec<String> {
    let mut pool: BTreeSet<String> = BTreeSet::new();
    for a in adoms {
        pool.extend(a.iter().cloned());
    }
    let fs = fresh_constants(&pool, fresh);
    pool.extend(fs);
    pool.into_iter().collect()
}

/// Enumerates all valuations of the multitable's variables into the pool and
/// returns the set of worlds produced by the satisfying ones. This is the
/// testing oracle behind every equivalence claim in the crate.
pub fn rep_enumerate_pool(
    t: &CMultitable,
    pool: &[String],
    max_valuations: u64,
) -> Result<BTreeSet<World>, TableError> {
    let vars: Vec<String> = t.variables().into_iter().collect();
    if !vars.is_empty() && pool.is_empty() {
        return Err(TableError::Budget("empty constant pool with variables present".into()));
    }
    let total = (pool.len() as u64).checked_pow(vars.len() as u32);
    match total {
        Some(n) if n <= max_valuations => {}
        _ => {
            return Err(TableError::Budget(format!(
                "{} valuations exceed the cap of {}",
                total.map(|n| n.to_string()).unwrap_or_else(|| "overflowing".into()),
                max_valuations
            )))
        }
    }

    let mut worlds = BTreeSet::new();
    let mut counters = vec![0usize; vars.len()];
    loop {
        let valuation: Valuation = vars
            .iter()
            .zip(&counters)
            .map(|(v, &i)| (v.clone(), pool[i].clone()))
            .collect();
        if eval_condition(&t.global, &valuation).map_err(|e| TableError::Table(e.to_string()))? {
            worlds.insert(apply_valuation(t, &valuation)?);
        }
        // Advance the mixed-radix counter; done once every digit rolls over.
        let mut k = 0;
        loop {
            if k == counters.len() {
                return Ok(worlds);
            }
            counters[k] += 1;
            if counters[k] < pool.len() {
                break;
            }
            counters[k] = 0;
            k += 1;
        }
    }
}

fn apply_valuation(t: &CMultitable, v: &Valuation) -> Result<World, TableError> {
    let mut rels = BTreeMap::new();
    for table in &t.tables {
        let mut rel = Relation::empty(table.schema.clone());
        for row in &table.rows {
            if eval_condition(&row.local, v).map_err(|e| TableError::Table(e.to_string()))? {
                let image: Tuple = row
                    .tuple
                    .iter()
                    .map(|cell| match cell {
                        Value::Variable(x) => Value::constant(
                            v.get(x).cloned().expect("valuation total on table variables"),
                        ),
                        other => other.clone(),
                    })
                    .collect();
                rel.insert(image).map_err(|e| TableError::Table(e.to_string()))?;
            }
        }
        rels.insert(table.name.clone(), rel);
    }
    Ok(World::new(rels))
}

/// Bounded enumeration with the default pool construction.
pub fn rep_enumerate(t: &CMultitable, budget: &EnumBudget) -> Result<BTreeSet<World>, TableError> {
    let pool = enumeration_pool(t, budget);
    rep_enumerate_pool(t, &pool, budget.max_valuations)
}

/// True when the global condition of a g-multitable admits a satisfying
/// valuation.
pub fn g_satisfiable(g: &GMultitable) -> bool {
    satisfiable_conjunction(&g.global).is_some()
}
