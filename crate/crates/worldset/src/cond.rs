//! Condition language over variables and constants: evaluation, satisfiability
//! of (in)equality conjunctions over an infinite domain, entailment against
//! complete conjunctions, and mutex sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::value::Value;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CondError {
    #[error("unbound variable in valuation: {0}")]
    Valuation(String),
    #[error("conjunction does not fix the pair ({0}, {1})")]
    Completeness(String, String),
    #[error("mutex sizes must be positive, got {0}")]
    Range(usize),
}

/// A condition term: a variable or a constant. The bottom symbol never
/// appears in conditions. Constants order before variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Var(String),
}

impl Term {
    pub fn var(s: impl Into<String>) -> Self {
        Term::Var(s.into())
    }

    pub fn cons(s: impl Into<String>) -> Self {
        Term::Const(s.into())
    }

    pub fn from_value(v: &Value) -> Option<Term> {
        match v {
            Value::Variable(x) => Some(Term::Var(x.clone())),
            Value::Constant(c) => Some(Term::Const(c.clone())),
            Value::Bottom => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Const(c) => {
                if !c.is_empty() && c.bytes().all(|b| b.is_ascii_digit()) {
                    write!(f, "{c}")
                } else {
                    write!(f, "\"{c}\"")
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomOp {
    Eq,
    Neq,
}

/// An atomic condition `t (=|!=) t'`; stored with the variable side first
/// and operands ordered, so equal atoms compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub left: Term,
    pub op: AtomOp,
    pub right: Term,
}

impl Atom {
    pub fn new(left: Term, op: AtomOp, right: Term) -> Self {
        // Both operators are symmetric; canonicalize with the variable side
        // first, otherwise ordered operands.
        let (left, right) = match (&left, &right) {
            (Term::Const(_), Term::Var(_)) => (right, left),
            (Term::Var(_), Term::Const(_)) => (left, right),
            _ => {
                if left <= right {
                    (left, right)
                } else {
                    (right, left)
                }
            }
        };
        Atom { left, op, right }
    }

    pub fn eq(l: Term, r: Term) -> Self {
        Atom::new(l, AtomOp::Eq, r)
    }

    pub fn neq(l: Term, r: Term) -> Self {
        Atom::new(l, AtomOp::Neq, r)
    }

    /// True for atoms like `x = x` or `1 != 2` whose truth is fixed.
    pub fn fixed_truth(&self) -> Option<bool> {
        match (&self.left, &self.right) {
            (a, b) if a == b => Some(self.op == AtomOp::Eq),
            (Term::Const(a), Term::Const(b)) if a != b => Some(self.op == AtomOp::Neq),
            _ => None,
        }
    }

    pub fn terms(&self) -> [&Term; 2] {
        [&self.left, &self.right]
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            AtomOp::Eq => "=",
            AtomOp::Neq => "!=",
        };
        write!(f, "{} {} {}", self.left, op, self.right)
    }
}

/// A finite conjunction of atoms, canonically sorted and deduplicated.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Conjunction {
    atoms: Vec<Atom>,
}

impl Conjunction {
    pub fn new(mut atoms: Vec<Atom>) -> Self {
        atoms.sort();
        atoms.dedup();
        Conjunction { atoms }
    }

    pub fn empty() -> Self {
        Conjunction::default()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn push(&mut self, atom: Atom) {
        if !self.atoms.contains(&atom) {
            self.atoms.push(atom);
            self.atoms.sort();
        }
    }

    pub fn and(&self, other: &Conjunction) -> Conjunction {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Conjunction::new(atoms)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.atoms
            .iter()
            .flat_map(|a| a.terms())
            .filter_map(|t| match t {
                Term::Var(x) => Some(x.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn constants(&self) -> BTreeSet<String> {
        self.atoms
            .iter()
            .flat_map(|a| a.terms())
            .filter_map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn only_neq(&self) -> bool {
        self.atoms.iter().all(|a| a.op == AtomOp::Neq)
    }

    pub fn to_condition(&self) -> Condition {
        if self.atoms.is_empty() {
            Condition::True
        } else {
            let mut it = self.atoms.iter().cloned();
            let first = Condition::Atom(it.next().unwrap());
            it.fold(first, |acc, a| {
                Condition::And(Box::new(acc), Box::new(Condition::Atom(a)))
            })
        }
    }
}

impl fmt::Display for Conjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "true");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, " & ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// A general boolean condition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    True,
    Atom(Atom),
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    Not(Box<Condition>),
}

impl Condition {
    pub fn and(l: Condition, r: Condition) -> Condition {
        Condition::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Condition, r: Condition) -> Condition {
        Condition::Or(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Condition) -> Condition {
        Condition::Not(Box::new(c))
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |a| {
            for t in a.terms() {
                if let Term::Var(x) = t {
                    out.insert(x.clone());
                }
            }
        });
        out
    }

    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |a| {
            for t in a.terms() {
                if let Term::Const(c) = t {
                    out.insert(c.clone());
                }
            }
        });
        out
    }

    fn walk(&self, f: &mut impl FnMut(&Atom)) {
        match self {
            Condition::True => {}
            Condition::Atom(a) => f(a),
            Condition::And(l, r) | Condition::Or(l, r) => {
                l.walk(f);
                r.walk(f);
            }
            Condition::Not(c) => c.walk(f),
        }
    }

    /// Flattens to a conjunction of atoms when the condition is a pure
    /// conjunction (`!=` written as negated equality is accepted).
    pub fn as_conjunction(&self) -> Option<Conjunction> {
        let mut atoms = Vec::new();
        if self.collect_conj(&mut atoms) {
            Some(Conjunction::new(atoms))
        } else {
            None
        }
    }

    fn collect_conj(&self, out: &mut Vec<Atom>) -> bool {
        match self {
            Condition::True => true,
            Condition::Atom(a) => {
                out.push(a.clone());
                true
            }
            Condition::And(l, r) => l.collect_conj(out) && r.collect_conj(out),
            Condition::Not(inner) => match inner.as_ref() {
                Condition::Atom(a) => {
                    let op = match a.op {
                        AtomOp::Eq => AtomOp::Neq,
                        AtomOp::Neq => AtomOp::Eq,
                    };
                    out.push(Atom::new(a.left.clone(), op, a.right.clone()));
                    true
                }
                _ => false,
            },
            Condition::Or(_, _) => false,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(c: &Condition, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
            match c {
                Condition::True => write!(f, "true"),
                Condition::Atom(a) => write!(f, "{a}"),
                Condition::And(l, r) => {
                    if prec > 1 {
                        write!(f, "(")?;
                    }
                    go(l, f, 1)?;
                    write!(f, " & ")?;
                    go(r, f, 2)?;
                    if prec > 1 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                Condition::Or(l, r) => {
                    if prec > 0 {
                        write!(f, "(")?;
                    }
                    go(l, f, 0)?;
                    write!(f, " | ")?;
                    go(r, f, 1)?;
                    if prec > 0 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                Condition::Not(inner) => {
                    write!(f, "!(")?;
                    go(inner, f, 0)?;
                    write!(f, ")")
                }
            }
        }
        go(self, f, 0)
    }
}

/// A total finite mapping from variables to constants.
pub type Valuation = BTreeMap<String, String>;

/// Standard boolean evaluation of a condition under a valuation.
pub fn eval_condition(c: &Condition, v: &Valuation) -> Result<bool, CondError> {
    let resolve = |t: &Term| -> Result<String, CondError> {
        match t {
            Term::Const(c) => Ok(c.clone()),
            Term::Var(x) => v.get(x).cloned().ok_or_else(|| CondError::Valuation(x.clone())),
        }
    };
    match c {
        Condition::True => Ok(true),
        Condition::Atom(a) => {
            let l = resolve(&a.left)?;
            let r = resolve(&a.right)?;
            Ok(match a.op {
                AtomOp::Eq => l == r,
                AtomOp::Neq => l != r,
            })
        }
        Condition::And(l, r) => Ok(eval_condition(l, v)? && eval_condition(r, v)?),
        Condition::Or(l, r) => Ok(eval_condition(l, v)? || eval_condition(r, v)?),
        Condition::Not(inner) => Ok(!eval_condition(inner, v)?),
    }
}

/// Union-find over terms with disequality edges, for reasoning about
/// conjunctions of (in)equalities over an infinite domain.
#[derive(Debug, Clone, Default)]
pub struct ConstraintState {
    terms: Vec<Term>,
    index: BTreeMap<Term, usize>,
    parent: Vec<usize>,
    /// Constant pinned to an equivalence class, keyed by root.
    class_const: BTreeMap<usize, String>,
    /// Asserted disequalities, by term index.
    diseqs: Vec<(usize, usize)>,
}

impl ConstraintState {
    pub fn new() -> Self {
        ConstraintState::default()
    }

    pub fn intern(&mut self, t: &Term) -> usize {
        if let Some(&i) = self.index.get(t) {
            return i;
        }
        let i = self.terms.len();
        self.terms.push(t.clone());
        self.index.insert(t.clone(), i);
        self.parent.push(i);
        if let Term::Const(c) = t {
            self.class_const.insert(i, c.clone());
        }
        i
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Asserts `a = b`; returns false when this makes the state inconsistent.
    pub fn assert_eq(&mut self, a: &Term, b: &Term) -> bool {
        let (ia, ib) = (self.intern(a), self.intern(b));
        let (ra, rb) = (self.find(ia), self.find(ib));
        if ra == rb {
            return true;
        }
        match (self.class_const.get(&ra).cloned(), self.class_const.get(&rb).cloned()) {
            (Some(x), Some(y)) if x != y => return false,
            (Some(x), _) => {
                self.parent[rb] = ra;
                self.class_const.insert(ra, x);
            }
            (None, Some(y)) => {
                self.parent[ra] = rb;
                self.class_const.insert(rb, y);
            }
            (None, None) => {
                self.parent[rb] = ra;
            }
        }
        self.consistent()
    }

    /// Asserts `a != b`; returns false when this makes the state inconsistent.
    pub fn assert_neq(&mut self, a: &Term, b: &Term) -> bool {
        let (ia, ib) = (self.intern(a), self.intern(b));
        let (ra, rb) = (self.find(ia), self.find(ib));
        if ra == rb {
            return false;
        }
        self.diseqs.push((ia, ib));
        true
    }

    pub fn assert_atom(&mut self, atom: &Atom) -> bool {
        match atom.op {
            AtomOp::Eq => self.assert_eq(&atom.left.clone(), &atom.right.clone()),
            AtomOp::Neq => self.assert_neq(&atom.left.clone(), &atom.right.clone()),
        }
    }

    pub fn consistent(&mut self) -> bool {
        for k in 0..self.diseqs.len() {
            let (a, b) = self.diseqs[k];
            if self.find(a) == self.find(b) {
                return false;
            }
        }
        true
    }

    /// Derivable relation between two terms: `Some(true)` when forced equal,
    /// `Some(false)` when forced distinct, `None` when open.
    pub fn relation(&mut self, a: &Term, b: &Term) -> Option<bool> {
        let (ia, ib) = (self.intern(a), self.intern(b));
        let (ra, rb) = (self.find(ia), self.find(ib));
        if ra == rb {
            return Some(true);
        }
        if let (Some(x), Some(y)) = (self.class_const.get(&ra), self.class_const.get(&rb)) {
            if x != y {
                return Some(false);
            }
        }
        for k in 0..self.diseqs.len() {
            let (a, b) = self.diseqs[k];
            let (qa, qb) = (self.find(a), self.find(b));
            if (qa, qb) == (ra, rb) || (qa, qb) == (rb, ra) {
                return Some(false);
            }
        }
        None
    }

    /// The constant forced onto a term's class, if any.
    pub fn forced_constant(&mut self, t: &Term) -> Option<String> {
        let i = self.intern(t);
        let r = self.find(i);
        self.class_const.get(&r).cloned()
    }

    /// The representative of a variable's class: its forced constant, or the
    /// least variable in the class.
    pub fn representative(&mut self, t: &Term) -> Term {
        if let Some(c) = self.forced_constant(t) {
            return Term::Const(c);
        }
        let i = self.intern(t);
        let r = self.find(i);
        let mut best: Option<Term> = None;
        for j in 0..self.terms.len() {
            if self.find(j) != r {
                continue;
            }
            if let Term::Var(_) = &self.terms[j] {
                if best.as_ref().is_none_or(|b| &self.terms[j] < b) {
                    best = Some(self.terms[j].clone());
                }
            }
        }
        best.unwrap_or_else(|| t.clone())
    }

    /// A witness valuation for the variables known to the state: class
    /// constants where forced, else deterministically generated fresh
    /// constants distinct from everything mentioned.
    pub fn witness(&mut self) -> Valuation {
        let used: BTreeSet<String> = self
            .terms
            .iter()
            .filter_map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                _ => None,
            })
            .collect();
        let mut fresh_iter = (1..).map(|i| format!("w{i}")).filter(|c| !used.contains(c));
        let mut class_fresh: BTreeMap<usize, String> = BTreeMap::new();
        let mut out = Valuation::new();
        for j in 0..self.terms.len() {
            if let Term::Var(x) = self.terms[j].clone() {
                let r = self.find(j);
                let c = if let Some(c) = self.class_const.get(&r) {
                    c.clone()
                } else {
                    class_fresh
                        .entry(r)
                        .or_insert_with(|| fresh_iter.next().expect("unbounded fresh supply"))
                        .clone()
                };
                out.insert(x, c);
            }
        }
        out
    }
}

/// Decides satisfiability of a conjunction over the infinite domain and
/// returns a witness valuation when satisfiable.
pub fn satisfiable_conjunction(c: &Conjunction) -> Option<Valuation> {
    let mut state = ConstraintState::new();
    for atom in c.atoms() {
        if !state.assert_atom(atom) {
            return None;
        }
    }
    if !state.consistent() {
        return None;
    }
    Some(state.witness())
}

/// Decides whether every model of the complete conjunction `theta` satisfies
/// `psi`. `theta` must fix the relation of every pair of terms of `psi`.
pub fn entails(theta: &Conjunction, psi: &Condition) -> Result<bool, CondError> {
    let mut state = ConstraintState::new();
    for atom in theta.atoms() {
        if !state.assert_atom(atom) {
            // No models: entailment holds vacuously.
            return Ok(true);
        }
    }
    if !state.consistent() {
        return Ok(true);
    }
    let mut terms: BTreeSet<Term> = BTreeSet::new();
    psi.walk(&mut |a| {
        terms.insert(a.left.clone());
        terms.insert(a.right.clone());
    });
    let terms: Vec<Term> = terms.into_iter().collect();
    for (i, a) in terms.iter().enumerate() {
        for b in terms.iter().skip(i + 1) {
            if state.relation(a, b).is_none() {
                return Err(CondError::Completeness(a.to_string(), b.to_string()));
            }
        }
    }
    fn eval_in(state: &mut ConstraintState, c: &Condition) -> bool {
        match c {
            Condition::True => true,
            Condition::Atom(a) => {
                let forced = state.relation(&a.left, &a.right).expect("completeness checked");
                match a.op {
                    AtomOp::Eq => forced,
                    AtomOp::Neq => !forced,
                }
            }
            Condition::And(l, r) => eval_in(state, l) && eval_in(state, r),
            Condition::Or(l, r) => eval_in(state, l) || eval_in(state, r),
            Condition::Not(inner) => !eval_in(state, inner),
        }
    }
    Ok(eval_in(&mut state, psi))
}

/// A mutex set: per variable a family of conditions of which every valuation
/// satisfies exactly one.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MutexSet {
    /// Variables in introduction order with their bounds.
    entries: Vec<(String, usize)>,
}

impl MutexSet {
    pub fn empty() -> Self {
        MutexSet::default()
    }

    pub fn with_entries(entries: Vec<(String, usize)>) -> Result<Self, CondError> {
        for (_, mu) in &entries {
            if *mu == 0 {
                return Err(CondError::Range(0));
            }
        }
        Ok(MutexSet { entries })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(v, _)| v.as_str())
    }

    pub fn contains_var(&self, v: &str) -> bool {
        self.entries.iter().any(|(x, _)| x == v)
    }

    pub fn mu(&self, v: &str) -> Option<usize> {
        self.entries.iter().find(|(x, _)| x == v).map(|(_, m)| *m)
    }

    /// The alternative formula selected by world index `i` (1-based) for
    /// variable `v`: `v = i` for `i <= mu(v)` and the full negation block for
    /// `i = mu(v) + 1`.
    pub fn cond(&self, v: &str, i: usize) -> Option<Conjunction> {
        let mu = self.mu(v)?;
        if i == 0 || i > mu + 1 {
            return None;
        }
        if i <= mu {
            Some(Conjunction::new(vec![Atom::eq(Term::var(v), Term::cons(i.to_string()))]))
        } else {
            Some(Conjunction::new(
                (1..=mu)
                    .map(|l| Atom::neq(Term::var(v), Term::cons(l.to_string())))
                    .collect(),
            ))
        }
    }

    /// Every member formula: `true`, each equality, and each negation block.
    pub fn formulas(&self) -> Vec<Conjunction> {
        let mut out = vec![Conjunction::empty()];
        for (v, mu) in &self.entries {
            for i in 1..=*mu {
                out.push(self.cond(v, i).expect("bounds checked"));
            }
            out.push(self.cond(v, mu + 1).expect("bounds checked"));
        }
        out
    }
}

/// Builds a mutex set with fresh variables `x1..xk` and the given bounds.
pub fn mutex_build(sizes: &[usize]) -> Result<MutexSet, CondError> {
    let entries = sizes
        .iter()
        .enumerate()
        .map(|(j, &mu)| (format!("x{}", j + 1), mu))
        .collect();
    MutexSet::with_entries(entries)
}
