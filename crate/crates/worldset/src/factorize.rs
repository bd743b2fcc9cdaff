//! Relational prime factorization and its application to minimizing
//! decompositions: the recursive halving algorithm, the division-based factor
//! test, a low-memory variant holding temporaries as selection predicates,
//! the exponential powerset oracle, and maximal decomposition of components.


use thiserror::Error;

use crate::rel::{CmpOp, RelError, Relation, SelAtom, SelRhs};
use crate::value::{AttrName, Schema, Tuple, Value};
use crate::wsd::{Component, Gwsd, Level, WsdError};

#[derive(Debug, Error)]
pub enum FactorizeError {
    #[error("arity {0} exceeds the powerset oracle cap of {1}")]
    Cap(usize, usize),
    #[error(transparent)]
    Rel(#[from] RelError),
    #[error(transparent)]
    Wsd(#[from] WsdError),
    #[error("tuple-level packing requires a tuple-level decomposition")]
    Level,
}

/// A set of factor relations over disjoint schemata whose product equals the
/// factorized relation. Factors are kept sorted by their first attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    factors: Vec<Relation>,
}

impl Factorization {
    fn new(mut factors: Vec<Relation>) -> Self {
        factors.sort_by(|a, b| a.schema().attrs()[0].cmp(&b.schema().attrs()[0]));
        Factorization { factors }
    }

    pub fn factors(&self) -> &[Relation] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// The product of all factors, reordered to the given schema.
    pub fn recompose(&self, schema: &Schema) -> Result<Relation, RelError> {
        let product = crate::rel::product_all(&self.factors)?
            .expect("factorizations are non-empty");
        product.project(schema.attrs())
    }
}

/// True when `f` is a factor of `r`, by the projection test: the projection
/// of `r` onto the factor's schema equals `f` and the cardinalities multiply
/// back to `|r|`.
pub fn divides(f: &Relation, r: &Relation) -> bool {
    if f.schema().same_set(r.schema()) {
        let aligned = match r.project(f.schema().attrs()) {
            Ok(rel) => rel,
            Err(_) => return false,
        };
        return &aligned == f;
    }
    if !f.schema().subset_of(r.schema()) || f.is_empty() {
        return false;
    }
    let proj = match r.project(f.schema().attrs()) {
        Ok(p) => p,
        Err(_) => return false,
    };
    if &proj != f {
        return false;
    }
    let rest: Vec<AttrName> = r
        .schema()
        .attrs()
        .iter()
        .filter(|a| !f.schema().contains(a))
        .cloned()
        .collect();
    let rest_proj = match r.project(&rest) {
        Ok(p) => p,
        Err(_) => return false,
    };
    f.len() * rest_proj.len() == r.len()
}

/// Picks a pivot among qualifying candidates; `0` gives the lexicographically
/// least attribute/value pair.
pub type PivotPicker<'a> = &'a mut dyn FnMut(usize) -> usize;

/// Prime factorization with the default lexicographic pivot policy.
pub fn factorize_prime(s: &Relation) -> Factorization {
    factorize_prime_with(s, &mut |_| 0)
}

/// Prime factorization with an explicit pivot policy. The result is
/// independent of the policy; the policy only steers the recursion.
pub fn factorize_prime_with(s: &Relation, picker: PivotPicker) -> Factorization {
    Factorization::new(prime_rec(s, picker))
}

fn prime_rec(s: &Relation, picker: PivotPicker) -> Vec<Relation> {
    if s.is_empty() {
        // The definitions presuppose non-empty products; the empty relation
        // factorizes as itself.
        return vec![s.clone()];
    }
    let mut factors: Vec<Relation> = Vec::new();
    let mut rest_attrs: Vec<AttrName> = Vec::new();
    for attr in s.schema().attrs() {
        let col = s.project(std::slice::from_ref(attr)).expect("attr of schema");
        if col.len() == 1 {
            factors.push(col);
        } else {
            rest_attrs.push(attr.clone());
        }
    }
    if rest_attrs.is_empty() {
        return factors;
    }
    let s2 = s.project(&rest_attrs).expect("attrs of schema");

    // Pivot: any (A, v) with the selected half no larger than the rest.
    let mut candidates: Vec<(AttrName, Value)> = Vec::new();
    for attr in s2.schema().attrs() {
        let col = s2.project(std::slice::from_ref(attr)).expect("attr of schema");
        for v in col.tuples() {
            let cnt = s2
                .select(&[SelAtom::eq_const(attr.clone(), v[0].clone())])
                .expect("attr of schema")
                .len();
            if cnt * 2 <= s2.len() {
                candidates.push((attr.clone(), v[0].clone()));
            }
        }
    }
    // Every column has at least two values here, so a minority value exists.
    debug_assert!(!candidates.is_empty());
    let (attr, v) = candidates[picker(candidates.len()) % candidates.len()].clone();

    let q = s2.select(&[SelAtom::eq_const(attr.clone(), v.clone())]).expect("pivot attr");
    let r = s2
        .select(&[SelAtom { lhs: attr.clone(), op: CmpOp::Neq, rhs: SelRhs::Const(v) }])
        .expect("pivot attr");

    let mut common: Vec<Relation> = Vec::new();
    for f in prime_rec(&q, picker) {
        if f.schema().same_set(s2.schema()) {
            continue;
        }
        if divides(&f, &r) {
            common.push(f);
        }
    }
    let covered: Relation = match crate::rel::product_all(&common).expect("disjoint schemas") {
        Some(p) => p,
        None => {
            factors.push(s2);
            return factors;
        }
    };
    if covered.schema().same_set(s2.schema()) {
        debug_assert_eq!(
            covered.project(s2.schema().attrs()).expect("same attrs"),
            s2
        );
        factors.extend(common);
        return factors;
    }
    let residue = s2.divide(&covered).expect("proper subset schema");
    debug_assert_eq!(
        residue.product(&covered).and_then(|p| p.project(s2.schema().attrs())).unwrap(),
        s2
    );
    factors.extend(common);
    factors.push(residue);
    factors
}

/// Default arity cap for the exponential oracle.
pub const ORACLE_ARITY_CAP: usize = 8;

/// Exponential-time factorization by powerset search; the independent oracle
/// against which the recursive algorithm is checked.
pub fn powerset_oracle(s: &Relation) -> Result<Factorization, FactorizeError> {
    powerset_oracle_capped(s, ORACLE_ARITY_CAP)
}

pub fn powerset_oracle_capped(s: &Relation, cap: usize) -> Result<Factorization, FactorizeError> {
    if s.schema().arity() > cap {
        return Err(FactorizeError::Cap(s.schema().arity(), cap));
    }
    Ok(Factorization::new(powerset_rec(s)))
}

fn powerset_rec(s: &Relation) -> Vec<Relation> {
    let arity = s.schema().arity();
    if arity == 1 || s.is_empty() {
        return vec![s.clone()];
    }
    let attrs = s.schema().attrs();
    // Proper non-empty subsets; fixing the first attribute in the left part
    // halves the search without losing splits.
    for mask in 0u32..(1 << (arity - 1)) {
        let mask = mask << 1 | 1;
        let left: Vec<AttrName> = (0..arity)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| attrs[i].clone())
            .collect();
        if left.len() == arity {
            continue;
        }
        let right: Vec<AttrName> = (0..arity)
            .filter(|i| mask >> i & 1 == 0)
            .map(|i| attrs[i].clone())
            .collect();
        let lp = s.project(&left).expect("subset of schema");
        let rp = s.project(&right).expect("subset of schema");
        if lp.len() * rp.len() != s.len() {
            continue;
        }
        let product = lp.product(&rp).expect("disjoint").project(attrs).unwrap();
        if product == *s {
            let mut out = powerset_rec(&lp);
            out.extend(powerset_rec(&rp));
            return out;
        }
    }
    vec![s.clone()]
}

/// Low-memory prime factorization: every temporary relation is represented
/// intentionally as a selection-plus-projection over the original input and
/// re-materialized on demand.
pub fn factorize_lowmem(s: &Relation) -> Factorization {
    #[derive(Clone)]
    struct Lazy {
        attrs: Vec<AttrName>,
        preds: Vec<SelAtom>,
    }

    impl Lazy {
        fn materialize(&self, base: &Relation) -> Relation {
            base.select(&self.preds)
                .expect("predicates over base attrs")
                .project(&self.attrs)
                .expect("attrs of base")
        }
    }

    fn rec(base: &Relation, view: Lazy) -> Vec<Relation> {
        let s = view.materialize(base);
        if s.is_empty() {
            return vec![s];
        }
        let mut factors = Vec::new();
        let mut rest: Vec<AttrName> = Vec::new();
        for attr in s.schema().attrs() {
            let col = s.project(std::slice::from_ref(attr)).expect("attr of schema");
            if col.len() == 1 {
                factors.push(col);
            } else {
                rest.push(attr.clone());
            }
        }
        if rest.is_empty() {
            return factors;
        }
        let s2 = s.project(&rest).expect("attrs of schema");
        let mut pivot: Option<(AttrName, Value)> = None;
        'outer: for attr in s2.schema().attrs() {
            let col = s2.project(std::slice::from_ref(attr)).expect("attr");
            for v in col.tuples() {
                let cnt = s2
                    .select(&[SelAtom::eq_const(attr.clone(), v[0].clone())])
                    .expect("attr")
                    .len();
                if cnt * 2 <= s2.len() {
                    pivot = Some((attr.clone(), v[0].clone()));
                    break 'outer;
                }
            }
        }
        let (attr, v) = pivot.expect("minority value exists");

        let q_view = Lazy {
            attrs: rest.clone(),
            preds: {
                let mut p = view.preds.clone();
                p.push(SelAtom::eq_const(attr.clone(), v.clone()));
                p
            },
        };
        let r_view = Lazy {
            attrs: rest.clone(),
            preds: {
                let mut p = view.preds.clone();
                p.push(SelAtom { lhs: attr.clone(), op: CmpOp::Neq, rhs: SelRhs::Const(v) });
                p
            },
        };

        let mut common = Vec::new();
        for f in rec(base, q_view) {
            if f.schema().same_set(&Schema::new(rest.clone()).expect("non-empty")) {
                continue;
            }
            let r = r_view.materialize(base);
            if divides(&f, &r) {
                common.push(f);
            }
        }
        let covered = match crate::rel::product_all(&common).expect("disjoint") {
            Some(p) => p,
            None => {
                factors.push(s2);
                return factors;
            }
        };
        if covered.schema().same_set(s2.schema()) {
            factors.extend(common);
            return factors;
        }
        let residue = s2.divide(&covered).expect("proper subset");
        factors.extend(common);
        factors.push(residue);
        factors
    }

    let view = Lazy { attrs: s.schema().attrs().to_vec(), preds: Vec::new() };
    Factorization::new(rec(s, view))
}

/// Outcome of decomposing a WSD's components.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub wsd: Gwsd,
    /// False when variables were frozen as constants, in which case the
    /// result is sound but possibly not maximal.
    pub maximal: bool,
}

/// Packs each tuple-id slot of a component into a single value so that
/// factorization respects tuple boundaries; absent slots pack to bottom.
fn pack_component(wide: &crate::tst::WideSchema, comp: &Component) -> (Relation, Vec<PackedSlot>) {
    let wide_schema = wide.schema();
    let mut slots: Vec<PackedSlot> = Vec::new();
    for (rel, id, start, ar) in wide.slots() {
        let attrs = &wide_schema.attrs()[start..start + ar];
        let ps: Option<Vec<usize>> = attrs.iter().map(|a| comp.schema.position(a)).collect();
        if let Some(positions) = ps {
            slots.push(PackedSlot {
                packed_attr: AttrName::new(vec![rel.clone(), id.clone()]),
                attrs: attrs.to_vec(),
                positions,
            });
        }
    }
    let schema = Schema::new(slots.iter().map(|s| s.packed_attr.clone()).collect())
        .expect("tuple-level component has at least one slot");
    let rows = comp.rows.iter().map(|row| {
        slots
            .iter()
            .map(|s| {
                let cells: Tuple = s.positions.iter().map(|&p| row[p].clone()).collect();
                if cells.iter().any(Value::is_bottom) {
                    Value::Bottom
                } else {
                    Value::constant(pack_cells(&cells))
                }
            })
            .collect()
    });
    (Relation::new(schema, rows).expect("aligned rows"), slots)
}

struct PackedSlot {
    packed_attr: AttrName,
    attrs: Vec<AttrName>,
    positions: Vec<usize>,
}

fn pack_cells(cells: &[Value]) -> String {
    let mut out = String::new();
    for c in cells {
        match c {
            Value::Constant(s) => {
                out.push('c');
                out.push_str(&(s.len()).to_string());
                out.push(':');
                out.push_str(s);
            }
            Value::Variable(s) => {
                out.push('v');
                out.push_str(&(s.len()).to_string());
                out.push(':');
                out.push_str(s);
            }
            Value::Bottom => out.push('_'),
        }
    }
    out
}

fn unpack_cells(s: &str) -> Tuple {
    let mut out = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'_' => {
                out.push(Value::Bottom);
                i += 1;
            }
            tag @ (b'c' | b'v') => {
                i += 1;
                let start = i;
                while bytes[i] != b':' {
                    i += 1;
                }
                let len: usize = s[start..i].parse().expect("packed length");
                i += 1;
                let payload = &s[i..i + len];
                i += len;
                out.push(if tag == b'c' {
                    Value::constant(payload)
                } else {
                    Value::variable(payload)
                });
            }
            other => unreachable!("bad packed tag {other}"),
        }
    }
    out
}

/// Maximal decomposition of a WSD's components by prime factorization.
///
/// At the attribute level each component relation is factorized directly with
/// variables and bottoms frozen as constants. At the tuple level each
/// tuple-id slot is first packed into a single value, which makes the
/// decomposition unique modulo the placement of absent tuples. Variables make
/// maximality unattainable by freezing alone, so their presence clears the
/// `maximal` flag.
pub fn decompose_wsd_maximal(w: &Gwsd, level: Level) -> Result<Decomposition, FactorizeError> {
    let report = w.validate();
    if level == Level::Tuple && report.level != Level::Tuple {
        return Err(FactorizeError::Level);
    }
    let mut components = Vec::new();
    for comp in &w.components {
        match level {
            Level::Attribute => {
                let rel = comp.to_relation();
                for f in factorize_prime(&rel).factors {
                    components.push(Component::from_relation(&f));
                }
            }
            Level::Tuple => {
                let (packed, slots) = pack_component(&w.wide, comp);
                for f in factorize_prime(&packed).factors {
                    components.push(unpack_factor(&f, &slots)?);
                }
            }
        }
    }
    components.sort_by(|a, b| a.schema.attrs()[0].cmp(&b.schema.attrs()[0]));
    let wsd = Gwsd::new(w.wide.clone(), components, w.global.clone())?;
    Ok(Decomposition { wsd, maximal: !report.has_variables })
}

fn unpack_factor(f: &Relation, slots: &[PackedSlot]) -> Result<Component, FactorizeError> {
    let mut attrs = Vec::new();
    let mut slot_refs = Vec::new();
    for a in f.schema().attrs() {
        let slot = slots
            .iter()
            .find(|s| &s.packed_attr == a)
            .expect("factor attrs come from the packing");
        attrs.extend(slot.attrs.iter().cloned());
        slot_refs.push(slot);
    }
    let schema = Schema::new(attrs).expect("non-empty");
    let mut comp = Component::new(schema, vec![])?;
    for row in f.tuples() {
        let mut out: Tuple = Vec::new();
        for (cell, slot) in row.iter().zip(&slot_refs) {
            match cell {
                Value::Bottom => out.extend(vec![Value::Bottom; slot.attrs.len()]),
                Value::Constant(packed) => out.extend(unpack_cells(packed)),
                Value::Variable(_) => unreachable!("packed cells are constants or bottom"),
            }
        }
        comp.push(out)?;
    }
    Ok(comp)
}
