//! Named relational model with set semantics and the classical operators,
//! plus relational division.
//!
//! Cells may hold variables or the `_|_` marker; the operators treat both as
//! opaque constants. Tuples are kept in canonical sorted order so relation
//! equality is structural.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::value::{AttrName, Schema, Tuple, Value};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RelError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unknown attribute: {0}")]
    Attr(String),
}

/// A finite duplicate-free set of tuples over a schema.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation {
    schema: Schema,
    tuples: BTreeSet<Tuple>,
}

/// Comparison operator admitted in selection conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Neq,
}

/// Right-hand side of a selection atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelRhs {
    Const(Value),
    Attr(AttrName),
}

/// One conjunct of a selection condition: `attr (=|!=) const-or-attr`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelAtom {
    pub lhs: AttrName,
    pub op: CmpOp,
    pub rhs: SelRhs,
}

impl SelAtom {
    pub fn eq_const(attr: impl Into<AttrName>, v: Value) -> Self {
        SelAtom { lhs: attr.into(), op: CmpOp::Eq, rhs: SelRhs::Const(v) }
    }

    pub fn neq_const(attr: impl Into<AttrName>, v: Value) -> Self {
        SelAtom { lhs: attr.into(), op: CmpOp::Neq, rhs: SelRhs::Const(v) }
    }

    pub fn eq_attr(lhs: impl Into<AttrName>, rhs: impl Into<AttrName>) -> Self {
        SelAtom { lhs: lhs.into(), op: CmpOp::Eq, rhs: SelRhs::Attr(rhs.into()) }
    }
}

impl Relation {
    pub fn empty(schema: Schema) -> Self {
        Relation { schema, tuples: BTreeSet::new() }
    }

    pub fn new(schema: Schema, rows: impl IntoIterator<Item = Tuple>) -> Result<Self, RelError> {
        let mut rel = Relation::empty(schema);
        for row in rows {
            rel.insert(row)?;
        }
        Ok(rel)
    }

    /// Convenience constructor from string cells; `?x` makes a variable,
    /// `_|_` the bottom marker, anything else a constant.
    pub fn from_strs(names: &[&str], rows: &[&[&str]]) -> Self {
        let schema = Schema::of(names);
        let rows = rows.iter().map(|r| r.iter().map(|c| parse_cell(c)).collect());
        Relation::new(schema, rows).expect("well-formed literal relation")
    }

    pub fn insert(&mut self, row: Tuple) -> Result<(), RelError> {
        if row.len() != self.schema.arity() {
            return Err(RelError::Schema(format!(
                "tuple arity {} does not match schema arity {}",
                row.len(),
                self.schema.arity()
            )));
        }
        self.tuples.insert(row);
        Ok(())
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn tuples(&self) -> impl Iterator<Item = &Tuple> {
        self.tuples.iter()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, row: &Tuple) -> bool {
        self.tuples.contains(row)
    }

    fn pos(&self, attr: &AttrName) -> Result<usize, RelError> {
        self.schema.position(attr).ok_or_else(|| RelError::Attr(attr.rendered()))
    }

    /// Selection by a conjunction of (in)equality atoms.
    pub fn select(&self, cond: &[SelAtom]) -> Result<Relation, RelError> {
        let mut compiled = Vec::with_capacity(cond.len());
        for atom in cond {
            let l = self.pos(&atom.lhs)?;
            let r = match &atom.rhs {
                SelRhs::Const(v) => Err(v.clone()),
                SelRhs::Attr(a) => Ok(self.pos(a)?),
            };
            compiled.push((l, atom.op, r));
        }
        let mut out = Relation::empty(self.schema.clone());
        for row in &self.tuples {
            let keep = compiled.iter().all(|(l, op, r)| {
                let rhs = match r {
                    Ok(p) => &row[*p],
                    Err(v) => v,
                };
                match op {
                    CmpOp::Eq => row[*l] == *rhs,
                    CmpOp::Neq => row[*l] != *rhs,
                }
            });
            if keep {
                out.tuples.insert(row.clone());
            }
        }
        Ok(out)
    }

    /// Projection onto a non-empty attribute list, in the given order.
    pub fn project(&self, attrs: &[AttrName]) -> Result<Relation, RelError> {
        if attrs.is_empty() {
            return Err(RelError::Schema("projection target must be non-empty".into()));
        }
        let positions: Vec<usize> =
            attrs.iter().map(|a| self.pos(a)).collect::<Result<_, _>>()?;
        let schema = Schema::new(attrs.to_vec())?;
        let mut out = Relation::empty(schema);
        for row in &self.tuples {
            out.tuples.insert(positions.iter().map(|&p| row[p].clone()).collect());
        }
        Ok(out)
    }

    /// Cartesian product over disjoint schemata.
    pub fn product(&self, other: &Relation) -> Result<Relation, RelError> {
        if !self.schema.disjoint_from(&other.schema) {
            return Err(RelError::Schema("product schemas must be disjoint".into()));
        }
        let schema = self.schema.concat(&other.schema)?;
        let mut out = Relation::empty(schema);
        for a in &self.tuples {
            for b in &other.tuples {
                let mut row = a.clone();
                row.extend(b.iter().cloned());
                out.tuples.insert(row);
            }
        }
        Ok(out)
    }

    fn align(&self, other: &Relation) -> Result<Vec<usize>, RelError> {
        if !self.schema.same_set(&other.schema) {
            return Err(RelError::Schema(format!(
                "schemas {} and {} do not match",
                self.schema, other.schema
            )));
        }
        // Positions of self's attributes inside other's tuples.
        self.schema.attrs().iter().map(|a| other.pos(a)).collect()
    }

    pub fn union(&self, other: &Relation) -> Result<Relation, RelError> {
        let map = self.align(other)?;
        let mut out = self.clone();
        for row in &other.tuples {
            out.tuples.insert(map.iter().map(|&p| row[p].clone()).collect());
        }
        Ok(out)
    }

    pub fn difference(&self, other: &Relation) -> Result<Relation, RelError> {
        let map = self.align(other)?;
        let reordered: BTreeSet<Tuple> = other
            .tuples
            .iter()
            .map(|row| map.iter().map(|&p| row[p].clone()).collect())
            .collect();
        let mut out = Relation::empty(self.schema.clone());
        for row in &self.tuples {
            if !reordered.contains(row) {
                out.tuples.insert(row.clone());
            }
        }
        Ok(out)
    }

    /// Renaming; pairs are `(old, new)` and unlisted attributes keep their name.
    pub fn rename(&self, pairs: &[(AttrName, AttrName)]) -> Result<Relation, RelError> {
        for (old, _) in pairs {
            self.pos(old)?;
        }
        let attrs: Vec<AttrName> = self
            .schema
            .attrs()
            .iter()
            .map(|a| {
                pairs
                    .iter()
                    .find(|(old, _)| old == a)
                    .map(|(_, new)| new.clone())
                    .unwrap_or_else(|| a.clone())
            })
            .collect();
        let schema = Schema::new(attrs)?;
        Ok(Relation { schema, tuples: self.tuples.clone() })
    }

    /// Relational division: the largest `Q` over `sch(R) - sch(F)` with
    /// `Q x F` contained in `R`. Callers needing exactness must verify
    /// `(R / F) x F = R` afterwards.
    pub fn divide(&self, divisor: &Relation) -> Result<Relation, RelError> {
        if !divisor.schema.subset_of(&self.schema)
            || divisor.schema.arity() >= self.schema.arity()
        {
            return Err(RelError::Schema(format!(
                "divisor schema {} must be a proper subset of {}",
                divisor.schema, self.schema
            )));
        }
        let rest: Vec<AttrName> = self
            .schema
            .attrs()
            .iter()
            .filter(|a| !divisor.schema.contains(a))
            .cloned()
            .collect();
        let rest_pos: Vec<usize> =
            rest.iter().map(|a| self.pos(a)).collect::<Result<_, _>>()?;
        let div_pos: Vec<usize> = divisor
            .schema
            .attrs()
            .iter()
            .map(|a| self.pos(a))
            .collect::<Result<_, _>>()?;

        // Group R's rows by their rest-part and collect the divisor-parts seen.
        let mut groups: std::collections::BTreeMap<Tuple, BTreeSet<Tuple>> =
            std::collections::BTreeMap::new();
        for row in &self.tuples {
            let rest_part: Tuple = rest_pos.iter().map(|&p| row[p].clone()).collect();
            let div_part: Tuple = div_pos.iter().map(|&p| row[p].clone()).collect();
            groups.entry(rest_part).or_default().insert(div_part);
        }
        let needed: BTreeSet<Tuple> = divisor.tuples.iter().cloned().collect();
        let schema = Schema::new(rest)?;
        let mut out = Relation::empty(schema);
        for (rest_part, seen) in groups {
            if needed.is_subset(&seen) {
                out.tuples.insert(rest_part);
            }
        }
        Ok(out)
    }

    /// All constants occurring in tuples.
    pub fn constants(&self) -> BTreeSet<String> {
        self.tuples
            .iter()
            .flat_map(|t| t.iter())
            .filter_map(|v| v.as_constant().map(|c| c.to_string()))
            .collect()
    }

    /// All variables occurring in tuples.
    pub fn variables(&self) -> BTreeSet<String> {
        self.tuples
            .iter()
            .flat_map(|t| t.iter())
            .filter_map(|v| v.as_variable().map(|c| c.to_string()))
            .collect()
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {{", self.schema)?;
        for row in &self.tuples {
            writeln!(f, "  {}", crate::value::tuple_to_string(row))?;
        }
        write!(f, "}}")
    }
}

/// Parses a literal cell as used by the convenience constructors.
pub fn parse_cell(s: &str) -> Value {
    if s == "_|_" {
        Value::Bottom
    } else if let Some(v) = s.strip_prefix('?') {
        Value::variable(v)
    } else {
        Value::constant(s)
    }
}

/// Product over a list of relations; `None` for an empty list.
pub fn product_all(rels: &[Relation]) -> Result<Option<Relation>, RelError> {
    let mut iter = rels.iter();
    let first = match iter.next() {
        Some(r) => r.clone(),
        None => return Ok(None),
    };
    let mut acc = first;
    for r in iter {
        acc = acc.product(r)?;
    }
    Ok(Some(acc))
}
