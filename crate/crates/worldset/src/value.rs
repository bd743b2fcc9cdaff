//! Cell values, attribute names and schemas for the named relational model.
//!
//! A cell holds either a constant, a named variable, or the distinguished
//! absence marker [`Value::Bottom`]. Constants and variables live in disjoint
//! namespaces; equality is syntactic throughout.

use std::cmp::Ordering;
use std::fmt;

use crate::rel::RelError;

/// A single cell value: constant, variable, or the absence marker.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    /// The padding/absence symbol, written `_|_` in the text format.
    Bottom,
    /// An atomic domain value.
    Constant(String),
    /// A named variable.
    Variable(String),
}

impl Value {
    pub fn constant(name: impl Into<String>) -> Self {
        Value::Constant(name.into())
    }

    pub fn variable(name: impl Into<String>) -> Self {
        Value::Variable(name.into())
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Value::Bottom)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Value::Constant(_))
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Value::Variable(_))
    }

    pub fn as_variable(&self) -> Option<&str> {
        match self {
            Value::Variable(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_constant(&self) -> Option<&str> {
        match self {
            Value::Constant(c) => Some(c),
            _ => None,
        }
    }
}

/// Orders all-digit payloads numerically so `2` sorts before `10`; everything
/// else lexicographically. Bottom sorts first, then constants, then variables.
fn cmp_payload(a: &str, b: &str) -> Ordering {
    let num = |s: &str| {
        if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
            s.parse::<u128>().ok()
        } else {
            None
        }
    };
    match (num(a), num(b)) {
        (Some(x), Some(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.cmp(b),
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        use Value::*;
        match (self, other) {
            (Bottom, Bottom) => Ordering::Equal,
            (Bottom, _) => Ordering::Less,
            (_, Bottom) => Ordering::Greater,
            (Constant(a), Constant(b)) => cmp_payload(a, b),
            (Constant(_), Variable(_)) => Ordering::Less,
            (Variable(_), Constant(_)) => Ordering::Greater,
            (Variable(a), Variable(b)) => cmp_payload(a, b),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bottom => write!(f, "_|_"),
            Value::Constant(c) => write!(f, "{c}"),
            Value::Variable(v) => write!(f, "?{v}"),
        }
    }
}

/// A possibly qualified attribute name such as `A` or `R.d1.A`.
///
/// Comparison is by the rendered dotted form, with numeric name parts ordered
/// numerically so that `d2` precedes `d10`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AttrName {
    parts: Vec<String>,
}

impl AttrName {
    pub fn new(parts: Vec<String>) -> Self {
        assert!(!parts.is_empty(), "attribute name needs at least one part");
        AttrName { parts }
    }

    pub fn simple(name: impl Into<String>) -> Self {
        AttrName { parts: vec![name.into()] }
    }

    /// Builds the `Rel.dK.Attr` form used by wide tabset-table schemas.
    pub fn slot(rel: &str, id: &str, attr: &str) -> Self {
        AttrName { parts: vec![rel.to_string(), id.to_string(), attr.to_string()] }
    }

    pub fn parts(&self) -> &[String] {
        &self.parts
    }

    pub fn rendered(&self) -> String {
        self.parts.join(".")
    }

    /// For slot attributes (`Rel.dK.Attr`), the `(relation, tuple-id)` pair.
    pub fn slot_key(&self) -> Option<(&str, &str)> {
        if self.parts.len() == 3 {
            Some((&self.parts[0], &self.parts[1]))
        } else {
            None
        }
    }

    pub fn last(&self) -> &str {
        self.parts.last().expect("non-empty parts")
    }
}

/// Splits a name part into alternating alpha/digit runs for natural ordering.
fn natural_key(s: &str) -> Vec<(Option<u128>, &str)> {
    let mut key = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        let digit = bytes[i].is_ascii_digit();
        while i < bytes.len() && bytes[i].is_ascii_digit() == digit {
            i += 1;
        }
        let run = &s[start..i];
        key.push((if digit { run.parse().ok() } else { None }, run));
    }
    key
}

impl Ord for AttrName {
    fn cmp(&self, other: &Self) -> Ordering {
        let mut a = self.parts.iter();
        let mut b = other.parts.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(x), Some(y)) => {
                    let ord = natural_key(x).cmp(&natural_key(y));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
            }
        }
    }
}

impl PartialOrd for AttrName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for AttrName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rendered())
    }
}

impl From<&str> for AttrName {
    fn from(s: &str) -> Self {
        AttrName { parts: s.split('.').map(|p| p.to_string()).collect() }
    }
}

/// An ordered, duplicate-free, non-empty list of attribute names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Schema {
    attrs: Vec<AttrName>,
}

impl Schema {
    pub fn new(attrs: Vec<AttrName>) -> Result<Self, RelError> {
        if attrs.is_empty() {
            return Err(RelError::Schema("nullary relation schemas are not allowed".into()));
        }
        for (i, a) in attrs.iter().enumerate() {
            if attrs[..i].contains(a) {
                return Err(RelError::Schema(format!("duplicate attribute {a}")));
            }
        }
        Ok(Schema { attrs })
    }

    pub fn of(names: &[&str]) -> Self {
        Schema::new(names.iter().map(|n| AttrName::from(*n)).collect()).expect("valid schema")
    }

    pub fn attrs(&self) -> &[AttrName] {
        &self.attrs
    }

    pub fn arity(&self) -> usize {
        self.attrs.len()
    }

    pub fn position(&self, attr: &AttrName) -> Option<usize> {
        self.attrs.iter().position(|a| a == attr)
    }

    pub fn contains(&self, attr: &AttrName) -> bool {
        self.position(attr).is_some()
    }

    /// True when no attribute is shared with `other`.
    pub fn disjoint_from(&self, other: &Schema) -> bool {
        self.attrs.iter().all(|a| !other.contains(a))
    }

    /// True when every attribute of `self` occurs in `other`.
    pub fn subset_of(&self, other: &Schema) -> bool {
        self.attrs.iter().all(|a| other.contains(a))
    }

    /// Schema equality as a set, ignoring attribute order.
    pub fn same_set(&self, other: &Schema) -> bool {
        self.arity() == other.arity() && self.subset_of(other)
    }

    pub fn concat(&self, other: &Schema) -> Result<Schema, RelError> {
        let mut attrs = self.attrs.clone();
        attrs.extend(other.attrs.iter().cloned());
        Schema::new(attrs)
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.attrs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// One relation row.
pub type Tuple = Vec<Value>;

pub fn tuple_to_string(t: &[Value]) -> String {
    let cells: Vec<String> = t.iter().map(|v| v.to_string()).collect();
    format!("({})", cells.join(", "))
}
