//! Relational-algebra queries: a full evaluator on plain worlds (the oracle
//! path) and positive-fragment evaluation closed over mutex-conditioned
//! multitables.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::cond::{Atom, Conjunction, Term};
use crate::rel::{CmpOp, RelError, Relation, SelAtom, SelRhs};
use crate::tables::{World, XMultitable, XRow, XTable};
use crate::value::{AttrName, Schema, Tuple, Value};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("operator outside the positive fragment: {0}")]
    Fragment(String),
    #[error("unknown relation: {0}")]
    UnknownRelation(String),
    #[error("bottom values cannot reach the query layer")]
    Bottom,
    #[error(transparent)]
    Rel(#[from] RelError),
}

/// Attribute name and constant used to encode truth-valued query results as
/// unary relations.
pub const BOOL_ATTR: &str = "Bool";
pub const TRUE_CONST: &str = "true";

/// A relational-algebra query tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Base(String),
    Select(Box<Query>, Vec<SelAtom>),
    Project(Box<Query>, Vec<AttrName>),
    /// Projection onto the empty attribute set, rendered as a unary relation
    /// over the constant `true` (nullary relations are excluded).
    ProjectEmpty(Box<Query>),
    Product(Box<Query>, Box<Query>),
    Union(Box<Query>, Box<Query>),
    Difference(Box<Query>, Box<Query>),
    Rename(Box<Query>, Vec<(AttrName, AttrName)>),
    /// The constant single-tuple relation `{(true)}`.
    Unit,
}

impl Query {
    pub fn base(name: impl Into<String>) -> Query {
        Query::Base(name.into())
    }

    /// The positive fragment: no difference and no inequality selections.
    pub fn is_positive(&self) -> bool {
        match self {
            Query::Base(_) | Query::Unit => true,
            Query::Select(q, atoms) => {
                atoms.iter().all(|a| a.op == CmpOp::Eq) && q.is_positive()
            }
            Query::Project(q, _) | Query::ProjectEmpty(q) | Query::Rename(q, _) => q.is_positive(),
            Query::Product(l, r) | Query::Union(l, r) => l.is_positive() && r.is_positive(),
            Query::Difference(_, _) => false,
        }
    }

    /// Static schema of the query against base-relation schemas.
    pub fn schema(&self, bases: &BTreeMap<String, Schema>) -> Result<Schema, QueryError> {
        match self {
            Query::Base(name) => bases
                .get(name)
                .cloned()
                .ok_or_else(|| QueryError::UnknownRelation(name.clone())),
            Query::Unit => Ok(Schema::of(&[BOOL_ATTR])),
            Query::Select(q, atoms) => {
                let s = q.schema(bases)?;
                for a in atoms {
                    if !s.contains(&a.lhs) {
                        return Err(RelError::Attr(a.lhs.rendered()).into());
                    }
                    if let SelRhs::Attr(r) = &a.rhs {
                        if !s.contains(r) {
                            return Err(RelError::Attr(r.rendered()).into());
                        }
                    }
                }
                Ok(s)
            }
            Query::Project(q, attrs) => {
                let s = q.schema(bases)?;
                for a in attrs {
                    if !s.contains(a) {
                        return Err(RelError::Attr(a.rendered()).into());
                    }
                }
                Ok(Schema::new(attrs.clone()).map_err(QueryError::Rel)?)
            }
            Query::ProjectEmpty(q) => {
                q.schema(bases)?;
                Ok(Schema::of(&[BOOL_ATTR]))
            }
            Query::Product(l, r) => {
                let a = l.schema(bases)?;
                let b = r.schema(bases)?;
                a.concat(&b).map_err(QueryError::Rel)
            }
            Query::Union(l, r) | Query::Difference(l, r) => {
                let a = l.schema(bases)?;
                let b = r.schema(bases)?;
                if !a.same_set(&b) {
                    return Err(RelError::Schema(format!(
                        "union/difference schemas {a} and {b} differ"
                    ))
                    .into());
                }
                Ok(a)
            }
            Query::Rename(q, pairs) => {
                let s = q.schema(bases)?;
                let mut rel = Relation::empty(s);
                rel = rel.rename(pairs).map_err(QueryError::Rel)?;
                Ok(rel.schema().clone())
            }
        }
    }

    /// Constants mentioned in selection conditions.
    pub fn constants(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_constants(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_constants(&self, out: &mut Vec<String>) {
        match self {
            Query::Base(_) => {}
            Query::Unit => out.push(TRUE_CONST.to_string()),
            Query::Select(q, atoms) => {
                for a in atoms {
                    if let SelRhs::Const(Value::Constant(c)) = &a.rhs {
                        out.push(c.clone());
                    }
                }
                q.collect_constants(out);
            }
            Query::Project(q, _) | Query::Rename(q, _) => q.collect_constants(out),
            Query::ProjectEmpty(q) => {
                out.push(TRUE_CONST.to_string());
                q.collect_constants(out);
            }
            Query::Product(l, r) | Query::Union(l, r) | Query::Difference(l, r) => {
                l.collect_constants(out);
                r.collect_constants(out);
            }
        }
    }
}

fn unit_relation() -> Relation {
    let mut r = Relation::empty(Schema::of(&[BOOL_ATTR]));
    r.insert(vec![Value::constant(TRUE_CONST)]).expect("unary tuple");
    r
}

/// Full relational algebra on a concrete world.
pub fn eval_on_world(q: &Query, w: &World) -> Result<Relation, QueryError> {
    match q {
        Query::Base(name) => w
            .relation(name)
            .cloned()
            .ok_or_else(|| QueryError::UnknownRelation(name.clone())),
        Query::Unit => Ok(unit_relation()),
        Query::Select(q, atoms) => Ok(eval_on_world(q, w)?.select(atoms)?),
        Query::Project(q, attrs) => Ok(eval_on_world(q, w)?.project(attrs)?),
        Query::ProjectEmpty(q) => {
            let r = eval_on_world(q, w)?;
            if r.is_empty() {
                Ok(Relation::empty(Schema::of(&[BOOL_ATTR])))
            } else {
                Ok(unit_relation())
            }
        }
        Query::Product(l, r) => Ok(eval_on_world(l, w)?.product(&eval_on_world(r, w)?)?),
        Query::Union(l, r) => Ok(eval_on_world(l, w)?.union(&eval_on_world(r, w)?)?),
        Query::Difference(l, r) => Ok(eval_on_world(l, w)?.difference(&eval_on_world(r, w)?)?),
        Query::Rename(q, pairs) => Ok(eval_on_world(q, w)?.rename(pairs)?),
    }
}

/// The name given to the answer table of a closed evaluation.
pub const ANSWER_NAME: &str = "answer";

/// Evaluates a positive query on a mutex-conditioned multitable, staying
/// inside the formalism: the global condition carries over, projection and
/// union preserve local conditions, selection appends equalities, and product
/// conjoins the constituent local conditions.
pub fn eval_positive_on_x(q: &Query, t: &XMultitable) -> Result<XMultitable, QueryError> {
    if !q.is_positive() {
        return Err(QueryError::Fragment(format!("{q:?}")));
    }
    let bases: BTreeMap<String, Schema> = t
        .tables
        .iter()
        .map(|tab| (tab.name.clone(), tab.schema.clone()))
        .collect();
    q.schema(&bases)?;
    for tab in &t.tables {
        for row in &tab.rows {
            if row.tuple.iter().any(Value::is_bottom) {
                return Err(QueryError::Bottom);
            }
        }
    }
    let answer = eval_x(q, t)?;
    Ok(XMultitable {
        tables: vec![XTable { name: ANSWER_NAME.to_string(), ..answer }],
        global: t.global.clone(),
        mutex: t.mutex.clone(),
    })
}

fn eval_x(q: &Query, t: &XMultitable) -> Result<XTable, QueryError> {
    match q {
        Query::Base(name) => t
            .table(name)
            .cloned()
            .ok_or_else(|| QueryError::UnknownRelation(name.clone())),
        Query::Unit => {
            let mut out = XTable::new(ANSWER_NAME, Schema::of(&[BOOL_ATTR]));
            out.push(vec![Value::constant(TRUE_CONST)], Conjunction::empty());
            Ok(out)
        }
        Query::Select(inner, atoms) => {
            let input = eval_x(inner, t)?;
            let mut out = XTable::new(ANSWER_NAME, input.schema.clone());
            'rows: for row in &input.rows {
                let mut local = row.local.clone();
                for a in atoms {
                    let lp = input.schema.position(&a.lhs).expect("schema checked");
                    let lhs = &row.tuple[lp];
                    let rhs: Value = match &a.rhs {
                        SelRhs::Const(v) => v.clone(),
                        SelRhs::Attr(attr) => {
                            let rp = input.schema.position(attr).expect("schema checked");
                            row.tuple[rp].clone()
                        }
                    };
                    match (Term::from_value(lhs), Term::from_value(&rhs)) {
                        (Some(l), Some(r)) => {
                            let atom = Atom::eq(l, r);
                            match atom.fixed_truth() {
                                Some(true) => {}
                                Some(false) => continue 'rows,
                                None => local.push(atom),
                            }
                        }
                        _ => return Err(QueryError::Bottom),
                    }
                }
                out.push(row.tuple.clone(), local);
            }
            Ok(out)
        }
        Query::Project(inner, attrs) => {
            let input = eval_x(inner, t)?;
            let positions: Vec<usize> =
                attrs.iter().map(|a| input.schema.position(a).expect("schema checked")).collect();
            let schema = Schema::new(attrs.clone()).map_err(QueryError::Rel)?;
            let mut out = XTable::new(ANSWER_NAME, schema);
            for row in &input.rows {
                let tuple: Tuple = positions.iter().map(|&p| row.tuple[p].clone()).collect();
                out.push(tuple, row.local.clone());
            }
            Ok(out)
        }
        Query::ProjectEmpty(inner) => {
            let input = eval_x(inner, t)?;
            let mut out = XTable::new(ANSWER_NAME, Schema::of(&[BOOL_ATTR]));
            for row in &input.rows {
                out.push(vec![Value::constant(TRUE_CONST)], row.local.clone());
            }
            Ok(out)
        }
        Query::Product(l, r) => {
            let a = eval_x(l, t)?;
            let b = eval_x(r, t)?;
            let schema = a.schema.concat(&b.schema).map_err(QueryError::Rel)?;
            let mut out = XTable::new(ANSWER_NAME, schema);
            for x in &a.rows {
                for y in &b.rows {
                    let mut tuple = x.tuple.clone();
                    tuple.extend(y.tuple.iter().cloned());
                    out.push(tuple, x.local.and(&y.local));
                }
            }
            Ok(out)
        }
        Query::Union(l, r) => {
            let a = eval_x(l, t)?;
            let b = eval_x(r, t)?;
            let map: Vec<usize> = a
                .schema
                .attrs()
                .iter()
                .map(|attr| b.schema.position(attr).expect("schema checked"))
                .collect();
            let mut out = a.clone();
            out.name = ANSWER_NAME.to_string();
            for row in &b.rows {
                let tuple: Tuple = map.iter().map(|&p| row.tuple[p].clone()).collect();
                out.push(tuple, row.local.clone());
            }
            Ok(out)
        }
        Query::Rename(inner, pairs) => {
            let input = eval_x(inner, t)?;
            let rel = Relation::empty(input.schema.clone());
            let renamed = rel.rename(pairs).map_err(QueryError::Rel)?;
            Ok(XTable {
                name: ANSWER_NAME.to_string(),
                schema: renamed.schema().clone(),
                rows: input.rows,
            })
        }
        Query::Difference(_, _) => Err(QueryError::Fragment("difference".into())),
    }
}

/// One row of an XTable; re-exported shape used by the evaluator above.
pub type AnswerRow = XRow;
