//! Tabsets (finite sets of g-multitables over one schema), the inline
//! encoding into a single wide table, and the common-global-condition normal
//! form for inlined tabsets.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cond::Conjunction;
use crate::tables::{GMultitable, GTable};
use crate::value::{AttrName, Schema, Tuple, Value};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TstError {
    #[error("capacity exceeded: relation {rel} has {got} tuples, maximum is {max}")]
    Capacity { rel: String, got: usize, max: usize },
    #[error("tabset error: {0}")]
    Tabset(String),
}

/// One tuple-id slot group of a wide schema: relation name, base attributes,
/// and the ordered tuple identifiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotGroup {
    pub rel: String,
    pub base: Schema,
    pub ids: Vec<String>,
}

impl SlotGroup {
    pub fn arity(&self) -> usize {
        self.base.arity()
    }
}

/// The wide schema `{R.d_i.A_j}` of an inlined tabset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WideSchema {
    pub groups: Vec<SlotGroup>,
}

impl WideSchema {
    /// Builds the wide schema from per-relation base schemas and maxima,
    /// with identifiers `d1..dmax`.
    pub fn new(rels: Vec<(String, Schema, usize)>) -> Self {
        let groups = rels
            .into_iter()
            .map(|(rel, base, max)| SlotGroup {
                rel,
                base,
                ids: (1..=max).map(|i| format!("d{i}")).collect(),
            })
            .collect();
        WideSchema { groups }
    }

    /// The flattened attribute list `Rel.dK.Attr` in slot order.
    pub fn schema(&self) -> Schema {
        let mut attrs = Vec::new();
        for g in &self.groups {
            for id in &g.ids {
                for a in g.base.attrs() {
                    attrs.push(AttrName::slot(&g.rel, id, &a.rendered()));
                }
            }
        }
        Schema::new(attrs).expect("wide schema is non-empty and duplicate-free")
    }

    pub fn width(&self) -> usize {
        self.groups.iter().map(|g| g.ids.len() * g.arity()).sum()
    }

    /// Slot boundaries in the flattened row: `(rel, id, start, arity)`.
    pub fn slots(&self) -> Vec<(String, String, usize, usize)> {
        let mut out = Vec::new();
        let mut pos = 0;
        for g in &self.groups {
            for id in &g.ids {
                out.push((g.rel.clone(), id.clone(), pos, g.arity()));
                pos += g.arity();
            }
        }
        out
    }

    /// Replaces every slot containing at least one bottom by the all-bottom
    /// slot; such slots all denote tuple absence.
    pub fn canonicalize_row(&self, row: &mut Tuple) {
        for (_, _, start, ar) in self.slots() {
            let slot = &row[start..start + ar];
            if slot.iter().any(Value::is_bottom) && !slot.iter().all(Value::is_bottom) {
                for cell in row[start..start + ar].iter_mut() {
                    *cell = Value::Bottom;
                }
            }
        }
    }
}

/// A finite set of g-multitables over one relational schema. Members are kept
/// in input order; duplicates are tolerated (representation is a union).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tabset {
    pub members: Vec<GMultitable>,
}

impl Tabset {
    pub fn new(members: Vec<GMultitable>) -> Result<Self, TstError> {
        if let Some(first) = members.first() {
            let sig: Vec<(&str, &Schema)> =
                first.tables.iter().map(|t| (t.name.as_str(), &t.schema)).collect();
            for m in &members[1..] {
                let s: Vec<(&str, &Schema)> =
                    m.tables.iter().map(|t| (t.name.as_str(), &t.schema)).collect();
                if s != sig {
                    return Err(TstError::Tabset(
                        "tabset members must share one relational schema".into(),
                    ));
                }
            }
        }
        Ok(Tabset { members })
    }

    /// Observed per-relation maxima across the tabset.
    pub fn maxima(&self) -> Vec<(String, Schema, usize)> {
        let mut out: Vec<(String, Schema, usize)> = Vec::new();
        for m in &self.members {
            for (i, t) in m.tables.iter().enumerate() {
                // Identifier positions, not just counts: a sparse member may
                // mention a high id with earlier ids absent.
                let need = t
                    .rows
                    .iter()
                    .map(|r| id_index(&r.id).unwrap_or(t.rows.len()))
                    .max()
                    .unwrap_or(0)
                    .max(t.rows.len());
                match out.get_mut(i) {
                    Some(entry) => entry.2 = entry.2.max(need),
                    None => out.push((t.name.clone(), t.schema.clone(), need)),
                }
            }
        }
        out
    }

    pub fn wide_schema(&self) -> WideSchema {
        WideSchema::new(self.maxima())
    }
}

fn id_index(id: &str) -> Option<usize> {
    id.strip_prefix('d').and_then(|n| n.parse::<usize>().ok())
}

/// Inlines one g-multitable into a wide tuple: tuples are placed into the
/// slot named by their identifier and every unused slot is padded with the
/// all-bottom tuple.
pub fn inline(m: &GMultitable, wide: &WideSchema) -> Result<Tuple, TstError> {
    let mut row: Tuple = vec![Value::Bottom; wide.width()];
    let mut pos = 0;
    for g in &wide.groups {
        let table = m
            .tables
            .iter()
            .find(|t| t.name == g.rel)
            .ok_or_else(|| TstError::Tabset(format!("member lacks relation {}", g.rel)))?;
        if table.rows.len() > g.ids.len() {
            return Err(TstError::Capacity {
                rel: g.rel.clone(),
                got: table.rows.len(),
                max: g.ids.len(),
            });
        }
        for r in &table.rows {
            let idx = g.ids.iter().position(|id| *id == r.id).ok_or(TstError::Capacity {
                rel: g.rel.clone(),
                got: id_index(&r.id).unwrap_or(usize::MAX),
                max: g.ids.len(),
            })?;
            let start = pos + idx * g.arity();
            row[start..start + g.arity()].clone_from_slice(&r.tuple);
        }
        pos += g.ids.len() * g.arity();
    }
    Ok(row)
}

/// Inverts the inlining: per relation, keeps each slot whose values are all
/// different from bottom; a slot containing any bottom denotes absence and is
/// dropped entirely.
pub fn inline_inverse(wide: &WideSchema, row: &[Tuple]) -> Vec<GMultitable> {
    row.iter().map(|r| inline_inverse_one(wide, r)).collect()
}

pub fn inline_inverse_one(wide: &WideSchema, row: &[Value]) -> GMultitable {
    let mut tables: Vec<GTable> = wide
        .groups
        .iter()
        .map(|g| GTable::new(g.rel.clone(), g.base.clone()))
        .collect();
    for (slot_i, (rel, id, start, ar)) in wide.slots().into_iter().enumerate() {
        let _ = slot_i;
        let slot = &row[start..start + ar];
        if slot.iter().any(Value::is_bottom) {
            continue;
        }
        let table = tables.iter_mut().find(|t| t.name == rel).expect("group table exists");
        table.push_with_id(id, slot.to_vec()).expect("arity matches");
    }
    GMultitable::new(tables, Conjunction::empty())
}

/// A g-tabset table: the inlined wide table with one condition per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gtst {
    pub wide: WideSchema,
    pub rows: Vec<Tuple>,
    /// One global condition per row, aligned with `rows`.
    pub lambda: Vec<Conjunction>,
}

impl Gtst {
    /// The shared global condition, when the table is in normal form.
    pub fn shared_phi(&self) -> Option<&Conjunction> {
        match self.lambda.first() {
            None => None,
            Some(first) if self.lambda.iter().all(|l| l == first) => Some(first),
            _ => None,
        }
    }
}

/// Inlines a whole tabset, keeping member order. Rows are canonicalized
/// (mixed-bottom slots become all-bottom) but not sorted, so translations can
/// preserve the member-to-row correspondence.
pub fn inline_tabset(ts: &Tabset, wide: &WideSchema) -> Result<Gtst, TstError> {
    let mut rows = Vec::new();
    let mut lambda = Vec::new();
    for m in &ts.members {
        let mut row = inline(m, wide)?;
        wide.canonicalize_row(&mut row);
        rows.push(row);
        lambda.push(m.global.clone());
    }
    Ok(Gtst { wide: wide.clone(), rows, lambda })
}

/// Maps a gTST with per-row conditions to one with a single shared condition:
/// rows with unsatisfiable conditions are dropped, members sharing variables
/// are renamed apart, and the remaining conditions are conjoined.
pub fn normalize_global(g: &Gtst) -> Gtst {
    let mut seen_vars: BTreeSet<String> = BTreeSet::new();
    let mut rows = Vec::new();
    let mut conjuncts = Vec::new();
    for (row, cond) in g.rows.iter().zip(&g.lambda) {
        if crate::cond::satisfiable_conjunction(cond).is_none() {
            continue;
        }
        let mut row_vars: BTreeSet<String> = cond.variables();
        for v in row {
            if let Some(x) = v.as_variable() {
                row_vars.insert(x.to_string());
            }
        }
        let clash: BTreeSet<String> = row_vars.intersection(&seen_vars).cloned().collect();
        let renames: std::collections::BTreeMap<String, String> = clash
            .iter()
            .map(|v| {
                let mut i = 1;
                loop {
                    let candidate = format!("{v}_{i}");
                    if !seen_vars.contains(&candidate) && !row_vars.contains(&candidate) {
                        break (v.clone(), candidate);
                    }
                    i += 1;
                }
            })
            .collect();
        let new_row: Tuple = row
            .iter()
            .map(|v| match v {
                Value::Variable(x) => match renames.get(x) {
                    Some(n) => Value::variable(n.clone()),
                    None => v.clone(),
                },
                other => other.clone(),
            })
            .collect();
        let new_cond = rename_conjunction(cond, &renames);
        for v in new_cond.variables() {
            seen_vars.insert(v);
        }
        for v in &new_row {
            if let Some(x) = v.as_variable() {
                seen_vars.insert(x.to_string());
            }
        }
        rows.push(new_row);
        conjuncts.push(new_cond);
    }
    let phi = conjuncts.iter().fold(Conjunction::empty(), |acc, c| acc.and(c));
    let lambda = vec![phi; rows.len()];
    Gtst { wide: g.wide.clone(), rows, lambda }
}

fn rename_conjunction(
    c: &Conjunction,
    renames: &std::collections::BTreeMap<String, String>,
) -> Conjunction {
    use crate::cond::{Atom, Term};
    let map_term = |t: &Term| match t {
        Term::Var(x) => match renames.get(x) {
            Some(n) => Term::var(n.clone()),
            None => t.clone(),
        },
        _ => t.clone(),
    };
    Conjunction::new(
        c.atoms()
            .iter()
            .map(|a| Atom::new(map_term(&a.left), a.op, map_term(&a.right)))
            .collect(),
    )
}
