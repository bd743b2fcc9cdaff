//! World-set decompositions: component relations over disjoint pieces of a
//! wide schema whose product, under a global negated-equality condition,
//! reconstitutes the inlined tabset table.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cond::Conjunction;
use crate::rel::Relation;
use crate::tables::{rep_enumerate_pool, TableError, World};
use crate::tst::{inline_inverse_one, Gtst, WideSchema};
use crate::value::{AttrName, Schema, Tuple, Value};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WsdError {
    #[error("wsd error: {0}")]
    Wsd(String),
}

/// One component relation of a decomposition; rows keep input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub schema: Schema,
    pub rows: Vec<Tuple>,
}

impl Component {
    pub fn new(schema: Schema, rows: Vec<Tuple>) -> Result<Self, WsdError> {
        let mut c = Component { schema, rows: Vec::new() };
        for row in rows {
            c.push(row)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, row: Tuple) -> Result<(), WsdError> {
        if row.len() != self.schema.arity() {
            return Err(WsdError::Wsd(format!(
                "component row arity {} does not match schema {}",
                row.len(),
                self.schema
            )));
        }
        if !self.rows.contains(&row) {
            self.rows.push(row);
        }
        Ok(())
    }

    pub fn to_relation(&self) -> Relation {
        Relation::new(self.schema.clone(), self.rows.iter().cloned())
            .expect("component rows match schema")
    }

    pub fn from_relation(rel: &Relation) -> Component {
        Component { schema: rel.schema().clone(), rows: rel.tuples().cloned().collect() }
    }
}

/// A (g)WSD: components over disjoint sub-schemata of a wide schema plus a
/// global conjunction of negated equalities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gwsd {
    pub wide: WideSchema,
    pub components: Vec<Component>,
    pub global: Conjunction,
}

/// Decomposition granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Attribute,
    Tuple,
}

/// Validation outcome for a decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WsdReport {
    /// Component schemas disjointly partition the wide schema.
    pub partition_ok: bool,
    /// Every tuple id keeps all its attributes in one component.
    pub level: Level,
    pub has_variables: bool,
    pub global_true: bool,
}

impl WsdReport {
    pub fn is_valid(&self) -> bool {
        self.partition_ok
    }

    /// Specialization name: WSD (variable-free vWSD), vWSD, or gWSD.
    pub fn class(&self) -> &'static str {
        if self.global_true {
            if self.has_variables {
                "vwsd"
            } else {
                "wsd"
            }
        } else {
            "gwsd"
        }
    }
}

impl Gwsd {
    pub fn new(
        wide: WideSchema,
        components: Vec<Component>,
        global: Conjunction,
    ) -> Result<Self, WsdError> {
        if components.is_empty() {
            return Err(WsdError::Wsd("a decomposition needs at least one component".into()));
        }
        let mut w = Gwsd { wide, components, global };
        w.canonicalize_bottoms();
        Ok(w)
    }

    /// Wraps a gTST in shared-condition form as a single-component gWSD.
    pub fn one_wsd(g: &Gtst) -> Result<Self, WsdError> {
        let phi = match g.shared_phi() {
            Some(phi) => phi.clone(),
            None if g.rows.is_empty() => Conjunction::empty(),
            None => {
                return Err(WsdError::Wsd(
                    "gTST must be in common-global-condition normal form".into(),
                ))
            }
        };
        let component = Component::new(g.wide.schema(), g.rows.clone())?;
        Gwsd::new(g.wide.clone(), vec![component], phi)
    }

    /// Rewrites mixed-bottom slots to all-bottom, for every slot whose
    /// attributes all lie in a single component.
    fn canonicalize_bottoms(&mut self) {
        let wide_schema = self.wide.schema();
        for comp in &mut self.components {
            let mut slot_groups: Vec<Vec<usize>> = Vec::new();
            for (rel, id, start, ar) in self.wide.slots() {
                let _ = (rel, id);
                let attrs = &wide_schema.attrs()[start..start + ar];
                let positions: Option<Vec<usize>> =
                    attrs.iter().map(|a| comp.schema.position(a)).collect();
                if let Some(ps) = positions {
                    slot_groups.push(ps);
                }
            }
            for row in &mut comp.rows {
                for ps in &slot_groups {
                    let any_bot = ps.iter().any(|&p| row[p].is_bottom());
                    let all_bot = ps.iter().all(|&p| row[p].is_bottom());
                    if any_bot && !all_bot {
                        for &p in ps {
                            row[p] = Value::Bottom;
                        }
                    }
                }
            }
            // Canonicalization can merge rows.
            let mut seen = Vec::new();
            comp.rows.retain(|r| {
                if seen.contains(r) {
                    false
                } else {
                    seen.push(r.clone());
                    true
                }
            });
        }
    }

    /// Checks the partition and level properties.
    pub fn validate(&self) -> WsdReport {
        let wide_schema = self.wide.schema();
        let mut covered: BTreeSet<&AttrName> = BTreeSet::new();
        let mut partition_ok = true;
        for comp in &self.components {
            for a in comp.schema.attrs() {
                if !wide_schema.contains(a) || !covered.insert(a) {
                    partition_ok = false;
                }
            }
        }
        if covered.len() != wide_schema.arity() {
            partition_ok = false;
        }

        let mut tuple_level = true;
        for (_, _, start, ar) in self.wide.slots() {
            let attrs = &wide_schema.attrs()[start..start + ar];
            let home: Vec<Option<usize>> = attrs
                .iter()
                .map(|a| self.components.iter().position(|c| c.schema.contains(a)))
                .collect();
            if home.windows(2).any(|w| w[0] != w[1]) {
                tuple_level = false;
            }
        }

        let has_variables = self.has_variables();
        WsdReport {
            partition_ok,
            level: if tuple_level { Level::Tuple } else { Level::Attribute },
            has_variables,
            global_true: self.global.is_empty(),
        }
    }

    pub fn has_variables(&self) -> bool {
        self.has_table_variables() || !self.global.variables().is_empty()
    }

    /// Variables occurring in component rows (the global condition may
    /// mention further variables without affecting the represented tuples).
    pub fn has_table_variables(&self) -> bool {
        self.components
            .iter()
            .any(|c| c.rows.iter().any(|r| r.iter().any(Value::is_variable)))
    }

    pub fn active_domain(&self) -> BTreeSet<String> {
        let mut out = self.global.constants();
        for c in &self.components {
            for row in &c.rows {
                for v in row {
                    if let Some(c) = v.as_constant() {
                        out.insert(c.to_string());
                    }
                }
            }
        }
        out
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = self.global.variables();
        for c in &self.components {
            for row in &c.rows {
                for v in row {
                    if let Some(x) = v.as_variable() {
                        out.insert(x.to_string());
                    }
                }
            }
        }
        out
    }

    /// Positions of each component's attributes inside the flattened wide row.
    pub fn component_positions(&self) -> Vec<Vec<usize>> {
        let wide_schema = self.wide.schema();
        self.components
            .iter()
            .map(|c| {
                c.schema
                    .attrs()
                    .iter()
                    .map(|a| wide_schema.position(a).expect("validated partition"))
                    .collect()
            })
            .collect()
    }

    /// Assembles the wide row selected by one row index per component.
    pub fn assemble(&self, choice: &[usize], positions: &[Vec<usize>]) -> Tuple {
        let mut row = vec![Value::Bottom; self.wide.width()];
        for (comp, (&ri, ps)) in self.components.iter().zip(choice.iter().zip(positions)) {
            for (cell, &p) in comp.rows[ri].iter().zip(ps) {
                row[p] = cell.clone();
            }
        }
        self.wide.canonicalize_row(&mut row);
        row
    }

    /// Iterates over all choices of one row per component.
    pub fn choices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let radix: Vec<usize> = self.components.iter().map(|c| c.rows.len()).collect();
        MixedRadix::new(radix)
    }
}

/// Counts through a mixed-radix space in lexicographic order (first digit
/// most significant); empty when any radix is zero.
pub struct MixedRadix {
    radix: Vec<usize>,
    counters: Vec<usize>,
    done: bool,
}

impl MixedRadix {
    pub fn new(radix: Vec<usize>) -> Self {
        let done = radix.contains(&0);
        MixedRadix { counters: vec![0; radix.len()], radix, done }
    }
}

impl Iterator for MixedRadix {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.counters.clone();
        let mut k = self.counters.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.counters[k] += 1;
            if self.counters[k] < self.radix[k] {
                break;
            }
            self.counters[k] = 0;
        }
        Some(out)
    }
}

/// Represents a finite world-set explicitly as a single-component
/// variable-free decomposition: one row per world, slots padded with bottoms.
pub fn one_wsd_of_worlds(worlds: &[World]) -> Result<Gwsd, WsdError> {
    let mut rels: Vec<(String, Schema, usize)> = Vec::new();
    for w in worlds {
        for (name, rel) in w.relations() {
            match rels.iter_mut().find(|(n, _, _)| n == name) {
                Some(entry) => {
                    if entry.1 != *rel.schema() {
                        return Err(WsdError::Wsd(format!(
                            "worlds disagree on the schema of {name}"
                        )));
                    }
                    entry.2 = entry.2.max(rel.len());
                }
                None => rels.push((name.clone(), rel.schema().clone(), rel.len())),
            }
        }
    }
    if rels.is_empty() {
        return Err(WsdError::Wsd("cannot build a decomposition of no relations".into()));
    }
    for entry in &mut rels {
        entry.2 = entry.2.max(1);
    }
    let wide = WideSchema::new(rels);
    let mut component = Component::new(wide.schema(), vec![])?;
    for w in worlds {
        let mut tables = Vec::new();
        for g in &wide.groups {
            let mut table = crate::tables::GTable::new(g.rel.clone(), g.base.clone());
            if let Some(rel) = w.relation(&g.rel) {
                for t in rel.tuples() {
                    table.push(t.clone()).map_err(|e| WsdError::Wsd(e.to_string()))?;
                }
            }
            tables.push(table);
        }
        let member = crate::tables::GMultitable::new(tables, Conjunction::empty());
        let row = crate::tst::inline(&member, &wide)
            .map_err(|e| WsdError::Wsd(e.to_string()))?;
        component.push(row)?;
    }
    Gwsd::new(wide, vec![component], Conjunction::empty())
}

/// The exact correspondence with a gTST: the product of the components under
/// the shared global condition.
pub fn compose(w: &Gwsd) -> Result<Gtst, WsdError> {
    let rels: Vec<Relation> = w.components.iter().map(Component::to_relation).collect();
    let product = crate::rel::product_all(&rels)
        .map_err(|e| WsdError::Wsd(e.to_string()))?
        .expect("at least one component");
    let wide_schema = w.wide.schema();
    let attrs: Vec<AttrName> = wide_schema.attrs().to_vec();
    let reordered = product.project(&attrs).map_err(|e| WsdError::Wsd(e.to_string()))?;
    let mut rows: Vec<Tuple> = reordered.tuples().cloned().collect();
    for row in &mut rows {
        w.wide.canonicalize_row(row);
    }
    rows.sort();
    rows.dedup();
    let lambda = vec![w.global.clone(); rows.len()];
    Ok(Gtst { wide: w.wide.clone(), rows, lambda })
}

/// Enumerates the worlds of a decomposition under a fixed constant pool:
/// choose one row per component, invert the inlining, and keep the
/// satisfactions of the global condition.
pub fn rep_enumerate_wsd(
    w: &Gwsd,
    pool: &[String],
    max_valuations: u64,
) -> Result<BTreeSet<World>, TableError> {
    let positions = w.component_positions();
    let mut worlds = BTreeSet::new();
    for choice in w.choices() {
        let row = w.assemble(&choice, &positions);
        let mut member = inline_inverse_one(&w.wide, &row);
        member.global = w.global.clone();
        worlds.extend(rep_enumerate_pool(&member.as_cmultitable(), pool, max_valuations)?);
    }
    Ok(worlds)
}

/// Default pool for a decomposition: active domain plus `fresh` constants.
pub fn wsd_pool(w: &Gwsd, fresh: usize) -> Vec<String> {
    crate::tables::shared_pool(&[w.active_domain()], fresh)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::tst::WideSchema;

    fn val(s: &str) -> Value {
        crate::rel::parse_cell(s)
    }

    fn row(cells: &[&str]) -> Tuple {
        cells.iter().map(|c| val(c)).collect()
    }

    /// The two-component decomposition of four worlds over R[A, B].
    pub fn two_component_example() -> Gwsd {
        let wide = WideSchema::new(vec![("R".into(), Schema::of(&["A", "B"]), 2)]);
        let ws = wide.schema();
        let c1 = Component::new(
            Schema::new(ws.attrs()[0..2].to_vec()).unwrap(),
            vec![row(&["1", "2"]), row(&["3", "4"])],
        )
        .unwrap();
        let c2 = Component::new(
            Schema::new(ws.attrs()[2..4].to_vec()).unwrap(),
            vec![row(&["5", "6"]), row(&["_|_", "_|_"])],
        )
        .unwrap();
        Gwsd::new(wide, vec![c1, c2], Conjunction::empty()).unwrap()
    }

    #[test]
    fn compose_two_components() {
        let w = two_component_example();
        let g = compose(&w).unwrap();
        assert_eq!(g.rows.len(), 4);
    }

    #[test]
    fn rep_is_the_four_worlds() {
        let w = two_component_example();
        let worlds = rep_enumerate_wsd(&w, &wsd_pool(&w, 0), 1_000_000).unwrap();
        let mk = |rows: &[&[&str]]| {
            World::single("R", Relation::from_strs(&["A", "B"], rows))
        };
        let expected: BTreeSet<World> = [
            mk(&[&["1", "2"], &["5", "6"]]),
            mk(&[&["1", "2"]]),
            mk(&[&["3", "4"], &["5", "6"]]),
            mk(&[&["3", "4"]]),
        ]
        .into_iter()
        .collect();
        assert_eq!(worlds, expected);
    }

    #[test]
    fn single_component_composes_to_itself() {
        let wide = WideSchema::new(vec![("R".into(), Schema::of(&["A"]), 1)]);
        let comp = Component::new(wide.schema(), vec![row(&["1"]), row(&["2"])]).unwrap();
        let w = Gwsd::new(wide, vec![comp.clone()], Conjunction::empty()).unwrap();
        let g = compose(&w).unwrap();
        let mut want = comp.rows.clone();
        want.sort();
        assert_eq!(g.rows, want);
    }

    #[test]
    fn empty_component_means_empty_world_set() {
        let wide = WideSchema::new(vec![("R".into(), Schema::of(&["A"]), 2)]);
        let ws = wide.schema();
        let c1 = Component::new(Schema::new(vec![ws.attrs()[0].clone()]).unwrap(), vec![
            row(&["1"]),
        ])
        .unwrap();
        let c2 = Component::new(Schema::new(vec![ws.attrs()[1].clone()]).unwrap(), vec![]).unwrap();
        let w = Gwsd::new(wide, vec![c1, c2], Conjunction::empty()).unwrap();
        assert!(compose(&w).unwrap().rows.is_empty());
        let worlds = rep_enumerate_wsd(&w, &wsd_pool(&w, 0), 1_000_000).unwrap();
        assert!(worlds.is_empty());
    }

    #[test]
    fn validate_levels() {
        let w = two_component_example();
        let report = w.validate();
        assert!(report.partition_ok);
        assert_eq!(report.level, Level::Tuple);
        assert!(!report.has_variables);
        assert_eq!(report.class(), "wsd");

        // Split one tuple's two attributes across components: attribute-level.
        let wide = WideSchema::new(vec![("R".into(), Schema::of(&["A", "B"]), 1)]);
        let ws = wide.schema();
        let c1 = Component::new(Schema::new(vec![ws.attrs()[0].clone()]).unwrap(), vec![
            row(&["a"]),
        ])
        .unwrap();
        let c2 = Component::new(Schema::new(vec![ws.attrs()[1].clone()]).unwrap(), vec![
            row(&["b"]),
        ])
        .unwrap();
        let w2 = Gwsd::new(wide, vec![c1, c2], Conjunction::empty()).unwrap();
        let report2 = w2.validate();
        assert!(report2.partition_ok);
        assert_eq!(report2.level, Level::Attribute);
    }

    #[test]
    fn overlapping_components_invalid() {
        let wide = WideSchema::new(vec![("R".into(), Schema::of(&["A", "B"]), 1)]);
        let ws = wide.schema();
        let c1 = Component::new(ws.clone(), vec![row(&["a", "b"])]).unwrap();
        let c2 = Component::new(Schema::new(vec![ws.attrs()[0].clone()]).unwrap(), vec![
            row(&["a"]),
        ])
        .unwrap();
        let w = Gwsd::new(wide, vec![c1, c2], Conjunction::empty()).unwrap();
        assert!(!w.validate().partition_ok);
    }

    #[test]
    fn product_counts_multiply_for_distinct_slots() {
        // Components with two distinct constant rows each: |rep| is the
        // product of the component cardinalities.
        let n = 3usize;
        let wide = WideSchema::new(vec![("R".into(), Schema::of(&["A"]), n)]);
        let ws = wide.schema();
        let mut comps = Vec::new();
        for i in 0..n {
            comps.push(
                Component::new(
                    Schema::new(vec![ws.attrs()[i].clone()]).unwrap(),
                    vec![row(&[&format!("a{i}")]), row(&[&format!("b{i}")])],
                )
                .unwrap(),
            );
        }
        let w = Gwsd::new(wide, comps, Conjunction::empty()).unwrap();
        let worlds = rep_enumerate_wsd(&w, &wsd_pool(&w, 0), 1_000_000).unwrap();
        assert_eq!(worlds.len(), 8);
    }
}
