//! Text formats for relations, multitables, decompositions, conditions, and
//! queries, plus the command-line front end.
//!
//! Documents are line-oriented brace blocks. Variables are written `?x`
//! inside tuples and as bare identifiers inside conditions; constants are
//! bare words or numbers inside tuples and numbers or quoted strings inside
//! conditions; the absence marker is `_|_`. Canonical printing sorts
//! components, tuples, and condition atoms, so `parse . print` is the
//! identity on canonical documents.

pub mod cli;
pub mod lex;
pub mod parse;

use std::fmt::Write as _;

use crate::cond::{Condition, Conjunction};
use crate::rel::Relation;
use crate::tables::{CMultitable, World, XMultitable};
use crate::tst::{Gtst, Tabset, WideSchema};
use crate::value::tuple_to_string;
use crate::wsd::Gwsd;

pub use parse::{parse, parse_condition, parse_query, parse_tuple, ParseError};

/// A parsed or printable document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Document {
    Relation(String, Relation),
    CMultitable(CMultitable),
    GTabset(Tabset),
    Gtst(Gtst),
    Gwsd(Gwsd),
    Worlds(Vec<World>),
}

fn write_schema(out: &mut String, schema: &crate::value::Schema) {
    let names: Vec<String> = schema.attrs().iter().map(|a| a.rendered()).collect();
    let _ = write!(out, "({})", names.join(", "));
}

fn write_where(out: &mut String, indent: &str, cond: &Condition) {
    if *cond != Condition::True {
        let _ = writeln!(out, "{indent}where {{ {cond} }}");
    }
}

fn write_where_conj(out: &mut String, indent: &str, conj: &Conjunction) {
    if !conj.is_empty() {
        let _ = writeln!(out, "{indent}where {{ {conj} }}");
    }
}

fn write_wide(out: &mut String, indent: &str, wide: &WideSchema) {
    let mut line = format!("{indent}schema {{");
    for g in &wide.groups {
        let names: Vec<String> = g.base.attrs().iter().map(|a| a.rendered()).collect();
        let _ = write!(line, " {} ({}) slots {}", g.rel, names.join(", "), g.ids.len());
    }
    line.push_str(" }");
    let _ = writeln!(out, "{line}");
}

/// Canonical printing: components ordered by first attribute, tuples and
/// condition atoms sorted.
pub fn print(doc: &Document) -> String {
    let mut out = String::new();
    match doc {
        Document::Relation(name, rel) => {
            let _ = write!(out, "relation {name} ");
            write_schema(&mut out, rel.schema());
            let _ = writeln!(out, " {{");
            for t in rel.tuples() {
                let _ = writeln!(out, "  {}", tuple_to_string(t));
            }
            let _ = writeln!(out, "}}");
        }
        Document::CMultitable(c) => {
            let _ = writeln!(out, "cmultitable {{");
            write_where(&mut out, "  ", &c.global);
            for t in &c.tables {
                let _ = write!(out, "  relation {} ", t.name);
                write_schema(&mut out, &t.schema);
                let _ = writeln!(out, " {{");
                let mut rows: Vec<(String, &Condition)> =
                    t.rows.iter().map(|r| (tuple_to_string(&r.tuple), &r.local)).collect();
                rows.sort();
                for (tuple, local) in rows {
                    if *local == Condition::True {
                        let _ = writeln!(out, "    {tuple}");
                    } else {
                        let _ = writeln!(out, "    {tuple} where {{ {local} }}");
                    }
                }
                let _ = writeln!(out, "  }}");
            }
            let _ = writeln!(out, "}}");
        }
        Document::GTabset(ts) => {
            let _ = writeln!(out, "gtabset {{");
            for m in &ts.members {
                let _ = writeln!(out, "  member {{");
                write_where_conj(&mut out, "    ", &m.global);
                for t in &m.tables {
                    let _ = write!(out, "    relation {} ", t.name);
                    write_schema(&mut out, &t.schema);
                    let _ = writeln!(out, " {{");
                    let mut rows: Vec<String> =
                        t.tuples().map(|r| tuple_to_string(r)).collect();
                    rows.sort();
                    for r in rows {
                        let _ = writeln!(out, "      {r}");
                    }
                    let _ = writeln!(out, "    }}");
                }
                let _ = writeln!(out, "  }}");
            }
            let _ = writeln!(out, "}}");
        }
        Document::Gtst(g) => {
            let _ = writeln!(out, "gtst {{");
            write_wide(&mut out, "  ", &g.wide);
            let shared = g.shared_phi().cloned();
            if let Some(phi) = &shared {
                write_where_conj(&mut out, "  ", phi);
            }
            let mut rows: Vec<(String, &Conjunction)> = g
                .rows
                .iter()
                .zip(&g.lambda)
                .map(|(r, c)| (tuple_to_string(r), c))
                .collect();
            rows.sort();
            for (row, cond) in rows {
                if shared.is_some() || cond.is_empty() {
                    let _ = writeln!(out, "  row {row}");
                } else {
                    let _ = writeln!(out, "  row {row} where {{ {cond} }}");
                }
            }
            let _ = writeln!(out, "}}");
        }
        Document::Gwsd(w) => {
            let _ = writeln!(out, "gwsd {{");
            write_wide(&mut out, "  ", &w.wide);
            write_where_conj(&mut out, "  ", &w.global);
            let mut comps: Vec<&crate::wsd::Component> = w.components.iter().collect();
            comps.sort_by(|a, b| a.schema.attrs()[0].cmp(&b.schema.attrs()[0]));
            for comp in comps {
                let _ = write!(out, "  component ");
                write_schema(&mut out, &comp.schema);
                let _ = writeln!(out, " {{");
                let mut rows: Vec<String> = comp.rows.iter().map(|r| tuple_to_string(r)).collect();
                rows.sort();
                for r in rows {
                    let _ = writeln!(out, "    {r}");
                }
                let _ = writeln!(out, "  }}");
            }
            let _ = writeln!(out, "}}");
        }
        Document::Worlds(ws) => {
            let _ = writeln!(out, "worlds {{");
            for w in ws {
                let _ = writeln!(out, "  world {{");
                for (name, rel) in w.relations() {
                    let _ = write!(out, "    relation {name} ");
                    write_schema(&mut out, rel.schema());
                    let _ = writeln!(out, " {{");
                    for t in rel.tuples() {
                        let _ = writeln!(out, "      {}", tuple_to_string(t));
                    }
                    let _ = writeln!(out, "    }}");
                }
                let _ = writeln!(out, "  }}");
            }
            let _ = writeln!(out, "}}");
        }
    }
    out
}

/// Prints a mutex-conditioned multitable as a conditional-multitable document
/// (the locals are conjunctions, so the document parses back losslessly); the
/// mutex bounds are recorded in a comment header.
pub fn print_xmultitable(x: &XMultitable) -> String {
    let mut out = String::new();
    if !x.mutex.is_empty() {
        let entries: Vec<String> = x
            .mutex
            .variables()
            .map(|v| format!("{v}:{}", x.mutex.mu(v).unwrap_or(0)))
            .collect();
        let _ = writeln!(out, "# mutex {}", entries.join(" "));
    }
    out.push_str(&print(&Document::CMultitable(x.as_cmultitable())));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmt::parse::parse;

    #[test]
    fn roundtrip_relation() {
        let text = "relation R (A, B) {\n  (_|_, _|_)\n  (1, 2)\n  (3, ?x)\n}\n";
        let doc = parse(text).unwrap();
        assert_eq!(print(&doc), text);
    }

    #[test]
    fn roundtrip_cmultitable() {
        let text = "cmultitable {\n  where { x != 1 & x = z }\n  relation R (A, B) {\n    (?x, 1) where { x != 2 }\n    (?z, ?y) where { y != 2 }\n  }\n}\n";
        let doc = parse(text).unwrap();
        assert_eq!(print(&doc), text);
    }

    #[test]
    fn roundtrip_gwsd() {
        let text = "gwsd {\n  schema { R (A, B) slots 2 }\n  where { x != 1 & x != y & z != 2 }\n  component (R.d1.A, R.d1.B, R.d2.A, R.d2.B) {\n    (1, ?z, ?z, 3)\n    (?x, ?y, _|_, _|_)\n  }\n}\n";
        let doc = parse(text).unwrap();
        assert_eq!(print(&doc), text);
    }

    #[test]
    fn roundtrip_worlds() {
        let text = "worlds {\n  world {\n    relation R (A) {\n      (1)\n    }\n  }\n}\n";
        let doc = parse(text).unwrap();
        assert_eq!(print(&doc), text);
    }

    #[test]
    fn parse_error_position() {
        let err = parse("relation R (A) {\n  (1)\n  (2 ").unwrap_err();
        assert_eq!(err.pos.line, 3);
        assert!(err.message.contains("expected"));
    }

    #[test]
    fn unclosed_component_reports_brace() {
        let err = parse("gwsd { schema { R (A) slots 1 } component (R.d1.A) { (1)").unwrap_err();
        assert!(err.message.contains("expected"));
    }

    #[test]
    fn print_parse_is_canonical_fixpoint() {
        // Non-canonical input: rows out of order; printing sorts them.
        let text = "relation R (A) {\n  (2)\n  (1)\n}\n";
        let doc = parse(text).unwrap();
        let printed = print(&doc);
        let again = parse(&printed).unwrap();
        assert_eq!(print(&again), printed);
    }
}
