//! Recursive-descent parser for the document, condition, and query grammars.

use std::collections::BTreeMap;

use crate::cond::{Atom, AtomOp, Condition, Conjunction, Term};
use crate::fmt::lex::{lex, Pos, Tok, Token};
use crate::fmt::Document;
use crate::query::Query;
use crate::rel::{CmpOp, Relation, SelAtom, SelRhs};
use crate::tables::{CMultitable, CTable, GMultitable, GTable, World};
use crate::tst::{Gtst, Tabset, WideSchema};
use crate::value::{AttrName, Schema, Tuple, Value};
use crate::wsd::{Component, Gwsd};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "parse error at {}: {}", self.pos, self.message)
    }
}

impl std::error::Error for ParseError {}

pub struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    pub fn new(input: &str) -> Result<Self, ParseError> {
        let tokens = lex(input).map_err(|e| ParseError { pos: e.pos, message: e.message })?;
        Ok(Parser { tokens, at: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn next(&mut self) -> Tok {
        let t = self.tokens[self.at].tok.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos(), message: message.into() })
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected {want}, found {}", self.peek()))
        }
    }

    fn eat(&mut self, want: Tok) -> bool {
        if *self.peek() == want {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => self.err(format!("expected identifier, found {other}")),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == word => {
                self.next();
                Ok(())
            }
            other => self.err(format!("expected `{word}`, found {other}")),
        }
    }

    fn at_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    fn name_part(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Number(s) => {
                self.next();
                Ok(s)
            }
            other => self.err(format!("expected name part, found {other}")),
        }
    }

    /// Dotted attribute name.
    pub fn attr(&mut self) -> Result<AttrName, ParseError> {
        let mut parts = vec![self.name_part()?];
        while self.eat(Tok::Dot) {
            parts.push(self.name_part()?);
        }
        Ok(AttrName::new(parts))
    }

    fn attr_list(&mut self) -> Result<Vec<AttrName>, ParseError> {
        let mut out = vec![self.attr()?];
        while self.eat(Tok::Comma) {
            out.push(self.attr()?);
        }
        Ok(out)
    }

    fn schema_paren(&mut self) -> Result<Schema, ParseError> {
        self.expect(Tok::LParen)?;
        let pos = self.pos();
        let attrs = self.attr_list()?;
        self.expect(Tok::RParen)?;
        Schema::new(attrs).map_err(|e| ParseError { pos, message: e.to_string() })
    }

    /// Tuple cell: `?v`, `_|_`, a number, an identifier, or a quoted string.
    fn cell(&mut self) -> Result<Value, ParseError> {
        match self.peek().clone() {
            Tok::Question => {
                self.next();
                Ok(Value::variable(self.name_part()?))
            }
            Tok::Bottom => {
                self.next();
                Ok(Value::Bottom)
            }
            Tok::Number(s) | Tok::Ident(s) | Tok::Quoted(s) => {
                self.next();
                Ok(Value::constant(s))
            }
            other => self.err(format!("expected tuple cell, found {other}")),
        }
    }

    pub fn tuple(&mut self) -> Result<Tuple, ParseError> {
        self.expect(Tok::LParen)?;
        let mut cells = vec![self.cell()?];
        while self.eat(Tok::Comma) {
            cells.push(self.cell()?);
        }
        self.expect(Tok::RParen)?;
        Ok(cells)
    }

    /// Condition term: identifier = variable, number or quoted = constant.
    fn cond_term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(Term::var(s))
            }
            Tok::Number(s) | Tok::Quoted(s) => {
                self.next();
                Ok(Term::cons(s))
            }
            other => self.err(format!("expected condition term, found {other}")),
        }
    }

    pub fn condition(&mut self) -> Result<Condition, ParseError> {
        let mut left = self.cond_and()?;
        while self.eat(Tok::Pipe) {
            let right = self.cond_and()?;
            left = Condition::or(left, right);
        }
        Ok(left)
    }

    fn cond_and(&mut self) -> Result<Condition, ParseError> {
        let mut left = self.cond_not()?;
        while self.eat(Tok::Amp) {
            let right = self.cond_not()?;
            left = Condition::and(left, right);
        }
        Ok(left)
    }

    fn cond_not(&mut self) -> Result<Condition, ParseError> {
        if self.eat(Tok::Bang) {
            if self.eat(Tok::LParen) {
                let inner = self.condition()?;
                self.expect(Tok::RParen)?;
                return Ok(Condition::not(inner));
            }
            let inner = self.cond_not()?;
            return Ok(Condition::not(inner));
        }
        if self.at_keyword("true") {
            self.next();
            return Ok(Condition::True);
        }
        if self.eat(Tok::LParen) {
            let inner = self.condition()?;
            self.expect(Tok::RParen)?;
            return Ok(inner);
        }
        let left = self.cond_term()?;
        let op = match self.next() {
            Tok::Eq => AtomOp::Eq,
            Tok::Neq => AtomOp::Neq,
            other => return self.err(format!("expected `=` or `!=`, found {other}")),
        };
        let right = self.cond_term()?;
        Ok(Condition::Atom(Atom::new(left, op, right)))
    }

    /// `where { condition }`; the empty block means `true`.
    fn where_block(&mut self) -> Result<Condition, ParseError> {
        self.keyword("where")?;
        self.expect(Tok::LBrace)?;
        if self.eat(Tok::RBrace) {
            return Ok(Condition::True);
        }
        let c = self.condition()?;
        self.expect(Tok::RBrace)?;
        Ok(c)
    }

    fn conjunction_where(&mut self) -> Result<Conjunction, ParseError> {
        let pos = self.pos();
        let c = self.where_block()?;
        c.as_conjunction().ok_or(ParseError {
            pos,
            message: "expected a conjunction of (in)equalities".into(),
        })
    }

    /// `relation R (A, B) { (1, 2) ... }` with optional per-tuple
    /// `where { ... }` clauses.
    fn relation_block(&mut self) -> Result<CTable, ParseError> {
        self.keyword("relation")?;
        let name = self.ident()?;
        let schema = self.schema_paren()?;
        let mut table = CTable::new(name, schema);
        self.expect(Tok::LBrace)?;
        while !self.eat(Tok::RBrace) {
            let pos = self.pos();
            let tuple = self.tuple()?;
            let local = if self.at_keyword("where") { self.where_block()? } else { Condition::True };
            table
                .push(tuple, local)
                .map_err(|e| ParseError { pos, message: e.to_string() })?;
        }
        Ok(table)
    }

    /// `relation R (A, B) { ... }` admitting bottoms, without conditions;
    /// used for standalone relation documents.
    fn plain_relation(&mut self) -> Result<(String, Relation), ParseError> {
        self.keyword("relation")?;
        let name = self.ident()?;
        let schema = self.schema_paren()?;
        let mut rel = Relation::empty(schema);
        self.expect(Tok::LBrace)?;
        while !self.eat(Tok::RBrace) {
            let pos = self.pos();
            let tuple = self.tuple()?;
            rel.insert(tuple).map_err(|e| ParseError { pos, message: e.to_string() })?;
        }
        Ok((name, rel))
    }

    fn gtable_from(&self, table: CTable, pos: Pos) -> Result<GTable, ParseError> {
        let mut out = GTable::new(table.name.clone(), table.schema.clone());
        for row in &table.rows {
            if row.local != Condition::True {
                return Err(ParseError {
                    pos,
                    message: "local conditions are not allowed here".into(),
                });
            }
            out.push_with_id(row.id.clone(), row.tuple.clone())
                .map_err(|e| ParseError { pos, message: e.to_string() })?;
        }
        Ok(out)
    }

    /// `schema { R (A, B) slots 2 S (C) slots 1 }`.
    fn wide_schema_block(&mut self) -> Result<WideSchema, ParseError> {
        self.keyword("schema")?;
        self.expect(Tok::LBrace)?;
        let mut rels = Vec::new();
        while !self.eat(Tok::RBrace) {
            let name = self.ident()?;
            let schema = self.schema_paren()?;
            self.keyword("slots")?;
            let n = match self.next() {
                Tok::Number(s) => s.parse::<usize>().unwrap_or(0),
                other => return self.err(format!("expected slot count, found {other}")),
            };
            if n == 0 {
                return self.err("slot count must be positive");
            }
            rels.push((name, schema, n));
        }
        Ok(WideSchema::new(rels))
    }

    fn world_block(&mut self) -> Result<World, ParseError> {
        self.keyword("world")?;
        self.expect(Tok::LBrace)?;
        let mut rels = BTreeMap::new();
        while !self.eat(Tok::RBrace) {
            let pos = self.pos();
            let table = self.relation_block()?;
            let mut rel = Relation::empty(table.schema.clone());
            for row in &table.rows {
                if row.local != Condition::True {
                    return Err(ParseError {
                        pos,
                        message: "worlds cannot carry conditions".into(),
                    });
                }
                if row.tuple.iter().any(|v| !v.is_constant()) {
                    return Err(ParseError {
                        pos,
                        message: "worlds hold constants only".into(),
                    });
                }
                rel.insert(row.tuple.clone())
                    .map_err(|e| ParseError { pos, message: e.to_string() })?;
            }
            rels.insert(table.name.clone(), rel);
        }
        Ok(World::new(rels))
    }

    /// Top-level document.
    pub fn document(&mut self) -> Result<Document, ParseError> {
        let doc = match self.peek().clone() {
            Tok::Ident(kw) => match kw.as_str() {
                "relation" => {
                    let (name, rel) = self.plain_relation()?;
                    Document::Relation(name, rel)
                }
                "cmultitable" => {
                    self.next();
                    self.expect(Tok::LBrace)?;
                    let global =
                        if self.at_keyword("where") { self.where_block()? } else { Condition::True };
                    let mut tables = Vec::new();
                    while !self.eat(Tok::RBrace) {
                        tables.push(self.relation_block()?);
                    }
                    Document::CMultitable(CMultitable::new(tables, global))
                }
                "gtabset" => {
                    self.next();
                    self.expect(Tok::LBrace)?;
                    let mut members = Vec::new();
                    while !self.eat(Tok::RBrace) {
                        self.keyword("member")?;
                        self.expect(Tok::LBrace)?;
                        let pos = self.pos();
                        let global = if self.at_keyword("where") {
                            self.conjunction_where()?
                        } else {
                            Conjunction::empty()
                        };
                        let mut tables = Vec::new();
                        while !self.eat(Tok::RBrace) {
                            let p = self.pos();
                            let t = self.relation_block()?;
                            tables.push(self.gtable_from(t, p)?);
                        }
                        let _ = pos;
                        members.push(GMultitable::new(tables, global));
                    }
                    let pos = self.pos();
                    let ts = Tabset::new(members)
                        .map_err(|e| ParseError { pos, message: e.to_string() })?;
                    Document::GTabset(ts)
                }
                "gtst" => {
                    self.next();
                    self.expect(Tok::LBrace)?;
                    let wide = self.wide_schema_block()?;
                    let shared = if self.at_keyword("where") {
                        Some(self.conjunction_where()?)
                    } else {
                        None
                    };
                    let mut rows = Vec::new();
                    let mut lambda = Vec::new();
                    while !self.eat(Tok::RBrace) {
                        self.keyword("row")?;
                        let pos = self.pos();
                        let mut row = self.tuple()?;
                        if row.len() != wide.width() {
                            return Err(ParseError {
                                pos,
                                message: format!(
                                    "row width {} does not match schema width {}",
                                    row.len(),
                                    wide.width()
                                ),
                            });
                        }
                        let cond = if self.at_keyword("where") {
                            self.conjunction_where()?
                        } else {
                            shared.clone().unwrap_or_default()
                        };
                        wide.canonicalize_row(&mut row);
                        rows.push(row);
                        lambda.push(cond);
                    }
                    Document::Gtst(Gtst { wide, rows, lambda })
                }
                "gwsd" => {
                    self.next();
                    self.expect(Tok::LBrace)?;
                    let wide = self.wide_schema_block()?;
                    let global = if self.at_keyword("where") {
                        self.conjunction_where()?
                    } else {
                        Conjunction::empty()
                    };
                    let mut components = Vec::new();
                    while !self.eat(Tok::RBrace) {
                        self.keyword("component")?;
                        let pos = self.pos();
                        let schema = self.schema_paren()?;
                        let mut comp = Component::new(schema, vec![])
                            .map_err(|e| ParseError { pos, message: e.to_string() })?;
                        self.expect(Tok::LBrace)?;
                        while !self.eat(Tok::RBrace) {
                            let p = self.pos();
                            let row = self.tuple()?;
                            comp.push(row)
                                .map_err(|e| ParseError { pos: p, message: e.to_string() })?;
                        }
                        components.push(comp);
                    }
                    let pos = self.pos();
                    let w = Gwsd::new(wide, components, global)
                        .map_err(|e| ParseError { pos, message: e.to_string() })?;
                    Document::Gwsd(w)
                }
                "worlds" => {
                    self.next();
                    self.expect(Tok::LBrace)?;
                    let mut worlds = Vec::new();
                    while !self.eat(Tok::RBrace) {
                        worlds.push(self.world_block()?);
                    }
                    Document::Worlds(worlds)
                }
                other => return self.err(format!("unknown document kind `{other}`")),
            },
            other => return self.err(format!("expected a document, found {other}")),
        };
        self.expect(Tok::Eof)?;
        Ok(doc)
    }

    /// Query grammar: `+` union, `-` difference, `*` product,
    /// `select[...]`, `project[...]`, `rename[A->B]`, `unit`, base names.
    pub fn query(&mut self) -> Result<Query, ParseError> {
        let mut left = self.query_term()?;
        loop {
            if self.eat(Tok::Plus) {
                let right = self.query_term()?;
                left = Query::Union(Box::new(left), Box::new(right));
            } else if self.eat(Tok::Minus) {
                let right = self.query_term()?;
                left = Query::Difference(Box::new(left), Box::new(right));
            } else {
                return Ok(left);
            }
        }
    }

    fn query_term(&mut self) -> Result<Query, ParseError> {
        let mut left = self.query_factor()?;
        while self.eat(Tok::Star) {
            let right = self.query_factor()?;
            left = Query::Product(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn sel_atom(&mut self) -> Result<SelAtom, ParseError> {
        let lhs = self.attr()?;
        let op = match self.next() {
            Tok::Eq => CmpOp::Eq,
            Tok::Neq => CmpOp::Neq,
            other => return self.err(format!("expected `=` or `!=`, found {other}")),
        };
        let rhs = match self.peek().clone() {
            Tok::Number(s) | Tok::Quoted(s) => {
                self.next();
                SelRhs::Const(Value::constant(s))
            }
            Tok::Ident(_) => SelRhs::Attr(self.attr()?),
            other => return self.err(format!("expected attribute or literal, found {other}")),
        };
        Ok(SelAtom { lhs, op, rhs })
    }

    fn query_factor(&mut self) -> Result<Query, ParseError> {
        match self.peek().clone() {
            Tok::Ident(kw) => match kw.as_str() {
                "select" => {
                    self.next();
                    self.expect(Tok::LBracket)?;
                    let mut atoms = vec![self.sel_atom()?];
                    while self.eat(Tok::Comma) || self.eat(Tok::Amp) {
                        atoms.push(self.sel_atom()?);
                    }
                    self.expect(Tok::RBracket)?;
                    self.expect(Tok::LParen)?;
                    let inner = self.query()?;
                    self.expect(Tok::RParen)?;
                    Ok(Query::Select(Box::new(inner), atoms))
                }
                "project" => {
                    self.next();
                    self.expect(Tok::LBracket)?;
                    let attrs = if *self.peek() == Tok::RBracket {
                        Vec::new()
                    } else {
                        self.attr_list()?
                    };
                    self.expect(Tok::RBracket)?;
                    self.expect(Tok::LParen)?;
                    let inner = self.query()?;
                    self.expect(Tok::RParen)?;
                    if attrs.is_empty() {
                        Ok(Query::ProjectEmpty(Box::new(inner)))
                    } else {
                        Ok(Query::Project(Box::new(inner), attrs))
                    }
                }
                "rename" => {
                    self.next();
                    self.expect(Tok::LBracket)?;
                    let mut pairs = Vec::new();
                    loop {
                        let from = self.attr()?;
                        self.expect(Tok::Arrow)?;
                        let to = self.attr()?;
                        pairs.push((from, to));
                        if !self.eat(Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RBracket)?;
                    self.expect(Tok::LParen)?;
                    let inner = self.query()?;
                    self.expect(Tok::RParen)?;
                    Ok(Query::Rename(Box::new(inner), pairs))
                }
                "unit" => {
                    self.next();
                    Ok(Query::Unit)
                }
                name => {
                    self.next();
                    Ok(Query::Base(name.to_string()))
                }
            },
            Tok::LParen => {
                self.next();
                let inner = self.query()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            other => self.err(format!("expected a query, found {other}")),
        }
    }
}

/// Parses a full document.
pub fn parse(input: &str) -> Result<Document, ParseError> {
    Parser::new(input)?.document()
}

/// Parses a query expression.
pub fn parse_query(input: &str) -> Result<Query, ParseError> {
    let mut p = Parser::new(input)?;
    let q = p.query()?;
    p.expect(Tok::Eof)?;
    Ok(q)
}

/// Parses a standalone condition.
pub fn parse_condition(input: &str) -> Result<Condition, ParseError> {
    let mut p = Parser::new(input)?;
    let c = p.condition()?;
    p.expect(Tok::Eof)?;
    Ok(c)
}

/// Parses a constant tuple like `(1, Smith, 2)`.
pub fn parse_tuple(input: &str) -> Result<Tuple, ParseError> {
    let mut p = Parser::new(input)?;
    let t = p.tuple()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}
