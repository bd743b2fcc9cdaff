//! Representation systems for incomplete-information databases.
//!
//! The crate models sets of possible worlds three ways and translates between
//! them:
//!
//! * conditional multitables (`tables`) — relations over constants and
//!   variables guarded by a global condition and per-tuple local conditions;
//! * tabsets and their inlined single-table form (`tst`);
//! * world-set decompositions (`wsd`) — component relations whose product,
//!   under a conjunction of negated equalities, reconstitutes the inlined
//!   table.
//!
//! On top of those sit query evaluation closed over mutex-conditioned
//! multitables (`query`), polynomial-time and bounded brute-force decision
//! procedures for possibility/certainty questions (`decide`), and relational
//! prime factorization for minimizing decompositions (`factorize`). The
//! `fmt` module provides the text formats and the command-line front end.

pub mod cond;
pub mod decide;
pub mod factorize;
pub mod fmt;
pub mod query;
pub mod rel;
pub mod tables;
pub mod translate;
pub mod tst;
pub mod value;
pub mod wsd;
