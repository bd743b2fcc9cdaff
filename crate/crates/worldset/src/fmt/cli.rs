//! Command-line front end: subcommand dispatch over the text formats.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cond::Term;
use crate::decide::{self, Clause3, QProblem, QTarget};
use crate::fmt::{parse, parse_query, parse_tuple, print, print_xmultitable, Document};
use crate::query::{eval_on_world, eval_positive_on_x, Query};
use crate::rel::{CmpOp, SelRhs};
use crate::tables::{rep_enumerate_pool, CMultitable, World, XMultitable};
use crate::translate::{c_to_gwsd, gwsd_to_x, simplify_gwsd, DEFAULT_ATLAS_CAP};
use crate::tst::inline_inverse_one;
use crate::value::Value;
use crate::wsd::{Gwsd, Level};

#[derive(Parser)]
#[command(name = "worldset", version, about = "Incomplete-information database toolkit")]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Args, Clone)]
struct Budget {
    /// Fresh constants added to the enumeration pool (default: one per
    /// variable).
    #[arg(long)]
    budget_fresh: Option<usize>,
    /// Hard cap on valuations tried per enumeration.
    #[arg(long, default_value_t = 4_000_000)]
    budget_max: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate the worlds represented by a document.
    Worlds {
        file: PathBuf,
        #[command(flatten)]
        budget: Budget,
    },
    /// Multiply out a decomposition into its inlined table.
    Compose { file: PathBuf },
    /// Translate between representation systems.
    Translate {
        #[command(subcommand)]
        which: TranslateCmd,
    },
    /// Evaluate a query: closed evaluation on conditioned documents, plain
    /// evaluation on world lists.
    Eval {
        query: String,
        file: PathBuf,
        #[command(flatten)]
        budget: Budget,
    },
    /// Decide a possibility/certainty problem on a decomposition.
    Decide {
        problem: Problem,
        file: PathBuf,
        /// Relation name for tuple problems.
        #[arg(long)]
        rel: Option<String>,
        /// Constant tuple, e.g. "(1, Smith)".
        #[arg(long)]
        tuple: Option<String>,
        /// Instance document (a `worlds` file with one world, or a
        /// `relation` file for query variants).
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Query expression for the q-variants.
        #[arg(long)]
        query: Option<String>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Prime-factorize a relation or maximally decompose a decomposition.
    Factorize {
        file: PathBuf,
        /// Decomposition granularity for decomposition inputs.
        #[arg(long, value_enum, default_value_t = LevelArg::Attribute)]
        level: LevelArg,
    },
    /// Generate a hardness-reduction instance.
    Encode {
        #[command(subcommand)]
        kind: EncodeCmd,
    },
}

#[derive(Subcommand)]
enum TranslateCmd {
    /// Decomposition to an equivalent mutex-conditioned multitable.
    GwsdToX { file: PathBuf },
    /// Conditional multitable to an equivalent single-component
    /// decomposition.
    CToGwsd {
        file: PathBuf,
        /// Cap on variable-plus-constant terms for the enumeration.
        #[arg(long, default_value_t = DEFAULT_ATLAS_CAP)]
        atlas_cap: usize,
        /// Apply the enumeration-verified simplifier to the result.
        #[arg(long)]
        simplify: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Problem {
    TuplePossible,
    TupleCertain,
    InstancePossible,
    InstanceCertain,
    TupleQPossible,
    TupleQCertain,
    InstanceQPossible,
    InstanceQCertain,
    EmptyWorld,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Attribute,
    Tuple,
}

#[derive(Subcommand)]
enum EncodeCmd {
    /// Exact cover by 3-sets: empty world possible iff a cover exists.
    X3c {
        /// Ground set size (a multiple of 3); elements are 1..=N.
        #[arg(long)]
        ground: usize,
        /// A 3-element subset, e.g. "1,5,9"; repeatable.
        #[arg(long = "triple")]
        triples: Vec<String>,
    },
    /// 3CNF satisfiability as tuple q-possibility.
    #[command(name = "3cnf")]
    Cnf3 {
        /// A clause of three literals, negative numbers negated, e.g.
        /// "1,-2,4"; repeatable.
        #[arg(long = "clause", allow_hyphen_values = true)]
        clauses: Vec<String>,
    },
    /// 3DNF tautology as tuple q-certainty.
    #[command(name = "3dnf")]
    Dnf3 {
        #[arg(long = "clause", allow_hyphen_values = true)]
        clauses: Vec<String>,
    },
}

/// A flat key/value report plus the exit code.
pub struct CliOutput {
    pub code: i32,
    pub text: String,
}

struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    fn new() -> Self {
        Report { entries: Vec::new() }
    }

    fn add(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.to_string(), value.into()));
    }

    fn render(&self, format: Format) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            match format {
                Format::Text => {
                    if v.contains('\n') {
                        out.push_str(k);
                        out.push_str(":\n");
                        out.push_str(v);
                        if !v.ends_with('\n') {
                            out.push('\n');
                        }
                    } else {
                        out.push_str(&format!("{k}: {v}\n"));
                    }
                }
                Format::Structured => {
                    if v.contains('\n') {
                        out.push_str(&format!("{k} = <<<\n{v}"));
                        if !v.ends_with('\n') {
                            out.push('\n');
                        }
                        out.push_str(">>>\n");
                    } else {
                        out.push_str(&format!("{k} = {v}\n"));
                    }
                }
            }
        }
        out
    }
}

/// Runs the command line; the verdict of decision commands lives in the
/// report, not the exit code.
pub fn run<I, S>(args: I) -> CliOutput
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return CliOutput { code, text: e.to_string() };
        }
    };
    let format = cli.format;
    match dispatch(cli) {
        Ok(report) => CliOutput { code: 0, text: report.render(format) },
        Err(message) => CliOutput { code: 1, text: format!("error: {message}\n") },
    }
}

fn load(file: &PathBuf) -> Result<Document, String> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| format!("cannot read {}: {e}", file.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", file.display()))
}

fn doc_as_gwsd(doc: Document) -> Result<Gwsd, String> {
    match doc {
        Document::Gwsd(w) => Ok(w),
        Document::Gtst(g) => {
            Gwsd::one_wsd(&g).map_err(|e| e.to_string())
        }
        _ => Err("expected a gwsd or gtst document".into()),
    }
}

/// Interprets a conditional-multitable document as a mutex-conditioned
/// multitable: variables appearing only in local conditions become the mutex
/// variables, with bounds read off their equality atoms.
fn infer_x(c: &CMultitable) -> Result<XMultitable, String> {
    let global = c
        .global
        .as_conjunction()
        .ok_or("global condition must be a conjunction of negated equalities")?;
    let mut table_vars: BTreeSet<String> = global.variables();
    for t in &c.tables {
        for row in &t.rows {
            for v in &row.tuple {
                if let Some(x) = v.as_variable() {
                    table_vars.insert(x.to_string());
                }
            }
        }
    }
    let mut mutex_bound: std::collections::BTreeMap<String, usize> =
        std::collections::BTreeMap::new();
    let mut tables = Vec::new();
    for t in &c.tables {
        let mut xt = crate::tables::XTable::new(t.name.clone(), t.schema.clone());
        for row in &t.rows {
            let local = row
                .local
                .as_conjunction()
                .ok_or("local conditions must be conjunctions")?;
            for atom in local.atoms() {
                for term in atom.terms() {
                    if let Term::Var(v) = term {
                        if !table_vars.contains(v) {
                            let bound = atom
                                .terms()
                                .iter()
                                .filter_map(|t| match t {
                                    Term::Const(c) => c.parse::<usize>().ok(),
                                    _ => None,
                                })
                                .max()
                                .unwrap_or(1);
                            let e = mutex_bound.entry(v.clone()).or_insert(bound);
                            *e = (*e).max(bound);
                        }
                    }
                }
            }
            xt.push(row.tuple.clone(), local);
        }
        tables.push(xt);
    }
    let mutex = crate::cond::MutexSet::with_entries(mutex_bound.into_iter().collect())
        .map_err(|e| e.to_string())?;
    let x = XMultitable { tables, global, mutex };
    if !crate::tables::validate_x(&x) {
        return Err("document does not satisfy the mutex-table conditions".into());
    }
    Ok(x)
}

fn collect_worlds(doc: &Document, budget: &Budget) -> Result<BTreeSet<World>, String> {
    let fresh = budget.budget_fresh;
    let max = budget.budget_max;
    let res = match doc {
        Document::Relation(name, rel) => {
            let mut table = crate::tables::GTable::new(name.clone(), rel.schema().clone());
            for t in rel.tuples() {
                table.push(t.clone()).map_err(|e| e.to_string())?;
            }
            let g = crate::tables::GMultitable::new(vec![table], crate::cond::Conjunction::empty());
            let c = g.as_cmultitable();
            let pool = pool_for(&c, fresh);
            rep_enumerate_pool(&c, &pool, max)
        }
        Document::CMultitable(c) => {
            let pool = pool_for(c, fresh);
            rep_enumerate_pool(c, &pool, max)
        }
        Document::GTabset(ts) => {
            let mut out = BTreeSet::new();
            for m in &ts.members {
                let c = m.as_cmultitable();
                let pool = pool_for(&c, fresh);
                out.extend(rep_enumerate_pool(&c, &pool, max).map_err(|e| e.to_string())?);
            }
            return Ok(out);
        }
        Document::Gtst(g) => {
            let mut out = BTreeSet::new();
            for (row, cond) in g.rows.iter().zip(&g.lambda) {
                let mut member = inline_inverse_one(&g.wide, row);
                member.global = cond.clone();
                let c = member.as_cmultitable();
                let pool = pool_for(&c, fresh);
                out.extend(rep_enumerate_pool(&c, &pool, max).map_err(|e| e.to_string())?);
            }
            return Ok(out);
        }
        Document::Gwsd(w) => {
            let pool = crate::wsd::wsd_pool(w, fresh.unwrap_or_else(|| w.variables().len()));
            crate::wsd::rep_enumerate_wsd(w, &pool, max)
        }
        Document::Worlds(ws) => return Ok(ws.iter().cloned().collect()),
    };
    res.map_err(|e| e.to_string())
}

fn pool_for(c: &CMultitable, fresh: Option<usize>) -> Vec<String> {
    let budget = crate::tables::EnumBudget { fresh, ..Default::default() };
    crate::tables::enumeration_pool(c, &budget)
}

/// When a fresh-constant budget is given explicitly, also list the answer's
/// represented worlds under that budget.
fn answer_worlds(
    report: &mut Report,
    ans: &XMultitable,
    budget: &Budget,
) -> Result<(), String> {
    if budget.budget_fresh.is_none() {
        return Ok(());
    }
    let c = ans.as_cmultitable();
    let pool = pool_for(&c, budget.budget_fresh);
    let worlds = rep_enumerate_pool(&c, &pool, budget.budget_max).map_err(|e| e.to_string())?;
    report.add("count", worlds.len().to_string());
    report.add("worlds", print(&Document::Worlds(worlds.into_iter().collect())));
    Ok(())
}

fn query_to_string(q: &Query) -> String {
    match q {
        Query::Base(n) => n.clone(),
        Query::Unit => "unit".into(),
        Query::Select(inner, atoms) => {
            let parts: Vec<String> = atoms
                .iter()
                .map(|a| {
                    let op = if a.op == CmpOp::Eq { "=" } else { "!=" };
                    let rhs = match &a.rhs {
                        SelRhs::Const(Value::Constant(c)) => {
                            if c.bytes().all(|b| b.is_ascii_digit()) && !c.is_empty() {
                                c.clone()
                            } else {
                                format!("\"{c}\"")
                            }
                        }
                        SelRhs::Const(v) => v.to_string(),
                        SelRhs::Attr(a) => a.rendered(),
                    };
                    format!("{} {} {}", a.lhs.rendered(), op, rhs)
                })
                .collect();
            format!("select[{}]({})", parts.join(", "), query_to_string(inner))
        }
        Query::Project(inner, attrs) => {
            let names: Vec<String> = attrs.iter().map(|a| a.rendered()).collect();
            format!("project[{}]({})", names.join(", "), query_to_string(inner))
        }
        Query::ProjectEmpty(inner) => format!("project[]({})", query_to_string(inner)),
        Query::Product(l, r) => format!("({} * {})", query_to_string(l), query_to_string(r)),
        Query::Union(l, r) => format!("({} + {})", query_to_string(l), query_to_string(r)),
        Query::Difference(l, r) => format!("({} - {})", query_to_string(l), query_to_string(r)),
        Query::Rename(inner, pairs) => {
            let parts: Vec<String> = pairs
                .iter()
                .map(|(a, b)| format!("{} -> {}", a.rendered(), b.rendered()))
                .collect();
            format!("rename[{}]({})", parts.join(", "), query_to_string(inner))
        }
    }
}

fn parse_clause_list(raw: &[String]) -> Result<Vec<Clause3>, String> {
    let mut out = Vec::new();
    for s in raw {
        let lits: Vec<i64> = s
            .split(',')
            .map(|p| p.trim().parse::<i64>().map_err(|e| format!("bad literal `{p}`: {e}")))
            .collect::<Result<_, _>>()?;
        if lits.len() != 3 || lits.contains(&0) {
            return Err(format!("clause `{s}` must have exactly three non-zero literals"));
        }
        out.push([
            (lits[0].unsigned_abs() as usize, lits[0] > 0),
            (lits[1].unsigned_abs() as usize, lits[1] > 0),
            (lits[2].unsigned_abs() as usize, lits[2] > 0),
        ]);
    }
    Ok(out)
}

fn decision_report(report: &mut Report, d: &decide::Decision) {
    report.add("verdict", if d.verdict { "true" } else { "false" });
    report.add(
        "method",
        match d.method {
            decide::Method::Ptime => "ptime",
            decide::Method::BruteForce => "brute-force",
        },
    );
    if let Some(w) = &d.witness {
        if !w.rows.is_empty() {
            let rows: Vec<String> = w.rows.iter().map(|r| r.to_string()).collect();
            report.add("witness.rows", rows.join(","));
        }
        if !w.valuation.is_empty() {
            let vals: Vec<String> =
                w.valuation.iter().map(|(k, v)| format!("{k}={v}")).collect();
            report.add("witness.valuation", vals.join(","));
        }
    }
}

fn dispatch(cli: Cli) -> Result<Report, String> {
    let mut report = Report::new();
    match cli.cmd {
        Cmd::Worlds { file, budget } => {
            let doc = load(&file)?;
            let worlds = collect_worlds(&doc, &budget)?;
            report.add("count", worlds.len().to_string());
            report.add(
                "worlds",
                print(&Document::Worlds(worlds.into_iter().collect())),
            );
        }
        Cmd::Compose { file } => {
            let doc = load(&file)?;
            let w = doc_as_gwsd(doc)?;
            let g = crate::wsd::compose(&w).map_err(|e| e.to_string())?;
            report.add("rows", g.rows.len().to_string());
            report.add("gtst", print(&Document::Gtst(g)));
        }
        Cmd::Translate { which } => match which {
            TranslateCmd::GwsdToX { file } => {
                let doc = load(&file)?;
                let w = doc_as_gwsd(doc)?;
                let x = gwsd_to_x(&w).map_err(|e| e.to_string())?;
                report.add("valid", crate::tables::validate_x(&x).to_string());
                report.add("xmultitable", print_xmultitable(&x));
            }
            TranslateCmd::CToGwsd { file, atlas_cap, simplify } => {
                let doc = load(&file)?;
                let c = match doc {
                    Document::CMultitable(c) => c,
                    _ => return Err("expected a cmultitable document".into()),
                };
                let (w, atlas) = c_to_gwsd(&c, atlas_cap).map_err(|e| e.to_string())?;
                report.add("atlas", atlas.thetas.len().to_string());
                let w = if simplify { simplify_gwsd(&w) } else { w };
                report.add("rows", w.components[0].rows.len().to_string());
                report.add("gwsd", print(&Document::Gwsd(w)));
            }
        },
        Cmd::Eval { query, file, budget } => {
            let q = parse_query(&query).map_err(|e| e.to_string())?;
            let doc = load(&file)?;
            match doc {
                Document::Worlds(ws) => {
                    let mut results = Vec::new();
                    for w in &ws {
                        let r = eval_on_world(&q, w).map_err(|e| e.to_string())?;
                        results.push(World::single(crate::query::ANSWER_NAME, r));
                    }
                    report.add("answers", print(&Document::Worlds(results)));
                }
                Document::CMultitable(c) => {
                    let x = infer_x(&c)?;
                    let ans = eval_positive_on_x(&q, &x).map_err(|e| e.to_string())?;
                    report.add("xmultitable", print_xmultitable(&ans));
                    answer_worlds(&mut report, &ans, &budget)?;
                }
                other => {
                    let w = doc_as_gwsd(other)?;
                    let x = gwsd_to_x(&w).map_err(|e| e.to_string())?;
                    let ans = eval_positive_on_x(&q, &x).map_err(|e| e.to_string())?;
                    report.add("xmultitable", print_xmultitable(&ans));
                    answer_worlds(&mut report, &ans, &budget)?;
                }
            }
        }
        Cmd::Decide { problem, file, rel, tuple, instance, query, budget } => {
            let doc = load(&file)?;
            let w = doc_as_gwsd(doc)?;
            let search = decide::SearchBudget {
                fresh: budget.budget_fresh,
                max_valuations: budget.budget_max,
            };
            let need_tuple = || -> Result<Vec<Value>, String> {
                let t = tuple.clone().ok_or("--tuple required for this problem")?;
                parse_tuple(&t).map_err(|e| e.to_string())
            };
            let need_world = || -> Result<World, String> {
                let path = instance.clone().ok_or("--instance required for this problem")?;
                match load(&path)? {
                    Document::Worlds(ws) if ws.len() == 1 => Ok(ws[0].clone()),
                    Document::Worlds(_) => Err("instance file must hold exactly one world".into()),
                    _ => Err("expected a worlds document".into()),
                }
            };
            let need_rel_target = || -> Result<crate::rel::Relation, String> {
                let path = instance.clone().ok_or("--instance required for this problem")?;
                match load(&path)? {
                    Document::Relation(_, r) => Ok(r),
                    _ => Err("expected a relation document".into()),
                }
            };
            let need_query = || -> Result<Query, String> {
                let q = query.clone().ok_or("--query required for this problem")?;
                parse_query(&q).map_err(|e| e.to_string())
            };
            let d = match problem {
                Problem::TuplePossible => decide::tuple_possible(
                    &w,
                    rel.as_deref().ok_or("--rel required")?,
                    &need_tuple()?,
                ),
                Problem::TupleCertain => decide::tuple_certain(
                    &w,
                    rel.as_deref().ok_or("--rel required")?,
                    &need_tuple()?,
                ),
                Problem::InstancePossible => {
                    decide::instance_possible_with(&w, &need_world()?, &search)
                }
                Problem::InstanceCertain => decide::instance_certain(&w, &need_world()?),
                Problem::TupleQPossible => decide::q_decide_with(
                    QProblem::TupleQPossible,
                    &w,
                    &need_query()?,
                    &QTarget::Tuple(need_tuple()?),
                    &search,
                ),
                Problem::TupleQCertain => decide::q_decide_with(
                    QProblem::TupleQCertain,
                    &w,
                    &need_query()?,
                    &QTarget::Tuple(need_tuple()?),
                    &search,
                ),
                Problem::InstanceQPossible => decide::q_decide_with(
                    QProblem::InstanceQPossible,
                    &w,
                    &need_query()?,
                    &QTarget::Instance(need_rel_target()?),
                    &search,
                ),
                Problem::InstanceQCertain => decide::q_decide_with(
                    QProblem::InstanceQCertain,
                    &w,
                    &need_query()?,
                    &QTarget::Instance(need_rel_target()?),
                    &search,
                ),
                Problem::EmptyWorld => decide::empty_world_possible(&w),
            }
            .map_err(|e| e.to_string())?;
            decision_report(&mut report, &d);
        }
        Cmd::Factorize { file, level } => {
            let doc = load(&file)?;
            match doc {
                Document::Relation(name, rel) => {
                    let f = crate::factorize::factorize_prime(&rel);
                    report.add("factors", f.len().to_string());
                    for (i, factor) in f.factors().iter().enumerate() {
                        report.add(
                            &format!("factor.{}", i + 1),
                            print(&Document::Relation(format!("{name}_{}", i + 1), factor.clone())),
                        );
                    }
                }
                other => {
                    let w = doc_as_gwsd(other)?;
                    let lv = match level {
                        LevelArg::Attribute => Level::Attribute,
                        LevelArg::Tuple => Level::Tuple,
                    };
                    let d = crate::factorize::decompose_wsd_maximal(&w, lv)
                        .map_err(|e| e.to_string())?;
                    report.add("components", d.wsd.components.len().to_string());
                    report.add("maximal", d.maximal.to_string());
                    report.add("gwsd", print(&Document::Gwsd(d.wsd)));
                }
            }
        }
        Cmd::Encode { kind } => {
            let reduction = match kind {
                EncodeCmd::X3c { ground, triples } => {
                    let mut parsed = Vec::new();
                    for t in &triples {
                        let es: Vec<usize> = t
                            .split(',')
                            .map(|p| p.trim().parse::<usize>().map_err(|e| e.to_string()))
                            .collect::<Result<_, _>>()?;
                        if es.len() != 3 {
                            return Err(format!("triple `{t}` must have three elements"));
                        }
                        parsed.push([es[0], es[1], es[2]]);
                    }
                    decide::encode_x3c(ground, &parsed).map_err(|e| e.to_string())?
                }
                EncodeCmd::Cnf3 { clauses } => {
                    let parsed = parse_clause_list(&clauses)?;
                    decide::encode_3cnf(&parsed).map_err(|e| e.to_string())?
                }
                EncodeCmd::Dnf3 { clauses } => {
                    let parsed = parse_clause_list(&clauses)?;
                    decide::encode_3dnf(&parsed).map_err(|e| e.to_string())?
                }
            };
            if let Some(q) = &reduction.query {
                report.add("query", query_to_string(q));
            }
            if let Some(t) = &reduction.target {
                report.add("target", crate::value::tuple_to_string(t));
            }
            report.add("gwsd", print(&Document::Gwsd(reduction.wsd)));
        }
    }
    Ok(report)
}
