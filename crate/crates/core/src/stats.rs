//! Per-query structure counts, structural signatures and corpus summaries.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::simplifier::ast::{BinaryOp, Expr, Query, Select, SelectItem, SetExpr, TableFactor, UnaryOp};
use crate::simplifier::{parse_sql, SqlParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QueryStats {
    pub n_tables: usize,
    pub n_columns: usize,
    /// Deepest subquery nesting below the outermost query.
    pub ast_depth: usize,
    pub n_ops: usize,
    pub n_joins: usize,
    /// Atomic predicates across all WHERE clauses.
    pub n_where: usize,
}

#[derive(Default)]
struct Walk {
    tables: BTreeSet<String>,
    columns: BTreeSet<(String, String)>,
    depth: usize,
    ops: usize,
    joins: usize,
    wheres: usize,
}

/// Source names visible in one select: exposed name -> table (or derived alias).
type Scope = BTreeMap<String, String>;

impl Walk {
    fn query(&mut self, q: &Query, depth: usize, scopes: &mut Vec<Scope>) {
        self.depth = self.depth.max(depth);
        self.ops += usize::from(!q.order_by.is_empty()) + usize::from(q.limit.is_some());
        self.set_expr(&q.body, depth, scopes);
        let own = matches!(q.body, SetExpr::Select(_));
        if own {
            if let SetExpr::Select(s) = &q.body {
                scopes.push(scope_of(s));
            }
        }
        for o in &q.order_by {
            self.expr(&o.expr, depth, scopes);
        }
        if own {
            scopes.pop();
        }
    }

    fn set_expr(&mut self, s: &SetExpr, depth: usize, scopes: &mut Vec<Scope>) {
        match s {
            SetExpr::Select(sel) => self.select(sel, depth, scopes),
            SetExpr::SetOp { left, right, .. } => {
                self.ops += 1;
                self.set_expr(left, depth, scopes);
                self.set_expr(right, depth, scopes);
            }
        }
    }

    fn select(&mut self, s: &Select, depth: usize, scopes: &mut Vec<Scope>) {
        self.ops += 1 + usize::from(!s.group_by.is_empty()) + usize::from(s.having.is_some());
        if let Some(from) = &s.from {
            self.joins += from.joins.len();
            self.ops += from.joins.len();
            for f in from.factors() {
                match f {
                    TableFactor::Table { name, .. } => {
                        self.tables.insert(name.to_ascii_lowercase());
                    }
                    TableFactor::Derived { query, .. } => self.query(query, depth + 1, scopes),
                }
            }
        }
        if let Some(w) = &s.selection {
            let atoms = count_atoms(w);
            self.wheres += atoms;
            self.ops += atoms;
        }
        scopes.push(scope_of(s));
        for e in s.exprs() {
            self.expr(e, depth, scopes);
        }
        scopes.pop();
    }

    fn expr(&mut self, e: &Expr, depth: usize, scopes: &mut Vec<Scope>) {
        e.walk_shallow(&mut |x| {
            if x.is_aggregate_call() {
                self.ops += 1;
            }
            if let Expr::Column { qualifier, name } = x {
                let owner = resolve_column(qualifier.as_deref(), scopes);
                self.columns.insert((owner, name.to_ascii_lowercase()));
            }
        });
        for q in e.subqueries() {
            self.query(q, depth + 1, scopes);
        }
    }
}

fn scope_of(s: &Select) -> Scope {
    let mut scope = Scope::new();
    if let Some(from) = &s.from {
        for f in from.factors() {
            let target = match f {
                TableFactor::Table { name, .. } => name.to_ascii_lowercase(),
                TableFactor::Derived { alias, .. } => alias.clone().unwrap_or_default().to_ascii_lowercase(),
            };
            if let Some(exposed) = f.exposed_name() {
                scope.insert(exposed.to_ascii_lowercase(), target);
            }
        }
    }
    scope
}

fn resolve_column(qualifier: Option<&str>, scopes: &[Scope]) -> String {
    match qualifier {
        Some(q) => {
            let q = q.to_ascii_lowercase();
            scopes.iter().rev().find_map(|s| s.get(&q).cloned()).unwrap_or(q)
        }
        None => match scopes.last() {
            Some(s) if s.len() == 1 => s.values().next().cloned().unwrap_or_default(),
            _ => String::new(),
        },
    }
}

fn count_atoms(e: &Expr) -> usize {
    match e {
        Expr::Binary { op: BinaryOp::And | BinaryOp::Or, left, right } => count_atoms(left) + count_atoms(right),
        Expr::Unary { op: UnaryOp::Not, expr } => count_atoms(expr),
        _ => 1,
    }
}

/// Structure counts of one SQL query.
pub fn query_stats(sql: &str) -> Result<QueryStats, SqlParseError> {
    let q = parse_sql(sql)?;
    let mut w = Walk::default();
    w.query(&q, 0, &mut Vec::new());
    Ok(QueryStats {
        n_tables: w.tables.len(),
        n_columns: w.columns.len(),
        ast_depth: w.depth,
        n_ops: w.ops,
        n_joins: w.joins,
        n_where: w.wheres,
    })
}

/// Canonical skeleton of a query's structural operations, with nesting in
/// brackets; identifiers and literals do not contribute.
pub fn template_signature(sql: &str) -> Result<String, SqlParseError> {
    Ok(sig_query(&parse_sql(sql)?))
}

fn sig_query(q: &Query) -> String {
    let mut tail = Vec::new();
    if !q.order_by.is_empty() {
        let nested: Vec<String> = q.order_by.iter().map(|o| sig_value(&o.expr)).collect();
        tail.push(format!("orderby[{}]", nested.join(",")));
    }
    if q.limit.is_some() {
        tail.push("limit".to_string());
    }
    sig_set(&q.body, tail)
}

fn sig_set(s: &SetExpr, tail: Vec<String>) -> String {
    match s {
        SetExpr::Select(sel) => {
            let mut parts = sig_select(sel);
            parts.extend(tail);
            format!("select({})", parts.join(","))
        }
        SetExpr::SetOp { op, left, right } => {
            let mut parts = vec![sig_set(left, Vec::new()), sig_set(right, Vec::new())];
            parts.extend(tail);
            format!("{}({})", op.keyword().replace(' ', ""), parts.join(","))
        }
    }
}

fn sig_select(s: &Select) -> Vec<String> {
    let mut parts = Vec::new();
    if s.distinct {
        parts.push("distinct".to_string());
    }
    for p in &s.projections {
        parts.push(match p {
            SelectItem::Wildcard | SelectItem::QualifiedWildcard(_) => "star".to_string(),
            SelectItem::Expr { expr, .. } => sig_value(expr),
        });
    }
    if let Some(from) = &s.from {
        for (i, f) in from.factors().enumerate() {
            let head = if i == 0 { "from" } else { "join" };
            parts.push(match f {
                TableFactor::Table { .. } => head.to_string(),
                TableFactor::Derived { query, .. } => format!("{head}[{}]", sig_query(query)),
            });
        }
    }
    if let Some(w) = &s.selection {
        parts.push(format!("where[{}]", sig_pred(w)));
    }
    if !s.group_by.is_empty() {
        parts.push("groupby".to_string());
    }
    if let Some(h) = &s.having {
        parts.push(format!("having[{}]", sig_pred(h)));
    }
    parts
}

/// Value expressions: aggregate names, nested queries, else `col`/`expr`.
fn sig_value(e: &Expr) -> String {
    match e {
        Expr::Column { .. } => "col".to_string(),
        Expr::Literal { .. } => "lit".to_string(),
        Expr::Subquery(q) => sig_query(q),
        Expr::Function { name, args, .. } if e.is_aggregate_call() => {
            let inner: Vec<String> = args.iter().map(sig_value).filter(|s| s != "col").collect();
            if inner.is_empty() {
                name.to_ascii_lowercase()
            } else {
                format!("{}[{}]", name.to_ascii_lowercase(), inner.join(","))
            }
        }
        _ => {
            let nested: Vec<String> = e.subqueries().into_iter().map(sig_query).collect();
            if nested.is_empty() {
                "expr".to_string()
            } else {
                format!("expr[{}]", nested.join(","))
            }
        }
    }
}

fn sig_pred(e: &Expr) -> String {
    match e {
        Expr::Binary { op: op @ (BinaryOp::And | BinaryOp::Or), left, right } => {
            format!("{}({},{})", op.symbol(), sig_pred(left), sig_pred(right))
        }
        Expr::Unary { op: UnaryOp::Not, expr } => format!("not({})", sig_pred(expr)),
        Expr::Binary { op, left, right } => {
            let nested: Vec<String> =
                [left, right].iter().map(|x| sig_value(x)).filter(|s| s != "col" && s != "lit").collect();
            bracket(op.symbol(), nested)
        }
        Expr::InSubquery { query, negated, .. } => {
            bracket(if *negated { "notin" } else { "in" }, vec![sig_query(query)])
        }
        Expr::InList { negated, .. } => (if *negated { "notinlist" } else { "inlist" }).to_string(),
        Expr::Exists(q) => bracket("exists", vec![sig_query(q)]),
        Expr::Between { .. } => "between".to_string(),
        Expr::Like { glob, .. } => (if *glob { "glob" } else { "like" }).to_string(),
        Expr::IsNull { negated, .. } => (if *negated { "notnull" } else { "isnull" }).to_string(),
        other => sig_value(other),
    }
}

fn bracket(head: &str, nested: Vec<String>) -> String {
    if nested.is_empty() {
        head.to_string()
    } else {
        format!("{head}[{}]", nested.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl MetricSummary {
    fn of(values: &[usize]) -> MetricSummary {
        if values.is_empty() {
            return MetricSummary::default();
        }
        let sum: usize = values.iter().sum();
        MetricSummary {
            mean: sum as f64 / values.len() as f64,
            min: *values.iter().min().expect("non-empty") as f64,
            max: *values.iter().max().expect("non-empty") as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_records: usize,
    /// Records whose SQL failed to parse; excluded from the metrics.
    pub n_unparsed: usize,
    pub n_databases: usize,
    pub tables: MetricSummary,
    pub columns: MetricSummary,
    pub ast_depth: MetricSummary,
    pub ops: MetricSummary,
    pub joins: MetricSummary,
    pub where_predicates: MetricSummary,
    pub n_unique_templates: usize,
}

/// Aggregate query statistics over `(db_id, sql)` pairs.
pub fn corpus_stats<'a>(queries: impl IntoIterator<Item = (&'a str, &'a str)>) -> CorpusStats {
    let mut dbs = BTreeSet::new();
    let mut signatures = BTreeSet::new();
    let mut rows: Vec<QueryStats> = Vec::new();
    let mut unparsed = 0;
    for (db, sql) in queries {
        dbs.insert(db.to_string());
        match (query_stats(sql), template_signature(sql)) {
            (Ok(s), Ok(sig)) => {
                rows.push(s);
                signatures.insert(sig);
            }
            _ => unparsed += 1,
        }
    }
    let metric = |f: fn(&QueryStats) -> usize| MetricSummary::of(&rows.iter().map(f).collect::<Vec<_>>());
    CorpusStats {
        n_records: rows.len() + unparsed,
        n_unparsed: unparsed,
        n_databases: dbs.len(),
        tables: metric(|s| s.n_tables),
        columns: metric(|s| s.n_columns),
        ast_depth: metric(|s| s.ast_depth),
        ops: metric(|s| s.n_ops),
        joins: metric(|s| s.n_joins),
        where_predicates: metric(|s| s.n_where),
        n_unique_templates: signatures.len(),
    }
}

#[derive(Deserialize)]
struct SqlRecord {
    db_id: String,
    sql: String,
}

/// Corpus statistics of a JSONL dataset with `db_id` and `sql` fields;
/// malformed lines count as unparsed.
pub fn corpus_stats_file(path: &Path) -> std::io::Result<CorpusStats> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut records = Vec::new();
    let mut malformed = 0;
    for line in file.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<SqlRecord>(&line) {
            Ok(r) => records.push(r),
            Err(_) => malformed += 1,
        }
    }
    let mut stats = corpus_stats(records.iter().map(|r| (r.db_id.as_str(), r.sql.as_str())));
    stats.n_records += malformed;
    stats.n_unparsed += malformed;
    Ok(stats)
}

/// Human-readable table of corpus statistics.
pub fn format_corpus_stats(s: &CorpusStats) -> String {
    let mut out = format!(
        "records {}  unparsed {}  databases {}  unique templates {}\n",
        s.n_records, s.n_unparsed, s.n_databases, s.n_unique_templates
    );
    out.push_str(&format!("{:<18}{:>8}{:>8}{:>8}\n", "metric", "mean", "min", "max"));
    for (name, m) in [
        ("tables", s.tables),
        ("columns", s.columns),
        ("ast depth", s.ast_depth),
        ("operations", s.ops),
        ("joins", s.joins),
        ("where predicates", s.where_predicates),
    ] {
        out.push_str(&format!("{name:<18}{:>8.2}{:>8}{:>8}\n", m.mean, m.min, m.max));
    }
    out
}
