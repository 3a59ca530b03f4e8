//! Plan-to-SQL translation, execution and non-null verification.
//!
//! Row-level steps are accumulated into frames (a joined entity set plus a
//! sequence of filters, sorts and limits); each frame renders as a root
//! join block wrapped once per operation. Aliases are verbose by design:
//! tables are `<entity>_<step id>`, columns `<entity>_<attribute>`.

use std::collections::{HashMap, HashSet};

use crate::db::{quote_ident, Database, DbError, Literal, ResultTable};
use crate::ring::Ring;
use crate::sqr::{
    check_plan, AggOp, AttrRef, AttrTerm, Connective, Direction, DirectionTerm, FilterNode, FilterOp, SortKey, SqrPlan,
    StepOp, ValueTerm,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SqlGenError {
    #[error("no relationship path connects '{from}' to '{to}'")]
    UnreachableEntities { from: String, to: String },
    #[error("unbound attribute or value: {0}")]
    UnboundAttribute(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
}

type GenResult<T> = Result<T, SqlGenError>;

#[derive(Debug, Clone)]
enum RowOp {
    Filter(FilterNode),
    Sort(AttrRef, Direction),
    Limit(u32),
}

#[derive(Debug, Clone)]
struct Frame {
    root: String,
    /// Attributes in first-reference order; determines join order.
    refs: Vec<AttrRef>,
    outputs: Vec<AttrRef>,
    ops: Vec<RowOp>,
}

impl Frame {
    fn touch(&mut self, a: &AttrRef) {
        if !self.refs.contains(a) {
            self.refs.push(a.clone());
        }
    }
}

#[derive(Debug, Clone)]
struct Grouped {
    sql: String,
    key: String,
    values: Vec<String>,
    order: Option<(String, Direction)>,
    limit: Option<u32>,
}

#[derive(Debug, Clone)]
enum Rendered {
    Rows(Frame),
    Grouped(Grouped),
    Scalar { sql: String, columns: Vec<String> },
}

#[derive(Default)]
struct Names {
    attrs: HashMap<AttrRef, String>,
    used: HashSet<String>,
    derived: usize,
    fragments: usize,
}

fn sanitize(s: &str) -> String {
    let mut out: String =
        s.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert_str(0, "c_");
    }
    out
}

impl Names {
    fn fresh(&mut self, base: &str) -> String {
        let base = sanitize(base);
        let mut name = base.clone();
        let mut k = 2;
        while self.used.contains(&name) {
            name = format!("{base}_{k}");
            k += 1;
        }
        self.used.insert(name.clone());
        name
    }

    fn attr(&mut self, a: &AttrRef) -> String {
        if let Some(n) = self.attrs.get(a) {
            return n.clone();
        }
        let n = self.fresh(&format!("{}_{}", a.entity, a.attribute));
        self.attrs.insert(a.clone(), n.clone());
        n
    }

    fn derived(&mut self, base: &str) -> String {
        self.derived += 1;
        let n = self.derived;
        self.fresh(&format!("{base}_d{n}"))
    }
}

struct Gen<'a> {
    ring: &'a Ring,
    plan: &'a SqrPlan,
    prefix: String,
}

fn q(name: &str) -> String {
    quote_ident(name)
}

fn attr_ref(a: &AttrTerm) -> GenResult<&AttrRef> {
    match a {
        AttrTerm::Ref(r) => Ok(r),
        AttrTerm::Slot(s) => Err(SqlGenError::UnboundAttribute(s.to_string())),
        AttrTerm::Link(_) => Err(SqlGenError::UnboundAttribute("unresolved link attribute".into())),
    }
}

fn value_sql(v: &ValueTerm) -> GenResult<String> {
    match v {
        ValueTerm::Literal(l) => Ok(l.to_sql()),
        ValueTerm::Slot(s) => Err(SqlGenError::UnboundAttribute(s.to_string())),
    }
}

fn filter_attrs(f: &FilterNode, out: &mut Vec<AttrRef>) -> GenResult<()> {
    match f {
        FilterNode::Simple { attribute, .. } => out.push(attr_ref(attribute)?.clone()),
        FilterNode::Composite { children, .. } => {
            for c in children {
                filter_attrs(c, out)?;
            }
        }
        FilterNode::Templated { subject, .. } => out.push(attr_ref(subject)?.clone()),
    }
    Ok(())
}

fn dir_sql(d: Direction) -> &'static str {
    match d {
        Direction::Asc => "ASC",
        Direction::Desc => "DESC",
    }
}

fn order_clause(w: &str, key: &str, dir: Direction, tie: &[String]) -> String {
    let mut items = vec![format!("{w}.{} {}", q(key), dir_sql(dir))];
    let mut seen = vec![key.to_string()];
    for t in tie {
        if !seen.contains(t) {
            items.push(format!("{w}.{}", q(t)));
            seen.push(t.clone());
        }
    }
    format!(" ORDER BY {}", items.join(", "))
}

impl<'a> Gen<'a> {
    fn step(&self, id: &str, names: &mut Names) -> GenResult<Rendered> {
        let step = self.plan.step(id).ok_or_else(|| SqlGenError::InvalidPlan(format!("unknown step '{id}'")))?;
        match &step.op {
            StepOp::Retrieve { attribute, .. } => {
                let a = attr_ref(attribute)?.clone();
                Ok(Rendered::Rows(Frame { root: id.to_string(), refs: vec![a.clone()], outputs: vec![a], ops: vec![] }))
            }
            StepOp::Filter { input, predicate } => {
                let mut f = self.rows(input, names)?;
                let mut attrs = Vec::new();
                filter_attrs(predicate, &mut attrs)?;
                for a in &attrs {
                    f.touch(a);
                }
                f.ops.push(RowOp::Filter(predicate.clone()));
                Ok(Rendered::Rows(f))
            }
            StepOp::Aggregate { input, op, group_by } => {
                let frame = self.rows(input, names)?;
                let extras: Vec<AttrRef> = group_by.iter().map(|g| attr_ref(g).cloned()).collect::<GenResult<_>>()?;
                let (sql, cols) = self.frame_sql(&frame, &extras, names)?;
                let w = names.derived(&frame.outputs[0].entity);
                let arg = if frame.outputs.len() == 1 { format!("{w}.{}", q(&cols[0])) } else { "*".to_string() };
                let agg_name = if frame.outputs.len() == 1 {
                    names.fresh(&format!("{}_{}", op.keyword(), cols[0]))
                } else {
                    names.fresh(&format!("{}_rows", op.keyword()))
                };
                let agg = format!("{}({arg})", agg_sql(*op));
                match group_by {
                    Some(_) => {
                        let key = names.attr(&extras[0]);
                        let sql = format!(
                            "SELECT {w}.{k} AS {k}, {agg} AS {a} FROM ({sql}) AS {w} GROUP BY {w}.{k}",
                            k = q(&key),
                            a = q(&agg_name)
                        );
                        Ok(Rendered::Grouped(Grouped { sql, key, values: vec![agg_name], order: None, limit: None }))
                    }
                    None => {
                        let sql = format!("SELECT {agg} AS {} FROM ({sql}) AS {w}", q(&agg_name));
                        Ok(Rendered::Scalar { sql, columns: vec![agg_name] })
                    }
                }
            }
            StepOp::Compare { left, right, op } => {
                let l = self.scalar_subquery(left, names)?;
                let r = self.scalar_subquery(right, names)?;
                let name = names.fresh(&format!("compare_{}{id}", self.prefix));
                let sql = format!("SELECT ({l}) {} ({r}) AS {}", op.sql(), q(&name));
                Ok(Rendered::Scalar { sql, columns: vec![name] })
            }
            StepOp::Sort { input, key, direction } => {
                let dir = match direction {
                    DirectionTerm::Fixed(d) => *d,
                    DirectionTerm::Slot(s) => return Err(SqlGenError::UnboundAttribute(s.to_string())),
                };
                match self.step(input, names)? {
                    Rendered::Rows(mut f) => {
                        let k = match key {
                            SortKey::Value => f.outputs[0].clone(),
                            SortKey::Attr(a) => attr_ref(a)?.clone(),
                        };
                        f.touch(&k);
                        f.ops.push(RowOp::Sort(k, dir));
                        Ok(Rendered::Rows(f))
                    }
                    Rendered::Grouped(mut g) => {
                        let col = match key {
                            SortKey::Value => g.values[0].clone(),
                            SortKey::Attr(_) => g.key.clone(),
                        };
                        g.order = Some((col, dir));
                        Ok(Rendered::Grouped(g))
                    }
                    Rendered::Scalar { .. } => Err(SqlGenError::InvalidPlan("cannot sort a scalar".into())),
                }
            }
            StepOp::Limit { input, n } => match self.step(input, names)? {
                Rendered::Rows(mut f) => {
                    f.ops.push(RowOp::Limit(*n));
                    Ok(Rendered::Rows(f))
                }
                Rendered::Grouped(mut g) => {
                    g.limit = Some(*n);
                    Ok(Rendered::Grouped(g))
                }
                Rendered::Scalar { .. } => Err(SqlGenError::InvalidPlan("cannot limit a scalar".into())),
            },
            StepOp::Collect { inputs } => {
                let parts: Vec<Rendered> = inputs.iter().map(|i| self.step(i, names)).collect::<GenResult<_>>()?;
                self.collect(parts, names)
            }
        }
    }

    fn rows(&self, id: &str, names: &mut Names) -> GenResult<Frame> {
        match self.step(id, names)? {
            Rendered::Rows(f) => Ok(f),
            _ => Err(SqlGenError::InvalidPlan(format!("step '{id}' is not row-level"))),
        }
    }

    fn collect(&self, parts: Vec<Rendered>, names: &mut Names) -> GenResult<Rendered> {
        match &parts[0] {
            Rendered::Rows(first) => {
                let mut merged = first.clone();
                for p in &parts[1..] {
                    let Rendered::Rows(f) = p else {
                        return Err(SqlGenError::InvalidPlan("mixed collect inputs".into()));
                    };
                    for a in &f.refs {
                        merged.touch(a);
                    }
                    merged.outputs.extend(f.outputs.iter().cloned());
                    merged.ops.extend(f.ops.iter().cloned());
                }
                Ok(Rendered::Rows(merged))
            }
            Rendered::Scalar { .. } => {
                let mut cols = Vec::new();
                let mut single = Vec::new();
                let mut subs = Vec::new();
                for p in &parts {
                    let Rendered::Scalar { sql, columns } = p else {
                        return Err(SqlGenError::InvalidPlan("mixed collect inputs".into()));
                    };
                    subs.push((sql.clone(), columns.clone()));
                    single.push(columns.len() == 1);
                }
                let sql = if single.iter().all(|s| *s) {
                    let items: Vec<String> = subs
                        .iter()
                        .map(|(sql, c)| {
                            let n = names.fresh(&c[0]);
                            let item = format!("({sql}) AS {}", q(&n));
                            cols.push(n);
                            item
                        })
                        .collect();
                    format!("SELECT {}", items.join(", "))
                } else {
                    let mut items = Vec::new();
                    let mut from = Vec::new();
                    for (sql, c) in &subs {
                        let w = names.derived("scalar");
                        for col in c {
                            let n = names.fresh(col);
                            items.push(format!("{w}.{} AS {}", q(col), q(&n)));
                            cols.push(n);
                        }
                        from.push(format!("({sql}) AS {w}"));
                    }
                    format!("SELECT {} FROM {}", items.join(", "), from.join(" CROSS JOIN "))
                };
                Ok(Rendered::Scalar { sql, columns: cols })
            }
            Rendered::Grouped(g0) => {
                let key = g0.key.clone();
                let mut items = Vec::new();
                let mut from = String::new();
                let mut values = Vec::new();
                let mut first_alias = String::new();
                for (i, p) in parts.iter().enumerate() {
                    let Rendered::Grouped(g) = p else {
                        return Err(SqlGenError::InvalidPlan("mixed collect inputs".into()));
                    };
                    let w = names.derived("grp");
                    let sql = grouped_sql(g, names);
                    if i == 0 {
                        items.push(format!("{w}.{k} AS {k}", k = q(&key)));
                        from = format!("({sql}) AS {w}");
                        first_alias = w.clone();
                    } else {
                        from.push_str(&format!(
                            " JOIN ({sql}) AS {w} ON {first_alias}.{k} IS {w}.{gk}",
                            k = q(&key),
                            gk = q(&g.key)
                        ));
                    }
                    for v in &g.values {
                        items.push(format!("{w}.{v} AS {v}", v = q(v)));
                        values.push(v.clone());
                    }
                }
                let sql = format!("SELECT {} FROM {from}", items.join(", "));
                Ok(Rendered::Grouped(Grouped { sql, key, values, order: None, limit: None }))
            }
        }
    }

    fn scalar_subquery(&self, id: &str, names: &mut Names) -> GenResult<String> {
        match self.step(id, names)? {
            Rendered::Scalar { sql, .. } => Ok(sql),
            Rendered::Rows(f) => Ok(self.frame_sql(&f, &[], names)?.0),
            Rendered::Grouped(_) => Err(SqlGenError::InvalidPlan(format!("step '{id}' is not scalar"))),
        }
    }

    fn table_alias(&self, entity: &str, root: &str) -> String {
        sanitize(&format!("{entity}_{}{root}", self.prefix))
    }

    fn column(&self, a: &AttrRef) -> GenResult<String> {
        let attr =
            self.ring.attribute(&a.entity, &a.attribute).ok_or_else(|| SqlGenError::UnboundAttribute(a.to_string()))?;
        Ok(attr.column.clone())
    }

    /// Root join block: every referenced attribute, entities joined along
    /// shortest relationship paths in first-reference order.
    fn root_block(&self, frame: &Frame, attrs: &[AttrRef], names: &mut Names) -> GenResult<String> {
        let mut entities: Vec<String> = Vec::new();
        let mut joins = String::new();
        for a in attrs {
            if entities.contains(&a.entity) {
                continue;
            }
            if entities.is_empty() {
                entities.push(a.entity.clone());
                continue;
            }
            let sources: Vec<&str> = entities.iter().map(String::as_str).collect();
            let path = self
                .ring
                .shortest_path_from_set(&sources, &a.entity)
                .ok_or_else(|| SqlGenError::UnreachableEntities { from: entities[0].clone(), to: a.entity.clone() })?;
            for rel in path {
                let (known, new) = if entities.contains(&rel.from_entity) {
                    (rel.from_entity.clone(), rel.to_entity.clone())
                } else {
                    (rel.to_entity.clone(), rel.from_entity.clone())
                };
                let table = &self.entity_table(&new)?;
                let na = self.table_alias(&new, &frame.root);
                let ka = self.table_alias(&known, &frame.root);
                let conds: Vec<String> = rel
                    .join_pairs
                    .iter()
                    .map(|(fc, tc)| {
                        let (fa, ta) = if rel.from_entity == new { (&na, &ka) } else { (&ka, &na) };
                        format!("{fa}.{} = {ta}.{}", q(fc), q(tc))
                    })
                    .collect();
                joins.push_str(&format!(" JOIN {} AS {na} ON {}", q(table), conds.join(" AND ")));
                entities.push(new);
            }
        }
        let base = &entities[0];
        let mut items = Vec::new();
        for a in attrs {
            let alias = names.attr(a);
            items.push(format!(
                "{}.{} AS {}",
                self.table_alias(&a.entity, &frame.root),
                q(&self.column(a)?),
                q(&alias)
            ));
        }
        Ok(format!(
            "SELECT {} FROM {} AS {}{joins}",
            items.join(", "),
            q(&self.entity_table(base)?),
            self.table_alias(base, &frame.root)
        ))
    }

    fn entity_table(&self, entity: &str) -> GenResult<String> {
        self.ring
            .entity(entity)
            .map(|e| e.table.clone())
            .ok_or_else(|| SqlGenError::UnboundAttribute(format!("entity '{entity}'")))
    }

    /// Render a frame projecting its outputs followed by `extras`; returns
    /// the SQL and the projected column names.
    fn frame_sql(&self, frame: &Frame, extras: &[AttrRef], names: &mut Names) -> GenResult<(String, Vec<String>)> {
        let mut frame = frame.clone();
        for a in frame.outputs.clone().iter().chain(extras) {
            frame.touch(a);
        }
        let attrs = frame.refs.clone();
        let all: Vec<String> = attrs.iter().map(|a| names.attr(a)).collect();
        let mut sql = self.root_block(&frame, &attrs, names)?;
        let base = frame.outputs[0].entity.clone();

        let mut outs: Vec<String> = frame.outputs.iter().map(|a| names.attr(a)).collect();
        for e in extras {
            let n = names.attr(e);
            if !outs.contains(&n) {
                outs.push(n);
            }
        }

        let wrap = |inner: &str, cols: &[String], w: &str, tail: &str| {
            let items: Vec<String> = cols.iter().map(|c| format!("{w}.{c} AS {c}", c = q(c))).collect();
            format!("SELECT {} FROM ({inner}) AS {w}{tail}", items.join(", "))
        };

        let mut i = 0;
        let ops = &frame.ops;
        while i < ops.len() {
            let w = names.derived(&base);
            match &ops[i] {
                RowOp::Filter(pred) => {
                    let cond = self.predicate(pred, &w, names)?;
                    sql = wrap(&sql, &all, &w, &format!(" WHERE {cond}"));
                    i += 1;
                }
                RowOp::Sort(key, dir) => {
                    let limit = match ops.get(i + 1) {
                        Some(RowOp::Limit(n)) => Some(*n),
                        _ => None,
                    };
                    let consumed = if limit.is_some() { 2 } else { 1 };
                    let last = i + consumed == ops.len();
                    let cols = if last { &outs } else { &all };
                    let mut tail = order_clause(&w, &names.attr(key), *dir, cols);
                    if let Some(n) = limit {
                        tail.push_str(&format!(" LIMIT {n}"));
                    }
                    sql = wrap(&sql, cols, &w, &tail);
                    i += consumed;
                    if last {
                        return Ok((sql, outs));
                    }
                }
                RowOp::Limit(n) => {
                    sql = wrap(&sql, &all, &w, &format!(" LIMIT {n}"));
                    i += 1;
                }
            }
        }
        let w = names.derived(&base);
        Ok((wrap(&sql, &outs, &w, ""), outs))
    }

    fn predicate(&self, f: &FilterNode, w: &str, names: &mut Names) -> GenResult<String> {
        match f {
            FilterNode::Simple { attribute, op, values, .. } => {
                let col = format!("{w}.{}", q(&names.attr(attr_ref(attribute)?)));
                let vals: Vec<String> = values.iter().map(value_sql).collect::<GenResult<_>>()?;
                let need = |k: usize| {
                    vals.get(k)
                        .cloned()
                        .ok_or_else(|| SqlGenError::InvalidPlan(format!("'{}' missing value", op.keyword())))
                };
                Ok(match op {
                    FilterOp::Eq => format!("{col} = {}", need(0)?),
                    FilterOp::Neq => format!("{col} <> {}", need(0)?),
                    FilterOp::Gt => format!("{col} > {}", need(0)?),
                    FilterOp::Lt => format!("{col} < {}", need(0)?),
                    FilterOp::Gte => format!("{col} >= {}", need(0)?),
                    FilterOp::Lte => format!("{col} <= {}", need(0)?),
                    FilterOp::Between => format!("{col} BETWEEN {} AND {}", need(0)?, need(1)?),
                    FilterOp::Contains => {
                        let text = match values.first() {
                            Some(ValueTerm::Literal(l)) => l.display_text(),
                            _ => return Err(SqlGenError::InvalidPlan("contains needs a literal".into())),
                        };
                        format!("{col} LIKE {}", Literal::Text(format!("%{text}%")).to_sql())
                    }
                    FilterOp::In => format!("{col} IN ({})", vals.join(", ")),
                })
            }
            FilterNode::Composite { connective, children } => {
                let sep = match connective {
                    Connective::And => " AND ",
                    Connective::Or => " OR ",
                };
                let parts: Vec<String> = children
                    .iter()
                    .map(|c| {
                        let s = self.predicate(c, w, names)?;
                        Ok(if matches!(c, FilterNode::Composite { .. }) { format!("({s})") } else { s })
                    })
                    .collect::<GenResult<_>>()?;
                Ok(parts.join(sep))
            }
            FilterNode::Templated { subject, op, fragment, .. } => {
                let col = format!("{w}.{}", q(&names.attr(attr_ref(subject)?)));
                names.fragments += 1;
                let sub =
                    Gen { ring: self.ring, plan: fragment, prefix: format!("{}f{}", self.prefix, names.fragments) };
                let rendered = sub.step(&fragment.result_step, names)?;
                let sql = match rendered {
                    Rendered::Rows(fr) => sub.frame_sql(&fr, &[], names)?.0,
                    Rendered::Scalar { sql, .. } => sql,
                    Rendered::Grouped(g) => {
                        let gw = names.derived("grp");
                        let key = q(&g.key);
                        format!("SELECT {gw}.{key} FROM ({}) AS {gw}", grouped_sql(&g, names))
                    }
                };
                let sym = match op {
                    FilterOp::In => "IN",
                    FilterOp::Eq => "=",
                    FilterOp::Neq => "<>",
                    FilterOp::Gt => ">",
                    FilterOp::Lt => "<",
                    FilterOp::Gte => ">=",
                    FilterOp::Lte => "<=",
                    other => {
                        return Err(SqlGenError::InvalidPlan(format!("templated filter with '{}'", other.keyword())))
                    }
                };
                Ok(format!("{col} {sym} ({sql})"))
            }
        }
    }

    fn finish(&self, r: Rendered, names: &mut Names) -> GenResult<String> {
        Ok(match r {
            Rendered::Rows(f) => self.frame_sql(&f, &[], names)?.0,
            Rendered::Grouped(g) => grouped_sql(&g, names),
            Rendered::Scalar { sql, .. } => sql,
        })
    }
}

fn agg_sql(op: AggOp) -> &'static str {
    match op {
        AggOp::Count => "COUNT",
        AggOp::Sum => "SUM",
        AggOp::Avg => "AVG",
        AggOp::Min => "MIN",
        AggOp::Max => "MAX",
    }
}

fn grouped_sql(g: &Grouped, names: &mut Names) -> String {
    let Some((col, dir)) = &g.order else { return g.sql.clone() };
    let w = names.derived("ranked");
    let mut cols = vec![g.key.clone()];
    cols.extend(g.values.iter().cloned());
    let items: Vec<String> = cols.iter().map(|c| format!("{w}.{c} AS {c}", c = q(c))).collect();
    let mut tail = order_clause(&w, col, *dir, &cols);
    if let Some(n) = g.limit {
        tail.push_str(&format!(" LIMIT {n}"));
    }
    format!("SELECT {} FROM ({}) AS {w}{tail}", items.join(", "), g.sql)
}

/// Translate a filled plan to SQL. The plan must validate against `ring`
/// and contain no placeholders.
pub fn to_sql(plan: &SqrPlan, ring: &Ring) -> Result<String, SqlGenError> {
    if let Some(s) = plan.slots().first() {
        return Err(SqlGenError::UnboundAttribute(s.to_string()));
    }
    let (diags, _) = check_plan(plan, Some(ring));
    if let Some(d) = diags.first() {
        return Err(SqlGenError::InvalidPlan(d.to_string()));
    }
    let g = Gen { ring, plan, prefix: String::new() };
    let mut names = Names::default();
    let r = g.step(&plan.result_step, &mut names)?;
    g.finish(r, &mut names)
}

pub fn execute(sql: &str, db: &Database) -> Result<ResultTable, DbError> {
    db.execute(sql)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailReason {
    Error(String),
    Empty,
    AllNull,
}

impl FailReason {
    pub fn label(&self) -> &'static str {
        match self {
            FailReason::Error(_) => "error",
            FailReason::Empty => "empty",
            FailReason::AllNull => "all-null",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verification {
    Pass,
    Fail(FailReason),
}

impl Verification {
    pub fn passed(&self) -> bool {
        *self == Verification::Pass
    }
}

/// Pass iff the query executes, returns at least one row, and the first row
/// is not entirely null.
pub fn verify_nonnull(sql: &str, db: &Database) -> Verification {
    match db.execute(sql) {
        Err(e) => Verification::Fail(FailReason::Error(e.to_string())),
        Ok(t) if t.rows.is_empty() => Verification::Fail(FailReason::Empty),
        Ok(t) if t.rows[0].iter().all(Literal::is_null) => Verification::Fail(FailReason::AllNull),
        Ok(_) => Verification::Pass,
    }
}
