//! SQL syntax tree.
//!
//! Parentheses are not represented; the renderer re-inserts them from
//! operator precedence, so `parse(render(ast)) == ast`.

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub body: SetExpr,
    pub order_by: Vec<OrderItem>,
    pub limit: Option<Expr>,
    pub offset: Option<Expr>,
}

impl Query {
    pub fn simple(select: Select) -> Query {
        Query { body: SetExpr::Select(Box::new(select)), order_by: Vec::new(), limit: None, offset: None }
    }

    pub fn as_select(&self) -> Option<&Select> {
        match &self.body {
            SetExpr::Select(s) => Some(s),
            SetExpr::SetOp { .. } => None,
        }
    }

    pub fn as_select_mut(&mut self) -> Option<&mut Select> {
        match &mut self.body {
            SetExpr::Select(s) => Some(s),
            SetExpr::SetOp { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOperator {
    Union,
    UnionAll,
    Intersect,
    Except,
}

impl SetOperator {
    pub fn keyword(self) -> &'static str {
        match self {
            SetOperator::Union => "union",
            SetOperator::UnionAll => "union all",
            SetOperator::Intersect => "intersect",
            SetOperator::Except => "except",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetExpr {
    Select(Box<Select>),
    SetOp { op: SetOperator, left: Box<SetExpr>, right: Box<SetExpr> },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Select {
    pub distinct: bool,
    pub projections: Vec<SelectItem>,
    pub from: Option<FromClause>,
    pub selection: Option<Expr>,
    pub group_by: Vec<Expr>,
    pub having: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectItem {
    Wildcard,
    QualifiedWildcard(String),
    Expr { expr: Expr, alias: Option<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FromClause {
    pub base: TableFactor,
    pub joins: Vec<Join>,
}

impl FromClause {
    pub fn factors(&self) -> impl Iterator<Item = &TableFactor> {
        std::iter::once(&self.base).chain(self.joins.iter().map(|j| &j.factor))
    }

    pub fn factors_mut(&mut self) -> impl Iterator<Item = &mut TableFactor> {
        std::iter::once(&mut self.base).chain(self.joins.iter_mut().map(|j| &mut j.factor))
    }

    pub fn len(&self) -> usize {
        1 + self.joins.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinKind {
    Inner,
    Left,
    Cross,
    /// `a, b`
    Comma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Join {
    pub kind: JoinKind,
    pub factor: TableFactor,
    pub on: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TableFactor {
    Table { name: String, alias: Option<String> },
    Derived { query: Box<Query>, alias: Option<String> },
}

impl TableFactor {
    pub fn alias(&self) -> Option<&str> {
        match self {
            TableFactor::Table { alias, .. } | TableFactor::Derived { alias, .. } => alias.as_deref(),
        }
    }

    pub fn alias_mut(&mut self) -> &mut Option<String> {
        match self {
            TableFactor::Table { alias, .. } | TableFactor::Derived { alias, .. } => alias,
        }
    }

    /// The name column references use to qualify this source.
    pub fn exposed_name(&self) -> Option<&str> {
        match self {
            TableFactor::Table { name, alias } => Some(alias.as_deref().unwrap_or(name)),
            TableFactor::Derived { alias, .. } => alias.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderItem {
    pub expr: Expr,
    pub desc: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiteralKind {
    String,
    Number,
    Null,
    /// `true`, `false`, `current_date` and similar.
    Keyword,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Or,
    And,
    Eq,
    NotEq,
    Is,
    IsNot,
    Lt,
    LtEq,
    Gt,
    GtEq,
    Plus,
    Minus,
    Mul,
    Div,
    Mod,
    Concat,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "or",
            BinaryOp::And => "and",
            BinaryOp::Eq => "=",
            BinaryOp::NotEq => "!=",
            BinaryOp::Is => "is",
            BinaryOp::IsNot => "is not",
            BinaryOp::Lt => "<",
            BinaryOp::LtEq => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::GtEq => ">=",
            BinaryOp::Plus => "+",
            BinaryOp::Minus => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "%",
            BinaryOp::Concat => "||",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::NotEq | BinaryOp::Is | BinaryOp::IsNot => 4,
            BinaryOp::Lt | BinaryOp::LtEq | BinaryOp::Gt | BinaryOp::GtEq => 5,
            BinaryOp::Plus | BinaryOp::Minus => 7,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod => 8,
            BinaryOp::Concat => 9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
    Plus,
    BitNot,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Column { qualifier: Option<String>, name: String },
    Literal { kind: LiteralKind, text: String },
    Binary { op: BinaryOp, left: Box<Expr>, right: Box<Expr> },
    Unary { op: UnaryOp, expr: Box<Expr> },
    Function { name: String, distinct: bool, args: Vec<Expr>, star: bool },
    Subquery(Box<Query>),
    Exists(Box<Query>),
    InList { expr: Box<Expr>, list: Vec<Expr>, negated: bool },
    InSubquery { expr: Box<Expr>, query: Box<Query>, negated: bool },
    Between { expr: Box<Expr>, low: Box<Expr>, high: Box<Expr>, negated: bool },
    Like { expr: Box<Expr>, pattern: Box<Expr>, negated: bool, glob: bool },
    IsNull { expr: Box<Expr>, negated: bool },
    Case { operand: Option<Box<Expr>>, whens: Vec<(Expr, Expr)>, else_result: Option<Box<Expr>> },
    Cast { expr: Box<Expr>, type_name: String },
}

pub const AGGREGATES: &[&str] = &["avg", "count", "group_concat", "max", "min", "sum", "total"];

impl Expr {
    pub fn column(qualifier: Option<&str>, name: &str) -> Expr {
        Expr::Column { qualifier: qualifier.map(str::to_string), name: name.to_string() }
    }

    pub fn binary(op: BinaryOp, left: Expr, right: Expr) -> Expr {
        Expr::Binary { op, left: Box::new(left), right: Box::new(right) }
    }

    pub fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Unary { op: UnaryOp::Not, .. } => 3,
            Expr::InList { .. }
            | Expr::InSubquery { .. }
            | Expr::Between { .. }
            | Expr::Like { .. }
            | Expr::IsNull { .. } => 4,
            Expr::Unary { .. } => 10,
            _ => 11,
        }
    }

    /// Whether this is a call to an aggregate function. `min`/`max` with
    /// more than one argument are scalar functions.
    pub fn is_aggregate_call(&self) -> bool {
        match self {
            Expr::Function { name, args, star, .. } => {
                let n = name.to_ascii_lowercase();
                AGGREGATES.contains(&n.as_str()) && (*star || args.len() == 1 || n == "group_concat")
            }
            _ => false,
        }
    }

    /// Whether an aggregate call occurs in this expression outside nested
    /// subqueries.
    pub fn contains_aggregate(&self) -> bool {
        let mut found = false;
        self.walk_shallow(&mut |e| found |= e.is_aggregate_call());
        found
    }

    /// Visit this expression and its sub-expressions, not descending into
    /// subqueries.
    pub fn walk_shallow<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk_shallow(f);
        }
    }

    pub fn walk_shallow_mut(&mut self, f: &mut dyn FnMut(&mut Expr)) {
        f(self);
        for c in self.children_mut() {
            c.walk_shallow_mut(f);
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Column { .. } | Expr::Literal { .. } | Expr::Subquery(_) | Expr::Exists(_) => Vec::new(),
            Expr::Binary { left, right, .. } => vec![left, right],
            Expr::Unary { expr, .. } | Expr::IsNull { expr, .. } | Expr::Cast { expr, .. } => vec![expr],
            Expr::Function { args, .. } => args.iter().collect(),
            Expr::InList { expr, list, .. } => std::iter::once(&**expr).chain(list.iter()).collect(),
            Expr::InSubquery { expr, .. } => vec![expr],
            Expr::Between { expr, low, high, .. } => vec![expr, low, high],
            Expr::Like { expr, pattern, .. } => vec![expr, pattern],
            Expr::Case { operand, whens, else_result } => {
                let mut v: Vec<&Expr> = Vec::new();
                if let Some(o) = operand {
                    v.push(o);
                }
                for (w, t) in whens {
                    v.push(w);
                    v.push(t);
                }
                if let Some(e) = else_result {
                    v.push(e);
                }
                v
            }
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            Expr::Column { .. } | Expr::Literal { .. } | Expr::Subquery(_) | Expr::Exists(_) => Vec::new(),
            Expr::Binary { left, right, .. } => vec![left, right],
            Expr::Unary { expr, .. } | Expr::IsNull { expr, .. } | Expr::Cast { expr, .. } => vec![expr],
            Expr::Function { args, .. } => args.iter_mut().collect(),
            Expr::InList { expr, list, .. } => std::iter::once(&mut **expr).chain(list.iter_mut()).collect(),
            Expr::InSubquery { expr, .. } => vec![expr],
            Expr::Between { expr, low, high, .. } => vec![expr, low, high],
            Expr::Like { expr, pattern, .. } => vec![expr, pattern],
            Expr::Case { operand, whens, else_result } => {
                let mut v: Vec<&mut Expr> = Vec::new();
                if let Some(o) = operand {
                    v.push(o);
                }
                for (w, t) in whens.iter_mut() {
                    v.push(w);
                    v.push(t);
                }
                if let Some(e) = else_result {
                    v.push(e);
                }
                v
            }
        }
    }

    /// Subqueries directly nested in this expression (not inside other
    /// subqueries).
    pub fn subqueries(&self) -> Vec<&Query> {
        let mut out = Vec::new();
        self.walk_shallow(&mut |e| match e {
            Expr::Subquery(q) | Expr::Exists(q) | Expr::InSubquery { query: q, .. } => out.push(&**q),
            _ => {}
        });
        out
    }

    pub fn for_each_subquery_mut(&mut self, f: &mut dyn FnMut(&mut Query)) {
        self.walk_shallow_mut(&mut |e| match e {
            Expr::Subquery(q) | Expr::Exists(q) | Expr::InSubquery { query: q, .. } => f(q),
            _ => {}
        });
    }

    /// Split a conjunction into its atoms.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        match self {
            Expr::Binary { op: BinaryOp::And, left, right } => {
                let mut v = left.conjuncts();
                v.extend(right.conjuncts());
                v
            }
            other => vec![other],
        }
    }
}

impl Select {
    /// Every top-level expression of this select, in clause order, not
    /// including expressions inside the FROM clause's derived tables.
    pub fn exprs(&self) -> Vec<&Expr> {
        let mut v = Vec::new();
        for p in &self.projections {
            if let SelectItem::Expr { expr, .. } = p {
                v.push(expr);
            }
        }
        if let Some(from) = &self.from {
            for j in &from.joins {
                if let Some(on) = &j.on {
                    v.push(on);
                }
            }
        }
        v.extend(self.selection.iter());
        v.extend(self.group_by.iter());
        v.extend(self.having.iter());
        v
    }

    pub fn exprs_mut(&mut self) -> Vec<&mut Expr> {
        let mut v = Vec::new();
        for p in &mut self.projections {
            if let SelectItem::Expr { expr, .. } = p {
                v.push(expr);
            }
        }
        if let Some(from) = &mut self.from {
            for j in &mut from.joins {
                if let Some(on) = &mut j.on {
                    v.push(on);
                }
            }
        }
        v.extend(self.selection.iter_mut());
        v.extend(self.group_by.iter_mut());
        v.extend(self.having.iter_mut());
        v
    }

    pub fn is_aggregate(&self) -> bool {
        !self.group_by.is_empty()
            || self.having.is_some()
            || self.projections.iter().any(|p| matches!(p, SelectItem::Expr { expr, .. } if expr.contains_aggregate()))
    }
}

/// Visit every query in the tree (pre-order), including the root.
pub fn visit_queries<'a>(q: &'a Query, f: &mut dyn FnMut(&'a Query, usize)) {
    fn go<'a>(q: &'a Query, depth: usize, f: &mut dyn FnMut(&'a Query, usize)) {
        f(q, depth);
        for child in child_queries(q) {
            go(child, depth + 1, f);
        }
    }
    go(q, 0, f);
}

/// Queries nested directly in `q`: derived tables and expression
/// subqueries, in syntactic order.
pub fn child_queries(q: &Query) -> Vec<&Query> {
    let mut out = Vec::new();
    fn set_expr<'a>(s: &'a SetExpr, out: &mut Vec<&'a Query>) {
        match s {
            SetExpr::Select(sel) => {
                for p in &sel.projections {
                    if let SelectItem::Expr { expr, .. } = p {
                        out.extend(expr.subqueries());
                    }
                }
                if let Some(from) = &sel.from {
                    for (i, f) in from.factors().enumerate() {
                        if let TableFactor::Derived { query, .. } = f {
                            out.push(query);
                        }
                        if i > 0 {
                            if let Some(on) = &from.joins[i - 1].on {
                                out.extend(on.subqueries());
                            }
                        }
                    }
                }
                for e in sel.selection.iter().chain(sel.group_by.iter()).chain(sel.having.iter()) {
                    out.extend(e.subqueries());
                }
            }
            SetExpr::SetOp { left, right, .. } => {
                set_expr(left, out);
                set_expr(right, out);
            }
        }
    }
    set_expr(&q.body, &mut out);
    for o in &q.order_by {
        out.extend(o.expr.subqueries());
    }
    out
}
