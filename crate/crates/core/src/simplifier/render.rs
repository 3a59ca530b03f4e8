//! Single-line SQL rendering with lowercase keywords.

use super::ast::*;
use super::lexer::is_reserved;

pub fn render(q: &Query) -> String {
    let mut out = String::new();
    query(q, &mut out);
    out
}

pub fn render_expr(e: &Expr) -> String {
    let mut out = String::new();
    expr(e, &mut out);
    out
}

/// Identifier text, double-quoted unless it is a plain word.
pub fn ident(name: &str) -> String {
    let plain = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_reserved(name);
    if plain {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('"', "\"\""))
    }
}

fn query(q: &Query, out: &mut String) {
    set_expr(&q.body, out);
    if !q.order_by.is_empty() {
        out.push_str(" order by ");
        for (i, o) in q.order_by.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            expr(&o.expr, out);
            if o.desc {
                out.push_str(" desc");
            }
        }
    }
    if let Some(l) = &q.limit {
        out.push_str(" limit ");
        expr(l, out);
    }
    if let Some(o) = &q.offset {
        out.push_str(" offset ");
        expr(o, out);
    }
}

fn set_expr(s: &SetExpr, out: &mut String) {
    match s {
        SetExpr::Select(sel) => select(sel, out),
        SetExpr::SetOp { op, left, right } => {
            set_expr(left, out);
            out.push(' ');
            out.push_str(op.keyword());
            out.push(' ');
            set_expr(right, out);
        }
    }
}

fn select(s: &Select, out: &mut String) {
    out.push_str("select ");
    if s.distinct {
        out.push_str("distinct ");
    }
    for (i, p) in s.projections.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match p {
            SelectItem::Wildcard => out.push('*'),
            SelectItem::QualifiedWildcard(q) => {
                out.push_str(&ident(q));
                out.push_str(".*");
            }
            SelectItem::Expr { expr: e, alias } => {
                expr(e, out);
                if let Some(a) = alias {
                    out.push_str(" as ");
                    out.push_str(&ident(a));
                }
            }
        }
    }
    if let Some(from) = &s.from {
        out.push_str(" from ");
        factor(&from.base, out);
        for j in &from.joins {
            out.push_str(match j.kind {
                JoinKind::Comma => ", ",
                JoinKind::Inner => " join ",
                JoinKind::Left => " left join ",
                JoinKind::Cross => " cross join ",
            });
            factor(&j.factor, out);
            if let Some(on) = &j.on {
                out.push_str(" on ");
                expr(on, out);
            }
        }
    }
    if let Some(w) = &s.selection {
        out.push_str(" where ");
        expr(w, out);
    }
    if !s.group_by.is_empty() {
        out.push_str(" group by ");
        for (i, g) in s.group_by.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            expr(g, out);
        }
    }
    if let Some(h) = &s.having {
        out.push_str(" having ");
        expr(h, out);
    }
}

fn factor(f: &TableFactor, out: &mut String) {
    match f {
        TableFactor::Table { name, alias } => {
            out.push_str(&ident(name));
            if let Some(a) = alias {
                out.push_str(" as ");
                out.push_str(&ident(a));
            }
        }
        TableFactor::Derived { query: q, alias } => {
            out.push('(');
            query(q, out);
            out.push(')');
            if let Some(a) = alias {
                out.push_str(" as ");
                out.push_str(&ident(a));
            }
        }
    }
}

fn child(e: &Expr, min_prec: u8, out: &mut String) {
    if e.precedence() < min_prec {
        out.push('(');
        expr(e, out);
        out.push(')');
    } else {
        expr(e, out);
    }
}

fn string_literal(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

fn expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Column { qualifier, name } => {
            if let Some(q) = qualifier {
                out.push_str(&ident(q));
                out.push('.');
            }
            out.push_str(&ident(name));
        }
        Expr::Literal { kind, text } => match kind {
            LiteralKind::String => out.push_str(&string_literal(text)),
            _ => out.push_str(text),
        },
        Expr::Binary { op, left, right } => {
            let p = op.precedence();
            child(left, p, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            child(right, p + 1, out);
        }
        Expr::Unary { op, expr: inner } => match op {
            UnaryOp::Not => {
                out.push_str("not ");
                child(inner, 3, out);
            }
            _ => {
                out.push(match op {
                    UnaryOp::Neg => '-',
                    UnaryOp::Plus => '+',
                    _ => '~',
                });
                let mut s = String::new();
                child(inner, 10, &mut s);
                if s.starts_with(['-', '+']) {
                    out.push(' ');
                }
                out.push_str(&s);
            }
        },
        Expr::Function { name, distinct, args, star } => {
            out.push_str(&ident_fn(name));
            out.push('(');
            if *star {
                out.push('*');
            } else {
                if *distinct {
                    out.push_str("distinct ");
                }
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    expr(a, out);
                }
            }
            out.push(')');
        }
        Expr::Subquery(q) => {
            out.push('(');
            query(q, out);
            out.push(')');
        }
        Expr::Exists(q) => {
            out.push_str("exists (");
            query(q, out);
            out.push(')');
        }
        Expr::InList { expr: inner, list, negated } => {
            child(inner, 4, out);
            out.push_str(if *negated { " not in (" } else { " in (" });
            for (i, item) in list.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(item, out);
            }
            out.push(')');
        }
        Expr::InSubquery { expr: inner, query: q, negated } => {
            child(inner, 4, out);
            out.push_str(if *negated { " not in (" } else { " in (" });
            query(q, out);
            out.push(')');
        }
        Expr::Between { expr: inner, low, high, negated } => {
            child(inner, 4, out);
            out.push_str(if *negated { " not between " } else { " between " });
            child(low, 5, out);
            out.push_str(" and ");
            child(high, 5, out);
        }
        Expr::Like { expr: inner, pattern, negated, glob } => {
            child(inner, 4, out);
            out.push(' ');
            if *negated {
                out.push_str("not ");
            }
            out.push_str(if *glob { "glob " } else { "like " });
            child(pattern, 5, out);
        }
        Expr::IsNull { expr: inner, negated } => {
            child(inner, 4, out);
            out.push_str(if *negated { " is not null" } else { " is null" });
        }
        Expr::Case { operand, whens, else_result } => {
            out.push_str("case");
            if let Some(o) = operand {
                out.push(' ');
                expr(o, out);
            }
            for (w, t) in whens {
                out.push_str(" when ");
                expr(w, out);
                out.push_str(" then ");
                expr(t, out);
            }
            if let Some(e) = else_result {
                out.push_str(" else ");
                expr(e, out);
            }
            out.push_str(" end");
        }
        Expr::Cast { expr: inner, type_name } => {
            out.push_str("cast(");
            expr(inner, out);
            out.push_str(" as ");
            out.push_str(type_name);
            out.push(')');
        }
    }
}

/// Function names are words followed by `(`, so reserved words that are
/// also functions (`like`, `replace`) still render bare.
fn ident_fn(name: &str) -> String {
    if name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        name.to_string()
    } else {
        ident(name)
    }
}
