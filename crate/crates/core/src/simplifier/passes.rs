//! Rewriting passes, applied together until the tree stops changing.
//!
//! Every pass is conservative: when name resolution cannot be decided
//! without the schema (unqualified references that may be correlated,
//! aliases that could capture outer names) the rewrite is skipped.

use std::collections::{HashMap, HashSet};

use super::ast::*;

const MAX_ROUNDS: usize = 64;

pub fn simplify(q: &Query) -> Query {
    let mut q = q.clone();
    for _ in 0..MAX_ROUNDS {
        let before = q.clone();
        inline_all(&mut q);
        prune_projections(&mut q, Context::Top);
        strip_single_source(&mut q);
        rename_join_aliases(&mut q);
        lowercase(&mut q);
        if q == before {
            break;
        }
    }
    q
}

fn same(a: &str, b: &str) -> bool {
    a.eq_ignore_ascii_case(b)
}

fn contains_name(names: &[String], n: &str) -> bool {
    names.iter().any(|x| same(x, n))
}

// ---------------------------------------------------------------------------
// Traversal helpers

fn for_each_child_query_mut(q: &mut Query, f: &mut dyn FnMut(&mut Query)) {
    fn set_expr(s: &mut SetExpr, f: &mut dyn FnMut(&mut Query)) {
        match s {
            SetExpr::Select(sel) => {
                if let Some(from) = &mut sel.from {
                    for fac in from.factors_mut() {
                        if let TableFactor::Derived { query, .. } = fac {
                            f(query);
                        }
                    }
                }
                for e in sel.exprs_mut() {
                    e.for_each_subquery_mut(f);
                }
            }
            SetExpr::SetOp { left, right, .. } => {
                set_expr(left, f);
                set_expr(right, f);
            }
        }
    }
    set_expr(&mut q.body, f);
    for o in &mut q.order_by {
        o.expr.for_each_subquery_mut(f);
    }
}

fn selects(s: &SetExpr) -> Vec<&Select> {
    match s {
        SetExpr::Select(sel) => vec![sel],
        SetExpr::SetOp { left, right, .. } => {
            let mut v = selects(left);
            v.extend(selects(right));
            v
        }
    }
}

/// Names a query's own FROM clauses bring into scope.
fn scope_names(q: &Query) -> Vec<String> {
    let mut out = Vec::new();
    for sel in selects(&q.body) {
        if let Some(from) = &sel.from {
            out.extend(from.factors().filter_map(|f| f.exposed_name()).map(str::to_string));
        }
    }
    out
}

fn table_names(q: &Query) -> Vec<String> {
    let mut out = Vec::new();
    for sel in selects(&q.body) {
        if let Some(from) = &sel.from {
            for f in from.factors() {
                if let TableFactor::Table { name, .. } = f {
                    out.push(name.clone());
                }
            }
        }
    }
    out
}

/// Every name defined anywhere in `q`, including nested queries.
fn defined_names_deep(q: &Query) -> Vec<String> {
    let mut out = Vec::new();
    visit_queries(q, &mut |sub, _| out.extend(scope_names(sub)));
    out
}

#[derive(Debug, Clone)]
struct ColRef {
    qualifier: Option<String>,
    name: String,
    depth: usize,
}

fn expr_refs(e: &Expr, depth: usize, out: &mut Vec<ColRef>) {
    e.walk_shallow(&mut |x| {
        if let Expr::Column { qualifier, name } = x {
            out.push(ColRef { qualifier: qualifier.clone(), name: name.clone(), depth });
        }
    });
    for sub in e.subqueries() {
        query_refs(sub, depth + 1, out);
    }
}

fn select_refs(sel: &Select, depth: usize, include_from: bool, out: &mut Vec<ColRef>) {
    for e in sel.exprs() {
        expr_refs(e, depth, out);
    }
    if include_from {
        if let Some(from) = &sel.from {
            for f in from.factors() {
                if let TableFactor::Derived { query, .. } = f {
                    query_refs(query, depth + 1, out);
                }
            }
        }
    }
}

fn query_refs(q: &Query, depth: usize, out: &mut Vec<ColRef>) {
    for sel in selects(&q.body) {
        select_refs(sel, depth, true, out);
    }
    for o in &q.order_by {
        expr_refs(&o.expr, depth, out);
    }
}

/// Column references of a single-select query, excluding its FROM-clause
/// derived tables; ORDER BY references are reported separately.
fn outer_refs(q: &Query, sel: &Select) -> (Vec<ColRef>, Vec<ColRef>) {
    let mut body = Vec::new();
    select_refs(sel, 0, false, &mut body);
    let mut order = Vec::new();
    for o in &q.order_by {
        expr_refs(&o.expr, 0, &mut order);
    }
    (body, order)
}

/// Replace column references throughout `q` (and its nested queries)
/// using `f`; descent stops at nested queries that define one of `shadow`.
fn map_columns(q: &mut Query, shadow: &[String], f: &mut dyn FnMut(&Expr, usize) -> Option<Expr>, depth: usize) {
    fn map_expr(e: &mut Expr, shadow: &[String], f: &mut dyn FnMut(&Expr, usize) -> Option<Expr>, depth: usize) {
        if let Some(r) = f(e, depth) {
            *e = r;
            return;
        }
        match e {
            Expr::Subquery(q) | Expr::Exists(q) => map_columns(q, shadow, f, depth + 1),
            Expr::InSubquery { expr, query, .. } => {
                map_expr(expr, shadow, f, depth);
                map_columns(query, shadow, f, depth + 1);
            }
            _ => {
                for c in e.children_mut() {
                    map_expr(c, shadow, f, depth);
                }
            }
        }
    }
    fn set_expr(s: &mut SetExpr, shadow: &[String], f: &mut dyn FnMut(&Expr, usize) -> Option<Expr>, depth: usize) {
        match s {
            SetExpr::Select(sel) => {
                for e in sel.exprs_mut() {
                    map_expr(e, shadow, f, depth);
                }
                if let Some(from) = &mut sel.from {
                    for fac in from.factors_mut() {
                        if let TableFactor::Derived { query, .. } = fac {
                            map_columns(query, shadow, f, depth + 1);
                        }
                    }
                }
            }
            SetExpr::SetOp { left, right, .. } => {
                set_expr(left, shadow, f, depth);
                set_expr(right, shadow, f, depth);
            }
        }
    }
    if depth > 0 && scope_names(q).iter().any(|n| contains_name(shadow, n)) {
        return;
    }
    set_expr(&mut q.body, shadow, f, depth);
    for o in &mut q.order_by {
        map_expr(&mut o.expr, shadow, f, depth);
    }
}

/// Output column names of a select, `None` for unnamed expressions.
fn output_names(sel: &Select) -> Option<Vec<Option<String>>> {
    sel.projections
        .iter()
        .map(|p| match p {
            SelectItem::Expr { alias: Some(a), .. } => Some(Some(a.clone())),
            SelectItem::Expr { expr: Expr::Column { name, .. }, alias: None } => Some(Some(name.clone())),
            SelectItem::Expr { .. } => Some(None),
            _ => None,
        })
        .collect()
}

/// Aliases that rename an expression (as opposed to repeating a column's
/// own name).
fn renaming_aliases(sel: &Select) -> Vec<String> {
    sel.projections
        .iter()
        .filter_map(|p| match p {
            SelectItem::Expr { expr: Expr::Column { name, .. }, alias: Some(a) } if same(name, a) => None,
            SelectItem::Expr { alias: Some(a), .. } => Some(a.clone()),
            _ => None,
        })
        .collect()
}

fn and_opt(a: Option<Expr>, b: Option<Expr>) -> Option<Expr> {
    match (a, b) {
        (Some(a), Some(b)) => Some(Expr::binary(BinaryOp::And, a, b)),
        (a, b) => a.or(b),
    }
}

// ---------------------------------------------------------------------------
// Pass: inline derived tables

fn inline_all(q: &mut Query) {
    for_each_child_query_mut(q, &mut |c| inline_all(c));
    while try_inline(q) {}
}

fn try_inline(q: &mut Query) -> bool {
    let Some(outer) = q.as_select() else { return false };
    let Some(from) = &outer.from else { return false };
    if !from.joins.is_empty() {
        return false;
    }
    let TableFactor::Derived { query: inner_q, alias: dalias } = &from.base else { return false };
    let Some(inner) = inner_q.as_select() else { return false };
    let Some(names) = output_names(inner) else { return false };
    let mut out_names: Vec<String> = Vec::new();
    for n in names.iter().flatten() {
        if contains_name(&out_names, n) {
            return false;
        }
        out_names.push(n.clone());
    }
    let inner_sources = scope_names(inner_q);

    let (body_refs, order_refs) = outer_refs(q, outer);
    let outer_aliases = renaming_aliases(outer);
    for r in body_refs.iter().chain(order_refs.iter()) {
        match &r.qualifier {
            Some(qual) if dalias.as_deref().is_some_and(|d| same(d, qual)) => {
                if !contains_name(&out_names, &r.name) {
                    return false;
                }
            }
            Some(qual) => {
                if contains_name(&inner_sources, qual) {
                    return false;
                }
            }
            None if r.depth > 0 => return false,
            None => {
                if !contains_name(&out_names, &r.name) && !contains_name(&outer_aliases, &r.name) {
                    return false;
                }
            }
        }
    }
    if body_refs.iter().any(|r| r.qualifier.is_none() && contains_name(&outer_aliases, &r.name)) {
        return false;
    }
    for child in child_queries(q) {
        if std::ptr::eq(child, &**inner_q) {
            continue;
        }
        if defined_names_deep(child).iter().any(|n| contains_name(&inner_sources, n)) {
            return false;
        }
    }

    let inner_plain = !inner.distinct
        && inner.group_by.is_empty()
        && inner.having.is_none()
        && !inner.is_aggregate()
        && inner_q.order_by.is_empty()
        && inner_q.limit.is_none()
        && inner_q.offset.is_none();
    let outer_pure = !outer.distinct
        && outer.selection.is_none()
        && outer.group_by.is_empty()
        && outer.having.is_none()
        && !outer.is_aggregate()
        && outer.projections.iter().all(|p| matches!(p, SelectItem::Expr { expr, .. } if expr.subqueries().is_empty()));
    let outer_ordered = !q.order_by.is_empty() || q.limit.is_some() || q.offset.is_some();
    let inner_ordered = !inner_q.order_by.is_empty() || inner_q.limit.is_some() || inner_q.offset.is_some();

    if inner_plain {
        inline_plain(q, &outer_aliases);
        true
    } else if outer_pure && !(outer_ordered && inner_ordered) && !inner.distinct {
        // Unqualified references inside the inner query's HAVING/ORDER BY may
        // name its own output aliases, which are about to be replaced.
        let inner_aliases = renaming_aliases(inner);
        let mut inner_tail = Vec::new();
        if let Some(h) = &inner.having {
            expr_refs(h, 0, &mut inner_tail);
        }
        for o in &inner_q.order_by {
            expr_refs(&o.expr, 0, &mut inner_tail);
        }
        if inner_tail.iter().any(|r| r.qualifier.is_none() && contains_name(&inner_aliases, &r.name)) {
            return false;
        }
        merge_projection(q, &outer_aliases)
    } else {
        false
    }
}

/// Substitution map from the inner query's output names to its expressions.
fn substitution(inner: &Select) -> HashMap<String, Expr> {
    let mut map = HashMap::new();
    for p in &inner.projections {
        if let SelectItem::Expr { expr, alias } = p {
            let name = match (alias, expr) {
                (Some(a), _) => a.clone(),
                (None, Expr::Column { name, .. }) => name.clone(),
                _ => continue,
            };
            map.insert(name.to_ascii_lowercase(), expr.clone());
        }
    }
    map
}

fn take_inner(q: &mut Query) -> (Query, Option<String>) {
    let sel = q.as_select_mut().expect("single select");
    let from = sel.from.take().expect("has from");
    match from.base {
        TableFactor::Derived { query, alias } => (*query, alias),
        TableFactor::Table { .. } => unreachable!("checked by caller"),
    }
}

fn substitute(q: &mut Query, dalias: &Option<String>, map: &HashMap<String, Expr>, outer_aliases: &[String]) {
    let order = std::mem::take(&mut q.order_by);
    let mut f = |e: &Expr, _depth: usize| -> Option<Expr> {
        let Expr::Column { qualifier, name } = e else { return None };
        let matches = match qualifier {
            Some(qual) => dalias.as_deref().is_some_and(|d| same(d, qual)),
            None => true,
        };
        if matches {
            map.get(&name.to_ascii_lowercase()).cloned()
        } else {
            None
        }
    };
    map_columns(q, &[], &mut f, 0);
    let mut order = order;
    for o in &mut order {
        let alias_ref = matches!(&o.expr, Expr::Column { qualifier: None, name } if contains_name(outer_aliases, name));
        if !alias_ref {
            let mut tmp = Query::simple(Select {
                projections: vec![SelectItem::Expr { expr: o.expr.clone(), alias: None }],
                ..Default::default()
            });
            map_columns(&mut tmp, &[], &mut f, 0);
            if let Some(SelectItem::Expr { expr, .. }) = tmp.as_select().and_then(|s| s.projections.first()) {
                o.expr = expr.clone();
            }
        }
    }
    q.order_by = order;
}

fn inline_plain(q: &mut Query, outer_aliases: &[String]) {
    let (inner_q, dalias) = take_inner(q);
    let inner = match inner_q.body {
        SetExpr::Select(s) => *s,
        SetExpr::SetOp { .. } => unreachable!("checked by caller"),
    };
    let map = substitution(&inner);
    substitute(q, &dalias, &map, outer_aliases);
    let sel = q.as_select_mut().expect("single select");
    sel.from = inner.from;
    let outer_where = sel.selection.take();
    sel.selection = and_opt(inner.selection, outer_where);
}

fn merge_projection(q: &mut Query, outer_aliases: &[String]) -> bool {
    let snapshot = q.clone();
    let (mut inner_q, dalias) = take_inner(q);
    let inner_sel = inner_q.as_select().expect("single select").clone();
    let map = substitution(&inner_sel);
    substitute(q, &dalias, &map, outer_aliases);
    let outer = q.as_select().expect("single select").clone();
    let mut projections = Vec::new();
    for p in &outer.projections {
        let SelectItem::Expr { expr, alias } = p else {
            *q = snapshot;
            return false;
        };
        let orig_name = match &snapshot.as_select().expect("single select").projections[projections.len()] {
            SelectItem::Expr { alias: Some(a), .. } => Some(a.clone()),
            SelectItem::Expr { expr: Expr::Column { name, .. }, .. } => Some(name.clone()),
            _ => None,
        };
        let alias = match (alias, &orig_name, expr) {
            (Some(a), _, _) => Some(a.clone()),
            (None, Some(n), Expr::Column { name, .. }) if same(n, name) => None,
            (None, n, _) => n.clone(),
        };
        projections.push(SelectItem::Expr { expr: expr.clone(), alias });
    }
    let inner = inner_q.as_select_mut().expect("single select");
    if inner.group_by.is_empty()
        && inner.is_aggregate()
        && !projections.iter().any(|p| matches!(p, SelectItem::Expr { expr, .. } if expr.contains_aggregate()))
    {
        *q = snapshot;
        return false;
    }
    inner.projections = projections;
    if !q.order_by.is_empty() || q.limit.is_some() || q.offset.is_some() {
        inner_q.order_by = std::mem::take(&mut q.order_by);
        inner_q.limit = q.limit.take();
        inner_q.offset = q.offset.take();
    }
    *q = inner_q;
    true
}

// ---------------------------------------------------------------------------
// Pass: drop unused aliases and unreferenced derived-table columns

#[derive(Clone, Copy, PartialEq, Eq)]
enum Context {
    Top,
    Expression,
    Derived,
    SetOperand,
}

fn prune_projections(q: &mut Query, ctx: Context) {
    // Children first, each with its own context.
    let parent_refs = derived_refs(q);
    {
        fn set_expr(s: &mut SetExpr, refs: &HashMap<usize, Option<Vec<String>>>, counter: &mut usize) {
            match s {
                SetExpr::Select(sel) => {
                    if let Some(from) = &mut sel.from {
                        for fac in from.factors_mut() {
                            if let TableFactor::Derived { query, .. } = fac {
                                let idx = *counter;
                                *counter += 1;
                                prune_projections(query, Context::Derived);
                                if let Some(Some(used)) = refs.get(&idx) {
                                    prune_derived(query, used);
                                }
                            }
                        }
                    }
                    for e in sel.exprs_mut() {
                        e.for_each_subquery_mut(&mut |sub| prune_projections(sub, Context::Expression));
                    }
                }
                SetExpr::SetOp { left, right, .. } => {
                    set_expr(left, refs, counter);
                    set_expr(right, refs, counter);
                }
            }
        }
        let mut counter = 0;
        set_expr(&mut q.body, &parent_refs, &mut counter);
        for o in &mut q.order_by {
            o.expr.for_each_subquery_mut(&mut |sub| prune_projections(sub, Context::Expression));
        }
    }
    let ctx = if matches!(q.body, SetExpr::SetOp { .. }) { Context::SetOperand } else { ctx };
    match ctx {
        Context::Top | Context::Expression => drop_unreferenced_aliases(q),
        Context::Derived => drop_identical_aliases(q),
        Context::SetOperand => {}
    }
}

/// For each derived table (in FROM order across the query's selects), the
/// output names its parent references, or `None` when every column may be
/// used.
fn derived_refs(q: &Query) -> HashMap<usize, Option<Vec<String>>> {
    let mut out = HashMap::new();
    let mut idx = 0;
    let mut all_refs = Vec::new();
    for o in &q.order_by {
        expr_refs(&o.expr, 0, &mut all_refs);
    }
    for sel in selects(&q.body) {
        let mut refs = all_refs.clone();
        select_refs(sel, 0, false, &mut refs);
        let wildcard = |name: Option<&str>| {
            sel.projections.iter().any(|p| match p {
                SelectItem::Wildcard => true,
                SelectItem::QualifiedWildcard(w) => name.is_some_and(|n| same(n, w)),
                _ => false,
            })
        };
        if let Some(from) = &sel.from {
            for f in from.factors() {
                if let TableFactor::Derived { alias, .. } = f {
                    let used = if wildcard(alias.as_deref()) {
                        None
                    } else {
                        let mut names = Vec::new();
                        for r in &refs {
                            let hit = match &r.qualifier {
                                Some(qual) => alias.as_deref().is_some_and(|a| same(a, qual)),
                                None => true,
                            };
                            if hit && !contains_name(&names, &r.name) {
                                names.push(r.name.clone());
                            }
                        }
                        Some(names)
                    };
                    out.insert(idx, used);
                    idx += 1;
                }
            }
        }
    }
    out
}

fn prune_derived(q: &mut Query, used: &[String]) {
    let order_names: Vec<String> = {
        let mut refs = Vec::new();
        for o in &q.order_by {
            expr_refs(&o.expr, 0, &mut refs);
        }
        refs.into_iter().filter(|r| r.qualifier.is_none()).map(|r| r.name).collect()
    };
    let Some(sel) = q.as_select_mut() else { return };
    if sel.distinct {
        return;
    }
    let mut having_names = Vec::new();
    if let Some(h) = &sel.having {
        let mut refs = Vec::new();
        expr_refs(h, 0, &mut refs);
        having_names.extend(refs.into_iter().filter(|r| r.qualifier.is_none()).map(|r| r.name));
    }
    let grouped = !sel.group_by.is_empty();
    let mut keep: Vec<bool> = sel
        .projections
        .iter()
        .map(|p| match p {
            SelectItem::Expr { alias, expr } => {
                let name = alias.clone().or_else(|| match expr {
                    Expr::Column { name, .. } => Some(name.clone()),
                    _ => None,
                });
                match name {
                    Some(n) => {
                        contains_name(used, &n) || contains_name(&order_names, &n) || contains_name(&having_names, &n)
                    }
                    None => false,
                }
            }
            _ => true,
        })
        .collect();
    if !grouped && sel.is_aggregate() {
        let agg_kept = sel
            .projections
            .iter()
            .zip(&keep)
            .any(|(p, k)| *k && matches!(p, SelectItem::Expr { expr, .. } if expr.contains_aggregate()));
        if !agg_kept {
            if let Some(i) = sel
                .projections
                .iter()
                .position(|p| matches!(p, SelectItem::Expr { expr, .. } if expr.contains_aggregate()))
            {
                keep[i] = true;
            }
        }
    }
    if !keep.iter().any(|k| *k) {
        keep[0] = true;
    }
    let mut i = 0;
    sel.projections.retain(|_| {
        let k = keep[i];
        i += 1;
        k
    });
}

fn drop_identical_aliases(q: &mut Query) {
    for sel in selects_mut(&mut q.body) {
        for p in &mut sel.projections {
            if let SelectItem::Expr { expr: Expr::Column { name, .. }, alias } = p {
                if alias.as_deref().is_some_and(|a| same(a, name)) {
                    *alias = None;
                }
            }
        }
    }
}

fn drop_unreferenced_aliases(q: &mut Query) {
    let mut order = Vec::new();
    for o in &q.order_by {
        expr_refs(&o.expr, 0, &mut order);
    }
    let Some(sel) = q.as_select_mut() else { return };
    let mut refs = order;
    select_refs(sel, 0, false, &mut refs);
    let names: Vec<String> =
        refs.into_iter().filter(|r| r.qualifier.is_none() && r.depth == 0).map(|r| r.name).collect();
    for p in &mut sel.projections {
        if let SelectItem::Expr { alias, expr } = p {
            let identical = matches!((&*alias, &*expr), (Some(a), Expr::Column { name, .. }) if same(a, name));
            if identical || alias.as_deref().is_some_and(|a| !contains_name(&names, a)) {
                *alias = None;
            }
        }
    }
}

fn selects_mut(s: &mut SetExpr) -> Vec<&mut Select> {
    match s {
        SetExpr::Select(sel) => vec![sel],
        SetExpr::SetOp { left, right, .. } => {
            let mut v = selects_mut(left);
            v.extend(selects_mut(right));
            v
        }
    }
}

// ---------------------------------------------------------------------------
// Pass: single-source scopes lose their alias and qualifiers

fn strip_single_source(q: &mut Query) {
    for_each_child_query_mut(q, &mut |c| strip_single_source(c));
    let order_by = q.order_by.clone();
    let Some(sel) = q.as_select_mut() else {
        for s in selects_mut(&mut q.body) {
            strip_select(s, &[]);
        }
        return;
    };
    let changed_order = strip_select(sel, &order_by);
    if let Some(new_order) = changed_order {
        q.order_by = new_order;
    }
}

/// Returns the rewritten ORDER BY when the select was stripped.
fn strip_select(sel: &mut Select, order_by: &[OrderItem]) -> Option<Vec<OrderItem>> {
    let from = sel.from.as_ref()?;
    if !from.joins.is_empty() {
        return None;
    }
    let exposed = from.base.exposed_name().map(str::to_string);
    let table_name = match &from.base {
        TableFactor::Table { name, .. } => Some(name.clone()),
        TableFactor::Derived { .. } => None,
    };
    let mut quals: Vec<String> = Vec::new();
    quals.extend(exposed.iter().cloned());
    quals.extend(table_name.iter().cloned());
    if quals.is_empty() {
        return None;
    }
    let mut refs = Vec::new();
    select_refs(sel, 0, false, &mut refs);
    for o in order_by {
        expr_refs(&o.expr, 0, &mut refs);
    }
    let qualified_here: Vec<&ColRef> =
        refs.iter().filter(|r| r.qualifier.as_deref().is_some_and(|q| contains_name(&quals, q))).collect();
    if refs.iter().any(|r| r.depth > 0 && r.qualifier.as_deref().is_some_and(|q| contains_name(&quals, q))) {
        return None;
    }
    let aliases = renaming_aliases(sel);
    if qualified_here.iter().any(|r| contains_name(&aliases, &r.name)) {
        return None;
    }
    let has_alias = from.base.alias().is_some();
    if qualified_here.is_empty() && !has_alias {
        return None;
    }
    let mut f = |e: &Expr, depth: usize| -> Option<Expr> {
        match e {
            Expr::Column { qualifier: Some(q), name } if depth == 0 && contains_name(&quals, q) => {
                Some(Expr::Column { qualifier: None, name: name.clone() })
            }
            _ => None,
        }
    };
    let mut tmp = Query {
        body: SetExpr::Select(Box::new(std::mem::take(sel))),
        order_by: order_by.to_vec(),
        limit: None,
        offset: None,
    };
    map_columns(&mut tmp, &[], &mut f, 0);
    let SetExpr::Select(s) = tmp.body else { unreachable!() };
    *sel = *s;
    if let Some(from) = &mut sel.from {
        *from.base.alias_mut() = None;
    }
    Some(tmp.order_by)
}

// ---------------------------------------------------------------------------
// Pass: join aliases become t1, t2, ...

fn all_words(q: &Query) -> HashSet<String> {
    let mut out = HashSet::new();
    visit_queries(q, &mut |sub, _| {
        for n in scope_names(sub).into_iter().chain(table_names(sub)) {
            out.insert(n.to_ascii_lowercase());
        }
        let mut refs = Vec::new();
        for sel in selects(&sub.body) {
            select_refs(sel, 0, false, &mut refs);
            for p in &sel.projections {
                if let SelectItem::Expr { alias: Some(a), .. } = p {
                    out.insert(a.to_ascii_lowercase());
                }
            }
        }
        for r in refs {
            out.insert(r.name.to_ascii_lowercase());
            if let Some(q) = r.qualifier {
                out.insert(q.to_ascii_lowercase());
            }
        }
    });
    out
}

fn rename_join_aliases(q: &mut Query) {
    let words = all_words(q);
    let mut counter = 1;
    rename_in(q, &words, &mut counter);
}

fn rename_in(q: &mut Query, words: &HashSet<String>, counter: &mut usize) {
    let mut renames: Vec<(String, String)> = Vec::new();
    for sel in selects_mut(&mut q.body) {
        let Some(from) = &mut sel.from else { continue };
        for fac in from.factors_mut() {
            if let TableFactor::Table { name, alias } = fac {
                if alias.as_deref().is_some_and(|a| same(a, name)) {
                    *alias = None;
                }
            }
        }
        if from.joins.is_empty() {
            continue;
        }
        let own: HashSet<String> = from.factors().filter_map(|f| f.alias()).map(|a| a.to_ascii_lowercase()).collect();
        for fac in from.factors_mut() {
            let Some(old) = fac.alias().map(str::to_string) else { continue };
            let new = loop {
                let cand = format!("t{counter}");
                *counter += 1;
                if !words.contains(&cand) || own.contains(&cand) {
                    break cand;
                }
            };
            *fac.alias_mut() = Some(new.clone());
            renames.push((old, new));
        }
    }
    if !renames.is_empty() {
        let old_names: Vec<String> = renames.iter().map(|(o, _)| o.clone()).collect();
        let mut f = |e: &Expr, _d: usize| -> Option<Expr> {
            let Expr::Column { qualifier: Some(qual), name } = e else { return None };
            renames
                .iter()
                .find(|(o, _)| same(o, qual))
                .map(|(_, n)| Expr::Column { qualifier: Some(n.clone()), name: name.clone() })
        };
        map_columns_skip_derived(q, &old_names, &mut f);
    }
    for_each_child_query_mut(q, &mut |c| rename_in(c, words, counter));
}

/// Like [`map_columns`] but derived tables of the root query are skipped:
/// they cannot see sibling aliases.
fn map_columns_skip_derived(q: &mut Query, shadow: &[String], f: &mut dyn FnMut(&Expr, usize) -> Option<Expr>) {
    let mut derived: Vec<Query> = Vec::new();
    for sel in selects_mut(&mut q.body) {
        if let Some(from) = &mut sel.from {
            for fac in from.factors_mut() {
                if let TableFactor::Derived { query, .. } = fac {
                    derived.push(std::mem::replace(&mut **query, placeholder_query()));
                }
            }
        }
    }
    map_columns(q, shadow, f, 0);
    let mut it = derived.into_iter();
    for sel in selects_mut(&mut q.body) {
        if let Some(from) = &mut sel.from {
            for fac in from.factors_mut() {
                if let TableFactor::Derived { query, .. } = fac {
                    **query = it.next().expect("same shape");
                }
            }
        }
    }
}

fn placeholder_query() -> Query {
    Query::simple(Select::default())
}

// ---------------------------------------------------------------------------
// Pass: lowercase everything but string literals

fn lower(s: &mut String) {
    if s.bytes().any(|b| b.is_ascii_uppercase()) {
        *s = s.to_ascii_lowercase();
    }
}

fn lowercase(q: &mut Query) {
    fn expr(e: &mut Expr) {
        e.walk_shallow_mut(&mut |x| match x {
            Expr::Column { qualifier, name } => {
                if let Some(q) = qualifier {
                    lower(q);
                }
                lower(name);
            }
            Expr::Literal { kind, text } if *kind != LiteralKind::String => lower(text),
            Expr::Function { name, .. } => lower(name),
            Expr::Cast { type_name, .. } => lower(type_name),
            _ => {}
        });
    }
    for sel in selects_mut(&mut q.body) {
        for p in &mut sel.projections {
            match p {
                SelectItem::Expr { alias: Some(a), .. } => lower(a),
                SelectItem::QualifiedWildcard(w) => lower(w),
                _ => {}
            }
        }
        if let Some(from) = &mut sel.from {
            for fac in from.factors_mut() {
                if let TableFactor::Table { name, .. } = fac {
                    lower(name);
                }
                if let Some(a) = fac.alias_mut() {
                    lower(a);
                }
            }
        }
        for e in sel.exprs_mut() {
            expr(e);
        }
    }
    for o in &mut q.order_by {
        expr(&mut o.expr);
    }
    if let Some(l) = &mut q.limit {
        expr(l);
    }
    if let Some(o) = &mut q.offset {
        expr(o);
    }
    for_each_child_query_mut(q, &mut |c| lowercase(c));
}
