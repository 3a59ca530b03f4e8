//! Execution-equivalence oracle.

use std::cmp::Ordering;

use crate::db::{Database, DbError, Literal, ResultTable};

use super::parse_sql;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, thiserror::Error)]
pub enum EquivalenceError {
    #[error("execution failed on the {side:?} query: {source}")]
    ExecutionFailed { side: Side, source: DbError },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    ColumnCountDiffers { left: usize, right: usize },
    RowsDiffer { ordered: bool },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        *self == Verdict::Equivalent
    }
}

fn has_top_level_order(sql: &str) -> bool {
    parse_sql(sql).map(|q| !q.order_by.is_empty()).unwrap_or(false)
}

fn row_cmp(a: &[Literal], b: &[Literal]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.sqlite_cmp(y);
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

fn rows_equal(a: &[Vec<Literal>], b: &[Vec<Literal>]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.iter().zip(y).all(|(p, q)| p.approx_eq(q)))
}

/// Compare result tables: as sequences when `ordered`, else as multisets.
pub fn compare_results(a: &ResultTable, b: &ResultTable, ordered: bool) -> Verdict {
    if a.column_count() != b.column_count() {
        return Verdict::ColumnCountDiffers { left: a.column_count(), right: b.column_count() };
    }
    let same = if ordered {
        rows_equal(&a.rows, &b.rows)
    } else {
        let mut x = a.rows.clone();
        let mut y = b.rows.clone();
        x.sort_by(|p, q| row_cmp(p, q));
        y.sort_by(|p, q| row_cmp(p, q));
        rows_equal(&x, &y)
    };
    if same {
        Verdict::Equivalent
    } else {
        Verdict::RowsDiffer { ordered }
    }
}

/// Execute both queries and compare; row order matters when either query
/// has a top-level ORDER BY.
pub fn check_equivalence(sql_a: &str, sql_b: &str, db: &Database) -> Result<Verdict, EquivalenceError> {
    let a = db.execute(sql_a).map_err(|source| EquivalenceError::ExecutionFailed { side: Side::Left, source })?;
    let b = db.execute(sql_b).map_err(|source| EquivalenceError::ExecutionFailed { side: Side::Right, source })?;
    let ordered = has_top_level_order(sql_a) || has_top_level_order(sql_b);
    Ok(compare_results(&a, &b, ordered))
}
