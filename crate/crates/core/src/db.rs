//! Read-only access to SQLite database files: literal values, schema
//! introspection, query execution and cached column value profiles.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::rc::Rc;

use rusqlite::types::ValueRef;
use rusqlite::{Connection, OpenFlags};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DbError {
    #[error("cannot open database {path}: {message}")]
    Open { path: String, message: String },
    #[error("schema introspection failed: {0}")]
    Introspection(String),
    #[error("{0}")]
    Execution(String),
}

/// A single SQL value as returned by the engine.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Null,
    Integer(i64),
    Real(f64),
    Text(String),
}

impl Literal {
    pub fn is_null(&self) -> bool {
        matches!(self, Literal::Null)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Literal::Integer(i) => Some(*i as f64),
            Literal::Real(r) => Some(*r),
            _ => None,
        }
    }

    /// SQL source text: strings single-quoted with quote doubling, numbers bare.
    pub fn to_sql(&self) -> String {
        match self {
            Literal::Null => "NULL".to_string(),
            Literal::Integer(i) => i.to_string(),
            Literal::Real(r) => format_real(*r),
            Literal::Text(s) => format!("'{}'", s.replace('\'', "''")),
        }
    }

    /// Plain rendering used in natural-language text.
    pub fn display_text(&self) -> String {
        match self {
            Literal::Null => "null".to_string(),
            Literal::Integer(i) => i.to_string(),
            Literal::Real(r) => format_real(*r),
            Literal::Text(s) => s.clone(),
        }
    }

    fn class(&self) -> u8 {
        match self {
            Literal::Null => 0,
            Literal::Integer(_) | Literal::Real(_) => 1,
            Literal::Text(_) => 2,
        }
    }

    /// Total order matching SQLite's default collation:
    /// NULL < numbers (compared numerically) < text (bytewise).
    pub fn sqlite_cmp(&self, other: &Literal) -> Ordering {
        match self.class().cmp(&other.class()) {
            Ordering::Equal => {}
            o => return o,
        }
        match (self, other) {
            (Literal::Integer(a), Literal::Integer(b)) => a.cmp(b),
            (Literal::Text(a), Literal::Text(b)) => a.as_bytes().cmp(b.as_bytes()),
            (a, b) => match (a.as_f64(), b.as_f64()) {
                (Some(x), Some(y)) => x.total_cmp(&y),
                _ => Ordering::Equal,
            },
        }
    }

    /// Equality used by result comparison; reals match within a relative
    /// tolerance of 1e-9 so that summation order does not matter.
    pub fn approx_eq(&self, other: &Literal) -> bool {
        match (self, other) {
            (Literal::Null, Literal::Null) => true,
            (Literal::Text(a), Literal::Text(b)) => a == b,
            (Literal::Integer(a), Literal::Integer(b)) => a == b,
            (a, b) => match (a.as_f64(), b.as_f64()) {
                (Some(x), Some(y)) => x == y || (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0),
                _ => false,
            },
        }
    }
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Literal::Real(a), Literal::Real(b)) => a.to_bits() == b.to_bits(),
            (Literal::Integer(a), Literal::Integer(b)) => a == b,
            (Literal::Text(a), Literal::Text(b)) => a == b,
            (Literal::Null, Literal::Null) => true,
            _ => false,
        }
    }
}

impl Eq for Literal {}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sql())
    }
}

fn format_real(r: f64) -> String {
    if r.is_finite() {
        format!("{r:?}")
    } else if r.is_nan() {
        "NULL".to_string()
    } else if r > 0.0 {
        "9e999".to_string()
    } else {
        "-9e999".to_string()
    }
}

impl From<ValueRef<'_>> for Literal {
    fn from(v: ValueRef<'_>) -> Self {
        match v {
            ValueRef::Null => Literal::Null,
            ValueRef::Integer(i) => Literal::Integer(i),
            ValueRef::Real(r) => Literal::Real(r),
            ValueRef::Text(t) => Literal::Text(String::from_utf8_lossy(t).into_owned()),
            ValueRef::Blob(b) => Literal::Text(b.iter().map(|x| format!("{x:02x}")).collect()),
        }
    }
}

/// Rows returned by a query, in engine order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub column_names: Vec<String>,
    pub rows: Vec<Vec<Literal>>,
}

impl ResultTable {
    pub fn column_count(&self) -> usize {
        self.column_names.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnInfo {
    pub name: String,
    pub declared_type: String,
    pub not_null: bool,
    /// 1-based position within the primary key, 0 when not part of it.
    pub pk_position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForeignKeyInfo {
    pub to_table: String,
    /// (from_column, to_column) pairs in key order.
    pub pairs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableInfo {
    pub name: String,
    pub columns: Vec<ColumnInfo>,
    pub foreign_keys: Vec<ForeignKeyInfo>,
    /// Columns covered by a single-column UNIQUE index or constraint.
    pub unique_columns: Vec<String>,
    pub create_sql: String,
}

impl TableInfo {
    pub fn primary_key(&self) -> Vec<&str> {
        let mut pk: Vec<&ColumnInfo> = self.columns.iter().filter(|c| c.pk_position > 0).collect();
        pk.sort_by_key(|c| c.pk_position);
        pk.into_iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column(&self, name: &str) -> Option<&ColumnInfo> {
        self.columns.iter().find(|c| c.name.eq_ignore_ascii_case(name))
    }
}

/// Sorted non-null values of one column, cached per handle.
#[derive(Debug, Clone)]
pub struct ColumnValues {
    /// All non-null values in SQLite collation order (duplicates kept).
    pub sorted: Vec<Literal>,
    /// Distinct non-null values in collation order.
    pub distinct: Vec<Literal>,
}

/// A read-only handle on one database file.
pub struct Database {
    conn: Connection,
    path: PathBuf,
    db_id: String,
    column_cache: RefCell<HashMap<(String, String), Rc<ColumnValues>>>,
}

impl fmt::Debug for Database {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Database").field("db_id", &self.db_id).field("path", &self.path).finish()
    }
}

impl Database {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, DbError> {
        let path = path.as_ref();
        if !path.is_file() {
            return Err(DbError::Open { path: path.display().to_string(), message: "no such file".into() });
        }
        let conn =
            Connection::open_with_flags(path, OpenFlags::SQLITE_OPEN_READ_ONLY | OpenFlags::SQLITE_OPEN_NO_MUTEX)
                .map_err(|e| DbError::Open { path: path.display().to_string(), message: e.to_string() })?;
        let db_id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "db".to_string());
        Ok(Database { conn, path: path.to_path_buf(), db_id, column_cache: RefCell::default() })
    }

    pub fn db_id(&self) -> &str {
        &self.db_id
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn execute(&self, sql: &str) -> Result<ResultTable, DbError> {
        let mut stmt = self.conn.prepare(sql).map_err(|e| DbError::Execution(e.to_string()))?;
        let column_names: Vec<String> = stmt.column_names().iter().map(|s| s.to_string()).collect();
        let n = column_names.len();
        let mut rows = Vec::new();
        let mut cursor = stmt.query([]).map_err(|e| DbError::Execution(e.to_string()))?;
        while let Some(row) = cursor.next().map_err(|e| DbError::Execution(e.to_string()))? {
            let mut values = Vec::with_capacity(n);
            for i in 0..n {
                let v = row.get_ref(i).map_err(|e| DbError::Execution(e.to_string()))?;
                values.push(Literal::from(v));
            }
            rows.push(values);
        }
        Ok(ResultTable { column_names, rows })
    }

    /// User tables in creation order.
    pub fn tables(&self) -> Result<Vec<TableInfo>, DbError> {
        let intro = |e: rusqlite::Error| DbError::Introspection(e.to_string());
        let mut stmt = self
            .conn
            .prepare(
                "SELECT name, COALESCE(sql, '') FROM sqlite_master \
                 WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY rowid",
            )
            .map_err(intro)?;
        let names: Vec<(String, String)> = stmt
            .query_map([], |r| Ok((r.get(0)?, r.get(1)?)))
            .map_err(intro)?
            .collect::<Result<_, _>>()
            .map_err(intro)?;
        names.into_iter().map(|(name, sql)| self.table_info(&name, sql)).collect()
    }

    fn table_info(&self, table: &str, create_sql: String) -> Result<TableInfo, DbError> {
        let intro = |e: rusqlite::Error| DbError::Introspection(format!("{table}: {e}"));
        let quoted = quote_ident(table);

        let mut stmt = self.conn.prepare(&format!("PRAGMA table_info({quoted})")).map_err(intro)?;
        let columns: Vec<ColumnInfo> = stmt
            .query_map([], |r| {
                Ok(ColumnInfo {
                    name: r.get(1)?,
                    declared_type: r.get::<_, Option<String>>(2)?.unwrap_or_default(),
                    not_null: r.get::<_, i64>(3)? != 0,
                    pk_position: r.get::<_, i64>(5)? as usize,
                })
            })
            .map_err(intro)?
            .collect::<Result<_, _>>()
            .map_err(intro)?;

        let mut stmt = self.conn.prepare(&format!("PRAGMA foreign_key_list({quoted})")).map_err(intro)?;
        let raw: Vec<(i64, i64, String, String, Option<String>)> = stmt
            .query_map([], |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?, r.get(3)?, r.get(4)?)))
            .map_err(intro)?
            .collect::<Result<_, _>>()
            .map_err(intro)?;
        let mut grouped: Vec<(i64, String, Vec<(i64, String, Option<String>)>)> = Vec::new();
        for (id, seq, to_table, from, to) in raw {
            match grouped.iter_mut().find(|g| g.0 == id) {
                Some(g) => g.2.push((seq, from, to)),
                None => grouped.push((id, to_table, vec![(seq, from, to)])),
            }
        }
        // pragma lists constraints in reverse declaration order
        grouped.sort_by_key(|g| std::cmp::Reverse(g.0));
        let mut foreign_keys = Vec::new();
        for (_, to_table, mut cols) in grouped {
            cols.sort_by_key(|c| c.0);
            let target_pk: Vec<String> = if cols.iter().any(|c| c.2.is_none()) {
                let mut s =
                    self.conn.prepare(&format!("PRAGMA table_info({})", quote_ident(&to_table))).map_err(intro)?;
                let mut pk: Vec<(i64, String)> = s
                    .query_map([], |r| Ok((r.get::<_, i64>(5)?, r.get::<_, String>(1)?)))
                    .map_err(intro)?
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(intro)?
                    .into_iter()
                    .filter(|(p, _)| *p > 0)
                    .collect();
                pk.sort();
                pk.into_iter().map(|(_, n)| n).collect()
            } else {
                Vec::new()
            };
            let pairs = cols
                .into_iter()
                .enumerate()
                .map(|(i, (_, from, to))| {
                    let to = to.or_else(|| target_pk.get(i).cloned()).unwrap_or_default();
                    (from, to)
                })
                .collect();
            foreign_keys.push(ForeignKeyInfo { to_table, pairs });
        }

        let mut stmt = self.conn.prepare(&format!("PRAGMA index_list({quoted})")).map_err(intro)?;
        let indexes: Vec<(String, bool)> = stmt
            .query_map([], |r| Ok((r.get::<_, String>(1)?, r.get::<_, i64>(2)? != 0)))
            .map_err(intro)?
            .collect::<Result<_, _>>()
            .map_err(intro)?;
        let mut unique_columns = Vec::new();
        for (index, _) in indexes.into_iter().filter(|i| i.1) {
            let mut s = self.conn.prepare(&format!("PRAGMA index_info({})", quote_ident(&index))).map_err(intro)?;
            let cols: Vec<Option<String>> = s
                .query_map([], |r| r.get::<_, Option<String>>(2))
                .map_err(intro)?
                .collect::<Result<_, _>>()
                .map_err(intro)?;
            if let [Some(c)] = cols.as_slice() {
                if !unique_columns.contains(c) {
                    unique_columns.push(c.clone());
                }
            }
        }

        Ok(TableInfo { name: table.to_string(), columns, foreign_keys, unique_columns, create_sql })
    }

    /// Up to `limit` raw values of a column, in rowid order.
    pub fn sample_column(&self, table: &str, column: &str, limit: usize) -> Result<Vec<Literal>, DbError> {
        let sql = format!("SELECT {} FROM {} LIMIT {limit}", quote_ident(column), quote_ident(table));
        Ok(self.execute(&sql)?.rows.into_iter().map(|mut r| r.swap_remove(0)).collect())
    }

    /// Non-null values of a column, sorted; cached for the lifetime of the handle.
    pub fn column_values(&self, table: &str, column: &str) -> Result<Rc<ColumnValues>, DbError> {
        let key = (table.to_string(), column.to_string());
        if let Some(v) = self.column_cache.borrow().get(&key) {
            return Ok(Rc::clone(v));
        }
        let (t, c) = (quote_ident(table), quote_ident(column));
        let sql = format!("SELECT {c} FROM {t} WHERE {c} IS NOT NULL ORDER BY {c}");
        let mut sorted: Vec<Literal> = self.execute(&sql)?.rows.into_iter().map(|mut r| r.swap_remove(0)).collect();
        // engine order already matches; re-sort to be independent of column collation
        sorted.sort_by(|a, b| a.sqlite_cmp(b));
        let mut distinct: Vec<Literal> = Vec::new();
        for v in &sorted {
            if distinct.last().is_none_or(|last| last.sqlite_cmp(v) != Ordering::Equal) {
                distinct.push(v.clone());
            }
        }
        let values = Rc::new(ColumnValues { sorted, distinct });
        self.column_cache.borrow_mut().insert(key, Rc::clone(&values));
        Ok(values)
    }
}

/// Quote an identifier when it is not a plain lowercase-safe word.
pub fn quote_ident(name: &str) -> String {
    let plain = !name.is_empty()
        && name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !crate::simplifier::lexer::is_reserved(name);
    if plain {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('"', "\"\""))
    }
}
