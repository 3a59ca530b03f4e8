#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rusqlite::Connection;
use sqlsynth::db::Database;
use sqlsynth::pipeline::{DatabaseSpec, GenConfig};
use sqlsynth::ring::{generate_ring, Ring};
use sqlsynth::samples::{write_sample_databases, write_song_database};
use tempfile::TempDir;

pub const CUSTOMERS_ORDERS: &str = "
CREATE TABLE customers (id INTEGER PRIMARY KEY, name TEXT UNIQUE, city TEXT, signup DATE);
CREATE TABLE orders (id INTEGER PRIMARY KEY, customer_id INTEGER REFERENCES customers(id),
    amount REAL, placed DATE);
INSERT INTO customers VALUES (1, 'ann', 'oslo', '2020-01-05'), (2, 'bo', 'rome', '2021-03-10'),
    (3, 'cy', 'oslo', '2019-07-22'), (4, 'di', 'lima', '2022-11-30');
INSERT INTO orders VALUES (1, 1, 10.5, '2022-01-01'), (2, 1, 3.0, '2022-02-01'), (3, 2, 7.25, '2022-03-01'),
    (4, 3, 1.0, '2022-04-01'), (5, 3, 12.0, '2022-05-01'), (6, 2, 4.5, '2022-06-01');
";

pub fn write_db(dir: &Path, name: &str, sql: &str) -> PathBuf {
    let path = dir.join(format!("{name}.sqlite"));
    Connection::open(&path).unwrap().execute_batch(sql).unwrap();
    path
}

pub fn song() -> (TempDir, Database, Ring) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("music.sqlite");
    write_song_database(&path).unwrap();
    let db = Database::open(&path).unwrap();
    let ring = generate_ring(&db).unwrap();
    (dir, db, ring)
}

pub fn customers_orders() -> (TempDir, Database, Ring) {
    let dir = tempfile::tempdir().unwrap();
    let path = write_db(dir.path(), "shop", CUSTOMERS_ORDERS);
    let db = Database::open(&path).unwrap();
    let ring = generate_ring(&db).unwrap();
    (dir, db, ring)
}

pub fn samples() -> (TempDir, Vec<PathBuf>) {
    let dir = tempfile::tempdir().unwrap();
    let paths = write_sample_databases(dir.path()).unwrap();
    (dir, paths)
}

pub fn open_with_rings(paths: &[PathBuf]) -> Vec<(Database, Ring)> {
    paths
        .iter()
        .map(|p| {
            let db = Database::open(p).unwrap();
            let ring = generate_ring(&db).unwrap();
            (db, ring)
        })
        .collect()
}

pub fn config(paths: &[PathBuf], n: usize, seed: u64) -> GenConfig {
    GenConfig {
        databases: paths.iter().map(|p| DatabaseSpec { path: p.clone(), ring: None }).collect(),
        n_records: n,
        seed,
        ..GenConfig::default()
    }
}

use sqlsynth::db::Literal;
use sqlsynth::filler::{Bound, FilledPlan};
use sqlsynth::sqr::{AttrTerm, FilterNode, FilterOp, SlotType, SqrPlan, StepOp, ValueTerm};

fn scalar(db: &Database, sql: &str) -> Literal {
    db.execute(sql).unwrap_or_else(|e| panic!("{sql}: {e}")).rows.remove(0).remove(0)
}

fn check_filter(f: &FilterNode, ring: &Ring, db: &Database, out: &mut Vec<String>) {
    match f {
        FilterNode::Simple { attribute, op, values, .. } => {
            let AttrTerm::Ref(r) = attribute else {
                out.push(format!("unresolved attribute {attribute:?}"));
                return;
            };
            let (Some(e), Some(a)) = (ring.entity(&r.entity), ring.attribute(&r.entity, &r.attribute)) else {
                out.push(format!("unknown attribute {r}"));
                return;
            };
            if !sqlsynth::sqr::filter_ops_for(a.semantic_type).contains(op) {
                out.push(format!("{op:?} illegal for {r} ({})", a.semantic_type));
            }
            let lits: Vec<&Literal> = values
                .iter()
                .filter_map(|v| match v {
                    ValueTerm::Literal(l) => Some(l),
                    ValueTerm::Slot(s) => {
                        out.push(format!("unfilled value {s}"));
                        None
                    }
                })
                .collect();
            let (table, col) = (sqlsynth::db::quote_ident(&e.table), sqlsynth::db::quote_ident(&a.column));
            for l in &lits {
                match op {
                    FilterOp::Eq | FilterOp::Neq | FilterOp::In | FilterOp::Contains => {
                        let n = scalar(db, &format!("SELECT count(*) FROM {table} WHERE {col} = {}", l.to_sql()));
                        if n.as_f64() == Some(0.0) {
                            out.push(format!("{} not in {r}", l.to_sql()));
                        }
                    }
                    _ => {
                        let lo = scalar(db, &format!("SELECT min({col}) FROM {table}"));
                        let hi = scalar(db, &format!("SELECT max({col}) FROM {table}"));
                        if l.sqlite_cmp(&lo).is_lt() || l.sqlite_cmp(&hi).is_gt() {
                            out.push(format!("{} outside [{}, {}] of {r}", l.to_sql(), lo.to_sql(), hi.to_sql()));
                        }
                    }
                }
            }
            if *op == FilterOp::Between && lits.len() == 2 && lits[0].sqlite_cmp(lits[1]).is_gt() {
                out.push(format!("between bounds out of order on {r}"));
            }
        }
        FilterNode::Composite { children, .. } => children.iter().for_each(|c| check_filter(c, ring, db, out)),
        FilterNode::Templated { fragment, .. } => out.extend(plan_literal_violations(fragment, ring, db)),
    }
}

/// Literal placement rules for every filter in a filled plan: equality
/// literals occur in their column, thresholds and ranges lie within the
/// column extrema, between bounds ascend, ops suit the attribute type.
pub fn plan_literal_violations(plan: &SqrPlan, ring: &Ring, db: &Database) -> Vec<String> {
    let mut out = Vec::new();
    for s in &plan.steps {
        if let StepOp::Filter { predicate, .. } = &s.op {
            check_filter(predicate, ring, db, &mut out);
        }
    }
    out
}

/// Type and order rules for an assignment log.
pub fn assignment_violations(f: &FilledPlan, ring: &Ring) -> Vec<String> {
    let mut out = Vec::new();
    let phase = |b: &Bound| match b {
        Bound::Entity { .. } => 0,
        Bound::Attribute { .. } => 1,
        Bound::Value { .. } => 2,
        Bound::Direction { .. } => 3,
    };
    if !f.assignments.windows(2).all(|w| phase(&w[0].bound) <= phase(&w[1].bound)) {
        out.push("assignments out of fill order".into());
    }
    for a in &f.assignments {
        match (&a.bound, a.slot.ty) {
            (Bound::Attribute { entity, attribute }, SlotType::Semantic(ty)) => {
                match ring.attribute(entity, attribute) {
                    Some(attr) if attr.semantic_type == ty => {}
                    Some(attr) => {
                        out.push(format!("{} bound to {entity}.{attribute} of type {}", a.slot, attr.semantic_type))
                    }
                    None => out.push(format!("{} bound to unknown {entity}.{attribute}", a.slot)),
                }
            }
            (Bound::Value { semantic_type, .. }, SlotType::Semantic(ty)) if *semantic_type != ty => {
                out.push(format!("{} holds a {semantic_type} value", a.slot));
            }
            (Bound::Entity { entity }, SlotType::Entity) if ring.entity(entity).is_none() => {
                out.push(format!("{} bound to unknown entity {entity}", a.slot));
            }
            (Bound::Attribute { .. }, _) | (Bound::Entity { .. }, SlotType::Semantic(_)) => {
                out.push(format!("{} bound with the wrong kind", a.slot));
            }
            _ => {}
        }
    }
    out
}

pub struct Corpus {
    pub dir: TempDir,
    pub records: Vec<sqlsynth::pipeline::DatasetRecord>,
    pub dbs: std::collections::BTreeMap<String, Database>,
}

/// `n` records over every sample database with the stub backend.
pub fn corpus(n: usize, seed: u64) -> Corpus {
    let (dir, paths) = samples();
    let mut c = config(&paths, n, seed);
    c.workers = 4;
    let (records, _) = sqlsynth::pipeline::Pipeline::new(c).unwrap().generate_dataset().unwrap();
    let dbs = paths
        .iter()
        .map(|p| {
            let db = Database::open(p).unwrap();
            (db.db_id().to_string(), db)
        })
        .collect();
    Corpus { dir, records, dbs }
}
