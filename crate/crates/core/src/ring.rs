//! The Ring: a semantic layer naming the entities, attributes and join
//! relationships of a database, generated from its schema.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::db::{Database, DbError, Literal, TableInfo};

#[derive(Debug, Error)]
pub enum RingError {
    #[error("database has no tables")]
    EmptySchema,
    #[error("schema introspection failed: {0}")]
    IntrospectionFailure(String),
    #[error("malformed ring file at line {line}, column {column}: {message}")]
    MalformedRingFile { line: usize, column: usize, message: String },
    #[error("invalid ring: {0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<DbError> for RingError {
    fn from(e: DbError) -> Self {
        RingError::IntrospectionFailure(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SemanticType {
    Arithmetic,
    Datetime,
    Identifier,
    Categorical,
    Boolean,
}

impl SemanticType {
    pub const ALL: [SemanticType; 5] = [
        SemanticType::Arithmetic,
        SemanticType::Datetime,
        SemanticType::Identifier,
        SemanticType::Categorical,
        SemanticType::Boolean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SemanticType::Arithmetic => "Arithmetic",
            SemanticType::Datetime => "Datetime",
            SemanticType::Identifier => "Identifier",
            SemanticType::Categorical => "Categorical",
            SemanticType::Boolean => "Boolean",
        }
    }

    pub fn parse(s: &str) -> Option<SemanticType> {
        SemanticType::ALL.into_iter().find(|t| t.name() == s)
    }
}

impl fmt::Display for SemanticType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Attribute {
    pub name: String,
    pub nl_name: String,
    pub column: String,
    pub semantic_type: SemanticType,
    pub nullable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entity {
    pub name: String,
    pub nl_name: String,
    pub table: String,
    pub id_attribute: String,
    pub attributes: Vec<Attribute>,
}

impl Entity {
    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn id(&self) -> &Attribute {
        self.attribute(&self.id_attribute).expect("validated ring: id_attribute exists")
    }

    pub fn attributes_of(&self, ty: SemanticType) -> impl Iterator<Item = &Attribute> {
        self.attributes.iter().filter(move |a| a.semantic_type == ty)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Relationship {
    pub name: String,
    /// The referencing ("many") side.
    pub from_entity: String,
    /// The referenced ("one") side.
    pub to_entity: String,
    pub join_pairs: Vec<(String, String)>,
}

impl Relationship {
    pub fn touches(&self, entity: &str) -> bool {
        self.from_entity == entity || self.to_entity == entity
    }

    pub fn other(&self, entity: &str) -> &str {
        if self.from_entity == entity {
            &self.to_entity
        } else {
            &self.from_entity
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ring {
    pub db_id: String,
    pub entities: Vec<Entity>,
    pub relationships: Vec<Relationship>,
}

impl Ring {
    pub fn entity(&self, name: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.name == name)
    }

    pub fn attribute(&self, entity: &str, attribute: &str) -> Option<&Attribute> {
        self.entity(entity).and_then(|e| e.attribute(attribute))
    }

    /// Relationships incident to `entity`, sorted by name.
    pub fn relationships_of(&self, entity: &str) -> Vec<&Relationship> {
        let mut rels: Vec<&Relationship> = self.relationships.iter().filter(|r| r.touches(entity)).collect();
        rels.sort_by(|a, b| a.name.cmp(&b.name));
        rels
    }

    /// Whether `attribute` takes part in a relationship's join pairs on the
    /// referencing side.
    pub fn is_link_column(&self, entity: &str, attribute: &str) -> bool {
        let Some(col) = self.attribute(entity, attribute).map(|a| a.column.as_str()) else { return false };
        self.relationships.iter().any(|r| r.from_entity == entity && r.join_pairs.iter().any(|(f, _)| f == col))
    }

    /// The attribute used to name individual rows: a non-linking Identifier
    /// other than the id attribute when one exists, else the id attribute.
    pub fn label_attribute(&self, entity: &str) -> Option<&Attribute> {
        let e = self.entity(entity)?;
        e.attributes
            .iter()
            .find(|a| {
                a.semantic_type == SemanticType::Identifier
                    && a.name != e.id_attribute
                    && !self.is_link_column(entity, &a.name)
            })
            .or_else(|| e.attribute(&e.id_attribute))
    }

    /// Attributes linking `a` and `b` through their first direct
    /// relationship (by name): `(attribute of a, attribute of b)`.
    pub fn link_attributes(&self, a: &str, b: &str) -> Option<(String, String)> {
        let rel = self
            .relationships_of(a)
            .into_iter()
            .find(|r| r.other(a) == b && (r.from_entity != r.to_entity || a == b))?;
        let (f, t) = rel.join_pairs.first()?;
        let (ca, cb) = if rel.from_entity == a { (f, t) } else { (t, f) };
        let by_column =
            |e: &str, c: &str| self.entity(e)?.attributes.iter().find(|x| x.column == c).map(|x| x.name.clone());
        Some((by_column(a, ca)?, by_column(b, cb)?))
    }

    /// Entities directly connected to `entity`, excluding itself, in name order
    /// of the connecting relationship (first occurrence wins).
    pub fn neighbours(&self, entity: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in self.relationships_of(entity) {
            let o = r.other(entity);
            if o != entity && !out.contains(&o) {
                out.push(o);
            }
        }
        out
    }

    /// Shortest relationship path between two entities. Breadth-first over
    /// relationships sorted by name, so ties resolve lexicographically.
    pub fn shortest_path(&self, from: &str, to: &str) -> Option<Vec<&Relationship>> {
        self.shortest_path_from_set(&[from], to)
    }

    /// Shortest path from any entity in `sources` to `to`; sources are tried
    /// in the given order.
    pub fn shortest_path_from_set(&self, sources: &[&str], to: &str) -> Option<Vec<&Relationship>> {
        if sources.contains(&to) {
            return Some(Vec::new());
        }
        let mut visited: HashSet<&str> = sources.iter().copied().collect();
        let mut frontier: Vec<(&str, Vec<&Relationship>)> = sources.iter().map(|s| (*s, Vec::new())).collect();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (node, path) in &frontier {
                for rel in self.relationships_of(node) {
                    let other = rel.other(node);
                    if visited.contains(other) {
                        continue;
                    }
                    let mut p = path.clone();
                    p.push(rel);
                    if other == to {
                        return Some(p);
                    }
                    visited.insert(other);
                    next.push((other, p));
                }
            }
            frontier = next;
        }
        None
    }

    /// Hop distance between two entities, if connected.
    pub fn distance(&self, from: &str, to: &str) -> Option<usize> {
        self.shortest_path(from, to).map(|p| p.len())
    }

    /// Structural checks: unique names, resolvable references.
    pub fn validate(&self) -> Result<(), RingError> {
        let mut names = HashSet::new();
        for e in &self.entities {
            if !names.insert(e.name.as_str()) {
                return Err(RingError::Invalid(format!("duplicate entity name `{}`", e.name)));
            }
            let mut attrs = HashSet::new();
            for a in &e.attributes {
                if !attrs.insert(a.name.as_str()) {
                    return Err(RingError::Invalid(format!("duplicate attribute `{}` in entity `{}`", a.name, e.name)));
                }
            }
            if e.attribute(&e.id_attribute).is_none() {
                return Err(RingError::Invalid(format!(
                    "id_attribute `{}` is not an attribute of `{}`",
                    e.id_attribute, e.name
                )));
            }
        }
        for r in &self.relationships {
            let (Some(from), Some(to)) = (self.entity(&r.from_entity), self.entity(&r.to_entity)) else {
                return Err(RingError::Invalid(format!("relationship `{}` references an unknown entity", r.name)));
            };
            if r.join_pairs.is_empty() {
                return Err(RingError::Invalid(format!("relationship `{}` has no join pairs", r.name)));
            }
            for (a, b) in &r.join_pairs {
                let has = |e: &Entity, c: &str| e.attributes.iter().any(|x| x.column == c);
                if !has(from, a) || !has(to, b) {
                    return Err(RingError::Invalid(format!(
                        "relationship `{}` joins unknown columns {a} = {b}",
                        r.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checks that every entity table and attribute column exists in `db`.
    pub fn validate_against(&self, db: &Database) -> Result<(), RingError> {
        let tables = db.tables()?;
        for e in &self.entities {
            let Some(t) = tables.iter().find(|t| t.name.eq_ignore_ascii_case(&e.table)) else {
                return Err(RingError::Invalid(format!("table `{}` not found", e.table)));
            };
            for a in &e.attributes {
                if t.column(&a.column).is_none() {
                    return Err(RingError::Invalid(format!("column `{}.{}` not found", e.table, a.column)));
                }
            }
        }
        Ok(())
    }
}

/// What is known about a column when classifying it.
#[derive(Debug, Clone, Default)]
pub struct ColumnProfile<'a> {
    pub declared_type: &'a str,
    pub name: &'a str,
    pub samples: &'a [Literal],
    pub single_primary_key: bool,
    pub unique: bool,
    pub foreign_key: bool,
}

/// Assign one of the five semantic types to a column.
pub fn infer_semantic_type(profile: &ColumnProfile<'_>) -> SemanticType {
    let decl = profile.declared_type.to_ascii_uppercase();
    let non_null: Vec<&Literal> = profile.samples.iter().filter(|v| !v.is_null()).collect();

    if profile.single_primary_key || profile.foreign_key {
        return SemanticType::Identifier;
    }
    let boolean_decl = decl.contains("BOOL") || decl == "BIT";
    if boolean_decl && non_null.iter().all(|v| is_boolean_like(v)) {
        return SemanticType::Boolean;
    }
    if decl.contains("DATE") || decl.contains("TIME") {
        return SemanticType::Datetime;
    }
    let numeric_decl = ["INT", "REAL", "FLOA", "DOUB", "NUMERIC", "DECIMAL", "NUMBER"].iter().any(|k| decl.contains(k));
    if numeric_decl {
        return SemanticType::Arithmetic;
    }
    if !non_null.is_empty() {
        let dates = non_null.iter().filter(|v| matches!(v, Literal::Text(s) if looks_like_date(s))).count();
        if dates * 10 >= non_null.len() * 9 {
            return SemanticType::Datetime;
        }
        if decl.is_empty() && non_null.iter().all(|v| v.as_f64().is_some()) {
            return SemanticType::Arithmetic;
        }
    }
    let textual = decl.is_empty() || ["CHAR", "CLOB", "TEXT"].iter().any(|k| decl.contains(k));
    if profile.unique && textual {
        return SemanticType::Identifier;
    }
    SemanticType::Categorical
}

fn is_boolean_like(v: &Literal) -> bool {
    match v {
        Literal::Integer(i) => *i == 0 || *i == 1,
        Literal::Real(r) => *r == 0.0 || *r == 1.0,
        Literal::Text(s) => {
            matches!(s.to_ascii_lowercase().as_str(), "true" | "false" | "t" | "f" | "0" | "1")
        }
        Literal::Null => true,
    }
}

const MONTHS: [&str; 12] = ["JAN", "FEB", "MAR", "APR", "MAY", "JUN", "JUL", "AUG", "SEP", "OCT", "NOV", "DEC"];

/// ISO dates (with optional time), `dd-MON-yyyy`, `dd/mm/yyyy` and `mm/dd/yyyy`.
pub fn looks_like_date(s: &str) -> bool {
    let s = s.trim();
    let digits =
        |t: &str, n: std::ops::RangeInclusive<usize>| n.contains(&t.len()) && t.bytes().all(|b| b.is_ascii_digit());
    let date_part = s.split([' ', 'T']).next().unwrap_or("");
    let iso: Vec<&str> = date_part.split('-').collect();
    if iso.len() == 3 && digits(iso[0], 4..=4) && digits(iso[1], 1..=2) && digits(iso[2], 1..=2) {
        return true;
    }
    if iso.len() == 3
        && digits(iso[0], 1..=2)
        && MONTHS.contains(&iso[1].to_ascii_uppercase().as_str())
        && (digits(iso[2], 4..=4) || digits(iso[2], 2..=2))
    {
        return true;
    }
    let slash: Vec<&str> = date_part.split('/').collect();
    slash.len() == 3 && digits(slash[0], 1..=2) && digits(slash[1], 1..=2) && digits(slash[2], 4..=4)
}

/// Natural-language name of an identifier: split on underscores and
/// camel-case boundaries, lowercase, join with spaces.
pub fn nl_name(identifier: &str) -> String {
    let mut words: Vec<String> = Vec::new();
    for part in identifier.split(|c: char| c == '_' || c == ' ' || c == '-') {
        if part.is_empty() {
            continue;
        }
        let chars: Vec<char> = part.chars().collect();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let boundary = i > 0
                && c.is_uppercase()
                && (chars[i - 1].is_lowercase()
                    || chars[i - 1].is_ascii_digit()
                    || chars.get(i + 1).is_some_and(|n| n.is_lowercase()) && chars[i - 1].is_uppercase());
            if boundary && !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            current.extend(c.to_lowercase());
        }
        if !current.is_empty() {
            words.push(current);
        }
    }
    if words.is_empty() {
        identifier.to_lowercase()
    } else {
        words.join(" ")
    }
}

const SAMPLE_ROWS: usize = 100;

/// Build a Ring with one entity per table, one attribute per column and one
/// relationship per foreign-key constraint.
pub fn generate_ring(db: &Database) -> Result<Ring, RingError> {
    let tables = db.tables()?;
    if tables.is_empty() {
        return Err(RingError::EmptySchema);
    }
    let entities = tables.iter().map(|t| entity_for_table(db, t)).collect::<Result<Vec<_>, _>>()?;

    let mut relationships: Vec<Relationship> = Vec::new();
    for t in &tables {
        for fk in &t.foreign_keys {
            let Some(target) = tables.iter().find(|x| x.name.eq_ignore_ascii_case(&fk.to_table)) else {
                return Err(RingError::IntrospectionFailure(format!(
                    "foreign key from `{}` references unknown table `{}`",
                    t.name, fk.to_table
                )));
            };
            let base = format!("{}_{}", t.name, target.name);
            let mut name = base.clone();
            let mut k = 2;
            while relationships.iter().any(|r| r.name == name) {
                name = format!("{base}_{k}");
                k += 1;
            }
            relationships.push(Relationship {
                name,
                from_entity: t.name.clone(),
                to_entity: target.name.clone(),
                join_pairs: fk.pairs.clone(),
            });
        }
    }

    let ring = Ring { db_id: db.db_id().to_string(), entities, relationships };
    ring.validate()?;
    Ok(ring)
}

fn entity_for_table(db: &Database, t: &TableInfo) -> Result<Entity, RingError> {
    let pk = t.primary_key();
    let fk_columns: HashSet<&str> =
        t.foreign_keys.iter().flat_map(|fk| fk.pairs.iter().map(|p| p.0.as_str())).collect();
    let mut attributes = Vec::with_capacity(t.columns.len());
    for c in &t.columns {
        let samples = db.sample_column(&t.name, &c.name, SAMPLE_ROWS)?;
        let profile = ColumnProfile {
            declared_type: &c.declared_type,
            name: &c.name,
            samples: &samples,
            single_primary_key: pk.len() == 1 && pk[0] == c.name,
            unique: t.unique_columns.iter().any(|u| u.eq_ignore_ascii_case(&c.name)),
            foreign_key: fk_columns.contains(c.name.as_str()),
        };
        attributes.push(Attribute {
            name: c.name.clone(),
            nl_name: nl_name(&c.name),
            column: c.name.clone(),
            semantic_type: infer_semantic_type(&profile),
            nullable: !c.not_null && c.pk_position == 0,
        });
    }
    let id_attribute = if pk.len() == 1 {
        pk[0].to_string()
    } else if let Some(u) = t.columns.iter().find(|c| {
        t.unique_columns.iter().any(|u| u.eq_ignore_ascii_case(&c.name))
            && attributes.iter().any(|a| a.name == c.name && a.semantic_type == SemanticType::Identifier)
    }) {
        u.name.clone()
    } else if let Some(first_pk) = pk.first() {
        first_pk.to_string()
    } else {
        t.columns.first().map(|c| c.name.clone()).unwrap_or_default()
    };
    Ok(Entity { name: t.name.clone(), nl_name: nl_name(&t.name), table: t.name.clone(), id_attribute, attributes })
}

pub fn ring_to_string(ring: &Ring) -> String {
    serde_json::to_string_pretty(ring).expect("ring serializes") + "\n"
}

pub fn ring_from_str(text: &str) -> Result<Ring, RingError> {
    let ring: Ring = serde_json::from_str(text).map_err(|e| RingError::MalformedRingFile {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    ring.validate()?;
    Ok(ring)
}

pub fn save_ring(ring: &Ring, path: impl AsRef<Path>) -> Result<(), RingError> {
    std::fs::write(path, ring_to_string(ring))?;
    Ok(())
}

pub fn load_ring(path: impl AsRef<Path>) -> Result<Ring, RingError> {
    ring_from_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rusqlite::Connection;

    fn make_db(sql: &str) -> (tempfile::TempDir, Database) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("shop.sqlite");
        Connection::open(&path).unwrap().execute_batch(sql).unwrap();
        let db = Database::open(&path).unwrap();
        (dir, db)
    }

    const SHOP: &str = "CREATE TABLE customers (id INTEGER PRIMARY KEY, name TEXT);
        CREATE TABLE orders (id INTEGER PRIMARY KEY, customer_id INTEGER REFERENCES customers(id), amount REAL);
        INSERT INTO customers VALUES (1, 'Ann'), (2, 'Bo');
        INSERT INTO orders VALUES (1, 1, 3.5), (2, 2, 1.0);";

    #[test]
    fn two_table_ring() {
        let (_d, db) = make_db(SHOP);
        let ring = generate_ring(&db).unwrap();
        assert_eq!(ring.entities.len(), 2);
        assert_eq!(ring.relationships.len(), 1);
        let r = &ring.relationships[0];
        assert_eq!((r.from_entity.as_str(), r.to_entity.as_str()), ("orders", "customers"));
        assert_eq!(r.join_pairs, vec![("customer_id".to_string(), "id".to_string())]);
        assert_eq!(ring.entity("customers").unwrap().id_attribute, "id");
        assert_eq!(ring.attribute("orders", "amount").unwrap().semantic_type, SemanticType::Arithmetic);
    }

    #[test]
    fn empty_schema() {
        let (_d, db) = make_db("");
        assert!(matches!(generate_ring(&db), Err(RingError::EmptySchema)));
    }

    #[test]
    fn hand_written_ring_matches_generated() {
        let (_d, db) = make_db(SHOP);
        let text = r#"{
          "db_id": "shop",
          "entities": [
            {"name": "customers", "nl_name": "customers", "table": "customers", "id_attribute": "id",
             "attributes": [
               {"name": "id", "nl_name": "id", "column": "id", "semantic_type": "Identifier", "nullable": false},
               {"name": "name", "nl_name": "name", "column": "name", "semantic_type": "Categorical", "nullable": true}]},
            {"name": "orders", "nl_name": "orders", "table": "orders", "id_attribute": "id",
             "attributes": [
               {"name": "id", "nl_name": "id", "column": "id", "semantic_type": "Identifier", "nullable": false},
               {"name": "customer_id", "nl_name": "customer id", "column": "customer_id", "semantic_type": "Identifier", "nullable": true},
               {"name": "amount", "nl_name": "amount", "column": "amount", "semantic_type": "Arithmetic", "nullable": true}]}
          ],
          "relationships": [
            {"name": "orders_customers", "from_entity": "orders", "to_entity": "customers",
             "join_pairs": [["customer_id", "id"]]}
          ]
        }"#;
        assert_eq!(ring_from_str(text).unwrap(), generate_ring(&db).unwrap());
    }

    #[test]
    fn missing_entities_field_is_malformed() {
        let err = ring_from_str("{\n  \"db_id\": \"x\",\n  \"relationships\": []\n}").unwrap_err();
        match err {
            RingError::MalformedRingFile { line, message, .. } => {
                assert!(message.contains("entities"), "{message}");
                assert!(line >= 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn save_load_round_trip() {
        let (dir, db) = make_db(SHOP);
        let ring = generate_ring(&db).unwrap();
        let path = dir.path().join("shop.ring");
        save_ring(&ring, &path).unwrap();
        assert_eq!(load_ring(&path).unwrap(), ring);
    }

    #[test]
    fn semantic_types() {
        let dates: Vec<Literal> =
            ["2011-08-28", "1997-09-21", "2001-04-07"].iter().map(|s| Literal::Text(s.to_string())).collect();
        let p = ColumnProfile { declared_type: "text", name: "releasedate", samples: &dates, ..Default::default() };
        assert_eq!(infer_semantic_type(&p), SemanticType::Datetime);

        let spider: Vec<Literal> =
            ["28-AUG-2011", "21-SEP-1997"].iter().map(|s| Literal::Text(s.to_string())).collect();
        let p = ColumnProfile { declared_type: "varchar(50)", samples: &spider, ..Default::default() };
        assert_eq!(infer_semantic_type(&p), SemanticType::Datetime);

        let p = ColumnProfile { declared_type: "INTEGER", ..Default::default() };
        assert_eq!(infer_semantic_type(&p), SemanticType::Arithmetic);

        let names = [Literal::Text("Just beat it".into())];
        let p = ColumnProfile {
            declared_type: "varchar2(50)",
            samples: &names,
            single_primary_key: true,
            ..Default::default()
        };
        assert_eq!(infer_semantic_type(&p), SemanticType::Identifier);

        let bools = [Literal::Integer(0), Literal::Integer(1)];
        let p = ColumnProfile { declared_type: "BOOLEAN", samples: &bools, ..Default::default() };
        assert_eq!(infer_semantic_type(&p), SemanticType::Boolean);

        let cats = [Literal::Text("rock".into()), Literal::Text("pop".into())];
        let p = ColumnProfile { declared_type: "TEXT", samples: &cats, ..Default::default() };
        assert_eq!(infer_semantic_type(&p), SemanticType::Categorical);

        let p = ColumnProfile { declared_type: "DATETIME", samples: &[], ..Default::default() };
        assert_eq!(infer_semantic_type(&p), SemanticType::Datetime);
    }

    #[test]
    fn nl_names() {
        assert_eq!(nl_name("song_name"), "song name");
        assert_eq!(nl_name("releaseDate"), "release date");
        assert_eq!(nl_name("HTTPStatus"), "http status");
        assert_eq!(nl_name("releasedate"), "releasedate");
        assert_eq!(nl_name("Customer_ID"), "customer id");
    }

    #[test]
    fn shortest_path_breaks_ties_by_name() {
        let ring = Ring {
            db_id: "x".into(),
            entities: ["a", "b", "c", "d"]
                .iter()
                .map(|n| Entity {
                    name: n.to_string(),
                    nl_name: n.to_string(),
                    table: n.to_string(),
                    id_attribute: "id".into(),
                    attributes: vec![Attribute {
                        name: "id".into(),
                        nl_name: "id".into(),
                        column: "id".into(),
                        semantic_type: SemanticType::Identifier,
                        nullable: false,
                    }],
                })
                .collect(),
            relationships: [("r2", "a", "c"), ("r1", "a", "b"), ("r3", "b", "d"), ("r4", "c", "d")]
                .iter()
                .map(|(n, f, t)| Relationship {
                    name: n.to_string(),
                    from_entity: f.to_string(),
                    to_entity: t.to_string(),
                    join_pairs: vec![("id".into(), "id".into())],
                })
                .collect(),
        };
        let p = ring.shortest_path("a", "d").unwrap();
        assert_eq!(p.iter().map(|r| r.name.as_str()).collect::<Vec<_>>(), vec!["r1", "r3"]);
        assert_eq!(ring.distance("a", "a"), Some(0));
    }
}
