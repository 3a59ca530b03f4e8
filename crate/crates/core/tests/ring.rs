mod common;

use common::*;
use sqlsynth::db::{quote_ident, Database};
use sqlsynth::ring::{generate_ring, load_ring, ring_from_str, save_ring, RingError, SemanticType};

#[test]
fn song_ring_has_four_entities() {
    let (_d, _db, ring) = song();
    let names: Vec<&str> = ring.entities.iter().map(|e| e.name.as_str()).collect();
    assert_eq!(names.len(), 4);
    for n in ["song", "artist", "genre", "files"] {
        assert!(names.contains(&n), "{n}");
    }
    let song = ring.entity("song").unwrap();
    assert_eq!(song.attribute("releasedate").unwrap().semantic_type, SemanticType::Datetime);
    assert_eq!(song.attribute("song_name").unwrap().semantic_type, SemanticType::Identifier);
    assert_eq!(song.attribute("resolution").unwrap().semantic_type, SemanticType::Arithmetic);
    assert_eq!(ring.label_attribute("song").unwrap().name, "song_name");
}

#[test]
fn empty_schema_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_db(dir.path(), "empty", "");
    let db = Database::open(&path).unwrap();
    assert!(matches!(generate_ring(&db), Err(RingError::EmptySchema)));
}

#[test]
fn two_table_relationship() {
    let (_d, _db, ring) = customers_orders();
    assert_eq!(ring.entities.len(), 2);
    assert_eq!(ring.relationships.len(), 1);
    let r = &ring.relationships[0];
    assert_eq!((r.from_entity.as_str(), r.to_entity.as_str()), ("orders", "customers"));
    assert_eq!(r.join_pairs, vec![("customer_id".to_string(), "id".to_string())]);
}

#[test]
fn hand_written_ring_matches_generated() {
    let (_d, _db, ring) = customers_orders();
    let attr = |name: &str, nl: &str, ty: &str, nullable: bool| {
        format!(
            r#"{{"name": "{name}", "nl_name": "{nl}", "column": "{name}", "semantic_type": "{ty}", "nullable": {nullable}}}"#
        )
    };
    let text = format!(
        r#"{{"db_id": "shop",
  "entities": [
    {{"name": "customers", "nl_name": "customers", "table": "customers", "id_attribute": "id",
      "attributes": [{}, {}, {}, {}]}},
    {{"name": "orders", "nl_name": "orders", "table": "orders", "id_attribute": "id",
      "attributes": [{}, {}, {}, {}]}}],
  "relationships": [{{"name": "orders_customers", "from_entity": "orders", "to_entity": "customers",
      "join_pairs": [["customer_id", "id"]]}}]}}"#,
        attr("id", "id", "Identifier", false),
        attr("name", "name", "Identifier", true),
        attr("city", "city", "Categorical", true),
        attr("signup", "signup", "Datetime", true),
        attr("id", "id", "Identifier", false),
        attr("customer_id", "customer id", "Identifier", true),
        attr("amount", "amount", "Arithmetic", true),
        attr("placed", "placed", "Datetime", true),
    );
    assert_eq!(ring_from_str(&text).unwrap(), ring);
}

#[test]
fn missing_entities_field_is_malformed() {
    let err = ring_from_str(r#"{"db_id": "x", "relationships": []}"#).unwrap_err();
    assert!(matches!(err, RingError::MalformedRingFile { .. }), "{err:?}");
}

#[test]
fn sample_rings_satisfy_invariants() {
    let (dir, paths) = samples();
    for path in &paths {
        let db = Database::open(path).unwrap();
        let ring = generate_ring(&db).unwrap();
        assert_eq!(ring, generate_ring(&db).unwrap(), "deterministic");
        let fks: usize = db.tables().unwrap().iter().map(|t| t.foreign_keys.len()).sum();
        assert_eq!(ring.relationships.len(), fks, "{}", ring.db_id);
        for e in &ring.entities {
            for a in &e.attributes {
                let sql = format!("SELECT {} FROM {}", quote_ident(&a.column), quote_ident(&e.table));
                db.execute(&sql).unwrap_or_else(|err| panic!("{sql}: {err}"));
            }
        }
        let file = dir.path().join(format!("{}.ring", ring.db_id));
        save_ring(&ring, &file).unwrap();
        assert_eq!(load_ring(&file).unwrap(), ring);
        ring.validate_against(&db).unwrap();
    }
}
