mod common;

use std::collections::BTreeSet;

use common::*;
use sqlsynth::db::Database;
use sqlsynth::pipeline::{read_dataset, write_dataset, GenConfig, Pipeline, PipelineError};
use sqlsynth::simplifier::parse_sql;
use sqlsynth::sqlgen::verify_nonnull;

#[test]
fn small_dataset_over_three_databases() {
    let (_d, paths) = samples();
    let mut c = config(&paths[..3], 100, 11);
    c.workers = 3;
    let (records, report) = Pipeline::new(c).unwrap().generate_dataset().unwrap();
    assert_eq!(records.len(), 100);
    assert_eq!(report.n_records, 100);
    let dbs: Vec<Database> = paths[..3].iter().map(|p| Database::open(p).unwrap()).collect();
    let templates: BTreeSet<&str> = records.iter().map(|r| r.template_id.as_str()).collect();
    assert!(templates.len() >= 2);
    for (i, r) in records.iter().enumerate() {
        assert_eq!(r.record_id, i as u64);
        let db = dbs.iter().find(|d| d.db_id() == r.db_id).unwrap();
        assert!(parse_sql(&r.sql).is_ok(), "{}", r.sql);
        assert!(verify_nonnull(&r.sql, db).passed(), "{}", r.sql);
        assert!(!r.question.is_empty());
    }
    assert_eq!(report.database_usage.values().sum::<u64>(), 100);
}

#[test]
fn ids_are_contiguous_and_dataset_round_trips() {
    let (_d, paths) = samples();
    let (records, _) = Pipeline::new(config(&paths, 10, 5)).unwrap().generate_dataset().unwrap();
    assert_eq!(records.iter().map(|r| r.record_id).collect::<Vec<_>>(), (0..10).collect::<Vec<_>>());
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.jsonl");
    write_dataset(&records, &out).unwrap();
    assert_eq!(read_dataset(&out).unwrap(), records);
}

#[test]
fn worker_count_does_not_change_output() {
    let (_d, paths) = samples();
    let run = |w| {
        let mut c = config(&paths, 120, 77);
        c.workers = w;
        let (records, _) = Pipeline::new(c).unwrap().generate_dataset().unwrap();
        serde_json::to_string(&records).unwrap()
    };
    assert_eq!(run(1), run(8));
}

#[test]
fn records_are_independent_of_each_other() {
    let (_d, paths) = samples();
    let p = Pipeline::new(config(&paths, 30, 3)).unwrap();
    let (records, report) = p.generate_dataset().unwrap();
    assert!(report.exhausted.is_empty());
    for i in [0u64, 7, 29] {
        let mut r = p.generate_record(i).unwrap();
        r.record_id = i;
        assert_eq!(r, records[i as usize]);
    }
}

#[test]
fn unsatisfiable_template_exhausts_retries() {
    let dir = tempfile::tempdir().unwrap();
    let db = write_db(dir.path(), "co", CUSTOMERS_ORDERS);
    let lib = dir.path().join("lib");
    std::fs::create_dir(&lib).unwrap();
    std::fs::write(
        lib.join("above_max.tpl"),
        "[template]\nid = above_max\n\n[slots]\nEntity[0]\nArithmetic[0] of Entity[0]\n\n[input a]\nretrieve = {Entity[0]}, {Arithmetic[0]}\nfilter = @above_max({Arithmetic[0]} gt { f1: Retrieve({Entity[0]}, {Arithmetic[0]}); f2: Aggregate(f1, max) })\n\n[questions]\nwhich {Arithmetic[0].Expression} values exceed the maximum?\n",
    )
    .unwrap();
    let mut c = config(&[db], 3, 1);
    c.templates_dir = Some(lib);
    c.use_generators = false;
    c.max_retries_per_record = 4;
    let p = Pipeline::new(c).unwrap();
    assert_eq!(p.generate_record(0), Err(PipelineError::RecordExhausted(0)));
    assert!(matches!(p.generate_dataset(), Err(PipelineError::FatalConfig(_))));
}

#[test]
fn configuration_is_validated() {
    let (_d, paths) = samples();
    let bad = |f: &dyn Fn(&mut GenConfig)| {
        let mut c = config(&paths[..1], 5, 0);
        f(&mut c);
        matches!(Pipeline::new(c), Err(PipelineError::FatalConfig(_)))
    };
    assert!(bad(&|c| c.databases.clear()));
    assert!(bad(&|c| c.n_records = 0));
    assert!(bad(&|c| c.filter_count_weights = vec![0.5, 0.4]));
    assert!(bad(&|c| c.filter_count_weights = vec![1.5, -0.5]));
    assert!(bad(&|c| c.databases[0].path = "/nonexistent/x.sqlite".into()));
    assert!(!bad(&|_| {}));

    let dir = tempfile::tempdir().unwrap();
    let text = "n_records = 4\nseed = 9\nquestion_mode = \"query-only\"\n[[databases]]\npath = \"a.sqlite\"\n";
    let c = GenConfig::from_toml(text, dir.path()).unwrap();
    assert_eq!(c.databases[0].path, dir.path().join("a.sqlite"));
    assert_eq!((c.n_records, c.seed), (4, 9));
    assert!(GenConfig::from_toml("bogus_key = 1\n", dir.path()).is_err());
}
