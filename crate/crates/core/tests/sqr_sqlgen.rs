mod common;

use common::*;
use proptest::prelude::*;
use sqlsynth::db::{Database, Literal};
use sqlsynth::filler::fill_template;
use sqlsynth::filters::add_random_filters;
use sqlsynth::ring::Ring;
use sqlsynth::simplifier::{check_equivalence, parse_sql, simplify_sql};
use sqlsynth::sqlgen::{execute, to_sql, verify_nonnull, FailReason, Verification};
use sqlsynth::sqr::{compile_plan, parse_plan, validate_plan, DiagnosticKind, SqrPlan};
use sqlsynth::stats::query_stats;
use sqlsynth::templates::{instantiate_generator, Library};

const WORKED: &str = "\
s1: Retrieve(song, releasedate)
s2: Filter(s1, song.song_name eq 'Just beat it')
s3: Retrieve(song, releasedate)
s4: Filter(s3, song.song_name eq 'Aj ei akash')
s5: Compare(s2, s4, before)
";

fn kinds(plan: &SqrPlan, ring: &Ring) -> Vec<DiagnosticKind> {
    validate_plan(plan, ring).into_iter().map(|d| d.kind).collect()
}

#[test]
fn validation_rules() {
    let (_d, _db, ring) = song();
    assert!(kinds(&parse_plan(WORKED).unwrap(), &ring).is_empty());
    let sum_cat = parse_plan("a: Retrieve(song, languages)\nb: Aggregate(a, sum)").unwrap();
    assert!(kinds(&sum_cat, &ring).contains(&DiagnosticKind::Type));
    let forward = parse_plan("a: Retrieve(song, rating)\nb: Compare(a, c, gt)\nc: Retrieve(song, resolution)").unwrap();
    assert!(kinds(&forward, &ring).contains(&DiagnosticKind::Ordering));
}

#[test]
fn worked_plan_compiles_to_fewer_equivalent_steps() {
    let (_d, db, ring) = song();
    let raw = parse_plan(WORKED).unwrap();
    let compiled = compile_plan(&raw).unwrap();
    assert!(compiled.steps.len() < raw.steps.len());
    let a = to_sql(&raw, &ring).unwrap();
    let b = to_sql(&compiled, &ring).unwrap();
    assert!(check_equivalence(&a, &b, &db).unwrap().is_equivalent());
    let rows = execute(&b, &db).unwrap().rows;
    assert_eq!(rows, vec![vec![Literal::Integer(1)]], "1984-02-12 precedes 2004-01-30: {b}");
}

#[test]
fn compile_is_a_fixpoint_without_duplicates() {
    let plan = parse_plan("a: Retrieve(song, rating)\nb: Aggregate(a, avg)").unwrap();
    assert_eq!(compile_plan(&plan).unwrap(), plan);
}

#[test]
fn single_retrieve_is_minimal() {
    let (_d, _db, ring) = song();
    let sql = to_sql(&parse_plan("a: Retrieve(song, resolution)").unwrap(), &ring).unwrap();
    assert_eq!(simplify_sql(&sql).unwrap(), "select resolution from song");
}

#[test]
fn two_entity_plan_joins_once() {
    let (_d, db, ring) = customers_orders();
    let plan = parse_plan("a: Retrieve(orders, amount)\nb: Filter(a, customers.city eq 'oslo')").unwrap();
    let sql = to_sql(&plan, &ring).unwrap();
    assert_eq!(query_stats(&sql).unwrap().n_joins, 1, "{sql}");
    assert!(sql.contains("customer_id = "), "{sql}");
    let hand = "SELECT o.amount FROM orders o, customers c WHERE o.customer_id = c.id AND c.city = 'oslo'";
    assert!(check_equivalence(&sql, hand, &db).unwrap().is_equivalent(), "{sql}");
}

#[test]
fn join_count_follows_path_length() {
    let (_d, _db, ring) = song();
    let cases = [
        ("a: Retrieve(song, resolution)\nb: Filter(a, song.rating gt 5)", 0),
        ("a: Retrieve(song, resolution)\nb: Filter(a, genre.most_popular_in eq 'Bangladesh')", 1),
        ("a: Retrieve(files, formats)\nb: Filter(a, genre.rating eq '9')", 2),
    ];
    for (text, joins) in cases {
        let sql = to_sql(&parse_plan(text).unwrap(), &ring).unwrap();
        assert_eq!(query_stats(&sql).unwrap().n_joins, joins, "{sql}");
    }
}

#[test]
fn execution_and_verification() {
    let (_d, db, _ring) = customers_orders();
    assert_eq!(execute("select 1", &db).unwrap().rows, vec![vec![Literal::Integer(1)]]);
    assert!(execute("selec 1 frm", &db).is_err());
    assert!(verify_nonnull("select id from orders limit 3", &db).passed());
    assert_eq!(verify_nonnull("select id from orders where amount > 1000", &db), Verification::Fail(FailReason::Empty));
    let dir = tempfile::tempdir().unwrap();
    let empty = Database::open(write_db(dir.path(), "e", "CREATE TABLE t (x REAL);")).unwrap();
    assert_eq!(verify_nonnull("select avg(x) from t", &empty), Verification::Fail(FailReason::AllNull));
    assert!(matches!(verify_nonnull("select nope from t", &empty), Verification::Fail(FailReason::Error(_))));
}

struct Fixture {
    _dir: tempfile::TempDir,
    sources: Vec<(Database, Ring)>,
    library: Library,
}

thread_local! {
    static FIXTURE: Fixture = {
        let (dir, paths) = samples();
        Fixture { sources: open_with_rings(&paths[..8]), _dir: dir, library: Library::builtin() }
    };
}

fn filled_plan(f: &Fixture, db_pick: usize, t_pick: usize, seed: u64) -> Option<SqrPlan> {
    let (db, ring) = &f.sources[db_pick % f.sources.len()];
    let n = f.library.templates.len() + f.library.generators.len();
    let k = t_pick % n;
    let template = match f.library.templates.get(k) {
        Some(t) => t.clone(),
        None => {
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            instantiate_generator(&f.library.generators[k - f.library.templates.len()], ring, &mut rng).ok()?
        }
    };
    let mut filled = fill_template(&template, ring, db, seed).ok()?;
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed ^ 0x55);
    add_random_filters(&mut filled, &f.library.filters, &[0.4, 0.4, 0.2], ring, db, &mut rng).ok()?;
    Some(filled.plan)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn compile_laws(db_pick in 0usize..8, t_pick in 0usize..64, seed in any::<u64>()) {
        FIXTURE.with(|f| {
            let Some(plan) = filled_plan(f, db_pick, t_pick, seed) else { return Ok(()) };
            let (db, ring) = &f.sources[db_pick % f.sources.len()];
            let compiled = compile_plan(&plan).unwrap();
            prop_assert!(compiled.steps.len() <= plan.steps.len());
            prop_assert_eq!(&compile_plan(&compiled).unwrap(), &compiled);
            let raw_sql = to_sql(&plan, ring).unwrap();
            let sql = to_sql(&compiled, ring).unwrap();
            prop_assert_eq!(&sql, &to_sql(&compiled, ring).unwrap());
            prop_assert!(parse_sql(&raw_sql).is_ok(), "{}", raw_sql);
            prop_assert!(parse_sql(&sql).is_ok(), "{}", sql);
            let verdict = check_equivalence(&raw_sql, &sql, db).unwrap();
            prop_assert!(verdict.is_equivalent(), "{}\n{}", raw_sql, sql);
            Ok(())
        })?;
    }
}
