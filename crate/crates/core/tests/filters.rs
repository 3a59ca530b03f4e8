mod common;

use std::collections::BTreeMap;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sqlsynth::db::{Database, Literal};
use sqlsynth::filler::FillError;
use sqlsynth::filters::{compose_filters, fill_filter_template_on, gen_simple_filter, random_filter, FilterError};
use sqlsynth::ring::{generate_ring, Ring, SemanticType};
use sqlsynth::sqlgen::{execute, to_sql};
use sqlsynth::sqr::{
    AttrRef, AttrTerm, Connective, EntityTerm, FilterNode, FilterOp, SqrPlan, Step, StepOp, ValueTerm,
};
use sqlsynth::templates::{builtin_filter_templates, FilterTemplate};

const TOY: &str = "
CREATE TABLE shop (id INTEGER PRIMARY KEY, title TEXT UNIQUE, rating REAL, sales INTEGER, kind TEXT, open INTEGER);
INSERT INTO shop VALUES
    (1, 's1', 4.5, 120, 'cafe', 1), (2, 's2', 3.0, 80, 'bar', 0), (3, 's3', 2.5, 200, 'cafe', 1),
    (4, 's4', 4.0, 50, 'diner', 1), (5, 's5', 1.5, 20, 'bar', 0), (6, 's6', 5.0, 310, 'diner', 1),
    (7, 's7', 3.5, 95, 'cafe', 0), (8, 's8', 2.0, 60, 'bar', 1);
";

fn toy() -> (tempfile::TempDir, Database, Ring) {
    let dir = tempfile::tempdir().unwrap();
    let db = Database::open(write_db(dir.path(), "toy", TOY)).unwrap();
    let ring = generate_ring(&db).unwrap();
    (dir, db, ring)
}

fn filter_plan(entity: &str, id: &str, node: FilterNode) -> SqrPlan {
    SqrPlan {
        steps: vec![
            Step {
                id: "a".into(),
                op: StepOp::Retrieve {
                    entity: EntityTerm::Named(entity.into()),
                    attribute: AttrTerm::Ref(AttrRef::new(entity, id)),
                },
            },
            Step { id: "b".into(), op: StepOp::Filter { input: "a".into(), predicate: node } },
        ],
        result_step: "b".into(),
    }
}

fn simple(attr: &str, op: FilterOp, values: Vec<Literal>) -> FilterNode {
    FilterNode::Simple {
        attribute: AttrTerm::Ref(AttrRef::new("shop", attr)),
        op,
        values: values.into_iter().map(ValueTerm::Literal).collect(),
        phrase: format!("p_{attr}"),
    }
}

fn template(id: &str) -> FilterTemplate {
    builtin_filter_templates().into_iter().find(|f| f.id == id).unwrap()
}

#[test]
fn ops_by_type_and_between_phrase() {
    let (_d, db, ring) = toy();
    let (lo, hi) = (1.5, 5.0);
    let mut seen_between = false;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..400 {
        let FilterNode::Simple { attribute: AttrTerm::Ref(r), op, values, phrase } =
            gen_simple_filter("shop", &ring, &db, &mut rng).unwrap()
        else {
            panic!("not simple")
        };
        let lits: Vec<Literal> = values
            .into_iter()
            .map(|v| match v {
                ValueTerm::Literal(l) => l,
                ValueTerm::Slot(s) => panic!("{s}"),
            })
            .collect();
        let ty = ring.attribute("shop", &r.attribute).unwrap().semantic_type;
        match ty {
            SemanticType::Boolean => assert_eq!(op, FilterOp::Eq),
            SemanticType::Categorical if op == FilterOp::Eq => {
                assert!(["cafe", "bar", "diner"].contains(&lits[0].display_text().as_str()))
            }
            _ => {}
        }
        if r.attribute == "rating" && op == FilterOp::Between {
            seen_between = true;
            let (a, b) = (lits[0].as_f64().unwrap(), lits[1].as_f64().unwrap());
            assert!(lo <= a && a <= b && b <= hi);
            assert_eq!(
                phrase,
                format!("with rating between {} and {}", lits[0].display_text(), lits[1].display_text())
            );
        }
    }
    assert!(seen_between);
}

#[test]
fn composition() {
    let f1 = simple("sales", FilterOp::Gt, vec![Literal::Integer(90)]);
    let f2 = simple("kind", FilterOp::Eq, vec![Literal::Text("cafe".into())]);
    let both = compose_filters(vec![f1.clone(), f2.clone()], Connective::And).unwrap();
    assert_eq!(both, FilterNode::Composite { connective: Connective::And, children: vec![f1.clone(), f2] });
    assert_eq!(both.nl_phrase(), "p_sales and p_kind");
    assert_eq!(compose_filters(vec![f1], Connective::Or), Err(FilterError::TooFewChildren(1)));
}

#[test]
fn nested_composite_matches_brute_force() {
    let (_d, db, ring) = toy();
    let inner = compose_filters(
        vec![
            simple("sales", FilterOp::Gt, vec![Literal::Integer(90)]),
            simple("kind", FilterOp::Eq, vec![Literal::Text("cafe".into())]),
        ],
        Connective::And,
    )
    .unwrap();
    let node =
        compose_filters(vec![inner, simple("rating", FilterOp::Lt, vec![Literal::Real(2.1)])], Connective::Or).unwrap();
    let sql = to_sql(&filter_plan("shop", "id", node), &ring).unwrap();
    let mut got: Vec<i64> = execute(&sql, &db).unwrap().rows.iter().map(|r| r[0].as_f64().unwrap() as i64).collect();
    got.sort();
    let rows = execute("select id, rating, sales, kind from shop", &db).unwrap().rows;
    let mut want: Vec<i64> = rows
        .iter()
        .filter(|r| {
            let (rating, sales, kind) = (r[1].as_f64().unwrap(), r[2].as_f64().unwrap(), r[3].display_text());
            (sales > 90.0 && kind == "cafe") || rating < 2.1
        })
        .map(|r| r[0].as_f64().unwrap() as i64)
        .collect();
    want.sort();
    assert_eq!(got, want, "{sql}");
    assert_eq!(want, vec![1, 3, 5, 7, 8]);
}

#[test]
fn above_average_fragment() {
    let (_d, db, ring) = toy();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut saw_sales = false;
    for _ in 0..40 {
        let node = fill_filter_template_on(&template("above_average"), "shop", &ring, &db, &mut rng, false).unwrap();
        let FilterNode::Templated { subject: AttrTerm::Ref(r), op, fragment, phrase, .. } = &node else { panic!() };
        assert_eq!(*op, FilterOp::Gt);
        assert!(matches!(fragment.result().unwrap().op, StepOp::Aggregate { .. }));
        if r.attribute == "sales" {
            saw_sales = true;
            assert_eq!(phrase, "with sales above the average sales");
            let sql = to_sql(&filter_plan("shop", "id", node.clone()), &ring).unwrap();
            let n = execute(&sql, &db).unwrap().rows.len();
            assert_eq!(n, 3, "sales above 116.875: {sql}");
        }
    }
    assert!(saw_sales);
}

#[test]
fn combined_fragment_carries_the_simple_filter() {
    let (_d, db, ring) = toy();
    let node = fill_filter_template_on(
        &template("above_average"),
        "shop",
        &ring,
        &db,
        &mut ChaCha8Rng::seed_from_u64(3),
        true,
    )
    .unwrap();
    let FilterNode::Templated { fragment, phrase, .. } = &node else { panic!() };
    let inner: Vec<&FilterNode> = fragment
        .steps
        .iter()
        .filter_map(|s| match &s.op {
            StepOp::Filter { predicate, .. } => Some(predicate),
            _ => None,
        })
        .collect();
    assert_eq!(inner.len(), 1);
    assert!(phrase.contains("of those"), "{phrase}");
    assert!(phrase.ends_with(&inner[0].nl_phrase().to_string()), "{phrase}");
}

#[test]
fn template_without_arithmetic_context() {
    let dir = tempfile::tempdir().unwrap();
    let db = Database::open(write_db(
        dir.path(),
        "t",
        "CREATE TABLE t (id INTEGER PRIMARY KEY, name TEXT); INSERT INTO t VALUES (1, 'x');",
    ))
    .unwrap();
    let ring = generate_ring(&db).unwrap();
    let r =
        fill_filter_template_on(&template("above_average"), "t", &ring, &db, &mut ChaCha8Rng::seed_from_u64(0), false);
    assert!(matches!(r, Err(FillError::NoFillableSlot(_))));
}

fn literals(f: &FilterNode, out: &mut Vec<String>) {
    match f {
        FilterNode::Simple { values, .. } => out.extend(values.iter().filter_map(|v| match v {
            ValueTerm::Literal(l) => Some(l.display_text()),
            ValueTerm::Slot(_) => None,
        })),
        FilterNode::Composite { children, .. } => children.iter().for_each(|c| literals(c, out)),
        FilterNode::Templated { .. } => {}
    }
}

fn simple_parts(f: &FilterNode) -> Vec<&FilterNode> {
    match f {
        FilterNode::Simple { .. } => vec![f],
        FilterNode::Composite { children, .. } => children.iter().flat_map(simple_parts).collect(),
        FilterNode::Templated { .. } => Vec::new(),
    }
}

thread_local! {
    static SOURCES: (tempfile::TempDir, Vec<(Database, Ring)>) = {
        let (dir, paths) = samples();
        let sources = open_with_rings(&paths);
        (dir, sources)
    };
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn random_filters_are_sound(db_pick in 0usize..64, e_pick in 0usize..8, budget in 0usize..4, seed in any::<u64>()) {
        SOURCES.with(|(_, sources)| {
            let (db, ring) = &sources[db_pick % sources.len()];
            let entity = &ring.entities[e_pick % ring.entities.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let Ok(node) = random_filter(&entity.name, &builtin_filter_templates(), budget, ring, db, &mut rng) else {
                return Ok(());
            };
            prop_assert!(node.simple_count() <= budget, "{} simple predicates over budget {}", node.simple_count(), budget);
            let plan = filter_plan(&entity.name, &entity.id_attribute, node.clone());
            let problems = plan_literal_violations(&plan, ring, db);
            prop_assert!(problems.is_empty(), "{:?}", problems);
            for part in simple_parts(&node) {
                let FilterNode::Simple { attribute: AttrTerm::Ref(r), phrase, .. } = part else { unreachable!() };
                let nl = &ring.attribute(&r.entity, &r.attribute).unwrap().nl_name;
                prop_assert!(phrase.contains(nl.as_str()), "{} lacks {}", phrase, nl);
                let mut lits = Vec::new();
                literals(part, &mut lits);
                for l in lits {
                    prop_assert!(phrase.contains(&l), "{} lacks {}", phrase, l);
                }
            }
            let table = execute(
                &format!("SELECT {} FROM {}", sqlsynth::db::quote_ident(&entity.id().column), sqlsynth::db::quote_ident(&entity.table)),
                db,
            )
            .unwrap();
            let sql = to_sql(&plan, ring).unwrap();
            let got = execute(&sql, db).unwrap();
            let mut pool: BTreeMap<String, usize> = BTreeMap::new();
            for r in &table.rows {
                *pool.entry(r[0].to_sql()).or_default() += 1;
            }
            for r in &got.rows {
                let slot = pool.get_mut(&r[0].to_sql());
                prop_assert!(matches!(slot, Some(n) if *n > 0), "row {} not in source table: {}", r[0].to_sql(), sql);
                *pool.get_mut(&r[0].to_sql()).unwrap() -= 1;
            }
            Ok(())
        })?;
    }
}

#[test]
fn violation_checker_detects_bad_literals() {
    let (_d, db, ring) = toy();
    let plan = filter_plan("shop", "id", simple("rating", FilterOp::Gt, vec![Literal::Real(9.5)]));
    assert_eq!(plan_literal_violations(&plan, &ring, &db).len(), 1);
    let plan = filter_plan("shop", "id", simple("kind", FilterOp::Eq, vec![Literal::Text("pub".into())]));
    assert_eq!(plan_literal_violations(&plan, &ring, &db).len(), 1);
}
