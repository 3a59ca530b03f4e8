mod common;

use std::collections::BTreeSet;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sqlsynth::filler::fill_template;
use sqlsynth::ring::SemanticType;
use sqlsynth::sqlgen::{execute, to_sql};
use sqlsynth::sqr::{compile_plan, AggOp, AttrRef, AttrTerm, EntityTerm, Slot, SlotType, StepOp};
use sqlsynth::templates::{
    builtin_filter_templates, builtin_generators, builtin_templates, instantiate_generator, parse_filter_template,
    parse_generator, parse_template, placeholders, render_filter_template, render_generator, render_template,
    TemplateError,
};

fn occurred_before_text() -> &'static str {
    include_str!("../library/templates/occurred_before.tpl")
}

#[test]
fn occurred_before_structure() {
    let t = parse_template(occurred_before_text()).unwrap();
    assert_eq!(t.inputs.len(), 2);
    assert_eq!(t.inputs[0].symmetric_filter_with.as_deref(), Some("b"));
    assert_eq!(t.inputs[1].symmetric_filter_with.as_deref(), Some("a"));
    let dt = Slot::new(SlotType::Semantic(SemanticType::Datetime), 0);
    let retrieved: BTreeSet<String> = t
        .inputs
        .iter()
        .map(|i| match &i.attribute {
            AttrTerm::Slot(s) => s.to_string(),
            other => panic!("{other:?}"),
        })
        .collect();
    assert_eq!(retrieved, BTreeSet::from([dt.to_string()]));
    assert_eq!(t.inputs[0].mandatory_filters.len(), 1);
    assert!(t.question_templates.len() >= 2);
    t.check(None).unwrap();
}

#[test]
fn dangling_question_slot() {
    let doc =
        occurred_before_text().replace("[questions]\n", "[questions]\nhow large is {Arithmetic[0].Expression}?\n");
    assert_eq!(parse_template(&doc), Err(TemplateError::UndeclaredSlot("{Arithmetic[0].Expression}".into())));
}

#[test]
fn builtin_documents_round_trip() {
    let templates = builtin_templates();
    assert_eq!(templates.len(), 32);
    for t in &templates {
        assert_eq!(&parse_template(&render_template(t)).unwrap(), t, "{}", t.id);
        t.check(None).unwrap();
    }
    for f in builtin_filter_templates() {
        assert_eq!(parse_filter_template(&render_filter_template(&f)).unwrap(), f, "{}", f.id);
    }
    for g in builtin_generators() {
        assert_eq!(parse_generator(&render_generator(&g)).unwrap(), g, "{}", g.id);
    }
}

#[test]
fn placeholder_closure() {
    for t in builtin_templates() {
        let mut available: BTreeSet<Slot> = t.full_plan().slots().into_iter().map(Slot::base).collect();
        available.extend(t.slots.iter().map(|d| d.slot));
        for q in &t.question_templates {
            for s in placeholders(q).unwrap() {
                let declared = available.contains(&s.base()) || t.full_plan().slots().contains(&s);
                assert!(declared, "{}: {s} in {q:?}", t.id);
            }
        }
    }
}

fn generator(arity: (u32, u32), hops: (u32, u32), aggregation: &str) -> sqlsynth::templates::GeneratorSpec {
    parse_generator(&format!(
        "[generator]\nid = g\narity = {}..{}\nhops = {}..{}\naggregation = {aggregation}\n[questions]\nfor each {{entity}} {{key}}, what is the {{columns}}?\n",
        arity.0, arity.1, hops.0, hops.1
    ))
    .unwrap()
}

#[test]
fn generator_output_is_an_enumerated_structure() {
    let (_d, _db, ring) = customers_orders();
    let customers = ring.entity("customers").unwrap();
    let orders = ring.entity("orders").unwrap();
    let mut allowed = BTreeSet::new();
    for key in &customers.attributes {
        for value in &orders.attributes {
            for op in AggOp::ALL {
                allowed.insert((
                    AttrRef::new("orders", &value.name),
                    op.keyword(),
                    AttrRef::new("customers", &key.name),
                ));
            }
        }
    }
    let g = generator((2, 2), (1, 1), "required");
    for seed in 0..40 {
        let t = instantiate_generator(&g, &ring, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        t.check(Some(&ring)).unwrap();
        let plan = t.full_plan();
        let StepOp::Aggregate { input, op, group_by: Some(AttrTerm::Ref(key)) } = &plan.result().unwrap().op else {
            panic!("not a grouped aggregate: {plan:?}");
        };
        let StepOp::Retrieve { entity: EntityTerm::Named(e), attribute: AttrTerm::Ref(value) } =
            &plan.step(input).unwrap().op
        else {
            panic!("aggregate input is not a retrieval");
        };
        assert_eq!(e, "orders");
        assert!(allowed.contains(&(value.clone(), op.keyword(), key.clone())), "{value} {op:?} {key}");
    }
}

#[test]
fn generator_limits() {
    let (_d, _db, ring) = customers_orders();
    let g = generator((2, 2), (3, 3), "auto");
    assert!(matches!(
        instantiate_generator(&g, &ring, &mut ChaCha8Rng::seed_from_u64(0)),
        Err(TemplateError::NoViableStructure(_))
    ));
    let g = generator((2, 3), (0, 1), "auto");
    for seed in 0..10 {
        let a = instantiate_generator(&g, &ring, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = instantiate_generator(&g, &ring, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn generator_outputs_validate_on_samples() {
    let (_d, paths) = samples();
    for (db, ring) in open_with_rings(&paths) {
        for g in builtin_generators() {
            for seed in 0..5 {
                if let Ok(t) = instantiate_generator(&g, &ring, &mut ChaCha8Rng::seed_from_u64(seed)) {
                    t.check(Some(&ring)).unwrap_or_else(|e| panic!("{} on {}: {e}", g.id, db.db_id()));
                }
            }
        }
    }
}

#[test]
fn builtin_templates_yield_executable_sql() {
    let (_d, paths) = samples();
    let sources = open_with_rings(&paths);
    for t in builtin_templates() {
        let mut filled = 0;
        for (db, ring) in &sources {
            for seed in 0..3 {
                let Ok(f) = fill_template(&t, ring, db, seed) else { continue };
                let sql = to_sql(&compile_plan(&f.plan).unwrap(), ring).unwrap();
                execute(&sql, db).unwrap_or_else(|e| panic!("{} on {}: {e}\n{sql}", t.id, db.db_id()));
                filled += 1;
            }
        }
        assert!(filled > 0, "{} never filled", t.id);
    }
}
