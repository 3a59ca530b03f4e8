//! Generated filters: random simple predicates, and/or composites, and
//! filled complex filter templates.

use std::collections::BTreeMap;

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::db::{Database, Literal};
use crate::filler::{
    bind_slots, render_placeholders, resolve_links_in_filter, sample_value, FillError, FilledPlan, Purpose,
};
use crate::ring::{Attribute, Ring, SemanticType};
use crate::sqr::{
    filter_ops_for, validate_plan, AttrRef, AttrTerm, Connective, EntityTerm, FilterNode, FilterOp, Slot, SlotType,
    SqrPlan, Step, StepOp, ValueTerm,
};
use crate::templates::{Combine, FilterTemplate, InputSpec, QueryTemplate, INNER_PLACEHOLDER};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FilterError {
    #[error("a composite filter needs at least two children, got {0}")]
    TooFewChildren(usize),
}

/// Cap on simple predicates generated for one record.
pub const MAX_SIMPLE_FILTERS: usize = 3;
/// Weights for drawing 0, 1 or 2 extra filters per record.
pub const FILTER_COUNT_WEIGHTS: [f64; 3] = [0.5, 0.35, 0.15];

/// English rendering of a simple predicate.
pub fn simple_phrase(nl_name: &str, ty: SemanticType, op: FilterOp, values: &[Literal]) -> String {
    let v: Vec<String> = values.iter().map(Literal::display_text).collect();
    let first = v.first().cloned().unwrap_or_default();
    let dated = ty == SemanticType::Datetime;
    let relation = match op {
        FilterOp::Eq => format!("equal to {first}"),
        FilterOp::Neq => format!("not equal to {first}"),
        FilterOp::Gt if dated => format!("after {first}"),
        FilterOp::Lt if dated => format!("before {first}"),
        FilterOp::Gte if dated => format!("on or after {first}"),
        FilterOp::Lte if dated => format!("on or before {first}"),
        FilterOp::Gt => format!("greater than {first}"),
        FilterOp::Lt => format!("less than {first}"),
        FilterOp::Gte => format!("at least {first}"),
        FilterOp::Lte => format!("at most {first}"),
        FilterOp::Between => format!("between {first} and {}", v.get(1).cloned().unwrap_or_default()),
        FilterOp::Contains => format!("containing {first}"),
        FilterOp::In => format!("one of {}", v.join(", ")),
    };
    format!("with {nl_name} {relation}")
}

/// Attributes a simple filter may constrain: no join columns, and no
/// surrogate key when the entity has a separate label.
fn filterable<'a>(ring: &'a Ring, entity: &str) -> Vec<&'a Attribute> {
    let Some(e) = ring.entity(entity) else { return Vec::new() };
    let label = ring.label_attribute(entity).map(|a| a.name.as_str());
    e.attributes
        .iter()
        .filter(|a| !ring.is_link_column(entity, &a.name))
        .filter(|a| a.name != e.id_attribute || label == Some(e.id_attribute.as_str()))
        .collect()
}

/// Sample an attribute of `entity`, a legal op for its type, and values.
pub fn gen_simple_filter(
    entity: &str,
    ring: &Ring,
    db: &Database,
    rng: &mut ChaCha8Rng,
) -> Result<FilterNode, FillError> {
    let attr = *filterable(ring, entity).choose(rng).ok_or_else(|| FillError::NoFillableSlot(entity.to_string()))?;
    let op = *filter_ops_for(attr.semantic_type).choose(rng).expect("every type has an op");
    let r = AttrRef::new(entity, &attr.name);
    let values = sample_value(db, ring, &r, Purpose::for_op(op), rng)?;
    Ok(FilterNode::Simple {
        attribute: AttrTerm::Ref(r),
        op,
        phrase: simple_phrase(&attr.nl_name, attr.semantic_type, op, &values),
        values: values.into_iter().map(ValueTerm::Literal).collect(),
    })
}

/// Entities `entity` references; filtering on them joins many-to-one, so
/// rows of `entity` are never duplicated.
pub fn referenced_entities(ring: &Ring, entity: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in &ring.relationships {
        if r.from_entity == entity && r.to_entity != entity && !out.contains(&r.to_entity) {
            out.push(r.to_entity.clone());
        }
    }
    out
}

/// A simple filter on `entity` itself or, half of the time, on an entity
/// it references, phrased through that entity.
pub fn gen_reachable_filter(
    entity: &str,
    ring: &Ring,
    db: &Database,
    rng: &mut ChaCha8Rng,
) -> Result<FilterNode, FillError> {
    let parents = referenced_entities(ring, entity);
    if parents.is_empty() || rng.gen_bool(0.5) {
        return gen_simple_filter(entity, ring, db, rng);
    }
    let parent = parents.choose(rng).expect("non-empty");
    let mut node = gen_simple_filter(parent, ring, db, rng)?;
    if let FilterNode::Simple { phrase, .. } = &mut node {
        let nl = ring.entity(parent).map(|e| e.nl_name.as_str()).unwrap_or(parent);
        *phrase = format!("whose {nl} has {}", phrase.strip_prefix("with ").unwrap_or(phrase));
    }
    Ok(node)
}

/// Join two or more filters with one connective.
pub fn compose_filters(children: Vec<FilterNode>, connective: Connective) -> Result<FilterNode, FilterError> {
    if children.len() < 2 {
        return Err(FilterError::TooFewChildren(children.len()));
    }
    Ok(FilterNode::Composite { connective, children })
}

/// Fill `ft` for the entity that `context` filters; combinable templates
/// may carry a generated simple filter inside their fragment.
pub fn fill_filter_template(
    ft: &FilterTemplate,
    context: &FilledPlan,
    ring: &Ring,
    db: &Database,
    rng: &mut ChaCha8Rng,
) -> Result<FilterNode, FillError> {
    let entity = context.filter_entity().ok_or_else(|| FillError::NoFillableSlot("{Entity[0]}".into()))?;
    let combine = match ft.combine {
        Combine::No => false,
        Combine::Always => true,
        Combine::Optional => rng.gen_bool(0.5),
    };
    fill_filter_template_on(ft, entity, ring, db, rng, combine)
}

/// Fill `ft` with `{Entity[0]}` bound to `entity`.
pub fn fill_filter_template_on(
    ft: &FilterTemplate,
    entity: &str,
    ring: &Ring,
    db: &Database,
    rng: &mut ChaCha8Rng,
    combine: bool,
) -> Result<FilterNode, FillError> {
    let id_attr = ring
        .entity(entity)
        .map(|e| e.id_attribute.clone())
        .ok_or_else(|| FillError::Invalid(format!("unknown entity {entity}")))?;
    let carrier = QueryTemplate {
        id: ft.id.clone(),
        slots: ft.slots.clone(),
        inputs: vec![InputSpec {
            name: "x".into(),
            entity: EntityTerm::Slot(Slot::new(SlotType::Entity, 0)),
            attribute: AttrTerm::Ref(AttrRef::new(entity, &id_attr)),
            mandatory_filters: vec![ft.predicate.clone()],
            symmetric_filter_with: None,
        }],
        sqr_template: SqrPlan { steps: Vec::new(), result_step: String::new() },
        question_templates: std::iter::once(ft.nl_template.clone()).chain(ft.combined_template.clone()).collect(),
        tags: Vec::new(),
    };
    let fixed = BTreeMap::from([(0, entity.to_string())]);
    let (binding, log) = bind_slots(&carrier, ring, db, rng, &fixed)?;
    let predicate = resolve_links_in_filter(&binding.filter(&ft.predicate), ring, Some(entity))?;
    let FilterNode::Templated { id, subject, op, fragment, .. } = predicate else {
        return Err(FillError::Invalid(format!("filter template {} is not a templated predicate", ft.id)));
    };
    let mut fragment = *fragment;
    let text = match (&ft.combined_template, combine) {
        (Some(combined), true) => {
            let inner = insert_inner_filter(&mut fragment, ring, db, rng)?;
            render(combined, &log)?.replace(INNER_PLACEHOLDER, &inner.nl_phrase())
        }
        (None, true) => return Err(FillError::Invalid(format!("filter template {} cannot combine", ft.id))),
        (_, false) => render(&ft.nl_template, &log)?,
    };
    let node = FilterNode::Templated { id, subject, op, fragment: Box::new(fragment), phrase: text };
    let check = SqrPlan {
        steps: vec![
            Step {
                id: "x0".into(),
                op: StepOp::Retrieve {
                    entity: EntityTerm::Named(entity.into()),
                    attribute: AttrTerm::Ref(AttrRef::new(entity, &id_attr)),
                },
            },
            Step { id: "x".into(), op: StepOp::Filter { input: "x0".into(), predicate: node.clone() } },
        ],
        result_step: "x".into(),
    };
    if let Some(d) = validate_plan(&check, ring).first() {
        return Err(FillError::Invalid(d.to_string()));
    }
    Ok(node)
}

fn render(text: &str, log: &[crate::filler::SlotAssignment]) -> Result<String, FillError> {
    render_placeholders(text, log).map_err(|s| FillError::NoFillableSlot(s.to_string()))
}

/// Put a generated simple filter right after the fragment's first
/// `Retrieve`, rewiring the step that consumed it.
fn insert_inner_filter(
    fragment: &mut SqrPlan,
    ring: &Ring,
    db: &Database,
    rng: &mut ChaCha8Rng,
) -> Result<FilterNode, FillError> {
    let (pos, first, entity) = fragment
        .steps
        .iter()
        .enumerate()
        .find_map(|(i, s)| match &s.op {
            StepOp::Retrieve { entity: EntityTerm::Named(e), .. } => Some((i, s.id.clone(), e.clone())),
            _ => None,
        })
        .ok_or_else(|| FillError::Invalid("fragment has no retrieve".into()))?;
    let inner = gen_simple_filter(&entity, ring, db, rng)?;
    let new_id = format!("{first}_filtered");
    for s in &mut fragment.steps[pos + 1..] {
        s.op.map_inputs(|i| if i == first { new_id.clone() } else { i.to_string() });
    }
    if fragment.result_step == first {
        fragment.result_step = new_id.clone();
    }
    fragment.steps.insert(pos + 1, Step { id: new_id, op: StepOp::Filter { input: first, predicate: inner.clone() } });
    Ok(inner)
}

/// Number of extra filters for one record: index drawn by `weights`.
pub fn sample_filter_count(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    match WeightedIndex::new(weights) {
        Ok(w) => w.sample(rng),
        Err(_) => 0,
    }
}

/// One random extra filter on `entity` using at most `budget` simple
/// predicates: a filled template, a two-way composite, or a simple filter.
pub fn random_filter(
    entity: &str,
    templates: &[FilterTemplate],
    budget: usize,
    ring: &Ring,
    db: &Database,
    rng: &mut ChaCha8Rng,
) -> Result<FilterNode, FillError> {
    let roll: f64 = rng.gen();
    if roll < 0.3 && !templates.is_empty() {
        let ft = templates.choose(rng).expect("non-empty");
        let combine = match ft.combine {
            Combine::No => false,
            Combine::Always => true,
            Combine::Optional => budget > 0 && rng.gen_bool(0.5),
        };
        if !combine || budget > 0 {
            match fill_filter_template_on(ft, entity, ring, db, rng, combine) {
                Ok(node) => return Ok(node),
                Err(FillError::NoFillableSlot(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    if budget == 0 {
        return Err(FillError::NoFillableSlot(format!("filter budget exhausted for {entity}")));
    }
    if roll >= 0.3 && roll < 0.5 && budget >= 2 {
        let connective = if rng.gen_bool(0.5) { Connective::And } else { Connective::Or };
        let children = vec![gen_reachable_filter(entity, ring, db, rng)?, gen_reachable_filter(entity, ring, db, rng)?];
        return Ok(compose_filters(children, connective).expect("two children"));
    }
    gen_reachable_filter(entity, ring, db, rng)
}

/// Add a sampled number of extra filters to `plan`.
pub fn add_random_filters(
    plan: &mut FilledPlan,
    templates: &[FilterTemplate],
    weights: &[f64],
    ring: &Ring,
    db: &Database,
    rng: &mut ChaCha8Rng,
) -> Result<(), FillError> {
    let count = sample_filter_count(weights, rng);
    for _ in 0..count {
        let Some(entity) = plan.filter_entity().map(str::to_string) else { return Ok(()) };
        let used: usize = plan.extra_filters().iter().map(FilterNode::simple_count).sum();
        let budget = MAX_SIMPLE_FILTERS.saturating_sub(used);
        match random_filter(&entity, templates, budget, ring, db, rng) {
            Ok(node) => plan.add_filter(node),
            Err(FillError::NoFillableSlot(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::generate_ring;
    use crate::samples::write_song_database;
    use crate::sqlgen::to_sql;
    use crate::templates::builtin_filter_templates;
    use rand::SeedableRng;

    fn song() -> (tempfile::TempDir, Database, Ring) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("music.sqlite");
        write_song_database(&path).unwrap();
        let db = Database::open(&path).unwrap();
        let ring = generate_ring(&db).unwrap();
        (dir, db, ring)
    }

    #[test]
    fn phrase_table() {
        let p = simple_phrase(
            "rating",
            SemanticType::Arithmetic,
            FilterOp::Between,
            &[Literal::Integer(4), Literal::Integer(8)],
        );
        assert_eq!(p, "with rating between 4 and 8");
        let p =
            simple_phrase("release date", SemanticType::Datetime, FilterOp::Lt, &[Literal::Text("2004-01-30".into())]);
        assert_eq!(p, "with release date before 2004-01-30");
    }

    #[test]
    fn composite_arity() {
        let (_d, db, ring) = song();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = gen_simple_filter("song", &ring, &db, &mut rng).unwrap();
        assert_eq!(compose_filters(vec![f.clone()], Connective::And), Err(FilterError::TooFewChildren(1)));
        let c = compose_filters(vec![f.clone(), f.clone()], Connective::Or).unwrap();
        assert_eq!(c.nl_phrase(), format!("{} or {}", f.nl_phrase(), f.nl_phrase()));
    }

    #[test]
    fn combined_above_average() {
        let (_d, db, ring) = song();
        let ft = builtin_filter_templates().into_iter().find(|t| t.id == "above_average").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let node = fill_filter_template_on(&ft, "song", &ring, &db, &mut rng, true).unwrap();
        let FilterNode::Templated { fragment, phrase, .. } = &node else { panic!() };
        assert_eq!(fragment.steps.len(), 3);
        assert!(matches!(fragment.steps[1].op, StepOp::Filter { .. }));
        assert!(phrase.contains("of those with "), "{phrase}");
        assert!(!phrase.contains('{'));
    }

    #[test]
    fn related_row_resolves_links() {
        let (_d, db, ring) = song();
        let ft = builtin_filter_templates().into_iter().find(|t| t.id == "has_related_row").unwrap();
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let node = fill_filter_template_on(&ft, "artist", &ring, &db, &mut rng, true).unwrap();
            let plan = SqrPlan {
                steps: vec![
                    Step {
                        id: "a".into(),
                        op: StepOp::Retrieve {
                            entity: EntityTerm::Named("artist".into()),
                            attribute: AttrTerm::Ref(AttrRef::new("artist", "artist_name")),
                        },
                    },
                    Step { id: "b".into(), op: StepOp::Filter { input: "a".into(), predicate: node } },
                ],
                result_step: "b".into(),
            };
            let sql = to_sql(&plan, &ring).unwrap();
            db.execute(&sql).unwrap();
        }
    }

    #[test]
    fn filter_count_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut counts = [0usize; 3];
        for _ in 0..20_000 {
            counts[sample_filter_count(&FILTER_COUNT_WEIGHTS, &mut rng)] += 1;
        }
        for (c, w) in counts.iter().zip(FILTER_COUNT_WEIGHTS) {
            assert!((*c as f64 / 20_000.0 - w).abs() < 0.02);
        }
    }
}
