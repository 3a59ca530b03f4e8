//! Generators: template factories that pick a base entity, a related entity
//! within a hop range and a number of attributes, then build a concrete
//! template over them.
//!
//! ```text
//! [generator]
//! id = related_metrics
//! arity = 2..3
//! hops = 1..1
//! aggregation = required
//!
//! [questions]
//! for each {entity} {key}, what is the {columns}?
//! ```
//!
//! `arity` counts output columns, the base entity's label included.
//! Questions may use `{entity}`, `{key}` and `{columns}`.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{key_value, list, parse_err, sections, InputSpec, QueryTemplate, TemplateError};
use crate::ring::{Attribute, Ring, SemanticType};
use crate::sqr::{AggOp, AttrRef, AttrTerm, EntityTerm, SqrPlan, Step, StepOp};

/// How crossing a one-to-many relationship is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregationPolicy {
    /// Group when a to-many hop is crossed, plain columns otherwise.
    Auto,
    /// Only structures without to-many hops.
    None,
    /// Only structures crossing a to-many hop, always grouped.
    Required,
}

impl AggregationPolicy {
    fn keyword(self) -> &'static str {
        match self {
            AggregationPolicy::Auto => "auto",
            AggregationPolicy::None => "none",
            AggregationPolicy::Required => "required",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub id: String,
    pub input_arity: (u32, u32),
    pub relationship_hops: (u32, u32),
    pub aggregation_policy: AggregationPolicy,
    pub question_templates: Vec<String>,
    pub tags: Vec<String>,
}

const TOKENS: [&str; 3] = ["{entity}", "{key}", "{columns}"];

fn range(line: usize, v: &str) -> Result<(u32, u32), TemplateError> {
    let (a, b) = v.split_once("..").unwrap_or((v, v));
    let p = |s: &str| s.trim().parse::<u32>().map_err(|_| parse_err(line, format!("bad range '{v}'")));
    Ok((p(a)?, p(b)?))
}

/// Parse a `[generator]` document.
pub fn parse_generator(text: &str) -> Result<GeneratorSpec, TemplateError> {
    let mut g = GeneratorSpec {
        id: String::new(),
        input_arity: (2, 2),
        relationship_hops: (0, 0),
        aggregation_policy: AggregationPolicy::Auto,
        question_templates: Vec::new(),
        tags: Vec::new(),
    };
    for sec in sections(text)? {
        match sec.name.as_str() {
            "generator" => {
                for (line, text) in &sec.body {
                    let (k, v) = key_value(*line, text)?;
                    match k.as_str() {
                        "id" => g.id = v,
                        "arity" => g.input_arity = range(*line, &v)?,
                        "hops" => g.relationship_hops = range(*line, &v)?,
                        "tags" => g.tags = list(&v),
                        "aggregation" => {
                            g.aggregation_policy = match v.as_str() {
                                "auto" => AggregationPolicy::Auto,
                                "none" => AggregationPolicy::None,
                                "required" => AggregationPolicy::Required,
                                other => return Err(parse_err(*line, format!("unknown aggregation policy '{other}'"))),
                            }
                        }
                        other => return Err(parse_err(*line, format!("unknown generator key '{other}'"))),
                    }
                }
            }
            "questions" => {
                for (line, text) in &sec.body {
                    let mut rest = text.clone();
                    for t in TOKENS {
                        rest = rest.replace(t, "");
                    }
                    if rest.contains(['{', '}']) {
                        return Err(parse_err(*line, "questions may only use {entity}, {key} and {columns}"));
                    }
                    g.question_templates.push(text.clone());
                }
            }
            other => return Err(parse_err(sec.line, format!("unknown section [{other}]"))),
        }
    }
    if g.id.is_empty() {
        return Err(parse_err(1, "missing generator id"));
    }
    if g.input_arity.0 < 1 || g.input_arity.0 > g.input_arity.1 || g.relationship_hops.0 > g.relationship_hops.1 {
        return Err(TemplateError::Invalid(format!("generator '{}' has an empty range", g.id)));
    }
    if g.question_templates.is_empty() {
        return Err(TemplateError::Invalid(format!("generator '{}' has no questions", g.id)));
    }
    Ok(g)
}

/// Render a `[generator]` document.
pub fn render_generator(g: &GeneratorSpec) -> String {
    let mut out = format!(
        "[generator]\nid = {}\narity = {}..{}\nhops = {}..{}\naggregation = {}\n",
        g.id,
        g.input_arity.0,
        g.input_arity.1,
        g.relationship_hops.0,
        g.relationship_hops.1,
        g.aggregation_policy.keyword()
    );
    if !g.tags.is_empty() {
        let _ = writeln!(out, "tags = {}", g.tags.join(", "));
    }
    out.push_str("\n[questions]\n");
    for q in &g.question_templates {
        let _ = writeln!(out, "{q}");
    }
    out
}

/// A candidate shape: base entity, far entity and whether the path between
/// them crosses a to-many hop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Structure {
    pub base: String,
    pub far: String,
    pub to_many: bool,
    /// Feasible column counts.
    pub arities: Vec<u32>,
}

fn crosses_to_many(ring: &Ring, base: &str, far: &str) -> Option<bool> {
    let path = ring.shortest_path(base, far)?;
    let mut current = base.to_string();
    let mut to_many = false;
    for rel in path {
        let next = rel.other(&current).to_string();
        if rel.to_entity == current && rel.from_entity == next && rel.from_entity != rel.to_entity {
            to_many = true;
        }
        current = next;
    }
    Some(to_many)
}

fn plain_candidates<'a>(ring: &'a Ring, entity: &str, skip: Option<&str>) -> Vec<&'a Attribute> {
    ring.entity(entity)
        .map(|e| {
            e.attributes
                .iter()
                .filter(|a| Some(a.name.as_str()) != skip && !ring.is_link_column(entity, &a.name))
                .collect()
        })
        .unwrap_or_default()
}

fn metric_candidates<'a>(ring: &'a Ring, entity: &str) -> Vec<&'a Attribute> {
    plain_candidates(ring, entity, None).into_iter().filter(|a| a.semantic_type == SemanticType::Arithmetic).collect()
}

/// Every structure satisfying the generator's constraints, in Ring order.
pub(crate) fn viable_structures(g: &GeneratorSpec, ring: &Ring) -> Vec<Structure> {
    let mut out = Vec::new();
    for base in &ring.entities {
        let Some(label) = ring.label_attribute(&base.name) else { continue };
        for far in &ring.entities {
            let d = if base.name == far.name {
                0
            } else {
                match ring.distance(&base.name, &far.name) {
                    Some(d) => d as u32,
                    None => continue,
                }
            };
            if d < g.relationship_hops.0 || d > g.relationship_hops.1 {
                continue;
            }
            let to_many = d > 0 && crosses_to_many(ring, &base.name, &far.name).unwrap_or(false);
            let allowed = match g.aggregation_policy {
                AggregationPolicy::Auto => true,
                AggregationPolicy::None => !to_many,
                AggregationPolicy::Required => to_many,
            };
            if !allowed {
                continue;
            }
            let extra = if to_many {
                metric_candidates(ring, &far.name).len().max(1)
            } else if d == 0 {
                plain_candidates(ring, &base.name, Some(&label.name)).len()
            } else {
                plain_candidates(ring, &far.name, None).len()
            } as u32;
            let arities: Vec<u32> = (g.input_arity.0.max(2)..=g.input_arity.1).filter(|n| n - 1 <= extra).collect();
            if !arities.is_empty() {
                out.push(Structure { base: base.name.clone(), far: far.name.clone(), to_many, arities });
            }
        }
    }
    out
}

fn join_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn qualified(entity_nl: &str, attr: &Attribute) -> String {
    if attr.nl_name.starts_with(entity_nl) {
        attr.nl_name.clone()
    } else {
        format!("{entity_nl} {}", attr.nl_name)
    }
}

/// Build a concrete template from a generator.
pub fn instantiate_generator(
    g: &GeneratorSpec,
    ring: &Ring,
    rng: &mut impl Rng,
) -> Result<QueryTemplate, TemplateError> {
    let structures = viable_structures(g, ring);
    let s = structures.choose(rng).ok_or_else(|| {
        TemplateError::NoViableStructure(format!(
            "generator '{}' (arity {}..{}, hops {}..{}) over ring '{}'",
            g.id, g.input_arity.0, g.input_arity.1, g.relationship_hops.0, g.relationship_hops.1, ring.db_id
        ))
    })?;
    let n = *s.arities.choose(rng).expect("non-empty arities");
    let base = ring.entity(&s.base).expect("structure entity");
    let far = ring.entity(&s.far).expect("structure entity");
    let label = ring.label_attribute(&base.name).expect("structure label");
    let retrieve = |entity: &str, attr: &str| StepOp::Retrieve {
        entity: EntityTerm::Named(entity.to_string()),
        attribute: AttrTerm::Ref(AttrRef::new(entity, attr)),
    };
    let input = |name: String, entity: &str, attr: &str, symmetric: Option<String>| {
        let StepOp::Retrieve { entity, attribute } = retrieve(entity, attr) else { unreachable!() };
        InputSpec { name, entity, attribute, mandatory_filters: Vec::new(), symmetric_filter_with: symmetric }
    };
    let mut inputs = Vec::new();
    let mut steps = Vec::new();
    let mut columns = Vec::new();
    if s.to_many {
        let mut metrics = metric_candidates(ring, &far.name);
        metrics.shuffle(rng);
        metrics.truncate(n as usize - 1);
        let mut ids = Vec::new();
        if metrics.is_empty() {
            inputs.push(input("m1".into(), &far.name, &far.id_attribute, None));
            steps.push(Step {
                id: "g1".into(),
                op: StepOp::Aggregate {
                    input: "m1".into(),
                    op: AggOp::Count,
                    group_by: Some(AttrTerm::Ref(AttrRef::new(&base.name, &label.name))),
                },
            });
            ids.push("g1".to_string());
            columns.push(format!("number of {} records", far.nl_name));
        }
        for (k, m) in metrics.iter().enumerate() {
            let op = *[AggOp::Avg, AggOp::Sum, AggOp::Max, AggOp::Min].choose(rng).expect("ops");
            let symmetric = (k > 0).then(|| "m1".to_string());
            inputs.push(input(format!("m{}", k + 1), &far.name, &m.name, symmetric));
            steps.push(Step {
                id: format!("g{}", k + 1),
                op: StepOp::Aggregate {
                    input: format!("m{}", k + 1),
                    op,
                    group_by: Some(AttrTerm::Ref(AttrRef::new(&base.name, &label.name))),
                },
            });
            ids.push(format!("g{}", k + 1));
            columns.push(format!("{} {}", op.phrase(), qualified(&far.nl_name, m)));
        }
        if ids.len() > 1 {
            steps.push(Step { id: "out".into(), op: StepOp::Collect { inputs: ids } });
        }
    } else {
        let mut attrs = if s.base == s.far {
            plain_candidates(ring, &base.name, Some(&label.name))
        } else {
            plain_candidates(ring, &far.name, None)
        };
        attrs.shuffle(rng);
        attrs.truncate(n as usize - 1);
        inputs.push(input("c1".into(), &base.name, &label.name, None));
        for (k, a) in attrs.iter().enumerate() {
            inputs.push(input(format!("c{}", k + 2), &far.name, &a.name, None));
            columns.push(if s.base == s.far { a.nl_name.clone() } else { qualified(&far.nl_name, a) });
        }
        steps.push(Step {
            id: "out".into(),
            op: StepOp::Collect { inputs: inputs.iter().map(|i| i.name.clone()).collect() },
        });
    }
    let result_step = steps.last().map(|s| s.id.clone()).unwrap_or_default();
    let columns = join_list(&columns);
    let question_templates = g
        .question_templates
        .iter()
        .map(|q| q.replace("{entity}", &base.nl_name).replace("{key}", &label.nl_name).replace("{columns}", &columns))
        .collect();
    let mut tags = g.tags.clone();
    tags.push("generated".into());
    let t = QueryTemplate {
        id: g.id.clone(),
        slots: Vec::new(),
        inputs,
        sqr_template: SqrPlan { steps, result_step },
        question_templates,
        tags,
    };
    t.check(Some(ring))?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{Entity, Relationship};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn attr(name: &str, ty: SemanticType) -> Attribute {
        Attribute {
            name: name.into(),
            nl_name: crate::ring::nl_name(name),
            column: name.into(),
            semantic_type: ty,
            nullable: false,
        }
    }

    fn shop() -> Ring {
        Ring {
            db_id: "shop".into(),
            entities: vec![
                Entity {
                    name: "customers".into(),
                    nl_name: "customers".into(),
                    table: "customers".into(),
                    id_attribute: "id".into(),
                    attributes: vec![attr("id", SemanticType::Identifier), attr("city", SemanticType::Categorical)],
                },
                Entity {
                    name: "orders".into(),
                    nl_name: "orders".into(),
                    table: "orders".into(),
                    id_attribute: "id".into(),
                    attributes: vec![
                        attr("id", SemanticType::Identifier),
                        attr("customer_id", SemanticType::Identifier),
                        attr("amount", SemanticType::Arithmetic),
                    ],
                },
            ],
            relationships: vec![Relationship {
                name: "orders_customers".into(),
                from_entity: "orders".into(),
                to_entity: "customers".into(),
                join_pairs: vec![("customer_id".into(), "id".into())],
            }],
        }
    }

    fn spec(arity: (u32, u32), hops: (u32, u32), policy: AggregationPolicy) -> GeneratorSpec {
        GeneratorSpec {
            id: "g".into(),
            input_arity: arity,
            relationship_hops: hops,
            aggregation_policy: policy,
            question_templates: vec!["for each {entity} {key}, what is the {columns}?".into()],
            tags: Vec::new(),
        }
    }

    #[test]
    fn groups_across_to_many() {
        let g = spec((2, 2), (1, 1), AggregationPolicy::Required);
        let t = instantiate_generator(&g, &shop(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let plan = t.full_plan();
        assert!(matches!(
            &plan.result().unwrap().op,
            StepOp::Aggregate { group_by: Some(AttrTerm::Ref(r)), .. } if r.entity == "customers"
        ));
        assert!(!t.question_templates[0].contains('{'));
    }

    #[test]
    fn unsatisfiable_hops() {
        let g = spec((2, 2), (3, 3), AggregationPolicy::Auto);
        assert!(matches!(
            instantiate_generator(&g, &shop(), &mut ChaCha8Rng::seed_from_u64(1)),
            Err(TemplateError::NoViableStructure(_))
        ));
    }

    #[test]
    fn deterministic() {
        let g = spec((2, 3), (0, 1), AggregationPolicy::Auto);
        for seed in 0..10 {
            let a = instantiate_generator(&g, &shop(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = instantiate_generator(&g, &shop(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn document_round_trip() {
        let g = spec((2, 3), (1, 2), AggregationPolicy::None);
        assert_eq!(parse_generator(&render_generator(&g)).unwrap(), g);
    }
}
