//! Slot filling: bind a template's entity slots, then attribute slots, then
//! value slots sampled from the live database.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::db::{Database, DbError, Literal};
use crate::ring::{Attribute, Ring, SemanticType};
use crate::sqr::{
    validate_plan, AttrRef, AttrTerm, Direction, DirectionTerm, EntityTerm, FilterNode, FilterOp, Slot, SlotSuffix,
    SlotType, SortKey, SqrPlan, Step, StepOp, ValueTerm,
};
use crate::templates::{InputSpec, QueryTemplate, SlotConstraint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FillError {
    #[error("no fillable binding for slot {0}")]
    NoFillableSlot(String),
    #[error("could not sample values from {0}")]
    ValueSamplingFailure(String),
    #[error("database error: {0}")]
    Db(String),
    #[error("filled plan is invalid: {0}")]
    Invalid(String),
}

impl From<DbError> for FillError {
    fn from(e: DbError) -> Self {
        FillError::Db(e.to_string())
    }
}

/// What a slot is bound to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    Entity { entity: String },
    Attribute { entity: String, attribute: String },
    Value { value: Literal, semantic_type: SemanticType },
    Direction { direction: Direction },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotAssignment {
    pub slot: Slot,
    pub bound: Bound,
    /// Natural-language rendering used for `.Expression` and `.Value`.
    pub expression: String,
}

/// How a sampled value is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Equality,
    Threshold,
    Range,
}

impl Purpose {
    pub fn for_op(op: FilterOp) -> Purpose {
        match op {
            FilterOp::Gt | FilterOp::Lt | FilterOp::Gte | FilterOp::Lte => Purpose::Threshold,
            FilterOp::Between => Purpose::Range,
            FilterOp::Eq | FilterOp::Neq | FilterOp::Contains | FilterOp::In => Purpose::Equality,
        }
    }
}

const THRESHOLD_QUANTILES: (f64, f64) = (0.1, 0.9);
const MAX_RESAMPLES: usize = 20;

/// Sample one literal (two for `Range`, ascending) from an attribute's
/// non-null values: equality draws uniformly from distinct values,
/// threshold and range take values at random quantiles in [0.1, 0.9].
pub fn sample_value(
    db: &Database,
    ring: &Ring,
    attr: &AttrRef,
    purpose: Purpose,
    rng: &mut impl Rng,
) -> Result<Vec<Literal>, FillError> {
    let (entity, attribute) = resolve(ring, attr)?;
    let values = db.column_values(&entity.table, &attribute.column)?;
    if values.sorted.is_empty() {
        return Err(FillError::ValueSamplingFailure(attr.to_string()));
    }
    let quantile = |rng: &mut dyn rand::RngCore| {
        let q = rng.gen_range(THRESHOLD_QUANTILES.0..=THRESHOLD_QUANTILES.1);
        let idx = (q * (values.sorted.len() - 1) as f64).round() as usize;
        values.sorted[idx].clone()
    };
    Ok(match purpose {
        Purpose::Equality => vec![values.distinct.choose(rng).expect("non-empty").clone()],
        Purpose::Threshold => vec![quantile(rng)],
        Purpose::Range => {
            let mut pair = [quantile(rng), quantile(rng)];
            pair.sort_by(|a, b| a.sqlite_cmp(b));
            pair.to_vec()
        }
    })
}

fn resolve<'a>(ring: &'a Ring, attr: &AttrRef) -> Result<(&'a crate::ring::Entity, &'a Attribute), FillError> {
    let e = ring.entity(&attr.entity).ok_or_else(|| FillError::Invalid(format!("unknown entity {}", attr.entity)))?;
    let a = e.attribute(&attr.attribute).ok_or_else(|| FillError::Invalid(format!("unknown attribute {attr}")))?;
    Ok((e, a))
}

/// A template with every slot bound, plus any generated filters.
#[derive(Debug, Clone, PartialEq)]
pub struct FilledPlan {
    pub template_id: String,
    /// The template with all placeholders substituted.
    pub filled: QueryTemplate,
    pub assignments: Vec<SlotAssignment>,
    /// Generated filters per input name.
    pub extra: BTreeMap<String, Vec<FilterNode>>,
    pub seed: u64,
    pub plan: SqrPlan,
}

impl FilledPlan {
    /// Generated filters, as applied to the first input.
    pub fn extra_filters(&self) -> Vec<FilterNode> {
        self.filled.inputs.first().and_then(|i| self.extra.get(&i.name)).cloned().unwrap_or_default()
    }

    /// Entity that generated filters restrict.
    pub fn filter_entity(&self) -> Option<&str> {
        self.filled.inputs.first().and_then(|i| i.entity.name())
    }

    /// Append a generated filter to every filter target and rebuild the plan.
    pub fn add_filter(&mut self, filter: FilterNode) {
        let targets: Vec<String> = self.filled.filter_targets().iter().map(|i| i.name.clone()).collect();
        for t in targets {
            self.extra.entry(t).or_default().push(filter.clone());
        }
        self.plan = self.filled.full_plan_with(&self.extra);
    }

    pub fn assignment(&self, slot: Slot) -> Option<&SlotAssignment> {
        self.assignments.iter().find(|a| a.slot == slot)
    }
}

/// Substitution of slots by their binds.
#[derive(Debug, Default, Clone)]
pub(crate) struct Binding {
    pub entities: BTreeMap<u32, String>,
    pub attributes: BTreeMap<(SlotType, u32), AttrRef>,
    pub values: BTreeMap<(SlotType, u32, u32), Literal>,
    pub directions: BTreeMap<u32, Direction>,
}

impl Binding {
    fn key(s: Slot) -> (SlotType, u32) {
        (s.ty, s.index)
    }

    fn entity(&self, e: &EntityTerm) -> EntityTerm {
        match e {
            EntityTerm::Slot(s) => {
                self.entities.get(&s.index).map(|n| EntityTerm::Named(n.clone())).unwrap_or_else(|| e.clone())
            }
            named => named.clone(),
        }
    }

    fn attr(&self, a: &AttrTerm) -> AttrTerm {
        match a {
            AttrTerm::Slot(s) => {
                self.attributes.get(&Self::key(*s)).map(|r| AttrTerm::Ref(r.clone())).unwrap_or_else(|| a.clone())
            }
            AttrTerm::Link(e) => AttrTerm::Link(self.entity(e)),
            AttrTerm::Ref(_) => a.clone(),
        }
    }

    fn value(&self, v: &ValueTerm) -> ValueTerm {
        match v {
            ValueTerm::Slot(s) if s.suffix == SlotSuffix::Value => self
                .values
                .get(&(s.ty, s.index, s.value_index.unwrap_or(0)))
                .map(|l| ValueTerm::Literal(l.clone()))
                .unwrap_or_else(|| v.clone()),
            other => other.clone(),
        }
    }

    pub fn filter(&self, f: &FilterNode) -> FilterNode {
        match f {
            FilterNode::Simple { attribute, op, values, phrase } => FilterNode::Simple {
                attribute: self.attr(attribute),
                op: *op,
                values: values.iter().map(|v| self.value(v)).collect(),
                phrase: phrase.clone(),
            },
            FilterNode::Composite { connective, children } => FilterNode::Composite {
                connective: *connective,
                children: children.iter().map(|c| self.filter(c)).collect(),
            },
            FilterNode::Templated { id, subject, op, fragment, phrase } => FilterNode::Templated {
                id: id.clone(),
                subject: self.attr(subject),
                op: *op,
                fragment: Box::new(self.plan(fragment)),
                phrase: phrase.clone(),
            },
        }
    }

    fn op(&self, op: &StepOp) -> StepOp {
        match op {
            StepOp::Retrieve { entity, attribute } => {
                StepOp::Retrieve { entity: self.entity(entity), attribute: self.attr(attribute) }
            }
            StepOp::Filter { input, predicate } => {
                StepOp::Filter { input: input.clone(), predicate: self.filter(predicate) }
            }
            StepOp::Aggregate { input, op, group_by } => {
                StepOp::Aggregate { input: input.clone(), op: *op, group_by: group_by.as_ref().map(|g| self.attr(g)) }
            }
            StepOp::Sort { input, key, direction } => StepOp::Sort {
                input: input.clone(),
                key: match key {
                    SortKey::Attr(a) => SortKey::Attr(self.attr(a)),
                    SortKey::Value => SortKey::Value,
                },
                direction: match direction {
                    DirectionTerm::Slot(s) => self
                        .directions
                        .get(&s.index)
                        .map(|d| DirectionTerm::Fixed(*d))
                        .unwrap_or_else(|| direction.clone()),
                    fixed => fixed.clone(),
                },
            },
            other => other.clone(),
        }
    }

    pub fn plan(&self, p: &SqrPlan) -> SqrPlan {
        SqrPlan {
            steps: p.steps.iter().map(|s| Step { id: s.id.clone(), op: self.op(&s.op) }).collect(),
            result_step: p.result_step.clone(),
        }
    }

    fn input(&self, i: &InputSpec) -> InputSpec {
        InputSpec {
            name: i.name.clone(),
            entity: self.entity(&i.entity),
            attribute: self.attr(&i.attribute),
            mandatory_filters: i.mandatory_filters.iter().map(|f| self.filter(f)).collect(),
            symmetric_filter_with: i.symmetric_filter_with.clone(),
        }
    }

    pub fn template(&self, t: &QueryTemplate) -> QueryTemplate {
        QueryTemplate {
            id: t.id.clone(),
            slots: Vec::new(),
            inputs: t.inputs.iter().map(|i| self.input(i)).collect(),
            sqr_template: self.plan(&t.sqr_template),
            question_templates: t.question_templates.clone(),
            tags: t.tags.clone(),
        }
    }
}

/// Replace `@link` terms in templated filters by the join attributes
/// between the subject's entity and the fragment's entity.
pub(crate) fn resolve_links_in_filter(
    f: &FilterNode,
    ring: &Ring,
    outer: Option<&str>,
) -> Result<FilterNode, FillError> {
    Ok(match f {
        FilterNode::Simple { .. } => f.clone(),
        FilterNode::Composite { connective, children } => FilterNode::Composite {
            connective: *connective,
            children: children.iter().map(|c| resolve_links_in_filter(c, ring, outer)).collect::<Result<_, _>>()?,
        },
        FilterNode::Templated { id, subject, op, fragment, phrase } => {
            let inner = fragment.steps.iter().find_map(|s| match &s.op {
                StepOp::Retrieve { entity: EntityTerm::Named(e), .. } => Some(e.clone()),
                _ => None,
            });
            let subject_entity = match subject {
                AttrTerm::Link(EntityTerm::Named(e)) => Some(e.clone()),
                AttrTerm::Ref(r) => Some(r.entity.clone()),
                _ => outer.map(str::to_string),
            };
            let link = match (&subject_entity, &inner) {
                (Some(a), Some(b)) => ring.link_attributes(a, b),
                _ => None,
            };
            let fix = |t: &AttrTerm| -> Result<AttrTerm, FillError> {
                match t {
                    AttrTerm::Link(EntityTerm::Named(e)) => {
                        let (la, lb) = link.clone().ok_or_else(|| {
                            FillError::NoFillableSlot(format!("link between {subject_entity:?} and {inner:?}"))
                        })?;
                        if Some(e) == subject_entity.as_ref() {
                            Ok(AttrTerm::Ref(AttrRef::new(e, la)))
                        } else {
                            Ok(AttrTerm::Ref(AttrRef::new(e, lb)))
                        }
                    }
                    other => Ok(other.clone()),
                }
            };
            let mut frag = (**fragment).clone();
            for s in &mut frag.steps {
                if let StepOp::Retrieve { attribute, .. } = &mut s.op {
                    *attribute = fix(attribute)?;
                }
                if let StepOp::Filter { predicate, .. } = &mut s.op {
                    *predicate = resolve_links_in_filter(predicate, ring, inner.as_deref())?;
                }
            }
            FilterNode::Templated {
                id: id.clone(),
                subject: fix(subject)?,
                op: *op,
                fragment: Box::new(frag),
                phrase: phrase.clone(),
            }
        }
    })
}

fn resolve_links_in_template(t: &mut QueryTemplate, ring: &Ring) -> Result<(), FillError> {
    for i in &mut t.inputs {
        let outer = i.entity.name().map(str::to_string);
        for f in &mut i.mandatory_filters {
            *f = resolve_links_in_filter(f, ring, outer.as_deref())?;
        }
    }
    for s in &mut t.sqr_template.steps {
        if let StepOp::Filter { predicate, .. } = &mut s.op {
            *predicate = resolve_links_in_filter(predicate, ring, None)?;
        }
    }
    Ok(())
}

/// Attributes a typed attribute slot may bind to on `entity`.
pub(crate) fn attribute_candidates<'a>(ring: &'a Ring, entity: &str, ty: SemanticType) -> Vec<&'a Attribute> {
    match ty {
        SemanticType::Identifier => {
            ring.label_attribute(entity).filter(|a| a.semantic_type == SemanticType::Identifier).into_iter().collect()
        }
        _ => ring
            .entity(entity)
            .map(|e| e.attributes_of(ty).filter(|a| !ring.is_link_column(entity, &a.name)).collect())
            .unwrap_or_default(),
    }
}

fn related(ring: &Ring, a: &str, b: &str, c: SlotConstraint) -> bool {
    ring.relationships.iter().any(|r| {
        r.from_entity != r.to_entity
            && match c {
                SlotConstraint::Related(_) => r.touches(a) && r.touches(b),
                SlotConstraint::References(_) => r.from_entity == a && r.to_entity == b,
                SlotConstraint::ReferencedBy(_) => r.from_entity == b && r.to_entity == a,
                _ => true,
            }
    })
}

/// Every consistent assignment of entities to the template's entity slots.
pub(crate) fn entity_assignments(
    t: &QueryTemplate,
    ring: &Ring,
    fixed: &BTreeMap<u32, String>,
) -> Vec<Vec<(u32, String)>> {
    let mut slots: Vec<_> = t.slots.iter().filter(|d| d.slot.ty == SlotType::Entity).collect();
    slots.sort_by_key(|d| d.slot.index);
    let mut demand: BTreeMap<(u32, SemanticType), usize> = BTreeMap::new();
    for d in &t.slots {
        if let (SlotType::Semantic(ty), Some(owner)) = (d.slot.ty, d.owner()) {
            *demand.entry((owner, ty)).or_default() += 1;
        }
    }
    let fits = |idx: u32, entity: &str| {
        demand
            .iter()
            .filter(|((o, _), _)| *o == idx)
            .all(|((_, ty), n)| attribute_candidates(ring, entity, *ty).len() >= *n)
    };
    let mut out = Vec::new();
    let mut current: Vec<(u32, String)> = Vec::new();
    fn go(
        k: usize,
        slots: &[&crate::templates::SlotDecl],
        ring: &Ring,
        fits: &dyn Fn(u32, &str) -> bool,
        fixed: &BTreeMap<u32, String>,
        current: &mut Vec<(u32, String)>,
        out: &mut Vec<Vec<(u32, String)>>,
    ) {
        if k == slots.len() {
            out.push(current.clone());
            return;
        }
        let d = slots[k];
        for e in &ring.entities {
            if current.iter().any(|(_, n)| n == &e.name)
                || !fits(d.slot.index, &e.name)
                || fixed.get(&d.slot.index).is_some_and(|f| f != &e.name)
            {
                continue;
            }
            let ok = match d.constraint {
                SlotConstraint::Related(j) | SlotConstraint::References(j) | SlotConstraint::ReferencedBy(j) => current
                    .iter()
                    .find(|(i, _)| *i == j)
                    .is_some_and(|(_, other)| related(ring, &e.name, other, d.constraint)),
                _ => true,
            };
            if ok {
                current.push((d.slot.index, e.name.clone()));
                go(k + 1, slots, ring, fits, fixed, current, out);
                current.pop();
            }
        }
    }
    go(0, &slots, ring, &fits, fixed, &mut current, &mut out);
    out
}

fn direction_word(d: Direction) -> &'static str {
    match d {
        Direction::Desc => "highest",
        Direction::Asc => "lowest",
    }
}

/// Value slots with their purpose, in order of appearance in the plan.
fn value_uses(plan: &SqrPlan) -> Vec<(Slot, Purpose, Option<Slot>)> {
    fn walk_filter(f: &FilterNode, out: &mut Vec<(Slot, Purpose, Option<Slot>)>) {
        match f {
            FilterNode::Simple { op, values, .. } => {
                let purpose = Purpose::for_op(*op);
                let slots: Vec<Slot> =
                    values.iter().filter_map(|v| if let ValueTerm::Slot(s) = v { Some(*s) } else { None }).collect();
                if purpose == Purpose::Range && slots.len() == 2 {
                    out.push((slots[0], Purpose::Range, Some(slots[1])));
                } else {
                    for s in slots {
                        out.push((s, if purpose == Purpose::Range { Purpose::Threshold } else { purpose }, None));
                    }
                }
            }
            FilterNode::Composite { children, .. } => children.iter().for_each(|c| walk_filter(c, out)),
            FilterNode::Templated { fragment, .. } => walk_plan(fragment, out),
        }
    }
    fn walk_plan(p: &SqrPlan, out: &mut Vec<(Slot, Purpose, Option<Slot>)>) {
        for s in &p.steps {
            if let StepOp::Filter { predicate, .. } = &s.op {
                walk_filter(predicate, out);
            }
        }
    }
    let mut out = Vec::new();
    walk_plan(plan, &mut out);
    out
}

/// Bind every slot of `template` against `ring` and `db`; a pure function
/// of its inputs and `seed`.
pub fn fill_template(template: &QueryTemplate, ring: &Ring, db: &Database, seed: u64) -> Result<FilledPlan, FillError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (binding, log) = bind_slots(template, ring, db, &mut rng, &BTreeMap::new())?;
    let mut filled = binding.template(template);
    resolve_links_in_template(&mut filled, ring)?;
    let plan = filled.full_plan();
    if let Some(d) = validate_plan(&plan, ring).first() {
        return Err(FillError::Invalid(d.to_string()));
    }
    Ok(FilledPlan { template_id: template.id.clone(), filled, assignments: log, extra: BTreeMap::new(), seed, plan })
}

/// Bind entities (honouring `fixed`), then attributes, values and
/// directions, returning the substitution and the assignment log.
pub(crate) fn bind_slots(
    template: &QueryTemplate,
    ring: &Ring,
    db: &Database,
    rng: &mut ChaCha8Rng,
    fixed: &BTreeMap<u32, String>,
) -> Result<(Binding, Vec<SlotAssignment>), FillError> {
    let rng = &mut *rng;
    let mut binding = Binding::default();
    let mut log = Vec::new();

    let options = entity_assignments(template, ring, fixed);
    let Some(choice) = options.choose(rng) else {
        let unsatisfiable = template.slots.iter().find(|d| match d.slot.ty {
            SlotType::Semantic(ty) => ring.entities.iter().all(|e| attribute_candidates(ring, &e.name, ty).is_empty()),
            _ => false,
        });
        let slot = unsatisfiable.or_else(|| template.slots.iter().find(|d| d.slot.ty == SlotType::Entity));
        return Err(FillError::NoFillableSlot(slot.map(|d| d.slot.to_string()).unwrap_or_default()));
    };
    for (idx, name) in choice {
        binding.entities.insert(*idx, name.clone());
        let nl = ring.entity(name).map(|e| e.nl_name.clone()).unwrap_or_default();
        log.push(SlotAssignment {
            slot: Slot::new(SlotType::Entity, *idx),
            bound: Bound::Entity { entity: name.clone() },
            expression: nl,
        });
    }

    for d in &template.slots {
        let (SlotType::Semantic(ty), Some(owner)) = (d.slot.ty, d.owner()) else { continue };
        let entity =
            binding.entities.get(&owner).cloned().ok_or_else(|| FillError::NoFillableSlot(d.slot.to_string()))?;
        let taken: Vec<&AttrRef> = binding.attributes.values().collect();
        let candidates: Vec<&Attribute> = attribute_candidates(ring, &entity, ty)
            .into_iter()
            .filter(|a| !taken.iter().any(|r| r.entity == entity && r.attribute == a.name))
            .collect();
        let attr = candidates.choose(rng).ok_or_else(|| FillError::NoFillableSlot(d.slot.to_string()))?;
        let r = AttrRef::new(&entity, &attr.name);
        binding.attributes.insert((d.slot.ty, d.slot.index), r.clone());
        log.push(SlotAssignment {
            slot: d.slot,
            bound: Bound::Attribute { entity: r.entity, attribute: r.attribute },
            expression: attr.nl_name.clone(),
        });
    }

    let plan = template.full_plan();
    let mut uses = value_uses(&plan);
    for q in template.question_slots().map_err(|e| FillError::Invalid(e.to_string()))? {
        if q.suffix == SlotSuffix::Value && !uses.iter().any(|(s, _, p)| *s == q || *p == Some(q)) {
            uses.push((q, Purpose::Equality, None));
        }
    }
    let mut sampled: BTreeMap<(SlotType, u32), Vec<Literal>> = BTreeMap::new();
    for (slot, purpose, partner) in uses {
        let key = (slot.ty, slot.index, slot.value_index.unwrap_or(0));
        if binding.values.contains_key(&key) {
            continue;
        }
        let SlotType::Semantic(ty) = slot.ty else { continue };
        let attr = binding
            .attributes
            .get(&(slot.ty, slot.index))
            .cloned()
            .ok_or_else(|| FillError::NoFillableSlot(slot.to_string()))?;
        let prior = sampled.entry((slot.ty, slot.index)).or_default();
        let mut picked = None;
        for _ in 0..MAX_RESAMPLES {
            let vals = sample_value(db, ring, &attr, purpose, rng)?;
            if purpose == Purpose::Range || !prior.iter().any(|p| p.approx_eq(&vals[0])) {
                picked = Some(vals);
                break;
            }
        }
        let vals = picked.ok_or_else(|| FillError::ValueSamplingFailure(attr.to_string()))?;
        let mut targets = vec![slot];
        targets.extend(partner);
        for (s, v) in targets.into_iter().zip(vals) {
            prior.push(v.clone());
            binding.values.insert((s.ty, s.index, s.value_index.unwrap_or(0)), v.clone());
            log.push(SlotAssignment {
                slot: s,
                bound: Bound::Value { value: v.clone(), semantic_type: ty },
                expression: v.display_text(),
            });
        }
    }

    for d in &template.slots {
        if d.slot.ty == SlotType::Direction {
            let dir = if rng.gen_bool(0.5) { Direction::Desc } else { Direction::Asc };
            binding.directions.insert(d.slot.index, dir);
            log.push(SlotAssignment {
                slot: d.slot,
                bound: Bound::Direction { direction: dir },
                expression: direction_word(dir).to_string(),
            });
        }
    }

    Ok((binding, log))
}

/// Substitute slot placeholders in `text` by their binds' renderings;
/// unknown placeholders are reported, non-slot braces are kept.
pub fn render_placeholders(text: &str, assignments: &[SlotAssignment]) -> Result<String, Slot> {
    let mut out = String::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let Some(close) = rest[open..].find('}').map(|c| open + c) else { break };
        let inner = &rest[open + 1..close];
        match Slot::parse(inner) {
            Some(slot) => {
                let key = if slot.is_value() { slot } else { slot.base() };
                let a = assignments.iter().find(|a| a.slot == key).ok_or(slot)?;
                out.push_str(&a.expression);
            }
            None => out.push_str(&rest[open..=close]),
        }
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::generate_ring;
    use crate::samples::write_song_database;
    use crate::templates::{builtin_templates, parse_template};

    fn song() -> (tempfile::TempDir, Database, Ring) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("music.sqlite");
        write_song_database(&path).unwrap();
        let db = Database::open(&path).unwrap();
        let ring = generate_ring(&db).unwrap();
        (dir, db, ring)
    }

    #[test]
    fn fill_order_and_types() {
        let (_d, db, ring) = song();
        let t = builtin_templates().into_iter().find(|t| t.id == "occurred_before").unwrap();
        for seed in 0..20 {
            let f = fill_template(&t, &ring, &db, seed).unwrap();
            let phase = |b: &Bound| match b {
                Bound::Entity { .. } => 0,
                Bound::Attribute { .. } => 1,
                Bound::Value { .. } => 2,
                Bound::Direction { .. } => 3,
            };
            let phases: Vec<u8> = f.assignments.iter().map(|a| phase(&a.bound)).collect();
            assert!(phases.windows(2).all(|w| w[0] <= w[1]));
            assert!(f.plan.slots().is_empty());
            let dt = f.assignment(Slot::new(SlotType::Semantic(SemanticType::Datetime), 0)).unwrap();
            assert_eq!(dt.bound, Bound::Attribute { entity: "song".into(), attribute: "releasedate".into() });
            let ident = f.assignment(Slot::new(SlotType::Semantic(SemanticType::Identifier), 0)).unwrap();
            assert_eq!(ident.bound, Bound::Attribute { entity: "song".into(), attribute: "song_name".into() });
            let v0 = f.assignment(Slot::value(SlotType::Semantic(SemanticType::Identifier), 0, 0)).unwrap();
            let v1 = f.assignment(Slot::value(SlotType::Semantic(SemanticType::Identifier), 0, 1)).unwrap();
            assert_ne!(v0.bound, v1.bound);
        }
    }

    #[test]
    fn missing_type_is_reported() {
        let (_d, db, ring) = song();
        let t = parse_template(
            "[template]\nid = x\n[slots]\nEntity[0]\nBoolean[0] of Entity[0]\n[input a]\nretrieve = {Entity[0]}, {Boolean[0]}\n[questions]\nq {Boolean[0].Expression}?\n",
        )
        .unwrap();
        assert_eq!(fill_template(&t, &ring, &db, 1), Err(FillError::NoFillableSlot("{Boolean[0]}".into())));
    }

    #[test]
    fn deterministic() {
        let (_d, db, ring) = song();
        for t in builtin_templates() {
            let a = fill_template(&t, &ring, &db, 9);
            let b = fill_template(&t, &ring, &db, 9);
            assert_eq!(a, b, "{}", t.id);
        }
    }

    #[test]
    fn degenerate_range() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.sqlite");
        rusqlite::Connection::open(&path)
            .unwrap()
            .execute_batch("CREATE TABLE t (id INTEGER PRIMARY KEY, v INTEGER); INSERT INTO t VALUES (1, 5), (2, 5);")
            .unwrap();
        let db = Database::open(&path).unwrap();
        let ring = generate_ring(&db).unwrap();
        let vals = sample_value(&db, &ring, &AttrRef::new("t", "v"), Purpose::Range, &mut ChaCha8Rng::seed_from_u64(3))
            .unwrap();
        assert_eq!(vals, vec![Literal::Integer(5), Literal::Integer(5)]);
    }
}
