//! Schema-independent query templates, filter templates and generators.
//!
//! A template document is a sequence of bracketed sections:
//!
//! ```text
//! [template]
//! id = occurred_before
//! tags = temporal
//!
//! [slots]
//! Entity[0]
//! Identifier[0] of Entity[0]
//! Datetime[0] of Entity[0]
//!
//! [input a]
//! retrieve = {Entity[0]}, {Datetime[0]}
//! filter = {Identifier[0]} eq {Identifier[0].Value[0]}
//! symmetric = b
//!
//! [input b]
//! retrieve = {Entity[0]}, {Datetime[0]}
//! filter = {Identifier[0]} eq {Identifier[0].Value[1]}
//!
//! [plan]
//! c: Compare(a, b, before)
//!
//! [questions]
//! did {Entity[0].Expression} {Identifier[0].Value[0]} have a {Datetime[0].Expression} before {Identifier[0].Value[1]}?
//! ```
//!
//! Each input expands to a retrieval followed by its filters; the last
//! step of that chain carries the input's name, so the plan section refers
//! to inputs by name. Lines starting with `#` are comments.

mod generator;
mod library;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::ring::Ring;
use crate::sqr::{
    check_plan, parse_plan, parse_predicate, render_predicate, AttrTerm, EntityTerm, FilterNode, PlanParseError, Slot,
    SlotSuffix, SlotType, SqrPlan, Step, StepOp,
};

pub use generator::{instantiate_generator, parse_generator, render_generator, AggregationPolicy, GeneratorSpec};
pub use library::{
    builtin_filter_templates, builtin_generators, builtin_templates, load_library, parse_document, Document, Library,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("undeclared slot {0}")]
    UndeclaredSlot(String),
    #[error("invalid template: {0}")]
    Invalid(String),
    #[error("no viable structure: {0}")]
    NoViableStructure(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> TemplateError {
    TemplateError::Parse { line, message: message.into() }
}

fn plan_err(base_line: usize, e: PlanParseError) -> TemplateError {
    parse_err(base_line + e.line.saturating_sub(1), format!("column {}: {}", e.column, e.message))
}

/// How a declared slot relates to the template's entity slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotConstraint {
    None,
    /// Attribute slot owned by the given entity slot index.
    Of(u32),
    /// Entity directly related to the given entity slot.
    Related(u32),
    /// Entity on the referencing side of a relationship to the given one.
    References(u32),
    /// Entity on the referenced side of a relationship from the given one.
    ReferencedBy(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotDecl {
    pub slot: Slot,
    pub constraint: SlotConstraint,
}

impl SlotDecl {
    pub fn owner(&self) -> Option<u32> {
        match self.constraint {
            SlotConstraint::Of(i) => Some(i),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    pub name: String,
    pub entity: EntityTerm,
    pub attribute: AttrTerm,
    pub mandatory_filters: Vec<FilterNode>,
    pub symmetric_filter_with: Option<String>,
}

impl InputSpec {
    /// Slots mentioned by the retrieval and mandatory filters.
    pub fn slots(&self) -> Vec<Slot> {
        self.steps().iter().flat_map(|s| single_step_slots(&s.op)).fold(Vec::new(), |mut acc, s| {
            if !acc.contains(&s) {
                acc.push(s);
            }
            acc
        })
    }

    fn steps_with(&self, extra: &[FilterNode]) -> Vec<Step> {
        let filters: Vec<&FilterNode> = self.mandatory_filters.iter().chain(extra).collect();
        let n = filters.len();
        let id = |k: usize| if k == n { self.name.clone() } else { format!("{}_{k}", self.name) };
        let mut steps = vec![Step {
            id: id(0),
            op: StepOp::Retrieve { entity: self.entity.clone(), attribute: self.attribute.clone() },
        }];
        for (k, f) in filters.into_iter().enumerate() {
            steps.push(Step { id: id(k + 1), op: StepOp::Filter { input: id(k), predicate: f.clone() } });
        }
        steps
    }

    fn steps(&self) -> Vec<Step> {
        self.steps_with(&[])
    }
}

fn single_step_slots(op: &StepOp) -> Vec<Slot> {
    SqrPlan { steps: vec![Step { id: "x".into(), op: op.clone() }], result_step: "x".into() }.slots()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryTemplate {
    pub id: String,
    pub slots: Vec<SlotDecl>,
    pub inputs: Vec<InputSpec>,
    /// The analysis over the inputs; may be empty when the answer is the
    /// last input itself.
    pub sqr_template: SqrPlan,
    pub question_templates: Vec<String>,
    pub tags: Vec<String>,
}

impl QueryTemplate {
    pub fn declaration(&self, slot: Slot) -> Option<&SlotDecl> {
        let base = slot.base();
        self.slots.iter().find(|d| d.slot == base)
    }

    pub fn input(&self, name: &str) -> Option<&InputSpec> {
        self.inputs.iter().find(|i| i.name == name)
    }

    /// Inputs that receive generated filters: the first input and every
    /// input linked to it through `symmetric`.
    pub fn filter_targets(&self) -> Vec<&InputSpec> {
        let Some(first) = self.inputs.first() else { return Vec::new() };
        let mut group = vec![first.name.as_str()];
        loop {
            let before = group.len();
            for i in &self.inputs {
                let linked = i.symmetric_filter_with.as_deref();
                if group.contains(&i.name.as_str()) {
                    if let Some(o) = linked {
                        if !group.contains(&o) {
                            group.push(o);
                        }
                    }
                } else if linked.is_some_and(|o| group.contains(&o)) {
                    group.push(&i.name);
                }
            }
            if group.len() == before {
                break;
            }
        }
        self.inputs.iter().filter(|i| group.contains(&i.name.as_str())).collect()
    }

    /// The complete plan: every input chain followed by the analysis steps.
    pub fn full_plan(&self) -> SqrPlan {
        self.full_plan_with(&BTreeMap::new())
    }

    /// The complete plan with `extra` filters appended to the named inputs.
    pub fn full_plan_with(&self, extra: &BTreeMap<String, Vec<FilterNode>>) -> SqrPlan {
        let mut steps = Vec::new();
        for i in &self.inputs {
            steps.extend(i.steps_with(extra.get(&i.name).map(Vec::as_slice).unwrap_or(&[])));
        }
        steps.extend(self.sqr_template.steps.iter().cloned());
        let result_step = if self.sqr_template.steps.is_empty() {
            self.inputs.last().map(|i| i.name.clone()).unwrap_or_default()
        } else {
            self.sqr_template.result_step.clone()
        };
        SqrPlan { steps, result_step }
    }

    /// Every placeholder in the questions, in order of appearance.
    pub fn question_slots(&self) -> Result<Vec<Slot>, TemplateError> {
        let mut out = Vec::new();
        for q in &self.question_templates {
            for s in placeholders(q).map_err(TemplateError::Invalid)? {
                if !out.contains(&s) {
                    out.push(s);
                }
            }
        }
        Ok(out)
    }

    /// Structural checks: declarations, placeholder closure and plan shape.
    pub fn check(&self, ring: Option<&Ring>) -> Result<(), TemplateError> {
        if self.question_templates.is_empty() {
            return Err(TemplateError::Invalid("at least one question template is required".into()));
        }
        if self.inputs.is_empty() {
            return Err(TemplateError::Invalid("at least one input is required".into()));
        }
        for (k, d) in self.slots.iter().enumerate() {
            if self.slots[..k].iter().any(|o| o.slot == d.slot) {
                return Err(TemplateError::Invalid(format!("slot {} declared twice", d.slot)));
            }
            let target = match d.constraint {
                SlotConstraint::None => None,
                SlotConstraint::Of(i)
                | SlotConstraint::Related(i)
                | SlotConstraint::References(i)
                | SlotConstraint::ReferencedBy(i) => Some(i),
            };
            let ok = match (d.slot.ty, d.constraint) {
                (SlotType::Entity, SlotConstraint::Of(_)) => false,
                (SlotType::Entity, _) => target != Some(d.slot.index),
                (SlotType::Semantic(_), SlotConstraint::Of(_)) => true,
                (SlotType::Semantic(_), _) => false,
                (SlotType::Direction, c) => c == SlotConstraint::None,
            };
            if !ok {
                return Err(TemplateError::Invalid(format!("slot {} has an unsuitable constraint", d.slot)));
            }
            if let Some(i) = target {
                let e = Slot::new(SlotType::Entity, i);
                if !self.slots.iter().any(|o| o.slot == e) {
                    return Err(TemplateError::UndeclaredSlot(e.to_string()));
                }
            }
        }
        for (k, i) in self.inputs.iter().enumerate() {
            if self.inputs[..k].iter().any(|o| o.name == i.name) {
                return Err(TemplateError::Invalid(format!("input '{}' declared twice", i.name)));
            }
            if let Some(o) = &i.symmetric_filter_with {
                if o == &i.name || self.input(o).is_none() {
                    return Err(TemplateError::Invalid(format!(
                        "input '{}' is symmetric with '{o}', which is not another input",
                        i.name
                    )));
                }
            }
            if let (EntityTerm::Slot(e), AttrTerm::Slot(a)) = (&i.entity, &i.attribute) {
                if let Some(d) = self.declaration(*a) {
                    if d.owner() != Some(e.index) {
                        return Err(TemplateError::Invalid(format!(
                            "input '{}' retrieves {} from {e}, which does not own it",
                            i.name, a
                        )));
                    }
                }
            }
        }
        let plan = self.full_plan();
        let mut used = plan.slots();
        used.extend(self.question_slots()?);
        for s in used {
            if self.declaration(s).is_none() {
                return Err(TemplateError::UndeclaredSlot(s.to_string()));
            }
        }
        let (diags, _) = check_plan(&plan, ring);
        if let Some(d) = diags.first() {
            return Err(TemplateError::Invalid(d.to_string()));
        }
        Ok(())
    }
}

/// A reusable complex predicate with a concise phrase template.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterTemplate {
    pub id: String,
    /// `Entity[0]` is bound to the entity being filtered.
    pub slots: Vec<SlotDecl>,
    pub predicate: FilterNode,
    pub nl_template: String,
    /// Phrase used when a simple filter is placed inside the fragment;
    /// `{Inner.Expression}` marks the simple filter's phrase.
    pub combined_template: Option<String>,
    pub combine: Combine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    No,
    Optional,
    Always,
}

impl FilterTemplate {
    pub fn combinable_with_simple(&self) -> bool {
        self.combine != Combine::No
    }
}

pub const INNER_PLACEHOLDER: &str = "{Inner.Expression}";

/// Slot placeholders of a text, in order; `{Inner.Expression}` is skipped.
pub fn placeholders(text: &str) -> Result<Vec<Slot>, String> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find('{') {
        let after = &rest[start + 1..];
        let end = after.find('}').ok_or_else(|| format!("unclosed placeholder in '{text}'"))?;
        let inner = &after[..end];
        if inner != "Inner.Expression" {
            let s = Slot::parse(inner).ok_or_else(|| format!("unknown placeholder {{{inner}}}"))?;
            out.push(s);
        }
        rest = &after[end + 1..];
    }
    if rest.contains('}') {
        return Err(format!("stray '}}' in '{text}'"));
    }
    Ok(out)
}

struct Section {
    name: String,
    arg: Option<String>,
    line: usize,
    body: Vec<(usize, String)>,
}

fn sections(text: &str) -> Result<Vec<Section>, TemplateError> {
    let mut out: Vec<Section> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if t.starts_with('[') && t.ends_with(']') && !t.contains('{') {
            let inner = t[1..t.len() - 1].trim();
            let (name, arg) = match inner.split_once(char::is_whitespace) {
                Some((a, b)) => (a.to_string(), Some(b.trim().to_string())),
                None => (inner.to_string(), None),
            };
            out.push(Section { name, arg, line, body: Vec::new() });
            continue;
        }
        match out.last_mut() {
            Some(s) => s.body.push((line, t.to_string())),
            None => return Err(parse_err(line, "content before the first section")),
        }
    }
    Ok(out)
}

fn key_value(line: usize, text: &str) -> Result<(String, String), TemplateError> {
    let (k, v) = text.split_once('=').ok_or_else(|| parse_err(line, "expected 'key = value'"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn slot_ref(line: usize, text: &str) -> Result<Slot, TemplateError> {
    let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
    Slot::parse(inner)
        .filter(|s| s.suffix == SlotSuffix::None)
        .ok_or_else(|| parse_err(line, format!("expected a slot, found '{text}'")))
}

fn entity_index(line: usize, text: &str) -> Result<u32, TemplateError> {
    let s = slot_ref(line, text)?;
    if s.ty != SlotType::Entity {
        return Err(parse_err(line, format!("expected an entity slot, found '{text}'")));
    }
    Ok(s.index)
}

fn parse_slot_decl(line: usize, text: &str) -> Result<SlotDecl, TemplateError> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let slot = slot_ref(line, words[0])?;
    let constraint = match words.as_slice() {
        [_] => SlotConstraint::None,
        [_, kind, target] => {
            let i = entity_index(line, target)?;
            match *kind {
                "of" => SlotConstraint::Of(i),
                "related" => SlotConstraint::Related(i),
                "references" => SlotConstraint::References(i),
                "referenced-by" => SlotConstraint::ReferencedBy(i),
                other => return Err(parse_err(line, format!("unknown slot relation '{other}'"))),
            }
        }
        _ => return Err(parse_err(line, "expected '<slot> [of|related|references|referenced-by <entity slot>]'")),
    };
    Ok(SlotDecl { slot, constraint })
}

fn render_slot_decl(d: &SlotDecl) -> String {
    let slot = d.slot.to_string();
    let bare = &slot[1..slot.len() - 1];
    let (kind, i) = match d.constraint {
        SlotConstraint::None => return bare.to_string(),
        SlotConstraint::Of(i) => ("of", i),
        SlotConstraint::Related(i) => ("related", i),
        SlotConstraint::References(i) => ("references", i),
        SlotConstraint::ReferencedBy(i) => ("referenced-by", i),
    };
    format!("{bare} {kind} Entity[{i}]")
}

fn parse_input(sec: &Section) -> Result<InputSpec, TemplateError> {
    let name = sec.arg.clone().ok_or_else(|| parse_err(sec.line, "input section needs a name"))?;
    let mut retrieve = None;
    let mut mandatory_filters = Vec::new();
    let mut symmetric_filter_with = None;
    for (line, text) in &sec.body {
        let (k, v) = key_value(*line, text)?;
        match k.as_str() {
            "retrieve" => {
                let plan = parse_plan(&format!("x: Retrieve({v})")).map_err(|e| plan_err(*line, e))?;
                match plan.steps.into_iter().next().map(|s| s.op) {
                    Some(StepOp::Retrieve { entity, attribute }) => retrieve = Some((entity, attribute)),
                    _ => return Err(parse_err(*line, "expected a retrieval")),
                }
            }
            "filter" => mandatory_filters.push(parse_predicate(&v).map_err(|e| plan_err(*line, e))?),
            "symmetric" => symmetric_filter_with = Some(v),
            other => return Err(parse_err(*line, format!("unknown input key '{other}'"))),
        }
    }
    let (entity, attribute) = retrieve.ok_or_else(|| parse_err(sec.line, format!("input '{name}' has no retrieve")))?;
    Ok(InputSpec { name, entity, attribute, mandatory_filters, symmetric_filter_with })
}

fn list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

/// Parse and check a template document.
pub fn parse_template(text: &str) -> Result<QueryTemplate, TemplateError> {
    let secs = sections(text)?;
    let mut id = None;
    let mut tags = Vec::new();
    let mut slots = Vec::new();
    let mut inputs = Vec::new();
    let mut plan = None;
    let mut questions = Vec::new();
    let mut seen_header = false;
    for sec in &secs {
        match sec.name.as_str() {
            "template" => {
                seen_header = true;
                for (line, text) in &sec.body {
                    let (k, v) = key_value(*line, text)?;
                    match k.as_str() {
                        "id" => id = Some(v),
                        "tags" => tags = list(&v),
                        other => return Err(parse_err(*line, format!("unknown template key '{other}'"))),
                    }
                }
            }
            "slots" => {
                for (line, text) in &sec.body {
                    slots.push(parse_slot_decl(*line, text)?);
                }
            }
            "input" => inputs.push(parse_input(sec)?),
            "plan" => {
                let body: Vec<&str> = sec.body.iter().map(|(_, t)| t.as_str()).collect();
                let first = sec.body.first().map(|(l, _)| *l).unwrap_or(sec.line);
                plan = Some(if body.is_empty() {
                    SqrPlan { steps: Vec::new(), result_step: String::new() }
                } else {
                    parse_plan(&body.join("\n")).map_err(|e| plan_err(first, e))?
                });
            }
            "questions" => {
                for (line, text) in &sec.body {
                    placeholders(text).map_err(|m| parse_err(*line, m))?;
                    questions.push(text.clone());
                }
            }
            other => return Err(parse_err(sec.line, format!("unknown section [{other}]"))),
        }
    }
    if !seen_header {
        return Err(parse_err(1, "missing [template] section"));
    }
    let id = id.ok_or_else(|| parse_err(1, "missing template id"))?;
    let t = QueryTemplate {
        id,
        slots,
        inputs,
        sqr_template: plan.unwrap_or(SqrPlan { steps: Vec::new(), result_step: String::new() }),
        question_templates: questions,
        tags,
    };
    for step in &t.sqr_template.steps {
        if t.input(&step.id).is_some() || t.inputs.iter().any(|i| step.id.starts_with(&format!("{}_", i.name))) {
            return Err(TemplateError::Invalid(format!("plan step '{}' clashes with an input", step.id)));
        }
    }
    t.check(None)?;
    Ok(t)
}

fn render_plan_steps(plan: &SqrPlan) -> String {
    let text = crate::sqr::render_plan(plan);
    text.lines()
        .filter(|l| !l.starts_with("result:") || plan.steps.last().is_none_or(|s| s.id != plan.result_step))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Render a template document that reparses to an equal template.
pub fn render_template(t: &QueryTemplate) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[template]\nid = {}", t.id);
    if !t.tags.is_empty() {
        let _ = writeln!(out, "tags = {}", t.tags.join(", "));
    }
    if !t.slots.is_empty() {
        out.push_str("\n[slots]\n");
        for d in &t.slots {
            let _ = writeln!(out, "{}", render_slot_decl(d));
        }
    }
    for i in &t.inputs {
        let retrieve = crate::sqr::render_plan(&SqrPlan {
            steps: vec![Step {
                id: "x".into(),
                op: StepOp::Retrieve { entity: i.entity.clone(), attribute: i.attribute.clone() },
            }],
            result_step: "x".into(),
        });
        let args = retrieve.trim().trim_start_matches("x: Retrieve(").trim_end_matches(')');
        let _ = writeln!(out, "\n[input {}]\nretrieve = {args}", i.name);
        for f in &i.mandatory_filters {
            let _ = writeln!(out, "filter = {}", render_predicate(f));
        }
        if let Some(s) = &i.symmetric_filter_with {
            let _ = writeln!(out, "symmetric = {s}");
        }
    }
    if !t.sqr_template.steps.is_empty() {
        let _ = writeln!(out, "\n[plan]\n{}", render_plan_steps(&t.sqr_template));
    }
    out.push_str("\n[questions]\n");
    for q in &t.question_templates {
        let _ = writeln!(out, "{q}");
    }
    out
}

/// Parse a `[filter]` document.
pub fn parse_filter_template(text: &str) -> Result<FilterTemplate, TemplateError> {
    let secs = sections(text)?;
    let mut id = None;
    let mut combine = Combine::No;
    let mut slots = Vec::new();
    let mut predicate = None;
    let mut phrase = None;
    let mut combined = None;
    for sec in &secs {
        let joined = || sec.body.iter().map(|(_, t)| t.as_str()).collect::<Vec<_>>().join(" ");
        match sec.name.as_str() {
            "filter" => {
                for (line, text) in &sec.body {
                    let (k, v) = key_value(*line, text)?;
                    match (k.as_str(), v.as_str()) {
                        ("id", _) => id = Some(v),
                        ("combine", "no") => combine = Combine::No,
                        ("combine", "optional") => combine = Combine::Optional,
                        ("combine", "always") => combine = Combine::Always,
                        (other, _) => return Err(parse_err(*line, format!("unknown filter key or value '{other}'"))),
                    }
                }
            }
            "slots" => {
                for (line, text) in &sec.body {
                    slots.push(parse_slot_decl(*line, text)?);
                }
            }
            "predicate" => {
                let first = sec.body.first().map(|(l, _)| *l).unwrap_or(sec.line);
                predicate = Some(parse_predicate(&joined()).map_err(|e| plan_err(first, e))?);
            }
            "phrase" => phrase = Some(joined()),
            "combined" => combined = Some(joined()),
            other => return Err(parse_err(sec.line, format!("unknown section [{other}]"))),
        }
    }
    let id = id.ok_or_else(|| parse_err(1, "missing filter id"))?;
    let predicate = predicate.ok_or_else(|| parse_err(1, "missing [predicate] section"))?;
    let nl_template = phrase.ok_or_else(|| parse_err(1, "missing [phrase] section"))?;
    let ft = FilterTemplate { id, slots, predicate, nl_template, combined_template: combined, combine };
    check_filter_template(&ft)?;
    Ok(ft)
}

fn check_filter_template(ft: &FilterTemplate) -> Result<(), TemplateError> {
    let declared = |s: Slot| ft.slots.iter().any(|d| d.slot == s.base());
    if !declared(Slot::new(SlotType::Entity, 0)) {
        return Err(TemplateError::UndeclaredSlot("{Entity[0]}".into()));
    }
    let mut used = Vec::new();
    crate::sqr::collect_filter_slots(&ft.predicate, &mut used);
    let mut texts = vec![ft.nl_template.as_str()];
    texts.extend(ft.combined_template.as_deref());
    for t in texts {
        used.extend(placeholders(t).map_err(TemplateError::Invalid)?);
    }
    for s in used {
        if !declared(s) {
            return Err(TemplateError::UndeclaredSlot(s.to_string()));
        }
    }
    if ft.combine != Combine::No {
        let ok = matches!(&ft.predicate, FilterNode::Templated { fragment, .. }
            if matches!(fragment.steps.first().map(|s| &s.op), Some(StepOp::Retrieve { .. })));
        if !ok {
            return Err(TemplateError::Invalid("combinable filters need a fragment starting with a retrieval".into()));
        }
        if ft.combined_template.as_deref().is_none_or(|c| !c.contains(INNER_PLACEHOLDER)) {
            return Err(TemplateError::Invalid(format!(
                "combinable filters need a [combined] phrase with {INNER_PLACEHOLDER}"
            )));
        }
    }
    Ok(())
}

/// Render a `[filter]` document.
pub fn render_filter_template(ft: &FilterTemplate) -> String {
    let combine = match ft.combine {
        Combine::No => "no",
        Combine::Optional => "optional",
        Combine::Always => "always",
    };
    let mut out = format!("[filter]\nid = {}\ncombine = {combine}\n\n[slots]\n", ft.id);
    for d in &ft.slots {
        let _ = writeln!(out, "{}", render_slot_decl(d));
    }
    let _ = writeln!(out, "\n[predicate]\n{}\n\n[phrase]\n{}", render_predicate(&ft.predicate), ft.nl_template);
    if let Some(c) = &ft.combined_template {
        let _ = writeln!(out, "\n[combined]\n{c}");
    }
    out
}

/// Read a file and parse it as the document kind given by its extension
/// (`.tpl`, `.flt` or `.gen`); the id must match the file stem when given.
pub fn read_document(path: &Path) -> Result<library::Document, TemplateError> {
    let io = |m: String| TemplateError::Io { path: path.display().to_string(), message: m };
    let text = std::fs::read_to_string(path).map_err(|e| io(e.to_string()))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
    let doc = library::parse_document(&text, path.extension().and_then(|e| e.to_str()).unwrap_or_default())
        .map_err(|e| io(e.to_string()))?;
    if doc.id() != stem {
        return Err(io(format!("id '{}' does not match file name '{stem}'", doc.id())));
    }
    Ok(doc)
}
