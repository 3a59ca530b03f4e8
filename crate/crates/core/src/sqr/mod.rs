//! Structured analytic plans over Ring entities and attributes.
//!
//! A plan is an ordered list of steps; each step may only reference steps
//! defined before it. Plans exist in three forms: templated (terms may be
//! [`Slot`] placeholders), filled (no placeholders) and compiled (filled,
//! with structurally identical steps merged).

mod compile;
mod text;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::db::Literal;
use crate::ring::SemanticType;

pub use compile::{compile_plan, CompileError};
pub use text::{parse_plan, parse_predicate, render_plan, render_predicate, PlanParseError};
pub(crate) use validate::check_plan;
pub use validate::{filter_ops_for, result_shape, validate_plan, Diagnostic, DiagnosticKind, StepShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SlotType {
    Semantic(SemanticType),
    Entity,
    Direction,
}

impl SlotType {
    pub fn name(self) -> &'static str {
        match self {
            SlotType::Semantic(t) => t.name(),
            SlotType::Entity => "Entity",
            SlotType::Direction => "Direction",
        }
    }

    pub fn parse(s: &str) -> Option<SlotType> {
        match s {
            "Entity" => Some(SlotType::Entity),
            "Direction" => Some(SlotType::Direction),
            other => SemanticType::parse(other).map(SlotType::Semantic),
        }
    }

    pub fn is_attribute(self) -> bool {
        matches!(self, SlotType::Semantic(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SlotSuffix {
    None,
    Value,
    Expression,
}

/// A typed placeholder: `{Type[index]}`, `{Type[index].Value[k]}` or
/// `{Type[index].Expression}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Slot {
    pub ty: SlotType,
    pub index: u32,
    pub suffix: SlotSuffix,
    pub value_index: Option<u32>,
}

impl Slot {
    pub fn new(ty: SlotType, index: u32) -> Slot {
        Slot { ty, index, suffix: SlotSuffix::None, value_index: None }
    }

    pub fn value(ty: SlotType, index: u32, k: u32) -> Slot {
        Slot { ty, index, suffix: SlotSuffix::Value, value_index: Some(k) }
    }

    pub fn expression(ty: SlotType, index: u32) -> Slot {
        Slot { ty, index, suffix: SlotSuffix::Expression, value_index: None }
    }

    /// The bare slot this placeholder refers to (suffix stripped).
    pub fn base(self) -> Slot {
        Slot::new(self.ty, self.index)
    }

    pub fn is_value(self) -> bool {
        self.suffix == SlotSuffix::Value
    }

    /// Parse the inside of `{...}`.
    pub fn parse(inner: &str) -> Option<Slot> {
        let (head, rest) = match inner.find('.') {
            Some(i) => (&inner[..i], Some(&inner[i + 1..])),
            None => (inner, None),
        };
        let (ty, index) = parse_indexed(head)?;
        let ty = SlotType::parse(ty)?;
        let index = index?;
        match rest {
            None => Some(Slot::new(ty, index)),
            Some("Expression") => Some(Slot::expression(ty, index)),
            Some("Value") if ty.is_attribute() => Some(Slot::value(ty, index, 0)),
            Some(v) if ty.is_attribute() => match parse_indexed(v)? {
                ("Value", Some(k)) => Some(Slot::value(ty, index, k)),
                _ => None,
            },
            _ => None,
        }
    }
}

fn parse_indexed(s: &str) -> Option<(&str, Option<u32>)> {
    match s.find('[') {
        None => Some((s, None)),
        Some(i) => {
            let name = &s[..i];
            let idx = s[i + 1..].strip_suffix(']')?.parse().ok()?;
            Some((name, Some(idx)))
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}[{}]", self.ty.name(), self.index)?;
        match self.suffix {
            SlotSuffix::None => {}
            SlotSuffix::Expression => f.write_str(".Expression")?,
            SlotSuffix::Value => write!(f, ".Value[{}]", self.value_index.unwrap_or(0))?,
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AttrRef {
    pub entity: String,
    pub attribute: String,
}

impl AttrRef {
    pub fn new(entity: impl Into<String>, attribute: impl Into<String>) -> AttrRef {
        AttrRef { entity: entity.into(), attribute: attribute.into() }
    }
}

impl fmt::Display for AttrRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", text::ident(&self.entity), text::ident(&self.attribute))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntityTerm {
    Named(String),
    Slot(Slot),
}

impl EntityTerm {
    pub fn name(&self) -> Option<&str> {
        match self {
            EntityTerm::Named(n) => Some(n),
            EntityTerm::Slot(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttrTerm {
    Ref(AttrRef),
    Slot(Slot),
    /// The column of `entity` that links it to the related entity of a
    /// filter template; resolved while filling.
    Link(EntityTerm),
}

impl AttrTerm {
    pub fn as_ref(&self) -> Option<&AttrRef> {
        match self {
            AttrTerm::Ref(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ValueTerm {
    Literal(Literal),
    Slot(Slot),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Asc,
    Desc,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Asc => "asc",
            Direction::Desc => "desc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DirectionTerm {
    Fixed(Direction),
    Slot(Slot),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AggOp {
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl AggOp {
    pub const ALL: [AggOp; 5] = [AggOp::Count, AggOp::Sum, AggOp::Avg, AggOp::Min, AggOp::Max];

    pub fn keyword(self) -> &'static str {
        match self {
            AggOp::Count => "count",
            AggOp::Sum => "sum",
            AggOp::Avg => "avg",
            AggOp::Min => "min",
            AggOp::Max => "max",
        }
    }

    pub fn parse(s: &str) -> Option<AggOp> {
        AggOp::ALL.into_iter().find(|o| o.keyword() == s)
    }

    /// Natural-language name used in questions.
    pub fn phrase(self) -> &'static str {
        match self {
            AggOp::Count => "number of",
            AggOp::Sum => "total",
            AggOp::Avg => "average",
            AggOp::Min => "minimum",
            AggOp::Max => "maximum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareOp {
    Eq,
    Neq,
    Gt,
    Lt,
    Gte,
    Lte,
    Before,
    After,
}

impl CompareOp {
    pub const ALL: [CompareOp; 8] = [
        CompareOp::Eq,
        CompareOp::Neq,
        CompareOp::Gt,
        CompareOp::Lt,
        CompareOp::Gte,
        CompareOp::Lte,
        CompareOp::Before,
        CompareOp::After,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            CompareOp::Eq => "eq",
            CompareOp::Neq => "neq",
            CompareOp::Gt => "gt",
            CompareOp::Lt => "lt",
            CompareOp::Gte => "gte",
            CompareOp::Lte => "lte",
            CompareOp::Before => "before",
            CompareOp::After => "after",
        }
    }

    pub fn parse(s: &str) -> Option<CompareOp> {
        CompareOp::ALL.into_iter().find(|o| o.keyword() == s)
    }

    pub fn sql(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Neq => "!=",
            CompareOp::Gt | CompareOp::After => ">",
            CompareOp::Lt | CompareOp::Before => "<",
            CompareOp::Gte => ">=",
            CompareOp::Lte => "<=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FilterOp {
    Eq,
    Neq,
    Gt,
    Lt,
    Gte,
    Lte,
    Between,
    Contains,
    In,
}

impl FilterOp {
    pub const ALL: [FilterOp; 9] = [
        FilterOp::Eq,
        FilterOp::Neq,
        FilterOp::Gt,
        FilterOp::Lt,
        FilterOp::Gte,
        FilterOp::Lte,
        FilterOp::Between,
        FilterOp::Contains,
        FilterOp::In,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            FilterOp::Eq => "eq",
            FilterOp::Neq => "neq",
            FilterOp::Gt => "gt",
            FilterOp::Lt => "lt",
            FilterOp::Gte => "gte",
            FilterOp::Lte => "lte",
            FilterOp::Between => "between",
            FilterOp::Contains => "contains",
            FilterOp::In => "in",
        }
    }

    pub fn parse(s: &str) -> Option<FilterOp> {
        FilterOp::ALL.into_iter().find(|o| o.keyword() == s)
    }

    /// Whether `n` literals is a legal operand count.
    pub fn accepts_arity(self, n: usize) -> bool {
        match self {
            FilterOp::Between => n == 2,
            FilterOp::In => n >= 1,
            _ => n == 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Connective {
    And,
    Or,
}

impl Connective {
    pub fn keyword(self) -> &'static str {
        match self {
            Connective::And => "and",
            Connective::Or => "or",
        }
    }
}

/// A predicate applied by a `Filter` step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FilterNode {
    Simple {
        attribute: AttrTerm,
        op: FilterOp,
        values: Vec<ValueTerm>,
        phrase: String,
    },
    Composite {
        connective: Connective,
        children: Vec<FilterNode>,
    },
    /// `subject op (fragment)`: the fragment is a self-contained plan whose
    /// result is a scalar (comparison ops) or a single column (`in`).
    Templated {
        id: String,
        subject: AttrTerm,
        op: FilterOp,
        fragment: Box<SqrPlan>,
        phrase: String,
    },
}

impl FilterNode {
    /// Natural-language phrase; composites join their children's phrases.
    pub fn nl_phrase(&self) -> String {
        match self {
            FilterNode::Simple { phrase, .. } | FilterNode::Templated { phrase, .. } => phrase.clone(),
            FilterNode::Composite { connective, children } => {
                children.iter().map(|c| c.nl_phrase()).collect::<Vec<_>>().join(&format!(" {} ", connective.keyword()))
            }
        }
    }

    /// Number of simple predicates, including those nested in fragments.
    pub fn simple_count(&self) -> usize {
        match self {
            FilterNode::Simple { .. } => 1,
            FilterNode::Composite { children, .. } => children.iter().map(|c| c.simple_count()).sum(),
            FilterNode::Templated { fragment, .. } => fragment
                .steps
                .iter()
                .map(|s| match &s.op {
                    StepOp::Filter { predicate, .. } => predicate.simple_count(),
                    _ => 0,
                })
                .sum(),
        }
    }

    /// Copy with all phrases cleared; used for structural comparison.
    pub fn without_phrases(&self) -> FilterNode {
        match self {
            FilterNode::Simple { attribute, op, values, .. } => FilterNode::Simple {
                attribute: attribute.clone(),
                op: *op,
                values: values.clone(),
                phrase: String::new(),
            },
            FilterNode::Composite { connective, children } => FilterNode::Composite {
                connective: *connective,
                children: children.iter().map(|c| c.without_phrases()).collect(),
            },
            FilterNode::Templated { id, subject, op, fragment, .. } => FilterNode::Templated {
                id: id.clone(),
                subject: subject.clone(),
                op: *op,
                fragment: Box::new(fragment.without_phrases()),
                phrase: String::new(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SortKey {
    /// The value computed by the input step (e.g. an aggregate).
    Value,
    Attr(AttrTerm),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StepOp {
    Retrieve { entity: EntityTerm, attribute: AttrTerm },
    Filter { input: String, predicate: FilterNode },
    Aggregate { input: String, op: AggOp, group_by: Option<AttrTerm> },
    Compare { left: String, right: String, op: CompareOp },
    Sort { input: String, key: SortKey, direction: DirectionTerm },
    Limit { input: String, n: u32 },
    Collect { inputs: Vec<String> },
}

impl StepOp {
    pub fn name(&self) -> &'static str {
        match self {
            StepOp::Retrieve { .. } => "Retrieve",
            StepOp::Filter { .. } => "Filter",
            StepOp::Aggregate { .. } => "Aggregate",
            StepOp::Compare { .. } => "Compare",
            StepOp::Sort { .. } => "Sort",
            StepOp::Limit { .. } => "Limit",
            StepOp::Collect { .. } => "Collect",
        }
    }

    /// Ids of the steps this step consumes, in argument order.
    pub fn inputs(&self) -> Vec<&str> {
        match self {
            StepOp::Retrieve { .. } => Vec::new(),
            StepOp::Filter { input, .. }
            | StepOp::Aggregate { input, .. }
            | StepOp::Sort { input, .. }
            | StepOp::Limit { input, .. } => vec![input.as_str()],
            StepOp::Compare { left, right, .. } => vec![left.as_str(), right.as_str()],
            StepOp::Collect { inputs } => inputs.iter().map(String::as_str).collect(),
        }
    }

    /// Rewrite every input reference through `f`.
    pub fn map_inputs(&mut self, mut f: impl FnMut(&str) -> String) {
        match self {
            StepOp::Retrieve { .. } => {}
            StepOp::Filter { input, .. }
            | StepOp::Aggregate { input, .. }
            | StepOp::Sort { input, .. }
            | StepOp::Limit { input, .. } => *input = f(input),
            StepOp::Compare { left, right, .. } => {
                *left = f(left);
                *right = f(right);
            }
            StepOp::Collect { inputs } => {
                for i in inputs.iter_mut() {
                    *i = f(i);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub id: String,
    pub op: StepOp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqrPlan {
    pub steps: Vec<Step>,
    pub result_step: String,
}

impl SqrPlan {
    pub fn step(&self, id: &str) -> Option<&Step> {
        self.steps.iter().find(|s| s.id == id)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.steps.iter().position(|s| s.id == id)
    }

    pub fn result(&self) -> Option<&Step> {
        self.step(&self.result_step)
    }

    /// Copy with filter phrases cleared (structure only).
    pub fn without_phrases(&self) -> SqrPlan {
        let mut p = self.clone();
        for s in &mut p.steps {
            if let StepOp::Filter { predicate, .. } = &mut s.op {
                *predicate = predicate.without_phrases();
            }
        }
        p
    }

    /// Every slot placeholder mentioned anywhere in the plan, in order of
    /// first appearance.
    pub fn slots(&self) -> Vec<Slot> {
        let mut out = Vec::new();
        for s in &self.steps {
            collect_step_slots(&s.op, &mut out);
        }
        out
    }

    pub fn has_slots(&self) -> bool {
        !self.slots().is_empty()
    }
}

fn push_slot(out: &mut Vec<Slot>, s: Slot) {
    if !out.contains(&s) {
        out.push(s);
    }
}

fn collect_entity_slots(e: &EntityTerm, out: &mut Vec<Slot>) {
    if let EntityTerm::Slot(s) = e {
        push_slot(out, *s);
    }
}

fn collect_attr_slots(a: &AttrTerm, out: &mut Vec<Slot>) {
    match a {
        AttrTerm::Slot(s) => push_slot(out, *s),
        AttrTerm::Link(e) => collect_entity_slots(e, out),
        AttrTerm::Ref(_) => {}
    }
}

pub(crate) fn collect_filter_slots(f: &FilterNode, out: &mut Vec<Slot>) {
    match f {
        FilterNode::Simple { attribute, values, .. } => {
            collect_attr_slots(attribute, out);
            for v in values {
                if let ValueTerm::Slot(s) = v {
                    push_slot(out, *s);
                }
            }
        }
        FilterNode::Composite { children, .. } => {
            for c in children {
                collect_filter_slots(c, out);
            }
        }
        FilterNode::Templated { subject, fragment, .. } => {
            collect_attr_slots(subject, out);
            for s in fragment.slots() {
                push_slot(out, s);
            }
        }
    }
}

fn collect_step_slots(op: &StepOp, out: &mut Vec<Slot>) {
    match op {
        StepOp::Retrieve { entity, attribute } => {
            collect_entity_slots(entity, out);
            collect_attr_slots(attribute, out);
        }
        StepOp::Filter { predicate, .. } => collect_filter_slots(predicate, out),
        StepOp::Aggregate { group_by, .. } => {
            if let Some(g) = group_by {
                collect_attr_slots(g, out);
            }
        }
        StepOp::Sort { key, direction, .. } => {
            if let SortKey::Attr(a) = key {
                collect_attr_slots(a, out);
            }
            if let DirectionTerm::Slot(s) = direction {
                push_slot(out, *s);
            }
        }
        StepOp::Compare { .. } | StepOp::Limit { .. } | StepOp::Collect { .. } => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_forms() {
        let s = Slot::parse("Identifier[0].Value[1]").unwrap();
        assert_eq!(s, Slot::value(SlotType::Semantic(SemanticType::Identifier), 0, 1));
        assert_eq!(s.to_string(), "{Identifier[0].Value[1]}");
        assert_eq!(Slot::parse("Identifier[0].Value").unwrap().value_index, Some(0));
        assert_eq!(Slot::parse("Datetime[0]").unwrap().to_string(), "{Datetime[0]}");
        assert_eq!(Slot::parse("Entity[2].Expression").unwrap().to_string(), "{Entity[2].Expression}");
        assert!(Slot::parse("Entity[0].Value[0]").is_none());
        assert!(Slot::parse("Colour[0]").is_none());
        assert!(Slot::parse("Datetime").is_none());
    }
}
