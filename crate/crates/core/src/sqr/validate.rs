//! Plan validation: references, names, shapes and operand types.

use std::collections::HashMap;
use std::fmt;

use super::*;
use crate::ring::Ring;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    Reference,
    Ordering,
    Name,
    Type,
    Shape,
    Placeholder,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub step: Option<String>,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.step {
            Some(s) => write!(f, "step {s}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Output shape of a step. Column types are `None` when unknown (e.g. an
/// unresolved reference).
#[derive(Debug, Clone, PartialEq)]
pub enum StepShape {
    /// Row-level output. `plain` chains contain only retrievals, filters
    /// and collections; `sorted` marks a Sort (optionally followed by Limit)
    /// as the last ordering operation.
    Rows { columns: Vec<Option<SemanticType>>, plain: bool, sorted: bool },
    /// One row per group: the group key and one value per metric.
    Grouped { key: AttrTerm, values: Vec<Option<SemanticType>>, sorted: bool },
    /// A single row.
    Scalar { columns: Vec<Option<SemanticType>> },
}

impl StepShape {
    pub fn width(&self) -> usize {
        match self {
            StepShape::Rows { columns, .. } | StepShape::Scalar { columns } => columns.len(),
            StepShape::Grouped { values, .. } => values.len() + 1,
        }
    }

    fn single(&self) -> Option<Option<SemanticType>> {
        match self {
            StepShape::Rows { columns, .. } | StepShape::Scalar { columns } if columns.len() == 1 => Some(columns[0]),
            _ => None,
        }
    }
}

/// Legal simple-filter operations for an attribute type.
pub fn filter_ops_for(ty: SemanticType) -> &'static [FilterOp] {
    use FilterOp::*;
    match ty {
        SemanticType::Arithmetic | SemanticType::Datetime => &[Eq, Neq, Gt, Lt, Gte, Lte, Between],
        SemanticType::Categorical | SemanticType::Identifier => &[Eq, Neq, Contains],
        SemanticType::Boolean => &[Eq],
    }
}

/// Operations accepted by validation: the generator sets plus `in`, which
/// hand-written templates may use on non-boolean attributes.
fn filter_op_legal(ty: SemanticType, op: FilterOp) -> bool {
    filter_ops_for(ty).contains(&op) || (op == FilterOp::In && ty != SemanticType::Boolean)
}

fn orderable(ty: SemanticType) -> bool {
    matches!(ty, SemanticType::Arithmetic | SemanticType::Datetime)
}

struct Checker<'a> {
    ring: Option<&'a Ring>,
    diags: Vec<Diagnostic>,
    step: Option<String>,
}

impl Checker<'_> {
    fn push(&mut self, kind: DiagnosticKind, message: impl Into<String>) {
        self.diags.push(Diagnostic { step: self.step.clone(), kind, message: message.into() });
    }

    fn entity(&mut self, e: &EntityTerm) {
        if let (EntityTerm::Named(n), Some(ring)) = (e, self.ring) {
            if ring.entity(n).is_none() {
                self.push(DiagnosticKind::Name, format!("unknown entity '{n}'"));
            }
        }
        if let EntityTerm::Slot(s) = e {
            if s.ty != SlotType::Entity {
                self.push(DiagnosticKind::Type, format!("{s} is not an entity slot"));
            }
        }
    }

    fn attr_type(&mut self, a: &AttrTerm) -> Option<SemanticType> {
        match a {
            AttrTerm::Ref(r) => {
                let ring = self.ring?;
                match ring.attribute(&r.entity, &r.attribute) {
                    Some(attr) => Some(attr.semantic_type),
                    None => {
                        self.push(DiagnosticKind::Name, format!("unknown attribute '{r}'"));
                        None
                    }
                }
            }
            AttrTerm::Slot(s) => match s.ty {
                SlotType::Semantic(t) if s.suffix == SlotSuffix::None => Some(t),
                _ => {
                    self.push(DiagnosticKind::Type, format!("{s} cannot stand for an attribute"));
                    None
                }
            },
            AttrTerm::Link(e) => {
                self.entity(e);
                Some(SemanticType::Identifier)
            }
        }
    }

    fn value(&mut self, v: &ValueTerm, ty: Option<SemanticType>) {
        match v {
            ValueTerm::Literal(Literal::Null) => self.push(DiagnosticKind::Type, "null literal in filter"),
            ValueTerm::Literal(_) => {}
            ValueTerm::Slot(s) => {
                if !s.is_value() {
                    self.push(DiagnosticKind::Type, format!("{s} is not a value slot"));
                } else if let (SlotType::Semantic(st), Some(t)) = (s.ty, ty) {
                    if st != t {
                        self.push(DiagnosticKind::Type, format!("{s} does not match a {t} attribute"));
                    }
                }
            }
        }
    }

    fn predicate(&mut self, f: &FilterNode) {
        match f {
            FilterNode::Simple { attribute, op, values, .. } => {
                let ty = self.attr_type(attribute);
                if !op.accepts_arity(values.len()) {
                    self.push(DiagnosticKind::Shape, format!("'{}' given {} values", op.keyword(), values.len()));
                }
                if let Some(t) = ty {
                    if !filter_op_legal(t, *op) {
                        self.push(DiagnosticKind::Type, format!("'{}' not allowed on a {t} attribute", op.keyword()));
                    }
                }
                for v in values {
                    self.value(v, ty);
                }
            }
            FilterNode::Composite { children, .. } => {
                if children.len() < 2 {
                    self.push(DiagnosticKind::Shape, "composite filter needs at least two children");
                }
                for c in children {
                    self.predicate(c);
                }
            }
            FilterNode::Templated { id, subject, op, fragment, .. } => {
                let ty = self.attr_type(subject);
                let saved = self.step.take();
                let mut inner = Checker { ring: self.ring, diags: Vec::new(), step: None };
                let shapes = inner.plan(fragment);
                for mut d in inner.diags {
                    d.message = format!("in filter {id}: {}", d.message);
                    d.step = saved.clone();
                    self.diags.push(d);
                }
                self.step = saved;
                let Some(shape) = shapes.get(&fragment.result_step) else { return };
                match op {
                    FilterOp::In => {
                        let ok = match shape {
                            StepShape::Rows { columns, .. } => columns.len() == 1,
                            StepShape::Grouped { .. } => true,
                            StepShape::Scalar { columns } => columns.len() == 1,
                        };
                        if !ok {
                            self.push(DiagnosticKind::Shape, format!("filter {id} fragment must yield one column"));
                        }
                    }
                    FilterOp::Gt | FilterOp::Lt | FilterOp::Gte | FilterOp::Lte => match shape {
                        StepShape::Scalar { columns } if columns.len() == 1 => {
                            if let (Some(a), Some(b)) = (ty, columns[0]) {
                                if !orderable(a) || a != b {
                                    self.push(DiagnosticKind::Type, format!("filter {id} compares {a} with {b}"));
                                }
                            }
                        }
                        _ => self.push(DiagnosticKind::Shape, format!("filter {id} fragment must yield a scalar")),
                    },
                    other => self.push(DiagnosticKind::Type, format!("filter {id} cannot use '{}'", other.keyword())),
                }
            }
        }
    }

    fn plan(&mut self, plan: &SqrPlan) -> HashMap<String, StepShape> {
        let mut shapes: HashMap<String, StepShape> = HashMap::new();
        let mut seen: Vec<&str> = Vec::new();
        for step in &plan.steps {
            self.step = Some(step.id.clone());
            if seen.contains(&step.id.as_str()) {
                self.push(DiagnosticKind::Reference, format!("duplicate step id '{}'", step.id));
                continue;
            }
            let mut ok = true;
            for input in step.op.inputs() {
                if !seen.contains(&input) {
                    ok = false;
                    if plan.position(input).is_some() {
                        self.push(DiagnosticKind::Ordering, format!("'{input}' is referenced before it is defined"));
                    } else {
                        self.push(DiagnosticKind::Reference, format!("unknown step '{input}'"));
                    }
                }
            }
            seen.push(&step.id);
            if !ok {
                continue;
            }
            if let Some(shape) = self.step_shape(&step.op, &shapes) {
                shapes.insert(step.id.clone(), shape);
            }
        }
        self.step = None;
        if plan.step(&plan.result_step).is_none() {
            self.push(DiagnosticKind::Reference, format!("result step '{}' does not exist", plan.result_step));
        }
        shapes
    }

    fn step_shape(&mut self, op: &StepOp, shapes: &HashMap<String, StepShape>) -> Option<StepShape> {
        let get = |id: &str| shapes.get(id).cloned();
        match op {
            StepOp::Retrieve { entity, attribute } => {
                self.entity(entity);
                if let (EntityTerm::Named(e), AttrTerm::Ref(r)) = (entity, attribute) {
                    if &r.entity != e {
                        self.push(DiagnosticKind::Name, format!("attribute '{r}' does not belong to '{e}'"));
                    }
                }
                let ty = self.attr_type(attribute);
                Some(StepShape::Rows { columns: vec![ty], plain: true, sorted: false })
            }
            StepOp::Filter { input, predicate } => {
                self.predicate(predicate);
                match get(input)? {
                    StepShape::Rows { columns, plain, .. } => Some(StepShape::Rows { columns, plain, sorted: false }),
                    _ => {
                        self.push(DiagnosticKind::Shape, "filters apply to row-level inputs only");
                        None
                    }
                }
            }
            StepOp::Aggregate { input, op, group_by } => {
                let shape = get(input)?;
                let col = match &shape {
                    StepShape::Rows { columns, .. } if columns.len() == 1 => columns[0],
                    StepShape::Rows { .. } if *op == AggOp::Count => None,
                    _ => {
                        self.push(DiagnosticKind::Shape, "aggregate input must be a single row-level column");
                        return None;
                    }
                };
                let out = match op {
                    AggOp::Count => Some(SemanticType::Arithmetic),
                    AggOp::Sum | AggOp::Avg => {
                        if col.is_some_and(|t| t != SemanticType::Arithmetic) {
                            self.push(
                                DiagnosticKind::Type,
                                format!("{} requires an Arithmetic input, got {}", op.keyword(), col.unwrap()),
                            );
                        }
                        Some(SemanticType::Arithmetic)
                    }
                    AggOp::Min | AggOp::Max => {
                        if col == Some(SemanticType::Boolean) {
                            self.push(DiagnosticKind::Type, format!("{} over a Boolean attribute", op.keyword()));
                        }
                        col
                    }
                };
                match group_by {
                    Some(g) => {
                        self.attr_type(g);
                        Some(StepShape::Grouped { key: g.clone(), values: vec![out], sorted: false })
                    }
                    None => Some(StepShape::Scalar { columns: vec![out] }),
                }
            }
            StepOp::Compare { left, right, op } => {
                let (l, r) = (get(left)?, get(right)?);
                let (Some(lt), Some(rt)) = (l.single(), r.single()) else {
                    self.push(DiagnosticKind::Shape, "compare operands must be single-column");
                    return None;
                };
                if let (Some(a), Some(b)) = (lt, rt) {
                    let legal = match op {
                        CompareOp::Before | CompareOp::After => {
                            a == SemanticType::Datetime && b == SemanticType::Datetime
                        }
                        CompareOp::Gt | CompareOp::Lt | CompareOp::Gte | CompareOp::Lte => a == b && orderable(a),
                        CompareOp::Eq | CompareOp::Neq => a == b,
                    };
                    if !legal {
                        self.push(DiagnosticKind::Type, format!("'{}' cannot compare {a} with {b}", op.keyword()));
                    }
                }
                Some(StepShape::Scalar { columns: vec![Some(SemanticType::Boolean)] })
            }
            StepOp::Sort { input, key, direction } => {
                if let DirectionTerm::Slot(s) = direction {
                    if s.ty != SlotType::Direction {
                        self.push(DiagnosticKind::Type, format!("{s} is not a direction slot"));
                    }
                }
                let shape = get(input)?;
                match (&shape, key) {
                    (StepShape::Rows { sorted: true, .. }, _) | (StepShape::Grouped { sorted: true, .. }, _) => {
                        self.push(DiagnosticKind::Shape, "input is already sorted");
                        None
                    }
                    (StepShape::Rows { columns, .. }, SortKey::Value) if columns.len() != 1 => {
                        self.push(DiagnosticKind::Shape, "sorting by value needs a single column");
                        None
                    }
                    (StepShape::Rows { columns, .. }, k) => {
                        if let SortKey::Attr(a) = k {
                            self.attr_type(a);
                        }
                        Some(StepShape::Rows { columns: columns.clone(), plain: false, sorted: true })
                    }
                    (StepShape::Grouped { key: gk, values, .. }, k) => {
                        if let SortKey::Attr(a) = k {
                            if a != gk {
                                self.push(DiagnosticKind::Shape, "grouped results sort by value or group key only");
                            }
                        }
                        if values.len() != 1 && *k == SortKey::Value {
                            self.push(DiagnosticKind::Shape, "sorting by value needs a single metric");
                        }
                        Some(StepShape::Grouped { key: gk.clone(), values: values.clone(), sorted: true })
                    }
                    (StepShape::Scalar { .. }, _) => {
                        self.push(DiagnosticKind::Shape, "cannot sort a scalar");
                        None
                    }
                }
            }
            StepOp::Limit { input, n } => {
                if *n < 1 {
                    self.push(DiagnosticKind::Shape, "limit must be at least 1");
                }
                match get(input) {
                    shape @ Some(StepShape::Rows { sorted: true, .. })
                    | shape @ Some(StepShape::Grouped { sorted: true, .. }) => shape,
                    Some(_) => {
                        self.push(DiagnosticKind::Shape, "limit must follow a sort");
                        None
                    }
                    None => None,
                }
            }
            StepOp::Collect { inputs } => {
                if inputs.len() < 2 {
                    self.push(DiagnosticKind::Shape, "collect needs at least two inputs");
                }
                let parts: Vec<StepShape> = inputs.iter().map(|i| get(i)).collect::<Option<_>>()?;
                if parts.iter().all(|p| matches!(p, StepShape::Rows { plain: true, .. })) {
                    let columns = parts
                        .iter()
                        .flat_map(|p| match p {
                            StepShape::Rows { columns, .. } => columns.clone(),
                            _ => Vec::new(),
                        })
                        .collect();
                    Some(StepShape::Rows { columns, plain: true, sorted: false })
                } else if parts.iter().all(|p| matches!(p, StepShape::Scalar { .. })) {
                    let columns = parts
                        .iter()
                        .flat_map(|p| match p {
                            StepShape::Scalar { columns } => columns.clone(),
                            _ => Vec::new(),
                        })
                        .collect();
                    Some(StepShape::Scalar { columns })
                } else if let Some(StepShape::Grouped { key, .. }) = parts.first() {
                    let mut values = Vec::new();
                    for p in &parts {
                        match p {
                            StepShape::Grouped { key: k, values: v, sorted: false } if k == key => {
                                values.extend(v.iter().copied())
                            }
                            _ => {
                                self.push(DiagnosticKind::Shape, "grouped inputs of collect must share one group key");
                                return None;
                            }
                        }
                    }
                    Some(StepShape::Grouped { key: key.clone(), values, sorted: false })
                } else {
                    self.push(
                        DiagnosticKind::Shape,
                        "collect inputs must all be unsorted row-level, all scalar, or all grouped",
                    );
                    None
                }
            }
        }
    }
}

/// Structural check used for templates: slot placeholders are accepted and
/// typed by their declared constraint; named terms are resolved against
/// `ring` when given.
pub(crate) fn check_plan(plan: &SqrPlan, ring: Option<&Ring>) -> (Vec<Diagnostic>, HashMap<String, StepShape>) {
    let mut c = Checker { ring, diags: Vec::new(), step: None };
    let shapes = c.plan(plan);
    (c.diags, shapes)
}

/// Validate a filled plan against a Ring. The list is empty iff every
/// reference resolves, every name exists and every operation is well typed.
pub fn validate_plan(plan: &SqrPlan, ring: &Ring) -> Vec<Diagnostic> {
    let (mut diags, _) = check_plan(plan, Some(ring));
    for s in plan.slots() {
        diags.push(Diagnostic {
            step: None,
            kind: DiagnosticKind::Placeholder,
            message: format!("unfilled placeholder {s}"),
        });
    }
    diags
}

/// Shape of the result step, if the plan is well formed.
pub fn result_shape(plan: &SqrPlan, ring: Option<&Ring>) -> Option<StepShape> {
    let (diags, mut shapes) = check_plan(plan, ring);
    if diags.is_empty() {
        shapes.remove(&plan.result_step)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{Attribute, Entity};

    fn song_ring() -> Ring {
        let attr = |n: &str, t| Attribute {
            name: n.into(),
            nl_name: n.into(),
            column: n.into(),
            semantic_type: t,
            nullable: true,
        };
        Ring {
            db_id: "music".into(),
            entities: vec![Entity {
                name: "song".into(),
                nl_name: "song".into(),
                table: "song".into(),
                id_attribute: "song_name".into(),
                attributes: vec![
                    attr("song_name", SemanticType::Identifier),
                    attr("releasedate", SemanticType::Datetime),
                    attr("genre", SemanticType::Categorical),
                    attr("rating", SemanticType::Arithmetic),
                ],
            }],
            relationships: vec![],
        }
    }

    #[test]
    fn before_on_datetimes_is_clean() {
        let plan = parse_plan(
            "s1: Retrieve(song, releasedate)\n\
             s2: Filter(s1, song.song_name eq 'a')\n\
             s3: Filter(s1, song.song_name eq 'b')\n\
             s4: Compare(s2, s3, before)",
        )
        .unwrap();
        assert!(validate_plan(&plan, &song_ring()).is_empty());
    }

    #[test]
    fn sum_of_categorical_is_a_type_error() {
        let plan = parse_plan("s1: Retrieve(song, genre)\ns2: Aggregate(s1, sum)").unwrap();
        let d = validate_plan(&plan, &song_ring());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::Type);
    }

    #[test]
    fn forward_reference_is_an_ordering_error() {
        let plan = parse_plan(
            "s1: Retrieve(song, releasedate)\n\
             s2: Compare(s1, s3, before)\n\
             s3: Retrieve(song, releasedate)",
        )
        .unwrap();
        let d = validate_plan(&plan, &song_ring());
        assert!(d.iter().any(|d| d.kind == DiagnosticKind::Ordering));
    }

    #[test]
    fn limit_requires_sort_and_unknown_names_reported() {
        let plan = parse_plan("s1: Retrieve(song, rating)\ns2: Limit(s1, 3)").unwrap();
        assert!(validate_plan(&plan, &song_ring()).iter().any(|d| d.kind == DiagnosticKind::Shape));
        let plan = parse_plan("s1: Retrieve(song, tempo)").unwrap();
        assert_eq!(validate_plan(&plan, &song_ring())[0].kind, DiagnosticKind::Name);
        let plan = parse_plan("s1: Retrieve(song, rating)\ns2: Sort(s1, value, desc)\ns3: Limit(s2, 0)").unwrap();
        assert!(!validate_plan(&plan, &song_ring()).is_empty());
    }

    #[test]
    fn slots_are_reported_in_filled_validation() {
        let plan = parse_plan("s1: Retrieve({Entity[0]}, {Arithmetic[0]})").unwrap();
        let (diags, _) = check_plan(&plan, None);
        assert!(diags.is_empty());
        assert_eq!(validate_plan(&plan, &song_ring()).len(), 2);
    }
}
