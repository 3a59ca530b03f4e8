//! Plan compilation: merge structurally identical steps.

use std::collections::HashMap;

use thiserror::Error;

use super::*;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
}

fn compile_fragments(op: &mut StepOp) {
    if let StepOp::Filter { predicate, .. } = op {
        compile_predicate(predicate);
    }
}

fn compile_predicate(f: &mut FilterNode) {
    match f {
        FilterNode::Simple { .. } => {}
        FilterNode::Composite { children, .. } => children.iter_mut().for_each(compile_predicate),
        FilterNode::Templated { fragment, .. } => **fragment = dedup(fragment),
    }
}

/// Structural identity of a step: variant, parameters and (already
/// rewritten) inputs. Natural-language phrases do not take part.
fn structural_key(op: &StepOp) -> String {
    match op {
        StepOp::Filter { input, predicate } => {
            format!("{:?}", StepOp::Filter { input: input.clone(), predicate: predicate.without_phrases() })
        }
        other => format!("{other:?}"),
    }
}

fn dedup_once(plan: &SqrPlan) -> SqrPlan {
    let mut rename: HashMap<String, String> = HashMap::new();
    let mut seen: HashMap<String, String> = HashMap::new();
    let mut steps = Vec::new();
    for step in &plan.steps {
        let mut op = step.op.clone();
        op.map_inputs(|i| rename.get(i).cloned().unwrap_or_else(|| i.to_string()));
        compile_fragments(&mut op);
        let key = structural_key(&op);
        match seen.get(&key) {
            Some(first) => {
                rename.insert(step.id.clone(), first.clone());
            }
            None => {
                seen.insert(key, step.id.clone());
                steps.push(Step { id: step.id.clone(), op });
            }
        }
    }
    let result_step = rename.get(&plan.result_step).cloned().unwrap_or_else(|| plan.result_step.clone());
    SqrPlan { steps, result_step }
}

fn dedup(plan: &SqrPlan) -> SqrPlan {
    let mut current = dedup_once(plan);
    loop {
        let next = dedup_once(&current);
        if next == current {
            return current;
        }
        current = next;
    }
}

/// Remove structurally duplicate steps, rewiring references to the first
/// copy. The plan must be well formed and free of placeholders.
pub fn compile_plan(plan: &SqrPlan) -> Result<SqrPlan, CompileError> {
    let (diags, _) = check_plan(plan, None);
    if let Some(d) = diags.first() {
        return Err(CompileError::InvalidPlan(d.to_string()));
    }
    if let Some(s) = plan.slots().first() {
        return Err(CompileError::InvalidPlan(format!("unfilled placeholder {s}")));
    }
    Ok(dedup(plan))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_duplicate_retrievals() {
        let plan = parse_plan(
            "s1: Retrieve(song, releasedate)\n\
             s2: Filter(s1, song.song_name eq 'a')\n\
             s3: Retrieve(song, releasedate)\n\
             s4: Filter(s3, song.song_name eq 'b')\n\
             s5: Compare(s2, s4, before)",
        )
        .unwrap();
        let c = compile_plan(&plan).unwrap();
        assert_eq!(c.steps.len(), 4);
        assert_eq!(c.steps[2].op.inputs(), vec!["s1"]);
        assert_eq!(compile_plan(&c).unwrap(), c);
    }

    #[test]
    fn cascades_through_rewired_inputs() {
        let plan = parse_plan(
            "a: Retrieve(x, y)\nb: Filter(a, x.z eq 1)\nc: Retrieve(x, y)\nd: Filter(c, x.z eq 1)\ne: Collect(b, d)",
        )
        .unwrap();
        let c = compile_plan(&plan).unwrap();
        assert_eq!(render_plan(&c), "a: Retrieve(x, y)\nb: Filter(a, x.z eq 1)\ne: Collect(b, b)\n");
    }

    #[test]
    fn rejects_placeholders() {
        let plan = parse_plan("a: Retrieve({Entity[0]}, {Arithmetic[0]})").unwrap();
        assert!(compile_plan(&plan).is_err());
    }
}
