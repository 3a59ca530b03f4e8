//! Line-oriented text form of plans.
//!
//! ```text
//! s1: Retrieve(song, releasedate)
//! s2: Filter(s1, song.song_name eq 'Just beat it' as 'with song name Just beat it')
//! s3: Aggregate(s2, max, by song.artist_name)
//! s4: Compare(s2, s3, before)
//! ```
//!
//! Steps are separated by newlines or `;`. The last step is the result
//! unless a `result: <id>` line says otherwise. Templated filters embed
//! their fragment in braces: `@above_average(e.a gt { f1: ...; f2: ... })`.

use std::fmt::Write as _;

use thiserror::Error;

use super::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct PlanParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Str(String),
    Num(String),
    Slot(Slot),
    Punct(char),
    Newline,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const RESERVED: &[&str] = &["and", "or", "as", "by", "null", "value", "asc", "desc", "result"];

fn is_bare(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&s)
}

/// Render a name bare when possible, double-quoted otherwise.
pub(crate) fn ident(s: &str) -> String {
    if is_bare(s) {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('"', "\"\""))
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, PlanParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| PlanParseError { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let start = i;
        let tok = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                out.push(Token { tok: Tok::Newline, line: tl, column: tc });
                continue;
            }
            '#' if out.last().is_none_or(|t: &Token| t.tok == Tok::Newline) => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '\'' | '"' => {
                let quote = c;
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(err(tl, tc, "unterminated quoted text".into())),
                        Some(&ch) if ch == quote => {
                            if chars.get(i + 1) == Some(&quote) {
                                s.push(quote);
                                i += 2;
                            } else {
                                i += 1;
                                break;
                            }
                        }
                        Some(&ch) => {
                            if ch == '\n' {
                                line += 1;
                            }
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                if quote == '\'' {
                    Tok::Str(s)
                } else {
                    Tok::Quoted(s)
                }
            }
            '{' => {
                let close = chars[i..].iter().position(|&ch| ch == '}' || ch == '\n').map(|p| p + i);
                let slot = close
                    .filter(|&p| chars[p] == '}')
                    .and_then(|p| Slot::parse(&chars[i + 1..p].iter().collect::<String>()).map(|s| (s, p)));
                match slot {
                    Some((s, p)) => {
                        i = p + 1;
                        Tok::Slot(s)
                    }
                    None => {
                        i += 1;
                        Tok::Punct('{')
                    }
                }
            }
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                i += 1;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || chars[i] == 'e'
                        || chars[i] == 'E'
                        || ((chars[i] == '-' || chars[i] == '+') && matches!(chars[i - 1], 'e' | 'E')))
                {
                    i += 1;
                }
                Tok::Num(chars[start..i].iter().collect())
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                Tok::Ident(chars[start..i].iter().collect())
            }
            '(' | ')' | ',' | ':' | ';' | '.' | '@' | '}' => {
                i += 1;
                Tok::Punct(c)
            }
            other => return Err(err(tl, tc, format!("unexpected character '{other}'"))),
        };
        col += i - start;
        out.push(Token { tok, line: tl, column: tc });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn error(&self, message: impl Into<String>) -> PlanParseError {
        let (line, column) = match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.column),
            None => (1, 1),
        };
        PlanParseError { line, column, message: message.into() }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), PlanParseError> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn skip_newlines(&mut self) {
        while self.peek() == Some(&Tok::Newline) {
            self.pos += 1;
        }
    }

    fn name(&mut self) -> Result<String, PlanParseError> {
        match self.next() {
            Some(Tok::Ident(s)) | Some(Tok::Quoted(s)) => Ok(s),
            _ => {
                self.pos -= 1;
                Err(self.error("expected a name"))
            }
        }
    }

    fn keyword(&mut self) -> Result<String, PlanParseError> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            _ => {
                self.pos -= 1;
                Err(self.error("expected a keyword"))
            }
        }
    }

    fn plan(&mut self, in_fragment: bool) -> Result<SqrPlan, PlanParseError> {
        let mut steps = Vec::new();
        let mut result = None;
        loop {
            while matches!(self.peek(), Some(Tok::Newline) | Some(Tok::Punct(';'))) {
                self.pos += 1;
            }
            match self.peek() {
                None => break,
                Some(Tok::Punct('}')) if in_fragment => break,
                _ => {}
            }
            if matches!(self.peek(), Some(Tok::Ident(s)) if s == "result") && self.peek_at(1) == Some(&Tok::Punct(':'))
            {
                self.pos += 2;
                result = Some(self.name()?);
                continue;
            }
            let id = self.name()?;
            self.expect_punct(':')?;
            let op = self.step_op()?;
            if steps.iter().any(|s: &Step| s.id == id) {
                return Err(self.error(format!("duplicate step id '{id}'")));
            }
            steps.push(Step { id, op });
            match self.peek() {
                None | Some(Tok::Newline) | Some(Tok::Punct(';')) => {}
                Some(Tok::Punct('}')) if in_fragment => {}
                _ => return Err(self.error("expected end of step")),
            }
        }
        let result_step = match result {
            Some(r) => r,
            None => match steps.last() {
                Some(s) => s.id.clone(),
                None => return Err(self.error("plan has no steps")),
            },
        };
        Ok(SqrPlan { steps, result_step })
    }

    fn step_op(&mut self) -> Result<StepOp, PlanParseError> {
        let name = self.keyword()?;
        self.expect_punct('(')?;
        let op = match name.as_str() {
            "Retrieve" => {
                let entity = self.entity_term()?;
                self.expect_punct(',')?;
                let attribute = self.retrieve_attr(&entity)?;
                StepOp::Retrieve { entity, attribute }
            }
            "Filter" => {
                let input = self.name()?;
                self.expect_punct(',')?;
                let predicate = self.predicate()?;
                StepOp::Filter { input, predicate }
            }
            "Aggregate" => {
                let input = self.name()?;
                self.expect_punct(',')?;
                let kw = self.keyword()?;
                let op = AggOp::parse(&kw).ok_or_else(|| self.error(format!("unknown aggregate '{kw}'")))?;
                let group_by = if self.eat_punct(',') {
                    if !self.eat_keyword("by") {
                        return Err(self.error("expected 'by'"));
                    }
                    Some(self.attr_term()?)
                } else {
                    None
                };
                StepOp::Aggregate { input, op, group_by }
            }
            "Compare" => {
                let left = self.name()?;
                self.expect_punct(',')?;
                let right = self.name()?;
                self.expect_punct(',')?;
                let kw = self.keyword()?;
                let op = CompareOp::parse(&kw).ok_or_else(|| self.error(format!("unknown comparison '{kw}'")))?;
                StepOp::Compare { left, right, op }
            }
            "Sort" => {
                let input = self.name()?;
                self.expect_punct(',')?;
                let key = if self.eat_keyword("value") { SortKey::Value } else { SortKey::Attr(self.attr_term()?) };
                self.expect_punct(',')?;
                let direction = match self.next() {
                    Some(Tok::Slot(s)) => DirectionTerm::Slot(s),
                    Some(Tok::Ident(s)) if s == "asc" => DirectionTerm::Fixed(Direction::Asc),
                    Some(Tok::Ident(s)) if s == "desc" => DirectionTerm::Fixed(Direction::Desc),
                    _ => {
                        self.pos -= 1;
                        return Err(self.error("expected a sort direction"));
                    }
                };
                StepOp::Sort { input, key, direction }
            }
            "Limit" => {
                let input = self.name()?;
                self.expect_punct(',')?;
                let n = match self.next() {
                    Some(Tok::Num(s)) => s.parse::<u32>().map_err(|_| {
                        self.pos -= 1;
                        self.error("limit must be a non-negative integer")
                    })?,
                    _ => {
                        self.pos -= 1;
                        return Err(self.error("expected a limit count"));
                    }
                };
                StepOp::Limit { input, n }
            }
            "Collect" => {
                let mut inputs = vec![self.name()?];
                while self.eat_punct(',') {
                    inputs.push(self.name()?);
                }
                StepOp::Collect { inputs }
            }
            other => return Err(self.error(format!("unknown step operation '{other}'"))),
        };
        self.expect_punct(')')?;
        Ok(op)
    }

    fn entity_term(&mut self) -> Result<EntityTerm, PlanParseError> {
        if let Some(Tok::Slot(s)) = self.peek() {
            let s = *s;
            if s.ty != SlotType::Entity {
                return Err(self.error("expected an entity"));
            }
            self.pos += 1;
            return Ok(EntityTerm::Slot(s));
        }
        Ok(EntityTerm::Named(self.name()?))
    }

    fn retrieve_attr(&mut self, entity: &EntityTerm) -> Result<AttrTerm, PlanParseError> {
        match self.peek() {
            Some(Tok::Slot(s)) => {
                let s = *s;
                self.pos += 1;
                Ok(AttrTerm::Slot(s))
            }
            Some(Tok::Punct('@')) => {
                self.pos += 1;
                if !self.eat_keyword("link") {
                    return Err(self.error("expected 'link'"));
                }
                Ok(AttrTerm::Link(entity.clone()))
            }
            _ => {
                let first = self.name()?;
                if self.eat_punct('.') {
                    Ok(AttrTerm::Ref(AttrRef::new(first, self.name()?)))
                } else {
                    match entity {
                        EntityTerm::Named(e) => Ok(AttrTerm::Ref(AttrRef::new(e.clone(), first))),
                        EntityTerm::Slot(_) => Err(self.error("attribute of a slot entity must be a slot")),
                    }
                }
            }
        }
    }

    fn attr_term(&mut self) -> Result<AttrTerm, PlanParseError> {
        if let Some(Tok::Slot(s)) = self.peek() {
            let s = *s;
            self.pos += 1;
            if s.ty == SlotType::Entity {
                self.expect_punct('.')?;
                self.expect_punct('@')?;
                if !self.eat_keyword("link") {
                    return Err(self.error("expected 'link'"));
                }
                return Ok(AttrTerm::Link(EntityTerm::Slot(s)));
            }
            return Ok(AttrTerm::Slot(s));
        }
        let entity = self.name()?;
        self.expect_punct('.')?;
        if self.eat_punct('@') {
            if !self.eat_keyword("link") {
                return Err(self.error("expected 'link'"));
            }
            return Ok(AttrTerm::Link(EntityTerm::Named(entity)));
        }
        Ok(AttrTerm::Ref(AttrRef::new(entity, self.name()?)))
    }

    fn value(&mut self) -> Result<ValueTerm, PlanParseError> {
        match self.next() {
            Some(Tok::Slot(s)) => Ok(ValueTerm::Slot(s)),
            Some(Tok::Str(s)) => Ok(ValueTerm::Literal(Literal::Text(s))),
            Some(Tok::Ident(s)) if s == "null" => Ok(ValueTerm::Literal(Literal::Null)),
            Some(Tok::Num(s)) => {
                let lit = if s.contains(['.', 'e', 'E']) {
                    s.parse::<f64>().ok().map(Literal::Real)
                } else {
                    s.parse::<i64>().ok().map(Literal::Integer)
                };
                lit.map(ValueTerm::Literal).ok_or_else(|| {
                    self.pos -= 1;
                    self.error(format!("invalid number '{s}'"))
                })
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expected a value"))
            }
        }
    }

    fn phrase(&mut self) -> Result<String, PlanParseError> {
        if self.eat_keyword("as") {
            match self.next() {
                Some(Tok::Str(s)) => Ok(s),
                _ => {
                    self.pos -= 1;
                    Err(self.error("expected a quoted phrase"))
                }
            }
        } else {
            Ok(String::new())
        }
    }

    fn predicate(&mut self) -> Result<FilterNode, PlanParseError> {
        self.connective_chain(Connective::Or)
    }

    fn connective_chain(&mut self, connective: Connective) -> Result<FilterNode, PlanParseError> {
        let sub = |p: &mut Parser| match connective {
            Connective::Or => p.connective_chain(Connective::And),
            Connective::And => p.atom(),
        };
        let first = sub(self)?;
        let mut children = vec![first];
        while self.eat_keyword(connective.keyword()) {
            children.push(sub(self)?);
        }
        if children.len() == 1 {
            Ok(children.pop().expect("one child"))
        } else {
            Ok(FilterNode::Composite { connective, children })
        }
    }

    fn atom(&mut self) -> Result<FilterNode, PlanParseError> {
        if self.eat_punct('(') {
            let inner = self.predicate()?;
            self.expect_punct(')')?;
            return Ok(inner);
        }
        if self.eat_punct('@') {
            let id = self.name()?;
            self.expect_punct('(')?;
            let subject = self.attr_term()?;
            let kw = self.keyword()?;
            let op = FilterOp::parse(&kw).ok_or_else(|| self.error(format!("unknown filter op '{kw}'")))?;
            self.expect_punct('{')?;
            let fragment = self.plan(true)?;
            self.expect_punct('}')?;
            self.expect_punct(')')?;
            let phrase = self.phrase()?;
            return Ok(FilterNode::Templated { id, subject, op, fragment: Box::new(fragment), phrase });
        }
        let attribute = self.attr_term()?;
        let kw = self.keyword()?;
        let op = FilterOp::parse(&kw).ok_or_else(|| self.error(format!("unknown filter op '{kw}'")))?;
        let values = if matches!(op, FilterOp::Between | FilterOp::In) {
            self.expect_punct('(')?;
            let mut vs = vec![self.value()?];
            while self.eat_punct(',') {
                vs.push(self.value()?);
            }
            self.expect_punct(')')?;
            vs
        } else {
            vec![self.value()?]
        };
        if !op.accepts_arity(values.len()) {
            return Err(self.error(format!("'{}' does not take {} values", op.keyword(), values.len())));
        }
        let phrase = self.phrase()?;
        Ok(FilterNode::Simple { attribute, op, values, phrase })
    }
}

/// Parse the text form of a plan.
pub fn parse_plan(text: &str) -> Result<SqrPlan, PlanParseError> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0 };
    let plan = p.plan(false)?;
    p.skip_newlines();
    if p.peek().is_some() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(plan)
}

/// Parse a standalone predicate (the second argument of a `Filter` step).
pub fn parse_predicate(text: &str) -> Result<FilterNode, PlanParseError> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0 };
    let pred = p.predicate()?;
    p.skip_newlines();
    if p.peek().is_some() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(pred)
}

fn render_entity(e: &EntityTerm) -> String {
    match e {
        EntityTerm::Named(n) => ident(n),
        EntityTerm::Slot(s) => s.to_string(),
    }
}

fn render_attr(a: &AttrTerm) -> String {
    match a {
        AttrTerm::Ref(r) => r.to_string(),
        AttrTerm::Slot(s) => s.to_string(),
        AttrTerm::Link(e) => format!("{}.@link", render_entity(e)),
    }
}

fn render_value(v: &ValueTerm) -> String {
    match v {
        ValueTerm::Literal(Literal::Null) => "null".to_string(),
        ValueTerm::Literal(l) => l.to_sql(),
        ValueTerm::Slot(s) => s.to_string(),
    }
}

fn render_phrase(out: &mut String, phrase: &str) {
    if !phrase.is_empty() {
        let _ = write!(out, " as '{}'", phrase.replace('\'', "''"));
    }
}

/// Render a predicate; nested composites are parenthesized.
pub fn render_predicate(f: &FilterNode) -> String {
    let mut out = String::new();
    match f {
        FilterNode::Simple { attribute, op, values, phrase } => {
            let _ = write!(out, "{} {} ", render_attr(attribute), op.keyword());
            let vs: Vec<String> = values.iter().map(render_value).collect();
            if matches!(op, FilterOp::Between | FilterOp::In) {
                let _ = write!(out, "({})", vs.join(", "));
            } else {
                out.push_str(&vs.join(", "));
            }
            render_phrase(&mut out, phrase);
        }
        FilterNode::Composite { connective, children } => {
            let parts: Vec<String> = children
                .iter()
                .map(|c| match c {
                    FilterNode::Composite { .. } => format!("({})", render_predicate(c)),
                    _ => render_predicate(c),
                })
                .collect();
            out.push_str(&parts.join(&format!(" {} ", connective.keyword())));
        }
        FilterNode::Templated { id, subject, op, fragment, phrase } => {
            let _ = write!(
                out,
                "@{}({} {} {{ {} }})",
                ident(id),
                render_attr(subject),
                op.keyword(),
                render_steps(fragment, "; ")
            );
            render_phrase(&mut out, phrase);
        }
    }
    out
}

fn render_step(step: &Step) -> String {
    let args = match &step.op {
        StepOp::Retrieve { entity, attribute } => {
            let attr = match (entity, attribute) {
                (EntityTerm::Named(e), AttrTerm::Ref(r)) if &r.entity == e => ident(&r.attribute),
                (_, AttrTerm::Link(_)) => "@link".to_string(),
                (_, a) => render_attr(a),
            };
            format!("{}, {}", render_entity(entity), attr)
        }
        StepOp::Filter { input, predicate } => format!("{}, {}", ident(input), render_predicate(predicate)),
        StepOp::Aggregate { input, op, group_by } => match group_by {
            Some(g) => format!("{}, {}, by {}", ident(input), op.keyword(), render_attr(g)),
            None => format!("{}, {}", ident(input), op.keyword()),
        },
        StepOp::Compare { left, right, op } => format!("{}, {}, {}", ident(left), ident(right), op.keyword()),
        StepOp::Sort { input, key, direction } => {
            let key = match key {
                SortKey::Value => "value".to_string(),
                SortKey::Attr(a) => render_attr(a),
            };
            let dir = match direction {
                DirectionTerm::Fixed(d) => d.keyword().to_string(),
                DirectionTerm::Slot(s) => s.to_string(),
            };
            format!("{}, {}, {}", ident(input), key, dir)
        }
        StepOp::Limit { input, n } => format!("{}, {}", ident(input), n),
        StepOp::Collect { inputs } => inputs.iter().map(|i| ident(i)).collect::<Vec<_>>().join(", "),
    };
    format!("{}: {}({})", ident(&step.id), step.op.name(), args)
}

fn render_steps(plan: &SqrPlan, sep: &str) -> String {
    let mut lines: Vec<String> = plan.steps.iter().map(render_step).collect();
    if plan.steps.last().map(|s| s.id.as_str()) != Some(plan.result_step.as_str()) {
        lines.push(format!("result: {}", ident(&plan.result_step)));
    }
    lines.join(sep)
}

/// Render a plan in its text form, one step per line.
pub fn render_plan(plan: &SqrPlan) -> String {
    let mut s = render_steps(plan, "\n");
    s.push('\n');
    s
}
