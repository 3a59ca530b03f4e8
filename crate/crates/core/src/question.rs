//! Template question filling, database descriptions, few-shot selection
//! and LLM rephrasing with an offline stub backend.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::db::{quote_ident, Database, Literal};
use crate::filler::{render_placeholders, Bound, SlotAssignment};
use crate::simplifier::ast::{Expr, SelectItem, TableFactor};
use crate::simplifier::parse_sql;
use crate::stats::template_signature;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuestionError {
    #[error("unfilled placeholder {0}")]
    UnfilledPlaceholder(String),
    #[error("language model unavailable: {0}")]
    LlmUnavailable(String),
    #[error("language model returned no usable completion")]
    EmptyCompletion,
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuestionMode {
    TemplateOnly,
    Rephrase,
    RephraseNoFewshot,
    QueryOnly,
}

impl QuestionMode {
    pub const ALL: [QuestionMode; 4] =
        [QuestionMode::TemplateOnly, QuestionMode::Rephrase, QuestionMode::RephraseNoFewshot, QuestionMode::QueryOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionMode::TemplateOnly => "template-only",
            QuestionMode::Rephrase => "rephrase",
            QuestionMode::RephraseNoFewshot => "rephrase-no-fewshot",
            QuestionMode::QueryOnly => "query-only",
        }
    }

    pub fn parse(s: &str) -> Option<QuestionMode> {
        QuestionMode::ALL.into_iter().find(|m| m.as_str() == s)
    }

    fn rephrases(self) -> bool {
        matches!(self, QuestionMode::Rephrase | QuestionMode::RephraseNoFewshot)
    }
}

impl std::fmt::Display for QuestionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionBundle {
    pub template_question: String,
    pub final_question: String,
    pub mode: QuestionMode,
    /// Full prompt sent to the model; empty for template-only.
    pub prompt_record: String,
    /// Set when a rephrasing dropped a literal and the template question was kept.
    pub literal_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShotExample {
    pub question: String,
    pub sql: String,
    #[serde(default)]
    pub signature: String,
}

impl FewShotExample {
    pub fn new(question: impl Into<String>, sql: impl Into<String>) -> FewShotExample {
        let sql = sql.into();
        let signature = template_signature(&sql).unwrap_or_default();
        FewShotExample { question: question.into(), sql, signature }
    }
}

const DEFAULT_POOL: &str = include_str!("../prompts/few_shot.jsonl");

fn parse_pool(text: &str) -> Result<Vec<FewShotExample>, QuestionError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let e: FewShotExample = serde_json::from_str(l).map_err(|e| QuestionError::Io(e.to_string()))?;
            Ok(FewShotExample::new(e.question, e.sql))
        })
        .collect()
}

/// Bundled example pool of generic question-query pairs.
pub fn default_few_shot_pool() -> Vec<FewShotExample> {
    parse_pool(DEFAULT_POOL).expect("bundled pool parses")
}

/// Load a JSONL pool of `{question, sql}` records.
pub fn load_few_shot_pool(path: &Path) -> Result<Vec<FewShotExample>, QuestionError> {
    parse_pool(&std::fs::read_to_string(path).map_err(|e| QuestionError::Io(format!("{}: {e}", path.display())))?)
}

/// Fill one question template and append the extra filter phrases before
/// the terminal punctuation.
pub fn fill_question(
    template: &str,
    assignments: &[SlotAssignment],
    filter_phrases: &[String],
) -> Result<String, QuestionError> {
    let text =
        render_placeholders(template, assignments).map_err(|s| QuestionError::UnfilledPlaceholder(s.to_string()))?;
    if let Some(start) = text.find('{') {
        let end = text[start..].find('}').map(|e| start + e + 1).unwrap_or(text.len());
        return Err(QuestionError::UnfilledPlaceholder(text[start..end].to_string()));
    }
    if filter_phrases.is_empty() {
        return Ok(text);
    }
    let trimmed = text.trim_end();
    let (body, punct) = match trimmed.char_indices().last() {
        Some((i, c)) if matches!(c, '?' | '.' | '!') => (&trimmed[..i], &trimmed[i..]),
        _ => (trimmed, ""),
    };
    Ok(format!("{} {}{}", body.trim_end(), filter_phrases.join(" and "), punct))
}

/// String literals a rephrasing must keep.
pub fn required_literals(assignments: &[SlotAssignment]) -> Vec<String> {
    let mut out = Vec::new();
    for a in assignments {
        if let Bound::Value { value: Literal::Text(s), .. } = &a.bound {
            if !out.contains(s) {
                out.push(s.clone());
            }
        }
    }
    out
}

/// Whether every literal occurs in `question` (case-insensitive).
pub fn preserves_literals(question: &str, literals: &[String]) -> bool {
    let q = question.to_lowercase();
    literals.iter().all(|l| q.contains(&l.to_lowercase()))
}

fn tokens(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric() && c != '_').filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

/// Jaccard overlap of lower-cased word tokens.
pub fn token_overlap(a: &str, b: &str) -> f64 {
    let (ta, tb) = (tokens(a), tokens(b));
    let union = ta.union(&tb).count();
    if union == 0 {
        0.0
    } else {
        ta.intersection(&tb).count() as f64 / union as f64
    }
}

/// The `k` pool entries most similar to `sql`: equal structural signature
/// first, then token overlap, then pool order.
pub fn select_few_shot(sql: &str, pool: &[FewShotExample], k: usize) -> Vec<FewShotExample> {
    let target = template_signature(sql).ok();
    let mut scored: Vec<(bool, f64, usize)> = pool
        .iter()
        .enumerate()
        .map(|(i, e)| (target.as_deref() == Some(e.signature.as_str()), token_overlap(sql, &e.sql), i))
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.total_cmp(&a.1)).then(a.2.cmp(&b.2)));
    scored.into_iter().take(k).map(|(_, _, i)| pool[i].clone()).collect()
}

/// Prompt templates with `{name}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    pub rephrase: String,
    pub rephrase_no_fewshot: String,
    pub query_only: String,
    pub describe: String,
}

impl Default for PromptSet {
    fn default() -> Self {
        PromptSet {
            rephrase: include_str!("../prompts/rephrase.txt").to_string(),
            rephrase_no_fewshot: include_str!("../prompts/rephrase_no_fewshot.txt").to_string(),
            query_only: include_str!("../prompts/query_only.txt").to_string(),
            describe: include_str!("../prompts/describe.txt").to_string(),
        }
    }
}

impl PromptSet {
    /// Load `rephrase.txt`, `rephrase_no_fewshot.txt`, `query_only.txt` and
    /// `describe.txt` from `dir`, keeping defaults for missing files.
    pub fn load(dir: &Path) -> Result<PromptSet, QuestionError> {
        let mut set = PromptSet::default();
        for (name, slot) in [
            ("rephrase.txt", &mut set.rephrase),
            ("rephrase_no_fewshot.txt", &mut set.rephrase_no_fewshot),
            ("query_only.txt", &mut set.query_only),
            ("describe.txt", &mut set.describe),
        ] {
            let path = dir.join(name);
            if path.exists() {
                *slot = std::fs::read_to_string(&path)
                    .map_err(|e| QuestionError::Io(format!("{}: {e}", path.display())))?;
            }
        }
        Ok(set)
    }
}

/// Single-pass substitution of `{name}` placeholders.
pub fn fill_prompt(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}').and_then(|c| values.iter().find(|(k, _)| *k == &after[..c]).map(|(_, v)| (c, v))) {
            Some((c, v)) => {
                out.push_str(v);
                rest = &after[c + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmEndpoint {
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_s: u64,
    pub max_retries: u32,
    pub temperature: f64,
    /// Concurrent requests allowed.
    pub max_in_flight: usize,
}

impl Default for LlmEndpoint {
    fn default() -> Self {
        LlmEndpoint {
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4o-mini".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            timeout_s: 60,
            max_retries: 3,
            temperature: 0.7,
            max_in_flight: 4,
        }
    }
}

/// What a completion is for, so the stub can answer without a model.
#[derive(Debug, Clone, PartialEq)]
pub enum RequestKind<'a> {
    Describe { digest: &'a str },
    Rephrase { template_question: &'a str },
    QueryOnly { sql: &'a str },
}

pub trait LlmBackend: Send + Sync {
    fn complete(&self, prompt: &str, kind: RequestKind<'_>) -> Result<String, QuestionError>;
}

/// Offline backend: digests for descriptions, identity for rephrasing and
/// a rule-based rendering for query-only questions.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubBackend;

impl LlmBackend for StubBackend {
    fn complete(&self, _prompt: &str, kind: RequestKind<'_>) -> Result<String, QuestionError> {
        Ok(match kind {
            RequestKind::Describe { digest } => digest.to_string(),
            RequestKind::Rephrase { template_question } => template_question.to_string(),
            RequestKind::QueryOnly { sql } => describe_sql(sql),
        })
    }
}

fn words(identifier: &str) -> String {
    identifier.replace('_', " ").to_lowercase()
}

fn describe_item(e: &Expr) -> String {
    match e {
        Expr::Column { name, .. } => words(name),
        Expr::Function { name, args, star, .. } if e.is_aggregate_call() => {
            let target = if *star { "rows".to_string() } else { args.first().map(describe_item).unwrap_or_default() };
            match name.to_lowercase().as_str() {
                "count" => format!("number of {target}"),
                "avg" => format!("average {target}"),
                "sum" | "total" => format!("total {target}"),
                "max" => format!("maximum {target}"),
                "min" => format!("minimum {target}"),
                other => format!("{other} of {target}"),
            }
        }
        Expr::Subquery(_) => "a computed value".to_string(),
        _ => "a computed value".to_string(),
    }
}

/// Deterministic English rendering of a query, mentioning its literals.
pub fn describe_sql(sql: &str) -> String {
    let Ok(q) = parse_sql(sql) else { return format!("What does the query {sql} return?") };
    let Some(sel) = q.as_select() else { return "What rows do these combined queries return?".to_string() };
    let items: Vec<String> = sel
        .projections
        .iter()
        .map(|p| match p {
            SelectItem::Expr { expr, .. } => describe_item(expr),
            _ => "all columns".to_string(),
        })
        .collect();
    let tables: Vec<String> = sel
        .from
        .iter()
        .flat_map(|f| f.factors())
        .filter_map(|f| match f {
            TableFactor::Table { name, .. } => Some(words(name)),
            TableFactor::Derived { .. } => None,
        })
        .collect();
    let mut lits = Vec::new();
    let mut collect = |e: &Expr| {
        if let Expr::Literal { kind: crate::simplifier::ast::LiteralKind::String, text } = e {
            if !lits.contains(text) {
                lits.push(text.clone());
            }
        }
    };
    fn walk(q: &crate::simplifier::ast::Query, f: &mut dyn FnMut(&Expr)) {
        crate::simplifier::ast::visit_queries(q, &mut |q, _| {
            if let Some(s) = q.as_select() {
                for e in s.exprs() {
                    e.walk_shallow(f);
                }
            }
        });
    }
    walk(&q, &mut collect);
    let mut out = format!("What is the {}", items.join(" and "));
    if !tables.is_empty() {
        out.push_str(&format!(" for {}", tables.join(" and ")));
    }
    if !lits.is_empty() {
        out.push_str(&format!(" involving {}", lits.join(", ")));
    }
    if !q.order_by.is_empty() {
        out.push_str(", in sorted order");
    }
    out.push('?');
    out
}

struct InFlight {
    cap: usize,
    busy: Mutex<usize>,
    freed: Condvar,
}

impl InFlight {
    fn acquire(&self) {
        let mut n = self.busy.lock().expect("lock");
        while *n >= self.cap {
            n = self.freed.wait(n).expect("lock");
        }
        *n += 1;
    }

    fn release(&self) {
        *self.busy.lock().expect("lock") -= 1;
        self.freed.notify_one();
    }
}

/// Chat-completion client over HTTP.
pub struct HttpBackend {
    endpoint: LlmEndpoint,
    api_key: Option<String>,
    agent: ureq::Agent,
    in_flight: InFlight,
}

impl HttpBackend {
    pub fn new(endpoint: LlmEndpoint) -> HttpBackend {
        let api_key = std::env::var(&endpoint.api_key_env).ok();
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(endpoint.timeout_s.max(1))))
            .build()
            .into();
        let cap = endpoint.max_in_flight.max(1);
        HttpBackend {
            endpoint,
            api_key,
            agent,
            in_flight: InFlight { cap, busy: Mutex::new(0), freed: Condvar::new() },
        }
    }

    fn request(&self, prompt: &str) -> Result<String, QuestionError> {
        let url = format!("{}/chat/completions", self.endpoint.base_url.trim_end_matches('/'));
        let body = serde_json::json!({
            "model": self.endpoint.model,
            "temperature": self.endpoint.temperature,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut req = self.agent.post(&url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(&body).map_err(|e| QuestionError::LlmUnavailable(e.to_string()))?;
        let value: serde_json::Value =
            resp.body_mut().read_json().map_err(|e| QuestionError::LlmUnavailable(e.to_string()))?;
        Ok(value["choices"][0]["message"]["content"].as_str().unwrap_or_default().to_string())
    }
}

impl LlmBackend for HttpBackend {
    fn complete(&self, prompt: &str, _kind: RequestKind<'_>) -> Result<String, QuestionError> {
        let mut last = QuestionError::EmptyCompletion;
        for attempt in 0..=self.endpoint.max_retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(500 << (attempt - 1).min(6)));
            }
            self.in_flight.acquire();
            let result = self.request(prompt);
            self.in_flight.release();
            match result {
                Ok(text) if !text.trim().is_empty() => return Ok(text),
                Ok(_) => last = QuestionError::EmptyCompletion,
                Err(e) => last = e,
            }
        }
        Err(last)
    }
}

/// First non-empty line with wrapping quotes removed.
pub fn clean_completion(text: &str) -> Option<String> {
    let line = text.lines().map(str::trim).find(|l| !l.is_empty())?;
    let mut s = line;
    for (open, close) in [('"', '"'), ('\'', '\''), ('`', '`'), ('“', '”')] {
        if s.len() >= 2 && s.starts_with(open) && s.ends_with(close) {
            s = s[open.len_utf8()..s.len() - close.len_utf8()].trim();
        }
    }
    (!s.is_empty()).then(|| s.to_string())
}

/// Schema DDL plus up to three rows per table, tab-separated.
pub fn schema_prompt_text(db: &Database) -> Result<String, QuestionError> {
    let err = |e: crate::db::DbError| QuestionError::Io(e.to_string());
    let ddl = db
        .execute("SELECT name, sql FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY name")
        .map_err(err)?;
    let mut out = String::new();
    for row in &ddl.rows {
        let name = row[0].display_text();
        out.push_str(&row[1].display_text());
        out.push_str(";\n");
        let sample = db.execute(&format!("SELECT * FROM {} LIMIT 3", quote_ident(&name))).map_err(err)?;
        out.push_str(&format!("-- first rows of {name}\n"));
        out.push_str(&sample.column_names.join("\t"));
        out.push('\n');
        for r in &sample.rows {
            let cells: Vec<String> =
                r.iter().map(|v| if v.is_null() { "NULL".to_string() } else { v.display_text() }).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out.push('\n');
    }
    Ok(out)
}

/// Table names with their column lists.
pub fn schema_digest(db: &Database) -> Result<String, QuestionError> {
    let tables = db.tables().map_err(|e| QuestionError::Io(e.to_string()))?;
    let parts: Vec<String> = tables
        .iter()
        .map(|t| format!("{}({})", t.name, t.columns.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", ")))
        .collect();
    Ok(format!("Tables: {}", parts.join("; ")))
}

/// Description of `db` from the backend.
pub fn describe_database(
    db: &Database,
    prompts: &PromptSet,
    backend: &dyn LlmBackend,
) -> Result<String, QuestionError> {
    let prompt = fill_prompt(&prompts.describe, &[("schema", &schema_prompt_text(db)?)]);
    let digest = schema_digest(db)?;
    let text = backend.complete(&prompt, RequestKind::Describe { digest: &digest })?;
    let text = text.trim();
    if text.is_empty() {
        return Err(QuestionError::EmptyCompletion);
    }
    Ok(text.to_string())
}

fn render_examples(examples: &[FewShotExample]) -> String {
    examples.iter().map(|e| format!("Question: {}\nSQL: {}", e.question, e.sql)).collect::<Vec<_>>().join("\n\n")
}

/// Everything a question may be produced from.
#[derive(Debug, Clone, Default)]
pub struct RephraseInputs<'a> {
    pub template_question: &'a str,
    pub sql: &'a str,
    pub description: &'a str,
    pub examples: &'a [FewShotExample],
    /// Literals a rephrasing must keep.
    pub literals: &'a [String],
}

/// Prompt for `mode`; empty for template-only.
pub fn build_prompt(mode: QuestionMode, inputs: &RephraseInputs<'_>, prompts: &PromptSet) -> String {
    match mode {
        QuestionMode::TemplateOnly => String::new(),
        QuestionMode::Rephrase => fill_prompt(
            &prompts.rephrase,
            &[
                ("description", inputs.description),
                ("examples", &render_examples(inputs.examples)),
                ("sql", inputs.sql),
                ("question", inputs.template_question),
            ],
        ),
        QuestionMode::RephraseNoFewshot => fill_prompt(
            &prompts.rephrase_no_fewshot,
            &[("description", inputs.description), ("sql", inputs.sql), ("question", inputs.template_question)],
        ),
        QuestionMode::QueryOnly => {
            fill_prompt(&prompts.query_only, &[("description", inputs.description), ("sql", inputs.sql)])
        }
    }
}

/// Produce the final question for `mode`. Rephrasings that drop a required
/// literal fall back to the template question.
pub fn rephrase(
    inputs: &RephraseInputs<'_>,
    mode: QuestionMode,
    prompts: &PromptSet,
    backend: &dyn LlmBackend,
) -> Result<QuestionBundle, QuestionError> {
    let prompt = build_prompt(mode, inputs, prompts);
    let mut bundle = QuestionBundle {
        template_question: inputs.template_question.to_string(),
        final_question: inputs.template_question.to_string(),
        mode,
        prompt_record: prompt.clone(),
        literal_fallback: false,
    };
    if mode == QuestionMode::TemplateOnly {
        return Ok(bundle);
    }
    let kind = if mode == QuestionMode::QueryOnly {
        RequestKind::QueryOnly { sql: inputs.sql }
    } else {
        RequestKind::Rephrase { template_question: inputs.template_question }
    };
    let text = backend.complete(&prompt, kind)?;
    let question = clean_completion(&text).ok_or(QuestionError::EmptyCompletion)?;
    if mode.rephrases() && !preserves_literals(&question, inputs.literals) {
        bundle.literal_fallback = true;
    } else {
        bundle.final_question = question;
    }
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::SemanticType;
    use crate::sqr::{Slot, SlotType};

    fn worked_assignments() -> Vec<SlotAssignment> {
        let ident = SlotType::Semantic(SemanticType::Identifier);
        vec![
            SlotAssignment {
                slot: Slot::new(SlotType::Entity, 0),
                bound: Bound::Entity { entity: "song".into() },
                expression: "song".into(),
            },
            SlotAssignment {
                slot: Slot::new(SlotType::Semantic(SemanticType::Datetime), 0),
                bound: Bound::Attribute { entity: "song".into(), attribute: "releasedate".into() },
                expression: "releasedate".into(),
            },
            SlotAssignment {
                slot: Slot::value(ident, 0, 0),
                bound: Bound::Value {
                    value: Literal::Text("Just beat it".into()),
                    semantic_type: SemanticType::Identifier,
                },
                expression: "Just beat it".into(),
            },
            SlotAssignment {
                slot: Slot::value(ident, 0, 1),
                bound: Bound::Value {
                    value: Literal::Text("Aj ei akash".into()),
                    semantic_type: SemanticType::Identifier,
                },
                expression: "Aj ei akash".into(),
            },
        ]
    }

    #[test]
    fn worked_question() {
        let q = fill_question(
            "did {Entity[0].Expression} {Identifier[0].Value[0]} have a {Datetime[0].Expression} before {Identifier[0].Value[1]}?",
            &worked_assignments(),
            &[],
        )
        .unwrap();
        assert_eq!(q, "did song Just beat it have a releasedate before Aj ei akash?");
    }

    #[test]
    fn filter_phrase_before_punctuation() {
        let q = fill_question(
            "how many {Entity[0].Expression} are there?",
            &worked_assignments(),
            &["with rating at least 7".into()],
        )
        .unwrap();
        assert_eq!(q, "how many song are there with rating at least 7?");
    }

    #[test]
    fn unfilled() {
        let e = fill_question("what is {Arithmetic[0].Expression}?", &worked_assignments(), &[]).unwrap_err();
        assert_eq!(e, QuestionError::UnfilledPlaceholder("{Arithmetic[0].Expression}".into()));
    }

    #[test]
    fn few_shot_ranking() {
        let pool = vec![
            FewShotExample::new("a", "select name from t where x = 1"),
            FewShotExample::new("b", "select count(*) from t"),
        ];
        let got = select_few_shot("select count(*) from song", &pool, 3);
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].question, "b");
    }

    #[test]
    fn mode_contracts_with_stub() {
        let pool = default_few_shot_pool();
        let lits = vec!["Just beat it".to_string()];
        let inputs = RephraseInputs {
            template_question: "did song Just beat it come first?",
            sql: "select 1 from song where song_name = 'Just beat it'",
            description: "songs",
            examples: &pool[..3],
            literals: &lits,
        };
        let prompts = PromptSet::default();
        for mode in QuestionMode::ALL {
            let b = rephrase(&inputs, mode, &prompts, &StubBackend).unwrap();
            assert_eq!(
                b.prompt_record.contains(inputs.template_question),
                mode != QuestionMode::QueryOnly && mode != QuestionMode::TemplateOnly
            );
            assert_eq!(b.prompt_record.contains(&pool[0].sql), mode == QuestionMode::Rephrase);
            if mode != QuestionMode::QueryOnly {
                assert_eq!(b.final_question, inputs.template_question);
            }
            assert!(!b.final_question.contains('\n'));
        }
    }

    #[test]
    fn literal_gate_falls_back() {
        struct Lossy;
        impl LlmBackend for Lossy {
            fn complete(&self, _: &str, _: RequestKind<'_>) -> Result<String, QuestionError> {
                Ok("\"Which song came first?\"".into())
            }
        }
        let lits = vec!["Just beat it".to_string()];
        let inputs =
            RephraseInputs { template_question: "did Just beat it come first?", literals: &lits, ..Default::default() };
        let b = rephrase(&inputs, QuestionMode::RephraseNoFewshot, &PromptSet::default(), &Lossy).unwrap();
        assert!(b.literal_fallback);
        assert_eq!(b.final_question, inputs.template_question);
        let b = rephrase(&inputs, QuestionMode::QueryOnly, &PromptSet::default(), &Lossy).unwrap();
        assert_eq!(b.final_question, "Which song came first?");
    }

    #[test]
    fn prompt_substitution_is_single_pass() {
        assert_eq!(fill_prompt("{a} {b} {c}", &[("a", "{b}"), ("b", "x")]), "{b} x {c}");
    }
}
