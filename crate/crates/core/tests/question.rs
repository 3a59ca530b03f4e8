mod common;

use std::collections::BTreeSet;

use common::*;
use sqlsynth::db::Database;
use sqlsynth::filler::fill_template;
use sqlsynth::question::{
    default_few_shot_pool, describe_database, fill_question, rephrase, schema_prompt_text, select_few_shot,
    FewShotExample, LlmBackend, PromptSet, QuestionError, QuestionMode, RephraseInputs, RequestKind, StubBackend,
};
use sqlsynth::stats::template_signature;
use sqlsynth::templates::builtin_templates;

#[test]
fn worked_example_question() {
    let (_d, db, ring) = song();
    let t = builtin_templates().into_iter().find(|t| t.id == "occurred_before").unwrap();
    let f = (0..400)
        .map(|seed| fill_template(&t, &ring, &db, seed).unwrap())
        .find(|f| {
            let q = fill_question(&t.question_templates[0], &f.assignments, &[]).unwrap();
            q.contains("Just beat it") && q.contains("Aj ei akash") && q.find("Just").unwrap() < q.find("Aj ").unwrap()
        })
        .expect("worked binds reachable");
    let q = fill_question(&t.question_templates[0], &f.assignments, &[]).unwrap();
    assert_eq!(q, "did song Just beat it have a releasedate before Aj ei akash?");
    let with_filter =
        fill_question(&t.question_templates[0], &f.assignments, &["with rating at least 5".into()]).unwrap();
    assert_eq!(with_filter, "did song Just beat it have a releasedate before Aj ei akash with rating at least 5?");
}

#[test]
fn unfilled_placeholder_is_an_error() {
    assert!(matches!(
        fill_question("what is {Arithmetic[3].Expression}?", &[], &[]),
        Err(QuestionError::UnfilledPlaceholder(_))
    ));
}

#[test]
fn corpus_questions_are_closed_and_carry_filters() {
    let c = corpus(300, 4);
    let mut with_filters = 0;
    for r in &c.records {
        assert!(!r.template_question.contains('{') && !r.template_question.contains('}'), "{}", r.template_question);
        for p in &r.filters {
            assert!(r.template_question.contains(p.as_str()), "{:?} lacks {p:?}", r.template_question);
        }
        with_filters += !r.filters.is_empty() as usize;
    }
    assert!(with_filters > 50);
}

#[test]
fn database_description_prompts() {
    let (_d, db, _ring) = customers_orders();
    let prompts = PromptSet::default();
    let a = describe_database(&db, &prompts, &StubBackend).unwrap();
    assert_eq!(a, describe_database(&db, &prompts, &StubBackend).unwrap());
    assert!(a.contains("customers(") && a.contains("orders("), "{a}");

    let dir = tempfile::tempdir().unwrap();
    let one = Database::open(write_db(
        dir.path(),
        "one",
        "CREATE TABLE t (a INTEGER, b TEXT); INSERT INTO t VALUES (1, NULL);",
    ))
    .unwrap();
    let text = schema_prompt_text(&one).unwrap();
    let block: Vec<&str> =
        text.split("-- first rows of t\n").nth(1).unwrap().lines().take_while(|l| !l.is_empty()).collect();
    assert_eq!(block, vec!["a\tb", "1\tNULL"]);

    let (_d, paths) = samples();
    for p in &paths {
        let db = Database::open(p).unwrap();
        let text = schema_prompt_text(&db).unwrap();
        for t in db.tables().unwrap() {
            assert!(text.contains(&t.create_sql), "{}", t.name);
            let rows = text.split(&format!("-- first rows of {}\n", t.name)).nth(1).unwrap();
            assert!(rows.lines().take_while(|l| !l.is_empty()).count() <= 4);
        }
    }
}

fn words(s: &str) -> BTreeSet<String> {
    s.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|w| !w.is_empty())
        .map(String::from)
        .collect()
}

fn jaccard(a: &str, b: &str) -> f64 {
    let (x, y) = (words(a), words(b));
    let u = x.union(&y).count();
    if u == 0 {
        0.0
    } else {
        x.intersection(&y).count() as f64 / u as f64
    }
}

#[test]
fn few_shot_ranking() {
    let pool = vec![
        FewShotExample::new("how many singers", "select count(*) from singer"),
        FewShotExample::new("names of old singers", "select name from singer where age > 40"),
    ];
    let target = "select title from song where rating > 7";
    assert_eq!(select_few_shot(target, &pool, 3).len(), 2);
    assert_eq!(select_few_shot(target, &pool, 1)[0], pool[1]);

    let c = corpus(50, 9);
    let pool: Vec<FewShotExample> = c.records.iter().map(|r| FewShotExample::new(&r.question, &r.sql)).collect();
    assert_eq!(pool.len(), 50);
    for target in c.records.iter().take(20).map(|r| r.sql.as_str()) {
        let sig = template_signature(target).unwrap();
        let score = |e: &FewShotExample| (template_signature(&e.sql).unwrap() == sig, jaccard(target, &e.sql));
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.sort_by(|&i, &j| {
            let (a, b) = (score(&pool[i]), score(&pool[j]));
            b.0.cmp(&a.0).then(b.1.total_cmp(&a.1)).then(i.cmp(&j))
        });
        let want: Vec<&FewShotExample> = order.iter().take(5).map(|&i| &pool[i]).collect();
        let got = select_few_shot(target, &pool, 5);
        assert_eq!(got.iter().collect::<Vec<_>>(), want);
    }
}

struct Paraphraser;

impl LlmBackend for Paraphraser {
    fn complete(&self, _prompt: &str, kind: RequestKind<'_>) -> Result<String, QuestionError> {
        Ok(match kind {
            RequestKind::Describe { digest } => digest.to_string(),
            _ => "\"which track came out first?\"\n".into(),
        })
    }
}

#[test]
fn mode_contracts_and_literal_gate() {
    let pool = default_few_shot_pool();
    let sql = "select (select releasedate from song where song_name = 'Just beat it') < (select releasedate from song where song_name = 'Aj ei akash')";
    let template = "did song Just beat it have a releasedate before Aj ei akash?";
    let examples = select_few_shot(sql, &pool, 3);
    let literals = vec!["Just beat it".to_string(), "Aj ei akash".to_string()];
    let inputs = RephraseInputs {
        template_question: template,
        sql,
        description: "songs",
        examples: &examples,
        literals: &literals,
    };
    let prompts = PromptSet::default();
    for mode in QuestionMode::ALL {
        let b = rephrase(&inputs, mode, &prompts, &StubBackend).unwrap();
        let has_examples =
            examples.iter().all(|e| b.prompt_record.contains(&format!("Question: {}\nSQL: {}", e.question, e.sql)));
        assert_eq!(has_examples, mode == QuestionMode::Rephrase, "{mode}");
        match mode {
            QuestionMode::TemplateOnly => {
                assert!(b.prompt_record.is_empty());
                assert_eq!(b.final_question, template);
            }
            QuestionMode::QueryOnly => {
                assert!(b.prompt_record.contains(sql) && !b.prompt_record.contains(template));
                assert!(!b.final_question.is_empty() && !b.final_question.contains('\n'));
            }
            _ => {
                assert!(b.prompt_record.contains(template) && b.prompt_record.contains(sql));
                assert_eq!(b.final_question, template);
                assert!(!b.literal_fallback);
            }
        }
    }
    let b = rephrase(&inputs, QuestionMode::RephraseNoFewshot, &prompts, &Paraphraser).unwrap();
    assert!(b.literal_fallback);
    assert_eq!(b.final_question, template);
    let none: Vec<String> = Vec::new();
    let loose = RephraseInputs { literals: &none, ..inputs };
    let b = rephrase(&loose, QuestionMode::Rephrase, &prompts, &Paraphraser).unwrap();
    assert_eq!(b.final_question, "which track came out first?");
}
