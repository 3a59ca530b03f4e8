//! Command-line front end for ring generation, template checking, dataset
//! generation, SQL simplification, question rephrasing and corpus statistics.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use sqlsynth::db::Database;
use sqlsynth::pipeline::{read_dataset, rephrase_record, write_dataset, BackendKind, DatabaseSpec, GenConfig};
use sqlsynth::question::{
    default_few_shot_pool, describe_database, load_few_shot_pool, HttpBackend, LlmBackend, LlmEndpoint, PromptSet,
    QuestionMode, StubBackend,
};
use sqlsynth::ring::{generate_ring, load_ring, save_ring, Ring};
use sqlsynth::simplifier::{check_equivalence, simplify_sql};
use sqlsynth::stats::{corpus_stats_file, format_corpus_stats};
use sqlsynth::templates::{read_document, Document, Library};

#[derive(Parser, Debug)]
#[command(name = "sqlsynth", version, about = "Template-driven synthetic text-to-SQL data generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    TemplateOnly,
    Rephrase,
    RephraseNoFewshot,
    QueryOnly,
}

impl From<Mode> for QuestionMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::TemplateOnly => QuestionMode::TemplateOnly,
            Mode::Rephrase => QuestionMode::Rephrase,
            Mode::RephraseNoFewshot => QuestionMode::RephraseNoFewshot,
            Mode::QueryOnly => QuestionMode::QueryOnly,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive a ring from a database schema.
    RingGen {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and check template documents (a file, a directory, or `builtin`).
    TemplateCheck {
        path: PathBuf,
        /// Also check slot types against this ring.
        #[arg(long)]
        ring: Option<PathBuf>,
    },
    /// Generate a question/SQL dataset.
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Database file; repeat for several. Replaces the configured list.
        #[arg(long)]
        db: Vec<PathBuf>,
        /// Ring file for the database at the same position.
        #[arg(long)]
        ring: Vec<PathBuf>,
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum)]
        question_mode: Option<Mode>,
        /// Chat-completions base URL; selects the HTTP backend.
        #[arg(long)]
        llm_endpoint: Option<String>,
        #[arg(long)]
        few_shot_pool: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simplify SQL read from a file or standard input.
    Simplify {
        file: Option<PathBuf>,
        /// Check the result against the input by execution.
        #[arg(long, requires = "db")]
        verify: bool,
        #[arg(long)]
        db: Option<PathBuf>,
    },
    /// Phrase the questions of an existing dataset again.
    Rephrase {
        records: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        llm_endpoint: Option<String>,
        /// Model name for the HTTP backend.
        #[arg(long)]
        model: Option<String>,
        /// Databases the records were drawn from, for schema descriptions.
        #[arg(long)]
        db: Vec<PathBuf>,
        #[arg(long)]
        few_shot_pool: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        few_shot_k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Corpus statistics of a dataset.
    Stats {
        dataset: PathBuf,
        /// Write the statistics as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    std::panic::set_hook(Box::new(|_| {}));
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(1)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::RingGen { db, out } => ring_gen(&db, &out),
        Command::TemplateCheck { path, ring } => template_check(&path, ring.as_deref()),
        Command::Generate {
            config,
            db,
            ring,
            templates,
            n,
            seed,
            workers,
            question_mode,
            llm_endpoint,
            few_shot_pool,
            out,
        } => {
            let mut c = match &config {
                Some(p) => GenConfig::from_file(p)?,
                None => GenConfig::default(),
            };
            if ring.len() > db.len() {
                bail!("--ring given {} times but --db only {}", ring.len(), db.len());
            }
            if !db.is_empty() {
                c.databases = db
                    .into_iter()
                    .enumerate()
                    .map(|(i, path)| DatabaseSpec { path, ring: ring.get(i).cloned() })
                    .collect();
            }
            c.templates_dir = templates.or(c.templates_dir);
            c.n_records = n.unwrap_or(c.n_records);
            c.seed = seed.unwrap_or(c.seed);
            c.workers = workers.unwrap_or(c.workers);
            c.question_mode = question_mode.map(Into::into).unwrap_or(c.question_mode);
            c.few_shot_pool = few_shot_pool.or(c.few_shot_pool);
            if let Some(url) = llm_endpoint {
                c.backend = BackendKind::Http;
                c.llm.base_url = url;
            }
            generate(c, &out)
        }
        Command::Simplify { file, verify, db } => simplify(file.as_deref(), if verify { db.as_deref() } else { None }),
        Command::Rephrase { records, mode, llm_endpoint, model, db, few_shot_pool, few_shot_k, out } => {
            let mut endpoint = LlmEndpoint::default();
            let backend: Box<dyn LlmBackend> = match llm_endpoint {
                Some(url) => {
                    endpoint.base_url = url;
                    if let Some(m) = model {
                        endpoint.model = m;
                    }
                    Box::new(HttpBackend::new(endpoint))
                }
                None => Box::new(StubBackend),
            };
            let pool = match few_shot_pool {
                Some(p) => load_few_shot_pool(&p)?,
                None => default_few_shot_pool(),
            };
            rephrase(&records, mode.into(), backend.as_ref(), &db, &pool, few_shot_k, &out)
        }
        Command::Stats { dataset, out } => stats(&dataset, out.as_deref()),
    }
}

fn ring_gen(db: &Path, out: &Path) -> Result<()> {
    let database = Database::open(db).with_context(|| db.display().to_string())?;
    let ring = generate_ring(&database)?;
    save_ring(&ring, out)?;
    println!(
        "{}: {} entities, {} relationships -> {}",
        ring.db_id,
        ring.entities.len(),
        ring.relationships.len(),
        out.display()
    );
    Ok(())
}

fn documents_under(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in std::fs::read_dir(dir).with_context(|| dir.display().to_string())? {
        let path = entry?.path();
        if path.is_dir() {
            documents_under(&path, out)?;
        } else if matches!(path.extension().and_then(|e| e.to_str()), Some("tpl" | "flt" | "gen")) {
            out.push(path);
        }
    }
    Ok(())
}

fn template_check(path: &Path, ring: Option<&Path>) -> Result<()> {
    let ring: Option<Ring> = ring.map(load_ring).transpose()?;
    let mut docs: Vec<(String, Result<Document, String>)> = Vec::new();
    if !path.exists() && path.to_str().map(|s| s.trim_end_matches('/')) == Some("builtin") {
        let lib = Library::builtin();
        docs.extend(lib.templates.into_iter().map(|t| (t.id.clone(), Ok(Document::Template(t)))));
        docs.extend(lib.filters.into_iter().map(|f| (f.id.clone(), Ok(Document::Filter(f)))));
        docs.extend(lib.generators.into_iter().map(|g| (g.id.clone(), Ok(Document::Generator(g)))));
    } else {
        let mut paths = Vec::new();
        if path.is_dir() {
            documents_under(path, &mut paths)?;
            paths.sort();
        } else {
            paths.push(path.to_path_buf());
        }
        for p in paths {
            docs.push((p.display().to_string(), read_document(&p).map_err(|e| e.to_string())));
        }
    }
    if docs.is_empty() {
        bail!("no template documents found under {}", path.display());
    }
    let mut failed = 0;
    for (name, doc) in &docs {
        let result = doc.clone().and_then(|d| match d {
            Document::Template(t) => t.check(ring.as_ref()).map_err(|e| e.to_string()),
            _ => Ok(()),
        });
        match result {
            Ok(()) => println!("ok      {name}"),
            Err(e) => {
                failed += 1;
                println!("invalid {name}: {e}");
            }
        }
    }
    println!("{} documents, {} invalid", docs.len(), failed);
    if failed > 0 {
        bail!("{failed} invalid template document(s)");
    }
    Ok(())
}

fn generate(config: GenConfig, out: &Path) -> Result<()> {
    let report = sqlsynth::pipeline::generate_dataset(config, out)?;
    print!("{}", report.to_text());
    println!("wrote {}", out.display());
    Ok(())
}

fn simplify(file: Option<&Path>, verify_db: Option<&Path>) -> Result<()> {
    let sql = match file {
        Some(p) => std::fs::read_to_string(p).with_context(|| p.display().to_string())?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    let sql = sql.trim().trim_end_matches(';');
    let simplified = simplify_sql(sql)?;
    if let Some(path) = verify_db {
        let db = Database::open(path).with_context(|| path.display().to_string())?;
        let verdict = check_equivalence(sql, &simplified, &db)?;
        if !verdict.is_equivalent() {
            bail!("simplified query is not equivalent: {verdict:?}");
        }
        eprintln!("equivalent");
    }
    println!("{simplified}");
    Ok(())
}

fn rephrase(
    records: &Path,
    mode: QuestionMode,
    backend: &dyn LlmBackend,
    dbs: &[PathBuf],
    pool: &[sqlsynth::question::FewShotExample],
    k: usize,
    out: &Path,
) -> Result<()> {
    let prompts = PromptSet::default();
    let mut descriptions: BTreeMap<String, String> = BTreeMap::new();
    if mode != QuestionMode::TemplateOnly {
        for p in dbs {
            let db = Database::open(p).with_context(|| p.display().to_string())?;
            descriptions.insert(db.db_id().to_string(), describe_database(&db, &prompts, backend)?);
        }
    }
    let mut rephrased = Vec::new();
    let mut fallbacks = 0;
    for r in read_dataset(records)? {
        let description = match mode {
            QuestionMode::TemplateOnly => "",
            _ => descriptions
                .get(&r.db_id)
                .ok_or_else(|| anyhow!("record {} needs --db for database '{}'", r.record_id, r.db_id))?,
        };
        let r = rephrase_record(&r, mode, description, pool, k, &prompts, backend)?;
        fallbacks += r.literal_fallback as usize;
        rephrased.push(r);
    }
    write_dataset(&rephrased, out)?;
    println!("{} records rephrased ({}), {} literal fallbacks -> {}", rephrased.len(), mode, fallbacks, out.display());
    Ok(())
}

fn stats(dataset: &Path, out: Option<&Path>) -> Result<()> {
    let s = corpus_stats_file(dataset).with_context(|| dataset.display().to_string())?;
    print!("{}", format_corpus_stats(&s));
    if let Some(p) = out {
        std::fs::write(p, serde_json::to_string_pretty(&s)?).with_context(|| p.display().to_string())?;
    }
    Ok(())
}
