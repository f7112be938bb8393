//! `stemsim` command-line interface.
//!
//! Exit codes: 0 success, 1 failure or partial failure, 2 usage error or a
//! referenced document/file that does not exist.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde_json::json;

use stemsim::calibration::calibrate;
use stemsim::corpus::Corpus;
use stemsim::doc_model::{read_document, validate, DocFormat, Document};
use stemsim::error::Error;
use stemsim::index::CorpusIndex;
use stemsim::measures::{Measure, Score, SimilarityReport};
use stemsim::pipeline::{load_cases, render_report, Engine, ReportFormat};
use stemsim::synth::{generate, load_plants, PlantSpec, SynthConfig};
use stemsim::RunConfig;

#[derive(Parser)]
#[command(name = "stemsim", version, about = "Math, citation and text similarity for STEM documents")]
struct Cli {
    /// TOML configuration file; STEMSIM_* environment variables override it.
    #[arg(long, global = true, env = "STEMSIM_CONFIG")]
    config: Option<PathBuf>,

    /// Emit machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Corpus store directory (overrides `corpus_path`).
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,

    /// Index directory (overrides `index_path`).
    #[arg(long, global = true)]
    index: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse TEI or JSON documents and write the corpus store.
    Ingest {
        /// Files or directories (searched recursively for .xml, .tei, .json).
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// auto, tei or json.
        #[arg(long, default_value = "auto")]
        format: String,
    },
    /// Write a synthetic corpus with optional planted derivatives.
    Generate {
        #[arg(long, default_value_t = 100)]
        docs: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// JSON array of plant specs.
        #[arg(long)]
        plants: Option<PathBuf>,
        /// Number of plants with default settings (ignored with --plants).
        #[arg(long, default_value_t = 0)]
        plant_count: usize,
        /// TOML file with generator distribution parameters.
        #[arg(long)]
        synth_config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build and persist the inverted index for the corpus store.
    Index,
    /// Retrieve candidates for a document and rank them by every measure.
    Query {
        doc_id: String,
        #[arg(long)]
        k: Option<usize>,
        /// Show only this measure's ranking.
        #[arg(long)]
        measure: Option<String>,
    },
    /// Compare two documents with all seven measures.
    Compare { doc_a: String, doc_b: String },
    /// Score random unrelated pairs and summarise each measure.
    Calibrate {
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the summary as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Recall and MRR over confirmed (query, source) cases.
    Evaluate {
        /// CSV (case_id,query_doc,source_doc) or JSON case manifest.
        cases: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        /// Also write the per-case table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Corpus-wide ranking of suspicious pairs by GIT.
    Explore {
        #[arg(long, default_value_t = 50)]
        limit: usize,
    },
    /// Render the analysis of one document as JSON or HTML.
    Report {
        doc_id: String,
        /// json or html.
        #[arg(long, default_value = "html")]
        format: String,
        #[arg(long)]
        k: Option<usize>,
        /// Output file (default stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(err) if err.is_not_found() => 2,
        Some(Error::UnknownFormat(_)) => 2,
        _ if e.downcast_ref::<Usage>().is_some() => 2,
        _ => 1,
    }
}

#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let mut cfg = cfg.from_process_env()?;
    if let Some(p) = &cli.corpus {
        cfg.corpus_path = p.clone();
    }
    if let Some(p) = &cli.index {
        cfg.index_path = p.clone();
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let cfg = load_config(&cli)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .context("configuring worker threads")?;
    }
    let out = Output { json: cli.json };
    match cli.command {
        Command::Ingest { paths, format } => ingest(&cfg, &out, &paths, &format),
        Command::Generate {
            docs,
            seed,
            plants,
            plant_count,
            synth_config,
            out: dir,
        } => {
            let seed = seed.unwrap_or(cfg.seed);
            let specs = match plants {
                Some(p) => load_plants(&p)?,
                None => vec![PlantSpec::default(); plant_count],
            };
            let synth_cfg = match synth_config {
                Some(p) => {
                    let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                    toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
                }
                None => SynthConfig::default(),
            };
            let corpus = generate(docs, seed, &specs, &synth_cfg)?;
            corpus.write(&dir)?;
            out.emit(
                &json!({
                    "out": dir,
                    "documents": corpus.documents.len(),
                    "seed": seed,
                    "plants": corpus.plants,
                }),
                || {
                    let mut s = format!(
                        "wrote {} documents to {} (seed {seed})\n",
                        corpus.documents.len(),
                        dir.join(stemsim::synth::DOCUMENTS_DIR).display()
                    );
                    for p in &corpus.plants {
                        s += &format!("  {}: {} derived from {}\n", p.case_id, p.query_doc, p.source_doc);
                    }
                    s
                },
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Index => {
            let corpus = Corpus::load(&cfg.corpus_path)?;
            let index = CorpusIndex::from_corpus(&corpus)?;
            index.persist(&cfg.index_path)?;
            out.emit(
                &json!({ "index": cfg.index_path, "documents": index.doc_count() }),
                || format!("indexed {} documents into {}\n", index.doc_count(), cfg.index_path.display()),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Query { doc_id, k, measure } => {
            let engine = open_engine(&cfg)?;
            let measure = measure.map(|m| m.parse::<Measure>().map_err(|e| Usage(e.to_string()))).transpose()?;
            let analysis = engine.analyze(&doc_id, k.unwrap_or(cfg.top_k))?;
            out.emit(&analysis, || {
                let mut s = format!(
                    "query {}: {} math, {} citation, {} text candidates, {} in union\n",
                    analysis.query,
                    analysis.candidates.math.len(),
                    analysis.candidates.citation.len(),
                    analysis.candidates.text.len(),
                    analysis.candidates.union.len()
                );
                for d in &analysis.diagnostics {
                    s += &format!("note: {d}\n");
                }
                let measures: Vec<Measure> = measure.map_or(Measure::ALL.to_vec(), |m| vec![m]);
                for m in measures {
                    s += &format!("\n{m} (top 10 of {} channel candidates)\n", m.channel().name());
                    for (rank, r) in analysis.ranking(m, Some(m.channel())).iter().take(10).enumerate() {
                        s += &format!(
                            "  {:>3}. {:<24} {:>7}{}\n",
                            rank + 1,
                            r.doc_b,
                            r.score(m).to_string(),
                            if r.is_significant(m) { " *" } else { "" }
                        );
                    }
                }
                s
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { doc_a, doc_b } => {
            let corpus = Corpus::load(&cfg.corpus_path)?;
            let fa = corpus.doc_features(&doc_a)?;
            let fb = corpus.doc_features(&doc_b)?;
            let report = stemsim::compare_pair(fa, fb, &cfg.gates, &cfg.thresholds);
            out.emit(&report, || report_table(&report))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Calibrate { pairs, seed, csv } => {
            let corpus = Corpus::load(&cfg.corpus_path)?;
            let report = calibrate(
                &corpus,
                pairs.unwrap_or(cfg.calibration.sample_size),
                seed.unwrap_or(cfg.seed),
                &cfg.gates,
            )?;
            let table = report.to_csv()?;
            if let Some(p) = csv {
                fs::write(&p, &table).map_err(|e| Error::io(&p, e))?;
            }
            out.emit(&report, || {
                format!(
                    "{} pairs, seed {}\n{}\nsuggested thresholds are heuristic ({})\n",
                    report.pairs, report.seed, table, report.suggestion_method
                )
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Evaluate { cases, k, csv } => {
            let cases = load_cases(&cases)?;
            let engine = open_engine(&cfg)?;
            let result = engine.evaluate(&cases, k.unwrap_or(cfg.top_k))?;
            let table = result.to_csv()?;
            if let Some(p) = csv {
                fs::write(&p, &table).map_err(|e| Error::io(&p, e))?;
            }
            out.emit(&result, || table.clone())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Explore { limit } => {
            let engine = open_engine(&cfg)?;
            let pairs = engine.explore(limit)?;
            out.emit(&pairs, || {
                let mut s = format!("{:>4}  {:<20} {:<20} {:>6} {:>6}\n", "rank", "doc_a", "doc_b", "GIT", "Histo");
                for (i, p) in pairs.iter().enumerate() {
                    s += &format!(
                        "{:>4}  {:<20} {:<20} {:>6.3} {:>6.3}\n",
                        i + 1,
                        p.doc_a,
                        p.doc_b,
                        p.git_score,
                        p.histo_score
                    );
                }
                s
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Report {
            doc_id,
            format,
            k,
            out: file,
        } => {
            let format: ReportFormat = format.parse()?;
            let engine = open_engine(&cfg)?;
            let analysis = engine.analyze(&doc_id, k.unwrap_or(cfg.top_k))?;
            let reports: Vec<SimilarityReport> =
                analysis.ranking(Measure::Git, None).into_iter().cloned().collect();
            let bytes = render_report(&reports, format)?;
            match file {
                Some(p) => fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?,
                None => std::io::stdout().write_all(&bytes)?,
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn open_engine(cfg: &RunConfig) -> anyhow::Result<Engine> {
    let corpus = Corpus::load(&cfg.corpus_path)?;
    let index = CorpusIndex::load(&cfg.index_path)?;
    Ok(Engine::new(corpus, index, cfg.clone())?)
}

struct Output {
    json: bool,
}

impl Output {
    fn emit<T: serde::Serialize>(&self, value: &T, text: impl FnOnce() -> String) -> anyhow::Result<()> {
        let mut stdout = std::io::stdout().lock();
        if self.json {
            serde_json::to_writer_pretty(&mut stdout, value)?;
            writeln!(stdout)?;
        } else {
            stdout.write_all(text().as_bytes())?;
        }
        Ok(())
    }
}

fn report_table(r: &SimilarityReport) -> String {
    let mut s = format!("{} vs {}\n", r.doc_a, r.doc_b);
    for m in Measure::ALL {
        let score = r.score(m);
        let note = match score {
            Score::NotApplicable(reason) => format!("  ({reason})"),
            Score::Value(_) if r.is_significant(m) => "  significant".to_string(),
            Score::Value(_) => String::new(),
        };
        s += &format!("  {:<6} {:>7}{note}\n", m.name(), score.to_string());
    }
    s += &format!(
        "  shared identifiers {}, identifier tiles {}, citation tiles {}, text pairs {}\n",
        r.shared_identifiers,
        r.identifier_tiles.len(),
        r.citation_tiles.len(),
        r.text_pairs
    );
    s
}

// ---------------------------------------------------------------------------
// ingest

fn collect_files(paths: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        let meta = fs::metadata(p).map_err(|e| Error::io(p, e))?;
        if meta.is_dir() {
            walk(p, &mut out).with_context(|| format!("reading {}", p.display()))?;
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let path = e.path();
        if e.file_type()?.is_dir() {
            walk(&path, out)?;
        } else if matches!(
            path.extension().and_then(|x| x.to_str()).map(str::to_ascii_lowercase).as_deref(),
            Some("xml" | "tei" | "json")
        ) {
            out.push(path);
        }
    }
    Ok(())
}

fn ingest(cfg: &RunConfig, out: &Output, paths: &[PathBuf], format: &str) -> anyhow::Result<ExitCode> {
    let format: DocFormat = format.parse()?;
    let files = collect_files(paths)?;
    if files.is_empty() {
        return Err(anyhow!(Usage("no .xml, .tei or .json files found".into())));
    }
    let mut docs: Vec<Document> = Vec::new();
    let mut seen = HashSet::new();
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    for f in &files {
        let result = read_document(f, format).and_then(|parsed| {
            let violations = validate(&parsed.document);
            if !violations.is_empty() {
                return Err(Error::Validation(violations));
            }
            if !seen.insert(parsed.document.doc_id.clone()) {
                return Err(Error::DuplicateDocument(parsed.document.doc_id));
            }
            Ok(parsed)
        });
        match result {
            Ok(parsed) => {
                for w in parsed.warnings {
                    warnings.push(json!({ "path": f, "warning": w }));
                }
                docs.push(parsed.document);
            }
            Err(e) => {
                eprintln!("warning: skipping {}: {e}", f.display());
                failures.push(json!({ "path": f, "error": e.to_string() }));
            }
        }
    }
    if docs.is_empty() {
        return Err(anyhow!("all {} input files failed to parse", files.len()));
    }
    let corpus = Corpus::build(docs, &cfg.consolidation)?;
    corpus.save(&cfg.corpus_path)?;
    let summary = corpus.summary();
    out.emit(
        &json!({
            "store": cfg.corpus_path,
            "files": files.len(),
            "documents": summary.documents,
            "failures": failures,
            "warnings": warnings,
            "summary": summary,
        }),
        || {
            let per = |t: usize| summary.per_document(t);
            format!(
                "ingested {} of {} files into {}\n\
                 {:<24} {:>10} {:>10}\n\
                 {:<24} {:>10} {:>10.1}\n\
                 {:<24} {:>10} {:>10.1}\n\
                 {:<24} {:>10} {:>10.1}\n\
                 {:<24} {:>10} {:>10.1}\n\
                 {:<24} {:>10} {:>10.1}\n\
                 {:<24} {:>10}\n",
                summary.documents,
                files.len(),
                cfg.corpus_path.display(),
                "feature",
                "total",
                "per doc",
                "references",
                summary.references,
                per(summary.references),
                "citations",
                summary.citations,
                per(summary.citations),
                "text fingerprints",
                summary.fingerprints,
                per(summary.fingerprints),
                "math identifiers",
                summary.identifiers,
                per(summary.identifiers),
                "identifier histogram",
                summary.histogram_entries,
                per(summary.histogram_entries),
                "distinct cited works",
                summary.distinct_cited_works
            )
        },
    )?;
    Ok(if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
