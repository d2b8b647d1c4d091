//! Command-line front end: ingest, context, train, score, eval, stats, scan.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};
use vfix_core::classifier::{score, train_documents, ClassifierHead, DocScorer, LocalScorer, RemoteScorer};
use vfix_core::config::Config;
use vfix_core::context::BoundaryPolicy;
use vfix_core::eval::{evaluate, format_reports, ScoredCommit};
use vfix_core::ingest::{
    load_manifest, materialize_manifest, read_jsonl, read_records, write_jsonl, write_manifest, write_records, GitRepo,
    Split,
};
use vfix_core::pipeline::{build_contexts, flow_graph_dots, ContextRecord};
use vfix_core::scan::scan;
use vfix_core::stats::{format_stats, stats};
use vfix_core::synth::{generate_corpus, generate_scan_repo, SynthConfig};
use vfix_core::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(name = "vfix", version, about = "Vulnerability-fix commit scoring with comprehensive change contexts")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Global {
    /// TOML or JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory holding one clone per repository id.
    #[arg(long, global = true, default_value = ".")]
    repos_dir: PathBuf,
    #[arg(long, global = true)]
    max_width: Option<usize>,
    /// Token window of the classifier input.
    #[arg(long, global = true)]
    window: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_parser = parse_policy)]
    boundary_policy: Option<BoundaryPolicy>,
    /// Log verbosity (error, warn, info, debug).
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
}

fn parse_policy(s: &str) -> Result<BoundaryPolicy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Subcommand)]
enum Cmd {
    /// Materialize the commits of a manifest into a commits file.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build context documents for every commit of a commits file.
    Context {
        #[arg(long)]
        commits: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Use this fixed hunk context instead of the adaptive search.
        #[arg(long)]
        constant_width: Option<usize>,
        /// Also write each document as text into this directory.
        #[arg(long)]
        text_dir: Option<PathBuf>,
        /// Write DOT flow graphs of changed methods into this directory.
        #[arg(long)]
        dot_dir: Option<PathBuf>,
    },
    /// Train a head on the train split of a contexts file.
    Train {
        #[arg(long)]
        contexts: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "train")]
        split: Split,
    },
    /// Score every document of a contexts file.
    Score {
        #[arg(long)]
        contexts: PathBuf,
        /// Trained head; omit to use the remote scorer from the config.
        #[arg(long)]
        head: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-split metrics of a scores file against a manifest.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Corpus statistics per split and label.
    Stats {
        #[arg(long)]
        commits: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Rank the most recent commits of a repository.
    Scan {
        #[arg(long)]
        repo: PathBuf,
        #[arg(short, long, default_value_t = 500)]
        n: usize,
        #[arg(short, long, default_value_t = 10)]
        k: usize,
        /// Trained head; omit to use the remote scorer from the config.
        #[arg(long)]
        head: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Generate the planted synthetic corpus and a fresh scan repository.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 12)]
        repos: usize,
        #[arg(long, default_value_t = 20)]
        commits_per_repo: usize,
    },
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let code = match error.downcast_ref::<Error>() {
            Some(Error::Config(_)) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Failure { code, error }
    }
}

type Outcome = Result<u8, Failure>;

fn config(g: &Global) -> Result<Config, Failure> {
    let mut c = match &g.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(v) = g.max_width {
        c.max_width = v;
    }
    if let Some(v) = g.window {
        c.window = v;
    }
    if let Some(v) = g.seed {
        c.seed = v;
    }
    if let Some(v) = g.threads {
        c.threads = v;
    }
    if let Some(v) = g.boundary_policy {
        c.boundary_policy = v;
    }
    c.validate()?;
    Ok(c)
}

fn scorer(cfg: &Config, head: Option<&Path>) -> Result<Box<dyn DocScorer>, Failure> {
    match (head, &cfg.remote) {
        (Some(p), _) => {
            let head = ClassifierHead::load(p).with_context(|| format!("loading head {}", p.display()))?;
            Ok(Box::new(LocalScorer { encoder: cfg.encoder(), head }))
        }
        (None, Some(remote)) => Ok(Box::new(RemoteScorer::new(remote.clone()))),
        (None, None) => Err(Failure {
            code: EXIT_USAGE,
            error: anyhow::anyhow!("pass --head or configure a remote scorer"),
        }),
    }
}

fn file_stem(repo: &str, commit: &str) -> String {
    let short = &commit[..commit.len().min(12)];
    format!("{}_{short}", repo.replace(['/', '\\'], "_"))
}

fn run(cli: Cli) -> Outcome {
    let cfg = config(&cli.global)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global().ok();
    }
    match cli.command {
        Cmd::Ingest { manifest, out } => {
            let manifest = load_manifest(&manifest).with_context(|| format!("reading {}", manifest.display()))?;
            let mut records = Vec::new();
            let mut failed = 0;
            for (r, m) in materialize_manifest(&cli.global.repos_dir, &manifest).into_iter().zip(&manifest.records) {
                match r {
                    Ok(rec) => records.push(rec),
                    Err(e) => {
                        failed += 1;
                        log::error!("{}@{}: {e}", m.repo, m.commit);
                    }
                }
            }
            write_records(&out, &records)?;
            eprintln!("materialized {} commits, {failed} failed", records.len());
            Ok(if failed > 0 { EXIT_PARTIAL } else { 0 })
        }
        Cmd::Context { commits, out, constant_width, text_dir, dot_dir } => {
            let records = read_records(&commits).with_context(|| format!("reading {}", commits.display()))?;
            let mut cfg = cfg;
            if constant_width.is_some() {
                cfg.constant_width = constant_width;
            }
            let contexts = build_contexts(&records, &cfg.context_options());
            write_jsonl(&out, &contexts)?;
            if let Some(dir) = text_dir {
                std::fs::create_dir_all(&dir)?;
                for c in &contexts {
                    std::fs::write(dir.join(file_stem(&c.repo, &c.commit) + ".txt"), c.document.to_file_text())?;
                }
            }
            if let Some(dir) = dot_dir {
                std::fs::create_dir_all(&dir)?;
                for r in &records {
                    for (i, (name, dot)) in flow_graph_dots(r).into_iter().enumerate() {
                        log::debug!("flow graph {name}");
                        std::fs::write(dir.join(format!("{}_{i}.dot", file_stem(&r.repo_id, &r.commit_id))), dot)?;
                    }
                }
            }
            eprintln!("wrote {} contexts", contexts.len());
            Ok(0)
        }
        Cmd::Train { contexts, out, split } => {
            let records: Vec<ContextRecord> = read_jsonl(&contexts).with_context(|| format!("reading {}", contexts.display()))?;
            let docs: Vec<_> = records
                .into_iter()
                .filter(|r| r.split == Some(split))
                .filter_map(|r| r.label.map(|l| (r.document, l)))
                .collect();
            if docs.is_empty() {
                return Err(Error::Validation(format!("no labeled {split} documents in {}", contexts.display())).into());
            }
            let report = train_documents(&docs, &cfg.encoder(), &cfg.train_config())?;
            report.head.save(&out)?;
            for (i, l) in report.epoch_losses.iter().enumerate() {
                eprintln!("epoch {:>3}  loss {l:.6}", i + 1);
            }
            Ok(0)
        }
        Cmd::Score { contexts, head, out } => {
            let records: Vec<ContextRecord> = read_jsonl(&contexts).with_context(|| format!("reading {}", contexts.display()))?;
            let scored: Vec<Result<f64, Error>> = match head {
                Some(p) => {
                    let head = ClassifierHead::load(&p)?;
                    let enc = cfg.encoder();
                    use rayon::prelude::*;
                    records.par_iter().map(|r| score(&r.document, &enc, &head)).collect()
                }
                None => {
                    let remote = cfg.remote.clone().ok_or_else(|| Failure {
                        code: EXIT_USAGE,
                        error: anyhow::anyhow!("pass --head or configure a remote scorer"),
                    })?;
                    let docs: Vec<_> = records.iter().map(|r| r.document.clone()).collect();
                    RemoteScorer::new(remote).score_many(&docs)?.into_iter().map(|r| r.map(|s| s.score)).collect()
                }
            };
            let mut out_rows = Vec::new();
            let mut failed = 0;
            for (r, s) in records.iter().zip(scored) {
                match s {
                    Ok(score) => out_rows.push(ScoredCommit { repo: r.repo.clone(), commit: r.commit.clone(), score }),
                    Err(e @ Error::Config(_)) => return Err(e.into()),
                    Err(e) => {
                        failed += 1;
                        log::error!("{}@{}: {e}", r.repo, r.commit);
                    }
                }
            }
            write_jsonl(&out, &out_rows)?;
            Ok(if failed > 0 { EXIT_PARTIAL } else { 0 })
        }
        Cmd::Eval { manifest, scores, json } => {
            let manifest = load_manifest(&manifest).with_context(|| format!("reading {}", manifest.display()))?;
            let scores: Vec<ScoredCommit> = read_jsonl(&scores).with_context(|| format!("reading {}", scores.display()))?;
            let reports = evaluate(&manifest, &scores)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&reports)?);
            } else {
                print!("{}", format_reports(&reports));
            }
            Ok(0)
        }
        Cmd::Stats { commits, json } => {
            let records = read_records(&commits).with_context(|| format!("reading {}", commits.display()))?;
            let contexts = build_contexts(&records, &cfg.context_options());
            let corpus: Vec<_> = records.into_iter().zip(contexts.into_iter().map(|c| c.document)).collect();
            let s = stats(&corpus);
            if json {
                println!("{}", serde_json::to_string_pretty(&s)?);
            } else {
                print!("{}", format_stats(&s));
            }
            Ok(0)
        }
        Cmd::Scan { repo, n, k, head, json } => {
            let scorer = scorer(&cfg, head.as_deref())?;
            GitRepo::open(&repo)?;
            let report = scan(&repo, n, scorer.as_ref(), k, &cfg.context_options())?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.to_text());
            }
            Ok(if report.partial() { EXIT_PARTIAL } else { 0 })
        }
        Cmd::Synth { out, repos, commits_per_repo } => {
            let sc = SynthConfig {
                repos,
                commits_per_repo,
                test_repos: (repos / 4).max(1),
                validation_repos: usize::from(repos >= 4),
                seed: cfg.seed,
                ..Default::default()
            };
            let repos_dir = out.join("repos");
            let manifest = generate_corpus(&repos_dir, &sc)?;
            write_manifest(&out.join("manifest.jsonl"), &manifest)?;
            let planted = generate_scan_repo(&out.join("scan-repo"), 10, cfg.seed.wrapping_add(1))?;
            println!("corpus: {} commits in {}", manifest.records.len(), repos_dir.display());
            println!("scan repository: {} (planted fix {planted})", out.join("scan-repo").display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    env_logger::Builder::new().parse_filters(&cli.global.log_level).format_timestamp(None).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
