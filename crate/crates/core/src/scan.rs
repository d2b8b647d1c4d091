//! Rank the most recent commits of a repository by fix probability.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::DocScorer;
use crate::error::Result;
use crate::ingest::GitRepo;
use crate::pipeline::{build_context, ContextOptions};

/// Number of context lines quoted per reported commit.
const EXCERPT_LINES: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub rank: usize,
    pub commit: String,
    pub score: f64,
    pub message: String,
    pub excerpt: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanFailure {
    pub commit: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub repo: String,
    pub scanned: usize,
    pub entries: Vec<ScanEntry>,
    pub failures: Vec<ScanFailure>,
}

impl ScanReport {
    /// Some commits could not be scored.
    pub fn partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "scanned {} commits of {}, {} failed, top {}\n",
            self.scanned,
            self.repo,
            self.failures.len(),
            self.entries.len()
        );
        for e in &self.entries {
            out.push_str(&format!("\n#{} {} score={:.6}\n  {}\n", e.rank, e.commit, e.score, e.message));
            for l in e.excerpt.lines() {
                out.push_str("    ");
                out.push_str(l);
                out.push('\n');
            }
        }
        for f in &self.failures {
            out.push_str(&format!("\nskipped {}: {}\n", f.commit, f.error));
        }
        out
    }
}

fn excerpt(body: &str) -> String {
    body.lines().take(EXCERPT_LINES).collect::<Vec<_>>().join("\n")
}

/// Score the `n` most recent commits and keep the `k` best. Commits that
/// fail are logged and listed in the report instead of aborting the scan.
/// Ties keep history order, newest first.
pub fn scan(repo_root: &Path, n: usize, scorer: &dyn DocScorer, k: usize, opts: &ContextOptions) -> Result<ScanReport> {
    let repo = GitRepo::open(repo_root)?;
    let repo_id = repo_root.file_name().map_or_else(|| repo_root.display().to_string(), |s| s.to_string_lossy().into_owned());
    let commits = repo.recent_commits(n)?;
    let results: Vec<(String, Result<(f64, String, String)>)> = commits
        .par_iter()
        .map(|sha| {
            let r = repo.materialize(&repo_id, sha).and_then(|rec| {
                let ctx = build_context(&rec, opts);
                let score = scorer.score_document(&ctx.document)?;
                Ok((score, rec.message.lines().next().unwrap_or("").to_string(), excerpt(&ctx.document.body)))
            });
            (sha.clone(), r)
        })
        .collect();
    let mut scored = Vec::new();
    let mut failures = Vec::new();
    for (commit, r) in results {
        match r {
            Ok((score, message, excerpt)) => scored.push((commit, score, message, excerpt)),
            Err(e) => {
                log::warn!("skipping commit {commit}: {e}");
                failures.push(ScanFailure { commit, error: e.to_string() });
            }
        }
    }
    // stable sort keeps newest-first order among equal scores
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    let entries = scored
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (commit, score, message, excerpt))| ScanEntry { rank: i + 1, commit, score, message, excerpt })
        .collect();
    Ok(ScanReport { repo: repo_id, scanned: commits.len(), entries, failures })
}
