//! Labeled commit lists and commit materialization through the `git` CLI.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "validation" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!("unknown split {other:?}"))),
        }
    }
}

/// One file touched by a commit. `None` on a side means the file does not
/// exist there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilePair {
    pub path: String,
    pub before: Option<String>,
    pub after: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub repo_id: String,
    pub commit_id: String,
    pub message: String,
    pub file_changes: Vec<FilePair>,
    #[serde(default)]
    pub label: Option<bool>,
    #[serde(default)]
    pub split: Option<Split>,
}

/// One manifest line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub repo: String,
    pub commit: String,
    pub label: bool,
    pub split: Split,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetManifest {
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    /// Check that no repository spans two splits and no commit repeats
    /// within a repository.
    pub fn validate(&self) -> Result<()> {
        let mut splits: BTreeMap<&str, BTreeSet<Split>> = BTreeMap::new();
        let mut seen: BTreeSet<(&str, &str)> = BTreeSet::new();
        for r in &self.records {
            splits.entry(&r.repo).or_default().insert(r.split);
            if !seen.insert((&r.repo, &r.commit)) {
                return Err(Error::Validation(format!(
                    "commit {} appears twice in repository {}",
                    r.commit, r.repo
                )));
            }
        }
        for (repo, s) in splits {
            if s.len() > 1 {
                let names: Vec<&str> = s.iter().map(|s| s.as_str()).collect();
                return Err(Error::Validation(format!(
                    "repository {repo} appears in more than one split ({})",
                    names.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn label_of(&self, repo: &str, commit: &str) -> Option<&ManifestRecord> {
        self.records.iter().find(|r| r.repo == repo && r.commit == commit)
    }
}

/// Parse JSONL manifest text; `path` only labels errors.
pub fn parse_manifest(text: &str, path: &Path) -> Result<DatasetManifest> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: ManifestRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if rec.commit.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: "empty commit id".into(),
            });
        }
        records.push(rec);
    }
    let manifest = DatasetManifest { records };
    manifest.validate()?;
    Ok(manifest)
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(path)?;
    parse_manifest(&text, path)
}

pub fn write_manifest(path: &Path, manifest: &DatasetManifest) -> Result<()> {
    let mut out = String::new();
    for r in &manifest.records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// NUL byte within the first 8000 bytes.
pub fn is_binary(bytes: &[u8]) -> bool {
    bytes.iter().take(8000).any(|&b| b == 0)
}

/// A local clone accessed through the `git` executable.
#[derive(Debug, Clone)]
pub struct GitRepo {
    root: PathBuf,
}

impl GitRepo {
    pub fn open(root: &Path) -> Result<Self> {
        let repo = GitRepo { root: root.to_path_buf() };
        repo.git(&["rev-parse", "--git-dir"])
            .map_err(|e| Error::Git(format!("{} is not a git repository: {e}", root.display())))?;
        Ok(repo)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn git(&self, args: &[&str]) -> Result<Vec<u8>> {
        let out = Command::new("git")
            .arg("-C")
            .arg(&self.root)
            .args(args)
            .output()
            .map_err(|e| Error::Git(format!("cannot run git: {e}")))?;
        if !out.status.success() {
            return Err(Error::Git(format!(
                "git {} failed: {}",
                args.join(" "),
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        Ok(out.stdout)
    }

    fn git_text(&self, args: &[&str]) -> Result<String> {
        Ok(String::from_utf8_lossy(&self.git(args)?).into_owned())
    }

    /// Full hash of a commit-ish, or a lookup error.
    pub fn resolve(&self, rev: &str) -> Result<String> {
        self.git_text(&["rev-parse", "--verify", "--quiet", &format!("{rev}^{{commit}}")])
            .map(|s| s.trim().to_string())
            .map_err(|_| Error::Lookup {
                commit: rev.to_string(),
                message: "no such commit".into(),
            })
    }

    /// Most recent `n` commits reachable from HEAD, newest first.
    pub fn recent_commits(&self, n: usize) -> Result<Vec<String>> {
        if n == 0 {
            return Ok(Vec::new());
        }
        let out = self.git_text(&["rev-list", &format!("--max-count={n}"), "HEAD"])?;
        Ok(out.lines().map(str::to_string).collect())
    }

    fn empty_tree(&self) -> Result<String> {
        let out = Command::new("git")
            .arg("-C")
            .arg(&self.root)
            .args(["hash-object", "-t", "tree", "--stdin"])
            .stdin(std::process::Stdio::null())
            .output()
            .map_err(|e| Error::Git(format!("cannot run git: {e}")))?;
        Ok(String::from_utf8_lossy(&out.stdout).trim().to_string())
    }

    fn blob(&self, sha: &str) -> Result<Vec<u8>> {
        self.git(&["cat-file", "blob", sha])
    }

    /// Snapshot of a commit against its first parent (or the empty tree
    /// for a root commit). Binary files and mode-only changes are skipped.
    pub fn materialize(&self, repo_id: &str, commit: &str) -> Result<CommitRecord> {
        let sha = self.resolve(commit)?;
        let message = self.git_text(&["log", "-1", "--format=%B", &sha])?.trim_end().to_string();
        let parent = match self.git_text(&["rev-parse", "--verify", "--quiet", &format!("{sha}^1")]) {
            Ok(p) => p.trim().to_string(),
            Err(_) => self.empty_tree()?,
        };
        let raw = self.git(&["diff-tree", "-r", "-z", "--no-renames", "--no-commit-id", &parent, &sha])?;
        let mut fields = raw.split(|&b| b == 0).filter(|f| !f.is_empty());
        let mut file_changes = Vec::new();
        while let (Some(meta), Some(path)) = (fields.next(), fields.next()) {
            let meta = String::from_utf8_lossy(meta);
            let parts: Vec<&str> = meta.trim_start_matches(':').split_whitespace().collect();
            let [old_mode, new_mode, old_sha, new_sha, _status] = parts[..] else {
                return Err(Error::Git(format!("unexpected diff-tree record {meta:?}")));
            };
            // gitlinks (submodules) have no blob content
            if old_mode == "160000" || new_mode == "160000" {
                continue;
            }
            let read = |mode: &str, blob: &str| -> Result<Option<Vec<u8>>> {
                if mode == "000000" {
                    Ok(None)
                } else {
                    self.blob(blob).map(Some)
                }
            };
            let before = read(old_mode, old_sha)?;
            let after = read(new_mode, new_sha)?;
            if before.as_deref().is_some_and(is_binary) || after.as_deref().is_some_and(is_binary) {
                continue;
            }
            if before == after {
                continue;
            }
            let text = |b: Option<Vec<u8>>| b.map(|b| String::from_utf8_lossy(&b).into_owned());
            file_changes.push(FilePair {
                path: String::from_utf8_lossy(path).into_owned(),
                before: text(before),
                after: text(after),
            });
        }
        Ok(CommitRecord {
            repo_id: repo_id.to_string(),
            commit_id: sha,
            message,
            file_changes,
            label: None,
            split: None,
        })
    }
}

/// Materialize every manifest record from `repos_dir/<repo>`.
pub fn materialize_manifest(repos_dir: &Path, manifest: &DatasetManifest) -> Vec<Result<CommitRecord>> {
    let mut repos: BTreeMap<&str, Result<GitRepo>> = BTreeMap::new();
    manifest
        .records
        .iter()
        .map(|r| {
            let repo = repos
                .entry(r.repo.as_str())
                .or_insert_with(|| GitRepo::open(&repos_dir.join(&r.repo)));
            let repo = repo.as_ref().map_err(|e| Error::Git(e.to_string()))?;
            let mut rec = repo.materialize(&r.repo, &r.commit)?;
            rec.label = Some(r.label);
            rec.split = Some(r.split);
            Ok(rec)
        })
        .collect()
}

/// Write one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read one JSON object per non-blank line; errors carry the line number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_records(path: &Path, records: &[CommitRecord]) -> Result<()> {
    write_jsonl(path, records)
}

pub fn read_records(path: &Path) -> Result<Vec<CommitRecord>> {
    read_jsonl(path)
}
