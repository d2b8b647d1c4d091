//! Corpus statistics per split and label.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::context::ContextDocument;
use crate::diff::{align, split_lines};
use crate::ingest::{CommitRecord, Split};
use crate::tokenize::count_tokens;

/// Averages over the commits of one group.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    /// `None` for the row covering the whole corpus or unassigned commits.
    pub split: Option<Split>,
    pub label: Option<bool>,
    pub commits: usize,
    pub projects: usize,
    pub mean_files: f64,
    pub mean_lines: f64,
    pub mean_tokens: f64,
    pub mean_changed_lines: f64,
    pub mean_changed_tokens: f64,
    pub mean_context_tokens: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub overall: StatsRow,
    pub groups: Vec<StatsRow>,
}

#[derive(Default)]
struct Acc<'a> {
    commits: usize,
    projects: BTreeSet<&'a str>,
    files: usize,
    lines: usize,
    tokens: usize,
    changed_lines: usize,
    changed_tokens: usize,
    context_tokens: usize,
}

struct CommitCounts {
    files: usize,
    lines: usize,
    tokens: usize,
    changed_lines: usize,
    changed_tokens: usize,
}

/// Size of the touched files, taken from the after side (before side for
/// deleted files), plus the deleted and added lines.
fn commit_counts(c: &CommitRecord) -> CommitCounts {
    let mut out = CommitCounts { files: c.file_changes.len(), lines: 0, tokens: 0, changed_lines: 0, changed_tokens: 0 };
    for f in &c.file_changes {
        let before = f.before.as_deref().unwrap_or("");
        let after = f.after.as_deref().unwrap_or("");
        let whole = f.after.as_deref().unwrap_or(before);
        out.lines += split_lines(whole).len();
        out.tokens += count_tokens(whole);
        let al = align(before, after);
        let (bl, alines) = (split_lines(before), split_lines(after));
        out.changed_lines += al.deleted.len() + al.added.len();
        out.changed_tokens += al.deleted.iter().map(|&i| count_tokens(bl[i - 1])).sum::<usize>();
        out.changed_tokens += al.added.iter().map(|&i| count_tokens(alines[i - 1])).sum::<usize>();
    }
    out
}

impl<'a> Acc<'a> {
    fn add(&mut self, c: &'a CommitRecord, k: &CommitCounts, doc: &ContextDocument) {
        self.commits += 1;
        self.projects.insert(&c.repo_id);
        self.files += k.files;
        self.lines += k.lines;
        self.tokens += k.tokens;
        self.changed_lines += k.changed_lines;
        self.changed_tokens += k.changed_tokens;
        self.context_tokens += doc.token_count;
    }

    fn row(&self, split: Option<Split>, label: Option<bool>) -> StatsRow {
        let mean = |x: usize| if self.commits == 0 { 0.0 } else { x as f64 / self.commits as f64 };
        StatsRow {
            split,
            label,
            commits: self.commits,
            projects: self.projects.len(),
            mean_files: mean(self.files),
            mean_lines: mean(self.lines),
            mean_tokens: mean(self.tokens),
            mean_changed_lines: mean(self.changed_lines),
            mean_changed_tokens: mean(self.changed_tokens),
            mean_context_tokens: mean(self.context_tokens),
        }
    }
}

pub fn stats(corpus: &[(CommitRecord, ContextDocument)]) -> CorpusStats {
    let mut overall = Acc::default();
    let mut groups: BTreeMap<(Option<Split>, Option<bool>), Acc> = BTreeMap::new();
    for (c, doc) in corpus {
        let k = commit_counts(c);
        overall.add(c, &k, doc);
        groups.entry((c.split, c.label)).or_default().add(c, &k, doc);
    }
    CorpusStats {
        overall: overall.row(None, None),
        groups: groups.iter().map(|(&(s, l), acc)| acc.row(s, l)).collect(),
    }
}

/// Plain-text table.
pub fn format_stats(s: &CorpusStats) -> String {
    let mut out = String::from("split       label  commits  files    lines     tokens    chg_lines chg_tokens ctx_tokens projects\n");
    let name = |s: Option<Split>| s.map_or("all".to_string(), |s| s.to_string());
    let label = |l: Option<bool>| match l {
        Some(true) => "pos",
        Some(false) => "neg",
        None => "-",
    };
    for r in s.groups.iter().chain([&s.overall]) {
        out.push_str(&format!(
            "{:<11} {:<6} {:<8} {:<8.2} {:<9.2} {:<9.2} {:<9.2} {:<10.2} {:<10.2} {}\n",
            name(r.split),
            label(r.label),
            r.commits,
            r.mean_files,
            r.mean_lines,
            r.mean_tokens,
            r.mean_changed_lines,
            r.mean_changed_tokens,
            r.mean_context_tokens,
            r.projects
        ));
    }
    out
}
