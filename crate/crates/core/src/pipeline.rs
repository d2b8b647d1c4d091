//! Commit to context document: filter files, reduce, diff, expand, render,
//! truncate.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::callgraph::CallGraph;
use crate::context::{
    assemble, expand, merge_and_render, width_order, with_constant_width, BoundaryPolicy, Budget, ContextDocument,
};
use crate::diff::{align, diff, Alignment};
use crate::flow;
use crate::ingest::{CommitRecord, FilePair, Split};
use crate::slicer::{reduce_pair, ReducedFile, Relevance};
use crate::syntax::{classify_file, parse, FileScope, SyntaxTree};

/// How hunk context widths are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "width")]
pub enum WidthMode {
    /// Block-complete boundary search up to `max_width`.
    Adaptive,
    /// The same width around every hunk.
    Constant(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextOptions {
    pub max_width: usize,
    pub budget: Budget,
    pub policy: BoundaryPolicy,
    pub width_mode: WidthMode,
}

impl Default for ContextOptions {
    fn default() -> Self {
        ContextOptions {
            max_width: 5,
            budget: Budget::default(),
            policy: BoundaryPolicy::Argmax,
            width_mode: WidthMode::Adaptive,
        }
    }
}

/// Intermediate results of one commit, kept for inspection.
#[derive(Debug, Clone, Default)]
pub struct CommitContext {
    pub document: ContextDocument,
    /// Reduced (before, after) pairs of the in-scope files.
    pub reduced: Vec<(ReducedFile, ReducedFile)>,
    pub rendered: Vec<String>,
}

struct Version {
    trees: Vec<SyntaxTree>,
}

fn in_scope(pair: &FilePair) -> bool {
    classify_file(&pair.path, "") == FileScope::InScope
}

/// Method keys of one version that the change touches, per file, and the
/// keys relevant to them through the call graph.
fn relevance(version: &Version, changed_lines: &[BTreeSet<usize>]) -> Vec<Relevance> {
    let refs: Vec<&SyntaxTree> = version.trees.iter().collect();
    let cg = CallGraph::build(&refs);
    let changed: BTreeSet<usize> = cg
        .methods
        .iter()
        .enumerate()
        .filter(|(_, m)| {
            let lines = &changed_lines[m.file];
            let (a, b) = m.decl.doc_span.map_or(m.decl.span, |d| (d.0.min(m.decl.span.0), m.decl.span.1));
            lines.range(a..=b).next().is_some()
        })
        .map(|(i, _)| i)
        .collect();
    let relevant = cg.relevant_methods(&changed);
    let mut out = vec![Relevance::default(); version.trees.len()];
    for &i in &relevant {
        let m = &cg.methods[i];
        let key = m.decl.key();
        if changed.contains(&i) {
            out[m.file].changed.insert(key);
        } else {
            out[m.file].relevant.insert(key);
        }
    }
    out
}

/// Reduce every in-scope file pair of a commit.
pub fn reduce_commit(commit: &CommitRecord) -> Vec<(ReducedFile, ReducedFile)> {
    let pairs: Vec<&FilePair> = commit.file_changes.iter().filter(|p| in_scope(p)).collect();
    let texts: Vec<(&str, &str)> = pairs
        .iter()
        .map(|p| (p.before.as_deref().unwrap_or(""), p.after.as_deref().unwrap_or("")))
        .collect();
    let alignments: Vec<Alignment> = texts.par_iter().map(|(b, a)| align(b, a)).collect();
    let before = Version { trees: texts.par_iter().map(|(b, _)| parse(b)).collect() };
    let after = Version { trees: texts.par_iter().map(|(_, a)| parse(a)).collect() };
    let deleted: Vec<BTreeSet<usize>> = alignments.iter().map(|a| a.deleted.clone()).collect();
    let added: Vec<BTreeSet<usize>> = alignments.iter().map(|a| a.added.clone()).collect();
    let rel_b = relevance(&before, &deleted);
    let rel_a = relevance(&after, &added);
    (0..pairs.len())
        .into_par_iter()
        .map(|i| {
            let rel = Relevance {
                changed: rel_b[i].changed.union(&rel_a[i].changed).cloned().collect(),
                relevant: rel_b[i].relevant.union(&rel_a[i].relevant).cloned().collect(),
            };
            reduce_pair(&pairs[i].path, &before.trees[i], &after.trees[i], &alignments[i], &rel)
        })
        .collect()
}

/// Render one reduced pair: expanded hunks, then the stubs of relevant
/// methods.
pub fn render_reduced(b: &ReducedFile, a: &ReducedFile, opts: &ContextOptions) -> String {
    let hunks = diff(&b.text, &a.text);
    let expanded: Vec<_> = match opts.width_mode {
        WidthMode::Adaptive => {
            let (bt, at) = (parse(&b.text), parse(&a.text));
            let order = width_order(opts.max_width);
            hunks.iter().map(|h| expand(h, &bt, &at, &order, opts.policy)).collect()
        }
        WidthMode::Constant(w) => hunks.iter().map(|h| with_constant_width(h, w)).collect(),
    };
    let mut out = merge_and_render(&expanded, &b.text, &a.text, &a.path);
    let stubs: Vec<&String> = if a.stubs.is_empty() { b.stubs.iter().collect() } else { a.stubs.iter().collect() };
    if !out.is_empty() && !stubs.is_empty() {
        for s in stubs {
            out.push('\n');
            out.push_str(s);
            out.push('\n');
        }
    }
    out
}

/// One line of a contexts file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextRecord {
    pub repo: String,
    pub commit: String,
    #[serde(default)]
    pub label: Option<bool>,
    #[serde(default)]
    pub split: Option<Split>,
    pub document: ContextDocument,
}

impl ContextRecord {
    pub fn new(commit: &CommitRecord, document: ContextDocument) -> Self {
        ContextRecord {
            repo: commit.repo_id.clone(),
            commit: commit.commit_id.clone(),
            label: commit.label,
            split: commit.split,
            document,
        }
    }
}

/// Build documents for many commits on the current rayon pool.
pub fn build_contexts(commits: &[CommitRecord], opts: &ContextOptions) -> Vec<ContextRecord> {
    commits.par_iter().map(|c| ContextRecord::new(c, build_context(c, opts).document)).collect()
}

pub fn build_context(commit: &CommitRecord, opts: &ContextOptions) -> CommitContext {
    let reduced = reduce_commit(commit);
    let rendered: Vec<String> = reduced.iter().map(|(b, a)| render_reduced(b, a, opts)).collect();
    let document = assemble(&commit.message, &rendered, opts.budget);
    CommitContext { document, reduced, rendered }
}

/// DOT dumps of the flow graphs of every method touched by the commit,
/// named `path::method`.
pub fn flow_graph_dots(commit: &CommitRecord) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for pair in commit.file_changes.iter().filter(|p| in_scope(p)) {
        let b = pair.before.as_deref().unwrap_or("");
        let a = pair.after.as_deref().unwrap_or("");
        let al = align(b, a);
        for (text, lines) in [(a, &al.added), (b, &al.deleted)] {
            let tree = parse(text);
            for m in &tree.methods {
                if lines.range(m.span.0..=m.span.1).next().is_none() {
                    continue;
                }
                let name = format!("{}::{}", pair.path, m.key());
                if out.iter().any(|(n, _)| n == &name) {
                    continue;
                }
                let dot = flow::build(&tree, m).to_dot(&name);
                out.push((name, dot));
            }
        }
    }
    out
}
