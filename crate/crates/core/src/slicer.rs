//! Multi-granularity reduction of changed files.
//!
//! Methods are classified by their relation to the change: changed methods
//! keep only the statements in the bidirectional slice of their changed
//! statements, relevant methods collapse to stubs, and the rest disappear.
//! Fields and imports survive when the change or a kept statement needs
//! them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::diff::Alignment;
use crate::flow::{self, FlowGraph};
use crate::syntax::{doc_summary, MethodDecl, NodeId, NodeKind, SyntaxTree, TokenKind};

/// Changed line numbers of one file version (deleted lines for the old
/// version, added lines for the new one).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangedLines {
    pub lines: BTreeSet<usize>,
}

impl ChangedLines {
    pub fn new(lines: impl IntoIterator<Item = usize>) -> Self {
        ChangedLines { lines: lines.into_iter().collect() }
    }

    pub fn contains(&self, line: usize) -> bool {
        self.lines.contains(&line)
    }

    pub fn any_in(&self, from: usize, to: usize) -> bool {
        self.lines.range(from..=to).next().is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

/// Vertices of `graph` touched by the change: a statement counts when its
/// first line or any line of its own tokens changed. Field vertices never
/// seed a slice.
pub fn changed_vertices(graph: &FlowGraph, changed: &ChangedLines) -> BTreeSet<usize> {
    graph
        .vertices
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind != NodeKind::FieldDecl)
        .filter(|(_, v)| changed.contains(v.start_line) || v.own_lines.iter().any(|&l| changed.contains(l)))
        .map(|(i, _)| i)
        .collect()
}

/// Vertices reachable from `seeds` along `edges`, seeds included.
pub fn bfs(n: usize, edges: &BTreeSet<(usize, usize)>, seeds: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
    }
    let mut seen: BTreeSet<usize> = seeds.iter().copied().filter(|&s| s < n).collect();
    let mut queue: VecDeque<usize> = seen.iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Union of the forward closure over `E` and the backward closure over
/// `E^r` from the changed vertices.
pub fn bi_bfs_slice(graph: &FlowGraph, changed: &BTreeSet<usize>) -> BTreeSet<usize> {
    if changed.is_empty() {
        return BTreeSet::new();
    }
    let forwards = bfs(graph.len(), graph.forward_edges(), changed);
    let backwards = bfs(graph.len(), graph.backward_edges(), changed);
    forwards.union(&backwards).copied().collect()
}

/// Method keys (see [`MethodDecl::key`]) that decide each method's fate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Relevance {
    pub changed: BTreeSet<String>,
    pub relevant: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodRole {
    Sliced,
    Stub,
    Removed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedLine {
    pub text: String,
    /// Source line this output line was copied from; `None` for generated
    /// lines (stubs, doc summaries).
    pub origin: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedFile {
    pub path: String,
    pub text: String,
    pub lines: Vec<ReducedLine>,
    /// Stub text of every relevant unchanged method, in source order.
    pub stubs: Vec<String>,
}

impl ReducedFile {
    fn from_lines(path: &str, lines: Vec<ReducedLine>, stubs: Vec<String>) -> Self {
        let mut text = String::new();
        for l in &lines {
            text.push_str(&l.text);
            text.push('\n');
        }
        ReducedFile { path: path.to_string(), text, lines, stubs }
    }

    /// Source lines that survived reduction.
    pub fn kept_origins(&self) -> BTreeSet<usize> {
        self.lines.iter().filter_map(|l| l.origin).collect()
    }
}

/// Reduction plan of one file version.
struct Plan<'t> {
    tree: &'t SyntaxTree,
    roles: Vec<MethodRole>,
    /// Methods nested inside another method's span are handled by the
    /// outer one.
    nested: Vec<bool>,
    kept: BTreeSet<usize>,
    changed: ChangedLines,
}

impl<'t> Plan<'t> {
    fn new(tree: &'t SyntaxTree, changed: &ChangedLines, rel: &Relevance) -> Self {
        let methods = &tree.methods;
        let nested: Vec<bool> = methods
            .iter()
            .enumerate()
            .map(|(i, m)| {
                methods.iter().enumerate().any(|(j, o)| {
                    j != i && o.span.0 <= m.span.0 && m.span.1 <= o.span.1 && o.span != m.span
                })
            })
            .collect();
        let roles = methods
            .iter()
            .map(|m| {
                let key = m.key();
                let touched = changed.any_in(m.span.0, m.span.1)
                    || m.doc_span.is_some_and(|(a, b)| changed.any_in(a, b));
                if touched || rel.changed.contains(&key) {
                    MethodRole::Sliced
                } else if rel.relevant.contains(&key) {
                    MethodRole::Stub
                } else {
                    MethodRole::Removed
                }
            })
            .collect();
        Plan {
            tree,
            roles,
            nested,
            kept: BTreeSet::new(),
            changed: changed.clone(),
        }
    }

    fn top_methods(&self) -> impl Iterator<Item = (usize, &'t MethodDecl)> + '_ {
        let tree = self.tree;
        tree.methods.iter().enumerate().filter(move |(i, _)| !self.nested[*i])
    }

    /// Role of the method owning `line`, if any.
    fn role_at(&self, line: usize) -> Option<MethodRole> {
        self.top_methods()
            .find(|(_, m)| m.contains_line(line) || m.doc_span.is_some_and(|(a, b)| a <= line && line <= b))
            .map(|(i, _)| self.roles[i])
    }

    fn seed(&mut self) {
        let tree = self.tree;
        let mut kept: BTreeSet<usize> = self
            .changed
            .lines
            .iter()
            .copied()
            .filter(|&l| l >= 1 && l <= tree.line_count())
            .collect();
        let mut reached_fields: BTreeSet<NodeId> = BTreeSet::new();
        for (i, m) in self.top_methods() {
            if self.roles[i] != MethodRole::Sliced {
                continue;
            }
            kept.extend(m.span.0..=m.header_end_line);
            kept.insert(m.span.1);
            let graph = flow::build(tree, m);
            let seeds = changed_vertices(&graph, &self.changed);
            for v in bi_bfs_slice(&graph, &seeds) {
                let vertex = &graph.vertices[v];
                match vertex.kind {
                    NodeKind::FieldDecl => {
                        reached_fields.insert(vertex.node);
                    }
                    NodeKind::Statement => kept.extend(vertex.start_line..=vertex.end_line),
                    _ => kept.extend(structural_lines(tree, vertex.node)),
                }
            }
        }
        for f in &tree.fields {
            let n = tree.node(f.node);
            if reached_fields.contains(&f.node) || self.changed.any_in(n.start_line, n.end_line) {
                kept.extend(n.start_line..=n.end_line);
            }
        }
        self.kept = kept;
    }

    /// Add the lines that keep kept statements well nested: enclosing
    /// compound-statement headers and braces, whole multi-line statements,
    /// method headers and type headers.
    fn close_structure(&mut self) {
        let tree = self.tree;
        let mut extra = BTreeSet::new();
        for &line in &self.kept {
            if self.role_at(line) != Some(MethodRole::Sliced) {
                continue;
            }
            let Some(inner) = tree.innermost_at(line, |k| k.is_statement_like() || k == NodeKind::Catch) else {
                continue;
            };
            let n = tree.node(inner);
            if n.kind == NodeKind::Statement {
                extra.extend(n.start_line..=n.end_line);
            }
            for a in std::iter::once(inner).chain(tree.ancestors(inner)) {
                let kind = tree.node(a).kind;
                if kind == NodeKind::MethodDecl {
                    break;
                }
                if matches!(kind, NodeKind::If | NodeKind::Loop | NodeKind::Try | NodeKind::Catch) {
                    extra.extend(structural_lines(tree, a));
                }
            }
        }
        for (i, m) in self.top_methods() {
            if self.roles[i] == MethodRole::Sliced && self.kept.range(m.span.0..=m.span.1).next().is_some() {
                extra.extend(m.span.0..=m.header_end_line);
                extra.insert(m.span.1);
            }
        }
        self.kept.extend(extra);

        // innermost types first so that nesting propagates outwards
        let mut types: Vec<_> = tree.types.iter().collect();
        types.sort_by_key(|t| {
            let n = tree.node(t.node);
            n.end_line - n.start_line
        });
        for t in types {
            let n = tree.node(t.node);
            let has_stub = self
                .top_methods()
                .any(|(i, m)| self.roles[i] == MethodRole::Stub && n.start_line <= m.span.0 && m.span.1 <= t.close_line);
            let has_kept = self.kept.range(t.header_end_line + 1..t.close_line).next().is_some();
            if has_stub || has_kept {
                self.kept.extend(n.start_line..=t.header_end_line);
                self.kept.insert(t.close_line);
            }
        }
    }

    /// Keep imports whose simple name is used by kept code or stubs.
    fn keep_imports(&mut self) {
        let tree = self.tree;
        let mut used: BTreeSet<&str> = BTreeSet::new();
        for t in tree.tokens() {
            if t.kind == TokenKind::Ident && self.kept.contains(&t.line) {
                used.insert(t.text.as_str());
            }
        }
        let stub_words: Vec<String> = self
            .top_methods()
            .filter(|(i, _)| self.roles[*i] == MethodRole::Stub)
            .flat_map(|(_, m)| {
                m.signature_text
                    .split(|c: char| !(c.is_alphanumeric() || c == '_' || c == '$'))
                    .map(String::from)
                    .collect::<Vec<_>>()
            })
            .collect();
        used.extend(stub_words.iter().map(|s| s.as_str()));
        for imp in &tree.imports {
            let n = tree.node(imp.node);
            if imp.simple_name != "*" && used.contains(imp.simple_name.as_str()) {
                self.kept.extend(n.start_line..=n.end_line);
            }
        }
    }

    fn render(&self, path: &str) -> ReducedFile {
        let tree = self.tree;
        let mut starts: BTreeMap<usize, (usize, &MethodDecl)> = BTreeMap::new();
        for (i, m) in self.top_methods() {
            starts.insert(m.doc_span.map_or(m.span.0, |d| d.0.min(m.span.0)), (i, m));
        }
        let mut lines = Vec::new();
        let mut stubs = Vec::new();
        let mut line = 1;
        while line <= tree.line_count() {
            if let Some(&(i, m)) = starts.get(&line) {
                let indent = leading_ws(tree.line(m.span.0).unwrap_or_default());
                let summary = m.annotation_text.as_deref().and_then(doc_summary);
                match self.roles[i] {
                    MethodRole::Removed => {
                        line = m.span.1 + 1;
                        continue;
                    }
                    MethodRole::Stub => {
                        for s in m.stub_lines() {
                            lines.push(ReducedLine { text: format!("{indent}{s}"), origin: None });
                        }
                        stubs.push(m.stub_lines().join("\n"));
                        line = m.span.1 + 1;
                        continue;
                    }
                    MethodRole::Sliced => {
                        if let Some(s) = summary {
                            lines.push(ReducedLine { text: format!("{indent}{s}"), origin: None });
                        }
                        // the original doc comment only survives where it changed
                        if let Some((a, b)) = m.doc_span {
                            for l in a..=b.min(m.span.0.saturating_sub(1)) {
                                if self.kept.contains(&l) {
                                    lines.push(ReducedLine { text: tree.line(l).unwrap_or_default().to_string(), origin: Some(l) });
                                }
                            }
                            line = b.max(line) + 1;
                            continue;
                        }
                    }
                }
            }
            if self.kept.contains(&line) {
                lines.push(ReducedLine { text: tree.line(line).unwrap_or_default().to_string(), origin: Some(line) });
            }
            line += 1;
        }
        ReducedFile::from_lines(path, lines, stubs)
    }
}

fn leading_ws(s: &str) -> &str {
    &s[..s.len() - s.trim_start().len()]
}

/// Header, connector and closing lines of a compound statement, without
/// the statements nested inside it.
fn structural_lines(tree: &SyntaxTree, id: NodeId) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let n = tree.node(id);
    if n.kind == NodeKind::Statement {
        out.extend(n.start_line..=n.end_line);
        return out;
    }
    out.insert(n.start_line);
    out.insert(n.end_line);
    out.extend(tree.own_tokens(id).iter().filter(|t| !t.kind.is_comment()).map(|t| t.line));
    for &c in &n.children {
        let child = tree.node(c);
        match child.kind {
            NodeKind::Block => {
                out.insert(child.start_line);
                out.insert(child.end_line);
            }
            NodeKind::Catch => out.extend(structural_lines(tree, c)),
            _ => {}
        }
    }
    out
}

/// Reduce one file version on its own.
pub fn reduce_file(path: &str, tree: &SyntaxTree, changed: &ChangedLines, rel: &Relevance) -> ReducedFile {
    let mut plan = Plan::new(tree, changed, rel);
    plan.seed();
    plan.close_structure();
    plan.keep_imports();
    plan.close_structure();
    plan.render(path)
}

/// Reduce both versions of a changed file. Unchanged lines kept on one
/// side are kept on the other as well, so the reduced pair differs only
/// where the originals do.
pub fn reduce_pair(
    path: &str,
    before: &SyntaxTree,
    after: &SyntaxTree,
    alignment: &Alignment,
    rel: &Relevance,
) -> (ReducedFile, ReducedFile) {
    let mut b = Plan::new(before, &ChangedLines::new(alignment.deleted.iter().copied()), rel);
    let mut a = Plan::new(after, &ChangedLines::new(alignment.added.iter().copied()), rel);
    // unify roles by key so both versions treat a method the same way
    unify_roles(&mut b, &mut a);
    b.seed();
    a.seed();
    for _ in 0..8 {
        let before_len = (b.kept.len(), a.kept.len());
        b.close_structure();
        a.close_structure();
        b.keep_imports();
        a.keep_imports();
        sync(&mut b, &mut a, alignment);
        if (b.kept.len(), a.kept.len()) == before_len {
            break;
        }
    }
    (b.render(path), a.render(path))
}

fn unify_roles(b: &mut Plan<'_>, a: &mut Plan<'_>) {
    let mut best: BTreeMap<String, MethodRole> = BTreeMap::new();
    for (tree, roles) in [(b.tree, &b.roles), (a.tree, &a.roles)] {
        for (m, &r) in tree.methods.iter().zip(roles) {
            let slot = best.entry(m.key()).or_insert(r);
            *slot = strongest(*slot, r);
        }
    }
    for (tree, roles) in [(b.tree, &mut b.roles), (a.tree, &mut a.roles)] {
        for (m, r) in tree.methods.iter().zip(roles.iter_mut()) {
            *r = best[&m.key()];
        }
    }
}

fn strongest(x: MethodRole, y: MethodRole) -> MethodRole {
    use MethodRole::*;
    match (x, y) {
        (Sliced, _) | (_, Sliced) => Sliced,
        (Stub, _) | (_, Stub) => Stub,
        _ => Removed,
    }
}

fn sync(b: &mut Plan<'_>, a: &mut Plan<'_>, alignment: &Alignment) {
    for &(lb, la) in &alignment.equal {
        let kb = b.kept.contains(&lb);
        let ka = a.kept.contains(&la);
        if kb && !ka && accepts(a, la) {
            a.kept.insert(la);
        } else if ka && !kb && accepts(b, lb) {
            b.kept.insert(lb);
        }
    }
}

/// Lines inside stubbed or removed methods are never copied verbatim.
fn accepts(plan: &Plan<'_>, line: usize) -> bool {
    matches!(plan.role_at(line), None | Some(MethodRole::Sliced))
}
