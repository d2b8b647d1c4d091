//! Syntax model for the analyzed Java-like language.
//!
//! Trees are stored as an arena of [`SyntaxNode`]s. Every node carries a
//! 1-based inclusive line span and its depth (root = 0). The parser never
//! fails: anything it does not understand becomes an opaque `statement`
//! node covering the offending lines.

pub mod lexer;
mod parser;

pub(crate) use parser::declarators;

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use lexer::{Token, TokenKind};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    CompilationUnit,
    Import,
    TypeDecl,
    FieldDecl,
    MethodDecl,
    Block,
    If,
    Loop,
    Try,
    Catch,
    Statement,
    Comment,
    Annotation,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::CompilationUnit => "compilation_unit",
            NodeKind::Import => "import",
            NodeKind::TypeDecl => "type_decl",
            NodeKind::FieldDecl => "field_decl",
            NodeKind::MethodDecl => "method_decl",
            NodeKind::Block => "block",
            NodeKind::If => "if",
            NodeKind::Loop => "loop",
            NodeKind::Try => "try",
            NodeKind::Catch => "catch",
            NodeKind::Statement => "statement",
            NodeKind::Comment => "comment",
            NodeKind::Annotation => "annotation",
        }
    }

    /// Kinds that become vertices of a method's flow graph.
    pub fn is_statement_like(self) -> bool {
        matches!(self, NodeKind::Statement | NodeKind::If | NodeKind::Loop | NodeKind::Try)
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxNode {
    pub kind: NodeKind,
    pub start_line: usize,
    pub end_line: usize,
    pub depth: usize,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
    /// Token index range covered by this node.
    pub tokens: Range<usize>,
}

/// Score of a line for boundary selection: the minimal depth of nodes
/// starting there, or `Infinite` when none does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LineDepth {
    Finite(usize),
    Infinite,
}

impl fmt::Display for LineDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LineDepth::Finite(d) => write!(f, "{d}"),
            LineDepth::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodDecl {
    pub node: NodeId,
    /// Simple name of the enclosing type, empty at top level.
    pub owner: String,
    pub name: String,
    pub parameter_count: usize,
    /// Declared parameter types, `None` where the type is not deterministic
    /// (type variables, varargs element types).
    pub parameter_types: Vec<Option<String>>,
    pub parameter_names: Vec<String>,
    pub varargs: bool,
    pub signature_text: String,
    pub annotation_text: Option<String>,
    /// Lines of the leading documentation comment.
    pub doc_span: Option<(usize, usize)>,
    pub body: Option<NodeId>,
    pub span: (usize, usize),
    /// Last line of the signature (the line holding the body's `{`).
    pub header_end_line: usize,
}

impl MethodDecl {
    /// Body-less rendering: one-line doc summary (if any), then the
    /// signature with an empty body.
    pub fn stub_lines(&self) -> Vec<String> {
        let mut lines = Vec::with_capacity(2);
        if let Some(doc) = self.annotation_text.as_deref().and_then(doc_summary) {
            lines.push(doc);
        }
        lines.push(format!("{} {{}}", self.signature_text));
        lines
    }

    /// Identity used to pair a method across file versions.
    pub fn key(&self) -> String {
        let types: Vec<&str> = self
            .parameter_types
            .iter()
            .map(|t| t.as_deref().unwrap_or("?"))
            .collect();
        format!("{}::{}({})", self.owner, self.name, types.join(","))
    }

    pub fn contains_line(&self, line: usize) -> bool {
        self.span.0 <= line && line <= self.span.1
    }
}

/// `annotation_text`'s first meaningful line plus the signature and `{}`.
pub fn stub(method: &MethodDecl) -> String {
    method.stub_lines().join(" ")
}

/// First non-empty content line of a comment, rewrapped as `/* ... */`.
pub fn doc_summary(comment: &str) -> Option<String> {
    let body = comment
        .trim()
        .trim_start_matches("/**")
        .trim_start_matches("/*")
        .trim_end_matches("*/");
    body.lines()
        .map(|l| l.trim().trim_start_matches('*').trim())
        .find(|l| !l.is_empty())
        .map(|l| format!("/* {l} */"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub node: NodeId,
    pub name: String,
    /// Line holding the body's opening brace.
    pub header_end_line: usize,
    /// Line holding the body's closing brace.
    pub close_line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub node: NodeId,
    pub owner: String,
    pub declared_type: String,
    pub names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportDecl {
    pub node: NodeId,
    pub path: String,
    /// Last path segment (`*` for wildcard imports).
    pub simple_name: String,
}

#[derive(Debug, Clone)]
pub struct SyntaxTree {
    source: String,
    line_starts: Vec<usize>,
    tokens: Vec<Token>,
    nodes: Vec<SyntaxNode>,
    line_min_depth: Vec<Option<usize>>,
    pub methods: Vec<MethodDecl>,
    pub types: Vec<TypeDecl>,
    pub fields: Vec<FieldDecl>,
    pub imports: Vec<ImportDecl>,
}

pub const ROOT: NodeId = 0;

pub fn parse(source: &str) -> SyntaxTree {
    parser::parse(source)
}

/// Parse arbitrary bytes, replacing invalid UTF-8.
pub fn parse_bytes(bytes: &[u8]) -> SyntaxTree {
    parse(&String::from_utf8_lossy(bytes))
}

impl SyntaxTree {
    pub fn root(&self) -> &SyntaxNode {
        &self.nodes[ROOT]
    }

    pub fn node(&self, id: NodeId) -> &SyntaxNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[SyntaxNode] {
        &self.nodes
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn node_tokens(&self, id: NodeId) -> &[Token] {
        &self.tokens[self.nodes[id].tokens.clone()]
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn line_count(&self) -> usize {
        self.line_starts.len()
    }

    /// Text of a 1-based line without its terminator.
    pub fn line(&self, line: usize) -> Option<&str> {
        if line == 0 || line > self.line_starts.len() {
            return None;
        }
        let start = self.line_starts[line - 1];
        let end = self
            .line_starts
            .get(line)
            .map_or(self.source.len(), |next| next - 1);
        let text = &self.source[start..end];
        Some(text.strip_suffix('\n').unwrap_or(text).trim_end_matches('\r'))
    }

    pub fn lines(&self) -> impl Iterator<Item = &str> {
        (1..=self.line_count()).filter_map(|l| self.line(l))
    }

    /// Byte offset where a 1-based line starts.
    pub fn line_offset(&self, line: usize) -> Option<usize> {
        line.checked_sub(1).and_then(|i| self.line_starts.get(i)).copied()
    }

    /// Minimal depth over non-root nodes whose span starts at `line`.
    pub fn min_depth_at(&self, line: usize) -> LineDepth {
        match line
            .checked_sub(1)
            .and_then(|i| self.line_min_depth.get(i))
            .copied()
            .flatten()
        {
            Some(d) => LineDepth::Finite(d),
            None => LineDepth::Infinite,
        }
    }

    /// Innermost node whose span contains `line`, restricted to kinds
    /// accepted by `filter`.
    pub fn innermost_at(&self, line: usize, filter: impl Fn(NodeKind) -> bool) -> Option<NodeId> {
        let mut best: Option<NodeId> = None;
        let mut current = ROOT;
        loop {
            let next = self.nodes[current].children.iter().copied().find(|&c| {
                let n = &self.nodes[c];
                n.start_line <= line && line <= n.end_line
            });
            match next {
                Some(c) => {
                    if filter(self.nodes[c].kind) {
                        best = Some(c);
                    }
                    current = c;
                }
                None => return best,
            }
        }
    }

    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.nodes[id].parent, move |&p| self.nodes[p].parent)
    }

    /// All node ids in the subtree of `id` (pre-order, `id` included).
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.nodes[n].children.iter().rev());
        }
        out
    }

    /// Tokens of `id` that do not belong to any child node.
    pub fn own_tokens(&self, id: NodeId) -> Vec<&Token> {
        let node = &self.nodes[id];
        let mut out = Vec::new();
        let mut pos = node.tokens.start;
        for &c in &node.children {
            let child = &self.nodes[c].tokens;
            out.extend(self.tokens[pos..child.start].iter());
            pos = child.end;
        }
        out.extend(self.tokens[pos.min(node.tokens.end)..node.tokens.end].iter());
        out
    }

    pub fn method_at(&self, line: usize) -> Option<&MethodDecl> {
        self.methods
            .iter()
            .filter(|m| m.contains_line(line))
            .min_by_key(|m| m.span.1 - m.span.0)
    }

    pub fn method_by_node(&self, node: NodeId) -> Option<&MethodDecl> {
        self.methods.iter().find(|m| m.node == node)
    }

    /// Enclosing type name of a node, empty at top level.
    pub fn owner_of(&self, id: NodeId) -> String {
        self.ancestors(id)
            .find_map(|a| self.types.iter().find(|t| t.node == a))
            .map(|t| t.name.clone())
            .unwrap_or_default()
    }
}

/// Whether a path belongs to the analyzed language and is not test code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileScope {
    InScope,
    OutOfScope,
}

pub const SOURCE_EXTENSION: &str = "java";

pub fn classify_file(path: &str, _source: &str) -> FileScope {
    let normalized = path.replace('\\', "/");
    let mut segments: Vec<&str> = normalized.split('/').filter(|s| !s.is_empty()).collect();
    let Some(file_name) = segments.pop() else {
        return FileScope::OutOfScope;
    };
    let Some((stem, ext)) = file_name.rsplit_once('.') else {
        return FileScope::OutOfScope;
    };
    if ext != SOURCE_EXTENSION {
        return FileScope::OutOfScope;
    }
    if segments.iter().any(|s| *s == "test" || *s == "tests") {
        return FileScope::OutOfScope;
    }
    if stem.ends_with("Test") || stem.ends_with("Tests") || stem.starts_with("Test") {
        return FileScope::OutOfScope;
    }
    FileScope::InScope
}

#[cfg(test)]
mod tests;
