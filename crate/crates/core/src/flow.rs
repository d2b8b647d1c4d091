//! Per-method statement graphs.
//!
//! Three edge families are kept apart:
//! - `control_flow`: straight-line successors and branch entries (no loop
//!   back-edges).
//! - `control_dependence`: a branching header to every statement nested
//!   directly under it.
//! - `data_flow`: every definition of a name to every statement using it.
//!
//! The dependence edge set `E` used by slicing is
//! `control_dependence ∪ data_flow`; `E^r` is its exact reversal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::syntax::{MethodDecl, NodeId, NodeKind, SyntaxTree, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatementRef {
    pub node: NodeId,
    pub kind: NodeKind,
    pub start_line: usize,
    pub end_line: usize,
    /// Lines holding the statement's own tokens (for compound statements,
    /// the header and connector lines, not the nested bodies).
    pub own_lines: BTreeSet<usize>,
    pub defined_vars: BTreeSet<String>,
    pub used_vars: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlowGraph {
    pub vertices: Vec<StatementRef>,
    pub control_flow: BTreeSet<(usize, usize)>,
    pub control_dependence: BTreeSet<(usize, usize)>,
    pub data_flow: BTreeSet<(usize, usize)>,
    forward: BTreeSet<(usize, usize)>,
    backward: BTreeSet<(usize, usize)>,
}

impl FlowGraph {
    /// Graph over `n` anonymous vertices with the given dependence edges.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let vertices = (0..n)
            .map(|i| StatementRef {
                node: i,
                kind: NodeKind::Statement,
                start_line: i + 1,
                end_line: i + 1,
                own_lines: BTreeSet::from([i + 1]),
                defined_vars: BTreeSet::new(),
                used_vars: BTreeSet::new(),
            })
            .collect();
        let mut g = FlowGraph {
            vertices,
            data_flow: edges.into_iter().filter(|&(a, b)| a < n && b < n).collect(),
            ..Default::default()
        };
        g.finish();
        g
    }

    fn finish(&mut self) {
        self.forward = self.control_dependence.union(&self.data_flow).copied().collect();
        self.backward = self.forward.iter().map(|&(a, b)| (b, a)).collect();
    }

    /// Dependence edges `E`.
    pub fn forward_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.forward
    }

    /// Reversed dependence edges `E^r`.
    pub fn backward_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.backward
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex_of(&self, node: NodeId) -> Option<usize> {
        self.vertices.iter().position(|v| v.node == node)
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", name.replace('"', "'"));
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  s{i} [label=\"{}@{}\"];", v.kind, v.start_line);
        }
        let families = [
            (&self.control_flow, "dashed"),
            (&self.control_dependence, "bold"),
            (&self.data_flow, "solid"),
        ];
        for (edges, style) in families {
            for (a, b) in edges {
                let _ = writeln!(out, "  s{a} -> s{b} [style={style}];");
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Build the flow graph of `method`. Field declarations of the owning type
/// join the graph as vertices whose definitions reach every statement of
/// the method.
pub fn build(tree: &SyntaxTree, method: &MethodDecl) -> FlowGraph {
    let Some(body) = method.body else {
        return FlowGraph::default();
    };

    let mut nodes: Vec<NodeId> = tree
        .fields
        .iter()
        .filter(|f| f.owner == method.owner && tree.owner_of(f.node) == method.owner)
        .map(|f| f.node)
        .collect();
    nodes.extend(
        tree.descendants(body)
            .into_iter()
            .filter(|&id| tree.node(id).kind.is_statement_like()),
    );
    nodes.sort_by_key(|&id| (tree.node(id).start_line, id));

    let vertices: Vec<StatementRef> = nodes.iter().map(|&id| statement_ref(tree, id)).collect();
    let index: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();

    let mut g = FlowGraph {
        vertices,
        ..Default::default()
    };

    // control dependence: nearest statement-like ancestor inside the body
    for (i, &id) in nodes.iter().enumerate() {
        if tree.node(id).kind == NodeKind::FieldDecl {
            continue;
        }
        let controller = tree
            .ancestors(id)
            .take_while(|&a| a != body)
            .find(|&a| tree.node(a).kind.is_statement_like());
        if let Some(c) = controller.and_then(|c| index.get(&c)) {
            g.control_dependence.insert((*c, i));
        }
    }

    // control flow
    link_sequence(tree, &sequence(tree, body), None, &index, &mut g.control_flow);

    // data flow
    let mut defs: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, v) in g.vertices.iter().enumerate() {
        for name in &v.defined_vars {
            defs.entry(name.as_str()).or_default().push(i);
        }
    }
    let mut data = BTreeSet::new();
    for (i, v) in g.vertices.iter().enumerate() {
        for name in &v.used_vars {
            for &d in defs.get(name.as_str()).into_iter().flatten() {
                if d != i {
                    data.insert((d, i));
                }
            }
        }
    }
    g.data_flow = data;
    g.finish();
    g
}

/// Statement-like nodes executed in order when `node` runs, flattening
/// nested bare blocks.
fn sequence(tree: &SyntaxTree, node: NodeId) -> Vec<NodeId> {
    let n = tree.node(node);
    match n.kind {
        NodeKind::Block => n.children.iter().flat_map(|&c| sequence(tree, c)).collect(),
        k if k.is_statement_like() => vec![node],
        _ => Vec::new(),
    }
}

fn link_sequence(
    tree: &SyntaxTree,
    seq: &[NodeId],
    follow: Option<NodeId>,
    index: &BTreeMap<NodeId, usize>,
    edges: &mut BTreeSet<(usize, usize)>,
) {
    let add = |a: NodeId, b: Option<NodeId>, edges: &mut BTreeSet<(usize, usize)>| {
        if let (Some(&ia), Some(&ib)) = (index.get(&a), b.and_then(|b| index.get(&b))) {
            edges.insert((ia, ib));
        }
    };
    for (i, &s) in seq.iter().enumerate() {
        let next = seq.get(i + 1).copied().or(follow);
        let node = tree.node(s);
        let branches: Vec<Vec<NodeId>> = node.children.iter().map(|&c| branch_body(tree, c)).collect();
        let may_skip = match node.kind {
            NodeKind::If => node.children.len() < 2,
            NodeKind::Loop => true,
            NodeKind::Try => false,
            _ => {
                add(s, next, edges);
                continue;
            }
        };
        if may_skip || branches.iter().all(|b| b.is_empty()) {
            add(s, next, edges);
        }
        for branch in &branches {
            match branch.first() {
                Some(&first) => {
                    add(s, Some(first), edges);
                    link_sequence(tree, branch, next, index, edges);
                }
                None => add(s, next, edges),
            }
        }
    }
}

fn branch_body(tree: &SyntaxTree, child: NodeId) -> Vec<NodeId> {
    let n = tree.node(child);
    match n.kind {
        NodeKind::Catch => n.children.iter().flat_map(|&c| sequence(tree, c)).collect(),
        _ => sequence(tree, child),
    }
}

fn statement_ref(tree: &SyntaxTree, id: NodeId) -> StatementRef {
    let node = tree.node(id);
    let mut own: Vec<&Token> = tree.own_tokens(id);
    if node.kind == NodeKind::Try {
        for &c in &node.children {
            if tree.node(c).kind == NodeKind::Catch {
                own.extend(tree.own_tokens(c));
            }
        }
    }
    let own: Vec<&Token> = own.into_iter().filter(|t| !t.kind.is_comment()).collect();
    let own_lines = own.iter().flat_map(|t| t.line..=t.end_line).collect();
    let (defined_vars, used_vars) = def_use(&own);
    StatementRef {
        node: id,
        kind: node.kind,
        start_line: node.start_line,
        end_line: node.end_line,
        own_lines,
        defined_vars,
        used_vars,
    }
}

const PRIMITIVES: &[&str] = &["int", "long", "short", "byte", "char", "boolean", "float", "double"];

const ASSIGN_OPS: &[&str] = &[
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=",
];

fn is_ident(t: &Token) -> bool {
    t.kind == TokenKind::Ident
}

fn starts_upper(t: &Token) -> bool {
    t.text.chars().next().is_some_and(|c| c.is_uppercase())
}

/// Syntactic definitions and uses of one statement's tokens.
pub(crate) fn def_use(toks: &[&Token]) -> (BTreeSet<String>, BTreeSet<String>) {
    // Mark `>` tokens that close a generic argument list opened after a
    // capitalized type name, so `List<Foo> x` reads as a declaration but
    // `a > b` does not.
    let mut type_end = vec![false; toks.len()];
    let mut in_generic = vec![false; toks.len()];
    let mut generic_depth = 0usize;
    for i in 0..toks.len() {
        let t = toks[i];
        in_generic[i] = generic_depth > 0;
        if t.is("<") && i > 0 && is_ident(toks[i - 1]) && starts_upper(toks[i - 1]) {
            generic_depth += 1;
        } else if generic_depth > 0 {
            let closes = match t.text.as_str() {
                ">" => 1,
                ">>" => 2,
                ">>>" => 3,
                _ => 0,
            };
            if closes > 0 && t.kind == TokenKind::Punct {
                generic_depth = generic_depth.saturating_sub(closes);
                type_end[i] = generic_depth == 0;
            }
        }
    }

    let mut defs = BTreeSet::new();
    let mut uses = BTreeSet::new();
    let mut declaring = false;
    let mut paren_depth = 0i32;
    let mut decl_depth = 0i32;
    for i in 0..toks.len() {
        let t = toks[i];
        if t.kind == TokenKind::Punct {
            match t.text.as_str() {
                "(" | "[" | "{" => paren_depth += 1,
                ")" | "]" | "}" => paren_depth -= 1,
                ";" => declaring = false,
                _ => {}
            }
            continue;
        }
        if !is_ident(t) || in_generic[i] {
            continue;
        }
        let prev = i.checked_sub(1).map(|p| toks[p]);
        let next = toks.get(i + 1).copied();
        let member = prev.is_some_and(|p| p.is("."))
            && !(i >= 2 && toks[i - 2].is("this"));
        if member {
            continue;
        }
        if next.is_some_and(|n| n.is("(")) {
            continue;
        }
        let after_type = prev.is_some_and(|p| {
            (is_ident(p) && !p.is("return"))
                || (p.kind == TokenKind::Keyword && PRIMITIVES.contains(&p.text.as_str()))
                || p.is("]") && i >= 2 && toks[i - 2].is("[")
                || type_end[i - 1]
        }) || (declaring && paren_depth == decl_depth && prev.is_some_and(|p| p.is(",")));
        let ends_declarator = next.is_none_or(|n| {
            n.is("=") || n.is(";") || n.is(",") || n.is(":") || n.is(")") || n.is("[")
        });
        if after_type && ends_declarator {
            defs.insert(t.text.clone());
            declaring = true;
            decl_depth = paren_depth;
            continue;
        }
        // identifier in type position (followed by a declared name or generics)
        let type_position = next.is_some_and(|n| is_ident(n) || (n.is("<") && starts_upper(t)))
            || next.is_some_and(|n| n.is("[")) && toks.get(i + 2).is_some_and(|n| n.is("]"));
        if type_position {
            continue;
        }
        let assigned = next.is_some_and(|n| {
            n.kind == TokenKind::Punct && (ASSIGN_OPS.contains(&n.text.as_str()) || n.is("++") || n.is("--"))
        }) || prev.is_some_and(|p| p.is("++") || p.is("--"));
        if assigned {
            defs.insert(t.text.clone());
            if !next.is_some_and(|n| n.is("=")) {
                uses.insert(t.text.clone());
            }
            continue;
        }
        uses.insert(t.text.clone());
    }
    (defs, uses)
}
