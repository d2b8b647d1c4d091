use std::ops::Range;

use super::lexer::{lex, Token, TokenKind};
use super::{
    FieldDecl, ImportDecl, MethodDecl, NodeId, NodeKind, SyntaxNode, SyntaxTree, TypeDecl, ROOT,
};

const MODIFIERS: &[&str] = &[
    "public", "protected", "private", "static", "final", "abstract", "native", "synchronized",
    "transient", "volatile", "strictfp", "default",
];

pub(super) fn parse(source: &str) -> SyntaxTree {
    let tokens = lex(source);
    let mut p = Parser {
        toks: &tokens,
        source,
        pos: 0,
        nodes: Vec::new(),
        methods: Vec::new(),
        types: Vec::new(),
        fields: Vec::new(),
        imports: Vec::new(),
    };
    // Reserve the root slot; it is filled in after the children exist.
    p.nodes.push(SyntaxNode {
        kind: NodeKind::CompilationUnit,
        start_line: 1,
        end_line: 1,
        depth: 0,
        children: Vec::new(),
        parent: None,
        tokens: 0..tokens.len(),
    });
    let mut children = p.parse_top_level();

    let structured = children.iter().any(|&c| {
        !matches!(p.nodes[c].kind, NodeKind::Statement | NodeKind::Comment)
    });
    let opaque: Vec<NodeId> = children
        .iter()
        .copied()
        .filter(|&c| p.nodes[c].kind == NodeKind::Statement)
        .collect();
    if !structured && !opaque.is_empty() {
        // Nothing recognizable: one opaque node over the whole token stream.
        p.nodes.truncate(1);
        let all = p.new_node(NodeKind::Statement, 0..tokens.len(), Vec::new());
        children = vec![all];
    }

    let line_starts = line_starts(source);
    let line_count = line_starts.len();
    for &c in &children {
        p.nodes[c].parent = Some(ROOT);
    }
    p.nodes[ROOT].children = children;
    p.nodes[ROOT].end_line = line_count.max(1);

    let Parser {
        mut nodes,
        methods,
        types,
        fields,
        imports,
        ..
    } = p;
    assign_depths(&mut nodes);

    let mut line_min_depth: Vec<Option<usize>> = vec![None; line_count];
    for n in nodes.iter().skip(1) {
        if let Some(slot) = line_min_depth.get_mut(n.start_line - 1) {
            *slot = Some(slot.map_or(n.depth, |d| d.min(n.depth)));
        }
    }

    SyntaxTree {
        source: source.to_string(),
        line_starts,
        tokens,
        nodes,
        line_min_depth,
        methods,
        types,
        fields,
        imports,
    }
}

fn line_starts(source: &str) -> Vec<usize> {
    if source.is_empty() {
        return Vec::new();
    }
    let mut starts = vec![0];
    for (i, b) in source.bytes().enumerate() {
        if b == b'\n' && i + 1 < source.len() {
            starts.push(i + 1);
        }
    }
    starts
}

fn assign_depths(nodes: &mut [SyntaxNode]) {
    let mut stack = vec![(ROOT, 0usize)];
    while let Some((id, depth)) = stack.pop() {
        nodes[id].depth = depth;
        for &c in &nodes[id].children {
            stack.push((c, depth + 1));
        }
    }
}

struct Parser<'a> {
    toks: &'a [Token],
    source: &'a str,
    pos: usize,
    nodes: Vec<SyntaxNode>,
    methods: Vec<MethodDecl>,
    types: Vec<TypeDecl>,
    fields: Vec<FieldDecl>,
    imports: Vec<ImportDecl>,
}

impl<'a> Parser<'a> {
    fn new_node(&mut self, kind: NodeKind, tokens: Range<usize>, children: Vec<NodeId>) -> NodeId {
        let end = tokens.end.max(tokens.start + 1).min(self.toks.len());
        let start = tokens.start.min(end - 1);
        let start_line = self.toks[start].line;
        let end_line = self.toks[start..end]
            .iter()
            .map(|t| t.end_line)
            .max()
            .unwrap_or(start_line);
        let id = self.nodes.len();
        for &c in &children {
            self.nodes[c].parent = Some(id);
        }
        self.nodes.push(SyntaxNode {
            kind,
            start_line,
            end_line,
            depth: 0,
            children,
            parent: None,
            tokens: start..end,
        });
        id
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn tok(&self, i: usize) -> Option<&'a Token> {
        self.toks.get(i)
    }

    fn is_at(&self, i: usize, text: &str) -> bool {
        self.toks.get(i).is_some_and(|t| t.is(text))
    }

    /// Index of the next non-comment token at or after `i`.
    fn skip_comments(&self, mut i: usize) -> usize {
        while self.toks.get(i).is_some_and(|t| t.kind.is_comment()) {
            i += 1;
        }
        i
    }

    /// Given an opening bracket at `i`, index just past its match (or EOF).
    fn skip_balanced(&self, i: usize) -> usize {
        let mut stack: Vec<&str> = Vec::new();
        let mut j = i;
        while j < self.toks.len() {
            let t = &self.toks[j];
            if t.kind == TokenKind::Punct {
                match t.text.as_str() {
                    "(" => stack.push(")"),
                    "[" => stack.push("]"),
                    "{" => stack.push("}"),
                    close @ (")" | "]" | "}") => {
                        if let Some(k) = stack.iter().rposition(|&s| s == close) {
                            stack.truncate(k);
                        } else if close == "}" {
                            // unmatched closer ends the region without consuming it
                            return j;
                        }
                    }
                    _ => {}
                }
            }
            j += 1;
            if stack.is_empty() {
                return j;
            }
        }
        j
    }

    /// Skip `@Name(.Name)*` plus an optional argument list.
    fn skip_annotation(&self, i: usize) -> usize {
        let mut j = i + 1;
        while self.tok(j).is_some_and(|t| t.kind == TokenKind::Ident || t.kind == TokenKind::Keyword) {
            j += 1;
            if self.is_at(j, ".") {
                j += 1;
            } else {
                break;
            }
        }
        let k = self.skip_comments(j);
        if self.is_at(k, "(") {
            j = self.skip_balanced(k);
        }
        j
    }

    fn is_annotation_start(&self, i: usize) -> bool {
        self.is_at(i, "@") && self.tok(i + 1).is_some_and(|t| t.kind == TokenKind::Ident)
    }

    /// Skip modifiers and annotations; returns the first other token index.
    fn skip_modifiers(&self, mut i: usize) -> usize {
        loop {
            i = self.skip_comments(i);
            match self.tok(i) {
                Some(t) if t.kind == TokenKind::Keyword && MODIFIERS.contains(&t.text.as_str()) => i += 1,
                Some(t) if t.kind == TokenKind::Ident && t.text == "non" && self.is_at(i + 1, "-")
                    && self.tok(i + 2).is_some_and(|n| n.text == "sealed") =>
                {
                    i += 3;
                }
                Some(t) if t.kind == TokenKind::Ident && t.text == "sealed"
                    && self.tok(i + 1).is_some_and(|n| n.kind == TokenKind::Keyword) =>
                {
                    i += 1;
                }
                Some(_) if self.is_annotation_start(i) => i = self.skip_annotation(i),
                _ => return i,
            }
        }
    }

    fn type_decl_keyword_at(&self, i: usize) -> bool {
        let Some(t) = self.tok(i) else { return false };
        match t.text.as_str() {
            "class" | "interface" | "enum" if t.kind == TokenKind::Keyword => true,
            "@" => self.is_at(i + 1, "interface"),
            "record" => {
                t.kind == TokenKind::Ident
                    && self.tok(i + 1).is_some_and(|n| n.kind == TokenKind::Ident)
                    && (self.is_at(i + 2, "(") || self.is_at(i + 2, "<"))
            }
            _ => false,
        }
    }

    fn is_type_decl_start(&self, i: usize) -> bool {
        let j = self.skip_modifiers(i);
        self.type_decl_keyword_at(j)
    }

    fn parse_top_level(&mut self) -> Vec<NodeId> {
        let mut children = Vec::new();
        while !self.at_end() {
            let t = &self.toks[self.pos];
            if t.kind.is_comment() {
                children.push(self.new_node(NodeKind::Comment, self.pos..self.pos + 1, Vec::new()));
                self.pos += 1;
                continue;
            }
            if t.is(";") {
                self.pos += 1;
                continue;
            }
            if self.is_annotation_start(self.pos) && !self.is_type_decl_start(self.pos) {
                let end = self.skip_annotation(self.pos);
                children.push(self.new_node(NodeKind::Annotation, self.pos..end, Vec::new()));
                self.pos = end;
                continue;
            }
            if t.is("import") {
                children.push(self.parse_import());
                continue;
            }
            if t.is("package") {
                let end = self.scan_statement_end(self.pos);
                children.push(self.new_node(NodeKind::Statement, self.pos..end, Vec::new()));
                self.pos = end;
                continue;
            }
            if self.is_type_decl_start(self.pos) {
                children.extend(self.parse_type_decl());
                continue;
            }
            children.push(self.parse_opaque());
        }
        children
    }

    fn parse_import(&mut self) -> NodeId {
        let start = self.pos;
        let end = self.scan_statement_end(start);
        let path: String = self.toks[start + 1..end]
            .iter()
            .filter(|t| !t.kind.is_comment() && !t.is(";") && !t.is("static"))
            .map(|t| t.text.as_str())
            .collect();
        let simple_name = path.rsplit('.').next().unwrap_or("").to_string();
        let node = self.new_node(NodeKind::Import, start..end, Vec::new());
        self.imports.push(ImportDecl {
            node,
            path,
            simple_name,
        });
        self.pos = end;
        node
    }

    /// Opaque statement covering one recovery unit; always advances.
    fn parse_opaque(&mut self) -> NodeId {
        let start = self.pos;
        let mut end = self.scan_statement_end(start);
        if end <= start {
            end = start + 1;
        }
        self.pos = end;
        self.new_node(NodeKind::Statement, start..end, Vec::new())
    }

    /// Parse a type declaration at `self.pos` (modifiers included). Leading
    /// annotations become sibling nodes, so this can return several ids.
    fn parse_type_decl(&mut self) -> Vec<NodeId> {
        let mut out = self.leading_annotations();
        let start = self.pos;
        let kw = self.skip_modifiers(start);
        let name_idx = if self.is_at(kw, "@") { kw + 2 } else { kw + 1 };
        let name = self
            .tok(name_idx)
            .filter(|t| t.kind == TokenKind::Ident)
            .map(|t| t.text.clone())
            .unwrap_or_default();
        let is_enum = self.is_at(kw, "enum");

        // Find the body's `{`, skipping balanced parens (records) and stopping at `;`.
        let mut j = name_idx + 1;
        let open = loop {
            match self.tok(j) {
                None => break None,
                Some(t) if t.is("{") => break Some(j),
                Some(t) if t.is(";") || t.is("}") => break None,
                Some(t) if t.is("(") => j = self.skip_balanced(j),
                Some(_) => j += 1,
            }
        };
        let Some(open) = open else {
            out.push(self.parse_opaque());
            return out;
        };
        let header_end_line = self.toks[open].line;
        self.pos = open + 1;
        let members = self.parse_type_body(&name, is_enum);
        let close_line;
        let end = if self.is_at(self.pos, "}") {
            close_line = self.toks[self.pos].line;
            self.pos += 1;
            self.pos
        } else {
            close_line = self.toks.last().map_or(header_end_line, |t| t.end_line);
            self.pos
        };
        let node = self.new_node(NodeKind::TypeDecl, start..end, members);
        self.types.push(TypeDecl {
            node,
            name,
            header_end_line,
            close_line,
        });
        out.push(node);
        out
    }

    /// Consume annotations at the current position into sibling nodes.
    fn leading_annotations(&mut self) -> Vec<NodeId> {
        let mut out = Vec::new();
        while self.is_annotation_start(self.pos) {
            let end = self.skip_annotation(self.pos);
            out.push(self.new_node(NodeKind::Annotation, self.pos..end, Vec::new()));
            self.pos = self.skip_comments(end);
            if self.pos != end {
                // comments between annotations and the declaration
                for c in end..self.pos {
                    out.push(self.new_node(NodeKind::Comment, c..c + 1, Vec::new()));
                }
            }
        }
        out
    }

    fn parse_type_body(&mut self, owner: &str, is_enum: bool) -> Vec<NodeId> {
        let mut members = Vec::new();
        let mut pending_doc: Option<usize> = None;
        if is_enum {
            let start = self.skip_comments(self.pos);
            for c in self.pos..start {
                members.push(self.new_node(NodeKind::Comment, c..c + 1, Vec::new()));
            }
            self.pos = start;
            let mut j = start;
            while let Some(t) = self.tok(j) {
                if t.is(";") {
                    j += 1;
                    break;
                }
                if t.is("}") {
                    break;
                }
                if t.is("(") || t.is("{") {
                    j = self.skip_balanced(j);
                } else {
                    j += 1;
                }
            }
            if j > start {
                members.push(self.new_node(NodeKind::Statement, start..j, Vec::new()));
            }
            self.pos = j;
        }
        loop {
            let Some(t) = self.peek() else { break };
            if t.is("}") {
                break;
            }
            if t.kind.is_comment() {
                if t.kind == TokenKind::DocComment {
                    pending_doc = Some(self.pos);
                }
                members.push(self.new_node(NodeKind::Comment, self.pos..self.pos + 1, Vec::new()));
                self.pos += 1;
                continue;
            }
            if t.is(";") {
                self.pos += 1;
                continue;
            }
            if self.is_type_decl_start(self.pos) {
                members.extend(self.parse_type_decl());
                pending_doc = None;
                continue;
            }
            if t.is("{") || (t.is("static") && self.is_at(self.skip_comments(self.pos + 1), "{")) {
                let start = self.pos;
                self.pos = self.skip_comments(if t.is("{") { start } else { start + 1 });
                let block = self.parse_block();
                // `static { ... }`: the keyword belongs to the initializer's span
                self.nodes[block].tokens.start = start;
                self.nodes[block].start_line = self.toks[start].line;
                members.push(block);
                pending_doc = None;
                continue;
            }
            members.extend(self.parse_member(owner, pending_doc.take()));
        }
        members
    }

    /// Field or method declaration (or an opaque member on failure).
    fn parse_member(&mut self, owner: &str, doc: Option<usize>) -> Vec<NodeId> {
        let mut out = self.leading_annotations();
        let start = self.pos;
        let decl_start = self.skip_modifiers(start);
        // Classify by the first `(`, `=`, `;` or `{` outside generics.
        let mut j = decl_start;
        let mut angle = 0i32;
        let marker = loop {
            let Some(t) = self.tok(j) else { break None };
            if t.kind == TokenKind::Punct {
                match t.text.as_str() {
                    "<" => angle += 1,
                    ">" => angle -= 1,
                    ">>" => angle -= 2,
                    ">>>" => angle -= 3,
                    "(" if angle <= 0 => break Some(("(", j)),
                    "=" | ";" if angle <= 0 => break Some(("=", j)),
                    "{" | "}" => break Some(("{", j)),
                    _ => {}
                }
            }
            j += 1;
        };
        match marker {
            Some(("(", paren)) if paren > decl_start => {
                out.push(self.parse_method(owner, start, decl_start, paren, doc));
            }
            Some(("=", _)) => {
                out.push(self.parse_field(owner, start, decl_start));
            }
            _ => {
                if self.is_at(self.pos, "}") {
                    return out;
                }
                out.push(self.parse_opaque());
            }
        }
        out
    }

    fn parse_field(&mut self, owner: &str, start: usize, decl_start: usize) -> NodeId {
        let end = self.scan_statement_end(start);
        let (declared_type, names) = declarators(&self.toks[decl_start..end]);
        let node = self.new_node(NodeKind::FieldDecl, start..end, Vec::new());
        self.fields.push(FieldDecl {
            node,
            owner: owner.to_string(),
            declared_type,
            names,
        });
        self.pos = end;
        node
    }

    fn parse_method(
        &mut self,
        owner: &str,
        start: usize,
        decl_start: usize,
        paren: usize,
        doc: Option<usize>,
    ) -> NodeId {
        let name = self.toks[paren - 1].text.clone();
        let close = self.skip_balanced(paren);
        let params = parameters(&self.toks[paren + 1..close.saturating_sub(1).max(paren + 1)]);

        // After the parameter list: `throws ...`, `default ...`, then `{` or `;`.
        let mut j = close;
        let body_open = loop {
            match self.tok(j) {
                None => break None,
                Some(t) if t.is("{") => break Some(j),
                Some(t) if t.is(";") || t.is("}") => break None,
                Some(t) if t.is("(") => j = self.skip_balanced(j),
                Some(_) => j += 1,
            }
        };
        let sig_end = body_open.unwrap_or(j).min(self.toks.len());
        let sig_tokens: Vec<&Token> = self.toks[decl_start.min(sig_end)..sig_end]
            .iter()
            .filter(|t| !t.kind.is_comment())
            .collect();
        let modifiers_text = collapse_ws(
            &self.toks[start..decl_start]
                .iter()
                .filter(|t| !t.kind.is_comment() && !t.is("@"))
                .filter(|t| t.kind == TokenKind::Keyword)
                .map(|t| t.text.as_str())
                .collect::<Vec<_>>()
                .join(" "),
        );
        let body_text = match (sig_tokens.first(), sig_tokens.last()) {
            (Some(a), Some(b)) => collapse_ws(&self.source[a.start..b.end]),
            _ => name.clone(),
        };
        let signature_text = if modifiers_text.is_empty() {
            body_text
        } else {
            format!("{modifiers_text} {body_text}")
        };

        let (children, end, body, header_end_line) = match body_open {
            Some(open) => {
                self.pos = open;
                let block = self.parse_block();
                (vec![block], self.pos, Some(block), self.toks[open].line)
            }
            None => {
                let end = if self.is_at(j, ";") { j + 1 } else { j.max(paren + 1) };
                let line = self.toks[end.saturating_sub(1).min(self.toks.len() - 1)].line;
                self.pos = end;
                (Vec::new(), end, None, line)
            }
        };
        let node = self.new_node(NodeKind::MethodDecl, start..end, children);
        let (doc_text, doc_span) = match doc {
            Some(d) => (
                Some(self.toks[d].text.clone()),
                Some((self.toks[d].line, self.toks[d].end_line)),
            ),
            None => (None, None),
        };
        let span = (self.nodes[node].start_line, self.nodes[node].end_line);
        self.methods.push(MethodDecl {
            node,
            owner: owner.to_string(),
            name,
            parameter_count: params.len(),
            varargs: params.last().is_some_and(|p| p.varargs),
            parameter_types: params.iter().map(|p| p.ty.clone()).collect(),
            parameter_names: params.into_iter().map(|p| p.name).collect(),
            signature_text,
            annotation_text: doc_text,
            doc_span,
            body,
            span,
            header_end_line,
        });
        node
    }

    /// Parse `{ ... }` at `self.pos`.
    fn parse_block(&mut self) -> NodeId {
        let open = self.pos;
        self.pos += 1;
        let mut children = Vec::new();
        loop {
            let Some(t) = self.peek() else { break };
            if t.is("}") {
                self.pos += 1;
                break;
            }
            if let Some(s) = self.parse_statement() {
                children.push(s);
            }
        }
        self.new_node(NodeKind::Block, open..self.pos, children)
    }

    /// One statement inside a block; `None` for empty statements.
    fn parse_statement(&mut self) -> Option<NodeId> {
        let t = self.peek()?;
        if t.kind.is_comment() {
            let id = self.new_node(NodeKind::Comment, self.pos..self.pos + 1, Vec::new());
            self.pos += 1;
            return Some(id);
        }
        if t.is(";") {
            self.pos += 1;
            return None;
        }
        if t.is("{") {
            return Some(self.parse_block());
        }
        if t.is("if") {
            return Some(self.parse_if());
        }
        if t.is("for") || t.is("while") {
            return Some(self.parse_loop(self.pos));
        }
        if t.is("do") {
            return Some(self.parse_do(self.pos));
        }
        if t.is("try") {
            return Some(self.parse_try());
        }
        if t.kind == TokenKind::Ident && self.is_at(self.pos + 1, ":") {
            let k = self.skip_comments(self.pos + 2);
            if self.is_at(k, "for") || self.is_at(k, "while") || self.is_at(k, "do") {
                let label = self.pos;
                self.pos = k;
                return Some(if self.is_at(k, "do") {
                    self.parse_do(label)
                } else {
                    self.parse_loop(label)
                });
            }
        }
        Some(self.parse_opaque())
    }

    /// Body of `if`/`for`/`while`/`else`: a block or a single statement.
    fn parse_substatement(&mut self) -> Option<NodeId> {
        while self.peek().is_some_and(|t| t.kind.is_comment()) {
            self.pos += 1;
        }
        match self.peek() {
            None => None,
            Some(t) if t.is("}") => None,
            Some(_) => self.parse_statement(),
        }
    }

    /// `(` ... `)` starting at the first non-comment token after `self.pos`.
    fn skip_paren_group(&mut self) {
        let k = self.skip_comments(self.pos);
        if self.is_at(k, "(") {
            self.pos = self.skip_balanced(k);
        }
    }

    fn parse_if(&mut self) -> NodeId {
        let start = self.pos;
        self.pos += 1;
        self.skip_paren_group();
        let mut children = Vec::new();
        children.extend(self.parse_substatement());
        let k = self.skip_comments(self.pos);
        if self.is_at(k, "else") {
            self.pos = k + 1;
            children.extend(self.parse_substatement());
        }
        self.new_node(NodeKind::If, start..self.pos, children)
    }

    fn parse_loop(&mut self, start: usize) -> NodeId {
        self.pos += 1;
        self.skip_paren_group();
        let children: Vec<NodeId> = self.parse_substatement().into_iter().collect();
        self.new_node(NodeKind::Loop, start..self.pos, children)
    }

    fn parse_do(&mut self, start: usize) -> NodeId {
        self.pos += 1;
        let children: Vec<NodeId> = self.parse_substatement().into_iter().collect();
        let k = self.skip_comments(self.pos);
        if self.is_at(k, "while") {
            self.pos = k + 1;
            self.skip_paren_group();
            let k = self.skip_comments(self.pos);
            if self.is_at(k, ";") {
                self.pos = k + 1;
            }
        }
        self.new_node(NodeKind::Loop, start..self.pos, children)
    }

    fn parse_try(&mut self) -> NodeId {
        let start = self.pos;
        self.pos += 1;
        self.skip_paren_group();
        let mut children = Vec::new();
        let k = self.skip_comments(self.pos);
        if self.is_at(k, "{") {
            self.pos = k;
            children.push(self.parse_block());
        }
        loop {
            let k = self.skip_comments(self.pos);
            if self.is_at(k, "catch") {
                let catch_start = k;
                self.pos = k + 1;
                self.skip_paren_group();
                let mut inner = Vec::new();
                let b = self.skip_comments(self.pos);
                if self.is_at(b, "{") {
                    self.pos = b;
                    inner.push(self.parse_block());
                }
                children.push(self.new_node(NodeKind::Catch, catch_start..self.pos, inner));
            } else if self.is_at(k, "finally") {
                self.pos = k + 1;
                let b = self.skip_comments(self.pos);
                if self.is_at(b, "{") {
                    self.pos = b;
                    children.push(self.parse_block());
                }
            } else {
                break;
            }
        }
        self.new_node(NodeKind::Try, start..self.pos, children)
    }

    /// End (exclusive) of the simple statement starting at `start`: just
    /// past the terminating `;`, or before an unmatched `}`. Statements
    /// opened by `switch`/`synchronized`/local type declarations end after
    /// their brace group.
    fn scan_statement_end(&self, start: usize) -> usize {
        let raw = self.skip_comments(start);
        let first = self.skip_modifiers(start);
        let block_terminated = self.tok(raw).is_some_and(|t| {
            t.is("switch") || t.is("synchronized") || t.is("static")
        }) || self.type_decl_keyword_at(first);
        let mut depth = 0usize;
        let mut j = start;
        while j < self.toks.len() {
            let t = &self.toks[j];
            if t.kind == TokenKind::Punct {
                match t.text.as_str() {
                    "(" | "[" => depth += 1,
                    ")" | "]" => depth = depth.saturating_sub(1),
                    "{" => {
                        j = self.skip_balanced(j);
                        if depth == 0 && block_terminated {
                            return j;
                        }
                        continue;
                    }
                    "}" => return j,
                    ";" if depth == 0 => return j + 1,
                    _ => {}
                }
            }
            j += 1;
        }
        j
    }
}

struct Param {
    name: String,
    ty: Option<String>,
    varargs: bool,
}

/// Split a parameter list (tokens between the parentheses).
fn parameters(tokens: &[Token]) -> Vec<Param> {
    let mut params = Vec::new();
    for group in split_top_level(tokens) {
        let toks: Vec<&Token> = group
            .iter()
            .filter(|t| !t.kind.is_comment())
            .collect();
        // drop annotations and `final`
        let mut cleaned: Vec<&Token> = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            if toks[i].is("@") {
                i += 2;
                while i + 1 < toks.len() && toks[i].is(".") {
                    i += 2;
                }
                if i < toks.len() && toks[i].is("(") {
                    let mut d = 0;
                    while i < toks.len() {
                        if toks[i].is("(") {
                            d += 1;
                        } else if toks[i].is(")") {
                            d -= 1;
                            if d == 0 {
                                i += 1;
                                break;
                            }
                        }
                        i += 1;
                    }
                }
                continue;
            }
            if toks[i].is("final") {
                i += 1;
                continue;
            }
            cleaned.push(toks[i]);
            i += 1;
        }
        let Some(name_pos) = cleaned.iter().rposition(|t| t.kind == TokenKind::Ident) else {
            continue;
        };
        let name = cleaned[name_pos].text.clone();
        let type_toks = &cleaned[..name_pos];
        if type_toks.is_empty() {
            // receiver-less lambda-style or malformed; count it, type unknown
            params.push(Param { name, ty: None, varargs: false });
            continue;
        }
        let varargs = type_toks.iter().any(|t| t.is("..."));
        let raw: String = type_toks
            .iter()
            .filter(|t| !t.is("..."))
            .map(|t| t.text.as_str())
            .collect();
        let ty = if varargs { None } else { Some(raw) };
        params.push(Param { name, ty, varargs });
    }
    params
}

/// Split at commas outside any bracket or generic nesting.
fn split_top_level(tokens: &[Token]) -> Vec<&[Token]> {
    let mut groups = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, t) in tokens.iter().enumerate() {
        if t.kind != TokenKind::Punct {
            continue;
        }
        match t.text.as_str() {
            "(" | "[" | "{" | "<" => depth += 1,
            ")" | "]" | "}" | ">" => depth -= 1,
            ">>" => depth -= 2,
            ">>>" => depth -= 3,
            "," if depth <= 0 => {
                groups.push(&tokens[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if start < tokens.len() {
        groups.push(&tokens[start..]);
    }
    groups.retain(|g| g.iter().any(|t| !t.kind.is_comment()));
    groups
}

/// Declared type text and declared names of `Type a = ..., b;`.
pub(crate) fn declarators(tokens: &[Token]) -> (String, Vec<String>) {
    let toks: Vec<&Token> = tokens.iter().filter(|t| !t.kind.is_comment()).collect();
    let mut names = Vec::new();
    let mut type_end = None;
    let mut depth = 0i32;
    let mut angle = 0i32;
    let mut in_init = false;
    for (i, t) in toks.iter().enumerate() {
        if t.kind == TokenKind::Punct {
            match t.text.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                "<" if !in_init => angle += 1,
                ">" if !in_init => angle -= 1,
                ">>" if !in_init => angle -= 2,
                ">>>" if !in_init => angle -= 3,
                "=" if depth == 0 && angle <= 0 => in_init = true,
                "," if depth == 0 && angle <= 0 => in_init = false,
                _ => {}
            }
            continue;
        }
        if in_init || depth != 0 || angle > 0 || t.kind != TokenKind::Ident {
            continue;
        }
        let next = toks.get(i + 1);
        let ends = next.is_none_or(|n| n.is("=") || n.is(",") || n.is(";") || n.is("[") || n.is(":"));
        if ends && i > 0 {
            if type_end.is_none() {
                type_end = Some(i);
            }
            names.push(t.text.clone());
        }
    }
    let declared_type = type_end
        .map(|e| toks[..e].iter().map(|t| t.text.as_str()).collect::<String>())
        .unwrap_or_default();
    (declared_type, names)
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
