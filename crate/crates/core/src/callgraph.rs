//! Over-approximate call graph across files.
//!
//! Invocations are matched to declarations by name, argument count and the
//! argument types that can be read off the source without type inference:
//! literals, `new T(...)` and variables declared with an explicit type.
//! Unknown argument types match anything, so overloads fan out into
//! several edges.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::syntax::{declarators, MethodDecl, NodeId, SyntaxTree, Token, TokenKind};

/// A call site: callee name plus one optional deterministic type per
/// argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub name: String,
    pub args: Vec<Option<String>>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodEntry {
    /// Index of the tree the method was declared in.
    pub file: usize,
    pub decl: MethodDecl,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallGraph {
    pub methods: Vec<MethodEntry>,
    /// (caller, callee) indices into `methods`.
    pub calls: BTreeSet<(usize, usize)>,
}

impl CallGraph {
    /// Build over every method of every tree. Work is split per file and
    /// candidate edges are merged afterwards.
    pub fn build(trees: &[&SyntaxTree]) -> Self {
        let methods: Vec<MethodEntry> = trees
            .iter()
            .enumerate()
            .flat_map(|(file, t)| t.methods.iter().map(move |m| MethodEntry { file, decl: m.clone() }))
            .collect();
        let mut by_name: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, m) in methods.iter().enumerate() {
            by_name.entry(m.decl.name.as_str()).or_default().push(i);
        }
        let calls: BTreeSet<(usize, usize)> = methods
            .par_iter()
            .enumerate()
            .flat_map_iter(|(caller, entry)| {
                let invs = invocations(trees[entry.file], &entry.decl);
                let mut out = Vec::new();
                for inv in &invs {
                    for &callee in by_name.get(inv.name.as_str()).into_iter().flatten() {
                        if matches(inv, &methods[callee].decl) {
                            out.push((caller, callee));
                        }
                    }
                }
                out
            })
            .collect();
        CallGraph { methods, calls }
    }

    /// Graph over `n` placeholder methods named `m0..m{n-1}`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let methods = (0..n)
            .map(|i| MethodEntry {
                file: 0,
                decl: MethodDecl {
                    node: i,
                    owner: String::new(),
                    name: format!("m{i}"),
                    parameter_count: 0,
                    parameter_types: Vec::new(),
                    parameter_names: Vec::new(),
                    varargs: false,
                    signature_text: format!("void m{i}()"),
                    annotation_text: None,
                    doc_span: None,
                    body: None,
                    span: (i + 1, i + 1),
                    header_end_line: i + 1,
                },
            })
            .collect();
        CallGraph {
            methods,
            calls: edges.into_iter().filter(|&(a, b)| a < n && b < n).collect(),
        }
    }

    pub fn index_of(&self, file: usize, node: NodeId) -> Option<usize> {
        self.methods.iter().position(|m| m.file == file && m.decl.node == node)
    }

    /// Changed methods plus everything connected to them through call
    /// edges in either direction, transitively.
    pub fn relevant_methods(&self, changed: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(a, b) in &self.calls {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        let mut seen: BTreeSet<usize> = changed.iter().copied().filter(|&c| c < self.methods.len()).collect();
        let mut queue: VecDeque<usize> = seen.iter().copied().collect();
        while let Some(m) = queue.pop_front() {
            for &n in adj.get(&m).into_iter().flatten() {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph calls {\n");
        for (i, m) in self.methods.iter().enumerate() {
            let _ = writeln!(out, "  m{i} [label=\"{}\"];", m.decl.key().replace('"', "'"));
        }
        for (a, b) in &self.calls {
            let _ = writeln!(out, "  m{a} -> m{b};");
        }
        out.push_str("}\n");
        out
    }
}

/// Call sites in the body of `method`. Constructor calls (`new T(...)`),
/// `this(...)` and `super(...)` are not included.
pub fn invocations(tree: &SyntaxTree, method: &MethodDecl) -> Vec<Invocation> {
    let Some(body) = method.body else {
        return Vec::new();
    };
    let toks: Vec<&Token> = tree
        .node_tokens(body)
        .iter()
        .filter(|t| !t.kind.is_comment())
        .collect();
    let locals = local_types(tree, method, body);
    let mut out = Vec::new();
    for i in 0..toks.len() {
        let t = toks[i];
        if t.kind != TokenKind::Ident || !toks.get(i + 1).is_some_and(|n| n.is("(")) {
            continue;
        }
        if i > 0 && toks[i - 1].is("new") {
            continue;
        }
        let close = matching_paren(&toks, i + 1);
        let args = split_args(&toks[i + 2..close])
            .into_iter()
            .map(|arg| arg_type(arg, &locals))
            .collect();
        out.push(Invocation { name: t.text.clone(), args, line: t.line });
    }
    out
}

/// Index of the `)` matching the `(` at `open`, or the slice length.
fn matching_paren(toks: &[&Token], open: usize) -> usize {
    let mut depth = 0i32;
    for (j, t) in toks.iter().enumerate().skip(open) {
        if t.is("(") {
            depth += 1;
        } else if t.is(")") {
            depth -= 1;
            if depth == 0 {
                return j;
            }
        }
    }
    toks.len()
}

fn split_args<'t, 'a>(toks: &'t [&'a Token]) -> Vec<&'t [&'a Token]> {
    if toks.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        if t.kind != TokenKind::Punct {
            continue;
        }
        match t.text.as_str() {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth -= 1,
            "," if depth == 0 => {
                out.push(&toks[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&toks[start..]);
    out
}

/// Declared types of parameters and explicitly typed locals.
fn local_types(tree: &SyntaxTree, method: &MethodDecl, body: NodeId) -> HashMap<String, String> {
    let mut types = HashMap::new();
    for (name, ty) in method.parameter_names.iter().zip(&method.parameter_types) {
        if let Some(ty) = ty {
            types.insert(name.clone(), normalize_type(ty));
        }
    }
    for id in tree.descendants(body) {
        if tree.node(id).kind != crate::syntax::NodeKind::Statement {
            continue;
        }
        let own: Vec<Token> = tree
            .own_tokens(id)
            .into_iter()
            .filter(|t| !t.kind.is_comment() && !t.is("final"))
            .cloned()
            .collect();
        let plausible = own.first().is_some_and(|t| {
            t.kind == TokenKind::Ident || (t.kind == TokenKind::Keyword && is_primitive(&t.text))
        });
        if !plausible {
            continue;
        }
        let (ty, names) = declarators(&own);
        if ty.is_empty() || !ty.ends_with(|c: char| c.is_alphanumeric() || c == '_' || c == '>' || c == ']') {
            continue;
        }
        for n in names {
            types.insert(n, normalize_type(&ty));
        }
    }
    types
}

fn arg_type(arg: &[&Token], locals: &HashMap<String, String>) -> Option<String> {
    match arg {
        [t] => match t.kind {
            TokenKind::IntLit => Some(if t.text.ends_with(['l', 'L']) { "long" } else { "int" }.into()),
            TokenKind::FloatLit => Some(if t.text.ends_with(['f', 'F']) { "float" } else { "double" }.into()),
            TokenKind::StrLit => Some("String".into()),
            TokenKind::CharLit => Some("char".into()),
            TokenKind::BoolLit => Some("boolean".into()),
            TokenKind::Ident => locals.get(&t.text).cloned(),
            _ => None,
        },
        [first, rest @ ..] if first.is("new") && rest.last().is_some_and(|t| t.is(")")) => {
            let open = rest.iter().position(|t| t.is("("))?;
            let ty: String = rest[..open].iter().map(|t| t.text.as_str()).collect();
            // the argument must be exactly one constructor call
            let close = matching_paren(rest, open);
            (close + 1 == rest.len()).then(|| normalize_type(&ty))
        }
        _ => None,
    }
}

/// Strip generic arguments, whitespace and package qualifiers; keep array
/// brackets.
pub fn normalize_type(ty: &str) -> String {
    let mut out = String::new();
    let mut depth = 0;
    for c in ty.chars() {
        match c {
            '<' => depth += 1,
            '>' => depth -= 1,
            c if depth == 0 && !c.is_whitespace() => out.push(c),
            _ => {}
        }
    }
    match out.rfind('.') {
        Some(p) => out[p + 1..].to_string(),
        None => out,
    }
}

const PRIMITIVES: &[(&str, &str)] = &[
    ("byte", "Byte"),
    ("short", "Short"),
    ("char", "Character"),
    ("int", "Integer"),
    ("long", "Long"),
    ("float", "Float"),
    ("double", "Double"),
    ("boolean", "Boolean"),
];

fn is_primitive(ty: &str) -> bool {
    PRIMITIVES.iter().any(|(p, _)| *p == ty)
}

fn unbox(ty: &str) -> Option<&'static str> {
    PRIMITIVES.iter().find(|(p, b)| *p == ty || *b == ty).map(|(p, _)| *p)
}

/// Primitive widening rank; `char` widens to `int` and above.
fn widens_to(from: &str, to: &str) -> bool {
    const NUMERIC: &[&str] = &["byte", "short", "int", "long", "float", "double"];
    let rank = |t: &str| NUMERIC.iter().position(|n| *n == t);
    match (from, rank(to)) {
        ("char", Some(r)) => r >= 2,
        (_, Some(r)) => rank(from).is_some_and(|f| f <= r),
        _ => false,
    }
}

/// Types whose hierarchy is known well enough to rule out a match.
fn is_value_type(ty: &str) -> bool {
    unbox(ty).is_some() || ty == "String"
}

fn is_type_variable(ty: &str) -> bool {
    let mut chars = ty.chars();
    chars.next().is_some_and(|c| c.is_ascii_uppercase()) && chars.all(|c| c.is_ascii_digit())
}

/// Whether an argument of type `arg` may be passed to a parameter declared
/// as `param`.
pub fn type_compatible(arg: &str, param: &str) -> bool {
    let arg = normalize_type(arg);
    let param = normalize_type(param);
    if arg == param || is_type_variable(&param) {
        return true;
    }
    match param.as_str() {
        "Object" | "Serializable" | "Comparable" => return true,
        "Number" => return unbox(&arg).is_some_and(|p| p != "boolean" && p != "char"),
        "CharSequence" => return arg == "String" || !is_value_type(&arg),
        _ => {}
    }
    match (unbox(&arg), unbox(&param)) {
        (Some(a), Some(p)) => a == p || widens_to(a, p),
        _ => !(is_value_type(&arg) || is_value_type(&param)),
    }
}

/// Name, arity and deterministic argument types agree.
pub fn matches(inv: &Invocation, def: &MethodDecl) -> bool {
    if inv.name != def.name {
        return false;
    }
    if def.varargs {
        if inv.args.len() + 1 < def.parameter_count {
            return false;
        }
    } else if inv.args.len() != def.parameter_count {
        return false;
    }
    inv.args.iter().zip(&def.parameter_types).all(|(a, p)| match (a, p) {
        (Some(a), Some(p)) => type_compatible(a, p),
        _ => true,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::syntax::parse;

    fn inv(name: &str, args: &[Option<&str>]) -> Invocation {
        Invocation {
            name: name.into(),
            args: args.iter().map(|a| a.map(String::from)).collect(),
            line: 1,
        }
    }

    fn decl(src: &str) -> MethodDecl {
        parse(&format!("class A {{ {src} {{}} }}")).methods[0].clone()
    }

    #[test]
    fn match_examples() {
        let foo2 = decl("void foo(Integer a, String b)");
        assert!(matches(&inv("foo", &[Some("int"), Some("String")]), &foo2));
        let foo_ints = decl("void foo(int a, int b)");
        assert!(!matches(&inv("foo", &[None]), &foo_ints));
        let foo_obj = decl("void foo(Object a)");
        assert!(matches(&inv("foo", &[None]), &foo_obj));
        assert!(!matches(&inv("bar", &[None]), &foo_obj));
        let foo_str = decl("void foo(String s)");
        assert!(!matches(&inv("foo", &[Some("int")]), &foo_str));
        assert!(matches(&inv("foo", &[Some("String")]), &foo_str));
        let foo_long = decl("void foo(long s)");
        assert!(matches(&inv("foo", &[Some("int")]), &foo_long));
        assert!(!matches(&inv("foo", &[Some("double")]), &foo_long));
        let foo_var = decl("void foo(String f, Object... rest)");
        assert!(matches(&inv("foo", &[Some("String")]), &foo_var));
        assert!(matches(&inv("foo", &[Some("String"), None, None]), &foo_var));
    }

    #[test]
    fn type_compatibility() {
        assert!(type_compatible("java.util.HashMap<String, Object>", "HashMap"));
        assert!(type_compatible("HashMap", "Map"));
        assert!(!type_compatible("String", "Map"));
        assert!(type_compatible("char", "int"));
        assert!(!type_compatible("int", "char"));
        assert!(type_compatible("Integer", "Number"));
        assert!(type_compatible("String", "CharSequence"));
        assert!(type_compatible("String", "T"));
        assert!(!type_compatible("boolean", "int"));
    }

    #[test]
    fn invocation_extraction() {
        let src = "class A {\n  void m(Binding binding) {\n    String s = \"x\";\n    foo(1, s, new Bar(2), binding, other.get());\n    Baz b = new Baz();\n    x.y(2.5f, 'c', true, 10L);\n  }\n}\n";
        let tree = parse(src);
        let invs = invocations(&tree, &tree.methods[0]);
        let names: Vec<&str> = invs.iter().map(|i| i.name.as_str()).collect();
        assert_eq!(names, vec!["foo", "get", "y"]);
        assert_eq!(
            invs[0].args,
            vec![Some("int".into()), Some("String".into()), Some("Bar".into()), Some("Binding".into()), None]
        );
        assert_eq!(invs[0].line, 4);
        assert_eq!(
            invs[2].args,
            vec![Some("float".into()), Some("char".into()), Some("boolean".into()), Some("long".into())]
        );
    }

    #[test]
    fn chain_and_isolated() {
        let g = CallGraph::from_edges(4, [(0, 1), (1, 2)]);
        assert_eq!(g.relevant_methods(&BTreeSet::from([1])), BTreeSet::from([0, 1, 2]));
        assert_eq!(g.relevant_methods(&BTreeSet::from([3])), BTreeSet::from([3]));
        assert!(g.relevant_methods(&BTreeSet::new()).is_empty());
    }

    #[test]
    fn listing_relevance() {
        let tree = parse(include_str!("../tests/fixtures/AbstractMvcView.before.java"));
        let g = CallGraph::build(&[&tree]);
        let idx = |name: &str| g.methods.iter().position(|m| m.decl.name == name).unwrap();
        let rel = g.relevant_methods(&BTreeSet::from([idx("addEmptyValueMapping")]));
        let names: BTreeSet<&str> = rel.iter().map(|&i| g.methods[i].decl.name.as_str()).collect();
        for keep in ["addEmptyValueMapping", "addModelBindings", "bind", "addMapping"] {
            assert!(names.contains(keep), "missing {keep}: {names:?}");
        }
        for drop in ["render", "doRender", "exposeBindingModel"] {
            assert!(!names.contains(drop), "unexpected {drop}: {names:?}");
        }
        assert!(g.to_dot().contains("->"));
    }

    /// Reachability oracle: fixpoint iteration over the symmetric closure.
    fn oracle(n: usize, edges: &BTreeSet<(usize, usize)>, changed: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut reach = vec![vec![false; n]; n];
        for i in 0..n {
            reach[i][i] = true;
        }
        for &(a, b) in edges {
            reach[a][b] = true;
            reach[b][a] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        (0..n).filter(|&j| changed.iter().any(|&c| reach[c][j])).collect()
    }

    fn graph_strategy() -> impl Strategy<Value = (usize, BTreeSet<(usize, usize)>, BTreeSet<usize>)> {
        (1usize..=40).prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::btree_set((0..n, 0..n), 0..(2 * n)),
                proptest::collection::btree_set(0..n, 0..=4),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn relevant_matches_oracle((n, edges, changed) in graph_strategy()) {
            let g = CallGraph::from_edges(n, edges.iter().copied());
            let got = g.relevant_methods(&changed);
            prop_assert_eq!(&got, &oracle(n, &edges, &changed));
            prop_assert!(got.is_superset(&changed));
        }

        #[test]
        fn relevant_is_monotone((n, edges, changed) in graph_strategy(), extra in 0usize..40) {
            let g = CallGraph::from_edges(n, edges.iter().copied());
            let mut bigger = changed.clone();
            bigger.insert(extra % n);
            prop_assert!(g.relevant_methods(&bigger).is_superset(&g.relevant_methods(&changed)));
        }
    }
}
