use proptest::prelude::*;

use super::*;

const MVC_BEFORE: &str = include_str!("../../tests/fixtures/AbstractMvcView.before.java");

const NESTED: &str = "class A {\n  void m() {\n    if (c) {\n      a();\n      b();\n    }\n  }\n}\n";

fn kinds_with_depth(tree: &SyntaxTree) -> Vec<(NodeKind, usize)> {
    tree.descendants(ROOT)
        .into_iter()
        .map(|id| (tree.node(id).kind, tree.node(id).depth))
        .collect()
}

fn check_invariants(tree: &SyntaxTree) {
    let root = tree.root();
    assert_eq!(root.start_line, 1);
    assert_eq!(root.end_line, tree.line_count().max(1));
    for id in tree.descendants(ROOT) {
        let n = tree.node(id);
        assert!(n.start_line <= n.end_line, "{n:?}");
        for &c in &n.children {
            let child = tree.node(c);
            assert_eq!(child.depth, n.depth + 1);
            assert_eq!(child.parent, Some(id));
            assert!(
                n.start_line <= child.start_line && child.end_line <= n.end_line,
                "child {child:?} escapes parent {n:?}"
            );
        }
    }
}

#[test]
fn minimal_program() {
    let tree = parse("class A {\n  void m() { a(); }\n}");
    assert_eq!(
        kinds_with_depth(&tree),
        vec![
            (NodeKind::CompilationUnit, 0),
            (NodeKind::TypeDecl, 1),
            (NodeKind::MethodDecl, 2),
            (NodeKind::Block, 3),
            (NodeKind::Statement, 4),
        ]
    );
    let m = &tree.methods[0];
    assert_eq!(m.name, "m");
    assert_eq!(m.owner, "A");
    assert_eq!(m.parameter_count, 0);
    assert_eq!(tree.node(m.body.unwrap()).kind, NodeKind::Block);
    check_invariants(&tree);
}

#[test]
fn single_line_program() {
    let tree = parse("class A { void m() { a(); } }");
    let kinds: Vec<NodeKind> = kinds_with_depth(&tree).into_iter().map(|(k, _)| k).collect();
    assert_eq!(
        kinds,
        vec![
            NodeKind::CompilationUnit,
            NodeKind::TypeDecl,
            NodeKind::MethodDecl,
            NodeKind::Block,
            NodeKind::Statement
        ]
    );
}

#[test]
fn empty_file() {
    let tree = parse("");
    assert!(tree.root().children.is_empty());
    assert_eq!(tree.line_count(), 0);
    check_invariants(&tree);
}

#[test]
fn listing_method_has_try() {
    let tree = parse(MVC_BEFORE);
    check_invariants(&tree);
    let m = tree
        .methods
        .iter()
        .find(|m| m.name == "addEmptyValueMapping")
        .expect("method parsed");
    assert_eq!(m.parameter_count, 3);
    assert_eq!(
        m.parameter_types,
        vec![Some("DefaultMapper".into()), Some("String".into()), Some("Object".into())]
    );
    let body = m.body.unwrap();
    let try_node = tree
        .descendants(body)
        .into_iter()
        .find(|&id| tree.node(id).kind == NodeKind::Try)
        .expect("try node");
    let try_line = (m.span.0..=m.span.1)
        .find(|&l| tree.line(l).unwrap().trim() == "try {")
        .unwrap();
    assert_eq!(tree.node(try_node).start_line, try_line);
    assert_eq!(tree.line(tree.node(try_node).end_line).unwrap().trim(), "}");
    let catch = tree.node(try_node).children.iter().find(|&&c| tree.node(c).kind == NodeKind::Catch);
    assert!(catch.is_some());
}

#[test]
fn listing_declarations() {
    let tree = parse(MVC_BEFORE);
    assert_eq!(tree.types.len(), 1);
    assert_eq!(tree.types[0].name, "AbstractMvcView");
    let names: Vec<&str> = tree.methods.iter().map(|m| m.name.as_str()).collect();
    assert_eq!(
        names,
        vec![
            "AbstractMvcView",
            "render",
            "bind",
            "addModelBindings",
            "addMapping",
            "addDefaultMappings",
            "addEmptyValueMapping",
            "exposeBindingModel",
            "flowScopes",
            "getModelObject",
            "getEmptyValue",
            "doRender",
        ]
    );
    let do_render = tree.methods.iter().find(|m| m.name == "doRender").unwrap();
    assert!(do_render.body.is_none());
    let fields: Vec<&str> = tree.fields.iter().flat_map(|f| f.names.iter().map(|s| s.as_str())).collect();
    assert!(fields.contains(&"expressionParser"));
    assert!(fields.contains(&"fieldMarkerPrefix"));
    assert!(tree.imports.iter().any(|i| i.simple_name == "StaticExpression"));
}

#[test]
fn min_depth_examples() {
    let tree = parse("class A {\n\n  void m() { a(); }\n}");
    assert_eq!(tree.min_depth_at(2), LineDepth::Infinite);
    assert_eq!(tree.min_depth_at(1), LineDepth::Finite(1));
    assert_eq!(tree.min_depth_at(0), LineDepth::Infinite);
    assert_eq!(tree.min_depth_at(99), LineDepth::Infinite);
    // method_decl(2), block(3), statement(4) all start on line 3
    assert_eq!(tree.min_depth_at(3), LineDepth::Finite(2));
}

#[test]
fn nested_fixture_depths() {
    let tree = parse(NESTED);
    assert_eq!(tree.line_count(), 8);
    let depths: Vec<LineDepth> = (1..=8).map(|l| tree.min_depth_at(l)).collect();
    use LineDepth::*;
    assert_eq!(
        depths,
        vec![Finite(1), Finite(2), Finite(4), Finite(6), Finite(6), Infinite, Infinite, Infinite]
    );
}

#[test]
fn classify_examples() {
    assert_eq!(classify_file("src/main/A.java", ""), FileScope::InScope);
    assert_eq!(classify_file("src/test/FooTest.java", ""), FileScope::OutOfScope);
    assert_eq!(classify_file("README.md", ""), FileScope::OutOfScope);
    assert_eq!(classify_file("src/main/TestUtil.java", ""), FileScope::OutOfScope);
    assert_eq!(classify_file("src/main/FooTests.java", ""), FileScope::OutOfScope);
    assert_eq!(classify_file("tests/Foo.java", ""), FileScope::OutOfScope);
    assert_eq!(classify_file("src/main/Contest.java", ""), FileScope::InScope);
    assert_eq!(classify_file("Makefile", ""), FileScope::OutOfScope);
}

#[test]
fn stub_examples() {
    let tree = parse(MVC_BEFORE);
    let bind = tree.methods.iter().find(|m| m.name == "bind").unwrap();
    assert_eq!(
        stub(bind),
        "/* Causes the model to be populated from information contained in request parameters. */ \
         protected MappingResults bind(Object model) {}"
    );
    let caller = tree.methods.iter().find(|m| m.name == "addModelBindings").unwrap();
    let lines = caller.stub_lines();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("/* Adds a {@link DefaultMapping} for every configured view"));
    assert_eq!(
        lines[1],
        "protected void addModelBindings(DefaultMapper mapper, Set<String> parameterNames, Object model) {}"
    );
    let plain = tree.methods.iter().find(|m| m.name == "flowScopes").unwrap();
    assert_eq!(stub(plain), "private Map<String, Object> flowScopes() {}");
}

#[test]
fn signatures_skip_annotations_and_keep_throws() {
    let src = "class A {\n  /** Doc. */\n  @Override\n  public <T> List<T> get(final int a, String... rest) throws IOException {\n    return null;\n  }\n}\n";
    let tree = parse(src);
    let m = &tree.methods[0];
    assert_eq!(m.signature_text, "public <T> List<T> get(final int a, String... rest) throws IOException");
    assert!(m.varargs);
    assert_eq!(m.parameter_types, vec![Some("int".into()), None]);
    assert_eq!(m.parameter_names, vec!["a", "rest"]);
    assert_eq!(m.annotation_text.as_deref(), Some("/** Doc. */"));
    assert!(tree.nodes().iter().any(|n| n.kind == NodeKind::Annotation));
    check_invariants(&tree);
}

#[test]
fn control_structures() {
    let src = "class A {\n void m() {\n  for (int i = 0; i < n; i++) x();\n  while (a) { b(); }\n  do { c(); } while (d);\n  if (a) b(); else if (c) d(); else { e(); }\n  outer: for (;;) { break outer; }\n  switch (k) { case 1: f(); break; default: g(); }\n  synchronized (this) { h(); }\n  Runnable r = () -> { run(); };\n }\n}\n";
    let tree = parse(src);
    check_invariants(&tree);
    let body = tree.methods[0].body.unwrap();
    let top: Vec<NodeKind> = tree.node(body).children.iter().map(|&c| tree.node(c).kind).collect();
    assert_eq!(
        top,
        vec![
            NodeKind::Loop,
            NodeKind::Loop,
            NodeKind::Loop,
            NodeKind::If,
            NodeKind::Loop,
            NodeKind::Statement,
            NodeKind::Statement,
            NodeKind::Statement,
        ]
    );
}

#[test]
fn garbage_becomes_single_opaque_child() {
    let tree = parse("%%% ??? !!!\n)))\n");
    assert_eq!(tree.root().children.len(), 1);
    assert_eq!(tree.node(tree.root().children[0]).kind, NodeKind::Statement);
    check_invariants(&tree);
}

#[test]
fn unbalanced_input_recovers() {
    let src = "class A {\n void m() {\n  if (x {\n   y();\n }\n}\n}\n}\n";
    let tree = parse(src);
    check_invariants(&tree);
    assert_eq!(tree.methods.len(), 1);
}

#[test]
fn enum_and_initializers() {
    let src = "enum Color {\n  RED, GREEN(1) { void f() {} };\n  private int v;\n  static { init(); }\n  Color() {}\n}\n";
    let tree = parse(src);
    check_invariants(&tree);
    assert_eq!(tree.types[0].name, "Color");
    assert!(tree.fields.iter().any(|f| f.names == vec!["v"]));
    assert!(tree.methods.iter().any(|m| m.name == "Color"));
}

#[test]
fn field_declarators() {
    let tree = parse("class A {\n  Map<String, List<Integer>> m = new HashMap<>(), n;\n  int[] xs = {1, 2};\n}\n");
    assert_eq!(tree.fields[0].names, vec!["m", "n"]);
    assert_eq!(tree.fields[0].declared_type, "Map<String,List<Integer>>");
    assert_eq!(tree.fields[1].names, vec!["xs"]);
}

#[test]
fn line_access() {
    let tree = parse("a\r\nb\n\nc");
    assert_eq!(tree.line_count(), 4);
    assert_eq!(tree.line(1), Some("a"));
    assert_eq!(tree.line(3), Some(""));
    assert_eq!(tree.line(4), Some("c"));
    assert_eq!(tree.line(5), None);
    assert_eq!(parse("a\n").line_count(), 1);
}

#[derive(Debug, Clone)]
enum GenStmt {
    Simple(u8),
    If(Vec<GenStmt>, Option<Vec<GenStmt>>),
    Loop(Vec<GenStmt>),
    Try(Vec<GenStmt>, Vec<GenStmt>),
    Block(Vec<GenStmt>),
    Blank,
}

fn stmt_strategy() -> impl Strategy<Value = GenStmt> {
    let leaf = prop_oneof![4 => (0u8..5).prop_map(GenStmt::Simple), 1 => Just(GenStmt::Blank)];
    leaf.prop_recursive(4, 48, 4, |inner| {
        let body = prop::collection::vec(inner, 0..4);
        prop_oneof![
            (body.clone(), prop::option::of(body.clone())).prop_map(|(a, b)| GenStmt::If(a, b)),
            body.clone().prop_map(GenStmt::Loop),
            (body.clone(), body.clone()).prop_map(|(a, b)| GenStmt::Try(a, b)),
            body.prop_map(GenStmt::Block),
        ]
    })
}

fn render(stmts: &[GenStmt], indent: usize, out: &mut Vec<String>) {
    let pad = "  ".repeat(indent);
    for s in stmts {
        match s {
            GenStmt::Simple(k) => out.push(match k {
                0 => format!("{pad}x = y + 1;"),
                1 => format!("{pad}int v{indent} = f(x);"),
                2 => format!("{pad}call(a, \"s\");"),
                3 => format!("{pad}// note"),
                _ => format!("{pad}return;"),
            }),
            GenStmt::Blank => out.push(String::new()),
            GenStmt::If(a, b) => {
                out.push(format!("{pad}if (x > 0) {{"));
                render(a, indent + 1, out);
                if let Some(b) = b {
                    out.push(format!("{pad}}} else {{"));
                    render(b, indent + 1, out);
                }
                out.push(format!("{pad}}}"));
            }
            GenStmt::Loop(a) => {
                out.push(format!("{pad}while (x < 10) {{"));
                render(a, indent + 1, out);
                out.push(format!("{pad}}}"));
            }
            GenStmt::Try(a, b) => {
                out.push(format!("{pad}try {{"));
                render(a, indent + 1, out);
                out.push(format!("{pad}}} catch (Exception e) {{"));
                render(b, indent + 1, out);
                out.push(format!("{pad}}}"));
            }
            GenStmt::Block(a) => {
                out.push(format!("{pad}{{"));
                render(a, indent + 1, out);
                out.push(format!("{pad}}}"));
            }
        }
    }
}

fn program(methods: &[Vec<GenStmt>]) -> String {
    let mut out = vec!["class Gen {".to_string()];
    for (i, body) in methods.iter().enumerate() {
        out.push(format!("  void m{i}(int x) {{"));
        render(body, 2, &mut out);
        out.push("  }".to_string());
    }
    out.push("}".to_string());
    out.join("\n")
}

proptest! {
    #[test]
    fn generated_programs_nest(methods in prop::collection::vec(prop::collection::vec(stmt_strategy(), 0..5), 1..4)) {
        let src = program(&methods);
        let tree = parse(&src);
        check_invariants(&tree);
        prop_assert_eq!(tree.methods.len(), methods.len());
        for id in tree.descendants(ROOT).into_iter().skip(1) {
            let n = tree.node(id);
            // min depth never exceeds the depth of a node starting there
            match tree.min_depth_at(n.start_line) {
                LineDepth::Finite(d) => prop_assert!(d <= n.depth),
                LineDepth::Infinite => prop_assert!(false, "node starts at line {}", n.start_line),
            }
        }
        for line in 0..=tree.line_count() + 1 {
            let starts = tree.nodes().iter().skip(1).any(|n| n.start_line == line);
            prop_assert_eq!(tree.min_depth_at(line) == LineDepth::Infinite, !starts);
        }
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let tree = parse_bytes(&bytes);
        check_invariants(&tree);
    }

    #[test]
    fn java_like_soup_never_panics(parts in prop::collection::vec(
        prop::sample::select(vec!["class", "A", "{", "}", "(", ")", ";", "if", "else", "try", "catch",
            "for", "\n", "x", "=", "1", "/*", "*/", "//", "\"", "@", "Override", "<", ">", ",", "do", "while"]),
        0..120,
    )) {
        let src = parts.join(" ");
        let tree = parse(&src);
        check_invariants(&tree);
    }
}
