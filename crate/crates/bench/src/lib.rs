//! Shared inputs for the benchmarks.

use vfix_core::ingest::{CommitRecord, FilePair};

pub const LISTING_BEFORE: &str = include_str!("../../core/tests/fixtures/AbstractMvcView.before.java");
pub const LISTING_AFTER: &str = include_str!("../../core/tests/fixtures/AbstractMvcView.after.java");

pub fn listing_commit() -> CommitRecord {
    CommitRecord {
        repo_id: "bench".into(),
        commit_id: "listing".into(),
        message: "Use a dedicated parser for empty value mappings".into(),
        file_changes: vec![FilePair {
            path: "src/main/java/AbstractMvcView.java".into(),
            before: Some(LISTING_BEFORE.into()),
            after: Some(LISTING_AFTER.into()),
        }],
        label: None,
        split: None,
    }
}

/// A file of `methods` small methods, each calling its neighbour.
pub fn synthetic_file(methods: usize) -> String {
    let mut s = String::from("class Big {\n");
    for i in 0..methods {
        s.push_str(&format!(
            "  int m{i}(int a) {{\n    int b = a + {i};\n    if (b > 3) {{\n      b = m{}(b);\n    }}\n    return b;\n  }}\n",
            (i + 1) % methods.max(1)
        ));
    }
    s.push_str("}\n");
    s
}
