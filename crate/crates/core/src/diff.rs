//! Line-level diffing: shortest edit script grouped into hunks.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use similar::{capture_diff_slices, Algorithm, DiffOp};

/// Split text into lines the way [`crate::syntax::SyntaxTree::line`] does:
/// no terminators, `\r` stripped, no phantom line after a final newline.
pub fn split_lines(text: &str) -> Vec<&str> {
    if text.is_empty() {
        return Vec::new();
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    body.split('\n').map(|l| l.trim_end_matches('\r')).collect()
}

/// A contiguous group of changed lines. Ranges are `(start, len)` with
/// 1-based `start`; for an empty range `start` is the line that follows
/// the insertion point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hunk {
    pub before_range: (usize, usize),
    pub after_range: (usize, usize),
    pub deleted_lines: Vec<String>,
    pub added_lines: Vec<String>,
    pub context_before_width: usize,
    pub context_after_width: usize,
}

impl Hunk {
    /// Last changed line in `before` (`start - 1` when the range is empty).
    pub fn before_end(&self) -> usize {
        self.before_range.0 + self.before_range.1 - 1
    }

    pub fn after_end(&self) -> usize {
        self.after_range.0 + self.after_range.1 - 1
    }
}

/// Changed lines per side plus the pairing of unchanged lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alignment {
    pub deleted: BTreeSet<usize>,
    pub added: BTreeSet<usize>,
    /// 1-based (before, after) pairs of equal lines.
    pub equal: Vec<(usize, usize)>,
}

fn ops(before: &[&str], after: &[&str]) -> Vec<DiffOp> {
    capture_diff_slices(Algorithm::Myers, before, after)
}

pub fn align(before: &str, after: &str) -> Alignment {
    let b = split_lines(before);
    let a = split_lines(after);
    let mut out = Alignment::default();
    for op in ops(&b, &a) {
        match op {
            DiffOp::Equal { old_index, new_index, len } => {
                out.equal.extend((0..len).map(|k| (old_index + k + 1, new_index + k + 1)));
            }
            DiffOp::Delete { old_index, old_len, .. } => {
                out.deleted.extend(old_index + 1..=old_index + old_len);
            }
            DiffOp::Insert { new_index, new_len, .. } => {
                out.added.extend(new_index + 1..=new_index + new_len);
            }
            DiffOp::Replace { old_index, old_len, new_index, new_len } => {
                out.deleted.extend(old_index + 1..=old_index + old_len);
                out.added.extend(new_index + 1..=new_index + new_len);
            }
        }
    }
    out
}

/// Minimal line diff grouped into hunks with zero-width context.
pub fn diff(before: &str, after: &str) -> Vec<Hunk> {
    let b = split_lines(before);
    let a = split_lines(after);
    let mut hunks: Vec<Hunk> = Vec::new();
    let mut open: Option<Hunk> = None;
    for op in ops(&b, &a) {
        let (old_index, old_len, new_index, new_len) = match op {
            DiffOp::Equal { .. } => {
                hunks.extend(open.take());
                continue;
            }
            DiffOp::Delete { old_index, old_len, new_index } => (old_index, old_len, new_index, 0),
            DiffOp::Insert { old_index, new_index, new_len } => (old_index, 0, new_index, new_len),
            DiffOp::Replace { old_index, old_len, new_index, new_len } => (old_index, old_len, new_index, new_len),
        };
        let h = open.get_or_insert_with(|| Hunk {
            before_range: (old_index + 1, 0),
            after_range: (new_index + 1, 0),
            deleted_lines: Vec::new(),
            added_lines: Vec::new(),
            context_before_width: 0,
            context_after_width: 0,
        });
        h.before_range.1 += old_len;
        h.after_range.1 += new_len;
        h.deleted_lines.extend(b[old_index..old_index + old_len].iter().map(|s| s.to_string()));
        h.added_lines.extend(a[new_index..new_index + new_len].iter().map(|s| s.to_string()));
    }
    hunks.extend(open);
    hunks
}

/// Apply zero-context hunks to `before` lines.
pub fn apply(before: &[&str], hunks: &[Hunk]) -> Vec<String> {
    let mut out = Vec::new();
    let mut pos = 0;
    for h in hunks {
        let start = h.before_range.0 - 1;
        out.extend(before[pos..start].iter().map(|s| s.to_string()));
        out.extend(h.added_lines.iter().cloned());
        pos = start + h.before_range.1;
    }
    out.extend(before[pos..].iter().map(|s| s.to_string()));
    out
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    /// Edit distance (insertions plus deletions) by dynamic programming.
    fn lcs_distance(a: &[&str], b: &[&str]) -> usize {
        let mut dp = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for i in (0..a.len()).rev() {
            for j in (0..b.len()).rev() {
                dp[i][j] = if a[i] == b[j] { dp[i + 1][j + 1] + 1 } else { dp[i + 1][j].max(dp[i][j + 1]) };
            }
        }
        a.len() + b.len() - 2 * dp[0][0]
    }

    #[test]
    fn examples() {
        let h = diff("a\nb\n", "a\nc\n");
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].before_range, (2, 1));
        assert_eq!(h[0].after_range, (2, 1));
        assert_eq!(h[0].deleted_lines, vec!["b"]);
        assert_eq!(h[0].added_lines, vec!["c"]);

        assert!(diff("x\ny\n", "x\ny\n").is_empty());

        let h = diff("a\nb\nc\n", "a\nx\nb\nc\n");
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].before_range, (2, 0));
        assert_eq!(h[0].after_range, (2, 1));
        assert_eq!(h[0].before_end(), 1);
        assert_eq!(h[0].added_lines, vec!["x"]);
    }

    #[test]
    fn split_lines_matches_tree_lines() {
        assert_eq!(split_lines(""), Vec::<&str>::new());
        assert_eq!(split_lines("a\r\nb"), vec!["a", "b"]);
        assert_eq!(split_lines("a\n\n"), vec!["a", ""]);
    }

    #[test]
    fn alignment_partitions_lines() {
        let al = align("a\nb\nc\n", "a\nc\nd\n");
        assert_eq!(al.deleted, BTreeSet::from([2]));
        assert_eq!(al.added, BTreeSet::from([3]));
        assert_eq!(al.equal, vec![(1, 1), (3, 2)]);
    }

    fn text() -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec(prop_oneof![Just("a"), Just("b"), Just("c"), Just("}"), Just("")], 0..25)
            .prop_map(|v| v.into_iter().map(String::from).collect())
    }

    proptest! {
        #[test]
        fn hunks_reconstruct_and_are_minimal(b in text(), a in text()) {
            let before = b.iter().map(|l| format!("{l}\n")).collect::<String>();
            let after = a.iter().map(|l| format!("{l}\n")).collect::<String>();
            let hunks = diff(&before, &after);
            let bl = split_lines(&before);
            prop_assert_eq!(apply(&bl, &hunks), a.clone());
            let edits: usize = hunks.iter().map(|h| h.before_range.1 + h.after_range.1).sum();
            let al: Vec<&str> = a.iter().map(|s| s.as_str()).collect();
            prop_assert_eq!(edits, lcs_distance(&bl, &al));
        }
    }
}
