//! Hunk expansion to block-complete boundaries, unified rendering and
//! budgeted document assembly.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::diff::{split_lines, Hunk};
use crate::error::{Error, Result};
use crate::syntax::{LineDepth, SyntaxTree};
use crate::tokenize::{count_tokens, truncate_tokens};

/// Candidate context widths: `⌊W/2⌋`, then alternating below and above it,
/// ending with whatever of `0` and `W` remains.
pub fn width_order(max_width: usize) -> Vec<usize> {
    let mid = max_width / 2;
    let mut out = vec![mid];
    for step in 1..=max_width {
        if let Some(lo) = mid.checked_sub(step) {
            out.push(lo);
        }
        if mid + step <= max_width {
            out.push(mid + step);
        }
    }
    let mut seen = vec![false; max_width + 1];
    out.retain(|&w| !std::mem::replace(&mut seen[w], true));
    out
}

/// Which boundary depth wins when choosing a width.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryPolicy {
    /// Deepest boundary wins; a line where no node starts scores best.
    #[default]
    Argmax,
    /// Shallowest boundary wins.
    Argmin,
}

impl std::str::FromStr for BoundaryPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "argmax" => Ok(BoundaryPolicy::Argmax),
            "argmin" => Ok(BoundaryPolicy::Argmin),
            other => Err(Error::Config(format!("unknown boundary policy {other:?}"))),
        }
    }
}

fn depth_at(tree: &SyntaxTree, line: isize) -> LineDepth {
    if line < 1 {
        LineDepth::Infinite
    } else {
        tree.min_depth_at(line as usize)
    }
}

/// Pick the first width in `order` whose score is best under `policy`.
fn choose(order: &[usize], policy: BoundaryPolicy, score: impl Fn(usize) -> LineDepth) -> usize {
    let mut best: Option<(usize, LineDepth)> = None;
    for &w in order {
        let s = score(w);
        let better = match (best, policy) {
            (None, _) => true,
            (Some((_, b)), BoundaryPolicy::Argmax) => s > b,
            (Some((_, b)), BoundaryPolicy::Argmin) => s < b,
        };
        if better {
            best = Some((w, s));
        }
    }
    best.map_or(0, |(w, _)| w)
}

/// Score of the leading boundary at width `w`: the shallower of the two
/// versions' boundary lines. A side with an empty range has no boundary at
/// width 0.
pub fn leading_score(hunk: &Hunk, before: &SyntaxTree, after: &SyntaxTree, w: usize) -> LineDepth {
    let side = |tree: &SyntaxTree, (start, len): (usize, usize)| {
        (len > 0 || w > 0).then(|| depth_at(tree, start as isize - w as isize))
    };
    [side(before, hunk.before_range), side(after, hunk.after_range)]
        .into_iter()
        .flatten()
        .min()
        .unwrap_or(LineDepth::Infinite)
}

pub fn trailing_score(hunk: &Hunk, before: &SyntaxTree, after: &SyntaxTree, w: usize) -> LineDepth {
    let side = |tree: &SyntaxTree, (start, len): (usize, usize)| {
        let end = start as isize + len as isize - 1;
        (len > 0 || w > 0).then(|| depth_at(tree, end + w as isize))
    };
    [side(before, hunk.before_range), side(after, hunk.after_range)]
        .into_iter()
        .flatten()
        .min()
        .unwrap_or(LineDepth::Infinite)
}

/// Choose leading and trailing context widths for `hunk`.
pub fn expand(hunk: &Hunk, before: &SyntaxTree, after: &SyntaxTree, order: &[usize], policy: BoundaryPolicy) -> Hunk {
    let mut out = hunk.clone();
    out.context_before_width = choose(order, policy, |w| leading_score(hunk, before, after, w));
    out.context_after_width = choose(order, policy, |w| trailing_score(hunk, before, after, w));
    out
}

/// Fixed widths on both ends, for ablations.
pub fn with_constant_width(hunk: &Hunk, width: usize) -> Hunk {
    let mut out = hunk.clone();
    out.context_before_width = width;
    out.context_after_width = width;
    out
}

/// One rendered `@@` section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedHunk {
    pub before_start: usize,
    pub before_len: usize,
    pub after_start: usize,
    pub after_len: usize,
    /// Body lines including their ` `, `-` or `+` prefix.
    pub lines: Vec<String>,
}

/// Hunk header numbers: an empty range names the line before it.
fn header_start(start: usize, len: usize) -> usize {
    if len == 0 {
        start.saturating_sub(1)
    } else {
        start
    }
}

impl RenderedHunk {
    pub fn header(&self) -> String {
        format!(
            "@@ -{},{} +{},{} @@",
            header_start(self.before_start, self.before_len),
            self.before_len,
            header_start(self.after_start, self.after_len),
            self.after_len
        )
    }
}

/// Merge overlapping or adjacent expanded hunks and lay them out with
/// their context lines. `before` and `after` are the texts the hunks were
/// computed from.
pub fn merge_hunks(hunks: &[Hunk], before: &str, after: &str) -> Vec<RenderedHunk> {
    let b = split_lines(before);
    let a = split_lines(after);
    let mut out: Vec<RenderedHunk> = Vec::new();
    // before-side line just past the last rendered one, plus the matching
    // after-side line
    let mut cursor: Option<(usize, usize)> = None;
    for (i, h) in hunks.iter().enumerate() {
        let lead = h.context_before_width.min(h.before_range.0 - 1).min(h.after_range.0 - 1);
        // trailing context stops at the next change
        let gap = hunks
            .get(i + 1)
            .map_or(b.len() - h.before_end(), |n| n.before_range.0 - 1 - h.before_end());
        let trail = h.context_after_width.min(gap).min(a.len() - h.after_end());
        let region_start = h.before_range.0 - lead;
        let merge = cursor.is_some_and(|(next_b, _)| region_start <= next_b);
        if !merge {
            out.push(RenderedHunk {
                before_start: region_start,
                before_len: 0,
                after_start: h.after_range.0 - lead,
                after_len: 0,
                lines: Vec::new(),
            });
            cursor = Some((region_start, h.after_range.0 - lead));
        }
        let cur = out.last_mut().expect("hunk open");
        let (mut nb, mut na) = cursor.expect("cursor set");
        // equal lines up to the change
        while nb < h.before_range.0 {
            cur.lines.push(format!(" {}", b[nb - 1]));
            cur.before_len += 1;
            cur.after_len += 1;
            nb += 1;
            na += 1;
        }
        for l in &h.deleted_lines {
            cur.lines.push(format!("-{l}"));
            cur.before_len += 1;
        }
        for l in &h.added_lines {
            cur.lines.push(format!("+{l}"));
            cur.after_len += 1;
        }
        debug_assert_eq!(na, h.after_range.0);
        nb = h.before_range.0 + h.before_range.1;
        na = h.after_range.0 + h.after_range.1;
        for k in 0..trail {
            cur.lines.push(format!(" {}", b[nb - 1 + k]));
            cur.before_len += 1;
            cur.after_len += 1;
        }
        cursor = Some((nb + trail, na + trail));
    }
    out
}

/// Unified rendering of one file: headers, then each merged hunk.
pub fn render_file(path_before: &str, path_after: &str, hunks: &[RenderedHunk]) -> String {
    let mut out = String::new();
    if hunks.is_empty() {
        return out;
    }
    let _ = writeln!(out, "--- {path_before}");
    let _ = writeln!(out, "+++ {path_after}");
    for h in hunks {
        let _ = writeln!(out, "{}", h.header());
        for l in &h.lines {
            let _ = writeln!(out, "{l}");
        }
    }
    out
}

/// Merge and render in one step.
pub fn merge_and_render(hunks: &[Hunk], before: &str, after: &str, path: &str) -> String {
    render_file(path, path, &merge_hunks(hunks, before, after))
}

/// A parsed rendered file section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPatch {
    pub path_before: String,
    pub path_after: String,
    pub hunks: Vec<RenderedHunk>,
}

/// Parse rendered unified text, checking that every header's line counts
/// match its body exactly. Lines outside file sections are ignored.
pub fn parse_rendered(text: &str) -> Result<Vec<ParsedPatch>> {
    let bad = |line: usize, msg: &str| Error::Parse {
        path: "<rendered>".into(),
        line,
        message: msg.to_string(),
    };
    let lines: Vec<&str> = text.lines().collect();
    let mut out: Vec<ParsedPatch> = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        if let (Some(b), Some(a)) = (lines[i].strip_prefix("--- "), lines.get(i + 1).and_then(|l| l.strip_prefix("+++ "))) {
            out.push(ParsedPatch { path_before: b.into(), path_after: a.into(), hunks: Vec::new() });
            i += 2;
            continue;
        }
        let Some(header) = lines[i].strip_prefix("@@ -") else {
            i += 1;
            continue;
        };
        let patch = out.last_mut().ok_or_else(|| bad(i + 1, "hunk before file header"))?;
        let header = header.strip_suffix(" @@").ok_or_else(|| bad(i + 1, "malformed hunk header"))?;
        let (old, new) = header.split_once(" +").ok_or_else(|| bad(i + 1, "malformed hunk header"))?;
        let range = |s: &str| -> Option<(usize, usize)> {
            let (a, b) = s.split_once(',')?;
            Some((a.parse().ok()?, b.parse().ok()?))
        };
        let (bs, bl) = range(old).ok_or_else(|| bad(i + 1, "malformed old range"))?;
        let (as_, al) = range(new).ok_or_else(|| bad(i + 1, "malformed new range"))?;
        let (mut seen_b, mut seen_a) = (0, 0);
        let mut body = Vec::new();
        i += 1;
        while i < lines.len() && (seen_b < bl || seen_a < al) {
            let l = lines[i];
            match l.chars().next() {
                Some(' ') => {
                    seen_b += 1;
                    seen_a += 1;
                }
                Some('-') => seen_b += 1,
                Some('+') => seen_a += 1,
                _ => break,
            }
            body.push(l.to_string());
            i += 1;
        }
        if seen_b != bl || seen_a != al {
            return Err(bad(i, "hunk body does not match header counts"));
        }
        let start = |s: usize, len: usize| if len == 0 { s + 1 } else { s };
        patch.hunks.push(RenderedHunk {
            before_start: start(bs, bl),
            before_len: bl,
            after_start: start(as_, al),
            after_len: al,
            lines: body,
        });
    }
    Ok(out)
}

/// Apply parsed hunks to `before`, verifying every context and deleted
/// line.
pub fn apply_rendered(before: &str, hunks: &[RenderedHunk]) -> Result<Vec<String>> {
    let b = split_lines(before);
    let mut out = Vec::new();
    let mut pos = 0;
    for h in hunks {
        let start = h.before_start - 1;
        if start < pos || start > b.len() {
            return Err(Error::Validation(format!("hunk at line {} out of order", h.before_start)));
        }
        out.extend(b[pos..start].iter().map(|s| s.to_string()));
        pos = start;
        for l in &h.lines {
            let (tag, text) = l.split_at(1);
            match tag {
                " " | "-" => {
                    if b.get(pos) != Some(&text) {
                        return Err(Error::Validation(format!("context mismatch at line {}", pos + 1)));
                    }
                    if tag == " " {
                        out.push(text.to_string());
                    }
                    pos += 1;
                }
                _ => out.push(text.to_string()),
            }
        }
    }
    out.extend(b[pos..].iter().map(|s| s.to_string()));
    Ok(out)
}

/// Token budgets of Eq. (1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_message_size: usize,
    pub max_code_size: usize,
}

impl Budget {
    /// The code gets whatever the window leaves after the message budget.
    pub fn from_window(window: usize, max_message_size: usize) -> Self {
        Budget {
            max_message_size,
            max_code_size: window.saturating_sub(max_message_size),
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::from_window(2048, 256)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextDocument {
    pub commit_message: String,
    pub body: String,
    pub token_count: usize,
}

impl ContextDocument {
    /// Classifier input: the message followed by the code.
    pub fn text(&self) -> String {
        match (self.commit_message.is_empty(), self.body.is_empty()) {
            (true, _) => self.body.clone(),
            (false, true) => self.commit_message.clone(),
            (false, false) => format!("{}\n{}", self.commit_message, self.body),
        }
    }

    /// File form: `MSG:` line, blank line, body.
    pub fn to_file_text(&self) -> String {
        format!("MSG:{}\n\n{}", self.commit_message, self.body)
    }

    pub fn from_file_text(text: &str) -> Result<Self> {
        let rest = text
            .strip_prefix("MSG:")
            .ok_or_else(|| Error::Validation("context file must start with MSG:".into()))?;
        let (message, body) = rest.split_once("\n\n").unwrap_or((rest.trim_end_matches('\n'), ""));
        Ok(ContextDocument {
            commit_message: message.to_string(),
            body: body.to_string(),
            token_count: count_tokens(message) + count_tokens(body),
        })
    }
}

/// Truncate the message and the concatenated rendered files to their
/// budgets.
pub fn assemble(message: &str, rendered_files: &[String], budget: Budget) -> ContextDocument {
    let (msg, msg_tokens) = truncate_tokens(message, budget.max_message_size);
    let code = rendered_files.concat();
    let (body, code_tokens) = truncate_tokens(&code, budget.max_code_size);
    ContextDocument {
        commit_message: msg.to_string(),
        body: body.to_string(),
        token_count: msg_tokens + code_tokens,
    }
}
