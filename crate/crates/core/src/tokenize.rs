//! Budget tokenizer: maximal runs of alphanumerics/underscore are one token,
//! every other non-whitespace character is a token of its own.

/// Byte ranges of every token in `text`, in order.
pub fn token_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut word_start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if is_word_char(c) {
            if word_start.is_none() {
                word_start = Some(i);
            }
            continue;
        }
        if let Some(s) = word_start.take() {
            spans.push((s, i));
        }
        if !c.is_whitespace() {
            spans.push((i, i + c.len_utf8()));
        }
    }
    if let Some(s) = word_start {
        spans.push((s, text.len()));
    }
    spans
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub fn count_tokens(text: &str) -> usize {
    token_spans(text).len()
}

pub fn tokens(text: &str) -> Vec<&str> {
    token_spans(text).into_iter().map(|(s, e)| &text[s..e]).collect()
}

/// Prefix of `text` holding at most `budget` tokens, with the number kept.
///
/// The cut lands right after the last kept token, so original spacing and
/// line breaks inside the prefix survive.
pub fn truncate_tokens(text: &str, budget: usize) -> (&str, usize) {
    let spans = token_spans(text);
    if spans.len() <= budget {
        return (text, spans.len());
    }
    if budget == 0 {
        return ("", 0);
    }
    let end = spans[budget - 1].1;
    (&text[..end], budget)
}
