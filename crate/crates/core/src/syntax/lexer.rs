//! Line-aware lexer for the Java-like input language.
//!
//! Never fails: unterminated literals and comments run to the end of their
//! line (or file) and unknown characters become single-char punctuation.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Ident,
    Keyword,
    IntLit,
    FloatLit,
    StrLit,
    CharLit,
    BoolLit,
    NullLit,
    Punct,
    LineComment,
    BlockComment,
    DocComment,
}

impl TokenKind {
    pub fn is_comment(self) -> bool {
        matches!(
            self,
            TokenKind::LineComment | TokenKind::BlockComment | TokenKind::DocComment
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line of the first character.
    pub line: usize,
    /// 1-based line of the last character.
    pub end_line: usize,
    /// Byte range in the source.
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.text == text && matches!(self.kind, TokenKind::Punct | TokenKind::Keyword)
    }
}

const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try",
    "void", "volatile", "while",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

// Longest first so that `>>>=` wins over `>>`.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<",
];

pub fn lex(source: &str) -> Vec<Token> {
    let chars: Vec<char> = source.chars().collect();
    let mut byte_of: Vec<usize> = source.char_indices().map(|(b, _)| b).collect();
    byte_of.push(source.len());
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let start_line = line;
        let kind;

        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            kind = TokenKind::LineComment;
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            let doc = chars.get(i + 2) == Some(&'*') && chars.get(i + 3) != Some(&'/');
            i += 2;
            while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                if chars[i] == '\n' {
                    line += 1;
                }
                i += 1;
            }
            i = (i + 2).min(chars.len());
            kind = if doc {
                TokenKind::DocComment
            } else {
                TokenKind::BlockComment
            };
        } else if c == '"' {
            if chars.get(i + 1) == Some(&'"') && chars.get(i + 2) == Some(&'"') {
                // text block
                i += 3;
                while i < chars.len()
                    && !(chars[i] == '"' && chars.get(i + 1) == Some(&'"') && chars.get(i + 2) == Some(&'"'))
                {
                    if chars[i] == '\n' {
                        line += 1;
                    }
                    i += 1;
                }
                i = (i + 3).min(chars.len());
            } else {
                i = scan_quoted(&chars, i, '"');
            }
            kind = TokenKind::StrLit;
        } else if c == '\'' {
            i = scan_quoted(&chars, i, '\'');
            kind = TokenKind::CharLit;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut float = c == '.';
            let hex = c == '0' && matches!(chars.get(i + 1), Some('x') | Some('X'));
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                if d.is_ascii_alphanumeric() || d == '_' {
                    if !hex && matches!(d, 'e' | 'E' | 'f' | 'F' | 'd' | 'D') {
                        float = true;
                        if matches!(d, 'e' | 'E') && matches!(chars.get(i + 1), Some('+') | Some('-')) {
                            i += 1;
                        }
                    }
                    i += 1;
                } else if d == '.' && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit()) {
                    float = true;
                    i += 1;
                } else if d == '.' && !float && !chars.get(i + 1).is_some_and(|n| n.is_alphabetic()) {
                    // `1.` is a float literal; `1.foo` is not valid Java anyway
                    float = true;
                    i += 1;
                } else {
                    break;
                }
            }
            kind = if float {
                TokenKind::FloatLit
            } else {
                TokenKind::IntLit
            };
        } else if c.is_alphabetic() || c == '_' || c == '$' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            kind = match word.as_str() {
                "true" | "false" => TokenKind::BoolLit,
                "null" => TokenKind::NullLit,
                w if is_keyword(w) => TokenKind::Keyword,
                _ => TokenKind::Ident,
            };
        } else {
            let rest: String = chars[i..(i + 4).min(chars.len())].iter().collect();
            let op = OPERATORS.iter().find(|op| rest.starts_with(**op));
            i += op.map_or(1, |op| op.chars().count());
            kind = TokenKind::Punct;
        }

        let text: String = chars[start..i].iter().collect();
        let inner_breaks = text.trim_end_matches('\n').matches('\n').count();
        tokens.push(Token {
            kind,
            text,
            line: start_line,
            end_line: start_line + inner_breaks,
            start: byte_of[start],
            end: byte_of[i],
        });
    }
    tokens
}

/// Scan a quoted literal starting at `i`; stops at the closing quote or at
/// the end of the line for unterminated literals.
fn scan_quoted(chars: &[char], mut i: usize, quote: char) -> usize {
    i += 1;
    while i < chars.len() {
        match chars[i] {
            '\\' if chars.get(i + 1) != Some(&'\n') => i += 2,
            '\n' => return i,
            c if c == quote => return i + 1,
            _ => i += 1,
        }
    }
    chars.len()
}
