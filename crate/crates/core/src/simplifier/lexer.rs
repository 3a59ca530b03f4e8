//! SQL tokenizer for the SQLite dialect subset handled by the parser.

use super::SqlParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    /// Bare word: keyword or identifier, as written.
    Word(String),
    /// `"x"`, `` `x` `` or `[x]`.
    QuotedIdent(String),
    /// Single-quoted string, unescaped.
    Str(String),
    Number(String),
    Op(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte offset in the source text.
    pub offset: usize,
}

impl Token {
    pub fn is_word(&self, kw: &str) -> bool {
        matches!(&self.kind, TokenKind::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    pub fn is_op(&self, op: &str) -> bool {
        matches!(&self.kind, TokenKind::Op(o) if *o == op)
    }
}

const OPS: &[&str] = &[
    "<>", "<=", ">=", "!=", "==", "||", "<<", ">>", "(", ")", ",", ".", ";", "=", "<", ">", "+", "-", "*", "/", "%",
    "&", "|", "~",
];

/// Words that cannot be used as bare identifiers.
const RESERVED: &[&str] = &[
    "abort",
    "action",
    "add",
    "after",
    "all",
    "alter",
    "and",
    "as",
    "asc",
    "between",
    "by",
    "case",
    "cast",
    "check",
    "collate",
    "column",
    "commit",
    "constraint",
    "create",
    "cross",
    "current_date",
    "current_time",
    "current_timestamp",
    "default",
    "delete",
    "desc",
    "distinct",
    "drop",
    "else",
    "end",
    "escape",
    "except",
    "exists",
    "foreign",
    "from",
    "full",
    "glob",
    "group",
    "having",
    "if",
    "in",
    "index",
    "inner",
    "insert",
    "intersect",
    "into",
    "is",
    "isnull",
    "join",
    "key",
    "left",
    "like",
    "limit",
    "natural",
    "not",
    "notnull",
    "null",
    "offset",
    "on",
    "or",
    "order",
    "outer",
    "primary",
    "references",
    "right",
    "select",
    "set",
    "table",
    "then",
    "to",
    "transaction",
    "union",
    "unique",
    "update",
    "using",
    "values",
    "when",
    "where",
];

pub fn is_reserved(word: &str) -> bool {
    let lower = word.to_ascii_lowercase();
    RESERVED.binary_search(&lower.as_str()).is_ok()
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, SqlParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'-' && bytes.get(i + 1) == Some(&b'-') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            match text[i + 2..].find("*/") {
                Some(p) => i = i + 2 + p + 2,
                None => return Err(SqlParseError::new(start, "unterminated comment")),
            }
            continue;
        }
        let kind = match c {
            b'\'' => {
                let (s, end) = quoted(text, i, '\'').ok_or_else(|| SqlParseError::new(start, "unterminated string"))?;
                i = end;
                TokenKind::Str(s)
            }
            b'"' | b'`' => {
                let (s, end) = quoted(text, i, c as char)
                    .ok_or_else(|| SqlParseError::new(start, "unterminated quoted identifier"))?;
                i = end;
                TokenKind::QuotedIdent(s)
            }
            b'[' => match text[i + 1..].find(']') {
                Some(p) => {
                    i = i + 1 + p + 1;
                    TokenKind::QuotedIdent(text[start + 1..i - 1].to_string())
                }
                None => return Err(SqlParseError::new(start, "unterminated quoted identifier")),
            },
            b'0'..=b'9' => {
                i = number_end(bytes, i);
                TokenKind::Number(text[start..i].to_string())
            }
            b'.' if bytes.get(i + 1).is_some_and(u8::is_ascii_digit) => {
                i = number_end(bytes, i);
                TokenKind::Number(text[start..i].to_string())
            }
            c if c.is_ascii_alphabetic() || c == b'_' || c >= 0x80 => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] >= 0x80) {
                    i += 1;
                }
                TokenKind::Word(text[start..i].to_string())
            }
            _ => match OPS.iter().find(|op| text[i..].starts_with(**op)) {
                Some(op) => {
                    i += op.len();
                    TokenKind::Op(op)
                }
                None => {
                    let ch = text[i..].chars().next().unwrap_or('?');
                    return Err(SqlParseError::new(start, format!("unexpected character '{ch}'")));
                }
            },
        };
        out.push(Token { kind, offset: start });
    }
    Ok(out)
}

fn quoted(text: &str, start: usize, quote: char) -> Option<(String, usize)> {
    let mut s = String::new();
    let mut chars = text[start + 1..].char_indices().peekable();
    while let Some((off, ch)) = chars.next() {
        if ch == quote {
            if chars.peek().map(|(_, c)| *c) == Some(quote) {
                chars.next();
                s.push(quote);
            } else {
                return Some((s, start + 1 + off + 1));
            }
        } else {
            s.push(ch);
        }
    }
    None
}

fn number_end(bytes: &[u8], mut i: usize) -> usize {
    if bytes[i] == b'0' && matches!(bytes.get(i + 1), Some(b'x') | Some(b'X')) {
        i += 2;
        while i < bytes.len() && bytes[i].is_ascii_hexdigit() {
            i += 1;
        }
        return i;
    }
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            i = j;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserved_list_is_sorted() {
        let mut sorted = RESERVED.to_vec();
        sorted.sort();
        assert_eq!(sorted, RESERVED);
        assert!(is_reserved("Select"));
        assert!(!is_reserved("name"));
    }

    #[test]
    fn tokens() {
        let t = tokenize("SELECT a.\"b c\", 'it''s' -- note\n FROM t WHERE x <> 1.5e3").unwrap();
        let kinds: Vec<_> = t.iter().map(|t| t.kind.clone()).collect();
        assert_eq!(kinds[3], TokenKind::QuotedIdent("b c".into()));
        assert_eq!(kinds[5], TokenKind::Str("it's".into()));
        assert!(kinds.contains(&TokenKind::Op("<>")));
        assert!(kinds.contains(&TokenKind::Number("1.5e3".into())));
        assert!(tokenize("select 'abc").is_err());
    }
}
