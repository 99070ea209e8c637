use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use super::{ParseError, ParseErrorKind};
use crate::model::{ConditionRole, MAX_BIN};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    RxnSt,
    RxnEd,
    RctSt,
    RctEd,
    CndSt,
    CndEd,
    PrdSt,
    PrdEd,
    ClassStr,
    ClassTxt,
    /// Coordinate bin, always `<= 999`.
    Number(u16),
    Id(u32),
    Role(ConditionRole),
    Text(String),
    Comma,
    LBracket,
    RBracket,
}

const TAGS: [(&str, Token); 10] = [
    ("Rxn/st", Token::RxnSt),
    ("Rxn/ed", Token::RxnEd),
    ("Rct/st", Token::RctSt),
    ("Rct/ed", Token::RctEd),
    ("Cnd/st", Token::CndSt),
    ("Cnd/ed", Token::CndEd),
    ("Prd/st", Token::PrdSt),
    ("Prd/ed", Token::PrdEd),
    ("Str", Token::ClassStr),
    ("Txt", Token::ClassTxt),
];

impl Token {
    pub fn is_marker(&self) -> bool {
        matches!(
            self,
            Self::RxnSt
                | Self::RxnEd
                | Self::RctSt
                | Self::RctEd
                | Self::CndSt
                | Self::CndEd
                | Self::PrdSt
                | Self::PrdEd
        )
    }

    /// Appends the canonical surface form.
    pub fn render(&self, out: &mut String) {
        let tag = |out: &mut String, name: &str| {
            out.push('[');
            out.push_str(name);
            out.push(']');
        };
        match self {
            Self::Number(n) => {
                let _ = write!(out, "{n:03}");
            }
            Self::Id(id) => {
                let _ = write!(out, "{id}");
            }
            Self::Role(r) => tag(out, r.name()),
            Self::Text(t) => {
                out.push('\'');
                out.push_str(t);
                out.push('\'');
            }
            Self::Comma => out.push(','),
            Self::LBracket => out.push('['),
            Self::RBracket => out.push(']'),
            marker => {
                let name = TAGS.iter().find(|(_, t)| t == marker).map(|(n, _)| *n).unwrap_or("?");
                tag(out, name);
            }
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render(&mut s);
        f.write_str(&s)
    }
}

/// A token with the byte offset where it starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub token: Token,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence(pub Vec<Token>);

impl TokenSequence {
    pub fn render(&self) -> String {
        let mut s = String::new();
        for t in &self.0 {
            t.render(&mut s);
        }
        s
    }
}

/// Streaming lexer shared by both output grammars.
///
/// Inside an object bracket the sixth comma-separated field lexes as
/// [`Token::Id`]; every other integer is a coordinate [`Token::Number`].
pub struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    /// Comma-separated field index inside an object bracket.
    field: Option<usize>,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Self { src, pos: 0, field: None }
    }

    pub fn offset(&self) -> usize {
        self.pos
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        let trimmed = rest.trim_start();
        self.pos += rest.len() - trimmed.len();
    }

    fn err(&self, offset: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { offset, kind }
    }

    pub fn next_token(&mut self) -> Result<Option<Spanned>, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = self.rest();
        let Some(c) = rest.chars().next() else {
            return Ok(None);
        };
        let token = match c {
            '[' => {
                let name_len = rest[1..]
                    .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '/'))
                    .unwrap_or(rest.len() - 1);
                let name = &rest[1..1 + name_len];
                let closed = rest[1 + name_len..].starts_with(']');
                if closed && name.starts_with(|ch: char| ch.is_ascii_alphabetic()) {
                    self.pos += name_len + 2;
                    if let Some((_, t)) = TAGS.iter().find(|(n, _)| *n == name) {
                        t.clone()
                    } else if let Some(role) = ConditionRole::from_name(name) {
                        Token::Role(role)
                    } else {
                        return Err(self.err(start, ParseErrorKind::UnknownTag(name.to_string())));
                    }
                } else {
                    self.pos += 1;
                    self.field = Some(0);
                    Token::LBracket
                }
            }
            ']' => {
                self.pos += 1;
                self.field = None;
                Token::RBracket
            }
            ',' => {
                self.pos += 1;
                if let Some(f) = self.field.as_mut() {
                    *f += 1;
                }
                Token::Comma
            }
            '\'' => {
                let Some(end) = rest[1..].find('\'') else {
                    return Err(self.err(start, ParseErrorKind::UnterminatedQuote));
                };
                self.pos += end + 2;
                Token::Text(rest[1..1 + end].to_string())
            }
            '0'..='9' => {
                let len = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
                self.pos += len;
                let value = rest[..len]
                    .bytes()
                    .try_fold(0u64, |acc, d| acc.checked_mul(10)?.checked_add(u64::from(d - b'0')));
                if self.field == Some(5) {
                    match value.and_then(|v| u32::try_from(v).ok()) {
                        Some(v) => Token::Id(v),
                        None => return Err(self.err(start, ParseErrorKind::IdOutOfRange)),
                    }
                } else {
                    match value.and_then(|v| u16::try_from(v).ok()).filter(|v| *v <= MAX_BIN) {
                        Some(v) => Token::Number(v),
                        None => return Err(self.err(start, ParseErrorKind::CoordinateOutOfRange)),
                    }
                }
            }
            other => return Err(self.err(start, ParseErrorKind::UnexpectedChar(other))),
        };
        Ok(Some(Spanned { token, offset: start }))
    }
}

/// Lexes a whole string.
pub fn tokenize(src: &str) -> Result<TokenSequence, ParseError> {
    let mut lx = Lexer::new(src);
    let mut out = Vec::new();
    while let Some(t) = lx.next_token()? {
        out.push(t.token);
    }
    Ok(TokenSequence(out))
}
