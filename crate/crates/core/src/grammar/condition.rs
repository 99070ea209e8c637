use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::token::{Lexer, Spanned, Token};
use super::{EmitError, ParseError, ParseErrorKind};
use crate::model::ConditionWord;

/// Renders words as `'text'[Role]` items joined by commas.
pub fn emit_condition_sequence(words: &[ConditionWord]) -> Result<String, EmitError> {
    let mut out = String::new();
    for (index, w) in words.iter().enumerate() {
        if !w.is_valid() || w.text.contains('\'') {
            return Err(EmitError::InvalidWord { index, text: w.text.clone() });
        }
        if index > 0 {
            out.push(',');
        }
        Token::Text(w.text.clone()).render(&mut out);
        Token::Role(w.role).render(&mut out);
    }
    Ok(out)
}

fn next(lx: &mut Lexer<'_>, want_role: bool) -> Result<Option<Spanned>, ParseError> {
    match lx.next_token() {
        Err(ParseError { offset, kind: ParseErrorKind::UnknownTag(tag) }) if want_role => {
            Err(ParseError { offset, kind: ParseErrorKind::UnknownRole(tag) })
        }
        other => other,
    }
}

fn tag_role(t: &Token) -> ParseErrorKind {
    ParseErrorKind::UnknownRole(t.to_string().trim_matches(['[', ']']).to_string())
}

/// Parses `'text'[Role],...` into condition words.
pub fn parse_condition_sequence(s: &str) -> Result<Vec<ConditionWord>, ParseError> {
    let mut lx = Lexer::new(s);
    let mut words = Vec::new();
    loop {
        let Some(item) = next(&mut lx, false)? else {
            if words.is_empty() {
                return Ok(words);
            }
            return Err(ParseError {
                offset: lx.offset(),
                kind: ParseErrorKind::UnexpectedEnd { expected: "quoted text" },
            });
        };
        let text = match item.token {
            Token::Text(t) => t,
            other => {
                return Err(ParseError {
                    offset: item.offset,
                    kind: ParseErrorKind::UnexpectedToken {
                        expected: "quoted text",
                        found: other.to_string(),
                    },
                })
            }
        };
        let role = match next(&mut lx, true)? {
            Some(Spanned { token: Token::Role(r), .. }) => r,
            Some(Spanned { token, offset }) => {
                // a known non-role tag in role position is still a bad role
                let kind = match token {
                    t @ (Token::ClassStr | Token::ClassTxt) => tag_role(&t),
                    t if t.is_marker() => tag_role(&t),
                    _ => ParseErrorKind::MissingRole,
                };
                return Err(ParseError { offset, kind });
            }
            None => return Err(ParseError { offset: lx.offset(), kind: ParseErrorKind::MissingRole }),
        };
        let word = ConditionWord { text, role };
        if !word.is_valid() {
            return Err(ParseError { offset: item.offset, kind: ParseErrorKind::InvalidWord(word.text) });
        }
        words.push(word);
        match next(&mut lx, false)? {
            None => return Ok(words),
            Some(Spanned { token: Token::Comma, .. }) => {}
            Some(Spanned { offset, .. }) => {
                return Err(ParseError { offset, kind: ParseErrorKind::TrailingInput })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ConditionRole::*;
    use alloc::vec;

    fn w(t: &str, r: crate::model::ConditionRole) -> ConditionWord {
        ConditionWord::new(t, r)
    }

    #[test]
    fn emit_examples() {
        assert_eq!(
            emit_condition_sequence(&[w("ArCHO", Agt), w("THF", Svt)]).unwrap(),
            "'ArCHO'[Agt],'THF'[Svt]"
        );
        assert_eq!(emit_condition_sequence(&[]).unwrap(), "");
        assert_eq!(emit_condition_sequence(&[w("35C", Tem)]).unwrap(), "'35C'[Tem]");
        assert!(emit_condition_sequence(&[w("a b", Tem)]).is_err());
        assert!(emit_condition_sequence(&[w("it's", Tem)]).is_err());
        assert!(emit_condition_sequence(&[w("", Tem)]).is_err());
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse_condition_sequence("'H2'[Agt],'PdC'[Agt],'35C'[Tem]").unwrap(),
            vec![w("H2", Agt), w("PdC", Agt), w("35C", Tem)]
        );
        assert_eq!(
            parse_condition_sequence(" 'THF' [Svt] ,\n'2h'[Time], '90%'[Yld]").unwrap(),
            vec![w("THF", Svt), w("2h", Time), w("90%", Yld)]
        );
        assert_eq!(parse_condition_sequence("").unwrap(), vec![]);
    }

    #[test]
    fn parse_errors() {
        let e = parse_condition_sequence("'x'[Foo]").unwrap_err();
        assert_eq!(e, ParseError { offset: 3, kind: ParseErrorKind::UnknownRole("Foo".into()) });
        let e = parse_condition_sequence("'x'[Str]").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownRole("Str".into()));
        let e = parse_condition_sequence("'x','y'[Agt]").unwrap_err();
        assert_eq!(e, ParseError { offset: 3, kind: ParseErrorKind::MissingRole });
        let e = parse_condition_sequence("'x'").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingRole);
        let e = parse_condition_sequence("'x'[Agt],'unterminated").unwrap_err();
        assert_eq!(e, ParseError { offset: 9, kind: ParseErrorKind::UnterminatedQuote });
        // an embedded quote closes the literal early and leaves garbage behind
        let e = parse_condition_sequence("'it's'[Agt]").unwrap_err();
        assert_eq!(e, ParseError { offset: 4, kind: ParseErrorKind::UnexpectedChar('s') });
        let e = parse_condition_sequence("'a b'[Agt]").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::InvalidWord("a b".into()));
        let e = parse_condition_sequence("'a'[Agt],").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::UnexpectedEnd { .. }));
        let e = parse_condition_sequence("'a'[Agt]'b'[Agt]").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::TrailingInput);
    }
}
