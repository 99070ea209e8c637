use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::token::{Lexer, Spanned, Token};
use super::{EmitError, ParseError, ParseErrorKind};
use crate::model::{BBox, DetectedObject, ObjectClass, ObjectId, ReactionAnnotation, ReactionRole};
use crate::validate::validate_structure;

/// Objects (first-appearance order, deduplicated by id) and reactions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedSequence {
    pub objects: Vec<DetectedObject>,
    pub reactions: Vec<ReactionAnnotation>,
}

fn push_object(out: &mut Vec<Token>, o: &DetectedObject) {
    out.push(Token::LBracket);
    for c in o.bbox.to_array() {
        out.push(Token::Number(c));
        out.push(Token::Comma);
    }
    out.push(match o.class {
        ObjectClass::Str => Token::ClassStr,
        ObjectClass::Txt => Token::ClassTxt,
    });
    out.push(Token::Comma);
    out.push(Token::Id(o.id.0));
    out.push(Token::RBracket);
}

const BLOCKS: [(ReactionRole, Token, Token); 3] = [
    (ReactionRole::Reactant, Token::RctSt, Token::RctEd),
    (ReactionRole::Condition, Token::CndSt, Token::CndEd),
    (ReactionRole::Product, Token::PrdSt, Token::PrdEd),
];

/// Serializes reactions into the canonical reaction-sequence string.
pub fn emit_reaction_sequence(
    objects: &[DetectedObject],
    reactions: &[ReactionAnnotation],
) -> Result<String, EmitError> {
    let violations = validate_structure(objects, reactions);
    if !violations.is_empty() {
        return Err(EmitError::InvalidAnnotation(violations));
    }
    let by_id: BTreeMap<ObjectId, &DetectedObject> = objects.iter().map(|o| (o.id, o)).collect();
    let mut tokens = Vec::new();
    for r in reactions {
        tokens.push(Token::RxnSt);
        for (role, st, ed) in &BLOCKS {
            tokens.push(st.clone());
            for id in r.role(*role) {
                push_object(&mut tokens, by_id[id]);
            }
            tokens.push(ed.clone());
        }
        tokens.push(Token::RxnEd);
    }
    Ok(super::TokenSequence(tokens).render())
}

fn describe(t: &Token) -> String {
    t.to_string()
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<Option<Spanned>>,
    objects: Vec<DetectedObject>,
    index: BTreeMap<ObjectId, usize>,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Result<Option<&Spanned>, ParseError> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lexer.next_token()?);
        }
        Ok(self.peeked.as_ref().and_then(Option::as_ref))
    }

    fn bump(&mut self) -> Result<Option<Spanned>, ParseError> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lexer.next_token(),
        }
    }

    fn end_offset(&self) -> usize {
        self.lexer.offset()
    }

    fn expect(&mut self, want: &Token, expected: &'static str) -> Result<usize, ParseError> {
        match self.bump()? {
            Some(s) if &s.token == want => Ok(s.offset),
            Some(s) => {
                let found = describe(&s.token);
                let kind = if s.token.is_marker() && want.is_marker() {
                    ParseErrorKind::Unbalanced { expected, found }
                } else {
                    ParseErrorKind::UnexpectedToken { expected, found }
                };
                Err(ParseError { offset: s.offset, kind })
            }
            None => Err(ParseError {
                offset: self.end_offset(),
                kind: ParseErrorKind::UnexpectedEnd { expected },
            }),
        }
    }

    fn number(&mut self) -> Result<u16, ParseError> {
        match self.bump()? {
            Some(Spanned { token: Token::Number(n), .. }) => Ok(n),
            Some(s) => Err(ParseError {
                offset: s.offset,
                kind: ParseErrorKind::UnexpectedToken {
                    expected: "coordinate",
                    found: describe(&s.token),
                },
            }),
            None => Err(ParseError {
                offset: self.end_offset(),
                kind: ParseErrorKind::UnexpectedEnd { expected: "coordinate" },
            }),
        }
    }

    fn object(&mut self) -> Result<ObjectId, ParseError> {
        let start = self.expect(&Token::LBracket, "'['")?;
        let mut c = [0u16; 4];
        for slot in c.iter_mut() {
            *slot = self.number()?;
            self.expect(&Token::Comma, "','")?;
        }
        let class = match self.bump()? {
            Some(Spanned { token: Token::ClassStr, .. }) => ObjectClass::Str,
            Some(Spanned { token: Token::ClassTxt, .. }) => ObjectClass::Txt,
            Some(s) => {
                return Err(ParseError {
                    offset: s.offset,
                    kind: ParseErrorKind::UnexpectedToken {
                        expected: "[Str] or [Txt]",
                        found: describe(&s.token),
                    },
                })
            }
            None => {
                return Err(ParseError {
                    offset: self.end_offset(),
                    kind: ParseErrorKind::UnexpectedEnd { expected: "[Str] or [Txt]" },
                })
            }
        };
        self.expect(&Token::Comma, "','")?;
        let id = match self.bump()? {
            Some(Spanned { token: Token::Id(id), .. }) => ObjectId(id),
            Some(s) => {
                return Err(ParseError {
                    offset: s.offset,
                    kind: ParseErrorKind::UnexpectedToken {
                        expected: "object id",
                        found: describe(&s.token),
                    },
                })
            }
            None => {
                return Err(ParseError {
                    offset: self.end_offset(),
                    kind: ParseErrorKind::UnexpectedEnd { expected: "object id" },
                })
            }
        };
        self.expect(&Token::RBracket, "']'")?;
        let bbox = BBox::new(c[0], c[1], c[2], c[3])
            .map_err(|_| ParseError { offset: start, kind: ParseErrorKind::InvalidGeometry })?;
        let obj = DetectedObject { id, class, bbox };
        match self.index.get(&id) {
            Some(&i) if self.objects[i] == obj => {}
            Some(_) => {
                return Err(ParseError {
                    offset: start,
                    kind: ParseErrorKind::ConflictingObject { id: id.0 },
                })
            }
            None => {
                self.index.insert(id, self.objects.len());
                self.objects.push(obj);
            }
        }
        Ok(id)
    }

    /// Objects up to (not including) the closing marker.
    fn objects_until(&mut self, end: &Token) -> Result<Vec<ObjectId>, ParseError> {
        let mut ids = Vec::new();
        loop {
            match self.peek()? {
                Some(s) if &s.token == end => return Ok(ids),
                Some(s) if s.token.is_marker() => {
                    let expected = match end {
                        Token::RctEd => "[Rct/ed]",
                        Token::CndEd => "[Cnd/ed]",
                        _ => "[Prd/ed]",
                    };
                    return Err(ParseError {
                        offset: s.offset,
                        kind: ParseErrorKind::Unbalanced { expected, found: describe(&s.token) },
                    });
                }
                Some(s) if s.token == Token::Comma && !ids.is_empty() => {
                    self.bump()?;
                    ids.push(self.object()?);
                }
                _ => ids.push(self.object()?),
            }
        }
    }

    fn reaction(&mut self) -> Result<ReactionAnnotation, ParseError> {
        self.expect(&Token::RxnSt, "[Rxn/st]")?;
        let mut r = ReactionAnnotation::default();
        for (role, st, ed) in &BLOCKS {
            let st_name = match role {
                ReactionRole::Reactant => "[Rct/st]",
                ReactionRole::Condition => "[Cnd/st]",
                ReactionRole::Product => "[Prd/st]",
            };
            let block_start = self.expect(st, st_name)?;
            let ids = self.objects_until(ed)?;
            self.bump()?;
            match role {
                ReactionRole::Reactant if ids.is_empty() => {
                    return Err(ParseError { offset: block_start, kind: ParseErrorKind::EmptyReactants })
                }
                ReactionRole::Product if ids.is_empty() => {
                    return Err(ParseError { offset: block_start, kind: ParseErrorKind::EmptyProducts })
                }
                _ => {}
            }
            *r.role_mut(*role) = ids;
        }
        self.expect(&Token::RxnEd, "[Rxn/ed]")?;
        Ok(r)
    }
}

/// Parses a reaction sequence. Objects repeated under the same id with an
/// identical box and class collapse into one shared object.
pub fn parse_reaction_sequence(s: &str) -> Result<ParsedSequence, ParseError> {
    let mut p = Parser { lexer: Lexer::new(s), peeked: None, objects: Vec::new(), index: BTreeMap::new() };
    let mut reactions = Vec::new();
    loop {
        match p.peek()? {
            None => break,
            Some(t) if t.token == Token::Comma && !reactions.is_empty() => {
                p.bump()?;
                reactions.push(p.reaction()?);
            }
            Some(t) if t.token == Token::RxnSt => reactions.push(p.reaction()?),
            Some(t) => {
                let offset = t.offset;
                return Err(ParseError { offset, kind: ParseErrorKind::TrailingInput });
            }
        }
    }
    Ok(ParsedSequence { objects: p.objects, reactions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn obj(id: u32, class: ObjectClass, b: [u16; 4]) -> DetectedObject {
        DetectedObject { id: ObjectId(id), class, bbox: BBox::try_from(b).unwrap() }
    }

    fn ids(v: &[u32]) -> Vec<ObjectId> {
        v.iter().copied().map(ObjectId).collect()
    }

    const ONE: &str = "[Rxn/st][Rct/st][010,020,100,200,[Str],0][Rct/ed][Cnd/st][Cnd/ed][Prd/st][300,020,400,200,[Str],1][Prd/ed][Rxn/ed]";

    fn one() -> (Vec<DetectedObject>, Vec<ReactionAnnotation>) {
        (
            vec![
                obj(0, ObjectClass::Str, [10, 20, 100, 200]),
                obj(1, ObjectClass::Str, [300, 20, 400, 200]),
            ],
            vec![ReactionAnnotation { reactants: ids(&[0]), conditions: vec![], products: ids(&[1]) }],
        )
    }

    #[test]
    fn emit_single_reaction() {
        let (o, r) = one();
        assert_eq!(emit_reaction_sequence(&o, &r).unwrap(), ONE);
    }

    #[test]
    fn parse_single_reaction() {
        let (o, r) = one();
        assert_eq!(parse_reaction_sequence(ONE).unwrap(), ParsedSequence { objects: o, reactions: r });
    }

    #[test]
    fn empty_list() {
        assert_eq!(emit_reaction_sequence(&[], &[]).unwrap(), "");
        assert_eq!(parse_reaction_sequence("  \n").unwrap(), ParsedSequence::default());
    }

    #[test]
    fn two_reactions_concatenate() {
        let (mut o, mut r) = one();
        o.push(obj(2, ObjectClass::Txt, [500, 0, 600, 50]));
        o.push(obj(3, ObjectClass::Str, [700, 20, 800, 200]));
        r.push(ReactionAnnotation { reactants: ids(&[1]), conditions: ids(&[2]), products: ids(&[3]) });
        let s = emit_reaction_sequence(&o, &r).unwrap();
        assert_eq!(s.matches("[Rxn/st]").count(), 2);
        assert!(s.starts_with(ONE));
        assert!(s.ends_with("[Cnd/st][500,000,600,050,[Txt],2][Cnd/ed][Prd/st][700,020,800,200,[Str],3][Prd/ed][Rxn/ed]"));
        let back = parse_reaction_sequence(&s).unwrap();
        assert_eq!(back.objects, o);
        assert_eq!(back.reactions, r);
    }

    #[test]
    fn shared_intermediate_collapses() {
        let s = "[Rxn/st][Rct/st][010,020,100,200,[Str],0][Rct/ed][Cnd/st][Cnd/ed][Prd/st][300,020,400,200,[Str],3][Prd/ed][Rxn/ed]\
                 [Rxn/st][Rct/st][300,020,400,200,[Str],3][Rct/ed][Cnd/st][Cnd/ed][Prd/st][500,020,600,200,[Str],4][Prd/ed][Rxn/ed]";
        let p = parse_reaction_sequence(s).unwrap();
        assert_eq!(p.objects.len(), 3);
        assert_eq!(p.reactions.len(), 2);
        assert_eq!(p.reactions[0].products, ids(&[3]));
        assert_eq!(p.reactions[1].reactants, ids(&[3]));
    }

    #[test]
    fn whitespace_and_optional_commas() {
        let s = " [Rxn/st] [Rct/st] [ 10 , 20 , 100 , 200 , [Str] , 0 ] [Rct/ed]\n[Cnd/st][Cnd/ed]\t[Prd/st][300,20,400,200,[Str],1][Prd/ed] [Rxn/ed] ";
        let p = parse_reaction_sequence(s).unwrap();
        assert_eq!(emit_reaction_sequence(&p.objects, &p.reactions).unwrap(), ONE);
        let comma = ONE.replace("[Rxn/ed]", "[Rxn/ed],") + ONE;
        let p = parse_reaction_sequence(&comma).unwrap();
        assert_eq!(p.reactions.len(), 2);
        assert_eq!(p.objects.len(), 2);
    }

    #[test]
    fn empty_reactants_rejected() {
        let s = "[Rxn/st][Rct/st][Rct/ed][Cnd/st][Cnd/ed][Prd/st][300,020,400,200,[Str],1][Prd/ed][Rxn/ed]";
        let e = parse_reaction_sequence(s).unwrap_err();
        assert_eq!(e, ParseError { offset: 8, kind: ParseErrorKind::EmptyReactants });
        let s = "[Rxn/st][Rct/st][010,020,100,200,[Str],0][Rct/ed][Cnd/st][Cnd/ed][Prd/st][Prd/ed][Rxn/ed]";
        assert_eq!(parse_reaction_sequence(s).unwrap_err().kind, ParseErrorKind::EmptyProducts);
    }

    #[test]
    fn structural_errors() {
        type Case = (&'static str, fn(&ParseErrorKind) -> bool);
        let cases: &[Case] = &[
            ("[Rxn/st][Rct/st][010,020,100,200,[Str],0][Rxn/ed]", |k| matches!(k, ParseErrorKind::Unbalanced { .. })),
            ("[Rxn/st][Rct/st][100,020,100,200,[Str],0][Rct/ed]", |k| *k == ParseErrorKind::InvalidGeometry),
            ("[Rxn/st][Rct/st][010,020,100,1200,[Str],0][Rct/ed]", |k| *k == ParseErrorKind::CoordinateOutOfRange),
            ("[Rxn/st][Rct/st][010,020,100,200,[Str],0]", |k| matches!(k, ParseErrorKind::UnexpectedEnd { .. })),
            ("[Rct/st]", |k| *k == ParseErrorKind::TrailingInput),
            ("[Rxn/st][Rct/st][010,020,100,200,[Foo],0][Rct/ed]", |k| matches!(k, ParseErrorKind::UnknownTag(_))),
        ];
        for (s, check) in cases {
            let e = parse_reaction_sequence(s).unwrap_err();
            assert!(check(&e.kind), "{s}: {e}");
        }
        let trailing = alloc::format!("{ONE} junk");
        let e = parse_reaction_sequence(&trailing).unwrap_err();
        assert_eq!(e.offset, ONE.len() + 1);
    }

    #[test]
    fn conflicting_reuse_rejected() {
        let s = "[Rxn/st][Rct/st][010,020,100,200,[Str],0][Rct/ed][Cnd/st][Cnd/ed][Prd/st][300,020,400,200,[Str],0][Prd/ed][Rxn/ed]";
        let e = parse_reaction_sequence(s).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::ConflictingObject { id: 0 });
        assert_eq!(e.offset, s.find("[300").unwrap());
    }

    #[test]
    fn emit_refuses_invalid() {
        let (o, mut r) = one();
        r[0].products.clear();
        assert!(matches!(emit_reaction_sequence(&o, &r), Err(EmitError::InvalidAnnotation(_))));
    }
}
