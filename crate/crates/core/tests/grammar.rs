use proptest::prelude::*;
use rxnscheme_core::grammar::*;
use rxnscheme_core::{BBox, ConditionRole, ConditionWord, DetectedObject, ObjectClass, ObjectId, ReactionAnnotation};

fn bbox() -> impl Strategy<Value = BBox> {
    (0u16..999, 0u16..999, 1u16..=999, 1u16..=999).prop_map(|(x, y, w, h)| {
        let x1 = (x + w).min(999).max(x + 1);
        let y1 = (y + h).min(999).max(y + 1);
        BBox::new(x, y, x1, y1).unwrap()
    })
}

fn objects() -> impl Strategy<Value = Vec<DetectedObject>> {
    prop::collection::btree_set(any::<u32>(), 1..10).prop_flat_map(|ids| {
        let n = ids.len();
        (Just(ids), prop::collection::vec((bbox(), any::<bool>()), n)).prop_map(|(ids, rest)| {
            ids.into_iter()
                .zip(rest)
                .map(|(id, (bbox, s))| DetectedObject {
                    id: ObjectId(id),
                    class: if s { ObjectClass::Str } else { ObjectClass::Txt },
                    bbox,
                })
                .collect()
        })
    })
}

fn fixture() -> impl Strategy<Value = (Vec<DetectedObject>, Vec<ReactionAnnotation>)> {
    objects().prop_flat_map(|objs| {
        let n = objs.len();
        let pick = move |lo| prop::collection::vec(0..n, lo..4);
        let rxn = (pick(1), pick(0), pick(1));
        (Just(objs), prop::collection::vec(rxn, 0..5)).prop_map(|(objs, rs)| {
            let id = |v: Vec<usize>| v.into_iter().map(|i| objs[i].id).collect();
            let reactions =
                rs.into_iter().map(|(r, c, p)| ReactionAnnotation { reactants: id(r), conditions: id(c), products: id(p) }).collect();
            (objs, reactions)
        })
    })
}

fn word() -> impl Strategy<Value = ConditionWord> {
    ("[^\\s']{1,8}", 0usize..5).prop_map(|(t, r)| ConditionWord::new(t, ConditionRole::ALL[r]))
}

const PIECES: &[&str] = &[
    "[Rxn/st]", "[Rxn/ed]", "[Rct/st]", "[Rct/ed]", "[Cnd/st]", "[Cnd/ed]", "[Prd/st]", "[Prd/ed]", "[Str]",
    "[Txt]", "[", "]", ",", "12", "999", "1000", "0", "'Pd'", "[Agt]", "[Svt]", "[Tem]", "[Time]", "[Yld]",
    "'", " ", "[Foo]", "4294967296", "7",
];

proptest! {
    #[test]
    fn reaction_sequence_round_trip((objs, rxns) in fixture()) {
        let s = emit_reaction_sequence(&objs, &rxns).unwrap();
        let parsed = parse_reaction_sequence(&s).unwrap();
        prop_assert_eq!(&parsed.reactions, &rxns);
        let again = emit_reaction_sequence(&parsed.objects, &parsed.reactions).unwrap();
        prop_assert_eq!(again, s);
    }

    #[test]
    fn whitespace_is_insignificant((objs, rxns) in fixture()) {
        let s = emit_reaction_sequence(&objs, &rxns).unwrap();
        let spaced = s.replace("][", "] [").replace(',', " , ");
        let parsed = parse_reaction_sequence(&spaced).unwrap();
        prop_assert_eq!(emit_reaction_sequence(&parsed.objects, &parsed.reactions).unwrap(), s);
    }

    #[test]
    fn condition_sequence_round_trip(words in prop::collection::vec(word(), 0..8)) {
        let s = emit_condition_sequence(&words).unwrap();
        let parsed = parse_condition_sequence(&s).unwrap();
        prop_assert_eq!(&parsed, &words);
        prop_assert_eq!(emit_condition_sequence(&parsed).unwrap(), s);
    }

    #[test]
    fn parsers_never_panic_on_bytes(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
        let s = String::from_utf8_lossy(&bytes);
        if let Err(e) = parse_reaction_sequence(&s) {
            prop_assert!(e.offset <= s.len());
        }
        if let Err(e) = parse_condition_sequence(&s) {
            prop_assert!(e.offset <= s.len());
        }
    }

    #[test]
    fn parsers_never_panic_on_token_soup(picks in prop::collection::vec(0..PIECES.len(), 0..40)) {
        let s: String = picks.into_iter().map(|i| PIECES[i]).collect();
        match parse_reaction_sequence(&s) {
            Ok(p) => {
                let again = emit_reaction_sequence(&p.objects, &p.reactions).unwrap();
                prop_assert_eq!(parse_reaction_sequence(&again).unwrap(), p);
            }
            Err(e) => prop_assert!(e.offset <= s.len()),
        }
        match parse_condition_sequence(&s) {
            Ok(w) => prop_assert_eq!(parse_condition_sequence(&emit_condition_sequence(&w).unwrap()).unwrap(), w),
            Err(e) => prop_assert!(e.offset <= s.len()),
        }
    }
}

#[test]
fn malformed_sequence_is_positioned() {
    let err = parse_reaction_sequence("[Rxn/st][Rct/st][Rct/ed]").unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::EmptyReactants);
    let err = parse_reaction_sequence("[Rxn/st]x").unwrap_err();
    assert_eq!((err.offset, err.kind), (8, ParseErrorKind::UnexpectedChar('x')));
}
