//! Structural checks for annotations.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::model::{
    DetectedObject, ImageAnnotation, ObjectClass, ObjectId, ReactionAnnotation, ReactionRole,
};

/// One broken invariant, naming the field and id involved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ZeroImageDimension,
    DuplicateObjectId { id: ObjectId },
    DanglingId { reaction: usize, role: ReactionRole, id: ObjectId },
    EmptyReactants { reaction: usize },
    EmptyProducts { reaction: usize },
    ConditionTextUnknownObject { id: ObjectId },
    ConditionTextOnStructure { id: ObjectId },
    InvalidConditionWord { id: ObjectId, index: usize },
    SmilesUnknownObject { id: ObjectId },
    SmilesOnText { id: ObjectId },
    EmptySmiles { id: ObjectId },
}

impl Violation {
    /// Annotation field the violation refers to.
    pub fn field(&self) -> &'static str {
        match self {
            Self::ZeroImageDimension => "width_px/height_px",
            Self::DuplicateObjectId { .. } => "objects",
            Self::DanglingId { role, .. } => role.name(),
            Self::EmptyReactants { .. } => "reactants",
            Self::EmptyProducts { .. } => "products",
            Self::ConditionTextUnknownObject { .. }
            | Self::ConditionTextOnStructure { .. }
            | Self::InvalidConditionWord { .. } => "condition_texts",
            Self::SmilesUnknownObject { .. } | Self::SmilesOnText { .. } | Self::EmptySmiles { .. } => {
                "smiles"
            }
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ZeroImageDimension => write!(f, "image dimensions must be positive"),
            Self::DuplicateObjectId { id } => write!(f, "objects: duplicate id {id}"),
            Self::DanglingId { reaction, role, id } => {
                write!(f, "reactions[{reaction}].{}: id {id} has no object", role.name())
            }
            Self::EmptyReactants { reaction } => write!(f, "reactions[{reaction}].reactants: empty"),
            Self::EmptyProducts { reaction } => write!(f, "reactions[{reaction}].products: empty"),
            Self::ConditionTextUnknownObject { id } => {
                write!(f, "condition_texts: key {id} has no object")
            }
            Self::ConditionTextOnStructure { id } => {
                write!(f, "condition_texts: key {id} is not a Txt object")
            }
            Self::InvalidConditionWord { id, index } => write!(
                f,
                "condition_texts[{id}][{index}]: word is empty or contains whitespace"
            ),
            Self::SmilesUnknownObject { id } => write!(f, "smiles: key {id} has no object"),
            Self::SmilesOnText { id } => write!(f, "smiles: key {id} is not a Str object"),
            Self::EmptySmiles { id } => write!(f, "smiles[{id}]: empty string"),
        }
    }
}

/// Checks object-id uniqueness and reaction structure (references resolve,
/// reactants and products non-empty).
pub fn validate_structure(
    objects: &[DetectedObject],
    reactions: &[ReactionAnnotation],
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for o in objects {
        if !seen.insert(o.id) {
            out.push(Violation::DuplicateObjectId { id: o.id });
        }
    }
    for (i, r) in reactions.iter().enumerate() {
        if r.reactants.is_empty() {
            out.push(Violation::EmptyReactants { reaction: i });
        }
        if r.products.is_empty() {
            out.push(Violation::EmptyProducts { reaction: i });
        }
        for role in ReactionRole::ALL {
            for &id in r.role(role) {
                if !seen.contains(&id) {
                    out.push(Violation::DanglingId { reaction: i, role, id });
                }
            }
        }
    }
    out
}

/// Returns every invariant violation in `a`; empty means valid.
pub fn validate_annotation(a: &ImageAnnotation) -> Vec<Violation> {
    let mut out = Vec::new();
    if a.width_px == 0 || a.height_px == 0 {
        out.push(Violation::ZeroImageDimension);
    }
    out.extend(validate_structure(&a.objects, &a.reactions));
    let classes: BTreeMap<ObjectId, ObjectClass> = a.objects.iter().map(|o| (o.id, o.class)).collect();
    for (&id, words) in &a.condition_texts {
        match classes.get(&id) {
            None => out.push(Violation::ConditionTextUnknownObject { id }),
            Some(ObjectClass::Str) => out.push(Violation::ConditionTextOnStructure { id }),
            Some(ObjectClass::Txt) => {}
        }
        for (index, w) in words.iter().enumerate() {
            if !w.is_valid() {
                out.push(Violation::InvalidConditionWord { id, index });
            }
        }
    }
    for (&id, s) in &a.smiles {
        match classes.get(&id) {
            None => out.push(Violation::SmilesUnknownObject { id }),
            Some(ObjectClass::Txt) => out.push(Violation::SmilesOnText { id }),
            Some(ObjectClass::Str) => {}
        }
        if s.is_empty() {
            out.push(Violation::EmptySmiles { id });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BBox, ConditionRole, ConditionWord, Pattern};
    use alloc::string::ToString;
    use alloc::vec;

    fn obj(id: u32, class: ObjectClass, x: u16) -> DetectedObject {
        DetectedObject { id: ObjectId(id), class, bbox: BBox::new(x, 100, x + 50, 200).unwrap() }
    }

    fn single_line() -> ImageAnnotation {
        let mut a = ImageAnnotation {
            image_id: "img_0".into(),
            width_px: 800,
            height_px: 400,
            pattern: Pattern::SingleLine,
            objects: vec![
                obj(0, ObjectClass::Str, 10),
                obj(1, ObjectClass::Txt, 100),
                obj(2, ObjectClass::Str, 200),
            ],
            reactions: vec![ReactionAnnotation {
                reactants: vec![ObjectId(0)],
                conditions: vec![ObjectId(1)],
                products: vec![ObjectId(2)],
            }],
            condition_texts: Default::default(),
            smiles: Default::default(),
        };
        a.condition_texts.insert(ObjectId(1), vec![ConditionWord::new("THF", ConditionRole::Svt)]);
        a.smiles.insert(ObjectId(0), "CCO".into());
        a.smiles.insert(ObjectId(2), "CC=O".into());
        a
    }

    #[test]
    fn well_formed_is_clean() {
        assert_eq!(validate_annotation(&single_line()), vec![]);
    }

    #[test]
    fn dangling_id() {
        let mut a = single_line();
        a.reactions[0].products.push(ObjectId(99));
        let v = validate_annotation(&a);
        assert_eq!(
            v,
            vec![Violation::DanglingId { reaction: 0, role: ReactionRole::Product, id: ObjectId(99) }]
        );
        assert_eq!(v[0].field(), "products");
        assert!(v[0].to_string().contains("99"));
    }

    #[test]
    fn empty_products() {
        let mut a = single_line();
        a.reactions[0].products.clear();
        assert_eq!(validate_annotation(&a), vec![Violation::EmptyProducts { reaction: 0 }]);
    }

    #[test]
    fn map_keys_must_match_classes() {
        let mut a = single_line();
        a.condition_texts.insert(ObjectId(0), vec![]);
        a.smiles.insert(ObjectId(1), "C".into());
        a.smiles.insert(ObjectId(7), "C".into());
        a.objects.push(obj(2, ObjectClass::Str, 300));
        a.condition_texts.get_mut(&ObjectId(1)).unwrap().push(ConditionWord::new("a b", ConditionRole::Agt));
        let v = validate_annotation(&a);
        assert!(v.contains(&Violation::ConditionTextOnStructure { id: ObjectId(0) }));
        assert!(v.contains(&Violation::SmilesOnText { id: ObjectId(1) }));
        assert!(v.contains(&Violation::SmilesUnknownObject { id: ObjectId(7) }));
        assert!(v.contains(&Violation::DuplicateObjectId { id: ObjectId(2) }));
        assert!(v.contains(&Violation::InvalidConditionWord { id: ObjectId(1), index: 1 }));
    }
}
