//! Reaction records from component and condition outputs.
//!
//! Molecule objects contribute SMILES through an injected map, text objects
//! contribute condition words routed by role. Text-only agents never enter
//! the reaction SMILES string; they stay in the metadata fields.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{
    ConditionRole, ConditionWord, ImageAnnotation, ObjectClass, ObjectId, Prediction, ReactionAnnotation,
    ReactionRecord,
};

/// Separator between repeated occurrences of a scalar role.
pub const SCALAR_SEPARATOR: &str = "; ";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AssembleError {
    #[error("object {id} is referenced by reaction {reaction} but has no SMILES")]
    IncompleteAssembly { reaction: usize, id: u32 },
    #[error("reaction {reaction} references unknown object {id}")]
    UnknownObject { reaction: usize, id: u32 },
    #[error("reaction has no reactant SMILES")]
    EmptyReactants,
    #[error("reaction has no product SMILES")]
    EmptyProducts,
    #[error("SMILES {0:?} contains whitespace or '>'")]
    InvalidSmiles(String),
}

/// Object ids behind each slot, in the order the reaction lists them.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SlotIds {
    pub reactants: Vec<ObjectId>,
    pub conditions: Vec<ObjectId>,
    pub products: Vec<ObjectId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AssembledReaction {
    pub reactant_smiles: Vec<String>,
    pub agent_smiles: Vec<String>,
    pub product_smiles: Vec<String>,
    pub agents_text: Vec<String>,
    pub solvents_text: Vec<String>,
    pub temperature: Option<String>,
    pub time: Option<String>,
    pub yield_pct: Option<String>,
    pub provenance: SlotIds,
}

fn push_scalar(slot: &mut Option<String>, run: String) {
    match slot {
        None => *slot = Some(run),
        Some(s) => {
            s.push_str(SCALAR_SEPARATOR);
            s.push_str(&run);
        }
    }
}

impl AssembledReaction {
    /// Routes one text object's words. Agents and solvents keep one entry
    /// per word; consecutive words of a scalar role form one occurrence.
    fn route(&mut self, words: &[ConditionWord]) {
        let mut i = 0;
        while i < words.len() {
            let role = words[i].role;
            match role {
                ConditionRole::Agt => self.agents_text.push(words[i].text.clone()),
                ConditionRole::Svt => self.solvents_text.push(words[i].text.clone()),
                _ => {
                    let mut j = i + 1;
                    while j < words.len() && words[j].role == role {
                        j += 1;
                    }
                    let run = words[i..j].iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" ");
                    let slot = match role {
                        ConditionRole::Tem => &mut self.temperature,
                        ConditionRole::Time => &mut self.time,
                        _ => &mut self.yield_pct,
                    };
                    push_scalar(slot, run);
                    i = j;
                    continue;
                }
            }
            i += 1;
        }
    }

    /// Back to a source-style record: structure agents first, then text
    /// agents word by word.
    pub fn to_record(&self) -> ReactionRecord {
        let mut agents = self.agent_smiles.clone();
        agents.extend(self.agents_text.iter().cloned());
        ReactionRecord {
            reactant_smiles: self.reactant_smiles.clone(),
            product_smiles: self.product_smiles.clone(),
            agents,
            solvents: self.solvents_text.clone(),
            temperature: self.temperature.clone(),
            time: self.time.clone(),
            yield_pct: self.yield_pct.clone(),
        }
    }
}

fn assemble_one(
    index: usize,
    rxn: &ReactionAnnotation,
    classes: &BTreeMap<ObjectId, ObjectClass>,
    words: &BTreeMap<ObjectId, Vec<ConditionWord>>,
    smiles: &BTreeMap<ObjectId, String>,
) -> Result<AssembledReaction, AssembleError> {
    let class = |id: &ObjectId| {
        classes.get(id).copied().ok_or(AssembleError::UnknownObject { reaction: index, id: id.0 })
    };
    let smiles_of = |id: &ObjectId| {
        smiles.get(id).cloned().ok_or(AssembleError::IncompleteAssembly { reaction: index, id: id.0 })
    };
    let mut out = AssembledReaction {
        provenance: SlotIds {
            reactants: rxn.reactants.clone(),
            conditions: rxn.conditions.clone(),
            products: rxn.products.clone(),
        },
        ..Default::default()
    };
    for id in &rxn.reactants {
        if class(id)? == ObjectClass::Str {
            out.reactant_smiles.push(smiles_of(id)?);
        }
    }
    for id in &rxn.conditions {
        match class(id)? {
            ObjectClass::Str => out.agent_smiles.push(smiles_of(id)?),
            ObjectClass::Txt => out.route(words.get(id).map_or(&[][..], Vec::as_slice)),
        }
    }
    for id in &rxn.products {
        if class(id)? == ObjectClass::Str {
            out.product_smiles.push(smiles_of(id)?);
        }
    }
    Ok(out)
}

/// One record per predicted reaction. Text objects without words contribute
/// nothing; molecule objects without SMILES are an error.
pub fn assemble(
    pred: &Prediction,
    condition_words: &BTreeMap<ObjectId, Vec<ConditionWord>>,
    smiles: &BTreeMap<ObjectId, String>,
) -> Result<Vec<AssembledReaction>, AssembleError> {
    let classes: BTreeMap<ObjectId, ObjectClass> = pred.objects.iter().map(|o| (o.id, o.class)).collect();
    pred.reactions
        .iter()
        .enumerate()
        .map(|(i, r)| assemble_one(i, r, &classes, condition_words, smiles))
        .collect()
}

/// [`assemble`] with an annotation's own text and SMILES maps.
pub fn assemble_annotation(a: &ImageAnnotation) -> Result<Vec<AssembledReaction>, AssembleError> {
    assemble(&a.to_prediction(), &a.condition_texts, &a.smiles)
}

/// `reactants>agents>products`, components joined with `.` in listed order.
pub fn to_reaction_smiles(r: &AssembledReaction) -> Result<String, AssembleError> {
    if r.reactant_smiles.is_empty() {
        return Err(AssembleError::EmptyReactants);
    }
    if r.product_smiles.is_empty() {
        return Err(AssembleError::EmptyProducts);
    }
    let all = r.reactant_smiles.iter().chain(&r.agent_smiles).chain(&r.product_smiles);
    if let Some(bad) = all.clone().find(|s| s.is_empty() || s.contains('>') || s.chars().any(char::is_whitespace)) {
        return Err(AssembleError::InvalidSmiles(bad.clone()));
    }
    let seg = |v: &[String]| v.join(".");
    Ok(alloc::format!("{}>{}>{}", seg(&r.reactant_smiles), seg(&r.agent_smiles), seg(&r.product_smiles)))
}

/// Whether two records carry the same molecules and the same condition
/// words, ignoring how the words were grouped into entries.
pub fn same_record_words(a: &ReactionRecord, b: &ReactionRecord) -> bool {
    a.reactant_smiles == b.reactant_smiles && a.product_smiles == b.product_smiles && a.condition_words() == b.condition_words()
}
