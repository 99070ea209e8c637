use proptest::prelude::*;
use rxnscheme_core::assemble::*;
use rxnscheme_core::synth::{generate_dataset, sample_records, FormulaDepictor, GenConfig};

#[test]
fn generated_ground_truth_closes() {
    let cfg = GenConfig { count: 150, master_seed: 99, ..Default::default() };
    let recs = sample_records(99, 900);
    for img in generate_dataset(&recs, &cfg, &FormulaDepictor).unwrap() {
        let out = assemble_annotation(&img.annotation).unwrap();
        assert_eq!(out.len(), img.layout.records.len());
        for (a, drawn) in out.iter().zip(&img.layout.records) {
            assert!(same_record_words(drawn, &a.to_record()), "{}: {drawn:?} vs {a:?}", img.annotation.image_id);
            let s = to_reaction_smiles(a).unwrap();
            assert_eq!(s.split('>').count(), 3);
            assert!(!s.chars().any(char::is_whitespace));
        }
        // the source records' condition text survives stitching untouched
        for (a, &k) in out.iter().zip(&img.entry.records) {
            let mut want = recs[k].condition_words();
            let mut got = a.to_record().condition_words();
            want.sort_by(|x, y| (x.role, &x.text).cmp(&(y.role, &y.text)));
            got.sort_by(|x, y| (x.role, &x.text).cmp(&(y.role, &y.text)));
            assert_eq!(want, got);
        }
    }
}

fn smiles() -> impl Strategy<Value = String> {
    "[A-Za-z0-9=#()\\[\\]@+-]{1,12}"
}

proptest! {
    #[test]
    fn reaction_smiles_has_three_segments(
        r in prop::collection::vec(smiles(), 1..4),
        a in prop::collection::vec(smiles(), 0..3),
        p in prop::collection::vec(smiles(), 1..4),
    ) {
        let rx = AssembledReaction { reactant_smiles: r.clone(), agent_smiles: a.clone(), product_smiles: p.clone(), ..Default::default() };
        let s = to_reaction_smiles(&rx).unwrap();
        let parts: Vec<&str> = s.split('>').collect();
        prop_assert_eq!(parts.len(), 3);
        prop_assert_eq!(parts[0], r.join("."));
        prop_assert_eq!(parts[1], a.join("."));
        prop_assert_eq!(parts[2], p.join("."));
    }
}
