//! Oracle-agreement checks over a freshly generated corpus.

use rxnscheme_core::assemble::{assemble_annotation, same_record_words, to_reaction_smiles};
use rxnscheme_core::grammar::{emit_condition_sequence, emit_reaction_sequence, parse_condition_sequence, parse_reaction_sequence};
use rxnscheme_core::metrics::{score_images, MatchMode};
use rxnscheme_core::perturb::{apply_corpus, expected_report, PerturbationPlan, Step};
use rxnscheme_core::synth::{generate_dataset, role_placement_violations, sample_records, FormulaDepictor, GenConfig, GeneratedImage};
use rxnscheme_core::{validate_annotation, ImageAnnotation, Prediction};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfCheckReport {
    pub images: usize,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn check(name: &'static str, result: Result<String, String>) -> Check {
    match result {
        Ok(detail) => Check { name, passed: true, detail },
        Err(detail) => Check { name, passed: false, detail },
    }
}

fn preds(v: &[ImageAnnotation]) -> Vec<Prediction> {
    v.iter().map(ImageAnnotation::to_prediction).collect()
}

fn soundness(images: &[GeneratedImage]) -> Result<String, String> {
    for img in images {
        let v = validate_annotation(&img.annotation);
        if !v.is_empty() {
            return Err(format!("{}: {} violations", img.annotation.image_id, v.len()));
        }
        let m = role_placement_violations(&img.layout);
        if let Some(m) = m.first() {
            return Err(format!("{}: word {:?} on the wrong side", img.annotation.image_id, m.word));
        }
    }
    Ok(format!("{} annotations valid", images.len()))
}

fn identity(gts: &[ImageAnnotation]) -> Result<String, String> {
    let r = score_images(&preds(gts), gts, MatchMode::Both).map_err(|e| e.to_string())?;
    let ones = [r.hard, r.soft].iter().flatten().all(|m| m.precision == 1.0 && m.recall == 1.0 && m.f1 == 1.0);
    if ones {
        Ok("hard and soft scores are exactly 1".into())
    } else {
        Err(format!("{r:?}"))
    }
}

fn plans(seed: u64) -> Vec<PerturbationPlan> {
    vec![
        PerturbationPlan::new(seed, vec![Step::DropReactions { count: 1 }]),
        PerturbationPlan::new(seed, vec![Step::DuplicateReaction { index: 0 }]),
        PerturbationPlan::new(seed, vec![Step::JitterBoxes { max_shift_fraction: 0.1 }]),
        PerturbationPlan::new(
            seed,
            vec![Step::JitterBoxes { max_shift_fraction: 0.05 }, Step::DuplicateReaction { index: 0 }, Step::DropReactions { count: 1 }],
        ),
    ]
}

fn oracle(gts: &[ImageAnnotation], seed: u64) -> Result<String, String> {
    let mut n = 0;
    for plan in plans(seed) {
        let pred = apply_corpus(&plan, gts).map_err(|e| e.to_string())?;
        let got = score_images(&preds(&pred), gts, MatchMode::Both).map_err(|e| e.to_string())?;
        let want = expected_report(&plan, gts, MatchMode::Both).map_err(|e| e.to_string())?;
        if got != want {
            return Err(format!("plan {:?}: scored {:?}, expected {:?}", plan.steps, got.hard, want.hard));
        }
        let (h, s) = (got.hard.expect("both modes"), got.soft.expect("both modes"));
        if h.f1 > s.f1 {
            return Err(format!("plan {:?}: hard F1 {} above soft F1 {}", plan.steps, h.f1, s.f1));
        }
        n += 1;
    }
    Ok(format!("{n} plans agree with their expected reports"))
}

fn grammar(gts: &[ImageAnnotation]) -> Result<String, String> {
    for a in gts {
        let s = emit_reaction_sequence(&a.objects, &a.reactions).map_err(|e| format!("{}: {e}", a.image_id))?;
        let p = parse_reaction_sequence(&s).map_err(|e| format!("{}: {e}", a.image_id))?;
        let again = emit_reaction_sequence(&p.objects, &p.reactions).map_err(|e| e.to_string())?;
        if again != s || p.reactions != a.reactions {
            return Err(format!("{}: reaction sequence does not round-trip", a.image_id));
        }
        for (id, words) in &a.condition_texts {
            let s = emit_condition_sequence(words).map_err(|e| format!("{}#{}: {e}", a.image_id, id.0))?;
            if parse_condition_sequence(&s).as_ref() != Ok(words) {
                return Err(format!("{}#{}: condition sequence does not round-trip", a.image_id, id.0));
            }
        }
    }
    Ok("every sequence round-trips".into())
}

fn closure(images: &[GeneratedImage]) -> Result<String, String> {
    let mut n = 0;
    for img in images {
        let out = assemble_annotation(&img.annotation).map_err(|e| format!("{}: {e}", img.annotation.image_id))?;
        for (a, drawn) in out.iter().zip(&img.layout.records) {
            if !same_record_words(drawn, &a.to_record()) {
                return Err(format!("{}: assembled record differs from its source", img.annotation.image_id));
            }
            let s = to_reaction_smiles(a).map_err(|e| e.to_string())?;
            if s.matches('>').count() != 2 {
                return Err(format!("{}: {s:?} is not a three-part reaction SMILES", img.annotation.image_id));
            }
            n += 1;
        }
    }
    Ok(format!("{n} reactions reassemble to their records"))
}

/// Generates `count` images from sample records and runs every check.
pub fn run(count: usize, seed: u64) -> Result<SelfCheckReport, rxnscheme_core::synth::SynthError> {
    let cfg = GenConfig { count, master_seed: seed, ..Default::default() };
    let images = generate_dataset(&sample_records(seed, count * 6), &cfg, &FormulaDepictor)?;
    let gts: Vec<ImageAnnotation> = images.iter().map(|i| i.annotation.clone()).collect();
    let checks = vec![
        check("generator_soundness", soundness(&images)),
        check("identity_oracle", identity(&gts)),
        check("perturbation_oracle", oracle(&gts, seed)),
        check("grammar_round_trip", grammar(&gts)),
        check("assembly_closure", closure(&images)),
    ];
    Ok(SelfCheckReport { images: images.len(), seed, passed: checks.iter().all(|c| c.passed), checks })
}
