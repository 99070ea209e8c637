//! The `rxnscheme` command line. Every subcommand parses its inputs, calls
//! one library operation, and prints JSON on stdout.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rxnscheme_core::assemble::{assemble, to_reaction_smiles, AssembledReaction};
use rxnscheme_core::grammar::{
    emit_condition_sequence, emit_reaction_sequence, parse_condition_sequence, parse_reaction_sequence,
};
use rxnscheme_core::metrics::{cri_evaluate_corpus, score_images, MatchMode};
use rxnscheme_core::perturb::{apply_corpus, expected_report, PerturbationPlan};
use rxnscheme_core::seed::DEFAULT_SEED;
use rxnscheme_core::synth::{sample_records, FormulaDepictor, GenConfig};
use rxnscheme_core::{ObjectId, Prediction};
use serde::Serialize;

use crate::dataset::{write_dataset, write_splits};
use crate::io::{
    load_annotations, load_condition_records, load_predictions, read_json, read_manifest, read_records, read_text,
    to_json_string, write_json,
};

#[derive(Parser, Debug)]
#[command(name = "rxnscheme", version, about = "Synthetic reaction-scheme data, output grammars, and metrics")]
pub struct Cli {
    /// Seed for every stochastic step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Log progress to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Mode {
    Hard,
    Soft,
    Both,
}

impl From<Mode> for MatchMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Hard => MatchMode::Hard,
            Mode::Soft => MatchMode::Soft,
            Mode::Both => MatchMode::Both,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Render a synthetic dataset: SVG images, annotations, and a manifest.
    Generate {
        /// Reaction records, one JSON object per line. Built-in samples when absent.
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long, env = "RXNSCHEME_OUT")]
        out: PathBuf,
        #[arg(long)]
        count: Option<usize>,
        /// Generator configuration as JSON; missing keys take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Reuse records from the start when they run out.
        #[arg(long)]
        recycle: bool,
    },
    /// Partition a manifest into train, validation, and test manifests.
    Split {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.1, 0.1])]
        ratios: Vec<f64>,
        /// Defaults to the manifest's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Annotations to reaction-sequence strings.
    EmitSeq {
        #[arg(long)]
        input: PathBuf,
    },
    /// A reaction-sequence string to a prediction.
    ParseSeq {
        #[arg(long, default_value = "-")]
        input: PathBuf,
        #[arg(long, default_value = "")]
        image_id: String,
    },
    /// Condition texts to condition-role strings.
    EmitCond {
        #[arg(long)]
        input: PathBuf,
    },
    /// A condition-role string to words.
    ParseCond {
        #[arg(long, default_value = "-")]
        input: PathBuf,
    },
    /// Reaction-level precision, recall, and F1.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
        #[arg(long)]
        per_pattern: bool,
    },
    /// OCR and condition-role accuracy.
    CriEval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
    },
    /// Predictions with controlled defects.
    Perturb {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Where to write predictions; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the report the predictions must score.
        #[arg(long)]
        expected: bool,
    },
    /// Reaction records and reaction SMILES from annotations.
    Assemble {
        #[arg(long)]
        input: PathBuf,
        /// Condition records to use instead of the annotations' own texts.
        #[arg(long)]
        conditions: Option<PathBuf>,
    },
    /// Generate a corpus and check the metrics against their oracles.
    Selfcheck {
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
}

/// How a run ended.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
        }
    }
}

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

fn at(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

#[derive(Serialize)]
struct Sequence<'a> {
    image_id: &'a str,
    sequence: String,
}

#[derive(Serialize)]
struct ConditionSequence<'a> {
    image_id: &'a str,
    object_id: ObjectId,
    sequence: String,
}

#[derive(Serialize)]
struct GenerateSummary<'a> {
    out: &'a Path,
    images: usize,
    patterns: BTreeMap<String, usize>,
}

#[derive(Serialize)]
struct SplitSummary {
    train: usize,
    val: usize,
    test: usize,
}

#[derive(Serialize)]
struct ImageAssembly<'a> {
    image_id: &'a str,
    reactions: Vec<AssembledReaction>,
    reaction_smiles: Vec<String>,
}

fn log(verbose: u8, msg: impl FnOnce() -> String) {
    if verbose > 0 {
        eprintln!("{}", msg());
    }
}

/// Runs one command and returns the JSON document to print.
pub fn execute(cli: &Cli) -> Result<String, Failure> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let v = cli.verbose;
    match &cli.command {
        Command::Generate { records, out, count, config, recycle } => {
            let mut cfg: GenConfig = match config {
                Some(p) => read_json(p).map_err(data)?,
                None => GenConfig::default(),
            };
            if let Some(n) = count {
                cfg.count = *n;
            }
            if let Some(s) = cli.seed {
                cfg.master_seed = s;
            } else if config.is_none() {
                cfg.master_seed = seed;
            }
            cfg.recycle_records |= recycle;
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let recs = match records {
                Some(p) => read_records(p).map_err(data)?,
                None => {
                    let most = cfg.reactions_per_image.values().map(|r| r.max as usize).max().unwrap_or(1);
                    sample_records(cfg.master_seed, cfg.count * most)
                }
            };
            log(v, || format!("generating {} images from {} records", cfg.count, recs.len()));
            let entries = write_dataset(&recs, &cfg, &FormulaDepictor, out).map_err(data)?;
            let mut patterns = BTreeMap::new();
            for e in &entries {
                *patterns.entry(format!("{:?}", e.pattern)).or_default() += 1;
            }
            Ok(to_json_string(&GenerateSummary { out, images: entries.len(), patterns }))
        }
        Command::Split { manifest, ratios, out } => {
            let entries = read_manifest(manifest).map_err(data)?;
            let ratios: [f64; 3] = ratios.as_slice().try_into().map_err(|_| Failure::Usage("need three ratios".into()))?;
            let dir = match out {
                Some(d) => d.clone(),
                None if manifest.is_dir() => manifest.clone(),
                None => manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
            };
            let [a, b, c] = write_splits(&entries, &ratios, seed, &dir).map_err(|e| Failure::Usage(e.to_string()))?;
            Ok(to_json_string(&SplitSummary { train: a.len(), val: b.len(), test: c.len() }))
        }
        Command::EmitSeq { input } => {
            let preds = load_predictions(input).map_err(data)?;
            let out = preds
                .iter()
                .map(|p| {
                    let sequence = emit_reaction_sequence(&p.objects, &p.reactions)
                        .map_err(|e| at(input, format!("{}: {e}", p.image_id)))?;
                    Ok(Sequence { image_id: &p.image_id, sequence })
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            Ok(to_json_string(&out))
        }
        Command::ParseSeq { input, image_id } => {
            let text = read_text(input).map_err(data)?;
            let p = parse_reaction_sequence(text.trim_end_matches(['\n', '\r'])).map_err(|e| at(input, e))?;
            Ok(to_json_string(&Prediction { image_id: image_id.clone(), objects: p.objects, reactions: p.reactions }))
        }
        Command::EmitCond { input } => {
            let recs = load_condition_records(input).map_err(data)?;
            let out = recs
                .iter()
                .map(|r| {
                    let sequence = emit_condition_sequence(&r.words)
                        .map_err(|e| at(input, format!("{}#{}: {e}", r.image_id, r.object_id)))?;
                    Ok(ConditionSequence { image_id: &r.image_id, object_id: r.object_id, sequence })
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            Ok(to_json_string(&out))
        }
        Command::ParseCond { input } => {
            let text = read_text(input).map_err(data)?;
            let words = parse_condition_sequence(text.trim_end_matches(['\n', '\r'])).map_err(|e| at(input, e))?;
            Ok(to_json_string(&words))
        }
        Command::Evaluate { pred, gt, mode, per_pattern } => {
            let preds = load_predictions(pred).map_err(data)?;
            let gts = load_annotations(gt).map_err(data)?;
            let mut report = score_images(&preds, &gts, (*mode).into()).map_err(|e| at(pred, e))?;
            if !per_pattern {
                report.per_pattern.clear();
            }
            Ok(to_json_string(&report))
        }
        Command::CriEval { pred, gt } => {
            let preds = load_condition_records(pred).map_err(data)?;
            let gts = load_condition_records(gt).map_err(data)?;
            let report = cri_evaluate_corpus(&preds, &gts).map_err(|e| at(pred, e))?;
            Ok(to_json_string(&report))
        }
        Command::Perturb { plan, gt, out, expected } => {
            let mut plan: PerturbationPlan = read_json(plan).map_err(data)?;
            if let Some(s) = cli.seed {
                plan.seed = s;
            }
            let gts = load_annotations(gt).map_err(data)?;
            let preds = apply_corpus(&plan, &gts).map_err(|e| at(gt, e))?;
            if *expected {
                if let Some(o) = out {
                    write_json(o, &preds).map_err(data)?;
                }
                let report = expected_report(&plan, &gts, MatchMode::Both).map_err(data)?;
                return Ok(to_json_string(&report));
            }
            match out {
                Some(o) => {
                    write_json(o, &preds).map_err(data)?;
                    Ok(to_json_string(&serde_json::json!({ "out": o, "images": preds.len() })))
                }
                None => Ok(to_json_string(&preds)),
            }
        }
        Command::Assemble { input, conditions } => {
            let anns = load_annotations(input).map_err(data)?;
            let overrides = match conditions {
                Some(p) => Some(load_condition_records(p).map_err(data)?),
                None => None,
            };
            let mut out = Vec::new();
            for a in &anns {
                let words = match &overrides {
                    Some(recs) => recs
                        .iter()
                        .filter(|r| r.image_id == a.image_id)
                        .map(|r| (r.object_id, r.words.clone()))
                        .collect(),
                    None => a.condition_texts.clone(),
                };
                let reactions =
                    assemble(&a.to_prediction(), &words, &a.smiles).map_err(|e| at(input, format!("{}: {e}", a.image_id)))?;
                let reaction_smiles = reactions
                    .iter()
                    .map(to_reaction_smiles)
                    .collect::<Result<_, _>>()
                    .map_err(|e| at(input, format!("{}: {e}", a.image_id)))?;
                out.push(ImageAssembly { image_id: &a.image_id, reactions, reaction_smiles });
            }
            Ok(to_json_string(&out))
        }
        Command::Selfcheck { count } => {
            let report = crate::selfcheck::run(*count, seed).map_err(data)?;
            let text = to_json_string(&report);
            if report.passed {
                Ok(text)
            } else {
                print!("{text}");
                Err(Failure::Data("self-check failed".into()))
            }
        }
    }
}

/// Parses `args` (program name first), runs, prints, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            let _ = out.flush();
            0
        }
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("usage error: {m}"),
                Failure::Data(m) => eprintln!("error: {m}"),
            }
            f.code()
        }
    }
}
