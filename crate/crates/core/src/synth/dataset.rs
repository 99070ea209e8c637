use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::distributions::WeightedIndex;
use rand::seq::SliceRandom;
use rand::{distributions::Distribution, Rng as _, SeedableRng};
use serde::{Deserialize, Serialize};

use super::glyph::Depictor;
use super::layout::{annotate, bounds, ImageStyle, Layout, PlanContext};
use super::plan::{plan_branch, plan_cycle, plan_multiple_line, plan_single_line};
use super::svg::render_svg;
use super::SynthError;
use crate::geometry::ImageDims;
use crate::model::{ImageAnnotation, IntRange, Pattern, ReactionRecord, StyleConfig};
use crate::seed::{derive_seed, rng_for, Rng, DEFAULT_SEED};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub count: usize,
    pub pattern_weights: BTreeMap<Pattern, f64>,
    pub style: StyleConfig,
    pub master_seed: u64,
    pub reactions_per_image: BTreeMap<Pattern, IntRange>,
    pub split_ratios: [f64; 3],
    /// Chance that a drawable agent appears as a structure instead of text.
    pub structure_agent_prob: f64,
    /// Wrap around to the first record instead of failing when records run out.
    pub recycle_records: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        let r = |min, max| IntRange { min, max };
        Self {
            count: 100,
            pattern_weights: Pattern::ALL.iter().map(|p| (*p, 1.0)).collect(),
            style: StyleConfig::default(),
            master_seed: DEFAULT_SEED,
            reactions_per_image: [
                (Pattern::SingleLine, r(1, 2)),
                (Pattern::MultipleLine, r(3, 5)),
                (Pattern::Branch, r(2, 3)),
                (Pattern::Cycle, r(3, 6)),
            ]
            .into_iter()
            .collect(),
            split_ratios: [0.8, 0.1, 0.1],
            structure_agent_prob: 0.3,
            recycle_records: false,
        }
    }
}

/// Fewest reactions each pattern can be drawn with.
pub fn min_reactions(p: Pattern) -> u32 {
    match p {
        Pattern::SingleLine => 1,
        Pattern::MultipleLine | Pattern::Branch => 2,
        Pattern::Cycle => 3,
    }
}

fn max_reactions(p: Pattern) -> u32 {
    match p {
        Pattern::Branch => 3,
        Pattern::Cycle => 9,
        _ => u32::MAX,
    }
}

pub fn check_ratios(r: &[f64; 3]) -> Result<(), SynthError> {
    let ok = r.iter().all(|v| v.is_finite() && *v >= 0.0) && (r.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
    if ok {
        Ok(())
    } else {
        Err(SynthError::InvalidRatios)
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |what| Err(SynthError::InvalidConfig(what));
        if self.count == 0 {
            return bad("count must be at least 1");
        }
        let weights = self.pattern_weights.values();
        if weights.clone().any(|w| !w.is_finite() || *w < 0.0) || self.pattern_weights.values().sum::<f64>() <= 0.0 {
            return bad("pattern weights must be non-negative with a positive sum");
        }
        for (p, w) in &self.pattern_weights {
            if *w > 0.0 {
                let Some(r) = self.reactions_per_image.get(p) else {
                    return bad("every weighted pattern needs a reactions-per-image range");
                };
                if r.min < min_reactions(*p) || r.min > r.max || r.max > max_reactions(*p) {
                    return bad("reactions-per-image range is empty or outside what the pattern supports");
                }
            }
        }
        if !(0.0..=1.0).contains(&self.structure_agent_prob) {
            return bad("structure_agent_prob must lie in [0, 1]");
        }
        self.style.validate().map_err(SynthError::Style)?;
        check_ratios(&self.split_ratios)
    }

    fn weights(&self) -> (Vec<Pattern>, Vec<f64>) {
        Pattern::ALL.iter().map(|p| (*p, self.pattern_weights.get(p).copied().unwrap_or(0.0))).unzip()
    }
}

/// One line of `manifest.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image: String,
    pub annotation: String,
    pub pattern: Pattern,
    pub seed: u64,
    /// Indices of the source records drawn in this image.
    #[serde(default)]
    pub records: Vec<usize>,
}

/// What one image will draw, fixed before any image is rendered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageJob {
    pub index: usize,
    pub seed: u64,
    pub pattern: Pattern,
    /// Source record indices, in drawing order.
    pub records: Vec<usize>,
}

/// Assigns pattern, reaction count, and source records to every image. The
/// only sequential step: record offsets depend on earlier counts.
pub fn plan_jobs(record_count: usize, cfg: &GenConfig) -> Result<Vec<ImageJob>, SynthError> {
    cfg.validate()?;
    let (patterns, weights) = cfg.weights();
    let dist = WeightedIndex::new(&weights).map_err(|_| SynthError::InvalidConfig("pattern weights"))?;
    let mut offset = 0usize;
    let mut jobs = Vec::with_capacity(cfg.count);
    for index in 0..cfg.count {
        let mut rng = rng_for(cfg.master_seed, index as u64);
        let pattern = patterns[dist.sample(&mut rng)];
        let range = cfg.reactions_per_image[&pattern];
        let n = rng.gen_range(range.min..=range.max) as usize;
        if offset + n > record_count && !(cfg.recycle_records && record_count > 0) {
            return Err(SynthError::RecordExhaustion { needed: offset + n, available: record_count });
        }
        let records = (offset..offset + n).map(|k| k % record_count).collect();
        offset += n;
        jobs.push(ImageJob { index, seed: derive_seed(cfg.master_seed, index as u64), pattern, records });
    }
    Ok(jobs)
}

/// Rewrites a record group so it can be drawn as `pattern`: chains feed each
/// product group into the next record, branches share the first reactant,
/// and cycles become one-to-one steps around a ring of first reactants.
/// Condition fields are never touched.
pub fn stitch(pattern: Pattern, mut recs: Vec<ReactionRecord>) -> Vec<ReactionRecord> {
    match pattern {
        Pattern::SingleLine | Pattern::MultipleLine => {
            for i in 1..recs.len() {
                let mut reactants = recs[i - 1].product_smiles.clone();
                reactants.extend(recs[i].reactant_smiles.iter().skip(1).cloned());
                recs[i].reactant_smiles = reactants;
            }
        }
        Pattern::Branch => {
            if let Some(shared) = recs.first().and_then(|r| r.reactant_smiles.first()).cloned() {
                for r in &mut recs {
                    r.reactant_smiles[0] = shared.clone();
                }
            }
        }
        Pattern::Cycle => {
            let ring: Vec<String> = recs.iter().map(|r| r.reactant_smiles[0].clone()).collect();
            let k = ring.len();
            for (i, r) in recs.iter_mut().enumerate() {
                r.reactant_smiles = alloc::vec![ring[i].clone()];
                r.product_smiles = alloc::vec![ring[(i + 1) % k].clone()];
            }
        }
    }
    recs
}

#[derive(Debug, Clone)]
pub struct GeneratedImage {
    pub entry: ManifestEntry,
    pub layout: Layout,
    pub annotation: ImageAnnotation,
    pub svg: String,
}

fn plan_pattern(
    pattern: Pattern,
    recs: &[ReactionRecord],
    ctx: &PlanContext<'_>,
    rng: &Rng,
) -> Result<Layout, SynthError> {
    match pattern {
        Pattern::SingleLine => plan_single_line(recs, ctx, &mut rng.clone()),
        Pattern::MultipleLine => {
            // measure the unwrapped chain, then wrap it at a fraction of that
            let flat = plan_single_line(recs, ctx, &mut rng.clone())
                .or_else(|_| plan_single_line(recs, &PlanContext { padding: 0.0, ..*ctx }, &mut rng.clone()));
            let natural = match flat {
                Ok(l) => bounds(&l.glyphs).map_or(0.0, |b| b.width() / l.glyphs[0].scale),
                Err(_) => ctx.line_budget() * 2.0,
            };
            let wrap = Some(ctx.line_budget().min(natural * 0.6));
            plan_multiple_line(recs, &PlanContext { wrap_width: wrap, ..*ctx }, &mut rng.clone())
        }
        Pattern::Branch => plan_branch(recs, ctx, &mut rng.clone()),
        Pattern::Cycle => plan_cycle(recs, ctx, &mut rng.clone()),
    }
}

/// Renders one job. A group that cannot fit is retried with fewer records
/// down to the pattern's minimum.
pub fn generate_image(
    records: &[ReactionRecord],
    job: &ImageJob,
    cfg: &GenConfig,
    depictor: &dyn Depictor,
) -> Result<GeneratedImage, SynthError> {
    let mut rng = Rng::seed_from_u64(derive_seed(job.seed, 1));
    let style = ImageStyle::sample(&cfg.style, &mut rng);
    let ctx = PlanContext {
        style,
        depictor,
        canvas: ImageDims::new(cfg.style.canvas_width_px, cfg.style.canvas_height_px),
        padding: f64::from(cfg.style.padding_px),
        wrap_width: None,
        structure_agent_prob: cfg.structure_agent_prob,
    };
    let min = min_reactions(job.pattern) as usize;
    let mut last_err = SynthError::EmptyRecords;
    for n in (min.min(job.records.len())..=job.records.len()).rev() {
        let used = &job.records[..n];
        let group = stitch(job.pattern, used.iter().map(|&k| records[k].clone()).collect());
        match plan_pattern(job.pattern, &group, &ctx, &rng) {
            Ok(layout) => {
                let stem = format!("img_{}", job.index);
                let annotation = annotate(&layout, &stem)?;
                let svg = render_svg(&layout);
                let entry = ManifestEntry {
                    image: format!("{stem}.svg"),
                    annotation: format!("{stem}.json"),
                    pattern: job.pattern,
                    seed: job.seed,
                    records: used.to_vec(),
                };
                return Ok(GeneratedImage { entry, layout, annotation, svg });
            }
            Err(e @ (SynthError::LayoutOverflow { .. } | SynthError::Overlap { .. })) => last_err = e,
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

/// Sequential convenience over [`plan_jobs`] and [`generate_image`].
pub fn generate_dataset(
    records: &[ReactionRecord],
    cfg: &GenConfig,
    depictor: &dyn Depictor,
) -> Result<Vec<GeneratedImage>, SynthError> {
    plan_jobs(records.len(), cfg)?.iter().map(|j| generate_image(records, j, cfg, depictor)).collect()
}

/// Partition sizes by largest remainder; ties go to the earlier part.
pub fn split_sizes(n: usize, ratios: &[f64; 3]) -> Result<[usize; 3], SynthError> {
    check_ratios(ratios)?;
    let quotas = ratios.map(|r| r * n as f64);
    let mut sizes = quotas.map(|q| libm::floor(q) as usize);
    let mut rest = n.saturating_sub(sizes.iter().sum());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - libm::floor(quotas[a]);
        let fb = quotas[b] - libm::floor(quotas[b]);
        fb.partial_cmp(&fa).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for k in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        sizes[*k] += 1;
        rest -= 1;
    }
    Ok(sizes)
}

/// Seeded shuffle, then consecutive train/val/test partitions.
pub fn split_dataset<T: Clone>(items: &[T], ratios: &[f64; 3], seed: u64) -> Result<[Vec<T>; 3], SynthError> {
    let sizes = split_sizes(items.len(), ratios)?;
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut Rng::seed_from_u64(seed));
    let mut it = order.into_iter().map(|i| items[i].clone());
    Ok(sizes.map(|n| it.by_ref().take(n).collect()))
}

const MOLECULES: &[&str] = &[
    "CCO", "c1ccccc1", "CC(=O)O", "c1ccccc1O", "CC(C)O", "O=Cc1ccccc1", "CCN(CC)CC", "O=C(O)c1ccccc1",
    "Clc1ccc(Br)cc1", "COc1ccc(N)cc1", "OCC(O)CO", "CC(C)(C)OC(=O)N", "C1CCOC1", "Nc1ccccc1",
    "O=C1CCCCC1", "c1ccc2ccccc2c1", "OC(=O)CCC(=O)O", "CCOC(=O)C", "C=CC(=O)OC", "OC(=O)c1cccnc1",
    "O=[N+]([O-])c1ccccc1", "CC(=O)Nc1ccc(O)cc1", "Brc1ccccc1", "OB(O)c1ccccc1", "CC(=O)c1ccccc1",
    "N#Cc1ccccc1", "CCCCBr", "OCc1ccccc1", "C1CCNCC1", "Cc1ccc(S(=O)(=O)Cl)cc1",
];
const DRAWN_AGENTS: &[&str] = &["CC(=O)Cl", "O=S(Cl)Cl", "CN(C)c1ccncc1", "C1CCC2=NCCCN2CC1", "CCN(C(C)C)C(C)C", "ClCCl"];
const TEXT_AGENTS: &[&str] = &[
    "Pd/C", "H2", "NaBH4", "K2CO3", "LiAlH4", "Pd(PPh3)4", "TFA", "HCl", "NaOH", "m-CPBA", "Et3N", "DIPEA",
    "EDC", "HOBt", "10% Pd/C", "n-BuLi", "Boc2O", "DMAP", "Cs2CO3", "CuI",
];
const SOLVENTS: &[&str] = &["THF", "DCM", "DMF", "MeOH", "EtOH", "toluene", "MeCN", "H2O", "dioxane", "DMSO", "EtOAc"];
const TEMPERATURES: &[&str] = &["rt", "0°C", "-78°C", "reflux", "80°C", "110°C", "25°C", "60°C"];
const TIMES: &[&str] = &["1h", "2h", "12h", "overnight", "30min", "24 h", "3d"];
const YIELDS: &[&str] = &["85%", "92%", "67%", "73%", "quant.", "99%", "41%"];

/// Plausible records for demos and tests when no record file is given.
pub fn sample_records(seed: u64, n: usize) -> Vec<ReactionRecord> {
    let mut rng = Rng::seed_from_u64(seed);
    let pick = |pool: &[&str], rng: &mut Rng| String::from(*pool.choose(rng).expect("pools are non-empty"));
    (0..n)
        .map(|_| {
            let nr = if rng.gen_bool(0.3) { 2 } else { 1 };
            let np = if rng.gen_bool(0.15) { 2 } else { 1 };
            let reactant_smiles = (0..nr).map(|_| pick(MOLECULES, &mut rng)).collect();
            let product_smiles = (0..np).map(|_| pick(MOLECULES, &mut rng)).collect();
            let agents = (0..rng.gen_range(0..=3))
                .map(|_| if rng.gen_bool(0.35) { pick(DRAWN_AGENTS, &mut rng) } else { pick(TEXT_AGENTS, &mut rng) })
                .collect();
            let solvents = (0..rng.gen_range(0..=2)).map(|_| pick(SOLVENTS, &mut rng)).collect();
            let temperature = rng.gen_bool(0.7).then(|| pick(TEMPERATURES, &mut rng));
            let time = rng.gen_bool(0.6).then(|| pick(TIMES, &mut rng));
            let yield_pct = rng.gen_bool(0.6).then(|| pick(YIELDS, &mut rng));
            ReactionRecord { reactant_smiles, product_smiles, agents, solvents, temperature, time, yield_pct }
        })
        .collect()
}
