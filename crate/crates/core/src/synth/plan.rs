use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng as _, RngCore};

use super::block::compose_condition_block;
use super::glyph::{Glyph, GlyphKind};
use super::layout::{bounds, first_overlap, Layout, Membership, PlacedGlyph, PlanContext, Provenance, Source};
use super::SynthError;
use crate::model::{Pattern, ReactionRecord, ReactionRole};

const GAP: f64 = 14.0;
const LINE_GAP: f64 = 36.0;
const ROW_GAP: f64 = 24.0;
const MIN_ARROW: f64 = 70.0;
const MAX_FAN_DEG: f64 = 30.0;

fn member(reaction: usize, role: ReactionRole, source: Source) -> Membership {
    Membership { reaction, role, source }
}

/// Checks records and moves agents the depictor will draw to the front.
/// Returns the records as drawn and how many leading agents are structures.
fn prepare(
    records: &[ReactionRecord],
    ctx: &PlanContext<'_>,
    rng: &mut dyn RngCore,
) -> Result<Vec<(ReactionRecord, usize)>, SynthError> {
    records
        .iter()
        .enumerate()
        .map(|(index, r)| {
            r.validate().map_err(|source| SynthError::InvalidRecord { index, source })?;
            let mut drawn = Vec::new();
            let mut text = Vec::new();
            for a in &r.agents {
                // always draw the coin so the stream does not depend on the depictor
                let coin = rng.gen_bool(ctx.structure_agent_prob.clamp(0.0, 1.0));
                if coin && ctx.depictor.accepts(a) {
                    drawn.push(a.clone());
                } else {
                    text.push(a.clone());
                }
            }
            let n = drawn.len();
            drawn.extend(text);
            Ok((ReactionRecord { agents: drawn, ..r.clone() }, n))
        })
        .collect()
}

fn molecule(
    smiles: &str,
    members: Vec<Membership>,
    ctx: &PlanContext<'_>,
    rng: &mut dyn RngCore,
) -> Result<PlacedGlyph, SynthError> {
    let g = ctx.depictor.depict(smiles, ctx.style.molecule_scale, rng)?;
    Ok(PlacedGlyph::new(g, 0.0, 0.0, Provenance::Component(members)))
}

fn shift(gs: &mut [PlacedGlyph], dx: f64, dy: f64) {
    for g in gs {
        g.x += dx;
        g.y += dy;
    }
}

/// Molecules joined by plus signs, left edge at x = 0, centered on y = 0.
fn molecule_row(items: Vec<PlacedGlyph>, ctx: &PlanContext<'_>) -> Vec<PlacedGlyph> {
    let mut out = Vec::new();
    let mut x = 0.0;
    let n = items.len();
    for (i, mut g) in items.into_iter().enumerate() {
        g.x = x;
        g.y = -g.glyph.height / 2.0;
        x += g.glyph.width;
        out.push(g);
        if i + 1 < n {
            let plus = Glyph::plus(ctx.style.font_px, ctx.style.line_width_px);
            let p = PlacedGlyph::new(plus, x + GAP / 2.0, -ctx.style.font_px / 2.0, Provenance::Decoration);
            x += p.glyph.width + GAP;
            out.push(p);
        }
    }
    out
}

fn row_width(row: &[PlacedGlyph]) -> f64 {
    bounds(row).map_or(0.0, |b| b.width())
}

/// What sits on an arrow: the text block plus structures drawn above it.
struct ConditionStack {
    block: Option<PlacedGlyph>,
    above: Vec<PlacedGlyph>,
    length: f64,
}

impl ConditionStack {
    fn build(
        reaction: usize,
        (record, n_struct): &(ReactionRecord, usize),
        extra_reactants: &[usize],
        ctx: &PlanContext<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<Self, SynthError> {
        let mut items = Vec::new();
        for &k in extra_reactants {
            let m = member(reaction, ReactionRole::Reactant, Source::Reactant(k));
            items.push(molecule(&record.reactant_smiles[k], vec![m], ctx, rng)?);
        }
        for k in 0..*n_struct {
            let m = member(reaction, ReactionRole::Condition, Source::Agent(k));
            items.push(molecule(&record.agents[k], vec![m], ctx, rng)?);
        }
        let above = molecule_row(items, ctx);
        let text = ReactionRecord { agents: record.agents[*n_struct..].to_vec(), ..record.clone() };
        let font = ctx.style.font_px;
        let min = MIN_ARROW.max(row_width(&above) + 2.0 * GAP);
        let g = compose_condition_block(&text, font, 12.0 * font, min);
        let length = g.width;
        let block = g.is_object().then(|| {
            let m = member(reaction, ReactionRole::Condition, Source::Conditions);
            PlacedGlyph::new(g, 0.0, 0.0, Provenance::Component(vec![m]))
        });
        Ok(Self { block, above, length })
    }

    /// Places the stack over an arrow segment starting at `x` whose
    /// centerline is `y`. `dx` moves the text sideways off a curved arrow.
    fn place(mut self, x: f64, y: f64, dx: f64, ctx: &PlanContext<'_>) -> Vec<PlacedGlyph> {
        let mut out = Vec::new();
        let clearance = ctx.style.line_width_px + 6.0;
        let mut top = y - clearance;
        if let Some(mut b) = self.block.take() {
            let GlyphKind::TextBlock { centerline, .. } = b.glyph.kind else { unreachable!() };
            b.x = x + (self.length - b.glyph.width) / 2.0 + dx;
            b.y = y - centerline;
            top = top.min(b.y);
            out.push(b);
        }
        if let Some(bb) = bounds(&self.above) {
            let w = bb.width();
            shift(&mut self.above, x + (self.length - w) / 2.0 + dx - bb.x_min, top - GAP / 2.0 - bb.y_max);
            out.append(&mut self.above);
        }
        out
    }
}

fn arrow(points: &[(f64, f64)], anchor: (f64, f64), reaction: usize, ctx: &PlanContext<'_>) -> PlacedGlyph {
    let (g, (x, y)) = Glyph::arrow(points, anchor, ctx.style.head, ctx.style.line_width_px);
    PlacedGlyph::new(g, x, y, Provenance::Arrow { reaction })
}

/// Left-to-right chain, wrapping only after a product group once a line
/// would exceed the context's line budget.
pub fn plan_chain(
    records: &[ReactionRecord],
    pattern: Pattern,
    ctx: &PlanContext<'_>,
    rng: &mut dyn RngCore,
) -> Result<Layout, SynthError> {
    if records.is_empty() {
        return Err(SynthError::EmptyRecords);
    }
    let recs = prepare(records, ctx, rng)?;
    for i in 1..recs.len() {
        if !recs[i].0.reactant_smiles.starts_with(&recs[i - 1].0.product_smiles) {
            return Err(SynthError::InvalidChain { index: i });
        }
    }
    let budget = ctx.line_budget();
    let mut lines: Vec<Vec<PlacedGlyph>> = Vec::new();
    let head: Vec<PlacedGlyph> = recs[0]
        .0
        .reactant_smiles
        .iter()
        .enumerate()
        .map(|(k, s)| molecule(s, vec![member(0, ReactionRole::Reactant, Source::Reactant(k))], ctx, rng))
        .collect::<Result<_, _>>()?;
    let mut line = molecule_row(head, ctx);
    let mut x = row_width(&line);
    let mut segments_on_line = 0;
    // indices into `line` of the previous product glyphs
    let mut last_products: Vec<usize> = Vec::new();
    for (i, rec) in recs.iter().enumerate() {
        let extras: Vec<usize> = if i == 0 { Vec::new() } else { (recs[i - 1].0.product_smiles.len()..rec.0.reactant_smiles.len()).collect() };
        let stack = ConditionStack::build(i, rec, &extras, ctx, rng)?;
        let chained = recs.get(i + 1).is_some();
        let products: Vec<PlacedGlyph> = rec
            .0
            .product_smiles
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let mut m = vec![member(i, ReactionRole::Product, Source::Product(k))];
                if chained {
                    m.push(member(i + 1, ReactionRole::Reactant, Source::Reactant(k)));
                }
                molecule(s, m, ctx, rng)
            })
            .collect::<Result<_, _>>()?;
        let mut prow = molecule_row(products, ctx);
        let seg = GAP + stack.length + GAP + row_width(&prow);
        if segments_on_line > 0 && x + seg > budget {
            // the previous products stay on this line for reaction i - 1 and
            // are redrawn at the start of the next line for reaction i
            let mut copies = Vec::new();
            for &p in &last_products {
                let g: &mut PlacedGlyph = &mut line[p];
                let Provenance::Component(ms) = &mut g.provenance else { unreachable!() };
                let (keep, moved): (Vec<_>, Vec<_>) = ms.iter().partition(|m| m.reaction + 1 == i);
                *ms = keep;
                copies.push(PlacedGlyph::new(g.glyph.clone(), 0.0, 0.0, Provenance::Component(moved)));
            }
            lines.push(core::mem::replace(&mut line, molecule_row(copies, ctx)));
            x = row_width(&line);
            segments_on_line = 0;
        }
        let ax = x + GAP;
        let end = ax + stack.length;
        line.push(arrow(&[(ax, 0.0), (end, 0.0)], (ax + stack.length / 2.0, 0.0), i, ctx));
        line.extend(stack.place(ax, 0.0, 0.0, ctx));
        shift(&mut prow, end + GAP, 0.0);
        last_products.clear();
        for g in prow {
            if matches!(g.provenance, Provenance::Component(_)) {
                last_products.push(line.len());
            }
            line.push(g);
        }
        x = end + GAP + row_width(&line[last_products[0]..]);
        segments_on_line += 1;
    }
    lines.push(line);
    let mut glyphs = Vec::new();
    let mut y = 0.0;
    for (n, mut l) in lines.into_iter().enumerate() {
        let b = bounds(&l).expect("lines are never empty");
        let dy = if n == 0 { 0.0 } else { y + LINE_GAP - b.y_min };
        shift(&mut l, 0.0, dy);
        y = b.y_max + dy;
        glyphs.extend(l);
    }
    Layout::fit(glyphs, recs.into_iter().map(|r| r.0).collect(), pattern, ctx)
}

/// One line of chained reactions.
pub fn plan_single_line(
    records: &[ReactionRecord],
    ctx: &PlanContext<'_>,
    rng: &mut dyn RngCore,
) -> Result<Layout, SynthError> {
    let unbounded = PlanContext { wrap_width: Some(f64::INFINITY), ..*ctx };
    plan_chain(records, Pattern::SingleLine, &unbounded, rng)
}

/// Chained reactions packed greedily into lines.
pub fn plan_multiple_line(
    records: &[ReactionRecord],
    ctx: &PlanContext<'_>,
    rng: &mut dyn RngCore,
) -> Result<Layout, SynthError> {
    plan_chain(records, Pattern::MultipleLine, ctx, rng)
}

/// Several reactions fanning out from one shared first reactant.
pub fn plan_branch(
    records: &[ReactionRecord],
    ctx: &PlanContext<'_>,
    rng: &mut dyn RngCore,
) -> Result<Layout, SynthError> {
    if !(2..=3).contains(&records.len()) {
        return Err(SynthError::UnsupportedSize { pattern: Pattern::Branch, count: records.len() });
    }
    let recs = prepare(records, ctx, rng)?;
    let shared = &recs[0].0.reactant_smiles[0];
    if recs.iter().any(|r| &r.0.reactant_smiles[0] != shared) {
        return Err(SynthError::InvalidBranch);
    }
    let members = (0..recs.len()).map(|j| member(j, ReactionRole::Reactant, Source::Reactant(0))).collect();
    let mut root = molecule(shared, members, ctx, rng)?;
    root.x = 0.0;
    root.y = -root.glyph.height / 2.0;
    let x_start = root.glyph.width + GAP;

    // each branch built around its own centerline at y = 0, arrow at x = 0
    let mut rows = Vec::new();
    for (j, rec) in recs.iter().enumerate() {
        let extras: Vec<usize> = (1..rec.0.reactant_smiles.len()).collect();
        let stack = ConditionStack::build(j, rec, &extras, ctx, rng)?;
        let len = stack.length;
        let mut glyphs = stack.place(0.0, 0.0, 0.0, ctx);
        let products = rec
            .0
            .product_smiles
            .iter()
            .enumerate()
            .map(|(k, s)| molecule(s, vec![member(j, ReactionRole::Product, Source::Product(k))], ctx, rng))
            .collect::<Result<Vec<_>, _>>()?;
        let mut prow = molecule_row(products, ctx);
        shift(&mut prow, len + GAP, 0.0);
        glyphs.extend(prow);
        let b = bounds(&glyphs).expect("branch row has products");
        rows.push((glyphs, len, b.y_min.min(-ctx.style.line_width_px), b.y_max));
    }
    let total: f64 = rows.iter().map(|r| r.3 - r.2).sum::<f64>() + ROW_GAP * (rows.len() - 1) as f64;
    let mut top = -total / 2.0;
    let mut centers = Vec::new();
    for r in &rows {
        centers.push(top - r.2);
        top += r.3 - r.2 + ROW_GAP;
    }
    let reach = centers.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let x1 = x_start + (reach / libm::tan(MAX_FAN_DEG * PI / 180.0)).max(2.0 * GAP);
    let mut glyphs = vec![root];
    for (j, ((mut row, len, _, _), cy)) in rows.into_iter().zip(centers).enumerate() {
        shift(&mut row, x1, cy);
        let pts: Vec<(f64, f64)> =
            if cy == 0.0 { vec![(x_start, 0.0), (x1 + len, 0.0)] } else { vec![(x_start, 0.0), (x1, cy), (x1 + len, cy)] };
        glyphs.push(arrow(&pts, (x1 + len / 2.0, cy), j, ctx));
        glyphs.extend(row);
    }
    Layout::fit(glyphs, recs.into_iter().map(|r| r.0).collect(), Pattern::Branch, ctx)
}

/// Angle of glyph `i` of `k` on the cycle ellipse: clockwise from the top.
pub fn cycle_angle(i: usize, k: usize) -> f64 {
    -PI / 2.0 + 2.0 * PI * i as f64 / k as f64
}

/// A closed chain of 3 to 9 one-to-one reactions drawn around an ellipse.
pub fn plan_cycle(
    records: &[ReactionRecord],
    ctx: &PlanContext<'_>,
    rng: &mut dyn RngCore,
) -> Result<Layout, SynthError> {
    let k = records.len();
    if !(3..=9).contains(&k) {
        return Err(SynthError::UnsupportedSize { pattern: Pattern::Cycle, count: k });
    }
    let recs = prepare(records, ctx, rng)?;
    for (i, r) in recs.iter().enumerate() {
        let next = &recs[(i + 1) % k].0;
        if r.0.reactant_smiles.len() != 1 || r.0.product_smiles.len() != 1 || r.0.product_smiles[0] != next.reactant_smiles[0] {
            return Err(SynthError::InvalidCycle { index: i });
        }
    }
    let mut mols = Vec::new();
    for (i, r) in recs.iter().enumerate() {
        let members = vec![
            member(i, ReactionRole::Reactant, Source::Reactant(0)),
            member((i + k - 1) % k, ReactionRole::Product, Source::Product(0)),
        ];
        mols.push(molecule(&r.0.reactant_smiles[0], members, ctx, rng)?);
    }
    let mut stacks = Vec::new();
    for (i, r) in recs.iter().enumerate() {
        stacks.push(ConditionStack::build(i, r, &[], ctx, rng)?);
    }
    let aspect = f64::from(ctx.canvas.height) / f64::from(ctx.canvas.width);
    let widest = mols.iter().map(|m| m.glyph.width).fold(0.0, f64::max)
        + stacks.iter().map(|s| s.length).fold(0.0, f64::max);
    let mut rx = (widest * k as f64 / (2.0 * PI)).max(150.0);
    for _ in 0..60 {
        if let Some(glyphs) = place_cycle(&mols, &stacks, rx, rx * aspect, ctx) {
            let recs = recs.into_iter().map(|r| r.0).collect();
            return Layout::fit(glyphs, recs, Pattern::Cycle, ctx);
        }
        rx *= 1.1;
    }
    Err(SynthError::LayoutOverflow { scale: 0.0 })
}

fn place_cycle(
    mols: &[PlacedGlyph],
    stacks: &[ConditionStack],
    rx: f64,
    ry: f64,
    ctx: &PlanContext<'_>,
) -> Option<Vec<PlacedGlyph>> {
    let k = mols.len();
    let at = |t: f64| (rx * libm::cos(t), ry * libm::sin(t));
    let mut glyphs: Vec<PlacedGlyph> = mols
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let (cx, cy) = at(cycle_angle(i, k));
            PlacedGlyph { x: cx - m.glyph.width / 2.0, y: cy - m.glyph.height / 2.0, ..m.clone() }
        })
        .collect();
    let margin = GAP / 2.0;
    let inside = |g: &PlacedGlyph, (x, y): (f64, f64)| {
        let e = g.extent();
        x > e.x_min - margin && x < e.x_max + margin && y > e.y_min - margin && y < e.y_max + margin
    };
    const STEPS: usize = 32;
    for (i, stack) in stacks.iter().enumerate() {
        let (a, b) = (cycle_angle(i, k), cycle_angle(i + 1, k));
        let (from, to) = (&glyphs[i], &glyphs[(i + 1) % k]);
        let pts: Vec<(f64, f64)> = (0..=STEPS)
            .map(|s| at(a + (b - a) * s as f64 / STEPS as f64))
            .filter(|p| !inside(from, *p) && !inside(to, *p))
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let mid_t = (a + b) / 2.0;
        let mid = at(mid_t);
        let ux = libm::cos(mid_t);
        let dx = ux * (stack.length / 2.0 + GAP);
        let start_x = mid.0 - stack.length / 2.0;
        let placed = ConditionStack { block: stack.block.clone(), above: stack.above.clone(), length: stack.length }
            .place(start_x, mid.1, dx, ctx);
        glyphs.push(arrow(&pts, mid, i, ctx));
        glyphs.extend(placed);
    }
    first_overlap(&glyphs).is_none().then_some(glyphs)
}
