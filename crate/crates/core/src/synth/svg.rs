use alloc::string::String;
use core::fmt::Write;

use super::glyph::{GlyphKind, Primitive};
use super::layout::{Layout, Provenance};
use crate::model::ObjectClass;

/// Two decimals, and never `-0.00`.
struct Num(f64);

impl core::fmt::Display for Num {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let v = if self.0.abs() < 0.005 { 0.0 } else { self.0 };
        write!(f, "{v:.2}")
    }
}

fn escape(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
}

fn points(pts: &[(f64, f64)], out: &mut String) {
    for (i, (x, y)) in pts.iter().enumerate() {
        let sep = if i == 0 { "" } else { " " };
        let _ = write!(out, "{sep}{},{}", Num(*x), Num(*y));
    }
}

fn primitive(p: &Primitive, out: &mut String) {
    let _ = match p {
        Primitive::Rect { x, y, w, h, rx, stroke } => writeln!(
            out,
            r##"<rect x="{}" y="{}" width="{}" height="{}" rx="{}" fill="none" stroke="#000" stroke-width="{}"/>"##,
            Num(*x), Num(*y), Num(*w), Num(*h), Num(*rx), Num(*stroke)
        ),
        Primitive::Text { x, y, size, text, middle } => {
            let anchor = if *middle { r#" text-anchor="middle""# } else { "" };
            let _ = write!(
                out,
                r#"<text x="{}" y="{}" font-family="monospace" font-size="{}"{anchor}>"#,
                Num(*x), Num(*y), Num(*size)
            );
            escape(text, out);
            writeln!(out, "</text>")
        }
        Primitive::Line { x1, y1, x2, y2, stroke } => writeln!(
            out,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#000" stroke-width="{}"/>"##,
            Num(*x1), Num(*y1), Num(*x2), Num(*y2), Num(*stroke)
        ),
        Primitive::Polyline { points: pts, stroke } => {
            out.push_str(r#"<polyline points=""#);
            points(pts, out);
            writeln!(out, r##"" fill="none" stroke="#000" stroke-width="{}"/>"##, Num(*stroke))
        }
        Primitive::Polygon { points: pts, fill, stroke } => {
            out.push_str(r#"<polygon points=""#);
            points(pts, out);
            let fill = if *fill { "#000" } else { "none" };
            writeln!(out, r##"" fill="{fill}" stroke="#000" stroke-width="{}"/>"##, Num(*stroke))
        }
    };
}

/// Deterministic SVG document. Each object glyph is a group carrying its
/// object id and class; arrows carry their reaction index.
pub fn render_svg(layout: &Layout) -> String {
    let mut out = String::new();
    let (w, h) = (layout.width, layout.height);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#fff"/>"##);
    for (g, id) in layout.glyphs.iter().zip(layout.object_ids()) {
        let attrs = match (&g.glyph.kind, id, &g.provenance) {
            (GlyphKind::Molecule { .. }, Some(id), _) => {
                alloc::format!(r#" data-object-id="{id}" data-class="{:?}""#, ObjectClass::Str)
            }
            (GlyphKind::TextBlock { .. }, Some(id), _) => {
                alloc::format!(r#" data-object-id="{id}" data-class="{:?}""#, ObjectClass::Txt)
            }
            (GlyphKind::Arrow { .. }, _, Provenance::Arrow { reaction }) => {
                alloc::format!(r#" class="arrow" data-reaction="{reaction}""#)
            }
            (GlyphKind::Plus, _, _) => String::from(r#" class="plus""#),
            _ => String::new(),
        };
        let _ = writeln!(
            out,
            r#"<g{attrs} transform="translate({} {}) scale({})">"#,
            Num(g.x), Num(g.y), libm::round(g.scale * 1e6) / 1e6
        );
        for p in &g.glyph.primitives {
            primitive(p, &mut out);
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
