use std::fmt::Write as _;

use super::{EmbedError, Embedding};

const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;

/// Planar drawing: prescribed segments as lines, the distinguished pair
/// dashed, labelled vertices named. Output depends only on the embedding.
pub fn render_svg(e: &Embedding) -> Result<String, EmbedError> {
    if e.dim != 2 {
        return Err(EmbedError::NotPlanar(e.dim));
    }
    let (mut x0, mut y0, mut x1, mut y1) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for p in &e.coords {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let tx = |x: f64| MARGIN + (x - x0) * scale;
    // svg y grows downwards
    let ty = |y: f64| SIZE - MARGIN - (y - y0) * scale;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<g class="segments" stroke="black" stroke-width="1">"#);
    for seg in &e.segments {
        let (a, b) = (&e.coords[seg.u], &e.coords[seg.v]);
        let _ = writeln!(
            s,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            tx(a[0]),
            ty(a[1]),
            tx(b[0]),
            ty(b[1])
        );
    }
    let _ = writeln!(s, "</g>");
    let (a, b) = (&e.coords[e.distinguished.0], &e.coords[e.distinguished.1]);
    let _ = writeln!(
        s,
        r#"<line class="distinguished" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="red" stroke-width="2" stroke-dasharray="6 4"/>"#,
        tx(a[0]),
        ty(a[1]),
        tx(b[0]),
        ty(b[1])
    );
    let _ = writeln!(s, r#"<g class="vertices">"#);
    for (p, label) in e.coords.iter().zip(&e.labels) {
        let (cx, cy) = (tx(p[0]), ty(p[1]));
        if label.is_empty() {
            let _ = writeln!(
                s,
                r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="1.5" fill="gray"/>"#
            );
        } else {
            let _ = writeln!(
                s,
                r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="4" fill="black"/>"#
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.3}" y="{:.3}" font-family="serif" font-size="16">{label}</text>"#,
                cx + 6.0,
                cy - 6.0
            );
        }
    }
    let _ = writeln!(s, "</g>\n</svg>");
    Ok(s)
}
