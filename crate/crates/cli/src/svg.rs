//! Minimal SVG heat map: one rect per cell, one panel per slice.

use std::fmt::Write as _;

const CELL: f64 = 6.0;
const MARGIN: f64 = 48.0;
const GAP: f64 = 32.0;

/// A rectangular grid of cells, row-major with `alpha` varying fastest.
pub struct Panel<'a> {
    pub title: String,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub alpha_range: [f64; 2],
    pub beta_range: [f64; 2],
    /// `m / bound` per cell.
    pub ratio: &'a [f64],
    pub certified: &'a [bool],
}

/// Certified cells are shaded blue by `m / bound`; the rest are grey.
fn fill(ratio: f64, certified: bool) -> String {
    if !certified || !ratio.is_finite() {
        return "#d9d9d9".to_owned();
    }
    let t = ratio.clamp(0.0, 1.0);
    let lerp = |lo: f64, hi: f64| (lo + (hi - lo) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(8.0, 198.0), lerp(48.0, 219.0), lerp(107.0, 239.0))
}

pub fn heat_map(panels: &[Panel]) -> String {
    let panel_w = panels.iter().map(|p| p.n_alpha as f64 * CELL).fold(0.0, f64::max);
    let panel_h = panels.iter().map(|p| p.n_beta as f64 * CELL).fold(0.0, f64::max);
    let width = 2.0 * MARGIN + panels.len() as f64 * panel_w + panels.len().saturating_sub(1) as f64 * GAP;
    let height = 2.0 * MARGIN + panel_h;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    for (k, p) in panels.iter().enumerate() {
        let x0 = MARGIN + k as f64 * (panel_w + GAP);
        let y0 = MARGIN;
        let _ = writeln!(s, r#"<g>"#);
        let _ = writeln!(s, r#"<text x="{x0}" y="{}">{}</text>"#, y0 - 18.0, p.title);
        for j in 0..p.n_beta {
            // beta grows upwards
            let y = y0 + (p.n_beta - 1 - j) as f64 * CELL;
            for i in 0..p.n_alpha {
                let c = j * p.n_alpha + i;
                let x = x0 + i as f64 * CELL;
                let _ = writeln!(
                    s,
                    r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}"/>"#,
                    fill(p.ratio[c], p.certified[c])
                );
            }
        }
        let w = p.n_alpha as f64 * CELL;
        let h = p.n_beta as f64 * CELL;
        let _ = writeln!(s, r##"<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#444"/>"##);
        let _ = writeln!(s, r#"<text x="{x0}" y="{}">alpha {}</text>"#, y0 + h + 14.0, p.alpha_range[0]);
        let _ =
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, x0 + w, y0 + h + 14.0, p.alpha_range[1]);
        let _ =
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">beta {}</text>"#, x0 - 4.0, y0 + h, p.beta_range[0]);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, x0 - 4.0, y0 + 10.0, p.beta_range[1]);
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}
