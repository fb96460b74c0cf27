use std::fmt::Write;

use crate::gibbs::cells::unfolded_polygons;
use crate::gibbs::EmpiricalMeasure;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 20.0;

fn px(p: [f64; 2]) -> (f64, f64) {
    let half = 0.5 * (SIZE - 2.0 * MARGIN);
    (MARGIN + half * (1.0 + p[0]), MARGIN + half * (1.0 - p[1]))
}

/// Heat map of the fiber marginal on the unfolded octahedral square, an
/// equal-area picture of the sphere; darker cells carry more mass.
pub fn fiber_heatmap_svg(m: &EmpiricalMeasure, title: &str) -> String {
    let level = m.grid().native.fiber_level;
    let marginal = m.fiber_marginal();
    let peak = marginal.iter().copied().fold(0.0, f64::max);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{h}" viewBox="0 0 {SIZE} {h}">"#,
        h = SIZE + 24.0
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, &mass) in marginal.iter().enumerate() {
        let t = if peak > 0.0 { mass / peak } else { 0.0 };
        let shade = (255.0 * (1.0 - t)).round() as u8;
        for tri in unfolded_polygons(k as u32, level) {
            let pts: Vec<String> = tri
                .iter()
                .map(|&p| {
                    let (x, y) = px(p);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let _ = writeln!(
                out,
                r##"<polygon points="{}" fill="rgb({shade},{shade},255)" stroke="#888" stroke-width="0.3"><title>cell {k}: {mass:.6}</title></polygon>"##,
                pts.join(" ")
            );
        }
    }
    let escaped = title.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="13">{escaped}</text>"#, SIZE + 14.0);
    out.push_str("</svg>\n");
    out
}
