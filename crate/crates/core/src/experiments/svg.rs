//! Minimal hand-written SVG plots. Each file embeds its data as a comment.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 60.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn header(out: &mut String, title: &str, data: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, "<!-- data\n{}-->", data.replace("--", "- -"));
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        W / 2.0,
        esc(title)
    );
}

fn axis_labels(out: &mut String, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        W / 2.0,
        H - 12.0,
        esc(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(ylabel)
    );
}

/// Polyline of `(x, y)` points on linear axes.
pub fn line_plot_svg(title: &str, xlabel: &str, ylabel: &str, pts: &[(f64, f64)]) -> String {
    let mut data = String::new();
    for (x, y) in pts {
        let _ = writeln!(data, "{x},{y}");
    }
    let mut out = String::new();
    header(&mut out, title, &data);
    let finite: Vec<_> = pts
        .iter()
        .copied()
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .collect();
    let (x0, x1) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.0), hi.max(p.0))
        });
    let (y0, y1) = finite
        .iter()
        .fold((0.0_f64, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.1), hi.max(p.1))
        });
    let y1 = if y1 > y0 { y1 } else { y0 + 1.0 };
    let (x0, x1) = if x1 > x0 {
        (x0, x1)
    } else {
        (x0 - 1.0, x0 + 1.0)
    };
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let _ = writeln!(
        out,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{v}</text>"#,
            sx(v),
            H - PAD + 16.0
        );
    }
    for v in [y0, y1] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{v:.3}</text>"#,
            PAD - 6.0,
            sy(v) + 4.0
        );
    }
    axis_labels(&mut out, xlabel, ylabel);
    if !finite.is_empty() {
        let path: Vec<String> = finite
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
            path.join(" ")
        );
        for p in &finite {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
                sx(p.0),
                sy(p.1)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Grid heatmap of `(row, col, value)` with values in `[0, 1]`; rows are drawn
/// bottom to top.
pub fn heatmap_svg(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    cells: &[(usize, usize, f64)],
) -> String {
    let mut data = String::new();
    for (r, c, v) in cells {
        let _ = writeln!(data, "{r},{c},{v}");
    }
    let mut out = String::new();
    header(&mut out, title, &data);
    let mut rows: Vec<usize> = cells.iter().map(|c| c.0).collect();
    let mut cols: Vec<usize> = cells.iter().map(|c| c.1).collect();
    rows.sort_unstable();
    rows.dedup();
    cols.sort_unstable();
    cols.dedup();
    if !rows.is_empty() && !cols.is_empty() {
        let cw = (W - 2.0 * PAD) / cols.len() as f64;
        let ch = (H - 2.0 * PAD) / rows.len() as f64;
        for &(r, c, v) in cells {
            let ri = rows.binary_search(&r).unwrap_or(0);
            let ci = cols.binary_search(&c).unwrap_or(0);
            let shade = (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8;
            let x = PAD + ci as f64 * cw;
            let y = H - PAD - (ri + 1) as f64 * ch;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="rgb(255,{shade},{shade})" stroke="gray"/>"#
            );
        }
        for (ci, c) in cols.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{c}</text>"#,
                PAD + (ci as f64 + 0.5) * cw,
                H - PAD + 16.0
            );
        }
        for (ri, r) in rows.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{r}</text>"#,
                PAD - 6.0,
                H - PAD - (ri as f64 + 0.5) * ch + 4.0
            );
        }
    }
    axis_labels(&mut out, xlabel, ylabel);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_embed_data_and_close() {
        let s = line_plot_svg("t", "L", "e", &[(1.0, 0.5), (2.0, 0.25)]);
        assert!(s.contains("1,0.5\n2,0.25"));
        assert!(s.trim_end().ends_with("</svg>"));
        let h = heatmap_svg("t", "k", "m", &[(4, 1, 0.0), (4, 2, 1.0)]);
        assert!(h.contains("rgb(255,255,255)") && h.contains("rgb(255,0,0)"));
        // degenerate input still renders
        assert!(line_plot_svg("t", "x", "y", &[]).contains("</svg>"));
    }
}
