//! Static SVG plots. Output depends only on the inputs, so files are
//! byte-stable across runs.

use std::fmt::Write;

use chrono::Datelike;

use super::diel::DielGrid;
use super::roc::RocCurve;

const PALETTE: [&str; 4] = ["#1f4e99", "#b2361f", "#2a7f3a", "#6b4c9a"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One or more labelled ROC curves on shared unit axes.
pub fn render_roc_svg(curves: &[(&str, &RocCurve)]) -> String {
    let (left, top, size) = (60.0, 20.0, 400.0);
    let px = |fpr: f64| left + fpr * size;
    let py = |tpr: f64| top + (1.0 - tpr) * size;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">"#, left + size + 180.0, top + size + 50.0);
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{size}" height="{size}" fill="none" stroke="black"/>"#);
    let _ = writeln!(
        s,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#999" stroke-dasharray="4 4"/>"##,
        px(0.0),
        py(0.0),
        px(1.0),
        py(1.0)
    );
    for i in 0..=4 {
        let v = i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{v}</text>"#, px(v), top + size + 16.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v}</text>"#, left - 6.0, py(v) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">False positive rate</text>"#, left + size / 2.0, top + size + 36.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">True positive rate</text>"#,
        top + size / 2.0,
        top + size / 2.0
    );
    for (i, (name, curve)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = curve.points.iter().map(|p| format!("{:.2},{:.2}", px(p.fpr), py(p.tpr))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        let ly = top + 16.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{ly:.2}" fill="{color}">{} (AUC {:.3})</text>"#,
            left + size + 12.0,
            escape(name),
            curve.auc
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Date on y, local time of day on x. Night cells are grey; each nonzero cell
/// gets a black mark.
pub fn render_diel_svg(grid: &DielGrid) -> String {
    let (left, top, plot_w) = (80.0, 20.0, 576.0);
    let n = grid.dates.len().max(1) as f64;
    let row_h = (600.0 / n).clamp(1.0, 12.0);
    let plot_h = row_h * n;
    let col_w = plot_w / grid.bins_per_day as f64;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="11">"#, left + plot_w + 20.0, top + plot_h + 50.0);

    for (i, row) in grid.night_mask.iter().enumerate() {
        let y = top + i as f64 * row_h;
        let mut b = 0;
        while b < row.len() {
            if !row[b] {
                b += 1;
                continue;
            }
            let start = b;
            while b < row.len() && row[b] {
                b += 1;
            }
            let _ = writeln!(
                s,
                r##"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{row_h:.2}" fill="#cccccc"/>"##,
                left + start as f64 * col_w,
                (b - start) as f64 * col_w
            );
        }
    }
    for (i, row) in grid.counts.iter().enumerate() {
        let y = top + i as f64 * row_h;
        for (b, &c) in row.iter().enumerate() {
            if c > 0 {
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{y:.2}" width="{col_w:.2}" height="{row_h:.2}" fill="black"><title>{c}</title></rect>"#,
                    left + b as f64 * col_w
                );
            }
        }
    }

    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h:.2}" fill="none" stroke="black"/>"#);
    for h in (0..=24).step_by(3) {
        let x = left + plot_w * h as f64 / 24.0;
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{h:02}:00</text>"#, top + plot_h + 14.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Local time</text>"#, left + plot_w / 2.0, top + plot_h + 32.0);
    let label_every = (14.0 / row_h).ceil().max(1.0) as usize;
    for (i, date) in grid.dates.iter().enumerate() {
        if i % label_every == 0 || date.day() == 1 && label_every > 27 {
            let y = top + (i as f64 + 0.5) * row_h + 4.0;
            let _ = writeln!(s, r#"<text x="{:.2}" y="{y:.2}" text-anchor="end">{date}</text>"#, left - 4.0);
        }
    }
    s.push_str("</svg>\n");
    s
}
