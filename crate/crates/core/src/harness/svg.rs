//! Minimal SVG renderings: line charts, heatmaps and label rasters.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

const PALETTE: [&str; 10] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Half-width of a shaded band around `y` (e.g. one standard deviation).
    pub band: Option<Vec<f64>>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, w: f64, h: f64, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, w / 2.0, escape(title)).unwrap();
}

/// Tick label with just enough digits.
fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn finite_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    (lo <= hi).then_some((lo, hi))
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut out = String::new();
    header(&mut out, WIDTH, HEIGHT, title);
    let (pw, ph) = (WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B);
    let (x0, x1) = finite_range(series.iter().flat_map(|s| s.x.iter().copied())).unwrap_or((0.0, 1.0));
    let spread = series.iter().flat_map(|s| {
        let band = s.band.clone().unwrap_or_else(|| vec![0.0; s.y.len()]);
        s.y.iter().zip(band).flat_map(|(y, b)| [y - b, y + b]).collect::<Vec<_>>()
    });
    let (y0, y1) = finite_range(spread).unwrap_or((0.0, 1.0));
    let (y0, y1) = (y0.min(0.0), if y1 > y0.min(0.0) { y1 } else { y0.min(0.0) + 1.0 });
    let x1 = if x1 > x0 { x1 } else { x0 + 1.0 };
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + ph - (y - y0) / (y1 - y0) * ph;

    writeln!(out, r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
    for i in 0..=5 {
        let f = f64::from(i) / 5.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, sx(xv), MARGIN_T + ph + 18.0, fmt_tick(xv)).unwrap();
        writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, MARGIN_L - 6.0, sy(yv) + 4.0, fmt_tick(yv)).unwrap();
        writeln!(
            out,
            r##"<line x1="{MARGIN_L}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/>"##,
            MARGIN_L + pw,
            sy(yv),
            sy(yv)
        )
        .unwrap();
    }
    writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, MARGIN_L + pw / 2.0, HEIGHT - 12.0, escape(x_label)).unwrap();
    writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        escape(y_label)
    )
    .unwrap();

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s.x.iter().zip(&s.y).filter(|(x, y)| x.is_finite() && y.is_finite()).map(|(&x, &y)| (x, y)).collect();
        if let Some(band) = &s.band {
            let upper: Vec<String> = s.x.iter().zip(&s.y).zip(band).filter(|((_, y), b)| y.is_finite() && b.is_finite())
                .map(|((&x, &y), &b)| format!("{:.1},{:.1}", sx(x), sy(y + b))).collect();
            let lower: Vec<String> = s.x.iter().zip(&s.y).zip(band).filter(|((_, y), b)| y.is_finite() && b.is_finite())
                .map(|((&x, &y), &b)| format!("{:.1},{:.1}", sx(x), sy(y - b))).rev().collect();
            if !upper.is_empty() {
                writeln!(out, r#"<polygon points="{} {}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#, upper.join(" "), lower.join(" ")).unwrap();
            }
        }
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
        writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#, path.join(" ")).unwrap();
        for &(x, y) in &pts {
            writeln!(out, r#"<circle cx="{:.1}" cy="{:.1}" r="2.2" fill="{color}"/>"#, sx(x), sy(y)).unwrap();
        }
        let ly = MARGIN_T + 12.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_R + 12.0;
        writeln!(out, r#"<line x1="{lx}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0).unwrap();
        writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.name)).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Grey-to-blue colour for `v ∈ [0, 1]`.
fn heat_color(v: f64) -> String {
    let v = v.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * v).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(247.0, 8.0), lerp(251.0, 48.0), lerp(255.0, 107.0))
}

/// `values[row][col]` with rows along `y` (drawn bottom-up) and columns
/// along `x`; `None` cells are left blank. Colours span `[0, 1]`.
pub fn heatmap(title: &str, x_label: &str, y_label: &str, x: &[f64], y: &[f64], values: &[Vec<Option<f64>>]) -> String {
    let mut out = String::new();
    header(&mut out, WIDTH, HEIGHT, title);
    let (pw, ph) = (WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B);
    let (cw, ch) = (pw / x.len().max(1) as f64, ph / y.len().max(1) as f64);
    for (r, row) in values.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let Some(v) = v else { continue };
            let (px, py) = (MARGIN_L + c as f64 * cw, MARGIN_T + ph - (r as f64 + 1.0) * ch);
            writeln!(
                out,
                r#"<rect x="{px:.1}" y="{py:.1}" width="{:.1}" height="{:.1}" fill="{}"><title>{}</title></rect>"#,
                cw + 0.2,
                ch + 0.2,
                heat_color(*v),
                fmt_tick(*v)
            )
            .unwrap();
        }
    }
    writeln!(out, r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
    let stride_x = (x.len() / 8).max(1);
    for (c, v) in x.iter().enumerate().step_by(stride_x) {
        writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, MARGIN_L + (c as f64 + 0.5) * cw, MARGIN_T + ph + 18.0, fmt_tick(*v)).unwrap();
    }
    let stride_y = (y.len() / 8).max(1);
    for (r, v) in y.iter().enumerate().step_by(stride_y) {
        writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, MARGIN_L - 6.0, MARGIN_T + ph - (r as f64 + 0.5) * ch + 4.0, fmt_tick(*v)).unwrap();
    }
    writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, MARGIN_L + pw / 2.0, HEIGHT - 12.0, escape(x_label)).unwrap();
    writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        escape(y_label)
    )
    .unwrap();
    // colour bar
    let bx = WIDTH - MARGIN_R + 30.0;
    for i in 0..20 {
        let v = f64::from(i) / 19.0;
        let by = MARGIN_T + ph - (f64::from(i) + 1.0) * ph / 20.0;
        writeln!(out, r#"<rect x="{bx}" y="{by:.1}" width="18" height="{:.1}" fill="{}"/>"#, ph / 20.0 + 0.2, heat_color(v)).unwrap();
    }
    writeln!(out, r#"<text x="{}" y="{}">1</text>"#, bx + 24.0, MARGIN_T + 10.0).unwrap();
    writeln!(out, r#"<text x="{}" y="{}">0</text>"#, bx + 24.0, MARGIN_T + ph).unwrap();
    out.push_str("</svg>\n");
    out
}

/// One row per trial, one column per node, coloured by class. Runs of
/// equal labels are merged into single rectangles.
pub fn label_raster(title: &str, rows: &[Vec<usize>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let (pw, ph) = (WIDTH - MARGIN_L - 40.0, HEIGHT - MARGIN_T - MARGIN_B);
    let mut out = String::new();
    header(&mut out, WIDTH, HEIGHT, title);
    let (cw, rh) = (pw / cols as f64, ph / rows.len().max(1) as f64);
    for (r, row) in rows.iter().enumerate() {
        let mut start = 0;
        while start < row.len() {
            let label = row[start];
            let mut end = start + 1;
            while end < row.len() && row[end] == label {
                end += 1;
            }
            writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                MARGIN_L + start as f64 * cw,
                MARGIN_T + r as f64 * rh,
                (end - start) as f64 * cw,
                rh,
                PALETTE[label % PALETTE.len()]
            )
            .unwrap();
            start = end;
        }
    }
    writeln!(out, r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
    writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">nodes, grouped by true class</text>"#, MARGIN_L + pw / 2.0, HEIGHT - 20.0).unwrap();
    writeln!(
        out,
        r#"<text x="40" y="{:.1}" text-anchor="middle" transform="rotate(-90 40 {:.1})">trial</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_are_well_formed() {
        let s = Series { name: "a<b".into(), x: vec![0.0, 1.0, 2.0], y: vec![3.0, f64::NAN, 1.0], band: Some(vec![0.5; 3]) };
        let svg = line_chart("t", "x", "y", &[s]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a&lt;b") && !svg.contains("NaN"));

        let h = heatmap("h", "x", "y", &[0.1, 0.2], &[0.1, 0.2], &[vec![None, None], vec![Some(0.5), None]]);
        assert_eq!(h.matches("<title>").count(), 1);

        let r = label_raster("r", &[vec![0, 0, 1, 1, 1], vec![2, 2, 2, 2, 2]]);
        // two runs in the first row, one in the second
        let runs: usize = ["#1f77b4", "#d62728", "#2ca02c"]
            .iter()
            .map(|c| r.matches(&format!("fill=\"{c}\"")).count())
            .sum();
        assert_eq!(runs, 3);
    }

    #[test]
    fn tick_labels() {
        assert_eq!(fmt_tick(0.25), "0.25");
        assert_eq!(fmt_tick(3.0), "3");
        assert_eq!(fmt_tick(-0.0001), "0");
    }
}
