//! Minimal SVG line plots and cell maps.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub color: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Debug, Clone)]
pub struct Marker {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub filled: bool,
}

#[derive(Debug, Clone, Default)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
    /// Fixed ranges; `None` fits the data.
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, "<!-- mhtlab {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + 0.5 * (W - LEFT - RIGHT),
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        format!("{v:.0e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        out.push(if t.abs() < 1e-12 * span { 0.0 } else { t });
        t += step;
    }
    out
}

fn axes(out: &mut String, x_label: &str, y_label: &str) {
    let (x1, y1) = (W - RIGHT, H - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - LEFT,
        y1 - TOP
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + 0.5 * (x1 - LEFT),
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        TOP + 0.5 * (y1 - TOP),
        escape(y_label)
    );
}

fn legend(out: &mut String, entries: &[(String, String)]) {
    for (i, (name, color)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let x = W - RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{color}"/>"#,
            y - 10.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{y}">{}</text>"#,
            x + 18.0,
            escape(name)
        );
    }
}

impl LinePlot {
    pub fn render(&self) -> String {
        let all = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .chain(self.markers.iter().map(|m| (m.x, m.y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_y || *y > 0.0));
        let (mut xlo, mut xhi, mut ylo, mut yhi) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for (x, y) in all {
            xlo = xlo.min(x);
            xhi = xhi.max(x);
            ylo = ylo.min(y);
            yhi = yhi.max(y);
        }
        if let Some((a, b)) = self.x_range {
            (xlo, xhi) = (a, b);
        }
        if let Some((a, b)) = self.y_range {
            (ylo, yhi) = (a, b);
        }
        if !xlo.is_finite() {
            (xlo, xhi) = (0.0, 1.0);
        }
        if !ylo.is_finite() {
            (ylo, yhi) = if self.log_y { (1e-3, 1.0) } else { (0.0, 1.0) };
        }
        if xhi <= xlo {
            xhi = xlo + 1.0;
        }
        let ty = |y: f64| if self.log_y { y.log10() } else { y };
        let (mut tylo, mut tyhi) = (ty(ylo), ty(yhi));
        if self.log_y {
            tylo = tylo.floor();
            tyhi = tyhi.ceil();
        }
        if tyhi <= tylo {
            tyhi = tylo + 1.0;
        }
        let (x1, y1) = (W - RIGHT, H - BOTTOM);
        let px = |x: f64| LEFT + (x - xlo) / (xhi - xlo) * (x1 - LEFT);
        let py = |y: f64| y1 - (ty(y) - tylo) / (tyhi - tylo) * (y1 - TOP);

        let mut out = String::new();
        header(&mut out, &self.title);
        let _ = writeln!(
            out,
            r#"<defs><clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{}" height="{}"/></clipPath></defs>"#,
            x1 - LEFT,
            y1 - TOP
        );
        for t in nice_ticks(xlo, xhi) {
            let x = px(t);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{y1}" x2="{x:.2}" y2="{}" stroke="black"/>"#,
                y1 + 5.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
                y1 + 18.0,
                fmt_tick(t)
            );
        }
        let yticks: Vec<(f64, String)> = if self.log_y {
            (tylo as i32..=tyhi as i32)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect()
        } else {
            nice_ticks(ylo, yhi)
                .into_iter()
                .map(|t| (t, fmt_tick(t)))
                .collect()
        };
        for (t, label) in yticks {
            let y = py(t);
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#,
                LEFT - 5.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#,
                LEFT - 8.0,
                y + 4.0
            );
        }
        axes(&mut out, &self.x_label, &self.y_label);
        let _ = writeln!(out, r#"<g clip-path="url(#plot)">"#);
        for s in &self.series {
            // Split at non-finite or non-positive (log) values.
            let mut pieces: Vec<Vec<String>> = vec![Vec::new()];
            for &(x, y) in &s.points {
                if x.is_finite() && y.is_finite() && (!self.log_y || y > 0.0) {
                    pieces
                        .last_mut()
                        .unwrap()
                        .push(format!("{:.2},{:.2}", px(x), py(y)));
                } else if !pieces.last().unwrap().is_empty() {
                    pieces.push(Vec::new());
                }
            }
            let dash = if s.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            for piece in pieces.iter().filter(|p| p.len() > 1) {
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
                    s.color,
                    piece.join(" ")
                );
            }
        }
        for m in &self.markers {
            let fill = if m.filled { "black" } else { "white" };
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}" stroke="black"><title>{}</title></circle>"#,
                px(m.x),
                py(m.y),
                escape(&m.label)
            );
        }
        let _ = writeln!(out, "</g>");
        let entries: Vec<(String, String)> = self
            .series
            .iter()
            .map(|s| (s.name.clone(), s.color.clone()))
            .collect();
        legend(&mut out, &entries);
        out.push_str("</svg>\n");
        out
    }
}

/// Colored cell map; `cells[j * x.len() + i]` indexes `legend`.
pub fn cell_map(
    title: &str,
    x_label: &str,
    y_label: &str,
    x: &[f64],
    y: &[f64],
    cells: &[usize],
    legend_entries: &[(String, String)],
) -> String {
    let (x1, y1) = (W - RIGHT, H - BOTTOM);
    let (nx, ny) = (x.len().max(1), y.len().max(1));
    let (cw, ch) = ((x1 - LEFT) / nx as f64, (y1 - TOP) / ny as f64);
    let mut out = String::new();
    header(&mut out, title);
    for j in 0..y.len() {
        for i in 0..x.len() {
            let Some((_, color)) = legend_entries.get(cells[j * x.len() + i]) else {
                continue;
            };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
                LEFT + i as f64 * cw,
                y1 - (j + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    for (axis, horizontal) in [(x, true), (y, false)] {
        if axis.is_empty() {
            continue;
        }
        let picks = [0, axis.len() / 2, axis.len() - 1];
        for &k in &picks {
            let label = fmt_tick(axis[k]);
            if horizontal {
                let cx = LEFT + (k as f64 + 0.5) * cw;
                let _ = writeln!(
                    out,
                    r#"<text x="{cx:.2}" y="{}" text-anchor="middle">{label}</text>"#,
                    y1 + 18.0
                );
            } else {
                let cy = y1 - (k as f64 + 0.5) * ch;
                let _ = writeln!(
                    out,
                    r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#,
                    LEFT - 8.0,
                    cy + 4.0
                );
            }
        }
    }
    axes(&mut out, x_label, y_label);
    legend(&mut out, legend_entries);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_range() {
        let t = nice_ticks(0.0, 150.0);
        assert_eq!(t.first(), Some(&0.0));
        assert!(t.last().unwrap() >= &140.0);
    }

    #[test]
    fn line_plot_is_well_formed() {
        let plot = LinePlot {
            title: "a < b".into(),
            log_y: true,
            series: vec![Series {
                name: "prey".into(),
                color: PALETTE[0].into(),
                points: vec![(0.0, 1.0), (1.0, 0.0), (2.0, 10.0), (3.0, 100.0)],
                dashed: false,
            }],
            ..Default::default()
        };
        let svg = plot.render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains("1e2"));
    }
}
