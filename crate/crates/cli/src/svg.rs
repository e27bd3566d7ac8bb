//! Minimal static SVG line charts.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 200.0;
const MARGIN: f64 = 50.0;

pub struct Series {
    xs: Vec<f64>,
    ys: Vec<f64>,
    color: &'static str,
    markers: bool,
}

impl Series {
    pub fn line(xs: &[f64], ys: &[f64], color: &'static str) -> Self {
        Series {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            color,
            markers: false,
        }
    }

    pub fn points(xs: &[f64], ys: &[f64], color: &'static str) -> Self {
        Series {
            markers: true,
            ..Series::line(xs, ys, color)
        }
    }
}

pub struct Chart {
    title: String,
    x_label: String,
    series: Vec<Series>,
}

impl Chart {
    pub fn new(title: &str, x_label: &str) -> Self {
        Chart {
            title: title.to_string(),
            x_label: x_label.to_string(),
            series: Vec::new(),
        }
    }

    pub fn series(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut x = [f64::INFINITY, f64::NEG_INFINITY];
        let mut y = [f64::INFINITY, f64::NEG_INFINITY];
        for s in &self.series {
            for (&a, &b) in s.xs.iter().zip(&s.ys) {
                x = [x[0].min(a), x[1].max(a)];
                y = [y[0].min(b), y[1].max(b)];
            }
        }
        let widen = |r: [f64; 2]| {
            if !r[0].is_finite() {
                [0.0, 1.0]
            } else if r[1] > r[0] {
                r
            } else {
                [r[0] - 0.5, r[0] + 0.5]
            }
        };
        (widen(x), widen(y))
    }

    fn draw(&self, out: &mut String, top: f64) {
        let (xr, yr) = self.bounds();
        let plot_w = WIDTH - 2.0 * MARGIN;
        let plot_h = PANEL_HEIGHT - 1.2 * MARGIN;
        let y0 = top + 0.6 * MARGIN;
        let px = |x: f64| MARGIN + (x - xr[0]) / (xr[1] - xr[0]) * plot_w;
        let py = |y: f64| y0 + plot_h - (y - yr[0]) / (yr[1] - yr[0]) * plot_h;

        let _ = writeln!(
            out,
            r##"<rect x="{MARGIN}" y="{y0:.1}" width="{plot_w}" height="{plot_h:.1}" fill="none" stroke="#999"/>"##
        );
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN}" y="{:.1}" font-size="13">{}</text>"#,
            y0 - 6.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            MARGIN + plot_w / 2.0,
            y0 + plot_h + 28.0,
            escape(&self.x_label)
        );
        for (v, anchor) in [(xr[0], "start"), (xr[1], "end")] {
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="{anchor}">{}</text>"#,
                px(v),
                y0 + plot_h + 14.0,
                tick(v)
            );
        }
        for v in yr {
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#,
                MARGIN - 4.0,
                py(v) + 3.0,
                tick(v)
            );
        }
        for s in &self.series {
            if s.markers {
                for (&x, &y) in s.xs.iter().zip(&s.ys) {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#,
                        px(x),
                        py(y),
                        s.color
                    );
                }
            } else {
                let pts: Vec<String> =
                    s.xs.iter()
                        .zip(&s.ys)
                        .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
                        .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{}" stroke-width="1" points="{}"/>"#,
                    s.color,
                    pts.join(" ")
                );
            }
        }
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Stacks `charts` vertically under `title`.
pub fn render(title: &str, charts: &[Chart]) -> String {
    let height = 30.0 + PANEL_HEIGHT * charts.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="20" font-size="15" font-weight="bold">{}</text>"#,
        escape(title)
    );
    for (i, c) in charts.iter().enumerate() {
        c.draw(&mut out, 30.0 + PANEL_HEIGHT * i as f64);
    }
    out.push_str("</svg>\n");
    out
}
