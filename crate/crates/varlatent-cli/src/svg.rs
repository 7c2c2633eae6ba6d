//! Hand-emitted SVG figures: latent scatter plots, grid heat maps, and
//! time-series charts. No plotting dependencies; outputs are diff-able.

use ndarray::Array2;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(title: &str) -> String {
    format!(
        concat!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{cx}\" y=\"28\" text-anchor=\"middle\" ",
            "font-family=\"sans-serif\" font-size=\"16\">{title}</text>\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        cx = WIDTH / 2.0,
        title = xml_escape(title)
    )
}

struct Mapper {
    lo: [f64; 2],
    hi: [f64; 2],
}

impl Mapper {
    fn from_points(points: &[(f64, f64)]) -> Mapper {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for &(x, y) in points {
            lo[0] = lo[0].min(x);
            hi[0] = hi[0].max(x);
            lo[1] = lo[1].min(y);
            hi[1] = hi[1].max(y);
        }
        for d in 0..2 {
            if !(hi[d] > lo[d]) {
                lo[d] -= 0.5;
                hi[d] += 0.5;
            }
            let pad = 0.05 * (hi[d] - lo[d]);
            lo[d] -= pad;
            hi[d] += pad;
        }
        Mapper { lo, hi }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let px = MARGIN + (x - self.lo[0]) / (self.hi[0] - self.lo[0]) * (WIDTH - 2.0 * MARGIN);
        let py =
            HEIGHT - MARGIN - (y - self.lo[1]) / (self.hi[1] - self.lo[1]) * (HEIGHT - 2.0 * MARGIN);
        (px, py)
    }
}

fn axis_box() -> String {
    format!(
        "<rect x=\"{m}\" y=\"{m}\" width=\"{w}\" height=\"{h}\" fill=\"none\" stroke=\"#333\"/>\n",
        m = MARGIN,
        w = WIDTH - 2.0 * MARGIN,
        h = HEIGHT - 2.0 * MARGIN
    )
}

/// Scatter plot of labelled points with optional group colors and pair lines
/// (indices into `points`).
pub fn scatter(
    title: &str,
    points: &[(f64, f64)],
    labels: &[String],
    groups: Option<&[String]>,
    pairs: &[(usize, usize)],
) -> String {
    let mapper = Mapper::from_points(points);
    let mut out = header(title);
    out.push_str(&axis_box());

    // stable group -> color assignment in first-appearance order
    let mut group_names: Vec<&str> = Vec::new();
    if let Some(gs) = groups {
        for g in gs {
            if !group_names.contains(&g.as_str()) {
                group_names.push(g);
            }
        }
    }
    let color_of = |i: usize| -> &str {
        match groups {
            Some(gs) => {
                let at = group_names.iter().position(|&g| g == gs[i]).unwrap_or(0);
                PALETTE[at % PALETTE.len()]
            }
            None => PALETTE[0],
        }
    };

    for &(a, b) in pairs {
        if a < points.len() && b < points.len() {
            let (x1, y1) = mapper.map(points[a].0, points[a].1);
            let (x2, y2) = mapper.map(points[b].0, points[b].1);
            out.push_str(&format!(
                "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
                 stroke=\"#bbb\" stroke-width=\"1\"/>\n"
            ));
        }
    }
    for (i, &(x, y)) in points.iter().enumerate() {
        let (px, py) = mapper.map(x, y);
        out.push_str(&format!(
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"4\" fill=\"{}\"/>\n",
            color_of(i)
        ));
        if let Some(label) = labels.get(i) {
            out.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" \
                 font-size=\"9\" fill=\"#444\">{}</text>\n",
                px + 5.0,
                py - 4.0,
                xml_escape(label)
            ));
        }
    }
    // legend
    for (g, name) in group_names.iter().enumerate() {
        let y = MARGIN + 14.0 * g as f64 + 12.0;
        out.push_str(&format!(
            "<circle cx=\"{x}\" cy=\"{y:.1}\" r=\"4\" fill=\"{c}\"/>\
             <text x=\"{tx}\" y=\"{ty:.1}\" font-family=\"sans-serif\" font-size=\"11\">{n}</text>\n",
            x = WIDTH - MARGIN + 10.0,
            c = PALETTE[g % PALETTE.len()],
            tx = WIDTH - MARGIN + 18.0,
            ty = y + 4.0,
            n = xml_escape(name)
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Linear white-to-blue ramp over the value range.
fn ramp(v: f64, lo: f64, hi: f64) -> String {
    let t = if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.5 };
    let r = (255.0 * (1.0 - t) + 8.0 * t) as u8;
    let g = (255.0 * (1.0 - t) + 48.0 * t) as u8;
    let b = (255.0 * (1.0 - t) + 107.0 * t) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Heat map of a grid of values; cell (ix, iy) renders at (x, y) = (ix, iy)
/// with y up.
pub fn heatmap(title: &str, values: &Array2<f64>) -> String {
    let (gx, gy) = values.dim();
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cw = (WIDTH - 2.0 * MARGIN) / gx as f64;
    let ch = (HEIGHT - 2.0 * MARGIN) / gy as f64;
    let mut out = header(title);
    for ix in 0..gx {
        for iy in 0..gy {
            let x = MARGIN + ix as f64 * cw;
            let y = HEIGHT - MARGIN - (iy + 1) as f64 * ch;
            out.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{c}\"/>\n",
                w = cw + 0.5,
                h = ch + 0.5,
                c = ramp(values[(ix, iy)], lo, hi)
            ));
        }
    }
    out.push_str(&axis_box());
    out.push_str(&format!(
        "<text x=\"{m}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"11\">\
         range [{lo:.4}, {hi:.4}]</text>\n",
        m = MARGIN,
        y = HEIGHT - MARGIN + 24.0
    ));
    out.push_str("</svg>\n");
    out
}

/// Line chart of a series in index order.
pub fn timeseries(title: &str, values: &[f64]) -> String {
    let mut out = header(title);
    out.push_str(&axis_box());
    if !values.is_empty() {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let n = values.len().max(2) as f64;
        let pts: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let x = MARGIN + i as f64 / (n - 1.0) * (WIDTH - 2.0 * MARGIN);
                let y = HEIGHT - MARGIN - (v - lo) / span * (HEIGHT - 2.0 * MARGIN);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\"/>\n",
            pts.join(" "),
            PALETTE[0]
        ));
        out.push_str(&format!(
            "<text x=\"{m}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"11\">\
             n = {count}, range [{lo:.4}, {hi:.4}]</text>\n",
            m = MARGIN,
            y = HEIGHT - MARGIN + 24.0,
            count = values.len()
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn looks_like_svg(s: &str) {
        assert!(s.starts_with("<?xml"));
        assert!(s.contains("<svg"));
        assert!(s.trim_end().ends_with("</svg>"));
        // balanced quotes are a cheap well-formedness proxy
        assert_eq!(s.matches('"').count() % 2, 0);
    }

    #[test]
    fn scatter_emits_all_points() {
        let pts = vec![(0.1, 0.2), (-0.4, 0.9), (0.5, -0.5)];
        let labels: Vec<String> = vec!["a".into(), "b<c".into(), "d".into()];
        let groups: Vec<String> = vec!["g1".into(), "g2".into(), "g1".into()];
        let svg = scatter("demo", &pts, &labels, Some(&groups), &[(0, 1)]);
        looks_like_svg(&svg);
        assert_eq!(svg.matches("<circle").count(), 3 + 2); // points + legend
        assert_eq!(svg.matches("<line").count(), 1);
        assert!(svg.contains("b&lt;c"));
    }

    #[test]
    fn heatmap_covers_grid() {
        let v = Array2::from_shape_fn((5, 4), |(i, j)| (i * 4 + j) as f64);
        let svg = heatmap("grid", &v);
        looks_like_svg(&svg);
        // 20 cells + background + axis box
        assert_eq!(svg.matches("<rect").count(), 22);
    }

    #[test]
    fn timeseries_polyline() {
        let svg = timeseries("series", &[0.0, 1.0, 0.5, 0.25]);
        looks_like_svg(&svg);
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn degenerate_inputs_do_not_panic() {
        looks_like_svg(&scatter("one", &[(0.0, 0.0)], &["p".into()], None, &[]));
        looks_like_svg(&timeseries("empty", &[]));
        looks_like_svg(&heatmap("flat", &Array2::zeros((3, 3))));
    }
}
