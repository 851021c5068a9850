//! Plain-text renderers for explanation artifacts: CSV for downstream
//! tooling and self-contained SVG for reports. Pure string emission, fully
//! deterministic.

use super::ale::AleCurve;
use super::shap::ShapSummary;

/// `edge,effect` rows of an ALE curve.
pub fn ale_csv(curve: &AleCurve) -> String {
    let mut out = String::from("edge,effect\n");
    for (e, f) in curve.edges.iter().zip(&curve.effects) {
        out.push_str(&format!("{e},{f}\n"));
    }
    out
}

/// `row,feature,value,phi` beeswarm records (feature by name).
pub fn beeswarm_csv(summary: &ShapSummary) -> String {
    let mut out = String::from("row,feature,value,phi\n");
    for r in &summary.records {
        out.push_str(&format!("{},{},{},{}\n", r.row, summary.columns[r.feature], r.value, r.phi));
    }
    out
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 400.0;

/// Line plot of an ALE curve as a standalone SVG document.
pub fn ale_svg(curve: &AleCurve) -> String {
    let (ml, mr, mt, mb) = (60.0, 20.0, 30.0, 45.0);
    let (x0, x1) = span(&curve.edges);
    let (y0, y1) = span(&curve.effects);
    let sx = |x: f64| ml + (x - x0) / (x1 - x0).max(1e-300) * (SVG_W - ml - mr);
    let sy = |y: f64| SVG_H - mb - (y - y0) / (y1 - y0).max(1e-300) * (SVG_H - mt - mb);

    let points: Vec<String> = curve
        .edges
        .iter()
        .zip(&curve.effects)
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();

    let mut s = svg_open();
    s.push_str(&format!(
        "<text x=\"{:.0}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">accumulated local effect: {}</text>\n",
        SVG_W / 2.0,
        xml_escape(&curve.feature)
    ));
    // Axes.
    s.push_str(&axis_line(ml, SVG_H - mb, SVG_W - mr, SVG_H - mb));
    s.push_str(&axis_line(ml, mt, ml, SVG_H - mb));
    // Zero line when visible.
    if y0 < 0.0 && y1 > 0.0 {
        s.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n",
            ml,
            sy(0.0),
            SVG_W - mr,
            sy(0.0)
        ));
    }
    // Extent labels.
    s.push_str(&text(ml, SVG_H - mb + 18.0, "start", &format!("{x0:.3}")));
    s.push_str(&text(SVG_W - mr, SVG_H - mb + 18.0, "end", &format!("{x1:.3}")));
    s.push_str(&text(ml - 6.0, sy(y0), "end", &format!("{y0:.3}")));
    s.push_str(&text(ml - 6.0, sy(y1), "end", &format!("{y1:.3}")));
    s.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"{}\"/>\n",
        points.join(" ")
    ));
    for (&x, &y) in curve.edges.iter().zip(&curve.effects) {
        s.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"#1f6fb2\"/>\n",
            sx(x),
            sy(y)
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Beeswarm plot of the `top_n` features (by mean |phi|) as a standalone
/// SVG document. Point color encodes the normalized feature value
/// (blue = low, red = high); vertical jitter is a deterministic hash.
pub fn beeswarm_svg(summary: &ShapSummary, top_n: usize) -> String {
    let shown: Vec<usize> = summary.ranking.iter().copied().take(top_n.max(1)).collect();
    let (ml, mr, mt, mb) = (150.0, 25.0, 30.0, 35.0);
    let row_h = (SVG_H - mt - mb) / shown.len().max(1) as f64;

    let phis: Vec<f64> = summary.records.iter().map(|r| r.phi).collect();
    let (p0, p1) = span(&phis);
    let lo = p0.min(0.0);
    let hi = p1.max(0.0);
    let sx = |phi: f64| ml + (phi - lo) / (hi - lo).max(1e-300) * (SVG_W - ml - mr);

    let mut s = svg_open();
    s.push_str(&format!(
        "<text x=\"{:.0}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">attribution beeswarm (top {} features)</text>\n",
        SVG_W / 2.0,
        shown.len()
    ));
    s.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#999\"/>\n",
        sx(0.0),
        mt,
        sx(0.0),
        SVG_H - mb
    ));
    s.push_str(&text(sx(lo), SVG_H - mb + 16.0, "start", &format!("{lo:.3}")));
    s.push_str(&text(sx(0.0), SVG_H - mb + 16.0, "middle", "0"));
    s.push_str(&text(sx(hi), SVG_H - mb + 16.0, "end", &format!("{hi:.3}")));

    for (slot, &feature) in shown.iter().enumerate() {
        let yc = mt + (slot as f64 + 0.5) * row_h;
        s.push_str(&text(ml - 8.0, yc + 4.0, "end", &summary.columns[feature]));
        let recs: Vec<_> = summary.records.iter().filter(|r| r.feature == feature).collect();
        let (v0, v1) = span(&recs.iter().map(|r| r.value).collect::<Vec<_>>());
        for r in recs {
            let t = if v1 > v0 { (r.value - v0) / (v1 - v0) } else { 0.5 };
            let jitter = (hash_unit(r.row as u64, feature as u64) - 0.5) * row_h * 0.7;
            s.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.2\" fill=\"{}\" fill-opacity=\"0.8\"/>\n",
                sx(r.phi),
                yc + jitter,
                value_color(t)
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}

fn svg_open() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {SVG_W:.0} {SVG_H:.0}\" font-family=\"sans-serif\">\n\
         <rect width=\"{SVG_W:.0}\" height=\"{SVG_H:.0}\" fill=\"white\"/>\n"
    )
}

fn axis_line(x1: f64, y1: f64, x2: f64, y2: f64) -> String {
    format!(
        "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"#333\"/>\n"
    )
}

fn text(x: f64, y: f64, anchor: &str, body: &str) -> String {
    format!(
        "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\" font-size=\"11\">{}</text>\n",
        xml_escape(body)
    )
}

fn span(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Deterministic pseudo-uniform in [0, 1) from two integers (splitmix-style).
fn hash_unit(a: u64, b: u64) -> f64 {
    let mut z = a.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(b).wrapping_add(0x243f6a8885a308d3);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// Blue-to-red ramp for normalized feature values.
fn value_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (59.0 + t * (180.0 - 59.0)).round() as u8;
    let g = (76.0 + t * (4.0 - 76.0)).round() as u8;
    let b = (192.0 + t * (38.0 - 192.0)).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
