//! Shaded-region figures in the complex plane, written as plain SVG.

use std::fmt::Write as _;
use std::str::FromStr;

use lpspec::region::{
    envelope_slope, l1_contained_parabola, l1_containing_parabola, lp_contained_region, lp_containing_parabola,
    Parabola, RegionError, RegionUnion, SpectralParams,
};

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 480.0;
pub const MARGIN: f64 = 48.0;
const CONTAINED: &str = "#4c72b0";
const CONTAINING: &str = "#dd8452";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FigureKind {
    /// Contained L¹ parabola.
    L1Region,
    /// Contained L^p union with its slice parabolas.
    LpFamily,
    /// The family together with the envelope lines `x = ±m y`.
    Envelope,
    /// Contained and containing L¹ parabolas.
    L1Both,
    /// Contained L^p union and containing L^p parabola.
    LpBoth,
}

impl FigureKind {
    pub const ALL: [FigureKind; 5] = [Self::L1Region, Self::LpFamily, Self::Envelope, Self::L1Both, Self::LpBoth];

    pub fn name(self) -> &'static str {
        match self {
            Self::L1Region => "l1-region",
            Self::LpFamily => "lp-family",
            Self::Envelope => "envelope",
            Self::L1Both => "l1-both",
            Self::LpBoth => "lp-both",
        }
    }

    /// Whether the figure depends on `p`.
    pub fn uses_p(self) -> bool {
        matches!(self, Self::LpFamily | Self::Envelope | Self::LpBoth)
    }
}

impl FromStr for FigureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            format!("unknown figure kind {s:?} (expected one of l1-region, lp-family, envelope, l1-both, lp-both)")
        })
    }
}

/// What to draw and where.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub kind: FigureKind,
    pub p: f64,
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    /// Boundary samples per curve.
    pub resolution: usize,
    /// Slice parabolas outlined per `α²` interval.
    pub slices: usize,
}

/// A shape in plot coordinates.
enum Layer {
    Fill { boundary: Parabola, color: &'static str, opacity: f64 },
    Union { region: RegionUnion, color: &'static str, opacity: f64 },
    Outline { boundary: Parabola, color: &'static str },
    Lines { slope: f64, color: &'static str },
}

/// Plot window in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Frame {
    /// Inverse of the plot mapping: SVG coordinates to `(Re, Im)`.
    pub fn to_plane(&self, px: f64, py: f64) -> (f64, f64) {
        let sx = (px - MARGIN) / (WIDTH - 2.0 * MARGIN);
        let sy = (HEIGHT - MARGIN - py) / (HEIGHT - 2.0 * MARGIN);
        (self.x.0 + sx * (self.x.1 - self.x.0), self.y.0 + sy * (self.y.1 - self.y.0))
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn clamp_x(&self, x: f64) -> f64 {
        x.clamp(self.x.0, self.x.1)
    }
}

fn vertices(layers: &[Layer]) -> Vec<f64> {
    layers
        .iter()
        .filter_map(|l| match l {
            Layer::Fill { boundary, .. } | Layer::Outline { boundary, .. } => Some(boundary.vertex),
            Layer::Union { region, .. } => Some(region.min_boundary(0.0).1),
            Layer::Lines { .. } => None,
        })
        .collect()
}

fn default_frame(layers: &[Layer], spec: &FigureSpec) -> Frame {
    let vs = vertices(layers);
    let lo = vs.iter().copied().fold(0.0, f64::min);
    let hi = vs.iter().copied().fold(0.0, f64::max);
    let span = (2.0 * lo.abs()).max(4.0 * hi).max(10.0);
    let x = spec.x_range.unwrap_or((lo - 0.15 * span, span));
    let y = spec.y_range.unwrap_or_else(|| {
        let widest = layers
            .iter()
            .filter_map(|l| match l {
                Layer::Fill { boundary, .. } | Layer::Outline { boundary, .. } if !boundary.degenerate => {
                    Some((boundary.width * (x.1 - boundary.vertex)).max(0.0).sqrt())
                }
                Layer::Union { region, .. } if !region.is_degenerate() => {
                    let w = region.slice(region.params.alpha_sq.max()).width;
                    Some((w * (x.1 - region.min_boundary(0.0).1)).max(0.0).sqrt())
                }
                _ => None,
            })
            .fold(0.0, f64::max);
        let h = if widest > 0.0 { 1.1 * widest } else { 0.5 * (x.1 - x.0) };
        (-h, h)
    });
    Frame { x, y }
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Closed polygon for `{x ≥ boundary(y)}` clipped to the frame.
fn region_path(frame: &Frame, samples: usize, boundary: impl Fn(f64) -> f64) -> String {
    let mut d = String::new();
    for i in 0..=samples {
        let y = frame.y.0 + (frame.y.1 - frame.y.0) * i as f64 / samples as f64;
        let x = frame.clamp_x(boundary(y));
        let cmd = if i == 0 { 'M' } else { 'L' };
        let _ = write!(d, "{cmd}{},{} ", fmt(frame.px(x)), fmt(frame.py(y)));
    }
    let _ = write!(
        d,
        "L{},{} L{},{} Z",
        fmt(frame.px(frame.x.1)),
        fmt(frame.py(frame.y.1)),
        fmt(frame.px(frame.x.1)),
        fmt(frame.py(frame.y.0))
    );
    d
}

/// Closed sliver along the real axis standing in for a ray `[v, ∞)`.
fn ray_path(frame: &Frame, vertex: f64) -> String {
    let (x0, x1) = (frame.px(frame.clamp_x(vertex)), frame.px(frame.x.1));
    let (ya, yb) = (frame.py(0.0) - 1.5, frame.py(0.0) + 1.5);
    format!("M{},{} L{},{} L{},{} L{},{} Z", fmt(x0), fmt(ya), fmt(x1), fmt(ya), fmt(x1), fmt(yb), fmt(x0), fmt(yb))
}

fn parabola_path(frame: &Frame, par: &Parabola, samples: usize) -> String {
    if par.degenerate {
        ray_path(frame, par.vertex)
    } else {
        region_path(frame, samples, |y| par.boundary_x(y))
    }
}

fn layers_for(params: &SpectralParams, spec: &FigureSpec) -> Result<(Vec<Layer>, String), RegionError> {
    let p = spec.p;
    let family = |region: &RegionUnion| {
        region
            .params
            .alpha_sq
            .sample(spec.slices)
            .into_iter()
            .map(|a| Layer::Outline { boundary: region.slice(a), color: CONTAINED })
            .collect::<Vec<_>>()
    };
    Ok(match spec.kind {
        FigureKind::L1Region => (
            vec![Layer::Fill { boundary: l1_contained_parabola(params), color: CONTAINED, opacity: 0.45 }],
            "contained L1 parabola".into(),
        ),
        FigureKind::L1Both => (
            vec![
                Layer::Fill { boundary: l1_containing_parabola(params), color: CONTAINING, opacity: 0.3 },
                Layer::Fill { boundary: l1_contained_parabola(params), color: CONTAINED, opacity: 0.45 },
            ],
            "L1: contained (inner) and containing (outer) parabolas".into(),
        ),
        FigureKind::LpFamily => {
            let region = lp_contained_region(params, p)?;
            let mut layers = family(&region);
            layers.insert(0, Layer::Union { region, color: CONTAINED, opacity: 0.3 });
            (layers, format!("p = {p}: union of slice parabolas over A"))
        }
        FigureKind::Envelope => {
            let region = lp_contained_region(params, p)?;
            let mut layers = family(&region);
            layers.insert(0, Layer::Union { region, color: CONTAINED, opacity: 0.3 });
            if let Ok(slope) = envelope_slope(p) {
                layers.push(Layer::Lines { slope, color: "#c44e52" });
            }
            (layers, format!("p = {p}: slice family and envelope lines"))
        }
        FigureKind::LpBoth => {
            let region = lp_contained_region(params, p)?;
            (
                vec![
                    Layer::Fill { boundary: lp_containing_parabola(params, p)?, color: CONTAINING, opacity: 0.3 },
                    Layer::Union { region, color: CONTAINED, opacity: 0.45 },
                ],
                format!("p = {p}: contained region and containing parabola"),
            )
        }
    })
}

/// Renders one figure. Every path is closed and the view box is fixed.
pub fn render(params: &SpectralParams, spec: &FigureSpec) -> Result<String, RegionError> {
    let (layers, title) = layers_for(params, spec)?;
    let frame = default_frame(&layers, spec);
    let samples = spec.resolution.max(16);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<desc>frame x={},{} y={},{}</desc>"#, frame.x.0, frame.x.1, frame.y.0, frame.y.1);
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<clipPath id="frame"><rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}"/></clipPath>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(out, r#"<g clip-path="url(#frame)">"#);
    for layer in &layers {
        match layer {
            Layer::Fill { boundary, color, opacity } => {
                let _ = writeln!(
                    out,
                    r#"<path d="{}" fill="{color}" fill-opacity="{opacity}" stroke="{color}" stroke-width="1.5"/>"#,
                    parabola_path(&frame, boundary, samples)
                );
            }
            Layer::Union { region, color, opacity } => {
                let d = if region.is_degenerate() {
                    ray_path(&frame, region.min_boundary(0.0).1)
                } else {
                    region_path(&frame, samples, |y| region.min_boundary(y).1)
                };
                let _ = writeln!(
                    out,
                    r#"<path d="{d}" fill="{color}" fill-opacity="{opacity}" stroke="{color}" stroke-width="1.5"/>"#
                );
            }
            Layer::Outline { boundary, color } => {
                let _ = writeln!(
                    out,
                    r#"<path d="{}" fill="none" stroke="{color}" stroke-width="0.8" stroke-opacity="0.8"/>"#,
                    parabola_path(&frame, boundary, samples)
                );
            }
            Layer::Lines { slope, color } => {
                // x = ±m y, drawn from the origin to the right edge.
                let x = frame.x.1;
                for sign in [1.0, -1.0] {
                    let _ = writeln!(
                        out,
                        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="1.2" stroke-dasharray="6 4"/>"#,
                        fmt(frame.px(0.0)),
                        fmt(frame.py(0.0)),
                        fmt(frame.px(x)),
                        fmt(frame.py(sign * x / slope))
                    );
                }
            }
        }
    }
    let _ = writeln!(out, "</g>");
    // Axes through the origin when visible, otherwise along the frame.
    let ax = frame.py(if frame.y.0 <= 0.0 && 0.0 <= frame.y.1 { 0.0 } else { frame.y.0 });
    let ay = frame.px(if frame.x.0 <= 0.0 && 0.0 <= frame.x.1 { 0.0 } else { frame.x.0 });
    let _ = writeln!(
        out,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="1"/>"#,
        fmt(MARGIN),
        fmt(ax),
        fmt(WIDTH - MARGIN),
        fmt(ax)
    );
    let _ = writeln!(
        out,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="1"/>"#,
        fmt(ay),
        fmt(MARGIN),
        fmt(ay),
        fmt(HEIGHT - MARGIN)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="gray"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">Re {}</text>"#,
        fmt(WIDTH - MARGIN),
        fmt(HEIGHT - MARGIN + 16.0),
        fmt(frame.x.1)
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, fmt(MARGIN), fmt(HEIGHT - MARGIN + 16.0), fmt(frame.x.0));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">Im {}</text>"#,
        fmt(MARGIN - 4.0),
        fmt(MARGIN + 4.0),
        fmt(frame.y.1)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}">{} (n = {}, alpha0 = {}, alpha1 = {})</text>"#,
        fmt(MARGIN),
        fmt(MARGIN - 16.0),
        escape(&title),
        params.n,
        params.alpha0,
        params.alpha1
    );
    out.push_str("</svg>\n");
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Reads back the plot window recorded in a rendered figure.
pub fn frame_of(svg: &str) -> Option<Frame> {
    let start = svg.find("<desc>frame ")? + "<desc>frame ".len();
    let body = &svg[start..start + svg[start..].find("</desc>")?];
    let (xs, ys) = body.split_once(' ')?;
    let pair = |s: &str, tag: &str| -> Option<(f64, f64)> {
        let (a, b) = s.strip_prefix(tag)?.split_once(',')?;
        Some((a.parse().ok()?, b.parse().ok()?))
    };
    Some(Frame { x: pair(xs, "x=")?, y: pair(ys, "y=")? })
}

/// Minimal structural check: a root `<svg>` with a positive four-number
/// `viewBox`, every `<path>` starting with `M` and closed by `Z`, and no
/// non-finite coordinates.
pub fn validate_svg(text: &str) -> Result<(), String> {
    let body = text.trim();
    let body = match body.strip_prefix("<?xml") {
        Some(rest) => rest.split_once("?>").ok_or("unterminated XML declaration")?.1.trim_start(),
        None => body,
    };
    if !body.starts_with("<svg") {
        return Err("document does not start with <svg".into());
    }
    if !body.ends_with("</svg>") {
        return Err("document does not end with </svg>".into());
    }
    let root = &body[..body.find('>').ok_or("unterminated <svg> tag")?];
    let vb = attribute(root, "viewBox").ok_or("missing viewBox")?;
    let nums: Vec<f64> =
        vb.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| format!("bad viewBox {vb:?}"))?;
    if nums.len() != 4 || nums.iter().any(|v| !v.is_finite()) || nums[2] <= 0.0 || nums[3] <= 0.0 {
        return Err(format!("bad viewBox {vb:?}"));
    }
    let mut paths = 0;
    for chunk in body.split("<path").skip(1) {
        let tag = &chunk[..chunk.find('>').ok_or("unterminated <path>")?];
        let d = attribute(tag, "d").ok_or("path without d attribute")?.trim();
        if !d.starts_with('M') {
            return Err(format!("path does not start with M: {:.40}", d));
        }
        if !(d.ends_with('Z') || d.ends_with('z')) {
            return Err(format!("open path: ...{}", &d[d.len().saturating_sub(40)..]));
        }
        paths += 1;
    }
    if paths == 0 {
        return Err("no paths".into());
    }
    for bad in ["NaN", "inf"] {
        if body.contains(bad) {
            return Err(format!("non-finite value {bad:?} in document"));
        }
    }
    if body.matches("<svg").count() != body.matches("</svg>").count() {
        return Err("unbalanced <svg> tags".into());
    }
    Ok(())
}

fn attribute<'a>(tag: &'a str, name: &str) -> Option<&'a str> {
    let key = format!(" {name}=\"");
    let start = tag.find(&key)? + key.len();
    let len = tag[start..].find('"')?;
    Some(&tag[start..start + len])
}
