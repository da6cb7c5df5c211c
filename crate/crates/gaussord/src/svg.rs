//! SVG rendering of 2-D Gaussian embeddings as axis-aligned ellipses.
//!
//! Each item becomes one `<ellipse>` centred at `mu` with semi-axes
//! `k·√sigma`, written in data units inside a group that maps data space
//! onto the canvas (y pointing up).

use std::fmt::Write as _;

use gaussord_core::GaussianEmbedding;

use crate::error::{Error, Result};

pub const DEFAULT_RADIUS_MULTIPLIER: f64 = 2.0;
pub const DEFAULT_CANVAS: u32 = 800;
const MARGIN: f64 = 20.0;
const FILL_OPACITY: f64 = 0.3;
const UNLABELED: &str = "#7f7f7f";
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotOptions {
    /// Ellipse semi-axis is `radius_multiplier · √σ`.
    pub radius_multiplier: f64,
    /// Square canvas side in pixels.
    pub canvas: u32,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            radius_multiplier: DEFAULT_RADIUS_MULTIPLIER,
            canvas: DEFAULT_CANVAS,
        }
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

pub fn color_for(label: Option<usize>) -> &'static str {
    label.map_or(UNLABELED, |l| PALETTE[l % PALETTE.len()])
}

/// Semi-axes `(rx, ry)` of an item's ellipse.
pub fn semi_axes(z: &GaussianEmbedding, k: f64) -> (f64, f64) {
    (k * z.sigma()[0].sqrt(), k * z.sigma()[1].sqrt())
}

pub fn render_svg(embeddings: &[GaussianEmbedding], labels: Option<&[usize]>, opts: &PlotOptions) -> Result<String> {
    if embeddings.is_empty() {
        return Err(Error::Data("nothing to plot".into()));
    }
    if let Some(z) = embeddings.iter().find(|z| z.dim() != 2) {
        return Err(Error::Data(format!(
            "plotting needs 2-D embeddings, got d = {}; train with --dim 2",
            z.dim()
        )));
    }
    if let Some(l) = labels {
        if l.len() != embeddings.len() {
            return Err(Error::Data(format!(
                "{} labels for {} embeddings",
                l.len(),
                embeddings.len()
            )));
        }
    }
    if !(opts.radius_multiplier > 0.0) || opts.canvas == 0 {
        return Err(Error::Usage("radius multiplier and canvas size must be positive".into()));
    }
    let k = opts.radius_multiplier;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in embeddings {
        let (rx, ry) = semi_axes(z, k);
        let (mx, my) = (z.mu()[0], z.mu()[1]);
        x0 = x0.min(mx - rx);
        x1 = x1.max(mx + rx);
        y0 = y0.min(my - ry);
        y1 = y1.max(my + ry);
    }
    let side = f64::from(opts.canvas);
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let scale = (side - 2.0 * MARGIN) / span;
    let off_x = MARGIN + ((side - 2.0 * MARGIN) - (x1 - x0) * scale) / 2.0;
    let off_y = MARGIN + ((side - 2.0 * MARGIN) - (y1 - y0) * scale) / 2.0;
    let tx = off_x - x0 * scale;
    let ty = off_y + y1 * scale;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{c}" height="{c}" viewBox="0 0 {c} {c}">"#,
        c = opts.canvas
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{c}" height="{c}" fill="white"/>"#, c = opts.canvas);
    let _ = writeln!(
        out,
        r#"<g transform="translate({},{}) scale({},{})" stroke-width="{}">"#,
        num(tx),
        num(ty),
        num(scale),
        num(-scale),
        num(1.0 / scale)
    );
    for (i, z) in embeddings.iter().enumerate() {
        let (rx, ry) = semi_axes(z, k);
        let color = color_for(labels.map(|l| l[i]));
        let _ = writeln!(
            out,
            r#"<ellipse cx="{}" cy="{}" rx="{}" ry="{}" fill="{color}" fill-opacity="{FILL_OPACITY}" stroke="{color}"/>"#,
            num(z.mu()[0]),
            num(z.mu()[1]),
            num(rx),
            num(ry)
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
