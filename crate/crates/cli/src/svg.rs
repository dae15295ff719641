//! Deterministic SVG map rendering: single-period scatters, overlaid
//! dynamic maps with an opacity ramp and optional movement arrows, and
//! per-object trajectory polylines.
//!
//! Output is plain text with all numbers formatted to four decimals and
//! all elements emitted in a fixed order, so identical inputs produce
//! byte-identical files.

use std::collections::HashMap;
use std::fmt::Write as _;

use dynamap_core::{Error, InclusionMask};

use crate::errors::{CliError, Result};
use crate::io::CoordsFile;

/// Which kind of map to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotMode {
    /// One period as a labeled scatter.
    Static,
    /// All periods overlaid, oldest faintest.
    Dynamic,
    /// One polyline per object through its positions.
    Trajectories,
}

impl std::str::FromStr for PlotMode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(PlotMode::Static),
            "dynamic" => Ok(PlotMode::Dynamic),
            "trajectories" => Ok(PlotMode::Trajectories),
            other => Err(CliError::Parse(format!(
                "unknown plot mode {other:?}, expected static, dynamic, or trajectories"
            ))),
        }
    }
}

/// Everything the renderer needs besides the coordinates themselves.
#[derive(Debug, Clone)]
pub struct PlotOptions {
    /// Plot kind.
    pub mode: PlotMode,
    /// Which period a static plot shows (default: the first).
    pub period: Option<String>,
    /// Draw movement arrows between consecutive positions (dynamic mode).
    pub show_arrows: bool,
    /// Opacity of the oldest period in dynamic mode.
    pub transparency_start: f64,
    /// Opacity of the newest period in dynamic mode.
    pub transparency_end: f64,
    /// Per-label fill colors (any SVG color string).
    pub colors: Option<HashMap<String, String>>,
    /// Per-label marker radii, still in text form.
    pub sizes: Option<HashMap<String, String>>,
    /// Per-label display text overriding the object label.
    pub display_labels: Option<HashMap<String, String>>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            mode: PlotMode::Static,
            period: None,
            show_arrows: false,
            transparency_start: 0.25,
            transparency_end: 1.0,
            colors: None,
            sizes: None,
            display_labels: None,
        }
    }
}

const VIEW: f64 = 640.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn esc(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Affine data-to-viewport mapping with a flipped y axis and preserved
/// aspect ratio.
struct Projection {
    scale: f64,
    cx: f64,
    cy: f64,
}

impl Projection {
    fn fit(points: &[(f64, f64)]) -> Self {
        let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in points {
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
        let span_x = (max_x - min_x).max(1e-9);
        let span_y = (max_y - min_y).max(1e-9);
        let usable = VIEW - 2.0 * MARGIN;
        Self {
            scale: (usable / span_x).min(usable / span_y),
            cx: (min_x + max_x) / 2.0,
            cy: (min_y + max_y) / 2.0,
        }
    }

    fn x(&self, x: f64) -> f64 {
        VIEW / 2.0 + (x - self.cx) * self.scale
    }

    fn y(&self, y: f64) -> f64 {
        VIEW / 2.0 - (y - self.cy) * self.scale
    }
}

struct Styling {
    colors: Vec<String>,
    radii: Vec<f64>,
    texts: Vec<String>,
}

/// Resolves per-object aesthetics, failing when a supplied file does not
/// cover every plotted label.
fn resolve_styling(labels: &[String], opts: &PlotOptions) -> Result<Styling> {
    let lookup = |table: &Option<HashMap<String, String>>, what: &str| -> Result<Vec<String>> {
        match table {
            None => Ok(Vec::new()),
            Some(map) => labels
                .iter()
                .map(|l| {
                    map.get(l).cloned().ok_or_else(|| {
                        CliError::Core(Error::Data(format!(
                            "{what} file has no entry for label {l:?}"
                        )))
                    })
                })
                .collect(),
        }
    };
    let colors = match lookup(&opts.colors, "color")? {
        v if v.is_empty() => (0..labels.len())
            .map(|i| PALETTE[i % PALETTE.len()].to_string())
            .collect(),
        v => v,
    };
    let radii = match &opts.sizes {
        None => vec![4.0; labels.len()],
        Some(map) => labels
            .iter()
            .map(|l| {
                let raw = map.get(l).ok_or_else(|| {
                    CliError::Core(Error::Data(format!(
                        "size file has no entry for label {l:?}"
                    )))
                })?;
                raw.parse::<f64>().map_err(|_| {
                    CliError::Parse(format!("size for label {l:?} is not a number: {raw:?}"))
                })
            })
            .collect::<Result<Vec<f64>>>()?,
    };
    let texts = match lookup(&opts.display_labels, "label")? {
        v if v.is_empty() => labels.to_vec(),
        v => v,
    };
    Ok(Styling {
        colors,
        radii,
        texts,
    })
}

/// Renders a coordinates file to an SVG document string. Coordinates with
/// one dimension are drawn along a horizontal line scale; higher than two
/// dimensions plot the first two. Objects excluded by the mask are
/// omitted from their absent periods.
pub fn render_svg(
    file: &CoordsFile,
    mask: Option<&InclusionMask>,
    opts: &PlotOptions,
) -> Result<String> {
    let coords = &file.coords;
    let (n, t_count) = (coords.n_objects(), coords.n_periods());
    if let Some(m) = mask {
        m.check_shape(t_count, n).map_err(CliError::Core)?;
    }
    for (name, v) in [
        ("transparency-start", opts.transparency_start),
        ("transparency-end", opts.transparency_end),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::Core(Error::Config(format!(
                "{name} must lie in [0,1], got {v}"
            ))));
        }
    }
    let one_d = coords.dims() == 1;
    let included = |t: usize, i: usize| mask.map_or(true, |m| m.is_included(t, i));
    let point = |t: usize, i: usize| -> (f64, f64) {
        let m = &coords.maps()[t];
        if one_d {
            (m[(i, 0)], 0.0)
        } else {
            (m[(i, 0)], m[(i, 1)])
        }
    };

    let static_t = match (&opts.mode, &opts.period) {
        (PlotMode::Static, Some(p)) => Some(
            file.periods
                .iter()
                .position(|q| q == p)
                .ok_or_else(|| {
                    CliError::Core(Error::Data(format!("no period named {p:?} in coordinates")))
                })?,
        ),
        (PlotMode::Static, None) => Some(0),
        _ => None,
    };

    // Project against everything that will be drawn.
    let mut visible: Vec<(f64, f64)> = Vec::new();
    for t in 0..t_count {
        if static_t.is_some_and(|s| s != t) {
            continue;
        }
        for i in 0..n {
            if included(t, i) {
                visible.push(point(t, i));
            }
        }
    }
    if visible.is_empty() {
        return Err(CliError::Core(Error::Data(
            "nothing to plot: every object is excluded".into(),
        )));
    }
    let proj = Projection::fit(&visible);
    let style = resolve_styling(&file.labels, opts)?;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {VIEW:.4} {VIEW:.4}\" width=\"{VIEW:.4}\" height=\"{VIEW:.4}\">"
    );
    let _ = writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{VIEW:.4}\" height=\"{VIEW:.4}\" fill=\"#ffffff\"/>"
    );
    if opts.show_arrows && opts.mode == PlotMode::Dynamic {
        let _ = writeln!(
            svg,
            "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" orient=\"auto-start-reverse\"><path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#555555\"/></marker></defs>"
        );
    }
    if one_d {
        let y = proj.y(0.0);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.4}\" y1=\"{y:.4}\" x2=\"{:.4}\" y2=\"{y:.4}\" stroke=\"#999999\" stroke-width=\"1\"/>",
            MARGIN,
            VIEW - MARGIN
        );
    }

    let circle = |svg: &mut String, (x, y): (f64, f64), i: usize, opacity: f64| {
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.4}\" cy=\"{:.4}\" r=\"{:.4}\" fill=\"{}\" opacity=\"{:.4}\"/>",
            proj.x(x),
            proj.y(y),
            style.radii[i],
            style.colors[i],
            opacity
        );
    };
    let text = |svg: &mut String, (x, y): (f64, f64), content: &str| {
        let _ = writeln!(
            svg,
            "<text x=\"{:.4}\" y=\"{:.4}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222222\">{}</text>",
            proj.x(x) + 6.0,
            proj.y(y) - 6.0,
            esc(content)
        );
    };

    match opts.mode {
        PlotMode::Static => {
            let t = static_t.unwrap();
            for i in 0..n {
                if !included(t, i) {
                    continue;
                }
                circle(&mut svg, point(t, i), i, 1.0);
                text(&mut svg, point(t, i), &style.texts[i]);
            }
        }
        PlotMode::Dynamic => {
            let opacity = |t: usize| {
                if t_count == 1 {
                    opts.transparency_end
                } else {
                    opts.transparency_start
                        + (opts.transparency_end - opts.transparency_start) * t as f64
                            / (t_count - 1) as f64
                }
            };
            for i in 0..n {
                for t in 0..t_count {
                    if !included(t, i) {
                        continue;
                    }
                    if opts.show_arrows && t > 0 && included(t - 1, i) {
                        let (ax, ay) = point(t - 1, i);
                        let (bx, by) = point(t, i);
                        let _ = writeln!(
                            svg,
                            "<line x1=\"{:.4}\" y1=\"{:.4}\" x2=\"{:.4}\" y2=\"{:.4}\" stroke=\"#555555\" stroke-width=\"1\" opacity=\"{:.4}\" marker-end=\"url(#arrow)\"/>",
                            proj.x(ax),
                            proj.y(ay),
                            proj.x(bx),
                            proj.y(by),
                            opacity(t)
                        );
                    }
                    circle(&mut svg, point(t, i), i, opacity(t));
                }
                if let Some(last) = (0..t_count).rev().find(|&t| included(t, i)) {
                    text(&mut svg, point(last, i), &style.texts[i]);
                }
            }
        }
        PlotMode::Trajectories => {
            for i in 0..n {
                // Split at exclusion gaps so re-entries do not draw a
                // misleading connecting segment.
                let mut run: Vec<usize> = Vec::new();
                let mut runs: Vec<Vec<usize>> = Vec::new();
                for t in 0..t_count {
                    if included(t, i) {
                        run.push(t);
                    } else if !run.is_empty() {
                        runs.push(std::mem::take(&mut run));
                    }
                }
                if !run.is_empty() {
                    runs.push(run);
                }
                for segment in &runs {
                    if segment.len() >= 2 {
                        let pts: Vec<String> = segment
                            .iter()
                            .map(|&t| {
                                let (x, y) = point(t, i);
                                format!("{:.4},{:.4}", proj.x(x), proj.y(y))
                            })
                            .collect();
                        let _ = writeln!(
                            svg,
                            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
                            pts.join(" "),
                            style.colors[i]
                        );
                    }
                    for &t in segment {
                        circle(&mut svg, point(t, i), i, 1.0);
                        let (x, y) = point(t, i);
                        let _ = writeln!(
                            svg,
                            "<text x=\"{:.4}\" y=\"{:.4}\" font-family=\"sans-serif\" font-size=\"8\" fill=\"#666666\">{}</text>",
                            proj.x(x) + 4.0,
                            proj.y(y) + 10.0,
                            esc(&file.periods[t])
                        );
                    }
                }
                if let Some(&last) = runs.last().and_then(|r| r.last()) {
                    text(&mut svg, point(last, i), &style.texts[i]);
                }
            }
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
