//! CSV and SVG output.
//!
//! CSV is the canonical format: a header row, comma separators, `\n` line
//! endings, UTF-8, and floats printed with 17 significant digits so a rerun
//! of the same scenario reproduces the file byte for byte.  The last line is
//! a comment carrying the scenario content hash and the tool version.  SVG
//! plots are generated locally (no external assets): a line plot for single
//! runs, a heatmap for sweeps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::runner::{Plot, RunProduct, Table};
use crate::CliError;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Render one table to CSV text.
pub fn csv_string(table: &Table, hash: &str) -> String {
    let mut out = String::new();
    out.push_str(&table.header.join(","));
    out.push('\n');
    for row in &table.rows {
        for (k, value) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{value:.16e}");
        }
        if let Some(tag) = table.component {
            out.push(',');
            out.push_str(tag);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "# scenario={hash} version={VERSION}");
    out
}

/// Write every table (and optionally a plot) into `dir`; returns the paths.
pub fn write_product(
    product: &RunProduct,
    dir: &Path,
    svg: bool,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for table in &product.tables {
        let path = dir.join(&table.file_name);
        let text = csv_string(table, &product.hash);
        fs::write(&path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    if svg {
        let path = dir.join(format!("{}.svg", product.name));
        let text = match &product.plot {
            Plot::Lines { x, series } => svg_lines(&product.name, x, series),
            Plot::Heatmap {
                axis_label,
                x,
                y,
                values,
            } => svg_heatmap(&product.name, axis_label, x, y, values),
        };
        fs::write(&path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 540.0;
const MARGIN_L: f64 = 76.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 58.0;

const LINE_COLORS: [&str; 3] = ["#26547c", "#2a9d8f", "#e76f51"];

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 1.0, hi + 1.0);
    }
    (lo, hi)
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        MARGIN_T + (self.y1 - y) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn svg_open(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n\
         <text x=\"{}\" y=\"22\" font-size=\"15\" fill=\"#222222\" text-anchor=\"middle\">{title}</text>\n",
        WIDTH / 2.0
    );
}

fn svg_axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let left = MARGIN_L;
    let right = WIDTH - MARGIN_R;
    let top = MARGIN_T;
    let bottom = HEIGHT - MARGIN_B;
    let _ = write!(
        out,
        "<rect x=\"{left}\" y=\"{top}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#222222\" stroke-width=\"1\"/>\n",
        right - left,
        bottom - top
    );
    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let xv = frame.x0 + t * (frame.x1 - frame.x0);
        let yv = frame.y0 + t * (frame.y1 - frame.y0);
        let px = frame.px(xv);
        let py = frame.py(yv);
        let _ = write!(
            out,
            "<line x1=\"{px:.2}\" y1=\"{bottom}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"#222222\"/>\n\
             <text x=\"{px:.2}\" y=\"{}\" font-size=\"12\" fill=\"#222222\" \
             text-anchor=\"middle\">{}</text>\n",
            bottom + 6.0,
            bottom + 20.0,
            fmt_tick(xv)
        );
        let _ = write!(
            out,
            "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{left}\" y2=\"{py:.2}\" stroke=\"#222222\"/>\n\
             <text x=\"{}\" y=\"{:.2}\" font-size=\"12\" fill=\"#222222\" \
             text-anchor=\"end\">{}</text>\n",
            left - 6.0,
            left - 9.0,
            py + 4.0,
            fmt_tick(yv)
        );
    }
    let _ = write!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" fill=\"#222222\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"18\" y=\"{}\" font-size=\"13\" fill=\"#222222\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {})\">{y_label}</text>\n",
        (left + right) / 2.0,
        HEIGHT - 14.0,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0
    );
}

/// Line plot of the signal components over the frequency grid.
pub fn svg_lines(title: &str, x: &[f64], series: &[(&'static str, Vec<f64>)]) -> String {
    let (x0, x1) = span(x.iter().copied());
    let (mut y0, mut y1) = span(series.iter().flat_map(|(_, v)| v.iter().copied()));
    let pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    let frame = Frame { x0, x1, y0, y1 };

    let mut out = String::new();
    svg_open(&mut out, title);
    svg_axes(&mut out, &frame, "omega (eV)", "signal (arb. units)");
    if frame.y0 < 0.0 && frame.y1 > 0.0 {
        let zero = frame.py(0.0);
        let _ = write!(
            out,
            "<line x1=\"{MARGIN_L}\" y1=\"{zero:.2}\" x2=\"{}\" y2=\"{zero:.2}\" \
             stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n",
            WIDTH - MARGIN_R
        );
    }
    for (k, (tag, values)) in series.iter().enumerate() {
        let color = LINE_COLORS[k % LINE_COLORS.len()];
        let mut points = String::new();
        for (&xv, &yv) in x.iter().zip(values) {
            let _ = write!(points, "{:.2},{:.2} ", frame.px(xv), frame.py(yv));
        }
        let _ = write!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            points.trim_end()
        );
        let ly = MARGIN_T + 16.0 + 18.0 * k as f64;
        let lx = WIDTH - MARGIN_R - 150.0;
        let _ = write!(
            out,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#222222\">{tag}</text>\n",
            lx + 24.0,
            lx + 30.0,
            ly + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

fn heat_color(t: f64) -> (u8, u8, u8) {
    let t = t.clamp(-1.0, 1.0);
    let lerp = |a: f64, b: f64, s: f64| (a + (b - a) * s).round() as u8;
    if t >= 0.0 {
        (
            lerp(255.0, 178.0, t),
            lerp(255.0, 24.0, t),
            lerp(255.0, 43.0, t),
        )
    } else {
        (
            lerp(255.0, 33.0, -t),
            lerp(255.0, 102.0, -t),
            lerp(255.0, 172.0, -t),
        )
    }
}

/// Heatmap of the total signal over frequency x sweep axis.
pub fn svg_heatmap(
    title: &str,
    axis_label: &str,
    x: &[f64],
    y: &[f64],
    values: &[Vec<f64>],
) -> String {
    let (x0, x1) = span(x.iter().copied());
    let (y0, y1) = span(y.iter().copied());
    let frame = Frame { x0, x1, y0, y1 };
    let vmax = values
        .iter()
        .flat_map(|row| row.iter().map(|v| v.abs()))
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut out = String::new();
    svg_open(&mut out, title);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let cell_w = plot_w / x.len() as f64;
    let cell_h = plot_h / y.len() as f64;
    let _ = write!(out, "<g shape-rendering=\"crispEdges\">\n");
    for (yi, row) in values.iter().enumerate() {
        // Axis values ascend upward, matching the tick labels.
        let py = MARGIN_T + plot_h - cell_h * (yi + 1) as f64;
        for (xi, &v) in row.iter().enumerate() {
            let (r, g, b) = heat_color(v / vmax);
            if (r, g, b) == (255, 255, 255) {
                continue;
            }
            let px = MARGIN_L + cell_w * xi as f64;
            let _ = write!(
                out,
                "<rect x=\"{px:.2}\" y=\"{py:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                 fill=\"rgb({r},{g},{b})\"/>\n",
                cell_w + 0.05,
                cell_h + 0.05
            );
        }
    }
    out.push_str("</g>\n");
    svg_axes(&mut out, &frame, "omega (eV)", axis_label);
    let _ = write!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#222222\" text-anchor=\"end\">\
         max |signal| = {vmax:.3e}</text>\n",
        WIDTH - MARGIN_R,
        MARGIN_T - 6.0
    );
    out.push_str("</svg>\n");
    out
}
