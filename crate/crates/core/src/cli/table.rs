//! Column tables with CSV and SVG output.

use std::fmt::Write as _;
use std::path::Path;

/// Header of the per-trajectory curve table.
pub const CURVE_HEADER: [&str; 8] = [
    "t",
    "qfi_sim",
    "qfi_rate_sim",
    "bound_optimized",
    "bound_hls",
    "bound_hnls",
    "bound_prior_linear",
    "bound_prior_quadratic",
];

/// Header of the per-trajectory rate table.
pub const RATE_HEADER: [&str; 7] = [
    "t",
    "qfi_rate_sim",
    "rate_bound_optimized",
    "rate_bound_hls",
    "rate_curve_hls",
    "rate_prior_linear",
    "rate_prior_quadratic",
];

/// Slack allowed when checking that a bound column dominates a simulated one.
pub const DOMINANCE_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("{table}: column `{bound}` = {bound_value} is below `{value}` = {value_value} at {x_name} = {x}")]
    Dominance {
        table: String,
        bound: String,
        value: String,
        x_name: String,
        x: f64,
        bound_value: f64,
        value_value: f64,
    },
    #[error("{table}: first column not strictly increasing at row {row}")]
    NotIncreasing { table: String, row: usize },
    #[error("{table}: row {row} has {got} cells, expected {expected}")]
    RowLength { table: String, row: usize, got: usize, expected: usize },
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    /// Missing values are written as empty cells.
    pub rows: Vec<Vec<Option<f64>>>,
    /// `(bound, value)` column pairs with `bound >= value - DOMINANCE_TOL`.
    pub dominance: Vec<(String, String)>,
}

impl Table {
    pub fn new<S: AsRef<str>>(name: impl Into<String>, columns: &[S]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
            dominance: Vec::new(),
        }
    }

    /// Builds a table from equally long columns; `None` columns are empty.
    pub fn from_columns<S: AsRef<str>>(name: impl Into<String>, columns: &[S], data: &[Option<&[f64]>]) -> Self {
        let mut table = Table::new(name, columns);
        let n = data.iter().flatten().map(|c| c.len()).max().unwrap_or(0);
        for i in 0..n {
            table.rows.push(data.iter().map(|c| c.and_then(|c| c.get(i).copied())).collect());
        }
        table
    }

    pub fn with_dominance(mut self, bound: &str, value: &str) -> Self {
        self.dominance.push((bound.to_string(), value.to_string()));
        self
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Values of a column with missing cells dropped.
    pub fn values(&self, name: &str) -> Vec<f64> {
        self.column(name).unwrap_or_default().into_iter().flatten().collect()
    }

    pub fn check(&self) -> Result<(), TableError> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(TableError::RowLength { table: self.name.clone(), row: i, got: row.len(), expected: self.columns.len() });
            }
            if i > 0 {
                match (self.rows[i - 1][0], row[0]) {
                    (Some(a), Some(b)) if b > a => {}
                    _ => return Err(TableError::NotIncreasing { table: self.name.clone(), row: i }),
                }
            }
        }
        for (bound, value) in &self.dominance {
            let (Some(jb), Some(jv)) = (self.column_index(bound), self.column_index(value)) else { continue };
            for row in &self.rows {
                if let (Some(b), Some(v)) = (row[jb], row[jv]) {
                    if !(b >= v - DOMINANCE_TOL) {
                        return Err(TableError::Dominance {
                            table: self.name.clone(),
                            bound: bound.clone(),
                            value: value.clone(),
                            x_name: self.columns[0].clone(),
                            x: row[0].unwrap_or(f64::NAN),
                            bound_value: b,
                            value_value: v,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.map_or(String::new(), |v| format!("{v}"))).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Checks the table, then writes the CSV and, when asked, an SVG plot.
    pub fn write(&self, csv: &Path, svg: Option<(&Path, &PlotOptions)>) -> Result<(), TableError> {
        self.check()?;
        write_file(csv, &self.to_csv())?;
        if let Some((path, opts)) = svg {
            write_file(path, &self.to_svg(opts))?;
        }
        Ok(())
    }

    pub fn to_svg(&self, opts: &PlotOptions) -> String {
        let series: Vec<Series> = (1..self.columns.len())
            .filter(|j| !opts.skip.contains(&self.columns[*j]))
            .map(|j| Series {
                label: self.columns[j].clone(),
                points: self.rows.iter().filter_map(|r| Some((r[0]?, r[j]?))).collect(),
            })
            .collect();
        plot(&series, &self.columns[0], opts)
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), TableError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| TableError::Io { path: dir.display().to_string(), source })?;
    }
    std::fs::write(path, text).map_err(|source| TableError::Io { path: path.display().to_string(), source })
}

#[derive(Clone, Debug, Default)]
pub struct PlotOptions {
    pub title: String,
    pub y_label: String,
    pub log_y: bool,
    /// Columns left out of the plot.
    pub skip: Vec<String>,
}

impl PlotOptions {
    pub fn new(title: impl Into<String>, y_label: impl Into<String>) -> Self {
        PlotOptions { title: title.into(), y_label: y_label.into(), ..Default::default() }
    }
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 8] = ["#c0392b", "#2e6fba", "#7f7f7f", "#e67e22", "#8e44ad", "#16a085", "#d35fa0", "#333333"];
const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Standalone SVG with one polyline per series.
pub fn plot(series: &[Series], x_label: &str, opts: &PlotOptions) -> String {
    let ty = |y: f64| if opts.log_y { y.log10() } else { y };
    let usable = |y: f64| y.is_finite() && (!opts.log_y || y > 0.0);
    let pts = || series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && usable(*y));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(ty(y));
        y1 = y1.max(ty(y));
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pad = 0.04 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(&opts.title));
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for x in nice_ticks(x0, x1) {
        let px = sx(x);
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, fmt_tick(x));
    }
    for y in nice_ticks(y0, y1) {
        let py = sy(y);
        let label = if opts.log_y { format!("1e{}", fmt_tick(y)) } else { fmt_tick(y) };
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 8.0, py + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 12.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&opts.y_label)
    );
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = ser
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && usable(*y))
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(ty(y)).clamp(TOP, TOP + ph)))
            .collect();
        if !coords.is_empty() {
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#, coords.join(" "));
        }
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 22.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 28.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}
