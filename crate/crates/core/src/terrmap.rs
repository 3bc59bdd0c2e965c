//! ASCII territorial maps over the first two discriminant functions, and
//! the one-function strip/histogram used when only one function exists.
//!
//! Each character cell is assigned the class the classifier (restricted to
//! the plotted functions) picks at the cell center. Only cells on a region
//! border print their class symbol; centroids print as `*`.

use crate::discriminant::{DiscriminantModel, LabeledDataset};
use crate::error::{Error, Result};
use crate::taxonomy::CategoryTaxonomy;

pub const MIN_WIDTH: usize = 10;
pub const MIN_HEIGHT: usize = 5;
/// Fraction of the centroid range added on each side for default bounds.
pub const DEFAULT_MARGIN: f64 = 0.25;

/// Plot window in discriminant-score units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub f1_min: f64,
    pub f1_max: f64,
    pub f2_min: f64,
    pub f2_max: f64,
}

impl Bounds {
    pub fn new(f1_min: f64, f1_max: f64, f2_min: f64, f2_max: f64) -> Result<Self> {
        let ok = |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ok(f1_min, f1_max) || !ok(f2_min, f2_max) {
            return Err(Error::Input(format!(
                "invalid bounds {f1_min},{f1_max},{f2_min},{f2_max}"
            )));
        }
        Ok(Self {
            f1_min,
            f1_max,
            f2_min,
            f2_max,
        })
    }

    /// Parses `f1_min,f1_max,f2_min,f2_max`.
    pub fn parse(text: &str) -> Result<Self> {
        let v: Vec<f64> = text
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Input(format!("cannot parse bounds {text:?}")))?;
        match v[..] {
            [a, b, c, d] => Self::new(a, b, c, d),
            _ => Err(Error::Input(format!("bounds need four values, got {text:?}"))),
        }
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let span = hi - lo;
    if span <= 0.0 {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo - DEFAULT_MARGIN * span, hi + DEFAULT_MARGIN * span)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub class: usize,
    pub boundary: bool,
    pub centroid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerritorialMap {
    pub width: usize,
    pub height: usize,
    pub bounds: Bounds,
    /// Row-major, row 0 at the top (largest second-function score).
    pub cells: Vec<Cell>,
    pub class_labels: Vec<String>,
    pub symbols: Vec<char>,
}

impl TerritorialMap {
    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.cells[row * self.width + col]
    }

    fn dx(&self) -> f64 {
        (self.bounds.f1_max - self.bounds.f1_min) / self.width as f64
    }

    fn dy(&self) -> f64 {
        (self.bounds.f2_max - self.bounds.f2_min) / self.height as f64
    }

    /// Discriminant coordinates of a cell center.
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.bounds.f1_min + (col as f64 + 0.5) * self.dx(),
            self.bounds.f2_max - (row as f64 + 0.5) * self.dy(),
        )
    }

    /// Cell containing a point, if inside the bounds.
    pub fn locate(&self, f1: f64, f2: f64) -> Option<(usize, usize)> {
        let col = ((f1 - self.bounds.f1_min) / self.dx()).floor();
        let row = ((self.bounds.f2_max - f2) / self.dy()).floor();
        if col < 0.0 || row < 0.0 || col >= self.width as f64 || row >= self.height as f64 {
            return None;
        }
        Some((row as usize, col as usize))
    }
}

fn symbols_for(labels: &[String], taxonomy: &CategoryTaxonomy) -> Vec<char> {
    let mut tax = taxonomy.clone();
    labels
        .iter()
        .map(|l| {
            tax.ensure(l);
            tax.symbol(l)
        })
        .collect()
}

/// Territorial map over functions 1 and 2 of `model`.
pub fn render_map(
    model: &DiscriminantModel,
    taxonomy: &CategoryTaxonomy,
    width: usize,
    height: usize,
    bounds: Option<Bounds>,
) -> Result<TerritorialMap> {
    if model.n_functions() < 2 {
        return Err(Error::Dimension(format!(
            "a territorial map needs two discriminant functions, the model has {}; \
             use a strip plot instead",
            model.n_functions()
        )));
    }
    if width < MIN_WIDTH || height < MIN_HEIGHT {
        return Err(Error::Input(format!(
            "map must be at least {MIN_WIDTH}x{MIN_HEIGHT} cells"
        )));
    }
    let centroids = &model.class_centroids;
    let bounds = match bounds {
        Some(b) => b,
        None => {
            let (f1_min, f1_max) = padded_range((0..model.n_classes()).map(|k| centroids[(k, 0)]));
            let (f2_min, f2_max) = padded_range((0..model.n_classes()).map(|k| centroids[(k, 1)]));
            Bounds::new(f1_min, f1_max, f2_min, f2_max)?
        }
    };

    let mut map = TerritorialMap {
        width,
        height,
        bounds,
        cells: Vec::with_capacity(width * height),
        class_labels: model.class_labels.clone(),
        symbols: symbols_for(&model.class_labels, taxonomy),
    };
    for row in 0..height {
        for col in 0..width {
            let (x, y) = map.cell_center(row, col);
            map.cells.push(Cell {
                class: model.decide(&[x, y]),
                boundary: false,
                centroid: false,
            });
        }
    }
    for row in 0..height {
        for col in 0..width {
            let class = map.cell(row, col).class;
            let differs = |r: usize, c: usize| map.cell(r, c).class != class;
            let boundary = (row > 0 && differs(row - 1, col))
                || (row + 1 < height && differs(row + 1, col))
                || (col > 0 && differs(row, col - 1))
                || (col + 1 < width && differs(row, col + 1));
            map.cells[row * width + col].boundary = boundary;
        }
    }
    for k in 0..model.n_classes() {
        if let Some((row, col)) = map.locate(centroids[(k, 0)], centroids[(k, 1)]) {
            map.cells[row * width + col].centroid = true;
        }
    }
    Ok(map)
}

/// Tick values at multiples of a 1-2-5 step, at least `min_cells` apart.
fn ticks(lo: f64, hi: f64, cells: usize, min_cells: usize) -> Vec<f64> {
    let per_cell = (hi - lo) / cells as f64;
    let mut step = 1.0;
    let mut candidates = [1.0, 2.0, 5.0].into_iter().cycle().zip(0..);
    while step / per_cell < min_cells as f64 {
        let (mult, i) = candidates.next().unwrap();
        step = mult * 10f64.powi(i / 3);
    }
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn index_of(value: f64, lo: f64, hi: f64, cells: usize) -> usize {
    let i = ((value - lo) / (hi - lo) * cells as f64).floor();
    (i.max(0.0) as usize).min(cells - 1)
}

fn tick_label(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.1}")
}

/// Frame and axis decoration shared by maps and strips. `rows` are the
/// interior lines; `row_ticks` marks rows with a '+' and label.
fn framed(
    rows: &[Vec<char>],
    row_ticks: &[(usize, String)],
    col_ticks: &[(usize, String)],
) -> Vec<String> {
    let width = rows.first().map_or(0, Vec::len);
    let margin = row_ticks.iter().map(|(_, l)| l.len()).max().unwrap_or(0) + 1;
    let mut border = vec!['-'; width];
    for (c, _) in col_ticks {
        border[*c] = '+';
    }
    let border: String = border.into_iter().collect();
    let mut lines = Vec::with_capacity(rows.len() + 3);
    lines.push(format!("{:margin$}+{border}+", ""));
    for (r, row) in rows.iter().enumerate() {
        let interior: String = row.iter().collect();
        match row_ticks.iter().find(|(tr, _)| *tr == r) {
            Some((_, label)) => lines.push(format!("{label:>w$} +{interior}+", w = margin - 1)),
            None => lines.push(format!("{:margin$}|{interior}|", "")),
        }
    }
    lines.push(format!("{:margin$}+{border}+", ""));

    let mut axis = vec![' '; margin + width + 2];
    let mut free_from = 0;
    for (c, label) in col_ticks {
        let center = margin + 1 + c;
        let start = center.saturating_sub(label.len() / 2);
        if start < free_from || start + label.len() > axis.len() {
            continue;
        }
        for (i, ch) in label.chars().enumerate() {
            axis[start + i] = ch;
        }
        free_from = start + label.len() + 1;
    }
    lines.push(axis.into_iter().collect::<String>().trim_end().to_string());
    lines
}

/// Renders a map as framed text with tick marks at integer score values.
pub fn to_text(map: &TerritorialMap) -> String {
    let rows: Vec<Vec<char>> = (0..map.height)
        .map(|r| {
            (0..map.width)
                .map(|c| {
                    let cell = map.cell(r, c);
                    if cell.centroid {
                        '*'
                    } else if cell.boundary {
                        map.symbols[cell.class]
                    } else {
                        ' '
                    }
                })
                .collect()
        })
        .collect();
    let b = map.bounds;
    let col_ticks: Vec<(usize, String)> = ticks(b.f1_min, b.f1_max, map.width, 8)
        .into_iter()
        .map(|v| (index_of(v, b.f1_min, b.f1_max, map.width), tick_label(v)))
        .collect();
    let row_ticks: Vec<(usize, String)> = ticks(b.f2_min, b.f2_max, map.height, 3)
        .into_iter()
        .map(|v| {
            let from_bottom = index_of(v, b.f2_min, b.f2_max, map.height);
            (map.height - 1 - from_bottom, tick_label(v))
        })
        .collect();
    let mut out = framed(&rows, &row_ticks, &col_ticks).join("\n");
    out.push('\n');
    out
}

/// Legend lines `symbol  label`, one per class.
pub fn legend(labels: &[String], taxonomy: &CategoryTaxonomy) -> String {
    let symbols = symbols_for(labels, taxonomy);
    let mut out = String::new();
    for (label, symbol) in labels.iter().zip(symbols) {
        out.push_str(&format!("{symbol}  {}\n", taxonomy.display_name(label)));
    }
    out.push_str("*  group centroid\n");
    out
}

/// Maximum number of histogram rows in a strip plot.
pub const STRIP_HEIGHT: usize = 10;

/// One-function display. With data, a histogram of function-1 scores whose
/// columns carry the majority class symbol of their bin; without data, a
/// single row of class regions. Both end with a centroid marker line.
pub fn render_strip(
    model: &DiscriminantModel,
    taxonomy: &CategoryTaxonomy,
    width: usize,
    histogram: Option<&LabeledDataset>,
) -> Result<String> {
    if model.n_functions() < 1 {
        return Err(Error::Dimension("model has no discriminant functions".into()));
    }
    if width < MIN_WIDTH {
        return Err(Error::Input(format!("strip must be at least {MIN_WIDTH} columns")));
    }
    let symbols = symbols_for(&model.class_labels, taxonomy);
    let centroids: Vec<f64> = (0..model.n_classes())
        .map(|k| model.class_centroids[(k, 0)])
        .collect();

    let mut scored: Vec<(f64, usize)> = Vec::new();
    if let Some(data) = histogram {
        for (i, label) in data.labels().iter().enumerate() {
            let class = model
                .class_index(label)
                .ok_or_else(|| Error::UnknownLabel(label.clone()))?;
            scored.push((model.project(data.row(i), 1)?[0], class));
        }
    }

    let (lo, hi) = if scored.is_empty() {
        padded_range(centroids.iter().copied())
    } else {
        let values = scored.iter().map(|s| s.0).chain(centroids.iter().copied());
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        let pad = ((hi - lo) * 0.02).max(1e-9);
        (lo - pad, hi + pad)
    };

    let (rows, row_ticks) = if scored.is_empty() {
        let dx = (hi - lo) / width as f64;
        let row = (0..width)
            .map(|c| symbols[model.decide(&[lo + (c as f64 + 0.5) * dx])])
            .collect();
        (vec![row], Vec::new())
    } else {
        let n_classes = model.n_classes();
        let mut bins = vec![vec![0u64; n_classes]; width];
        for &(score, class) in &scored {
            bins[index_of(score, lo, hi, width)][class] += 1;
        }
        let totals: Vec<u64> = bins.iter().map(|b| b.iter().sum()).collect();
        let max = totals.iter().copied().max().unwrap_or(0);
        let unit = max.div_ceil(STRIP_HEIGHT as u64).max(1);
        let height = max.div_ceil(unit) as usize;
        let majority: Vec<char> = bins
            .iter()
            .map(|b| {
                let best = (0..n_classes).fold(0, |best, k| if b[k] > b[best] { k } else { best });
                symbols[best]
            })
            .collect();
        let rows: Vec<Vec<char>> = (0..height)
            .map(|r| {
                let level = (height - r - 1) as u64 * unit;
                (0..width)
                    .map(|c| if totals[c] > level { majority[c] } else { ' ' })
                    .collect()
            })
            .collect();
        let step_rows = if height > 6 { 4 } else { height.max(1) };
        let row_ticks = (1..=height)
            .filter(|h| h % step_rows == 0)
            .map(|h| (height - h, (h as u64 * unit).to_string()))
            .collect();
        (rows, row_ticks)
    };

    let col_ticks: Vec<(usize, String)> = ticks(lo, hi, width, 8)
        .into_iter()
        .map(|v| (index_of(v, lo, hi, width), tick_label(v)))
        .collect();
    let mut lines = framed(&rows, &row_ticks, &col_ticks);

    let margin = lines[0].find('+').unwrap_or(0);
    let mut marks = vec![' '; margin + width + 2];
    let caption = "Centroids:";
    for (i, ch) in caption.chars().enumerate() {
        if i < marks.len() {
            marks[i] = ch;
        }
    }
    for &c in &centroids {
        if c >= lo && c < hi {
            marks[margin + 1 + index_of(c, lo, hi, width)] = '*';
        }
    }
    lines.push(marks.into_iter().collect::<String>().trim_end().to_string());
    let mut out = lines.join("\n");
    out.push('\n');
    Ok(out)
}
