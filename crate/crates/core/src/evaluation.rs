//! Per-category error accounting, category collapsing and report tables.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::discriminant::{DiscriminantModel, LabeledDataset};
use crate::error::{Error, Result};
use crate::taxonomy::{CategoryTaxonomy, FICTION_CODES};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    /// Row labels as printed in table reports.
    pub names: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>, names: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let n = labels.len();
        if names.len() != n || counts.len() != n || counts.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension(format!(
                "confusion matrix needs {n} names and {n}x{n} counts"
            )));
        }
        Ok(Self {
            labels,
            names,
            counts,
        })
    }

    pub fn zeros(labels: Vec<String>, taxonomy: &CategoryTaxonomy) -> Self {
        let n = labels.len();
        let names = labels.iter().map(|l| taxonomy.display_name(l)).collect();
        Self {
            labels,
            names,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn items(&self, row: usize) -> u64 {
        self.counts[row].iter().sum()
    }

    pub fn correct(&self, row: usize) -> u64 {
        self.counts[row][row]
    }

    pub fn errors(&self, row: usize) -> u64 {
        self.items(row) - self.correct(row)
    }

    pub fn total_items(&self) -> u64 {
        (0..self.len()).map(|r| self.items(r)).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.len()).map(|r| self.correct(r)).sum()
    }

    pub fn total_errors(&self) -> u64 {
        self.total_items() - self.trace()
    }

    pub fn error_rate(&self) -> f64 {
        match self.total_items() {
            0 => 0.0,
            n => self.total_errors() as f64 / n as f64,
        }
    }

    pub fn row_error_rate(&self, row: usize) -> f64 {
        match self.items(row) {
            0 => 0.0,
            n => self.errors(row) as f64 / n as f64,
        }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Codes this row was mistaken for, by descending count; ties keep
    /// label order.
    pub fn most_confused_with(&self, row: usize) -> Vec<&str> {
        let mut off: Vec<(usize, u64)> = self.counts[row]
            .iter()
            .enumerate()
            .filter(|&(c, &n)| c != row && n > 0)
            .map(|(c, &n)| (c, n))
            .collect();
        off.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        off.into_iter().map(|(c, _)| self.labels[c].as_str()).collect()
    }
}

/// Integer percentage of `part / whole`, rounding halves up.
pub fn percent_half_up(part: u64, whole: u64) -> u64 {
    if whole == 0 {
        return 0;
    }
    (200 * part + whole) / (2 * whole)
}

/// Classifies every row of `data` with `model` and tallies the results.
pub fn evaluate(model: &DiscriminantModel, data: &LabeledDataset) -> Result<ConfusionMatrix> {
    let mut conf = ConfusionMatrix::zeros(model.class_labels.clone(), data.taxonomy());
    for (i, label) in data.labels().iter().enumerate() {
        let truth = model
            .class_index(label)
            .ok_or_else(|| Error::UnknownLabel(label.clone()))?;
        let predicted = model.classify(data.row(i))?.class_index;
        conf.counts[truth][predicted] += 1;
    }
    Ok(conf)
}

/// Function from source labels to merged labels. Target order is the order
/// in which targets first appear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeMap {
    entries: Vec<(String, String)>,
    names: HashMap<String, String>,
}

impl MergeMap {
    pub fn new<I, S, T>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (s, t) in pairs {
            let (s, t) = (s.into(), t.into());
            if let Some((_, prev)) = entries.iter().find(|(src, _)| *src == s) {
                if *prev != t {
                    return Err(Error::Input(format!(
                        "merge map sends {s:?} to both {prev:?} and {t:?}"
                    )));
                }
                continue;
            }
            entries.push((s, t));
        }
        Ok(Self {
            entries,
            names: HashMap::new(),
        })
    }

    pub fn identity<S: AsRef<str>>(labels: &[S]) -> Self {
        Self::new(labels.iter().map(|l| (l.as_ref(), l.as_ref()))).unwrap()
    }

    /// Maps each of `labels` to its ancestor at `level`.
    pub fn to_level<S: AsRef<str>>(
        labels: &[S],
        taxonomy: &CategoryTaxonomy,
        level: u8,
    ) -> Result<Self> {
        let mut pairs = Vec::new();
        for label in labels {
            let label = label.as_ref();
            let target = taxonomy
                .ancestor(label, level)
                .ok_or_else(|| Error::Mapping(label.to_string()))?;
            pairs.push((label.to_string(), target.to_string()));
        }
        // targets in taxonomy order
        pairs.sort_by_key(|(_, t)| taxonomy.position(t));
        Self::new(pairs)
    }

    /// Merges the six fiction codes into the level-2 fiction group `3`,
    /// leaving every other label unchanged.
    pub fn fiction<S: AsRef<str>>(labels: &[S]) -> Self {
        let pairs = labels.iter().map(|l| {
            let l = l.as_ref();
            let target = if FICTION_CODES.contains(&l) { "3" } else { l };
            (l.to_string(), target.to_string())
        });
        Self::new(pairs).unwrap()
    }

    /// Parses a two-column TSV file (`source`, `target`), with an optional
    /// third column giving the display name of the target.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut names = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            match cols[..] {
                [s, t] if !s.is_empty() && !t.is_empty() => pairs.push((s, t)),
                [s, t, name] if !s.is_empty() && !t.is_empty() => {
                    pairs.push((s, t));
                    names.insert(t.to_string(), name.to_string());
                }
                _ => {
                    return Err(Error::parse(
                        line_no,
                        "expected `source<TAB>target[<TAB>name]`",
                    ))
                }
            }
        }
        let mut map = Self::new(pairs)?;
        map.names = names;
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, source: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(s, _)| s == source)
            .map(|(_, t)| t.as_str())
    }

    /// Distinct targets of the given sources, in entry order.
    fn targets_for(&self, sources: &[String]) -> Result<Vec<String>> {
        let mut out: Vec<String> = Vec::new();
        for s in sources {
            let t = self.get(s).ok_or_else(|| Error::Mapping(s.clone()))?;
            if !out.iter().any(|o| o == t) {
                out.push(t.to_string());
            }
        }
        // keep the map's own order for targets
        out.sort_by_key(|t| self.entries.iter().position(|(_, tt)| tt == t));
        Ok(out)
    }

    fn name_for(&self, target: &str, taxonomy: &CategoryTaxonomy) -> String {
        self.names
            .get(target)
            .cloned()
            .unwrap_or_else(|| taxonomy.display_name(target))
    }

    /// Relabels a dataset; its classes follow the map's target order.
    pub fn apply_to_dataset(&self, data: &LabeledDataset) -> Result<LabeledDataset> {
        let order = self.targets_for(data.classes())?;
        data.relabel(|l| self.get(l).map(str::to_string))?
            .with_class_order(&order)
    }
}

/// Sums rows and columns of `conf` according to `map`. Totals are
/// preserved; errors can only decrease.
pub fn collapse(
    conf: &ConfusionMatrix,
    map: &MergeMap,
    taxonomy: &CategoryTaxonomy,
) -> Result<ConfusionMatrix> {
    let targets = map.targets_for(&conf.labels)?;
    let index: Vec<usize> = conf
        .labels
        .iter()
        .map(|l| {
            let t = map.get(l).unwrap();
            targets.iter().position(|x| x == t).unwrap()
        })
        .collect();
    let n = targets.len();
    let mut counts = vec![vec![0u64; n]; n];
    for (r, row) in conf.counts.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            counts[index[r]][index[c]] += v;
        }
    }
    let names = targets.iter().map(|t| map.name_for(t, taxonomy)).collect();
    ConfusionMatrix::new(targets, names, counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Tsv,
}

pub const REPORT_TSV_HEADER: &str = "category\titems\terrors\terror_pct\tmiss";

/// Renders per-category items, errors, error percentage and the codes
/// each category was most often mistaken for, plus a total row.
pub fn report(conf: &ConfusionMatrix, format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Tsv => {
            out.push_str(REPORT_TSV_HEADER);
            out.push('\n');
            for r in 0..conf.len() {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    conf.labels[r],
                    conf.items(r),
                    conf.errors(r),
                    percent_half_up(conf.errors(r), conf.items(r)),
                    conf.most_confused_with(r).join(",")
                );
            }
            let _ = writeln!(
                out,
                "Total\t{}\t{}\t{}\t",
                conf.total_items(),
                conf.total_errors(),
                percent_half_up(conf.total_errors(), conf.total_items())
            );
        }
        ReportFormat::Table => {
            let rows: Vec<[String; 4]> = (0..conf.len())
                .map(|r| {
                    [
                        conf.names[r].clone(),
                        conf.items(r).to_string(),
                        format!(
                            "{} ({} %)",
                            conf.errors(r),
                            percent_half_up(conf.errors(r), conf.items(r))
                        ),
                        conf.most_confused_with(r).join(","),
                    ]
                })
                .chain(std::iter::once([
                    "Total".to_string(),
                    conf.total_items().to_string(),
                    format!(
                        "{} ({} %)",
                        conf.total_errors(),
                        percent_half_up(conf.total_errors(), conf.total_items())
                    ),
                    String::new(),
                ]))
                .collect();
            let header = ["Category", "Items", "Errors", "Miss"];
            let mut widths = header.map(str::len);
            for row in &rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let line = |cells: [&str; 4]| {
                format!(
                    "{:<w0$}  {:>w1$}  {:>w2$}  {}",
                    cells[0],
                    cells[1],
                    cells[2],
                    cells[3],
                    w0 = widths[0],
                    w1 = widths[1],
                    w2 = widths[2]
                )
                .trim_end()
                .to_string()
            };
            out.push_str(&line(header));
            out.push('\n');
            for (i, row) in rows.iter().enumerate() {
                if i + 1 == rows.len() {
                    let rule_len = widths.iter().sum::<usize>() + 6;
                    out.push_str(&"-".repeat(rule_len));
                    out.push('\n');
                }
                out.push_str(&line([&row[0], &row[1], &row[2], &row[3]]));
                out.push('\n');
            }
        }
    }
    out
}

/// One parsed row of a TSV report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow {
    pub category: String,
    pub items: u64,
    pub errors: u64,
    pub error_pct: u64,
    pub miss: Vec<String>,
}

/// Parses the TSV report format, including the trailing `Total` row.
pub fn parse_report_tsv(text: &str) -> Result<Vec<ReportRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == REPORT_TSV_HEADER => {}
        _ => return Err(Error::parse(1, "missing report header")),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(Error::parse(line_no, "expected 5 columns"));
        }
        let num = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| Error::parse(line_no, format!("bad number {s:?}")))
        };
        rows.push(ReportRow {
            category: cols[0].to_string(),
            items: num(cols[1])?,
            errors: num(cols[2])?,
            error_pct: num(cols[3])?,
            miss: cols[4]
                .split(',')
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect(),
        });
    }
    Ok(rows)
}
