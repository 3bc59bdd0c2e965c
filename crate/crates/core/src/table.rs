//! Feature tables: extraction over a manifest and the TSV exchange format.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::corpus::{parse_tagged_file, Manifest, TagMap};
use crate::discriminant::LabeledDataset;
use crate::error::{Error, Result};
use crate::features::{extract_features, per_thousand_words, FEATURE_NAMES, N_FEATURES};
use crate::linalg::Matrix;
use crate::taxonomy::CategoryTaxonomy;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub doc_id: String,
    pub values: Vec<f64>,
    pub category: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub feature_names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

#[derive(Debug)]
pub struct ExtractFailure {
    pub doc_id: String,
    pub error: Error,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExtractOptions {
    /// Scale count features to occurrences per 1000 words.
    pub per_thousand_words: bool,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl FeatureTable {
    pub fn new(feature_names: Vec<String>) -> Self {
        Self {
            feature_names,
            rows: Vec::new(),
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("doc_id");
        for name in &self.feature_names {
            out.push('\t');
            out.push_str(name);
        }
        out.push_str("\tcategory\n");
        for row in &self.rows {
            out.push_str(&row.doc_id);
            for v in &row.values {
                // shortest representation that round-trips
                let _ = write!(out, "\t{v}");
            }
            out.push('\t');
            out.push_str(row.category.as_deref().unwrap_or(""));
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header = match lines.next() {
            Some((_, h)) => h,
            None => return Err(Error::parse(1, "missing header")),
        };
        let cols: Vec<&str> = header.split('\t').collect();
        if cols.len() < 3 || cols[0] != "doc_id" || cols[cols.len() - 1] != "category" {
            return Err(Error::parse(
                1,
                "header must be `doc_id<TAB>features...<TAB>category`",
            ));
        }
        let feature_names: Vec<String> =
            cols[1..cols.len() - 1].iter().map(|s| s.to_string()).collect();
        let p = feature_names.len();
        let mut table = Self::new(feature_names);
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split('\t').collect();
            if cells.len() != p + 2 {
                return Err(Error::parse(
                    line_no,
                    format!("expected {} columns, found {}", p + 2, cells.len()),
                ));
            }
            let values = cells[1..=p]
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::parse(line_no, format!("bad value {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let category = cells[p + 1].trim();
            table.rows.push(FeatureRow {
                doc_id: cells[0].to_string(),
                values,
                category: (!category.is_empty()).then(|| category.to_string()),
            });
        }
        Ok(table)
    }

    /// Labeled dataset from the rows that carry a category.
    pub fn to_dataset(&self, taxonomy: &CategoryTaxonomy) -> Result<LabeledDataset> {
        let labeled: Vec<&FeatureRow> = self.rows.iter().filter(|r| r.category.is_some()).collect();
        let rows: Vec<&[f64]> = labeled.iter().map(|r| r.values.as_slice()).collect();
        let matrix = if rows.is_empty() {
            Matrix::zeros(0, self.feature_names.len())
        } else {
            Matrix::from_rows(&rows)?
        };
        let labels = labeled.iter().map(|r| r.category.clone().unwrap()).collect();
        LabeledDataset::new(matrix, labels, taxonomy.clone())?
            .with_feature_names(self.feature_names.clone())
    }
}

/// Reads, parses and extracts features for every manifest entry, in
/// manifest order. Failures are returned alongside the successful rows.
pub fn extract_manifest(
    manifest: &Manifest,
    tagmap: &TagMap,
    options: ExtractOptions,
) -> (FeatureTable, Vec<ExtractFailure>) {
    let work = || -> Vec<Result<FeatureRow>> {
        manifest
            .entries
            .par_iter()
            .map(|entry| {
                let bytes =
                    std::fs::read(&entry.path).map_err(|e| Error::io(&entry.path, e))?;
                let doc = parse_tagged_file(&bytes, tagmap)?;
                let fv = extract_features(&doc, tagmap)?;
                let mut values = fv.to_row().to_vec();
                if options.per_thousand_words {
                    per_thousand_words(&mut values, fv.word_count);
                }
                Ok(FeatureRow {
                    doc_id: entry.doc_id.clone(),
                    values,
                    category: Some(entry.category.clone()),
                })
            })
            .collect()
    };
    let results = match options.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        },
        None => work(),
    };

    let mut table = FeatureTable::new(FEATURE_NAMES.iter().map(|s| s.to_string()).collect());
    let mut failures = Vec::new();
    for (entry, result) in manifest.entries.iter().zip(results) {
        match result {
            Ok(row) => table.rows.push(row),
            Err(error) => failures.push(ExtractFailure {
                doc_id: entry.doc_id.clone(),
                error,
            }),
        }
    }
    debug_assert!(table.rows.iter().all(|r| r.values.len() == N_FEATURES));
    (table, failures)
}
