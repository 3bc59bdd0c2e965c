//! Multiclass linear discriminant analysis.
//!
//! Features are standardized by the grand mean and the pooled within-class
//! standard deviation, then the discriminant directions are the leading
//! eigenvectors of the pencil (between-class scatter, within-class scatter).
//! Directions are scaled so that discriminant scores have unit pooled
//! within-class variance. Classification picks the nearest class centroid in
//! discriminant space after a `-2 ln(prior)` offset.

use crate::error::{Error, Result};
use crate::features::FEATURE_NAMES;
use crate::linalg::{self, Matrix};
use crate::taxonomy::CategoryTaxonomy;

pub use crate::model_file::{load_model, read_model_header, save_model, ModelHeader, MODEL_VERSION};

/// Default relative ridge added to a singular within-class scatter.
pub const DEFAULT_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct LabeledDataset {
    rows: Matrix,
    labels: Vec<String>,
    classes: Vec<String>,
    feature_names: Vec<String>,
    taxonomy: CategoryTaxonomy,
}

impl LabeledDataset {
    /// Builds a dataset. Labels unknown to `taxonomy` are appended to it as
    /// top-level codes; classes are kept in taxonomy order.
    pub fn new(rows: Matrix, labels: Vec<String>, mut taxonomy: CategoryTaxonomy) -> Result<Self> {
        if rows.nrows() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} rows but {} labels",
                rows.nrows(),
                labels.len()
            )));
        }
        if rows.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("feature matrix contains non-finite values".into()));
        }
        for label in &labels {
            taxonomy.ensure(label);
        }
        let mut classes: Vec<String> = labels.clone();
        taxonomy.sort_codes(&mut classes);
        classes.dedup();
        let feature_names = default_feature_names(rows.ncols());
        Ok(Self {
            rows,
            labels,
            classes,
            feature_names,
            taxonomy,
        })
    }

    /// Same as [`new`](Self::new) but with an explicit class order.
    pub fn with_class_order(mut self, order: &[String]) -> Result<Self> {
        let mut classes: Vec<String> = order
            .iter()
            .filter(|c| self.labels.contains(c))
            .cloned()
            .collect();
        classes.dedup();
        if let Some(missing) = self.classes.iter().find(|c| !classes.contains(c)) {
            return Err(Error::Mapping(missing.clone()));
        }
        self.classes = classes;
        Ok(self)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.rows.ncols() {
            return Err(Error::Dimension(format!(
                "{} feature names for {} columns",
                names.len(),
                self.rows.ncols()
            )));
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.rows.row(i)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn taxonomy(&self) -> &CategoryTaxonomy {
        &self.taxonomy
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.rows.ncols()
    }

    /// Index into [`classes`](Self::classes) for every row.
    pub fn class_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .map(|l| self.classes.iter().position(|c| c == l).unwrap())
            .collect()
    }

    /// Replaces every label by `map(label)`, keeping rows.
    pub fn relabel<F>(&self, mut map: F) -> Result<Self>
    where
        F: FnMut(&str) -> Option<String>,
    {
        let labels = self
            .labels
            .iter()
            .map(|l| map(l).ok_or_else(|| Error::Mapping(l.clone())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.rows.clone(), labels, self.taxonomy.clone())?
            .with_feature_names(self.feature_names.clone())
    }

    /// Keeps the rows selected by `keep`.
    pub fn filter<F: FnMut(usize, &str) -> bool>(&self, mut keep: F) -> Result<Self> {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i, &self.labels[i])).collect();
        let rows: Vec<&[f64]> = idx.iter().map(|&i| self.row(i)).collect();
        let rows = if rows.is_empty() {
            Matrix::zeros(0, self.n_features())
        } else {
            Matrix::from_rows(&rows)?
        };
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        Self::new(rows, labels, self.taxonomy.clone())?
            .with_feature_names(self.feature_names.clone())
    }
}

fn default_feature_names(p: usize) -> Vec<String> {
    if p == FEATURE_NAMES.len() {
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        (0..p).map(|j| format!("x{j}")).collect()
    }
}

/// Scatter matrices of a labeled dataset.
#[derive(Debug, Clone)]
pub struct Scatter {
    /// Σ_k Σ_{x∈k} (x − m_k)(x − m_k)ᵀ
    pub within: Matrix,
    /// Σ_k n_k (m_k − m)(m_k − m)ᵀ
    pub between: Matrix,
    /// `N × p`, rows in class order.
    pub class_means: Matrix,
    pub grand_mean: Vec<f64>,
    pub class_counts: Vec<usize>,
}

impl Scatter {
    pub fn total(&self) -> Matrix {
        self.within.add(&self.between)
    }
}

pub fn scatter_matrices(data: &LabeledDataset) -> Result<Scatter> {
    let p = data.n_features();
    let n_classes = data.classes().len();
    let idx = data.class_indices();

    let mut counts = vec![0usize; n_classes];
    let mut means = Matrix::zeros(n_classes, p);
    let mut grand = vec![0.0; p];
    for (i, &k) in idx.iter().enumerate() {
        counts[k] += 1;
        for (j, v) in data.row(i).iter().enumerate() {
            means[(k, j)] += v;
            grand[j] += v;
        }
    }
    for (k, &count) in counts.iter().enumerate() {
        if count < 2 {
            return Err(Error::InsufficientClass {
                code: data.classes()[k].clone(),
                count,
            });
        }
        means.row_mut(k).iter_mut().for_each(|v| *v /= count as f64);
    }
    let n = data.len() as f64;
    grand.iter_mut().for_each(|v| *v /= n);

    let mut within = Matrix::zeros(p, p);
    let mut dev = vec![0.0; p];
    for (i, &k) in idx.iter().enumerate() {
        for j in 0..p {
            dev[j] = data.row(i)[j] - means[(k, j)];
        }
        within.add_outer(&dev, 1.0);
    }
    let mut between = Matrix::zeros(p, p);
    for k in 0..n_classes {
        for j in 0..p {
            dev[j] = means[(k, j)] - grand[j];
        }
        between.add_outer(&dev, counts[k] as f64);
    }
    Ok(Scatter {
        within,
        between,
        class_means: means,
        grand_mean: grand,
        class_counts: counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriorMode {
    /// Class proportions in the training data.
    #[default]
    Proportional,
    Equal,
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Defaults to `min(p, N − 1)`.
    pub n_functions: Option<usize>,
    pub priors: PriorMode,
    pub ridge: f64,
    /// Drop zero-variance columns instead of failing.
    pub drop_constant: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            n_functions: None,
            priors: PriorMode::Proportional,
            ridge: DEFAULT_RIDGE,
            drop_constant: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminantModel {
    pub class_labels: Vec<String>,
    pub priors: Vec<f64>,
    pub feature_names: Vec<String>,
    pub feature_means: Vec<f64>,
    /// Pooled within-class standard deviations; 1 for dropped columns.
    pub feature_scales: Vec<f64>,
    /// Between/within sum-of-squares ratio for each function, nonincreasing.
    pub eigenvalues: Vec<f64>,
    /// `p × m`, one discriminant function per column.
    pub directions: Matrix,
    /// `N × m`, class means in discriminant space.
    pub class_centroids: Matrix,
}

/// Result of [`DiscriminantModel::classify`].
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class_index: usize,
    pub label: String,
    /// `‖z − c_k‖² − 2 ln prior_k` per class; smallest wins.
    pub scores: Vec<f64>,
}

pub fn fit(data: &LabeledDataset, options: &FitOptions) -> Result<DiscriminantModel> {
    let n_classes = data.classes().len();
    if n_classes < 2 {
        return Err(Error::TooFewClasses(n_classes));
    }
    let p = data.n_features();
    let raw = scatter_matrices(data)?;
    let df = (data.len() - n_classes) as f64;

    let scales: Vec<f64> = (0..p).map(|j| (raw.within[(j, j)] / df).sqrt()).collect();
    let constant: Vec<usize> = (0..p)
        .filter(|&j| scales[j].is_nan() || scales[j] <= 1e-12 * raw.grand_mean[j].abs().max(1e-300))
        .collect();
    if !constant.is_empty() && !options.drop_constant {
        return Err(Error::ZeroVariance(
            constant.iter().map(|&j| data.feature_names()[j].clone()).collect(),
        ));
    }
    let active: Vec<usize> = (0..p).filter(|j| !constant.contains(j)).collect();
    if active.is_empty() {
        return Err(Error::ZeroVariance(data.feature_names().to_vec()));
    }

    let max_functions = active.len().min(n_classes - 1);
    let m = match options.n_functions {
        Some(m) if m == 0 || m > max_functions => {
            return Err(Error::Dimension(format!(
                "requested {m} discriminant functions; between 1 and {max_functions} are available"
            )))
        }
        Some(m) => m,
        None => max_functions,
    };

    // standardized copy restricted to the active columns
    let mut z = Matrix::zeros(data.len(), active.len());
    for i in 0..data.len() {
        for (a, &j) in active.iter().enumerate() {
            z[(i, a)] = (data.row(i)[j] - raw.grand_mean[j]) / scales[j];
        }
    }
    let standardized = LabeledDataset::new(z, data.labels().to_vec(), data.taxonomy().clone())?
        .with_class_order(data.classes())?;
    let sc = scatter_matrices(&standardized)?;

    let eig = linalg::generalized_eigen(&sc.between, &sc.within, m, options.ridge).map_err(|e| {
        match e {
            Error::SingularScatter(cols) => Error::SingularScatter(
                cols.iter()
                    .filter_map(|c| c.strip_prefix("column ")?.parse::<usize>().ok())
                    .map(|a| data.feature_names()[active[a]].clone())
                    .collect(),
            ),
            other => other,
        }
    })?;

    // unit pooled within-class variance: dᵀ (Sw / df) d = 1
    let mut directions = Matrix::zeros(p, m);
    for (a, &j) in active.iter().enumerate() {
        for f in 0..m {
            directions[(j, f)] = eig.vectors[(a, f)] * df.sqrt();
        }
    }
    let feature_scales: Vec<f64> = (0..p)
        .map(|j| if constant.contains(&j) { 1.0 } else { scales[j] })
        .collect();

    let priors = match options.priors {
        PriorMode::Proportional => sc
            .class_counts
            .iter()
            .map(|&c| c as f64 / data.len() as f64)
            .collect(),
        PriorMode::Equal => vec![1.0 / n_classes as f64; n_classes],
    };

    let mut model = DiscriminantModel {
        class_labels: data.classes().to_vec(),
        priors,
        feature_names: data.feature_names().to_vec(),
        feature_means: raw.grand_mean.clone(),
        feature_scales,
        eigenvalues: eig.values.iter().map(|&v| v.max(0.0)).collect(),
        directions,
        class_centroids: Matrix::zeros(n_classes, m),
    };
    for k in 0..n_classes {
        let centroid = model.project_unchecked(raw.class_means.row(k), m);
        model.class_centroids.row_mut(k).copy_from_slice(&centroid);
    }
    Ok(model)
}

impl DiscriminantModel {
    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_means.len()
    }

    pub fn n_functions(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.class_labels.iter().position(|c| c == label)
    }

    /// Standardized feature vector.
    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.feature_means.iter().zip(&self.feature_scales))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    /// First `k` discriminant scores of `x`.
    pub fn project(&self, x: &[f64], k: usize) -> Result<Vec<f64>> {
        if x.len() != self.n_features() {
            return Err(Error::Dimension(format!(
                "expected {} features, got {}",
                self.n_features(),
                x.len()
            )));
        }
        if k > self.n_functions() {
            return Err(Error::Dimension(format!(
                "requested {k} scores from a model with {} functions",
                self.n_functions()
            )));
        }
        Ok(self.project_unchecked(x, k))
    }

    fn project_unchecked(&self, x: &[f64], k: usize) -> Vec<f64> {
        let z = self.standardize(x);
        (0..k)
            .map(|f| (0..z.len()).map(|j| self.directions[(j, f)] * z[j]).sum())
            .collect()
    }

    /// Decision scores for a point given by its first `scores.len()`
    /// discriminant coordinates; centroids are truncated to match.
    pub fn decision_scores(&self, scores: &[f64]) -> Vec<f64> {
        let k = scores.len();
        (0..self.n_classes())
            .map(|c| {
                let centroid = &self.class_centroids.row(c)[..k];
                let dist: f64 = scores
                    .iter()
                    .zip(centroid)
                    .map(|(s, m)| (s - m) * (s - m))
                    .sum();
                dist - 2.0 * self.priors[c].ln()
            })
            .collect()
    }

    /// Index of the smallest decision score; ties go to the earlier class.
    pub fn decide(&self, scores: &[f64]) -> usize {
        let decision = self.decision_scores(scores);
        let mut best = 0;
        for (k, v) in decision.iter().enumerate().skip(1) {
            if *v < decision[best] {
                best = k;
            }
        }
        best
    }

    pub fn classify(&self, x: &[f64]) -> Result<Classification> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("feature vector contains non-finite values".into()));
        }
        let z = self.project(x, self.n_functions())?;
        let scores = self.decision_scores(&z);
        let class_index = self.decide(&z);
        Ok(Classification {
            class_index,
            label: self.class_labels[class_index].clone(),
            scores,
        })
    }

    /// Checks dimensions and the numeric invariants of a model.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_classes();
        let p = self.n_features();
        let m = self.n_functions();
        let corrupt = |msg: String| Err(Error::CorruptModel(msg));
        if n == 0 || p == 0 {
            return corrupt("model has no classes or no features".into());
        }
        if self.priors.len() != n
            || self.feature_names.len() != p
            || self.feature_scales.len() != p
        {
            return corrupt("field lengths disagree with class and feature counts".into());
        }
        if (self.directions.nrows(), self.directions.ncols()) != (p, m)
            || (self.class_centroids.nrows(), self.class_centroids.ncols()) != (n, m)
        {
            return corrupt("matrix shapes disagree with the declared dimensions".into());
        }
        if m > p || (n > 1 && m > n - 1) {
            return corrupt(format!("{m} functions exceed min(p, N-1)"));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.priors)
            || !finite(&self.feature_means)
            || !finite(&self.feature_scales)
            || !finite(&self.eigenvalues)
            || !finite(self.directions.as_slice())
            || !finite(self.class_centroids.as_slice())
        {
            return corrupt("non-finite values".into());
        }
        if self.feature_scales.iter().any(|s| *s <= 0.0) {
            return corrupt("feature scales must be positive".into());
        }
        if self.priors.iter().any(|p| *p <= 0.0) || (self.priors.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return corrupt("priors must be positive and sum to 1".into());
        }
        if self.eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return corrupt("eigenvalues are not sorted".into());
        }
        Ok(())
    }
}
