#![allow(dead_code)]

use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use genre_core::discriminant::{DiscriminantModel, LabeledDataset};
use genre_core::linalg::Matrix;
use genre_core::taxonomy::CategoryTaxonomy;

pub const LEVEL3: [&str; 15] = [
    "A", "B", "C", "D", "E", "F", "G", "H", "J", "K", "L", "M", "N", "P", "R",
];

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Standard normal deviate (Box-Muller).
pub fn normal(rng: &mut StdRng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Gaussian classes around random means, with a random non-diagonal within
/// covariance so features are correlated. Every class has at least two
/// members and `n - N > p` so the within scatter is nonsingular.
pub fn random_dataset(
    rng: &mut StdRng,
    n_max: usize,
    p_max: usize,
    classes_max: usize,
) -> LabeledDataset {
    let n_classes = rng.random_range(2..=classes_max);
    let p = rng.random_range(1..=p_max);
    let n_min = (2 * n_classes).max(p + n_classes + 2);
    let n = rng.random_range(n_min..=n_max.max(n_min));
    let separation = rng.random_range(0.5..4.0);
    let means: Vec<Vec<f64>> = (0..n_classes)
        .map(|_| (0..p).map(|_| separation * normal(rng)).collect())
        .collect();
    let mixing: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..p).map(|_| normal(rng)).collect())
        .collect();
    let offsets: Vec<f64> = (0..p).map(|_| rng.random_range(-50.0..50.0)).collect();
    let scales: Vec<f64> = (0..p).map(|_| 10f64.powf(rng.random_range(-1.0..2.0))).collect();

    let mut labels: Vec<usize> = (0..n).map(|i| i % n_classes).collect();
    for i in (1..n).rev() {
        labels.swap(i, rng.random_range(0..=i));
    }
    let mut rows = Vec::with_capacity(n);
    for &k in &labels {
        let e: Vec<f64> = (0..p).map(|_| normal(rng)).collect();
        let row: Vec<f64> = (0..p)
            .map(|j| {
                let noise: f64 = (0..p).map(|l| 0.5 * mixing[j][l] * e[l]).sum::<f64>() + e[j];
                offsets[j] + scales[j] * (means[k][j] + noise)
            })
            .collect();
        rows.push(row);
    }
    let label_codes = labels.iter().map(|&k| LEVEL3[k].to_string()).collect();
    LabeledDataset::new(
        Matrix::from_rows(&rows).unwrap(),
        label_codes,
        CategoryTaxonomy::brown(),
    )
    .unwrap()
}

/// Hand-built two-class model over two functions with symmetric centroids
/// and equal priors.
pub fn toy_map_model() -> DiscriminantModel {
    DiscriminantModel {
        class_labels: vec!["A".into(), "B".into()],
        priors: vec![0.5, 0.5],
        feature_names: vec!["x0".into(), "x1".into()],
        feature_means: vec![0.0, 0.0],
        feature_scales: vec![1.0, 1.0],
        eigenvalues: vec![2.0, 0.5],
        directions: Matrix::identity(2),
        class_centroids: Matrix::from_rows(&[[-1.5, -0.75], [1.5, 0.75]]).unwrap(),
    }
}

/// Root of a tagged Brown corpus in NLTK layout (`cats.txt` plus files
/// named `c<category><nn>`), if one is available.
pub fn brown_dir() -> Option<PathBuf> {
    let candidates = [
        std::env::var_os("BROWN_CORPUS_DIR").map(PathBuf::from),
        Some(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/brown")),
    ];
    candidates
        .into_iter()
        .flatten()
        .find(|d| d.join("cats.txt").is_file())
}

/// Manifest text for an NLTK-layout Brown directory; the category code is
/// the second letter of the file name.
pub fn brown_manifest(dir: &std::path::Path) -> String {
    let cats = std::fs::read_to_string(dir.join("cats.txt")).unwrap();
    let mut out = String::new();
    for line in cats.lines() {
        let Some(file) = line.split_whitespace().next() else {
            continue;
        };
        let code = file[1..2].to_uppercase();
        out.push_str(&format!("{file}\t{file}\t{code}\n"));
    }
    out
}
