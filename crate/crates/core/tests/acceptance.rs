//! Acceptance suite. Runs with its own harness so every criterion prints a
//! single PASS / FAIL / NOT RUN line; the process fails if any criterion
//! fails. The corpus criteria need a tagged Brown corpus (see `brown_dir`).

mod common;

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use genre_core::corpus::{load_manifest, parse_tagged_file, TagMap};
use genre_core::discriminant::{fit, scatter_matrices, FitOptions, LabeledDataset};
use genre_core::evaluation::{collapse, evaluate, ConfusionMatrix, MergeMap};
use genre_core::features::{extract_features, FeatureVector, NON_COUNT_FEATURES, N_FEATURES};
use genre_core::linalg::{dot, norm, Matrix};
use genre_core::table::{extract_manifest, ExtractOptions};
use genre_core::taxonomy::CategoryTaxonomy;
use genre_core::terrmap::{render_map, to_text, Bounds};

use common::{random_dataset, rng, toy_map_model, LEVEL3};

enum Status {
    Pass(String),
    Fail(String),
    NotRun(String),
}

fn check(ok: bool, detail: String) -> Status {
    if ok {
        Status::Pass(detail)
    } else {
        Status::Fail(detail)
    }
}

fn main() -> ExitCode {
    let corpus = common::brown_dir().map(|dir| BrownRun::new(&dir));
    let criteria: Vec<(&str, Box<dyn Fn() -> Status>)> = vec![
        ("2-category resubstitution error <= 8 %, runtime <= 60 s", Box::new(|| {
            corpus_criterion(&corpus, criterion_1)
        })),
        ("4-category error in [20 %, 35 %], Fiction <= 12 %", Box::new(|| {
            corpus_criterion(&corpus, criterion_2)
        })),
        ("15-category error in [40 %, 58 %], fiction collapse lowers it", Box::new(|| {
            corpus_criterion(&corpus, criterion_3)
        })),
        ("function counts: 1 for 2 categories, 14 for 15", Box::new(|| {
            corpus_criterion(&corpus, criterion_4)
        })),
        ("scatter identity Sw + Sb = St", Box::new(criterion_5)),
        ("generalized eigen residual and Sw-orthonormality", Box::new(criterion_6)),
        ("two-class direction matches Sw^-1 (m1 - m2)", Box::new(criterion_7)),
        ("affine invariance of resubstitution predictions", Box::new(criterion_8)),
        ("feature oracle, additivity, sentence permutation", Box::new(criterion_9)),
        ("territorial map consistency and golden snapshot", Box::new(criterion_10)),
        ("collapse monotonicity", Box::new(criterion_11)),
    ];

    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (tag, detail) = match run() {
            Status::Pass(d) => ("PASS", d),
            Status::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Status::NotRun(d) => ("NOT RUN", d),
        };
        println!("criterion {:>2} {tag:<7} {name}: {detail}", i + 1);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

// ---------------------------------------------------------------------------
// corpus criteria

struct BrownRun {
    data: Result<LabeledDataset, String>,
    extract_time: Duration,
}

impl BrownRun {
    fn new(dir: &Path) -> Self {
        let start = Instant::now();
        let data = (|| {
            let tax = CategoryTaxonomy::brown();
            let manifest = load_manifest(common::brown_manifest(dir).as_bytes(), Some(&tax))
                .map_err(|e| e.to_string())?
                .rebase(dir);
            let (table, failures) =
                extract_manifest(&manifest, &TagMap::brown(), ExtractOptions::default());
            if let Some(f) = failures.first() {
                return Err(format!("{} documents failed, first {}: {}", failures.len(), f.doc_id, f.error));
            }
            table.to_dataset(&tax).map_err(|e| e.to_string())
        })();
        BrownRun {
            data,
            extract_time: start.elapsed(),
        }
    }

    fn at_level(&self, level: u8) -> Result<LabeledDataset, String> {
        let data = self.data.as_ref().map_err(Clone::clone)?;
        MergeMap::to_level(data.classes(), data.taxonomy(), level)
            .and_then(|m| m.apply_to_dataset(data))
            .map_err(|e| e.to_string())
    }

    fn resubstitute(&self, level: u8) -> Result<(usize, ConfusionMatrix), String> {
        let data = self.at_level(level)?;
        let model = fit(&data, &FitOptions::default()).map_err(|e| e.to_string())?;
        let conf = evaluate(&model, &data).map_err(|e| e.to_string())?;
        Ok((model.n_functions(), conf))
    }
}

fn corpus_criterion(
    corpus: &Option<BrownRun>,
    run: fn(&BrownRun) -> Result<Status, String>,
) -> Status {
    match corpus {
        None => Status::NotRun(
            "no tagged Brown corpus found (set BROWN_CORPUS_DIR or populate data/brown)".into(),
        ),
        Some(c) => run(c).unwrap_or_else(Status::Fail),
    }
}

fn pct(conf: &ConfusionMatrix) -> f64 {
    100.0 * conf.error_rate()
}

fn criterion_1(c: &BrownRun) -> Result<Status, String> {
    let start = Instant::now();
    let (_, conf) = c.resubstitute(1)?;
    let elapsed = c.extract_time + start.elapsed();
    Ok(check(
        conf.total_items() == 500 && pct(&conf) <= 8.0 && elapsed.as_secs_f64() <= 60.0,
        format!(
            "{} errors / {} ({:.1} %), {:.2} s including extraction",
            conf.total_errors(),
            conf.total_items(),
            pct(&conf),
            elapsed.as_secs_f64()
        ),
    ))
}

fn criterion_2(c: &BrownRun) -> Result<Status, String> {
    let (_, conf) = c.resubstitute(2)?;
    let fiction = conf.index_of("3").ok_or("no fiction row")?;
    let fiction_pct = 100.0 * conf.row_error_rate(fiction);
    let total = pct(&conf);
    Ok(check(
        (20.0..=35.0).contains(&total) && fiction_pct <= 12.0,
        format!(
            "{} errors ({total:.1} %), Fiction {} / {} ({fiction_pct:.1} %)",
            conf.total_errors(),
            conf.errors(fiction),
            conf.items(fiction)
        ),
    ))
}

fn criterion_3(c: &BrownRun) -> Result<Status, String> {
    let (_, conf) = c.resubstitute(3)?;
    let tax = CategoryTaxonomy::brown();
    let revised = collapse(&conf, &MergeMap::fiction(&conf.labels), &tax).map_err(|e| e.to_string())?;
    let total = pct(&conf);
    Ok(check(
        (40.0..=58.0).contains(&total) && revised.total_errors() < conf.total_errors(),
        format!(
            "{} errors ({total:.1} %), revised after fiction collapse {} ({:.1} %)",
            conf.total_errors(),
            revised.total_errors(),
            pct(&revised)
        ),
    ))
}

fn criterion_4(c: &BrownRun) -> Result<Status, String> {
    let (m2, _) = c.resubstitute(1)?;
    let (m15, _) = c.resubstitute(3)?;
    Ok(check(m2 == 1 && m15 == 14, format!("{m2} and {m15} functions")))
}

// ---------------------------------------------------------------------------
// synthetic criteria

/// Total scatter about the grand mean, computed directly from the rows.
fn total_scatter(data: &LabeledDataset) -> Matrix {
    let p = data.n_features();
    let n = data.len();
    let mut mean = vec![0.0; p];
    for i in 0..n {
        for (m, x) in mean.iter_mut().zip(data.row(i)) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut st = vec![0.0; p * p];
    for i in 0..n {
        let d: Vec<f64> = data.row(i).iter().zip(&mean).map(|(x, m)| x - m).collect();
        for a in 0..p {
            for b in 0..p {
                st[a * p + b] += d[a] * d[b];
            }
        }
    }
    Matrix::from_row_major(p, p, st).unwrap()
}

fn criterion_5() -> Status {
    let start = Instant::now();
    let mut rng = rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let data = random_dataset(&mut rng, 200, 20, 15);
        let sc = scatter_matrices(&data).unwrap();
        let st = total_scatter(&data);
        let rel = sc.within.add(&sc.between).max_abs_diff(&st) / st.frobenius_norm();
        worst = worst.max(rel);
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-8 && secs <= 10.0,
        format!("worst relative deviation {worst:.2e} over 100 datasets in {secs:.2} s"),
    )
}

/// Standardizes `data` the way the model does, so the model's directions
/// can be checked against the scatter of the standardized rows.
fn standardized(data: &LabeledDataset, means: &[f64], scales: &[f64]) -> LabeledDataset {
    let rows: Vec<Vec<f64>> = (0..data.len())
        .map(|i| {
            data.row(i)
                .iter()
                .zip(means.iter().zip(scales))
                .map(|(x, (m, s))| (x - m) / s)
                .collect()
        })
        .collect();
    LabeledDataset::new(
        Matrix::from_rows(&rows).unwrap(),
        data.labels().to_vec(),
        data.taxonomy().clone(),
    )
    .unwrap()
    .with_class_order(data.classes())
    .unwrap()
}

fn criterion_6() -> Status {
    let mut rng = rng(5);
    let mut worst_residual: f64 = 0.0;
    let mut worst_ortho: f64 = 0.0;
    let mut pairs = 0;
    for _ in 0..100 {
        let data = random_dataset(&mut rng, 200, 20, 15);
        let model = fit(&data, &FitOptions::default()).unwrap();
        let sc = scatter_matrices(&standardized(&data, &model.feature_means, &model.feature_scales))
            .unwrap();
        let df = (data.len() - data.classes().len()) as f64;
        let m = model.n_functions();
        let v: Vec<Vec<f64>> = (0..m)
            .map(|f| model.directions.column(f).iter().map(|x| x / df.sqrt()).collect())
            .collect();
        for (f, vf) in v.iter().enumerate() {
            let sbv = sc.between.mul_vec(vf);
            let swv = sc.within.mul_vec(vf);
            let r: Vec<f64> = sbv
                .iter()
                .zip(&swv)
                .map(|(a, b)| a - model.eigenvalues[f] * b)
                .collect();
            worst_residual = worst_residual.max(norm(&r) / norm(&sbv));
            for (g, vg) in v.iter().enumerate() {
                let target = if f == g { 1.0 } else { 0.0 };
                worst_ortho = worst_ortho.max((dot(vg, &swv) - target).abs());
            }
            pairs += 1;
        }
    }
    check(
        worst_residual <= 1e-7 && worst_ortho <= 1e-8,
        format!(
            "{pairs} pairs, worst residual {worst_residual:.2e}, worst |VtSwV - I| {worst_ortho:.2e}"
        ),
    )
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn eliminate(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn criterion_7() -> Status {
    let mut rng = rng(7);
    let mut worst: f64 = 1.0;
    for _ in 0..50 {
        let data = random_dataset(&mut rng, 60, 3, 2);
        let p = data.n_features();
        let idx = data.class_indices();
        let mut means = vec![vec![0.0; p]; 2];
        let mut counts = [0.0; 2];
        for i in 0..data.len() {
            counts[idx[i]] += 1.0;
            for j in 0..p {
                means[idx[i]][j] += data.row(i)[j];
            }
        }
        for k in 0..2 {
            means[k].iter_mut().for_each(|v| *v /= counts[k]);
        }
        let mut sw = vec![vec![0.0; p]; p];
        for i in 0..data.len() {
            let d: Vec<f64> = (0..p).map(|j| data.row(i)[j] - means[idx[i]][j]).collect();
            for a in 0..p {
                for b in 0..p {
                    sw[a][b] += d[a] * d[b];
                }
            }
        }
        let diff: Vec<f64> = (0..p).map(|j| means[0][j] - means[1][j]).collect();
        let oracle = eliminate(sw, diff);

        let model = fit(&data, &FitOptions::default()).unwrap();
        let w: Vec<f64> = (0..p)
            .map(|j| model.directions[(j, 0)] / model.feature_scales[j])
            .collect();
        let cos = dot(&w, &oracle).abs() / (norm(&w) * norm(&oracle));
        worst = worst.min(cos);
    }
    check(
        worst >= 1.0 - 1e-8,
        format!("smallest |cosine| over 50 problems {worst:.15}"),
    )
}

fn criterion_8() -> Status {
    let mut rng = rng(8);
    let mut changed = 0;
    let mut total = 0;
    for _ in 0..25 {
        let data = random_dataset(&mut rng, 200, 20, 15);
        let p = data.n_features();
        let scale: Vec<f64> = (0..p)
            .map(|_| {
                let s = 10f64.powf(rng.random_range(-2.0..2.0));
                if rng.random_bool(0.3) {
                    -s
                } else {
                    s
                }
            })
            .collect();
        let shift: Vec<f64> = (0..p).map(|_| rng.random_range(-100.0..100.0)).collect();
        let rows: Vec<Vec<f64>> = (0..data.len())
            .map(|i| (0..p).map(|j| scale[j] * data.row(i)[j] + shift[j]).collect())
            .collect();
        let moved = LabeledDataset::new(
            Matrix::from_rows(&rows).unwrap(),
            data.labels().to_vec(),
            data.taxonomy().clone(),
        )
        .unwrap();
        let a = fit(&data, &FitOptions::default()).unwrap();
        let b = fit(&moved, &FitOptions::default()).unwrap();
        for i in 0..data.len() {
            total += 1;
            if a.classify(data.row(i)).unwrap().label != b.classify(&rows[i]).unwrap().label {
                changed += 1;
            }
        }
    }
    check(
        changed == 0,
        format!("{changed} of {total} predictions changed across 25 datasets"),
    )
}

const VOCAB: [(&str, &str); 24] = [
    ("I", "PPSS"),
    ("me", "PPO"),
    ("it", "PPS"),
    ("you", "PPSS"),
    ("our", "PP$"),
    ("therefore", "RB"),
    ("quickly", "RB"),
    ("that", "CS"),
    ("which", "WDT"),
    ("in", "IN"),
    ("of", "IN"),
    ("house", "NN"),
    ("committee", "NN"),
    ("Atlanta", "NP"),
    ("running", "VBG"),
    ("see", "VB"),
    ("says", "VBZ"),
    ("is", "BEZ"),
    ("said", "VBD"),
    ("the", "AT"),
    ("extraordinary", "JJ"),
    (",", ","),
    ("``", "``"),
    ("''", "''"),
];

fn random_sentence(rng: &mut rand::rngs::StdRng) -> String {
    // start with a word so every sentence has at least one
    let (w, t) = VOCAB[rng.random_range(0..21)];
    let mut tokens = vec![format!("{w}/{t}")];
    for _ in 0..rng.random_range(0..12) {
        let (w, t) = VOCAB[rng.random_range(0..VOCAB.len())];
        let w = if rng.random_bool(0.2) { w.to_uppercase() } else { w.to_string() };
        tokens.push(format!("{w}/{t}"));
    }
    tokens.push("./.".into());
    tokens.join(" ")
}

fn features_of(sentences: &[String], tagmap: &TagMap) -> FeatureVector {
    let doc = parse_tagged_file(sentences.join("\n").as_bytes(), tagmap).unwrap();
    extract_features(&doc, tagmap).unwrap()
}

fn criterion_9() -> Status {
    let tagmap = TagMap::brown();
    let example = ["I/PPSS saw/VBD it/PPO ./.".to_string(), "You/PPSS see/VB me/PPO ./.".to_string()];
    let got = features_of(&example, &tagmap).to_row();
    // hand count of the two sentences
    let expected: [f64; N_FEATURES] = [
        0.0, 14.0, 0.0, 0.0, 1.0, 0.0, 3.0, 7.0, 2.0, 1.0, 0.0, 2.0, 100.0, 1.0, 14.0 / 6.0,
        1.0, 0.0, 1.0, 0.0, 0.0,
    ];
    if got != expected {
        return Status::Fail(format!("example gave {got:?}"));
    }

    let mut rng = rng(9);
    for case in 0..100 {
        let n = rng.random_range(2..8);
        let sentences: Vec<String> = (0..n).map(|_| random_sentence(&mut rng)).collect();
        let whole = features_of(&sentences, &tagmap);
        let cut = rng.random_range(1..n);
        let left = features_of(&sentences[..cut], &tagmap);
        let right = features_of(&sentences[cut..], &tagmap);
        let (w, l, r) = (whole.to_row(), left.to_row(), right.to_row());
        for j in (0..N_FEATURES).filter(|j| !NON_COUNT_FEATURES.contains(j)) {
            if w[j] != l[j] + r[j] {
                return Status::Fail(format!("case {case}: feature {j} not additive"));
            }
        }
        if whole.word_count != left.word_count + right.word_count {
            return Status::Fail(format!("case {case}: word count not additive"));
        }
        let mut shuffled = sentences.clone();
        for i in (1..n).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        if features_of(&shuffled, &tagmap) != whole {
            return Status::Fail(format!("case {case}: sentence order changed the features"));
        }
    }
    Status::Pass("example exact; additivity and permutation hold on 100 documents".into())
}

fn criterion_10() -> Status {
    let model = toy_map_model();
    let tax = CategoryTaxonomy::brown();
    let bounds = Bounds::new(-4.0, 4.0, -3.0, 3.0).unwrap();
    let map = render_map(&model, &tax, 48, 18, Some(bounds)).unwrap();
    let mut checked = 0;
    for r in 0..map.height {
        for c in 0..map.width {
            let cell = map.cell(r, c);
            if cell.boundary {
                continue;
            }
            let (f1, f2) = map.cell_center(r, c);
            if model.decide(&[f1, f2]) != cell.class {
                return Status::Fail(format!("cell ({r}, {c}) disagrees with classify"));
            }
            checked += 1;
        }
    }
    let text = to_text(&map);
    let again = to_text(&render_map(&model, &tax, 48, 18, Some(bounds)).unwrap());
    let golden_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/toy_map.txt");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden_path, &text).unwrap();
    }
    let golden = match std::fs::read_to_string(&golden_path) {
        Ok(g) => g,
        Err(e) => return Status::Fail(format!("{}: {e}", golden_path.display())),
    };
    check(
        text == again && text == golden,
        format!(
            "{checked} interior cells agree; golden {}",
            if text == golden { "matches" } else { "differs" }
        ),
    )
}

fn criterion_11() -> Status {
    let mut rng = rng(11);
    let tax = CategoryTaxonomy::brown();
    for case in 0..50 {
        let n = rng.random_range(2..=LEVEL3.len());
        let mut labels: Vec<&str> = LEVEL3.to_vec();
        for i in (1..labels.len()).rev() {
            labels.swap(i, rng.random_range(0..=i));
        }
        let mut labels: Vec<String> = labels[..n].iter().map(|s| s.to_string()).collect();
        tax.sort_codes(&mut labels);
        let mut conf = ConfusionMatrix::zeros(labels.clone(), &tax);
        for row in conf.counts.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.random_range(0..20);
            }
        }
        let map = match case % 4 {
            0 => MergeMap::fiction(&labels),
            1 => MergeMap::to_level(&labels, &tax, 2).unwrap(),
            2 => MergeMap::to_level(&labels, &tax, 1).unwrap(),
            _ => {
                let groups = rng.random_range(1..=n);
                MergeMap::new(
                    labels
                        .iter()
                        .map(|l| (l.clone(), format!("g{}", rng.random_range(0..groups)))),
                )
                .unwrap()
            }
        };
        let merged = collapse(&conf, &map, &tax).unwrap();
        if merged.total_items() != conf.total_items() || merged.total_errors() > conf.total_errors()
        {
            return Status::Fail(format!("case {case}: items or errors violated"));
        }
    }
    Status::Pass("50 random matrices keep their totals and never gain errors".into())
}
