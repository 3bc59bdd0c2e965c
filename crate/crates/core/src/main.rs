use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use genre_core::corpus::{load_manifest, parse_tagged_file, TagMap};
use genre_core::discriminant::{
    fit, load_model, save_model, DiscriminantModel, FitOptions, LabeledDataset, PriorMode,
    DEFAULT_RIDGE,
};
use genre_core::evaluation::{collapse, evaluate, report, MergeMap, ReportFormat};
use genre_core::features::{extract_features, per_thousand_words};
use genre_core::table::{extract_manifest, ExtractOptions, FeatureTable};
use genre_core::taxonomy::{CategoryTaxonomy, FICTION_CODES};
use genre_core::terrmap::{legend, render_map, render_strip, to_text, Bounds};
use genre_core::Error;

#[derive(Parser)]
#[command(name = "genre", version, about = "Genre recognition with discriminant analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the feature table of every document in a manifest.
    Extract {
        #[command(flatten)]
        input: CorpusArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit discriminant functions and write a model file.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        labels: LabelArgs,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        model: PathBuf,
    },
    /// Classify labeled documents and report errors per category.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        labels: LabelArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: FormatArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Classify tagged documents.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, env = "GENRE_TAGMAP")]
        tagmap: Option<PathBuf>,
        #[arg(long)]
        strict_tags: bool,
        #[arg(long)]
        keep_going: bool,
        #[arg(long = "per-1000-words")]
        per_thousand: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        files: Vec<PathBuf>,
    },
    /// Draw the territorial map (or a strip plot for one-function models).
    Map {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        map: MapArgs,
        /// Optional labeled data for the one-function histogram.
        #[command(flatten)]
        data: OptionalDataArgs,
        #[command(flatten)]
        labels: LabelArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Extract, train, evaluate and map in one go.
    RunAll {
        #[command(flatten)]
        input: CorpusArgs,
        #[command(flatten)]
        labels: LabelArgs,
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args, Clone)]
struct CorpusArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Tag map file; defaults to the bundled Brown map.
    #[arg(long, env = "GENRE_TAGMAP")]
    tagmap: Option<PathBuf>,
    #[arg(long)]
    strict_tags: bool,
    /// Skip unreadable or malformed documents instead of failing.
    #[arg(long)]
    keep_going: bool,
    #[arg(long)]
    jobs: Option<usize>,
    /// Scale count features to occurrences per 1000 words.
    #[arg(long = "per-1000-words")]
    per_thousand: bool,
    /// Accept category codes outside the Brown taxonomy.
    #[arg(long)]
    free_labels: bool,
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct DataSource {
    /// Feature table written by `extract`.
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct DataArgs {
    #[command(flatten)]
    source: DataSource,
    #[command(flatten)]
    corpus: CorpusOptions,
}

#[derive(Args, Clone)]
struct OptionalDataArgs {
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    corpus: CorpusOptions,
}

#[derive(Args, Clone)]
struct CorpusOptions {
    #[arg(long, env = "GENRE_TAGMAP")]
    tagmap: Option<PathBuf>,
    #[arg(long)]
    strict_tags: bool,
    #[arg(long)]
    keep_going: bool,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long = "per-1000-words")]
    per_thousand: bool,
    #[arg(long)]
    free_labels: bool,
}

#[derive(Args, Clone)]
struct LabelArgs {
    /// Brown taxonomy level to classify at: 1 (2 classes), 2 (4), 3 (15).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3), conflicts_with = "merge_map")]
    level: Option<u8>,
    /// TSV file mapping source labels to target labels.
    #[arg(long)]
    merge_map: Option<PathBuf>,
    /// Merge the six fiction categories into one.
    #[arg(long, value_enum)]
    collapse: Option<CollapseArg>,
}

#[derive(Args, Clone)]
struct FitArgs {
    #[arg(long, value_enum, default_value = "proportional")]
    priors: PriorArg,
    #[arg(long, default_value_t = DEFAULT_RIDGE)]
    ridge: f64,
    /// Number of discriminant functions to keep (default: min(p, N-1)).
    #[arg(long)]
    functions: Option<usize>,
    /// Drop zero-variance feature columns instead of failing.
    #[arg(long)]
    drop_constant: bool,
}

#[derive(Args, Clone)]
struct MapArgs {
    #[arg(long, default_value_t = 60)]
    width: usize,
    #[arg(long, default_value_t = 24)]
    height: usize,
    /// f1_min,f1_max,f2_min,f2_max
    #[arg(long, allow_hyphen_values = true)]
    bounds: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorArg {
    Proportional,
    Equal,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Tsv,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum CollapseArg {
    Fiction,
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug)]
struct CliError(String);

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<String> for CliError {
    fn from(s: String) -> Self {
        CliError(s)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

/// Checks input files and output directories before any work starts.
fn validate_paths(command: &Command) -> CliResult<()> {
    let mut inputs: Vec<&Path> = Vec::new();
    let mut outputs: Vec<&Path> = Vec::new();
    fn corpus<'a>(o: &'a CorpusOptions, inputs: &mut Vec<&'a Path>) {
        inputs.extend(o.tagmap.as_deref());
    }
    match command {
        Command::Extract { input, output } => {
            inputs.push(&input.manifest);
            inputs.extend(input.tagmap.as_deref());
            outputs.extend(output.as_deref());
        }
        Command::Train { data, labels, model, .. } => {
            inputs.extend(data.source.features.as_deref());
            inputs.extend(data.source.manifest.as_deref());
            corpus(&data.corpus, &mut inputs);
            inputs.extend(labels.merge_map.as_deref());
            outputs.push(model);
        }
        Command::Eval { data, labels, model, output, .. } => {
            inputs.push(model);
            inputs.extend(data.source.features.as_deref());
            inputs.extend(data.source.manifest.as_deref());
            corpus(&data.corpus, &mut inputs);
            inputs.extend(labels.merge_map.as_deref());
            outputs.extend(output.as_deref());
        }
        Command::Classify { model, tagmap, output, .. } => {
            inputs.push(model);
            inputs.extend(tagmap.as_deref());
            outputs.extend(output.as_deref());
        }
        Command::Map { model, data, labels, output, .. } => {
            inputs.push(model);
            inputs.extend(data.features.as_deref());
            inputs.extend(data.manifest.as_deref());
            corpus(&data.corpus, &mut inputs);
            inputs.extend(labels.merge_map.as_deref());
            outputs.extend(output.as_deref());
        }
        Command::RunAll { input, labels, .. } => {
            inputs.push(&input.manifest);
            inputs.extend(input.tagmap.as_deref());
            inputs.extend(labels.merge_map.as_deref());
        }
    }
    for path in inputs {
        if !path.is_file() {
            return Err(CliError(format!("{}: no such file", path.display())));
        }
    }
    for path in outputs {
        let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
        if parent.is_some_and(|p| !p.is_dir()) {
            return Err(CliError(format!(
                "{}: output directory does not exist",
                path.display()
            )));
        }
    }
    Ok(())
}

fn run(command: Command) -> CliResult<()> {
    validate_paths(&command)?;
    match command {
        Command::Extract { input, output } => {
            let table = extract_table(&input.manifest, &input.clone().into())?;
            emit(output.as_deref(), table.to_tsv().as_bytes())
        }
        Command::Train {
            data,
            labels,
            fit: fit_args,
            model,
        } => {
            let dataset = apply_labels(load_dataset(&data.source, &data.corpus)?, &labels)?;
            let fitted = fit_model(&dataset, &fit_args)?;
            write_atomic(&model, &save_model(&fitted)?)?;
            print!("{}", summary(&fitted));
            Ok(())
        }
        Command::Eval {
            data,
            labels,
            model,
            format,
            output,
        } => {
            let model = read_model(&model)?;
            let dataset = load_dataset(&data.source, &data.corpus)?;
            let text = eval_report(&model, dataset, &labels, format.into())?;
            emit(output.as_deref(), text.as_bytes())
        }
        Command::Classify {
            model,
            tagmap,
            strict_tags,
            keep_going,
            per_thousand,
            output,
            files,
        } => {
            let model = read_model(&model)?;
            let tagmap = load_tagmap(tagmap.as_deref(), strict_tags)?;
            classify_files(&model, &tagmap, &files, per_thousand, keep_going, output.as_deref())
        }
        Command::Map {
            model,
            map,
            data,
            labels,
            output,
        } => {
            let model = read_model(&model)?;
            let histogram = match (&data.features, &data.manifest) {
                (None, None) => None,
                (features, manifest) => {
                    let source = DataSource {
                        features: features.clone(),
                        manifest: manifest.clone(),
                    };
                    Some(apply_labels(load_dataset(&source, &data.corpus)?, &labels)?)
                }
            };
            let text = draw(&model, &map, histogram.as_ref())?;
            emit(output.as_deref(), text.as_bytes())
        }
        Command::RunAll {
            input,
            labels,
            fit: fit_args,
            map,
            out_dir,
        } => run_all(&input, &labels, &fit_args, &map, &out_dir),
    }
}

impl From<CorpusArgs> for CorpusOptions {
    fn from(a: CorpusArgs) -> Self {
        CorpusOptions {
            tagmap: a.tagmap,
            strict_tags: a.strict_tags,
            keep_going: a.keep_going,
            jobs: a.jobs,
            per_thousand: a.per_thousand,
            free_labels: a.free_labels,
        }
    }
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => ReportFormat::Table,
            FormatArg::Tsv => ReportFormat::Tsv,
        }
    }
}

fn load_tagmap(path: Option<&Path>, strict: bool) -> CliResult<TagMap> {
    let map = match path {
        Some(p) => TagMap::load(p)?,
        None => TagMap::brown(),
    };
    Ok(map.with_strict(strict))
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e).into())
}

fn read_model(path: &Path) -> CliResult<DiscriminantModel> {
    load_model(&read_file(path)?).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn extract_table(manifest_path: &Path, opts: &CorpusOptions) -> CliResult<FeatureTable> {
    let tagmap = load_tagmap(opts.tagmap.as_deref(), opts.strict_tags)?;
    let taxonomy = CategoryTaxonomy::brown();
    let manifest = load_manifest(
        &read_file(manifest_path)?,
        (!opts.free_labels).then_some(&taxonomy),
    )
    .map_err(|e| CliError(format!("{}: {e}", manifest_path.display())))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let manifest = manifest.rebase(base);
    let (table, failures) = extract_manifest(
        &manifest,
        &tagmap,
        ExtractOptions {
            per_thousand_words: opts.per_thousand,
            jobs: opts.jobs,
        },
    );
    if !failures.is_empty() {
        let listing: Vec<String> = failures
            .iter()
            .map(|f| format!("  {}: {}", f.doc_id, f.error))
            .collect();
        if opts.keep_going {
            eprintln!(
                "warning: skipped {} document(s):\n{}",
                failures.len(),
                listing.join("\n")
            );
        } else {
            return Err(CliError(format!(
                "{} document(s) failed:\n{}",
                failures.len(),
                listing.join("\n")
            )));
        }
    }
    Ok(table)
}

fn load_dataset(source: &DataSource, opts: &CorpusOptions) -> CliResult<LabeledDataset> {
    let table = match (&source.features, &source.manifest) {
        (Some(path), _) => {
            let text = String::from_utf8(read_file(path)?)
                .map_err(|_| CliError(format!("{}: not UTF-8", path.display())))?;
            FeatureTable::from_tsv(&text)
                .map_err(|e| CliError(format!("{}: {e}", path.display())))?
        }
        (None, Some(manifest)) => extract_table(manifest, opts)?,
        (None, None) => return Err(CliError("no input data given".into())),
    };
    Ok(table.to_dataset(&CategoryTaxonomy::brown())?)
}

/// Maps dataset labels through `--level` / `--merge-map` / `--collapse`.
fn apply_labels(data: LabeledDataset, labels: &LabelArgs) -> CliResult<LabeledDataset> {
    let mut data = data;
    if let Some(level) = labels.level {
        let map = MergeMap::to_level(data.classes(), data.taxonomy(), level).map_err(|e| {
            CliError(format!("{e} (labels must be Brown codes to use --level)"))
        })?;
        data = map.apply_to_dataset(&data)?;
    }
    if let Some(path) = &labels.merge_map {
        data = MergeMap::load(path)?.apply_to_dataset(&data)?;
    }
    if labels.collapse == Some(CollapseArg::Fiction) {
        data = MergeMap::fiction(data.classes()).apply_to_dataset(&data)?;
    }
    Ok(data)
}

fn fit_model(data: &LabeledDataset, args: &FitArgs) -> CliResult<DiscriminantModel> {
    let options = FitOptions {
        n_functions: args.functions,
        priors: match args.priors {
            PriorArg::Proportional => PriorMode::Proportional,
            PriorArg::Equal => PriorMode::Equal,
        },
        ridge: args.ridge,
        drop_constant: args.drop_constant,
    };
    Ok(fit(data, &options)?)
}

fn summary(model: &DiscriminantModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "classes: {}", model.n_classes());
    let _ = writeln!(out, "labels: {}", model.class_labels.join(","));
    let _ = writeln!(out, "functions: {}", model.n_functions());
    let total: f64 = model.eigenvalues.iter().sum();
    for (i, ev) in model.eigenvalues.iter().enumerate() {
        let share = if total > 0.0 { 100.0 * ev / total } else { 0.0 };
        let _ = writeln!(
            out,
            "  function {}: eigenvalue {ev:.6}  variance {share:.1} %  canonical r {:.4}",
            i + 1,
            (ev / (1.0 + ev)).sqrt()
        );
    }
    out
}

fn eval_report(
    model: &DiscriminantModel,
    data: LabeledDataset,
    labels: &LabelArgs,
    format: ReportFormat,
) -> CliResult<String> {
    let post_hoc = labels.collapse == Some(CollapseArg::Fiction)
        && model
            .class_labels
            .iter()
            .any(|l| FICTION_CODES.contains(&l.as_str()));
    let pre_labels = LabelArgs {
        collapse: if post_hoc { None } else { labels.collapse },
        ..labels.clone()
    };
    let data = apply_labels(data, &pre_labels)?;
    let conf = evaluate(model, &data).map_err(|e| match e {
        Error::UnknownLabel(l) => CliError(format!(
            "data label {l:?} is not a model class ({}); use the same --level/--merge-map as for training",
            model.class_labels.join(",")
        )),
        other => other.into(),
    })?;
    let conf = if post_hoc {
        collapse(&conf, &MergeMap::fiction(&conf.labels), data.taxonomy())?
    } else {
        conf
    };
    Ok(report(&conf, format))
}

fn draw(
    model: &DiscriminantModel,
    args: &MapArgs,
    histogram: Option<&LabeledDataset>,
) -> CliResult<String> {
    let taxonomy = CategoryTaxonomy::brown();
    let mut text = if model.n_functions() >= 2 {
        let bounds = args.bounds.as_deref().map(Bounds::parse).transpose()?;
        to_text(&render_map(model, &taxonomy, args.width, args.height, bounds)?)
    } else {
        render_strip(model, &taxonomy, args.width, histogram)?
    };
    text.push('\n');
    text.push_str(&legend(&model.class_labels, &taxonomy));
    Ok(text)
}

fn classify_files(
    model: &DiscriminantModel,
    tagmap: &TagMap,
    files: &[PathBuf],
    per_thousand: bool,
    keep_going: bool,
    output: Option<&Path>,
) -> CliResult<()> {
    let mut out = String::from("doc_id\tpredicted");
    for label in &model.class_labels {
        let _ = write!(out, "\tscore_{label}");
    }
    out.push_str("\tf1\tf2\n");
    let mut failures = Vec::new();
    for path in files {
        let result = (|| -> genre_core::Result<String> {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let doc = parse_tagged_file(&bytes, tagmap)?;
            let fv = extract_features(&doc, tagmap)?;
            let mut row = fv.to_row().to_vec();
            if per_thousand {
                per_thousand_words(&mut row, fv.word_count);
            }
            let c = model.classify(&row)?;
            let z = model.project(&row, model.n_functions().min(2))?;
            let mut line = format!("{}\t{}", path.display(), c.label);
            for s in &c.scores {
                let _ = write!(line, "\t{s}");
            }
            let _ = write!(
                line,
                "\t{}\t{}",
                z[0],
                z.get(1).map(|v| v.to_string()).unwrap_or_default()
            );
            Ok(line)
        })();
        match result {
            Ok(line) => {
                out.push_str(&line);
                out.push('\n');
            }
            Err(e) => failures.push(format!("  {}: {e}", path.display())),
        }
    }
    if !failures.is_empty() {
        let msg = format!("{} file(s) failed:\n{}", failures.len(), failures.join("\n"));
        if !keep_going {
            return Err(CliError(msg));
        }
        eprintln!("warning: {msg}");
    }
    emit(output, out.as_bytes())
}

fn run_all(
    input: &CorpusArgs,
    labels: &LabelArgs,
    fit_args: &FitArgs,
    map: &MapArgs,
    out_dir: &Path,
) -> CliResult<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let table = extract_table(&input.manifest, &input.clone().into())?;
    let dataset = table.to_dataset(&CategoryTaxonomy::brown())?;
    let train_labels = LabelArgs {
        collapse: None,
        ..labels.clone()
    };
    let train_data = apply_labels(dataset.clone(), &train_labels)?;
    let model = fit_model(&train_data, fit_args)?;

    let report_text = eval_report(&model, dataset.clone(), &train_labels, ReportFormat::Table)?;
    let mut stdout_text = summary(&model);
    stdout_text.push('\n');
    stdout_text.push_str(&report_text);

    write_atomic(&out_dir.join("features.tsv"), table.to_tsv().as_bytes())?;
    write_atomic(&out_dir.join("model.json"), &save_model(&model)?)?;
    write_atomic(&out_dir.join("report.txt"), report_text.as_bytes())?;
    if labels.collapse == Some(CollapseArg::Fiction) {
        let collapsed = eval_report(&model, dataset, labels, ReportFormat::Table)?;
        write_atomic(&out_dir.join("report_collapsed.txt"), collapsed.as_bytes())?;
        stdout_text.push_str("\nfiction collapsed:\n");
        stdout_text.push_str(&collapsed);
    }
    let map_text = draw(&model, map, Some(&train_data))?;
    write_atomic(&out_dir.join("map.txt"), map_text.as_bytes())?;
    stdout_text.push('\n');
    stdout_text.push_str(&map_text);
    print!("{stdout_text}");
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match output {
        Some(path) => write_atomic(path, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError(format!("stdout: {e}")))
        }
    }
}
