//! Command-line front end: dataset generation, embedding, anomaly
//! detection, sub-trajectory detection, pattern mining, evaluation, and the
//! scaleup benchmark.
//!
//! Exit codes: 0 on success, 1 on validation/configuration errors, 2 on
//! i/o errors.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use trajdk::detect::{
    auto_search, detect, ranking_from_scores, AnomalyRanking, DetectConfig, DetectorKind,
    Polarity, SchemeKind,
};
use trajdk::distances::Measure;
use trajdk::embedding::{embed_dataset, FeatureMap};
use trajdk::error::Error;
use trajdk::eval::{roc_auc, scaleup_bench, BenchMethod, BenchReport};
use trajdk::isolation::PartitioningModel;
use trajdk::model::{
    load_clusters, load_labels, load_dataset, save_clusters, save_csv, save_labels,
    Format, IngestOptions, Label, LabeledDataset, TimeColumn, Trajectory,
};
use trajdk::nystrom::NystromModel;
use trajdk::patterns::mine_patterns;
use trajdk::subtraj::{detect_subtraj, DEFAULT_MIN_LEN, DEFAULT_TAU};
use trajdk::synth;

#[derive(Parser)]
#[command(name = "trajdk", version, about = "Trajectory mining with distributional kernel embeddings")]
struct Cli {
    /// Random seed; defaults to $TRAJDK_SEED or 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread cap; defaults to the available cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// JSON config file mirroring the flags; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print progress notes to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    Gen(GenArgs),
    /// Embed every trajectory as a kernel mean map and export it.
    Embed(EmbedArgs),
    /// Rank trajectories by anomalousness.
    Detect(DetectArgs),
    /// Detect the maximal anomalous sub-trajectories of a query.
    Subtraj(SubtrajArgs),
    /// Mine frequent sub-trajectory patterns of a clustered dataset.
    Mine(MineArgs),
    /// Score a ranking or an external score file against labels.
    Eval(EvalArgs),
    /// Time preprocessing and detection across dataset sizes.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// dense-sparse-103 | translated-triple | separable-singleton | cross-style
    #[arg(long)]
    kind: String,
    #[arg(long)]
    out: PathBuf,
    /// Trajectory count (separable-singleton, cross-style).
    #[arg(long)]
    n: Option<usize>,
    /// Anomalous fraction for cross-style.
    #[arg(long)]
    anomaly_frac: Option<f64>,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Column holding the trajectory id.
    #[arg(long)]
    id_column: Option<String>,
    /// Column holding the timestamp; "none" disables time parsing.
    #[arg(long)]
    time_column: Option<String>,
    /// JSON points carry no leading timestamp.
    #[arg(long)]
    json_no_time: bool,
    /// Min-max scale coordinates to [0, 1] before processing.
    #[arg(long)]
    normalize: bool,
    /// Fold the timestamp in as an extra coordinate dimension (with
    /// --normalize).
    #[arg(long)]
    include_time: bool,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    input: InputArgs,
    /// ik | nystrom
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    psi: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    components: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Also save the fitted kernel model.
    #[arg(long)]
    save_model: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// ik | nystrom
    #[arg(long)]
    scheme: Option<String>,
    /// idk2 | gdk | lof
    #[arg(long)]
    detector: Option<String>,
    #[arg(long)]
    psi: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    components: Option<usize>,
    #[arg(long)]
    psi2: Option<usize>,
    #[arg(long)]
    t2: Option<usize>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    components2: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Grid-search parameters by ROC-AUC against --labels.
    #[arg(long)]
    search: bool,
    /// Rank an external score file (id,score) instead of running a
    /// detector.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// similarity | anomaly: polarity of --scores.
    #[arg(long)]
    polarity: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SubtrajArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Labels for --input; label-0 trajectories form the normal dataset.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// File holding the query trajectory (defaults to --input).
    #[arg(long)]
    query: Option<PathBuf>,
    /// Id of the query trajectory within the query file.
    #[arg(long)]
    query_id: Option<String>,
    #[arg(long)]
    psi: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    min_len: Option<usize>,
    /// JSON report destination.
    #[arg(long)]
    out: PathBuf,
    /// Plot-ready per-point CSV (index, x, y, beta, anomalous).
    #[arg(long)]
    points_csv: Option<PathBuf>,
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Cluster file (id,cluster); defaults to clusters bundled with the
    /// dataset.
    #[arg(long)]
    clusters: Option<PathBuf>,
    #[arg(long)]
    psi: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    min_len: Option<usize>,
    /// JSON pattern report destination.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Score CSV (id,score[,rank]).
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// similarity | anomaly
    #[arg(long, default_value = "similarity")]
    polarity: String,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated dataset sizes, ascending.
    #[arg(long, default_value = "100,1000")]
    sizes: String,
    /// Comma-separated methods: ik-embed, nystrom-embed, dtw-matrix,
    /// hausdorff-matrix, frechet-matrix.
    #[arg(long, default_value = "ik-embed,dtw-matrix")]
    methods: String,
    #[arg(long)]
    psi: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    components: Option<usize>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage and parse diagnostics go to stderr; exit code 1 per the
            // interface contract.
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(Error::Io(e)) => {
            eprintln!("error: i/o: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Flag defaults loaded from --config; explicit flags override.
struct Settings {
    file: Value,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Settings, Error> {
        let file = match path {
            Some(p) => {
                let raw = std::fs::read_to_string(p)?;
                serde_json::from_str(&raw)
                    .map_err(|e| Error::Config(format!("bad config file: {e}")))?
            }
            None => Value::Null,
        };
        Ok(Settings { file })
    }

    fn u64_or(&self, key: &str, cli: Option<u64>, default: u64) -> u64 {
        cli.or_else(|| self.file.get(key).and_then(Value::as_u64)).unwrap_or(default)
    }

    fn usize_or(&self, key: &str, cli: Option<usize>, default: usize) -> usize {
        cli.or_else(|| self.file.get(key).and_then(Value::as_u64).map(|v| v as usize))
            .unwrap_or(default)
    }

    fn usize_opt(&self, key: &str, cli: Option<usize>) -> Option<usize> {
        cli.or_else(|| self.file.get(key).and_then(Value::as_u64).map(|v| v as usize))
    }

    fn f64_or(&self, key: &str, cli: Option<f64>, default: f64) -> f64 {
        cli.or_else(|| self.file.get(key).and_then(Value::as_f64)).unwrap_or(default)
    }

    fn f64_opt(&self, key: &str, cli: Option<f64>) -> Option<f64> {
        cli.or_else(|| self.file.get(key).and_then(Value::as_f64))
    }

    fn str_or(&self, key: &str, cli: Option<&str>, default: &str) -> String {
        cli.map(str::to_string)
            .or_else(|| self.file.get(key).and_then(Value::as_str).map(str::to_string))
            .unwrap_or_else(|| default.to_string())
    }
}

fn env_seed() -> u64 {
    std::env::var("TRAJDK_SEED").ok().and_then(|v| v.parse().ok()).unwrap_or(0)
}

fn execute(cli: Cli) -> Result<(), Error> {
    let settings = Settings::load(cli.config.as_deref())?;
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let seed = settings.u64_or("seed", cli.seed, env_seed());
    let verbose = cli.verbose;
    match cli.command {
        Command::Gen(args) => cmd_gen(args, &settings, seed, verbose),
        Command::Embed(args) => cmd_embed(args, &settings, seed, verbose),
        Command::Detect(args) => cmd_detect(args, &settings, seed, verbose),
        Command::Subtraj(args) => cmd_subtraj(args, &settings, seed, verbose),
        Command::Mine(args) => cmd_mine(args, &settings, seed, verbose),
        Command::Eval(args) => cmd_eval(args),
        Command::Bench(args) => cmd_bench(args, &settings, seed),
    }
}

fn ingest_options(args: &InputArgs, settings: &Settings) -> IngestOptions {
    let mut options = IngestOptions::default();
    if let Some(id) = &args.id_column {
        options.id_column = id.clone();
    }
    match settings.str_or("time_column", args.time_column.as_deref(), "auto").as_str() {
        "auto" => {}
        "none" => options.time_column = TimeColumn::None,
        name => options.time_column = TimeColumn::Named(name.to_string()),
    }
    options.json_time_first = !args.json_no_time;
    options
}

fn load_input(args: &InputArgs, settings: &Settings) -> Result<LabeledDataset, Error> {
    let format = match settings.str_or("format", Some(&args.format), "csv").as_str() {
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => return Err(Error::Config(format!("unknown format '{other}'"))),
    };
    let options = ingest_options(args, settings);
    let ds = load_dataset(&args.input, format, &options)?;
    if args.normalize {
        ds.normalize(args.include_time)
    } else if args.include_time {
        Err(Error::Config("--include-time requires --normalize".to_string()))
    } else {
        Ok(ds)
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn write_config_line(file: &mut std::fs::File, config: &Value) -> Result<(), Error> {
    writeln!(file, "# config: {config}")?;
    Ok(())
}

fn cmd_gen(args: GenArgs, settings: &Settings, seed: u64, verbose: bool) -> Result<(), Error> {
    let kind = settings.str_or("kind", Some(&args.kind), "");
    let n = settings.usize_opt("n", args.n);
    let frac = settings.f64_opt("anomaly_frac", args.anomaly_frac);
    let dataset = match kind.as_str() {
        "dense-sparse-103" => synth::gen_dense_sparse(seed),
        "separable-singleton" => synth::gen_separable_singleton(n.unwrap_or(20), seed)?,
        "cross-style" => synth::gen_cross_style_with(
            n.unwrap_or(190),
            seed,
            synth::CrossStyleOptions { anomaly_fraction: frac.unwrap_or(0.02) },
        )?,
        "translated-triple" => {
            let (x, x_prime, y) = synth::gen_translated_triple(seed);
            LabeledDataset::new(vec![x, x_prime, y])?
        }
        other => return Err(Error::Config(format!("unknown generator kind '{other}'"))),
    };
    let config = json!({
        "command": "gen", "kind": kind, "seed": seed, "n": n, "anomaly_frac": frac,
    });
    let mut file = std::fs::File::create(&args.out)?;
    write_config_line(&mut file, &config)?;
    save_csv(&dataset, &mut file)?;
    if let Some(labels) = dataset.labels() {
        let mut f = std::fs::File::create(sibling(&args.out, "labels.csv"))?;
        write_config_line(&mut f, &config)?;
        save_labels(labels, &mut f)?;
    }
    if let Some(clusters) = dataset.clusters() {
        let mut f = std::fs::File::create(sibling(&args.out, "clusters.csv"))?;
        write_config_line(&mut f, &config)?;
        save_clusters(clusters, &mut f)?;
    }
    if verbose {
        eprintln!(
            "generated {} trajectories ({} points) into {}",
            dataset.len(),
            dataset.total_points(),
            args.out.display()
        );
    }
    Ok(())
}

fn fit_model(
    scheme: SchemeKind,
    dataset: &LabeledDataset,
    psi: usize,
    t: usize,
    sigma: f64,
    components: usize,
    seed: u64,
) -> Result<Box<dyn FeatureMap>, Error> {
    let points = dataset.concat_points();
    Ok(match scheme {
        SchemeKind::Isolation => Box::new(PartitioningModel::fit(&points, psi, t, seed)?),
        SchemeKind::Nystrom => Box::new(NystromModel::fit(&points, components, sigma, seed)?),
    })
}

fn cmd_embed(args: EmbedArgs, settings: &Settings, seed: u64, verbose: bool) -> Result<(), Error> {
    let dataset = load_input(&args.input, settings)?;
    let scheme = SchemeKind::parse(&settings.str_or("scheme", args.scheme.as_deref(), "ik"))?;
    let psi = settings.usize_or("psi", args.psi, trajdk::isolation::DEFAULT_PSI);
    let t = settings.usize_or("t", args.t, trajdk::isolation::DEFAULT_T);
    let sigma = settings.f64_or("sigma", args.sigma, 1.0);
    let components = settings.usize_or("components", args.components, trajdk::nystrom::DEFAULT_COMPONENTS);
    let model = fit_model(scheme, &dataset, psi, t, sigma, components, seed)?;
    let embedded = embed_dataset(model.as_ref(), &dataset)?;
    let config = json!({
        "command": "embed", "scheme": embedded.scheme.describe(), "psi": psi, "t": t,
        "sigma": sigma, "components": components, "seed": seed,
        "normalize": args.input.normalize, "include_time": args.input.include_time,
    });
    let mut file = std::fs::File::create(&args.out)?;
    write_config_line(&mut file, &config)?;
    embedded.save_csv(&mut file)?;
    if let Some(model_path) = &args.save_model {
        let file = std::fs::File::create(model_path)?;
        match scheme {
            SchemeKind::Isolation => {
                let points = dataset.concat_points();
                PartitioningModel::fit(&points, psi, t, seed)?.save(file)?;
            }
            SchemeKind::Nystrom => {
                let points = dataset.concat_points();
                NystromModel::fit(&points, components, sigma, seed)?.save(file)?;
            }
        }
    }
    if verbose {
        eprintln!("embedded {} trajectories into {}", embedded.len(), args.out.display());
    }
    Ok(())
}

fn read_score_file(path: &Path) -> Result<BTreeMap<String, f64>, Error> {
    let file = std::fs::File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut scores = BTreeMap::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(row + 2, e.to_string()))?;
        let id = record.get(0).ok_or_else(|| Error::format(row + 2, "missing id"))?.to_string();
        let raw = record.get(1).ok_or_else(|| Error::format(row + 2, "missing score"))?;
        let score: f64 = raw
            .trim()
            .parse()
            .map_err(|_| Error::format(row + 2, format!("cannot parse score '{raw}'")))?;
        scores.insert(id, score);
    }
    Ok(scores)
}

fn parse_polarity(name: &str) -> Result<Polarity, Error> {
    match name {
        "similarity" => Ok(Polarity::Similarity),
        "anomaly" => Ok(Polarity::Anomaly),
        other => Err(Error::Config(format!("unknown polarity '{other}'"))),
    }
}

fn write_ranking(
    path: Option<&Path>,
    ranking: &AnomalyRanking,
    config: &Value,
) -> Result<(), Error> {
    if let Some(path) = path {
        let mut file = std::fs::File::create(path)?;
        write_config_line(&mut file, config)?;
        ranking.save_csv(&mut file)?;
    }
    Ok(())
}

fn cmd_detect(args: DetectArgs, settings: &Settings, seed: u64, verbose: bool) -> Result<(), Error> {
    let dataset = load_input(&args.input, settings)?;
    let labels = match &args.labels {
        Some(path) => Some(load_labels(path)?),
        None => None,
    };

    // External score files bypass the detectors entirely.
    if let Some(score_path) = &args.scores {
        let polarity =
            parse_polarity(&settings.str_or("polarity", args.polarity.as_deref(), "anomaly"))?;
        let scores = read_score_file(score_path)?;
        let ids: Vec<String> = dataset.trajectories().iter().map(|t| t.id.clone()).collect();
        let ranking = ranking_from_scores(&scores, &ids, polarity)?;
        let config = json!({
            "command": "detect", "scores": score_path.display().to_string(),
            "polarity": if polarity == Polarity::Similarity { "similarity" } else { "anomaly" },
        });
        write_ranking(args.out.as_deref(), &ranking, &config)?;
        if let Some(labels) = &labels {
            println!("auc {}", roc_auc(&ranking, labels)?);
        }
        return Ok(());
    }

    let scheme = SchemeKind::parse(&settings.str_or("scheme", args.scheme.as_deref(), "ik"))?;
    let detector =
        DetectorKind::parse(&settings.str_or("detector", args.detector.as_deref(), "idk2"))?;
    let config = DetectConfig {
        scheme,
        detector,
        psi: settings.usize_or("psi", args.psi, trajdk::isolation::DEFAULT_PSI),
        t: settings.usize_or("t", args.t, trajdk::isolation::DEFAULT_T),
        sigma: settings.f64_or("sigma", args.sigma, 1.0),
        components: settings.usize_or(
            "components",
            args.components,
            trajdk::nystrom::DEFAULT_COMPONENTS,
        ),
        psi2: settings.usize_opt("psi2", args.psi2),
        t2: settings.usize_opt("t2", args.t2),
        sigma2: settings.f64_opt("sigma2", args.sigma2),
        components2: settings.usize_opt("components2", args.components2),
        k: settings.usize_or("k", args.k, 10),
        seed,
    };

    if args.search {
        let mut labeled = dataset.clone();
        match labels.clone() {
            Some(l) => labeled.set_labels(l)?,
            None => return Err(Error::Config("--search needs --labels".to_string())),
        }
        let result = auto_search(&labeled, scheme, detector, seed)?;
        let resolved = json!({
            "command": "detect", "search": true, "best": result.config.describe(),
            "auc": result.auc, "seed": seed,
        });
        write_ranking(args.out.as_deref(), &result.ranking, &resolved)?;
        println!("best {} auc {}", result.config.describe(), result.auc);
        if verbose {
            for (desc, auc) in &result.table {
                eprintln!("  {desc}: {auc:.4}");
            }
        }
        return Ok(());
    }

    let outcome = detect(&dataset, &config)?;
    let resolved = json!({
        "command": "detect", "config": config.describe(), "seed": seed,
    });
    write_ranking(args.out.as_deref(), &outcome.ranking, &resolved)?;
    if let Some(labels) = &labels {
        println!("auc {}", roc_auc(&outcome.ranking, labels)?);
    } else if verbose {
        eprintln!("ranked {} trajectories", outcome.ranking.ids.len());
    }
    Ok(())
}

fn cmd_subtraj(args: SubtrajArgs, settings: &Settings, seed: u64, verbose: bool) -> Result<(), Error> {
    let dataset = load_input(&args.input, settings)?;
    // Normal set: label-0 members when labels are given, otherwise the
    // whole input.
    let normals = match &args.labels {
        Some(path) => {
            let labels = load_labels(path)?;
            let keep: Vec<Trajectory> = dataset
                .trajectories()
                .iter()
                .filter(|t| labels.get(&t.id) != Some(&Label::Anomalous))
                .cloned()
                .collect();
            LabeledDataset::new(keep)?
        }
        None => dataset.clone(),
    };
    let query: Trajectory = match (&args.query, &args.query_id) {
        (Some(path), id) => {
            let options = ingest_options(&args.input, settings);
            let format = if path.extension().is_some_and(|e| e == "json") {
                Format::Json
            } else {
                Format::Csv
            };
            let query_ds = load_dataset(path, format, &options)?;
            match id {
                Some(id) => query_ds
                    .trajectory(id)
                    .ok_or_else(|| Error::validation(format!("no trajectory '{id}' in query file")))?
                    .clone(),
                None if query_ds.len() == 1 => query_ds.trajectories()[0].clone(),
                None => {
                    return Err(Error::Config(
                        "query file holds several trajectories; pass --query-id".to_string(),
                    ))
                }
            }
        }
        (None, Some(id)) => dataset
            .trajectory(id)
            .ok_or_else(|| Error::validation(format!("no trajectory '{id}' in the input")))?
            .clone(),
        (None, None) => {
            return Err(Error::Config("pass --query or --query-id".to_string()));
        }
    };
    let psi = settings.usize_or("psi", args.psi, trajdk::isolation::DEFAULT_PSI);
    let t = settings.usize_or("t", args.t, trajdk::isolation::DEFAULT_T);
    let tau = settings.f64_or("tau", args.tau, DEFAULT_TAU);
    let min_len = settings.usize_or("min_len", args.min_len, DEFAULT_MIN_LEN);
    let report = detect_subtraj(&normals, &query, psi, t, tau, min_len, seed)?;
    let payload = json!({
        "config": {
            "command": "subtraj", "psi": psi, "t": t, "tau": tau, "min_len": min_len,
            "seed": seed, "normals": normals.len(),
        },
        "query_id": report.query_id,
        "spans": report.spans.iter().map(|s| json!({"a": s.start, "b": s.end})).collect::<Vec<_>>(),
        "beta": report.beta,
        "tau": report.tau,
        "min_len": report.min_len,
    });
    let file = std::fs::File::create(&args.out)?;
    serde_json::to_writer_pretty(file, &payload).map_err(|e| Error::Io(e.into()))?;
    if let Some(points_path) = &args.points_csv {
        let mut anomalous = vec![false; query.len()];
        for span in &report.spans {
            for i in span.indices() {
                anomalous[i] = true;
            }
        }
        let mut w = csv::Writer::from_writer(std::fs::File::create(points_path)?);
        w.write_record(["index", "x", "y", "beta", "anomalous"])?;
        for (i, p) in query.points.iter().enumerate() {
            w.write_record([
                format!("{}", i + 1),
                format!("{}", p.coords[0]),
                format!("{}", p.coords.get(1).copied().unwrap_or(0.0)),
                format!("{}", report.beta[i]),
                format!("{}", u8::from(anomalous[i])),
            ])?;
        }
        w.flush()?;
    }
    if verbose {
        eprintln!("query {}: {} anomalous spans", report.query_id, report.spans.len());
    }
    Ok(())
}

fn cmd_mine(args: MineArgs, settings: &Settings, seed: u64, verbose: bool) -> Result<(), Error> {
    let mut dataset = load_input(&args.input, settings)?;
    if let Some(path) = &args.clusters {
        dataset.set_clusters(load_clusters(path)?)?;
    }
    let psi = settings.usize_or("psi", args.psi, trajdk::isolation::DEFAULT_PSI);
    let t = settings.usize_or("t", args.t, trajdk::isolation::DEFAULT_T);
    let gamma = settings.f64_or("gamma", args.gamma, 0.01);
    let min_len = settings.usize_or("min_len", args.min_len, trajdk::patterns::DEFAULT_MIN_LEN);
    let set = mine_patterns(&dataset, psi, t, gamma, min_len, seed)?;
    let (min_length, max_length) = set.length_range().unwrap_or((0.0, 0.0));
    let payload = json!({
        "config": {
            "command": "mine", "psi": psi, "t": t, "gamma": gamma, "min_len": min_len,
            "seed": seed,
        },
        "clusters": set.clusters.iter().map(|c| json!({
            "cluster": c.cluster,
            "representative_id": c.representative_id,
            "spans": c.spans.iter().map(|s| json!({"a": s.start, "b": s.end})).collect::<Vec<_>>(),
            "lengths": c.lengths,
        })).collect::<Vec<_>>(),
        "summary": {
            "fp_count": set.num_patterns(),
            "min_length": min_length,
            "max_length": max_length,
        },
    });
    let file = std::fs::File::create(&args.out)?;
    serde_json::to_writer_pretty(file, &payload).map_err(|e| Error::Io(e.into()))?;
    if verbose {
        eprintln!("mined {} patterns over {} clusters", set.num_patterns(), set.clusters.len());
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Error> {
    let scores = read_score_file(&args.scores)?;
    let labels = load_labels(&args.labels)?;
    let polarity = parse_polarity(&args.polarity)?;
    let ids: Vec<String> = scores.keys().cloned().collect();
    let ranking = ranking_from_scores(&scores, &ids, polarity)?;
    let auc = roc_auc(&ranking, &labels)?;
    println!("auc {auc}");
    Ok(())
}

fn cmd_bench(args: BenchArgs, settings: &Settings, seed: u64) -> Result<(), Error> {
    let sizes: Vec<usize> = args
        .sizes
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad size '{s}'")))
        })
        .collect::<Result<_, Error>>()?;
    let psi = settings.usize_or("psi", args.psi, 8);
    let t = settings.usize_or("t", args.t, trajdk::isolation::DEFAULT_T);
    let sigma = settings.f64_or("sigma", args.sigma, 1.0);
    let components = settings.usize_or(
        "components",
        args.components,
        trajdk::nystrom::DEFAULT_COMPONENTS,
    );
    let mut combined = BenchReport::default();
    for name in args.methods.split(',') {
        let method = match name.trim() {
            "ik-embed" => BenchMethod::IsolationEmbed { psi, t, seed },
            "nystrom-embed" => BenchMethod::NystromEmbed { components, sigma, seed },
            "dtw-matrix" => BenchMethod::DistanceMatrix(Measure::Dtw),
            "hausdorff-matrix" => BenchMethod::DistanceMatrix(Measure::Hausdorff),
            "frechet-matrix" => BenchMethod::DistanceMatrix(Measure::Frechet),
            other => return Err(Error::Config(format!("unknown bench method '{other}'"))),
        };
        let report = scaleup_bench(
            |n| synth::gen_cross_style(n, seed),
            &sizes,
            &method,
            args.repeats,
        )?;
        combined.rows.extend(report.rows);
    }
    let mut file = std::fs::File::create(&args.out)?;
    let config = json!({
        "command": "bench", "sizes": sizes, "methods": args.methods, "psi": psi, "t": t,
        "sigma": sigma, "components": components, "repeats": args.repeats, "seed": seed,
    });
    write_config_line(&mut file, &config)?;
    combined.save_csv(&mut file)?;
    for row in &combined.rows {
        println!("{} n={} prep {:.4}s detect {:.4}s", row.method, row.n, row.prep_secs, row.detect_secs);
    }
    Ok(())
}
