//! The `scsvm` command-line interface.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use config::ConfigFile;

use crate::bench::{self, BenchConfig, BenchReport, DatasetSpec};
use crate::data::svmlight::{parse_svmlight, ParseOptions};
use crate::data::{train_test_split, LabelMap, SparseDataset};
use crate::error::{Error, Result};
use crate::eval::{self, DcdConfig};
use crate::linalg::CgConfig;
use crate::model::ModelTheta;
use crate::mpm::{mpm_train, MpmConfig, Sparsity, TrainReport};

#[derive(Debug, Parser)]
#[command(
    name = "scsvm",
    version,
    about = "Linear SVMs with a hard budget on margin violations",
    long_about = "Trains linear SVMs that allow at most s training samples inside or beyond \
                  the margin, using a majorization penalty method with conjugate-gradient \
                  subproblem solves.\n\nExit status: 0 on success, 1 on usage or I/O errors, \
                  2 when training stopped at the outer iteration cap."
)]
pub struct Cli {
    /// More log output (repeat for more detail); RUST_LOG also works.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    /// key = value file supplying defaults for any long flag; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write it with its JSON training report.
    Train(TrainArgs),
    /// Print a label and score for every sample.
    Predict(PredictArgs),
    /// Accuracy of a saved model on a labelled file.
    Eval(EvalArgs),
    /// Train over a grid of sparse ratios and emit one CSV row per cell.
    Bench(BenchArgs),
    /// Size and density of svmlight files.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TextFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// Fix the feature count instead of using the largest index in the file.
    #[arg(long, value_name = "M")]
    pub n_features: Option<usize>,

    /// Raw label mapping such as `2:1,4:-1` [default: inferred; {-1,1} kept,
    /// {0,1} sends 1 to +1, otherwise the smaller value becomes +1]
    #[arg(long, value_name = "MAP")]
    pub label_map: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Penalty parameter, held fixed across iterations [default: 0.4]
    #[arg(long)]
    pub rho: Option<f64>,

    /// Absolute threshold on the CG residual 2-norm [default: 1e-3]
    #[arg(long, value_name = "TOL")]
    pub cg_tol: Option<f64>,

    /// CG iteration cap per subproblem [default: 500]
    #[arg(long, value_name = "N")]
    pub cg_max_iter: Option<usize>,

    /// Feature counts below this use a direct Cholesky solve [default: 100]
    #[arg(long, value_name = "M")]
    pub dense_threshold: Option<usize>,

    /// Outer iteration cap [default: 1000]
    #[arg(long, value_name = "N")]
    pub max_outer: Option<usize>,

    /// Objective progress threshold is sqrt(n) times this [default: 1e-3]
    #[arg(long, value_name = "TOL")]
    pub f_tol_factor: Option<f64>,

    /// Threshold on 2p(θ)/‖θ‖² [default: 1e-3]
    #[arg(long, value_name = "TOL")]
    pub p_tol: Option<f64>,

    /// Start each CG solve from the previous iterate instead of zero
    #[arg(long)]
    pub warm_start: bool,

    /// Multiply rho by this factor after every outer step [default: off]
    #[arg(long, value_name = "FACTOR")]
    pub rho_growth: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training data: an svmlight path, a bundled dataset name, or a name
    /// looked up in the data directory.
    #[arg(long, value_name = "PATH")]
    pub data: String,

    /// Directory searched when --data is a bare name.
    #[arg(long, env = bench::DATA_DIR_ENV, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,

    /// Sparse ratio in [0, 1]; the budget is s = round(sr * n) [default: 0.1]
    #[arg(long, conflicts_with = "s")]
    pub sr: Option<f64>,

    /// Budget on the number of margin violations, instead of --sr.
    #[arg(long)]
    pub s: Option<usize>,

    /// Hold out this fraction for testing before training [default: train on all]
    #[arg(long, value_name = "F")]
    pub test_fraction: Option<f64>,

    /// Seed for the hold-out split [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,

    /// Where to write the model.
    #[arg(long, value_name = "PATH", default_value = "scsvm.model")]
    pub model: PathBuf,

    /// Where to write the JSON training report [default: <model>.report.json]
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "text")]
    pub format: TextFormat,

    #[command(flatten)]
    pub data_args: DataArgs,

    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,

    /// Samples in svmlight format; labels are read but ignored.
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,

    /// Write predictions here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,

    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,

    #[arg(long, value_name = "MAP")]
    pub label_map: Option<String>,

    #[arg(long, value_enum, default_value = "text")]
    pub format: TextFormat,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Bundled dataset names, svmlight paths, or names looked up in the data
    /// directory [default: the bundled suite]
    pub datasets: Vec<String>,

    /// File of `name path [label-map]` lines, added after positional datasets.
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    /// Directory searched for datasets given by name.
    #[arg(long, env = bench::DATA_DIR_ENV, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,

    /// Comma-separated sparse ratios [default: 0.01,0.05,0.1,0.15,0.25,0.5]
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub sr_grid: Option<Vec<f64>>,

    /// Held-out fraction per dataset [default: 0.2]
    #[arg(long, value_name = "F")]
    pub test_fraction: Option<f64>,

    /// Seed for the splits and the baseline's coordinate order [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,

    /// Also train the L1-loss dual coordinate descent baseline.
    #[arg(long)]
    pub compare_dcd: bool,

    /// Baseline hinge-loss weight [default: 1]
    #[arg(long, value_name = "C")]
    pub dcd_c: Option<f64>,

    /// Baseline projected-gradient tolerance [default: 0.1]
    #[arg(long, value_name = "TOL")]
    pub dcd_eps: Option<f64>,

    /// Baseline epoch cap [default: 1000]
    #[arg(long, value_name = "N")]
    pub dcd_max_epochs: Option<usize>,

    /// Worker threads, 0 for one per core [default: 1, for stable timings]
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,

    /// Write the table here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,

    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(required = true, value_name = "PATH")]
    pub data: Vec<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,

    #[command(flatten)]
    pub data_args: DataArgs,
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    NotConverged,
    Failed,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        match s {
            Status::Success => ExitCode::SUCCESS,
            Status::Failed => ExitCode::from(1),
            Status::NotConverged => ExitCode::from(2),
        }
    }
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, S>(args: I) -> ExitCode
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_logging(cli.verbose);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(status) => status.into(),
        // a closed pipe (e.g. `| head`) is not a failure of the command
        Err(Error::Io { source, .. }) if source.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Status> {
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match &cli.command {
        Command::Train(args) => cmd_train(args, &config, out),
        Command::Predict(args) => cmd_predict(args, out),
        Command::Eval(args) => cmd_eval(args, out),
        Command::Bench(args) => cmd_bench(args, &config, out),
        Command::Stats(args) => cmd_stats(args, &config, out),
    }
}

fn solver_config(args: &SolverArgs, config: &ConfigFile) -> Result<MpmConfig<f64>> {
    let d = MpmConfig::<f64>::default();
    let rho_growth = config.pick_opt(args.rho_growth, "rho-growth")?;
    let cfg = MpmConfig {
        rho: config.pick(args.rho, "rho", d.rho)?,
        sparsity: d.sparsity,
        f_tol_factor: config.pick(args.f_tol_factor, "f-tol-factor", d.f_tol_factor)?,
        p_tol: config.pick(args.p_tol, "p-tol", d.p_tol)?,
        max_outer: config.pick(args.max_outer, "max-outer", d.max_outer)?,
        cg: CgConfig {
            tol: config.pick(args.cg_tol, "cg-tol", d.cg.tol)?,
            max_iter: config.pick(args.cg_max_iter, "cg-max-iter", d.cg.max_iter)?,
        },
        dense_threshold: config.pick(args.dense_threshold, "dense-threshold", d.dense_threshold)?,
        warm_start: args.warm_start || config.get("warm-start")?.unwrap_or(false),
        rho_growth,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn sparsity(args: &TrainArgs, config: &ConfigFile) -> Result<Sparsity> {
    match (args.sr, args.s) {
        (Some(sr), _) => Ok(Sparsity::Ratio(sr)),
        (None, Some(s)) => Ok(Sparsity::Count(s)),
        (None, None) => match (config.get::<f64>("sr")?, config.get::<usize>("s")?) {
            (Some(_), Some(_)) => Err(Error::invalid("config file sets both sr and s")),
            (Some(sr), None) => Ok(Sparsity::Ratio(sr)),
            (None, Some(s)) => Ok(Sparsity::Count(s)),
            (None, None) => Ok(Sparsity::Ratio(0.10)),
        },
    }
}

fn label_map(flag: Option<&str>, config: &ConfigFile) -> Result<Option<LabelMap>> {
    flag.or_else(|| config.get_str("label-map"))
        .map(LabelMap::parse)
        .transpose()
}

fn load_dataset(
    path: &Path,
    n_features: Option<usize>,
    map: Option<&LabelMap>,
) -> Result<SparseDataset<f64>> {
    let raw = parse_svmlight::<f64>(path, ParseOptions { n_features })?;
    match map {
        Some(map) => raw.remap(map),
        None => raw.into_signed(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out).map_err(|e| Error::io("<stdout>", e))
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    model: &'a Path,
    report: &'a Path,
    n: usize,
    m: usize,
    s: usize,
    sr_pct: f64,
    k: usize,
    cg: usize,
    time_s: f64,
    converged: bool,
    train_accuracy_pct: f64,
    train_margin_violations: usize,
    test_accuracy_pct: Option<f64>,
}

fn cmd_train(args: &TrainArgs, config: &ConfigFile, out: &mut dyn Write) -> Result<Status> {
    let mut mpm_cfg = solver_config(&args.solver, config)?;
    mpm_cfg.sparsity = sparsity(args, config)?;
    let n_features = config.pick_opt(args.data_args.n_features, "n-features")?;
    let map = label_map(args.data_args.label_map.as_deref(), config)?;
    let mut spec = bench::resolve(&args.data, args.data_dir.as_deref());
    spec.label_map = map;
    spec.n_features = n_features;
    let ds = spec.load()?;

    let (train, test) = match config.pick_opt(args.test_fraction, "test-fraction")? {
        Some(f) => {
            let seed = config.pick(args.seed, "seed", 42)?;
            let (tr, te) = train_test_split(&ds, f, seed)?;
            (tr, Some(te))
        }
        None => (ds, None),
    };

    let (model, report) = mpm_train(&train, &mpm_cfg)?;
    model.save(&args.model)?;
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| with_suffix(&args.model, ".report.json"));
    write_report(&report, &report_path)?;

    let summary = TrainSummary {
        model: &args.model,
        report: &report_path,
        n: report.n,
        m: report.m,
        s: report.s,
        sr_pct: 100.0 * report.s as f64 / report.n as f64,
        k: report.outer_iters,
        cg: report.total_cg,
        time_s: report.wall_time_s,
        converged: report.converged(),
        train_accuracy_pct: eval::accuracy(&model, &train)?,
        train_margin_violations: eval::train_misclassified_count(&model, &train)?,
        test_accuracy_pct: test.as_ref().map(|t| eval::accuracy(&model, t)).transpose()?,
    };
    match args.format {
        TextFormat::Json => write_json(&summary, out)?,
        TextFormat::Text => print_train_summary(&summary, &report, out).map_err(stdout_err)?,
    }
    if report.converged() {
        Ok(Status::Success)
    } else {
        log::warn!("stopped at the outer iteration cap without meeting the stopping rule");
        Ok(Status::NotConverged)
    }
}

fn print_train_summary(s: &TrainSummary<'_>, report: &TrainReport, out: &mut dyn Write) -> std::io::Result<()> {
    let solver = match report.solver {
        crate::mpm::SolverPath::Dense => "direct",
        crate::mpm::SolverPath::ConjugateGradient => "conjugate gradient",
    };
    writeln!(out, "samples {}  features {}  budget s = {} ({:.2}%)", s.n, s.m, s.s, s.sr_pct)?;
    writeln!(
        out,
        "k = {}  cg = {}  time = {:.4} s  solver: {}  {}",
        s.k,
        s.cg,
        s.time_s,
        solver,
        if s.converged { "converged" } else { "NOT converged" }
    )?;
    writeln!(
        out,
        "train accuracy {:.4}%  margin violations {}",
        s.train_accuracy_pct, s.train_margin_violations
    )?;
    if let Some(acc) = s.test_accuracy_pct {
        writeln!(out, "test accuracy {acc:.4}%")?;
    }
    writeln!(out, "model written to {}", s.model.display())?;
    writeln!(out, "report written to {}", s.report.display())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_report(report: &TrainReport, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Reads labelled data whose feature count must match the model.
fn load_for_model(model: &ModelTheta<f64>, path: &Path, map: Option<&LabelMap>) -> Result<SparseDataset<f64>> {
    let raw = parse_svmlight::<f64>(path, ParseOptions::default())?;
    if raw.features.ncols() > model.m() {
        return Err(Error::DimensionMismatch {
            expected: model.m(),
            found: raw.features.ncols(),
        });
    }
    let ds = match map {
        Some(map) => raw.remap(map)?,
        None => raw.into_signed()?,
    };
    ds.with_feature_count(model.m())
}

#[derive(Serialize)]
struct PredictionOut {
    label: i8,
    score: f64,
}

fn cmd_predict(args: &PredictArgs, out: &mut dyn Write) -> Result<Status> {
    let model = ModelTheta::<f64>::load(&args.model)?;
    let raw = parse_svmlight::<f64>(&args.data, ParseOptions::default())?;
    let x = &raw.features;
    let preds = (0..x.nrows())
        .map(|i| {
            let (cols, vals) = x.row(i);
            eval::predict(&model, cols, vals).map(|p| PredictionOut {
                label: p.label.as_i8(),
                score: p.score,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut file;
    let sink: &mut dyn Write = match &args.out {
        Some(path) => {
            file = create(path)?;
            &mut file
        }
        None => out,
    };
    match args.format {
        TableFormat::Json => write_json(&preds, sink)?,
        TableFormat::Csv => {
            writeln!(sink, "label,score").map_err(stdout_err)?;
            for p in &preds {
                writeln!(sink, "{},{}", p.label, p.score).map_err(stdout_err)?;
            }
        }
    }
    sink.flush().map_err(stdout_err)?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct EvalSummary {
    n: usize,
    accuracy_pct: f64,
    error_rate_pct: f64,
    misclassified: usize,
    margin_violations: usize,
}

fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<Status> {
    let model = ModelTheta::<f64>::load(&args.model)?;
    let map = args.label_map.as_deref().map(LabelMap::parse).transpose()?;
    let ds = load_for_model(&model, &args.data, map.as_ref())?;
    let correct = eval::correct_count(&model, &ds)?;
    let accuracy = eval::accuracy(&model, &ds)?;
    let summary = EvalSummary {
        n: ds.n(),
        accuracy_pct: accuracy,
        error_rate_pct: 100.0 - accuracy,
        misclassified: ds.n() - correct,
        margin_violations: eval::train_misclassified_count(&model, &ds)?,
    };
    match args.format {
        TextFormat::Json => write_json(&summary, out)?,
        TextFormat::Text => writeln!(
            out,
            "accuracy {:.4}%  misclassified {} of {}  margin violations {}",
            summary.accuracy_pct, summary.misclassified, summary.n, summary.margin_violations
        )
        .map_err(stdout_err)?,
    }
    Ok(Status::Success)
}

fn cmd_bench(args: &BenchArgs, config: &ConfigFile, out: &mut dyn Write) -> Result<Status> {
    let d = BenchConfig::default();
    let dcd_default = DcdConfig::<f64>::default();
    let seed = config.pick(args.seed, "seed", d.seed)?;
    let dcd = args.compare_dcd.then_some(()).map(|_| -> Result<DcdConfig<f64>> {
        Ok(DcdConfig {
            c: config.pick(args.dcd_c, "dcd-c", dcd_default.c)?,
            eps: config.pick(args.dcd_eps, "dcd-eps", dcd_default.eps)?,
            max_epochs: config.pick(args.dcd_max_epochs, "dcd-max-epochs", dcd_default.max_epochs)?,
            seed,
        })
    });
    let cfg = BenchConfig {
        sr_grid: args.sr_grid.clone().unwrap_or(d.sr_grid),
        test_fraction: config.pick(args.test_fraction, "test-fraction", d.test_fraction)?,
        seed,
        mpm: solver_config(&args.solver, config)?,
        dcd: dcd.transpose()?,
        jobs: config.pick(args.jobs, "jobs", d.jobs)?,
    };

    let mut specs: Vec<DatasetSpec> = args
        .datasets
        .iter()
        .map(|name| bench::resolve(name, args.data_dir.as_deref()))
        .collect();
    if let Some(manifest) = &args.manifest {
        specs.extend(bench::read_manifest(manifest)?);
    }
    if specs.is_empty() {
        specs = bench::bundled_suite();
    }

    let rows = bench::run_benchmark(&specs, &cfg)?;
    let mut file;
    let sink: &mut dyn Write = match &args.out {
        Some(path) => {
            file = create(path)?;
            &mut file
        }
        None => out,
    };
    match args.format {
        TableFormat::Csv => bench::write_csv(&rows, cfg.dcd.is_some(), &mut *sink).map_err(stdout_err)?,
        TableFormat::Json => write_json(&BenchReport::new(&cfg, &rows), sink)?,
    }
    sink.flush().map_err(stdout_err)?;

    for row in rows.iter().filter(|r| r.is_failed()) {
        eprintln!(
            "failed: {} at SR {}: {}",
            row.dataset,
            bench::format_sr(row.sr),
            row.error.as_deref().unwrap_or("")
        );
    }
    Ok(if rows.iter().any(|r| r.is_failed()) {
        Status::Failed
    } else if rows.iter().any(|r| r.converged == Some(false)) {
        Status::NotConverged
    } else {
        Status::Success
    })
}

#[derive(Serialize)]
struct NamedStats {
    name: String,
    #[serde(flatten)]
    stats: crate::data::DatasetStats,
}

fn cmd_stats(args: &StatsArgs, config: &ConfigFile, out: &mut dyn Write) -> Result<Status> {
    let n_features = config.pick_opt(args.data_args.n_features, "n-features")?;
    let map = label_map(args.data_args.label_map.as_deref(), config)?;
    let mut all = Vec::new();
    for path in &args.data {
        let ds = load_dataset(path, n_features, map.as_ref())?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        all.push(NamedStats {
            name,
            stats: ds.stats(),
        });
    }
    match args.format {
        TableFormat::Json => write_json(&all, out)?,
        TableFormat::Csv => {
            writeln!(out, "{}", crate::data::DatasetStats::CSV_HEADER).map_err(stdout_err)?;
            for s in &all {
                writeln!(out, "{}", s.stats.csv_row(&s.name)).map_err(stdout_err)?;
            }
        }
    }
    Ok(Status::Success)
}
