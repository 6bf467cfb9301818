//! Benchmark harness: train over a grid of sparse ratios on each dataset and
//! report iterations, CG work, time and held-out accuracy.

mod dataset;
pub mod reference;

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use dataset::{
    bundled_suite, data_dir, find_in_dir, parse_manifest, read_manifest, resolve, DataSource,
    DatasetSpec, DATA_DIR_ENV,
};

use crate::data::{train_test_split, SparseDataset};
use crate::error::{Error, Result};
use crate::eval::{accuracy, dcd_train, train_misclassified_count, DcdConfig};
use crate::mpm::{mpm_train, MpmConfig, Sparsity, TrainReport};

/// Sparse ratios swept by default.
pub const DEFAULT_SR_GRID: [f64; 6] = [0.01, 0.05, 0.10, 0.15, 0.25, 0.50];

pub const CSV_HEADER: &str = "dataset,sr,k,cg,time_s,accuracy_pct,train_misclassified,s";
const DCD_CSV_HEADER: &str = ",dcd_time_s,dcd_accuracy_pct";

#[derive(Debug, Clone, Serialize)]
pub struct BenchConfig {
    pub sr_grid: Vec<f64>,
    pub test_fraction: f64,
    pub seed: u64,
    /// Its sparsity field is replaced by each grid entry.
    pub mpm: MpmConfig<f64>,
    /// Also train the hinge-loss baseline on every dataset.
    pub dcd: Option<DcdConfig<f64>>,
    /// Worker threads; 0 lets the thread pool decide.
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sr_grid: DEFAULT_SR_GRID.to_vec(),
            test_fraction: 0.2,
            seed: 42,
            mpm: MpmConfig::default(),
            dcd: None,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcdColumns {
    pub time_s: f64,
    pub accuracy_pct: f64,
    pub epochs: usize,
    pub converged: bool,
}

/// One `(dataset, SR)` cell. Measurement fields are `None` when the row failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub dataset: String,
    pub sr: f64,
    pub s: Option<usize>,
    pub k: Option<usize>,
    pub cg: Option<usize>,
    pub time_s: Option<f64>,
    pub accuracy_pct: Option<f64>,
    pub train_misclassified: Option<usize>,
    pub converged: Option<bool>,
    pub dcd: Option<DcdColumns>,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<TrainReport>,
}

impl BenchmarkRow {
    fn failed(dataset: &str, sr: f64, err: &Error) -> Self {
        Self {
            dataset: dataset.to_string(),
            sr,
            s: None,
            k: None,
            cg: None,
            time_s: None,
            accuracy_pct: None,
            train_misclassified: None,
            converged: None,
            dcd: None,
            error: Some(err.to_string()),
            report: None,
        }
    }

    pub fn is_failed(&self) -> bool {
        self.error.is_some()
    }

    /// The CSV line, with or without the baseline columns.
    pub fn csv_line(&self, with_dcd: bool) -> String {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|v| v.to_string()).unwrap_or_default()
        }
        let mut line = format!(
            "{},{},{},{},{},{},{},{}",
            self.dataset,
            format_sr(self.sr),
            opt(self.k),
            opt(self.cg),
            opt(self.time_s.map(|t| format!("{t:.4}"))),
            opt(self.accuracy_pct.map(|a| format!("{a:.4}"))),
            opt(self.train_misclassified),
            opt(self.s),
        );
        if with_dcd {
            let d = self.dcd.as_ref();
            line.push_str(&format!(
                ",{},{}",
                opt(d.map(|d| format!("{:.4}", d.time_s))),
                opt(d.map(|d| format!("{:.4}", d.accuracy_pct))),
            ));
        }
        line
    }
}

/// A sparse ratio as a percentage, e.g. `0.1` becomes `10%`.
pub fn format_sr(sr: f64) -> String {
    let pct = (sr * 100.0 * 1e6).round() / 1e6;
    format!("{pct}%")
}

pub fn csv_header(with_dcd: bool) -> String {
    if with_dcd {
        format!("{CSV_HEADER}{DCD_CSV_HEADER}")
    } else {
        CSV_HEADER.to_string()
    }
}

pub fn write_csv<W: Write>(rows: &[BenchmarkRow], with_dcd: bool, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", csv_header(with_dcd))?;
    for row in rows {
        writeln!(out, "{}", row.csv_line(with_dcd))?;
    }
    Ok(())
}

/// The full JSON document: configuration, rows with their training
/// histories, and published numbers for recognised dataset names.
#[derive(Debug, Serialize)]
pub struct BenchReport<'a> {
    pub config: &'a BenchConfig,
    pub rows: &'a [BenchmarkRow],
    pub published: Vec<&'static reference::PublishedDataset>,
}

impl<'a> BenchReport<'a> {
    pub fn new(config: &'a BenchConfig, rows: &'a [BenchmarkRow]) -> Self {
        let mut published: Vec<_> = rows
            .iter()
            .filter_map(|r| reference::lookup(&r.dataset))
            .collect();
        published.dedup_by_key(|d| d.name);
        Self {
            config,
            rows,
            published,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(&sr) = self.sr_grid.iter().find(|&&sr| !(0.0..=1.0).contains(&sr)) {
            return Err(Error::invalid(format!("sparse ratio {sr} is outside [0, 1]")));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::invalid("test fraction must lie strictly between 0 and 1"));
        }
        self.mpm.validate()
    }
}

struct Prepared {
    train: SparseDataset<f64>,
    test: SparseDataset<f64>,
    dcd: Option<DcdColumns>,
}

fn prepare(spec: &DatasetSpec, cfg: &BenchConfig) -> Result<Prepared> {
    let ds = spec.load()?;
    let (train, test) = train_test_split(&ds, cfg.test_fraction, cfg.seed)?;
    let dcd = match &cfg.dcd {
        Some(dcd_cfg) => {
            let start = Instant::now();
            let out = dcd_train(&train, dcd_cfg)?;
            let time_s = start.elapsed().as_secs_f64();
            Some(DcdColumns {
                time_s,
                accuracy_pct: accuracy(&out.model, &test)?,
                epochs: out.epochs,
                converged: out.converged,
            })
        }
        None => None,
    };
    Ok(Prepared { train, test, dcd })
}

fn run_cell(name: &str, sr: f64, data: &Prepared, cfg: &BenchConfig) -> Result<BenchmarkRow> {
    let mpm_cfg = cfg.mpm.clone().with_sparsity(Sparsity::Ratio(sr));
    let start = Instant::now();
    let (model, report) = mpm_train(&data.train, &mpm_cfg)?;
    let time_s = start.elapsed().as_secs_f64();
    Ok(BenchmarkRow {
        dataset: name.to_string(),
        sr,
        s: Some(report.s),
        k: Some(report.outer_iters),
        cg: Some(report.total_cg),
        time_s: Some(time_s),
        accuracy_pct: Some(accuracy(&model, &data.test)?),
        train_misclassified: Some(train_misclassified_count(&model, &data.train)?),
        converged: Some(report.converged()),
        dcd: data.dcd.clone(),
        error: None,
        report: Some(report),
    })
}

/// One row per `(dataset, SR)` in input order. A dataset that cannot be
/// loaded or split produces failed rows; the rest still run.
pub fn run_benchmark(datasets: &[DatasetSpec], cfg: &BenchConfig) -> Result<Vec<BenchmarkRow>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| {
        let prepared: Vec<Result<Prepared>> = datasets
            .par_iter()
            .map(|spec| {
                prepare(spec, cfg).inspect_err(|e| log::error!("{}: {e}", spec.name))
            })
            .collect();
        let cells: Vec<(usize, f64)> = (0..datasets.len())
            .flat_map(|d| cfg.sr_grid.iter().map(move |&sr| (d, sr)))
            .collect();
        cells
            .par_iter()
            .map(|&(d, sr)| {
                let name = &datasets[d].name;
                let outcome = match &prepared[d] {
                    Ok(data) => run_cell(name, sr, data, cfg),
                    Err(e) => return BenchmarkRow::failed(name, sr, e),
                };
                outcome.unwrap_or_else(|e| {
                    log::error!("{name} at SR {}: {e}", format_sr(sr));
                    BenchmarkRow::failed(name, sr, &e)
                })
            })
            .collect()
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn without_time(csv: &str) -> Vec<String> {
        csv.lines()
            .map(|l| {
                // drop both timing columns
                let f: Vec<&str> = l.split(',').collect();
                let kept: Vec<&str> = f
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != 4 && *i != 8)
                    .map(|(_, v)| *v)
                    .collect();
                kept.join(",")
            })
            .collect()
    }

    #[test]
    fn sr_formatting() {
        assert_eq!(format_sr(0.1), "10%");
        assert_eq!(format_sr(0.01), "1%");
        assert_eq!(format_sr(0.125), "12.5%");
        assert_eq!(format_sr(0.0), "0%");
    }

    #[test]
    fn empty_dataset_list() {
        assert!(run_benchmark(&[], &BenchConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn missing_file_fails_only_its_rows() {
        let specs = vec![
            DatasetSpec::file("missing", "/nonexistent/file.svm"),
            bundled_suite().remove(0),
        ];
        let cfg = BenchConfig {
            sr_grid: vec![0.05, 0.1],
            ..BenchConfig::default()
        };
        let rows = run_benchmark(&specs, &cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[..2].iter().all(BenchmarkRow::is_failed));
        assert!(rows[2..].iter().all(|r| !r.is_failed()));
        assert_eq!(rows[0].csv_line(false), "missing,5%,,,,,,");
    }

    #[test]
    fn csv_is_deterministic_apart_from_time() {
        let cfg = BenchConfig {
            sr_grid: vec![0.01, 0.5],
            dcd: Some(DcdConfig::default()),
            jobs: 2,
            ..BenchConfig::default()
        };
        let render = || {
            let rows = run_benchmark(&bundled_suite()[..2], &cfg).unwrap();
            let mut buf = Vec::new();
            write_csv(&rows, true, &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let (a, b) = (render(), render());
        assert!(a.starts_with("dataset,sr,k,cg,time_s,accuracy_pct,train_misclassified,s,dcd_time_s,dcd_accuracy_pct\n"));
        assert_eq!(without_time(&a), without_time(&b));
    }

    #[test]
    fn invalid_grid_is_rejected() {
        let cfg = BenchConfig {
            sr_grid: vec![10.0],
            ..BenchConfig::default()
        };
        assert!(run_benchmark(&bundled_suite(), &cfg).is_err());
    }
}
