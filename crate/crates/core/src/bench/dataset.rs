use std::fs;
use std::path::{Path, PathBuf};

use crate::data::svmlight::{parse_svmlight, ParseOptions};
use crate::data::synthetic::BUNDLED;
use crate::data::{LabelMap, SparseDataset};
use crate::error::{Error, Result};

/// Environment variable naming the directory that holds downloaded datasets.
pub const DATA_DIR_ENV: &str = "SCSVM_DATA_DIR";

/// File name suffixes tried when a dataset is looked up by name.
const SUFFIXES: [&str; 4] = ["", ".svm", ".libsvm", ".txt"];

#[derive(Debug, Clone)]
pub enum DataSource {
    File(PathBuf),
    /// Built in memory by a deterministic generator.
    Generated(fn() -> SparseDataset<f64>),
}

#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub name: String,
    pub source: DataSource,
    /// Inferred from the labels present when absent.
    pub label_map: Option<LabelMap>,
    pub n_features: Option<usize>,
}

impl DatasetSpec {
    pub fn file(name: impl Into<String>, path: impl Into<PathBuf>) -> Self {
        Self {
            name: name.into(),
            source: DataSource::File(path.into()),
            label_map: None,
            n_features: None,
        }
    }

    pub fn generated(name: impl Into<String>, generate: fn() -> SparseDataset<f64>) -> Self {
        Self {
            name: name.into(),
            source: DataSource::Generated(generate),
            label_map: None,
            n_features: None,
        }
    }

    pub fn load(&self) -> Result<SparseDataset<f64>> {
        match &self.source {
            DataSource::Generated(generate) => Ok(generate()),
            DataSource::File(path) => {
                let opts = ParseOptions {
                    n_features: self.n_features,
                };
                let raw = parse_svmlight::<f64>(path, opts)?;
                match &self.label_map {
                    Some(map) => raw.remap(map),
                    None => raw.into_signed(),
                }
            }
        }
    }
}

/// The three small synthetic datasets shipped with the crate.
pub fn bundled_suite() -> Vec<DatasetSpec> {
    BUNDLED
        .iter()
        .map(|b| DatasetSpec::generated(b.name, b.generate))
        .collect()
}

/// The directory named by [`DATA_DIR_ENV`], if set.
pub fn data_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

/// Finds `name` under `dir`, trying the usual svmlight file suffixes.
pub fn find_in_dir(dir: &Path, name: &str) -> Option<PathBuf> {
    SUFFIXES
        .iter()
        .map(|suffix| dir.join(format!("{name}{suffix}")))
        .find(|p| p.is_file())
}

/// Turns a command-line dataset argument into a spec.
///
/// Bundled names win, then existing paths, then files in `dir`. Anything
/// else becomes a file spec that fails when loaded, so a benchmark can
/// record the failure and carry on.
pub fn resolve(arg: &str, dir: Option<&Path>) -> DatasetSpec {
    if let Some(b) = BUNDLED.iter().find(|b| b.name == arg) {
        return DatasetSpec::generated(b.name, b.generate);
    }
    let path = Path::new(arg);
    if path.is_file() {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| arg.to_string());
        return DatasetSpec::file(name, path);
    }
    let found = dir.and_then(|d| find_in_dir(d, arg));
    let fallback = dir.map_or_else(|| path.to_path_buf(), |d| d.join(arg));
    DatasetSpec::file(arg, found.unwrap_or(fallback))
}

/// Reads a manifest of `name path [label-map]` lines. Relative paths are
/// taken relative to the manifest's directory; `#` starts a comment.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<DatasetSpec>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new(".")))
}

pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<DatasetSpec>> {
    let mut specs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = content.split_whitespace().collect();
        let bad = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        match fields.as_slice() {
            [] => {}
            [name, file, rest @ ..] if rest.len() <= 1 => {
                let file = Path::new(file);
                let full = if file.is_absolute() {
                    file.to_path_buf()
                } else {
                    base.join(file)
                };
                let mut spec = DatasetSpec::file(*name, full);
                if let [map] = rest {
                    spec.label_map = Some(LabelMap::parse(map).map_err(|e| bad(e.to_string()))?);
                }
                specs.push(spec);
            }
            _ => return Err(bad(format!("expected `name path [label-map]`, got `{}`", content.trim()))),
        }
    }
    Ok(specs)
}
