//! Reading and writing the svmlight / libsvm text format.
//!
//! Each line is `label index:value index:value ...` with 1-based, strictly
//! increasing feature indices. Text after `#` is ignored, as are blank lines.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{CsrMatrix, RawDataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Fixes the feature count instead of using the largest index seen.
    /// Lets train and test files with different maximal indices line up.
    pub n_features: Option<usize>,
}

pub fn parse_svmlight<T: Scalar>(path: impl AsRef<Path>, opts: ParseOptions) -> Result<RawDataset<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_svmlight(BufReader::new(file), opts).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_svmlight<T: Scalar, R: BufRead>(reader: R, opts: ParseOptions) -> Result<RawDataset<T>> {
    let mut labels = Vec::new();
    let mut row_ptr = vec![0usize];
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    let mut max_index = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<input>", e))?;
        let lineno = lineno + 1;
        let content = line.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let parse_err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let label: f64 = label_tok
            .parse()
            .ok()
            .filter(|l: &f64| l.is_finite())
            .ok_or_else(|| parse_err(format!("invalid label `{label_tok}`")))?;

        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(format!("expected index:value, got `{tok}`")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(format!("invalid feature index `{idx}`")))?;
            if idx == 0 {
                return Err(parse_err("feature indices are 1-based".into()));
            }
            if idx <= prev {
                return Err(parse_err(format!(
                    "feature index {idx} does not increase (previous {prev})"
                )));
            }
            let val: T = val
                .parse()
                .ok()
                .filter(|v: &T| v.is_finite())
                .ok_or_else(|| parse_err(format!("invalid feature value `{val}`")))?;
            prev = idx;
            col_idx.push(idx - 1);
            values.push(val);
        }
        max_index = max_index.max(prev);
        labels.push(label);
        row_ptr.push(col_idx.len());
    }

    if labels.is_empty() {
        return Err(Error::Empty);
    }
    let m = match opts.n_features {
        Some(m) if m < max_index => {
            return Err(Error::invalid(format!(
                "data uses feature index {max_index} but the feature count is fixed to {m}"
            )))
        }
        Some(m) => m,
        None => max_index,
    };
    let features = CsrMatrix::try_new(labels.len(), m, row_ptr, col_idx, values)?;
    Ok(RawDataset { features, labels })
}

/// Writes in svmlight format using shortest round-trip number formatting,
/// so that reading the output back reproduces the dataset exactly.
pub fn write_svmlight<T: Scalar, W: Write>(ds: &RawDataset<T>, mut out: W) -> std::io::Result<()> {
    for (i, label) in ds.labels.iter().enumerate() {
        write!(out, "{label}")?;
        let (cols, vals) = ds.features.row(i);
        for (&j, v) in cols.iter().zip(vals) {
            write!(out, " {}:{}", j + 1, v)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn save_svmlight<T: Scalar>(ds: &RawDataset<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_svmlight(ds, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<RawDataset<f64>> {
        read_svmlight(text.as_bytes(), ParseOptions::default())
    }

    #[test]
    fn reads_one_line() {
        let ds = read("1 1:0.5 3:-2\n").unwrap();
        assert_eq!(ds.labels, vec![1.0]);
        assert_eq!(ds.features.row(0), (&[0usize, 2][..], &[0.5, -2.0][..]));
        assert_eq!(ds.features.ncols(), 3);
    }

    #[test]
    fn keeps_raw_labels_and_skips_comments() {
        let ds = read("# header\n2 1:1\n\n+4 2:1 # trailing\n").unwrap();
        assert_eq!(ds.labels, vec![2.0, 4.0]);
        assert_eq!(ds.features.nrows(), 2);
    }

    #[test]
    fn sample_without_features() {
        let ds = read("-1\n1 2:3\n").unwrap();
        assert_eq!(ds.features.row(0).0.len(), 0);
        assert_eq!(ds.features.ncols(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        for (text, line) in [
            ("1 1:1\n1 2:x\n", 2),
            ("1 3:1 2:1\n", 1),
            ("1 1:1\n\n1 2:1 2:4\n", 3),
            ("abc 1:1\n", 1),
            ("1 0:1\n", 1),
            ("1 1\n", 1),
            ("1 1:nan\n", 1),
        ] {
            match read(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: expected parse error, got {other:?}"),
            }
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(read(""), Err(Error::Empty)));
        assert!(matches!(read("# nothing\n\n"), Err(Error::Empty)));
    }

    #[test]
    fn feature_count_override() {
        let opts = ParseOptions {
            n_features: Some(10),
        };
        let ds: RawDataset<f64> = read_svmlight("1 2:1\n".as_bytes(), opts).unwrap();
        assert_eq!(ds.features.ncols(), 10);
        let small = ParseOptions {
            n_features: Some(1),
        };
        assert!(read_svmlight::<f64, _>("1 2:1\n".as_bytes(), small).is_err());
    }

    #[test]
    fn writes_what_it_reads() {
        let text = "1 1:0.1 7:-3.25e-7\n-1 2:12345.678\n";
        let ds = read(text).unwrap();
        let mut buf = Vec::new();
        write_svmlight(&ds, &mut buf).unwrap();
        assert_eq!(read(std::str::from_utf8(&buf).unwrap()).unwrap(), ds);
    }
}
