//! Linear model `θ = [ω; b]` and its text serialization.
//!
//! The on-disk format is a header line `m b` followed by one `index value`
//! line per nonzero weight, with 1-based indices as in svmlight files.
//! Numbers use shortest round-trip formatting, so save/load is bit-exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Weights and bias stacked into one vector of length `m + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTheta<T> {
    theta: Vec<T>,
}

impl<T: Scalar> ModelTheta<T> {
    pub fn zeros(m: usize) -> Self {
        Self {
            theta: vec![T::zero(); m + 1],
        }
    }

    pub fn new(omega: Vec<T>, bias: T) -> Result<Self> {
        let mut theta = omega;
        theta.push(bias);
        Self::from_stacked(theta)
    }

    pub fn from_stacked(theta: Vec<T>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::invalid("model vector must contain the bias"));
        }
        if !crate::scalar::all_finite(&theta) {
            return Err(Error::NonFinite("model"));
        }
        Ok(Self { theta })
    }

    /// Number of features.
    pub fn m(&self) -> usize {
        self.theta.len() - 1
    }

    pub fn omega(&self) -> &[T] {
        &self.theta[..self.m()]
    }

    pub fn bias(&self) -> T {
        self.theta[self.m()]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.theta
    }

    pub fn into_vec(self) -> Vec<T> {
        self.theta
    }

    /// `ωᵀx + b` for a sparse sample given as zero-based indices and values.
    pub fn score(&self, cols: &[usize], vals: &[T]) -> T {
        let w = self.omega();
        cols.iter()
            .zip(vals)
            .fold(self.bias(), |acc, (&j, &v)| acc + w[j] * v)
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.m(), self.bias())?;
        for (j, w) in self.omega().iter().enumerate() {
            if *w != T::zero() {
                writeln!(out, "{} {}", j + 1, w)?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Model("missing header".into()))?
            .map_err(|e| Error::io("<model>", e))?;
        let mut tok = header.split_whitespace();
        let (m, b) = match (tok.next(), tok.next(), tok.next()) {
            (Some(m), Some(b), None) => (m, b),
            _ => return Err(Error::Model(format!("bad header `{header}`"))),
        };
        let m: usize = m
            .parse()
            .map_err(|_| Error::Model(format!("bad feature count `{m}`")))?;
        let b: T = b
            .parse()
            .map_err(|_| Error::Model(format!("bad bias `{b}`")))?;
        let mut omega = vec![T::zero(); m];
        let mut seen = vec![false; m];
        for (k, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io("<model>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Model(format!("bad weight line {}: `{line}`", k + 2));
            let mut tok = line.split_whitespace();
            let (idx, val) = match (tok.next(), tok.next(), tok.next()) {
                (Some(i), Some(v), None) => (i, v),
                _ => return Err(bad()),
            };
            let idx: usize = idx.parse().map_err(|_| bad())?;
            let val: T = val.parse().map_err(|_| bad())?;
            if idx == 0 || idx > m || seen[idx - 1] {
                return Err(bad());
            }
            seen[idx - 1] = true;
            omega[idx - 1] = val;
        }
        Self::new(omega, b)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }
}
