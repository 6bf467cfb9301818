//! Prediction, scoring, and a dual coordinate descent baseline for the
//! hinge-loss SVM.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Label, SparseDataset};
use crate::error::{Error, Result};
use crate::model::ModelTheta;
use crate::scalar::{norm_sq, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    /// `ωᵀx + b`
    pub score: T,
    /// Positive iff `score >= 0`.
    pub label: Label,
}

/// Classifies one sparse sample given by zero-based indices and values.
pub fn predict<T: Scalar>(model: &ModelTheta<T>, cols: &[usize], vals: &[T]) -> Result<Prediction<T>> {
    if let Some(&j) = cols.iter().find(|&&j| j >= model.m()) {
        return Err(Error::DimensionMismatch {
            expected: model.m(),
            found: j + 1,
        });
    }
    let score = model.score(cols, vals);
    Ok(Prediction {
        score,
        label: Label::from_score(score),
    })
}

fn check_model<T: Scalar>(model: &ModelTheta<T>, ds: &SparseDataset<T>) -> Result<()> {
    if model.m() != ds.m() {
        return Err(Error::DimensionMismatch {
            expected: ds.m(),
            found: model.m(),
        });
    }
    Ok(())
}

pub fn predict_dataset<T: Scalar>(model: &ModelTheta<T>, ds: &SparseDataset<T>) -> Result<Vec<Prediction<T>>> {
    check_model(model, ds)?;
    (0..ds.n())
        .map(|i| {
            let (cols, vals) = ds.features().row(i);
            predict(model, cols, vals)
        })
        .collect()
}

/// Number of samples whose predicted label matches.
pub fn correct_count<T: Scalar>(model: &ModelTheta<T>, ds: &SparseDataset<T>) -> Result<usize> {
    Ok(predict_dataset(model, ds)?
        .iter()
        .zip(ds.labels())
        .filter(|(p, &l)| p.label == l)
        .count())
}

/// Percentage of correctly classified samples.
pub fn accuracy<T: Scalar>(model: &ModelTheta<T>, ds: &SparseDataset<T>) -> Result<f64> {
    if ds.n() == 0 {
        return Err(Error::Empty);
    }
    Ok(100.0 * correct_count(model, ds)? as f64 / ds.n() as f64)
}

/// `100 − accuracy`.
pub fn error_rate<T: Scalar>(model: &ModelTheta<T>, ds: &SparseDataset<T>) -> Result<f64> {
    Ok(100.0 - accuracy(model, ds)?)
}

/// Samples with a positive margin slack `1 − y_i(ωᵀx_i + b)`, which is the
/// count the training budget `s` bounds.
pub fn train_misclassified_count<T: Scalar>(model: &ModelTheta<T>, ds: &SparseDataset<T>) -> Result<usize> {
    Ok(crate::mpm::margin(model, ds)?
        .iter()
        .filter(|&&z| z > T::zero())
        .count())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcdConfig<T> {
    /// Weight on the hinge loss.
    pub c: T,
    pub max_epochs: usize,
    /// Stop once the spread of projected gradients over an epoch is below this.
    pub eps: T,
    /// Seeds the per-epoch coordinate order.
    pub seed: u64,
}

impl<T: Scalar> Default for DcdConfig<T> {
    fn default() -> Self {
        Self {
            c: T::one(),
            max_epochs: 1000,
            eps: T::from_f64_lossy(0.1),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcdOutcome<T> {
    pub model: ModelTheta<T>,
    pub epochs: usize,
    pub converged: bool,
    /// Dual objective `Σα − ½‖w‖²` after every epoch, starting from `α = 0`.
    pub dual_history: Vec<f64>,
}

/// Dual coordinate descent for `min ½‖w‖² + C Σ max(0, 1 − y_i wᵀx̂_i)`
/// where `x̂ = [x; 1]`, so the bias is regularized like any other weight.
pub fn dcd_train<T: Scalar>(ds: &SparseDataset<T>, cfg: &DcdConfig<T>) -> Result<DcdOutcome<T>> {
    if !(cfg.c > T::zero() && cfg.c.is_finite()) {
        return Err(Error::invalid("C must be positive"));
    }
    if cfg.eps.is_nan() || cfg.eps <= T::zero() || cfg.max_epochs == 0 {
        return Err(Error::invalid("DCD needs a positive tolerance and at least one epoch"));
    }
    let (n, m) = (ds.n(), ds.m());
    if n == 0 {
        return Err(Error::Empty);
    }
    let a = ds.features();
    let y = ds.label_signs();
    let qii: Vec<T> = (0..n).map(|i| norm_sq(a.row(i).1) + T::one()).collect();

    let mut alpha = vec![T::zero(); n];
    let mut w = vec![T::zero(); m + 1];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dual_history = vec![0.0];
    let mut converged = false;
    let mut epochs = 0;

    while epochs < cfg.max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        let mut pg_max = T::neg_infinity();
        let mut pg_min = T::infinity();
        for &i in &order {
            let (cols, vals) = a.row(i);
            let wx = cols
                .iter()
                .zip(vals)
                .fold(w[m], |acc, (&j, &v)| acc + w[j] * v);
            let grad = y[i] * wx - T::one();
            let pg = if alpha[i] == T::zero() {
                grad.min(T::zero())
            } else if alpha[i] == cfg.c {
                grad.max(T::zero())
            } else {
                grad
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != T::zero() {
                let old = alpha[i];
                alpha[i] = (old - grad / qii[i]).max(T::zero()).min(cfg.c);
                let step = (alpha[i] - old) * y[i];
                for (&j, &v) in cols.iter().zip(vals) {
                    w[j] = w[j] + step * v;
                }
                w[m] = w[m] + step;
            }
        }
        let dual = alpha.iter().copied().sum::<T>() - norm_sq(&w) * T::from_f64_lossy(0.5);
        dual_history.push(dual.to_f64_lossy());
        if !crate::scalar::all_finite(&w) {
            return Err(Error::NonFinite("DCD weights"));
        }
        if pg_max - pg_min <= cfg.eps {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("DCD stopped after {epochs} epochs without meeting its tolerance");
    }
    Ok(DcdOutcome {
        model: ModelTheta::from_stacked(w)?,
        epochs,
        converged,
        dual_history,
    })
}
