//! Deterministic synthetic datasets used by the bundled suite and the tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Label, SparseDataset};
use crate::scalar::Scalar;

/// Two isotropic Gaussian clusters in the plane centred at `±(c, c)`.
///
/// Labels alternate so both classes have `n / 2` samples (rounded). Every
/// point is kept within three standard deviations of its centre, so the
/// classes are linearly separable whenever `c * sqrt(2) > 3 * sigma`.
pub fn two_clusters<T: Scalar>(n: usize, c: f64, sigma: f64, seed: u64) -> SparseDataset<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i % 2 == 0 {
            Label::Positive
        } else {
            Label::Negative
        };
        let centre = if label == Label::Positive { c } else { -c };
        for _ in 0..2 {
            let noise = loop {
                let g: f64 = rng.sample(StandardNormal);
                if g.abs() <= 3.0 {
                    break g;
                }
            };
            rows.push(T::from_f64_lossy(centre + sigma * noise));
        }
        labels.push(label);
    }
    SparseDataset::from_dense(n, 2, &rows, labels).expect("shape is consistent")
}

/// Overlapping Gaussian classes in `m` dimensions with means `±shift` per
/// coordinate, unit variance, and a fraction `flip` of labels flipped.
pub fn gaussian_overlap<T: Scalar>(
    n: usize,
    m: usize,
    shift: f64,
    flip: f64,
    seed: u64,
) -> SparseDataset<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n * m);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let positive = rng.random_bool(0.5);
        let mean = if positive { shift } else { -shift };
        for _ in 0..m {
            let g: f64 = rng.sample(StandardNormal);
            rows.push(T::from_f64_lossy(mean + g));
        }
        let flipped = rng.random_bool(flip);
        labels.push(if positive != flipped {
            Label::Positive
        } else {
            Label::Negative
        });
    }
    SparseDataset::from_dense(n, m, &rows, labels).expect("shape is consistent")
}

/// Sparse 0/1 features in the style of one-hot encoded census data.
///
/// Each sample activates `active` of the `m` features uniformly at random.
/// The label is the sign of a fixed sparse linear rule plus Gaussian noise
/// of standard deviation `noise`.
pub fn sparse_binary<T: Scalar>(
    n: usize,
    m: usize,
    active: usize,
    noise: f64,
    seed: u64,
) -> SparseDataset<T> {
    assert!(active <= m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rule: Vec<f64> = (0..m)
        .map(|j| {
            if j % 3 == 0 {
                rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            }
        })
        .collect();
    let offset = -rule.iter().sum::<f64>() * active as f64 / m as f64;

    let mut rows = vec![T::zero(); n * m];
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let picked = rand::seq::index::sample(&mut rng, m, active);
        let mut score = offset;
        for j in picked.iter() {
            rows[i * m + j] = T::one();
            score += rule[j];
        }
        let g: f64 = rng.sample(StandardNormal);
        score += noise * g;
        labels.push(Label::from_score(score));
    }
    SparseDataset::from_dense(n, m, &rows, labels).expect("shape is consistent")
}

/// A bundled dataset: its file name under `data/` and how to regenerate it.
pub struct BundledSpec {
    pub name: &'static str,
    pub generate: fn() -> SparseDataset<f64>,
}

/// The small datasets shipped in the crate's `data/` directory.
pub const BUNDLED: [BundledSpec; 3] = [
    BundledSpec {
        name: "toy_separable",
        generate: || two_clusters(200, 2.5, 0.6, 11),
    },
    BundledSpec {
        name: "gauss_overlap",
        generate: || gaussian_overlap(400, 10, 0.35, 0.05, 23),
    },
    BundledSpec {
        name: "sparse_binary",
        generate: || sparse_binary(800, 150, 14, 0.5, 37),
    },
];
