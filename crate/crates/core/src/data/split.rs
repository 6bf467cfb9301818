use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SparseDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Seeded train/test partition of `0..n`.
///
/// The test part holds `round(test_fraction * n)` samples, clamped so both
/// parts are nonempty. Indices within each part are returned in ascending
/// order.
pub fn split_indices(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test fraction must lie strictly between 0 and 1, got {test_fraction}"
        )));
    }
    if n < 2 {
        return Err(Error::invalid(format!("cannot split {n} samples")));
    }
    let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Splits a dataset with [`split_indices`].
pub fn train_test_split<T: Scalar>(
    ds: &SparseDataset<T>,
    test_fraction: f64,
    seed: u64,
) -> Result<(SparseDataset<T>, SparseDataset<T>)> {
    let (train, test) = split_indices(ds.n(), test_fraction, seed)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}
