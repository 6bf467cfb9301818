//! Projection onto the sparse set `Ω_s = { x : ‖x₊‖₀ ≤ s }`.
//!
//! A nearest point of `Ω_s` keeps every nonpositive entry of `z` and the `s`
//! largest positive entries, and zeroes the remaining positive entries. The
//! entries of `z` are split against `t`, the `s`-th largest value of `z`:
//!
//! * `alpha`: `z_i > t` and `z_i > 0`, always kept;
//! * `beta`: `z_i = t` and `z_i > 0`, of which `s - |alpha|` are kept
//!   (`beta1`, the lowest indices);
//! * `gamma`: `0 < z_i < t`, zeroed;
//! * `tau`: `z_i <= 0`, kept.
//!
//! When fewer than `s` entries are positive every positive entry lands in
//! `alpha`. For `s = 0` every positive entry is zeroed and reported in
//! `gamma`, so the projection is `min(z, 0)`.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Disjoint index sets partitioning `0..n`, each in ascending order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IndexPartition {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    /// The members of `beta` that are kept.
    pub beta1: Vec<usize>,
    pub gamma: Vec<usize>,
    pub tau: Vec<usize>,
}

impl IndexPartition {
    /// The projection is not unique: some entries tied at the threshold
    /// were dropped while an equal entry was kept.
    pub fn has_boundary_tie(&self) -> bool {
        self.beta.len() > self.beta1.len() && !self.beta1.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult<T> {
    /// The projected vector.
    pub x: Vec<T>,
    pub partition: IndexPartition,
    /// `½‖z − x‖²`
    pub dist_sq: T,
}

pub fn positive_count<T: Scalar>(z: &[T]) -> usize {
    z.iter().filter(|&&v| v > T::zero()).count()
}

/// The `s`-th largest positive value of `z`, if at least `s >= 1` entries
/// are positive. Expected linear time.
fn threshold<T: Scalar>(z: &[T], s: usize) -> Option<T> {
    if s == 0 {
        return None;
    }
    let mut pos: Vec<T> = z.iter().copied().filter(|&v| v > T::zero()).collect();
    if pos.len() < s {
        return None;
    }
    let (_, kth, _) = pos.select_nth_unstable_by(s - 1, |a, b| {
        b.partial_cmp(a).unwrap_or(Ordering::Equal)
    });
    Some(*kth)
}

pub fn partition_indices<T: Scalar>(z: &[T], s: usize) -> Result<IndexPartition> {
    if s > z.len() {
        return Err(Error::invalid(format!(
            "sparsity budget {s} exceeds vector length {}",
            z.len()
        )));
    }
    let mut part = IndexPartition::default();
    let zero = T::zero();
    match threshold(z, s) {
        Some(t) => {
            for (i, &v) in z.iter().enumerate() {
                if v <= zero {
                    part.tau.push(i);
                } else if v > t {
                    part.alpha.push(i);
                } else if v == t {
                    part.beta.push(i);
                } else {
                    part.gamma.push(i);
                }
            }
            let keep = s - part.alpha.len();
            part.beta1 = part.beta[..keep].to_vec();
        }
        None => {
            // s = 0 zeroes every positive entry; otherwise there are fewer
            // than s positive entries and all of them are kept
            for (i, &v) in z.iter().enumerate() {
                if v <= zero {
                    part.tau.push(i);
                } else if s == 0 {
                    part.gamma.push(i);
                } else {
                    part.alpha.push(i);
                }
            }
        }
    }
    Ok(part)
}

/// A nearest point of `Ω_s` to `z`, ties resolved towards lower indices.
pub fn project_omega_s<T: Scalar>(z: &[T], s: usize) -> Result<ProjectionResult<T>> {
    let partition = partition_indices(z, s)?;
    let mut x = z.to_vec();
    let dropped_ties = partition.beta.len() - partition.beta1.len();
    for &i in partition
        .gamma
        .iter()
        .chain(&partition.beta[partition.beta.len() - dropped_ties..])
    {
        x[i] = T::zero();
    }
    let dist_sq = half_sq_dist(z, &x);
    Ok(ProjectionResult {
        x,
        partition,
        dist_sq,
    })
}

/// `½‖z − x‖²`, summed in index order.
pub(crate) fn half_sq_dist<T: Scalar>(z: &[T], x: &[T]) -> T {
    let sum = z
        .iter()
        .zip(x)
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
    sum * T::from_f64_lossy(0.5)
}

/// `g(z) = ½ dist²(z, Ω_s)`; zero exactly when `‖z₊‖₀ ≤ s`.
pub fn g_value<T: Scalar>(z: &[T], s: usize) -> Result<T> {
    Ok(project_omega_s(z, s)?.dist_sq)
}
