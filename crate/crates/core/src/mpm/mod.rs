//! Majorization penalty method for linear SVMs with a budget `s` on the
//! number of samples whose margin slack `z_i = 1 − y_i(ωᵀx_i + b)` is
//! positive.
//!
//! The constraint `z ∈ Ω_s` is penalized through `p(θ) = g(1 − Q̄θ)`, where
//! `Q̄ = Diag(y)[A 1]`, giving `F_ρ(θ) = ½‖ω‖² + ρ p(θ)`. Each outer step
//! replaces `p` by a surrogate that touches it at the current iterate and
//! lies above it everywhere, and minimizes the resulting strongly convex
//! quadratic by solving `(PᵀP + ρQᵀQ) θ = ρ Q̄ᵀ(1 − Π(z^k))`.

mod report;
mod train;

use serde::{Deserialize, Serialize};

pub use report::{IterationRecord, SolverPath, Termination, TrainReport};
pub use train::{mpm_train, mpm_train_observed};

use crate::data::SparseDataset;
use crate::error::{Error, Result};
use crate::geometry::{project_omega_s, ProjectionResult};
use crate::linalg::CgConfig;
use crate::model::ModelTheta;
use crate::scalar::{dot, norm_sq, Scalar};

/// The margin budget, either as a count or as a fraction of the samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sparsity {
    Count(usize),
    /// Sparse ratio in `[0, 1]`; `s = round(ratio * n)`, halves rounded up.
    Ratio(f64),
}

impl Sparsity {
    pub fn resolve(self, n: usize) -> Result<usize> {
        match self {
            Sparsity::Count(s) if s <= n => Ok(s),
            Sparsity::Count(s) => Err(Error::invalid(format!(
                "sparsity budget {s} exceeds the {n} training samples"
            ))),
            Sparsity::Ratio(r) if (0.0..=1.0).contains(&r) => {
                Ok(((r * n as f64 + 0.5).floor() as usize).min(n))
            }
            Sparsity::Ratio(r) => Err(Error::invalid(format!(
                "sparse ratio must lie in [0, 1], got {r}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpmConfig<T> {
    /// Penalty parameter ρ.
    pub rho: T,
    pub sparsity: Sparsity,
    /// The objective-progress test passes when `f_prog ≤ √n · f_tol_factor`.
    pub f_tol_factor: T,
    /// The infeasibility test passes when `p_prog ≤ p_tol`.
    pub p_tol: T,
    pub max_outer: usize,
    pub cg: CgConfig<T>,
    /// Feature counts below this use the direct solver.
    pub dense_threshold: usize,
    /// Start each CG solve from the previous iterate instead of zero.
    pub warm_start: bool,
    /// Multiply ρ by this factor after every outer step. Off by default;
    /// with a growing ρ the objective is no longer monotone.
    pub rho_growth: Option<T>,
}

impl<T: Scalar> Default for MpmConfig<T> {
    fn default() -> Self {
        Self {
            rho: T::from_f64_lossy(0.4),
            sparsity: Sparsity::Ratio(0.10),
            f_tol_factor: T::from_f64_lossy(1e-3),
            p_tol: T::from_f64_lossy(1e-3),
            max_outer: 1000,
            cg: CgConfig::default(),
            dense_threshold: 100,
            warm_start: false,
            rho_growth: None,
        }
    }
}

impl<T: Scalar> MpmConfig<T> {
    pub fn with_sparsity(mut self, sparsity: Sparsity) -> Self {
        self.sparsity = sparsity;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !positive(self.rho) {
            return Err(Error::invalid(format!("rho must be positive, got {}", self.rho)));
        }
        if !positive(self.f_tol_factor) || !positive(self.p_tol) {
            return Err(Error::invalid("stopping tolerances must be positive"));
        }
        if self.max_outer == 0 {
            return Err(Error::invalid("max_outer must be at least 1"));
        }
        if let Some(g) = self.rho_growth {
            if !(g >= T::one() && g.is_finite()) {
                return Err(Error::invalid("rho growth factor must be at least 1"));
            }
        }
        self.cg.validate()
    }
}

fn check_dims<T: Scalar>(theta: &[T], ds: &SparseDataset<T>) -> Result<()> {
    if theta.len() != ds.m() + 1 {
        return Err(Error::DimensionMismatch {
            expected: ds.m() + 1,
            found: theta.len(),
        });
    }
    Ok(())
}

/// `out_i = y_i (x_iᵀω + b)`, i.e. `Q̄θ`.
pub(crate) fn qbar_mul<T: Scalar>(ds: &SparseDataset<T>, theta: &[T]) -> Vec<T> {
    let m = ds.m();
    let mut out = vec![T::zero(); ds.n()];
    ds.features().mul_vec_into(&theta[..m], &mut out);
    for (o, l) in out.iter_mut().zip(ds.labels()) {
        *o = l.sign::<T>() * (*o + theta[m]);
    }
    out
}

/// `Q̄ᵀu = [Aᵀ(y∘u); yᵀu]`.
pub(crate) fn qbar_t_mul<T: Scalar>(ds: &SparseDataset<T>, u: &[T]) -> Vec<T> {
    let yu: Vec<T> = u
        .iter()
        .zip(ds.labels())
        .map(|(&ui, l)| l.sign::<T>() * ui)
        .collect();
    let m = ds.m();
    let mut out = vec![T::zero(); m + 1];
    ds.features().mul_t_vec_into(&yu, &mut out[..m]);
    out[m] = yu.iter().copied().sum();
    out
}

/// Margin slacks `z = 1 − Q̄θ`.
pub fn margin<T: Scalar>(theta: &ModelTheta<T>, ds: &SparseDataset<T>) -> Result<Vec<T>> {
    check_dims(theta.as_slice(), ds)?;
    Ok(margin_raw(theta.as_slice(), ds))
}

pub(crate) fn margin_raw<T: Scalar>(theta: &[T], ds: &SparseDataset<T>) -> Vec<T> {
    let mut z = qbar_mul(ds, theta);
    z.iter_mut().for_each(|v| *v = T::one() - *v);
    z
}

/// Objective pieces at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective<T> {
    /// `½‖ω‖²`
    pub f: T,
    /// `g(1 − Q̄θ)`
    pub p: T,
    /// `f + ρ p`
    pub f_rho: T,
}

pub fn objective_components<T: Scalar>(
    theta: &[T],
    ds: &SparseDataset<T>,
    s: usize,
    rho: T,
) -> Result<Objective<T>> {
    check_dims(theta, ds)?;
    let f = half_norm_sq(&theta[..ds.m()]);
    let p = project_omega_s(&margin_raw(theta, ds), s)?.dist_sq;
    Ok(Objective {
        f,
        p,
        f_rho: f + rho * p,
    })
}

fn half_norm_sq<T: Scalar>(v: &[T]) -> T {
    norm_sq(v) * T::from_f64_lossy(0.5)
}

/// Right-hand side `ρ Q̄ᵀ(1 − Π(1 − Q̄θ^k))` of the subproblem at `θ^k`.
pub fn majorization_rhs<T: Scalar>(
    theta_k: &[T],
    ds: &SparseDataset<T>,
    s: usize,
    rho: T,
) -> Result<Vec<T>> {
    check_dims(theta_k, ds)?;
    Ok(rhs_with_projection(theta_k, ds, s, rho)?.0)
}

pub(crate) fn rhs_with_projection<T: Scalar>(
    theta_k: &[T],
    ds: &SparseDataset<T>,
    s: usize,
    rho: T,
) -> Result<(Vec<T>, ProjectionResult<T>)> {
    let proj = project_omega_s(&margin_raw(theta_k, ds), s)?;
    let residual: Vec<T> = proj.x.iter().map(|&x| T::one() - x).collect();
    let mut rhs = qbar_t_mul(ds, &residual);
    rhs.iter_mut().for_each(|r| *r = rho * *r);
    Ok((rhs, proj))
}

/// `h(θ) = ½‖Π(1 − Q̄θ)‖²`
pub fn h_value<T: Scalar>(theta: &[T], ds: &SparseDataset<T>, s: usize) -> Result<T> {
    check_dims(theta, ds)?;
    let proj = project_omega_s(&margin_raw(theta, ds), s)?;
    Ok(half_norm_sq(&proj.x))
}

/// Majorizer of the penalty `p` anchored at a fixed point `θ̃`:
///
/// `p_m(θ, θ̃) = ½‖1 − Q̄θ‖² − h(θ̃) + ⟨Q̄ᵀΠ(1 − Q̄θ̃), θ − θ̃⟩`.
#[derive(Debug, Clone)]
pub struct Surrogate<T> {
    anchor: Vec<T>,
    h_anchor: T,
    linear: Vec<T>,
}

impl<T: Scalar> Surrogate<T> {
    pub fn at(anchor: &[T], ds: &SparseDataset<T>, s: usize) -> Result<Self> {
        check_dims(anchor, ds)?;
        let proj = project_omega_s(&margin_raw(anchor, ds), s)?;
        Ok(Self {
            anchor: anchor.to_vec(),
            h_anchor: half_norm_sq(&proj.x),
            linear: qbar_t_mul(ds, &proj.x),
        })
    }

    pub fn anchor(&self) -> &[T] {
        &self.anchor
    }

    /// `-Q̄ᵀΠ(1 − Q̄θ̃)`, an element of the subdifferential of `h` at `θ̃`.
    pub fn h_subgradient(&self) -> Vec<T> {
        self.linear.iter().map(|&v| -v).collect()
    }

    pub fn h_anchor(&self) -> T {
        self.h_anchor
    }

    pub fn penalty(&self, theta: &[T], ds: &SparseDataset<T>) -> Result<T> {
        check_dims(theta, ds)?;
        let z = margin_raw(theta, ds);
        let step: Vec<T> = theta.iter().zip(&self.anchor).map(|(&a, &b)| a - b).collect();
        Ok(half_norm_sq(&z) - self.h_anchor + dot(&self.linear, &step))
    }
}

/// `(f(θ^{k−1}) − f(θ^k)) / (ρ + f(θ^{k−1}))`, signed.
pub fn f_prog<T: Scalar>(f_prev: T, f_curr: T, rho: T) -> T {
    (f_prev - f_curr) / (rho + f_prev)
}

/// `2 p(θ^k) / ‖θ^k‖²`. Zero whenever `p = 0`; infinite when `θ = 0` and the
/// point is infeasible.
pub fn p_prog<T: Scalar>(theta: &[T], p: T) -> T {
    if p == T::zero() {
        return T::zero();
    }
    let nsq = norm_sq(theta);
    if nsq == T::zero() {
        T::infinity()
    } else {
        (p + p) / nsq
    }
}

/// Distance of the exit point from the fixed-point condition of the method,
/// `‖(PᵀP + ρQᵀQ)θ − ρQ̄ᵀ(1 − Π(1 − Q̄θ))‖`.
pub fn stationarity_residual<T: Scalar>(
    theta: &[T],
    ds: &SparseDataset<T>,
    s: usize,
    rho: T,
) -> Result<T> {
    check_dims(theta, ds)?;
    let op = crate::linalg::RegularizedNormalOperator::new(ds.features(), rho)?;
    let rhs = majorization_rhs(theta, ds, s, rho)?;
    Ok(crate::linalg::residual_norm(&op, theta, &rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Label, SparseDataset};

    fn single(x: f64, label: Label) -> SparseDataset<f64> {
        SparseDataset::from_dense(1, 1, &[x], vec![label]).unwrap()
    }

    #[test]
    fn margin_examples() {
        let ds = single(2.0, Label::Positive);
        assert_eq!(margin(&ModelTheta::zeros(1), &ds).unwrap(), vec![1.0]);
        let m = ModelTheta::new(vec![1.0], 0.0).unwrap();
        assert_eq!(margin(&m, &ds).unwrap(), vec![-1.0]);
        let ds = single(2.0, Label::Negative);
        let m = ModelTheta::new(vec![1.0], 1.0).unwrap();
        assert_eq!(margin(&m, &ds).unwrap(), vec![4.0]);
    }

    #[test]
    fn margin_dimension_mismatch() {
        let ds = single(2.0, Label::Positive);
        assert!(margin(&ModelTheta::zeros(3), &ds).is_err());
    }

    fn four_samples() -> SparseDataset<f64> {
        SparseDataset::from_dense(
            4,
            2,
            &[1.0, 0.0, 0.0, 2.0, -1.0, 1.0, 0.5, -0.5],
            vec![Label::Positive, Label::Negative, Label::Positive, Label::Negative],
        )
        .unwrap()
    }

    #[test]
    fn objective_at_zero() {
        let ds = four_samples();
        for s in 0..4 {
            let o = objective_components(&[0.0; 3], &ds, s, 0.4).unwrap();
            assert_eq!(o.f, 0.0);
            assert_eq!(o.p, 0.5 * (4 - s) as f64);
            assert_eq!(o.f_rho, 0.4 * o.p);
        }
        let o = objective_components(&[0.0; 3], &ds, 4, 0.4).unwrap();
        assert_eq!((o.p, o.f_rho), (0.0, 0.0));
    }

    #[test]
    fn objective_zero_penalty_when_all_margins_met() {
        // 1-D, positives at x >= 1 and negatives at x <= -1: ω = 1, b = 0
        let ds = SparseDataset::from_dense(
            3,
            1,
            &[1.0, 3.0, -2.0],
            vec![Label::Positive, Label::Positive, Label::Negative],
        )
        .unwrap();
        let o = objective_components(&[1.0, 0.0], &ds, 0, 0.4).unwrap();
        assert_eq!(o.p, 0.0);
        assert_eq!(o.f_rho, o.f);
        assert_eq!(o.f, 0.5);
    }

    #[test]
    fn rhs_vanishes_at_zero_with_full_budget() {
        let ds = four_samples();
        assert_eq!(majorization_rhs(&[0.0; 3], &ds, 4, 0.4).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn rhs_for_feasible_iterate() {
        // Π(z) = z, so the right-hand side reduces to ρQ̄ᵀQ̄θ
        let ds = SparseDataset::from_dense(
            2,
            1,
            &[2.0, -3.0],
            vec![Label::Positive, Label::Negative],
        )
        .unwrap();
        let theta = [1.0, 0.0];
        let rhs = majorization_rhs(&theta, &ds, 0, 0.5).unwrap();
        // Q̄θ = [2, 3]; Q̄ᵀ[2, 3] = [2*2 + (-1)(-3)*3, 2 - 3] = [13, -1]
        assert_eq!(rhs, vec![6.5, -0.5]);
    }

    #[test]
    fn rhs_two_sample_hand_expansion() {
        // x = [1, 2], y = [+1, -1], θ = [0.25, 0.5], s = 1
        // Q̄θ = [0.75, -1.0] so z = [0.25, 2.0]; Π keeps the larger entry: [0, 2]
        // 1 − Π = [1, −1]; y∘(1 − Π) = [1, 1]; Q̄ᵀ(..) = [1 + 2, 2] = [3, 2]
        let ds = SparseDataset::from_dense(
            2,
            1,
            &[1.0f64, 2.0],
            vec![Label::Positive, Label::Negative],
        )
        .unwrap();
        let rhs = majorization_rhs(&[0.25, 0.5], &ds, 1, 0.4).unwrap();
        assert!((rhs[0] - 1.2).abs() < 1e-15);
        assert!((rhs[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn progress_measures() {
        assert_eq!(f_prog(2.0, 2.0, 0.4), 0.0);
        assert!((f_prog(1.0f64, 0.5, 0.4) - 0.5 / 1.4).abs() < 1e-15);
        assert!(f_prog(0.5, 1.0, 0.4) < 0.0);
        assert_eq!(p_prog(&[3.0, 4.0], 0.0), 0.0);
        assert_eq!(p_prog(&[0.0, 0.0], 0.0), 0.0);
        assert_eq!(p_prog(&[0.0, 0.0], 1.0), f64::INFINITY);
        assert_eq!(p_prog(&[3.0, 4.0], 5.0), 0.4);
    }

    #[test]
    fn sparsity_resolution() {
        assert_eq!(Sparsity::Ratio(0.1).resolve(270).unwrap(), 27);
        assert_eq!(Sparsity::Ratio(0.1).resolve(25).unwrap(), 3); // 2.5 rounds up
        assert_eq!(Sparsity::Ratio(0.0).resolve(10).unwrap(), 0);
        assert_eq!(Sparsity::Ratio(1.0).resolve(10).unwrap(), 10);
        assert_eq!(Sparsity::Count(4).resolve(10).unwrap(), 4);
        assert!(Sparsity::Count(11).resolve(10).is_err());
        assert!(Sparsity::Ratio(1.5).resolve(10).is_err());
        assert!(Sparsity::Ratio(f64::NAN).resolve(10).is_err());
    }

    #[test]
    fn surrogate_touches_at_anchor() {
        let ds = four_samples();
        let anchor = [0.3, -0.7, 0.1];
        let sur = Surrogate::at(&anchor, &ds, 1).unwrap();
        let p = objective_components(&anchor, &ds, 1, 1.0).unwrap().p;
        assert!((sur.penalty(&anchor, &ds).unwrap() - p).abs() <= 1e-14);
        assert!(sur.penalty(&[1.0, 1.0, 1.0], &ds).unwrap()
            >= objective_components(&[1.0, 1.0, 1.0], &ds, 1, 1.0).unwrap().p);
    }

    #[test]
    fn config_validation() {
        let mut cfg = MpmConfig::<f64>::default();
        assert!(cfg.validate().is_ok());
        cfg.rho = 0.0;
        assert!(cfg.validate().is_err());
        let cfg = MpmConfig::<f64> {
            rho_growth: Some(0.5),
            ..MpmConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
