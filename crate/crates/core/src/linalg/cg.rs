use serde::{Deserialize, Serialize};

use super::{LinearOperator, SolveOutcome};
use crate::error::{Error, Result};
use crate::scalar::{axpy, dot, Scalar};

/// Stopping rule for conjugate gradients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgConfig<T> {
    /// Absolute threshold on the residual 2-norm `‖b − Op x‖`.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for CgConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::from_f64_lossy(1e-3),
            max_iter: 500,
        }
    }
}

impl<T: Scalar> CgConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= T::zero() {
            return Err(Error::invalid("CG tolerance must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("CG iteration cap must be at least 1"));
        }
        Ok(())
    }
}

/// Conjugate gradients from the zero vector.
pub fn cg_solve<T: Scalar, A: LinearOperator<T>>(
    op: &A,
    rhs: &[T],
    cfg: &CgConfig<T>,
) -> Result<SolveOutcome<T>> {
    cg_solve_from(op, rhs, None, cfg, |_, _| {})
}

/// Conjugate gradients from an optional initial guess. `observe` receives
/// the iteration number and iterate after every step.
pub fn cg_solve_from<T, A, F>(
    op: &A,
    rhs: &[T],
    x0: Option<&[T]>,
    cfg: &CgConfig<T>,
    mut observe: F,
) -> Result<SolveOutcome<T>>
where
    T: Scalar,
    A: LinearOperator<T>,
    F: FnMut(usize, &[T]),
{
    cfg.validate()?;
    let d = op.dim();
    if rhs.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rhs.len(),
        });
    }
    let mut x = match x0 {
        Some(x0) if x0.len() != d => {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: x0.len(),
            })
        }
        Some(x0) => x0.to_vec(),
        None => vec![T::zero(); d],
    };
    let mut ap = vec![T::zero(); d];
    let mut r = rhs.to_vec();
    if x0.is_some() {
        op.apply_into(&x, &mut ap);
        r.iter_mut().zip(&ap).for_each(|(ri, &a)| *ri = *ri - a);
    }
    let mut rr = dot(&r, &r);
    if !rr.is_finite() {
        return Err(Error::NonFinite("CG residual"));
    }
    let mut p = r.clone();
    let mut iterations = 0;
    let mut residual = rr.sqrt();

    while residual > cfg.tol && iterations < cfg.max_iter {
        op.apply_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(Error::NonFinite("CG curvature"));
        }
        if pap <= T::zero() {
            return Err(Error::NotPositiveDefinite {
                pivot: iterations,
                value: pap.to_f64_lossy(),
            });
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_next = dot(&r, &r);
        if !rr_next.is_finite() {
            return Err(Error::NonFinite("CG residual"));
        }
        iterations += 1;
        residual = rr_next.sqrt();
        observe(iterations, &x);
        let beta = rr_next / rr;
        rr = rr_next;
        for (pi, &ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }

    Ok(SolveOutcome {
        theta: x,
        iterations,
        final_residual: residual,
        converged: residual <= cfg.tol,
    })
}
