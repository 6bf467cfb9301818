//! The regularized normal operator `PᵀP + ρQᵀQ` and the solvers used for
//! the quadratic subproblems.
//!
//! With `A` the `n x m` sample matrix, `Q = [A 1]` and `P = [I 0]`, the
//! operator acts on `v = [w; b]` as `[w; 0] + ρ Qᵀ(Q v)` and is never formed
//! explicitly on the iterative path.

mod cg;
mod dense;

pub use cg::{cg_solve, cg_solve_from, CgConfig};
pub use dense::{dense_solve, residual_norm, CholeskyFactor, DenseMatrix};

use crate::data::CsrMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A symmetric linear map on `R^dim`.
pub trait LinearOperator<T> {
    fn dim(&self) -> usize;

    /// `y = Op x`; both slices have length `dim`.
    fn apply_into(&self, x: &[T], y: &mut [T]);
}

/// Result of solving one linear system.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome<T> {
    pub theta: Vec<T>,
    /// CG iterations used; zero for direct solves.
    pub iterations: usize,
    /// 2-norm of the residual at exit.
    pub final_residual: T,
    pub converged: bool,
}

/// `PᵀP + ρQᵀQ` for a fixed sample matrix, applied matrix-free.
#[derive(Debug, Clone, Copy)]
pub struct RegularizedNormalOperator<'a, T> {
    features: &'a CsrMatrix<T>,
    rho: T,
}

impl<'a, T: Scalar> RegularizedNormalOperator<'a, T> {
    pub fn new(features: &'a CsrMatrix<T>, rho: T) -> Result<Self> {
        if !(rho > T::zero() && rho.is_finite()) {
            return Err(Error::invalid(format!("penalty parameter must be positive, got {rho}")));
        }
        Ok(Self { features, rho })
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn features(&self) -> &'a CsrMatrix<T> {
        self.features
    }

    /// Checked application returning a fresh vector.
    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        let mut out = vec![T::zero(); self.dim()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    /// Dense `(m+1) x (m+1)` copy of the operator.
    pub fn materialize(&self) -> DenseMatrix<T> {
        let m = self.features.ncols();
        let d = m + 1;
        let mut g = DenseMatrix::zeros(d);
        // QᵀQ accumulated one row of Q = [x_iᵀ 1] at a time
        for i in 0..self.features.nrows() {
            let (cols, vals) = self.features.row(i);
            for (a, (&ja, &va)) in cols.iter().zip(vals).enumerate() {
                for (&jb, &vb) in cols[..=a].iter().zip(&vals[..=a]) {
                    *g.get_mut(ja, jb) = g.get(ja, jb) + va * vb;
                }
                *g.get_mut(m, ja) = g.get(m, ja) + va;
            }
            *g.get_mut(m, m) = g.get(m, m) + T::one();
        }
        for r in 0..d {
            for c in 0..=r {
                let mut v = self.rho * g.get(r, c);
                if r == c && r < m {
                    v = v + T::one();
                }
                *g.get_mut(r, c) = v;
                *g.get_mut(c, r) = v;
            }
        }
        g
    }
}

impl<T: Scalar> LinearOperator<T> for RegularizedNormalOperator<'_, T> {
    fn dim(&self) -> usize {
        self.features.ncols() + 1
    }

    fn apply_into(&self, v: &[T], out: &mut [T]) {
        let m = self.features.ncols();
        let (w, b) = (&v[..m], v[m]);
        let mut qv = vec![T::zero(); self.features.nrows()];
        self.features.mul_vec_into(w, &mut qv);
        qv.iter_mut().for_each(|q| *q = *q + b);
        self.features.mul_t_vec_into(&qv, &mut out[..m]);
        for (o, &wi) in out[..m].iter_mut().zip(w) {
            *o = wi + self.rho * *o;
        }
        out[m] = self.rho * qv.iter().copied().sum::<T>();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::dot;

    fn one_by_one() -> CsrMatrix<f64> {
        CsrMatrix::from_dense(1, 1, &[2.0f64]).unwrap()
    }

    #[test]
    fn hand_expanded_two_by_two() {
        // PᵀP = [[1,0],[0,0]], QᵀQ = [[4,2],[2,1]]
        let a = one_by_one();
        let op = RegularizedNormalOperator::new(&a, 1.0).unwrap();
        assert_eq!(op.apply(&[1.0, 1.0]).unwrap(), vec![7.0, 3.0]);
        assert_eq!(op.materialize().data(), &[5.0, 2.0, 2.0, 1.0]);
    }

    #[test]
    fn zero_maps_to_zero() {
        let a = CsrMatrix::from_dense(2, 3, &[1.0f64, 0.0, -2.0, 0.0, 3.0, 1.0]).unwrap();
        let op = RegularizedNormalOperator::new(&a, 0.4).unwrap();
        assert_eq!(op.apply(&[0.0; 4]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn tiny_rho_is_identity_on_weights() {
        let a = CsrMatrix::from_dense(2, 3, &[1.0f64, 0.0, -2.0, 0.0, 3.0, 1.0]).unwrap();
        let op = RegularizedNormalOperator::new(&a, 1e-12).unwrap();
        let v = [0.3, -1.0, 2.0, 0.0];
        for (o, e) in op.apply(&v).unwrap().iter().zip(&v) {
            assert!((o - e).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_rho_and_dimension() {
        let a = one_by_one();
        assert!(RegularizedNormalOperator::new(&a, 0.0).is_err());
        assert!(RegularizedNormalOperator::new(&a, -1.0).is_err());
        let op = RegularizedNormalOperator::new(&a, 1.0).unwrap();
        assert!(matches!(
            op.apply(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn matrix_free_matches_materialized() {
        let a = CsrMatrix::from_dense(
            3,
            3,
            &[1.0f64, 0.0, -2.0, 0.0, 3.0, 1.0, 0.5, 0.5, 0.0],
        )
        .unwrap();
        let op = RegularizedNormalOperator::new(&a, 0.7).unwrap();
        let dense = op.materialize();
        let v = [0.2, -1.3, 0.8, 2.0];
        let mut expect = vec![0.0; 4];
        dense.apply_into(&v, &mut expect);
        let got = op.apply(&v).unwrap();
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() <= 1e-12 * (1.0 + e.abs()));
        }
        assert!(dot(&v, &got) > 0.0);
    }
}
