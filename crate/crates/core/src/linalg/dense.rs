use super::{LinearOperator, RegularizedNormalOperator, SolveOutcome};
use crate::error::{Error, Result};
use crate::scalar::{norm, Scalar};

/// Square row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn from_row_major(dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.dim + c]
    }

    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut T {
        &mut self.data[r * self.dim + c]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }
}

impl<T: Scalar> LinearOperator<T> for DenseMatrix<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_into(&self, x: &[T], y: &mut [T]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let row = &self.data[r * self.dim..(r + 1) * self.dim];
            *yr = row.iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        }
    }
}

/// Lower-triangular Cholesky factor `L` with `M = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor<T> {
    dim: usize,
    lower: Vec<T>,
}

impl<T: Scalar> CholeskyFactor<T> {
    /// Factors a symmetric positive definite matrix; only the lower
    /// triangle is read.
    pub fn factor(m: &DenseMatrix<T>) -> Result<Self> {
        let d = m.dim;
        let mut l = vec![T::zero(); d * d];
        for j in 0..d {
            let mut diag = m.get(j, j);
            for k in 0..j {
                diag = diag - l[j * d + k] * l[j * d + k];
            }
            if diag <= T::zero() || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    pivot: j,
                    value: diag.to_f64_lossy(),
                });
            }
            let ljj = diag.sqrt();
            l[j * d + j] = ljj;
            for i in j + 1..d {
                let mut v = m.get(i, j);
                for k in 0..j {
                    v = v - l[i * d + k] * l[j * d + k];
                }
                l[i * d + j] = v / ljj;
            }
        }
        Ok(Self { dim: d, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let d = self.dim;
        if rhs.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rhs.len(),
            });
        }
        let l = &self.lower;
        let mut y = rhs.to_vec();
        for i in 0..d {
            let mut v = y[i];
            for k in 0..i {
                v = v - l[i * d + k] * y[k];
            }
            y[i] = v / l[i * d + i];
        }
        for i in (0..d).rev() {
            let mut v = y[i];
            for k in i + 1..d {
                v = v - l[k * d + i] * y[k];
            }
            y[i] = v / l[i * d + i];
        }
        Ok(y)
    }
}

/// Direct solve of `(PᵀP + ρQᵀQ) θ = rhs` through a Cholesky factorization.
///
/// Reports zero iterations; the residual is measured with the matrix-free
/// operator.
pub fn dense_solve<T: Scalar>(op: &RegularizedNormalOperator<'_, T>, rhs: &[T]) -> Result<SolveOutcome<T>> {
    let factor = CholeskyFactor::factor(&op.materialize())?;
    let theta = factor.solve(rhs)?;
    let residual = residual_norm(op, &theta, rhs);
    if !residual.is_finite() {
        return Err(Error::NonFinite("dense solve"));
    }
    Ok(SolveOutcome {
        theta,
        iterations: 0,
        final_residual: residual,
        converged: true,
    })
}

/// `‖rhs − Op x‖`
pub fn residual_norm<T: Scalar, A: LinearOperator<T>>(op: &A, x: &[T], rhs: &[T]) -> T {
    let mut ax = vec![T::zero(); op.dim()];
    op.apply_into(x, &mut ax);
    let r: Vec<T> = rhs.iter().zip(&ax).map(|(&b, &a)| b - a).collect();
    norm(&r)
}
