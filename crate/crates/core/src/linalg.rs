use num_traits::{Float, Zero};
use thiserror::Error;

use crate::scalar::Field;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("zero pivot at row {row}")]
    ZeroPivot { row: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Tridiagonal matrix; `sub[i]` multiplies `x[i-1]` and `sup[i]` multiplies `x[i+1]` in row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<F> {
    pub sub: Vec<F>,
    pub diag: Vec<F>,
    pub sup: Vec<F>,
}

impl<F: Field> Tridiagonal<F> {
    pub fn zeros(n: usize) -> Self {
        Self { sub: vec![F::zero(); n], diag: vec![F::zero(); n], sup: vec![F::zero(); n] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Entry `(i, j)`, zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> F {
        if i == j {
            self.diag[i]
        } else if j + 1 == i {
            self.sub[i]
        } else if i + 1 == j {
            self.sup[i]
        } else {
            F::zero()
        }
    }

    pub fn apply(&self, x: &[F]) -> Vec<F> {
        let n = self.len();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.sub[i] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.sup[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// `a I + b self`.
    pub fn affine(&self, a: F, b: F) -> Self {
        Self {
            sub: self.sub.iter().map(|v| b * *v).collect(),
            diag: self.diag.iter().map(|v| a + b * *v).collect(),
            sup: self.sup.iter().map(|v| b * *v).collect(),
        }
    }

    pub fn factor(&self) -> Result<TridiagonalLu<F>, LinalgError> {
        let n = self.len();
        let mut upper = vec![F::zero(); n];
        let mut inv_pivot = vec![F::zero(); n];
        let mut prev_upper = F::zero();
        for i in 0..n {
            let pivot = if i == 0 { self.diag[0] } else { self.diag[i] - self.sub[i] * prev_upper };
            let size = pivot.norm_sqr();
            if size.is_zero() || !size.is_finite() {
                return Err(LinalgError::ZeroPivot { row: i });
            }
            let ip = F::one() / pivot;
            inv_pivot[i] = ip;
            upper[i] = if i + 1 < n { self.sup[i] * ip } else { F::zero() };
            prev_upper = upper[i];
        }
        Ok(TridiagonalLu { sub: self.sub.clone(), upper, inv_pivot })
    }

    pub fn solve(&self, rhs: &[F]) -> Result<Vec<F>, LinalgError> {
        self.factor()?.solve(rhs)
    }
}

/// Thomas-algorithm factorization, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct TridiagonalLu<F> {
    sub: Vec<F>,
    upper: Vec<F>,
    inv_pivot: Vec<F>,
}

impl<F: Field> TridiagonalLu<F> {
    pub fn solve(&self, rhs: &[F]) -> Result<Vec<F>, LinalgError> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [F]) -> Result<(), LinalgError> {
        let n = self.upper.len();
        if x.len() != n {
            return Err(LinalgError::Dimension { expected: n, got: x.len() });
        }
        for i in 0..n {
            let prev = if i == 0 { F::zero() } else { self.sub[i] * x[i - 1] };
            x[i] = (x[i] - prev) * self.inv_pivot[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let next = x[i + 1];
            x[i] -= self.upper[i] * next;
        }
        Ok(())
    }
}
