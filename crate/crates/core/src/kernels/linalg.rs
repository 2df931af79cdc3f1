//! Dense Cholesky factorization for the small SPD systems in the
//! coefficient updates (Q is the covariate count, rarely above 10).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Array2<f64>,
}

impl Cholesky {
    pub fn new(a: ArrayView2<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::domain("Cholesky", "matrix must be square"));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let scale = a[[i, j]].abs().max(a[[j, i]].abs()).max(1.0);
                if (a[[i, j]] - a[[j, i]]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::domain(
                        "Cholesky",
                        format!("matrix is not symmetric at ({i},{j})"),
                    ));
                }
            }
        }
        let mut l = Array2::<f64>::zeros((n, n));
        for j in 0..n {
            let mut d = a[[j, j]];
            for k in 0..j {
                d -= l[[j, k]] * l[[j, k]];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: d, index: j });
            }
            let dj = d.sqrt();
            l[[j, j]] = dj;
            for i in (j + 1)..n {
                let mut s = a[[i, j]];
                for k in 0..j {
                    s -= l[[i, k]] * l[[j, k]];
                }
                l[[i, j]] = s / dj;
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solve A x = b for a single right-hand side.
    pub fn solve_vec(&self, b: ArrayView1<f64>) -> Array1<f64> {
        let n = self.dim();
        let mut y = b.to_owned();
        for i in 0..n {
            for k in 0..i {
                let v = y[k];
                y[i] -= self.l[[i, k]] * v;
            }
            y[i] /= self.l[[i, i]];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let v = y[k];
                y[i] -= self.l[[k, i]] * v;
            }
            y[i] /= self.l[[i, i]];
        }
        y
    }

    /// Solve A X = B column by column.
    pub fn solve(&self, b: ArrayView2<f64>) -> Array2<f64> {
        let mut out = Array2::<f64>::zeros(b.raw_dim());
        for (j, col) in b.columns().into_iter().enumerate() {
            out.column_mut(j).assign(&self.solve_vec(col));
        }
        out
    }

    /// Explicit A⁻¹, symmetrized so downstream consumers see an exactly
    /// symmetric covariance.
    pub fn inverse(&self) -> Array2<f64> {
        let n = self.dim();
        let mut inv = self.solve(Array2::<f64>::eye(n).view());
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (inv[[i, j]] + inv[[j, i]]);
                inv[[i, j]] = v;
                inv[[j, i]] = v;
            }
        }
        inv
    }

    /// log det(A) from the factor diagonal.
    pub fn log_det(&self) -> f64 {
        (0..self.dim()).map(|i| 2.0 * self.l[[i, i]].ln()).sum()
    }
}

/// Solve A X = B for symmetric positive-definite A.
pub fn spd_solve(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<Array2<f64>> {
    if b.nrows() != a.nrows() {
        return Err(Error::domain("spd_solve", "dimension mismatch between A and B"));
    }
    Ok(Cholesky::new(a)?.solve(b))
}

pub fn trace(a: ArrayView2<f64>) -> f64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[[i, i]]).sum()
}
