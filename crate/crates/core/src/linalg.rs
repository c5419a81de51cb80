//! Small dense linear algebra for the linear agents.
//!
//! Matrices here are a handful of rows wide, so everything is plain
//! row-major `Vec<f64>` with textbook loops.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("matrix is not positive definite (pivot {pivot} = {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
}

fn check_dim(expected: usize, found: usize) -> Result<(), LinalgError> {
    if expected == found {
        Ok(())
    } else {
        Err(LinalgError::Dimension { expected, found })
    }
}

/// Symmetric matrix, assumed positive definite by the factorization routines.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SpdMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    /// Builds from row-major entries. The input is symmetrized as
    /// `(A + Aᵀ) / 2`.
    pub fn from_rows(dim: usize, entries: &[f64]) -> Result<Self, LinalgError> {
        check_dim(dim * dim, entries.len())?;
        let mut data = entries.to_vec();
        for i in 0..dim {
            for j in 0..i {
                let avg = 0.5 * (entries[i * dim + j] + entries[j * dim + i]);
                data[i * dim + j] = avg;
                data[j * dim + i] = avg;
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        check_dim(self.dim, x.len())?;
        Ok(self
            .data
            .chunks(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `V + x xᵀ`, in place. Both triangles receive the same product so the
    /// result stays exactly symmetric.
    pub fn rank1_update(&mut self, x: &[f64]) -> Result<(), LinalgError> {
        check_dim(self.dim, x.len())?;
        let d = self.dim;
        for i in 0..d {
            for j in 0..=i {
                let p = x[i] * x[j];
                self.data[i * d + j] += p;
                if i != j {
                    self.data[j * d + i] += p;
                }
            }
        }
        Ok(())
    }

    /// Adds `eps` to every diagonal entry.
    pub fn add_diagonal(&mut self, eps: f64) {
        for i in 0..self.dim {
            self.data[i * self.dim + i] += eps;
        }
    }

    pub fn cholesky(&self) -> Result<Cholesky, LinalgError> {
        let d = self.dim;
        let mut l = vec![0.0; d * d];
        for j in 0..d {
            let mut diag = self.data[j * d + j];
            for k in 0..j {
                diag -= l[j * d + k] * l[j * d + k];
            }
            if diag <= 0.0 || !diag.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { pivot: j, value: diag });
            }
            let ljj = diag.sqrt();
            l[j * d + j] = ljj;
            for i in j + 1..d {
                let mut s = self.data[i * d + j];
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k];
                }
                l[i * d + j] = s / ljj;
            }
        }
        Ok(Cholesky {
            factor: LowerTriangular { dim: d, data: l },
        })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        self.cholesky()?.solve(b)
    }

    /// `‖x‖_{V⁻¹} = √(xᵀ V⁻¹ x)`.
    pub fn quad_norm_inv(&self, x: &[f64]) -> Result<f64, LinalgError> {
        self.cholesky()?.quad_norm_inv(x)
    }
}

/// Lower-triangular matrix stored densely, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular {
    dim: usize,
    data: Vec<f64>,
}

impl LowerTriangular {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    /// Builds from row-major entries; anything above the diagonal is ignored.
    pub fn from_rows(dim: usize, entries: &[f64]) -> Result<Self, LinalgError> {
        check_dim(dim * dim, entries.len())?;
        let mut data = entries.to_vec();
        for i in 0..dim {
            for j in i + 1..dim {
                data[i * dim + j] = 0.0;
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// `L Lᵀ` as a full row-major matrix.
    pub fn gram(&self) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|k| self.get(i, k) * self.get(j, k)).sum();
                out[i * d + j] = s;
                out[j * d + i] = s;
            }
        }
        out
    }

    /// Solves `L y = b` in place.
    fn forward(&self, y: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            let mut s = y[i];
            for k in 0..i {
                s -= self.data[i * d + k] * y[k];
            }
            y[i] = s / self.data[i * d + i];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    fn backward(&self, x: &mut [f64]) {
        let d = self.dim;
        for i in (0..d).rev() {
            let mut s = x[i];
            for k in i + 1..d {
                s -= self.data[k * d + i] * x[k];
            }
            x[i] = s / self.data[i * d + i];
        }
    }
}

/// `V = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    factor: LowerTriangular,
}

impl Cholesky {
    pub fn factor(&self) -> &LowerTriangular {
        &self.factor
    }

    pub fn dim(&self) -> usize {
        self.factor.dim
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        check_dim(self.dim(), b.len())?;
        let mut x = b.to_vec();
        self.factor.forward(&mut x);
        self.factor.backward(&mut x);
        Ok(x)
    }

    pub fn quad_norm_inv(&self, x: &[f64]) -> Result<f64, LinalgError> {
        check_dim(self.dim(), x.len())?;
        let mut scratch = vec![0.0; x.len()];
        Ok(self.quad_norm_inv_with(x, &mut scratch))
    }

    /// Allocation-free variant for hot loops: `xᵀV⁻¹x = ‖L⁻¹x‖²`.
    pub fn quad_norm_inv_with(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        scratch.copy_from_slice(x);
        self.factor.forward(scratch);
        scratch.iter().map(|y| y * y).sum::<f64>().sqrt()
    }

    /// Draws from `N(mean, scale² V⁻¹)` as `mean + scale · L⁻ᵀ z`, without
    /// forming the inverse.
    pub fn sample_precision<R: Rng + ?Sized>(&self, mean: &[f64], scale: f64, rng: &mut R) -> Vec<f64> {
        let mut z: Vec<f64> = (0..self.dim()).map(|_| rng.sample(StandardNormal)).collect();
        self.factor.backward(&mut z);
        mean.iter().zip(&z).map(|(m, w)| m + scale * w).collect()
    }
}

/// `mean + L z` with `z` i.i.d. standard normal, so the draw has covariance
/// `L Lᵀ`.
pub fn mvn_sample<R: Rng + ?Sized>(
    mean: &[f64],
    cov_factor: &LowerTriangular,
    rng: &mut R,
) -> Result<Vec<f64>, LinalgError> {
    check_dim(cov_factor.dim, mean.len())?;
    let d = mean.len();
    let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    Ok((0..d)
        .map(|i| mean[i] + (0..=i).map(|k| cov_factor.get(i, k) * z[k]).sum::<f64>())
        .collect())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
