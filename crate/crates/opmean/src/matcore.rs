//! Dense Hermitian / positive definite matrix algebra.
//!
//! Everything downstream (means, divergences, barycenters, geodesics) is
//! built from eigendecomposition-based matrix functions and congruence
//! transforms defined here. All matrices are complex Hermitian; real inputs
//! are embedded with zero imaginary parts.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{OpMeanError, Result};

/// Relative eigenvalue cutoff below which a matrix is rejected as non-PD.
pub const PD_EIGENVALUE_TOL: f64 = 1e-12;

/// A Hermitian matrix, symmetrized on construction so that
/// `entries[i][j] == conj(entries[j][i])` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: DMatrix<Complex64>,
}

impl HermitianMatrix {
    /// Builds a Hermitian matrix from an arbitrary square matrix by
    /// replacing it with `(M + M*)/2`.
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(OpMeanError::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let sym = (&mat + mat.adjoint()).scale(0.5);
        Ok(Self { mat: sym })
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(OpMeanError::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        Self::new(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &v) in entries.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        Self { mat: m }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn scale(&self, t: f64) -> Self {
        Self {
            mat: self.mat.scale(t),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            mat: &self.mat - &other.mat,
        })
    }

    /// Real eigenvalues, sorted ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .mat
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}

/// Eigendecomposition `A = U diag(lambda) U*` with eigenvalues ascending
/// and unitary `U`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl EigenSystem {
    fn compute(herm: &HermitianMatrix) -> Self {
        let se = herm.mat.clone().symmetric_eigen();
        let n = herm.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let mut vecs = DMatrix::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            vecs.set_column(k, &se.eigenvectors.column(i));
        }
        Self {
            eigenvalues,
            eigenvectors: vecs,
        }
    }

    /// `U diag(d) U*` for arbitrary real diagonal values `d`.
    pub fn assemble(&self, diag: &[f64]) -> HermitianMatrix {
        let d = DVector::from_iterator(
            diag.len(),
            diag.iter().map(|&v| Complex64::new(v, 0.0)),
        );
        let m = &self.eigenvectors * DMatrix::from_diagonal(&d) * self.eigenvectors.adjoint();
        // symmetrize away eigendecomposition roundoff
        HermitianMatrix::new(m).expect("assemble from square factors")
    }
}

/// A positive definite Hermitian matrix. Construction performs a full
/// eigendecomposition; `spec(A)` is kept so that downstream divergence
/// domain checks come for free.
#[derive(Debug, Clone)]
pub struct PDMatrix {
    herm: HermitianMatrix,
    eigen: EigenSystem,
}

impl PDMatrix {
    pub fn new(herm: HermitianMatrix) -> Result<Self> {
        let eigen = EigenSystem::compute(&herm);
        let lambda_min = eigen.eigenvalues[0];
        let lambda_max = *eigen.eigenvalues.last().unwrap();
        if lambda_min <= PD_EIGENVALUE_TOL * lambda_max.max(1.0) {
            return Err(OpMeanError::NotPositiveDefinite {
                lambda_min,
                lambda_max,
            });
        }
        Ok(Self { herm, eigen })
    }

    pub fn from_matrix(mat: DMatrix<Complex64>) -> Result<Self> {
        Self::new(HermitianMatrix::new(mat)?)
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real(rows)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(HermitianMatrix::identity(dim)).expect("identity is PD")
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::diagonal(entries))
    }

    /// 1x1 wrapper for scalar sanity checks.
    pub fn scalar(x: f64) -> Result<Self> {
        Self::diagonal(&[x])
    }

    pub fn dim(&self) -> usize {
        self.herm.dim()
    }

    pub fn herm(&self) -> &HermitianMatrix {
        &self.herm
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        self.herm.matrix()
    }

    /// Eigenvalue multiset, ascending.
    pub fn spec(&self) -> &[f64] {
        &self.eigen.eigenvalues
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.eigen
    }

    pub fn scale(&self, t: f64) -> Result<Self> {
        Self::new(self.herm.scale(t))
    }

    pub fn inverse(&self) -> PDMatrix {
        matfun_pd(self, |x| 1.0 / x).expect("inverse of PD is PD")
    }

    pub fn sqrt(&self) -> PDMatrix {
        matfun_pd(self, f64::sqrt).expect("sqrt of PD is PD")
    }

    pub fn inv_sqrt(&self) -> PDMatrix {
        matfun_pd(self, |x| 1.0 / x.sqrt()).expect("inv sqrt of PD is PD")
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(OpMeanError::DimensionMismatch { left: a, right: b })
    } else {
        Ok(())
    }
}

/// Sign of the exponent in a congruence by a matrix square root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootSign {
    PlusHalf,
    MinusHalf,
}

/// Applies a scalar function to a PD matrix through its eigendecomposition:
/// `matfun(A, h) = U diag(h(lambda_i)) U*`.
pub fn matfun(a: &PDMatrix, h: impl Fn(f64) -> f64) -> HermitianMatrix {
    let vals: Vec<f64> = a.spec().iter().map(|&l| h(l)).collect();
    a.eigen().assemble(&vals)
}

/// Like [`matfun`] but rejects eigenvalues outside the open interval
/// `(lo, hi)` on which `h` is declared.
pub fn matfun_on(a: &PDMatrix, lo: f64, hi: f64, h: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    for &l in a.spec() {
        if l <= lo || l >= hi {
            return Err(OpMeanError::DomainError { value: l, lo, hi });
        }
    }
    Ok(matfun(a, h))
}

/// [`matfun`] for `h > 0` on the spectrum; the result is PD.
pub fn matfun_pd(a: &PDMatrix, h: impl Fn(f64) -> f64) -> Result<PDMatrix> {
    PDMatrix::new(matfun(a, h))
}

/// `A^{sign} B A^{sign}` where sign is +1/2 or -1/2; PD by congruence.
pub fn conjugate_by_root(a: &PDMatrix, b: &PDMatrix, sign: RootSign) -> Result<PDMatrix> {
    check_dims(a.dim(), b.dim())?;
    let root = match sign {
        RootSign::PlusHalf => a.sqrt(),
        RootSign::MinusHalf => a.inv_sqrt(),
    };
    let m = root.matrix() * b.matrix() * root.matrix();
    PDMatrix::from_matrix(m)
}

/// Congruence `T A T*` by an arbitrary invertible matrix.
pub fn congruence(t: &DMatrix<Complex64>, a: &PDMatrix) -> Result<PDMatrix> {
    check_dims(t.nrows(), a.dim())?;
    PDMatrix::from_matrix(t * a.matrix() * t.adjoint())
}

/// Loewner order test: `A >= B - tol` in the sense that
/// `lambda_min(A - B) >= -tol`.
pub fn loewner_geq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    let diff = a.sub(b)?;
    Ok(diff.eigenvalues()[0] >= -tol)
}

pub fn frobenius_norm(a: &HermitianMatrix) -> f64 {
    a.matrix().norm()
}

/// Frobenius norm of the difference, the workhorse of every tolerance check.
pub fn frob_distance(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    Ok(frobenius_norm(&a.sub(b)?))
}

/// Real trace inner product `Re tr(A B)` of two Hermitian matrices.
pub fn trace_inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    Ok((a.matrix() * b.matrix()).trace().re)
}
