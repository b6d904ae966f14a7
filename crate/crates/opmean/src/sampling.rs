//! Seeded random matrix generation for check suites and tests.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::matcore::{HermitianMatrix, PDMatrix};

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> HermitianMatrix {
    let m = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    HermitianMatrix::new(m).expect("square by construction")
}

/// Random unit-Frobenius-norm Hermitian direction.
pub fn random_unit_hermitian(rng: &mut impl Rng, dim: usize) -> HermitianMatrix {
    let y = random_hermitian(rng, dim);
    let n = crate::matcore::frobenius_norm(&y);
    y.scale(1.0 / n)
}

/// Random PD matrix `U diag(lambda) U*` with eigenvalues log-uniform in
/// `[1/sqrt(cond), sqrt(cond)]`, so the condition number is at most `cond`.
pub fn random_pd(rng: &mut impl Rng, dim: usize, cond: f64) -> PDMatrix {
    let h = random_hermitian(rng, dim);
    let u = &PDMatrix::new(
        h.add(&HermitianMatrix::identity(dim).scale(4.0 * dim as f64))
            .unwrap(),
    )
    .expect("diagonally dominant")
    .eigen()
    .eigenvectors
    .clone();
    let half_log = 0.5 * cond.ln();
    let eigs: Vec<f64> = (0..dim)
        .map(|_| (rng.gen_range(-half_log..half_log)).exp())
        .collect();
    let d = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(eigs[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    PDMatrix::from_matrix(u * d * u.adjoint()).expect("positive spectrum")
}

/// Random invertible matrix (identity plus a modest perturbation).
pub fn random_invertible(rng: &mut impl Rng, dim: usize) -> DMatrix<Complex64> {
    loop {
        let m = DMatrix::from_fn(dim, dim, |i, j| {
            let base = if i == j { 1.0 } else { 0.0 };
            Complex64::new(
                base + rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
            )
        });
        if m.clone().lu().determinant().norm() > 1e-3 {
            return m;
        }
    }
}
