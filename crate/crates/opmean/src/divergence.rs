//! The divergence `phi_sigma(A, B) = tr g_sigma(A^{-1/2} B A^{-1/2})`,
//! the weighted loss Q it induces, and the trace metrics d_R and d_S.

use crate::error::{OpMeanError, Result};
use crate::matcore::{
    conjugate_by_root, HermitianMatrix, PDMatrix, RootSign,
};
use crate::means::MeanDescriptor;

/// A divergence value: finite and non-negative, or the explicit +inf
/// marker used when the spectrum leaves the range of the representing
/// function. Never a floating-point infinity leaking through arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceValue {
    Finite(f64),
    Infinite,
}

impl DivergenceValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, DivergenceValue::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            DivergenceValue::Finite(v) => Some(*v),
            DivergenceValue::Infinite => None,
        }
    }

    /// Rendering used by the CLI: a number, or the string "inf".
    pub fn render(&self) -> String {
        match self {
            DivergenceValue::Finite(v) => format!("{v}"),
            DivergenceValue::Infinite => "inf".into(),
        }
    }
}

/// Strictly positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
    /// True when the input sum deviated from 1 by more than 1e-9 and was
    /// rescaled; the CLI turns this into a warning.
    adjusted: bool,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(OpMeanError::WeightError("empty weight vector".into()));
        }
        for (j, &w) in weights.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(OpMeanError::WeightError(format!(
                    "weight {j} is {w}; weights must be strictly positive"
                )));
            }
        }
        let sum: f64 = weights.iter().sum();
        let adjusted = (sum - 1.0).abs() > 1e-9;
        let weights = weights.iter().map(|w| w / sum).collect();
        Ok(Self { weights, adjusted })
    }

    pub fn uniform(m: usize) -> Self {
        // not via new(): defaulted weights were never "adjusted", so no
        // normalization warning should ever surface for them
        Self {
            weights: vec![1.0 / m as f64; m],
            adjusted: false,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn was_adjusted(&self) -> bool {
        self.adjusted
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}

/// True iff `spec(A^{-1/2} B A^{-1/2})` lies inside `ran(f_sigma)`.
pub fn in_domain(sigma: &MeanDescriptor, a: &PDMatrix, b: &PDMatrix) -> Result<bool> {
    let c = conjugate_by_root(a, b, RootSign::MinusHalf)?;
    Ok(c.spec().iter().all(|&l| sigma.range().contains(l)))
}

/// `phi_sigma(A, B) = tr g(A^{-1/2} B A^{-1/2})`, or the +inf marker when
/// the spectrum leaves `ran(f_sigma)`. The trace of a matrix function is
/// a sum over the spectrum, so g is evaluated on eigenvalues directly.
pub fn phi(sigma: &MeanDescriptor, a: &PDMatrix, b: &PDMatrix) -> Result<DivergenceValue> {
    let c = conjugate_by_root(a, b, RootSign::MinusHalf)?;
    let mut total = 0.0;
    for &l in c.spec() {
        if !sigma.range().contains(l) {
            return Ok(DivergenceValue::Infinite);
        }
        total += sigma.g(l)?;
    }
    // g >= 0 pointwise; clamp away quadrature noise
    Ok(DivergenceValue::Finite(total.max(0.0)))
}

/// The loss `Q(X) = sum_j w_j phi(A_j, X)`; +inf if any term is.
/// Fixed accumulation order over j for bit-reproducibility.
pub fn loss_q(
    sigma: &MeanDescriptor,
    mats: &[PDMatrix],
    w: &WeightVector,
    x: &PDMatrix,
) -> Result<DivergenceValue> {
    if mats.len() != w.len() {
        return Err(OpMeanError::WeightError(format!(
            "{} matrices but {} weights",
            mats.len(),
            w.len()
        )));
    }
    let mut total = 0.0;
    for (j, a) in mats.iter().enumerate() {
        match phi(sigma, a, x)? {
            DivergenceValue::Finite(v) => total += w[j] * v,
            DivergenceValue::Infinite => return Ok(DivergenceValue::Infinite),
        }
    }
    Ok(DivergenceValue::Finite(total))
}

/// Trace-inner-product gradient of the loss at X:
/// `sum_j w_j A_j^{-1/2} (I - [f^{-1}(A_j^{-1/2} X A_j^{-1/2})]^{-1}) A_j^{-1/2}`.
pub fn grad_q(
    sigma: &MeanDescriptor,
    mats: &[PDMatrix],
    w: &WeightVector,
    x: &PDMatrix,
) -> Result<HermitianMatrix> {
    if mats.len() != w.len() {
        return Err(OpMeanError::WeightError(format!(
            "{} matrices but {} weights",
            mats.len(),
            w.len()
        )));
    }
    let dim = x.dim();
    let mut total = HermitianMatrix::zeros(dim);
    for (j, a) in mats.iter().enumerate() {
        let c = conjugate_by_root(a, x, RootSign::MinusHalf)?;
        // g'(lambda) per eigenvalue; RangeError here becomes a DomainError
        let mut gp = Vec::with_capacity(dim);
        for &l in c.spec() {
            let v = sigma.g_prime(l).map_err(|_| OpMeanError::DomainError {
                value: l,
                lo: sigma.range().lo,
                hi: sigma.range().hi,
            })?;
            gp.push(v);
        }
        let gmat = c.eigen().assemble(&gp);
        let root = a.inv_sqrt();
        let term = root.matrix() * gmat.matrix() * root.matrix();
        let term = HermitianMatrix::new(term)?;
        total = total.add(&term.scale(w[j]))?;
    }
    Ok(total)
}

/// Riemannian trace metric `d_R(X, Y) = ||log(X^{-1/2} Y X^{-1/2})||_F`.
pub fn d_riemann(x: &PDMatrix, y: &PDMatrix) -> Result<f64> {
    let c = conjugate_by_root(x, y, RootSign::MinusHalf)?;
    Ok(c.spec().iter().map(|&l| l.ln().powi(2)).sum::<f64>().sqrt())
}

/// Squared S-divergence `tr log((X+Y)/2) - tr(log X)/2 - tr(log Y)/2`,
/// clamped to zero when within numerical noise of zero.
pub fn d_sdiv_squared(x: &PDMatrix, y: &PDMatrix) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(OpMeanError::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    let mid = PDMatrix::new(x.herm().add(y.herm())?.scale(0.5))?;
    let tr_log = |m: &PDMatrix| m.spec().iter().map(|&l| l.ln()).sum::<f64>();
    let val = tr_log(&mid) - 0.5 * tr_log(x) - 0.5 * tr_log(y);
    if val < -1e-12 {
        return Err(OpMeanError::NegativeRadicand(val));
    }
    Ok(val.max(0.0))
}

/// S-divergence distance.
pub fn d_sdiv(x: &PDMatrix, y: &PDMatrix) -> Result<f64> {
    Ok(d_sdiv_squared(x, y)?.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{frobenius_norm, trace_inner};
    use crate::means::{all_builtins, arithmetic, geometric, logarithmic, mean_apply};
    use crate::sampling::{random_hermitian, random_invertible, random_pd};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weight_vector_normalizes_and_flags() {
        let w = WeightVector::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(w.as_slice(), &[0.25, 0.75]);
        assert!(w.was_adjusted());
        let exact = WeightVector::new(vec![0.5, 0.5]).unwrap();
        assert!(!exact.was_adjusted());
    }

    #[test]
    fn weight_vector_rejects_nonpositive() {
        assert!(WeightVector::new(vec![0.5, 0.0]).is_err());
        assert!(WeightVector::new(vec![0.5, -0.1]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
    }

    #[test]
    fn in_domain_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let a = random_pd(&mut rng, 3, 100.0);
        let b = random_pd(&mut rng, 3, 100.0);
        // geometric has full range
        assert!(in_domain(&geometric(), &a, &b).unwrap());
        // arithmetic: 0.4 below the range floor 1/2
        let i2 = PDMatrix::identity(2);
        let small = i2.scale(0.4).unwrap();
        assert!(!in_domain(&arithmetic(), &i2, &small).unwrap());
        // A sigma B is always in-domain relative to A
        for sigma in all_builtins() {
            let m = mean_apply(&sigma, &a, &b).unwrap();
            assert!(in_domain(&sigma, &a, &m).unwrap(), "{}", sigma.name());
        }
    }

    #[test]
    fn phi_vanishes_on_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_pd(&mut rng, 4, 100.0);
        for sigma in all_builtins() {
            let v = phi(&sigma, &a, &a).unwrap().finite().unwrap();
            assert!(v.abs() < 1e-10, "{}: phi(A,A) = {v}", sigma.name());
        }
    }

    #[test]
    fn phi_geometric_closed_form_example() {
        let i2 = PDMatrix::identity(2);
        let b = PDMatrix::diagonal(&[4.0, 0.25]).unwrap();
        let v = phi(&geometric(), &i2, &b).unwrap().finite().unwrap();
        assert!((v - 4.5).abs() < 1e-10);
    }

    #[test]
    fn phi_infinite_outside_domain() {
        let i2 = PDMatrix::identity(2);
        let small = i2.scale(0.4).unwrap();
        assert_eq!(
            phi(&arithmetic(), &i2, &small).unwrap(),
            DivergenceValue::Infinite
        );
    }

    #[test]
    fn phi_nonnegative_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..10 {
            let a = random_pd(&mut rng, 3, 30.0);
            let b = random_pd(&mut rng, 3, 30.0);
            for sigma in all_builtins() {
                if let Some(v) = phi(&sigma, &a, &b).unwrap().finite() {
                    assert!(v >= 0.0);
                    // A != B here, so phi must be strictly positive
                    assert!(v > 1e-12, "{}: phi = {v}", sigma.name());
                }
            }
        }
    }

    #[test]
    fn phi_inversion_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let a = random_pd(&mut rng, 3, 30.0);
            let b = random_pd(&mut rng, 3, 30.0);
            for sigma in all_builtins() {
                let lhs = phi(&sigma, &a.inverse(), &b.inverse()).unwrap();
                let rhs = phi(&sigma, &b, &a).unwrap();
                match (lhs, rhs) {
                    (DivergenceValue::Finite(l), DivergenceValue::Finite(r)) => {
                        assert!((l - r).abs() < 1e-9 * r.abs().max(1.0), "{}", sigma.name());
                    }
                    (l, r) => assert_eq!(l, r),
                }
            }
        }
    }

    #[test]
    fn phi_congruence_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..5 {
            let a = random_pd(&mut rng, 3, 30.0);
            let b = random_pd(&mut rng, 3, 30.0);
            let t = random_invertible(&mut rng, 3);
            let ta = crate::matcore::congruence(&t, &a).unwrap();
            let tb = crate::matcore::congruence(&t, &b).unwrap();
            for sigma in all_builtins() {
                let lhs = phi(&sigma, &ta, &tb).unwrap();
                let rhs = phi(&sigma, &a, &b).unwrap();
                match (lhs, rhs) {
                    (DivergenceValue::Finite(l), DivergenceValue::Finite(r)) => {
                        assert!((l - r).abs() < 1e-8 * r.abs().max(1.0), "{}", sigma.name());
                    }
                    (l, r) => assert_eq!(l, r),
                }
            }
        }
    }

    #[test]
    fn phi_geometric_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..5 {
            let a = random_pd(&mut rng, 4, 50.0);
            let b = random_pd(&mut rng, 4, 50.0);
            let ab = phi(&geometric(), &a, &b).unwrap().finite().unwrap();
            let ba = phi(&geometric(), &b, &a).unwrap().finite().unwrap();
            assert!((ab - ba).abs() < 1e-9 * ab.max(1.0));
        }
    }

    #[test]
    fn phi_logarithmic_asymmetry_witness() {
        // stored witness pair: the logarithmic divergence is not symmetric
        let a = PDMatrix::diagonal(&[1.0, 1.0]).unwrap();
        let b = PDMatrix::diagonal(&[9.0, 0.2]).unwrap();
        let sigma = logarithmic();
        let ab = phi(&sigma, &a, &b).unwrap().finite().unwrap();
        let ba = phi(&sigma, &b, &a).unwrap().finite().unwrap();
        assert!((ab - ba).abs() > 1e-3, "|{ab} - {ba}| too small");
    }

    #[test]
    fn loss_q_examples() {
        let a1 = PDMatrix::scalar(1.0).unwrap();
        let a4 = PDMatrix::scalar(4.0).unwrap();
        let w = WeightVector::uniform(2);
        let x = PDMatrix::scalar(2.0).unwrap();
        let q = loss_q(&geometric(), &[a1.clone(), a4], &w, &x)
            .unwrap()
            .finite()
            .unwrap();
        // g_#(2)/2 + g_#(1/2)/2 = 0.25 + 0.25
        assert!((q - 0.5).abs() < 1e-12);

        let single = loss_q(&geometric(), &[a1.clone()], &WeightVector::uniform(1), &a1)
            .unwrap()
            .finite()
            .unwrap();
        assert!(single.abs() < 1e-14);
    }

    #[test]
    fn loss_q_minimized_at_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let a = random_pd(&mut rng, 3, 30.0);
        let b = random_pd(&mut rng, 3, 30.0);
        let sigma = geometric();
        let w = WeightVector::uniform(2);
        let mats = [a.clone(), b.clone()];
        let m = mean_apply(&sigma, &a, &b).unwrap();
        let q_min = loss_q(&sigma, &mats, &w, &m).unwrap().finite().unwrap();
        for _ in 0..100 {
            let x = random_pd(&mut rng, 3, 30.0);
            let q = loss_q(&sigma, &mats, &w, &x).unwrap().finite().unwrap();
            assert!(q > q_min - 1e-12);
        }
    }

    #[test]
    fn grad_q_vanishes_at_single_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let a = random_pd(&mut rng, 4, 100.0);
        for sigma in all_builtins() {
            let g = grad_q(&sigma, &[a.clone()], &WeightVector::uniform(1), &a).unwrap();
            assert!(frobenius_norm(&g) < 1e-10, "{}", sigma.name());
        }
    }

    #[test]
    fn grad_q_vanishes_at_two_matrix_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        let a = random_pd(&mut rng, 3, 30.0);
        let b = random_pd(&mut rng, 3, 30.0);
        let m = mean_apply(&geometric(), &a, &b).unwrap();
        let g = grad_q(
            &geometric(),
            &[a, b],
            &WeightVector::uniform(2),
            &m,
        )
        .unwrap();
        assert!(frobenius_norm(&g) < 1e-9);
    }

    #[test]
    fn grad_q_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mats = [random_pd(&mut rng, 3, 10.0), random_pd(&mut rng, 3, 10.0)];
        let w = WeightVector::new(vec![0.3, 0.7]).unwrap();
        let x = random_pd(&mut rng, 3, 10.0);
        for sigma in all_builtins() {
            let in_dom = mats
                .iter()
                .all(|a| in_domain(&sigma, a, &x).unwrap());
            if !in_dom {
                continue;
            }
            let g = grad_q(&sigma, &mats, &w, &x).unwrap();
            let y = random_hermitian(&mut rng, 3);
            let t = 1e-5;
            let xp = PDMatrix::new(x.herm().add(&y.scale(t)).unwrap()).unwrap();
            let xm = PDMatrix::new(x.herm().add(&y.scale(-t)).unwrap()).unwrap();
            let qp = loss_q(&sigma, &mats, &w, &xp).unwrap().finite().unwrap();
            let qm = loss_q(&sigma, &mats, &w, &xm).unwrap().finite().unwrap();
            let fd = (qp - qm) / (2.0 * t);
            let inner = trace_inner(&g, &y).unwrap();
            assert!(
                (fd - inner).abs() < 1e-6 * inner.abs().max(1.0),
                "{}: fd {fd} vs inner {inner}",
                sigma.name()
            );
        }
    }

    #[test]
    fn second_difference_at_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let a = random_pd(&mut rng, 3, 10.0);
        let y = random_hermitian(&mut rng, 3);
        let t = 1e-4;
        let root = a.inv_sqrt();
        let conj_y = HermitianMatrix::new(root.matrix() * y.matrix() * root.matrix()).unwrap();
        let expected = 2.0 * trace_inner(&conj_y, &conj_y).unwrap();
        for sigma in all_builtins() {
            let w = WeightVector::uniform(1);
            let mats = [a.clone()];
            let q0 = loss_q(&sigma, &mats, &w, &a).unwrap().finite().unwrap();
            let xp = PDMatrix::new(a.herm().add(&y.scale(t)).unwrap()).unwrap();
            let xm = PDMatrix::new(a.herm().add(&y.scale(-t)).unwrap()).unwrap();
            let qp = loss_q(&sigma, &mats, &w, &xp).unwrap().finite().unwrap();
            let qm = loss_q(&sigma, &mats, &w, &xm).unwrap().finite().unwrap();
            let second = (qp + qm - 2.0 * q0) / (t * t);
            assert!(
                (second - expected).abs() < 1e-4 * expected.abs().max(1.0),
                "{}: {second} vs {expected}",
                sigma.name()
            );
        }
    }

    #[test]
    fn in_betweenness_all_mean_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let a = random_pd(&mut rng, 3, 30.0);
            let b = random_pd(&mut rng, 3, 30.0);
            for sigma in all_builtins() {
                let phi_ab = phi(&sigma, &a, &b).unwrap();
                for tau in all_builtins() {
                    let m = mean_apply(&tau, &a, &b).unwrap();
                    let phi_am = phi(&sigma, &a, &m).unwrap();
                    match (phi_am, phi_ab) {
                        (DivergenceValue::Finite(am), DivergenceValue::Finite(ab)) => {
                            assert!(
                                am <= ab + 1e-12,
                                "{} / {}: {am} > {ab}",
                                sigma.name(),
                                tau.name()
                            );
                        }
                        (DivergenceValue::Infinite, DivergenceValue::Finite(_)) => {
                            panic!("mean left the domain while endpoint was inside")
                        }
                        _ => {}
                    }
                }
            }
        }
    }

    #[test]
    fn domain_convex_along_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..10 {
            let a = random_pd(&mut rng, 3, 10.0);
            let x = random_pd(&mut rng, 3, 10.0);
            let y = random_pd(&mut rng, 3, 10.0);
            for sigma in all_builtins() {
                if in_domain(&sigma, &a, &x).unwrap() && in_domain(&sigma, &a, &y).unwrap() {
                    for t in [0.25, 0.5, 0.75] {
                        let z = PDMatrix::new(
                            x.herm().scale(1.0 - t).add(&y.herm().scale(t)).unwrap(),
                        )
                        .unwrap();
                        assert!(in_domain(&sigma, &a, &z).unwrap(), "{}", sigma.name());
                    }
                }
            }
        }
    }

    #[test]
    fn d_riemann_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let a = random_pd(&mut rng, 3, 30.0);
        assert!(d_riemann(&a, &a).unwrap() < 1e-10);
        let one = PDMatrix::scalar(1.0).unwrap();
        let four = PDMatrix::scalar(4.0).unwrap();
        assert!((d_riemann(&one, &four).unwrap() - 4f64.ln()).abs() < 1e-12);
        // congruence invariance
        let b = random_pd(&mut rng, 3, 30.0);
        let t = random_invertible(&mut rng, 3);
        let ta = crate::matcore::congruence(&t, &a).unwrap();
        let tb = crate::matcore::congruence(&t, &b).unwrap();
        let d1 = d_riemann(&a, &b).unwrap();
        let d2 = d_riemann(&ta, &tb).unwrap();
        assert!((d1 - d2).abs() < 1e-9 * d1.max(1.0));
    }

    #[test]
    fn d_sdiv_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let a = random_pd(&mut rng, 3, 30.0);
        assert!(d_sdiv(&a, &a).unwrap() < 1e-7);
        let one = PDMatrix::scalar(1.0).unwrap();
        let four = PDMatrix::scalar(4.0).unwrap();
        let expected = 1.25f64.ln().sqrt();
        assert!((d_sdiv(&one, &four).unwrap() - expected).abs() < 1e-12);
        let b = random_pd(&mut rng, 3, 30.0);
        let xy = d_sdiv(&a, &b).unwrap();
        let yx = d_sdiv(&b, &a).unwrap();
        assert!((xy - yx).abs() < 1e-12 * xy.max(1.0));
    }
}
