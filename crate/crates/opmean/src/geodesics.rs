//! Paths and arc lengths on the PD cone under the inverse-Riemannian
//! metric `ds = ||A^{-1} dA A^{-1}||_F`, plus divergence-center
//! stationarity checks for the four metrics of the introduction.
//!
//! The harmonic family `((1-t)A^{-1} + tB^{-1})^{-1}` is the constant
//! speed geodesic of the inverse metric, with distance
//! `||B^{-1} - A^{-1}||_F`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::divergence::{d_riemann, d_sdiv_squared};
use crate::error::{OpMeanError, Result};
use crate::matcore::{
    conjugate_by_root, frob_distance, frobenius_norm, matfun, HermitianMatrix, PDMatrix, RootSign,
};
use crate::sampling::random_unit_hermitian;

/// Step for central-difference path derivatives. Samplers are evaluated
/// slightly outside [0, 1] at the endpoints.
const DERIV_STEP: f64 = 1e-6;

/// Panel cap for arc-length refinement.
pub const MAX_PANELS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathFamily {
    Arithmetic,
    Geometric,
    Harmonic,
}

impl PathFamily {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "arithmetic" => Some(Self::Arithmetic),
            "geometric" => Some(Self::Geometric),
            "harmonic" => Some(Self::Harmonic),
            _ => None,
        }
    }
}

type Sampler = Arc<dyn Fn(f64) -> Result<PDMatrix> + Send + Sync>;

/// A smooth path of PD matrices from A to B, sampled at `t in [0, 1]`.
#[derive(Clone)]
pub struct PDPath {
    a: PDMatrix,
    b: PDMatrix,
    sampler: Sampler,
    label: String,
}

impl PDPath {
    /// One of the three weighted-mean families.
    pub fn family(a: PDMatrix, b: PDMatrix, family: PathFamily) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(OpMeanError::DimensionMismatch {
                left: a.dim(),
                right: b.dim(),
            });
        }
        let (sa, sb) = (a.clone(), b.clone());
        let label = match family {
            PathFamily::Arithmetic => "arithmetic",
            PathFamily::Geometric => "geometric",
            PathFamily::Harmonic => "harmonic",
        };
        // raw formulas rather than weighted_two_means: central differences
        // evaluate a hair outside [0, 1]
        let sampler: Sampler = match family {
            PathFamily::Arithmetic => Arc::new(move |t| {
                PDMatrix::new(sa.herm().scale(1.0 - t).add(&sb.herm().scale(t))?)
            }),
            PathFamily::Geometric => {
                let c = conjugate_by_root(&sa, &sb, RootSign::MinusHalf)?;
                Arc::new(move |t| {
                    let powered = PDMatrix::new(matfun(&c, |x| x.powf(t)))?;
                    conjugate_by_root(&sa, &powered, RootSign::PlusHalf)
                })
            }
            PathFamily::Harmonic => {
                let (ia, ib) = (sa.inverse(), sb.inverse());
                Arc::new(move |t| {
                    let mix = ia.herm().scale(1.0 - t).add(&ib.herm().scale(t))?;
                    Ok(PDMatrix::new(mix)?.inverse())
                })
            }
        };
        Ok(Self {
            a,
            b,
            sampler,
            label: label.into(),
        })
    }

    /// A user-supplied sampler; derivatives are taken by central
    /// differences, so only pointwise evaluation is required.
    pub fn custom(
        a: PDMatrix,
        b: PDMatrix,
        label: impl Into<String>,
        sampler: impl Fn(f64) -> Result<PDMatrix> + Send + Sync + 'static,
    ) -> Self {
        Self {
            a,
            b,
            sampler: Arc::new(sampler),
            label: label.into(),
        }
    }

    /// Harmonic path congruence-perturbed by `I + eps sin(pi t) Y`; a
    /// competitor for the minimality check.
    pub fn perturbed_harmonic(
        a: PDMatrix,
        b: PDMatrix,
        direction: HermitianMatrix,
        eps: f64,
    ) -> Result<Self> {
        let base = Self::family(a.clone(), b.clone(), PathFamily::Harmonic)?;
        let label = format!("perturbed-harmonic(eps={eps})");
        Ok(Self::custom(a, b, label, move |t| {
            let x = base.sample(t)?;
            let bump = direction.scale(eps * (std::f64::consts::PI * t).sin());
            let factor = HermitianMatrix::identity(x.dim()).add(&bump)?;
            PDMatrix::from_matrix(factor.matrix() * x.matrix() * factor.matrix())
        }))
    }

    pub fn endpoints(&self) -> (&PDMatrix, &PDMatrix) {
        (&self.a, &self.b)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn sample(&self, t: f64) -> Result<PDMatrix> {
        (self.sampler)(t)
    }

    /// `||X(t)^{-1} X'(t) X(t)^{-1}||_F` with X' by central differences.
    pub fn speed(&self, t: f64) -> Result<f64> {
        let x = self.sample(t)?;
        let xp = self.sample(t + DERIV_STEP)?;
        let xm = self.sample(t - DERIV_STEP)?;
        let deriv = xp.herm().sub(xm.herm())?.scale(1.0 / (2.0 * DERIV_STEP));
        let inv = x.inverse();
        let v = inv.matrix() * deriv.matrix() * inv.matrix();
        Ok(v.norm())
    }
}

/// Composite-Simpson arc length under the inverse metric, panels doubled
/// until two successive refinements agree to 1e-7.
pub fn arc_length_inverse_metric(path: &PDPath, n_panels: usize) -> Result<f64> {
    let mut n = n_panels.max(8);
    if n % 2 == 1 {
        n += 1;
    }
    let mut prev = composite_simpson(path, n)?;
    loop {
        n *= 2;
        if n > MAX_PANELS {
            return Err(OpMeanError::QuadratureStalled(MAX_PANELS));
        }
        let next = composite_simpson(path, n)?;
        if (next - prev).abs() < 1e-7 {
            return Ok(next);
        }
        prev = next;
    }
}

fn composite_simpson(path: &PDPath, n: usize) -> Result<f64> {
    let h = 1.0 / n as f64;
    let mut acc = path.speed(0.0)? + path.speed(1.0)?;
    for i in 1..n {
        let coeff = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += coeff * path.speed(i as f64 * h)?;
    }
    Ok(acc * h / 3.0)
}

/// Closed-form geodesic distance `||B^{-1} - A^{-1}||_F`.
pub fn geodesic_distance_inverse_metric(a: &PDMatrix, b: &PDMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(OpMeanError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    frob_distance(b.inverse().herm(), a.inverse().herm())
}

/// Speed at each of the given interior parameters.
pub fn speed_profile(path: &PDPath, ts: &[f64]) -> Result<Vec<f64>> {
    ts.iter().map(|&t| path.speed(t)).collect()
}

/// The four metrics whose two-point centers the introduction identifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterMetric {
    Euclidean,
    RiemannTrace,
    SDivergence,
    InverseMetric,
}

impl CenterMetric {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "euclidean" => Some(Self::Euclidean),
            "riemann_trace" => Some(Self::RiemannTrace),
            "s_divergence" => Some(Self::SDivergence),
            "inverse_metric" => Some(Self::InverseMetric),
            _ => None,
        }
    }
}

/// Certifies that the claimed center of each metric is a stationary point
/// of `X -> (d^2(A,X) + d^2(B,X))/2`: returns the max absolute central
/// difference over 20 seeded random unit Hermitian directions. The center
/// is the arithmetic mean for the Euclidean metric, the geometric mean
/// for the trace metric and the S-divergence, and the harmonic mean for
/// the inverse metric.
pub fn center_stationarity_check(
    metric: CenterMetric,
    a: &PDMatrix,
    b: &PDMatrix,
    seed: u64,
) -> Result<f64> {
    let center = match metric {
        CenterMetric::Euclidean => {
            PDMatrix::new(a.herm().add(b.herm())?.scale(0.5))?
        }
        CenterMetric::RiemannTrace | CenterMetric::SDivergence => {
            crate::means::mean_apply(&crate::means::geometric(), a, b)?
        }
        CenterMetric::InverseMetric => {
            let mix = a.inverse().herm().add(b.inverse().herm())?.scale(0.5);
            PDMatrix::new(mix)?.inverse()
        }
    };
    let d2 = |x: &PDMatrix, y: &PDMatrix| -> Result<f64> {
        match metric {
            CenterMetric::Euclidean => Ok(frob_distance(x.herm(), y.herm())?.powi(2)),
            CenterMetric::RiemannTrace => Ok(d_riemann(x, y)?.powi(2)),
            CenterMetric::SDivergence => d_sdiv_squared(x, y),
            CenterMetric::InverseMetric => {
                Ok(frob_distance(x.inverse().herm(), y.inverse().herm())?.powi(2))
            }
        }
    };
    let h = 1e-4 * frobenius_norm(center.herm()).max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let y = random_unit_hermitian(&mut rng, a.dim());
        let plus = PDMatrix::new(center.herm().add(&y.scale(h))?)?;
        let minus = PDMatrix::new(center.herm().add(&y.scale(-h))?)?;
        let fp = 0.5 * (d2(a, &plus)? + d2(b, &plus)?);
        let fm = 0.5 * (d2(a, &minus)? + d2(b, &minus)?);
        worst = worst.max(((fp - fm) / (2.0 * h)).abs());
    }
    Ok(worst)
}
