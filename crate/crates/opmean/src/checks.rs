//! Invariant suites runnable against user-supplied matrix sets; the
//! library side of the CLI `check` subcommand. Every check reports a
//! measured residual against its pinned threshold.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::barycenter::{
    geometric_closed_form, harmonic_lower_bound_check, solve_barycenter, BarycenterProblem,
    SolverConfig,
};
use crate::divergence::{grad_q, phi, DivergenceValue, WeightVector};
use crate::error::Result;
use crate::geodesics::{
    arc_length_inverse_metric, center_stationarity_check, geodesic_distance_inverse_metric,
    speed_profile, CenterMetric, PDPath, PathFamily,
};
use crate::matcore::{congruence, frob_distance, frobenius_norm, PDMatrix};
use crate::means::{all_builtins, mean_apply, MeanDescriptor};
use crate::sampling::random_invertible;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable(String),
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub status: CheckStatus,
    pub residual: Option<f64>,
    pub threshold: Option<f64>,
}

impl CheckOutcome {
    fn measured(name: &str, residual: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            status: if residual <= threshold {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            residual: Some(residual),
            threshold: Some(threshold),
        }
    }

    fn na(name: &str, reason: &str) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::NotApplicable(reason.into()),
            residual: None,
            threshold: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }

    pub fn render(&self) -> String {
        match &self.status {
            CheckStatus::Pass => format!(
                "PASS  {}  (residual {:.3e} <= {:.1e})",
                self.name,
                self.residual.unwrap_or(0.0),
                self.threshold.unwrap_or(0.0)
            ),
            CheckStatus::Fail => format!(
                "FAIL  {}  (residual {:.3e} > {:.1e})",
                self.name,
                self.residual.unwrap_or(f64::NAN),
                self.threshold.unwrap_or(0.0)
            ),
            CheckStatus::NotApplicable(reason) => {
                format!("SKIP  {}  (not-applicable: {reason})", self.name)
            }
        }
    }
}

fn pair_of(mats: &[PDMatrix]) -> (PDMatrix, PDMatrix) {
    let a = mats[0].clone();
    let b = if mats.len() > 1 {
        mats[1].clone()
    } else {
        mats[0].clone()
    };
    (a, b)
}

/// Divergence-axiom and invariance checks on the first (up to) two
/// matrices of the set.
pub fn divergence_suite(
    sigma: &MeanDescriptor,
    mats: &[PDMatrix],
    seed: u64,
) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = pair_of(mats);
    let mut out = Vec::new();

    // nonnegativity
    match phi(sigma, &a, &b)? {
        DivergenceValue::Finite(v) => {
            out.push(CheckOutcome::measured("phi-nonnegative", (-v).max(0.0), 0.0));
        }
        DivergenceValue::Infinite => {
            out.push(CheckOutcome::na("phi-nonnegative", "phi is infinite on this pair"));
        }
    }

    // phi(A, A) = 0
    let diag = phi(sigma, &a, &a)?.finite().unwrap_or(f64::INFINITY);
    out.push(CheckOutcome::measured("phi-definiteness-diagonal", diag.abs(), 1e-10));

    // inversion identity
    let inv_lhs = phi(sigma, &a.inverse(), &b.inverse())?;
    let inv_rhs = phi(sigma, &b, &a)?;
    match (inv_lhs, inv_rhs) {
        (DivergenceValue::Finite(l), DivergenceValue::Finite(r)) => {
            out.push(CheckOutcome::measured(
                "phi-inversion-identity",
                (l - r).abs() / r.abs().max(1.0),
                1e-9,
            ));
        }
        _ => out.push(CheckOutcome::na("phi-inversion-identity", "phi infinite")),
    }

    // congruence invariance with a seeded random T
    let t = random_invertible(&mut rng, a.dim());
    let ta = congruence(&t, &a)?;
    let tb = congruence(&t, &b)?;
    match (phi(sigma, &ta, &tb)?, phi(sigma, &a, &b)?) {
        (DivergenceValue::Finite(l), DivergenceValue::Finite(r)) => {
            out.push(CheckOutcome::measured(
                "phi-congruence-invariance",
                (l - r).abs() / r.abs().max(1.0),
                1e-8,
            ));
        }
        _ => out.push(CheckOutcome::na("phi-congruence-invariance", "phi infinite")),
    }

    // symmetry holds only for the geometric mean
    if sigma.name() == "geometric" {
        let ab = phi(sigma, &a, &b)?.finite().unwrap_or(f64::NAN);
        let ba = phi(sigma, &b, &a)?.finite().unwrap_or(f64::NAN);
        out.push(CheckOutcome::measured(
            "phi-symmetry",
            (ab - ba).abs() / ab.abs().max(1.0),
            1e-9,
        ));
    } else {
        out.push(CheckOutcome::na("phi-symmetry", "asymmetric mean"));
    }

    // in-betweenness against every registered tau
    let mut worst = 0.0f64;
    let mut applicable = false;
    if let DivergenceValue::Finite(ab) = phi(sigma, &a, &b)? {
        for tau in all_builtins() {
            let m = mean_apply(&tau, &a, &b)?;
            if let DivergenceValue::Finite(am) = phi(sigma, &a, &m)? {
                applicable = true;
                worst = worst.max(am - ab);
            }
        }
    }
    if applicable {
        out.push(CheckOutcome::measured("phi-in-betweenness", worst, 1e-12));
    } else {
        out.push(CheckOutcome::na("phi-in-betweenness", "phi infinite"));
    }

    // gradient vanishes at the diagonal
    let w = WeightVector::uniform(1);
    let g = grad_q(sigma, &[a.clone()], &w, &a)?;
    out.push(CheckOutcome::measured(
        "grad-vanishes-at-diagonal",
        frobenius_norm(&g),
        1e-8,
    ));

    Ok(out)
}

/// Barycenter checks on the full set.
pub fn barycenter_suite(
    sigma: &MeanDescriptor,
    mats: &[PDMatrix],
    weights: &WeightVector,
) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    if !sigma.surjective() {
        out.push(CheckOutcome::na(
            "barycenter-suite",
            "non-surjective representing function",
        ));
        return Ok(out);
    }
    let problem = BarycenterProblem::new(sigma.clone(), mats.to_vec(), weights.clone())?;
    let report = solve_barycenter(&problem, &SolverConfig::default())?;
    out.push(CheckOutcome::measured(
        "solver-converged",
        if report.converged { 0.0 } else { 1.0 },
        0.0,
    ));

    let scale: f64 = mats
        .iter()
        .enumerate()
        .map(|(j, a)| weights[j] * frobenius_norm(a.inverse().herm()))
        .sum();
    let g = grad_q(sigma, mats, weights, &report.x)?;
    out.push(CheckOutcome::measured(
        "critical-point-residual",
        frobenius_norm(&g) / scale,
        1e-8,
    ));

    let mut trace_ok = 0.0f64;
    for pair in report.loss_trace.windows(2) {
        trace_ok = trace_ok.max(pair[1] - pair[0]);
    }
    out.push(CheckOutcome::measured("loss-trace-decreasing", trace_ok, 1e-14));

    let bound = harmonic_lower_bound_check(&problem, &report.x)?;
    out.push(CheckOutcome::measured(
        "harmonic-lower-bound",
        if bound { 0.0 } else { 1.0 },
        0.0,
    ));

    if sigma.name() == "geometric" {
        let cf = geometric_closed_form(mats, weights)?;
        out.push(CheckOutcome::measured(
            "geometric-closed-form-residual",
            frob_distance(report.x.herm(), cf.herm())? / frobenius_norm(cf.herm()),
            1e-7,
        ));
    } else {
        out.push(CheckOutcome::na(
            "geometric-closed-form-residual",
            "closed form exists only for the geometric mean",
        ));
    }

    if mats.len() == 2 && (weights[0] - 0.5).abs() < 1e-12 {
        let m = mean_apply(sigma, &mats[0], &mats[1])?;
        out.push(CheckOutcome::measured(
            "two-matrix-theorem",
            frob_distance(report.x.herm(), m.herm())? / frobenius_norm(m.herm()),
            1e-7,
        ));
    }

    // idempotency against the first matrix
    let p1 = BarycenterProblem::new(
        sigma.clone(),
        vec![mats[0].clone(), mats[0].clone()],
        WeightVector::uniform(2),
    )?;
    let r1 = solve_barycenter(&p1, &SolverConfig::default())?;
    out.push(CheckOutcome::measured(
        "idempotency",
        frob_distance(r1.x.herm(), mats[0].herm())? / frobenius_norm(mats[0].herm()),
        1e-7,
    ));

    Ok(out)
}

/// Geodesic checks on the first (up to) two matrices of the set.
pub fn geodesic_suite(mats: &[PDMatrix], seed: u64) -> Result<Vec<CheckOutcome>> {
    let (a, b) = pair_of(mats);
    let mut out = Vec::new();

    for family in [
        PathFamily::Arithmetic,
        PathFamily::Geometric,
        PathFamily::Harmonic,
    ] {
        let path = PDPath::family(a.clone(), b.clone(), family)?;
        let e0 = frob_distance(path.sample(0.0)?.herm(), a.herm())?;
        let e1 = frob_distance(path.sample(1.0)?.herm(), b.herm())?;
        out.push(CheckOutcome::measured(
            &format!("endpoints-{}", path.label()),
            e0.max(e1),
            1e-10,
        ));
    }

    let delta = geodesic_distance_inverse_metric(&a, &b)?;
    let harmonic = PDPath::family(a.clone(), b.clone(), PathFamily::Harmonic)?;
    let len = arc_length_inverse_metric(&harmonic, 8)?;
    out.push(CheckOutcome::measured(
        "harmonic-arc-length-vs-distance",
        (len - delta).abs(),
        1e-5,
    ));

    let speeds = speed_profile(&harmonic, &[0.1, 0.3, 0.5, 0.7, 0.9])?;
    let speed_dev = speeds
        .iter()
        .map(|s| (s - delta).abs())
        .fold(0.0f64, f64::max);
    out.push(CheckOutcome::measured("harmonic-constant-speed", speed_dev, 1e-5));

    for family in [PathFamily::Arithmetic, PathFamily::Geometric] {
        let path = PDPath::family(a.clone(), b.clone(), family)?;
        let l = arc_length_inverse_metric(&path, 8)?;
        out.push(CheckOutcome::measured(
            &format!("lower-bound-{}", path.label()),
            delta - l,
            1e-5,
        ));
    }

    for metric in [
        CenterMetric::Euclidean,
        CenterMetric::RiemannTrace,
        CenterMetric::SDivergence,
        CenterMetric::InverseMetric,
    ] {
        let worst = center_stationarity_check(metric, &a, &b, seed)?;
        out.push(CheckOutcome::measured(
            &format!("center-stationarity-{metric:?}"),
            worst,
            1e-5,
        ));
    }

    Ok(out)
}
