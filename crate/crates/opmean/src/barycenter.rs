//! Weighted multivariate barycenters on the positive definite cone.
//!
//! The barycenter is the unique minimizer of the strictly convex loss
//! `Q(X) = sum_j w_j phi_sigma(A_j, X)`, found by gradient descent with
//! Armijo backtracking. The solver requires a surjective representing
//! function; for the geometric mean the closed-form A#H mean is available
//! as an oracle and as the default initializer.

use crate::divergence::{grad_q, loss_q, WeightVector};
use crate::error::{OpMeanError, Result};
use crate::matcore::{
    conjugate_by_root, frobenius_norm, loewner_geq, HermitianMatrix, PDMatrix, RootSign,
};
use crate::means::{mean_apply, geometric, MeanDescriptor, TwoMeanKind, weighted_two_means};

/// A `(sigma, {A_j}, w)` barycenter instance.
#[derive(Debug, Clone)]
pub struct BarycenterProblem {
    pub sigma: MeanDescriptor,
    pub mats: Vec<PDMatrix>,
    pub weights: WeightVector,
}

impl BarycenterProblem {
    pub fn new(sigma: MeanDescriptor, mats: Vec<PDMatrix>, weights: WeightVector) -> Result<Self> {
        if !sigma.surjective() {
            return Err(OpMeanError::NotSurjective(sigma.name().into()));
        }
        if mats.is_empty() {
            return Err(OpMeanError::WeightError("empty matrix list".into()));
        }
        if mats.len() != weights.len() {
            return Err(OpMeanError::WeightError(format!(
                "{} matrices but {} weights",
                mats.len(),
                weights.len()
            )));
        }
        let dim = mats[0].dim();
        for m in &mats[1..] {
            if m.dim() != dim {
                return Err(OpMeanError::DimensionMismatch {
                    left: dim,
                    right: m.dim(),
                });
            }
        }
        Ok(Self {
            sigma,
            mats,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.mats[0].dim()
    }
}

/// Starting point for the descent.
#[derive(Debug, Clone)]
pub enum Init {
    /// Weighted arithmetic mean; always in the cone and in-domain for
    /// surjective means.
    Arithmetic,
    /// Arithmetic mean, except the A#H closed form when sigma is the
    /// geometric mean (the solver then serves as verification).
    ClosedFormWhenGeometric,
    User(PDMatrix),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Gradient tolerance, scaled by `sum_j w_j ||A_j^{-1}||_F` so the
    /// stopping rule is invariant under homogeneity.
    pub grad_tol: f64,
    pub max_iters: usize,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub init: Init,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            max_iters: 2000,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            init: Init::ClosedFormWhenGeometric,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: PDMatrix,
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub converged: bool,
    pub loss_trace: Vec<f64>,
}

/// Minimizes the loss Q over the PD cone.
///
/// The problem is first preconditioned by congruence with the inverse
/// square root of the weighted arithmetic mean, which the barycenter's
/// congruence invariance makes exact and which keeps the descent
/// well-conditioned. Line search: Armijo backtracking with a
/// Barzilai-Borwein trial step; a trial point that fails the PD
/// construction or leaves the domain is rejected the same way as an
/// insufficient decrease.
pub fn solve_barycenter(problem: &BarycenterProblem, config: &SolverConfig) -> Result<SolveReport> {
    if !problem.sigma.surjective() {
        return Err(OpMeanError::NotSurjective(problem.sigma.name().into()));
    }
    // m = 1: idempotency without iteration
    if problem.mats.len() == 1 {
        return Ok(SolveReport {
            x: problem.mats[0].clone(),
            iterations: 0,
            final_grad_norm: 0.0,
            converged: true,
            loss_trace: vec![0.0],
        });
    }

    let arith = weighted_arithmetic(&problem.mats, &problem.weights)?;
    let arith_root = arith.sqrt();
    let mats: Vec<PDMatrix> = problem
        .mats
        .iter()
        .map(|a| conjugate_by_root(&arith, a, RootSign::MinusHalf))
        .collect::<Result<_>>()?;

    let init = match &config.init {
        Init::Arithmetic => weighted_arithmetic(&mats, &problem.weights)?,
        Init::ClosedFormWhenGeometric => {
            if problem.sigma.name() == "geometric" {
                geometric_closed_form(&mats, &problem.weights)?
            } else {
                weighted_arithmetic(&mats, &problem.weights)?
            }
        }
        Init::User(x0) => conjugate_by_root(&arith, x0, RootSign::MinusHalf)?,
    };

    let report = descend(&problem.sigma, &mats, &problem.weights, init, config)?;

    // map back: X = S^{1/2} X' S^{1/2}
    let x = PDMatrix::from_matrix(arith_root.matrix() * report.x.matrix() * arith_root.matrix())?;
    Ok(SolveReport { x, ..report })
}

fn weighted_arithmetic(mats: &[PDMatrix], w: &WeightVector) -> Result<PDMatrix> {
    let dim = mats[0].dim();
    let mut acc = HermitianMatrix::zeros(dim);
    for (j, a) in mats.iter().enumerate() {
        acc = acc.add(&a.herm().scale(w[j]))?;
    }
    PDMatrix::new(acc)
}

fn descend(
    sigma: &MeanDescriptor,
    mats: &[PDMatrix],
    w: &WeightVector,
    init: PDMatrix,
    config: &SolverConfig,
) -> Result<SolveReport> {
    let scale: f64 = mats
        .iter()
        .enumerate()
        .map(|(j, a)| w[j] * frobenius_norm(a.inverse().herm()))
        .sum();
    let tol = config.grad_tol * scale;

    let mut x = init;
    let mut q = loss_q(sigma, mats, w, &x)?
        .finite()
        .expect("initializer is in-domain for surjective means");
    let mut trace = vec![q];
    // Grippo-style non-monotone reference window: Barzilai-Borwein steps
    // need transient loss increases to traverse ill-conditioned valleys
    let mut window = std::collections::VecDeque::from([q]);
    let mut grad = grad_q(sigma, mats, w, &x)?;
    let mut grad_norm = frobenius_norm(&grad);
    let mut prev: Option<(HermitianMatrix, HermitianMatrix)> = None; // (x, grad)

    for iter in 0..config.max_iters {
        if grad_norm <= tol {
            return Ok(SolveReport {
                x,
                iterations: iter,
                final_grad_norm: grad_norm,
                converged: true,
                loss_trace: trace,
            });
        }

        // Barzilai-Borwein trial step from the previous iterate, else a
        // scale-free guess ||X||/||G||.
        let mut step = match &prev {
            Some((px, pg)) => {
                let dx = x.herm().sub(px)?;
                let dg = grad.sub(pg)?;
                let sg = crate::matcore::trace_inner(&dx, &dg)?;
                let gg = crate::matcore::trace_inner(&dg, &dg)?;
                if sg > 0.0 && gg > 0.0 {
                    sg / gg
                } else {
                    frobenius_norm(x.herm()) / grad_norm
                }
            }
            None => 0.1 * frobenius_norm(x.herm()) / grad_norm,
        };

        let step_floor = 1e-18 * frobenius_norm(x.herm()) / grad_norm;
        let q_ref = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // once the Armijo decrease c*s*||G||^2 falls below the rounding
        // noise of Q it can no longer be observed in the loss values, so
        // a candidate is also accepted when its loss grows by at most
        // rounding noise while its gradient norm strictly shrinks
        let noise = 4.0 * f64::EPSILON * q_ref.abs().max(1.0);
        let mut accepted = None;
        while step > step_floor {
            let candidate = x.herm().add(&grad.scale(-step))?;
            if let Ok(y) = PDMatrix::new(candidate) {
                if let Ok(value) = loss_q(sigma, mats, w, &y) {
                    if let Some(qy) = value.finite() {
                        if qy <= q_ref - config.armijo_c * step * grad_norm * grad_norm {
                            accepted = Some((y, qy, None));
                            break;
                        }
                        if qy <= q_ref + noise {
                            if let Ok(gy) = grad_q(sigma, mats, w, &y) {
                                if frobenius_norm(&gy) < grad_norm {
                                    accepted = Some((y, qy, Some(gy)));
                                    break;
                                }
                            }
                        }
                    }
                }
            }
            step *= config.backtrack_factor;
        }

        let (y, qy, gy) = match accepted {
            Some(triple) => triple,
            None => {
                // no admissible decrease: at tolerance this is normal
                // termination at the minimizer's noise floor; above it the
                // step underflow signals ill-conditioning
                if grad_norm <= tol {
                    return Ok(SolveReport {
                        x,
                        iterations: iter,
                        final_grad_norm: grad_norm,
                        converged: true,
                        loss_trace: trace,
                    });
                }
                return Err(OpMeanError::LineSearchStalled);
            }
        };

        prev = Some((x.herm().clone(), grad.clone()));
        x = y;
        q = qy;
        window.push_back(q);
        if window.len() > 10 {
            window.pop_front();
        }
        // the reported trace is the monotone best-so-far envelope; the raw
        // per-iterate losses wobble transiently under non-monotone steps
        let last = *trace.last().expect("trace starts non-empty");
        trace.push(q.min(last));
        grad = match gy {
            Some(g) => g,
            None => grad_q(sigma, mats, w, &x)?,
        };
        grad_norm = frobenius_norm(&grad);
    }

    if grad_norm <= tol {
        return Ok(SolveReport {
            x,
            iterations: config.max_iters,
            final_grad_norm: grad_norm,
            converged: true,
            loss_trace: trace,
        });
    }
    Ok(SolveReport {
        x,
        iterations: config.max_iters,
        final_grad_norm: grad_norm,
        converged: false,
        loss_trace: trace,
    })
}

/// The geometric-case closed form: the A#H mean
/// `(sum_j w_j A_j^{-1})^{-1} # (sum_j w_j A_j)`.
pub fn geometric_closed_form(mats: &[PDMatrix], w: &WeightVector) -> Result<PDMatrix> {
    if mats.is_empty() {
        return Err(OpMeanError::WeightError("empty matrix list".into()));
    }
    if mats.len() != w.len() {
        return Err(OpMeanError::WeightError(format!(
            "{} matrices but {} weights",
            mats.len(),
            w.len()
        )));
    }
    let dim = mats[0].dim();
    let mut harm_inv = HermitianMatrix::zeros(dim);
    for (j, a) in mats.iter().enumerate() {
        harm_inv = harm_inv.add(&a.inverse().herm().scale(w[j]))?;
    }
    let harm = PDMatrix::new(harm_inv)?.inverse();
    let arith = weighted_arithmetic(mats, w)?;
    mean_apply(&geometric(), &harm, &arith)
}

/// `(A !_alpha B) # (A nabla_alpha B)`: the two-matrix weighted barycenter
/// of the geometric divergence in closed form.
pub fn two_point_geometric_weighted(a: &PDMatrix, b: &PDMatrix, alpha: f64) -> Result<PDMatrix> {
    let harm = weighted_two_means(TwoMeanKind::Harmonic, a, b, alpha)?;
    let arith = weighted_two_means(TwoMeanKind::Arithmetic, a, b, alpha)?;
    mean_apply(&geometric(), &harm, &arith)
}

/// Checks the Loewner lower bound `bc >= (sum_j w_j A_j^{-1})^{-1}`.
pub fn harmonic_lower_bound_check(problem: &BarycenterProblem, x: &PDMatrix) -> Result<bool> {
    let dim = problem.dim();
    let mut harm_inv = HermitianMatrix::zeros(dim);
    for (j, a) in problem.mats.iter().enumerate() {
        harm_inv = harm_inv.add(&a.inverse().herm().scale(problem.weights[j]))?;
    }
    let harm = PDMatrix::new(harm_inv)?.inverse();
    loewner_geq(x.herm(), harm.herm(), 1e-9)
}
