//! `opmean`: command-line front end for Kubo-Ando means, divergences,
//! barycenters, and inverse-metric geodesics over JSON matrix-set files.

use clap::{Parser, Subcommand};
use serde_json::json;

use opmean::barycenter::{
    geometric_closed_form, solve_barycenter, BarycenterProblem, SolverConfig,
};
use opmean::checks;
use opmean::divergence::{phi, WeightVector};
use opmean::error::OpMeanError;
use opmean::fileio::{load_set, matrix_to_value, MatrixSet, ResultRecord};
use opmean::geodesics::{
    arc_length_inverse_metric, geodesic_distance_inverse_metric, speed_profile, PDPath, PathFamily,
};
use opmean::means::{builtin, mean_apply, weighted_two_means, MeanDescriptor, TwoMeanKind};

const EXIT_VALIDATION: i32 = 2;
const EXIT_UNSUPPORTED_MEAN: i32 = 3;
const EXIT_NO_CONVERGENCE: i32 = 4;
const EXIT_CHECK_FAILED: i32 = 5;

#[derive(Parser)]
#[command(name = "opmean", version, about = "Kubo-Ando operator means, divergences, and barycenters on the positive definite cone")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-matrix mean A sigma B, optionally alpha-weighted for the
    /// arithmetic/geometric/harmonic families
    Mean {
        #[arg(long)]
        input: String,
        #[arg(long)]
        mean: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Divergence phi_sigma(A, B); prints "inf" outside the domain
    Divergence {
        #[arg(long)]
        input: String,
        #[arg(long)]
        mean: Option<String>,
    },
    /// Weighted barycenter of the matrix set
    Bary {
        #[arg(long)]
        input: String,
        #[arg(long)]
        mean: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Arc length, geodesic distance, and speed profile of a path family
    Geodesic {
        #[arg(long)]
        input: String,
        #[arg(long, default_value = "harmonic")]
        family: String,
        #[arg(long, default_value = "inverse")]
        metric: String,
        #[arg(long, default_value_t = 9)]
        samples: usize,
    },
    /// Run invariant suites against the input set
    Check {
        #[arg(long)]
        input: String,
        #[arg(long)]
        mean: Option<String>,
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

fn main() {
    std::process::exit(run());
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    code
}

fn load(input: &str) -> Result<MatrixSet, i32> {
    load_set(input).map_err(|e| fail(EXIT_VALIDATION, e))
}

fn resolve_mean(flag: &Option<String>, set: &MatrixSet) -> Result<MeanDescriptor, i32> {
    let name = flag
        .clone()
        .or_else(|| set.mean.clone())
        .ok_or_else(|| fail(EXIT_VALIDATION, "no mean selected: pass --mean or set \"mean\" in the input file"))?;
    builtin(&name).map_err(|e| fail(EXIT_UNSUPPORTED_MEAN, e))
}

fn seed_from_env() -> u64 {
    std::env::var("OPMEAN_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(42)
}

fn warn_if_adjusted(w: &WeightVector) {
    if w.was_adjusted() {
        eprintln!("warning: weights did not sum to 1 and were normalized");
    }
}

fn run() -> i32 {
    let cli = Cli::parse();
    match cli.command {
        Command::Mean { input, mean, alpha } => cmd_mean(&input, &mean, alpha),
        Command::Divergence { input, mean } => cmd_divergence(&input, &mean),
        Command::Bary {
            input,
            mean,
            tol,
            max_iters,
        } => cmd_bary(&input, &mean, tol, max_iters),
        Command::Geodesic {
            input,
            family,
            metric,
            samples,
        } => cmd_geodesic(&input, &family, &metric, samples),
        Command::Check { input, mean, suite } => cmd_check(&input, &mean, &suite),
    }
}

fn cmd_mean(input: &str, mean: &Option<String>, alpha_flag: Option<f64>) -> i32 {
    let set = match load(input) {
        Ok(s) => s,
        Err(c) => return c,
    };
    if set.matrices.len() != 2 {
        return fail(
            EXIT_VALIDATION,
            format!("mean requires exactly 2 matrices, found {}", set.matrices.len()),
        );
    }
    let sigma = match resolve_mean(mean, &set) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let alpha = alpha_flag.or(set.alpha);
    let (a, b) = (&set.matrices[0], &set.matrices[1]);
    let result = match alpha {
        None => mean_apply(&sigma, a, b),
        Some(al) => {
            let kind = match sigma.name() {
                "arithmetic" => TwoMeanKind::Arithmetic,
                "geometric" => TwoMeanKind::Geometric,
                "harmonic" => TwoMeanKind::Harmonic,
                other => {
                    return fail(
                        EXIT_VALIDATION,
                        format!("alpha weighting is only defined for arithmetic, geometric, harmonic; got '{other}'"),
                    )
                }
            };
            weighted_two_means(kind, a, b, al)
        }
    };
    match result {
        Ok(m) => {
            let record = ResultRecord {
                op: "mean".into(),
                inputs: json!({ "mean": sigma.name(), "alpha": alpha, "dim": a.dim() }),
                result: matrix_to_value(m.herm(), set.complex_encoded),
                report: None,
            };
            println!("{}", record.render());
            0
        }
        Err(e @ OpMeanError::WeightError(_)) => fail(EXIT_VALIDATION, e),
        Err(e) => fail(EXIT_VALIDATION, e),
    }
}

fn cmd_divergence(input: &str, mean: &Option<String>) -> i32 {
    let set = match load(input) {
        Ok(s) => s,
        Err(c) => return c,
    };
    if set.matrices.len() != 2 {
        return fail(
            EXIT_VALIDATION,
            format!(
                "divergence requires exactly 2 matrices, found {}",
                set.matrices.len()
            ),
        );
    }
    let sigma = match resolve_mean(mean, &set) {
        Ok(s) => s,
        Err(c) => return c,
    };
    match phi(&sigma, &set.matrices[0], &set.matrices[1]) {
        Ok(v) => {
            let result = match v.finite() {
                Some(x) => json!(x),
                None => json!("inf"),
            };
            let record = ResultRecord {
                op: "divergence".into(),
                inputs: json!({ "mean": sigma.name(), "dim": set.matrices[0].dim() }),
                result,
                report: None,
            };
            println!("{}", record.render());
            0
        }
        Err(e) => fail(EXIT_VALIDATION, e),
    }
}

fn cmd_bary(
    input: &str,
    mean: &Option<String>,
    tol: Option<f64>,
    max_iters: Option<usize>,
) -> i32 {
    let set = match load(input) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let sigma = match resolve_mean(mean, &set) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let weights = set
        .weights
        .clone()
        .unwrap_or_else(|| WeightVector::uniform(set.matrices.len()));
    warn_if_adjusted(&weights);
    let problem = match BarycenterProblem::new(sigma.clone(), set.matrices.clone(), weights.clone())
    {
        Ok(p) => p,
        Err(e @ OpMeanError::NotSurjective(_)) => return fail(EXIT_UNSUPPORTED_MEAN, e),
        Err(e) => return fail(EXIT_VALIDATION, e),
    };
    let mut config = SolverConfig::default();
    if let Some(t) = tol {
        config.grad_tol = t;
    }
    if let Some(n) = max_iters {
        config.max_iters = n;
    }
    let report = match solve_barycenter(&problem, &config) {
        Ok(r) => r,
        Err(e @ OpMeanError::NotSurjective(_)) => return fail(EXIT_UNSUPPORTED_MEAN, e),
        Err(e) => return fail(EXIT_NO_CONVERGENCE, e),
    };
    let closed_form_residual = if sigma.name() == "geometric" {
        match geometric_closed_form(&set.matrices, &weights) {
            Ok(cf) => opmean::matcore::frob_distance(report.x.herm(), cf.herm()).ok(),
            Err(_) => None,
        }
    } else {
        None
    };
    let record = ResultRecord {
        op: "bary".into(),
        inputs: json!({
            "mean": sigma.name(),
            "weights": weights.as_slice(),
            "dim": set.matrices[0].dim(),
            "count": set.matrices.len(),
        }),
        result: matrix_to_value(report.x.herm(), set.complex_encoded),
        report: Some(json!({
            "iterations": report.iterations,
            "final_grad_norm": report.final_grad_norm,
            "converged": report.converged,
            "closed_form_residual": closed_form_residual,
        })),
    };
    println!("{}", record.render());
    if report.converged {
        0
    } else {
        EXIT_NO_CONVERGENCE
    }
}

fn cmd_geodesic(input: &str, family: &str, metric: &str, samples: usize) -> i32 {
    let set = match load(input) {
        Ok(s) => s,
        Err(c) => return c,
    };
    if set.matrices.len() != 2 {
        return fail(
            EXIT_VALIDATION,
            format!(
                "geodesic requires exactly 2 matrices, found {}",
                set.matrices.len()
            ),
        );
    }
    if metric != "inverse" {
        return fail(
            EXIT_VALIDATION,
            format!("unsupported metric '{metric}' (arc lengths are computed under the inverse metric)"),
        );
    }
    let fam = match PathFamily::parse(family) {
        Some(f) => f,
        None => {
            return fail(
                EXIT_VALIDATION,
                format!("unknown family '{family}' (expected arithmetic | geometric | harmonic)"),
            )
        }
    };
    let (a, b) = (set.matrices[0].clone(), set.matrices[1].clone());
    let path = match PDPath::family(a.clone(), b.clone(), fam) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_VALIDATION, e),
    };
    let ts: Vec<f64> = (1..=samples)
        .map(|i| i as f64 / (samples as f64 + 1.0))
        .collect();
    let computation = (|| -> opmean::Result<(f64, f64, Vec<f64>)> {
        let length = arc_length_inverse_metric(&path, 8)?;
        let delta = geodesic_distance_inverse_metric(&a, &b)?;
        let speeds = speed_profile(&path, &ts)?;
        Ok((length, delta, speeds))
    })();
    match computation {
        Ok((length, delta, speeds)) => {
            let record = ResultRecord {
                op: "geodesic".into(),
                inputs: json!({ "family": family, "metric": metric, "samples": samples }),
                result: json!({
                    "arc_length": length,
                    "geodesic_distance": delta,
                    "speed_profile": { "t": ts, "speed": speeds },
                }),
                report: None,
            };
            println!("{}", record.render());
            0
        }
        Err(e) => fail(EXIT_VALIDATION, e),
    }
}

fn cmd_check(input: &str, mean: &Option<String>, suite: &str) -> i32 {
    let set = match load(input) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let sigma = match resolve_mean(mean, &set) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let weights = set
        .weights
        .clone()
        .unwrap_or_else(|| WeightVector::uniform(set.matrices.len()));
    let seed = seed_from_env();

    let mut outcomes = Vec::new();
    let run_suite = |name: &str| suite == "all" || suite == name;
    if !["all", "divergence", "barycenter", "geodesic"].contains(&suite) {
        return fail(
            EXIT_VALIDATION,
            format!("unknown suite '{suite}' (expected divergence | barycenter | geodesic | all)"),
        );
    }
    let collected = (|| -> opmean::Result<()> {
        if run_suite("divergence") {
            outcomes.extend(checks::divergence_suite(&sigma, &set.matrices, seed)?);
        }
        if run_suite("barycenter") {
            outcomes.extend(checks::barycenter_suite(&sigma, &set.matrices, &weights)?);
        }
        if run_suite("geodesic") {
            outcomes.extend(checks::geodesic_suite(&set.matrices, seed)?);
        }
        Ok(())
    })();
    if let Err(e) = collected {
        return fail(EXIT_VALIDATION, e);
    }

    for o in &outcomes {
        println!("{}", o.render());
    }
    if let Some(first) = outcomes.iter().find(|o| o.failed()) {
        eprintln!("error: check suite failed at invariant '{}'", first.name);
        return EXIT_CHECK_FAILED;
    }
    0
}
