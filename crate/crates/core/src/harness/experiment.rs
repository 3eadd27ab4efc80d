use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::diagnostics::{default_theta, LyapunovCoeffs, LyapunovForm, LyapunovTerms};
use crate::error::{Error, Result};
use crate::objective::{
    parse_libsvm, partition, synthetic_logistic, synthetic_quadratic, LocalObjective, LogisticObjective, Problem,
};
use crate::optimizer::{run_with, Algorithm, RunOptions, SimOptions, Simulation, Trace};

use super::config::{ExperimentConfig, ObjectiveSource};
use super::trace::write_trace_csv;

/// Environment variable that redirects trace output into another directory.
pub const OUTPUT_DIR_ENV: &str = "ADAMDO_OUTPUT_DIR";

pub const LYAPUNOV_HEADER: &str =
    "step,potential,potential_recursion,loss,mean_err,estimator_err,table_err,consensus_err,tracking_err,direction";

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub trace: Trace,
    pub csv: PathBuf,
    pub wall_time: Duration,
    pub nu: f64,
}

impl ExperimentOutcome {
    pub fn summary_line(&self) -> String {
        let final_gap = self.trace.rows.last().map_or(f64::NAN, |r| r.stationary_gap);
        format!(
            "{}: {} steps, final gap {:.6e}, {} samples/node, {:.3}s -> {}",
            self.trace.algorithm,
            self.trace.steps,
            final_gap,
            self.trace.counters.samples,
            self.wall_time.as_secs_f64(),
            self.csv.display()
        )
    }
}

/// The configured output path, moved under `$ADAMDO_OUTPUT_DIR` when set.
pub fn resolve_output(cfg: &ExperimentConfig) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) => {
            let name = cfg.output.file_name().map_or_else(|| "trace.csv".into(), |n| n.to_os_string());
            PathBuf::from(dir).join(name)
        }
        None => cfg.output.clone(),
    }
}

/// `<output><suffix>`, e.g. `trace.csv.diverged`.
pub fn side_path(output: &Path, suffix: &str) -> PathBuf {
    let mut s = output.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn build_problem(cfg: &ExperimentConfig) -> Result<Problem> {
    let m = cfg.nodes;
    let boxed = |nodes: Vec<LogisticObjective>| {
        Problem::new(nodes.into_iter().map(|o| Box::new(o) as Box<dyn LocalObjective>).collect())
    };
    match &cfg.objective {
        ObjectiveSource::Synthetic { n, d, heterogeneity } => {
            boxed(synthetic_logistic(m, *n, *d, cfg.seed, *heterogeneity, cfg.lambda)?)
        }
        ObjectiveSource::Quadratic { n, d, heterogeneity } => {
            let (nodes, f_star) = synthetic_quadratic(m, *n, *d, cfg.seed, *heterogeneity)?;
            let p = Problem::new(nodes.into_iter().map(|o| Box::new(o) as Box<dyn LocalObjective>).collect())?;
            Ok(p.with_optimum(f_star))
        }
        ObjectiveSource::Libsvm { path, labels } => {
            let samples = parse_libsvm(path, *labels)?;
            let nodes = partition(samples, m, cfg.seed)?
                .into_iter()
                .map(|ds| LogisticObjective::new(ds.samples, cfg.lambda))
                .collect::<Result<Vec<_>>>()?;
            boxed(nodes)
        }
    }
}

fn lyapunov_coeffs(cfg: &ExperimentConfig, problem: &Problem, nu: f64) -> Result<LyapunovCoeffs> {
    let l = problem
        .smoothness()
        .ok_or_else(|| Error::Constraint("lyapunov diagnostics need a known smoothness constant".into()))?;
    let theta = cfg.theta.unwrap_or_else(|| default_theta(l));
    let eta = cfg.eta.value(cfg.horizon);
    let beta = cfg.beta.value(cfg.horizon);
    match cfg.algorithm {
        Algorithm::AdaMdof => LyapunovCoeffs::finite_sum(
            cfg.gamma,
            eta,
            cfg.rho,
            beta,
            nu,
            theta,
            l,
            problem.components(),
            cfg.batch,
        ),
        _ => LyapunovCoeffs::stochastic(cfg.gamma, eta, cfg.rho, beta, nu, theta, l),
    }
}

fn lyapunov_row(sim: &Simulation<'_>, coeffs: &LyapunovCoeffs) -> Option<String> {
    let snap = sim.snapshot()?;
    let terms = LyapunovTerms::collect(sim.problem(), snap, &sim.iterates());
    let finite_sum = sim.algorithm() == Algorithm::AdaMdof;
    let (def, rec) = if finite_sum {
        (
            terms.phi(coeffs, LyapunovForm::Definition).ok()?,
            terms.phi(coeffs, LyapunovForm::Recursion).ok()?,
        )
    } else {
        (
            terms.omega(coeffs, LyapunovForm::Definition),
            terms.omega(coeffs, LyapunovForm::Recursion),
        )
    };
    let f = |v: f64| format!("{v:.16e}");
    Some(format!(
        "{},{},{},{},{},{},{},{},{},{}",
        snap.t + 1,
        f(def),
        f(rec),
        f(terms.loss),
        f(terms.mean_error),
        f(terms.estimator_error),
        f(terms.table_error.unwrap_or(0.0)),
        f(terms.consensus_error),
        f(terms.tracking_error),
        f(terms.direction),
    ))
}

/// Runs the configured experiment, writing the trace to the resolved output
/// path.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_to(cfg, &resolve_output(cfg))
}

/// As [`run_experiment`], writing to `output`.
///
/// On divergence the partial trace is still written, next to a
/// `<output>.diverged` marker, and the divergence error is returned.
pub fn run_experiment_to(cfg: &ExperimentConfig, output: &Path) -> Result<ExperimentOutcome> {
    let problem = build_problem(cfg)?;
    let errors = cfg.violations(problem.components());
    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    let mixing = cfg.topology.build(cfg.nodes)?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let diverged = side_path(output, ".diverged");
    if diverged.exists() {
        std::fs::remove_file(&diverged).map_err(|e| Error::io(&diverged, e))?;
    }

    let options = RunOptions {
        cadence: cfg.record_every,
        sim: SimOptions {
            seed: cfg.seed,
            workers: cfg.workers,
            x0: Some(vec![cfg.x0; problem.dim()]),
            snapshots: cfg.lyapunov(),
            random_output: false,
        },
    };
    let coeffs = cfg
        .lyapunov()
        .then(|| lyapunov_coeffs(cfg, &problem, mixing.nu()))
        .transpose()?;
    let mut lyapunov = String::new();
    if coeffs.is_some() {
        lyapunov.push_str(LYAPUNOV_HEADER);
        lyapunov.push('\n');
    }

    let start = Instant::now();
    let result = run_with(
        cfg.algorithm,
        &problem,
        &mixing,
        cfg.hyper_params(),
        &options,
        &mut |sim| {
            if let Some(row) = coeffs.as_ref().and_then(|c| lyapunov_row(sim, c)) {
                lyapunov.push_str(&row);
                lyapunov.push('\n');
            }
            Ok(())
        },
    );
    let wall_time = start.elapsed();

    if coeffs.is_some() {
        let path = side_path(output, ".lyapunov.csv");
        std::fs::write(&path, &lyapunov).map_err(|e| Error::io(&path, e))?;
    }
    let trace = match result {
        Ok(trace) => trace,
        Err(Error::Divergence {
            node,
            step,
            quantity,
            trace: Some(partial),
        }) => {
            write_trace_csv(&partial, output)?;
            let msg = format!("node {node} produced a non-finite {quantity} at step {step}\n");
            std::fs::write(&diverged, msg).map_err(|e| Error::io(&diverged, e))?;
            return Err(Error::Divergence {
                node,
                step,
                quantity,
                trace: Some(partial),
            });
        }
        Err(e) => return Err(e),
    };
    write_trace_csv(&trace, output)?;

    let outcome = ExperimentOutcome {
        trace,
        csv: output.to_path_buf(),
        wall_time,
        nu: mixing.nu(),
    };
    let mut summary = String::new();
    let _ = writeln!(summary, "{}", outcome.summary_line());
    let _ = writeln!(summary, "nu = {:.16e}", outcome.nu);
    let _ = writeln!(summary, "wall_time_seconds = {:.6}", wall_time.as_secs_f64());
    let _ = writeln!(summary, "evaluation_epochs = {:.16e}", outcome.trace.evaluation_epochs());
    let path = side_path(output, ".summary");
    std::fs::write(&path, summary).map_err(|e| Error::io(&path, e))?;
    Ok(outcome)
}
