//! Shared fixtures for the round benchmarks.

use adamdo_core::objective::synthetic_logistic;
use adamdo_core::{AdaptiveConfig, HyperParams, LocalObjective, Problem, Schedule};

/// Synthetic logistic problem with moderate heterogeneity.
pub fn logistic_problem(m: usize, n: usize, d: usize, seed: u64) -> Problem {
    let nodes = synthetic_logistic(m, n, d, seed, 0.5, 1e-5).expect("valid sizes");
    Problem::new(nodes.into_iter().map(|o| Box::new(o) as Box<dyn LocalObjective>).collect()).expect("consistent nodes")
}

/// Constant schedules with the default adaptive matrix.
pub fn hyper_params(batch: usize, beta: f64, horizon: usize) -> HyperParams {
    HyperParams {
        gamma: 0.01,
        eta: Schedule::Constant(0.9),
        beta: Schedule::Constant(beta),
        batch,
        horizon,
        adaptive: AdaptiveConfig::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_consistent() {
        let p = logistic_problem(4, 10, 3, 1);
        assert_eq!((p.node_count(), p.components(), p.dim()), (4, 10, 3));
        assert!(hyper_params(2, 0.2, 10).validate(10).is_ok());
    }
}
