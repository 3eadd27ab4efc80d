use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{NodeRng, STREAM_DATA_BASE, STREAM_PLANT};
use crate::vector;

use super::quadratic::global_minimizer;
use super::{LogisticObjective, QuadraticObjective, Sample};

/// Probability that a planted label is flipped.
const LABEL_NOISE: f64 = 0.05;
/// Cluster-mean offset, in feature standard deviations, at heterogeneity 1.
const CLUSTER_SHIFT: f64 = 2.0;

fn gaussian(rng: &mut NodeRng, d: usize) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng.inner())).collect()
}

fn check_sizes(m: usize, n: usize, d: usize, heterogeneity: f64) -> Result<()> {
    if m == 0 || n == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "synthetic data needs positive m, n, d (got {m}, {n}, {d})"
        )));
    }
    if !(0.0..=1.0).contains(&heterogeneity) {
        return Err(Error::InvalidParameter(format!(
            "heterogeneity must lie in [0, 1], got {heterogeneity}"
        )));
    }
    Ok(())
}

/// Binary classification data from a planted linear rule.
///
/// Node `i` draws features `a ~ N(μ_i, I)` where `μ_i = h·s·v_i` for a random
/// unit direction `v_i`; `h = 0` gives every node the same distribution.
/// Labels are `sign⟨w*, a⟩`, flipped with small probability.
pub fn synthetic_logistic(
    m: usize,
    n: usize,
    d: usize,
    seed: u64,
    heterogeneity: f64,
    lambda: f64,
) -> Result<Vec<LogisticObjective>> {
    check_sizes(m, n, d, heterogeneity)?;
    let mut plant = NodeRng::stream(seed, STREAM_PLANT);
    let mut w_star = gaussian(&mut plant, d);
    vector::scale(1.0 / vector::norm(&w_star), &mut w_star);

    (0..m)
        .map(|i| {
            let mut rng = NodeRng::stream(seed, STREAM_DATA_BASE + i as u64);
            let mut center = gaussian(&mut rng, d);
            let nrm = vector::norm(&center);
            vector::scale(heterogeneity * CLUSTER_SHIFT / nrm, &mut center);
            let samples = (0..n)
                .map(|_| {
                    let mut a = gaussian(&mut rng, d);
                    vector::axpy(1.0, &center, &mut a);
                    let mut label = if vector::dot(&w_star, &a) >= 0.0 { 1.0 } else { -1.0 };
                    let flip: f64 = rand::Rng::random(rng.inner());
                    if flip < LABEL_NOISE {
                        label = -label;
                    }
                    Sample::new(a, label)
                })
                .collect::<Result<Vec<_>>>()?;
            LogisticObjective::new(samples, lambda)
        })
        .collect()
}

/// Strongly convex quadratics `Q_i = BᵀB/d + 0.5·I` with linear terms whose
/// node-level means spread with `heterogeneity`. Component terms `c_ik` are
/// centered so their mean is exactly the node's `c_i`. Returns the nodes and
/// the global minimum value.
pub fn synthetic_quadratic(
    m: usize,
    n: usize,
    d: usize,
    seed: u64,
    heterogeneity: f64,
) -> Result<(Vec<QuadraticObjective>, f64)> {
    check_sizes(m, n, d, heterogeneity)?;
    let mut plant = NodeRng::stream(seed, STREAM_PLANT);
    let shared_c = gaussian(&mut plant, d);
    let nodes = (0..m)
        .map(|i| {
            let mut rng = NodeRng::stream(seed, STREAM_DATA_BASE + i as u64);
            let b = gaussian(&mut rng, d * d);
            let mut q = vec![0.0; d * d];
            for r in 0..d {
                for c in 0..d {
                    let v: f64 = (0..d).map(|k| b[k * d + r] * b[k * d + c]).sum::<f64>() / d as f64;
                    q[r * d + c] = v + if r == c { 0.5 } else { 0.0 };
                }
            }
            for r in 0..d {
                for c in 0..r {
                    q[r * d + c] = q[c * d + r];
                }
            }
            let mut c_node = shared_c.clone();
            vector::axpy(heterogeneity, &gaussian(&mut rng, d), &mut c_node);
            let mut offsets: Vec<Vec<f64>> = (0..n).map(|_| gaussian(&mut rng, d)).collect();
            let mean = vector::mean(&offsets);
            for o in &mut offsets {
                vector::axpy(-1.0, &mean, o);
                vector::scale(0.5, o);
                vector::axpy(1.0, &c_node, o);
            }
            QuadraticObjective::new(d, offsets.into_iter().map(|c| (q.clone(), c)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let (_, f_star) = global_minimizer(&nodes)
        .ok_or_else(|| Error::InvalidParameter("averaged Hessian is singular".into()))?;
    Ok((nodes, f_star))
}
