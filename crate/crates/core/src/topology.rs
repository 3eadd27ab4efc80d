//! Gossip topologies and the consensus-averaging primitive.
//!
//! A [`MixingMatrix`] is a symmetric, doubly stochastic, nonnegative matrix
//! with a positive diagonal whose off-diagonal support is a connected graph.
//! Its second-largest eigenvalue magnitude `nu` is the per-round contraction
//! factor of the disagreement `x - 1⊗x̄`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::vector;

/// Entry-wise tolerance used when validating symmetry and stochasticity.
pub const VALIDATION_TOL: f64 = 1e-12;

/// Above this size `nu` is computed by deflated power iteration instead of a
/// dense symmetric eigendecomposition.
const DENSE_EIGEN_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyKind {
    Ring,
    Regular3,
    Complete,
}

impl TopologyKind {
    pub fn build(self, m: usize) -> Result<MixingMatrix> {
        match self {
            TopologyKind::Ring => MixingMatrix::ring(m),
            TopologyKind::Regular3 => MixingMatrix::regular3(m),
            TopologyKind::Complete => MixingMatrix::complete(m),
        }
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ring" => Ok(TopologyKind::Ring),
            "regular3" => Ok(TopologyKind::Regular3),
            "complete" => Ok(TopologyKind::Complete),
            other => Err(Error::InvalidTopology(format!(
                "unknown topology `{other}` (expected ring | regular3 | complete)"
            ))),
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TopologyKind::Ring => "ring",
            TopologyKind::Regular3 => "regular3",
            TopologyKind::Complete => "complete",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    m: usize,
    /// Row-major `m × m`.
    weights: Vec<f64>,
    nu: f64,
    /// `N_i`, ascending, self included.
    neighbors: Vec<Vec<usize>>,
}

impl MixingMatrix {
    /// Ring where node `i` talks to `i ± 1 (mod m)`, weight 1/3 on self and
    /// each neighbor.
    pub fn ring(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidTopology(format!(
                "ring needs at least 3 nodes, got {m}"
            )));
        }
        let edges: Vec<(usize, usize)> = (0..m).map(|i| (i, (i + 1) % m)).collect();
        Self::from_edges(m, &edges)
    }

    /// 3-regular expander stand-in.
    ///
    /// Even `m`: circulant with offsets `{1, m/2, m-1}` (ring plus diameter
    /// chords), weights 1/4. Odd `m` admits no 3-regular graph; the ring is
    /// augmented greedily with chords to offset `⌊m/2⌋` while both endpoints
    /// have degree below 3, and every edge gets weight `1/(max_degree + 1)`
    /// with the remainder on the diagonal. Use [`MixingMatrix::degrees`] to
    /// inspect the realized degrees.
    pub fn regular3(m: usize) -> Result<Self> {
        if m < 4 {
            return Err(Error::InvalidTopology(format!(
                "3-regular graph needs at least 4 nodes, got {m}"
            )));
        }
        let mut edges: Vec<(usize, usize)> = (0..m).map(|i| (i, (i + 1) % m)).collect();
        let half = m / 2;
        if m % 2 == 0 {
            edges.extend((0..half).map(|i| (i, i + half)));
        } else {
            let mut degree = vec![2usize; m];
            for i in 0..m {
                let j = (i + half) % m;
                let dup = edges
                    .iter()
                    .any(|&(a, b)| (a, b) == (i, j) || (a, b) == (j, i));
                if !dup && degree[i] < 3 && degree[j] < 3 {
                    edges.push((i, j));
                    degree[i] += 1;
                    degree[j] += 1;
                }
            }
        }
        Self::from_edges(m, &edges)
    }

    /// `W = (1/m)·11ᵀ`, `nu = 0`.
    pub fn complete(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidTopology(format!(
                "complete graph needs at least 2 nodes, got {m}"
            )));
        }
        Self::from_weights(m, vec![1.0 / m as f64; m * m])
    }

    /// Uniform edge weights `1/(max_degree + 1)` on an undirected edge list;
    /// the diagonal absorbs the rest of each row.
    fn from_edges(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![false; m * m];
        for &(i, j) in edges {
            if i != j {
                adj[i * m + j] = true;
                adj[j * m + i] = true;
            }
        }
        let degree: Vec<usize> = (0..m)
            .map(|i| (0..m).filter(|&j| adj[i * m + j]).count())
            .collect();
        let max_degree = degree.iter().copied().max().unwrap_or(0);
        let w = 1.0 / (max_degree + 1) as f64;
        let mut weights = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                if adj[i * m + j] {
                    weights[i * m + j] = w;
                }
            }
            weights[i * m + i] = if degree[i] == max_degree {
                w
            } else {
                1.0 - degree[i] as f64 * w
            };
        }
        Self::from_weights(m, weights)
    }

    /// Validates a row-major weight matrix and computes its `nu`.
    pub fn from_weights(m: usize, weights: Vec<f64>) -> Result<Self> {
        validate(m, &weights)?;
        let nu = nu_of(m, &weights);
        if nu >= 1.0 - VALIDATION_TOL {
            return Err(Error::Validation(format!(
                "second eigenvalue magnitude {nu} is not below 1"
            )));
        }
        let neighbors = (0..m)
            .map(|i| (0..m).filter(|&j| weights[i * m + j] > 0.0).collect())
            .collect();
        Ok(MixingMatrix {
            m,
            weights,
            nu,
            neighbors,
        })
    }

    pub fn node_count(&self) -> usize {
        self.m
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.m + j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Number of neighbors of each node, self excluded.
    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(|n| n.len() - 1).collect()
    }

    /// `out_i = Σ_{j ∈ N_i} W_ij · v_j`.
    pub fn mix(&self, vectors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if vectors.len() != self.m {
            return Err(Error::shape(
                format!("{} node vectors", self.m),
                vectors.len(),
            ));
        }
        let d = vectors[0].len();
        if let Some(bad) = vectors.iter().find(|v| v.len() != d) {
            return Err(Error::shape(format!("dimension {d}"), bad.len()));
        }
        Ok((0..self.m).map(|i| self.mix_row(i, vectors)).collect())
    }

    /// Row `i` of [`MixingMatrix::mix`], without shape checks.
    pub fn mix_row(&self, i: usize, vectors: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; vectors[i].len()];
        for &j in &self.neighbors[i] {
            vector::axpy(self.weights[i * self.m + j], &vectors[j], &mut out);
        }
        out
    }
}

/// Checks symmetry, nonnegativity, positive diagonal, unit row and column
/// sums, and connectivity of the off-diagonal support.
pub fn validate(m: usize, weights: &[f64]) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidTopology(format!(
            "need at least 2 nodes, got {m}"
        )));
    }
    if weights.len() != m * m {
        return Err(Error::shape(format!("{m}x{m} weights"), weights.len()));
    }
    let at = |i: usize, j: usize| weights[i * m + j];
    for i in 0..m {
        if at(i, i) <= 0.0 {
            return Err(Error::Validation(format!("W[{i},{i}] is not positive")));
        }
        for j in 0..m {
            let w = at(i, j);
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Validation(format!("W[{i},{j}] = {w} is negative")));
            }
            if (w - at(j, i)).abs() > VALIDATION_TOL {
                return Err(Error::Validation(format!("W[{i},{j}] != W[{j},{i}]")));
            }
        }
        let row: f64 = (0..m).map(|j| at(i, j)).sum();
        let col: f64 = (0..m).map(|j| at(j, i)).sum();
        if (row - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::Validation(format!("row {i} sums to {row}")));
        }
        if (col - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::Validation(format!("column {i} sums to {col}")));
        }
    }
    let mut seen = vec![false; m];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..m {
            if !seen[j] && at(i, j) > 0.0 {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    if let Some(lonely) = seen.iter().position(|s| !s) {
        return Err(Error::Validation(format!(
            "graph is disconnected (node {lonely} unreachable from node 0)"
        )));
    }
    Ok(())
}

/// `nu = max(|λ_2|, |λ_m|)` of a validated mixing matrix.
pub fn compute_nu(w: &MixingMatrix) -> f64 {
    nu_of(w.m, &w.weights)
}

/// Validates a raw weight matrix, then returns its `nu`.
pub fn compute_nu_checked(m: usize, weights: &[f64]) -> Result<f64> {
    validate(m, weights)?;
    Ok(nu_of(m, weights))
}

fn nu_of(m: usize, weights: &[f64]) -> f64 {
    if m <= DENSE_EIGEN_LIMIT {
        let mat = DMatrix::from_row_slice(m, m, weights);
        let mut eig: Vec<f64> = mat.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        eig[1..].iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    } else {
        deflated_power_iteration(m, weights)
    }
}

/// Spectral radius of `W - 11ᵀ/m`, which equals `nu` for a symmetric doubly
/// stochastic `W`. Iterates on `B²` so that eigenvalues `±nu` do not make the
/// iteration oscillate.
fn deflated_power_iteration(m: usize, weights: &[f64]) -> f64 {
    let apply = |v: &[f64]| -> Vec<f64> {
        let s = v.iter().sum::<f64>() / m as f64;
        (0..m)
            .map(|i| {
                let row = &weights[i * m..(i + 1) * m];
                vector::dot(row, v) - s
            })
            .collect()
    };
    let mut v: Vec<f64> = (0..m).map(|i| ((i * 7919 + 13) % 101) as f64 - 50.0).collect();
    let mean = v.iter().sum::<f64>() / m as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    let mut estimate = 0.0;
    for _ in 0..200_000 {
        let nrm = vector::norm(&v);
        if nrm == 0.0 {
            return 0.0;
        }
        vector::scale(1.0 / nrm, &mut v);
        let next = apply(&apply(&v));
        let rayleigh = vector::dot(&v, &next).max(0.0).sqrt();
        v = next;
        if (rayleigh - estimate).abs() <= 1e-15 * rayleigh.max(1.0) {
            return rayleigh;
        }
        estimate = rayleigh;
    }
    estimate
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ring_of_three_is_complete() {
        let w = MixingMatrix::ring(3).unwrap();
        assert!(w.weights().iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert_abs_diff_eq!(w.nu(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ring_first_rows() {
        let w = MixingMatrix::ring(5).unwrap();
        let third = 1.0 / 3.0;
        assert_eq!(&w.weights()[..5], &[third, third, 0.0, 0.0, third]);
        let w4 = MixingMatrix::ring(4).unwrap();
        assert_eq!(&w4.weights()[..4], &[third, third, 0.0, third]);
        assert_abs_diff_eq!(w4.nu(), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn ring_rejects_small() {
        assert!(matches!(MixingMatrix::ring(2), Err(Error::InvalidTopology(_))));
    }

    #[test]
    fn regular3_even_sizes() {
        let k4 = MixingMatrix::regular3(4).unwrap();
        assert!(k4.weights().iter().all(|&x| (x - 0.25).abs() < 1e-15));
        assert_abs_diff_eq!(k4.nu(), 0.0, epsilon = 1e-12);
        for m in [6, 8, 10, 16] {
            let w = MixingMatrix::regular3(m).unwrap();
            assert!(w.degrees().iter().all(|&d| d == 3), "m={m}");
            assert!(w.weights().iter().all(|&x| x == 0.0 || x == 0.25));
        }
        let six = MixingMatrix::regular3(6).unwrap();
        assert_eq!(six.neighbors(0), &[0, 1, 3, 5]);
    }

    #[test]
    fn regular3_odd_reports_realized_degrees() {
        let w = MixingMatrix::regular3(5).unwrap();
        assert_eq!(w.degrees(), vec![3, 3, 3, 3, 2]);
        assert_abs_diff_eq!(w.weight(4, 4), 0.5, epsilon = 1e-15);
        assert!(MixingMatrix::regular3(3).is_err());
    }

    #[test]
    fn complete_graph() {
        let w = MixingMatrix::complete(2).unwrap();
        assert_eq!(w.weights(), &[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(w.nu(), 0.0);
        assert!(MixingMatrix::complete(5).unwrap().weights().iter().all(|&x| x == 0.2));
        assert!(matches!(MixingMatrix::complete(1), Err(Error::InvalidTopology(_))));
    }

    #[test]
    fn mix_examples() {
        let w = MixingMatrix::complete(2).unwrap();
        let out = w.mix(&[vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert_eq!(out, vec![vec![1.0, 1.0], vec![1.0, 1.0]]);

        let ring = MixingMatrix::ring(7).unwrap();
        let v = vec![0.3, -1.7, 4.0];
        let out = ring.mix(&vec![v.clone(); 7]).unwrap();
        for o in out {
            for (a, b) in o.iter().zip(&v) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn mix_rejects_bad_shapes() {
        let w = MixingMatrix::ring(3).unwrap();
        assert!(matches!(w.mix(&vec![vec![1.0]; 2]), Err(Error::Shape { .. })));
        assert!(matches!(
            w.mix(&[vec![1.0], vec![1.0, 2.0], vec![1.0]]),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn validation_rejects_each_violation() {
        // asymmetric but doubly stochastic
        let asym = vec![0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 0.5, 0.0, 0.5];
        assert!(matches!(validate(3, &asym), Err(Error::Validation(_))));
        // row sums off
        let rows = vec![0.6, 0.5, 0.5, 0.5];
        assert!(validate(2, &rows).is_err());
        // negative entry
        let neg = vec![1.5, -0.5, -0.5, 1.5];
        assert!(validate(2, &neg).is_err());
        // identity: disconnected
        let id = vec![1.0, 0.0, 0.0, 1.0];
        assert!(matches!(validate(2, &id), Err(Error::Validation(msg)) if msg.contains("disconnected")));
        // zero diagonal
        let zd = vec![0.0, 1.0, 1.0, 0.0];
        assert!(validate(2, &zd).is_err());
        assert!(compute_nu_checked(2, &zd).is_err());
    }

    #[test]
    fn power_iteration_matches_dense() {
        for m in [5, 9, 16, 40] {
            let w = MixingMatrix::ring(m).unwrap();
            let dense = nu_of(m, w.weights());
            let power = deflated_power_iteration(m, w.weights());
            assert_abs_diff_eq!(dense, power, epsilon = 1e-9);
        }
        // large ring uses the iterative path
        let big = MixingMatrix::ring(80).unwrap();
        let expected = (1.0 + 2.0 * (2.0 * std::f64::consts::PI / 80.0).cos()) / 3.0;
        assert_abs_diff_eq!(big.nu(), expected, epsilon = 1e-9);
    }
}
